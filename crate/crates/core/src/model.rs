//! Interval Markov chains and their well-formedness conditions.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::edges::Edge;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;
use crate::stateset::StateSet;

/// An interval Markov chain `(S, δ)`.
///
/// `δ` is total: pairs without a stored interval carry `[0,0]`. Rows are kept
/// sparse and sorted by target index, and never store `[0,0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Imc {
    states: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<(usize, Interval)>>,
}

impl Imc {
    /// A model over `states` where every pair is `[0,0]`.
    pub fn new<S: Into<String>>(states: impl IntoIterator<Item = S>) -> Result<Self> {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(states.len());
        for (i, name) in states.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateState(name.clone()));
            }
        }
        let rows = vec![Vec::new(); states.len()];
        Ok(Imc {
            states,
            index,
            rows,
        })
    }

    /// Sets `δ(source, target)`, replacing any previous interval.
    pub fn set(&mut self, source: usize, target: usize, iv: Interval) -> Result<()> {
        let n = self.len();
        if source >= n {
            return Err(Error::StateIndex(source));
        }
        if target >= n {
            return Err(Error::StateIndex(target));
        }
        let row = &mut self.rows[source];
        match row.binary_search_by_key(&target, |(t, _)| *t) {
            Ok(pos) if iv.is_zero() => {
                row.remove(pos);
            }
            Ok(pos) => row[pos].1 = iv,
            Err(_) if iv.is_zero() => {}
            Err(pos) => row.insert(pos, (target, iv)),
        }
        Ok(())
    }

    pub fn set_named(&mut self, source: &str, target: &str, iv: Interval) -> Result<()> {
        let s = self.index_of(source)?;
        let t = self.index_of(target)?;
        self.set(s, t, iv)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn state_set<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<StateSet> {
        let mut set = StateSet::empty(self.len());
        for name in names {
            set.insert(self.index_of(name)?);
        }
        Ok(set)
    }

    /// Member names in declared state order.
    pub fn names(&self, set: &StateSet) -> Vec<&str> {
        set.iter().map(|i| self.name(i)).collect()
    }

    pub fn delta(&self, source: usize, target: usize) -> Cow<'_, Interval> {
        let row = &self.rows[source];
        match row.binary_search_by_key(&target, |(t, _)| *t) {
            Ok(pos) => Cow::Borrowed(&row[pos].1),
            Err(_) => Cow::Owned(Interval::zero()),
        }
    }

    /// Outgoing edges of `source` with their intervals, sorted by target.
    pub fn row(&self, source: usize) -> &[(usize, Interval)] {
        &self.rows[source]
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().map(move |(t, _)| Edge::new(s, *t)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn well_formed(&self) -> WellFormednessReport {
        let rows = (0..self.len())
            .map(|s| RowVerdict::evaluate(self, s))
            .collect();
        WellFormednessReport { rows }
    }

    /// Copy where every state of `t` carries the self-loop `[1,1]` and nothing else.
    pub fn make_absorbing(&self, t: &StateSet) -> Result<Imc> {
        self.check_universe(t)?;
        let mut out = self.clone();
        for s in t.iter() {
            out.rows[s] = vec![(s, Interval::one())];
        }
        Ok(out)
    }

    /// Collapses rows whose lower endpoints sum to exactly 1.
    ///
    /// Such a row admits exactly one assignment (every edge at its lower
    /// endpoint), so each interval becomes the point `[lo,lo]` and edges with
    /// `lo = 0` disappear. The set of assignments of every state is unchanged.
    pub fn normalize_forced_rows(&self) -> Imc {
        let mut out = self.clone();
        for row in out.rows.iter_mut() {
            let lo_sum: Rational = row.iter().map(|(_, iv)| iv.lo()).sum();
            if !lo_sum.is_one() {
                continue;
            }
            let forced: Vec<(usize, Interval)> = row
                .iter()
                .filter(|(_, iv)| !iv.lo().is_zero())
                .map(|(t, iv)| {
                    let point = Interval::point(iv.lo().clone()).expect("lo lies in [0,1]");
                    (*t, point)
                })
                .collect();
            *row = forced;
        }
        out
    }

    pub(crate) fn check_universe(&self, set: &StateSet) -> Result<()> {
        if set.universe() != self.len() {
            return Err(Error::StateIndex(set.universe()));
        }
        Ok(())
    }
}

/// Verdicts on conditions 1a/1b/2a/2b for one state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowVerdict {
    pub state: usize,
    pub lo_sum: Rational,
    pub hi_sum: Rational,
    /// 1a: Σ lo ≤ 1
    pub lo_sum_ok: bool,
    /// 1b: Σ lo = 1 implies every interval is left-closed
    pub lo_closed_ok: bool,
    /// 2a: Σ hi ≥ 1
    pub hi_sum_ok: bool,
    /// 2b: Σ hi = 1 implies every interval is right-closed
    pub hi_closed_ok: bool,
}

impl RowVerdict {
    fn evaluate(m: &Imc, s: usize) -> Self {
        let row = m.row(s);
        let lo_sum: Rational = row.iter().map(|(_, iv)| iv.lo()).sum();
        let hi_sum: Rational = row.iter().map(|(_, iv)| iv.hi()).sum();
        let one = Rational::one();
        RowVerdict {
            state: s,
            lo_sum_ok: lo_sum <= one,
            lo_closed_ok: lo_sum != one || row.iter().all(|(_, iv)| !iv.lo_open()),
            hi_sum_ok: hi_sum >= one,
            hi_closed_ok: hi_sum != one || row.iter().all(|(_, iv)| !iv.hi_open()),
            lo_sum,
            hi_sum,
        }
    }

    pub fn ok(&self) -> bool {
        self.lo_sum_ok && self.lo_closed_ok && self.hi_sum_ok && self.hi_closed_ok
    }

    /// Names of the violated conditions.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.lo_sum_ok {
            out.push("1a");
        }
        if !self.lo_closed_ok {
            out.push("1b");
        }
        if !self.hi_sum_ok {
            out.push("2a");
        }
        if !self.hi_closed_ok {
            out.push("2b");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellFormednessReport {
    pub rows: Vec<RowVerdict>,
}

impl WellFormednessReport {
    pub fn is_well_formed(&self) -> bool {
        self.rows.iter().all(RowVerdict::ok)
    }

    pub fn violating(&self) -> impl Iterator<Item = &RowVerdict> {
        self.rows.iter().filter(|r| !r.ok())
    }

    /// One line per violated condition, naming the state by `names`.
    pub fn describe(&self, names: &[String]) -> Vec<String> {
        let mut lines = Vec::new();
        for row in self.violating() {
            let state = &names[row.state];
            for cond in row.violations() {
                let detail = match cond {
                    "1a" => format!("sum of left endpoints {} > 1", row.lo_sum),
                    "1b" => "sum of left endpoints is 1 but some interval is left-open".to_string(),
                    "2a" => format!("sum of right endpoints {} < 1", row.hi_sum),
                    _ => "sum of right endpoints is 1 but some interval is right-open".to_string(),
                };
                lines.push(format!(
                    "state {state}: condition {cond} violated ({detail})"
                ));
            }
        }
        lines
    }
}

impl fmt::Display for Imc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::emit_model(
            &crate::parser::ModelDocument::from_imc(self),
        ))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, ratio};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert!(fig1().well_formed().is_well_formed());
        assert!(fig2().well_formed().is_well_formed());
    }

    #[test]
    fn single_right_open_edge_violates_2b() {
        let mut m = Imc::new(["a", "b"]).unwrap();
        m.set(0, 1, Interval::new(int(0), int(1), true, true).unwrap())
            .unwrap();
        m.set(1, 1, Interval::one()).unwrap();
        let report = m.well_formed();
        assert!(!report.is_well_formed());
        assert_eq!(report.rows[0].violations(), vec!["2b"]);
        assert_eq!(report.rows[0].hi_sum, int(1));
    }

    #[test]
    fn short_hi_sum_violates_2a() {
        let mut m = Imc::new(["a", "b", "c"]).unwrap();
        m.set(0, 1, Interval::closed(int(0), ratio(2, 5)).unwrap())
            .unwrap();
        m.set(0, 2, Interval::closed(int(0), ratio(1, 2)).unwrap())
            .unwrap();
        m.set(1, 1, Interval::one()).unwrap();
        m.set(2, 2, Interval::one()).unwrap();
        let report = m.well_formed();
        assert_eq!(report.rows[0].violations(), vec!["2a"]);
        assert_eq!(report.rows[0].hi_sum, ratio(9, 10));
        let lines = report.describe(m.states());
        assert!(lines[0].contains("condition 2a"), "{lines:?}");
    }

    #[test]
    fn edges_of_fixtures() {
        let e1: Vec<(usize, usize)> = fig1()
            .edges()
            .iter()
            .map(|e| (e.source, e.target))
            .collect();
        assert_eq!(e1, vec![(0, 0), (0, 1), (1, 1)]);
        assert_eq!(fig2().edges().len(), 6);
        let mut loops = Imc::new(["a", "b"]).unwrap();
        loops.set(0, 0, Interval::one()).unwrap();
        loops.set(1, 1, Interval::one()).unwrap();
        assert!(loops.edges().iter().all(|e| e.source == e.target));
    }

    #[test]
    fn absorbing_rows() {
        let m = fig2();
        let t = StateSet::from_indices(3, [2]);
        assert_eq!(m.make_absorbing(&t).unwrap(), m);
        let t1 = StateSet::from_indices(3, [1]);
        let a = m.make_absorbing(&t1).unwrap();
        assert_eq!(*a.delta(1, 1), Interval::one());
        assert!(a.delta(1, 0).is_zero());
        assert!(a.delta(1, 2).is_zero());
        assert_eq!(a.row(0), m.row(0));
        assert_eq!(m.make_absorbing(&StateSet::empty(3)).unwrap(), m);
        assert!(m.make_absorbing(&StateSet::empty(5)).is_err());
    }

    #[test]
    fn forced_rows_collapse() {
        let mut m = Imc::new(["s", "a", "t"]).unwrap();
        m.set(0, 1, Interval::one()).unwrap();
        m.set(0, 2, Interval::closed(int(0), ratio(1, 2)).unwrap())
            .unwrap();
        m.set(1, 1, Interval::one()).unwrap();
        m.set(2, 2, Interval::one()).unwrap();
        let n = m.normalize_forced_rows();
        assert_eq!(n.row(0).len(), 1);
        assert!(n.delta(0, 2).is_zero());
        // rows with Σlo < 1 are untouched
        assert_eq!(fig2().normalize_forced_rows(), fig2());
    }

    #[test]
    fn duplicate_states_rejected() {
        assert!(matches!(
            Imc::new(["a", "a"]),
            Err(Error::DuplicateState(_))
        ));
    }

    fn arb_row() -> impl Strategy<Value = Vec<(i64, i64, bool, bool)>> {
        prop::collection::vec((0i64..=6, 0i64..=6, any::<bool>(), any::<bool>()), 1..5)
    }

    fn build_row(parts: &[(i64, i64, bool, bool)]) -> Imc {
        let names: Vec<String> = (0..parts.len()).map(|i| format!("q{i}")).collect();
        let mut m = Imc::new(names).unwrap();
        for (t, &(a, b, lo_open, hi_open)) in parts.iter().enumerate() {
            let (a, b) = (a.min(b), a.max(b));
            let iv = Interval::new(ratio(a, 6), ratio(b, 6), lo_open, hi_open)
                .unwrap_or_else(|_| Interval::point(ratio(a, 6)).unwrap());
            m.set(0, t, iv).unwrap();
        }
        m
    }

    proptest! {
        #[test]
        fn absorbing_is_idempotent(parts in arb_row(), pick in any::<prop::sample::Index>()) {
            let m = build_row(&parts);
            let t = StateSet::from_indices(m.len(), [pick.index(m.len())]);
            let once = m.make_absorbing(&t).unwrap();
            prop_assert_eq!(once.make_absorbing(&t).unwrap(), once);
        }

        #[test]
        fn sums_match_integer_recomputation(parts in arb_row()) {
            let m = build_row(&parts);
            let verdict = &m.well_formed().rows[0];
            // all endpoints are k/6, so scale by 6 and add integers
            let mut lo = BigInt::from(0);
            let mut hi = BigInt::from(0);
            for (_, iv) in m.row(0) {
                let scale = BigInt::from(6) / iv.lo().denom();
                lo += iv.lo().numer() * scale;
                let scale = BigInt::from(6) / iv.hi().denom();
                hi += iv.hi().numer() * scale;
            }
            let six = Rational::from_integer(BigInt::from(6));
            prop_assert_eq!(&verdict.lo_sum * &six, Rational::from_integer(lo));
            prop_assert_eq!(&verdict.hi_sum * &six, Rational::from_integer(hi));
        }

        #[test]
        fn widening_keeps_well_formedness(parts in arb_row(), which in any::<prop::sample::Index>()) {
            let m = build_row(&parts);
            prop_assume!(m.well_formed().rows[0].ok());
            let row = m.row(0).to_vec();
            let (t, iv) = &row[which.index(row.len())];
            let mut w = m.clone();
            w.set(0, *t, Interval::closed(int(0), int(1)).unwrap()).unwrap();
            prop_assert!(w.well_formed().rows[0].ok());
            let mut w2 = m.clone();
            w2.set(0, *t, Interval::new(iv.lo().clone(), int(1), iv.lo_open(), false).unwrap()).unwrap();
            prop_assert!(w2.well_formed().rows[0].ok());
        }
    }
}
