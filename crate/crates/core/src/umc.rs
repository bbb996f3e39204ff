//! The four qualitative sets under the uncertain-Markov-chain semantics.
//!
//! `CPre` and `APre` are evaluated directly on the interval rows: no
//! abstraction with exponentially many actions is ever built.

use num_traits::{One, Zero};

use crate::edges::large;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::model::Imc;
use crate::rational::Rational;
use crate::stateset::StateSet;

/// Intermediate sets of a fixpoint computation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FixpointTrace {
    /// `X_0, X_1, ...` for the single fixpoint; `Y_0, Y_1, ...` for the nested one.
    pub sets: Vec<StateSet>,
    /// Growing rounds of each inner fixpoint.
    pub inner: Vec<usize>,
    /// Strict changes of the outer sequence (0 for a single fixpoint).
    pub outer: usize,
}

/// States with an assignment whose support lies inside `x`.
pub fn cpre(m: &Imc, x: &StateSet) -> StateSet {
    let mut out = StateSet::empty(m.len());
    for s in 0..m.len() {
        let row = m.row(s);
        let stays_zero = row
            .iter()
            .filter(|(t, _)| !x.contains(*t))
            .all(|(_, iv)| iv.admits_zero());
        if stays_zero && large(row.iter().filter(|(t, _)| x.contains(*t)).map(|(_, iv)| iv)) {
            out.insert(s);
        }
    }
    out
}

/// States with an assignment supported inside `y` that touches `x`.
pub fn apre(m: &Imc, y: &StateSet, x: &StateSet) -> StateSet {
    let mut out = StateSet::empty(m.len());
    for s in 0..m.len() {
        let row = m.row(s);
        let touches = row.iter().any(|(t, _)| x.contains(*t) && y.contains(*t));
        let stays_zero = row
            .iter()
            .filter(|(t, _)| !y.contains(*t))
            .all(|(_, iv)| iv.admits_zero());
        if touches
            && stays_zero
            && large(row.iter().filter(|(t, _)| y.contains(*t)).map(|(_, iv)| iv))
        {
            out.insert(s);
        }
    }
    out
}

/// A well-formed model with an absorbing, normalized target, ready for the
/// fixpoint algorithms of both semantics.
#[derive(Clone, Debug)]
pub struct ReachProblem {
    pub model: Imc,
    pub target: StateSet,
    pub graph: Digraph,
}

impl ReachProblem {
    pub fn new(m: &Imc, target: &StateSet) -> Result<Self> {
        let model = m.make_absorbing(target)?.normalize_forced_rows();
        let report = model.well_formed();
        if !report.is_well_formed() {
            return Err(Error::IllFormed(report.describe(model.states()).join("; ")));
        }
        let graph = Digraph::from_imc(&model);
        Ok(ReachProblem {
            model,
            target: target.clone(),
            graph,
        })
    }

    fn n(&self) -> usize {
        self.model.len()
    }

    /// States from which no resolution reaches the target.
    pub fn aq0(&self) -> StateSet {
        self.graph.can_reach(&self.target).complement()
    }

    /// States with some resolution avoiding the target almost surely.
    ///
    /// Grows `X_{i+1} = X_i ∪ (S ∖ CPre(S ∖ X_i))` from `X_0 = T` and returns
    /// the complement of the fixpoint. Per-state counters make each round
    /// proportional to the edges entering the newest layer.
    pub fn eq0(&self) -> (StateSet, FixpointTrace) {
        let n = self.n();
        let m = &self.model;
        let mut x = self.target.clone();
        let mut blocking_in = vec![0usize; n];
        let mut hi_out = vec![Rational::zero(); n];
        let mut open_out = vec![0usize; n];
        let mut count_out = vec![0usize; n];
        for s in 0..n {
            for (t, iv) in m.row(s) {
                if x.contains(*t) {
                    blocking_in[s] += usize::from(!iv.admits_zero());
                } else {
                    hi_out[s] += iv.hi();
                    count_out[s] += 1;
                    open_out[s] += usize::from(iv.hi_open());
                }
            }
        }
        let one = Rational::one();
        // s ∉ CPre(S ∖ X)
        let escapes_to_x = |s: usize,
                            blocking_in: &[usize],
                            hi_out: &[Rational],
                            open_out: &[usize],
                            count_out: &[usize]| {
            let avoid_large =
                count_out[s] > 0 && (hi_out[s] > one || (hi_out[s] == one && open_out[s] == 0));
            blocking_in[s] > 0 || !avoid_large
        };

        let mut trace = FixpointTrace {
            sets: vec![x.clone()],
            ..Default::default()
        };
        let mut rounds = 0;
        let mut candidates: Vec<usize> = (0..n).filter(|&s| !x.contains(s)).collect();
        loop {
            let mut layer: Vec<usize> = candidates
                .drain(..)
                .filter(|&s| {
                    !x.contains(s) && escapes_to_x(s, &blocking_in, &hi_out, &open_out, &count_out)
                })
                .collect();
            layer.sort_unstable();
            layer.dedup();
            if layer.is_empty() {
                break;
            }
            for &v in &layer {
                x.insert(v);
            }
            for &v in &layer {
                for &p in self.graph.predecessors(v) {
                    let iv = m.delta(p, v);
                    blocking_in[p] += usize::from(!iv.admits_zero());
                    hi_out[p] -= iv.hi();
                    count_out[p] -= 1;
                    open_out[p] -= usize::from(iv.hi_open());
                    if !x.contains(p) {
                        candidates.push(p);
                    }
                }
            }
            rounds += 1;
            trace.sets.push(x.clone());
        }
        trace.inner.push(rounds);
        (x.complement(), trace)
    }

    /// States with some resolution reaching the target almost surely:
    /// `νY. μX. T ∪ APre(Y, X)`.
    pub fn eq1(&self) -> (StateSet, FixpointTrace) {
        let n = self.n();
        let m = &self.model;
        let mut y = StateSet::full(n);
        let mut trace = FixpointTrace {
            sets: vec![y.clone()],
            ..Default::default()
        };
        loop {
            // APre conditions (2) and (3) depend on Y only.
            let eligible: Vec<bool> = (0..n)
                .map(|s| {
                    let row = m.row(s);
                    row.iter()
                        .filter(|(t, _)| !y.contains(*t))
                        .all(|(_, iv)| iv.admits_zero())
                        && large(row.iter().filter(|(t, _)| y.contains(*t)).map(|(_, iv)| iv))
                })
                .collect();
            let mut x = self.target.clone();
            let mut frontier: Vec<usize> = x.iter().collect();
            let mut rounds = 0;
            loop {
                let mut next = Vec::new();
                for &v in &frontier {
                    if !y.contains(v) {
                        continue;
                    }
                    for &p in self.graph.predecessors(v) {
                        if eligible[p] && !x.contains(p) {
                            next.push(p);
                        }
                    }
                }
                next.sort_unstable();
                next.dedup();
                if next.is_empty() {
                    break;
                }
                for &p in &next {
                    x.insert(p);
                }
                frontier = next;
                rounds += 1;
            }
            trace.inner.push(rounds);
            if x == y {
                break;
            }
            y = x;
            trace.outer += 1;
            trace.sets.push(y.clone());
        }
        (y, trace)
    }

    /// States where every resolution reaches the target almost surely.
    pub fn aq1(&self) -> StateSet {
        let (eq0, _) = self.eq0();
        self.aq1_from_eq0(&eq0)
    }

    pub(crate) fn aq1_from_eq0(&self, eq0: &StateSet) -> StateSet {
        self.graph.can_reach(eq0).complement()
    }
}

pub fn aq0_umc(m: &Imc, target: &StateSet) -> Result<StateSet> {
    Ok(ReachProblem::new(m, target)?.aq0())
}

pub fn eq0_umc(m: &Imc, target: &StateSet) -> Result<(StateSet, FixpointTrace)> {
    Ok(ReachProblem::new(m, target)?.eq0())
}

pub fn eq1_umc(m: &Imc, target: &StateSet) -> Result<(StateSet, FixpointTrace)> {
    Ok(ReachProblem::new(m, target)?.eq1())
}

pub fn aq1_umc(m: &Imc, target: &StateSet) -> Result<StateSet> {
    Ok(ReachProblem::new(m, target)?.aq1())
}
