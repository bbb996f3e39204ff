//! Edge-set queries: largeness, realisability, validity and witness
//! assignments.
//!
//! A set `B` of outgoing edges of `s` is *valid* when it is large (its right
//! endpoints can absorb a total mass of 1) and realisable (every excluded edge
//! may carry probability exactly 0). Valid sets are the candidate supports of
//! assignments for `s`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::interval::{Bracket, Interval, LeftClass};
use crate::model::Imc;
use crate::rational::Rational;
use crate::stateset::StateSet;

/// Default cap on the number of excludable edges per state during enumeration.
pub const DEFAULT_GUARD: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
}

impl Edge {
    pub fn new(source: usize, target: usize) -> Self {
        Edge { source, target }
    }
}

pub type EdgeSet = BTreeSet<Edge>;

/// Interval classes used to filter edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    Bracket(Bracket),
    Left(LeftClass),
    /// Left endpoint 0, open or closed.
    ZeroLeft,
    /// Right-closed intervals, `⟨·,·]`.
    RightClosed,
}

impl EdgeClass {
    pub fn matches(self, iv: &Interval) -> bool {
        let class = iv.classify();
        match self {
            EdgeClass::Bracket(b) => class.bracket == b,
            EdgeClass::Left(l) => class.left == l,
            EdgeClass::ZeroLeft => class.left != LeftClass::Positive,
            EdgeClass::RightClosed => !iv.hi_open(),
        }
    }
}

pub fn edges_from(m: &Imc, s: usize) -> EdgeSet {
    m.row(s).iter().map(|(t, _)| Edge::new(s, *t)).collect()
}

pub fn edges_from_to(m: &Imc, s: usize, x: &StateSet) -> EdgeSet {
    m.row(s)
        .iter()
        .filter(|(t, _)| x.contains(*t))
        .map(|(t, _)| Edge::new(s, *t))
        .collect()
}

pub fn edges_from_to_class(m: &Imc, class: EdgeClass, s: usize, x: &StateSet) -> EdgeSet {
    m.row(s)
        .iter()
        .filter(|(t, iv)| x.contains(*t) && class.matches(iv))
        .map(|(t, _)| Edge::new(s, *t))
        .collect()
}

fn interval_of<'a>(m: &'a Imc, e: &Edge) -> Result<&'a Interval> {
    let row = m.row(e.source);
    row.binary_search_by_key(&e.target, |(t, _)| *t)
        .map(|pos| &row[pos].1)
        .map_err(|_| Error::NotOutgoing(e.source, e.target, e.source))
}

/// Whether the right endpoints of `intervals` can absorb a total mass of 1:
/// either `Σ hi > 1`, or `Σ hi = 1` with every interval right-closed.
/// An empty collection is never large.
pub fn large<'a>(intervals: impl IntoIterator<Item = &'a Interval>) -> bool {
    let mut sum = Rational::zero();
    let mut any = false;
    let mut all_closed = true;
    for iv in intervals {
        any = true;
        sum += iv.hi();
        all_closed &= !iv.hi_open();
    }
    let one = Rational::one();
    any && (sum > one || (sum == one && all_closed))
}

pub fn is_large(m: &Imc, b: &EdgeSet) -> Result<bool> {
    let mut source = None;
    let mut intervals = Vec::with_capacity(b.len());
    for e in b {
        match source {
            None => source = Some(e.source),
            Some(s) if s != e.source => return Err(Error::MixedSources(s, e.source)),
            _ => {}
        }
        intervals.push(interval_of(m, e)?);
    }
    Ok(large(intervals))
}

fn check_outgoing(m: &Imc, s: usize, b: &EdgeSet) -> Result<()> {
    if s >= m.len() {
        return Err(Error::StateIndex(s));
    }
    for e in b {
        if e.source != s {
            return Err(Error::NotOutgoing(e.source, e.target, s));
        }
        interval_of(m, e).map_err(|_| Error::NotOutgoing(e.source, e.target, s))?;
    }
    Ok(())
}

pub fn is_realisable(m: &Imc, s: usize, b: &EdgeSet) -> Result<bool> {
    check_outgoing(m, s, b)?;
    Ok(m.row(s)
        .iter()
        .filter(|(t, _)| !b.contains(&Edge::new(s, *t)))
        .all(|(_, iv)| iv.admits_zero()))
}

pub fn is_valid(m: &Imc, s: usize, b: &EdgeSet) -> Result<bool> {
    Ok(is_realisable(m, s, b)? && is_large(m, b)?)
}

/// All valid edge sets of `s`, ordered by the bitmask of excluded `[0,·⟩`
/// edges (bit `i` set excludes the `i`-th such edge in target order).
pub fn enumerate_valid_sets(m: &Imc, s: usize, guard: usize) -> Result<Vec<EdgeSet>> {
    if s >= m.len() {
        return Err(Error::StateIndex(s));
    }
    let row = m.row(s);
    let excludable: Vec<usize> = row
        .iter()
        .filter(|(_, iv)| iv.admits_zero())
        .map(|(t, _)| *t)
        .collect();
    if excludable.len() > guard {
        return Err(Error::GuardExceeded {
            state: s,
            count: excludable.len(),
            limit: guard,
        });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << excludable.len()) {
        let excluded = |t: usize| {
            excludable
                .iter()
                .position(|&x| x == t)
                .is_some_and(|i| mask & (1 << i) != 0)
        };
        let kept: Vec<&(usize, Interval)> = row.iter().filter(|(t, _)| !excluded(*t)).collect();
        if large(kept.iter().map(|(_, iv)| iv)) {
            out.push(kept.iter().map(|(t, _)| Edge::new(s, *t)).collect());
        }
    }
    Ok(out)
}

/// A distribution over successors of `state` given by its support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub state: usize,
    /// `(target, probability)` pairs sorted by target; probabilities are > 0.
    pub probs: Vec<(usize, Rational)>,
}

impl Assignment {
    pub fn prob(&self, target: usize) -> Rational {
        self.probs
            .iter()
            .find(|(t, _)| *t == target)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> EdgeSet {
        self.probs
            .iter()
            .map(|(t, _)| Edge::new(self.state, *t))
            .collect()
    }

    /// Sums to exactly 1, respects every interval of the row (with `[0,0]`
    /// for missing pairs) and stores no zero entries.
    pub fn is_assignment_for(&self, m: &Imc) -> bool {
        if self.state >= m.len() {
            return false;
        }
        let sum: Rational = self.probs.iter().map(|(_, p)| p).sum();
        if !sum.is_one() || self.probs.iter().any(|(_, p)| p.is_zero()) {
            return false;
        }
        let in_support_ok = self
            .probs
            .iter()
            .all(|(t, p)| *t < m.len() && m.delta(self.state, *t).contains(p));
        let zero = Rational::zero();
        let outside_ok = m
            .row(self.state)
            .iter()
            .filter(|(t, _)| !self.probs.iter().any(|(u, _)| u == t))
            .all(|(_, iv)| iv.contains(&zero));
        in_support_ok && outside_ok
    }
}

/// Picks values inside `intervals` summing to `mass`.
///
/// Entries flagged `positive` must come out strictly above 0 even when their
/// interval is `[0,·⟩`. Open endpoints are tightened by a common slack, then
/// mass is poured from the tightened lower bounds upward in order. Returns
/// `None` when no such choice exists.
pub(crate) fn fill(intervals: &[(&Interval, bool)], mass: &Rational) -> Option<Vec<Rational>> {
    let n = intervals.len();
    if n == 0 {
        return if mass.is_zero() {
            Some(Vec::new())
        } else {
            None
        };
    }
    let lo_sum: Rational = intervals.iter().map(|(iv, _)| iv.lo()).sum();
    let hi_sum: Rational = intervals.iter().map(|(iv, _)| iv.hi()).sum();
    let two_n = Rational::from_integer((2 * n).into());

    let mut slack: Option<Rational> = None;
    let mut consider = |c: Rational| {
        if c > Rational::zero() && slack.as_ref().is_none_or(|s| c < *s) {
            slack = Some(c);
        }
    };
    for (iv, _) in intervals {
        consider((iv.hi() - iv.lo()) / Rational::from_integer(2.into()));
    }
    consider((mass - &lo_sum) / &two_n);
    consider((&hi_sum - mass) / &two_n);
    let slack = slack.unwrap_or_else(Rational::zero);

    let bounds: Vec<(Rational, Rational)> = intervals
        .iter()
        .map(|(iv, positive)| {
            let lift = iv.lo_open() || (*positive && iv.lo().is_zero());
            let lo = if lift {
                iv.lo() + &slack
            } else {
                iv.lo().clone()
            };
            let hi = if iv.hi_open() {
                iv.hi() - &slack
            } else {
                iv.hi().clone()
            };
            (lo, hi)
        })
        .collect();

    let mut values: Vec<Rational> = bounds.iter().map(|(lo, _)| lo.clone()).collect();
    let mut rest = mass - values.iter().sum::<Rational>();
    if rest < Rational::zero() {
        return None;
    }
    for (v, (_, hi)) in values.iter_mut().zip(&bounds) {
        if rest.is_zero() {
            break;
        }
        let room = hi - &*v;
        if room <= Rational::zero() {
            continue;
        }
        let add = if room < rest { room } else { rest.clone() };
        *v += &add;
        rest -= add;
    }
    if !rest.is_zero() {
        return None;
    }
    let ok = values
        .iter()
        .zip(intervals)
        .all(|(v, (iv, positive))| iv.contains(v) && (!*positive || !v.is_zero()));
    ok.then_some(values)
}

/// An assignment for `s` whose support is exactly the targets of `b`.
pub fn witness_assignment(m: &Imc, s: usize, b: &EdgeSet) -> Result<Assignment> {
    if !is_valid(m, s, b)? {
        return Err(Error::InvalidEdgeSet(s));
    }
    let parts: Vec<(usize, &Interval)> = m
        .row(s)
        .iter()
        .filter(|(t, _)| b.contains(&Edge::new(s, *t)))
        .map(|(t, iv)| (*t, iv))
        .collect();
    let request: Vec<(&Interval, bool)> = parts.iter().map(|(_, iv)| (*iv, true)).collect();
    let values = fill(&request, &Rational::one()).ok_or(Error::NoWitness(s))?;
    let probs = parts.iter().map(|(t, _)| *t).zip(values).collect();
    Ok(Assignment { state: s, probs })
}
