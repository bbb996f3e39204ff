//! The four qualitative sets under the interval-MDP semantics.
//!
//! Three of them coincide with their UMC counterparts and are computed by the
//! very same code. The universal almost-sure set differs: a scheduler with
//! memory can drive the exit probability of an IMC-level end component (ILEC)
//! towards zero fast enough to stay inside it forever with positive
//! probability, so states that can reach such a component are excluded.

use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::interval::LeftClass;
use crate::model::Imc;
use crate::rational::Rational;
use crate::stateset::StateSet;
use crate::umc::{FixpointTrace, ReachProblem};

/// Why a state set fails to be an ILEC.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IlecViolation {
    /// Condition (1): `state` has an exit edge whose left endpoint is positive.
    PositiveExit { state: usize, target: usize },
    /// Condition (2): the right endpoints of the edges `state` keeps inside
    /// the set sum to less than 1.
    InteriorMass { state: usize, sum: Rational },
    /// Condition (3): the induced subgraph is not strongly connected.
    NotStronglyConnected,
}

impl IlecViolation {
    pub fn condition(&self) -> u8 {
        match self {
            IlecViolation::PositiveExit { .. } => 1,
            IlecViolation::InteriorMass { .. } => 2,
            IlecViolation::NotStronglyConnected => 3,
        }
    }
}

impl fmt::Display for IlecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IlecViolation::PositiveExit { state, target } => write!(
                f,
                "condition 1: edge ({state},{target}) leaves the set with a positive left endpoint"
            ),
            IlecViolation::InteriorMass { state, sum } => write!(
                f,
                "condition 2: state {state} keeps right-endpoint mass {sum} < 1 inside the set"
            ),
            IlecViolation::NotStronglyConnected => {
                write!(f, "condition 3: the set is not strongly connected")
            }
        }
    }
}

/// Condition (1) for one state: no exit edge with a positive left endpoint.
fn positive_exit(m: &Imc, s: usize, c: &StateSet) -> Option<usize> {
    m.row(s)
        .iter()
        .find(|(t, iv)| !c.contains(*t) && iv.classify().left == LeftClass::Positive)
        .map(|(t, _)| *t)
}

/// Condition (2) for one state: Σ hi over edges staying in `c`.
fn interior_mass(m: &Imc, s: usize, c: &StateSet) -> Rational {
    m.row(s)
        .iter()
        .filter(|(t, _)| c.contains(*t))
        .map(|(_, iv)| iv.hi())
        .sum()
}

fn locally_ok(m: &Imc, s: usize, c: &StateSet) -> bool {
    positive_exit(m, s, c).is_none() && interior_mass(m, s, c) >= Rational::one()
}

/// Every violated ILEC condition of `c`, per state in index order.
pub fn ilec_violations(m: &Imc, c: &StateSet) -> Result<Vec<IlecViolation>> {
    m.check_universe(c)?;
    if c.is_empty() {
        return Err(Error::EmptyComponent);
    }
    let mut out = Vec::new();
    for s in c.iter() {
        if let Some(target) = positive_exit(m, s, c) {
            out.push(IlecViolation::PositiveExit { state: s, target });
        }
        let sum = interior_mass(m, s, c);
        if sum < Rational::one() {
            out.push(IlecViolation::InteriorMass { state: s, sum });
        }
    }
    if !Digraph::from_imc(m).is_strongly_connected(c) {
        out.push(IlecViolation::NotStronglyConnected);
    }
    Ok(out)
}

pub fn is_ilec(m: &Imc, c: &StateSet) -> Result<bool> {
    Ok(ilec_violations(m, c)?.is_empty())
}

/// Maximal ILECs disjoint from the target and their union `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlecReport {
    /// Ordered by smallest member.
    pub ilecs: Vec<StateSet>,
    pub union: StateSet,
    /// Refinement rounds that removed at least one state.
    pub rounds: usize,
}

impl ReachProblem {
    /// SCC refinement: split `S ∖ T` into SCCs, drop states violating
    /// conditions (1) or (2) relative to their component, re-split, repeat.
    pub fn maximal_ilecs_avoiding(&self) -> IlecReport {
        let m = &self.model;
        let n = m.len();
        let mut current = self.graph.sccs(&self.target.complement());
        let mut stable = Vec::new();
        let mut rounds = 0;
        loop {
            let mut next = Vec::new();
            for c in current {
                let keep = StateSet::from_indices(n, c.iter().filter(|&s| locally_ok(m, s, &c)));
                if keep == c {
                    stable.push(c);
                } else if !keep.is_empty() {
                    next.extend(self.graph.sccs(&keep));
                }
            }
            if next.is_empty() {
                // a round that only emptied components still removed states
                break;
            }
            rounds += 1;
            current = next;
        }
        stable.sort_by_key(|c| c.first());
        let mut union = StateSet::empty(n);
        for c in &stable {
            union.union_with(c);
        }
        IlecReport {
            ilecs: stable,
            union,
            rounds,
        }
    }

    /// States where every IMDP scheduler reaches the target almost surely:
    /// those that cannot reach any ILEC avoiding the target.
    pub fn aq1_imdp(&self) -> (StateSet, IlecReport) {
        let report = self.maximal_ilecs_avoiding();
        let aq1 = self.graph.can_reach(&report.union).complement();
        (aq1, report)
    }

    pub fn aq0_imdp(&self) -> StateSet {
        self.aq0()
    }

    pub fn eq0_imdp(&self) -> (StateSet, FixpointTrace) {
        self.eq0()
    }

    pub fn eq1_imdp(&self) -> (StateSet, FixpointTrace) {
        self.eq1()
    }
}

pub fn maximal_ilecs_avoiding(m: &Imc, target: &StateSet) -> Result<IlecReport> {
    Ok(ReachProblem::new(m, target)?.maximal_ilecs_avoiding())
}

pub fn aq0_imdp(m: &Imc, target: &StateSet) -> Result<StateSet> {
    crate::umc::aq0_umc(m, target)
}

pub fn eq0_imdp(m: &Imc, target: &StateSet) -> Result<(StateSet, FixpointTrace)> {
    crate::umc::eq0_umc(m, target)
}

pub fn eq1_imdp(m: &Imc, target: &StateSet) -> Result<(StateSet, FixpointTrace)> {
    crate::umc::eq1_umc(m, target)
}

pub fn aq1_imdp(m: &Imc, target: &StateSet) -> Result<(StateSet, IlecReport)> {
    Ok(ReachProblem::new(m, target)?.aq1_imdp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::model::fixtures::{fig1, fig2};
    use crate::oracle::{random_model, RandomModelSpec};
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn s(n: usize, xs: &[usize]) -> StateSet {
        StateSet::from_indices(n, xs.iter().copied())
    }

    pub(crate) fn leaky_loop() -> Imc {
        let mut m = Imc::new(["s", "o1", "o2"]).unwrap();
        m.set(0, 0, Interval::closed(ratio(3, 5), ratio(4, 5)).unwrap())
            .unwrap();
        m.set(0, 1, Interval::closed(int(0), ratio(1, 5)).unwrap())
            .unwrap();
        m.set(0, 2, Interval::closed(int(0), ratio(1, 5)).unwrap())
            .unwrap();
        m.set(1, 1, Interval::one()).unwrap();
        m.set(2, 2, Interval::one()).unwrap();
        m
    }

    pub(crate) fn positive_exit_pair() -> Imc {
        let mut m = Imc::new(["s", "c", "o"]).unwrap();
        m.set(0, 0, Interval::closed(int(0), ratio(1, 2)).unwrap())
            .unwrap();
        m.set(0, 1, Interval::closed(int(0), ratio(1, 2)).unwrap())
            .unwrap();
        m.set(0, 2, Interval::closed(ratio(1, 10), ratio(1, 2)).unwrap())
            .unwrap();
        m.set(1, 0, Interval::one()).unwrap();
        m.set(2, 2, Interval::one()).unwrap();
        m
    }

    #[test]
    fn fixture_ilecs() {
        assert!(is_ilec(&fig1(), &s(2, &[0])).unwrap());
        assert!(is_ilec(&fig2(), &s(3, &[0, 1])).unwrap());
        assert!(!is_ilec(&fig2(), &s(3, &[1])).unwrap());
        assert!(matches!(
            is_ilec(&fig2(), &StateSet::empty(3)),
            Err(Error::EmptyComponent)
        ));
    }

    #[test]
    fn rejected_configurations() {
        let a = leaky_loop();
        assert!(a.well_formed().is_well_formed());
        let va = ilec_violations(&a, &s(3, &[0])).unwrap();
        assert_eq!(
            va.iter().map(IlecViolation::condition).collect::<Vec<_>>(),
            vec![2]
        );
        let b = positive_exit_pair();
        assert!(b.well_formed().is_well_formed());
        let vb = ilec_violations(&b, &s(3, &[0, 1])).unwrap();
        assert_eq!(
            vb,
            vec![IlecViolation::PositiveExit {
                state: 0,
                target: 2
            }]
        );
    }

    #[test]
    fn refinement_on_fixtures() {
        let r2 = maximal_ilecs_avoiding(&fig2(), &s(3, &[2])).unwrap();
        assert_eq!(r2.ilecs, vec![s(3, &[0, 1])]);
        assert_eq!(r2.union, s(3, &[0, 1]));
        let r1 = maximal_ilecs_avoiding(&fig1(), &s(2, &[1])).unwrap();
        assert_eq!(r1.ilecs, vec![s(2, &[0])]);
        let all = maximal_ilecs_avoiding(&fig2(), &StateSet::full(3)).unwrap();
        assert!(all.ilecs.is_empty() && all.union.is_empty());
    }

    #[test]
    fn aq1_on_fixtures() {
        assert_eq!(aq1_imdp(&fig1(), &s(2, &[1])).unwrap().0, s(2, &[1]));
        assert_eq!(aq1_imdp(&fig2(), &s(3, &[2])).unwrap().0, s(3, &[2]));
        let t = s(2, &[1]);
        let umc = crate::umc::aq1_umc(&fig1(), &t).unwrap();
        let imdp = aq1_imdp(&fig1(), &t).unwrap().0;
        assert_eq!(umc.difference(&imdp), s(2, &[0]));
    }

    /// All maximal ILECs disjoint from `t`, by subset enumeration.
    fn brute_maximal(m: &Imc, t: &StateSet) -> Vec<StateSet> {
        let n = m.len();
        let ilecs: Vec<StateSet> = (1u32..(1 << n))
            .map(|mask| StateSet::from_indices(n, (0..n).filter(|i| mask & (1 << i) != 0)))
            .filter(|c| c.is_disjoint(t) && is_ilec(m, c).unwrap())
            .collect();
        let mut maximal: Vec<StateSet> = ilecs
            .iter()
            .filter(|c| !ilecs.iter().any(|d| d != *c && c.is_subset(d)))
            .cloned()
            .collect();
        maximal.sort_by_key(|c| c.first());
        maximal
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn refinement_matches_subset_enumeration(seed in any::<u64>(), states in 1usize..=6, tmask in any::<u32>()) {
            let m = random_model(&RandomModelSpec { states, seed, ..RandomModelSpec::default() });
            let t = StateSet::from_indices(states, (0..states).filter(|i| tmask & (1 << i) != 0));
            let p = ReachProblem::new(&m, &t).unwrap();
            let report = p.maximal_ilecs_avoiding();
            for c in &report.ilecs {
                prop_assert!(is_ilec(&p.model, c).unwrap());
            }
            prop_assert_eq!(&report.ilecs, &brute_maximal(&p.model, &t));
            prop_assert!(report.rounds <= states);
            let (aq1, _) = p.aq1_imdp();
            prop_assert!(t.is_subset(&aq1));
            prop_assert!(aq1.is_subset(&p.aq1()));
        }

        #[test]
        fn positive_lower_bounds_make_semantics_agree(seed in any::<u64>(), states in 1usize..=6, tmask in any::<u32>()) {
            // every edge keeps a positive left endpoint except absorbing self-loops
            let m = random_model(&RandomModelSpec { states, seed, zero_lo_prob: 0.0, ..RandomModelSpec::default() });
            let t = StateSet::from_indices(states, (0..states).filter(|i| tmask & (1 << i) != 0));
            let p = ReachProblem::new(&m, &t).unwrap();
            let (eq0, _) = p.eq0();
            prop_assume!(eq0.is_empty());
            prop_assert_eq!(p.aq1_imdp().0, p.aq1());
        }
    }
}
