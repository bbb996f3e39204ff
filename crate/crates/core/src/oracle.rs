//! Brute-force cross-check through the qualitative MDP abstraction.
//!
//! The abstraction has one action per valid edge set of every state, which
//! can be exponential in the number of `[0,·⟩` edges. On small models the
//! textbook finite-MDP algorithms over these explicit actions give an
//! independent answer for every set except the IMDP universal almost-sure
//! set, which no finite abstraction captures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edges::{enumerate_valid_sets, witness_assignment, Assignment};
use crate::error::Result;
use crate::interval::Interval;
use crate::model::Imc;
use crate::parser::{emit_model, ModelDocument};
use crate::rational::ratio;
use crate::stateset::StateSet;
use crate::umc::ReachProblem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub support: StateSet,
    pub witness: Assignment,
}

/// Finite MDP whose actions are one witness assignment per valid edge set.
#[derive(Clone, Debug)]
pub struct QaMdp {
    pub actions: Vec<Vec<Action>>,
}

impl QaMdp {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Builds the abstraction of a well-formed model whose forced rows are
/// already normalized (see [`Imc::normalize_forced_rows`]).
pub fn build_qa(m: &Imc, guard: usize) -> Result<QaMdp> {
    let n = m.len();
    let mut actions = Vec::with_capacity(n);
    for s in 0..n {
        let mut here = Vec::new();
        for b in enumerate_valid_sets(m, s, guard)? {
            let witness = witness_assignment(m, s, &b)?;
            let support = StateSet::from_indices(n, b.iter().map(|e| e.target));
            here.push(Action { support, witness });
        }
        actions.push(here);
    }
    Ok(QaMdp { actions })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSets {
    pub aq0: StateSet,
    pub eq0: StateSet,
    pub eq1: StateSet,
    pub aq1: StateSet,
}

/// States where some action sequence reaches `x` with positive probability.
fn exists_reach(qa: &QaMdp, x: &StateSet) -> StateSet {
    let mut r = x.clone();
    loop {
        let mut grew = false;
        for s in 0..qa.len() {
            if !r.contains(s) && qa.actions[s].iter().any(|a| !a.support.is_disjoint(&r)) {
                r.insert(s);
                grew = true;
            }
        }
        if !grew {
            return r;
        }
    }
}

pub fn oracle_sets(qa: &QaMdp, target: &StateSet) -> OracleSets {
    let n = qa.len();

    let aq0 = exists_reach(qa, target).complement();

    // every scheduler reaches the target with positive probability
    let mut forced = target.clone();
    loop {
        let next: Vec<usize> = (0..n)
            .filter(|&s| {
                !forced.contains(s)
                    && qa.actions[s]
                        .iter()
                        .all(|a| !a.support.is_disjoint(&forced))
            })
            .collect();
        if next.is_empty() {
            break;
        }
        for s in next {
            forced.insert(s);
        }
    }
    let eq0 = forced.complement();

    let mut y = StateSet::full(n);
    let eq1 = loop {
        let mut x = target.clone();
        loop {
            let next: Vec<usize> = (0..n)
                .filter(|&s| {
                    !x.contains(s)
                        && qa.actions[s]
                            .iter()
                            .any(|a| a.support.is_subset(&y) && !a.support.is_disjoint(&x))
                })
                .collect();
            if next.is_empty() {
                break;
            }
            for s in next {
                x.insert(s);
            }
        }
        if x == y {
            break y;
        }
        y = x;
    };

    let aq1 = exists_reach(qa, &eq0).complement();

    OracleSets { aq0, eq0, eq1, aq1 }
}

/// Parameters of the random well-formed model generator.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomModelSpec {
    pub states: usize,
    /// Probability that an ordered pair carries an edge.
    pub density: f64,
    /// Endpoints are drawn from `{0, 1/d, ..., 1}`.
    pub denominator: i64,
    /// Probability of each endpoint being open.
    pub open_prob: f64,
    /// Probability of drawing a left endpoint of 0.
    pub zero_lo_prob: f64,
    pub seed: u64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        RandomModelSpec {
            states: 4,
            density: 0.5,
            denominator: 4,
            open_prob: 0.3,
            zero_lo_prob: 0.5,
            seed: 0,
        }
    }
}

struct DrawnEdge {
    target: usize,
    lo: i64,
    hi: i64,
    lo_open: bool,
    hi_open: bool,
}

fn draw_row(spec: &RandomModelSpec, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<DrawnEdge>> {
    let d = spec.denominator.max(1);
    let mut targets: Vec<usize> = (0..n).filter(|_| rng.gen_bool(spec.density)).collect();
    if targets.is_empty() {
        targets.push(rng.gen_range(0..n));
    }
    let min_lo = if spec.zero_lo_prob > 0.0 { 0 } else { 1 };
    let mut row: Vec<DrawnEdge> = targets
        .into_iter()
        .map(|target| {
            let lo = if min_lo == 0 && rng.gen_bool(spec.zero_lo_prob) {
                0
            } else {
                rng.gen_range(1..=d)
            };
            let hi = rng.gen_range(lo.max(1)..=d);
            DrawnEdge {
                target,
                lo,
                hi,
                lo_open: rng.gen_bool(spec.open_prob),
                hi_open: rng.gen_bool(spec.open_prob),
            }
        })
        .collect();

    // widen: Σhi ≥ 1
    if row.iter().map(|e| e.hi).sum::<i64>() < d {
        let widest = row.iter_mut().max_by_key(|e| e.hi)?;
        widest.hi = d;
        widest.hi_open = false;
    }
    // shrink: Σlo ≤ 1
    while row.iter().map(|e| e.lo).sum::<i64>() > d {
        let largest = row.iter_mut().max_by_key(|e| e.lo)?;
        if largest.lo <= min_lo {
            return None;
        }
        largest.lo -= 1;
    }
    let lo_sum: i64 = row.iter().map(|e| e.lo).sum();
    let hi_sum: i64 = row.iter().map(|e| e.hi).sum();
    for e in row.iter_mut() {
        if lo_sum == d {
            e.lo_open = false;
        }
        if hi_sum == d {
            e.hi_open = false;
        }
        if e.lo == e.hi {
            e.lo_open = false;
            e.hi_open = false;
        }
    }
    Some(row)
}

/// A random well-formed model. Rows that cannot be repaired are redrawn.
pub fn random_model(spec: &RandomModelSpec) -> Imc {
    let n = spec.states.max(1);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut m = Imc::new(names).expect("generated names are unique");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.denominator.max(1);
    for s in 0..n {
        let row = loop {
            if let Some(row) = draw_row(spec, &mut rng, n) {
                break row;
            }
        };
        for e in row {
            let iv = Interval::new(ratio(e.lo, d), ratio(e.hi, d), e.lo_open, e.hi_open)
                .expect("drawn intervals are non-empty");
            m.set(s, e.target, iv).expect("indices in range");
        }
    }
    debug_assert!(m.well_formed().is_well_formed());
    m
}

/// Mixes the run seed with an instance index.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A non-empty proper subset of the states when there are at least two.
pub fn random_target(n: usize, rng: &mut impl Rng) -> StateSet {
    if n <= 1 {
        return StateSet::full(n);
    }
    loop {
        let t = StateSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.35)));
        if !t.is_empty() && t.len() < n {
            return t;
        }
    }
}

/// Outcome of checking one model and target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceCheck {
    /// Disagreements between the polynomial algorithms and the oracle.
    pub mismatches: Vec<String>,
    /// Broken containment or iteration-bound properties.
    pub violations: Vec<String>,
}

impl InstanceCheck {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.violations.is_empty()
    }
}

/// Compares every polynomial-time set against the oracle and checks the
/// containments that must hold between them.
pub fn check_instance(m: &Imc, target: &StateSet, guard: usize) -> Result<InstanceCheck> {
    let problem = ReachProblem::new(m, target)?;
    let qa = build_qa(&problem.model, guard)?;
    let oracle = oracle_sets(&qa, target);
    let n = m.len();

    let aq0 = problem.aq0();
    let (eq0, trace0) = problem.eq0();
    let (eq1, trace1) = problem.eq1();
    let aq1 = problem.aq1_from_eq0(&eq0);
    let (aq1_i, ilecs) = problem.aq1_imdp();

    let mut mismatches = Vec::new();
    let mut compare = |name: &str, got: &StateSet, want: &StateSet| {
        if got != want {
            mismatches.push(format!(
                "{name}: algorithm {:?} vs oracle {:?}",
                m.names(got),
                m.names(want)
            ));
        }
    };
    compare("AQ0,U", &aq0, &oracle.aq0);
    compare("EQ0,U", &eq0, &oracle.eq0);
    compare("EQ1,U", &eq1, &oracle.eq1);
    compare("AQ1,U", &aq1, &oracle.aq1);
    compare("AQ0,I", &problem.aq0_imdp(), &oracle.aq0);
    compare("EQ0,I", &problem.eq0_imdp().0, &oracle.eq0);
    compare("EQ1,I", &problem.eq1_imdp().0, &oracle.eq1);

    let mut violations = Vec::new();
    let mut require = |cond: bool, what: &str| {
        if !cond {
            violations.push(what.to_string());
        }
    };
    require(aq0.is_subset(&eq0), "AQ0 ⊆ EQ0");
    require(aq1.is_subset(&eq1), "AQ1 ⊆ EQ1");
    require(aq1_i.is_subset(&aq1), "AQ1,I ⊆ AQ1,U");
    require(target.is_subset(&aq1_i), "T ⊆ AQ1,I");
    require(target.is_disjoint(&aq0), "T ∩ AQ0 = ∅");
    require(
        eq1.intersection(&eq0).intersection(target).is_empty(),
        "EQ1 ∩ EQ0 ∩ T = ∅",
    );
    require(trace0.inner.iter().all(|&r| r <= n), "EQ0 rounds ≤ |S|");
    require(
        trace1.inner.iter().all(|&r| r <= n),
        "EQ1 inner rounds ≤ |S|",
    );
    require(trace1.outer <= n, "EQ1 outer rounds ≤ |S|");
    require(ilecs.rounds <= n, "ILEC refinement rounds ≤ |S|");
    for c in &ilecs.ilecs {
        require(
            crate::imdp::is_ilec(&problem.model, c)?,
            "refined components are ILECs",
        );
    }
    for (s, acts) in qa.actions.iter().enumerate() {
        require(!acts.is_empty(), "every state has a valid edge set");
        for a in acts {
            require(
                a.witness.is_assignment_for(&problem.model)
                    && a.witness
                        .support()
                        .iter()
                        .all(|e| a.support.contains(e.target))
                    && a.witness.probs.len() == a.support.len()
                    && a.witness.state == s,
                "witness assignments match their supports",
            );
        }
    }
    Ok(InstanceCheck {
        mismatches,
        violations,
    })
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub index: usize,
    pub seed: u64,
    pub model: String,
    pub target: Vec<String>,
    pub check: InstanceCheck,
}

#[derive(Clone, Debug, Default)]
pub struct DifferentialReport {
    pub instances: usize,
    pub failures: Vec<Counterexample>,
}

impl DifferentialReport {
    pub fn mismatch_count(&self) -> usize {
        self.failures.iter().map(|f| f.check.mismatches.len()).sum()
    }

    pub fn violation_count(&self) -> usize {
        self.failures.iter().map(|f| f.check.violations.len()).sum()
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "instances": self.instances,
            "mismatches": self.mismatch_count(),
            "violations": self.violation_count(),
            "failures": self.failures.iter().map(|f| serde_json::json!({
                "index": f.index,
                "seed": f.seed,
                "target": f.target,
                "mismatches": f.check.mismatches,
                "violations": f.check.violations,
                "model": f.model,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Generates `instances` models from `spec` (instance `i` uses
/// [`instance_seed`]`(spec.seed, i)`) and checks each against the oracle.
pub fn differential_run(
    spec: &RandomModelSpec,
    instances: usize,
    guard: usize,
) -> Result<DifferentialReport> {
    let mut report = DifferentialReport {
        instances,
        ..Default::default()
    };
    for index in 0..instances {
        let seed = instance_seed(spec.seed, index as u64);
        let m = random_model(&RandomModelSpec {
            seed,
            ..spec.clone()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let target = random_target(m.len(), &mut rng);
        let check = check_instance(&m, &target, guard)?;
        if !check.ok() {
            report.failures.push(Counterexample {
                index,
                seed,
                model: emit_model(&ModelDocument::from_imc(&m)),
                target: m.names(&target).into_iter().map(String::from).collect(),
                check,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::DEFAULT_GUARD;
    use crate::model::fixtures::{fig1, fig2};
    use proptest::prelude::*;

    fn s(n: usize, xs: &[usize]) -> StateSet {
        StateSet::from_indices(n, xs.iter().copied())
    }

    #[test]
    fn abstraction_of_fixtures() {
        let qa2 = build_qa(&fig2(), DEFAULT_GUARD).unwrap();
        let supports: Vec<StateSet> = qa2.actions[1].iter().map(|a| a.support.clone()).collect();
        assert_eq!(supports, vec![s(3, &[0, 1, 2]), s(3, &[0, 2])]);
        assert_eq!(qa2.actions[2].len(), 1);
        assert_eq!(qa2.actions[2][0].support, s(3, &[2]));
        let qa1 = build_qa(&fig1(), DEFAULT_GUARD).unwrap();
        assert_eq!(qa1.actions[0].len(), 1);
        assert_eq!(qa1.actions[0][0].support, s(2, &[0, 1]));
    }

    #[test]
    fn oracle_on_fixtures() {
        let o1 = oracle_sets(&build_qa(&fig1(), DEFAULT_GUARD).unwrap(), &s(2, &[1]));
        assert_eq!(
            (o1.aq0, o1.eq0, o1.eq1, o1.aq1),
            (s(2, &[]), s(2, &[]), s(2, &[0, 1]), s(2, &[0, 1]))
        );
        let o2 = oracle_sets(&build_qa(&fig2(), DEFAULT_GUARD).unwrap(), &s(3, &[2]));
        let all = StateSet::full(3);
        assert_eq!(
            (o2.aq0, o2.eq0, o2.eq1, o2.aq1),
            (s(3, &[]), s(3, &[]), all.clone(), all.clone())
        );
        let none = StateSet::empty(3);
        let o3 = oracle_sets(&build_qa(&fig2(), DEFAULT_GUARD).unwrap(), &none);
        assert_eq!(
            (o3.aq0, o3.eq0, o3.eq1, o3.aq1),
            (all.clone(), all, none.clone(), none)
        );
    }

    #[test]
    fn fixtures_pass_the_instance_check() {
        assert!(check_instance(&fig2(), &s(3, &[2]), DEFAULT_GUARD)
            .unwrap()
            .ok());
        assert!(check_instance(&fig1(), &s(2, &[1]), DEFAULT_GUARD)
            .unwrap()
            .ok());
    }

    #[test]
    fn small_runs_are_clean() {
        let spec = RandomModelSpec {
            states: 4,
            denominator: 4,
            seed: 42,
            ..Default::default()
        };
        let report = differential_run(&spec, 500, DEFAULT_GUARD).unwrap();
        assert!(report.ok(), "{:#}", report.to_json());
        let single = RandomModelSpec {
            states: 1,
            seed: 7,
            ..Default::default()
        };
        assert!(differential_run(&single, 20, DEFAULT_GUARD).unwrap().ok());
    }

    #[test]
    fn instance_seeds_are_deterministic_and_distinct() {
        assert_eq!(instance_seed(42, 3), instance_seed(42, 3));
        assert_ne!(instance_seed(42, 3), instance_seed(42, 4));
        let a = random_model(&RandomModelSpec {
            seed: 9,
            ..Default::default()
        });
        let b = random_model(&RandomModelSpec {
            seed: 9,
            ..Default::default()
        });
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn generated_models_are_well_formed(
            seed in any::<u64>(), states in 1usize..=8, denominator in 1i64..=8,
            density in 0.05f64..1.0, open_prob in 0.0f64..1.0,
        ) {
            let m = random_model(&RandomModelSpec { states, seed, denominator, density, open_prob, zero_lo_prob: 0.5 });
            prop_assert!(m.well_formed().is_well_formed());
        }

        #[test]
        fn action_counts_match_subset_filter(seed in any::<u64>()) {
            let m = random_model(&RandomModelSpec { states: 5, seed, ..Default::default() });
            let qa = build_qa(&m.normalize_forced_rows(), DEFAULT_GUARD).unwrap();
            let m = m.normalize_forced_rows();
            for s in 0..m.len() {
                let row = m.row(s);
                let k = row.iter().filter(|(_, iv)| iv.admits_zero()).count();
                let mut count = 0;
                for mask in 0u32..(1 << k) {
                    let mut i = 0;
                    let kept: Vec<&Interval> = row.iter().filter(|(_, iv)| {
                        if iv.admits_zero() { let keep = mask & (1 << i) == 0; i += 1; keep } else { true }
                    }).map(|(_, iv)| iv).collect();
                    if crate::edges::large(kept) { count += 1; }
                }
                prop_assert_eq!(qa.actions[s].len(), count);
            }
        }
    }
}
