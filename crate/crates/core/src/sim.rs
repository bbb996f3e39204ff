//! Monte Carlo execution of concrete schedulers under the IMDP semantics.
//!
//! Every per-step distribution is built and checked in exact arithmetic;
//! only sampling uses `f64`.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edges::{fill, witness_assignment, Assignment, Edge, EdgeSet};
use crate::error::{Error, Result};
use crate::imdp::ilec_violations;
use crate::interval::Interval;
use crate::model::Imc;
use crate::rational::{one, to_f64, zero, Rational};
use crate::stateset::StateSet;

pub const DEFAULT_HORIZON: usize = 200;

/// Largest offset `c` tried when fitting `base^(i+c)` into the intervals.
const MAX_OFFSET: u32 = 256;

#[derive(Clone, Debug)]
pub enum SchedulerKind {
    /// One fixed distribution per state (memoryless).
    Constant(Vec<Assignment>),
    /// Step-indexed scheduler confining runs to an ILEC: at step `i` the
    /// exit edges of each member share mass `base^(i+c)`, interior edges with
    /// a zero lower bound receive at least `floor`, and the rest is spread
    /// within the intervals. Outside the ILEC a fixed full-support
    /// distribution is used.
    Decaying {
        ilec: StateSet,
        base: Rational,
        floor: Rational,
    },
}

#[derive(Clone, Debug)]
pub struct SchedulerSpec {
    pub kind: SchedulerKind,
    /// Maximum number of transitions per trial.
    pub horizon: usize,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    /// 95% normal-approximation half-width.
    pub half_width: f64,
}

impl Estimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate {
            hits,
            trials,
            estimate: p,
            half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Cumulative distribution over successors.
#[derive(Clone, Debug)]
struct Sampler {
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(a: &Assignment) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(a.probs.len());
        for (_, p) in &a.probs {
            acc += to_f64(p);
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Sampler {
            targets: a.probs.iter().map(|(t, _)| *t).collect(),
            cumulative,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.targets[k]
    }
}

/// Exact per-state (and for the decaying kind, per-step) distributions.
struct Plan {
    fixed: Vec<Option<Sampler>>,
    /// `stepped[s][i - 1]` is the distribution at step `i` for ILEC members.
    stepped: Vec<Vec<Sampler>>,
}

impl Plan {
    fn sampler(&self, s: usize, step: usize) -> Option<&Sampler> {
        match self.stepped.get(s) {
            Some(steps) if !steps.is_empty() => steps.get(step - 1).or(steps.last()),
            _ => self.fixed[s].as_ref(),
        }
    }
}

fn full_support(m: &Imc, s: usize) -> Result<Assignment> {
    let all: EdgeSet = m.row(s).iter().map(|(t, _)| Edge::new(s, *t)).collect();
    witness_assignment(m, s, &all)
}

/// The distribution of ILEC member `s` when its exits share `exit_mass`.
fn decaying_step(
    m: &Imc,
    s: usize,
    ilec: &StateSet,
    exit_mass: &Rational,
    floor: &Rational,
) -> Option<Assignment> {
    let row = m.row(s);
    let exits: Vec<&(usize, Interval)> = row.iter().filter(|(t, _)| !ilec.contains(*t)).collect();
    let inside: Vec<&(usize, Interval)> = row.iter().filter(|(t, _)| ilec.contains(*t)).collect();
    let exit_mass = if exits.is_empty() {
        zero()
    } else {
        exit_mass.clone()
    };
    let mut probs: Vec<(usize, Rational)> = Vec::with_capacity(row.len());
    if !exits.is_empty() {
        let share = &exit_mass / Rational::from_integer(exits.len().into());
        for (t, iv) in &exits {
            if !iv.contains(&share) {
                return None;
            }
            probs.push((*t, share.clone()));
        }
    }
    let raised: Vec<Interval> = inside
        .iter()
        .map(|(_, iv)| {
            if iv.lo().is_zero() && floor > &zero() && floor < iv.hi() {
                Interval::new(floor.clone(), iv.hi().clone(), false, iv.hi_open())
                    .unwrap_or_else(|_| iv.clone())
            } else {
                iv.clone()
            }
        })
        .collect();
    let request: Vec<(&Interval, bool)> = raised.iter().map(|iv| (iv, true)).collect();
    let values = fill(&request, &(one() - &exit_mass))?;
    probs.extend(inside.iter().map(|(t, _)| *t).zip(values));
    probs.retain(|(_, p)| !p.is_zero());
    probs.sort_by_key(|(t, _)| *t);
    let a = Assignment { state: s, probs };
    a.is_assignment_for(m).then_some(a)
}

fn build_plan(m: &Imc, target: &StateSet, spec: &SchedulerSpec) -> Result<Plan> {
    let n = m.len();
    match &spec.kind {
        SchedulerKind::Constant(assignments) => {
            let mut fixed: Vec<Option<Sampler>> = vec![None; n];
            for a in assignments {
                if !a.is_assignment_for(m) {
                    return Err(Error::Scheduler(format!(
                        "assignment for state {} violates its intervals",
                        m.states().get(a.state).map_or("?", String::as_str)
                    )));
                }
                fixed[a.state] = Some(Sampler::new(a));
            }
            if let Some(s) = (0..n).find(|&s| fixed[s].is_none() && !target.contains(s)) {
                return Err(Error::Scheduler(format!(
                    "no assignment for state {}",
                    m.name(s)
                )));
            }
            Ok(Plan {
                fixed,
                stepped: Vec::new(),
            })
        }
        SchedulerKind::Decaying { ilec, base, floor } => {
            if !(base > &zero() && base < &one()) {
                return Err(Error::Scheduler(format!("decay base {base} outside (0,1)")));
            }
            m.check_universe(ilec)?;
            let normalized = m.normalize_forced_rows();
            let violations = ilec_violations(&normalized, ilec)?;
            if !violations.is_empty() {
                let why: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(Error::Scheduler(format!("not an ILEC: {}", why.join("; "))));
            }
            // Smallest offset making the first step feasible everywhere.
            let members: Vec<usize> = ilec.iter().collect();
            let mut first = base.clone();
            let mut offset = 0;
            while !members
                .iter()
                .all(|&s| decaying_step(&normalized, s, ilec, &first, floor).is_some())
            {
                offset += 1;
                if offset > MAX_OFFSET {
                    return Err(Error::Scheduler(
                        "no decaying assignment fits the intervals".into(),
                    ));
                }
                first *= base;
            }
            let mut stepped = vec![Vec::new(); n];
            for &s in &members {
                let mut mass = first.clone();
                let mut steps = Vec::with_capacity(spec.horizon.max(1));
                for _ in 0..spec.horizon.max(1) {
                    let a = decaying_step(&normalized, s, ilec, &mass, floor).ok_or_else(|| {
                        Error::Scheduler(format!("decaying step infeasible at {}", m.name(s)))
                    })?;
                    debug_assert!(a.is_assignment_for(m));
                    steps.push(Sampler::new(&a));
                    mass *= base;
                }
                stepped[s] = steps;
            }
            let mut fixed = vec![None; n];
            for s in (0..n).filter(|&s| !ilec.contains(s) && !target.contains(s)) {
                fixed[s] = Some(Sampler::new(&full_support(&normalized, s)?));
            }
            Ok(Plan { fixed, stepped })
        }
    }
}

/// Runs `spec.trials` independent executions from `start`, each stopping on
/// reaching `target` or after `spec.horizon` transitions. Truncation can
/// only undercount hits, so the estimate is biased toward 0.
pub fn simulate_reach(
    m: &Imc,
    target: &StateSet,
    start: usize,
    spec: &SchedulerSpec,
) -> Result<Estimate> {
    m.check_universe(target)?;
    if start >= m.len() {
        return Err(Error::StateIndex(start));
    }
    if spec.trials == 0 {
        return Err(Error::Scheduler("trial count must be positive".into()));
    }
    let plan = build_plan(m, target, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut hits = 0u64;
    for _ in 0..spec.trials {
        let mut s = start;
        let mut hit = target.contains(s);
        for step in 1..=spec.horizon {
            if hit {
                break;
            }
            let sampler = plan
                .sampler(s, step)
                .ok_or_else(|| Error::Scheduler(format!("no distribution at {}", m.name(s))))?;
            s = sampler.sample(&mut rng);
            hit = target.contains(s);
        }
        hits += u64::from(hit);
    }
    Ok(Estimate::new(hits, spec.trials))
}

/// Memoryless assignments putting mass `lambda` on the edges into `target`
/// whenever the intervals allow it, and a full-support witness otherwise.
pub fn constant_assignments(
    m: &Imc,
    target: &StateSet,
    lambda: &Rational,
) -> Result<Vec<Assignment>> {
    m.check_universe(target)?;
    let normalized = m.normalize_forced_rows();
    let mut out = Vec::with_capacity(m.len());
    for s in 0..m.len() {
        let row = normalized.row(s);
        let (hit, miss): (Vec<_>, Vec<_>) = row.iter().partition(|(t, _)| target.contains(*t));
        let split = (!hit.is_empty() && !miss.is_empty())
            .then(|| {
                let hv = fill(
                    &hit.iter().map(|(_, iv)| (iv, false)).collect::<Vec<_>>(),
                    lambda,
                )?;
                let mv = fill(
                    &miss.iter().map(|(_, iv)| (iv, false)).collect::<Vec<_>>(),
                    &(one() - lambda),
                )?;
                let mut probs: Vec<(usize, Rational)> = hit
                    .iter()
                    .map(|(t, _)| *t)
                    .zip(hv)
                    .chain(miss.iter().map(|(t, _)| *t).zip(mv))
                    .filter(|(_, p)| !p.is_zero())
                    .collect();
                probs.sort_by_key(|(t, _)| *t);
                let a = Assignment { state: s, probs };
                a.is_assignment_for(m).then_some(a)
            })
            .flatten();
        out.push(match split {
            Some(a) => a,
            None => full_support(&normalized, s)?,
        });
    }
    Ok(out)
}

/// `1 − ∏_{i=1..terms} (1 − base^i)`: the probability of eventually taking a
/// single exit edge offered with probability `base^i` at attempt `i`.
pub fn reference_decay_probability(base: &Rational, terms: usize) -> f64 {
    let mut product = one();
    let mut power = one();
    for _ in 0..terms {
        power *= base;
        product *= one() - &power;
    }
    to_f64(&(one() - product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{fig1, fig2};
    use crate::rational::ratio;

    fn decaying(m: &Imc, ilec: &[&str], trials: u64, seed: u64) -> SchedulerSpec {
        SchedulerSpec {
            kind: SchedulerKind::Decaying {
                ilec: m.state_set(ilec.iter().copied()).unwrap(),
                base: ratio(1, 2),
                floor: zero(),
            },
            horizon: DEFAULT_HORIZON,
            trials,
            seed,
        }
    }

    #[test]
    fn reference_values() {
        assert_eq!(reference_decay_probability(&ratio(1, 2), 1), 0.5);
        assert_eq!(reference_decay_probability(&ratio(1, 2), 3), 43.0 / 64.0);
        let r = reference_decay_probability(&ratio(1, 2), 64);
        assert!((r - 0.711212).abs() < 5e-7, "{r}");
    }

    #[test]
    fn constant_scheduler_reaches() {
        let m = fig1();
        let t = m.state_set(["s1"]).unwrap();
        let a = constant_assignments(&m, &t, &ratio(1, 2)).unwrap();
        assert_eq!(a[0].prob(1), ratio(1, 2));
        let spec = SchedulerSpec {
            kind: SchedulerKind::Constant(a),
            horizon: 10,
            trials: 20_000,
            seed: 3,
        };
        assert!(simulate_reach(&m, &t, 0, &spec).unwrap().estimate > 0.99);
    }

    #[test]
    fn decaying_scheduler_confines() {
        let m = fig1();
        let t = m.state_set(["s1"]).unwrap();
        let est = simulate_reach(&m, &t, 0, &decaying(&m, &["s0"], 20_000, 9)).unwrap();
        let r = reference_decay_probability(&ratio(1, 2), 64);
        assert!((est.estimate - r).abs() < 0.025, "{est:?}");
        assert!(est.half_width < 0.01);
    }

    #[test]
    fn decaying_on_fig2() {
        let m = fig2();
        let t = m.state_set(["s2"]).unwrap();
        let est = simulate_reach(&m, &t, 0, &decaying(&m, &["s0", "s1"], 5_000, 1)).unwrap();
        assert!(est.estimate < 0.99, "{est:?}");
        // a floor on the interior zero-lower edges keeps the plan feasible
        let mut spec = decaying(&m, &["s0", "s1"], 500, 1);
        if let SchedulerKind::Decaying { floor, .. } = &mut spec.kind {
            *floor = ratio(1, 10);
        }
        assert!(simulate_reach(&m, &t, 0, &spec).is_ok());
    }

    #[test]
    fn start_in_target_is_certain() {
        let m = fig1();
        let t = m.state_set(["s1"]).unwrap();
        let est = simulate_reach(&m, &t, 1, &decaying(&m, &["s0"], 100, 0)).unwrap();
        assert_eq!((est.hits, est.estimate, est.half_width), (100, 1.0, 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let m = fig1();
        let t = m.state_set(["s1"]).unwrap();
        let a = simulate_reach(&m, &t, 0, &decaying(&m, &["s0"], 2_000, 77)).unwrap();
        let b = simulate_reach(&m, &t, 0, &decaying(&m, &["s0"], 2_000, 77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_specs() {
        let m = fig2();
        let t = m.state_set(["s2"]).unwrap();
        // {s1} alone: the edge back to s0 has a positive lower bound
        assert!(matches!(
            simulate_reach(&m, &t, 0, &decaying(&m, &["s1"], 10, 0)),
            Err(Error::Scheduler(_))
        ));
        let bad = Assignment {
            state: 0,
            probs: vec![(0, ratio(1, 2)), (1, ratio(1, 2))],
        };
        let spec = SchedulerSpec {
            kind: SchedulerKind::Constant(vec![bad]),
            horizon: 10,
            trials: 10,
            seed: 0,
        };
        assert!(matches!(
            simulate_reach(&m, &t, 0, &spec),
            Err(Error::Scheduler(_))
        ));
    }
}
