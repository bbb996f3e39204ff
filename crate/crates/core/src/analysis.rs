//! One-shot computation of all qualitative sets under both semantics.

use crate::error::Result;
use crate::imdp::IlecReport;
use crate::model::Imc;
use crate::stateset::StateSet;
use crate::umc::{FixpointTrace, ReachProblem};

/// `AQ0`, `EQ0`, `EQ1`, `AQ1` for one semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticsSets {
    pub aq0: StateSet,
    pub eq0: StateSet,
    pub eq1: StateSet,
    pub aq1: StateSet,
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub target: StateSet,
    pub umc: SemanticsSets,
    pub imdp: SemanticsSets,
    /// Maximal ILECs avoiding the target (IMDP `AQ1` diagnostics).
    pub ilecs: IlecReport,
    pub eq0_trace: FixpointTrace,
    pub eq1_trace: FixpointTrace,
}

/// Computes the eight sets. The IMDP `AQ0`/`EQ0`/`EQ1` are the UMC sets;
/// only `AQ1` differs between the semantics.
pub fn analyze(m: &Imc, target: &StateSet) -> Result<AnalysisReport> {
    let p = ReachProblem::new(m, target)?;
    let aq0 = p.aq0();
    let (eq0, eq0_trace) = p.eq0();
    let (eq1, eq1_trace) = p.eq1();
    let aq1_u = p.aq1_from_eq0(&eq0);
    let (aq1_i, ilecs) = p.aq1_imdp();
    let umc = SemanticsSets {
        aq0,
        eq0,
        eq1,
        aq1: aq1_u,
    };
    let imdp = SemanticsSets {
        aq1: aq1_i,
        ..umc.clone()
    };
    Ok(AnalysisReport {
        target: target.clone(),
        umc,
        imdp,
        ilecs,
        eq0_trace,
        eq1_trace,
    })
}
