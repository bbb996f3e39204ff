//! `openimc` — qualitative reachability for open interval Markov chains.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use openimc::edges::DEFAULT_GUARD;
use openimc::graph::to_dot;
use openimc::imdp::maximal_ilecs_avoiding;
use openimc::oracle::{differential_run, RandomModelSpec};
use openimc::rational::parse_literal;
use openimc::report::report_value;
use openimc::sim::{
    constant_assignments, reference_decay_probability, simulate_reach, SchedulerKind,
    SchedulerSpec, DEFAULT_HORIZON,
};
use openimc::{analyze, parse_model, Imc, ModelDocument, Rational, StateSet};
use serde_json::{json, Value};

const USAGE: u8 = 1;
const MODEL: u8 = 2;
const MISMATCH: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "openimc",
    version,
    about = "Qualitative reachability for open interval Markov chains"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the model's edge graph in DOT format to this path.
    #[arg(long, global = true, value_name = "PATH")]
    emit_dot: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the well-formedness conditions of every row.
    Validate { model: PathBuf },
    /// Compute AQ0, EQ0, EQ1, AQ1 under both semantics.
    Check {
        model: PathBuf,
        /// Comma-separated target states (default: the file's `target` set).
        #[arg(long, value_delimiter = ',')]
        target: Vec<String>,
    },
    /// List the maximal end components avoiding the target (IMDP semantics).
    Ilecs {
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        target: Vec<String>,
    },
    /// Differential test of the polynomial algorithms against the
    /// brute-force abstraction on random models.
    Oracle {
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Endpoint denominator of the random intervals.
        #[arg(long, default_value_t = 4)]
        denominator: i64,
        /// Maximum number of zero-closed edges per row to enumerate.
        #[arg(long, default_value_t = DEFAULT_GUARD)]
        guard: usize,
        /// Directory receiving `.imc` and `.json` files for failing instances.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate the probability of reaching the target under a scheduler.
    Simulate {
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        target: Vec<String>,
        /// `constant:λ` or `decaying:base` (rationals such as `1/2` or `0.5`).
        #[arg(long)]
        scheduler: String,
        /// ILEC confining the decaying scheduler (default: the maximal one
        /// containing the start state, else the first one).
        #[arg(long, value_delimiter = ',')]
        ilec: Vec<String>,
        /// Minimum probability of interior zero-lower edges (decaying only).
        #[arg(long, default_value = "0")]
        floor: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start state (default: the first declared state).
        #[arg(long)]
        start: Option<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }

    fn model(message: impl ToString) -> Self {
        Failure {
            code: MODEL,
            message: message.to_string(),
        }
    }
}

impl From<openimc::Error> for Failure {
    fn from(e: openimc::Error) -> Self {
        Failure::model(e)
    }
}

type Outcome = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<(ModelDocument, Imc), Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::model(format!("{}: {e}", path.display())))?;
    let doc = parse_model(&text).map_err(|e| Failure::model(format!("{}: {e}", path.display())))?;
    let imc = doc.to_imc()?;
    Ok((doc, imc))
}

fn emit_dot(cli: &Cli, m: &Imc) -> Result<(), Failure> {
    if let Some(path) = &cli.emit_dot {
        fs::write(path, to_dot(m))
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn target_set(doc: &ModelDocument, m: &Imc, flag: &[String]) -> Result<StateSet, Failure> {
    let names: Vec<&str> = if flag.is_empty() {
        doc.set("target")
            .ok_or_else(|| {
                Failure::usage("missing --target (and the model defines no `target` set)")
            })?
            .iter()
            .map(String::as_str)
            .collect()
    } else {
        flag.iter().map(String::as_str).collect()
    };
    if names.is_empty() {
        return Err(Failure::usage("the target set must be non-empty"));
    }
    Ok(m.state_set(names.iter().copied())?)
}

fn render(cli: &Cli, value: &Value, text: impl FnOnce() -> String) -> String {
    match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Text => text(),
    }
}

fn braces(names: &[&str]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { model } => validate(cli, model),
        Command::Check { model, target } => check(cli, model, target),
        Command::Ilecs { model, target } => ilecs(cli, model, target),
        Command::Oracle {
            states,
            instances,
            seed,
            denominator,
            guard,
            out_dir,
        } => oracle(
            cli,
            *states,
            *instances,
            *seed,
            *denominator,
            *guard,
            out_dir.as_deref(),
        ),
        Command::Simulate { .. } => simulate(cli),
    }
}

fn validate(cli: &Cli, path: &Path) -> Outcome {
    let (_, m) = load(path)?;
    emit_dot(cli, &m)?;
    let report = m.well_formed();
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "state": m.name(r.state),
                "lo_sum": r.lo_sum.to_string(),
                "hi_sum": r.hi_sum.to_string(),
                "violations": r.violations(),
            })
        })
        .collect();
    let lines = report.describe(m.states());
    let value = json!({ "well_formed": report.is_well_formed(), "rows": rows });
    let out = render(cli, &value, || {
        let mut s = String::new();
        for r in &report.rows {
            let v = r.violations();
            let verdict = if v.is_empty() {
                "ok".to_string()
            } else {
                v.join(",")
            };
            let _ = writeln!(
                s,
                "{}: lo-sum {} hi-sum {} {}",
                m.name(r.state),
                r.lo_sum,
                r.hi_sum,
                verdict
            );
        }
        let _ = writeln!(s, "well-formed: {}", report.is_well_formed());
        s
    });
    if report.is_well_formed() {
        Ok((out, 0))
    } else {
        for line in &lines {
            eprintln!("{line}");
        }
        Ok((out, MODEL))
    }
}

fn check(cli: &Cli, path: &Path, target: &[String]) -> Outcome {
    let (doc, m) = load(path)?;
    emit_dot(cli, &m)?;
    let t = target_set(&doc, &m, target)?;
    let report = analyze(&m, &t)?;
    let value = report_value(&report, &m);
    let out = render(cli, &value, || {
        let mut s = String::new();
        let _ = writeln!(s, "target: {}", braces(&m.names(&t)));
        for (label, sets) in [("UMC", &report.umc), ("IMDP", &report.imdp)] {
            for (name, set) in [
                ("AQ0", &sets.aq0),
                ("EQ0", &sets.eq0),
                ("EQ1", &sets.eq1),
                ("AQ1", &sets.aq1),
            ] {
                let _ = writeln!(s, "{label} {name}: {}", braces(&m.names(set)));
            }
        }
        let ilecs: Vec<String> = report
            .ilecs
            .ilecs
            .iter()
            .map(|c| braces(&m.names(c)))
            .collect();
        let _ = writeln!(s, "ILECs avoiding target: [{}]", ilecs.join(", "));
        s
    });
    Ok((out, 0))
}

fn ilecs(cli: &Cli, path: &Path, target: &[String]) -> Outcome {
    let (doc, m) = load(path)?;
    emit_dot(cli, &m)?;
    let t = target_set(&doc, &m, target)?;
    let report = maximal_ilecs_avoiding(&m, &t)?;
    let value = json!({
        "target": m.names(&t),
        "ilecs": report.ilecs.iter().map(|c| m.names(c)).collect::<Vec<_>>(),
        "union": m.names(&report.union),
        "rounds": report.rounds,
    });
    let out = render(cli, &value, || {
        let mut s = String::new();
        for c in &report.ilecs {
            let _ = writeln!(s, "{}", braces(&m.names(c)));
        }
        let _ = writeln!(s, "refinement rounds: {}", report.rounds);
        s
    });
    Ok((out, 0))
}

fn oracle(
    cli: &Cli,
    states: usize,
    instances: usize,
    seed: u64,
    denominator: i64,
    guard: usize,
    out_dir: Option<&Path>,
) -> Outcome {
    if states == 0 {
        return Err(Failure::usage("--states must be positive"));
    }
    if denominator < 1 {
        return Err(Failure::usage("--denominator must be positive"));
    }
    let spec = RandomModelSpec {
        states,
        denominator,
        seed,
        ..Default::default()
    };
    let report = differential_run(&spec, instances, guard)?;
    if let Some(dir) = out_dir {
        let io = |e: std::io::Error| Failure::usage(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        for f in &report.failures {
            let model = format!("{}set target: {}\n", f.model, f.target.join(" "));
            fs::write(dir.join(format!("instance_{}.imc", f.index)), model).map_err(io)?;
            let verdict = json!({
                "index": f.index,
                "seed": f.seed,
                "target": f.target,
                "mismatches": f.check.mismatches,
                "violations": f.check.violations,
            });
            let text = serde_json::to_string_pretty(&verdict).expect("JSON values serialize");
            fs::write(dir.join(format!("instance_{}.json", f.index)), text + "\n").map_err(io)?;
        }
    }
    let mut value = report.to_json();
    value["spec"] = json!({
        "states": states,
        "instances": instances,
        "seed": seed,
        "denominator": denominator,
        "guard": guard,
    });
    let out = render(cli, &value, || {
        let mut s = format!(
            "instances: {}\nmismatches: {}\nviolations: {}\n",
            report.instances,
            report.mismatch_count(),
            report.violation_count()
        );
        for f in &report.failures {
            for line in f.check.mismatches.iter().chain(&f.check.violations) {
                let _ = writeln!(s, "instance {}: {line}", f.index);
            }
        }
        s
    });
    Ok((out, if report.ok() { 0 } else { MISMATCH }))
}

fn rational_arg(flag: &str, text: &str) -> Result<Rational, Failure> {
    parse_literal(text).map_err(|e| Failure::usage(format!("{flag} `{text}`: {e}")))
}

fn simulate(cli: &Cli) -> Outcome {
    let Command::Simulate {
        model,
        target,
        scheduler,
        ilec,
        floor,
        trials,
        horizon,
        seed,
        start,
    } = &cli.command
    else {
        unreachable!("dispatched on the simulate subcommand");
    };
    let (doc, m) = load(model)?;
    emit_dot(cli, &m)?;
    let t = target_set(&doc, &m, target)?;
    let start_index = match start {
        Some(name) => m.index_of(name)?,
        None => 0,
    };
    if m.is_empty() {
        return Err(Failure::model("the model has no states"));
    }
    let (kind_name, param) = scheduler
        .split_once(':')
        .ok_or_else(|| Failure::usage("--scheduler must be `constant:λ` or `decaying:base`"))?;
    let param = rational_arg("--scheduler", param)?;
    let mut echo = json!({
        "scheduler": scheduler,
        "horizon": horizon,
        "trials": trials,
        "seed": seed,
        "start": m.name(start_index),
        "target": m.names(&t),
    });
    let mut reference = None;
    let kind = match kind_name {
        "constant" => {
            if param > Rational::from_integer(1.into()) {
                return Err(Failure::usage("constant λ must lie in [0,1]"));
            }
            SchedulerKind::Constant(constant_assignments(&m, &t, &param)?)
        }
        "decaying" => {
            let floor = rational_arg("--floor", floor)?;
            let ilec_set = if ilec.is_empty() {
                let report = maximal_ilecs_avoiding(&m, &t)?;
                report
                    .ilecs
                    .iter()
                    .find(|c| c.contains(start_index))
                    .or(report.ilecs.first())
                    .cloned()
                    .ok_or_else(|| Failure::model("no ILEC avoids the target"))?
            } else {
                m.state_set(ilec.iter().map(String::as_str))?
            };
            echo["ilec"] = json!(m.names(&ilec_set));
            echo["floor"] = json!(floor.to_string());
            reference = Some(reference_decay_probability(&param, 64));
            SchedulerKind::Decaying {
                ilec: ilec_set,
                base: param,
                floor,
            }
        }
        other => return Err(Failure::usage(format!("unknown scheduler kind `{other}`"))),
    };
    let spec = SchedulerSpec {
        kind,
        horizon: *horizon,
        trials: *trials,
        seed: *seed,
    };
    let est = simulate_reach(&m, &t, start_index, &spec)?;
    let mut value = json!({
        "hits": est.hits,
        "trials": est.trials,
        "estimate": est.estimate,
        "half_width": est.half_width,
        "truncation_bias": "horizon truncation can only lower the estimate",
        "spec": echo,
    });
    if let Some(r) = reference {
        value["reference_single_exit"] = json!(r);
    }
    let out = render(cli, &value, || {
        let mut s = format!(
            "estimate: {:.6} ± {:.6} ({} / {} trials)\n",
            est.estimate, est.half_width, est.hits, est.trials
        );
        if let Some(r) = reference {
            let _ = writeln!(s, "single-exit reference: {r:.6}");
        }
        s
    });
    Ok((out, 0))
}
