//! Experiment configuration: the TOML schema and its validation.
//!
//! ```toml
//! output_dir = "out/example1"   # relative to this file
//! sla = [0.5, 0.2, 0.3]         # optional for example1, adversary and fuzz
//! epsilon = 0.02                # offline optimum at 1 - epsilon; defaults to the first MW policy's
//! assert_lemmas = true          # defaults to on in debug builds, off in release
//! trace_stride = 1
//!
//! [workload]
//! kind = "example1"             # synthetic-gamma | example1 | trace-csv | adversary | fuzz
//! steps = 6
//!
//! [[policy]]
//! name = "alg2"                 # alg1 | alg2 | static | po | owm | pg | restpg
//! epsilon = 0.02
//! eta = 0.3333333333333333
//!
//! [metrics]
//! work_difference = [["pg", "alg2"]]
//! sla_window = { tau = 500, stride = 100 }
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tenantshare_core::metrics::default_window_stride;
use tenantshare_core::policies::ONLINE_POLICIES;
use tenantshare_core::workloads::{
    example1_instance, fuzz_loads, read_trace_csv, synthetic_gamma, FuzzParams, PeriodSpec, SyntheticSchedule,
    EXAMPLE1_SLA, SYNTHETIC_SHAPE,
};
use tenantshare_core::{Error as CoreError, LoadMatrix, MonitorMode, PolicyParams, PolicySpec, SlaVector};

use crate::error::CliError;

/// Offline schedules that can be listed next to the online policies.
pub const OFFLINE_POLICIES: [&str; 2] = ["pg", "restpg"];

/// Largest generated load matrix, in `steps x users` entries (2 GB of f64).
pub const MAX_LOAD_CELLS: u128 = 250_000_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: Option<PathBuf>,
    pub sla: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub assert_lemmas: Option<bool>,
    pub trace_stride: Option<usize>,
    pub workload: WorkloadConfig,
    #[serde(default, rename = "policy")]
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WorkloadConfig {
    SyntheticGamma {
        steps: usize,
        seed: u64,
        shape: Option<f64>,
        #[serde(default, rename = "period")]
        periods: Vec<PeriodConfig>,
    },
    Example1 {
        steps: usize,
    },
    TraceCsv {
        path: PathBuf,
        /// Use only the first `steps` rows.
        steps: Option<usize>,
    },
    Adversary {
        steps: usize,
    },
    Fuzz {
        n: usize,
        steps: usize,
        seed: u64,
        p: Option<f64>,
        mean: Option<f64>,
    },
}

impl WorkloadConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            WorkloadConfig::SyntheticGamma { .. } => "synthetic-gamma",
            WorkloadConfig::Example1 { .. } => "example1",
            WorkloadConfig::TraceCsv { .. } => "trace-csv",
            WorkloadConfig::Adversary { .. } => "adversary",
            WorkloadConfig::Fuzz { .. } => "fuzz",
        }
    }

    /// Size of the load matrix the workload will generate, when known
    /// before generating it. `sla_len` stands in for the user count of
    /// SLA-shaped workloads.
    pub fn declared_cells(&self, sla_len: Option<usize>) -> Option<u128> {
        let (n, steps) = match self {
            WorkloadConfig::SyntheticGamma { steps, .. } => (sla_len?, *steps),
            WorkloadConfig::Example1 { steps } => (3, *steps),
            WorkloadConfig::Adversary { steps } => (2, *steps),
            WorkloadConfig::Fuzz { n, steps, .. } => (*n, *steps),
            WorkloadConfig::TraceCsv { .. } => return None,
        };
        Some(n as u128 * steps as u128)
    }
}

/// One period of a synthetic schedule; users are numbered from 1.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PeriodConfig {
    Proportional { bulk: usize, steady: usize },
    Uniform { users: Vec<usize>, mean: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: String,
    /// Name used in output files and metric references; defaults to `name`.
    pub label: Option<String>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
}

impl PolicyConfig {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "yes")]
    pub cumulative_work: bool,
    #[serde(default = "yes")]
    pub queue_norms: bool,
    #[serde(default)]
    pub work_difference: Vec<[String; 2]>,
    pub sla_window: Option<SlaWindowConfig>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            cumulative_work: true,
            queue_norms: true,
            work_difference: Vec::new(),
            sla_window: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaWindowConfig {
    pub tau: usize,
    pub stride: Option<usize>,
    /// Labels to evaluate; all policies when empty.
    #[serde(default)]
    pub policies: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

/// One finding of config validation, tied to the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone)]
pub enum PolicyKind {
    Online(PolicySpec),
    /// Offline proportional greedy at capacity `1 - epsilon`.
    Offline {
        epsilon: f64,
    },
}

#[derive(Debug, Clone)]
pub struct PolicyPlan {
    pub label: String,
    pub kind: PolicyKind,
    pub params: Option<PolicyParams>,
}

#[derive(Debug, Clone)]
pub enum WorkloadPlan {
    Fixed(LoadMatrix),
    /// Each policy faces its own adversary.
    Adversary,
}

#[derive(Debug, Clone)]
pub struct WindowPlan {
    pub tau: usize,
    pub stride: usize,
    pub labels: Vec<String>,
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub workload_kind: &'static str,
    pub workload: WorkloadPlan,
    pub n: usize,
    pub steps: usize,
    pub sla: SlaVector,
    pub epsilon: Option<f64>,
    pub monitor: MonitorMode,
    pub trace_stride: usize,
    pub policies: Vec<PolicyPlan>,
    pub cumulative_work: bool,
    pub queue_norms: bool,
    pub work_difference: Vec<(String, String)>,
    pub sla_window: Option<WindowPlan>,
    pub output_dir: PathBuf,
}

/// Outcome of validation: every finding, plus the plan when there were no errors.
#[derive(Debug)]
pub struct Validation {
    pub diagnostics: Vec<Diagnostic>,
    pub plan: Option<Plan>,
}

impl Validation {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    /// The plan, or a config error listing every problem.
    pub fn into_plan(self) -> Result<Plan, CliError> {
        match self.plan {
            Some(p) => Ok(p),
            None => Err(CliError::Config(
                self.errors().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"),
            )),
        }
    }
}

/// Reads and parses a config file. Relative paths inside it are resolved
/// against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Default)]
struct Findings(Vec<Diagnostic>);

impl Findings {
    fn error(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        });
    }

    fn has_errors(&self) -> bool {
        self.0.iter().any(|d| d.severity == Severity::Error)
    }
}

fn core_message(e: CoreError) -> String {
    match e {
        CoreError::Domain(m) | CoreError::Config(m) | CoreError::Unsupported(m) => m,
        other => other.to_string(),
    }
}

/// Validates `config` completely, collecting every problem instead of
/// stopping at the first. Reads the trace file of a `trace-csv` workload;
/// failing to read it is an I/O error rather than a finding.
pub fn validate(config: &ExperimentConfig, base_dir: &Path) -> Result<Validation, CliError> {
    let mut f = Findings::default();

    // Workload: user count, horizon and, for fixed workloads, the loads.
    let sla_given = config.sla.clone();
    let mut workload: Option<WorkloadPlan> = None;
    let mut shape: Option<(usize, usize)> = None;
    let mut default_sla: Option<Vec<f64>> = None;
    let oversized = config
        .workload
        .declared_cells(sla_given.as_ref().map(Vec::len))
        .filter(|&c| c > MAX_LOAD_CELLS);
    if let Some(cells) = oversized {
        f.error(
            "workload.steps",
            format!("the workload would generate {cells} load entries, more than the limit of {MAX_LOAD_CELLS}"),
        );
    } else {
        match &config.workload {
            WorkloadConfig::SyntheticGamma {
                steps,
                seed,
                shape: k,
                periods,
            } => {
                let schedule = synthetic_schedule(periods, k.unwrap_or(SYNTHETIC_SHAPE));
                let count = schedule.periods.len();
                if *steps == 0 || steps % count != 0 {
                    f.error(
                        "workload.steps",
                        format!("synthetic-gamma needs a positive horizon divisible by {count}, got {steps}"),
                    );
                }
                match &sla_given {
                    None => f.error("sla", "synthetic-gamma needs an SLA vector"),
                    Some(beta) => {
                        if let Err(e) = schedule.validate(beta.len()) {
                            let field = if periods.is_empty() {
                                "workload"
                            } else {
                                "workload.period"
                            };
                            f.error(field, core_message(e));
                        } else if !f.has_errors() {
                            if let Ok(sla) = SlaVector::new(beta.clone()) {
                                match synthetic_gamma(&sla, *steps, *seed, &schedule) {
                                    Ok(l) => workload = Some(WorkloadPlan::Fixed(l)),
                                    Err(e) => f.error("workload", core_message(e)),
                                }
                            }
                        }
                        shape = Some((beta.len(), *steps));
                    }
                }
            }
            WorkloadConfig::Example1 { steps } => {
                match example1_instance(*steps) {
                    Ok(l) => workload = Some(WorkloadPlan::Fixed(l)),
                    Err(e) => f.error("workload.steps", core_message(e)),
                }
                shape = Some((3, *steps));
                default_sla = Some(EXAMPLE1_SLA.to_vec());
            }
            WorkloadConfig::TraceCsv { path, steps } => {
                let full = base_dir.join(path);
                match read_trace_csv(&full) {
                    Ok(l) => {
                        let mut l = l;
                        if let Some(s) = steps {
                            if *s == 0 || *s > l.steps() {
                                f.error(
                                    "workload.steps",
                                    format!("must lie in 1..={} for this trace, got {s}", l.steps()),
                                );
                            } else {
                                l = l.truncated(*s);
                            }
                        }
                        shape = Some((l.n(), l.steps()));
                        workload = Some(WorkloadPlan::Fixed(l));
                    }
                    Err(CoreError::Io { path, source }) => return Err(CliError::Io { path, source }),
                    Err(e) => f.error("workload.path", format!("{}: {e}", full.display())),
                }
                if sla_given.is_none() {
                    f.error("sla", "trace-csv needs an SLA vector");
                }
            }
            WorkloadConfig::Adversary { steps } => {
                if *steps == 0 {
                    f.error("workload.steps", "must be at least 1");
                }
                if let Some(beta) = &sla_given {
                    if beta.len() != 2 {
                        f.error(
                            "sla",
                            format!("the adversary workload needs exactly 2 users, got {}", beta.len()),
                        );
                    }
                }
                shape = Some((2, *steps));
                default_sla = Some(vec![0.5, 0.5]);
                workload = Some(WorkloadPlan::Adversary);
            }
            WorkloadConfig::Fuzz {
                n,
                steps,
                seed,
                p,
                mean,
            } => {
                let mut params = FuzzParams::balanced(*n, *steps, *seed);
                if let Some(p) = p {
                    params.p = *p;
                }
                if let Some(m) = mean {
                    params.mean = *m;
                }
                if !(params.mean > 0.0 && params.mean.is_finite()) {
                    f.error("workload.mean", format!("must be positive, got {}", params.mean));
                } else {
                    match fuzz_loads(&params) {
                        Ok(l) => workload = Some(WorkloadPlan::Fixed(l)),
                        Err(e) => f.error("workload", core_message(e)),
                    }
                }
                shape = Some((*n, *steps));
                if *n > 0 {
                    default_sla = Some(vec![1.0 / *n as f64; *n]);
                }
            }
        }
    }

    // SLA vector.
    let sla = match sla_given.or(default_sla) {
        None => None,
        Some(beta) => match SlaVector::new(beta) {
            Ok(s) => {
                if let Some((n, _)) = shape {
                    if s.len() != n {
                        f.error("sla", format!("has {} entries but the workload has {n} users", s.len()));
                    }
                }
                Some(s)
            }
            Err(e) => {
                f.error("sla", core_message(e));
                None
            }
        },
    };
    let n = shape.map_or(0, |s| s.0);
    let steps = shape.map_or(0, |s| s.1);

    // Policies.
    if config.policies.is_empty() {
        f.error("policy", "at least one policy is required");
    }
    let mut labels = BTreeSet::new();
    let mut plans = Vec::new();
    for (k, p) in config.policies.iter().enumerate() {
        let field = |key: &str| format!("policy[{k}].{key}");
        let label = p.label().to_string();
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            f.error(
                field("label"),
                format!("'{label}' must be non-empty and use only letters, digits, '_' and '-'"),
            );
        }
        if !labels.insert(label.clone()) {
            f.error(field("label"), format!("duplicate policy label '{label}'"));
        }
        let allowed: &[&str] = match p.name.as_str() {
            "alg1" | "alg2" => &["epsilon", "eta", "lambda"],
            "restpg" => &["epsilon"],
            "static" | "po" | "owm" | "pg" => &[],
            other => {
                f.error(
                    field("name"),
                    format!(
                        "unknown policy '{other}', expected one of {}, {}",
                        ONLINE_POLICIES.join(", "),
                        OFFLINE_POLICIES.join(", ")
                    ),
                );
                continue;
            }
        };
        for (key, v) in [("epsilon", p.epsilon), ("eta", p.eta), ("lambda", p.lambda)] {
            if v.is_some() && !allowed.contains(&key) {
                f.error(field(key), format!("policy '{}' does not take '{key}'", p.name));
            }
        }
        let offline = OFFLINE_POLICIES.contains(&p.name.as_str());
        if offline && matches!(config.workload, WorkloadConfig::Adversary { .. }) {
            f.error(
                field("name"),
                "offline policies need a fixed workload, not the adaptive adversary",
            );
        }
        match p.name.as_str() {
            "alg1" | "alg2" => {
                let (Some(eps), Some(eta)) = (p.epsilon, p.eta) else {
                    for (key, v) in [("epsilon", p.epsilon), ("eta", p.eta)] {
                        if v.is_none() {
                            f.error(field(key), format!("policy '{}' needs '{key}'", p.name));
                        }
                    }
                    continue;
                };
                if n == 0 {
                    continue;
                }
                let params = PolicyParams::new(eps, eta, n).and_then(|pp| match p.lambda {
                    Some(l) => pp.with_lambda(l),
                    None => Ok(pp),
                });
                match params {
                    Ok(params) => {
                        if !params.canonical_lambda {
                            f.warn(
                                field("lambda"),
                                format!(
                                    "overrides the derived lambda epsilon^2/(8N) = {}; lemma checks are skipped",
                                    eps * eps / (8.0 * n as f64)
                                ),
                            );
                        }
                        if let Some(s) = &sla {
                            let low = s.below_theory_floor(eps);
                            if !low.is_empty() {
                                let users: Vec<String> = low.iter().map(|i| (i + 1).to_string()).collect();
                                f.warn(
                                    "sla",
                                    format!(
                                        "SLA floor precondition beta(i) >= 2*epsilon/N violated for user(s) {} \
                                         (2*epsilon/N = {} with {} epsilon = {eps})",
                                        users.join(", "),
                                        2.0 * eps / n as f64,
                                        label
                                    ),
                                );
                            }
                        }
                        let mut spec = PolicySpec::new(&p.name).with("epsilon", eps).with("eta", eta);
                        if let Some(l) = p.lambda {
                            spec = spec.with("lambda", l);
                        }
                        plans.push(PolicyPlan {
                            label,
                            kind: PolicyKind::Online(spec),
                            params: Some(params),
                        });
                    }
                    Err(e) => f.error(field("epsilon"), core_message(e)),
                }
            }
            "restpg" => match p.epsilon {
                None => f.error(field("epsilon"), "policy 'restpg' needs 'epsilon'"),
                Some(eps) if !(eps > 0.0 && eps < 1.0) => {
                    f.error(field("epsilon"), format!("must lie in (0, 1), got {eps}"))
                }
                Some(eps) => plans.push(PolicyPlan {
                    label,
                    kind: PolicyKind::Offline { epsilon: eps },
                    params: None,
                }),
            },
            "pg" => plans.push(PolicyPlan {
                label,
                kind: PolicyKind::Offline { epsilon: 0.0 },
                params: None,
            }),
            name => plans.push(PolicyPlan {
                label,
                kind: PolicyKind::Online(PolicySpec::new(name)),
                params: None,
            }),
        }
    }

    // Configured epsilon for the restricted offline optimum.
    let epsilon = config.epsilon.or_else(|| {
        config
            .policies
            .iter()
            .find(|p| p.name == "alg1" || p.name == "alg2")
            .and_then(|p| p.epsilon)
    });
    if let Some(eps) = config.epsilon {
        if !(0.0..1.0).contains(&eps) {
            f.error("epsilon", format!("must lie in [0, 1), got {eps}"));
        }
    }

    let trace_stride = config.trace_stride.unwrap_or(1);
    if trace_stride == 0 {
        f.error("trace_stride", "must be at least 1");
    }

    // Metrics.
    let m = &config.metrics;
    let mut work_difference = Vec::new();
    for (k, [a, b]) in m.work_difference.iter().enumerate() {
        for x in [a, b] {
            if !labels.contains(x) {
                f.error(
                    format!("metrics.work_difference[{k}]"),
                    format!("unknown policy label '{x}'"),
                );
            }
        }
        if matches!(config.workload, WorkloadConfig::Adversary { .. }) {
            f.warn(
                format!("metrics.work_difference[{k}]"),
                "adversary loads differ per policy, so work differences compare different inputs",
            );
        }
        work_difference.push((a.clone(), b.clone()));
    }
    let sla_window = match &m.sla_window {
        None => None,
        Some(w) => {
            if w.tau == 0 || (steps > 0 && w.tau > steps) {
                f.error(
                    "metrics.sla_window.tau",
                    format!("must lie in 1..={steps}, got {}", w.tau),
                );
            }
            if w.stride == Some(0) {
                f.error("metrics.sla_window.stride", "must be at least 1");
            }
            if trace_stride > 1 {
                f.error("metrics.sla_window", "needs a full trace, set trace_stride = 1");
            }
            for x in &w.policies {
                if !labels.contains(x) {
                    f.error("metrics.sla_window.policies", format!("unknown policy label '{x}'"));
                }
            }
            let labels = if w.policies.is_empty() {
                plans.iter().map(|p| p.label.clone()).collect()
            } else {
                w.policies.clone()
            };
            Some(WindowPlan {
                tau: w.tau,
                stride: w.stride.unwrap_or_else(|| default_window_stride(steps)),
                labels,
            })
        }
    };

    let monitor = match config.assert_lemmas.unwrap_or(cfg!(debug_assertions)) {
        true => MonitorMode::Strict,
        false => MonitorMode::Off,
    };
    let output_dir = base_dir.join(config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")));

    let plan = match (f.has_errors(), workload, sla) {
        (false, Some(workload), Some(sla)) => Some(Plan {
            workload_kind: config.workload.kind(),
            workload,
            n,
            steps,
            sla,
            epsilon,
            monitor,
            trace_stride,
            policies: plans,
            cumulative_work: m.cumulative_work,
            queue_norms: m.queue_norms,
            work_difference,
            sla_window,
            output_dir,
        }),
        _ => None,
    };
    Ok(Validation { diagnostics: f.0, plan })
}

fn synthetic_schedule(periods: &[PeriodConfig], shape: f64) -> SyntheticSchedule {
    if periods.is_empty() {
        let mut s = SyntheticSchedule::three_user();
        s.shape = shape;
        return s;
    }
    // 1-based in the config; 0 maps past the end so validation reports it.
    let idx = |u: usize| u.wrapping_sub(1);
    SyntheticSchedule {
        periods: periods
            .iter()
            .map(|p| match p {
                PeriodConfig::Proportional { bulk, steady } => PeriodSpec::Proportional {
                    bulk: idx(*bulk),
                    steady: idx(*steady),
                },
                PeriodConfig::Uniform { users, mean } => PeriodSpec::Uniform {
                    users: users.iter().map(|&u| idx(u)).collect(),
                    mean: *mean,
                },
            })
            .collect(),
        shape,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(text: &str) -> Validation {
        validate(&parse_config(text).unwrap(), Path::new(".")).unwrap()
    }

    fn messages(v: &Validation) -> Vec<String> {
        v.diagnostics.iter().map(|d| d.to_string()).collect()
    }

    const BASE: &str = r#"
        [workload]
        kind = "example1"
        steps = 6
        [[policy]]
        name = "static"
        [[policy]]
        name = "pg"
    "#;

    #[test]
    fn minimal_config_is_valid() {
        let v = check(BASE);
        assert!(v.diagnostics.is_empty(), "{:?}", messages(&v));
        let plan = v.plan.unwrap();
        assert_eq!(plan.n, 3);
        assert_eq!(plan.policies.len(), 2);
        assert_eq!(plan.sla.as_slice(), &EXAMPLE1_SLA);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = parse_config("bogus = 1\n[workload]\nkind = \"example1\"\nsteps = 6\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config("[workload]\nkind = \"example1\"\nsteps = 6\nseed = 1\n").unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        let err = parse_config("[workload]\nkind = \"example1\"\n").unwrap_err();
        assert!(err.to_string().contains("steps"), "{err}");
        let err = parse_config("[workload]\nkind = \"replay\"\nsteps = 6\n").unwrap_err();
        assert!(err.to_string().contains("replay"), "{err}");
    }

    #[test]
    fn sla_sum_over_one_is_an_error() {
        let v = check(&format!(
            "sla = [0.6, 0.6]\n{}",
            BASE.replace("example1", "adversary")
                .replace("name = \"pg\"", "name = \"po\"")
        ));
        assert!(v.plan.is_none());
        assert!(
            messages(&v).iter().any(|m| m.contains("SLA sum exceeds 1")),
            "{:?}",
            messages(&v)
        );
    }

    #[test]
    fn floor_precondition_warns() {
        let v = check(
            r#"
            sla = [0.005, 0.3, 0.3, 0.3]
            [workload]
            kind = "fuzz"
            n = 4
            steps = 10
            seed = 1
            [[policy]]
            name = "alg1"
            epsilon = 0.1
            eta = 0.3
        "#,
        );
        assert!(v.plan.is_some());
        let w: Vec<_> = v.warnings().map(|d| d.to_string()).collect();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("SLA floor precondition beta(i) >= 2*epsilon/N violated"));
        assert!(w[0].contains("user(s) 1 "));
    }

    #[test]
    fn lists_every_violation() {
        let v = check(
            r#"
            sla = [0.2, 0.3, 0.5]
            [workload]
            kind = "synthetic-gamma"
            steps = 100
            seed = 3
            [[policy]]
            name = "alg2"
            epsilon = 0.5
            eta = 0.3
            [[policy]]
            name = "static"
            eta = 1.0
            [[policy]]
            name = "mystery"
            [metrics]
            work_difference = [["static", "nobody"]]
        "#,
        );
        let m = messages(&v);
        assert!(v.plan.is_none());
        assert!(m
            .iter()
            .any(|x| x.contains("workload.steps") && x.contains("divisible by 6")));
        assert!(m.iter().any(|x| x.contains("policy[0].epsilon")));
        assert!(m.iter().any(|x| x.contains("policy[1].eta")));
        assert!(m.iter().any(|x| x.contains("policy[2].name") && x.contains("mystery")));
        assert!(m.iter().any(|x| x.contains("nobody")));
    }

    #[test]
    fn adversary_rules() {
        let v = check(
            r#"
            sla = [0.2, 0.3, 0.5]
            [workload]
            kind = "adversary"
            steps = 100
            [[policy]]
            name = "pg"
        "#,
        );
        let m = messages(&v);
        assert!(m.iter().any(|x| x.contains("exactly 2 users")));
        assert!(m.iter().any(|x| x.contains("fixed workload")));
    }

    #[test]
    fn custom_periods_are_one_based() {
        let v = check(
            r#"
            sla = [0.5, 0.5]
            [workload]
            kind = "synthetic-gamma"
            steps = 20
            seed = 1
            [[workload.period]]
            kind = "proportional"
            bulk = 1
            steady = 2
            [[workload.period]]
            kind = "uniform"
            users = [1, 3]
            mean = 0.5
            [[policy]]
            name = "owm"
        "#,
        );
        assert!(messages(&v).iter().any(|m| m.contains("user 3")), "{:?}", messages(&v));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let v = check(&format!("{BASE}\n[[policy]]\nname = \"static\"\n"));
        assert!(messages(&v)
            .iter()
            .any(|m| m.contains("duplicate policy label 'static'")));
    }

    #[test]
    fn window_needs_full_trace() {
        let v = check(&format!(
            "trace_stride = 2\n{BASE}\n[metrics]\nsla_window = {{ tau = 3 }}\n"
        ));
        assert!(messages(&v).iter().any(|m| m.contains("trace_stride = 1")));
    }

    #[test]
    fn oversized_workload_rejected_before_generation() {
        let v =
            check("[workload]\nkind = \"fuzz\"\nn = 6\nsteps = 1000000000000\nseed = 1\n[[policy]]\nname = \"owm\"\n");
        assert!(
            messages(&v).iter().any(|m| m.contains("more than the limit")),
            "{:?}",
            messages(&v)
        );
    }
}
