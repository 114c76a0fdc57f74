//! Runs a validated [`Plan`]: simulations, offline schedules, metrics and output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use tenantshare_core::metrics::{
    cumulative_work, queue_two_norm, sla_window_stats, work_difference, SeriesReport, SlaWindowStats,
};
use tenantshare_core::offline::{offline_optimal_value, proportional_greedy};
use tenantshare_core::policies::Lemma;
use tenantshare_core::workloads::Adversary;
use tenantshare_core::{build_policy, run, LoadMatrix, RunOptions, SimulationTrace};

use crate::config::{Plan, PolicyKind, PolicyPlan, WorkloadPlan};
use crate::error::CliError;

/// Relative slack of the check that no policy beats the offline optimum.
pub const OPTIMUM_SLACK: f64 = 1e-9;
/// Relative slack of the conservation check.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

const LEMMAS: [Lemma; 4] = [
    Lemma::UnderUtilizedBoost,
    Lemma::Monotone,
    Lemma::BelowSlaBoost,
    Lemma::SaturatedBoost,
];

/// What one policy produced.
#[derive(Debug)]
pub struct PolicyOutcome {
    pub label: String,
    pub trace: SimulationTrace,
    /// Loads this policy actually faced.
    pub loads: LoadMatrix,
    /// Optimum over `loads` with capacity 1.
    pub offline_optimum: f64,
    /// `(lemma label, checks, violations)` when monitors ran.
    pub lemmas: Option<Vec<(&'static str, u64, u64)>>,
    pub adversary_phases: Option<usize>,
}

/// Headline numbers of an experiment, in the order they are written.
#[derive(Debug)]
pub struct RunSummary {
    pub entries: Vec<(String, String)>,
}

impl RunSummary {
    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

/// Parses the `key=value` lines of a summary file.
pub fn parse_summary(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Everything an experiment computed, before it is written out.
#[derive(Debug)]
pub struct ExperimentResult {
    pub outcomes: Vec<PolicyOutcome>,
    pub series: Vec<SeriesReport>,
    pub windows: Vec<(String, SlaWindowStats)>,
    pub summary: RunSummary,
}

fn simulate(plan: &Plan, p: &PolicyPlan) -> Result<PolicyOutcome, CliError> {
    let ctx = format!("policy '{}'", p.label);
    let err = |e| CliError::runtime(&ctx, e);
    let opts = RunOptions {
        stride: plan.trace_stride,
        keep_loads: true,
        ..RunOptions::default()
    };
    let (trace, loads, lemmas, adversary_phases) = match (&p.kind, &plan.workload) {
        (PolicyKind::Offline { epsilon }, WorkloadPlan::Fixed(loads)) => {
            let mut tr = proportional_greedy(loads, &plan.sla, 1.0 - epsilon).map_err(err)?;
            tr.policy = p.label.clone();
            (tr, loads.clone(), None, None)
        }
        (PolicyKind::Offline { .. }, WorkloadPlan::Adversary) => {
            return Err(CliError::Config(format!(
                "{ctx}: offline policies need a fixed workload"
            )))
        }
        (PolicyKind::Online(spec), workload) => {
            let mut policy = build_policy(spec, &plan.sla, plan.monitor).map_err(err)?;
            let (mut tr, phases) = match workload {
                WorkloadPlan::Fixed(loads) => {
                    let tr = run(policy.as_mut(), &mut loads.replay(), &plan.sla, plan.steps, &opts).map_err(err)?;
                    (tr, None)
                }
                WorkloadPlan::Adversary => {
                    let mut adv = Adversary::new(policy.as_ref()).map_err(err)?;
                    let tr = run(policy.as_mut(), &mut adv, &plan.sla, plan.steps, &opts).map_err(err)?;
                    (tr, Some(adv.boundaries().len()))
                }
            };
            tr.policy = p.label.clone();
            let lemmas = policy.lemma_report().map(|r| {
                LEMMAS
                    .iter()
                    .map(|&l| (l.label(), r.checks(l), r.violations(l)))
                    .collect()
            });
            let loads = tr
                .loads()
                .ok_or_else(|| CliError::Runtime(format!("{ctx}: run did not keep its loads")))?;
            (tr, loads, lemmas, phases)
        }
    };
    let offline_optimum = offline_optimal_value(&loads, 0.0).map_err(err)?;
    trace.check_conservation(CONSERVATION_TOLERANCE).map_err(err)?;
    if trace.total_work() > offline_optimum + OPTIMUM_SLACK * offline_optimum.max(1.0) {
        return Err(CliError::Runtime(format!(
            "{ctx}: total work {} exceeds the offline optimum {offline_optimum}",
            trace.total_work()
        )));
    }
    Ok(PolicyOutcome {
        label: p.label.clone(),
        trace,
        loads,
        offline_optimum,
        lemmas,
        adversary_phases,
    })
}

/// Runs every policy of `plan` (concurrently) and computes the requested metrics.
pub fn execute(plan: &Plan) -> Result<ExperimentResult, CliError> {
    let start = Instant::now();
    let outcomes: Vec<Result<PolicyOutcome, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = plan
            .policies
            .iter()
            .map(|p| s.spawn(move || simulate(plan, p)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Runtime("a simulation thread panicked".into())))
            })
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let by_label = |l: &str| outcomes.iter().find(|o| o.label == l).expect("labels were validated");

    let mut series = Vec::new();
    for o in &outcomes {
        if plan.cumulative_work {
            series.push(cumulative_work(&o.trace));
        }
        if plan.queue_norms {
            series.push(queue_two_norm(&o.trace));
        }
    }
    for (a, b) in &plan.work_difference {
        let r = work_difference(&by_label(a).trace, &by_label(b).trace)
            .map_err(|e| CliError::runtime("work difference", e))?;
        series.push(r);
    }

    let mut windows = Vec::new();
    if let Some(w) = &plan.sla_window {
        let computed: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = w
                .labels
                .iter()
                .map(|l| {
                    let o = by_label(l);
                    s.spawn(move || {
                        sla_window_stats(&o.trace, &o.loads, &plan.sla, w.tau, w.stride).map(|st| (o.label.clone(), st))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join()).collect()
        });
        for c in computed {
            let c = c.map_err(|_| CliError::Runtime("a window thread panicked".into()))?;
            windows.push(c.map_err(|e| CliError::runtime("SLA window statistic", e))?);
        }
    }

    let summary = summarize(plan, &outcomes, &series, &windows, start.elapsed().as_secs_f64())?;
    Ok(ExperimentResult {
        outcomes,
        series,
        windows,
        summary,
    })
}

fn summarize(
    plan: &Plan,
    outcomes: &[PolicyOutcome],
    series: &[SeriesReport],
    windows: &[(String, SlaWindowStats)],
    seconds: f64,
) -> Result<RunSummary, CliError> {
    let mut s = RunSummary { entries: Vec::new() };
    s.push("workload", plan.workload_kind);
    s.push("users", plan.n);
    s.push("steps", plan.steps);
    s.push(
        "sla",
        plan.sla
            .as_slice()
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    if let WorkloadPlan::Fixed(loads) = &plan.workload {
        s.push("total_load", loads.total());
        let opt = offline_optimal_value(loads, 0.0).map_err(|e| CliError::runtime("offline optimum", e))?;
        s.push("offline_optimum", opt);
        if let Some(eps) = plan.epsilon {
            s.push("epsilon", eps);
            let v = offline_optimal_value(loads, eps).map_err(|e| CliError::runtime("offline optimum", e))?;
            s.push("offline_optimum_at_epsilon", v);
        }
    }
    s.push(
        "policies",
        outcomes.iter().map(|o| o.label.as_str()).collect::<Vec<_>>().join(","),
    );
    for o in outcomes {
        let key = |k: &str| format!("policy.{}.{k}", o.label);
        let q = o.trace.final_queue();
        s.push(key("total_work"), o.trace.total_work());
        s.push(key("final_queue_l1"), q.total());
        s.push(key("final_queue_l2"), q.two_norm());
        s.push(key("offline_optimum"), o.offline_optimum);
        s.push(key("gap"), o.offline_optimum - o.trace.total_work());
        if let Some(phases) = o.adversary_phases {
            s.push(key("adversary_phases"), phases);
        }
        if let Some(lemmas) = &o.lemmas {
            for (name, checks, violations) in lemmas {
                s.push(key(&format!("{name}.checks")), checks);
                s.push(key(&format!("{name}.violations")), violations);
            }
        }
        if plan.queue_norms {
            let norms = o.trace.queue_norms();
            let mean = norms.iter().sum::<f64>() / norms.len() as f64;
            s.push(key("queue_norm_mean"), mean);
            s.push(key("queue_norm_max"), norms.iter().copied().fold(0.0, f64::max));
        }
    }
    for r in series.iter().filter(|r| r.name.starts_with("work_difference_")) {
        s.push(format!("{}.final", r.name), r.last().unwrap_or(0.0));
    }
    for (label, w) in windows {
        for (i, u) in w.per_user.iter().enumerate() {
            let key = |k: &str| format!("sla_window.{label}.user{}.{k}", i + 1);
            s.push(key("mean"), u.mean);
            s.push(key("std"), u.std);
            s.push(key("min"), u.min);
            s.push(key("max"), u.max);
        }
    }
    s.push("wall_clock_seconds", format!("{seconds:.3}"));
    Ok(s)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_series(path: &Path, r: &SeriesReport) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "t,value").map_err(io)?;
    for (t, v) in r.t.iter().zip(&r.values) {
        writeln!(w, "{t},{v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_windows(path: &Path, st: &SlaWindowStats) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    let header: Vec<String> = (1..=st.n()).map(|i| format!("user{i}")).collect();
    writeln!(w, "t,{}", header.join(",")).map_err(io)?;
    for (k, t) in st.t.iter().enumerate() {
        let row: Vec<String> = st.row(k).iter().map(f64::to_string).collect();
        writeln!(w, "{t},{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes one CSV per series and window statistic plus `summary` into
/// `dir`, returning the paths written.
pub fn write_outputs(dir: &Path, result: &ExperimentResult) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for r in &result.series {
        let path = dir.join(format!("{}.csv", r.name));
        write_series(&path, r)?;
        written.push(path);
    }
    for (label, st) in &result.windows {
        let path = dir.join(format!("sla_window_{label}.csv"));
        write_windows(&path, st)?;
        written.push(path);
    }
    let path = dir.join("summary");
    fs::write(&path, result.summary.to_text()).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Loads, validates, runs and writes an experiment. `output_dir` overrides
/// the directory named in the config.
pub fn run_experiment(config_path: &Path, output_dir: Option<&Path>) -> Result<ExperimentResult, CliError> {
    let config = crate::config::load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let mut plan = crate::config::validate(&config, base)?.into_plan()?;
    if let Some(dir) = output_dir {
        plan.output_dir = dir.to_path_buf();
    }
    let result = execute(&plan)?;
    write_outputs(&plan.output_dir, &result)?;
    Ok(result)
}
