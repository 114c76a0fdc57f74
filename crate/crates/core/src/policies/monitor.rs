//! Runtime checks of the per-step growth guarantees of the
//! multiplicative-weight updates.

use std::fmt;

use crate::error::{Error, Result};

/// Absolute slack granted to every bound.
pub const LEMMA_SLACK: f64 = 1e-10;

/// How many violations a report keeps verbatim.
const KEPT_VIOLATIONS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// Under-utilized system: every active user grows by `1 + c`.
    UnderUtilizedBoost,
    /// Users below threshold never shrink, the others shrink by at most `1 - epsilon c`.
    Monotone,
    /// Basic variant: users below their SLA grow by `1 + c'`.
    BelowSlaBoost,
    /// Proportional variant, saturated system: users below threshold grow by `1 + c'`.
    SaturatedBoost,
    /// The allocation lies in the truncated simplex.
    Simplex,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::UnderUtilizedBoost,
        Lemma::Monotone,
        Lemma::BelowSlaBoost,
        Lemma::SaturatedBoost,
        Lemma::Simplex,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Lemma::UnderUtilizedBoost => "lemma1.1",
            Lemma::Monotone => "lemma1.2",
            Lemma::BelowSlaBoost => "lemma2",
            Lemma::SaturatedBoost => "lemma3",
            Lemma::Simplex => "simplex",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaViolation {
    pub lemma: Lemma,
    /// Step whose update broke the bound (1-based).
    pub t: usize,
    /// 0-based user index, or `usize::MAX` for whole-vector checks.
    pub user: usize,
    pub before: f64,
    pub after: f64,
    pub bound: f64,
}

impl fmt::Display for LemmaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.user == usize::MAX {
            write!(f, "{} violated at step {}", self.lemma, self.t)
        } else {
            write!(
                f,
                "{} violated at step {} for user {}: {} -> {}, bound {}",
                self.lemma,
                self.t,
                self.user + 1,
                self.before,
                self.after,
                self.bound
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonitorMode {
    #[default]
    Off,
    /// Count checks and violations.
    Record,
    /// Fail the update on the first violation.
    Strict,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LemmaReport {
    pub updates: u64,
    checks: [u64; 5],
    violations: [u64; 5],
    pub first_violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn checks(&self, lemma: Lemma) -> u64 {
        self.checks[lemma.index()]
    }

    pub fn violations(&self, lemma: Lemma) -> u64 {
        self.violations[lemma.index()]
    }

    pub fn total_violations(&self) -> u64 {
        self.violations.iter().sum()
    }
}

/// Everything the monitor needs to judge one update `h -> h_next`.
pub(crate) struct UpdateView<'a> {
    pub t: usize,
    pub before: &'a [f64],
    pub after: &'a [f64],
    pub active: &'a [bool],
    pub boosted: &'a [bool],
    pub proportional: bool,
    pub epsilon: f64,
    pub eta: f64,
    pub lambda: f64,
    /// Every SLA clears `2 epsilon / N` and lambda has its canonical value.
    pub growth_preconditions: bool,
    /// Lambda has its canonical value.
    pub canonical: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LemmaMonitor {
    mode: MonitorMode,
    report: LemmaReport,
}

impl LemmaMonitor {
    pub fn new(mode: MonitorMode) -> Self {
        Self {
            mode,
            report: LemmaReport::default(),
        }
    }

    pub fn mode(&self) -> MonitorMode {
        self.mode
    }

    pub fn report(&self) -> &LemmaReport {
        &self.report
    }

    pub(crate) fn observe(&mut self, u: &UpdateView<'_>) -> Result<()> {
        if self.mode == MonitorMode::Off {
            return Ok(());
        }
        self.report.updates += 1;
        let n = u.before.len();
        let nf = n as f64;
        let c = u.epsilon * u.eta / (4.0 * nf);
        let c_prime = u.epsilon * u.eta * u.lambda / (2.0 * nf);

        let in_simplex =
            (u.after.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && u.after.iter().all(|&x| x >= u.epsilon / nf - 1e-12);
        self.tally(Lemma::Simplex, in_simplex, u.t, usize::MAX, 0.0, 0.0, 0.0)?;

        if !u.canonical {
            return Ok(());
        }

        let active_share: f64 = (0..n).filter(|&i| u.active[i]).map(|i| u.before[i]).sum();
        let any_active = u.active.iter().any(|&a| a);
        let under_utilized = any_active && active_share <= 1.0 - u.epsilon;

        for i in 0..n {
            if !u.active[i] {
                continue;
            }
            let (h, h2) = (u.before[i], u.after[i]);
            if under_utilized {
                let bound = (1.0 + c) * h;
                self.tally(
                    Lemma::UnderUtilizedBoost,
                    h2 >= bound - LEMMA_SLACK,
                    u.t,
                    i,
                    h,
                    h2,
                    bound,
                )?;
            }
            if !u.proportional {
                let bound = if u.boosted[i] { h } else { (1.0 - u.epsilon * c) * h };
                self.tally(Lemma::Monotone, h2 >= bound - LEMMA_SLACK, u.t, i, h, h2, bound)?;
            }
            if u.growth_preconditions && u.boosted[i] {
                let bound = (1.0 + c_prime) * h;
                let ok = h2 >= bound - LEMMA_SLACK;
                if !u.proportional {
                    self.tally(Lemma::BelowSlaBoost, ok, u.t, i, h, h2, bound)?;
                } else if active_share > 1.0 - u.epsilon {
                    self.tally(Lemma::SaturatedBoost, ok, u.t, i, h, h2, bound)?;
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn tally(
        &mut self,
        lemma: Lemma,
        ok: bool,
        t: usize,
        user: usize,
        before: f64,
        after: f64,
        bound: f64,
    ) -> Result<()> {
        self.report.checks[lemma.index()] += 1;
        if ok {
            return Ok(());
        }
        self.report.violations[lemma.index()] += 1;
        let v = LemmaViolation {
            lemma,
            t,
            user,
            before,
            after,
            bound,
        };
        if self.mode == MonitorMode::Strict {
            return Err(Error::Invariant(v.to_string()));
        }
        if self.report.first_violations.len() < KEPT_VIOLATIONS {
            self.report.first_violations.push(v);
        }
        Ok(())
    }
}
