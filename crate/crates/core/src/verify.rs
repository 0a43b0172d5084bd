//! Named checks over trajectories and front data, and the JSON report.
//!
//! Every check reduces to `measured ≤ bound + tolerance`.

use crate::barrier_ode::{lower_barrier, phi, tau_half, upper_regularization, BarrierError, BarrierParams};
use crate::hj_fronts::FrontBoundMargins;
use crate::pde_solver::{dissipation_check, grad_sup, Trajectory};
use crate::rearrangement::{support_measure, EdgeClass, WaitingIndicator};
use crate::torus_field::ScalarField;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("precondition failed for {check}: {msg}")]
    Precondition { check: String, msg: String },
    #[error(transparent)]
    Barrier(#[from] BarrierError),
}

fn precondition(check: &str, msg: impl Into<String>) -> VerifyError {
    VerifyError::Precondition { check: check.into(), msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    /// Descriptive name of the property being checked.
    pub anchor: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub context: BTreeMap<String, Value>,
}

impl CheckResult {
    /// Pass iff `measured ≤ bound + tolerance`; NaN fails.
    pub fn evaluate(check_id: &str, anchor: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        let status = if measured <= bound + tolerance { Status::Pass } else { Status::Fail };
        Self {
            check_id: check_id.into(),
            anchor: anchor.into(),
            status,
            measured,
            bound,
            tolerance,
            context: BTreeMap::new(),
        }
    }

    pub fn inconclusive(check_id: &str, anchor: &str, reason: &str) -> Self {
        let mut r = Self::evaluate(check_id, anchor, f64::NAN, f64::NAN, f64::NAN);
        r.status = Status::Inconclusive;
        r.context.insert("reason".into(), json!(reason));
        r
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.context.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub mod anchors {
    pub const MASS: &str = "existence.mass_conservation";
    pub const LP_DECREASE: &str = "existence.lp_decrease";
    pub const ENERGY: &str = "existence.energy_dissipation";
    pub const MIN_MAX: &str = "viscous_bounds.min_max_monotone";
    pub const ODE_BARRIERS: &str = "viscous_bounds.ode_barriers";
    pub const REGULARIZATION: &str = "entropy_bounds.instantaneous_regularization";
    pub const LOWER_BARRIER: &str = "entropy_bounds.fast_diffusion_lower_barrier";
    pub const DECAY_L1: &str = "asymptotics.l1_rate";
    pub const DECAY_LINF: &str = "asymptotics.linf_rate";
    pub const DECAY_HM1: &str = "asymptotics.hminus1_rate";
    pub const NO_WAITING: &str = "support_growth.no_waiting_time";
    pub const WAITING: &str = "support_growth.waiting_time";
    pub const WEAK_STRONG: &str = "stability.weak_strong";
    pub const SUBSOLUTION: &str = "rearrangement.subsolution";
    pub const COMPARISON: &str = "rearrangement.comparison_principle";
    pub const FRONT_BOUNDS: &str = "fronts.supersolution_tracking";
    pub const VISCOSITY: &str = "fronts.viscosity_residual";
}

/// Per-interval slack on norm and extremum monotonicity.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Relative mass drift allowed.
pub const MASS_TOL: f64 = 1e-11;
/// Pointwise barrier slack as a fraction of `ū`.
pub const BARRIER_SLACK: f64 = 0.02;
/// Relative slack on exponential rates.
pub const RATE_SLACK: f64 = 0.15;
/// Relative slack on the fast-diffusion lower barrier.
pub const LOWER_BARRIER_SLACK: f64 = 0.1;
/// Start of the fast-diffusion lower-barrier window.
pub const LOWER_BARRIER_T0: f64 = 0.05;

fn run_context(traj: &Trajectory) -> BTreeMap<String, Value> {
    let mut c = BTreeMap::new();
    c.insert("m".into(), json!(traj.m));
    c.insert("dim".into(), json!(traj.grid.dim()));
    c.insert("n".into(), json!(traj.grid.n()));
    c.insert("epsilon".into(), json!(traj.epsilon));
    c.insert("ubar".into(), json!(traj.ubar));
    c.insert("t_end".into(), json!(traj.observables.last().map_or(0.0, |o| o.t)));
    c
}

fn attach(mut r: CheckResult, ctx: &BTreeMap<String, Value>) -> CheckResult {
    for (k, v) in ctx {
        r.context.entry(k.clone()).or_insert_with(|| v.clone());
    }
    r
}

/// Largest increase of a series over consecutive records.
fn max_increase(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Mass, L², L∞, min/max monotonicity and energy dissipation.
pub fn check_conservation_and_monotonicity(traj: &Trajectory) -> Vec<CheckResult> {
    let ctx = run_context(traj);
    let obs = &traj.observables;
    let m0 = obs[0].mass;
    let drift = obs.iter().map(|o| (o.mass - m0).abs()).fold(0.0, f64::max) / m0.abs().max(f64::MIN_POSITIVE);
    let e0 = obs[0].energy;
    vec![
        CheckResult::evaluate("mass", anchors::MASS, drift, 0.0, MASS_TOL).with("measure", "max relative drift"),
        CheckResult::evaluate("l2_decrease", anchors::LP_DECREASE, max_increase(obs.iter().map(|o| o.l2)), 0.0, MONOTONE_TOL),
        CheckResult::evaluate("linf_decrease", anchors::LP_DECREASE, max_increase(obs.iter().map(|o| o.linf)), 0.0, MONOTONE_TOL),
        CheckResult::evaluate("max_monotone", anchors::MIN_MAX, max_increase(obs.iter().map(|o| o.max)), 0.0, MONOTONE_TOL),
        CheckResult::evaluate("min_monotone", anchors::MIN_MAX, max_increase(obs.iter().map(|o| -o.min)), 0.0, MONOTONE_TOL),
        CheckResult::evaluate("energy_dissipation", anchors::ENERGY, dissipation_check(traj), 0.0, 1e-6 * e0 + 1e-12)
            .with("energy0", e0),
    ]
    .into_iter()
    .map(|r| attach(r, &ctx))
    .collect()
}

/// Upper and lower ODE barriers, the regularization bound and, for `m < 1`,
/// the fast-diffusion lower barrier on `[0.05, τ_{1/2}]`.
pub fn check_barriers(traj: &Trajectory) -> Result<Vec<CheckResult>, VerifyError> {
    let ctx = run_context(traj);
    let (m, ubar) = (traj.m, traj.ubar);
    let u0 = traj.initial();
    let (min0, max0) = (u0.min(), u0.max());
    let upper = BarrierParams::new(ubar, max0, m)?;
    let lower = BarrierParams::new(ubar, min0, m)?;
    let slack = BARRIER_SLACK * ubar;
    let (mut up_excess, mut low_excess, mut reg_excess) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for snap in &traj.snapshots {
        let (lo, hi) = (snap.field.min(), snap.field.max());
        up_excess = up_excess.max(hi - phi(&upper, snap.t)?);
        low_excess = low_excess.max(phi(&lower, snap.t)? - lo);
        if snap.t > 0.0 {
            reg_excess = reg_excess.max(hi - upper_regularization(ubar, m, snap.t));
        }
    }
    let mut out = vec![
        CheckResult::evaluate("barrier_upper", anchors::ODE_BARRIERS, up_excess, 0.0, slack),
        CheckResult::evaluate("barrier_lower", anchors::ODE_BARRIERS, low_excess, 0.0, slack),
    ];
    out.push(if reg_excess.is_finite() {
        CheckResult::evaluate("regularization", anchors::REGULARIZATION, reg_excess, 0.0, slack)
    } else {
        CheckResult::inconclusive("regularization", anchors::REGULARIZATION, "no snapshot at t > 0")
    });
    if m < 1.0 {
        let tau = tau_half(&lower)?;
        let mut worst = f64::NEG_INFINITY;
        let mut at = f64::NAN;
        for snap in traj.snapshots.iter().filter(|s| s.t >= LOWER_BARRIER_T0 && s.t <= tau) {
            let b = lower_barrier(ubar, m, min0, snap.t)?;
            let deficit = 1.0 - snap.field.min() / b;
            if deficit > worst {
                worst = deficit;
                at = snap.t;
            }
        }
        out.push(if worst.is_finite() {
            CheckResult::evaluate("fast_diffusion_lower", anchors::LOWER_BARRIER, worst, 0.0, LOWER_BARRIER_SLACK)
                .with("tau_half", tau)
                .with("worst_t", at)
                .with("measure", "max relative deficit 1 − min u / barrier")
        } else {
            CheckResult::inconclusive("fast_diffusion_lower", anchors::LOWER_BARRIER, "no snapshot in [0.05, τ_1/2]")
        });
    }
    Ok(out.into_iter().map(|r| attach(r, &ctx)).collect())
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(t, y)| (t, y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Norms below this are treated as identically zero.
const DEGENERATE_NORM: f64 = 1e-13;

/// Which deviation norms to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayNorm {
    L1,
    Linf,
    Hm1,
}

/// Fitted log-slopes of `‖u − ū‖` over the second half of the run against
/// the stated rates (`Ḣ⁻¹` for `m < 1` only has to decay).
pub fn check_asymptotics(traj: &Trajectory, norms: &[DecayNorm]) -> Vec<CheckResult> {
    let ctx = run_context(traj);
    let (m, ubar) = (traj.m, traj.ubar);
    let c = traj.initial().min();
    let t_end = traj.observables.last().map_or(0.0, |o| o.t);
    let um = ubar.powf(m);
    let mut out = Vec::new();
    for &norm in norms {
        let (id, anchor) = match norm {
            DecayNorm::L1 => ("decay_l1", anchors::DECAY_L1),
            DecayNorm::Linf => ("decay_linf", anchors::DECAY_LINF),
            DecayNorm::Hm1 => ("decay_hm1", anchors::DECAY_HM1),
        };
        let series: Vec<(f64, f64)> = traj
            .observables
            .iter()
            .filter(|o| o.t >= 0.5 * t_end)
            .map(|o| {
                let v = match norm {
                    DecayNorm::L1 => o.dev_l1,
                    DecayNorm::Linf => o.dev_linf,
                    DecayNorm::Hm1 => o.dev_hm1(),
                };
                (o.t, v)
            })
            .collect();
        if series.iter().all(|p| p.1 < DEGENERATE_NORM) {
            out.push(attach(CheckResult::evaluate(id, anchor, 0.0, 0.0, 0.0).with("degenerate", true), &ctx));
            continue;
        }
        if t_end < 5.0 / um {
            out.push(attach(CheckResult::inconclusive(id, anchor, "run shorter than 5/ū^m"), &ctx));
            continue;
        }
        if m >= 1.0 && !(c > 0.0) && norm != DecayNorm::L1 {
            out.push(attach(CheckResult::inconclusive(id, anchor, "needs min u0 > 0 for m ≥ 1"), &ctx));
            continue;
        }
        let rate = match (norm, m < 1.0) {
            (DecayNorm::L1, _) => Some(um),
            (DecayNorm::Linf, true) => Some(um.min(2f64.powf(-m) * um)),
            (DecayNorm::Linf, false) => Some(um.min(c.powf(m))),
            (DecayNorm::Hm1, true) => None,
            (DecayNorm::Hm1, false) => Some(c.powf(m)),
        };
        let Some(slope) = log_slope(&series) else {
            out.push(attach(CheckResult::inconclusive(id, anchor, "fewer than three positive samples"), &ctx));
            continue;
        };
        let r = match rate {
            Some(rate) => CheckResult::evaluate(id, anchor, slope, -rate * (1.0 - RATE_SLACK), 0.0).with("rate", rate),
            None => CheckResult::evaluate(id, anchor, slope, 0.0, 0.0).with("fitted_rate", -slope),
        };
        out.push(attach(r.with("fit_window", [0.5 * t_end, t_end]), &ctx));
    }
    out
}

/// Support growth beyond `S0`, in cells, tolerated by the waiting-time checks.
pub const SUPPORT_CELLS: f64 = 3.0;
/// Window end for the no-waiting-time check.
pub const NO_WAITING_HORIZON: f64 = 0.2;
/// The Lipschitz window ends once `Lip(u^{m−1})` exceeds this multiple of its initial value.
pub const LIPSCHITZ_WINDOW_FACTOR: f64 = 2.0;

/// Last snapshot time up to which the centered-difference Lipschitz
/// constant of `u^{m−1}` stays within `factor` times its initial value.
pub fn lipschitz_window(traj: &Trajectory, factor: f64) -> f64 {
    let m = traj.m;
    let lip = |u: &ScalarField| grad_sup(&u.map(|v| v.max(0.0).powf(m - 1.0)));
    let l0 = lip(traj.initial());
    let mut end = 0.0;
    for snap in &traj.snapshots {
        if lip(&snap.field) > factor * l0 {
            break;
        }
        end = snap.t;
    }
    end
}

/// `(t, S(t))` per snapshot.
pub fn support_series(traj: &Trajectory, theta: f64) -> Vec<(f64, f64)> {
    traj.snapshots.iter().map(|s| (s.t, support_measure(&s.field, theta))).collect()
}

/// Cross-validates support growth against the edge indicator.
///
/// `Diverges` requires `S(t) ≥ S0 + δ` at some snapshot `t ≤ 0.2`; `Finite`
/// requires `S(t) ≤ S0 + δ` on the Lipschitz window, `δ` being three cells.
pub fn check_waiting_time(traj: &Trajectory, indicator: &WaitingIndicator, theta: f64) -> Result<CheckResult, VerifyError> {
    let ctx = run_context(traj);
    if !(traj.m > 1.0) {
        return Err(precondition("waiting_time", format!("m > 1 required, got {}", traj.m)));
    }
    let series = support_series(traj, theta);
    let s0 = series[0].1;
    if !(s0 < 1.0) {
        return Err(precondition("waiting_time", "initial support must be smaller than the torus"));
    }
    let delta = SUPPORT_CELLS * traj.grid.cell_measure();
    let r = match indicator.class {
        EdgeClass::Inconclusive => CheckResult::inconclusive("waiting_time", anchors::WAITING, "edge indicator inconclusive"),
        EdgeClass::Diverges => {
            let growth = series.iter().filter(|p| p.0 <= NO_WAITING_HORIZON).map(|p| p.1 - s0).fold(f64::NEG_INFINITY, f64::max);
            CheckResult::evaluate("no_waiting_time", anchors::NO_WAITING, -growth, -delta, 0.0)
                .with("measure", "minus the largest support growth for t ≤ 0.2")
                .with("horizon", NO_WAITING_HORIZON)
        }
        EdgeClass::Finite => {
            let window = lipschitz_window(traj, LIPSCHITZ_WINDOW_FACTOR);
            let growth = series.iter().filter(|p| p.0 <= window).map(|p| p.1 - s0).fold(0.0, f64::max);
            CheckResult::evaluate("waiting_time", anchors::WAITING, growth, 0.0, delta)
                .with("lipschitz_window", window)
                .with("window_factor", LIPSCHITZ_WINDOW_FACTOR)
        }
    };
    Ok(attach(
        r.with("s0", s0).with("theta", theta).with("indicator", indicator.class).with("cells", SUPPORT_CELLS),
        &ctx,
    ))
}

fn l1_distance(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.grid().cell_measure()
}

/// `max_{t>0} ln(‖u−v‖₁(t)/‖u₀−v₀‖₁)/t` over common snapshots; 0 for identical data.
pub fn weak_strong_constant(u: &Trajectory, v: &Trajectory) -> Result<f64, VerifyError> {
    if u.snapshots.len() != v.snapshots.len() || u.snapshots.iter().zip(&v.snapshots).any(|(a, b)| a.t != b.t) {
        return Err(precondition("weak_strong", "trajectories need identical snapshot times"));
    }
    if u.grid != v.grid {
        return Err(precondition("weak_strong", "trajectories need the same grid"));
    }
    let d0 = l1_distance(u.initial(), v.initial());
    if d0 == 0.0 {
        return Ok(0.0);
    }
    let c = u
        .snapshots
        .iter()
        .zip(&v.snapshots)
        .filter(|(a, _)| a.t > 0.0)
        .map(|(a, b)| (l1_distance(&a.field, &b.field) / d0).ln() / a.t)
        .fold(f64::NEG_INFINITY, f64::max);
    if c.is_finite() {
        Ok(c)
    } else {
        Err(precondition("weak_strong", "no snapshot at t > 0"))
    }
}

/// Relative spread of fitted constants against the first (reference) entry.
pub fn check_weak_strong(constants: &[(String, f64)], rel_tol: f64) -> CheckResult {
    let Some(&(_, c_ref)) = constants.first() else {
        return CheckResult::inconclusive("weak_strong", anchors::WEAK_STRONG, "no fitted constants");
    };
    let spread = if c_ref == 0.0 && constants.iter().all(|c| c.1 == 0.0) {
        0.0
    } else {
        constants.iter().map(|c| (c.1 - c_ref).abs() / c_ref.abs()).fold(0.0, f64::max)
    };
    let fitted: BTreeMap<String, f64> = constants.iter().cloned().collect();
    CheckResult::evaluate("weak_strong", anchors::WEAK_STRONG, spread, rel_tol, 0.0)
        .with("fitted", fitted)
        .with("reference", c_ref)
}

pub fn check_subsolution(max_residual: f64, ubar: f64) -> CheckResult {
    CheckResult::evaluate("subsolution", anchors::SUBSOLUTION, max_residual, 0.0, 0.05 * ubar * ubar)
}

pub fn check_comparison(max_excess: f64, ubar: f64) -> CheckResult {
    CheckResult::evaluate("comparison", anchors::COMPARISON, max_excess, 0.0, BARRIER_SLACK * ubar)
}

pub fn check_front_bounds(margins: &FrontBoundMargins) -> CheckResult {
    CheckResult::evaluate("front_bounds", anchors::FRONT_BOUNDS, -margins.worst(), 0.0, 0.0).with("margins", margins)
}

/// `residual` is the max for sub-solutions and minus the min for supersolutions.
pub fn check_viscosity_residual(id: &str, residual: f64, tol: f64) -> CheckResult {
    CheckResult::evaluate(id, anchors::VISCOSITY, residual, 0.0, tol)
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config: Value,
    pub input_hash: String,
    pub generated_at_unix: u64,
    pub summary: Summary,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckResult>,
}

/// SHA-256 over git blob framing: `blob <len>\0<bytes>`.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    let digest = h.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl Report {
    pub fn new(config: Value, input: &[u8], checks: Vec<CheckResult>, mut warnings: Vec<String>) -> Self {
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary { total: checks.len(), pass: count(Status::Pass), fail: count(Status::Fail), inconclusive: count(Status::Inconclusive) };
        if checks.is_empty() {
            warnings.push("suite produced zero checks".into());
        }
        let generated_at_unix = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "coulombflow".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            input_hash: blob_hash(input),
            generated_at_unix,
            summary,
            warnings,
            checks,
        }
    }

    /// 0 iff no check failed.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes the report and returns its exit code.
pub fn emit_report(report: &Report, path: &std::path::Path) -> std::io::Result<i32> {
    std::fs::write(path, report.to_json() + "\n")?;
    Ok(report.exit_code())
}
