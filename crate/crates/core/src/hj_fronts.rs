//! Front solutions of the rearranged Hamilton–Jacobi equation
//! `∂t k + (∂s k)₊^m (k − sū) = 0` on `(0, 1)` with `k(t,0) = 0`, `k(t,1) = ū`.
//!
//! Three families are integrated: the single vortex (one linear ramp), the
//! two vortex (two ramps around a plateau at `αū`) and the supersolution
//! with a `σ(u) = u^{m/(m−1)}` ramp used for instantaneous support growth.

use crate::rearrangement::RearrangedProfile;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("invalid front state: {0}")]
    InvalidState(String),
    #[error("supersolution hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("front gap {gap:e} collapsed at t = {t}")]
    GapCollapse { t: f64, gap: f64 },
    #[error("sample (t = {t}, s = {s}) lies within {margin:e} of a kink")]
    KinkSample { t: f64, s: f64, margin: f64 },
    #[error("time {t} outside the integrated range [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },
}

/// Gaps below this abort the integration.
pub const MIN_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleVortexState {
    pub s1: f64,
    pub s2: f64,
    pub ubar: f64,
    pub m: f64,
}

impl SingleVortexState {
    pub fn validate(&self) -> Result<(), FrontError> {
        if !(0.0 <= self.s1 && self.s1 < self.s2 && self.s2 <= 1.0) {
            return Err(FrontError::InvalidState(format!("need 0 ≤ S1 < S2 ≤ 1, got S1 = {}, S2 = {}", self.s1, self.s2)));
        }
        check_common(self.ubar, self.m, 1.0)
    }

    /// Slope `ū/(S2 − S1)` of the ramp.
    pub fn alpha(&self) -> f64 {
        self.ubar / (self.s2 - self.s1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoVortexState {
    pub s: [f64; 4],
    pub alpha: f64,
    pub ubar: f64,
    pub m: f64,
}

impl TwoVortexState {
    pub fn ordered(&self) -> bool {
        let [s1, s2, s3, s4] = self.s;
        0.0 <= s1 && s1 < s2 && s2 <= self.alpha && self.alpha <= s3 && s3 < s4 && s4 <= 1.0
    }

    pub fn validate(&self) -> Result<(), FrontError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(FrontError::InvalidState(format!("α must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.ordered() {
            return Err(FrontError::InvalidState(format!(
                "need 0 ≤ S1 < S2 ≤ α ≤ S3 < S4 ≤ 1, got {:?} with α = {}",
                self.s, self.alpha
            )));
        }
        check_common(self.ubar, self.m, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersolutionState {
    pub c: f64,
    pub alpha: f64,
    /// `C α ū`, fixed in time.
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub ubar: f64,
    pub m: f64,
}

impl SupersolutionState {
    /// Checks `Cū ≤ 1`, `2(1−α)σ'(1) ≤ 1` and `1 ≥ S3⁰ > S2⁰ > S1`.
    pub fn new(c: f64, alpha: f64, s2: f64, s3: f64, ubar: f64, m: f64) -> Result<Self, FrontError> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(FrontError::Hypothesis(format!("m > 1 required, got {m}")));
        }
        if !(ubar > 0.0 && ubar.is_finite()) {
            return Err(FrontError::Hypothesis(format!("ū > 0 required, got {ubar}")));
        }
        if !(c > 0.0 && c * ubar <= 1.0) {
            return Err(FrontError::Hypothesis(format!("C > 0 and C·ū ≤ 1 required, got C·ū = {}", c * ubar)));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FrontError::Hypothesis(format!("α ∈ (0, 1) required, got {alpha}")));
        }
        let lhs = 2.0 * (1.0 - alpha) * sigma_prime_one(m);
        if lhs > 1.0 {
            return Err(FrontError::Hypothesis(format!("2(1−α)σ'(1) ≤ 1 required, got {lhs}")));
        }
        let s1 = c * alpha * ubar;
        if !(s3 <= 1.0 && s3 > s2 && s2 > s1) {
            return Err(FrontError::Hypothesis(format!("1 ≥ S3⁰ > S2⁰ > S1 required, got S1 = {s1}, S2⁰ = {s2}, S3⁰ = {s3}")));
        }
        Ok(Self { c, alpha, s1, s2, s3, ubar, m })
    }

    fn with_fronts(&self, s2: f64, s3: f64) -> Self {
        Self { s2, s3, ..*self }
    }
}

fn check_common(ubar: f64, m: f64, m_min: f64) -> Result<(), FrontError> {
    if !(ubar > 0.0 && ubar.is_finite()) {
        return Err(FrontError::InvalidState(format!("ū must be positive, got {ubar}")));
    }
    if !(m >= m_min && m.is_finite()) {
        return Err(FrontError::InvalidState(format!("m must be at least {m_min}, got {m}")));
    }
    Ok(())
}

/// `σ(u) = u^{m/(m−1)}`.
pub fn sigma(u: f64, m: f64) -> f64 {
    u.max(0.0).powf(m / (m - 1.0))
}

/// `σ'(1) = m/(m−1)`.
pub fn sigma_prime_one(m: f64) -> f64 {
    m / (m - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontKind {
    Single,
    Double,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    Reached,
    /// Two-vortex ordering broke; the trajectory ends at the last ordered state.
    OrderingViolated { t: f64 },
    /// Supersolution front `S2` met `S1` at `T_*`.
    LowerHit { t: f64 },
}

/// Dense RK4 trajectory with cubic Hermite interpolation between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrajectory {
    pub kind: FrontKind,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    pub stop: StopReason,
    /// `T_* = inf{S2 = S1}` for the supersolution; `+∞` when not reached.
    pub t_lower: f64,
    /// `T^* = inf{2S3 = 1 + S3⁰}` for the supersolution; `+∞` when not reached.
    pub t_upper: f64,
}

impl FrontTrajectory {
    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn at(&self, t: f64) -> Result<Vec<f64>, FrontError> {
        let t_max = self.t_max();
        if !(t >= 0.0 && t <= t_max) {
            return Err(FrontError::OutOfRange { t, t_max });
        }
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(i) => i - 1,
        };
        Ok(hermite(
            self.times[i],
            self.times[i + 1],
            &self.states[i],
            &self.states[i + 1],
            &self.derivs[i],
            &self.derivs[i + 1],
            t,
        ))
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Column names for `csv_rows`.
    pub fn csv_header(&self) -> Vec<&'static str> {
        let mut h = vec!["t", "S1", "S2"];
        match self.kind {
            FrontKind::Single => {}
            FrontKind::Double => h.extend(["S3", "S4"]),
            FrontKind::Super => h.push("S3"),
        }
        h.push("T_star_flag");
        h
    }

    /// Rows at the given times; the flag is 1 once the trajectory has stopped early.
    pub fn csv_rows(&self, times: &[f64], s1_const: Option<f64>) -> Result<Vec<Vec<f64>>, FrontError> {
        let stop_t = match self.stop {
            StopReason::Reached => f64::INFINITY,
            StopReason::OrderingViolated { t } | StopReason::LowerHit { t } => t,
        };
        times
            .iter()
            .map(|&t| {
                let te = t.min(self.t_max());
                let y = self.at(te)?;
                let mut row = vec![t];
                if let Some(s1) = s1_const {
                    row.push(s1);
                }
                row.extend(y);
                row.push(if t >= stop_t { 1.0 } else { 0.0 });
                Ok(row)
            })
            .collect()
    }
}

fn hermite(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let x = (t - t0) / h;
    let (x2, x3) = (x * x, x * x * x);
    let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
    let h10 = x3 - 2.0 * x2 + x;
    let h01 = -2.0 * x3 + 3.0 * x2;
    let h11 = x3 - x2;
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect()
}

struct System<'a> {
    rhs: &'a dyn Fn(&[f64]) -> Vec<f64>,
    gap: &'a dyn Fn(&[f64]) -> f64,
    valid: &'a dyn Fn(&[f64]) -> bool,
    /// Terminal event: the trajectory is cut where this crosses from positive to nonpositive.
    terminal: Option<&'a dyn Fn(&[f64]) -> f64>,
    /// Recorded event, integration continues.
    marker: Option<&'a dyn Fn(&[f64]) -> f64>,
    m: f64,
    ubar: f64,
}

fn rk4(rhs: &dyn Fn(&[f64]) -> Vec<f64>, y: &[f64], f0: &[f64], h: f64) -> Vec<f64> {
    let shift = |base: &[f64], k: &[f64], a: f64| base.iter().zip(k).map(|(b, k)| b + a * k).collect::<Vec<_>>();
    let k2 = rhs(&shift(y, f0, 0.5 * h));
    let k3 = rhs(&shift(y, &k2, 0.5 * h));
    let k4 = rhs(&shift(y, &k3, h));
    (0..y.len()).map(|i| y[i] + h / 6.0 * (f0[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Root of `g` along the Hermite interpolant on `[t0, t1]`, with `g > 0` at `t0`.
fn bisect_event(g: &dyn Fn(&[f64]) -> f64, t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64]) -> f64 {
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(&hermite(t0, t1, y0, y1, f0, f1, mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn integrate(sys: &System, kind: FrontKind, y0: Vec<f64>, t_end: f64) -> Result<FrontTrajectory, FrontError> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(FrontError::InvalidState(format!("t_end must be finite and nonnegative, got {t_end}")));
    }
    let f0 = (sys.rhs)(&y0);
    let mut traj = FrontTrajectory {
        kind,
        times: vec![0.0],
        states: vec![y0],
        derivs: vec![f0],
        stop: StopReason::Reached,
        t_lower: f64::INFINITY,
        t_upper: f64::INFINITY,
    };
    let mut t = 0.0;
    while t < t_end {
        let y = traj.states.last().unwrap().clone();
        let f = traj.derivs.last().unwrap().clone();
        let gap = (sys.gap)(&y);
        if !(gap >= MIN_GAP) {
            return Err(FrontError::GapCollapse { t, gap });
        }
        let h_nominal = 1e-4 * (gap.powf(sys.m - 1.0) / sys.ubar.powf(sys.m)).min(1.0);
        let h = h_nominal.min(t_end - t);
        let y1 = rk4(sys.rhs, &y, &f, h);
        let f1 = (sys.rhs)(&y1);
        let t1 = if t_end - t <= h_nominal { t_end } else { t + h };
        if let Some(g) = sys.marker {
            if traj.t_upper.is_infinite() && g(&y) > 0.0 && g(&y1) <= 0.0 {
                traj.t_upper = bisect_event(g, t, t1, &y, &y1, &f, &f1);
            }
        }
        if let Some(g) = sys.terminal {
            if g(&y) > 0.0 && g(&y1) <= 0.0 {
                let te = bisect_event(g, t, t1, &y, &y1, &f, &f1);
                let ye = hermite(t, t1, &y, &y1, &f, &f1, te);
                let fe = (sys.rhs)(&ye);
                traj.times.push(te);
                traj.states.push(ye);
                traj.derivs.push(fe);
                traj.t_lower = te;
                traj.stop = StopReason::LowerHit { t: te };
                return Ok(traj);
            }
        }
        if !(sys.valid)(&y1) {
            traj.stop = StopReason::OrderingViolated { t };
            return Ok(traj);
        }
        if y1.iter().any(|v| !v.is_finite()) {
            return Err(FrontError::GapCollapse { t, gap });
        }
        t = t1;
        traj.times.push(t);
        traj.states.push(y1);
        traj.derivs.push(f1);
    }
    Ok(traj)
}

/// `S1' = −ū^m S1/(S2−S1)^{m−1}`, `S2' = ū^m (1−S2)/(S2−S1)^{m−1}`; state `[S1, S2]`.
pub fn integrate_single_vortex(init: &SingleVortexState, t_end: f64) -> Result<FrontTrajectory, FrontError> {
    init.validate()?;
    let (um, m) = (init.ubar.powf(init.m), init.m);
    let rhs = move |y: &[f64]| {
        let d = (y[1] - y[0]).powf(m - 1.0);
        vec![-um * y[0] / d, um * (1.0 - y[1]) / d]
    };
    let gap = |y: &[f64]| y[1] - y[0];
    let valid = |y: &[f64]| 0.0 <= y[0] && y[0] < y[1] && y[1] <= 1.0;
    let sys = System { rhs: &rhs, gap: &gap, valid: &valid, terminal: None, marker: None, m, ubar: init.ubar };
    integrate(&sys, FrontKind::Single, vec![init.s1, init.s2], t_end)
}

/// Four-front Rankine–Hugoniot system; state `[S1, S2, S3, S4]`.
pub fn integrate_two_vortex(init: &TwoVortexState, t_end: f64) -> Result<FrontTrajectory, FrontError> {
    init.validate()?;
    let (a, m) = (init.alpha, init.m);
    let um = init.ubar.powf(m);
    let (ca, cb) = (a.powf(m - 1.0) * um, (1.0 - a).powf(m - 1.0) * um);
    let rhs = move |y: &[f64]| {
        let d12 = (y[1] - y[0]).powf(m - 1.0);
        let d34 = (y[3] - y[2]).powf(m - 1.0);
        vec![-ca * y[0] / d12, ca * (a - y[1]) / d12, cb * (a - y[2]) / d34, cb * (1.0 - y[3]) / d34]
    };
    let gap = |y: &[f64]| (y[1] - y[0]).min(y[3] - y[2]);
    let state = *init;
    let valid = move |y: &[f64]| TwoVortexState { s: [y[0], y[1], y[2], y[3]], ..state }.ordered();
    let sys = System { rhs: &rhs, gap: &gap, valid: &valid, terminal: None, marker: None, m, ubar: init.ubar };
    integrate(&sys, FrontKind::Double, init.s.to_vec(), t_end)
}

/// Supersolution fronts; state `[S2, S3]`. Stops at `T_*` when `S2` meets `S1`.
pub fn integrate_supersolution(init: &SupersolutionState, t_end: f64) -> Result<FrontTrajectory, FrontError> {
    let st = SupersolutionState::new(init.c, init.alpha, init.s2, init.s3, init.ubar, init.m)?;
    let (a, m) = (st.alpha, st.m);
    let sp = sigma_prime_one(m);
    let coef = (1.0 - a).powf(m - 1.0) * st.ubar.powf(m) * sp.powf(m - 1.0);
    let rhs = move |y: &[f64]| {
        let g = y[1] - y[0];
        let d = g.powf(m - 1.0);
        vec![-coef * (g + (1.0 - a) * sp) / d, coef * (1.0 - y[1]) / d]
    };
    let gap = |y: &[f64]| y[1] - y[0];
    let valid = |y: &[f64]| y[0] < y[1] && y[1] <= 1.0;
    let s1 = st.s1;
    let lower = move |y: &[f64]| y[0] - s1;
    let target = 1.0 + st.s3;
    let upper = move |y: &[f64]| target - 2.0 * y[1];
    let sys = System {
        rhs: &rhs,
        gap: &gap,
        valid: &valid,
        terminal: Some(&lower),
        marker: Some(&upper),
        m,
        ubar: st.ubar,
    };
    integrate(&sys, FrontKind::Super, vec![st.s2, st.s3], t_end)
}

pub fn evaluate_single_k(state: &SingleVortexState, s: f64) -> f64 {
    if s < state.s1 {
        0.0
    } else if s < state.s2 {
        state.alpha() * (s - state.s1)
    } else {
        state.ubar
    }
}

pub fn evaluate_two_k(state: &TwoVortexState, s: f64) -> f64 {
    let [s1, s2, s3, s4] = state.s;
    let (a, u) = (state.alpha, state.ubar);
    if s < s1 {
        0.0
    } else if s < s2 {
        a * u * (s - s1) / (s2 - s1)
    } else if s < s3 {
        a * u
    } else if s < s4 {
        (1.0 - a) * u * (s - s3) / (s4 - s3) + a * u
    } else {
        u
    }
}

pub fn evaluate_supersolution_k(state: &SupersolutionState, s: f64) -> f64 {
    let (a, u) = (state.alpha, state.ubar);
    if s <= state.s1 {
        s / state.c
    } else if s <= state.s2 {
        a * u
    } else if s <= state.s3 {
        sigma((s - state.s2) / (state.s3 - state.s2), state.m) * (1.0 - a) * u + a * u
    } else {
        u
    }
}

/// A time-dependent profile `k(t, s)` with known kink positions.
pub trait KEvaluator {
    fn k(&self, t: f64, s: f64) -> Result<f64, FrontError>;
    /// Locations in `(0, 1)` where `k(t, ·)` may fail to be smooth.
    fn kinks(&self, t: f64) -> Result<Vec<f64>, FrontError>;
    fn t_max(&self) -> f64;
    fn ubar(&self) -> f64;
    fn m(&self) -> f64;
}

pub struct SingleVortexK {
    pub init: SingleVortexState,
    pub traj: FrontTrajectory,
}

impl SingleVortexK {
    pub fn new(init: SingleVortexState, t_end: f64) -> Result<Self, FrontError> {
        Ok(Self { traj: integrate_single_vortex(&init, t_end)?, init })
    }

    pub fn state(&self, t: f64) -> Result<SingleVortexState, FrontError> {
        let y = self.traj.at(t)?;
        Ok(SingleVortexState { s1: y[0], s2: y[1], ..self.init })
    }
}

impl KEvaluator for SingleVortexK {
    fn k(&self, t: f64, s: f64) -> Result<f64, FrontError> {
        Ok(evaluate_single_k(&self.state(t)?, s))
    }
    fn kinks(&self, t: f64) -> Result<Vec<f64>, FrontError> {
        let st = self.state(t)?;
        Ok(vec![st.s1, st.s2])
    }
    fn t_max(&self) -> f64 {
        self.traj.t_max()
    }
    fn ubar(&self) -> f64 {
        self.init.ubar
    }
    fn m(&self) -> f64 {
        self.init.m
    }
}

pub struct TwoVortexK {
    pub init: TwoVortexState,
    pub traj: FrontTrajectory,
}

impl TwoVortexK {
    pub fn new(init: TwoVortexState, t_end: f64) -> Result<Self, FrontError> {
        Ok(Self { traj: integrate_two_vortex(&init, t_end)?, init })
    }

    pub fn state(&self, t: f64) -> Result<TwoVortexState, FrontError> {
        let y = self.traj.at(t)?;
        Ok(TwoVortexState { s: [y[0], y[1], y[2], y[3]], ..self.init })
    }
}

impl KEvaluator for TwoVortexK {
    fn k(&self, t: f64, s: f64) -> Result<f64, FrontError> {
        Ok(evaluate_two_k(&self.state(t)?, s))
    }
    fn kinks(&self, t: f64) -> Result<Vec<f64>, FrontError> {
        Ok(self.state(t)?.s.to_vec())
    }
    fn t_max(&self) -> f64 {
        self.traj.t_max()
    }
    fn ubar(&self) -> f64 {
        self.init.ubar
    }
    fn m(&self) -> f64 {
        self.init.m
    }
}

pub struct SupersolutionK {
    pub init: SupersolutionState,
    pub traj: FrontTrajectory,
}

impl SupersolutionK {
    pub fn new(init: SupersolutionState, t_end: f64) -> Result<Self, FrontError> {
        Ok(Self { traj: integrate_supersolution(&init, t_end)?, init })
    }

    pub fn state(&self, t: f64) -> Result<SupersolutionState, FrontError> {
        let y = self.traj.at(t)?;
        Ok(self.init.with_fronts(y[0], y[1]))
    }
}

impl KEvaluator for SupersolutionK {
    fn k(&self, t: f64, s: f64) -> Result<f64, FrontError> {
        Ok(evaluate_supersolution_k(&self.state(t)?, s))
    }
    fn kinks(&self, t: f64) -> Result<Vec<f64>, FrontError> {
        let st = self.state(t)?;
        Ok(vec![st.s1, st.s2, st.s3])
    }
    fn t_max(&self) -> f64 {
        self.traj.t_max()
    }
    fn ubar(&self) -> f64 {
        self.init.ubar
    }
    fn m(&self) -> f64 {
        self.init.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Sub,
    Super,
}

/// Finite-difference steps for `viscosity_residual`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub dt: f64,
    pub ds: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { dt: 1e-6, ds: 1e-6 }
    }
}

/// `r = ∂t k + (∂s k)₊^m (k − sū)` by centered differences at each sample;
/// the max for `Sub`, the min for `Super`.
///
/// Samples closer than `2·ds` to a kink (at `t − dt`, `t`, `t + dt`) or to the
/// ends of `[0, 1]` are rejected.
pub fn viscosity_residual(
    eval: &dyn KEvaluator,
    kind: ResidualKind,
    samples: &[(f64, f64)],
    fd: FdSteps,
) -> Result<f64, FrontError> {
    let (m, ubar) = (eval.m(), eval.ubar());
    let margin = 2.0 * fd.ds;
    let mut worst = match kind {
        ResidualKind::Sub => f64::NEG_INFINITY,
        ResidualKind::Super => f64::INFINITY,
    };
    for &(t, s) in samples {
        if s < margin || s > 1.0 - margin {
            return Err(FrontError::KinkSample { t, s, margin });
        }
        for tt in [t - fd.dt, t, t + fd.dt] {
            if eval.kinks(tt)?.iter().any(|&x| (x - s).abs() < margin) {
                return Err(FrontError::KinkSample { t, s, margin });
            }
        }
        let k = eval.k(t, s)?;
        let dk_dt = (eval.k(t + fd.dt, s)? - eval.k(t - fd.dt, s)?) / (2.0 * fd.dt);
        let dk_ds = (eval.k(t, s + fd.ds)? - eval.k(t, s - fd.ds)?) / (2.0 * fd.ds);
        let r = dk_dt + dk_ds.max(0.0).powf(m) * (k - s * ubar);
        worst = match kind {
            ResidualKind::Sub => worst.max(r),
            ResidualKind::Super => worst.min(r),
        };
    }
    Ok(worst)
}

/// Up to `per_piece` samples per smooth piece at each time, kept `margin` away from kinks.
pub fn smooth_samples(eval: &dyn KEvaluator, times: &[f64], per_piece: usize, margin: f64) -> Result<Vec<(f64, f64)>, FrontError> {
    let mut out = Vec::new();
    for &t in times {
        let mut cuts = vec![0.0];
        cuts.extend(eval.kinks(t)?);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (a, b) = (w[0] + margin, w[1] - margin);
            if b <= a {
                continue;
            }
            for i in 0..per_piece {
                out.push((t, a + (b - a) * (i as f64 + 0.5) / per_piece as f64));
            }
        }
    }
    Ok(out)
}

/// Max over profiles and step midpoints of `k_sim − k_super`.
/// Profiles later than the evaluator's range are skipped.
pub fn comparison_check(k_sim: &[(f64, RearrangedProfile)], k_super: &dyn KEvaluator) -> Result<f64, FrontError> {
    let mut worst = f64::NEG_INFINITY;
    for (t, prof) in k_sim {
        if *t > k_super.t_max() {
            continue;
        }
        for j in 0..prof.len() {
            worst = worst.max(prof.k_mid(j) - k_super.k(*t, prof.s_mid(j))?);
        }
    }
    Ok(worst)
}

/// Constants in the front bounds
/// `S2 ≥ S2⁰ − C_m ū t^{1/m}`, `S3 ≥ S3⁰ + C'_m (1−α)^{(m−1)/m} ū t^{1/m}`,
/// `S3 ≤ S3⁰ + C''_m ū t^{1/m}`, `T_* ≥ C_T ((S2⁰ − S1)/ū)^m`, `T^* ≥ C_T ((1 − S3⁰)/ū)^m`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrontConstants {
    pub m: f64,
    pub c_lower: f64,
    pub c_spread: f64,
    pub c_upper: f64,
    pub c_time: f64,
}

/// Initial gap `S3⁰ − S2⁰` and `C` used to approximate the degenerate
/// limit `C → 0`, `S2⁰ → S3⁰`.
pub const LIMIT_GAP: f64 = 1e-6;

/// Supersolution in the degenerate limit configuration around `s0`.
pub fn limit_configuration(alpha: f64, s0: f64, ubar: f64, m: f64) -> Result<SupersolutionState, FrontError> {
    SupersolutionState::new(LIMIT_GAP.min(1.0 / ubar), alpha, s0 - LIMIT_GAP, s0, ubar, m)
}

/// Smallest admissible `α`: `2(1−α)σ'(1) = 1`.
pub fn alpha_min(m: f64) -> f64 {
    1.0 - 1.0 / (2.0 * sigma_prime_one(m))
}

/// `n` log-spaced times in `[t_lo, t_hi]`.
pub fn log_times(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (t_lo.ln(), t_hi.ln());
    let mut out: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    out[0] = t_lo;
    out[n - 1] = t_hi;
    out
}

/// Measured ratios for one supersolution run over a log time grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrontRatios {
    /// `max (S2⁰ − S2)/(ū t^{1/m})` on `[0, T_*]`.
    pub lower: f64,
    /// `min (S3 − S3⁰)/((1−α)^{(m−1)/m} ū t^{1/m})` on `[0, min(T^*, T_*)]`.
    pub spread: f64,
    /// `max (S3 − S3⁰)/(ū t^{1/m})`.
    pub upper: f64,
    /// `min(T_*/((S2⁰−S1)/ū)^m, T^*/((1−S3⁰)/ū)^m)`, ignoring times not reached.
    pub time: f64,
}

/// Log grid starts here relative to the end of the run, so the initial
/// `LIMIT_GAP` offset is negligible at the first sample.
const RATIO_T_MIN_REL: f64 = 1e-6;

pub fn front_ratios(sol: &SupersolutionK, n_times: usize) -> Result<FrontRatios, FrontError> {
    let st = sol.init;
    let (m, u) = (st.m, st.ubar);
    let t_hi = sol.t_max();
    let spread_end = sol.traj.t_upper.min(sol.traj.t_lower).min(t_hi);
    let mut r = FrontRatios { lower: 0.0, spread: f64::INFINITY, upper: 0.0, time: f64::INFINITY };
    for t in log_times(t_hi * RATIO_T_MIN_REL, t_hi, n_times) {
        let y = sol.traj.at(t)?;
        let scale = u * t.powf(1.0 / m);
        r.lower = r.lower.max((st.s2 - y[0]) / scale);
        r.upper = r.upper.max((y[1] - st.s3) / scale);
        if t <= spread_end {
            r.spread = r.spread.min((y[1] - st.s3) / ((1.0 - st.alpha).powf((m - 1.0) / m) * scale));
        }
    }
    if sol.traj.t_lower.is_finite() {
        r.time = r.time.min(sol.traj.t_lower / ((st.s2 - st.s1) / u).powf(m));
    }
    if sol.traj.t_upper.is_finite() {
        r.time = r.time.min(sol.traj.t_upper / ((1.0 - st.s3) / u).powf(m));
    }
    Ok(r)
}

/// Parameter sweep used once to fix `FrontConstants`: `ū ∈ {0.5, 1, 2}`,
/// `α` at the admissible minimum, midway to 1 and 0.95, `s0 ∈ {0.2, 0.5, 0.8}`,
/// each run to `T_*` (capped at `8/ū^m`).
pub fn calibration_sweep(m: f64) -> Result<FrontConstants, FrontError> {
    let a0 = alpha_min(m);
    let mut c = FrontConstants { m, c_lower: 0.0, c_spread: f64::INFINITY, c_upper: 0.0, c_time: f64::INFINITY };
    for ubar in [0.5, 1.0, 2.0] {
        for alpha in [a0, 0.5 * (a0 + 1.0), 0.95f64.max(a0)] {
            for s0 in [0.2, 0.5, 0.8] {
                let st = limit_configuration(alpha, s0, ubar, m)?;
                let sol = SupersolutionK::new(st, 8.0 / ubar.powf(m))?;
                let r = front_ratios(&sol, 200)?;
                c.c_lower = c.c_lower.max(r.lower);
                c.c_spread = c.c_spread.min(r.spread);
                c.c_upper = c.c_upper.max(r.upper);
                c.c_time = c.c_time.min(r.time);
            }
        }
    }
    Ok(c)
}

/// Frozen constants, 10% looser than `calibration_sweep`.
pub fn frozen_constants(m: f64) -> Option<FrontConstants> {
    FROZEN.iter().find(|c| c.m == m).copied()
}

const FROZEN: [FrontConstants; 3] = [
    FrontConstants { m: 2.0, c_lower: 1.044, c_spread: 0.2856, c_upper: 0.7713, c_time: 1.000 },
    FrontConstants { m: 3.0, c_lower: 0.9421, c_spread: 0.2699, c_upper: 0.6699, c_time: 1.433 },
    FrontConstants { m: 4.0, c_lower: 0.8632, c_spread: 0.2508, c_upper: 0.6043, c_time: 2.374 },
];

/// Worst signed margins of the front bounds (all `≥ 0` when they hold).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FrontBoundMargins {
    pub lower: f64,
    pub spread: f64,
    pub upper: f64,
    pub time: f64,
}

impl FrontBoundMargins {
    pub fn worst(&self) -> f64 {
        self.lower.min(self.spread).min(self.upper).min(self.time)
    }
}

pub fn front_bound_margins(sol: &SupersolutionK, consts: &FrontConstants, n_times: usize) -> Result<FrontBoundMargins, FrontError> {
    let r = front_ratios(sol, n_times)?;
    Ok(FrontBoundMargins {
        lower: consts.c_lower - r.lower,
        spread: r.spread - consts.c_spread,
        upper: consts.c_upper - r.upper,
        time: r.time - consts.c_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_constants_cover_sweep() {
        let c = calibration_sweep(2.0).unwrap();
        let f = frozen_constants(2.0).unwrap();
        assert!(f.c_lower >= c.c_lower && f.c_upper >= c.c_upper);
        assert!(f.c_spread <= c.c_spread && f.c_time <= c.c_time);
        assert!(f.c_spread > 0.0 && f.c_time > 0.0);
        assert!(frozen_constants(2.5).is_none());
    }

    #[test]
    fn single_vortex_fixed_points() {
        let st = SingleVortexState { s1: 0.0, s2: 0.5, ubar: 1.0, m: 2.0 };
        let tr = integrate_single_vortex(&st, 1.0).unwrap();
        assert!(tr.states.iter().all(|y| y[0] == 0.0));
        let st = SingleVortexState { s1: 0.2, s2: 1.0, ubar: 1.0, m: 2.0 };
        let tr = integrate_single_vortex(&st, 1.0).unwrap();
        assert!(tr.states.iter().all(|y| y[1] == 1.0));
    }

    #[test]
    fn single_vortex_linear_case() {
        let st = SingleVortexState { s1: 0.25, s2: 0.75, ubar: 1.0, m: 1.0 };
        let tr = integrate_single_vortex(&st, 3.0).unwrap();
        for t in [0.0, 0.123, 1.0, 2.71, 3.0] {
            let y = tr.at(t).unwrap();
            assert!((y[0] - 0.25 * (-t).exp()).abs() < 1e-8);
            assert!((y[1] - (1.0 - 0.25 * (-t).exp())).abs() < 1e-8);
        }
    }

    #[test]
    fn single_k_pieces() {
        let st = SingleVortexState { s1: 0.2, s2: 0.6, ubar: 1.5, m: 2.0 };
        assert_eq!(evaluate_single_k(&st, 0.1), 0.0);
        assert_eq!(evaluate_single_k(&st, 0.7), 1.5);
        assert!((evaluate_single_k(&st, 0.4) - 0.75).abs() < 1e-15);
        assert_eq!(evaluate_single_k(&st, 1.0), 1.5);
    }

    #[test]
    fn invalid_single_rejected() {
        let st = SingleVortexState { s1: 0.5, s2: 0.5, ubar: 1.0, m: 2.0 };
        assert!(integrate_single_vortex(&st, 1.0).is_err());
    }

    #[test]
    fn two_vortex_linear_case() {
        // At m = 1: S2' = α − S2 and S3' = α − S3.
        let st = TwoVortexState { s: [0.1, 0.3, 0.7, 0.9], alpha: 0.5, ubar: 1.0, m: 1.0 };
        let tr = integrate_two_vortex(&st, 2.0).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let y = tr.at(t).unwrap();
            let e = (-t).exp();
            assert!((y[0] - 0.1 * e).abs() < 1e-8);
            assert!((y[1] - (0.5 - 0.2 * e)).abs() < 1e-8);
            assert!((y[2] - (0.5 + 0.2 * e)).abs() < 1e-8);
            assert!((y[3] - (1.0 - 0.1 * e)).abs() < 1e-8);
        }
    }

    #[test]
    fn two_vortex_fixed_points() {
        let st = TwoVortexState { s: [0.0, 0.4, 0.6, 1.0], alpha: 0.4, ubar: 1.0, m: 2.0 };
        let tr = integrate_two_vortex(&st, 0.5).unwrap();
        assert!(tr.states.iter().all(|y| y[0] == 0.0 && y[1] == 0.4 && y[3] == 1.0));
    }

    #[test]
    fn two_vortex_continuity() {
        let st = TwoVortexState { s: [0.1, 0.3, 0.7, 0.9], alpha: 0.5, ubar: 1.3, m: 2.0 };
        let ev = TwoVortexK::new(st, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            for x in ev.kinks(t).unwrap() {
                let (a, b) = (ev.k(t, x - 1e-13).unwrap(), ev.k(t, x + 1e-13).unwrap());
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn supersolution_hypotheses() {
        assert!(matches!(SupersolutionState::new(2.0, 0.9, 0.3, 0.4, 1.0, 2.0), Err(FrontError::Hypothesis(_))));
        assert!(matches!(SupersolutionState::new(0.1, 0.5, 0.3, 0.4, 1.0, 2.0), Err(FrontError::Hypothesis(_))));
        assert!(matches!(SupersolutionState::new(0.1, 0.9, 0.4, 0.3, 1.0, 2.0), Err(FrontError::Hypothesis(_))));
        assert!(SupersolutionState::new(0.1, 0.8, 0.3, 0.4, 1.0, 2.0).is_ok());
    }

    #[test]
    fn supersolution_pieces() {
        let st = SupersolutionState::new(0.1, 0.8, 0.3, 0.4, 1.2, 2.0).unwrap();
        assert!((evaluate_supersolution_k(&st, st.s1) - 0.8 * 1.2).abs() < 1e-14);
        assert!((evaluate_supersolution_k(&st, st.s2) - 0.8 * 1.2).abs() < 1e-14);
        assert!((evaluate_supersolution_k(&st, st.s3) - 1.2).abs() < 1e-14);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let k = evaluate_supersolution_k(&st, i as f64 / 1000.0);
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn supersolution_fronts_move_apart() {
        let st = SupersolutionState::new(0.05, 0.8, 0.35, 0.4, 1.0, 2.0).unwrap();
        let tr = integrate_supersolution(&st, 5.0).unwrap();
        assert!(tr.states.windows(2).all(|w| w[1][0] <= w[0][0] && w[1][1] >= w[0][1]));
        assert!(tr.t_lower.is_finite());
        assert_eq!(tr.stop, StopReason::LowerHit { t: tr.t_lower });
        let y = tr.final_state();
        assert!((y[0] - st.s1).abs() < 1e-9);
    }

    #[test]
    fn single_vortex_is_a_solution() {
        let st = SingleVortexState { s1: 0.2, s2: 0.5, ubar: 1.0, m: 2.0 };
        let ev = SingleVortexK::new(st, 1.0).unwrap();
        let samples = smooth_samples(&ev, &[0.1, 0.5, 0.9], 5, 1e-3).unwrap();
        let fd = FdSteps::default();
        assert!(viscosity_residual(&ev, ResidualKind::Sub, &samples, fd).unwrap() <= 1e-6);
        assert!(viscosity_residual(&ev, ResidualKind::Super, &samples, fd).unwrap() >= -1e-6);
    }

    #[test]
    fn kink_samples_rejected() {
        let st = SingleVortexState { s1: 0.2, s2: 0.5, ubar: 1.0, m: 2.0 };
        let ev = SingleVortexK::new(st, 1.0).unwrap();
        let s1 = ev.kinks(0.5).unwrap()[0];
        let r = viscosity_residual(&ev, ResidualKind::Sub, &[(0.5, s1)], FdSteps::default());
        assert!(matches!(r, Err(FrontError::KinkSample { .. })));
    }

    #[test]
    fn comparison_shift() {
        use crate::rearrangement::rearrange;
        use crate::torus_field::{ScalarField, TorusGrid};
        struct Shifted(RearrangedProfile, f64);
        impl KEvaluator for Shifted {
            fn k(&self, _t: f64, s: f64) -> Result<f64, FrontError> {
                Ok(self.0.k_at(s) + self.1)
            }
            fn kinks(&self, _t: f64) -> Result<Vec<f64>, FrontError> {
                Ok(vec![])
            }
            fn t_max(&self) -> f64 {
                1.0
            }
            fn ubar(&self) -> f64 {
                1.0
            }
            fn m(&self) -> f64 {
                1.0
            }
        }
        let u = ScalarField::from_fn(TorusGrid::new(1, 64).unwrap(), |x| 1.0 + x[0]);
        let p = rearrange(&u).unwrap();
        let ex = comparison_check(&[(0.0, p.clone())], &Shifted(p, 0.25)).unwrap();
        assert!((ex + 0.25).abs() < 1e-14);
    }
}
