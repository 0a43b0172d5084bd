//! The scalar comparison ODE `Φ' = Φ^m (ū − Φ)`, its closed-form envelopes and
//! the pointwise barriers for entropy solutions.
//!
//! The ODE is integrated in whichever variable makes the right-hand side
//! regular at the initial point:
//!
//! * `Φ` itself when `m ≥ 1` and `β` is finite,
//! * `w = Φ^{1−m}` when `m < 1` (so `w' = (1−m)(ū − w^{1/(1−m)})` is Lipschitz at
//!   `w = 0` and `β = 0` yields the positive increasing branch),
//! * `z = Φ^{−m}` when `β = +∞` (`z' = m(1 − ū z^{1/m})`, `z(0) = 0`).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("invalid barrier parameters: {0}")]
    InvalidParams(String),
    #[error("integrator failed to converge between t = {t_lo} and t = {t_hi}")]
    NonConvergence { t_lo: f64, t_hi: f64 },
    #[error("operation requires m < 1, got m = {0}")]
    RequiresFastDiffusion(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub ubar: f64,
    /// Initial value; `f64::INFINITY` is allowed.
    pub beta: f64,
    pub m: f64,
}

impl BarrierParams {
    pub fn new(ubar: f64, beta: f64, m: f64) -> Result<Self, BarrierError> {
        let p = Self { ubar, beta, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BarrierError> {
        if !(self.ubar > 0.0 && self.ubar.is_finite()) {
            return Err(BarrierError::InvalidParams(format!("ubar must be positive, got {}", self.ubar)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(BarrierError::InvalidParams(format!("m must be positive, got {}", self.m)));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(BarrierError::InvalidParams(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;

/// Adaptive RK4 with step doubling and local Richardson extrapolation for an
/// autonomous scalar ODE.
fn integrate(f: impl Fn(f64) -> f64, y0: f64, t_end: f64) -> Result<f64, BarrierError> {
    let rk4 = |y: f64, h: f64| {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut t = 0.0;
    let mut y = y0;
    let mut h = t_end.min(1e-3);
    while t < t_end {
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let full = rk4(y, h);
        let half = rk4(rk4(y, 0.5 * h), 0.5 * h);
        let err = (half - full).abs() / 15.0;
        let scale = ATOL + RTOL * half.abs();
        if !err.is_finite() || !half.is_finite() {
            h *= 0.25;
        } else if err <= scale {
            y = half + (half - full) / 15.0;
            t = if last { t_end } else { t + h };
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (scale / err).powf(0.2)).min(4.0) };
            h *= grow;
        } else {
            h *= (0.9 * (scale / err).powf(0.2)).max(0.1);
        }
        if h < 1e-15 * t.max(1.0) {
            return Err(BarrierError::NonConvergence { t_lo: t, t_hi: t + h });
        }
    }
    Ok(y)
}

/// `Φ_β(t)`.
pub fn phi(params: &BarrierParams, t: f64) -> Result<f64, BarrierError> {
    params.validate()?;
    let BarrierParams { ubar, beta, m } = *params;
    if t.is_nan() || t < 0.0 {
        return Err(BarrierError::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    if beta.is_infinite() {
        if t == 0.0 {
            return Err(BarrierError::InvalidParams("beta = +inf needs t > 0".into()));
        }
        let z = integrate(|z: f64| m * (1.0 - ubar * z.max(0.0).powf(1.0 / m)), 0.0, t)?;
        return Ok(z.powf(-1.0 / m));
    }
    if t == 0.0 || beta == ubar {
        return Ok(beta);
    }
    if m < 1.0 {
        let a = 1.0 - m;
        let w = integrate(|w: f64| a * (ubar - w.max(0.0).powf(1.0 / a)), beta.powf(a), t)?;
        Ok(w.max(0.0).powf(1.0 / a))
    } else {
        integrate(|y: f64| y.max(0.0).powf(m) * (ubar - y), beta, t)
    }
}

/// Closed-form `(lower, upper)` bounds on `Φ_β(t)`.
///
/// For `m < 1` and `β < ū` the lower bound is
/// `(β^{1−m} + (1−m)ūt/2)^{1/(1−m)}` up to `τ_{1/2}` and
/// `ū − ½ū e^{−2^{−m}ū^m (t−τ_{1/2})}` afterwards, combined with
/// `ū − (ū−β)e^{−β^m t}`.
pub fn phi_envelopes(params: &BarrierParams, t: f64) -> Result<(f64, f64), BarrierError> {
    params.validate()?;
    let BarrierParams { ubar, beta, m } = *params;
    if beta == ubar {
        return Ok((ubar, ubar));
    }
    if beta > ubar {
        let upper = if beta.is_infinite() {
            ubar + (t * m).powf(-1.0 / m)
        } else {
            let d = beta - ubar;
            let algebraic = ubar + (t * m + d.powf(-m)).powf(-1.0 / m);
            let exponential = ubar + d * (-ubar.powf(m) * t).exp();
            algebraic.min(exponential)
        };
        return Ok((ubar, upper));
    }
    let exponential = ubar - (ubar - beta) * (-beta.powf(m) * t).exp();
    if m >= 1.0 {
        return Ok((exponential, ubar));
    }
    let a = 1.0 - m;
    let tau = tau_half(params)?;
    let early = if t <= tau {
        (beta.powf(a) + a * ubar * t / 2.0).powf(1.0 / a)
    } else {
        ubar - 0.5 * ubar * (-(0.5f64).powf(m) * ubar.powf(m) * (t - tau)).exp()
    };
    Ok((early.max(exponential), ubar))
}

/// First time `Φ_β` reaches `ū/2` (for `m < 1`, `β < ū`).
pub fn tau_half(params: &BarrierParams) -> Result<f64, BarrierError> {
    params.validate()?;
    let BarrierParams { ubar, beta, m } = *params;
    if m >= 1.0 {
        return Err(BarrierError::RequiresFastDiffusion(m));
    }
    if beta >= ubar {
        return Err(BarrierError::InvalidParams(format!("tau_half needs beta < ubar, got beta = {beta}")));
    }
    let target = 0.5 * ubar;
    if beta >= target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0 / ubar.powf(m);
    while phi(params, hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(BarrierError::NonConvergence { t_lo: lo, t_hi: hi });
        }
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if phi(params, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pointwise lower barrier for `m < 1`:
/// `(min0^{1−m} + ū t/2)^{1/(1−m)}` for `t ≤ τ_{1/2}` (which is
/// `2^{−1/(1−m)}(ūt)^{1/(1−m)}` when `min0 = 0`) and
/// `ū − ½ū e^{−2^{−m}ū^m t}` afterwards, with `τ_{1/2}` taken from `Φ_{min0}`.
pub fn lower_barrier(ubar: f64, m: f64, min0: f64, t: f64) -> Result<f64, BarrierError> {
    if m >= 1.0 {
        return Err(BarrierError::RequiresFastDiffusion(m));
    }
    let params = BarrierParams::new(ubar, min0, m)?;
    if min0 >= ubar {
        return Ok(ubar);
    }
    let tau = tau_half(&params)?;
    let a = 1.0 - m;
    if t <= tau {
        Ok((min0.powf(a) + 0.5 * ubar * t).powf(1.0 / a))
    } else {
        Ok(ubar - 0.5 * ubar * (-(0.5f64).powf(m) * ubar.powf(m) * t).exp())
    }
}

/// `ū + (mt)^{−1/m}`.
pub fn upper_regularization(ubar: f64, m: f64, t: f64) -> f64 {
    ubar + (m * t).powf(-1.0 / m)
}
