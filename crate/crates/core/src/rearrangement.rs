//! Decreasing rearrangement `u_*` on `[0, 1]`, its primitive `k`, support
//! measures and the waiting-time edge indicator.

use crate::torus_field::ScalarField;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RearrangementError {
    #[error("negative value {value:e} in cell {cell}")]
    Negative { cell: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("need at least {needed} profiles, got {got}")]
    TooFewProfiles { needed: usize, got: usize },
    #[error("profiles have different resolutions")]
    MismatchedProfiles,
}

/// Nonincreasing step profile with one step of width `cell_measure` per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedProfile {
    cell_measure: f64,
    u_star: Vec<f64>,
    /// Primitive at the step edges `s_j = j·cell_measure`, `k[0] = 0`.
    k: Vec<f64>,
}

impl RearrangedProfile {
    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    pub fn u_star(&self) -> &[f64] {
        &self.u_star
    }

    pub fn k_edges(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.u_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_star.is_empty()
    }

    pub fn s_edge(&self, j: usize) -> f64 {
        j as f64 * self.cell_measure
    }

    pub fn s_mid(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.cell_measure
    }

    pub fn mass(&self) -> f64 {
        *self.k.last().unwrap_or(&0.0)
    }

    /// Piecewise-linear `k(s)`, clamped to `[0, 1]`.
    pub fn k_at(&self, s: f64) -> f64 {
        let n = self.u_star.len();
        let x = (s / self.cell_measure).clamp(0.0, n as f64);
        let j = (x.floor() as usize).min(n - 1);
        self.k[j] + (x - j as f64) * self.cell_measure * self.u_star[j]
    }

    /// `k` at the midpoint of step `j`.
    pub fn k_mid(&self, j: usize) -> f64 {
        self.k[j] + 0.5 * self.cell_measure * self.u_star[j]
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.u_star.first().copied().unwrap_or(0.0);
        }
        let sum: f64 = self.u_star.iter().map(|v| v.powf(p)).sum();
        (sum * self.cell_measure).powf(1.0 / p)
    }

    /// `|{u_* > θ}|`.
    pub fn support(&self, theta: f64) -> f64 {
        self.u_star.iter().take_while(|&&v| v > theta).count() as f64 * self.cell_measure
    }

    /// Rows `(s_mid, u_star, k_mid)` for CSV export.
    pub fn csv_rows(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|j| [self.s_mid(j), self.u_star[j], self.k_mid(j)]).collect()
    }
}

pub fn rearrange(u: &ScalarField) -> Result<RearrangedProfile, RearrangementError> {
    if let Some((cell, &value)) = u.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(RearrangementError::Negative { cell, value });
    }
    let cell_measure = u.grid().cell_measure();
    let mut u_star = u.values().to_vec();
    u_star.sort_by(|a, b| b.total_cmp(a));
    let mut k = Vec::with_capacity(u_star.len() + 1);
    let mut acc = 0.0;
    k.push(acc);
    for &v in &u_star {
        acc += v * cell_measure;
        k.push(acc);
    }
    Ok(RearrangedProfile { cell_measure, u_star, k })
}

/// `cell_measure · #{u > θ}`.
pub fn support_measure(u: &ScalarField, theta: f64) -> f64 {
    u.values().iter().filter(|&&v| v > theta).count() as f64 * u.grid().cell_measure()
}

/// Default support threshold `1e−8 · max u₀`.
pub fn default_support_threshold(u0: &ScalarField) -> f64 {
    1e-8 * u0.max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Diverges,
    Finite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaitingIndicator {
    pub class: EdgeClass,
    /// `(S0 − s_j, R(s_j))` for `j = 2, 3, …`.
    pub ratios: Vec<(f64, f64)>,
}

/// Dyadic proxy for `limsup_{s→S0⁻} (S0−s)^{−m/(m−1)} ∫_s^{S0} (u₀)_*`.
///
/// Samples `s_j = S0 − 2^{−j} S0/4` for `j ≥ 2` while `S0 − s_j ≥ 4` cells.
/// Over the last three ratios: `Diverges` when they increase and grow by at
/// least 1.5× in total, `Finite` when their spread is below 10% of the
/// smallest, `Inconclusive` otherwise or with fewer than three samples.
pub fn waiting_time_indicator(u0: &ScalarField, m: f64, s0: f64) -> Result<WaitingIndicator, RearrangementError> {
    if !(m > 1.0) {
        return Err(RearrangementError::InvalidArgument(format!("waiting-time indicator needs m > 1, got {m}")));
    }
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(RearrangementError::InvalidArgument(format!("support measure must lie in (0, 1), got {s0}")));
    }
    let prof = rearrange(u0)?;
    let k_s0 = prof.k_at(s0);
    let min_gap = 4.0 * prof.cell_measure;
    let mut ratios = Vec::new();
    let mut j = 2;
    loop {
        let gap = s0 * 0.25 * 0.5f64.powi(j);
        if gap < min_gap * (1.0 - 1e-12) {
            break;
        }
        let tail = k_s0 - prof.k_at(s0 - gap);
        ratios.push((gap, tail / gap.powf(m / (m - 1.0))));
        j += 1;
    }
    let class = if ratios.len() < 3 {
        EdgeClass::Inconclusive
    } else {
        let r: Vec<f64> = ratios[ratios.len() - 3..].iter().map(|p| p.1).collect();
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if r[0] < r[1] && r[1] < r[2] && r[2] >= 1.5 * r[0] {
            EdgeClass::Diverges
        } else if lo > 0.0 && hi - lo < 0.1 * lo {
            EdgeClass::Finite
        } else {
            EdgeClass::Inconclusive
        }
    };
    Ok(WaitingIndicator { class, ratios })
}

/// Max over interior samples of `∂t k + (∂s k)₊^m (k − sū)`.
///
/// Samples are step midpoints, where `∂s k = u_*`. `∂t k` is a centered
/// difference at interior times and one-sided at the two ends.
pub fn subsolution_residual(profiles: &[RearrangedProfile], dt: f64, m: f64, ubar: f64) -> Result<f64, RearrangementError> {
    if profiles.len() < 3 {
        return Err(RearrangementError::TooFewProfiles { needed: 3, got: profiles.len() });
    }
    if !(dt > 0.0) {
        return Err(RearrangementError::InvalidArgument(format!("profile spacing must be positive, got {dt}")));
    }
    let n = profiles[0].len();
    if profiles.iter().any(|p| p.len() != n) {
        return Err(RearrangementError::MismatchedProfiles);
    }
    let last = profiles.len() - 1;
    let mut worst = f64::NEG_INFINITY;
    for (i, p) in profiles.iter().enumerate() {
        let (a, b, span) = match i {
            0 => (0, 1, dt),
            _ if i == last => (last - 1, last, dt),
            _ => (i - 1, i + 1, 2.0 * dt),
        };
        for j in 0..n {
            let dk_dt = (profiles[b].k_mid(j) - profiles[a].k_mid(j)) / span;
            let k = p.k_mid(j);
            let r = dk_dt + p.u_star[j].max(0.0).powf(m) * (k - p.s_mid(j) * ubar);
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Max over profiles of `∂t k` at step midpoints (forward differences).
pub fn max_time_derivative(profiles: &[RearrangedProfile], dt: f64) -> f64 {
    profiles
        .windows(2)
        .flat_map(|w| (0..w[0].len()).map(move |j| (w[1].k_mid(j) - w[0].k_mid(j)) / dt))
        .fold(f64::NEG_INFINITY, f64::max)
}
