//! Explicit conservative finite-volume scheme for
//! `∂t u − div(u^m ∇g∗u) = εΔu` on the torus.
//!
//! Each step transports `u^m` with the face velocity `w = −∇g∗u` (spectral,
//! half-cell shifted), upwinded on the sign of `w`, and adds a centered
//! second difference times `ε`. Time stepping is forward Euler.

use crate::torus_field::{mean, FieldError, ScalarField, Spectral, Staggering, TorusGrid};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("negative value {value:e} in cell {cell} at t = {t}")]
    Negativity { cell: usize, value: f64, t: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("stable time step {dt:e} underflowed at t = {t}")]
    DtUnderflow { t: f64, dt: f64 },
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("need at least {needed} snapshots, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },
    #[error("snapshot times are not uniformly spaced")]
    NonUniformSnapshots,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Roundoff guard: negative values above this magnitude abort the run.
pub const NEGATIVITY_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Viscosity {
    /// `ε = h`.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub m: f64,
    pub epsilon: Viscosity,
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    /// Required positive lower bound on `u₀` when `m < 1`.
    pub floor_m_lt_1: Option<f64>,
    /// Observables are recorded every this many steps, and always at output times.
    pub observe_every: usize,
}

impl SolverConfig {
    pub fn new(m: f64, t_end: f64) -> Self {
        Self {
            m,
            epsilon: Viscosity::Auto,
            cfl: 0.45,
            t_end,
            output_times: vec![0.0, t_end],
            floor_m_lt_1: None,
            observe_every: 1,
        }
    }

    /// Output times `t_end·j/count`, `j = 0..=count`.
    pub fn with_uniform_outputs(mut self, count: usize) -> Self {
        self.output_times = (0..=count).map(|j| self.t_end * (j as f64 / count as f64)).collect();
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("m must be positive, got {}", self.m));
        }
        if let Viscosity::Value(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return bad(format!("epsilon must be >= 0, got {e}"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.observe_every == 0 {
            return bad("observe_every must be >= 1".into());
        }
        for w in self.output_times.windows(2) {
            if w[1] <= w[0] {
                return bad("output_times must be strictly increasing".into());
            }
        }
        if let Some(&t) = self.output_times.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return bad(format!("output time {t} lies outside [0, t_end]"));
        }
        if self.m < 1.0 {
            match self.floor_m_lt_1 {
                Some(f) if f > 0.0 => {}
                _ => return bad("m < 1 requires a positive floor_m_lt_1".into()),
            }
        }
        Ok(())
    }

    pub fn epsilon_for(&self, grid: &TorusGrid) -> f64 {
        match self.epsilon {
            Viscosity::Auto => grid.h(),
            Viscosity::Value(e) => e,
        }
    }
}

/// The two explicit stability limits, before the `cfl` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflLimits {
    /// `h / (d · max|w| · max_u max(m,1) u^{m−1})`.
    pub advective: f64,
    /// `h² / (2 d ε)`.
    pub viscous: f64,
}

impl CflLimits {
    /// `cfl / (1/advective + 1/viscous)`: keeps the update a convex
    /// combination when both mechanisms are active in the same cell.
    pub fn combined(&self, cfl: f64) -> f64 {
        let rate = 1.0 / self.advective + 1.0 / self.viscous;
        if rate == 0.0 {
            f64::INFINITY
        } else {
            cfl / rate
        }
    }
}

#[inline]
fn mobility(v: f64, m: f64) -> f64 {
    if m == 1.0 {
        v
    } else if m == 2.0 {
        v * v
    } else {
        v.powf(m)
    }
}

/// Quantities derived from one field state.
#[derive(Debug, Clone)]
struct Analysis {
    /// Transport velocity `w = −∇g∗u` on the `+1/2` faces, per axis.
    faces: Vec<Vec<f64>>,
    /// `∫|∇g∗u|² u^m`.
    dissipation_rate: f64,
    energy: f64,
}

/// A scheme instance bound to one grid and configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: TorusGrid,
    spectral: Spectral,
    m: f64,
    eps: f64,
    cfl: f64,
    right: Vec<Vec<usize>>,
    left: Vec<Vec<usize>>,
}

impl Solver {
    pub fn new(grid: TorusGrid, cfg: &SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let right = (0..grid.dim()).map(|a| (0..grid.len()).map(|i| grid.neighbor(i, a, true)).collect()).collect();
        let left = (0..grid.dim()).map(|a| (0..grid.len()).map(|i| grid.neighbor(i, a, false)).collect()).collect();
        Ok(Self {
            grid,
            spectral: Spectral::new(grid),
            m: cfg.m,
            eps: cfg.epsilon_for(&grid),
            cfl: cfg.cfl,
            right,
            left,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    fn analyze(&self, u: &[f64]) -> Analysis {
        let uhat = self.spectral.forward(u);
        let faces = (0..self.grid.dim())
            .map(|a| self.spectral.gradient_from_hat(&uhat, a, Staggering::Face).into_iter().map(|v| -v).collect())
            .collect();
        let mut grad_sq = vec![0.0; u.len()];
        for a in 0..self.grid.dim() {
            for (acc, v) in grad_sq.iter_mut().zip(self.spectral.gradient_from_hat(&uhat, a, Staggering::Cell)) {
                *acc += v * v;
            }
        }
        let dissipation_rate =
            grad_sq.iter().zip(u).map(|(g, &v)| g * mobility(v, self.m)).sum::<f64>() * self.grid.cell_measure();
        Analysis { faces, dissipation_rate, energy: self.spectral.energy_from_hat(&uhat) }
    }

    fn limits(&self, u: &[f64], faces: &[Vec<f64>]) -> CflLimits {
        let d = self.grid.dim() as f64;
        let h = self.grid.h();
        let wmax = faces.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let (umin, umax) = u.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let slope = |v: f64| self.m.max(1.0) * v.powf(self.m - 1.0);
        let mob = if self.m == 1.0 {
            1.0
        } else if self.m > 1.0 {
            slope(umax)
        } else if umin > 0.0 {
            slope(umin)
        } else {
            f64::INFINITY
        };
        let speed = wmax * mob;
        let advective = if speed == 0.0 { f64::INFINITY } else { h / (d * speed) };
        let viscous = if self.eps == 0.0 { f64::INFINITY } else { h * h / (2.0 * d * self.eps) };
        CflLimits { advective, viscous }
    }

    fn update(&self, u: &[f64], faces: &[Vec<f64>], dt: f64, t: f64) -> Result<Vec<f64>, SolverError> {
        let h = self.grid.h();
        let lam = dt / h;
        let nu = self.eps * dt / (h * h);
        let um: Vec<f64> = u.iter().map(|&v| mobility(v, self.m)).collect();
        let mut out = u.to_vec();
        let mut flux = vec![0.0; u.len()];
        for (a, w) in faces.iter().enumerate() {
            let right = &self.right[a];
            let left = &self.left[a];
            for i in 0..u.len() {
                let wf = w[i];
                flux[i] = if wf > 0.0 { wf * um[i] } else { wf * um[right[i]] };
            }
            for i in 0..u.len() {
                out[i] -= lam * (flux[i] - flux[left[i]]);
                if nu != 0.0 {
                    out[i] += nu * (u[right[i]] - 2.0 * u[i] + u[left[i]]);
                }
            }
        }
        for (cell, v) in out.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(SolverError::NonFinite { t: t + dt });
            }
            if *v < 0.0 {
                if *v > -NEGATIVITY_GUARD {
                    *v = 0.0;
                } else {
                    return Err(SolverError::Negativity { cell, value: *v, t: t + dt });
                }
            }
        }
        Ok(out)
    }
}

/// The stability limits of the scheme at state `u`.
pub fn cfl_limits(u: &ScalarField, cfg: &SolverConfig) -> Result<CflLimits, SolverError> {
    let solver = Solver::new(*u.grid(), cfg)?;
    let a = solver.analyze(u.values());
    Ok(solver.limits(u.values(), &a.faces))
}

/// Largest admissible step at `t = 0`, clamped to the first requested output time.
pub fn cfl_dt(u: &ScalarField, cfg: &SolverConfig) -> Result<f64, SolverError> {
    let dt = cfl_limits(u, cfg)?.combined(cfg.cfl);
    let next = cfg.output_times.iter().copied().find(|&t| t > 0.0).unwrap_or(cfg.t_end).min(cfg.t_end);
    if dt < 1e-14 {
        return Err(SolverError::DtUnderflow { t: 0.0, dt });
    }
    Ok(dt.min(next))
}

/// One forward-Euler step.
pub fn step(u: &ScalarField, dt: f64, cfg: &SolverConfig) -> Result<ScalarField, SolverError> {
    let solver = Solver::new(*u.grid(), cfg)?;
    let a = solver.analyze(u.values());
    let limit = solver.limits(u.values(), &a.faces).combined(cfg.cfl);
    if dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation { dt, limit });
    }
    Ok(ScalarField::new(*u.grid(), solver.update(u.values(), &a.faces, dt, 0.0)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub step: usize,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub energy: f64,
    /// `∫₀ᵗ∫|∇g∗u|² u^m`, trapezoidal in time.
    pub dissipation: f64,
    pub grad_sup: f64,
    /// `‖u − ū‖_{L¹}`.
    pub dev_l1: f64,
    /// `‖u − ū‖_{L∞}`.
    pub dev_linf: f64,
}

impl ObservableRecord {
    /// `‖u − ū‖_{Ḣ⁻¹}`.
    pub fn dev_hm1(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ScalarField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TorusGrid,
    pub m: f64,
    pub epsilon: f64,
    /// Mean of the initial data.
    pub ubar: f64,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    pub observables: Vec<ObservableRecord>,
}

impl Trajectory {
    pub fn initial(&self) -> &ScalarField {
        &self.snapshots[0].field
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Max centered-difference gradient magnitude.
pub fn grad_sup(u: &ScalarField) -> f64 {
    let g = u.grid();
    let v = u.values();
    let inv = 0.5 / g.h();
    (0..g.len())
        .map(|i| {
            (0..g.dim())
                .map(|a| {
                    let d = (v[g.neighbor(i, a, true)] - v[g.neighbor(i, a, false)]) * inv;
                    d * d
                })
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn observe(u: &ScalarField, t: f64, step: usize, ubar: f64, a: &Analysis, dissipation: f64) -> ObservableRecord {
    let cm = u.grid().cell_measure();
    let v = u.values();
    let (mut sum, mut l1, mut l2, mut dev1) = (0.0, 0.0, 0.0, 0.0);
    let (mut lo, mut hi, mut devinf) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &x in v {
        sum += x;
        l1 += x.abs();
        l2 += x * x;
        dev1 += (x - ubar).abs();
        lo = lo.min(x);
        hi = hi.max(x);
        devinf = devinf.max((x - ubar).abs());
    }
    ObservableRecord {
        t,
        step,
        mass: sum * cm,
        min: lo,
        max: hi,
        l1: l1 * cm,
        l2: (l2 * cm).sqrt(),
        linf: lo.abs().max(hi.abs()),
        energy: a.energy,
        dissipation,
        grad_sup: grad_sup(u),
        dev_l1: dev1 * cm,
        dev_linf: devinf,
    }
}

/// Integrates from `u0` to `t_end`.
pub fn run(u0: &ScalarField, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let grid = *u0.grid();
    if !u0.is_finite() {
        return Err(SolverError::InitialData("non-finite values".into()));
    }
    let umin = u0.min();
    if umin < 0.0 {
        return Err(SolverError::InitialData(format!("negative value {umin}")));
    }
    if cfg.m < 1.0 {
        let floor = cfg.floor_m_lt_1.unwrap_or(0.0);
        if umin < floor {
            return Err(SolverError::InitialData(format!("min u0 = {umin} is below the floor {floor} required for m < 1")));
        }
    }
    let solver = Solver::new(grid, cfg)?;
    let ubar = mean(u0);

    let mut targets: Vec<f64> = cfg.output_times.iter().copied().filter(|&t| t > 0.0).collect();
    if targets.last().map_or(true, |&t| t < cfg.t_end) {
        targets.push(cfg.t_end);
    }

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut dissipation = 0.0;
    let mut u = u0.values().to_vec();
    let mut a = solver.analyze(&u);
    let mut snapshots = vec![Snapshot { t: 0.0, field: u0.clone() }];
    let mut observables = vec![observe(u0, 0.0, 0, ubar, &a, 0.0)];

    for &target in &targets {
        while t < target {
            let dt_stable = solver.limits(&u, &a.faces).combined(solver.cfl);
            if dt_stable < 1e-14 {
                return Err(SolverError::DtUnderflow { t, dt: dt_stable });
            }
            let hit = t + dt_stable >= target;
            let dt = if hit { target - t } else { dt_stable };
            let next = solver.update(&u, &a.faces, dt, t)?;
            let next_a = solver.analyze(&next);
            dissipation += 0.5 * dt * (a.dissipation_rate + next_a.dissipation_rate);
            t = if hit { target } else { t + dt };
            steps += 1;
            u = next;
            a = next_a;
            if hit || steps % cfg.observe_every == 0 {
                let field = ScalarField::new(grid, u.clone())?;
                observables.push(observe(&field, t, steps, ubar, &a, dissipation));
            }
        }
        if cfg.output_times.contains(&target) {
            snapshots.push(Snapshot { t: target, field: ScalarField::new(grid, u.clone())? });
        }
    }

    Ok(Trajectory { grid, m: cfg.m, epsilon: solver.eps, ubar, steps, snapshots, observables })
}

/// Separable periodic Gaussian smoothing with standard deviation `width`.
///
/// Weights are sampled on the lattice and normalized, so the output stays
/// nonnegative and keeps the mean.
pub fn mollify(u: &ScalarField, width: f64) -> ScalarField {
    if width <= 0.0 {
        return u.clone();
    }
    let g = *u.grid();
    let n = g.n() as isize;
    let h = g.h();
    let reach = ((6.0 * width / h).ceil() as isize).min(n / 2);
    let raw: Vec<f64> = (-reach..=reach).map(|j| (-0.5 * (j as f64 * h / width).powi(2)).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mut values = u.values().to_vec();
    for axis in 0..g.dim() {
        let src = values.clone();
        for (i, out) in values.iter_mut().enumerate() {
            let mut idx = g.multi_index(i);
            let base = idx[axis] as isize;
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                idx[axis] = (base + k as isize - reach).rem_euclid(n) as usize;
                acc += w * src[g.flat_index(idx)];
            }
            *out = acc;
        }
    }
    ScalarField::new(g, values).expect("same grid")
}

/// Returns the common spacing if `times` are uniformly spaced (relative tolerance 1e−9).
pub fn uniform_spacing(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300)).then_some(dt)
}

/// Smooth compactly supported bump `exp(−1/(1−z²))` and its derivative.
fn bump(z: f64) -> (f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - z * z;
    let b = (-1.0 / q).exp();
    (b, b * (-2.0 * z / (q * q)))
}

fn periodic_offset(x: f64, c: f64) -> f64 {
    let d = x - c;
    d - d.round()
}

/// A space-time tensor bump `ψ((t−tc)/τ) Π ψ((x_a−c_a)/w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_halfwidth: f64,
    pub x_center: [f64; 2],
    pub width: f64,
}

impl TestFunction {
    fn time_factor(&self, t: f64) -> f64 {
        bump((t - self.t_center) / self.t_halfwidth).0
    }

    /// `(φ_x, ∇φ_x)` of the spatial factor at `x`.
    fn space_factor(&self, x: [f64; 2], dim: usize) -> (f64, [f64; 2]) {
        let mut vals = [(1.0, 0.0); 2];
        for a in 0..dim {
            let (b, db) = bump(periodic_offset(x[a], self.x_center[a]) / self.width);
            vals[a] = (b, db / self.width);
        }
        let value = vals[0].0 * vals[1].0;
        (value, [vals[0].1 * vals[1].0, vals[0].0 * vals[1].1])
    }
}

/// The fixed probe bank: 8 space-time centers, spatial widths `4h` and `8h`.
pub fn entropy_test_bank(grid: &TorusGrid, t0: f64, t1: f64) -> Vec<TestFunction> {
    let tau = (t1 - t0) / 4.0;
    let mut bank = Vec::new();
    for j in 0..8usize {
        let t_center = t0 + tau + (t1 - t0 - 2.0 * tau) * (j as f64 + 0.5) / 8.0;
        let x_center = [((5 * j + 1) % 8) as f64 / 8.0 + 1.0 / 16.0, ((3 * j + 2) % 8) as f64 / 8.0 + 1.0 / 16.0];
        for w in [4.0, 8.0] {
            bank.push(TestFunction { t_center, t_halfwidth: tau, x_center, width: w * grid.h() });
        }
    }
    bank
}

/// Most negative weak-form Kruzhkov residual over the probe bank and `kappas`.
///
/// For each probe `φ` (normalized to `∫∫φ = 1`) this evaluates
/// `∫∫ η ∂tφ − q ∇g∗u·∇φ + (q − η'u^m)(u − ū)φ` with `η = |u−κ|` and
/// `q = sgn(u−κ)(u^m − κ^m)`. The time-derivative term is summed by parts over
/// consecutive snapshots, so a steady trajectory gives exactly zero.
pub fn entropy_residual(traj: &Trajectory, cfg: &SolverConfig, kappas: &[f64]) -> Result<f64, SolverError> {
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(SolverError::TooFewSnapshots { needed: 3, got: snaps.len() });
    }
    let times = traj.times();
    uniform_spacing(&times).ok_or(SolverError::NonUniformSnapshots)?;
    let grid = traj.grid;
    let dim = grid.dim();
    let cm = grid.cell_measure();
    let m = cfg.m;
    let ubar = traj.ubar;
    let spectral = Spectral::new(grid);
    let fields: Vec<Vec<Vec<f64>>> = snaps
        .iter()
        .map(|s| {
            let uhat = spectral.forward(s.field.values());
            (0..dim).map(|a| spectral.gradient_from_hat(&uhat, a, Staggering::Cell)).collect()
        })
        .collect();
    let bank = entropy_test_bank(&grid, times[0], times[times.len() - 1]);
    let centers: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.center(i)).collect();

    let mut worst = f64::INFINITY;
    for probe in &bank {
        let space: Vec<(f64, [f64; 2])> = centers.iter().map(|&x| probe.space_factor(x, dim)).collect();
        let space_mass: f64 = space.iter().map(|s| s.0).sum::<f64>() * cm;
        let mids: Vec<f64> = times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let time_mass: f64 = times.windows(2).zip(&mids).map(|(w, &tm)| (w[1] - w[0]) * probe.time_factor(tm)).sum();
        let norm = space_mass * time_mass;
        if norm <= 0.0 {
            continue;
        }
        for &kappa in kappas {
            let km = mobility(kappa.max(0.0), m);
            // Per-snapshot integrand of the flux and source terms, without the time factor.
            let flux_source: Vec<f64> = snaps
                .iter()
                .zip(&fields)
                .map(|(s, grad)| {
                    let mut acc = 0.0;
                    for (i, &u) in s.field.values().iter().enumerate() {
                        let (phi, dphi) = space[i];
                        if phi == 0.0 {
                            continue;
                        }
                        let sg = if u > kappa {
                            1.0
                        } else if u < kappa {
                            -1.0
                        } else {
                            0.0
                        };
                        let q = sg * (mobility(u, m) - km);
                        let dot: f64 = (0..dim).map(|a| grad[a][i] * dphi[a]).sum();
                        acc += -q * dot + (q - sg * mobility(u, m)) * (u - ubar) * phi;
                    }
                    acc * cm
                })
                .collect();
            let mut total = 0.0;
            for n in 0..snaps.len() - 1 {
                let dt = times[n + 1] - times[n];
                let tf = probe.time_factor(mids[n]);
                if tf == 0.0 {
                    continue;
                }
                let a = snaps[n].field.values();
                let b = snaps[n + 1].field.values();
                let deta: f64 = (0..grid.len())
                    .filter(|&i| space[i].0 != 0.0)
                    .map(|i| ((b[i] - kappa).abs() - (a[i] - kappa).abs()) * space[i].0)
                    .sum::<f64>()
                    * cm;
                total += -deta * tf + dt * tf * 0.5 * (flux_source[n] + flux_source[n + 1]);
            }
            worst = worst.min(total / norm);
        }
    }
    Ok(worst)
}

/// `E(t) + ∫₀ᵗD − E(0)` at every recorded time.
pub fn energy_defect_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    let e0 = traj.observables[0].energy;
    traj.observables.iter().map(|o| (o.t, o.energy + o.dissipation - e0)).collect()
}

/// Max over recorded `t > 0` of `E(t) + ∫₀ᵗD − E(0)`; 0 when nothing beyond `t = 0` was recorded.
pub fn dissipation_check(traj: &Trajectory) -> f64 {
    let defects = energy_defect_series(traj);
    if defects.len() < 2 {
        return 0.0;
    }
    defects[1..].iter().map(|&(_, d)| d).fold(f64::NEG_INFINITY, f64::max)
}

/// `(t, max |∇u|)` per snapshot.
pub fn grad_sup_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.snapshots.iter().map(|s| (s.t, grad_sup(&s.field))).collect()
}
