//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs as a plain binary (`harness = false`). Positional numeric arguments
//! select criteria, e.g. `cargo test --test acceptance -- 3 12`.

use coulombflow::barrier_ode::{phi, phi_envelopes, tau_half, BarrierParams};
use coulombflow::hj_fronts::{
    calibration_sweep, comparison_check, front_bound_margins, frozen_constants, integrate_single_vortex, integrate_two_vortex,
    log_times, smooth_samples, viscosity_residual, FdSteps, KEvaluator, ResidualKind, SingleVortexK, SingleVortexState,
    SupersolutionK, SupersolutionState, TwoVortexK, TwoVortexState,
};
use coulombflow::pde_solver::{dissipation_check, run, SolverConfig, Trajectory, Viscosity};
use coulombflow::rearrangement::{
    default_support_threshold, rearrange, subsolution_residual, support_measure, waiting_time_indicator, EdgeClass,
};
use coulombflow::torus_field::{lp_norm, ScalarField, TorusGrid};
use coulombflow::verify::{
    check_asymptotics, check_barriers, check_waiting_time, weak_strong_constant, CheckResult,
    DecayNorm,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

// Pinned tolerances.
const MASS_REL: f64 = 1e-11;
const LP_MONOTONE: f64 = 1e-8;
const ENERGY_REL: f64 = 1e-6;
const ENERGY_ABS: f64 = 1e-12;
const BARRIER_SLACK: f64 = 0.02;
const LOWER_BARRIER_FRACTION: f64 = 0.9;
const RATE_SLACK: f64 = 0.15;
const LOGISTIC_TOL: f64 = 1e-8;
const LP_IDENTITY_TOL: f64 = 1e-12;
const SUBSOLUTION_TOL: f64 = 0.05;
const SUPPORT_TOL_MIN: f64 = 0.03;
const FRONT_EXACT_TOL: f64 = 1e-8;
const COMPARISON_SLACK: f64 = 0.02;
const SUPPORT_CELLS: f64 = 3.0;
const WEAK_STRONG_SPREAD: f64 = 0.25;
const RESIDUAL_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn grid(dim: usize, n: usize) -> TorusGrid {
    TorusGrid::new(dim, n).unwrap()
}

fn cosine(g: TorusGrid, base: f64, amp: f64) -> ScalarField {
    ScalarField::from_fn(g, |x| base + amp * (2.0 * PI * x[0]).cos())
}

fn config(m: f64, t_end: f64, snapshots: usize, eps: Viscosity) -> SolverConfig {
    let mut cfg = SolverConfig::new(m, t_end).with_uniform_outputs(snapshots);
    cfg.epsilon = eps;
    if m < 1.0 {
        cfg.floor_m_lt_1 = Some(1e-3);
    }
    cfg
}

/// The reference suite: `d = 1`, `n = 256`, `ε = h`, cosine data with mean 1
/// and minimum 0.5, for `m ∈ {0.5, 1, 2, 4}`, plus a `d = 2`, `n = 64` run.
struct Suite {
    runs: Vec<(String, Trajectory)>,
}

impl Suite {
    fn build() -> Self {
        let mut runs = Vec::new();
        for m in [0.5, 1.0, 2.0, 4.0] {
            let u0 = cosine(grid(1, 256), 1.0, 0.5);
            runs.push((format!("d1 m={m}"), run(&u0, &config(m, 5.0, 100, Viscosity::Auto)).unwrap()));
        }
        let u0 = ScalarField::from_fn(grid(2, 64), |x| 1.0 + 0.25 * (2.0 * PI * x[0]).cos() + 0.25 * (2.0 * PI * x[1]).cos());
        runs.push(("d2 m=2".into(), run(&u0, &config(2.0, 1.0, 20, Viscosity::Auto)).unwrap()));
        Self { runs }
    }

    fn one_d(&self) -> impl Iterator<Item = &(String, Trajectory)> {
        self.runs.iter().filter(|r| r.1.grid.dim() == 1)
    }

    fn by_m(&self, m: f64) -> &Trajectory {
        &self.one_d().find(|r| r.1.m == m).unwrap().1
    }
}

fn find<'a>(checks: &'a [CheckResult], id: &str) -> &'a CheckResult {
    checks.iter().find(|c| c.check_id == id).unwrap_or_else(|| panic!("missing check {id}"))
}

fn crit1(s: &Suite) -> Outcome {
    let mut worst = 0.0f64;
    for (_, t) in &s.runs {
        let m0 = t.observables[0].mass;
        worst = worst.max(t.observables.iter().map(|o| (o.mass - m0).abs() / m0).fold(0.0, f64::max));
    }
    outcome(worst <= MASS_REL, format!("max relative mass drift {worst:.2e} over {} runs (tol {MASS_REL:e})", s.runs.len()))
}

fn crit2(s: &Suite) -> Outcome {
    let mut worst = 0.0f64;
    for (_, t) in s.one_d() {
        for norm in [|o: &coulombflow::pde_solver::ObservableRecord| o.l2, |o: &coulombflow::pde_solver::ObservableRecord| o.linf] {
            let inc = t.observables.windows(2).map(|w| norm(&w[1]) - norm(&w[0])).fold(0.0, f64::max);
            worst = worst.max(inc);
        }
    }
    outcome(worst <= LP_MONOTONE, format!("largest L2/Linf increase per interval {worst:.2e} (tol {LP_MONOTONE:e})"))
}

fn energy_violation(t: &Trajectory) -> f64 {
    dissipation_check(t).max(0.0)
}

fn crit3(s: &Suite) -> Outcome {
    let mut ok = true;
    let mut worst_rel = f64::NEG_INFINITY;
    for (_, t) in &s.runs {
        let e0 = t.observables[0].energy;
        let d = dissipation_check(t);
        worst_rel = worst_rel.max(d / e0);
        ok &= d <= ENERGY_REL * e0 + ENERGY_ABS;
    }
    // Refinement: the violation (positive part) shrinks at least like h.
    let viol: Vec<f64> = [128usize, 256, 512]
        .iter()
        .map(|&n| energy_violation(&run(&cosine(grid(1, n), 1.0, 0.5), &config(2.0, 1.0, 20, Viscosity::Auto)).unwrap()))
        .collect();
    let shrinks = viol.windows(2).all(|w| w[1] <= 0.5 * w[0] + ENERGY_ABS);
    outcome(
        ok && shrinks,
        format!("max defect/E0 {worst_rel:.2e}; violation at n=128,256,512: {:.2e}, {:.2e}, {:.2e}", viol[0], viol[1], viol[2]),
    )
}

fn crit4(s: &Suite) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for (_, t) in s.one_d() {
        let checks = check_barriers(t).unwrap();
        for id in ["barrier_upper", "barrier_lower", "regularization"] {
            let c = find(&checks, id);
            assert_eq!(c.tolerance, BARRIER_SLACK * t.ubar);
            worst = worst.max(c.measured);
            all &= c.passed();
        }
    }
    outcome(all, format!("largest barrier excess {worst:.2e} (slack {BARRIER_SLACK}·ū) at n=256"))
}

fn crit5() -> Outcome {
    let (ubar, m, min0) = (1.0, 0.5, 0.01);
    let u0 = cosine(grid(1, 256), ubar, ubar - min0);
    let tau = tau_half(&BarrierParams::new(ubar, min0, m).unwrap()).unwrap();
    let mut cfg = config(m, tau, 1, Viscosity::Auto);
    cfg.floor_m_lt_1 = Some(min0 * 0.999);
    cfg.output_times = (0..=200).map(|i| tau * i as f64 / 200.0).collect();
    let t = run(&u0, &cfg).unwrap();
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    for snap in t.snapshots.iter().filter(|s| s.t >= 0.05 && s.t <= tau) {
        let bound = LOWER_BARRIER_FRACTION * snap.t * snap.t / 4.0;
        worst = worst.min(snap.field.min() / bound);
        samples += 1;
    }
    let faithful = find(&check_barriers(&t).unwrap(), "fast_diffusion_lower").passed();
    outcome(
        samples > 0 && worst >= 1.0 && faithful,
        format!("min u / (0.9 t²/4) ≥ {worst:.3} on {samples} snapshots in [0.05, τ½ = {tau:.4}]; min0-aware barrier check passed: {faithful}"),
    )
}

fn crit6(s: &Suite) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [0.5, 1.0, 2.0] {
        let c = check_asymptotics(s.by_m(m), &[DecayNorm::L1]).remove(0);
        // Rate ū^m with ū = 1.
        ok &= c.passed() && (c.bound + (1.0 - RATE_SLACK)).abs() < 1e-12;
        parts.push(format!("L1 m={m}: {:.3}", c.measured));
    }
    let c = check_asymptotics(s.by_m(2.0), &[DecayNorm::Hm1]).remove(0);
    // c is the minimum over cell centers, within 1e-4 of 0.5 at n = 256.
    ok &= c.passed() && (c.bound + (1.0 - RATE_SLACK) * 0.25).abs() < 1e-4;
    parts.push(format!("Hm1 m=2: {:.3} (bound {:.3})", c.measured, c.bound));
    outcome(ok, parts.join(", "))
}

fn crit7() -> Outcome {
    let mut worst = 0.0f64;
    for (ubar, beta) in [(1.0, 0.2), (2.0, 3.0), (0.5, 0.01)] {
        let p = BarrierParams::new(ubar, beta, 1.0).unwrap();
        for i in 0..=200 {
            let t = 10.0 * i as f64 / 200.0;
            let e = (ubar * t).exp();
            let exact = ubar * beta * e / (ubar + beta * (e - 1.0));
            worst = worst.max((phi(&p, t).unwrap() - exact).abs());
        }
    }
    let combos = [(0.01, 1.0, 0.5), (0.3, 1.0, 0.5), (0.1, 2.0, 0.7), (0.5, 1.0, 2.0), (3.0, 1.0, 2.0), (2.0, 1.5, 4.0)];
    let mut contained = true;
    for (beta, ubar, m) in combos {
        let p = BarrierParams::new(ubar, beta, m).unwrap();
        for t in log_times(1e-3, 10.0, 50) {
            let v = phi(&p, t).unwrap();
            let (lo, hi) = phi_envelopes(&p, t).unwrap();
            contained &= lo <= v * (1.0 + 1e-10) && v <= hi * (1.0 + 1e-10);
        }
    }
    outcome(
        worst <= LOGISTIC_TOL && contained,
        format!("logistic error {worst:.2e} (tol {LOGISTIC_TOL:e}); envelopes contain Φ for 6 combinations: {contained}"),
    )
}

fn random_field(rng: &mut ChaCha8Rng, g: TorusGrid) -> ScalarField {
    let vals = (0..g.len()).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..3.0) }).collect();
    ScalarField::new(g, vals).unwrap()
}

fn crit8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = grid(2, 16);
    let mut equi = true;
    let mut lp_err = 0.0f64;
    let mut contraction = true;
    for _ in 0..10 {
        let (u, v) = (random_field(&mut rng, g), random_field(&mut rng, g));
        let (pu, pv) = (rearrange(&u).unwrap(), rearrange(&v).unwrap());
        for i in 0..20 {
            let theta = 3.0 * i as f64 / 20.0;
            let cells = u.values().iter().filter(|&&x| x > theta).count();
            let sorted = pu.u_star().iter().filter(|&&x| x > theta).count();
            equi &= cells == sorted;
        }
        for p in [1.0, 2.0, 3.5] {
            let a = lp_norm(&u, p).unwrap();
            lp_err = lp_err.max((pu.lp_norm(p) - a).abs() / a);
        }
        let direct: f64 = u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.cell_measure();
        let sorted: f64 = pu.u_star().iter().zip(pv.u_star()).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.cell_measure();
        contraction &= sorted <= direct + 1e-14;
    }
    outcome(
        equi && lp_err <= LP_IDENTITY_TOL && contraction,
        format!("equimeasurable on 20 levels: {equi}; max relative Lp error {lp_err:.1e}; L1 contraction on 10 pairs: {contraction}"),
    )
}

fn subsolution_at(n: usize) -> f64 {
    let t = run(&cosine(grid(1, n), 1.0, 0.5), &config(1.0, 1.0, 50, Viscosity::Auto)).unwrap();
    let profiles: Vec<_> = t.snapshots.iter().map(|s| rearrange(&s.field).unwrap()).collect();
    subsolution_residual(&profiles, 1.0 / 50.0, 1.0, t.ubar).unwrap()
}

fn crit9() -> Outcome {
    let r: Vec<f64> = [128, 256, 512].iter().map(|&n| subsolution_at(n)).collect();
    let viol: Vec<f64> = r.iter().map(|x| x.max(0.0)).collect();
    let ok = r[1] <= SUBSOLUTION_TOL && viol.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok, format!("max residual at n=128,256,512: {:.2e}, {:.2e}, {:.2e} (tol {SUBSOLUTION_TOL}·ū²)", r[0], r[1], r[2]))
}

fn crit10() -> Outcome {
    // Support against the single-vortex prediction, inviscid scheme.
    let n = 256;
    let g = grid(1, n);
    let u0 = ScalarField::from_fn(g, |x| if (0.25..0.75).contains(&x[0]) { 2.0 } else { 0.0 });
    let t = run(&u0, &config(2.0, 1.0, 50, Viscosity::Value(0.0))).unwrap();
    let theta = default_support_threshold(&u0);
    let ode = integrate_single_vortex(&SingleVortexState { s1: 0.0, s2: 0.5, ubar: 1.0, m: 2.0 }, 1.0).unwrap();
    let mut err = 0.0f64;
    for snap in &t.snapshots {
        let y = ode.at(snap.t).unwrap();
        err = err.max((support_measure(&snap.field, theta) - (y[1] - y[0])).abs());
    }
    let tol = SUPPORT_TOL_MIN.max(3.0 / n as f64);

    // Linear mobility: exact exponentials.
    let mut exact_err = 0.0f64;
    let single = integrate_single_vortex(&SingleVortexState { s1: 0.2, s2: 0.6, ubar: 1.3, m: 1.0 }, 3.0).unwrap();
    let double = integrate_two_vortex(&TwoVortexState { s: [0.1, 0.3, 0.6, 0.8], alpha: 0.45, ubar: 0.7, m: 1.0 }, 3.0).unwrap();
    for i in 0..=30 {
        let t = 0.1 * i as f64;
        let (e1, e07) = ((-1.3 * t).exp(), (-0.7 * t).exp());
        let y = single.at(t).unwrap();
        exact_err = exact_err.max((y[0] - 0.2 * e1).abs()).max((y[1] - (1.0 - 0.4 * e1)).abs());
        let z = double.at(t).unwrap();
        let want = [0.1 * e07, 0.45 - 0.15 * e07, 0.45 + 0.15 * e07, 1.0 - 0.2 * e07];
        for k in 0..4 {
            exact_err = exact_err.max((z[k] - want[k]).abs());
        }
    }
    outcome(
        err <= tol && exact_err <= FRONT_EXACT_TOL,
        format!("support vs single vortex {err:.4} (tol {tol}); m=1 fronts vs exponentials {exact_err:.1e} (tol {FRONT_EXACT_TOL:e})"),
    )
}

fn crit11() -> Outcome {
    // Block of height 2 on [0.25, 0.75]: k0 is 2s up to 0.5, so at s_i = 0.4
    // the matched supersolution has α = k0(0.4) = 0.8, C = ε_p / max u0.
    let n = 256;
    let u0 = ScalarField::from_fn(grid(1, n), |x| if (0.25..0.75).contains(&x[0]) { 2.0 } else { 0.0 });
    let (ubar, m, eps_p, s_i) = (1.0, 2.0, 0.05, 0.4);
    let k0 = rearrange(&u0).unwrap();
    let alpha = k0.k_at(s_i) / ubar;
    let c = eps_p / u0.max();
    let st = SupersolutionState::new(c, alpha, s_i - eps_p, s_i, ubar, m).unwrap();
    let sup = SupersolutionK::new(st, 1.0).unwrap();
    let t = run(&u0, &config(m, 1.0, 100, Viscosity::Auto)).unwrap();
    let profiles: Vec<_> = t.snapshots.iter().map(|s| (s.t, rearrange(&s.field).unwrap())).collect();
    let excess = comparison_check(&profiles, &sup).unwrap();
    let used = profiles.iter().filter(|p| p.0 <= sup.t_max()).count();
    outcome(
        excess <= COMPARISON_SLACK * ubar && used > 10,
        format!("max k − k̃ = {excess:.2e} over {used} snapshots up to T_* = {:.4} (slack {COMPARISON_SLACK}·ū)", sup.t_max()),
    )
}

fn crit12() -> Outcome {
    let (n, m) = (512, 4.0);
    let g = grid(1, n);
    let delta = SUPPORT_CELLS * g.cell_measure();
    let jump = ScalarField::from_fn(g, |x| if (0.25..0.75).contains(&x[0]) { 2.0 } else { 0.0 });
    let edge = ScalarField::from_fn(g, |x| (1.0 - 2.0 * (x[0] - 0.5).abs() / 0.5).max(0.0).powf(1.0 / (m - 1.0)));
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, u0, want) in [("jump", &jump, EdgeClass::Diverges), ("lipschitz", &edge, EdgeClass::Finite)] {
        let theta = default_support_threshold(u0);
        let s0 = support_measure(u0, theta);
        let ind = waiting_time_indicator(u0, m, s0).unwrap();
        let t = run(u0, &config(m, 1.0, 200, Viscosity::Value(0.0))).unwrap();
        let c = check_waiting_time(&t, &ind, theta).unwrap();
        assert_eq!(c.tolerance.max(-c.bound), delta);
        ok &= ind.class == want && c.passed();
        let growth = if want == EdgeClass::Diverges { -c.measured } else { c.measured };
        let window = c.context.get("lipschitz_window").map(|v| format!(", window t ≤ {v}")).unwrap_or_default();
        parts.push(format!("{name}: {:?}, support growth {:.1} cells{window}", ind.class, growth / g.cell_measure()));
    }
    outcome(ok, parts.join("; ") + &format!(" (δ = {SUPPORT_CELLS} cells)"))
}

fn crit13() -> Outcome {
    let mut fitted = Vec::new();
    for n in [128usize, 256] {
        for d in [1e-2, 5e-3] {
            let g = grid(1, n);
            let u0 = cosine(g, 1.0, 0.5);
            // The perturbation has L1 norm d.
            let v0 = ScalarField::from_fn(g, |x| 1.0 + 0.5 * (2.0 * PI * x[0]).cos() + d * PI / 2.0 * (4.0 * PI * x[0]).cos());
            let cfg = config(1.0, 1.0, 20, Viscosity::Value(0.0));
            let c = weak_strong_constant(&run(&u0, &cfg).unwrap(), &run(&v0, &cfg).unwrap()).unwrap();
            fitted.push((n, d, c));
        }
    }
    let c_ref = fitted[0].2;
    let spread = fitted.iter().map(|f| (f.2 - c_ref).abs() / c_ref.abs()).fold(0.0, f64::max);
    let list: Vec<String> = fitted.iter().map(|(n, d, c)| format!("n={n} δ={d}: {c:.3}")).collect();
    outcome(spread <= WEAK_STRONG_SPREAD, format!("{}; spread {:.1}% (tol 25%)", list.join(", "), 100.0 * spread))
}

fn residual_pair(ev: &dyn KEvaluator, times: &[f64]) -> (f64, f64) {
    let samples = smooth_samples(ev, times, 6, 1e-3).unwrap();
    let fd = FdSteps::default();
    (viscosity_residual(ev, ResidualKind::Sub, &samples, fd).unwrap(), viscosity_residual(ev, ResidualKind::Super, &samples, fd).unwrap())
}

fn crit14() -> Outcome {
    let times: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
    let mut worst_abs = 0.0f64;
    for st in [
        SingleVortexState { s1: 0.1, s2: 0.5, ubar: 1.0, m: 2.0 },
        SingleVortexState { s1: 0.3, s2: 0.4, ubar: 0.8, m: 3.0 },
    ] {
        let (hi, lo) = residual_pair(&SingleVortexK::new(st, 1.0).unwrap(), &times);
        worst_abs = worst_abs.max(hi.abs()).max(lo.abs());
    }
    for st in [
        TwoVortexState { s: [0.1, 0.3, 0.6, 0.8], alpha: 0.45, ubar: 1.0, m: 2.0 },
        TwoVortexState { s: [0.05, 0.2, 0.7, 0.9], alpha: 0.5, ubar: 1.2, m: 4.0 },
    ] {
        let (hi, lo) = residual_pair(&TwoVortexK::new(st, 1.0).unwrap(), &times);
        worst_abs = worst_abs.max(hi.abs()).max(lo.abs());
    }
    let mut super_min = f64::INFINITY;
    for st in [SupersolutionState::new(0.05, 0.8, 0.35, 0.4, 1.0, 2.0).unwrap(), SupersolutionState::new(0.02, 0.9, 0.5, 0.6, 1.0, 3.0).unwrap()] {
        let sol = SupersolutionK::new(st, 1.0).unwrap();
        let ts: Vec<f64> = times.iter().map(|t| t * sol.t_max()).collect();
        let (_, lo) = residual_pair(&sol, &ts);
        super_min = super_min.min(lo);
    }

    // Constants are calibrated once (m = 2 re-run here) and frozen.
    let cal = calibration_sweep(2.0).unwrap();
    let f2 = frozen_constants(2.0).unwrap();
    let frozen_ok = f2.c_lower >= cal.c_lower && f2.c_upper >= cal.c_upper && f2.c_spread <= cal.c_spread && f2.c_time <= cal.c_time;
    let mut margin = f64::INFINITY;
    for (m, alpha, s0, ubar) in [(2.0, 0.85, 0.35, 1.0), (2.0, 0.8, 0.65, 1.5), (3.0, 0.9, 0.4, 0.8), (4.0, 0.9, 0.5, 1.0)] {
        let st = coulombflow::hj_fronts::limit_configuration(alpha, s0, ubar, m).unwrap();
        let sol = SupersolutionK::new(st, 8.0 / f64::powf(ubar, m)).unwrap();
        margin = margin.min(front_bound_margins(&sol, &frozen_constants(m).unwrap(), 200).unwrap().worst());
    }
    outcome(
        worst_abs <= RESIDUAL_TOL && super_min >= -RESIDUAL_TOL && frozen_ok && margin >= 0.0,
        format!(
            "vortex |r| ≤ {worst_abs:.1e}; supersolution min r {super_min:.1e} (tol {RESIDUAL_TOL:e}); frozen constants cover m=2 sweep: {frozen_ok}; worst front-bound margin {margin:.3}"
        ),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |i: usize| selected.is_empty() || selected.contains(&i);
    let needs_suite = [1, 2, 3, 4, 6].iter().any(|&i| wanted(i));
    let start = Instant::now();
    let suite = needs_suite.then(Suite::build);
    let s = || suite.as_ref().unwrap();
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "mass conservation", Box::new(|| crit1(s()))),
        (2, "Lp decrease", Box::new(|| crit2(s()))),
        (3, "energy dissipation", Box::new(|| crit3(s()))),
        (4, "ODE barriers", Box::new(|| crit4(s()))),
        (5, "fast-diffusion lower barrier", Box::new(crit5)),
        (6, "exponential convergence", Box::new(|| crit6(s()))),
        (7, "barrier ODE exactness", Box::new(crit7)),
        (8, "rearrangement identities", Box::new(crit8)),
        (9, "subsolution residual", Box::new(crit9)),
        (10, "front tracking agreement", Box::new(crit10)),
        (11, "comparison principle", Box::new(crit11)),
        (12, "waiting time", Box::new(crit12)),
        (13, "weak-strong stability", Box::new(crit13)),
        (14, "viscosity residuals", Box::new(crit14)),
    ];
    let mut failed = Vec::new();
    for (i, name, f) in criteria.iter().filter(|c| wanted(c.0)) {
        let t0 = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {i:>2} {name}: {} [{:.1}s]", o.detail, t0.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(*i);
        }
    }
    println!("acceptance: {} failed {:?} in {:.1}s", failed.len(), failed, start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
