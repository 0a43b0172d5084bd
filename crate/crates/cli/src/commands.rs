use crate::config::{self, CheckKind, Format, FrontsSection, NormName, RunSection};
use crate::output::{csv_bytes, env_threads, fmt, pool, resolve_out_dir, write_file};
use crate::svg::{line_chart, Series};
use crate::FrontMode;
use anyhow::{anyhow, bail, Context, Result};
use coulombflow::hj_fronts::{
    integrate_single_vortex, integrate_supersolution, integrate_two_vortex, FrontTrajectory, SingleVortexState,
    SupersolutionState, TwoVortexState,
};
use coulombflow::pde_solver::{run, uniform_spacing, Trajectory};
use coulombflow::rearrangement::{rearrange, subsolution_residual, support_measure, waiting_time_indicator};
use coulombflow::verify::{
    check_asymptotics, check_barriers, check_conservation_and_monotonicity, check_subsolution, check_waiting_time,
    emit_report, CheckResult, DecayNorm, Report,
};
use rayon::prelude::*;
use std::path::Path;

pub fn simulate(config_path: &Path, out: Option<&Path>) -> Result<u8> {
    let loaded = config::load(config_path)?;
    let c = &loaded.config;
    let grid = c.grid.as_ref().ok_or_else(|| anyhow!("missing [grid] table required by simulate"))?;
    let solver = c.solver.as_ref().ok_or_else(|| anyhow!("missing [solver] table required by simulate"))?;
    let ic = c.initial_condition.as_ref().ok_or_else(|| anyhow!("missing [initial_condition] table required by simulate"))?;
    config::validate_threshold("outputs.support_threshold", c.outputs.support_threshold)?;
    let (cfg, u0) = config::build_run(grid, solver, ic, &loaded.base_dir, "")?;
    let threads = env_threads()?;
    let dir = resolve_out_dir(out, c.outputs.dir.as_deref(), &loaded.base_dir)?;

    let traj = run(&u0, &cfg).map_err(|e| anyhow!("solver: {e}"))?;
    let obs_rows = traj
        .observables
        .iter()
        .map(|o| vec![o.t, o.mass, o.min, o.max, o.l1, o.l2, o.linf, o.energy, o.dissipation, o.grad_sup]);
    let obs_header = ["t", "mass", "min", "max", "l1", "l2", "linf", "energy", "dissipation", "grad_sup"];
    write_file(&dir, "observables.csv", &csv_bytes(&obs_header, obs_rows)?)?;

    let theta = c.outputs.support_threshold * u0.max();
    let dim = traj.grid.dim();
    let processed: Vec<Result<(Vec<u8>, Vec<u8>, f64)>> = pool(threads)?.install(|| {
        traj.snapshots
            .par_iter()
            .map(|snap| {
                let g = snap.field.grid();
                let rows = snap.field.values().iter().enumerate().map(|(i, &v)| {
                    let x = g.center(i);
                    let mut r = x[..dim].to_vec();
                    r.push(v);
                    r
                });
                let header: &[&str] = if dim == 1 { &["x", "value"] } else { &["x", "y", "value"] };
                let u_csv = csv_bytes(header, rows)?;
                let prof = rearrange(&snap.field).map_err(|e| anyhow!("rearrangement at t = {}: {e}", snap.t))?;
                let k_csv = csv_bytes(&["s", "u_star", "k"], prof.csv_rows().into_iter().map(|r| r.to_vec()))?;
                Ok((u_csv, k_csv, support_measure(&snap.field, theta)))
            })
            .collect()
    });
    let mut support = Vec::new();
    for (snap, res) in traj.snapshots.iter().zip(processed) {
        let (u_csv, k_csv, s) = res?;
        write_file(&dir, &format!("u_{:.6}.csv", snap.t), &u_csv)?;
        write_file(&dir, &format!("k_{:.6}.csv", snap.t), &k_csv)?;
        support.push(vec![snap.t, s]);
    }
    write_file(&dir, "support.csv", &csv_bytes(&["t", "S"], support.clone())?)?;

    if c.outputs.formats.contains(&Format::Svg) {
        write_simulation_svgs(&dir, &traj)?;
    }
    println!(
        "simulate: m = {}, epsilon = {:e}, {} steps, {} snapshots -> {}",
        traj.m,
        traj.epsilon,
        traj.steps,
        traj.snapshots.len(),
        dir.display()
    );
    Ok(0)
}

fn write_simulation_svgs(dir: &Path, traj: &Trajectory) -> Result<()> {
    let col = |name: &str, f: &dyn Fn(&coulombflow::pde_solver::ObservableRecord) -> f64| Series {
        name: name.into(),
        points: traj.observables.iter().map(|o| (o.t, f(o))).collect(),
    };
    let obs = line_chart(
        "deviation from the mean",
        "t",
        &[col("dev_l1", &|o| o.dev_l1), col("dev_linf", &|o| o.dev_linf), col("dev_hm1", &|o| o.dev_hm1())],
    );
    write_file(dir, "observables.svg", obs.as_bytes())?;
    let mut ks = Vec::new();
    for snap in &traj.snapshots {
        let prof = rearrange(&snap.field).map_err(|e| anyhow!("rearrangement at t = {}: {e}", snap.t))?;
        ks.push(Series { name: format!("t={:.4}", snap.t), points: prof.csv_rows().iter().map(|r| (r[0], r[2])).collect() });
    }
    write_file(dir, "k.svg", line_chart("cumulative rearrangement k(t, s)", "s", &ks).as_bytes())?;
    if traj.grid.dim() == 1 {
        let us: Vec<Series> = traj
            .snapshots
            .iter()
            .map(|snap| Series {
                name: format!("t={:.4}", snap.t),
                points: snap.field.values().iter().enumerate().map(|(i, &v)| (traj.grid.coord(i), v)).collect(),
            })
            .collect();
        write_file(dir, "u.svg", line_chart("u(t, x)", "x", &us).as_bytes())?;
    }
    Ok(())
}

pub fn fronts(mode: FrontMode, config_path: &Path, out: Option<&Path>) -> Result<u8> {
    let loaded = config::load(config_path)?;
    let c = &loaded.config;
    let f: &FrontsSection = c.fronts.as_ref().ok_or_else(|| anyhow!("missing [fronts] table required by fronts"))?;
    if !(f.t_end > 0.0 && f.t_end.is_finite()) {
        bail!("fronts.t_end: must be positive and finite, got {}", f.t_end);
    }
    if f.outputs == 0 {
        bail!("fronts.outputs: must be at least 1");
    }
    let (traj, s1_const): (FrontTrajectory, Option<f64>) = match mode {
        FrontMode::Single => {
            let s = f.single.as_ref().ok_or_else(|| anyhow!("missing [fronts.single] table required by --mode single"))?;
            let init = SingleVortexState { s1: s.s1, s2: s.s2, ubar: f.ubar, m: f.m };
            (integrate_single_vortex(&init, f.t_end).map_err(|e| anyhow!("fronts.single: {e}"))?, None)
        }
        FrontMode::Double => {
            let s = f.double.as_ref().ok_or_else(|| anyhow!("missing [fronts.double] table required by --mode double"))?;
            let init = TwoVortexState { s: s.s, alpha: s.alpha, ubar: f.ubar, m: f.m };
            (integrate_two_vortex(&init, f.t_end).map_err(|e| anyhow!("fronts.double: {e}"))?, None)
        }
        FrontMode::Super => {
            let s = f.supersolution.as_ref().ok_or_else(|| anyhow!("missing [fronts.super] table required by --mode super"))?;
            let init = SupersolutionState::new(s.c, s.alpha, s.s2, s.s3, f.ubar, f.m).map_err(|e| anyhow!("fronts.super: {e}"))?;
            let s1 = s.c * s.alpha * f.ubar;
            (integrate_supersolution(&init, f.t_end).map_err(|e| anyhow!("fronts.super: {e}"))?, Some(s1))
        }
    };
    let dir = resolve_out_dir(out, c.outputs.dir.as_deref(), &loaded.base_dir)?;
    let times: Vec<f64> = (0..=f.outputs).map(|j| f.t_end * j as f64 / f.outputs as f64).collect();
    let rows = traj.csv_rows(&times, s1_const).map_err(|e| anyhow!("fronts: {e}"))?;
    let header = traj.csv_header();
    write_file(&dir, "fronts.csv", &csv_bytes(&header, rows.clone())?)?;
    if f.svg || c.outputs.formats.contains(&Format::Svg) {
        let last = header.len() - 1;
        let series: Vec<Series> = (1..last)
            .map(|j| Series { name: header[j].into(), points: rows.iter().map(|r| (r[0], r[j])).collect() })
            .collect();
        write_file(&dir, "fronts.svg", line_chart("front positions", "t", &series).as_bytes())?;
    }
    let show = |t: f64| if t.is_finite() { fmt(t) } else { "not reached".into() };
    println!("fronts: stop = {:?}, T_lower = {}, T_upper = {} -> {}", traj.stop, show(traj.t_lower), show(traj.t_upper), dir.display());
    Ok(0)
}

fn decay_norm(n: NormName) -> DecayNorm {
    match n {
        NormName::L1 => DecayNorm::L1,
        NormName::Linf => DecayNorm::Linf,
        NormName::Hm1 => DecayNorm::Hm1,
    }
}

fn run_checks(run_cfg: &RunSection, base_dir: &Path) -> Result<Vec<CheckResult>> {
    let prefix = format!("verify.runs[{}].", run_cfg.name);
    let (cfg, u0) = config::build_run(&run_cfg.grid, &run_cfg.solver, &run_cfg.initial_condition, base_dir, &prefix)?;
    let mut traj = run(&u0, &cfg).map_err(|e| anyhow!("{prefix}solver: {e}"))?;
    if let Some(fault) = &run_cfg.fault_injection {
        if let Some(last) = traj.observables.last_mut() {
            last.mass *= 1.0 + fault.mass_leak;
        }
    }
    let mut out = Vec::new();
    for check in &run_cfg.checks {
        match check {
            CheckKind::Conservation => out.extend(check_conservation_and_monotonicity(&traj)),
            CheckKind::Barriers => out.extend(check_barriers(&traj).map_err(|e| anyhow!("{prefix}barriers: {e}"))?),
            CheckKind::Asymptotics => {
                let norms: Vec<DecayNorm> = run_cfg.decay_norms.iter().map(|&n| decay_norm(n)).collect();
                out.extend(check_asymptotics(&traj, &norms));
            }
            CheckKind::Subsolution => {
                let times = traj.times();
                let dt = uniform_spacing(&times)
                    .ok_or_else(|| anyhow!("{prefix}solver: subsolution check needs uniformly spaced snapshots (set solver.snapshots)"))?;
                let profiles = traj
                    .snapshots
                    .iter()
                    .map(|s| rearrange(&s.field))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| anyhow!("{prefix}subsolution: {e}"))?;
                let r = subsolution_residual(&profiles, dt, traj.m, traj.ubar).map_err(|e| anyhow!("{prefix}subsolution: {e}"))?;
                out.push(check_subsolution(r, traj.ubar).with("m", traj.m).with("snapshot_dt", dt));
            }
            CheckKind::WaitingTime => {
                let theta = run_cfg.support_threshold * u0.max();
                let s0 = support_measure(&u0, theta);
                let ind = waiting_time_indicator(&u0, traj.m, s0).map_err(|e| anyhow!("{prefix}waiting_time: {e}"))?;
                out.push(check_waiting_time(&traj, &ind, theta).map_err(|e| anyhow!("{prefix}waiting_time: {e}"))?);
            }
        }
    }
    for r in &mut out {
        r.check_id = format!("{}/{}", run_cfg.name, r.check_id);
    }
    Ok(out)
}

pub fn verify(config_path: &Path, out: Option<&Path>, jobs: usize) -> Result<u8> {
    let loaded = config::load(config_path)?;
    let c = &loaded.config;
    let suite = c.verify.as_ref().ok_or_else(|| anyhow!("missing [verify] table required by verify"))?;
    let mut names = std::collections::BTreeSet::new();
    for (i, r) in suite.runs.iter().enumerate() {
        if !names.insert(r.name.as_str()) {
            bail!("verify.runs[{i}].name: duplicate run name \"{}\"", r.name);
        }
        config::validate_threshold(&format!("verify.runs[{}].support_threshold", r.name), r.support_threshold)?;
        // Fail fast on config errors before any run starts.
        config::build_run(&r.grid, &r.solver, &r.initial_condition, &loaded.base_dir, &format!("verify.runs[{}].", r.name))?;
    }
    let dir = resolve_out_dir(out, c.outputs.dir.as_deref(), &loaded.base_dir)?;
    let results: Vec<Result<Vec<CheckResult>>> =
        pool(jobs).context("--jobs")?.install(|| suite.runs.par_iter().map(|r| run_checks(r, &loaded.base_dir)).collect());
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    let config_value = serde_json::to_value(suite).context("serializing suite config")?;
    let report = Report::new(config_value, &loaded.raw, checks, Vec::new());
    let path = dir.join("report.json");
    let code = emit_report(&report, &path).with_context(|| format!("cannot write {}", path.display()))?;
    let s = &report.summary;
    println!(
        "verify {}: {} checks, {} pass, {} fail, {} inconclusive -> {}",
        suite.name,
        s.total,
        s.pass,
        s.fail,
        s.inconclusive,
        path.display()
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(code as u8)
}

pub fn plot(input: &Path, out: &Path, x: &str, ys: &[String]) -> Result<u8> {
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("cannot read {}", input.display()))?;
    let headers = rdr.headers().with_context(|| format!("{}: missing header", input.display()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("column \"{name}\" not in {} (have: {})", input.display(), headers.iter().collect::<Vec<_>>().join(", ")))
    };
    let xi = col(x)?;
    let yis = ys.iter().map(|y| col(y)).collect::<Result<Vec<_>>>()?;
    let mut series: Vec<Series> = ys.iter().map(|y| Series { name: y.clone(), points: Vec::new() }).collect();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: malformed row {}", input.display(), line + 2))?;
        let parse = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("").trim();
            s.parse::<f64>().with_context(|| format!("{}: row {}: cannot parse \"{s}\"", input.display(), line + 2))
        };
        let xv = parse(xi)?;
        for (s, &yi) in series.iter_mut().zip(&yis) {
            s.points.push((xv, parse(yi)?));
        }
    }
    if series[0].points.is_empty() {
        bail!("{}: no data rows", input.display());
    }
    let title = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    std::fs::write(out, line_chart(&title, x, &series)).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(0)
}
