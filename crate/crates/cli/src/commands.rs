use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use resonatorsim::analytic::CROSSING_TOL;
use resonatorsim::experiments::calibration::min_w_deviation_damped;
use resonatorsim::experiments::{
    first_crossing, format_sig, max_population_deviation, optimize_g1, scenario_crossings, scenario_population,
    sweep_fidelity_map_g2, sweep_fidelity_vs_time, sweep_gm, sweep_werner, with_kappa, FidelityTarget,
    ScenarioResult, DEFAULT_CHI_T_MAX, MAP_KAPPA_MHZ, PEAK_HALF_WINDOW,
};
use resonatorsim::hamiltonians::{single_excitation_basis, verify_sw_identities};
use resonatorsim::model::{dispersive_validity, SystemSpec, Validity};
use resonatorsim::parallel::ExecMode;

use crate::args::*;
use crate::failure::{CliError, Kind};

/// Hard limits for `sw-verify`.
pub const SW_R1_LIMIT: f64 = 1e-10;
pub const SW_SIMILARITY_LIMIT: f64 = 1e-10;

/// Files written so far by the current invocation.
#[derive(Debug, Default)]
pub struct Run {
    pub outputs: Vec<PathBuf>,
    pub mode: ExecMode,
}

impl Run {
    fn emit(&mut self, result: &ScenarioResult, csv: &Path) -> Result<(), CliError> {
        let meta = result.write(csv).map_err(|e| CliError::new(Kind::Io, format!("writing '{}': {e}", csv.display())))?;
        self.outputs.push(csv.to_path_buf());
        self.outputs.push(meta);
        println!("wrote {} ({} rows)", csv.display(), result.rows());
        Ok(())
    }
}

pub fn load_system(args: &SystemArgs, default_n: usize) -> Result<SystemSpec, CliError> {
    let spec = match &args.config {
        Some(path) => {
            let spec = SystemSpec::load(path)?;
            if let Some(n) = args.n {
                if n != spec.n() {
                    return Err(CliError::config(format!(
                        "--n {n} does not match config '{}', which describes {} resonators",
                        path.display(),
                        spec.n()
                    )));
                }
            }
            spec
        }
        None => {
            let n = args.n.unwrap_or(default_n);
            if n == 0 {
                return Err(CliError::config("--n must be at least 1"));
            }
            SystemSpec::homogeneous(n)
        }
    };
    for check in dispersive_validity(&spec)? {
        if check.flag == Validity::Warn {
            eprintln!("warning[dispersive]: R{} has g/|Δ| = {:.4}; the dispersive model may be inaccurate", check.resonator, check.ratio);
        }
    }
    Ok(spec)
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::config(format!("{name} must be positive and finite, got {value}")))
    }
}

fn sig(x: f64) -> String {
    format_sig(x, 6)
}

pub fn evolve(args: &EvolveArgs, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 3)?;
    let chi_t_max = match (args.t_max_us, args.chi_t_max) {
        (Some(t), _) => positive("--t-max-us", t)? * spec.reference_chi()?.abs() / PI,
        (None, Some(x)) => positive("--chi-t-max", x)?,
        (None, None) => DEFAULT_CHI_T_MAX,
    };
    if let Some(k) = args.kappa_mhz {
        if !(k.is_finite() && k >= 0.0) {
            return Err(CliError::config(format!("--kappa-mhz must be non-negative, got {k}")));
        }
    }
    let result = scenario_population(spec.n(), &spec, args.kappa_mhz, chi_t_max, args.points)?;
    run.emit(&result, &args.out)?;
    println!("max_abinitio_vs_analytic={}", sig(max_population_deviation(&result, spec.n())));
    Ok(())
}

pub fn crossings(args: &CrossingsArgs, run: &mut Run) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::config("--n must be at least 2"));
    }
    positive("--chi-t-max", args.chi_t_max)?;
    positive("--tol", args.tol)?;
    let result = scenario_crossings(args.n, args.chi_t_max, args.tol)?;
    run.emit(&result, &args.out)?;
    let roots = result.column("chi_t_over_pi").unwrap_or(&[]);
    if roots.is_empty() {
        println!("no equal-population time for n = {} up to chi_t/pi = {}", args.n, args.chi_t_max);
    }
    for x in roots {
        println!("{}", sig(*x));
    }
    Ok(())
}

pub fn fidelity(args: &FidelityArgs, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 3)?;
    positive("--chi-t-max", args.chi_t_max)?;
    if args.kappas_mhz.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(CliError::config("--kappas-mhz entries must be non-negative"));
    }
    let crossing = first_crossing(spec.n()).ok();
    let target = match args.target {
        TargetKind::Instantaneous => FidelityTarget::Instantaneous,
        TargetKind::Snapshot => FidelityTarget::Snapshot {
            chi_t_over_pi: crossing.ok_or_else(|| {
                CliError::config(format!("--target snapshot needs a crossing time; n = {} has none", spec.n()))
            })?,
        },
    };
    let result = sweep_fidelity_vs_time(&spec, &args.kappas_mhz, args.chi_t_max, args.points, target, run.mode)?;
    run.emit(&result, &args.out)?;
    if let Some(x_c) = crossing {
        let xs = result.column("chi_t_over_pi").unwrap_or(&[]);
        for (kappa, column) in args.kappas_mhz.iter().zip(&result.columns[2..]) {
            let best = xs
                .iter()
                .zip(&column.values)
                .filter(|(x, _)| (*x - x_c).abs() <= PEAK_HALF_WINDOW)
                .max_by(|a, b| a.1.total_cmp(b.1));
            if let Some((x, f)) = best {
                println!("kappa_mhz={} peak_fidelity={} chi_t_over_pi={}", sig(*kappa), sig(*f), sig(*x));
            }
        }
    }
    Ok(())
}

pub fn optimize(args: &OptimizeG1Args, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 5)?;
    if !(args.damped_kappa_mhz.is_finite() && args.damped_kappa_mhz >= 0.0) {
        return Err(CliError::config("--damped-kappa-mhz must be non-negative"));
    }
    let cal = optimize_g1(&spec, args.search_mhz, run.mode)?;
    let calibrated = with_kappa(&spec.clone().with_coupling(1, cal.g1_mhz), args.damped_kappa_mhz);
    let damped = min_w_deviation_damped(&calibrated)?;
    let mut result = cal.to_result(&spec, args.search_mhz)?;
    result.meta("damped_kappa_mhz", args.damped_kappa_mhz)?;
    result.meta("damped_best_deviation", damped)?;
    run.emit(&result, &args.out)?;
    println!("g1_star_mhz={}", sig(cal.g1_mhz));
    println!("objective={} homogeneous_objective={}", sig(cal.objective), sig(cal.homogeneous_objective));
    println!("best_deviation={} damped_best_deviation={}", sig(cal.best_deviation), sig(damped));
    let times: Vec<String> = cal.near_w_times.iter().map(|x| sig(*x)).collect();
    println!("near_w_chi_t_over_pi={}", times.join(","));
    Ok(())
}

pub fn gm_sweep(args: &GmSweepArgs, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 3)?;
    if args.kappas_mhz.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(CliError::config("--kappas-mhz entries must be non-negative"));
    }
    let result = sweep_gm(&spec, &args.ratios, &args.kappas_mhz, run.mode)?;
    run.emit(&result, &args.out)?;
    for kappa in &args.kappas_mhz {
        let name = format!("delta_kappa_{}", format_sig(*kappa, 12));
        let worst = result.column(&name).unwrap_or(&[]).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        println!("kappa_mhz={} max_abs_delta={}", sig(*kappa), sig(worst));
    }
    Ok(())
}

pub fn werner(args: &WernerArgs, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 3)?;
    if args.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(CliError::config("--p-grid entries must lie in [0, 1]"));
    }
    if args.thetas.iter().any(|t| !t.is_finite()) {
        return Err(CliError::config("--thetas entries must be finite"));
    }
    let thetas: Vec<f64> = args.thetas.iter().map(|t| t * PI).collect();
    let result = sweep_werner(&spec, &args.p_grid, &thetas, run.mode)?;
    run.emit(&result, &args.out)?;
    let residual = result.column("affine_residual").unwrap_or(&[]).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let baseline = result.metadata.get("baseline_fidelity").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    println!("baseline_fidelity={} max_affine_residual={}", sig(baseline), format_sig(residual, 3));
    Ok(())
}

pub fn sw_verify(args: &SwVerifyArgs, run: &mut Run) -> Result<(), CliError> {
    let spec = load_system(&args.system, 3)?;
    let basis = single_excitation_basis(spec.n() + 1)?;
    let report = verify_sw_identities(&spec, &basis)?;
    let mut result = ScenarioResult::new("sw_verify");
    for (name, value) in [
        ("r1", report.r1),
        ("r2", report.r2),
        ("r2_relative", report.r2_relative),
        ("similarity_error", report.similarity_error),
        ("r3", report.r3),
        ("max_ratio", report.max_ratio),
    ] {
        result.push_column(name, vec![value])?;
    }
    result.meta("spec", &spec)?;
    result.meta("validity", dispersive_validity(&spec)?)?;
    result.meta("r1_limit", SW_R1_LIMIT)?;
    result.meta("similarity_limit", SW_SIMILARITY_LIMIT)?;
    run.emit(&result, &args.out)?;
    println!(
        "r1={} similarity_error={} r2_relative={} r3={} max_ratio={}",
        format_sig(report.r1, 3),
        format_sig(report.similarity_error, 3),
        format_sig(report.r2_relative, 3),
        format_sig(report.r3, 3),
        sig(report.max_ratio)
    );
    if report.r1 > SW_R1_LIMIT || report.similarity_error > SW_SIMILARITY_LIMIT {
        return Err(CliError::new(
            Kind::Check,
            format!(
                "Schrieffer-Wolff residuals above limits: r1 = {:e} (limit {SW_R1_LIMIT:e}), similarity = {:e} (limit {SW_SIMILARITY_LIMIT:e})",
                report.r1, report.similarity_error
            ),
        ));
    }
    Ok(())
}

fn default_system(n: usize) -> SystemArgs {
    SystemArgs { config: None, n: Some(n) }
}

fn map_g2(out: &Path, run: &mut Run) -> Result<(), CliError> {
    let ratios: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
    let target = FidelityTarget::Snapshot { chi_t_over_pi: first_crossing(3)? };
    let map = sweep_fidelity_map_g2(&SystemSpec::homogeneous(3), &ratios, (0.0, DEFAULT_CHI_T_MAX), 600, MAP_KAPPA_MHZ, target, run.mode)?;
    run.emit(&map.result, out)?;
    println!(
        "best_fidelity={} g2_over_g={} chi_t_over_pi={}",
        sig(map.best_fidelity),
        sig(map.best_ratio),
        sig(map.best_chi_t_over_pi)
    );
    Ok(())
}

/// Every scenario at its default parameters, outputs under `out_dir`.
pub fn scenario_all(args: &ScenarioArgs, run: &mut Run) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::new(Kind::Io, format!("creating '{}': {e}", args.out_dir.display())))?;
    let dir = &args.out_dir;
    for n in [3, 4, 5] {
        evolve(
            &EvolveArgs {
                system: default_system(n),
                t_max_us: None,
                chi_t_max: Some(DEFAULT_CHI_T_MAX),
                points: 600,
                kappa_mhz: Some(0.25),
                out: dir.join(format!("population_n{n}.csv")),
            },
            run,
        )?;
    }
    for n in [3, 4] {
        crossings(
            &CrossingsArgs { n, chi_t_max: 2.0, tol: CROSSING_TOL, out: dir.join(format!("crossings_n{n}.csv")) },
            run,
        )?;
        fidelity(
            &FidelityArgs {
                system: default_system(n),
                kappas_mhz: vec![0.0, 0.25, 0.5],
                chi_t_max: DEFAULT_CHI_T_MAX,
                points: 600,
                target: TargetKind::Instantaneous,
                out: dir.join(format!("fidelity_n{n}.csv")),
            },
            run,
        )?;
    }
    optimize(
        &OptimizeG1Args {
            system: default_system(5),
            search_mhz: (50.0, 80.0),
            damped_kappa_mhz: 0.5,
            out: dir.join("optimize_g1.csv"),
        },
        run,
    )?;
    map_g2(&dir.join("fidelity_map_g2.csv"), run)?;
    gm_sweep(
        &GmSweepArgs {
            system: default_system(3),
            ratios: vec![f64::INFINITY, 1000.0, 500.0, 200.0, 100.0, 50.0, 20.0, 10.0],
            kappas_mhz: vec![0.0, 0.5],
            out: dir.join("gm_sweep.csv"),
        },
        run,
    )?;
    werner(
        &WernerArgs {
            system: default_system(3),
            p_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            thetas: vec![0.0, 0.25, 0.5],
            out: dir.join("werner.csv"),
        },
        run,
    )?;
    sw_verify(&SwVerifyArgs { system: default_system(3), out: dir.join("sw_verify.csv") }, run)
}
