//! The four subcommands: design, factorize, scan, and check-grad.

use std::path::PathBuf;

use beamsynth::{
    chebyshev_target, digital_factorize, finite_diff_grad, grad_j, measurement_matrix, minimize_q,
    random_phase_init, reconstruct, scan, sidelobe_peaks_db, solve_fixed_q, sum_coarray, vectorize,
    AngleGrid, ArrayGeometry, BeamformerSolution, Complex64, ComplexMatrix, CompositeImage,
    PsfSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DesignSpec, Preset, QMode, TargetSpec};
use crate::error::CliError;
use crate::files::{
    db_floor, fmt_complex_pair, fmt_f64, read_matrix, read_scene, read_solution,
    read_target_samples, write_file, write_solution, KvFile,
};
use crate::plot::{line_plot, PlotSpec, Series};

const DEG: f64 = 180.0 / std::f64::consts::PI;

pub fn cmd_design(
    preset: Option<Preset>,
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let spec = DesignSpec::resolve(preset, config, seed, out)?;
    let geom = &spec.geometry;
    let coarray_size = sum_coarray(geom, geom).len();

    let (grid, target) = match &spec.target {
        TargetSpec::Chebyshev { sidelobe_db } => {
            let grid = AngleGrid::uniform(spec.design_points)?;
            let target = chebyshev_target(coarray_size, *sidelobe_db, &grid)?;
            (grid, target)
        }
        TargetSpec::File(path) => {
            let (angles, values) = read_target_samples(path)?;
            let grid = AngleGrid::new(angles)?;
            let target = ComplexMatrix::new(values.len(), 1, values)
                .map_err(|e| CliError::usage(e.to_string()))?;
            (grid, target)
        }
    };
    let a = measurement_matrix(geom, geom, &grid);
    let problem = PsfSpec::new(grid, target, a).map_err(|e| CliError::usage(e.to_string()))?;
    let (grid, target, a) = (problem.grid, problem.target, problem.measurement);

    let mut solver_cfg = spec.solver.clone();
    solver_cfg.step_size = spec.resolve_step(coarray_size)?;

    let n = geom.len();
    let solution = match spec.q_mode {
        QMode::Fixed(q) => solve_fixed_q(&a, &target, n, n, q, &solver_cfg)?,
        QMode::Minimize { q_max } => minimize_q(&a, &target, n, n, q_max, &solver_cfg)?,
    };

    // evaluation grid: an independent, denser grid for Chebyshev targets,
    // the design grid itself for file targets
    let (eval_grid, desired_eval) = match &spec.target {
        TargetSpec::Chebyshev { sidelobe_db } => {
            let eval = AngleGrid::uniform(spec.eval_points)?;
            let desired = chebyshev_target(coarray_size, *sidelobe_db, &eval)?;
            (eval, desired)
        }
        TargetSpec::File(_) => (grid.clone(), target.clone()),
    };
    let a_eval = measurement_matrix(geom, geom, &eval_grid);
    let realized = &a_eval * &vectorize(&solution.factorization.reconstruct());

    write_file(
        &spec.out,
        "solution.txt",
        &write_solution(&solution, geom.positions(), geom.positions()),
    )?;
    write_file(&spec.out, "residuals.csv", &residuals_csv(&solution))?;
    write_file(
        &spec.out,
        "psf.csv",
        &psf_csv(&eval_grid, &desired_eval, &realized),
    )?;
    write_file(
        &spec.out,
        "psf.svg",
        &psf_svg(&eval_grid, &desired_eval, &realized),
    )?;

    let rel = solution.residual / target.frobenius_norm().max(f64::MIN_POSITIVE);
    println!(
        "design: Q = {}, residual = {:.6e} ({:.3e} of target norm), iterations = {}, converged = {}",
        solution.q(),
        solution.residual,
        rel,
        solution.iterations,
        solution.converged
    );
    let mags: Vec<f64> = realized.iter().map(|z| z.norm()).collect();
    if let Some(worst) = sidelobe_peaks_db(&mags)
        .into_iter()
        .fold(None::<f64>, |acc, p| Some(acc.map_or(p, |a| a.max(p))))
    {
        println!("design: worst realized sidelobe {worst:.2} dB");
    }
    println!("design: artifacts written to {}", spec.out.display());
    if !solution.converged {
        eprintln!(
            "warning: tolerance not reached (residual {:.3e}); artifacts describe the best attempt",
            solution.residual
        );
    }
    Ok(())
}

fn residuals_csv(solution: &BeamformerSolution) -> String {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in solution.residual_history.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*r)));
    }
    out
}

fn psf_csv(grid: &AngleGrid, desired: &ComplexMatrix, realized: &ComplexMatrix) -> String {
    let mut out = String::from(
        "angle_rad,desired_re,desired_im,desired_db,realized_re,realized_im,realized_db\n",
    );
    for (i, &angle) in grid.angles().iter().enumerate() {
        let d = desired[(i, 0)];
        let r = realized[(i, 0)];
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(angle),
            fmt_f64(d.re),
            fmt_f64(d.im),
            fmt_f64(db_floor(d.norm())),
            fmt_f64(r.re),
            fmt_f64(r.im),
            fmt_f64(db_floor(r.norm()))
        ));
    }
    out
}

fn psf_svg(grid: &AngleGrid, desired: &ComplexMatrix, realized: &ComplexMatrix) -> String {
    let to_points = |m: &ComplexMatrix| {
        grid.angles()
            .iter()
            .enumerate()
            .map(|(i, &angle)| (angle * DEG, db_floor(m[(i, 0)].norm())))
            .collect::<Vec<_>>()
    };
    let spec = PlotSpec {
        title: "Desired vs realized point spread function",
        x_label: "angle (degrees)",
        y_label: "magnitude (dB)",
        x_range: (-90.0, 90.0),
        y_range: (-80.0, 5.0),
        x_tick: 30.0,
        y_tick: 10.0,
    };
    line_plot(
        &spec,
        &[
            Series {
                label: "desired".into(),
                points: to_points(desired),
                dashed: true,
                color: "#1f77b4",
            },
            Series {
                label: "realized".into(),
                points: to_points(realized),
                dashed: false,
                color: "#d62728",
            },
        ],
    )
}

pub fn cmd_factorize(
    config: Option<&PathBuf>,
    input: Option<&PathBuf>,
    rank_tol: Option<f64>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let config_kv = config.map(|p| KvFile::load(p)).transpose()?;
    let input_path = input
        .cloned()
        .or_else(|| {
            config_kv
                .as_ref()
                .and_then(|kv| kv.get("input").map(PathBuf::from))
        })
        .ok_or_else(|| CliError::usage("factorize needs --input (or `input` in the config)"))?;
    let rank_tol = match rank_tol {
        Some(t) => Some(t),
        None => config_kv
            .as_ref()
            .map(|kv| kv.get_f64("rank_tol"))
            .transpose()?
            .flatten(),
    };
    if let Some(t) = rank_tol {
        if t < 0.0 || t.is_nan() {
            return Err(CliError::usage(format!(
                "rank tolerance must be >= 0, got {t}"
            )));
        }
    }
    let out_dir = out
        .cloned()
        .or_else(|| {
            config_kv
                .as_ref()
                .and_then(|kv| kv.get("out").map(PathBuf::from))
        })
        .unwrap_or_else(|| PathBuf::from("out"));

    let kv = KvFile::load(&input_path)?;
    let w = if kv.has("phi_t.0") {
        reconstruct(&read_solution(&input_path)?.solution.factorization)
    } else {
        read_matrix(&kv)?
    };

    let digital = digital_factorize(&w, rank_tol);
    let analog = beamsynth::analog_factorize(&digital);
    let w_norm = w.frobenius_norm();
    let rel = |err: f64| if w_norm == 0.0 { 0.0 } else { err / w_norm };
    let digital_error = rel((&digital.reconstruct() - &w).frobenius_norm());
    let analog_error = rel((&reconstruct(&analog) - &w).frobenius_norm());

    let mut report = String::from("# beamsynth factorization\n");
    report.push_str(&format!("nr = {}\n", w.rows()));
    report.push_str(&format!("nt = {}\n", w.cols()));
    report.push_str(&format!("digital_q = {}\n", digital.count()));
    report.push_str(&format!("analog_q = {}\n", analog.q()));
    report.push_str(&format!("digital_error = {}\n", fmt_f64(digital_error)));
    report.push_str(&format!("analog_error = {}\n", fmt_f64(analog_error)));
    report.push_str(&format!("degenerate = {}\n", analog.degenerate));
    for (i, wt) in digital.tx_weights().iter().enumerate() {
        let vals: Vec<String> = wt.iter().map(|z| fmt_complex_pair(*z)).collect();
        report.push_str(&format!("w_t.{i} = {}\n", vals.join(",")));
    }
    for (i, wr) in digital.rx_weights().iter().enumerate() {
        let vals: Vec<String> = wr.iter().map(|z| fmt_complex_pair(*z)).collect();
        report.push_str(&format!("w_r.{i} = {}\n", vals.join(",")));
    }
    let phases = |m: &ComplexMatrix, name: &str, report: &mut String| {
        let phi = m.phase_angles();
        for row in 0..phi.nrows() {
            let vals: Vec<String> = (0..phi.ncols()).map(|c| fmt_f64(phi[(row, c)])).collect();
            report.push_str(&format!("{name}.{row} = {}\n", vals.join(",")));
        }
    };
    phases(&analog.f_t, "phi_t", &mut report);
    phases(&analog.f_r, "phi_r", &mut report);
    for (i, g) in analog.c_t.iter().enumerate() {
        report.push_str(&format!("c_t.{i} = {}\n", fmt_complex_pair(*g)));
    }
    for (i, g) in analog.c_r.iter().enumerate() {
        report.push_str(&format!("c_r.{i} = {}\n", fmt_complex_pair(*g)));
    }
    write_file(&out_dir, "factorization.txt", &report)?;

    println!(
        "factorize: digital Q_d = {}, analog Q = {}, reconstruction errors {:.3e} (digital) / {:.3e} (analog)",
        digital.count(),
        analog.q(),
        digital_error,
        analog_error
    );
    println!(
        "factorize: report written to {}",
        out_dir.join("factorization.txt").display()
    );
    Ok(())
}

pub fn cmd_scan(
    config: Option<&PathBuf>,
    solution: Option<&PathBuf>,
    scene: Option<&PathBuf>,
    pixels: Option<usize>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let config_kv = config.map(|p| KvFile::load(p)).transpose()?;
    let from_cfg = |key: &str| -> Option<PathBuf> {
        config_kv
            .as_ref()
            .and_then(|kv| kv.get(key).map(PathBuf::from))
    };
    let solution_path = solution
        .cloned()
        .or_else(|| from_cfg("solution"))
        .ok_or_else(|| CliError::usage("scan needs --solution (or `solution` in the config)"))?;
    let scene_path = scene
        .cloned()
        .or_else(|| from_cfg("scene"))
        .ok_or_else(|| CliError::usage("scan needs --scene (or `scene` in the config)"))?;
    let pixels = match pixels {
        Some(p) => p,
        None => config_kv
            .as_ref()
            .map(|kv| kv.get_usize("pixels"))
            .transpose()?
            .flatten()
            .unwrap_or(200),
    };
    let seed = match seed {
        Some(s) => s,
        None => config_kv
            .as_ref()
            .map(|kv| kv.get_u64("seed"))
            .transpose()?
            .flatten()
            .unwrap_or(0),
    };
    let out_dir = out
        .cloned()
        .or_else(|| from_cfg("out"))
        .unwrap_or_else(|| PathBuf::from("out"));

    let loaded = read_solution(&solution_path)?;
    let scene_data = read_scene(&scene_path)?;
    let tx = ArrayGeometry::new(loaded.tx_positions.clone())?;
    let rx = ArrayGeometry::new(loaded.rx_positions.clone())?;
    let grid = AngleGrid::uniform(pixels)?;
    let image = scan(&scene_data, &tx, &rx, &loaded.solution, &grid, seed)?;

    write_file(&out_dir, "image.csv", &image_csv(&image))?;
    write_file(&out_dir, "image.svg", &image_svg(&image))?;

    let peak = image
        .composite
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    println!(
        "scan: {} pixels x {} components, peak |composite| = {:.6e}",
        grid.len(),
        image.components.len(),
        peak
    );
    println!("scan: artifacts written to {}", out_dir.display());
    Ok(())
}

fn image_csv(image: &CompositeImage) -> String {
    let q = image.components.len();
    let mut header = String::from("angle_rad");
    for comp in 0..q {
        header.push_str(&format!(",component{comp}_re,component{comp}_im"));
    }
    header.push_str(",composite_re,composite_im,composite_db\n");
    let mut out = header;
    for (i, &angle) in image.grid.angles().iter().enumerate() {
        out.push_str(&fmt_f64(angle));
        for comp in image.components.iter() {
            out.push_str(&format!(",{}", fmt_complex_pair(comp[i])));
        }
        let z = image.composite[i];
        out.push_str(&format!(
            ",{},{}\n",
            fmt_complex_pair(z),
            fmt_f64(db_floor(z.norm()))
        ));
    }
    out
}

fn image_svg(image: &CompositeImage) -> String {
    let spec = PlotSpec {
        title: "Composite image magnitude",
        x_label: "steering angle (degrees)",
        y_label: "magnitude (dB)",
        x_range: (-90.0, 90.0),
        y_range: (-80.0, 5.0),
        x_tick: 30.0,
        y_tick: 10.0,
    };
    let peak = image
        .composite
        .iter()
        .map(|z| z.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut series: Vec<Series> = image
        .components
        .iter()
        .enumerate()
        .map(|(q, comp)| Series {
            label: format!("component {q}"),
            points: image
                .grid
                .angles()
                .iter()
                .enumerate()
                .map(|(i, &a)| (a * DEG, db_floor(comp[i].norm() / peak)))
                .collect(),
            dashed: true,
            color: "#bbbbbb",
        })
        .collect();
    series.push(Series {
        label: "composite".into(),
        points: image
            .grid
            .angles()
            .iter()
            .enumerate()
            .map(|(i, &a)| (a * DEG, db_floor(image.composite[i].norm() / peak)))
            .collect(),
        dashed: false,
        color: "#d62728",
    });
    line_plot(&spec, &series)
}

pub fn cmd_check_grad(instances: usize, h: f64, seed: u64) -> Result<(), CliError> {
    if h <= 0.0 || !h.is_finite() {
        return Err(CliError::usage(format!(
            "h must be positive and finite, got {h}"
        )));
    }
    if instances == 0 {
        return Err(CliError::usage("instances must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let nt = rng.random_range(2..=6);
        let nr = rng.random_range(2..=6);
        let q = rng.random_range(1..=3);
        let v = rng.random_range((q + 1).max(2)..=20);
        let a = ComplexMatrix::from_fn(v, nt * nr, |_, _| {
            Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
        .expect("finite entries");
        let psi = ComplexMatrix::from_fn(v, 1, |_, _| {
            Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
        .expect("finite entries");
        let f_t = random_phase_init(nt, q, rng.random());
        let f_r = random_phase_init(nr, q, rng.random());

        let (gt, gr) = grad_j(&a, &psi, &f_t, &f_r, None)?;
        let (fd_t, fd_r) = finite_diff_grad(&a, &psi, &f_t, &f_r, h)?;
        let rel_t = (&gt - &fd_t).norm() / fd_t.norm().max(1e-12);
        let rel_r = (&gr - &fd_r).norm() / fd_r.norm().max(1e-12);
        if !rel_t.is_finite() || !rel_r.is_finite() {
            return Err(CliError::Numerical(
                "gradient check produced a non-finite comparison".into(),
            ));
        }
        worst = worst.max(rel_t).max(rel_r);
    }
    println!("check-grad: {instances} instances, h = {h:e}, max relative error = {worst:.3e}");
    Ok(())
}
