//! The experiment runners behind each subcommand. Every runner writes its
//! CSV tables, an SVG plot and a manifest into the resolved output
//! directory; ensembles and grids run in parallel with a deterministic
//! reduction order so reruns are byte-identical.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use gatom_core::analysis::{self, FitModel, FitResult};
use gatom_core::disorder::{self, DisorderSpec};
use gatom_core::{dfi, emission, spectral, EmitterConfig};
use rayon::prelude::*;

use crate::config::{self, Extractor, ModelChoice, Run};
use crate::csvio::{self, fmt};
use crate::grid;
use crate::svg::{self, Axes, Series, PALETTE};

fn write_svg(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn nonzero(v: usize, default: usize) -> usize {
    if v == 0 {
        default
    } else {
        v
    }
}

/// Emission trace of the nominal configuration, plus one curve per
/// disordered ensemble member when a disorder deviation is set.
pub fn emit(run: &mut Run) -> Result<()> {
    let base = run.cfg.emitter.build()?;
    let t_max = run
        .cfg
        .run
        .t_max
        .unwrap_or_else(|| emission::default_t_max(&base));
    let dt = run.cfg.run.dt.unwrap_or_else(|| emission::default_dt(&base));
    let stride = run.cfg.run.stride;
    run.cfg.run.t_max = Some(t_max);
    run.cfg.run.dt = Some(dt);

    let d = &run.cfg.disorder;
    let mut jobs: Vec<(String, EmitterConfig)> = vec![("nominal".to_string(), base.clone())];
    if d.sigma_g > 0.0 || d.sigma_x > 0.0 {
        let spec = d.spec(d.sigma_g, d.sigma_x);
        for i in 0..spec.samples {
            let cfg = disorder::sample_configuration(&base, &spec, i)
                .with_context(|| format!("drawing sample {i}"))?;
            jobs.push((format!("sample {i}"), cfg));
        }
    }

    let trajs: Vec<emission::AmplitudeTrajectory> = jobs
        .par_iter()
        .map(|(name, cfg)| {
            emission::integrate_emission(cfg, t_max, dt)
                .map_err(|e| anyhow::anyhow!("{name}: {e}"))
        })
        .collect::<Result<_>>()?;

    config::ensure_out_dir(run)?;
    let curves: Vec<(Vec<f64>, Vec<f64>)> = trajs
        .iter()
        .map(|traj| {
            let xs: Vec<f64> = traj.times.iter().copied().step_by(stride).collect();
            let ys: Vec<f64> = traj
                .amplitudes
                .iter()
                .step_by(stride)
                .map(|b| b.norm_sqr())
                .collect();
            (xs, ys)
        })
        .collect();
    for (i, (xs, ys)) in curves.iter().enumerate() {
        let rows: Vec<Vec<String>> = xs
            .iter()
            .zip(ys)
            .map(|(&t, &p)| vec![fmt(t), fmt(p)])
            .collect();
        let path = if i == 0 {
            run.path(".csv")
        } else {
            run.path(&format!("_d{i}.csv"))
        };
        csvio::write(&path, &["t", "|beta|^2"], &rows)?;
    }

    let series: Vec<Series> = curves
        .iter()
        .enumerate()
        .take(9)
        .map(|(i, (xs, ys))| Series {
            xs,
            ys,
            label: match i {
                0 => "nominal",
                1 => "disordered",
                _ => "",
            },
            color: if i == 0 {
                PALETTE[0]
            } else {
                PALETTE[1 + (i - 1) % 7]
            },
            line: true,
            markers: false,
        })
        .collect();
    let ax = Axes {
        title: "emission",
        x_label: "t / tau",
        y_label: "|beta|^2",
        x_log: false,
        y_log: false,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &series))?;
    run.write_manifest()
}

/// Waveguide field profile at one instant.
pub fn field(run: &mut Run) -> Result<()> {
    let base = run.cfg.emitter.build()?;
    let horizon = run
        .cfg
        .run
        .t_max
        .unwrap_or_else(|| emission::default_t_max(&base));
    let time = run.cfg.run.time.unwrap_or(horizon);
    ensure!(time >= 0.0, "run.time must be nonnegative");
    let t_max = horizon.max(time);
    let dt = run.cfg.run.dt.unwrap_or_else(|| emission::default_dt(&base));
    let x_count = run.cfg.run.x_count.max(2);

    let lo = base.positions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = base
        .positions
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let x_min = run.cfg.run.x_min.unwrap_or(lo - time);
    let x_max = run.cfg.run.x_max.unwrap_or(hi + time);
    ensure!(x_max > x_min, "run.x_max must exceed run.x_min");
    let grid_pts: Vec<f64> = (0..x_count)
        .map(|i| x_min + (x_max - x_min) * i as f64 / (x_count - 1) as f64)
        .collect();

    let traj = emission::integrate_emission(&base, t_max, dt)?;
    let snap = emission::field_snapshot(&base, &traj, time, &grid_pts)?;

    run.cfg.run.t_max = Some(t_max);
    run.cfg.run.dt = Some(dt);
    run.cfg.run.time = Some(time);
    run.cfg.run.x_min = Some(x_min);
    run.cfg.run.x_max = Some(x_max);
    run.cfg.run.x_count = x_count;

    config::ensure_out_dir(run)?;
    let rows: Vec<Vec<String>> = snap
        .grid
        .iter()
        .zip(&snap.values)
        .map(|(&x, v)| vec![fmt(x), fmt(v.re), fmt(v.im), fmt(v.norm_sqr())])
        .collect();
    csvio::write(
        &run.path(".csv"),
        &["x", "re_phi", "im_phi", "|phi|^2"],
        &rows,
    )?;

    let ys: Vec<f64> = snap.values.iter().map(|v| v.norm_sqr()).collect();
    let ax = Axes {
        title: "field snapshot",
        x_label: "x / tau",
        y_label: "|phi|^2",
        x_log: false,
        y_log: false,
    };
    let s = Series {
        xs: &snap.grid,
        ys: &ys,
        label: "",
        color: PALETTE[0],
        line: true,
        markers: false,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &[s]))?;
    run.write_manifest()
}

/// Pole map of the emission amplitude.
pub fn poles(run: &mut Run) -> Result<()> {
    let base = run.cfg.emitter.build()?;
    let window = run.cfg.window.to_window(&base);
    let n_re = nonzero(run.cfg.run.n_re, 60);
    let n_im = nonzero(run.cfg.run.n_im, 60);
    let ps = spectral::find_poles(&base, window, (n_re, n_im))?;
    if ps.winding_mismatch {
        eprintln!(
            "warning: winding audit predicts {} poles, found {}",
            ps.winding_count,
            ps.poles.len()
        );
    }

    run.cfg.window.re_min = Some(window.re_min);
    run.cfg.window.re_max = Some(window.re_max);
    run.cfg.window.im_min = Some(window.im_min);
    run.cfg.window.im_max = Some(window.im_max);
    run.cfg.run.n_re = n_re;
    run.cfg.run.n_im = n_im;

    config::ensure_out_dir(run)?;
    let rows: Vec<Vec<String>> = ps
        .poles
        .iter()
        .zip(&ps.residues)
        .map(|(s, a)| vec![fmt(s.re), fmt(s.im), fmt(a.re), fmt(a.im)])
        .collect();
    csvio::write(&run.path(".csv"), &["re_s", "im_s", "re_A", "im_A"], &rows)?;

    let xs: Vec<f64> = ps.poles.iter().map(|s| s.re).collect();
    let ys: Vec<f64> = ps.poles.iter().map(|s| s.im).collect();
    let ax = Axes {
        title: "pole map",
        x_label: "Re s",
        y_label: "Im s",
        x_log: false,
        y_log: false,
    };
    let s = Series {
        xs: &xs,
        ys: &ys,
        label: "",
        color: PALETTE[0],
        line: false,
        markers: true,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &[s]))?;
    run.write_manifest()
}

/// Per-sample rate extraction for the dark-state disorder sweep.
fn sample_rate(
    cfg: &EmitterConfig,
    extractor: Extractor,
    sigma_x: f64,
    grid: (usize, usize),
) -> gatom_core::Result<f64> {
    match extractor {
        Extractor::Markov => Ok(-spectral::markovian_pole(cfg)?.re),
        Extractor::Poles => {
            let ps = spectral::find_poles(cfg, spectral::sweep_window(cfg, sigma_x), grid)?;
            if ps.winding_mismatch {
                return Err(gatom_core::Error::InvalidConfig(format!(
                    "winding audit predicts {} poles, found {}",
                    ps.winding_count,
                    ps.poles.len()
                )));
            }
            ps.kappa_min().ok_or_else(|| {
                gatom_core::Error::InvalidConfig("no poles in the search window".to_string())
            })
        }
        Extractor::Dde => {
            let traj = emission::integrate_emission_default(cfg)?;
            let (t1, t2) = analysis::default_t1_t2(&traj);
            analysis::extract_kappa_min(&traj, t1, t2)
        }
        Extractor::Auto => unreachable!("resolved before dispatch"),
    }
}

/// Disorder sweep of the slowest emission decay rate over the
/// (sigma_g, sigma_x) grid. Failed samples are counted per grid point, not
/// imputed.
pub fn sweep_dark(run: &mut Run) -> Result<()> {
    let base = run.cfg.emitter.build()?;
    let gs = grid::points(&run.cfg.grid.g, "grid.g")?;
    let xs_ = grid::points(&run.cfg.grid.x, "grid.x")?;
    let samples = run.cfg.disorder.samples;
    ensure!(samples >= 1, "disorder.samples must be >= 1");
    let seed = run.cfg.disorder.seed;
    let extractor = match run.cfg.run.extractor {
        Extractor::Auto => {
            if base.gamma_scale() < 0.1 {
                Extractor::Markov
            } else {
                Extractor::Poles
            }
        }
        e => e,
    };
    let pole_grid = (nonzero(run.cfg.run.n_re, 8), nonzero(run.cfg.run.n_im, 200));
    run.cfg.run.extractor = extractor;
    run.cfg.run.n_re = pole_grid.0;
    run.cfg.run.n_im = pole_grid.1;

    let pts: Vec<(f64, f64)> = gs
        .iter()
        .flat_map(|&g| xs_.iter().map(move |&x| (g, x)))
        .collect();
    let per: Vec<gatom_core::Result<f64>> = (0..pts.len() * samples)
        .into_par_iter()
        .map(|k| {
            let (pi, si) = (k / samples, k % samples);
            let (sg, sx) = pts[pi];
            let spec = DisorderSpec {
                sigma_g: sg,
                sigma_x: sx,
                samples,
                seed,
            };
            let cfg = disorder::sample_configuration(&base, &spec, si)?;
            sample_rate(&cfg, extractor, sx, pole_grid)
        })
        .collect();

    let mut rows = Vec::with_capacity(pts.len());
    let mut means = Vec::with_capacity(pts.len());
    let mut results = per.into_iter();
    for &(sg, sx) in &pts {
        let chunk: Vec<gatom_core::Result<f64>> = results.by_ref().take(samples).collect();
        let n_failed = chunk.iter().filter(|r| r.is_err()).count();
        let (mean, stderr, n_ok) = if n_failed == samples {
            (f64::NAN, f64::NAN, 0)
        } else {
            let mut vals = chunk.into_iter();
            let stats = analysis::ensemble_average(samples, move |_| vals.next().unwrap())
                .with_context(|| format!("grid point (sigma_g = {sg}, sigma_x = {sx})"))?;
            (stats.mean, stats.stderr, stats.rates.len())
        };
        means.push(mean);
        rows.push(vec![
            fmt(sg),
            fmt(sx),
            fmt(mean),
            fmt(stderr),
            n_ok.to_string(),
            n_failed.to_string(),
        ]);
    }

    config::ensure_out_dir(run)?;
    let csv_path = run.path(".csv");
    csvio::write(
        &csv_path,
        &[
            "sigma_g",
            "sigma_x",
            "kappa_mean",
            "kappa_stderr",
            "n_ok",
            "n_failed",
        ],
        &rows,
    )?;
    sweep_outputs(run, &csv_path, &gs, &xs_, &means, "kappa_mean")?;
    run.write_manifest()
}

/// Disorder sweep of the total decoherence rate of the braided pair. This
/// schema has no failure columns, so any failed sample aborts the run with
/// its index.
pub fn sweep_dfi(run: &mut Run) -> Result<()> {
    let base = run.cfg.dfi.build();
    let gs = grid::points(&run.cfg.grid.g, "grid.g")?;
    let xs_ = grid::points(&run.cfg.grid.x, "grid.x")?;
    let samples = run.cfg.disorder.samples;
    ensure!(samples >= 1, "disorder.samples must be >= 1");
    let seed = run.cfg.disorder.seed;

    let pts: Vec<(f64, f64)> = gs
        .iter()
        .flat_map(|&g| xs_.iter().map(move |&x| (g, x)))
        .collect();
    let per: Vec<gatom_core::Result<f64>> = (0..pts.len() * samples)
        .into_par_iter()
        .map(|k| {
            let (pi, si) = (k / samples, k % samples);
            let (sg, sx) = pts[pi];
            let spec = DisorderSpec {
                sigma_g: sg,
                sigma_x: sx,
                samples,
                seed,
            };
            let cfg = dfi::disordered_braided(&base, &spec, si as u64)?;
            Ok(dfi::spectrum(&cfg)?.kappa_tot())
        })
        .collect();

    let mut rows = Vec::with_capacity(pts.len());
    let mut means = Vec::with_capacity(pts.len());
    let mut results = per.into_iter().enumerate();
    for &(sg, sx) in &pts {
        let mut vals = Vec::with_capacity(samples);
        for (k, r) in results.by_ref().take(samples) {
            let v = r.map_err(|e| {
                anyhow::anyhow!(
                    "grid point (sigma_g = {sg}, sigma_x = {sx}) sample {}: {e}",
                    k % samples
                )
            })?;
            vals.push(v);
        }
        let stats = analysis::ensemble_average(samples, move |i| Ok(vals[i]))?;
        means.push(stats.mean);
        rows.push(vec![fmt(sg), fmt(sx), fmt(stats.mean), fmt(stats.stderr)]);
    }

    config::ensure_out_dir(run)?;
    let csv_path = run.path(".csv");
    csvio::write(
        &csv_path,
        &["sigma_g", "sigma_x", "kappa_tot_mean", "kappa_tot_stderr"],
        &rows,
    )?;
    sweep_outputs(run, &csv_path, &gs, &xs_, &means, "kappa_tot_mean")?;
    run.write_manifest()
}

/// Liouvillian spectrum along a phase sweep at fixed coupling.
pub fn phi_sweep(run: &mut Run) -> Result<()> {
    let base = run.cfg.dfi.build();
    let phis = grid::points(&run.cfg.grid.phi.axis(), "grid.phi")?;
    let spectra: Vec<Vec<(f64, f64)>> = phis
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| {
            let cfg = dfi::BraidedConfig {
                gamma: base.gamma,
                phi: [phi; 3],
                omega_a: base.omega_a,
                omega_b: base.omega_b,
            };
            let mut vals = dfi::spectrum(&cfg)
                .map_err(|e| anyhow::anyhow!("phi grid point {i} (phi0 = {phi}): {e}"))?
                .eigenvalues;
            vals.sort_by(|a, b| {
                b.re.total_cmp(&a.re)
                    .then(a.im.total_cmp(&b.im))
                    .then(a.norm().total_cmp(&b.norm()))
            });
            Ok(vals.iter().map(|l| (l.re, l.im)).collect())
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<String> = vec!["phi0".to_string()];
    for j in 1..=16 {
        header.push(format!("re_lambda_{j}"));
    }
    for j in 1..=16 {
        header.push(format!("im_lambda_{j}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = phis
        .iter()
        .zip(&spectra)
        .map(|(&phi, vals)| {
            let mut row = Vec::with_capacity(33);
            row.push(fmt(phi));
            row.extend(vals.iter().map(|&(re, _)| fmt(re)));
            row.extend(vals.iter().map(|&(_, im)| fmt(im)));
            row
        })
        .collect();

    config::ensure_out_dir(run)?;
    csvio::write(&run.path(".csv"), &header_refs, &rows)?;

    let branches: Vec<Vec<f64>> = (0..16)
        .map(|j| spectra.iter().map(|vals| vals[j].0).collect())
        .collect();
    let series: Vec<Series> = branches
        .iter()
        .enumerate()
        .map(|(j, ys)| Series {
            xs: &phis,
            ys,
            label: "",
            color: PALETTE[j % PALETTE.len()],
            line: true,
            markers: false,
        })
        .collect();
    let ax = Axes {
        title: "Liouvillian spectrum",
        x_label: "phi0",
        y_label: "Re lambda",
        x_log: false,
        y_log: false,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &series))?;
    run.write_manifest()
}

fn model_name(m: FitModel) -> &'static str {
    match m {
        FitModel::PowerLaw => "power_law",
        FitModel::Debye2 => "debye2",
    }
}

fn fit_rows(fits: &[FitResult]) -> Vec<Vec<String>> {
    fits.iter()
        .map(|f| {
            vec![
                model_name(f.model).to_string(),
                fmt(f.params[0]),
                fmt(f.params[1]),
                fmt(f.residual),
            ]
        })
        .collect()
}

fn model_curve(f: &FitResult, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = 200;
    let (la, lb) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| match f.model {
            FitModel::PowerLaw => f.params[0] * x.powf(f.params[1]),
            FitModel::Debye2 => analysis::debye2(x, f.params[0], f.params[1]).unwrap_or(f64::NAN),
        })
        .collect();
    (xs, ys)
}

/// Plot and, for 1D sweeps, scaling fits: both models go into a footer
/// block of the sweep CSV and a separate `_fit.csv` summary.
fn sweep_outputs(
    run: &Run,
    csv_path: &Path,
    gs: &[f64],
    xs_: &[f64],
    means: &[f64],
    quantity: &str,
) -> Result<()> {
    if gs.len() > 1 && xs_.len() > 1 {
        let mut cells = vec![f64::NAN; means.len()];
        for ig in 0..gs.len() {
            for ix in 0..xs_.len() {
                cells[ix * gs.len() + ig] = means[ig * xs_.len() + ix];
            }
        }
        let ax = Axes {
            title: quantity,
            x_label: "sigma_g",
            y_label: "sigma_x",
            x_log: false,
            y_log: false,
        };
        return write_svg(&run.path(".svg"), &svg::heatmap(&ax, gs, xs_, &cells));
    }

    let (label, axis): (&str, &[f64]) = if gs.len() > 1 {
        ("sigma_g", gs)
    } else {
        ("sigma_x", xs_)
    };

    let pairs: Vec<(f64, f64)> = axis
        .iter()
        .zip(means)
        .filter(|&(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let mut fits: Vec<FitResult> = Vec::new();
    if pairs.len() >= 2 {
        let fx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let fy: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let Ok(fr) = analysis::fit_power_law(&fx, &fy) {
            fits.push(fr);
        }
        if pairs.len() >= 3 {
            if let Ok(fr) = analysis::fit_debye2(&fx, &fy) {
                fits.push(fr);
            }
        }
    }
    if !fits.is_empty() {
        let lines: Vec<String> = fits
            .iter()
            .map(|f| {
                format!(
                    "# fit,{},{},{},{}",
                    model_name(f.model),
                    fmt(f.params[0]),
                    fmt(f.params[1]),
                    fmt(f.residual)
                )
            })
            .collect();
        csvio::append_lines(csv_path, &lines)?;
        csvio::write(
            &run.path("_fit.csv"),
            &["model", "param1", "param2", "residual"],
            &fit_rows(&fits),
        )?;
    }

    let mut series = vec![Series {
        xs: axis,
        ys: means,
        label: quantity,
        color: PALETTE[0],
        line: true,
        markers: true,
    }];
    let curves: Vec<(Vec<f64>, Vec<f64>)> = fits
        .iter()
        .map(|f| model_curve(f, pairs[0].0, pairs[pairs.len() - 1].0))
        .collect();
    for (f, (cx, cy)) in fits.iter().zip(&curves) {
        series.push(Series {
            xs: cx,
            ys: cy,
            label: model_name(f.model),
            color: if f.model == FitModel::PowerLaw {
                PALETTE[1]
            } else {
                PALETTE[2]
            },
            line: true,
            markers: false,
        });
    }
    let positive =
        axis.iter().all(|&v| v > 0.0) && means.iter().all(|&v| v > 0.0 && v.is_finite());
    let ax = Axes {
        title: quantity,
        x_label: label,
        y_label: quantity,
        x_log: positive,
        y_log: positive,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &series))
}

/// Fits the scaling models to a sweep CSV (or any two-column table).
pub fn fit(run: &mut Run, input_flag: Option<&Path>) -> Result<()> {
    let file_input = run.cfg.fit.input.clone();
    let input: PathBuf = match (input_flag, &file_input) {
        (Some(p), f) => {
            config::record_override(
                run,
                "fit.input",
                f.clone(),
                Some(p.display().to_string()),
                p.display().to_string(),
            );
            p.to_path_buf()
        }
        (None, Some(f)) => config::input_path(f),
        (None, None) => bail!("fit needs --input or fit.input in the config"),
    };
    run.cfg.fit.input = Some(input.display().to_string());

    let table = csvio::read_numeric(&input)?;
    let col = |name: &str| table.headers.iter().position(|h| h == name);
    let (xi, yi, x_name): (usize, usize, String) =
        if let (Some(gi), Some(xj)) = (col("sigma_g"), col("sigma_x")) {
            let yi = col("kappa_mean")
                .or_else(|| col("kappa_tot_mean"))
                .context("input has sigma columns but no kappa_mean or kappa_tot_mean column")?;
            let distinct = |i: usize| {
                let mut v: Vec<f64> = table.rows.iter().map(|r| r[i]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v.len()
            };
            match (distinct(gi) > 1, distinct(xj) > 1) {
                (true, false) => (gi, yi, "sigma_g".to_string()),
                (false, true) => (xj, yi, "sigma_x".to_string()),
                (true, true) => bail!("both sigma_g and sigma_x vary; fit needs a 1D sweep"),
                (false, false) => bail!("neither sigma_g nor sigma_x varies in the input"),
            }
        } else if table.headers.len() == 2 {
            (0, 1, table.headers[0].clone())
        } else {
            bail!("unsupported input schema: expected a sweep CSV or a two-column table")
        };

    let mut pairs: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r[xi], r[yi]))
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure!(
        pairs.len() >= 2,
        "need at least two positive finite data points, got {}",
        pairs.len()
    );
    let fx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let fy: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    let models: Vec<FitModel> = match run.cfg.fit.model {
        ModelChoice::Power => vec![FitModel::PowerLaw],
        ModelChoice::Debye2 => vec![FitModel::Debye2],
        ModelChoice::Both => vec![FitModel::PowerLaw, FitModel::Debye2],
    };
    let mut fits = Vec::new();
    for m in models {
        let fr = match m {
            FitModel::PowerLaw => analysis::fit_power_law(&fx, &fy).context("power-law fit")?,
            FitModel::Debye2 => analysis::fit_debye2(&fx, &fy).context("debye2 fit")?,
        };
        fits.push(fr);
    }

    config::ensure_out_dir(run)?;
    csvio::write(
        &run.path(".csv"),
        &["model", "param1", "param2", "residual"],
        &fit_rows(&fits),
    )?;

    let mut series = vec![Series {
        xs: &fx,
        ys: &fy,
        label: "data",
        color: PALETTE[0],
        line: false,
        markers: true,
    }];
    let curves: Vec<(Vec<f64>, Vec<f64>)> = fits
        .iter()
        .map(|f| model_curve(f, fx[0], fx[fx.len() - 1]))
        .collect();
    for (f, (cx, cy)) in fits.iter().zip(&curves) {
        series.push(Series {
            xs: cx,
            ys: cy,
            label: model_name(f.model),
            color: if f.model == FitModel::PowerLaw {
                PALETTE[1]
            } else {
                PALETTE[2]
            },
            line: true,
            markers: false,
        });
    }
    let ax = Axes {
        title: "scaling fit",
        x_label: &x_name,
        y_label: "y",
        x_log: true,
        y_log: true,
    };
    write_svg(&run.path(".svg"), &svg::line_plot(&ax, &series))?;
    run.write_manifest()
}
