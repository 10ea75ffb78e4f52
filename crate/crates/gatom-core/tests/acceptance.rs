//! End-to-end delivery checks, one test per requirement. Each prints a
//! single `check N ... PASS` line with the measured numbers (visible with
//! `--nocapture`), so the suite reads as a checklist.

use std::time::Instant;

use gatom_core::analysis::{self, FitModel};
use gatom_core::dfi::{self, BraidedConfig};
use gatom_core::disorder::{self, DisorderSpec};
use gatom_core::{emission, spectral, EmitterConfig};

const TAU_2PI: f64 = std::f64::consts::TAU;
const G0: f64 = 4.78e-4;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Non-Markovian dark-state operating point: three points, gamma*tau well
/// inside the retardation-dominated regime.
fn dark_nm() -> EmitterConfig {
    let gamma = TAU_2PI * 0.13;
    EmitterConfig::nominal(
        3,
        spectral::dark_state_detuning(3, 7, gamma).unwrap(),
        gamma,
    )
}

/// Weak-coupling dark-state operating point for the same geometry.
fn dark_weak() -> EmitterConfig {
    let gamma = TAU_2PI * 1.59e-4;
    EmitterConfig::nominal(
        3,
        spectral::dark_state_detuning(3, 1, gamma).unwrap(),
        gamma,
    )
}

#[test]
fn check_1_dark_state_traps_the_excitation() {
    let t0 = Instant::now();
    let c = dark_nm();
    let poles = spectral::find_poles_default(&c).unwrap();
    let kappa = poles.kappa_min().unwrap();
    assert!(kappa < 1e-8, "slowest pole decays at {kappa:.3e}");
    let traj = emission::integrate_emission(&c, 2000.0, emission::default_dt(&c)).unwrap();
    let drift = (traj.beta_sq_at(1000.0).unwrap() - traj.beta_sq_at(2000.0).unwrap()).abs();
    assert!(drift < 1e-6, "plateau drift {drift:.3e}");
    let el = t0.elapsed().as_secs_f64();
    assert!(el < 10.0, "took {el:.1} s");
    println!(
        "check 1 (dark state traps the excitation): PASS — kappa_min {kappa:.2e}/tau, \
         |beta|^2 drift {drift:.2e} over t in [1e3, 2e3]tau, {el:.2} s"
    );
}

#[test]
fn check_2_fabrication_offsets_break_the_trap() {
    let t0 = Instant::now();
    // Measured detunings and couplings quoted per segment, normalized to the
    // nominal operating point Omega*tau/2pi = 2.22, gamma*tau/2pi = 0.13.
    let c = EmitterConfig {
        n_points: 3,
        omega_tau: TAU_2PI * 2.22,
        gamma_tau: TAU_2PI * 0.13,
        strengths: vec![
            (0.1299f64 / 0.13).sqrt(),
            (0.1286f64 / 0.13).sqrt(),
            (0.1329f64 / 0.13).sqrt(),
        ],
        positions: vec![0.0, 2.231 / 2.22, (2.231 + 2.184) / 2.22],
    };
    let traj = emission::integrate_emission_default(&c).unwrap();
    let (t1, t2) = analysis::default_t1_t2(&traj);
    let kappa = analysis::extract_kappa_min(&traj, t1, t2).unwrap();
    assert!(kappa > 1e-4, "kappa = {kappa:.3e} still looks trapped");
    let el = t0.elapsed().as_secs_f64();
    assert!(el < 10.0, "took {el:.1} s");
    println!(
        "check 2 (measured offsets break the trap): PASS — kappa {kappa:.3e}/tau > 1e-4/tau, \
         {el:.2} s"
    );
}

#[test]
fn check_3_weak_coupling_disorder_rate_scales_quadratically() {
    let t0 = Instant::now();
    let base = dark_weak();
    let sigmas = log_grid(2e-3, 5e-2, 5);
    let mut alphas = Vec::new();
    for (channel, is_strength) in [("strength", true), ("position", false)] {
        let mut means = Vec::new();
        for &sigma in &sigmas {
            let spec = DisorderSpec {
                sigma_g: if is_strength { sigma } else { 0.0 },
                sigma_x: if is_strength { 0.0 } else { sigma },
                samples: 100,
                seed: 11,
            };
            let stats = analysis::ensemble_average(spec.samples, |i| {
                let c = disorder::sample_configuration(&base, &spec, i)?;
                Ok(-spectral::markovian_pole(&c)?.re)
            })
            .unwrap();
            assert_eq!(stats.n_failed, 0, "{channel} sigma {sigma}");
            means.push(stats.mean);
        }
        let fit = analysis::fit_power_law(&sigmas, &means).unwrap();
        let alpha = fit.params[1];
        assert!(
            (alpha - 2.0).abs() < 0.3,
            "{channel}: alpha = {alpha:.3} outside 2 +- 0.3"
        );
        alphas.push(alpha);
    }
    let el = t0.elapsed().as_secs_f64();
    println!(
        "check 3 (weak-coupling disorder scaling): PASS — alpha_g {:.3}, alpha_x {:.3}, \
         5 points x 100 samples each channel, {el:.2} s",
        alphas[0], alphas[1]
    );
}

#[test]
fn check_4_retarded_disorder_scaling_and_saturation() {
    let t0 = Instant::now();
    let base = dark_nm();

    // Strength channel: quadratic growth, pole-based rate per sample.
    let sigmas_g = log_grid(2e-3, 5e-2, 5);
    let mut means_g = Vec::new();
    for &sigma in &sigmas_g {
        let spec = DisorderSpec {
            sigma_g: sigma,
            sigma_x: 0.0,
            samples: 64,
            seed: 17,
        };
        let stats = analysis::ensemble_average(spec.samples, |i| {
            let c = disorder::sample_configuration(&base, &spec, i)?;
            let ps = spectral::find_poles(&c, spectral::sweep_window(&c, 0.0), (8, 160))?;
            Ok(ps.kappa_min().unwrap())
        })
        .unwrap();
        assert_eq!(stats.n_failed, 0, "sigma_g {sigma}");
        means_g.push(stats.mean);
    }
    let alpha_g = analysis::fit_power_law(&sigmas_g, &means_g).unwrap().params[1];
    assert!(
        (alpha_g - 2.0).abs() < 0.3,
        "strength channel: alpha = {alpha_g:.3} outside 2 +- 0.3"
    );

    // Position channel: quadratic at small sigma, saturating to a plateau
    // once the comb decorrelates; the extended-Debye curve must beat the
    // best pure power law and its plateau must match the empirical tail.
    let sigmas_x = log_grid(2e-3, 1.0, 12);
    let mut means_x = Vec::new();
    for &sigma in &sigmas_x {
        let spec = DisorderSpec {
            sigma_g: 0.0,
            sigma_x: sigma,
            samples: 256,
            seed: 17,
        };
        let stats = analysis::ensemble_average(spec.samples, |i| {
            let c = disorder::sample_configuration(&base, &spec, i)?;
            let ps = spectral::find_poles(&c, spectral::sweep_window(&c, sigma), (8, 240))?;
            Ok(ps.kappa_min().unwrap())
        })
        .unwrap();
        assert_eq!(stats.n_failed, 0, "sigma_x {sigma}");
        means_x.push(stats.mean);
    }
    let debye = analysis::fit_debye2(&sigmas_x, &means_x).unwrap();
    let power = analysis::fit_power_law(&sigmas_x, &means_x).unwrap();
    assert!(debye.converged);
    assert!(
        debye.residual < power.residual,
        "debye log-RMS {:.4} not better than power-law {:.4}",
        debye.residual,
        power.residual
    );
    let tail = means_x[means_x.len() - 3..].iter().sum::<f64>() / 3.0;
    let h = debye.params[0];
    let margin = (h / tail - 1.0).abs();
    assert!(
        margin < 0.15,
        "fitted plateau {h:.4e} vs tail mean {tail:.4e}: off by {margin:.3}"
    );
    let el = t0.elapsed().as_secs_f64();
    println!(
        "check 4 (retarded disorder scaling saturates): PASS — alpha_g {alpha_g:.3}, \
         debye log-RMS {:.3} < power {:.3}, plateau/tail off by {margin:.3} (<0.15), {el:.1} s",
        debye.residual, power.residual
    );
}

#[test]
fn check_5_protected_point_is_decay_free() {
    let t0 = Instant::now();
    let c = BraidedConfig::dfi_point(G0);
    let lc = dfi::coefficients(&c).unwrap();
    assert_eq!(lc.f, G0, "exchange rate must equal gamma0 exactly");
    let spec = dfi::spectrum(&c).unwrap();
    let max_re = spec
        .eigenvalues
        .iter()
        .map(|l| l.re.abs())
        .fold(0.0, f64::max);
    assert!(max_re < 1e-10, "max |Re lambda| = {max_re:.3e}");
    let el = t0.elapsed().as_secs_f64();
    assert!(el < 1.0, "took {el:.2} s");
    println!(
        "check 5 (protected point is decay-free): PASS — f = gamma0 bitwise, \
         max |Re lambda| {max_re:.1e} < 1e-10, {el:.3} s"
    );
}

#[test]
fn check_6_protected_point_degrades_quadratically() {
    let t0 = Instant::now();
    let base = BraidedConfig::dfi_point(G0);
    let sigmas = log_grid(2e-3, 5e-2, 5);
    let mut alphas = Vec::new();
    for (channel, is_gamma) in [("coupling", true), ("phase", false)] {
        let mut means = Vec::new();
        for &sigma in &sigmas {
            let spec = DisorderSpec {
                sigma_g: if is_gamma { sigma } else { 0.0 },
                sigma_x: if is_gamma { 0.0 } else { sigma },
                samples: 100,
                seed: 23,
            };
            let stats = analysis::ensemble_average(spec.samples, |i| {
                let c = dfi::disordered_braided(&base, &spec, i as u64)?;
                Ok(dfi::spectrum(&c)?.kappa_tot())
            })
            .unwrap();
            assert_eq!(stats.n_failed, 0, "{channel} sigma {sigma}");
            means.push(stats.mean);
        }
        let fit = analysis::fit_power_law(&sigmas, &means).unwrap();
        let alpha = fit.params[1];
        assert!(
            (alpha - 2.0).abs() < 0.3,
            "{channel}: alpha = {alpha:.3} outside 2 +- 0.3"
        );
        alphas.push(alpha);
    }
    let el = t0.elapsed().as_secs_f64();
    assert!(el < 60.0, "took {el:.1} s");
    println!(
        "check 6 (protection degrades quadratically): PASS — alpha_coupling {:.3}, \
         alpha_phase {:.3}, 5 points x 100 samples each, {el:.2} s",
        alphas[0], alphas[1]
    );
}

#[test]
fn check_7_time_domain_agrees_with_pole_sum() {
    let t0 = Instant::now();
    let mut worst_dev = 0.0f64;
    let mut worst_rate = 0.0f64;
    let mut dev_at_zero = 0.0f64;
    for i in 0..20 {
        let n = 2 + (i % 2);
        let gamma = TAU_2PI * 0.13;
        let det = spectral::dark_state_detuning(n, if n == 2 { 3 } else { 7 }, gamma).unwrap();
        let base = EmitterConfig::nominal(n, det, gamma);
        let spec = DisorderSpec {
            sigma_g: 0.03,
            sigma_x: 0.02,
            samples: 20,
            seed: 29,
        };
        let c = disorder::sample_configuration(&base, &spec, i).unwrap();
        let t_max = 60.0;
        let traj = emission::integrate_emission(&c, t_max, emission::default_dt(&c)).unwrap();
        let ps = spectral::find_poles(&c, spectral::sweep_window(&c, 0.02), (10, 400)).unwrap();
        assert!(!ps.winding_mismatch, "sample {i}: pole count unverified");

        // The truncated residue series converges to the jump midpoint at
        // t = 0, so the comparison starts after the launch transient has
        // cleared the longest delay a few times over.
        dev_at_zero = dev_at_zero
            .max((spectral::mode_sum(&ps, 0.0) - traj.beta_at(0.0).unwrap()).norm());
        let burn_in = 4.0 * c.tau_max();
        let alive = ps.filtered_for(burn_in);
        let mut t = burn_in;
        while t <= t_max {
            let d = (spectral::mode_sum(&alive, t) - traj.beta_at(t).unwrap()).norm();
            worst_dev = worst_dev.max(d);
            t += 0.1;
        }

        let (t1, t2) = analysis::default_t1_t2(&traj);
        let k_traj = analysis::extract_kappa_min(&traj, t1, t2).unwrap();
        let k_pole = alive.kappa_min().unwrap();
        let rel = (k_traj - k_pole).abs() / k_pole;
        worst_rate = worst_rate.max(rel);
    }
    assert!(worst_dev < 1e-4, "max |DDE - mode sum| = {worst_dev:.3e}");
    assert!(worst_rate < 0.02, "rate disagreement {worst_rate:.4}");
    let el = t0.elapsed().as_secs_f64();
    println!(
        "check 7 (time domain vs pole sum, 20 disordered configs): PASS — max dev \
         {worst_dev:.2e} < 1e-4 for t >= 4 tau_max, rate agreement {:.2}% < 2%; at t = 0 the \
         truncated series gives the jump midpoint (dev {dev_at_zero:.2}), so the strict t = 0 \
         endpoint is excluded by construction; {el:.1} s",
        100.0 * worst_rate
    );
}

#[test]
fn check_8_cross_cutting_properties() {
    let t0 = Instant::now();

    // Excitation bookkeeping: atom plus field is unity wherever the
    // single-excitation amplitude equation is self-consistent (exact for one
    // point; weak coupling for three).
    let c1 = EmitterConfig::nominal(1, 3.7, 0.8);
    let traj1 = emission::integrate_emission(&c1, 8.0, 0.02).unwrap();
    let (b, f) = emission::field_norm(&c1, &traj1, 6.0, 0.005).unwrap();
    let norm1 = (b + f - 1.0).abs();
    assert!(norm1 < 1e-3, "single-point norm defect {norm1:.2e}");
    let cw = dark_weak();
    let trajw =
        emission::integrate_emission(&cw, 200.0, emission::default_dt(&cw)).unwrap();
    let (b, f) = emission::field_norm(&cw, &trajw, 200.0, 0.02).unwrap();
    let normw = (b + f - 1.0).abs();
    assert!(normw < 1e-3, "weak-coupling norm defect {normw:.2e}");

    // Liouvillian structure on a reproducible random ensemble: trace
    // annihilation, no growing modes, solver residuals, and the trace
    // identity for the total rate.
    let mut max_re = 0.0f64;
    let mut max_tr_dev = 0.0f64;
    for i in 0..1000u32 {
        let mut cfg = BraidedConfig::dfi_point(G0);
        for m in 0..4 {
            let u = disorder::normal(4242, i as u64, 0, m, 0);
            cfg.gamma[m as usize] = G0 * (1.0 + 0.4 * u) * (1.0 + 0.4 * u);
        }
        for m in 0..3 {
            let u = disorder::normal(4242, i as u64, 1, m, 0);
            cfg.phi[m as usize] = std::f64::consts::FRAC_PI_2 * (1.0 + 0.5 * u);
        }
        cfg.omega_a = G0 * disorder::normal(4242, i as u64, 2, 0, 0);
        cfg.omega_b = G0 * disorder::normal(4242, i as u64, 2, 1, 0);
        let spec = dfi::spectrum(&cfg).unwrap();
        for l in &spec.eigenvalues {
            max_re = max_re.max(l.re);
        }
        let dev = (spec.kappa_tot() - dfi::kappa_tot_trace(&cfg).unwrap()).abs();
        max_tr_dev = max_tr_dev.max(dev / (1.0 + spec.kappa_tot()));
    }
    assert!(max_re <= 1e-9, "growing Liouvillian mode: Re {max_re:.3e}");
    assert!(max_tr_dev < 1e-9, "trace identity off by {max_tr_dev:.3e}");

    // Sampler moments and determinism.
    let n = 40_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..n {
        let u = disorder::normal(7, i as u64, 3, 0, 0);
        s1 += u;
        s2 += u * u;
    }
    let mean = s1 / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "sampler mean {mean:.4}");
    assert!(
        (var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(),
        "sampler variance {var:.4}"
    );
    assert_eq!(
        disorder::normal(7, 123, 3, 0, 0),
        disorder::normal(7, 123, 3, 0, 0)
    );

    // Saturation-curve limits: quadratic growth at small sigma, plateau h at
    // large sigma.
    let (h, w) = (3.4e-3, 11.0);
    let lo = analysis::debye2(1e-7, h, w).unwrap();
    let quad = (lo / (4.0 * analysis::ZETA3 * h * (w * 1e-7) * (w * 1e-7)) - 1.0).abs();
    assert!(quad < 1e-6, "small-sigma limit off by {quad:.2e}");
    let hi = analysis::debye2(1e6, h, w).unwrap();
    assert!((hi / h - 1.0).abs() < 1e-5, "plateau limit {hi:.6e} vs {h:.6e}");

    // Fit pipeline front door.
    let xs = log_grid(1e-3, 1.0, 10);
    let ys: Vec<f64> = xs.iter().map(|&x| 2.5 * x * x).collect();
    let fit = analysis::fit_power_law(&xs, &ys).unwrap();
    assert_eq!(fit.model, FitModel::PowerLaw);
    assert!((fit.params[1] - 2.0).abs() < 1e-12);

    let el = t0.elapsed().as_secs_f64();
    println!(
        "check 8 (cross-cutting properties): PASS — norm defects {norm1:.1e}/{normw:.1e} < 1e-3, \
         1000 random Liouvillians: max Re lambda {max_re:.1e} <= 1e-9, trace identity dev \
         {max_tr_dev:.1e}; sampler moments ok; saturation-curve limits ok; {el:.1} s"
    );
}
