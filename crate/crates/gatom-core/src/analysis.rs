//! Decay-rate extraction, ensemble statistics, and model fitting.

use crate::emission::AmplitudeTrajectory;
use crate::{Error, Result};

/// Riemann zeta(3), to f64 precision.
pub const ZETA3: f64 = 1.2020569031595942;

/// Late-time slice used by default for rate extraction: (0.6, 0.95) of the
/// trajectory horizon, late enough for fast transients to have died out.
pub fn default_t1_t2(traj: &AmplitudeTrajectory) -> (f64, f64) {
    let end = traj.end_time();
    (0.6 * end, 0.95 * end)
}

/// Extracts the asymptotic amplitude decay rate from the excited-state
/// population between `t1` and `t2`:
///
/// ```text
/// kappa = -ln(|beta(t2)|^2 / |beta(t1)|^2) / (2 (t2 - t1))
/// ```
///
/// Fails with [`Error::Underflow`] when either population is below 1e-30,
/// where the log-ratio is numerical noise.
pub fn extract_kappa_min(traj: &AmplitudeTrajectory, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 >= 0.0 && t2 > t1) {
        return Err(Error::InvalidConfig(format!(
            "need 0 <= t1 < t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    let p1 = traj.beta_sq_at(t1)?;
    let p2 = traj.beta_sq_at(t2)?;
    let floor = 1e-30;
    if p1 < floor || p2 < floor {
        return Err(Error::Underflow {
            value: p1.min(p2),
        });
    }
    Ok(-(p2 / p1).ln() / (2.0 * (t2 - t1)))
}

/// Summary of an ensemble of scalar estimates, with per-sample failures kept
/// rather than silently dropped.
#[derive(Debug)]
pub struct EnsembleStats {
    pub mean: f64,
    pub stderr: f64,
    pub rates: Vec<f64>,
    pub n_failed: usize,
    pub failures: Vec<(usize, Error)>,
}

/// Runs `estimate` for sample indices `0..samples` and aggregates the
/// successes. Errors with the index of the offending sample attached when
/// every sample fails.
pub fn ensemble_average<F>(samples: usize, mut estimate: F) -> Result<EnsembleStats>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut rates = Vec::with_capacity(samples);
    let mut failures = Vec::new();
    for index in 0..samples {
        match estimate(index) {
            Ok(r) => rates.push(r),
            Err(e) => failures.push((index, e)),
        }
    }
    if rates.is_empty() {
        let (index, source) = failures
            .pop()
            .ok_or_else(|| Error::InvalidConfig("ensemble needs samples >= 1".into()))?;
        return Err(Error::Sample {
            index,
            source: Box::new(source),
        });
    }
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let stderr = if rates.len() > 1 {
        let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(EnsembleStats {
        mean,
        stderr,
        rates,
        n_failed: failures.len(),
        failures,
    })
}

// Even-index Bernoulli numbers B_2 .. B_18.
const BERNOULLI: [(u32, f64); 9] = [
    (2, 1.0 / 6.0),
    (4, -1.0 / 30.0),
    (6, 1.0 / 42.0),
    (8, -1.0 / 30.0),
    (10, 5.0 / 66.0),
    (12, -691.0 / 2730.0),
    (14, 7.0 / 6.0),
    (16, -3617.0 / 510.0),
    (18, 43867.0 / 798.0),
];

fn debye_j_series(u: f64) -> f64 {
    let mut total = u * u / 2.0 - u * u * u / 6.0;
    for &(n, b) in &BERNOULLI {
        let mut fact = 1.0;
        for i in 2..=n {
            fact *= i as f64;
        }
        total += b * u.powi(n as i32 + 2) / (fact * (n + 2) as f64);
    }
    total
}

fn debye_j_tail(u: f64) -> f64 {
    let kmax = (40.0 / u).ceil().max(1.0) as u32;
    let mut tail = 0.0;
    for k in (1..=kmax).rev() {
        let kf = k as f64;
        tail += (-kf * u).exp() * (u * u / kf + 2.0 * u / (kf * kf) + 2.0 / (kf * kf * kf));
    }
    2.0 * ZETA3 - tail
}

/// The order-2 Debye integral `J(u) = int_0^u x^2 / (e^x - 1) dx`, evaluated
/// by a Bernoulli series for small `u` and by the exponential tail of the
/// complete integral `2 zeta(3)` for large `u`. Accurate to ~1e-11.
pub fn debye_j(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::FitInput(format!("debye_j needs u >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(if u <= 1.5 {
        debye_j_series(u)
    } else {
        debye_j_tail(u)
    })
}

/// Debye-type saturation curve for rate vs disorder strength:
///
/// ```text
/// D2(sigma; h, w) = 2 h (w sigma)^2 J(1 / (w sigma))
/// ```
///
/// Quadratic in `sigma` for small disorder, saturating at the plateau `h`.
pub fn debye2(sigma: f64, h: f64, w: f64) -> Result<f64> {
    if !(sigma >= 0.0 && h > 0.0 && w > 0.0) {
        return Err(Error::FitInput(format!(
            "debye2 needs sigma >= 0, h > 0, w > 0; got sigma = {sigma}, h = {h}, w = {w}"
        )));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let ws = w * sigma;
    Ok(2.0 * h * ws * ws * debye_j(1.0 / ws)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    PowerLaw,
    Debye2,
}

/// A fitted two-parameter model. For [`FitModel::PowerLaw`] the parameters
/// are `[amplitude, exponent]` in `y = amplitude * x^exponent`; for
/// [`FitModel::Debye2`] they are `[h, w]`. `residual` is the RMS deviation
/// of `ln y`.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    pub params: [f64; 2],
    pub residual: f64,
    pub converged: bool,
}

fn check_log_data(xs: &[f64], ys: &[f64], min_len: usize) -> Result<()> {
    if xs.len() != ys.len() || xs.len() < min_len {
        return Err(Error::FitInput(format!(
            "need at least {min_len} matching (x, y) pairs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::FitInput(format!(
                "log-log fit needs positive finite data, got ({x}, {y})"
            )));
        }
    }
    Ok(())
}

/// Least-squares power law through `(x, y)` data, solved in closed form in
/// log-log space (which is the global optimum of the log-space objective).
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_log_data(xs, ys, 2)?;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx < 1e-24 {
        return Err(Error::FitInput(
            "power-law fit is degenerate: all x coincide".into(),
        ));
    }
    let exponent = sxy / sxx;
    let amplitude = (my - exponent * mx).exp();
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let r = y - (amplitude.ln() + exponent * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitResult {
        model: FitModel::PowerLaw,
        params: [amplitude, exponent],
        residual,
        converged: true,
    })
}

fn debye2_log_residuals(xs: &[f64], ly: &[f64], h: f64, w: f64) -> Result<Vec<f64>> {
    xs.iter()
        .zip(ly)
        .map(|(&x, &l)| Ok(debye2(x, h, w)?.ln() - l))
        .collect()
}

fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

/// Fits the [`debye2`] saturation curve in log space: coarse grid search for
/// a starting point, then damped Gauss-Newton in `(ln h, ln w)`.
pub fn fit_debye2(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_log_data(xs, ys, 3)?;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let h0 = ys.iter().cloned().fold(f64::MIN, f64::max);

    let mut best = (f64::MAX, h0, 1.0);
    for ih in 0..40 {
        let h = h0 * (0.5 + 1.3 * ih as f64 / 39.0);
        for iw in 0..80 {
            let w = 10f64.powf(-0.5 + 3.0 * iw as f64 / 79.0);
            if let Ok(r) = debye2_log_residuals(xs, &ly, h, w) {
                let score = rms(&r);
                if score < best.0 {
                    best = (score, h, w);
                }
            }
        }
    }

    let (mut lh, mut lw) = (best.1.ln(), best.2.ln());
    let mut cost = best.0;
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..80 {
        let r = debye2_log_residuals(xs, &ly, lh.exp(), lw.exp())?;
        // d residual / d ln h is exactly 1; d / d ln w by central difference.
        let dw = 1e-6;
        let rp = debye2_log_residuals(xs, &ly, lh.exp(), (lw + dw).exp())?;
        let rm = debye2_log_residuals(xs, &ly, lh.exp(), (lw - dw).exp())?;
        let jw: Vec<f64> = rp
            .iter()
            .zip(&rm)
            .map(|(a, b)| (a - b) / (2.0 * dw))
            .collect();
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..r.len() {
            a11 += 1.0;
            a12 += jw[i];
            a22 += jw[i] * jw[i];
            g1 += r[i];
            g2 += jw[i] * r[i];
        }
        let (d11, d22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
        let det = d11 * d22 - a12 * a12;
        if det.abs() < 1e-30 {
            break;
        }
        let step_h = -(d22 * g1 - a12 * g2) / det;
        let step_w = -(d11 * g2 - a12 * g1) / det;
        let trial = debye2_log_residuals(xs, &ly, (lh + step_h).exp(), (lw + step_w).exp())?;
        let trial_cost = rms(&trial);
        if trial_cost <= cost {
            lh += step_h;
            lw += step_w;
            lambda = (lambda / 10.0).max(1e-12);
            let shrunk = (cost - trial_cost) < 1e-14 * cost.max(1e-300);
            cost = trial_cost;
            if step_h.abs() + step_w.abs() < 1e-12 || shrunk {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    Ok(FitResult {
        model: FitModel::Debye2,
        params: [lh.exp(), lw.exp()],
        residual: cost,
        converged,
    })
}
