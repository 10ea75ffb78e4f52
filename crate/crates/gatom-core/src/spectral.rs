//! Laplace-domain analysis of the emission amplitude.
//!
//! The transform of the amplitude has simple poles at the roots of
//!
//! ```text
//! F(s) = s + i*Omega + (gamma/2) * sum_{m,m'} G_m G_m' exp(-|tau_mm'| s)
//! ```
//!
//! Each root `s_n = -kappa_n + i*Omega_n` contributes `A_n exp(s_n t)` to
//! the amplitude with residue weight `A_n = 1/F'(s_n)`. A root on the
//! imaginary axis is a dark state: an excitation trapped between the
//! coupling points that never decays.

use crate::{C64, EmitterConfig, Error, Result};

/// Rectangle in the complex `s` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn contains(&self, s: C64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }
}

/// Poles and residues found inside `search_window`.
///
/// `winding_count` is the number of roots the argument principle predicts
/// inside the window; `winding_mismatch` is set when that audit disagrees
/// with the number of roots actually found (or could not be evaluated).
#[derive(Debug, Clone)]
pub struct PoleSet {
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
    pub search_window: Window,
    pub winding_count: i64,
    pub winding_mismatch: bool,
}

impl PoleSet {
    /// Decay rate of the slowest pole, `min_n kappa_n`.
    pub fn kappa_min(&self) -> Option<f64> {
        self.poles
            .iter()
            .map(|s| -s.re)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// The pole with the largest real part.
    pub fn slowest(&self) -> Option<C64> {
        self.poles.first().copied()
    }

    /// Keeps only poles relevant on `[0, t_max]`: modes with
    /// `kappa_n * t_max > 20` have decayed below double precision and are
    /// dropped from reconstruction.
    pub fn filtered_for(&self, t_max: f64) -> PoleSet {
        let keep: Vec<usize> = (0..self.poles.len())
            .filter(|&i| -self.poles[i].re * t_max <= 20.0)
            .collect();
        PoleSet {
            poles: keep.iter().map(|&i| self.poles[i]).collect(),
            residues: keep.iter().map(|&i| self.residues[i]).collect(),
            ..*self
        }
    }
}

fn grouped(config: &EmitterConfig) -> Vec<(f64, f64)> {
    config.delay_groups()
}

fn eval_f(groups: &[(f64, f64)], omega: f64, s: C64) -> C64 {
    let mut f = s + C64::new(0.0, omega);
    for &(d, c) in groups {
        f += c * (-d * s).exp();
    }
    f
}

fn eval_f_fp(groups: &[(f64, f64)], omega: f64, s: C64) -> (C64, C64) {
    let mut f = s + C64::new(0.0, omega);
    let mut fp = C64::new(1.0, 0.0);
    for &(d, c) in groups {
        let e = c * (-d * s).exp();
        f += e;
        fp -= d * e;
    }
    (f, fp)
}

/// Left-hand side of the pole equation at `s`.
pub fn characteristic_residual(s: C64, config: &EmitterConfig) -> C64 {
    eval_f(&grouped(config), config.omega_tau, s)
}

/// Default search window: real parts down to `-3 N^2 gamma / 2` (slightly
/// past the superradiant rate) and imaginary parts within three delay-induced
/// side branches of `-Omega`.
pub fn default_window(config: &EmitterConfig) -> Window {
    let om = config.omega_tau;
    let span = 3.0 * std::f64::consts::PI / config.tau_min().unwrap_or(1.0);
    Window {
        re_min: -1.5 * config.gamma_scale(),
        re_max: 1e-3,
        im_min: -om - span,
        im_max: -om + span,
    }
}

/// Window for disorder sweeps: position disorder of deviation `sigma_x`
/// spreads the pole comb, so the imaginary range widens accordingly.
pub fn sweep_window(config: &EmitterConfig, sigma_x: f64) -> Window {
    let om = config.omega_tau;
    let span = 3.0 * std::f64::consts::PI + om * (3.0 * sigma_x).min(1.5);
    Window {
        re_min: -1.5 * config.gamma_scale() - 0.5,
        re_max: 1e-3,
        im_min: -om - span,
        im_max: -om + span,
    }
}

const NEWTON_ITERS: usize = 200;
const DEDUP_TOL: f64 = 1e-8;
const ACCEPT_RESIDUAL: f64 = 1e-12;

/// Combined magnitude of the characteristic function's terms at `s`. Far from
/// the carrier the exponentials are large and evaluating them costs roundoff
/// proportional to this scale, so residual acceptance must be relative to it.
fn term_scale(groups: &[(f64, f64)], omega: f64, s: C64) -> f64 {
    let mut sc = 1.0 + s.norm() + omega.abs();
    for &(d, c) in groups {
        sc += c.abs() * (-d * s.re).exp();
    }
    sc
}

fn newton(groups: &[(f64, f64)], omega: f64, seed: C64) -> Option<C64> {
    let mut s = seed;
    for _ in 0..NEWTON_ITERS {
        let (f, fp) = eval_f_fp(groups, omega, s);
        if fp.norm_sqr() < 1e-300 {
            return None;
        }
        let ds = f / fp;
        s -= ds;
        if !s.re.is_finite() || !s.im.is_finite() {
            return None;
        }
        if ds.norm() < 1e-14 * (1.0 + s.norm()) {
            break;
        }
    }
    (eval_f(groups, omega, s).norm() < ACCEPT_RESIDUAL * term_scale(groups, omega, s))
        .then_some(s)
}

fn boundary_winding(groups: &[(f64, f64)], omega: f64, w: &Window, per_side: usize) -> (i64, bool) {
    let corners = [
        C64::new(w.re_min, w.im_min),
        C64::new(w.re_max, w.im_min),
        C64::new(w.re_max, w.im_max),
        C64::new(w.re_min, w.im_max),
    ];
    let mut total = 0.0;
    let mut ok = true;
    for side in 0..4 {
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        let mut z0 = a;
        let mut f0 = eval_f(groups, omega, z0);
        for k in 1..=per_side {
            let z1 = a + (b - a) * (k as f64 / per_side as f64);
            let f1 = eval_f(groups, omega, z1);
            match segment_phase(groups, omega, z0, f0, z1, f1, 24) {
                Some(d) => total += d,
                None => ok = false,
            }
            z0 = z1;
            f0 = f1;
        }
    }
    let turns = total / std::f64::consts::TAU;
    let count = turns.round();
    if (turns - count).abs() > 0.2 {
        ok = false;
    }
    (count as i64, ok)
}

fn segment_phase(
    groups: &[(f64, f64)],
    omega: f64,
    z0: C64,
    f0: C64,
    z1: C64,
    f1: C64,
    depth: u32,
) -> Option<f64> {
    if f0 == C64::new(0.0, 0.0) || f1 == C64::new(0.0, 0.0) {
        return None;
    }
    let d = (f1 * f0.conj()).arg();
    if d.abs() <= std::f64::consts::FRAC_PI_2 {
        return Some(d);
    }
    if depth == 0 {
        return None;
    }
    let zm = (z0 + z1) / 2.0;
    let fm = eval_f(groups, omega, zm);
    Some(
        segment_phase(groups, omega, z0, f0, zm, fm, depth - 1)?
            + segment_phase(groups, omega, zm, fm, z1, f1, depth - 1)?,
    )
}

/// The pole comb is roughly evenly spaced along the imaginary axis, so a gap
/// much wider than the median spacing marks roots the seed lattice missed.
/// Re-seeds Newton inside such gaps (and past the outermost roots) until a
/// round stops finding anything new.
fn refine_gaps(groups: &[(f64, f64)], omega: f64, window: &Window, roots: &mut Vec<C64>) {
    for _ in 0..3 {
        if roots.len() < 4 {
            return;
        }
        roots.sort_by(|a, b| a.im.total_cmp(&b.im));
        let mut spacings: Vec<f64> = roots.windows(2).map(|w| w[1].im - w[0].im).collect();
        spacings.sort_by(f64::total_cmp);
        let median = spacings[spacings.len() / 2];
        if median <= 0.0 {
            return;
        }
        let mut seeds: Vec<C64> = Vec::new();
        for pair in roots.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let gap = hi.im - lo.im;
            if gap <= 1.6 * median {
                continue;
            }
            let slots = ((gap / median).round() as usize).max(2);
            for m in 1..slots {
                let f = m as f64 / slots as f64;
                seeds.push(C64::new(lo.re + (hi.re - lo.re) * f, lo.im + gap * f));
            }
        }
        let (first, last) = (roots[0], roots[roots.len() - 1]);
        let mut im = first.im - median;
        while im > window.im_min {
            seeds.push(C64::new(first.re, im));
            im -= median;
        }
        let mut im = last.im + median;
        while im < window.im_max {
            seeds.push(C64::new(last.re, im));
            im += median;
        }
        let mut added = false;
        for seed in seeds {
            let Some(s) = newton(groups, omega, seed) else {
                continue;
            };
            if window.contains(s) && roots.iter().all(|r| (r - s).norm() > DEDUP_TOL) {
                roots.push(s);
                added = true;
            }
        }
        if !added {
            return;
        }
    }
}

/// Finds all roots of the characteristic equation inside `window` by Newton
/// iteration from a `grid.0 x grid.1` lattice of seeds, deduplicates them,
/// attaches residues, and audits the count with a boundary winding integral.
pub fn find_poles(config: &EmitterConfig, window: Window, grid: (usize, usize)) -> Result<PoleSet> {
    config.validate()?;
    if grid.0 == 0 || grid.1 == 0 {
        return Err(Error::InvalidConfig("seed grid must be nonempty".into()));
    }
    let groups = grouped(config);
    let omega = config.omega_tau;

    let mut roots: Vec<C64> = Vec::new();
    for i in 0..grid.0 {
        let re = window.re_min
            + (i as f64 + 0.5) * (window.re_max - window.re_min) / grid.0 as f64;
        for j in 0..grid.1 {
            let im = window.im_min
                + (j as f64 + 0.5) * (window.im_max - window.im_min) / grid.1 as f64;
            let Some(s) = newton(&groups, omega, C64::new(re, im)) else {
                continue;
            };
            if !window.contains(s) {
                continue;
            }
            if roots.iter().all(|r| (r - s).norm() > DEDUP_TOL) {
                roots.push(s);
            }
        }
    }

    refine_gaps(&groups, omega, &window, &mut roots);

    for r in &roots {
        if r.re > 1e-9 {
            return Err(Error::GrowingPole { re: r.re });
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));

    let residues = roots
        .iter()
        .map(|&s| {
            let (_, fp) = eval_f_fp(&groups, omega, s);
            1.0 / fp
        })
        .collect();

    let (winding_count, winding_ok) = boundary_winding(&groups, omega, &window, 1000);
    Ok(PoleSet {
        winding_mismatch: !winding_ok || winding_count != roots.len() as i64,
        poles: roots,
        residues,
        search_window: window,
        winding_count,
    })
}

/// [`find_poles`] over the default window with the default 60x60 seed grid.
pub fn find_poles_default(config: &EmitterConfig) -> Result<PoleSet> {
    find_poles(config, default_window(config), (60, 60))
}

/// Fast path for weakly retarded (Markovian-regime) configurations: a single
/// Newton run from the first-order estimate
/// `s0 = -i*Omega - (gamma/2) sum G_m G_m' exp(i Omega |tau_mm'|)`.
pub fn markovian_pole(config: &EmitterConfig) -> Result<C64> {
    config.validate()?;
    let groups = grouped(config);
    let omega = config.omega_tau;
    let mut s0 = C64::new(0.0, -omega);
    for &(d, c) in &groups {
        s0 -= c * C64::new(0.0, omega * d).exp();
    }
    let root = newton(&groups, omega, s0)
        .or_else(|| newton(&groups, omega, C64::new(0.0, -omega)))
        .ok_or_else(|| Error::InvalidConfig("Markovian pole iteration failed".into()))?;
    if root.re > 1e-9 {
        return Err(Error::GrowingPole { re: root.re });
    }
    Ok(root)
}

/// Detuning `Omega*tau` that places branch `n` of an `n_points`-point atom
/// on the dark-state manifold:
/// `Omega*tau = 2 n pi / N - (1/2) N gamma*tau cot(n pi / N)`.
pub fn dark_state_detuning(n_points: usize, n: i64, gamma_tau: f64) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::InvalidConfig("n_points must be >= 1".into()));
    }
    if n.rem_euclid(n_points as i64) == 0 {
        return Err(Error::SingularBranch { n, n_points });
    }
    let big_n = n_points as f64;
    let x = std::f64::consts::PI * n as f64 / big_n;
    let cot = x.cos() / x.sin();
    Ok(std::f64::consts::TAU * n as f64 / big_n - 0.5 * big_n * gamma_tau * cot)
}

/// Residue-sum reconstruction `sum_n A_n exp(s_n t)`.
pub fn mode_sum(poles: &PoleSet, t: f64) -> C64 {
    poles
        .poles
        .iter()
        .zip(&poles.residues)
        .map(|(&s, &a)| a * (s * t).exp())
        .sum()
}
