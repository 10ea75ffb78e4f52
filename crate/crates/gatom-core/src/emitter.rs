use ndarray::Array2;

use crate::{Error, Result};

/// One giant atom: `n_points` coupling points along the waveguide with
/// strength factors `strengths[m]` at coordinates `positions[m]`.
///
/// Everything is dimensionless: positions are in units of `v*tau` (nominal
/// inter-point spacing 1), `omega_tau` is the transition frequency times the
/// nominal delay in radians, and `gamma_tau` is the single-point decay rate
/// times the nominal delay.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterConfig {
    pub n_points: usize,
    pub omega_tau: f64,
    pub gamma_tau: f64,
    pub strengths: Vec<f64>,
    pub positions: Vec<f64>,
}

impl EmitterConfig {
    /// Nominal configuration: unit strengths, positions `0, 1, ..., n-1`.
    pub fn nominal(n_points: usize, omega_tau: f64, gamma_tau: f64) -> Self {
        EmitterConfig {
            n_points,
            omega_tau,
            gamma_tau,
            strengths: vec![1.0; n_points],
            positions: (0..n_points).map(|m| m as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::InvalidConfig("n_points must be >= 1".into()));
        }
        if self.strengths.len() != self.n_points || self.positions.len() != self.n_points {
            return Err(Error::InvalidConfig(format!(
                "expected {} strengths and positions, got {} and {}",
                self.n_points,
                self.strengths.len(),
                self.positions.len()
            )));
        }
        if !(self.gamma_tau > 0.0) || !(self.omega_tau > 0.0) {
            return Err(Error::InvalidConfig(
                "omega_tau and gamma_tau must be positive".into(),
            ));
        }
        if !self
            .strengths
            .iter()
            .chain(self.positions.iter())
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidConfig(
                "strengths and positions must be finite".into(),
            ));
        }
        let mut sorted = self.positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "coupling positions must be distinct".into(),
            ));
        }
        Ok(())
    }

    /// Pairwise travel delays `|x_m - x_m'|`, a symmetric matrix with zero
    /// diagonal, in units of `tau`.
    pub fn delays(&self) -> Array2<f64> {
        let n = self.n_points;
        let mut d = Array2::zeros((n, n));
        for m in 0..n {
            for mp in 0..n {
                d[[m, mp]] = (self.positions[m] - self.positions[mp]).abs();
            }
        }
        d
    }

    /// Smallest positive delay, or `None` for a single coupling point.
    pub fn tau_min(&self) -> Option<f64> {
        let mut sorted = self.positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 0.0)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// Largest delay (span between outermost points).
    pub fn tau_max(&self) -> f64 {
        let max = self.positions.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.positions.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    /// Collective decay scale `N^2 * gamma`, in units of `1/tau`.
    pub fn gamma_scale(&self) -> f64 {
        (self.n_points * self.n_points) as f64 * self.gamma_tau
    }

    /// Distinct pairwise delays with their summed couplings: entries
    /// `(d_k, c_k)` with `c_k = (gamma/2) * sum G_m G_m'` over ordered pairs
    /// whose delay equals `d_k` exactly, sorted by delay. The zero-delay
    /// group (the diagonal) is always first.
    pub(crate) fn delay_groups(&self) -> Vec<(f64, f64)> {
        let n = self.n_points;
        let half_gamma = 0.5 * self.gamma_tau;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * n);
        for m in 0..n {
            for mp in 0..n {
                let d = (self.positions[m] - self.positions[mp]).abs();
                pairs.push((d, half_gamma * self.strengths[m] * self.strengths[mp]));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for (d, c) in pairs {
            match groups.last_mut() {
                Some((d0, c0)) if *d0 == d => *c0 += c,
                _ => groups.push((d, c)),
            }
        }
        groups
    }
}
