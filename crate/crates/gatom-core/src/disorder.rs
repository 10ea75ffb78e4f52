//! Reproducible Gaussian disorder ensembles.
//!
//! Every scalar draw comes from its own ChaCha12 stream keyed on
//! `(seed, sample index, channel, point, attempt)`, so any draw can be
//! reproduced in isolation: no draw depends on how many values another
//! thread or an earlier point consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{EmitterConfig, Error, Result};

/// Gaussian disorder model: strength factors `G_m ~ N(1, sigma_g)` and
/// position offsets `L_m ~ N(0, sigma_x)`, with `samples` ensemble members
/// generated deterministically from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSpec {
    pub sigma_g: f64,
    pub sigma_x: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Minimum separation between disordered coupling points before a redraw.
pub const EPS_X: f64 = 1e-6;

/// Whole-vector position redraw attempts before giving up.
pub const REDRAW_BUDGET: u32 = 100;

/// Stream identifiers separating the disorder channels of one sample.
pub mod channel {
    pub const STRENGTH: u32 = 0;
    pub const POSITION: u32 = 1;
    pub const DFI_GAMMA: u32 = 2;
    pub const DFI_PHASE: u32 = 3;
}

/// One standard-normal draw from the stream keyed on all five indices.
/// Every scalar in an ensemble has its own key, so any sample of any sweep
/// point can be regenerated in isolation.
pub fn normal(seed: u64, index: u64, chan: u32, point: u32, attempt: u32) -> f64 {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..20].copy_from_slice(&chan.to_le_bytes());
    key[20..24].copy_from_slice(&point.to_le_bytes());
    key[24..28].copy_from_slice(&attempt.to_le_bytes());
    key[28..32].copy_from_slice(b"ga01");
    let mut rng = ChaCha12Rng::from_seed(key);
    StandardNormal.sample(&mut rng)
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_g < 0.0 || self.sigma_x < 0.0 {
            return Err(Error::InvalidConfig("sigma_g and sigma_x must be >= 0".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Draws ensemble member `index`: strengths `1 + N(0, sigma_g)` and positions
/// `m + N(0, sigma_x)` about the nominal grid, sorted by position with the
/// strengths carried along. Position vectors whose closest pair is nearer
/// than `eps_x` are redrawn as a whole, up to [`REDRAW_BUDGET`] attempts.
pub fn sample_configuration_min_sep(
    base: &EmitterConfig,
    spec: &DisorderSpec,
    index: usize,
    eps_x: f64,
) -> Result<EmitterConfig> {
    base.validate()?;
    spec.validate()?;
    if index >= spec.samples {
        return Err(Error::InvalidConfig(format!(
            "sample index {index} out of range for {} samples",
            spec.samples
        )));
    }
    let n = base.n_points;
    let idx = index as u64;

    let strengths: Vec<f64> = (0..n)
        .map(|m| 1.0 + spec.sigma_g * normal(spec.seed, idx, channel::STRENGTH, m as u32, 0))
        .collect();

    let mut positions = Vec::new();
    let mut accepted = false;
    for attempt in 0..REDRAW_BUDGET {
        positions = (0..n)
            .map(|m| {
                m as f64 + spec.sigma_x * normal(spec.seed, idx, channel::POSITION, m as u32, attempt)
            })
            .collect();
        let mut sorted = positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] >= eps_x) {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::RedrawBudget {
            attempts: REDRAW_BUDGET,
            n,
            eps: eps_x,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| positions[a].partial_cmp(&positions[b]).unwrap());

    Ok(EmitterConfig {
        n_points: n,
        omega_tau: base.omega_tau,
        gamma_tau: base.gamma_tau,
        strengths: order.iter().map(|&m| strengths[m]).collect(),
        positions: order.iter().map(|&m| positions[m]).collect(),
    })
}

/// [`sample_configuration_min_sep`] with the default separation [`EPS_X`].
pub fn sample_configuration(
    base: &EmitterConfig,
    spec: &DisorderSpec,
    index: usize,
) -> Result<EmitterConfig> {
    sample_configuration_min_sep(base, spec, index, EPS_X)
}
