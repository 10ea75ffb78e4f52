//! Sweep axis expansion.

use anyhow::{ensure, Result};

use crate::config::{GridAxis, Spacing};

/// Expands an axis specification into grid points. A single-point axis sits
/// at `min`; log spacing is geometric and requires positive endpoints.
pub fn points(ax: &GridAxis, name: &str) -> Result<Vec<f64>> {
    ensure!(ax.count >= 1, "{name}: count must be >= 1");
    ensure!(
        ax.min.is_finite() && ax.max.is_finite(),
        "{name}: endpoints must be finite"
    );
    if ax.count == 1 {
        return Ok(vec![ax.min]);
    }
    ensure!(ax.max > ax.min, "{name}: max must exceed min");
    let n = ax.count;
    let interior: fn(&GridAxis, usize, usize) -> f64 = match ax.spacing {
        Spacing::Linear => {
            |ax, i, n| ax.min + (ax.max - ax.min) * i as f64 / (n - 1) as f64
        }
        Spacing::Log => {
            ensure!(ax.min > 0.0, "{name}: log spacing requires min > 0");
            |ax, i, n| {
                let (a, b) = (ax.min.ln(), ax.max.ln());
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        }
    };
    let pts = (0..n)
        .map(|i| {
            if i == 0 {
                ax.min
            } else if i == n - 1 {
                ax.max
            } else {
                interior(ax, i, n)
            }
        })
        .collect();
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(min: f64, max: f64, count: usize, spacing: Spacing) -> GridAxis {
        GridAxis {
            min,
            max,
            count,
            spacing,
        }
    }

    #[test]
    fn linear_endpoints_are_exact() {
        let p = points(&axis(0.0, 0.05, 11, Spacing::Linear), "t").unwrap();
        assert_eq!(p.len(), 11);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[10], 0.05);
    }

    #[test]
    fn log_spacing_is_geometric() {
        let p = points(&axis(1e-3, 1e-1, 3, Spacing::Log), "t").unwrap();
        assert!((p[1] - 1e-2).abs() < 1e-15);
        assert_eq!(p[0], 1e-3);
        assert_eq!(p[2], 1e-1);
    }

    #[test]
    fn single_point_axis_sits_at_min() {
        assert_eq!(points(&axis(0.3, 9.9, 1, Spacing::Linear), "t").unwrap(), vec![0.3]);
    }

    #[test]
    fn log_from_zero_is_rejected() {
        assert!(points(&axis(0.0, 1.0, 4, Spacing::Log), "t").is_err());
    }
}
