//! Two braided giant atoms in the Markovian regime.
//!
//! Atom `a` couples at points 1 and 3, atom `b` at points 2 and 4, ordered
//! 1 < 2 < 3 < 4 along the waveguide (the braided topology). Tracing out the
//! waveguide gives a Lindblad master equation with an exchange interaction
//! `f` and decay rates `Gamma_a`, `Gamma_b`, `Gamma_coll` set by the
//! accumulated phases between coupling points. At the symmetric point with
//! all phases `pi/2` both individual and collective decay vanish while `f`
//! stays finite: atoms interact coherently without decohering.
//!
//! The master equation is vectorized row-major (`vec(A rho B) =
//! (A kron B^T) vec(rho)`) into a 16x16 Liouvillian whose spectrum measures
//! how disorder in the coupling strengths or point positions breaks the
//! protection.

use crate::disorder::{self, channel, DisorderSpec};
use crate::{C64, Error, Result};
use ndarray::Array2;
use ndarray_linalg::Eig;

/// Two braided atoms: four coupling strengths `gamma[m]` for points
/// 1, 2, 3, 4 and three inter-point phases `phi[m]` between consecutive
/// points, plus bare detunings of the two atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BraidedConfig {
    pub gamma: [f64; 4],
    pub phi: [f64; 3],
    pub omega_a: f64,
    pub omega_b: f64,
}

impl BraidedConfig {
    /// All couplings equal to `gamma0`, all phases equal to `phi0`, zero
    /// detunings.
    pub fn symmetric(gamma0: f64, phi0: f64) -> Self {
        BraidedConfig {
            gamma: [gamma0; 4],
            phi: [phi0; 3],
            omega_a: 0.0,
            omega_b: 0.0,
        }
    }

    /// The decoherence-free point: all phases at `pi/2`.
    pub fn dfi_point(gamma0: f64) -> Self {
        Self::symmetric(gamma0, std::f64::consts::FRAC_PI_2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "coupling rates must be finite and nonnegative, got {:?}",
                self.gamma
            )));
        }
        if self.phi.iter().any(|p| !p.is_finite())
            || !self.omega_a.is_finite()
            || !self.omega_b.is_finite()
        {
            return Err(Error::InvalidConfig(
                "phases and detunings must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Coefficients of the two-atom Lindblad master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladCoefficients {
    /// Lamb-shifted detuning of atom a.
    pub omega_a: f64,
    /// Lamb-shifted detuning of atom b.
    pub omega_b: f64,
    /// Coherent exchange coupling.
    pub f: f64,
    /// Individual decay of atom a.
    pub gamma_a: f64,
    /// Individual decay of atom b.
    pub gamma_b: f64,
    /// Collective decay.
    pub gamma_coll: f64,
}

/// Lindblad coefficients from the configuration's rates and phases.
pub fn coefficients(config: &BraidedConfig) -> Result<LindbladCoefficients> {
    config.validate()?;
    let [g1, g2, g3, g4] = config.gamma;
    let [p1, p2, p3] = config.phi;
    let r12 = (g1 * g2).sqrt();
    let r13 = (g1 * g3).sqrt();
    let r14 = (g1 * g4).sqrt();
    let r23 = (g2 * g3).sqrt();
    let r24 = (g2 * g4).sqrt();
    let r34 = (g3 * g4).sqrt();
    let p123 = p1 + p2 + p3;
    // Balanced pairwise summation: at the symmetric point the first pair is
    // exactly 2 gamma0 and the second exactly 0, so f lands on gamma0
    // without the rounding a running sum of three equal terms picks up.
    let f = 0.5 * ((r12 * p1.sin() + r23 * p2.sin()) + (r34 * p3.sin() + r14 * p123.sin()));
    Ok(LindbladCoefficients {
        omega_a: config.omega_a + r13 * (p1 + p2).sin(),
        omega_b: config.omega_b + r24 * (p2 + p3).sin(),
        f,
        gamma_a: g1 + g3 + 2.0 * r13 * (p1 + p2).cos(),
        gamma_b: g2 + g4 + 2.0 * r24 * (p2 + p3).cos(),
        gamma_coll: r12 * p1.cos() + r23 * p2.cos() + r34 * p3.cos() + r14 * p123.cos(),
    })
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for p in 0..rb {
                for q in 0..cb {
                    out[[i * rb + p, j * cb + q]] = a[[i, j]] * b[[p, q]];
                }
            }
        }
    }
    out
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn two_level() -> (Array2<C64>, Array2<C64>, Array2<C64>, Array2<C64>) {
    // Basis (g, e): lowering operator takes e to g.
    let sm = ndarray::array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
    let sp = ndarray::array![[c(0.0), c(0.0)], [c(1.0), c(0.0)]];
    let sz = ndarray::array![[c(-1.0), c(0.0)], [c(0.0), c(1.0)]];
    let id = ndarray::array![[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    (sm, sp, sz, id)
}

/// Row-major-vectorized 16x16 Liouvillian of the master equation, in the
/// product basis |gg>, |ge>, |eg>, |ee> (atom a first).
pub fn build_liouvillian(config: &BraidedConfig) -> Result<Array2<C64>> {
    let lc = coefficients(config)?;
    let (sm, sp, sz, id2) = two_level();
    let id4 = kron(&id2, &id2);

    let sm_a = kron(&sm, &id2);
    let sp_a = kron(&sp, &id2);
    let sm_b = kron(&id2, &sm);
    let sp_b = kron(&id2, &sp);

    let mut h = kron(&sz, &id2) * c(lc.omega_a / 2.0) + kron(&id2, &sz) * c(lc.omega_b / 2.0);
    h = h + (kron(&sm, &sp) + kron(&sp, &sm)) * c(lc.f);

    let i = C64::new(0.0, 1.0);
    let mut l = (kron(&h, &id4) - kron(&id4, &h.t().to_owned())) * (-i);

    // D[L] rho = L rho L+ - (L+ L rho + rho L+ L) / 2, vectorized.
    let dissipator = |op: &Array2<C64>| {
        let opc = op.mapv(|v| v.conj());
        let n = op.t().mapv(|v| v.conj()).dot(op);
        kron(op, &opc) - (kron(&n, &id4) + kron(&id4, &n.t().to_owned())) * c(0.5)
    };
    l = l + dissipator(&sm_a) * c(lc.gamma_a) + dissipator(&sm_b) * c(lc.gamma_b);

    // Collective term: sm_a rho sp_b + sm_b rho sp_a - {X, rho} / 2 with
    // X = sp_a sm_b + sp_b sm_a.
    let x = sp_a.dot(&sm_b) + sp_b.dot(&sm_a);
    let cross = kron(&sm_a, &sp_b.t().to_owned()) + kron(&sm_b, &sp_a.t().to_owned());
    let anti = (kron(&x, &id4) + kron(&id4, &x.t().to_owned())) * c(0.5);
    l = l + (cross - anti) * c(lc.gamma_coll);
    Ok(l)
}

/// Eigenvalues of the Liouvillian, sorted by descending real part (ties by
/// ascending imaginary part), with solver quality checks applied.
#[derive(Debug, Clone)]
pub struct LiouvillianSpectrum {
    pub eigenvalues: Vec<C64>,
    /// Worst eigenpair residual `|L v - lambda v| / |v|`.
    pub max_residual: f64,
}

impl LiouvillianSpectrum {
    /// Total decoherence rate: the negated eigenvalue sum, clamped at zero
    /// against rounding.
    pub fn kappa_tot(&self) -> f64 {
        (-self.eigenvalues.iter().map(|l| l.re).sum::<f64>()).max(0.0)
    }
}

/// Diagonalizes the Liouvillian and verifies the result: eigenpair residuals
/// small against the matrix norm, no growing modes, a steady state present,
/// and the eigenvalue sum consistent with the trace.
pub fn spectrum(config: &BraidedConfig) -> Result<LiouvillianSpectrum> {
    let l = build_liouvillian(config)?;
    let scale = 1.0 + l.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let (vals, vecs) = l.eig().map_err(|e| Error::Eigen(e.to_string()))?;

    let mut max_residual = 0.0f64;
    for (idx, &lambda) in vals.iter().enumerate() {
        let v = vecs.column(idx);
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let r = (&l.dot(&v) - &v.mapv(|x| x * lambda))
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r / vn);
    }
    if max_residual > 1e-10 * scale {
        return Err(Error::Eigen(format!(
            "eigenpair residual {max_residual} exceeds 1e-10 * {scale}"
        )));
    }
    let max_re = vals.iter().map(|l| l.re).fold(f64::MIN, f64::max);
    if max_re > 1e-9 * scale {
        return Err(Error::Eigen(format!("growing mode with Re = {max_re}")));
    }
    let min_abs = vals.iter().map(|l| l.norm()).fold(f64::MAX, f64::min);
    if min_abs > 1e-10 * scale {
        return Err(Error::Eigen(format!(
            "no steady state: smallest eigenvalue magnitude {min_abs}"
        )));
    }
    let tr: C64 = (0..16).map(|k| l[[k, k]]).sum();
    let sum: C64 = vals.iter().sum();
    if (tr - sum).norm() > 1e-9 * scale {
        return Err(Error::Eigen(format!(
            "eigenvalue sum {sum} inconsistent with trace {tr}"
        )));
    }

    let mut eigenvalues: Vec<C64> = vals.to_vec();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(LiouvillianSpectrum {
        eigenvalues,
        max_residual,
    })
}

/// `kappa_tot` straight from the coefficients: the Liouvillian trace is
/// `-8 (Gamma_a + Gamma_b)`, so the eigenvalue sum never needs the solver.
pub fn kappa_tot_trace(config: &BraidedConfig) -> Result<f64> {
    let lc = coefficients(config)?;
    Ok(8.0 * (lc.gamma_a + lc.gamma_b))
}

/// Draws disordered coupling rates `gamma_m (1 + sigma_g N)^2` and phases
/// `phi_m (1 + sigma_x N)` for ensemble member `index`.
pub fn disordered_braided(
    base: &BraidedConfig,
    spec: &DisorderSpec,
    index: u64,
) -> Result<BraidedConfig> {
    base.validate()?;
    spec.validate()?;
    if index >= spec.samples as u64 {
        return Err(Error::InvalidConfig(format!(
            "sample index {index} out of range for {} samples",
            spec.samples
        )));
    }
    let mut out = base.clone();
    for m in 0..4 {
        let n = disorder::normal(spec.seed, index, channel::DFI_GAMMA, m as u32, 0);
        let scale = 1.0 + spec.sigma_g * n;
        out.gamma[m] = base.gamma[m] * scale * scale;
    }
    for m in 0..3 {
        let n = disorder::normal(spec.seed, index, channel::DFI_PHASE, m as u32, 0);
        out.phi[m] = base.phi[m] * (1.0 + spec.sigma_x * n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const G0: f64 = 4.78e-4;

    /// Literal element-by-element transcription of the vectorized master
    /// equation, with explicit bra-ket sums and Kronecker deltas. Slow and
    /// verbose on purpose: an independent oracle for the operator assembly.
    fn liouvillian_by_elements(config: &BraidedConfig) -> Array2<C64> {
        let lc = coefficients(config).unwrap();
        fn kron2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 4]; 4] {
            let mut out = [[0.0; 4]; 4];
            for i in 0..2 {
                for j in 0..2 {
                    for p in 0..2 {
                        for q in 0..2 {
                            out[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                        }
                    }
                }
            }
            out
        }
        fn mul4(a: [[f64; 4]; 4], b: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
            let mut out = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        out[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            out
        }
        let sm = [[0.0, 1.0], [0.0, 0.0]];
        let sp = [[0.0, 0.0], [1.0, 0.0]];
        let sz = [[-1.0, 0.0], [0.0, 1.0]];
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let sm_a = kron2(sm, id);
        let sp_a = kron2(sp, id);
        let sm_b = kron2(id, sm);
        let sp_b = kron2(id, sp);
        let sz_a = kron2(sz, id);
        let sz_b = kron2(id, sz);
        let smsp = mul4(sm_a, sp_b);
        let spsm = mul4(sp_a, sm_b);
        let n_a = mul4(sp_a, sm_a);
        let n_b = mul4(sp_b, sm_b);
        let x_ab = mul4(sp_a, sm_b);
        let x_ba = mul4(sp_b, sm_a);

        let i = C64::new(0.0, 1.0);
        let (wa, wb, f) = (lc.omega_a, lc.omega_b, lc.f);
        let (ga, gb, gc) = (lc.gamma_a, lc.gamma_b, lc.gamma_coll);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

        let mut l = Array2::zeros((16, 16));
        for q in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for m in 0..4 {
                        let mut v = C64::new(0.0, 0.0);
                        for n in 0..4 {
                            let dnk_djm = delta(n, k) * delta(j, m);
                            let dqk_dnm = delta(q, k) * delta(n, m);
                            v += -i * (wa / 2.0) * sz_a[q][n] * dnk_djm;
                            v += -i * (wb / 2.0) * sz_b[q][n] * dnk_djm;
                            v += -i * f * smsp[q][n] * dnk_djm;
                            v += -i * f * spsm[q][n] * dnk_djm;
                            v += i * (wa / 2.0) * sz_a[n][j] * dqk_dnm;
                            v += i * (wb / 2.0) * sz_b[n][j] * dqk_dnm;
                            v += i * f * smsp[n][j] * dqk_dnm;
                            v += i * f * spsm[n][j] * dqk_dnm;
                            v += c(-0.5 * ga) * (n_a[q][n] * dnk_djm + n_a[n][j] * dqk_dnm);
                            v += c(-0.5 * gb) * (n_b[q][n] * dnk_djm + n_b[n][j] * dqk_dnm);
                            v += c(-0.5 * gc) * (x_ab[q][n] * dnk_djm + x_ab[n][j] * dqk_dnm);
                            v += c(-0.5 * gc) * (x_ba[q][n] * dnk_djm + x_ba[n][j] * dqk_dnm);
                            for p in 0..4 {
                                let dnk_dpm = delta(n, k) * delta(p, m);
                                v += c(ga) * sm_a[q][n] * sp_a[p][j] * dnk_dpm;
                                v += c(gb) * sm_b[q][n] * sp_b[p][j] * dnk_dpm;
                                v += c(gc) * sm_a[q][n] * sp_b[p][j] * dnk_dpm;
                                v += c(gc) * sm_b[q][n] * sp_a[p][j] * dnk_dpm;
                            }
                        }
                        l[[4 * q + j, 4 * k + m]] = v;
                    }
                }
            }
        }
        l
    }

    fn generic_config() -> BraidedConfig {
        BraidedConfig {
            gamma: [3.1e-4, 4.0e-4, 5.2e-4, 2.7e-4],
            phi: [0.3, 1.1, 2.0],
            omega_a: 1.0e-3,
            omega_b: 2.0e-3,
        }
    }

    #[test]
    fn coefficients_at_the_protected_point() {
        let lc = coefficients(&BraidedConfig::dfi_point(G0)).unwrap();
        assert_eq!(lc.f, G0);
        assert_eq!(lc.gamma_a, 0.0);
        assert_eq!(lc.gamma_b, 0.0);
        assert_eq!(lc.gamma_coll, 0.0);
        assert!(lc.omega_a.abs() < 1e-18);
        assert!(lc.omega_b.abs() < 1e-18);
    }

    #[test]
    fn coefficients_at_zero_phase() {
        let lc = coefficients(&BraidedConfig::symmetric(G0, 0.0)).unwrap();
        assert_eq!(lc.f, 0.0);
        assert!((lc.gamma_a - 4.0 * G0).abs() < 1e-19);
        assert!((lc.gamma_b - 4.0 * G0).abs() < 1e-19);
        assert!((lc.gamma_coll - 4.0 * G0).abs() < 1e-19);
    }

    #[test]
    fn decoupled_second_atom() {
        let mut cfg = generic_config();
        cfg.gamma[1] = 0.0;
        cfg.gamma[3] = 0.0;
        let lc = coefficients(&cfg).unwrap();
        assert_eq!(lc.f, 0.0);
        assert_eq!(lc.gamma_b, 0.0);
        assert_eq!(lc.gamma_coll, 0.0);
        let expect = cfg.gamma[0]
            + cfg.gamma[2]
            + 2.0 * (cfg.gamma[0] * cfg.gamma[2]).sqrt() * (cfg.phi[0] + cfg.phi[1]).cos();
        assert!((lc.gamma_a - expect).abs() < 1e-19);
    }

    #[test]
    fn operator_assembly_matches_element_formula() {
        for cfg in [
            generic_config(),
            BraidedConfig::dfi_point(G0),
            BraidedConfig::symmetric(2.3e-4, 0.9),
        ] {
            let a = build_liouvillian(&cfg).unwrap();
            let b = liouvillian_by_elements(&cfg);
            let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let worst = (&a - &b).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(
                worst <= 1e-13 * (1.0 + scale),
                "assembly deviates from element formula by {worst}"
            );
        }
    }

    #[test]
    fn trace_is_preserved_exactly() {
        for cfg in [generic_config(), BraidedConfig::dfi_point(G0)] {
            let l = build_liouvillian(&cfg).unwrap();
            // d(tr rho)/dt = sum over diagonal rows of L acting on any rho.
            for col in 0..16 {
                let s: C64 = (0..4).map(|q| l[[4 * q + q, col]]).sum();
                assert_eq!(s, C64::new(0.0, 0.0), "column {col}");
            }
        }
    }

    #[test]
    fn hermiticity_is_preserved() {
        // L applied to a Hermitian rho must keep d rho / dt Hermitian:
        // L[(j,q)] entries must be conjugate-mirrored in both indices.
        let l = build_liouvillian(&generic_config()).unwrap();
        for q in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for m in 0..4 {
                        let a = l[[4 * q + j, 4 * k + m]];
                        let b = l[[4 * j + q, 4 * m + k]];
                        assert!((a - b.conj()).norm() < 1e-18);
                    }
                }
            }
        }
    }

    #[test]
    fn protected_point_spectrum_is_purely_imaginary() {
        let spec = spectrum(&BraidedConfig::dfi_point(G0)).unwrap();
        for l in &spec.eigenvalues {
            assert!(l.re.abs() < 1e-10, "Re lambda = {}", l.re);
        }
        assert!(spec.kappa_tot() < 1e-9);
        // Exchange splitting f shows up as imaginary parts 0, +-f, +-2f.
        let mut ims: Vec<f64> = spec.eigenvalues.iter().map(|l| l.im).collect();
        ims.sort_by(f64::total_cmp);
        let expect = [
            -2.0 * G0,
            -G0,
            -G0,
            -G0,
            -G0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            G0,
            G0,
            G0,
            G0,
            2.0 * G0,
        ];
        for (got, want) in ims.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace_formula() {
        for cfg in [
            generic_config(),
            BraidedConfig::symmetric(G0, 1.2),
            disordered_braided(
                &BraidedConfig::dfi_point(G0),
                &DisorderSpec {
                    sigma_g: 0.2,
                    sigma_x: 0.1,
                    samples: 4,
                    seed: 11,
                },
                2,
            )
            .unwrap(),
        ] {
            let spec = spectrum(&cfg).unwrap();
            let direct = kappa_tot_trace(&cfg).unwrap();
            assert!(
                (spec.kappa_tot() - direct).abs() <= 1e-10 * (1.0 + direct),
                "spectrum {} vs trace {}",
                spec.kappa_tot(),
                direct
            );
        }
    }

    #[test]
    fn eigenvalues_are_sorted() {
        let spec = spectrum(&generic_config()).unwrap();
        for w in spec.eigenvalues.windows(2) {
            assert!(
                w[0].re > w[1].re || (w[0].re == w[1].re && w[0].im <= w[1].im)
            );
        }
    }

    #[test]
    fn disorder_moments_and_determinism() {
        let base = BraidedConfig::dfi_point(G0);
        let spec = DisorderSpec {
            sigma_g: 0.3,
            sigma_x: 0.05,
            samples: 2000,
            seed: 5,
        };
        let mut gsum = 0.0;
        let mut gcount = 0usize;
        let mut psum = 0.0;
        for idx in 0..spec.samples as u64 {
            let cfg = disordered_braided(&base, &spec, idx).unwrap();
            for g in cfg.gamma {
                gsum += g / G0;
                gcount += 1;
            }
            psum += cfg.phi[1];
        }
        // E[(1 + sigma N)^2] = 1 + sigma^2; var = 4 sigma^2 + 2 sigma^4.
        let mean = gsum / gcount as f64;
        let var = 4.0 * 0.09 + 2.0 * 0.0081;
        let se = (var / gcount as f64).sqrt();
        assert!(
            (mean - 1.09).abs() < 3.0 * se,
            "mean {mean} vs 1.09 +- {se}"
        );
        let pmean = psum / spec.samples as f64;
        let pse = 0.05 * FRAC_PI_2 / (spec.samples as f64).sqrt();
        assert!((pmean - FRAC_PI_2).abs() < 3.0 * pse);

        let a = disordered_braided(&base, &spec, 7).unwrap();
        let b = disordered_braided(&base, &spec, 7).unwrap();
        assert_eq!(a, b);
        assert!(disordered_braided(&base, &spec, 2000).is_err());
    }

    #[test]
    fn disordered_rates_stay_nonnegative() {
        let base = BraidedConfig::dfi_point(G0);
        let spec = DisorderSpec {
            sigma_g: 2.0,
            sigma_x: 0.5,
            samples: 500,
            seed: 3,
        };
        for idx in 0..500 {
            let cfg = disordered_braided(&base, &spec, idx).unwrap();
            assert!(cfg.gamma.iter().all(|g| *g >= 0.0));
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut cfg = generic_config();
        cfg.gamma[0] = -1.0;
        assert!(coefficients(&cfg).is_err());
        cfg.gamma[0] = f64::NAN;
        assert!(build_liouvillian(&cfg).is_err());
    }
}
