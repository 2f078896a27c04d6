use nalgebra::Cholesky;
use num_complex::Complex64;

use super::coefficients::{FemMesh, WaveCoefficients};
use crate::error::{Error, Result};
use crate::kernel::{hermitian_part, CMat, HermitianPsd};
use crate::second_order::SecondOrderSystem;

const FORM_TOL: f64 = 1e-10;

/// Assembled forms and the reduction to κ-coordinates.
#[derive(Debug, Clone)]
pub struct AssembledWaveSystem {
    pub mesh: FemMesh,
    pub coefficients: WaveCoefficients,
    /// Stiffness `∫k φ'_i φ'_j`.
    pub k: CMat,
    /// Mass `∫ρ φ_i φ_j`.
    pub mass: CMat,
    /// Damping `∫(γ φ_i φ_j + d φ'_i φ'_j) + ζ φ_i(b)φ_j(b)`.
    pub theta: CMat,
    /// Lower Cholesky factor, `K = LL*`.
    pub l: CMat,
    /// `L⁻¹ Mass L⁻*`
    pub m_kappa: HermitianPsd,
    /// `L⁻¹ Theta L⁻*`
    pub c_kappa: CMat,
}

impl AssembledWaveSystem {
    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn system(&self) -> Result<SecondOrderSystem> {
        SecondOrderSystem::from_certified(self.m_kappa.clone(), self.c_kappa.clone())
    }
}

/// `L⁻¹ X L⁻*`, made exactly Hermitian.
fn congruence(l: &CMat, x: &CMat) -> Result<CMat> {
    let solve = |m: &CMat| {
        l.solve_lower_triangular(m)
            .ok_or_else(|| Error::Coefficients("stiffness factor is singular".into()))
    };
    let half = solve(x)?;
    let full = solve(&half.adjoint())?;
    hermitian_part(&full)
}

/// Sub-intervals of `[x0, x1]` cut at the coefficient breakpoints.
fn sub_intervals(x0: f64, x1: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![x0];
    cuts.extend(breaks.iter().copied().filter(|&p| p > x0 && p < x1));
    cuts.push(x1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Exact P1 assembly for piecewise-constant coefficients.
///
/// Elements are split at coefficient breakpoints; on each sub-interval the
/// integrands are polynomials of degree ≤ 2, integrated exactly by Simpson's rule.
pub fn assemble(mesh: &FemMesh, coeffs: &WaveCoefficients) -> Result<AssembledWaveSystem> {
    coeffs.validate()?;
    let len = coeffs.b - coeffs.a;
    if (mesh.a() - coeffs.a).abs() > 1e-12 * len || (mesh.b() - coeffs.b).abs() > 1e-12 * len {
        return Err(Error::Coefficients(format!(
            "mesh spans [{}, {}] but coefficients span [{}, {}]",
            mesh.a(),
            mesh.b(),
            coeffs.a,
            coeffs.b
        )));
    }
    let m = mesh.dim();
    let nodes = mesh.nodes();
    let breaks = coeffs.breakpoints();
    let mut k = CMat::zeros(m, m);
    let mut mass = CMat::zeros(m, m);
    let mut theta = CMat::zeros(m, m);
    for e in 0..m {
        let (xl, xr) = (nodes[e], nodes[e + 1]);
        let h = xr - xl;
        let hat = |i: usize, x: f64| if i == 0 { (xr - x) / h } else { (x - xl) / h };
        let slope = [-1.0 / h, 1.0 / h];
        let mut local_k = [[0.0; 2]; 2];
        let mut local_m = [[0.0; 2]; 2];
        let mut local_t = [[0.0; 2]; 2];
        for (s, t) in sub_intervals(xl, xr, &breaks) {
            let p = coeffs.piece_at(0.5 * (s + t));
            let mid = 0.5 * (s + t);
            for i in 0..2 {
                for j in 0..2 {
                    let f = |x: f64| hat(i, x) * hat(j, x);
                    let product = (t - s) / 6.0 * (f(s) + 4.0 * f(mid) + f(t));
                    let grad = (t - s) * slope[i] * slope[j];
                    local_k[i][j] += p.k * grad;
                    local_m[i][j] += p.rho * product;
                    local_t[i][j] += p.gamma * product + p.d * grad;
                }
            }
        }
        // Node e is dof e − 1; the node at a carries no dof.
        let dofs = [e.checked_sub(1), Some(e)];
        for i in 0..2 {
            for j in 0..2 {
                if let (Some(di), Some(dj)) = (dofs[i], dofs[j]) {
                    k[(di, dj)] += Complex64::from(local_k[i][j]);
                    mass[(di, dj)] += Complex64::from(local_m[i][j]);
                    theta[(di, dj)] += Complex64::from(local_t[i][j]);
                }
            }
        }
    }
    theta[(m - 1, m - 1)] += Complex64::from(coeffs.boundary_damping());

    let chol = Cholesky::new(k.clone())
        .ok_or_else(|| Error::Coefficients("stiffness matrix is not positive definite".into()))?;
    let l = chol.l();
    HermitianPsd::certify(mass.clone(), FORM_TOL)?;
    HermitianPsd::certify(theta.clone(), FORM_TOL)?;
    let m_kappa = HermitianPsd::certify(congruence(&l, &mass)?, FORM_TOL)?;
    let c_kappa = congruence(&l, &theta)?;
    HermitianPsd::certify(c_kappa.clone(), FORM_TOL)?;
    Ok(AssembledWaveSystem {
        mesh: mesh.clone(),
        coefficients: coeffs.clone(),
        k,
        mass,
        theta,
        l,
        m_kappa,
        c_kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{eigenvalues, identity, operator_norm, psd_sqrt, CVec};
    use crate::kernel::random::{complex_gaussian_vec, seeded};
    use crate::second_order::build_aplus;
    use crate::wave1d::Piece;

    /// Element-wise 4-point Gauss assembly, coefficients evaluated per element.
    fn gauss_assembly(mesh: &FemMesh, c: &WaveCoefficients) -> (CMat, CMat, CMat) {
        let g = [
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
            (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        ];
        let m = mesh.dim();
        let n = mesh.nodes();
        let (mut k, mut mass, mut theta) = (CMat::zeros(m, m), CMat::zeros(m, m), CMat::zeros(m, m));
        for e in 0..m {
            let (xl, xr) = (n[e], n[e + 1]);
            let h = xr - xl;
            let dofs = [e.checked_sub(1), Some(e)];
            for &(xi, w) in &g {
                let x = xl + 0.5 * h * (xi + 1.0);
                let p = c.piece_at(x);
                let phi = [(xr - x) / h, (x - xl) / h];
                let dphi = [-1.0 / h, 1.0 / h];
                for i in 0..2 {
                    for j in 0..2 {
                        if let (Some(a), Some(b)) = (dofs[i], dofs[j]) {
                            let wh = 0.5 * h * w;
                            k[(a, b)] += Complex64::from(wh * p.k * dphi[i] * dphi[j]);
                            mass[(a, b)] += Complex64::from(wh * p.rho * phi[i] * phi[j]);
                            theta[(a, b)] += Complex64::from(wh * (p.gamma * phi[i] * phi[j] + p.d * dphi[i] * dphi[j]));
                        }
                    }
                }
            }
        }
        theta[(m - 1, m - 1)] += Complex64::from(c.boundary_damping());
        (k, mass, theta)
    }

    fn piecewise() -> WaveCoefficients {
        WaveCoefficients {
            a: 0.0,
            b: 1.0,
            zeta: 0.7,
            pieces: vec![
                Piece { x0: 0.0, x1: 0.25, rho: 0.0, gamma: 1.0, d: 0.2, k: 1.0 },
                Piece { x0: 0.25, x1: 0.75, rho: 2.0, gamma: 0.0, d: 0.0, k: 3.0 },
                Piece { x0: 0.75, x1: 1.0, rho: 1.0, gamma: 0.5, d: 0.1, k: 0.5 },
            ],
            zeta_times_k: false,
        }
    }

    #[test]
    fn matches_gauss_oracle_on_aligned_mesh() {
        let mesh = FemMesh::uniform(0.0, 1.0, 16).unwrap();
        let c = piecewise();
        let sys = assemble(&mesh, &c).unwrap();
        let (k, mass, theta) = gauss_assembly(&mesh, &c);
        assert!(operator_norm(&(&sys.k - k)) <= 1e-14 * operator_norm(&sys.k));
        assert!(operator_norm(&(&sys.mass - mass)) <= 1e-14 * operator_norm(&sys.mass));
        assert!(operator_norm(&(&sys.theta - theta)) <= 1e-14 * operator_norm(&sys.theta));
    }

    #[test]
    fn unaligned_mesh_splits_elements() {
        // The breakpoint 1/4 falls inside the first element of a 3-element mesh.
        let mesh = FemMesh::uniform(0.0, 1.0, 3).unwrap();
        let sys = assemble(&mesh, &piecewise()).unwrap();
        let h = 1.0 / 3.0;
        let k_first = (0.25 * 1.0 + (h - 0.25) * 3.0) / (h * h);
        assert!((sys.k[(0, 0)].re - (k_first + 3.0 * h / (h * h))).abs() < 1e-12);
    }

    #[test]
    fn single_element_hand_values() {
        let mesh = FemMesh::uniform(0.0, 1.0, 1).unwrap();
        let c = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
        let sys = assemble(&mesh, &c).unwrap();
        assert!((sys.k[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((sys.theta[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((sys.c_kappa[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((sys.mass[(0, 0)].re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_factor_flag() {
        let mesh = FemMesh::uniform(0.0, 1.0, 1).unwrap();
        let mut c = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 2.0, 1.0);
        assert!((assemble(&mesh, &c).unwrap().theta[(0, 0)].re - 1.0).abs() < 1e-15);
        c.zeta_times_k = true;
        assert!((assemble(&mesh, &c).unwrap().theta[(0, 0)].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_vanishing_stiffness() {
        let mesh = FemMesh::uniform(0.0, 1.0, 4).unwrap();
        let c = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(assemble(&mesh, &c), Err(Error::Coefficients(_))));
        let wrong = FemMesh::uniform(0.0, 2.0, 4).unwrap();
        let ok = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0);
        assert!(assemble(&wrong, &ok).is_err());
    }

    #[test]
    fn conservative_limit_is_isometric() {
        let mesh = FemMesh::uniform(0.0, 1.0, 16).unwrap();
        let c = WaveCoefficients::uniform(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0);
        let sys = assemble(&mesh, &c).unwrap();
        assert_eq!(operator_norm(&sys.c_kappa), 0.0);
        let phase = build_aplus(&sys.system().unwrap()).unwrap();
        assert_eq!(phase.phase_dim(), 32);
        let mut rng = seeded(41);
        let x = complex_gaussian_vec(32, &mut rng);
        for t in [0.5, 7.0, 50.0] {
            let y: CVec = crate::kernel::matrix_exp_scaled(&phase.a, t).unwrap() * &x;
            assert!((y.norm() - x.norm()).abs() <= 1e-10 * x.norm());
        }
    }

    #[test]
    fn factor_invariance() {
        // Any factor K = FF* gives unitarily equivalent κ-coordinates.
        let mesh = FemMesh::uniform(0.0, 1.0, 8).unwrap();
        let sys = assemble(&mesh, &piecewise()).unwrap();
        let root = psd_sqrt(&HermitianPsd::certify(sys.k.clone(), 1e-12).unwrap());
        let inv_root = crate::kernel::inverse(root.matrix()).unwrap();
        let m_alt = &inv_root * &sys.mass * &inv_root;
        let c_alt = &inv_root * &sys.theta * &inv_root;
        let spectrum = |m: &CMat| {
            let mut v: Vec<f64> = eigenvalues(m).unwrap().iter().map(|z| z.re).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for (x, y) in spectrum(sys.m_kappa.matrix()).iter().zip(spectrum(&m_alt)) {
            assert!((x - y).abs() < 1e-10);
        }
        // The congruence factor U = L⁻¹K^{1/2} is unitary.
        let u = sys.l.clone().solve_lower_triangular(root.matrix()).unwrap();
        assert!(operator_norm(&(u.adjoint() * &u - identity(8))) < 1e-10);
        assert!(operator_norm(&(&u * &c_alt * u.adjoint() - &sys.c_kappa)) < 1e-10);
    }
}
