//! DG(k) in time: Lagrange basis at the right Gauss–Radau points of each
//! subinterval and the local matrices built from it.

use crate::error::{Error, Result};
use crate::fe_basis::{gauss_radau_right, gauss_rule, lagrange_basis, NodalBasis1D, QuadratureRule};
use crate::linalg::{DenseLu, DenseMatrix};

#[derive(Debug, Clone)]
pub struct TemporalMatrices {
    degree: usize,
    tau: f64,
    /// `K_ab = ∫ φ_b' φ_a + φ_b(-1) φ_a(-1)`, independent of `tau`.
    pub stiffness: DenseMatrix,
    /// `M_ab = ∫_{I_n} φ_b φ_a dt`
    pub mass: DenseMatrix,
    /// Only the column of the right endpoint node is nonzero.
    pub coupling: DenseMatrix,
    basis: NodalBasis1D,
    radau: QuadratureRule,
    left_values: Vec<f64>,
}

impl TemporalMatrices {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn basis(&self) -> &NodalBasis1D {
        &self.basis
    }

    /// Right Radau rule on the reference interval.
    pub fn radau(&self) -> &QuadratureRule {
        &self.radau
    }

    /// `φ_a(-1)`, the weights of the upwind coupling to the previous step.
    pub fn left_values(&self) -> &[f64] {
        &self.left_values
    }

    /// Physical times of the temporal nodes of the step starting at `t_start`.
    pub fn node_times(&self, t_start: f64) -> Vec<f64> {
        self.radau
            .points
            .iter()
            .map(|&xi| t_start + 0.5 * self.tau * (xi + 1.0))
            .collect()
    }
}

pub fn temporal_matrices(k: usize, tau: f64) -> Result<TemporalMatrices> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
    }
    let n = k + 1;
    let radau = gauss_radau_right(n)?;
    let basis = lagrange_basis(&radau.points)?;
    let gauss = gauss_rule(n)?;
    let left_values: Vec<f64> = (0..n).map(|a| basis.value(a, -1.0)).collect();
    let mut stiffness = DenseMatrix::zeros(n);
    let mut mass = DenseMatrix::zeros(n);
    let mut coupling = DenseMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let mut kab = left_values[b] * left_values[a];
            let mut mab = 0.0;
            for (&xi, &w) in gauss.points.iter().zip(&gauss.weights) {
                let pa = basis.value(a, xi);
                kab += w * basis.derivative(b, xi) * pa;
                mab += w * basis.value(b, xi) * pa;
            }
            stiffness.set(a, b, kab);
            mass.set(a, b, 0.5 * tau * mab);
        }
        coupling.set(a, k, left_values[a]);
    }
    Ok(TemporalMatrices {
        degree: k,
        tau,
        stiffness,
        mass,
        coupling,
        basis,
        radau,
        left_values,
    })
}

/// One DG(k) step for `y' = lambda y`; returns the value at the right
/// endpoint of the step.
pub fn dg_ode_step(k: usize, tau: f64, lambda: f64, y_prev: f64) -> Result<f64> {
    let tm = temporal_matrices(k, tau)?;
    let n = k + 1;
    let mut system = DenseMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            system.set(a, b, tm.stiffness.get(a, b) - lambda * tm.mass.get(a, b));
        }
    }
    let lu = DenseLu::factor(system, "DG(k) scalar step")?;
    let mut y: Vec<f64> = tm.left_values.iter().map(|&l| l * y_prev).collect();
    lu.solve_in_place(&mut y, &mut Vec::new());
    Ok(y[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_is_backward_euler() {
        let tm = temporal_matrices(0, 0.3).unwrap();
        assert!((tm.stiffness.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((tm.mass.get(0, 0) - 0.3).abs() < 1e-15);
        assert!((tm.coupling.get(0, 0) - 1.0).abs() < 1e-15);
        let y = dg_ode_step(0, 0.1, -1.0, 1.0).unwrap();
        assert!((y - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn sums_of_entries() {
        for k in 0..5 {
            let tau = 0.37;
            let tm = temporal_matrices(k, tau).unwrap();
            let n = k + 1;
            let ms: f64 = tm.mass.as_slice().iter().sum();
            let ks: f64 = tm.stiffness.as_slice().iter().sum();
            assert!((ms - tau).abs() < 1e-13, "k={k}");
            assert!((ks - 1.0).abs() < 1e-12, "k={k}");
            for a in 0..n {
                for b in 0..n {
                    assert!((tm.mass.get(a, b) - tm.mass.get(b, a)).abs() < 1e-15);
                    if b != k {
                        assert_eq!(tm.coupling.get(a, b), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn mass_scales_and_stiffness_does_not() {
        let a = temporal_matrices(2, 0.1).unwrap();
        let b = temporal_matrices(2, 0.4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((4.0 * a.mass.get(i, j) - b.mass.get(i, j)).abs() < 1e-14);
                assert_eq!(a.stiffness.get(i, j), b.stiffness.get(i, j));
            }
        }
    }

    #[test]
    fn stiffness_symmetric_part() {
        // K + K^T = e_end e_end^T + l l^T with l = φ(-1)
        let tm = temporal_matrices(3, 1.0).unwrap();
        let l = tm.left_values();
        for a in 0..4 {
            for b in 0..4 {
                let end = if a == 3 && b == 3 { 1.0 } else { 0.0 };
                let lhs = tm.stiffness.get(a, b) + tm.stiffness.get(b, a);
                assert!((lhs - end - l[a] * l[b]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_is_preserved() {
        for k in 0..5 {
            assert!((dg_ode_step(k, 0.2, 0.0, 1.7).unwrap() - 1.7).abs() < 1e-13);
        }
    }

    #[test]
    fn radau_iia_two_stage() {
        let z: f64 = -0.1;
        let r = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
        assert!((dg_ode_step(1, 0.1, -1.0, 1.0).unwrap() - r).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(temporal_matrices(1, 0.0).is_err());
        assert!(temporal_matrices(1, -1.0).is_err());
    }

    #[test]
    fn superconvergent_endpoint_order() {
        let lambda = -1.0;
        for k in 0..3 {
            let err = |steps: usize| {
                let tau = 1.0 / steps as f64;
                let mut y = 1.0;
                for _ in 0..steps {
                    y = dg_ode_step(k, tau, lambda, y).unwrap();
                }
                (y - lambda.exp()).abs()
            };
            let (e1, e2) = (err(4), err(8));
            let eoc = (e1 / e2).log2();
            assert!((eoc - (2 * k + 1) as f64).abs() < 0.3, "k={k} eoc={eoc}");
        }
    }
}
