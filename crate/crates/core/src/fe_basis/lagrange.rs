use crate::error::{Error, Result};

/// Nodal Lagrange basis on a set of distinct 1D nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalBasis1D {
    nodes: Vec<f64>,
    /// `1 / prod_{j != i} (x_i - x_j)`
    inv_denominators: Vec<f64>,
}

impl NodalBasis1D {
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn value(&self, i: usize, x: f64) -> f64 {
        let mut v = self.inv_denominators[i];
        for (j, &xj) in self.nodes.iter().enumerate() {
            if j != i {
                v *= x - xj;
            }
        }
        v
    }

    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        let mut sum = 0.0;
        for m in 0..self.n() {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != m {
                    prod *= x - xj;
                }
            }
            sum += prod;
        }
        sum * self.inv_denominators[i]
    }

    /// Row-major table `T[q][i] = basis_i(points[q])`.
    pub fn value_table(&self, points: &[f64]) -> Vec<f64> {
        points
            .iter()
            .flat_map(|&x| (0..self.n()).map(move |i| self.value(i, x)))
            .collect()
    }

    /// Row-major table `T[q][i] = basis_i'(points[q])`.
    pub fn derivative_table(&self, points: &[f64]) -> Vec<f64> {
        points
            .iter()
            .flat_map(|&x| (0..self.n()).map(move |i| self.derivative(i, x)))
            .collect()
    }
}

pub fn lagrange_basis(nodes: &[f64]) -> Result<NodalBasis1D> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("Lagrange basis needs at least one node".into()));
    }
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!(
            "Lagrange nodes must be strictly increasing, got {nodes:?}"
        )));
    }
    let inv_denominators = (0..nodes.len())
        .map(|i| {
            let d: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| nodes[i] - xj)
                .product();
            1.0 / d
        })
        .collect();
    Ok(NodalBasis1D {
        nodes: nodes.to_vec(),
        inv_denominators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_basis::quadrature::{gauss_lobatto, gauss_radau_right};
    use proptest::prelude::*;

    #[test]
    fn linear_hat() {
        let b = lagrange_basis(&[-1.0, 1.0]).unwrap();
        assert_eq!(b.value(0, 0.0), 0.5);
        for x in [-1.0, -0.3, 0.0, 0.8] {
            assert_eq!(b.derivative(1, x), 0.5);
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(lagrange_basis(&[0.0, 0.0]).is_err());
        assert!(lagrange_basis(&[1.0, 0.0]).is_err());
        assert!(lagrange_basis(&[]).is_err());
    }

    #[test]
    fn constant_basis_is_one() {
        let b = lagrange_basis(&[1.0]).unwrap();
        assert_eq!(b.value(0, -0.7), 1.0);
        assert_eq!(b.derivative(0, 0.2), 0.0);
    }

    #[test]
    fn lagrange_property_on_standard_node_sets() {
        for n in 2..8 {
            for nodes in [gauss_lobatto(n).unwrap().points, gauss_radau_right(n).unwrap().points] {
                let b = lagrange_basis(&nodes).unwrap();
                for i in 0..n {
                    for (j, &x) in nodes.iter().enumerate() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((b.value(i, x) - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = lagrange_basis(&gauss_lobatto(5).unwrap().points).unwrap();
        let eps = 1e-6;
        for i in 0..5 {
            let x = 0.23;
            let fd = (b.value(i, x + eps) - b.value(i, x - eps)) / (2.0 * eps);
            assert!((fd - b.derivative(i, x)).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(n in 1usize..9, x in -1.0f64..1.0) {
            let b = lagrange_basis(&gauss_radau_right(n).unwrap().points).unwrap();
            let s: f64 = (0..n).map(|i| b.value(i, x)).sum();
            let ds: f64 = (0..n).map(|i| b.derivative(i, x)).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(ds.abs() < 1e-10);
        }

        #[test]
        fn reproduces_polynomials(n in 2usize..8, x in -1.0f64..1.0) {
            let nodes = gauss_lobatto(n).unwrap().points;
            let b = lagrange_basis(&nodes).unwrap();
            let poly = |t: f64| t.powi(n as i32 - 1) - 0.5 * t + 0.25;
            let interp: f64 = nodes.iter().enumerate().map(|(i, &xi)| poly(xi) * b.value(i, x)).sum();
            prop_assert!((interp - poly(x)).abs() < 1e-12);
        }
    }
}
