use super::quadrature::legendre;
use crate::error::{Error, Result};

/// Modal basis of total degree `<= r` built from products of unnormalized
/// Legendre polynomials on the reference cell `[-1, 1]^d`.
///
/// Modes are ordered by increasing multi-index with the first coordinate
/// running fastest inside each fixed remainder, so mode 0 is the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PDiscBasis {
    degree: usize,
    dim: usize,
    modes: Vec<[usize; 3]>,
}

impl PDiscBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.modes.len()
    }

    /// Per-direction Legendre degrees of each mode (unused trailing entries are zero).
    pub fn modes(&self) -> &[[usize; 3]] {
        &self.modes
    }

    pub fn mode_index(&self, degrees: [usize; 3]) -> Option<usize> {
        self.modes.iter().position(|m| *m == degrees)
    }

    pub fn value(&self, mode: usize, xi: &[f64]) -> f64 {
        (0..self.dim).map(|c| legendre(self.modes[mode][c], xi[c]).0).product()
    }

    pub fn gradient(&self, mode: usize, xi: &[f64]) -> [f64; 3] {
        let mut grad = [0.0; 3];
        let vals: Vec<(f64, f64)> = (0..self.dim).map(|c| legendre(self.modes[mode][c], xi[c])).collect();
        for (c, g) in grad.iter_mut().enumerate().take(self.dim) {
            *g = (0..self.dim)
                .map(|e| if e == c { vals[e].1 } else { vals[e].0 })
                .product();
        }
        grad
    }

    /// Diagonal of the reference-cell Gram matrix, `prod 2 / (2 i_c + 1)`.
    pub fn reference_gram_diagonal(&self) -> Vec<f64> {
        self.modes
            .iter()
            .map(|m| (0..self.dim).map(|c| 2.0 / (2.0 * m[c] as f64 + 1.0)).product())
            .collect()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn pdisc_basis(r: usize, d: usize) -> Result<PDiscBasis> {
    if r == 0 {
        return Err(Error::InvalidArgument(
            "piecewise-constant pressure is not inf-sup stable with this velocity pairing".into(),
        ));
    }
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("unsupported spatial dimension {d}")));
    }
    let mut modes = Vec::with_capacity(binomial(r + d, d));
    let kmax = if d == 3 { r } else { 0 };
    for k in 0..=kmax {
        for j in 0..=r - k {
            for i in 0..=r - k - j {
                modes.push([i, j, k]);
            }
        }
    }
    Ok(PDiscBasis {
        degree: r,
        dim: d,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_basis::quadrature::gauss_rule;

    #[test]
    fn dimensions() {
        assert_eq!(pdisc_basis(1, 2).unwrap().n(), 3);
        assert_eq!(pdisc_basis(2, 2).unwrap().n(), 6);
        assert_eq!(pdisc_basis(4, 2).unwrap().n(), 15);
        for r in 1..6 {
            for d in 2..=3 {
                assert_eq!(pdisc_basis(r, d).unwrap().n(), binomial(r + d, d));
            }
        }
        assert!(pdisc_basis(0, 2).is_err());
        assert!(pdisc_basis(2, 1).is_err());
    }

    #[test]
    fn first_mode_is_constant() {
        let b = pdisc_basis(3, 2).unwrap();
        assert_eq!(b.modes()[0], [0, 0, 0]);
        assert_eq!(b.value(0, &[0.3, -0.8]), 1.0);
    }

    fn gram_check(r: usize, d: usize) {
        let b = pdisc_basis(r, d).unwrap();
        let g = gauss_rule(r + 1).unwrap();
        let n = b.n();
        let mut gram = vec![0.0; n * n];
        let npts = g.len().pow(d as u32);
        for q in 0..npts {
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            let mut rem = q;
            for c in xi.iter_mut().take(d) {
                *c = g.points[rem % g.len()];
                w *= g.weights[rem % g.len()];
                rem /= g.len();
            }
            for a in 0..n {
                for c in 0..n {
                    gram[a * n + c] += w * b.value(a, &xi) * b.value(c, &xi);
                }
            }
        }
        let diag = b.reference_gram_diagonal();
        for a in 0..n {
            assert!((gram[a * n + a] - diag[a]).abs() < 1e-13);
            for c in 0..n {
                if a != c {
                    assert!(gram[a * n + c].abs() < 1e-12 * diag[a]);
                }
            }
        }
    }

    #[test]
    fn gram_is_diagonal() {
        for r in 1..=4 {
            gram_check(r, 2);
        }
        gram_check(2, 3);
    }

    #[test]
    fn gradient_finite_difference() {
        let b = pdisc_basis(3, 2).unwrap();
        let eps = 1e-6;
        let x = [0.2, -0.45];
        for m in 0..b.n() {
            let g = b.gradient(m, &x);
            let fx = (b.value(m, &[x[0] + eps, x[1]]) - b.value(m, &[x[0] - eps, x[1]])) / (2.0 * eps);
            let fy = (b.value(m, &[x[0], x[1] + eps]) - b.value(m, &[x[0], x[1] - eps])) / (2.0 * eps);
            assert!((g[0] - fx).abs() < 1e-8 && (g[1] - fy).abs() < 1e-8);
        }
    }
}
