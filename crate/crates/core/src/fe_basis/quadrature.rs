use crate::error::{Error, Result};

/// Points in `[-1, 1]` with positive weights summing to 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// The same rule mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        QuadratureRule {
            points: self.points.iter().map(|&x| a + half * (x + 1.0)).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for m in 2..=n {
        let m = m as f64;
        let next = ((2.0 * m - 1.0) * x * p - (m - 1.0) * p_prev) / m;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let sign = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        sign * 0.5 * nf * (nf + 1.0)
    } else {
        nf * (p_prev - x * p) / (1.0 - x * x)
    };
    (p, dp)
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` by three-term recurrence.
fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let ab = alpha + beta;
    let mut p_prev = 1.0;
    let mut p = (alpha + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0);
    for m in 2..=n {
        let m = m as f64;
        let c = 2.0 * m + ab;
        let a1 = 2.0 * m * (m + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * c;
        let next = ((a2 + a3 * x) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    p
}

/// The `n` simple roots of a Jacobi polynomial in `(-1, 1)`, ascending.
/// Roots are bracketed on a grid fine enough to separate them and then
/// bisected to full precision.
fn jacobi_roots(n: usize, alpha: f64, beta: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let f = |x: f64| jacobi(n, alpha, beta, x);
    let samples = 64 * (n + 1) * (n + 1);
    let mut roots = Vec::with_capacity(n);
    // cosine spacing clusters samples near the endpoints where roots crowd
    let grid = |i: usize| -(std::f64::consts::PI * i as f64 / samples as f64).cos();
    let mut lo = grid(0);
    let mut f_lo = f(lo);
    for i in 1..=samples {
        let hi = grid(i);
        let f_hi = f(hi);
        if f_lo == 0.0 {
            roots.push(lo);
        } else if f_lo * f_hi < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            loop {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa * fm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    debug_assert_eq!(roots.len(), n, "root bracketing missed a root");
    roots
}

fn reject_zero(n: usize, name: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(format!("{name} needs at least one point")));
    }
    Ok(())
}

/// `n`-point Gauss–Legendre rule, exact up to degree `2n - 1`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    reject_zero(n, "Gauss rule")?;
    let mut points = jacobi_roots(n, 0.0, 0.0);
    symmetrize(&mut points);
    let weights = points
        .iter()
        .map(|&x| {
            let (_, dp) = legendre(n, x);
            2.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(QuadratureRule { points, weights })
}

/// `n`-point Gauss–Radau rule containing the right endpoint `+1`,
/// exact up to degree `2n - 2`.
pub fn gauss_radau_right(n: usize) -> Result<QuadratureRule> {
    reject_zero(n, "Gauss-Radau rule")?;
    let mut points = jacobi_roots(n - 1, 1.0, 0.0);
    points.push(1.0);
    let nf = n as f64;
    let weights = points
        .iter()
        .map(|&x| {
            if x == 1.0 {
                2.0 / (nf * nf)
            } else {
                let (p, _) = legendre(n - 1, x);
                (1.0 + x) / (nf * nf * p * p)
            }
        })
        .collect();
    Ok(QuadratureRule { points, weights })
}

/// `n`-point Gauss–Lobatto rule (both endpoints), exact up to degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "Gauss-Lobatto rule needs at least two points".into(),
        ));
    }
    let mut points = vec![-1.0];
    points.extend(jacobi_roots(n - 2, 1.0, 1.0));
    points.push(1.0);
    symmetrize(&mut points);
    let nf = n as f64;
    let weights = points
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n - 1, x);
            2.0 / (nf * (nf - 1.0) * p * p)
        })
        .collect();
    Ok(QuadratureRule { points, weights })
}

/// Enforces exact mirror symmetry of a symmetric point set.
fn symmetrize(points: &mut [f64]) {
    let n = points.len();
    for i in 0..n / 2 {
        let v = 0.5 * (points[n - 1 - i] - points[i]);
        points[i] = -v;
        points[n - 1 - i] = v;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
}
