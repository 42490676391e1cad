use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm2, LinearOperator};

/// Approximate inverse applied once per Arnoldi step.
pub trait Preconditioner {
    /// `z ≈ A^{-1} r`; `z` is overwritten.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_iterations: usize,
    /// Krylov basis cap; `None` keeps every vector (no restarts).
    pub max_basis: Option<usize>,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-14,
            max_iterations: 200,
            max_basis: None,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument("GMRES tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("GMRES needs at least one iteration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Residual norm estimates, starting with the initial residual.
    pub residuals: Vec<f64>,
    /// `‖b − A x‖` recomputed from the returned iterate.
    pub final_residual: f64,
    pub target: f64,
}

/// Right-preconditioned GMRES with modified Gram-Schmidt and Givens
/// rotations; stops once `‖b − A x‖ ≤ max(rtol ‖b‖, atol)`.
pub fn gmres(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    config: &KrylovConfig,
) -> Result<GmresOutcome> {
    config.validate()?;
    let n = op.dim();
    check_len("gmres rhs", n, b.len())?;
    let mut x = match x0 {
        Some(x0) => {
            check_len("gmres initial guess", n, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let target = (config.rtol * norm2(b)).max(config.atol);
    let mut r = vec![0.0; n];
    op.apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let beta = norm2(&r);
    let mut residuals = vec![beta];
    if beta <= target {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            residuals,
            final_residual: beta,
            target,
        });
    }
    let limit = config
        .max_basis
        .map_or(config.max_iterations, |m| m.min(config.max_iterations));

    let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
    let mut precond: Vec<Vec<f64>> = Vec::new();
    // column-major upper Hessenberg, column j has j + 2 entries
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut converged = false;
    let mut w = vec![0.0; n];

    for j in 0..limit {
        let mut z = vec![0.0; n];
        pc.apply(&basis[j], &mut z);
        op.apply(&z, &mut w);
        precond.push(z);
        let mut col = vec![0.0; j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(&w, v);
            col[i] = hij;
            for (wk, vk) in w.iter_mut().zip(v) {
                *wk -= hij * vk;
            }
        }
        let h_next = norm2(&w);
        col[j + 1] = h_next;
        for i in 0..j {
            let (a, b2) = (col[i], col[i + 1]);
            col[i] = cs[i] * a + sn[i] * b2;
            col[i + 1] = -sn[i] * a + cs[i] * b2;
        }
        let (a, b2) = (col[j], col[j + 1]);
        let rho = a.hypot(b2);
        let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b2 / rho) };
        cs.push(c);
        sn.push(s);
        col[j] = rho;
        col[j + 1] = 0.0;
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        hess.push(col);
        let estimate = g[j + 1].abs();
        residuals.push(estimate);
        if estimate <= target || h_next <= f64::EPSILON * beta {
            converged = estimate <= target;
            break;
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }

    let m = hess.len();
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            s -= hess[k][i] * yk;
        }
        y[i] = if hess[i][i] == 0.0 { 0.0 } else { s / hess[i][i] };
    }
    for (yi, z) in y.iter().zip(&precond) {
        for (xk, zk) in x.iter_mut().zip(z) {
            *xk += yi * zk;
        }
    }
    op.apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let final_residual = norm2(&r);
    if !converged {
        let solver = if m < config.max_iterations {
            "GMRES (basis cap)"
        } else {
            "GMRES"
        };
        return Err(Error::NotConverged {
            solver,
            iterations: m,
            residual: residuals.last().copied().unwrap_or(final_residual),
            target,
        });
    }
    Ok(GmresOutcome {
        x,
        iterations: m,
        residuals,
        final_residual,
        target,
    })
}
