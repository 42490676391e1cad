//! Cell kernels for the spatial operators.
//!
//! On an axis-aligned cell every bilinear form factors into products of 1D
//! integrals, so each kernel is a pair of small 1D matrix contractions
//! applied along x and then along y.

use crate::dof_space::{PressureSpace, VelocitySpace};
use crate::error::{check_len, Error, Result};
use crate::fe_basis::{gauss_rule, legendre};
use crate::linalg::DenseMatrix;

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone)]
struct Table {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Table {
    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    fn transposed(&self) -> Self {
        Table::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }
}

/// `out[b][a] += scale * Σ Y[b][b'] X[a][a'] u[b'][a']` with `u` stored as
/// `Y.cols x X.cols` and `out` as `Y.rows x X.rows`.
fn tensor_apply(x: &Table, y: &Table, scale: f64, u: &[f64], out: &mut [f64], tmp: &mut Vec<f64>) {
    tmp.clear();
    tmp.resize(y.cols * x.rows, 0.0);
    for bp in 0..y.cols {
        let urow = &u[bp * x.cols..(bp + 1) * x.cols];
        let trow = &mut tmp[bp * x.rows..(bp + 1) * x.rows];
        for (a, t) in trow.iter_mut().enumerate() {
            let xrow = &x.data[a * x.cols..(a + 1) * x.cols];
            *t = xrow.iter().zip(urow).map(|(p, q)| p * q).sum();
        }
    }
    for b in 0..y.rows {
        let orow = &mut out[b * x.rows..(b + 1) * x.rows];
        for bp in 0..y.cols {
            let c = scale * y.data[b * y.cols + bp];
            if c == 0.0 {
                continue;
            }
            let trow = &tmp[bp * x.rows..(bp + 1) * x.rows];
            for (o, t) in orow.iter_mut().zip(trow) {
                *o += c * t;
            }
        }
    }
}

/// Matrix-free `M_h`, `A_h`, `B_h`, `B_h^T` and `M^p_h` on one level.
#[derive(Debug, Clone)]
pub struct SpatialOperators {
    vspace: VelocitySpace,
    pspace: PressureSpace,
    mass_1d: Table,
    stiff_1d: Table,
    /// `∫ L_i ℓ_a'`
    leg_grad: Table,
    /// `∫ L_j ℓ_b`
    leg_val: Table,
    leg_grad_t: Table,
    leg_val_t: Table,
    /// `(i, j)` Legendre degrees of each pressure mode.
    modes: Vec<(usize, usize)>,
    h: [f64; 2],
}

/// Scratch buffers for one cell.
#[derive(Default)]
struct CellScratch {
    ux: Vec<f64>,
    uy: Vec<f64>,
    ox: Vec<f64>,
    oy: Vec<f64>,
    q: Vec<f64>,
    tmp: Vec<f64>,
}

impl SpatialOperators {
    pub fn new(vspace: &VelocitySpace, pspace: &PressureSpace) -> Result<Self> {
        if vspace.level() != pspace.level() || vspace.mesh() != pspace.mesh() {
            return Err(Error::InvalidArgument(
                "velocity and pressure spaces live on different meshes".into(),
            ));
        }
        if vspace.r() != pspace.r() {
            return Err(Error::InvalidArgument(format!(
                "velocity degree {} does not pair with pressure degree {}",
                vspace.degree(),
                pspace.r()
            )));
        }
        let r = pspace.r();
        let basis = vspace.basis();
        let n1 = basis.n();
        let rule = gauss_rule(r + 2)?;
        let integrate = |f: &dyn Fn(f64) -> f64| rule.integrate(f);
        let mass_1d = Table::from_fn(n1, n1, |a, b| integrate(&|x| basis.value(a, x) * basis.value(b, x)));
        let stiff_1d = Table::from_fn(n1, n1, |a, b| {
            integrate(&|x| basis.derivative(a, x) * basis.derivative(b, x))
        });
        let leg_grad = Table::from_fn(r + 1, n1, |i, a| {
            integrate(&|x| legendre(i, x).0 * basis.derivative(a, x))
        });
        let leg_val = Table::from_fn(r + 1, n1, |j, b| integrate(&|x| legendre(j, x).0 * basis.value(b, x)));
        let modes = pspace.basis().modes().iter().map(|m| (m[0], m[1])).collect();
        Ok(Self {
            vspace: vspace.clone(),
            pspace: pspace.clone(),
            leg_grad_t: leg_grad.transposed(),
            leg_val_t: leg_val.transposed(),
            mass_1d,
            stiff_1d,
            leg_grad,
            leg_val,
            modes,
            h: vspace.cell_size(),
        })
    }

    pub fn velocity_space(&self) -> &VelocitySpace {
        &self.vspace
    }

    pub fn pressure_space(&self) -> &PressureSpace {
        &self.pspace
    }

    pub fn nv(&self) -> usize {
        self.vspace.n_dofs()
    }

    pub fn np(&self) -> usize {
        self.pspace.n_dofs()
    }

    fn n_local(&self) -> usize {
        self.vspace.dofs_per_cell_scalar()
    }

    fn cell_mass(&self, u: &[f64], out: &mut [f64], tmp: &mut Vec<f64>) {
        let c = 0.25 * self.h[0] * self.h[1];
        tensor_apply(&self.mass_1d, &self.mass_1d, c, u, out, tmp);
    }

    fn cell_laplace(&self, u: &[f64], out: &mut [f64], tmp: &mut Vec<f64>) {
        let [hx, hy] = self.h;
        tensor_apply(&self.stiff_1d, &self.mass_1d, hy / hx, u, out, tmp);
        tensor_apply(&self.mass_1d, &self.stiff_1d, hx / hy, u, out, tmp);
    }

    /// Full `(r+1) x (r+1)` Legendre moment tensor of `div u`, row index `j`.
    fn cell_div(&self, ux: &[f64], uy: &[f64], q: &mut [f64], tmp: &mut Vec<f64>) {
        let [hx, hy] = self.h;
        q.iter_mut().for_each(|v| *v = 0.0);
        tensor_apply(&self.leg_grad, &self.leg_val, 0.5 * hy, ux, q, tmp);
        tensor_apply(&self.leg_val, &self.leg_grad, 0.5 * hx, uy, q, tmp);
    }

    fn cell_div_transpose(&self, q: &[f64], ox: &mut [f64], oy: &mut [f64], tmp: &mut Vec<f64>) {
        let [hx, hy] = self.h;
        tensor_apply(&self.leg_grad_t, &self.leg_val_t, 0.5 * hy, q, ox, tmp);
        tensor_apply(&self.leg_val_t, &self.leg_grad_t, 0.5 * hx, q, oy, tmp);
    }

    fn scratch(&self) -> CellScratch {
        let n = self.n_local();
        let r1 = self.pspace.r() + 1;
        CellScratch {
            ux: vec![0.0; n],
            uy: vec![0.0; n],
            ox: vec![0.0; n],
            oy: vec![0.0; n],
            q: vec![0.0; r1 * r1],
            tmp: Vec::new(),
        }
    }

    /// Shared gather/scatter loop for velocity-to-velocity kernels.
    fn velocity_loop(&self, v: &[f64], out: &mut [f64], kernel: impl Fn(&[f64], &mut [f64], &mut Vec<f64>)) {
        let ns = self.vspace.n_scalar();
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut s = self.scratch();
        for cell in 0..self.vspace.n_cells() {
            let dofs = self.vspace.cell_scalar_dofs(cell);
            for (l, &g) in dofs.iter().enumerate() {
                s.ux[l] = v[g];
                s.uy[l] = v[ns + g];
            }
            s.ox.iter_mut().for_each(|o| *o = 0.0);
            s.oy.iter_mut().for_each(|o| *o = 0.0);
            kernel(&s.ux, &mut s.ox, &mut s.tmp);
            kernel(&s.uy, &mut s.oy, &mut s.tmp);
            for (l, &g) in dofs.iter().enumerate() {
                out[g] += s.ox[l];
                out[ns + g] += s.oy[l];
            }
        }
    }

    /// `out = M_h v`
    pub fn mass(&self, v: &[f64], out: &mut [f64]) {
        self.velocity_loop(v, out, |u, o, t| self.cell_mass(u, o, t));
    }

    /// `out = A_h v` (unscaled vector Laplacian)
    pub fn laplace(&self, v: &[f64], out: &mut [f64]) {
        self.velocity_loop(v, out, |u, o, t| self.cell_laplace(u, o, t));
    }

    /// `out = B_h v`, `(B_h v)_l = ∫ div v χ^p_l`
    pub fn div(&self, v: &[f64], out: &mut [f64]) {
        let ns = self.vspace.n_scalar();
        let npd = self.modes.len();
        let r1 = self.pspace.r() + 1;
        let mut s = self.scratch();
        for cell in 0..self.vspace.n_cells() {
            for (l, &g) in self.vspace.cell_scalar_dofs(cell).iter().enumerate() {
                s.ux[l] = v[g];
                s.uy[l] = v[ns + g];
            }
            self.cell_div(&s.ux, &s.uy, &mut s.q, &mut s.tmp);
            for (m, &(i, j)) in self.modes.iter().enumerate() {
                out[cell * npd + m] = s.q[j * r1 + i];
            }
        }
    }

    /// `out = B_h^T p`
    pub fn div_transpose(&self, p: &[f64], out: &mut [f64]) {
        let ns = self.vspace.n_scalar();
        let npd = self.modes.len();
        let r1 = self.pspace.r() + 1;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut s = self.scratch();
        for cell in 0..self.vspace.n_cells() {
            s.q.iter_mut().for_each(|v| *v = 0.0);
            for (m, &(i, j)) in self.modes.iter().enumerate() {
                s.q[j * r1 + i] = p[cell * npd + m];
            }
            s.ox.iter_mut().for_each(|o| *o = 0.0);
            s.oy.iter_mut().for_each(|o| *o = 0.0);
            self.cell_div_transpose(&s.q, &mut s.ox, &mut s.oy, &mut s.tmp);
            for (l, &g) in self.vspace.cell_scalar_dofs(cell).iter().enumerate() {
                out[g] += s.ox[l];
                out[ns + g] += s.oy[l];
            }
        }
    }

    /// `out = M^p_h p`
    pub fn pressure_mass(&self, p: &[f64], out: &mut [f64]) {
        for ((o, v), m) in out.iter_mut().zip(p).zip(self.pspace.mass_diag()) {
            *o = v * m;
        }
    }

    /// Scalar cell mass and Laplace matrices, obtained by applying the
    /// kernels to unit vectors.
    pub fn cell_velocity_matrices(&self) -> (DenseMatrix, DenseMatrix) {
        let n = self.n_local();
        let mut mass = DenseMatrix::zeros(n);
        let mut lap = DenseMatrix::zeros(n);
        let mut unit = vec![0.0; n];
        let mut out = vec![0.0; n];
        let mut tmp = Vec::new();
        for j in 0..n {
            unit[j] = 1.0;
            out.iter_mut().for_each(|o| *o = 0.0);
            self.cell_mass(&unit, &mut out, &mut tmp);
            for i in 0..n {
                mass.set(i, j, out[i]);
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            self.cell_laplace(&unit, &mut out, &mut tmp);
            for i in 0..n {
                lap.set(i, j, out[i]);
            }
            unit[j] = 0.0;
        }
        (mass, lap)
    }

    /// Cell divergence matrix, `modes x 2 n_local` row-major with the x
    /// component in the first `n_local` columns.
    pub fn cell_div_matrix(&self) -> Vec<f64> {
        let n = self.n_local();
        let npd = self.modes.len();
        let r1 = self.pspace.r() + 1;
        let mut out = vec![0.0; npd * 2 * n];
        let zero = vec![0.0; n];
        let mut unit = vec![0.0; n];
        let mut q = vec![0.0; r1 * r1];
        let mut tmp = Vec::new();
        for comp in 0..2 {
            for j in 0..n {
                unit[j] = 1.0;
                let (ux, uy) = if comp == 0 { (&unit, &zero) } else { (&zero, &unit) };
                self.cell_div(ux, uy, &mut q, &mut tmp);
                for (m, &(i, jj)) in self.modes.iter().enumerate() {
                    out[m * 2 * n + comp * n + j] = q[jj * r1 + i];
                }
                unit[j] = 0.0;
            }
        }
        out
    }
}

fn checked<'a>(context: &'static str, expected: usize, v: &'a [f64]) -> Result<&'a [f64]> {
    check_len(context, expected, v.len())?;
    Ok(v)
}

pub fn apply_velocity_mass(ops: &SpatialOperators, v: &[f64]) -> Result<Vec<f64>> {
    let v = checked("apply_velocity_mass", ops.nv(), v)?;
    let mut out = vec![0.0; ops.nv()];
    ops.mass(v, &mut out);
    Ok(out)
}

pub fn apply_laplace(ops: &SpatialOperators, v: &[f64]) -> Result<Vec<f64>> {
    let v = checked("apply_laplace", ops.nv(), v)?;
    let mut out = vec![0.0; ops.nv()];
    ops.laplace(v, &mut out);
    Ok(out)
}

pub fn apply_div(ops: &SpatialOperators, v: &[f64]) -> Result<Vec<f64>> {
    let v = checked("apply_div", ops.nv(), v)?;
    let mut out = vec![0.0; ops.np()];
    ops.div(v, &mut out);
    Ok(out)
}

pub fn apply_div_transpose(ops: &SpatialOperators, p: &[f64]) -> Result<Vec<f64>> {
    let p = checked("apply_div_transpose", ops.np(), p)?;
    let mut out = vec![0.0; ops.nv()];
    ops.div_transpose(p, &mut out);
    Ok(out)
}

pub fn apply_pressure_mass(ops: &SpatialOperators, p: &[f64]) -> Result<Vec<f64>> {
    let p = checked("apply_pressure_mass", ops.np(), p)?;
    let mut out = vec![0.0; ops.np()];
    ops.pressure_mass(p, &mut out);
    Ok(out)
}
