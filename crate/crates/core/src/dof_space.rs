//! Global numbering of the continuous `Q_{r+1}` velocity space and the
//! discontinuous `P_r` pressure space on one mesh level.
//!
//! Velocity vectors are component-major: all x-coefficients, then all
//! y-coefficients. Scalar velocity nodes form a lexicographic grid of
//! Gauss–Lobatto points. Pressure dofs are numbered `cell * modes + mode`.

use crate::error::{check_len, Error, Result};
use crate::fe_basis::{gauss_rule, lobatto_nodal_basis, pdisc_basis, NodalBasis1D, PDiscBasis};
use crate::linalg::dot;
use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct VelocitySpace {
    mesh: Mesh,
    level: usize,
    r: usize,
    basis: NodalBasis1D,
    cell_dofs: Vec<usize>,
    boundary: Vec<bool>,
}

impl VelocitySpace {
    pub fn new(mesh: &Mesh, level: usize, r: usize) -> Result<Self> {
        mesh.check_level(level)?;
        if r == 0 {
            return Err(Error::InvalidArgument("velocity degree r + 1 needs r >= 1".into()));
        }
        let degree = r + 1;
        let basis = lobatto_nodal_basis(degree);
        let [nx, ny] = mesh.cells_per_dim(level);
        let [gx, gy] = [nx * degree + 1, ny * degree + 1];
        let n1 = degree + 1;
        let mut cell_dofs = Vec::with_capacity(nx * ny * n1 * n1);
        for cj in 0..ny {
            for ci in 0..nx {
                for b in 0..n1 {
                    for a in 0..n1 {
                        cell_dofs.push((cj * degree + b) * gx + ci * degree + a);
                    }
                }
            }
        }
        let boundary = (0..gx * gy)
            .map(|g| {
                let (i, j) = (g % gx, g / gx);
                i == 0 || j == 0 || i == gx - 1 || j == gy - 1
            })
            .collect();
        Ok(Self {
            mesh: mesh.clone(),
            level,
            r,
            basis,
            cell_dofs,
            boundary,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Pressure degree `r`; the velocity degree is `r + 1`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn degree(&self) -> usize {
        self.r + 1
    }

    pub fn basis(&self) -> &NodalBasis1D {
        &self.basis
    }

    pub fn n_components(&self) -> usize {
        2
    }

    /// Scalar nodes per direction.
    pub fn nodes_per_dim(&self) -> [usize; 2] {
        let [nx, ny] = self.mesh.cells_per_dim(self.level);
        [nx * self.degree() + 1, ny * self.degree() + 1]
    }

    pub fn n_scalar(&self) -> usize {
        let [gx, gy] = self.nodes_per_dim();
        gx * gy
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells(self.level)
    }

    pub fn dofs_per_cell_scalar(&self) -> usize {
        let n1 = self.degree() + 1;
        n1 * n1
    }

    /// Scalar global indices of a cell's nodes, local order `b * (p+1) + a`.
    pub fn cell_scalar_dofs(&self, cell: usize) -> &[usize] {
        let n = self.dofs_per_cell_scalar();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    pub fn cell_size(&self) -> [f64; 2] {
        self.mesh.cell_size(self.level)
    }

    pub fn node_coords(&self, scalar: usize) -> [f64; 2] {
        let [gx, _] = self.nodes_per_dim();
        let (i, j) = (scalar % gx, scalar / gx);
        let p = self.degree();
        let h = self.cell_size();
        let lo = self.mesh.domain().lower;
        let nodes = self.basis.nodes();
        let coord = |idx: usize, hd: f64, low: f64| {
            let (cell, a) = (idx / p, idx % p);
            low + hd * (cell as f64 + 0.5 * (nodes[a] + 1.0))
        };
        [coord(i, h[0], lo[0]), coord(j, h[1], lo[1])]
    }

    pub fn is_boundary_scalar(&self, scalar: usize) -> bool {
        self.boundary[scalar]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof % self.n_scalar()]
    }

    /// Indices (component-major) of all constrained dofs.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let ns = self.n_scalar();
        (0..2 * ns).filter(|&d| self.boundary[d % ns]).collect()
    }

    pub fn zero_boundary(&self, v: &mut [f64]) {
        let ns = self.n_scalar();
        for (s, &b) in self.boundary.iter().enumerate() {
            if b {
                v[s] = 0.0;
                v[ns + s] = 0.0;
            }
        }
    }

    /// Writes `g(node)` into every constrained dof.
    pub fn set_boundary(&self, v: &mut [f64], g: impl Fn([f64; 2]) -> [f64; 2]) {
        let ns = self.n_scalar();
        for (s, &b) in self.boundary.iter().enumerate() {
            if b {
                let val = g(self.node_coords(s));
                v[s] = val[0];
                v[ns + s] = val[1];
            }
        }
    }

    /// Nodal interpolant of a vector field.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let ns = self.n_scalar();
        let mut v = vec![0.0; 2 * ns];
        for s in 0..ns {
            let val = f(self.node_coords(s));
            v[s] = val[0];
            v[ns + s] = val[1];
        }
        v
    }

    /// Cell containing `x` and the reference coordinates of `x` in it.
    pub fn locate(&self, x: [f64; 2]) -> (usize, [f64; 2]) {
        locate(&self.mesh, self.level, x)
    }

    /// Value and gradient (`grad[c][d] = ∂_d v_c`) at reference point `xi` of `cell`.
    pub fn eval_in_cell(&self, v: &[f64], cell: usize, xi: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let n1 = self.degree() + 1;
        let ns = self.n_scalar();
        let h = self.cell_size();
        let vx: Vec<f64> = (0..n1).map(|a| self.basis.value(a, xi[0])).collect();
        let dx: Vec<f64> = (0..n1).map(|a| self.basis.derivative(a, xi[0])).collect();
        let vy: Vec<f64> = (0..n1).map(|b| self.basis.value(b, xi[1])).collect();
        let dy: Vec<f64> = (0..n1).map(|b| self.basis.derivative(b, xi[1])).collect();
        let mut val = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for (l, &g) in self.cell_scalar_dofs(cell).iter().enumerate() {
            let (a, b) = (l % n1, l / n1);
            let phi = vx[a] * vy[b];
            let gx = dx[a] * vy[b] * 2.0 / h[0];
            let gy = vx[a] * dy[b] * 2.0 / h[1];
            for c in 0..2 {
                let coef = v[c * ns + g];
                val[c] += coef * phi;
                grad[c][0] += coef * gx;
                grad[c][1] += coef * gy;
            }
        }
        (val, grad)
    }

    pub fn evaluate(&self, v: &[f64], x: [f64; 2]) -> [f64; 2] {
        let (cell, xi) = self.locate(x);
        self.eval_in_cell(v, cell, xi).0
    }
}

pub(crate) fn locate(mesh: &Mesh, level: usize, x: [f64; 2]) -> (usize, [f64; 2]) {
    let n = mesh.cells_per_dim(level);
    let h = mesh.cell_size(level);
    let lo = mesh.domain().lower;
    let mut ij = [0usize; 2];
    let mut xi = [0.0; 2];
    for d in 0..2 {
        let t = (x[d] - lo[d]) / h[d];
        let c = (t.floor().max(0.0) as usize).min(n[d] - 1);
        ij[d] = c;
        xi[d] = 2.0 * (t - c as f64) - 1.0;
    }
    (mesh.cell_id(level, ij), xi)
}

#[derive(Debug, Clone)]
pub struct PressureSpace {
    mesh: Mesh,
    level: usize,
    basis: PDiscBasis,
    mass_diag: Vec<f64>,
    constant: Vec<f64>,
    mean: Vec<f64>,
}

impl PressureSpace {
    pub fn new(mesh: &Mesh, level: usize, r: usize) -> Result<Self> {
        mesh.check_level(level)?;
        let basis = pdisc_basis(r, 2)?;
        let h = mesh.cell_size(level);
        let jac = 0.25 * h[0] * h[1];
        let cell_diag: Vec<f64> = basis.reference_gram_diagonal().iter().map(|g| jac * g).collect();
        let n_cells = mesh.n_cells(level);
        let npd = basis.n();
        let mass_diag: Vec<f64> = (0..n_cells).flat_map(|_| cell_diag.iter().copied()).collect();
        let constant: Vec<f64> = (0..n_cells * npd)
            .map(|i| if i % npd == 0 { 1.0 } else { 0.0 })
            .collect();
        let mean = constant.iter().zip(&mass_diag).map(|(c, m)| c * m).collect();
        Ok(Self {
            mesh: mesh.clone(),
            level,
            basis,
            mass_diag,
            constant,
            mean,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn r(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &PDiscBasis {
        &self.basis
    }

    pub fn modes_per_cell(&self) -> usize {
        self.basis.n()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells(self.level)
    }

    pub fn n_dofs(&self) -> usize {
        self.mass_diag.len()
    }

    pub fn cell_dofs(&self, cell: usize) -> std::ops::Range<usize> {
        let n = self.modes_per_cell();
        cell * n..(cell + 1) * n
    }

    /// Diagonal of the pressure mass matrix.
    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    /// Coefficients of the constant function 1.
    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    /// `M^p * 1`
    pub fn mean_vector(&self) -> &[f64] {
        &self.mean
    }

    /// `∫ p dx`
    pub fn integral(&self, p: &[f64]) -> f64 {
        dot(p, &self.mean)
    }

    /// Removes the constant component so that `∫ p = 0`.
    pub fn project_mean_zero(&self, p: &mut [f64]) {
        let shift = dot(p, &self.mean) / dot(&self.constant, &self.mean);
        let npd = self.modes_per_cell();
        for v in p.iter_mut().step_by(npd) {
            *v -= shift;
        }
    }

    pub fn eval_in_cell(&self, p: &[f64], cell: usize, xi: [f64; 2]) -> f64 {
        self.cell_dofs(cell)
            .enumerate()
            .map(|(m, g)| p[g] * self.basis.value(m, &xi))
            .sum()
    }

    pub fn evaluate(&self, p: &[f64], x: [f64; 2]) -> f64 {
        let (cell, xi) = locate(&self.mesh, self.level, x);
        self.eval_in_cell(p, cell, xi)
    }

    /// Cellwise L2 projection.
    pub fn project(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let rule = gauss_rule(self.r() + 3).expect("nonzero rule");
        let npd = self.modes_per_cell();
        let h = self.mesh.cell_size(self.level);
        let gram = self.basis.reference_gram_diagonal();
        let mut out = vec![0.0; self.n_dofs()];
        for cell in 0..self.n_cells() {
            let o = self.mesh.cell_origin(self.level, cell);
            for (qy, &ey) in rule.points.iter().enumerate() {
                for (qx, &ex) in rule.points.iter().enumerate() {
                    let w = rule.weights[qx] * rule.weights[qy];
                    let x = [o[0] + 0.5 * h[0] * (ex + 1.0), o[1] + 0.5 * h[1] * (ey + 1.0)];
                    let fv = f(x) * w;
                    for m in 0..npd {
                        out[cell * npd + m] += fv * self.basis.value(m, &[ex, ey]) / gram[m];
                    }
                }
            }
        }
        out
    }
}

/// How boundary velocity entries are treated.
pub enum DirichletMode<'a> {
    /// Homogenize (residuals, corrections).
    ZeroRows,
    /// Impose boundary data evaluated at the nodes.
    SetValues(&'a dyn Fn([f64; 2]) -> [f64; 2]),
}

pub fn apply_dirichlet(v: &mut [f64], space: &VelocitySpace, mode: DirichletMode<'_>) -> Result<()> {
    check_len("apply_dirichlet", space.n_dofs(), v.len())?;
    match mode {
        DirichletMode::ZeroRows => space.zero_boundary(v),
        DirichletMode::SetValues(g) => space.set_boundary(v, g),
    }
    Ok(())
}

pub fn project_mean_zero(p: &mut [f64], space: &PressureSpace) -> Result<()> {
    check_len("project_mean_zero", space.n_dofs(), p.len())?;
    space.project_mean_zero(p);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DomainBox;
    use proptest::prelude::*;

    fn mesh(n: usize) -> Mesh {
        Mesh::build_cartesian(DomainBox::UNIT_SQUARE, [n, n], 1).unwrap()
    }

    #[test]
    fn velocity_counts() {
        assert_eq!(VelocitySpace::new(&mesh(2), 0, 1).unwrap().n_dofs(), 50);
        assert_eq!(VelocitySpace::new(&mesh(1), 0, 1).unwrap().n_dofs(), 18);
        let m = Mesh::unit_square_refined(3);
        for s in 0..4 {
            let v = VelocitySpace::new(&m, s, 2).unwrap();
            assert_eq!(v.n_dofs(), 2 * ((1 << s) * 3 + 1usize).pow(2));
        }
    }

    #[test]
    fn pressure_counts() {
        assert_eq!(PressureSpace::new(&mesh(2), 0, 1).unwrap().n_dofs(), 12);
        assert_eq!(PressureSpace::new(&mesh(8), 0, 4).unwrap().n_dofs(), 960);
        let p = PressureSpace::new(&mesh(3), 0, 2).unwrap();
        for cell in 0..9 {
            let nz = p.cell_dofs(cell).filter(|&g| p.constant()[g] != 0.0).count();
            assert_eq!(nz, 1);
        }
        assert!((p.integral(p.constant()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_mask_matches_coordinates() {
        let v = VelocitySpace::new(&mesh(3), 0, 2).unwrap();
        for s in 0..v.n_scalar() {
            let x = v.node_coords(s);
            let on = x.iter().any(|&c| c.abs() < 1e-14 || (c - 1.0).abs() < 1e-14);
            assert_eq!(on, v.is_boundary_scalar(s));
        }
        assert_eq!(v.boundary_dofs().len(), 2 * 4 * 9);
    }

    #[test]
    fn shared_nodes_have_identical_coordinates() {
        let v = VelocitySpace::new(&mesh(2), 0, 2).unwrap();
        let m = v.mesh().clone();
        let n1 = v.degree() + 1;
        let nodes = v.basis().nodes().to_vec();
        for cell in 0..4 {
            let o = m.cell_origin(0, cell);
            let h = m.cell_size(0);
            for (l, &g) in v.cell_scalar_dofs(cell).iter().enumerate() {
                let x = [
                    o[0] + 0.5 * h[0] * (nodes[l % n1] + 1.0),
                    o[1] + 0.5 * h[1] * (nodes[l / n1] + 1.0),
                ];
                let y = v.node_coords(g);
                assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lid_values() {
        let v = VelocitySpace::new(&mesh(2), 0, 1).unwrap();
        let t: f64 = 2.0;
        let lid = |x: [f64; 2]| {
            let on_lid = (x[1] - 1.0).abs() < 1e-12 && x[0] > 1e-12 && x[0] < 1.0 - 1e-12;
            if on_lid {
                [(std::f64::consts::PI * t / 4.0).sin(), 0.0]
            } else {
                [0.0, 0.0]
            }
        };
        let mut u = vec![7.0; v.n_dofs()];
        apply_dirichlet(&mut u, &v, DirichletMode::SetValues(&lid)).unwrap();
        let ns = v.n_scalar();
        for s in 0..ns {
            let x = v.node_coords(s);
            if !v.is_boundary_scalar(s) {
                assert_eq!(u[s], 7.0);
            } else if (x[1] - 1.0).abs() < 1e-12 && x[0] > 0.0 && x[0] < 1.0 {
                assert!((u[s] - 1.0).abs() < 1e-15);
            } else {
                assert_eq!(u[s], 0.0);
            }
        }
        // corners belong to the wall
        let corner = ns - 1;
        assert_eq!(u[corner], 0.0);
        apply_dirichlet(&mut u, &v, DirichletMode::ZeroRows).unwrap();
        assert!(v.boundary_dofs().iter().all(|&d| u[d] == 0.0));
    }

    #[test]
    fn constant_pressure_projects_to_zero() {
        let p = PressureSpace::new(&mesh(3), 0, 2).unwrap();
        let mut c: Vec<f64> = p.constant().iter().map(|v| 5.0 * v).collect();
        project_mean_zero(&mut c, &p).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-14));
        assert!(project_mean_zero(&mut [0.0; 3], &p).is_err());
    }

    #[test]
    fn conformity_reproduces_polynomials() {
        let v = VelocitySpace::new(&mesh(3), 0, 2).unwrap();
        let f = |x: [f64; 2]| [x[0].powi(3) * x[1] - x[1].powi(2), x[0] * x[1].powi(3) + 1.0];
        let u = v.interpolate(f);
        for k in 0..20 {
            let x = [(0.137 * k as f64 + 0.01) % 1.0, (0.291 * k as f64 + 0.05) % 1.0];
            let got = v.evaluate(&u, x);
            let exp = f(x);
            assert!((got[0] - exp[0]).abs() < 1e-12 && (got[1] - exp[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn pressure_projection_reproduces_polynomials() {
        let p = PressureSpace::new(&mesh(2), 0, 2).unwrap();
        let f = |x: [f64; 2]| x[0] * x[1] - 0.5 * x[1] * x[1] + 0.3;
        let c = p.project(f);
        for x in [[0.1, 0.2], [0.7, 0.9], [0.5, 0.3]] {
            assert!((p.evaluate(&c, x) - f(x)).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn mean_zero_projector(values in proptest::collection::vec(-10.0f64..10.0, 27)) {
            let p = PressureSpace::new(&mesh(3), 0, 1).unwrap();
            let mut once = values.clone();
            p.project_mean_zero(&mut once);
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            prop_assert!(p.integral(&once).abs() < 1e-13 * norm);
            let mut twice = once.clone();
            p.project_mean_zero(&mut twice);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-14 * norm);
            }
        }
    }
}
