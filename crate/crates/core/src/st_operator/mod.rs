//! Space-time block operator of one DG(k) time step.
//!
//! With the temporal matrices `K, M^τ` and the spatial operators, the step
//! operator acting on `X = [V^1..V^{k+1}, P^1..P^{k+1}]` is
//!
//! ```text
//! [ K ⊗ M_h + M^τ ⊗ ν A_h   -M^τ ⊗ B_h^T ]
//! [ -M^τ ⊗ B_h               0            ]
//! ```
//!
//! The negative off-diagonal blocks make `P` the physical pressure. Boundary
//! velocity dofs are eliminated: their columns are ignored and their rows
//! act as the identity.

mod kernels;
mod oracle;

pub use kernels::{
    apply_div, apply_div_transpose, apply_laplace, apply_pressure_mass, apply_velocity_mass, SpatialOperators,
};
pub use oracle::{assemble_sparse_oracle, assemble_spatial_oracle, SpatialMatrices, ORACLE_DOF_LIMIT};

use crate::dof_space::{PressureSpace, VelocitySpace};
use crate::error::{check_len, Result};
use crate::fe_basis::gauss_rule;
use crate::linalg::LinearOperator;
use crate::time_basis::TemporalMatrices;
use std::ops::Range;

/// Sizes of the sub-vectors of a space-time coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub slots: usize,
    pub nv: usize,
    pub np: usize,
}

impl BlockLayout {
    pub fn len(&self) -> usize {
        self.slots * (self.nv + self.np)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn velocity(&self, slot: usize) -> Range<usize> {
        slot * self.nv..(slot + 1) * self.nv
    }

    pub fn pressure(&self, slot: usize) -> Range<usize> {
        let base = self.slots * self.nv;
        base + slot * self.np..base + (slot + 1) * self.np
    }

    pub fn velocity_block(&self) -> Range<usize> {
        0..self.slots * self.nv
    }

    pub fn pressure_block(&self) -> Range<usize> {
        self.slots * self.nv..self.len()
    }
}

/// Coefficients of one time step, velocity slots first.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    layout: BlockLayout,
    data: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(layout: BlockLayout) -> Self {
        Self {
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    pub fn from_vec(layout: BlockLayout, data: Vec<f64>) -> Result<Self> {
        check_len("BlockVector::from_vec", layout.len(), data.len())?;
        Ok(Self { layout, data })
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    pub fn velocity(&self, slot: usize) -> &[f64] {
        &self.data[self.layout.velocity(slot)]
    }

    pub fn velocity_mut(&mut self, slot: usize) -> &mut [f64] {
        let r = self.layout.velocity(slot);
        &mut self.data[r]
    }

    pub fn pressure(&self, slot: usize) -> &[f64] {
        &self.data[self.layout.pressure(slot)]
    }

    pub fn pressure_mut(&mut self, slot: usize) -> &mut [f64] {
        let r = self.layout.pressure(slot);
        &mut self.data[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// `D^n` of one time step on one level.
#[derive(Debug, Clone)]
pub struct SpaceTimeOperator {
    spatial: SpatialOperators,
    temporal: TemporalMatrices,
    nu: f64,
    boundary: Vec<usize>,
}

struct SlotProducts {
    mass: Vec<Vec<f64>>,
    laplace: Vec<Vec<f64>>,
    grad_p: Vec<Vec<f64>>,
    div: Vec<Vec<f64>>,
}

impl SpaceTimeOperator {
    pub fn new(vspace: &VelocitySpace, pspace: &PressureSpace, temporal: TemporalMatrices, nu: f64) -> Result<Self> {
        let spatial = SpatialOperators::new(vspace, pspace)?;
        Ok(Self {
            boundary: vspace.boundary_dofs(),
            spatial,
            temporal,
            nu,
        })
    }

    pub fn spatial(&self) -> &SpatialOperators {
        &self.spatial
    }

    pub fn temporal(&self) -> &TemporalMatrices {
        &self.temporal
    }

    pub fn velocity_space(&self) -> &VelocitySpace {
        self.spatial.velocity_space()
    }

    pub fn pressure_space(&self) -> &PressureSpace {
        self.spatial.pressure_space()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout {
            slots: self.temporal.n_nodes(),
            nv: self.spatial.nv(),
            np: self.spatial.np(),
        }
    }

    /// Constrained velocity dofs (component-major indices into one slot).
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }

    /// Zeroes the constrained velocity entries of every slot.
    pub fn zero_boundary(&self, x: &mut [f64]) {
        let layout = self.layout();
        for slot in 0..layout.slots {
            let base = layout.velocity(slot).start;
            for &d in &self.boundary {
                x[base + d] = 0.0;
            }
        }
    }

    /// Mean-zero projection of every pressure slot.
    pub fn project_pressure(&self, x: &mut [f64]) {
        let layout = self.layout();
        for slot in 0..layout.slots {
            self.pressure_space().project_mean_zero(&mut x[layout.pressure(slot)]);
        }
    }

    fn slot_products(&self, x: &[f64], mask_boundary: bool) -> SlotProducts {
        let layout = self.layout();
        let (nv, np) = (layout.nv, layout.np);
        let mut out = SlotProducts {
            mass: Vec::with_capacity(layout.slots),
            laplace: Vec::with_capacity(layout.slots),
            grad_p: Vec::with_capacity(layout.slots),
            div: Vec::with_capacity(layout.slots),
        };
        let mut v = vec![0.0; nv];
        for slot in 0..layout.slots {
            v.copy_from_slice(&x[layout.velocity(slot)]);
            if mask_boundary {
                for &d in &self.boundary {
                    v[d] = 0.0;
                }
            }
            let mut mv = vec![0.0; nv];
            let mut av = vec![0.0; nv];
            let mut bt = vec![0.0; nv];
            let mut bv = vec![0.0; np];
            self.spatial.mass(&v, &mut mv);
            self.spatial.laplace(&v, &mut av);
            self.spatial.div(&v, &mut bv);
            self.spatial.div_transpose(&x[layout.pressure(slot)], &mut bt);
            out.mass.push(mv);
            out.laplace.push(av);
            out.grad_p.push(bt);
            out.div.push(bv);
        }
        out
    }

    fn combine(&self, products: &SlotProducts, y: &mut [f64]) {
        let layout = self.layout();
        let stiff = &self.temporal.stiffness;
        let tmass = &self.temporal.mass;
        for a in 0..layout.slots {
            let yv = &mut y[layout.velocity(a)];
            yv.iter_mut().for_each(|v| *v = 0.0);
            for b in 0..layout.slots {
                let (kab, mab) = (stiff.get(a, b), tmass.get(a, b));
                let (mv, av, bt) = (&products.mass[b], &products.laplace[b], &products.grad_p[b]);
                for i in 0..layout.nv {
                    yv[i] += kab * mv[i] + mab * (self.nu * av[i] - bt[i]);
                }
            }
            let yp = &mut y[layout.pressure(a)];
            yp.iter_mut().for_each(|v| *v = 0.0);
            for b in 0..layout.slots {
                let mab = tmass.get(a, b);
                for (o, d) in yp.iter_mut().zip(&products.div[b]) {
                    *o -= mab * d;
                }
            }
        }
    }

    /// `y = D x` with Dirichlet elimination.
    pub fn apply_block(&self, x: &[f64], y: &mut [f64]) {
        let products = self.slot_products(x, true);
        self.combine(&products, y);
        let layout = self.layout();
        for slot in 0..layout.slots {
            let base = layout.velocity(slot).start;
            for &d in &self.boundary {
                y[base + d] = x[base + d];
            }
        }
    }

    /// `y = D x` without any constraint handling; used to lift boundary data.
    pub fn apply_unconstrained(&self, x: &[f64], y: &mut [f64]) {
        let products = self.slot_products(x, false);
        self.combine(&products, y);
    }

    /// Contribution `φ_a(-1) M_h V_prev` of the previous step to each
    /// velocity slot of the right-hand side; pressure rows are zero.
    pub fn apply_coupling(&self, v_prev: &[f64]) -> Result<BlockVector> {
        let layout = self.layout();
        check_len("apply_coupling", layout.nv, v_prev.len())?;
        let mut mv = vec![0.0; layout.nv];
        self.spatial.mass(v_prev, &mut mv);
        let mut out = BlockVector::zeros(layout);
        for (a, &w) in self.temporal.left_values().iter().enumerate() {
            for (o, m) in out.velocity_mut(a).iter_mut().zip(&mv) {
                *o = w * m;
            }
        }
        Ok(out)
    }

    /// Load vector `F^a_i = (τ/2) ω_a ∫ f(t^a, x) χ_i dx` of the step
    /// starting at `t_start`, integrated in time by the Radau rule.
    pub fn assemble_rhs(&self, f: &dyn Fn(f64, [f64; 2]) -> [f64; 2], t_start: f64) -> BlockVector {
        let layout = self.layout();
        let mut out = BlockVector::zeros(layout);
        let vspace = self.velocity_space();
        let mesh = vspace.mesh();
        let level = vspace.level();
        let ns = vspace.n_scalar();
        let basis = vspace.basis();
        let n1 = basis.n();
        let rule = gauss_rule(vspace.degree() + 3).expect("nonzero rule");
        let nq = rule.len();
        let table: Vec<f64> = basis.value_table(&rule.points);
        let h = vspace.cell_size();
        let jac = 0.25 * h[0] * h[1];
        let times = self.temporal.node_times(t_start);
        let tau = self.temporal.tau();
        let mut fx = vec![0.0; nq * nq];
        let mut fy = vec![0.0; nq * nq];
        for (a, &t) in times.iter().enumerate() {
            let scale = 0.5 * tau * self.temporal.radau().weights[a] * jac;
            let slot = out.velocity_mut(a);
            for cell in 0..vspace.n_cells() {
                let o = mesh.cell_origin(level, cell);
                for qy in 0..nq {
                    for qx in 0..nq {
                        let x = [
                            o[0] + 0.5 * h[0] * (rule.points[qx] + 1.0),
                            o[1] + 0.5 * h[1] * (rule.points[qy] + 1.0),
                        ];
                        let val = f(t, x);
                        let w = scale * rule.weights[qx] * rule.weights[qy];
                        fx[qy * nq + qx] = w * val[0];
                        fy[qy * nq + qx] = w * val[1];
                    }
                }
                for (l, &g) in vspace.cell_scalar_dofs(cell).iter().enumerate() {
                    let (ia, ib) = (l % n1, l / n1);
                    let mut sx = 0.0;
                    let mut sy = 0.0;
                    for qy in 0..nq {
                        let wy = table[qy * n1 + ib];
                        for qx in 0..nq {
                            let phi = wy * table[qx * n1 + ia];
                            sx += phi * fx[qy * nq + qx];
                            sy += phi * fy[qy * nq + qx];
                        }
                    }
                    slot[g] += sx;
                    slot[ns + g] += sy;
                }
            }
        }
        out
    }
}

impl LinearOperator for SpaceTimeOperator {
    fn dim(&self) -> usize {
        self.layout().len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_block(x, y)
    }
}

/// Checked wrapper around [`SpaceTimeOperator::apply_block`].
pub fn apply_block(op: &SpaceTimeOperator, x: &BlockVector) -> Result<BlockVector> {
    check_len("apply_block", op.layout().len(), x.as_slice().len())?;
    let mut y = BlockVector::zeros(op.layout());
    op.apply_block(x.as_slice(), y.as_mut_slice());
    Ok(y)
}
