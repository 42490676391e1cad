//! Additive space-time Vanka smoother.
//!
//! A patch is a set of spatial cells; its unknowns are the free velocity
//! dofs of those cells and their pressure dofs, at every temporal node of
//! the step. The local matrix `R S R^T` is assembled from the cell matrices
//! of the level operator and factorized once.

use crate::error::{check_len, Error, Result};
use crate::linalg::{DenseLu, DenseMatrix};
use crate::st_operator::SpaceTimeOperator;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    #[default]
    Cell,
    VertexStar,
}

impl PatchKind {
    pub fn label(&self) -> &'static str {
        match self {
            PatchKind::Cell => "cell",
            PatchKind::VertexStar => "vertex_star",
        }
    }
}

/// A factorized local problem.
#[derive(Debug, Clone)]
pub struct PatchFactorization {
    /// Sorted global indices into the level's block vector.
    pub dofs: Vec<usize>,
    lu: DenseLu,
    /// Local pressure unknowns fixed to zero because the patch alone
    /// cannot determine the pressure constant.
    pinned: Vec<usize>,
}

impl PatchFactorization {
    pub fn factor(pm: PatchMatrix, context: &'static str) -> Result<Self> {
        let lu = DenseLu::factor(pm.matrix, context)?;
        Ok(Self {
            dofs: pm.dofs,
            lu,
            pinned: pm.pinned,
        })
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    /// Solves the local system in place; returns the multiply-add count.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) -> u64 {
        for &p in &self.pinned {
            rhs[p] = 0.0;
        }
        self.lu.solve_in_place(rhs, scratch)
    }
}

/// Local matrix of a patch, before factorization.
#[derive(Debug, Clone)]
pub struct PatchMatrix {
    pub dofs: Vec<usize>,
    pub matrix: DenseMatrix,
    pub pinned: Vec<usize>,
}

/// Cell matrices of one level, shared by all patches.
pub struct PatchAssembler<'a> {
    op: &'a SpaceTimeOperator,
    cell_mass: DenseMatrix,
    cell_laplace: DenseMatrix,
    cell_div: Vec<f64>,
}

impl<'a> PatchAssembler<'a> {
    pub fn new(op: &'a SpaceTimeOperator) -> Self {
        let (cell_mass, cell_laplace) = op.spatial().cell_velocity_matrices();
        Self {
            op,
            cell_div: op.spatial().cell_div_matrix(),
            cell_mass,
            cell_laplace,
        }
    }

    /// Cells sharing at least one velocity node with `cells`.
    fn neighbourhood(&self, cells: &[usize]) -> Vec<usize> {
        let vspace = self.op.velocity_space();
        let mesh = vspace.mesh();
        let level = vspace.level();
        let [nx, ny] = mesh.cells_per_dim(level);
        let mut out = Vec::new();
        for &c in cells {
            let [i, j] = mesh.cell_ij(level, c);
            for cj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                for ci in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                    out.push(mesh.cell_id(level, [ci, cj]));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn assemble(&self, cells: &[usize]) -> PatchMatrix {
        let op = self.op;
        let vspace = op.velocity_space();
        let pspace = op.pressure_space();
        let layout = op.layout();
        let ns = vspace.n_scalar();
        let nloc = vspace.dofs_per_cell_scalar();
        let npd = pspace.modes_per_cell();

        let mut vel: Vec<usize> = cells
            .iter()
            .flat_map(|&c| vspace.cell_scalar_dofs(c).iter().copied())
            .filter(|&g| !vspace.is_boundary_scalar(g))
            .collect();
        vel.sort_unstable();
        vel.dedup();
        let mut owned_cells = cells.to_vec();
        owned_cells.sort_unstable();
        owned_cells.dedup();
        let pres: Vec<usize> = owned_cells.iter().flat_map(|&c| pspace.cell_dofs(c)).collect();
        let (nvp, npp) = (vel.len(), pres.len());

        let mut mass = vec![0.0; nvp * nvp];
        let mut lap = vec![0.0; nvp * nvp];
        let mut div = vec![0.0; npp * 2 * nvp];
        let mut local = vec![None; nloc];
        for cell in self.neighbourhood(&owned_cells) {
            let dofs = vspace.cell_scalar_dofs(cell);
            for (l, g) in dofs.iter().enumerate() {
                local[l] = vel.binary_search(g).ok();
            }
            for i in 0..nloc {
                let Some(li) = local[i] else { continue };
                for j in 0..nloc {
                    let Some(lj) = local[j] else { continue };
                    mass[li * nvp + lj] += self.cell_mass.get(i, j);
                    lap[li * nvp + lj] += self.cell_laplace.get(i, j);
                }
            }
            if let Ok(pos) = owned_cells.binary_search(&cell) {
                for m in 0..npd {
                    let q = pos * npd + m;
                    for comp in 0..2 {
                        for j in 0..nloc {
                            if let Some(lj) = local[j] {
                                div[q * 2 * nvp + comp * nvp + lj] += self.cell_div[m * 2 * nloc + comp * nloc + j];
                            }
                        }
                    }
                }
            }
        }

        let slots = layout.slots;
        let vblock = 2 * nvp;
        let n = slots * (vblock + npp);
        let vel_idx = |a: usize, comp: usize, i: usize| a * vblock + comp * nvp + i;
        let pres_idx = |a: usize, q: usize| slots * vblock + a * npp + q;
        let stiff = &op.temporal().stiffness;
        let tmass = &op.temporal().mass;
        let nu = op.nu();
        let mut matrix = DenseMatrix::zeros(n);
        for a in 0..slots {
            for b in 0..slots {
                let (kab, mab) = (stiff.get(a, b), tmass.get(a, b));
                for comp in 0..2 {
                    for i in 0..nvp {
                        for j in 0..nvp {
                            let v = kab * mass[i * nvp + j] + mab * nu * lap[i * nvp + j];
                            if v != 0.0 {
                                matrix.set(vel_idx(a, comp, i), vel_idx(b, comp, j), v);
                            }
                        }
                    }
                }
                for q in 0..npp {
                    for comp in 0..2 {
                        for j in 0..nvp {
                            let d = div[q * vblock + comp * nvp + j];
                            if d != 0.0 {
                                matrix.set(pres_idx(a, q), vel_idx(b, comp, j), -mab * d);
                                matrix.set(vel_idx(b, comp, j), pres_idx(a, q), -tmass.get(b, a) * d);
                            }
                        }
                    }
                }
            }
        }

        // The pressure constant is undetermined when no free velocity dof
        // carries flux across the patch boundary.
        let mut pinned = Vec::new();
        if npp > 0 {
            let scale = div.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let flux = (0..vblock)
                .map(|j| {
                    (0..owned_cells.len())
                        .map(|c| div[c * npd * vblock + j])
                        .sum::<f64>()
                        .abs()
                })
                .fold(0.0_f64, f64::max);
            if flux <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                for a in 0..slots {
                    let p = pres_idx(a, 0);
                    matrix.pin(p);
                    pinned.push(p);
                }
            }
        }

        let mut dofs = Vec::with_capacity(n);
        for a in 0..slots {
            for comp in 0..2 {
                dofs.extend(vel.iter().map(|&g| layout.velocity(a).start + comp * ns + g));
            }
        }
        for a in 0..slots {
            dofs.extend(pres.iter().map(|&q| layout.pressure(a).start + q));
        }
        PatchMatrix { dofs, matrix, pinned }
    }
}

pub fn patch_cells(op: &SpaceTimeOperator, kind: PatchKind) -> Result<Vec<Vec<usize>>> {
    let vspace = op.velocity_space();
    match kind {
        PatchKind::Cell => Ok((0..vspace.n_cells()).map(|c| vec![c]).collect()),
        PatchKind::VertexStar => Ok(vspace
            .mesh()
            .vertex_star_patches(vspace.level())?
            .into_iter()
            .map(|p| p.cells)
            .collect()),
    }
}

fn factor_patches(op: &SpaceTimeOperator, cell_sets: &[Vec<usize>]) -> Result<Vec<PatchFactorization>> {
    let assembler = PatchAssembler::new(op);
    cell_sets
        .par_iter()
        .map(|cells| PatchFactorization::factor(assembler.assemble(cells), "Vanka patch"))
        .collect()
}

pub fn build_cell_patches(op: &SpaceTimeOperator) -> Result<Vec<PatchFactorization>> {
    factor_patches(op, &patch_cells(op, PatchKind::Cell)?)
}

pub fn build_vertex_star_patches(op: &SpaceTimeOperator) -> Result<Vec<PatchFactorization>> {
    factor_patches(op, &patch_cells(op, PatchKind::VertexStar)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SmootherStats {
    pub patches: usize,
    pub max_patch: usize,
    /// Σ n_T², the number of stored local matrix entries.
    pub sum_nt2: u64,
}

#[derive(Debug, Clone)]
pub struct VankaSmoother {
    kind: PatchKind,
    patches: Vec<PatchFactorization>,
    weights: Vec<f64>,
    omega: f64,
    stats: SmootherStats,
    last_madds: std::cell::Cell<u64>,
}

impl VankaSmoother {
    pub fn new(op: &SpaceTimeOperator, kind: PatchKind, omega: f64, max_entries: u64) -> Result<Self> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidArgument(format!("relaxation {omega} outside (0, 1]")));
        }
        let cell_sets = patch_cells(op, kind)?;
        let estimate = estimate_entries(op, &cell_sets);
        if estimate > max_entries {
            return Err(Error::ResourceLimit {
                what: "Vanka patch matrices",
                requested: estimate as usize,
                cap: max_entries as usize,
            });
        }
        let patches = factor_patches(op, &cell_sets)?;
        let mut count = vec![0u32; op.layout().len()];
        for p in &patches {
            for &d in &p.dofs {
                count[d] += 1;
            }
        }
        let weights = count
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { 1.0 / c as f64 })
            .collect();
        let stats = SmootherStats {
            patches: patches.len(),
            max_patch: patches.iter().map(|p| p.n()).max().unwrap_or(0),
            sum_nt2: patches.iter().map(|p| (p.n() * p.n()) as u64).sum(),
        };
        Ok(Self {
            kind,
            patches,
            weights,
            omega,
            stats,
            last_madds: std::cell::Cell::new(0),
        })
    }

    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn patches(&self) -> &[PatchFactorization] {
        &self.patches
    }

    /// `1 / valence`, zero for dofs in no patch.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn stats(&self) -> SmootherStats {
        self.stats
    }

    /// Multiply-adds spent in local solves by the last additive application.
    pub fn last_madds(&self) -> u64 {
        self.last_madds.get()
    }

    /// `out = Σ_T W R_T^T (R_T S R_T^T)^{-1} R_T residual`
    pub fn apply_additive(&self, residual: &[f64], out: &mut [f64]) {
        let locals: Vec<(Vec<f64>, u64)> = self
            .patches
            .par_iter()
            .map_init(Vec::new, |scratch, p| {
                let mut local: Vec<f64> = p.dofs.iter().map(|&d| residual[d]).collect();
                let madds = p.solve_in_place(&mut local, scratch);
                (local, madds)
            })
            .collect();
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut madds = 0;
        for (p, (local, m)) in self.patches.iter().zip(locals) {
            madds += m;
            for (&d, v) in p.dofs.iter().zip(local) {
                out[d] += v;
            }
        }
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o *= w;
        }
        self.last_madds.set(madds);
    }

    /// `u <- u + ω · smoother(b - S u)`
    pub fn smooth_step(&self, op: &SpaceTimeOperator, b: &[f64], u: &mut [f64]) {
        let n = u.len();
        let mut r = vec![0.0; n];
        op.apply_block(u, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let mut c = vec![0.0; n];
        self.apply_additive(&r, &mut c);
        for (ui, ci) in u.iter_mut().zip(&c) {
            *ui += self.omega * ci;
        }
    }
}

fn estimate_entries(op: &SpaceTimeOperator, cell_sets: &[Vec<usize>]) -> u64 {
    let vspace = op.velocity_space();
    let per_cell = (2 * vspace.dofs_per_cell_scalar() + op.pressure_space().modes_per_cell()) as u64;
    let slots = op.layout().slots as u64;
    cell_sets
        .iter()
        .map(|c| {
            let n = slots * per_cell * c.len() as u64;
            n * n
        })
        .sum()
}

/// Checked wrapper around [`VankaSmoother::apply_additive`].
pub fn apply_additive(smoother: &VankaSmoother, residual: &[f64]) -> Result<Vec<f64>> {
    check_len("apply_additive", smoother.weights.len(), residual.len())?;
    let mut out = vec![0.0; residual.len()];
    smoother.apply_additive(residual, &mut out);
    Ok(out)
}

pub fn smooth_step(smoother: &VankaSmoother, op: &SpaceTimeOperator, b: &[f64], u: &mut [f64]) -> Result<()> {
    check_len("smooth_step", op.layout().len(), b.len())?;
    check_len("smooth_step", op.layout().len(), u.len())?;
    smoother.smooth_step(op, b, u);
    Ok(())
}
