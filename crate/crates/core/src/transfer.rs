//! Grid transfers between consecutive multigrid levels.
//!
//! The spatial prolongation embeds a coarse finite element function into
//! the fine space: velocity by interpolation at the fine nodes, pressure by
//! cellwise L2 projection, both exact because the spaces are nested. The
//! same construction covers mesh coarsening, degree coarsening, and both at
//! once. In time, the coarse Radau-nodal polynomial is evaluated at the fine
//! Radau nodes. Restriction is always the transpose of the prolongation.

use crate::dof_space::{locate, PressureSpace, VelocitySpace};
use crate::error::{check_len, Error, Result};
use crate::fe_basis::gauss_rule;
use crate::linalg::CsrMatrix;
use crate::st_operator::{BlockLayout, BlockVector};
use crate::time_basis::TemporalMatrices;

/// What changes between a level and its coarser neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransferKind {
    pub h_space: bool,
    pub p_space: bool,
    pub p_time: bool,
}

impl TransferKind {
    pub const IDENTITY: TransferKind = TransferKind {
        h_space: false,
        p_space: false,
        p_time: false,
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn label(&self) -> String {
        let parts: Vec<&str> = [
            (self.h_space, "h_space"),
            (self.p_space, "p_space"),
            (self.p_time, "p_time"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| *name)
        .collect();
        if parts.is_empty() {
            "identity".to_string()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Prolongate,
    Restrict,
}

/// Sparse matrix that drops entries that are zero up to rounding.
fn csr_from_dense_rows(nrows: usize, ncols: usize, entries: Vec<(usize, usize, f64)>) -> CsrMatrix {
    CsrMatrix::from_triplets(
        nrows,
        ncols,
        entries.into_iter().filter(|e| e.2.abs() > 1e-14).collect(),
    )
}

/// Interpolation of the coarse velocity basis at the fine nodes (one
/// scalar component; both components use the same matrix).
pub fn velocity_prolongation(coarse: &VelocitySpace, fine: &VelocitySpace) -> Result<CsrMatrix> {
    check_nested(coarse.mesh(), coarse.level(), fine.mesh(), fine.level())?;
    if coarse.degree() > fine.degree() {
        return Err(Error::InvalidArgument(
            "coarse velocity degree exceeds fine degree".into(),
        ));
    }
    let basis = coarse.basis();
    let n1 = basis.n();
    let mut entries = Vec::new();
    for f in 0..fine.n_scalar() {
        let x = fine.node_coords(f);
        let (cell, xi) = coarse.locate(x);
        let vx: Vec<f64> = (0..n1).map(|a| basis.value(a, xi[0])).collect();
        let vy: Vec<f64> = (0..n1).map(|b| basis.value(b, xi[1])).collect();
        for (l, &g) in coarse.cell_scalar_dofs(cell).iter().enumerate() {
            entries.push((f, g, vx[l % n1] * vy[l / n1]));
        }
    }
    Ok(csr_from_dense_rows(fine.n_scalar(), coarse.n_scalar(), entries))
}

/// Cellwise L2 re-expansion of coarse pressure polynomials in the fine basis.
pub fn pressure_prolongation(coarse: &PressureSpace, fine: &PressureSpace) -> Result<CsrMatrix> {
    check_nested(coarse.mesh(), coarse.level(), fine.mesh(), fine.level())?;
    if coarse.r() > fine.r() {
        return Err(Error::InvalidArgument(
            "coarse pressure degree exceeds fine degree".into(),
        ));
    }
    let fmesh = fine.mesh();
    let rule = gauss_rule(fine.r() + 2)?;
    let gram = fine.basis().reference_gram_diagonal();
    let h = fmesh.cell_size(fine.level());
    let (nf, nc) = (fine.modes_per_cell(), coarse.modes_per_cell());
    let mut entries = Vec::new();
    for cell in 0..fine.n_cells() {
        let o = fmesh.cell_origin(fine.level(), cell);
        let centre = fmesh.cell_centroid(fine.level(), cell);
        let (ccell, _) = locate(coarse.mesh(), coarse.level(), centre);
        let mut block = vec![0.0; nf * nc];
        for (qy, &ey) in rule.points.iter().enumerate() {
            for (qx, &ex) in rule.points.iter().enumerate() {
                let w = rule.weights[qx] * rule.weights[qy];
                let x = [o[0] + 0.5 * h[0] * (ex + 1.0), o[1] + 0.5 * h[1] * (ey + 1.0)];
                let (_, cxi) = locate(coarse.mesh(), coarse.level(), x);
                for m in 0..nf {
                    let fv = w * fine.basis().value(m, &[ex, ey]) / gram[m];
                    for n in 0..nc {
                        block[m * nc + n] += fv * coarse.basis().value(n, &cxi);
                    }
                }
            }
        }
        let (fr, cr) = (fine.cell_dofs(cell), coarse.cell_dofs(ccell));
        for m in 0..nf {
            for n in 0..nc {
                entries.push((fr.start + m, cr.start + n, block[m * nc + n]));
            }
        }
    }
    Ok(csr_from_dense_rows(fine.n_dofs(), coarse.n_dofs(), entries))
}

/// `I[a_f][a_c] = φ^{coarse}_{a_c}(ξ^{fine}_{a_f})`, row-major.
pub fn time_prolongation(coarse: &TemporalMatrices, fine: &TemporalMatrices) -> Result<Vec<f64>> {
    if coarse.degree() > fine.degree() {
        return Err(Error::InvalidArgument(
            "coarse temporal degree exceeds fine degree".into(),
        ));
    }
    let (nc, nf) = (coarse.n_nodes(), fine.n_nodes());
    let mut out = vec![0.0; nf * nc];
    for (af, &xi) in fine.radau().points.iter().enumerate() {
        for ac in 0..nc {
            out[af * nc + ac] = coarse.basis().value(ac, xi);
        }
    }
    Ok(out)
}

fn check_nested(cmesh: &crate::mesh::Mesh, clevel: usize, fmesh: &crate::mesh::Mesh, flevel: usize) -> Result<()> {
    if cmesh != fmesh || clevel > flevel {
        return Err(Error::InvalidArgument(format!(
            "levels are not nested (coarse level {clevel}, fine level {flevel})"
        )));
    }
    Ok(())
}

/// Prolongation and restriction between two levels.
#[derive(Debug, Clone)]
pub struct TransferPair {
    kind: TransferKind,
    coarse_layout: BlockLayout,
    fine_layout: BlockLayout,
    /// `None` when the spatial spaces coincide.
    velocity: Option<(CsrMatrix, CsrMatrix)>,
    pressure: Option<(CsrMatrix, CsrMatrix)>,
    time: Option<Vec<f64>>,
    coarse_boundary: Vec<usize>,
    fine_boundary: Vec<usize>,
    coarse_pressure: PressureSpace,
    fine_pressure: PressureSpace,
    coarse_scalar: usize,
    fine_scalar: usize,
}

/// Spaces and temporal data of one level, as needed to build transfers.
pub struct LevelSpaces<'a> {
    pub velocity: &'a VelocitySpace,
    pub pressure: &'a PressureSpace,
    pub temporal: &'a TemporalMatrices,
}

impl<'a> LevelSpaces<'a> {
    fn layout(&self) -> BlockLayout {
        BlockLayout {
            slots: self.temporal.n_nodes(),
            nv: self.velocity.n_dofs(),
            np: self.pressure.n_dofs(),
        }
    }
}

impl TransferPair {
    pub fn build(coarse: &LevelSpaces<'_>, fine: &LevelSpaces<'_>) -> Result<Self> {
        let kind = TransferKind {
            h_space: coarse.velocity.level() != fine.velocity.level(),
            p_space: coarse.velocity.r() != fine.velocity.r(),
            p_time: coarse.temporal.degree() != fine.temporal.degree(),
        };
        let same_space = !kind.h_space && !kind.p_space;
        let velocity = if same_space {
            None
        } else {
            let p = velocity_prolongation(coarse.velocity, fine.velocity)?;
            let t = p.transpose();
            Some((p, t))
        };
        let pressure = if same_space {
            None
        } else {
            let p = pressure_prolongation(coarse.pressure, fine.pressure)?;
            let t = p.transpose();
            Some((p, t))
        };
        let time = if kind.p_time {
            Some(time_prolongation(coarse.temporal, fine.temporal)?)
        } else {
            None
        };
        Ok(Self {
            kind,
            coarse_layout: coarse.layout(),
            fine_layout: fine.layout(),
            velocity,
            pressure,
            time,
            coarse_boundary: coarse.velocity.boundary_dofs(),
            fine_boundary: fine.velocity.boundary_dofs(),
            coarse_pressure: coarse.pressure.clone(),
            fine_pressure: fine.pressure.clone(),
            coarse_scalar: coarse.velocity.n_scalar(),
            fine_scalar: fine.velocity.n_scalar(),
        })
    }

    pub fn kind(&self) -> TransferKind {
        self.kind
    }

    pub fn coarse_layout(&self) -> BlockLayout {
        self.coarse_layout
    }

    pub fn fine_layout(&self) -> BlockLayout {
        self.fine_layout
    }

    /// Coarse-to-fine spatial map of one slot; `transpose` gives fine-to-coarse.
    fn apply_space(
        &self,
        transpose: bool,
        velocity_in: &[f64],
        pressure_in: &[f64],
        velocity_out: &mut [f64],
        pressure_out: &mut [f64],
    ) {
        match &self.velocity {
            None => velocity_out.copy_from_slice(velocity_in),
            Some((p, t)) => {
                let m = if transpose { t } else { p };
                let (ns_in, ns_out) = if transpose {
                    (self.fine_scalar, self.coarse_scalar)
                } else {
                    (self.coarse_scalar, self.fine_scalar)
                };
                for c in 0..2 {
                    m.mul_vec(
                        &velocity_in[c * ns_in..(c + 1) * ns_in],
                        &mut velocity_out[c * ns_out..(c + 1) * ns_out],
                    );
                }
            }
        }
        match &self.pressure {
            None => pressure_out.copy_from_slice(pressure_in),
            Some((p, t)) => (if transpose { t } else { p }).mul_vec(pressure_in, pressure_out),
        }
    }

    /// Coarse to fine.
    pub fn prolongate(&self, coarse: &[f64], fine: &mut [f64], project_pressure: bool) {
        let (cl, fl) = (self.coarse_layout, self.fine_layout);
        // spatial step on each coarse slot, then temporal interpolation
        let mut stage = vec![0.0; cl.slots * (fl.nv + fl.np)];
        let staged = BlockLayout {
            slots: cl.slots,
            nv: fl.nv,
            np: fl.np,
        };
        for b in 0..cl.slots {
            let (sv, sp) = stage.split_at_mut(staged.pressure_block().start);
            self.apply_space(
                false,
                &coarse[cl.velocity(b)],
                &coarse[cl.pressure(b)],
                &mut sv[staged.velocity(b)],
                &mut sp[b * fl.np..(b + 1) * fl.np],
            );
        }
        self.time_combine(&stage, staged, fine, fl, false);
        for slot in 0..fl.slots {
            let base = fl.velocity(slot).start;
            for &d in &self.fine_boundary {
                fine[base + d] = 0.0;
            }
            if project_pressure {
                self.fine_pressure.project_mean_zero(&mut fine[fl.pressure(slot)]);
            }
        }
    }

    /// Fine to coarse (transpose of [`prolongate`](Self::prolongate) up to the constraint handling).
    pub fn restrict(&self, fine: &[f64], coarse: &mut [f64], project_pressure: bool) {
        let (cl, fl) = (self.coarse_layout, self.fine_layout);
        let staged = BlockLayout {
            slots: cl.slots,
            nv: fl.nv,
            np: fl.np,
        };
        let mut stage = vec![0.0; staged.len()];
        self.time_combine(fine, fl, &mut stage, staged, true);
        for b in 0..cl.slots {
            let (cv, cp) = coarse.split_at_mut(cl.pressure_block().start);
            self.apply_space(
                true,
                &stage[staged.velocity(b)],
                &stage[staged.pressure(b)],
                &mut cv[cl.velocity(b)],
                &mut cp[b * cl.np..(b + 1) * cl.np],
            );
        }
        for slot in 0..cl.slots {
            let base = cl.velocity(slot).start;
            for &d in &self.coarse_boundary {
                coarse[base + d] = 0.0;
            }
            if project_pressure {
                self.coarse_pressure.project_mean_zero(&mut coarse[cl.pressure(slot)]);
            }
        }
    }

    /// Temporal step between layouts with equal spatial sizes.
    /// Forward: `out[a_f] = Σ I[a_f][a_c] in[a_c]`; transposed otherwise.
    fn time_combine(
        &self,
        input: &[f64],
        in_layout: BlockLayout,
        out: &mut [f64],
        out_layout: BlockLayout,
        transpose: bool,
    ) {
        let Some(table) = &self.time else {
            out.copy_from_slice(input);
            return;
        };
        let nc = self.coarse_layout.slots;
        out.iter_mut().for_each(|v| *v = 0.0);
        for a_out in 0..out_layout.slots {
            for a_in in 0..in_layout.slots {
                let w = if transpose {
                    table[a_in * nc + a_out]
                } else {
                    table[a_out * nc + a_in]
                };
                if w == 0.0 {
                    continue;
                }
                for (ranges_out, ranges_in) in [
                    (out_layout.velocity(a_out), in_layout.velocity(a_in)),
                    (out_layout.pressure(a_out), in_layout.pressure(a_in)),
                ] {
                    for (o, i) in out[ranges_out].iter_mut().zip(&input[ranges_in]) {
                        *o += w * i;
                    }
                }
            }
        }
    }
}

pub fn build_h_space_transfer(coarse: &LevelSpaces<'_>, fine: &LevelSpaces<'_>) -> Result<TransferPair> {
    if coarse.velocity.r() != fine.velocity.r() || coarse.velocity.level() + 1 != fine.velocity.level() {
        return Err(Error::InvalidArgument(
            "h transfer needs equal degrees on consecutive mesh levels".into(),
        ));
    }
    TransferPair::build(coarse, fine)
}

pub fn build_p_space_transfer(coarse: &LevelSpaces<'_>, fine: &LevelSpaces<'_>) -> Result<TransferPair> {
    if coarse.velocity.level() != fine.velocity.level() || coarse.velocity.r() != (fine.velocity.r() / 2).max(1) {
        return Err(Error::InvalidArgument(format!(
            "p transfer needs degree {} -> {} on one mesh level",
            fine.velocity.r(),
            (fine.velocity.r() / 2).max(1)
        )));
    }
    TransferPair::build(coarse, fine)
}

pub fn build_p_time_transfer(coarse: &TemporalMatrices, fine: &TemporalMatrices) -> Result<Vec<f64>> {
    if coarse.degree() >= fine.degree() {
        return Err(Error::InvalidArgument(
            "temporal p transfer needs a lower coarse degree".into(),
        ));
    }
    time_prolongation(coarse, fine)
}

pub fn apply_transfer(
    pair: &TransferPair,
    direction: Direction,
    x: &BlockVector,
    project_pressure: bool,
) -> Result<BlockVector> {
    let (src, dst) = match direction {
        Direction::Prolongate => (pair.coarse_layout, pair.fine_layout),
        Direction::Restrict => (pair.fine_layout, pair.coarse_layout),
    };
    check_len("apply_transfer", src.len(), x.as_slice().len())?;
    let mut out = BlockVector::zeros(dst);
    match direction {
        Direction::Prolongate => pair.prolongate(x.as_slice(), out.as_mut_slice(), project_pressure),
        Direction::Restrict => pair.restrict(x.as_slice(), out.as_mut_slice(), project_pressure),
    }
    Ok(out)
}
