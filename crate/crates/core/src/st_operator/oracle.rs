//! Explicitly assembled matrices, built by plain 2D quadrature with full
//! basis evaluation at every point. Used to check the matrix-free kernels.

use super::SpaceTimeOperator;
use crate::dof_space::{PressureSpace, VelocitySpace};
use crate::error::{Error, Result};
use crate::fe_basis::gauss_rule;
use crate::linalg::CsrMatrix;

/// Largest space-time system the oracle agrees to assemble.
pub const ORACLE_DOF_LIMIT: usize = 200_000;

#[derive(Debug, Clone)]
pub struct SpatialMatrices {
    pub mass: CsrMatrix,
    pub laplace: CsrMatrix,
    /// `n_p x n_v`
    pub div: CsrMatrix,
    pub pressure_mass: CsrMatrix,
}

pub fn assemble_spatial_oracle(vspace: &VelocitySpace, pspace: &PressureSpace) -> SpatialMatrices {
    let mesh = vspace.mesh();
    let level = vspace.level();
    let basis = vspace.basis();
    let pbasis = pspace.basis();
    let n1 = basis.n();
    let nloc = n1 * n1;
    let npd = pbasis.n();
    let ns = vspace.n_scalar();
    let nv = vspace.n_dofs();
    let np = pspace.n_dofs();
    let rule = gauss_rule(vspace.degree() + 2).expect("nonzero rule");
    let h = mesh.cell_size(level);
    let jac = 0.25 * h[0] * h[1];
    let mut mass_t = Vec::new();
    let mut lap_t = Vec::new();
    let mut div_t = Vec::new();
    let mut pm_t = Vec::new();
    for cell in 0..mesh.n_cells(level) {
        let dofs = vspace.cell_scalar_dofs(cell);
        let mut m_loc = vec![0.0; nloc * nloc];
        let mut a_loc = vec![0.0; nloc * nloc];
        let mut b_loc = vec![0.0; npd * 2 * nloc];
        let mut pm_loc = vec![0.0; npd * npd];
        for (qy, &ey) in rule.points.iter().enumerate() {
            for (qx, &ex) in rule.points.iter().enumerate() {
                let w = rule.weights[qx] * rule.weights[qy] * jac;
                let phi: Vec<f64> = (0..nloc)
                    .map(|l| basis.value(l % n1, ex) * basis.value(l / n1, ey))
                    .collect();
                let grad: Vec<[f64; 2]> = (0..nloc)
                    .map(|l| {
                        [
                            basis.derivative(l % n1, ex) * basis.value(l / n1, ey) * 2.0 / h[0],
                            basis.value(l % n1, ex) * basis.derivative(l / n1, ey) * 2.0 / h[1],
                        ]
                    })
                    .collect();
                let psi: Vec<f64> = (0..npd).map(|m| pbasis.value(m, &[ex, ey])).collect();
                for i in 0..nloc {
                    for j in 0..nloc {
                        m_loc[i * nloc + j] += w * phi[i] * phi[j];
                        a_loc[i * nloc + j] += w * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
                    }
                }
                for m in 0..npd {
                    for j in 0..nloc {
                        b_loc[m * 2 * nloc + j] += w * psi[m] * grad[j][0];
                        b_loc[m * 2 * nloc + nloc + j] += w * psi[m] * grad[j][1];
                    }
                    for n in 0..npd {
                        pm_loc[m * npd + n] += w * psi[m] * psi[n];
                    }
                }
            }
        }
        for comp in 0..2 {
            for i in 0..nloc {
                for j in 0..nloc {
                    let (gi, gj) = (comp * ns + dofs[i], comp * ns + dofs[j]);
                    mass_t.push((gi, gj, m_loc[i * nloc + j]));
                    lap_t.push((gi, gj, a_loc[i * nloc + j]));
                }
            }
        }
        let prange = pspace.cell_dofs(cell);
        for m in 0..npd {
            for comp in 0..2 {
                for j in 0..nloc {
                    div_t.push((
                        prange.start + m,
                        comp * ns + dofs[j],
                        b_loc[m * 2 * nloc + comp * nloc + j],
                    ));
                }
            }
            for n in 0..npd {
                pm_t.push((prange.start + m, prange.start + n, pm_loc[m * npd + n]));
            }
        }
    }
    SpatialMatrices {
        mass: CsrMatrix::from_triplets(nv, nv, mass_t),
        laplace: CsrMatrix::from_triplets(nv, nv, lap_t),
        div: CsrMatrix::from_triplets(np, nv, div_t),
        pressure_mass: CsrMatrix::from_triplets(np, np, pm_t),
    }
}

/// The full step matrix with the same Dirichlet elimination as
/// [`SpaceTimeOperator::apply_block`].
pub fn assemble_sparse_oracle(op: &SpaceTimeOperator) -> Result<CsrMatrix> {
    let layout = op.layout();
    if layout.len() > ORACLE_DOF_LIMIT {
        return Err(Error::ResourceLimit {
            what: "assembled space-time oracle",
            requested: layout.len(),
            cap: ORACLE_DOF_LIMIT,
        });
    }
    let vspace = op.velocity_space();
    let mats = assemble_spatial_oracle(vspace, op.pressure_space());
    let div_t = mats.div.transpose();
    let stiff = &op.temporal().stiffness;
    let tmass = &op.temporal().mass;
    let nu = op.nu();
    let nv = layout.nv;
    let mut triplets = Vec::new();
    for a in 0..layout.slots {
        for i in 0..nv {
            let row = layout.velocity(a).start + i;
            if vspace.is_boundary(i) {
                triplets.push((row, row, 1.0));
                continue;
            }
            for b in 0..layout.slots {
                let (kab, mab) = (stiff.get(a, b), tmass.get(a, b));
                let vcol = layout.velocity(b).start;
                for (j, m) in mats.mass.row(i) {
                    if !vspace.is_boundary(j) {
                        triplets.push((row, vcol + j, kab * m));
                    }
                }
                for (j, l) in mats.laplace.row(i) {
                    if !vspace.is_boundary(j) {
                        triplets.push((row, vcol + j, mab * nu * l));
                    }
                }
                let pcol = layout.pressure(b).start;
                for (l, bt) in div_t.row(i) {
                    triplets.push((row, pcol + l, -mab * bt));
                }
            }
        }
        for l in 0..layout.np {
            let row = layout.pressure(a).start + l;
            for b in 0..layout.slots {
                let mab = tmass.get(a, b);
                let vcol = layout.velocity(b).start;
                for (j, d) in mats.div.row(l) {
                    if !vspace.is_boundary(j) {
                        triplets.push((row, vcol + j, -mab * d));
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(layout.len(), layout.len(), triplets))
}
