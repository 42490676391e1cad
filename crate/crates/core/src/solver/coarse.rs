use crate::error::{Error, Result};
use crate::st_operator::SpaceTimeOperator;
use crate::vanka::{PatchAssembler, PatchFactorization};

/// Dense LU of the whole coarsest-level system. The pressure constant is
/// fixed by pinning one dof per slot and removed again by a mean shift.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    factor: PatchFactorization,
    n: usize,
}

impl CoarseSolver {
    pub fn new(op: &SpaceTimeOperator, cap: usize) -> Result<Self> {
        let n = op.layout().len();
        if n > cap {
            return Err(Error::ResourceLimit {
                what: "coarse direct solve dofs",
                requested: n,
                cap,
            });
        }
        let cells: Vec<usize> = (0..op.velocity_space().n_cells()).collect();
        let pm = PatchAssembler::new(op).assemble(&cells);
        let factor = PatchFactorization::factor(pm, "coarse direct solve")?;
        Ok(Self { factor, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unknowns actually factorized (free velocity and all pressure).
    pub fn factorized_size(&self) -> usize {
        self.factor.n()
    }

    /// `x = S^{-1} b`, mean-zero in every pressure slot. Constrained
    /// velocity rows of `S` are the identity, so `x` copies `b` there.
    pub fn solve(&self, op: &SpaceTimeOperator, b: &[f64], x: &mut [f64]) {
        let mut local: Vec<f64> = self.factor.dofs.iter().map(|&d| b[d]).collect();
        let mut scratch = Vec::new();
        self.factor.solve_in_place(&mut local, &mut scratch);
        x.iter_mut().for_each(|v| *v = 0.0);
        for (&d, v) in self.factor.dofs.iter().zip(local) {
            x[d] = v;
        }
        let layout = op.layout();
        for slot in 0..layout.slots {
            let base = layout.velocity(slot).start;
            for &d in op.boundary_dofs() {
                x[base + d] = b[base + d];
            }
        }
        op.project_pressure(x);
    }
}
