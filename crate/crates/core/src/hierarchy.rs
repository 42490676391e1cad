//! hp space-time level sequences and their instantiation.
//!
//! A one-dimensional hierarchy (space or time) is a list of
//! `(refinement level, degree)` pairs, coarsest first. Degrees are halved at
//! the finest mesh before the mesh is coarsened. Spatial and temporal lists
//! are zipped level by level after padding the shorter one at its fine end.

use crate::dof_space::{PressureSpace, VelocitySpace};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::solver::{CoarseSolver, VCycleConfig};
use crate::st_operator::SpaceTimeOperator;
use crate::time_basis::temporal_matrices;
use crate::transfer::{LevelSpaces, TransferKind, TransferPair};
use crate::vanka::VankaSmoother;
use std::fmt;

/// Refinement level and polynomial degree, coarsest entry first.
pub type HierarchyEntry = (usize, usize);

pub fn construct_hierarchy(
    fine_level: usize,
    coarse_level: usize,
    p_fine: usize,
    p_coarse: usize,
) -> Result<Vec<HierarchyEntry>> {
    if coarse_level > fine_level {
        return Err(Error::InvalidArgument(format!(
            "coarse refinement level {coarse_level} is finer than {fine_level}"
        )));
    }
    if p_coarse == 0 || p_coarse > p_fine {
        return Err(Error::InvalidArgument(format!(
            "degree range {p_coarse}..{p_fine} is empty or starts at zero"
        )));
    }
    let mut list = Vec::new();
    let mut p = p_fine;
    while p > p_coarse {
        list.push((fine_level, p));
        p = (p / 2).max(p_coarse);
    }
    list.push((fine_level, p));
    for level in (coarse_level..fine_level).rev() {
        list.push((level, p));
    }
    list.reverse();
    Ok(list)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelDescriptor {
    pub index: usize,
    pub mesh_level: usize,
    pub time_level: usize,
    pub r: usize,
    pub k: usize,
    /// Transfer to level `index - 1`; `None` on the coarsest level.
    pub transfer: Option<TransferKind>,
}

pub fn combine_hierarchies(spatial: &[HierarchyEntry], temporal: &[HierarchyEntry]) -> Result<Vec<LevelDescriptor>> {
    let (Some(&s_last), Some(&t_last)) = (spatial.last(), temporal.last()) else {
        return Err(Error::InvalidArgument("cannot combine an empty hierarchy".into()));
    };
    let len = spatial.len().max(temporal.len());
    let mut out: Vec<LevelDescriptor> = Vec::with_capacity(len);
    for index in 0..len {
        let (mesh_level, r) = spatial.get(index).copied().unwrap_or(s_last);
        let (time_level, k) = temporal.get(index).copied().unwrap_or(t_last);
        let transfer = out.last().map(|prev| TransferKind {
            h_space: prev.mesh_level != mesh_level,
            p_space: prev.r != r,
            p_time: prev.k != k,
        });
        out.push(LevelDescriptor {
            index,
            mesh_level,
            time_level,
            r,
            k,
            transfer,
        });
    }
    Ok(out)
}

/// Which coarsening the multigrid hierarchy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyStrategy {
    /// Degree halving in space and time, then mesh coarsening.
    HpSpaceTime,
    /// Mesh coarsening only, at fixed degrees.
    SpatialHOnly,
}

/// Descriptors for a time-marching run (no temporal mesh coarsening).
pub fn descriptors_for(
    strategy: HierarchyStrategy,
    fine_level: usize,
    coarse_level: usize,
    r: usize,
    k: usize,
) -> Result<Vec<LevelDescriptor>> {
    let (r_min, k_min) = match strategy {
        HierarchyStrategy::HpSpaceTime => (1, 1.min(k)),
        HierarchyStrategy::SpatialHOnly => (r, k),
    };
    let spatial = construct_hierarchy(fine_level, coarse_level, r, r_min)?;
    let temporal = if k == 0 {
        vec![(0, 0)]
    } else {
        construct_hierarchy(0, 0, k, k_min)?
    };
    combine_hierarchies(&spatial, &temporal)
}

/// Human-readable level table.
pub struct HierarchyTable<'a>(pub &'a [LevelDescriptor]);

impl fmt::Display for HierarchyTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let finest = self.0.iter().map(|d| d.mesh_level).max().unwrap_or(0);
        writeln!(
            f,
            "{:>3}  {:>6}  {:>2}  {:>6}  {:>2}  transfer",
            "l", "h", "r", "tau", "k"
        )?;
        for d in self.0 {
            let factor = 1usize << (finest - d.mesh_level);
            let h = if factor == 1 {
                "h".to_string()
            } else {
                format!("{factor}h")
            };
            let transfer = d.transfer.map(|t| t.label()).unwrap_or_else(|| "direct".into());
            writeln!(
                f,
                "{:>3}  {:>6}  {:>2}  {:>6}  {:>2}  {}",
                d.index, h, d.r, "tau", d.k, transfer
            )?;
        }
        Ok(())
    }
}

/// Everything the V-cycle needs on one level.
#[derive(Debug)]
pub struct Level {
    pub descriptor: LevelDescriptor,
    pub op: SpaceTimeOperator,
    pub smoother: Option<VankaSmoother>,
    /// To the next coarser level.
    pub transfer: Option<TransferPair>,
    pub coarse: Option<CoarseSolver>,
}

pub fn instantiate_levels(
    descriptors: &[LevelDescriptor],
    mesh: &Mesh,
    nu: f64,
    tau: f64,
    config: &VCycleConfig,
) -> Result<Vec<Level>> {
    if descriptors.is_empty() {
        return Err(Error::InvalidArgument("no levels to instantiate".into()));
    }
    if descriptors.iter().any(|d| d.time_level != descriptors[0].time_level) {
        return Err(Error::InvalidArgument(
            "temporal mesh coarsening is not available with one subinterval per step".into(),
        ));
    }
    let mut levels: Vec<Level> = Vec::with_capacity(descriptors.len());
    for d in descriptors {
        let vspace = VelocitySpace::new(mesh, d.mesh_level, d.r)?;
        let pspace = PressureSpace::new(mesh, d.mesh_level, d.r)?;
        let temporal = temporal_matrices(d.k, tau)?;
        let transfer = match levels.last() {
            None => None,
            Some(prev) => {
                let coarse = LevelSpaces {
                    velocity: prev.op.velocity_space(),
                    pressure: prev.op.pressure_space(),
                    temporal: prev.op.temporal(),
                };
                let fine = LevelSpaces {
                    velocity: &vspace,
                    pressure: &pspace,
                    temporal: &temporal,
                };
                Some(TransferPair::build(&coarse, &fine)?)
            }
        };
        let op = SpaceTimeOperator::new(&vspace, &pspace, temporal, nu)?;
        let (smoother, coarse) = if d.index == 0 {
            (None, Some(CoarseSolver::new(&op, config.coarse_cap)?))
        } else {
            let s = VankaSmoother::new(&op, config.smoother, config.omega, config.patch_entry_cap)?;
            (Some(s), None)
        };
        levels.push(Level {
            descriptor: *d,
            op,
            smoother,
            transfer,
            coarse,
        });
    }
    Ok(levels)
}
