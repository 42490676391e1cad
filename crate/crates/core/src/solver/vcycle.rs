use super::gmres::Preconditioner;
use crate::error::{check_len, Error, Result};
use crate::hierarchy::{instantiate_levels, Level, LevelDescriptor};
use crate::mesh::Mesh;
use crate::vanka::PatchKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VCycleConfig {
    pub nu1: usize,
    pub nu2: usize,
    pub omega: f64,
    pub smoother: PatchKind,
    /// Largest level-0 system handed to the dense direct solver.
    pub coarse_cap: usize,
    /// Largest Σ n_T² per level for the Vanka patch matrices.
    pub patch_entry_cap: u64,
    /// Mean-zero projection of the pressure after every transfer.
    pub project_pressure: bool,
}

impl Default for VCycleConfig {
    fn default() -> Self {
        Self {
            nu1: 1,
            nu2: 1,
            omega: 0.9,
            smoother: PatchKind::Cell,
            coarse_cap: 50_000,
            patch_entry_cap: 400_000_000,
            project_pressure: true,
        }
    }
}

impl VCycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu1 == 0 || self.nu2 == 0 {
            return Err(Error::InvalidArgument(
                "smoothing step counts must be at least 1".into(),
            ));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "relaxation {} outside (0, 1]",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Instantiated level hierarchy, finest level last.
#[derive(Debug)]
pub struct Multigrid {
    levels: Vec<Level>,
    config: VCycleConfig,
}

impl Multigrid {
    pub fn build(
        descriptors: &[LevelDescriptor],
        mesh: &Mesh,
        nu: f64,
        tau: f64,
        config: VCycleConfig,
    ) -> Result<Self> {
        config.validate()?;
        let levels = instantiate_levels(descriptors, mesh, nu, tau, &config)?;
        Ok(Self { levels, config })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().expect("at least one level")
    }

    pub fn config(&self) -> &VCycleConfig {
        &self.config
    }

    /// One V-cycle from a zero initial guess on `level`.
    pub fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        let lvl = &self.levels[level];
        let op = &lvl.op;
        if let Some(coarse) = &lvl.coarse {
            coarse.solve(op, b, x);
            return;
        }
        let smoother = lvl.smoother.as_ref().expect("smoother above level 0");
        let transfer = lvl.transfer.as_ref().expect("transfer above level 0");
        let cfg = &self.config;
        x.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..cfg.nu1 {
            smoother.smooth_step(op, b, x);
        }
        let n = x.len();
        let mut residual = vec![0.0; n];
        op.apply_block(x, &mut residual);
        for (r, bi) in residual.iter_mut().zip(b) {
            *r = bi - *r;
        }
        let nc = transfer.coarse_layout().len();
        let mut coarse_rhs = vec![0.0; nc];
        transfer.restrict(&residual, &mut coarse_rhs, cfg.project_pressure);
        let mut coarse_x = vec![0.0; nc];
        self.cycle(level - 1, &coarse_rhs, &mut coarse_x);
        let mut correction = vec![0.0; n];
        transfer.prolongate(&coarse_x, &mut correction, cfg.project_pressure);
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi += ci;
        }
        for _ in 0..cfg.nu2 {
            smoother.smooth_step(op, b, x);
        }
    }
}

impl Preconditioner for Multigrid {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(self.levels.len() - 1, r, z);
    }
}

/// Checked single V-cycle on `level`, returning the new iterate.
pub fn v_cycle(mg: &Multigrid, level: usize, b: &[f64]) -> Result<Vec<f64>> {
    if level >= mg.levels.len() {
        return Err(Error::InvalidArgument(format!("level {level} not in hierarchy")));
    }
    let n = mg.levels[level].op.layout().len();
    check_len("v_cycle", n, b.len())?;
    let mut x = vec![0.0; n];
    mg.cycle(level, b, &mut x);
    Ok(x)
}
