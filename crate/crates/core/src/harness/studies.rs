use super::config::{RunConfig, StrategyName};
use super::errors::{compute_errors, eoc, ErrorReport};
use super::problems::{manufactured_problem, CavityProblem, ManufacturedProblem};
use crate::error::{Error, Result};
use crate::hierarchy::{descriptors_for, HierarchyStrategy};
use crate::linalg::dot;
use crate::mesh::{DomainBox, Mesh};
use crate::solver::{time_march, KrylovConfig, MarchSummary, Multigrid, StokesProblem, VCycleConfig};
use crate::st_operator::{BlockVector, SpaceTimeOperator};
use crate::vanka::PatchKind;

/// Parameters of one time-marching run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSetup {
    pub r: usize,
    pub k: usize,
    pub refinements: usize,
    pub base_cells: usize,
    pub coarse_level: usize,
    pub nu: f64,
    pub strategy: HierarchyStrategy,
    pub vcycle: VCycleConfig,
    pub krylov: KrylovConfig,
}

impl RunSetup {
    pub fn from_config(config: &RunConfig) -> Self {
        Self {
            r: config.discretization.r,
            k: config.k(),
            refinements: config.mesh.refinements,
            base_cells: config.mesh.base_cells,
            coarse_level: config.mg.coarse_level,
            nu: config.problem.nu,
            strategy: config.mg.hierarchy.strategy(),
            vcycle: config.mg.vcycle(),
            krylov: config.gmres.krylov(),
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::build_cartesian(
            DomainBox::UNIT_SQUARE,
            [self.base_cells, self.base_cells],
            self.refinements + 1,
        )
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.base_cells << self.refinements) as f64
    }

    pub fn multigrid(&self, mesh: &Mesh, tau: f64) -> Result<Multigrid> {
        let levels = descriptors_for(self.strategy, self.refinements, self.coarse_level, self.r, self.k)?;
        Multigrid::build(&levels, mesh, self.nu, tau, self.vcycle)
    }
}

/// Worst saddle-point residuals seen over all converged steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepChecks {
    /// `max_a ‖B V^a‖ / ‖V^a‖_M`
    pub div_ratio: f64,
    /// `max_a |⟨P^a, M^p 1⟩| / ‖P^a‖`
    pub mean_ratio: f64,
}

impl StepChecks {
    pub fn observe(&mut self, op: &SpaceTimeOperator, x: &BlockVector) {
        let (div, mean) = saddle_point_residuals(op, x);
        self.div_ratio = self.div_ratio.max(div);
        self.mean_ratio = self.mean_ratio.max(mean);
    }
}

/// Discrete divergence and pressure mean of every temporal dof, relative to
/// the velocity mass norm and the pressure coefficient norm.
pub fn saddle_point_residuals(op: &SpaceTimeOperator, x: &BlockVector) -> (f64, f64) {
    let spatial = op.spatial();
    let layout = op.layout();
    let mut div = vec![0.0; layout.np];
    let mut mv = vec![0.0; layout.nv];
    let mut worst = (0.0_f64, 0.0_f64);
    for a in 0..layout.slots {
        let v = x.velocity(a);
        spatial.div(v, &mut div);
        spatial.mass(v, &mut mv);
        let vnorm = dot(v, &mv).sqrt();
        let dnorm = dot(&div, &div).sqrt();
        if dnorm > 0.0 {
            worst.0 = worst.0.max(dnorm / vnorm.max(f64::MIN_POSITIVE));
        }
        let p = x.pressure(a);
        let pnorm = dot(p, p).sqrt();
        let mean = dot(p, op.pressure_space().mean_vector()).abs();
        if mean > 0.0 {
            worst.1 = worst.1.max(mean / pnorm.max(f64::MIN_POSITIVE));
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct MarchRun {
    pub h: f64,
    pub tau: f64,
    pub steps: usize,
    pub errors: Option<ErrorReport>,
    pub summary: MarchSummary,
    pub checks: StepChecks,
    /// Σ n_T² of the finest-level smoother.
    pub sum_nt2: u64,
}

/// Runs the manufactured problem with `τ = h` unless `steps` is given;
/// `max_steps` truncates the march (errors are then not computed).
pub fn run_manufactured(
    setup: &RunSetup,
    problem: &ManufacturedProblem,
    steps: Option<usize>,
    max_steps: Option<usize>,
    with_errors: bool,
) -> Result<MarchRun> {
    let h = setup.h();
    let steps = steps.unwrap_or_else(|| (problem.t_end / h).round().max(1.0) as usize);
    let tau = problem.t_end / steps as f64;
    let marched = max_steps.map_or(steps, |m| m.clamp(1, steps));
    let mesh = setup.mesh()?;
    let mg = setup.multigrid(&mesh, tau)?;
    let mut checks = StepChecks::default();
    let mut trajectory = Vec::new();
    let keep = with_errors && marched == steps;
    let summary = time_march(problem, &mg, marched, 0.0, &setup.krylov, &mut |view| {
        checks.observe(view.op, view.solution);
        if keep {
            trajectory.push(view.solution.clone());
        }
        Ok(())
    })?;
    let errors = if keep {
        Some(compute_errors(problem, &mg.finest().op, &trajectory, 0.0)?)
    } else {
        None
    };
    Ok(MarchRun {
        h,
        tau,
        steps: marched,
        errors,
        summary,
        checks,
        sum_nt2: mg.finest().smoother.as_ref().map_or(0, |s| s.stats().sum_nt2),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub r: usize,
    pub c: usize,
    pub h: f64,
    pub errors: ErrorReport,
    /// EOC against the previous row of the same degree: v L2, p L2, v H1, div.
    pub eoc: Option<[f64; 4]>,
    pub average_iterations: f64,
}

pub fn convergence_csv_header() -> &'static str {
    "r,c,h,e_v_L2,eoc,e_p_L2,eoc,e_v_H1,eoc,e_div,eoc"
}

impl ConvergenceRow {
    pub fn csv(&self) -> String {
        let e = self.errors;
        let o = |i: usize| self.eoc.map_or(String::from("-"), |v| format!("{:.2}", v[i]));
        format!(
            "{},{},{},{:.5e},{},{:.5e},{},{:.5e},{},{:.5e},{}",
            self.r,
            self.c,
            self.h,
            e.v_l2,
            o(0),
            e.p_l2,
            o(1),
            e.v_h1,
            o(2),
            e.div_l2,
            o(3)
        )
    }
}

/// Manufactured-solution errors for every `r` in the list (`k = r`) and
/// every refinement count, `τ = h`.
pub fn convergence_study(config: &RunConfig, r_list: &[usize], c_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut problem = manufactured_problem();
    problem.nu = config.problem.nu;
    if let Some(t) = config.problem.t_end {
        problem.t_end = t;
    }
    let mut rows = Vec::new();
    for &r in r_list {
        let mut prev: Option<ErrorReport> = None;
        for &c in c_list {
            let setup = RunSetup {
                r,
                k: r,
                refinements: c,
                coarse_level: config.mg.coarse_level.min(c),
                ..RunSetup::from_config(config)
            };
            let run = run_manufactured(&setup, &problem, config.problem.steps, None, true)?;
            let errors = run.errors.expect("full march keeps the trajectory");
            let rates = prev.map(|p| {
                [
                    eoc(p.v_l2, errors.v_l2),
                    eoc(p.p_l2, errors.p_l2),
                    eoc(p.v_h1, errors.v_h1),
                    eoc(p.div_l2, errors.div_l2),
                ]
            });
            rows.push(ConvergenceRow {
                r,
                c,
                h: run.h,
                errors,
                eoc: rates,
                average_iterations: run.summary.average_iterations,
            });
            prev = Some(errors);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRow {
    pub r: usize,
    pub c: usize,
    pub smoother: PatchKind,
    pub hierarchy: StrategyName,
    pub n_sm: usize,
    pub avg_iters: f64,
    pub sum_nt2: u64,
}

pub fn robustness_csv_header() -> &'static str {
    "r,c,smoother,hierarchy,n_sm,avg_iters,sum_nT2"
}

impl RobustnessRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.2},{}",
            self.r,
            self.c,
            self.smoother.label(),
            self.hierarchy.label(),
            self.n_sm,
            self.avg_iters,
            self.sum_nt2
        )
    }
}

/// Average GMRES iterations per step on the manufactured problem over the
/// product of the study lists.
pub fn robustness_sweep(config: &RunConfig) -> Result<Vec<RobustnessRow>> {
    let study = &config.study;
    let mut problem = manufactured_problem();
    problem.nu = config.problem.nu;
    let mut rows = Vec::new();
    for &r in &study.r_list {
        for &c in &study.c_list {
            for &smoother in &study.smoothers {
                for &hierarchy in &study.hierarchies {
                    for &n_sm in &study.n_sm_list {
                        let base = RunSetup::from_config(config);
                        let setup = RunSetup {
                            r,
                            k: r,
                            refinements: c,
                            coarse_level: config.mg.coarse_level.min(c),
                            strategy: hierarchy.strategy(),
                            vcycle: VCycleConfig {
                                nu1: n_sm,
                                nu2: n_sm,
                                smoother,
                                ..base.vcycle
                            },
                            ..base
                        };
                        let run = run_manufactured(&setup, &problem, config.problem.steps, study.max_steps, false)?;
                        rows.push(RobustnessRow {
                            r,
                            c,
                            smoother,
                            hierarchy,
                            n_sm,
                            avg_iters: run.summary.average_iterations,
                            sum_nt2: run.sum_nt2,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub const CAVITY_PROBES: [[f64; 2]; 2] = [[0.875, 0.125], [0.875, 0.875]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySample {
    pub t: f64,
    pub p_probe1: f64,
    pub p_probe2: f64,
    /// `None` when the first probe pressure is below 1e-12 in magnitude.
    pub p_diff: Option<f64>,
}

pub fn cavity_csv_header() -> &'static str {
    "t,p_probe1,p_probe2,p_diff"
}

impl CavitySample {
    pub fn csv(&self) -> String {
        let d = self.p_diff.map_or(String::from("nan"), |v| format!("{v:.8e}"));
        format!("{},{:.8e},{:.8e},{}", self.t, self.p_probe1, self.p_probe2, d)
    }
}

#[derive(Debug, Clone)]
pub struct CavityRun {
    pub trace: Vec<CavitySample>,
    pub summary: MarchSummary,
    pub checks: StepChecks,
    pub sum_nt2: u64,
}

/// Default step count of the cavity run: 16 subintervals on the unrefined
/// time axis, halved with every spatial refinement.
pub fn cavity_steps(refinements: usize) -> usize {
    16 << refinements
}

/// Lid-driven cavity on `[0, T]`, sampling the probe pressures at every
/// step endpoint. `max_steps` truncates the run.
pub fn cavity_demo_2d(
    setup: &RunSetup,
    problem: &CavityProblem,
    steps: Option<usize>,
    max_steps: Option<usize>,
) -> Result<CavityRun> {
    let steps = steps.unwrap_or_else(|| cavity_steps(setup.refinements));
    if steps == 0 {
        return Err(Error::InvalidArgument("cavity run needs at least one step".into()));
    }
    let tau = problem.t_end / steps as f64;
    let marched = max_steps.map_or(steps, |m| m.clamp(1, steps));
    let mesh = setup.mesh()?;
    let mg = setup.multigrid(&mesh, tau)?;
    let mut trace = Vec::with_capacity(marched);
    let mut checks = StepChecks::default();
    let summary = time_march(
        problem as &dyn StokesProblem,
        &mg,
        marched,
        0.0,
        &setup.krylov,
        &mut |view| {
            checks.observe(view.op, view.solution);
            let last = view.op.layout().slots - 1;
            let pspace = view.op.pressure_space();
            let p = view.solution.pressure(last);
            let p1 = pspace.evaluate(p, CAVITY_PROBES[0]);
            let p2 = pspace.evaluate(p, CAVITY_PROBES[1]);
            trace.push(CavitySample {
                t: view.t_start + tau,
                p_probe1: p1,
                p_probe2: p2,
                p_diff: (p1.abs() >= 1e-12).then(|| (p1 - p2) / p1),
            });
            Ok(())
        },
    )?;
    Ok(CavityRun {
        trace,
        summary,
        checks,
        sum_nt2: mg.finest().smoother.as_ref().map_or(0, |s| s.stats().sum_nt2),
    })
}
