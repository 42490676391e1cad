use super::gmres::{gmres, KrylovConfig};
use super::vcycle::Multigrid;
use crate::error::{Error, Result};
use crate::st_operator::{BlockVector, SpaceTimeOperator};
use std::time::Instant;

/// Data of a nonstationary Stokes problem on the unit square.
pub trait StokesProblem {
    fn forcing(&self, t: f64, x: [f64; 2]) -> [f64; 2];

    /// Dirichlet velocity; only consulted when [`has_boundary_data`](Self::has_boundary_data) is true.
    fn boundary_velocity(&self, _t: f64, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn has_boundary_data(&self) -> bool {
        false
    }

    fn initial_velocity(&self, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// What the per-step observer sees after a converged step.
pub struct StepView<'a> {
    /// 1-based step number.
    pub step: usize,
    pub t_start: f64,
    pub op: &'a SpaceTimeOperator,
    pub solution: &'a BlockVector,
    pub iterations: usize,
    pub residual: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t_end: f64,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct MarchSummary {
    pub records: Vec<StepRecord>,
    pub average_iterations: f64,
    pub total_seconds: f64,
    /// Unknowns per step system.
    pub dofs: usize,
    /// Unknowns solved per second of wall time.
    pub throughput: f64,
    /// Velocity at the final time.
    pub final_velocity: Vec<f64>,
}

impl MarchSummary {
    pub fn csv_header() -> &'static str {
        "step,t_end,iterations,residual,seconds"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{:e},{:.6}",
                    r.step, r.t_end, r.iterations, r.residual, r.seconds
                )
            })
            .collect()
    }

    pub fn summary_row(&self) -> String {
        format!(
            "summary,avg_iterations={:.3},steps={},dofs={},seconds={:.3},throughput={:.3e}",
            self.average_iterations,
            self.records.len(),
            self.dofs,
            self.total_seconds,
            self.throughput
        )
    }
}

/// Marches `steps` subintervals of length τ from `t_start`, solving each
/// local space-time system by GMRES preconditioned with one V-cycle.
pub fn time_march(
    problem: &dyn StokesProblem,
    mg: &Multigrid,
    steps: usize,
    t_start: f64,
    krylov: &KrylovConfig,
    observer: &mut dyn FnMut(&StepView<'_>) -> Result<()>,
) -> Result<MarchSummary> {
    if steps == 0 {
        return Err(Error::InvalidArgument("time marching needs at least one step".into()));
    }
    let op = &mg.finest().op;
    let layout = op.layout();
    let vspace = op.velocity_space();
    let tau = op.temporal().tau();
    let mut v_prev = vspace.interpolate(|x| problem.initial_velocity(x));
    let mut records = Vec::with_capacity(steps);
    let start = Instant::now();
    let mut lifted = vec![0.0; layout.len()];

    for step in 1..=steps {
        let step_clock = Instant::now();
        let t0 = t_start + (step - 1) as f64 * tau;
        let mut rhs = op.assemble_rhs(&|t, x| problem.forcing(t, x), t0);
        let coupling = op.apply_coupling(&v_prev)?;
        for (r, c) in rhs.as_mut_slice().iter_mut().zip(coupling.as_slice()) {
            *r += c;
        }
        let mut lift = BlockVector::zeros(layout);
        if problem.has_boundary_data() {
            for (a, &t) in op.temporal().node_times(t0).iter().enumerate() {
                vspace.set_boundary(lift.velocity_mut(a), |x| problem.boundary_velocity(t, x));
            }
            op.apply_unconstrained(lift.as_slice(), &mut lifted);
            for (r, l) in rhs.as_mut_slice().iter_mut().zip(&lifted) {
                *r -= l;
            }
        }
        op.zero_boundary(rhs.as_mut_slice());

        let outcome = gmres(op, mg, rhs.as_slice(), None, krylov)?;
        let mut x = outcome.x;
        op.project_pressure(&mut x);
        for (xi, l) in x.iter_mut().zip(lift.as_slice()) {
            *xi += l;
        }
        let solution = BlockVector::from_vec(layout, x)?;
        v_prev.copy_from_slice(solution.velocity(layout.slots - 1));
        observer(&StepView {
            step,
            t_start: t0,
            op,
            solution: &solution,
            iterations: outcome.iterations,
            residual: outcome.final_residual,
            target: outcome.target,
        })?;
        records.push(StepRecord {
            step,
            t_end: t0 + tau,
            iterations: outcome.iterations,
            residual: outcome.final_residual,
            seconds: step_clock.elapsed().as_secs_f64(),
        });
    }

    let total_seconds = start.elapsed().as_secs_f64();
    let average_iterations = records.iter().map(|r| r.iterations as f64).sum::<f64>() / steps as f64;
    let dofs = layout.len();
    Ok(MarchSummary {
        records,
        average_iterations,
        total_seconds,
        dofs,
        throughput: (dofs * steps) as f64 / total_seconds.max(f64::MIN_POSITIVE),
        final_velocity: v_prev,
    })
}
