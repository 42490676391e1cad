//! Gate checks shared by the acceptance runner and the oracle tests.

use super::*;
use hpstmg::dof_space::{PressureSpace, VelocitySpace};
use hpstmg::fe_basis::gauss_radau_right;
use hpstmg::harness::selftest::radau_iia_stability;
use hpstmg::hierarchy::{descriptors_for, HierarchyStrategy, Level};
use hpstmg::st_operator::assemble_spatial_oracle;
use hpstmg::time_basis::{dg_ode_step, temporal_matrices};
use hpstmg::vanka::PatchKind;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

/// Worst value seen per named quantity, in insertion order.
#[derive(Default)]
struct Worst(Vec<(String, f64)>);

impl Worst {
    fn record(&mut self, name: &str, value: f64) {
        match self.0.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = v.max(value),
            None => self.0.push((name.to_string(), value)),
        }
    }

    fn max(&self) -> f64 {
        self.0.iter().fold(0.0, |m, (_, v)| m.max(*v))
    }

    fn summary(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|(n, v)| format!("{n} {v:.1e}")).collect();
        parts.join(", ")
    }
}

pub fn quadrature() -> Check {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for n in 1..=6 {
        let rule = gauss_radau_right(n).unwrap();
        for degree in 0..=(2 * n - 2) {
            let exact = if degree % 2 == 0 {
                2.0 / (degree + 1) as f64
            } else {
                0.0
            };
            let err = (rule.integrate(|x| x.powi(degree as i32)) - exact).abs();
            worst = worst.max(err);
        }
    }
    let two = gauss_radau_right(2).unwrap();
    let node_err = max_abs_diff(&two.points, &[-1.0 / 3.0, 1.0]).max(max_abs_diff(&two.weights, &[1.5, 0.5]));
    let seconds = start.elapsed().as_secs_f64();
    Check::new(
        worst <= 1e-13 && node_err <= 1e-14 && seconds < 1.0,
        format!("monomial error {worst:.1e} (n <= 6), two-point rule error {node_err:.1e}, {seconds:.3} s"),
    )
}

/// `R(z) = 1 + z bᵀ (I − zA)^{-1} 1` from the collocation tableau on the
/// right Radau points of `[0, 1]`.
pub fn radau_tableau_stability(stages: usize, z: f64) -> f64 {
    let rule = gauss_radau_right(stages).unwrap();
    let c: Vec<f64> = rule.points.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let vandermonde = DMatrix::from_fn(stages, stages, |i, m| c[i].powi(m as i32));
    // column j holds the monomial coefficients of the j-th Lagrange polynomial
    let coef = vandermonde.try_inverse().unwrap();
    let primitive = |j: usize, t: f64| -> f64 {
        (0..stages)
            .map(|m| coef[(m, j)] * t.powi(m as i32 + 1) / (m + 1) as f64)
            .sum()
    };
    let a = DMatrix::from_fn(stages, stages, |i, j| primitive(j, c[i]));
    let b = DVector::from_fn(stages, |j, _| primitive(j, 1.0));
    let system = DMatrix::identity(stages, stages) - a * z;
    let stage = system.lu().solve(&DVector::from_element(stages, 1.0)).unwrap();
    1.0 + z * b.dot(&stage)
}

pub fn dg_radau() -> Check {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut pade = 0.0_f64;
    for k in 0..=3 {
        for z in [-0.1, -1.0, -4.0] {
            let dg = dg_ode_step(k, 1.0, z, 1.0).unwrap();
            let tableau = radau_tableau_stability(k + 1, z);
            worst = worst.max((dg - tableau).abs());
            pade = pade.max((tableau - radau_iia_stability(k + 1, z)).abs());
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Check::new(
        worst <= 1e-12 && pade <= 1e-12 && seconds < 1.0,
        format!("DG vs collocation {worst:.1e}, collocation vs Padé {pade:.1e}, {seconds:.3} s"),
    )
}

pub fn step_operator(cells_per_dim: usize, r: usize, k: usize) -> SpaceTimeOperator {
    let level = cells_per_dim.trailing_zeros() as usize;
    let mesh = unit_mesh(level + 1);
    let vspace = VelocitySpace::new(&mesh, level, r).unwrap();
    let pspace = PressureSpace::new(&mesh, level, r).unwrap();
    let temporal = temporal_matrices(k, 0.25).unwrap();
    SpaceTimeOperator::new(&vspace, &pspace, temporal, 0.1).unwrap()
}

const SAMPLES: usize = 10;

fn compare(worst: &mut Worst, name: &str, ours: &[f64], reference: &[f64]) {
    worst.record(name, relative_diff(ours, reference));
}

fn spatial_and_block_operators(worst: &mut Worst, op: &SpaceTimeOperator, seed: u64) {
    let mats = assemble_spatial_oracle(op.velocity_space(), op.pressure_space());
    let sparse = assemble_sparse_oracle(op).unwrap();
    let spatial = op.spatial();
    let layout = op.layout();
    let (nv, np, n) = (layout.nv, layout.np, layout.len());
    let mut rng = rng(seed);
    let left: Vec<f64> = (0..layout.slots)
        .map(|a| op.temporal().basis().value(a, -1.0))
        .collect();
    for _ in 0..SAMPLES {
        let v = random_vec(nv, &mut rng);
        let p = random_vec(np, &mut rng);
        let x = random_vec(n, &mut rng);
        let (mut ours, mut reference) = (vec![0.0; nv], vec![0.0; nv]);
        spatial.mass(&v, &mut ours);
        mats.mass.mul_vec(&v, &mut reference);
        compare(worst, "M", &ours, &reference);
        spatial.laplace(&v, &mut ours);
        mats.laplace.mul_vec(&v, &mut reference);
        compare(worst, "A", &ours, &reference);
        spatial.div_transpose(&p, &mut ours);
        mats.div.transpose().mul_vec(&p, &mut reference);
        compare(worst, "Bᵀ", &ours, &reference);
        let (mut ours_p, mut reference_p) = (vec![0.0; np], vec![0.0; np]);
        spatial.div(&v, &mut ours_p);
        mats.div.mul_vec(&v, &mut reference_p);
        compare(worst, "B", &ours_p, &reference_p);
        spatial.pressure_mass(&p, &mut ours_p);
        mats.pressure_mass.mul_vec(&p, &mut reference_p);
        compare(worst, "Mp", &ours_p, &reference_p);
        let (mut ours_x, mut reference_x) = (vec![0.0; n], vec![0.0; n]);
        op.apply_block(&x, &mut ours_x);
        sparse.mul_vec(&x, &mut reference_x);
        compare(worst, "D", &ours_x, &reference_x);
        let coupling = op.apply_coupling(&v).unwrap();
        mats.mass.mul_vec(&v, &mut reference);
        let mut expected = vec![0.0; n];
        for (a, w) in left.iter().enumerate() {
            for (e, m) in expected[layout.velocity(a)].iter_mut().zip(&reference) {
                *e = w * m;
            }
        }
        compare(worst, "C", coupling.as_slice(), &expected);
    }
}

fn vanka_sweep(worst: &mut Worst, op: &SpaceTimeOperator, kind: PatchKind, seed: u64) {
    let smoother = VankaSmoother::new(op, kind, 1.0, u64::MAX).unwrap();
    let dense = vanka_oracle(&dense_operator(op), &smoother);
    let mut rng = rng(seed);
    let n = op.layout().len();
    for _ in 0..SAMPLES {
        let r = random_vec(n, &mut rng);
        let mut ours = vec![0.0; n];
        smoother.apply_additive(&r, &mut ours);
        let reference = &dense * DVector::from_column_slice(&r);
        compare(worst, &format!("Vanka {}", kind.label()), &ours, reference.as_slice());
    }
}

/// Multigrid on the unit square with `2^fine` cells per direction.
pub fn multigrid(strategy: HierarchyStrategy, fine: usize, r: usize, k: usize, config: VCycleConfig) -> Multigrid {
    let levels = descriptors_for(strategy, fine, 0, r, k).unwrap();
    Multigrid::build(&levels, &unit_mesh(fine + 1), 0.1, 0.25, config).unwrap()
}

fn vcycle(worst: &mut Worst, mg: &Multigrid, seed: u64) {
    let dense = DenseMultigrid::new(mg);
    let top = mg.levels().len() - 1;
    let n = mg.finest().op.layout().len();
    let mut rng = rng(seed);
    for _ in 0..SAMPLES {
        let b = random_vec(n, &mut rng);
        let mut ours = vec![0.0; n];
        mg.cycle(top, &b, &mut ours);
        let reference = dense.cycle(top, &DVector::from_column_slice(&b));
        compare(worst, "V-cycle", &ours, reference.as_slice());
    }
}

pub fn matrix_free() -> Check {
    let start = Instant::now();
    let mut worst = Worst::default();
    let mut seed = 0;
    for cells in [2, 4] {
        for r in 1..=3 {
            for k in 0..=2 {
                seed += 1;
                let op = step_operator(cells, r, k);
                spatial_and_block_operators(&mut worst, &op, seed);
                if cells == 2 || k == 2 {
                    vanka_sweep(&mut worst, &op, PatchKind::Cell, seed);
                }
                if r == 1 || (cells == 2 && k == 1) {
                    vanka_sweep(&mut worst, &op, PatchKind::VertexStar, seed);
                }
            }
        }
    }
    let cell = VCycleConfig::default();
    let star = VCycleConfig {
        smoother: PatchKind::VertexStar,
        nu1: 2,
        ..cell
    };
    let hierarchies = [
        (HierarchyStrategy::SpatialHOnly, 2, 1, 1, cell),
        (HierarchyStrategy::HpSpaceTime, 1, 2, 2, cell),
        (HierarchyStrategy::HpSpaceTime, 2, 3, 2, cell),
        (HierarchyStrategy::HpSpaceTime, 1, 2, 1, star),
    ];
    for (strategy, fine, r, k, config) in hierarchies {
        seed += 1;
        vcycle(&mut worst, &multigrid(strategy, fine, r, k, config), seed);
    }
    let seconds = start.elapsed().as_secs_f64();
    Check::new(
        worst.max() <= 1e-12,
        format!("worst relative difference: {}; {seconds:.1} s", worst.summary()),
    )
}

/// Value of the space-time velocity and pressure at reference time `t_ref`.
fn evaluate(level: &Level, x: &[f64], t_ref: f64, point: [f64; 2]) -> [f64; 3] {
    let op = &level.op;
    let layout = op.layout();
    let mut out = [0.0; 3];
    for a in 0..layout.slots {
        let phi = op.temporal().basis().value(a, t_ref);
        let v = op.velocity_space().evaluate(&x[layout.velocity(a)], point);
        let p = op.pressure_space().evaluate(&x[layout.pressure(a)], point);
        out[0] += phi * v[0];
        out[1] += phi * v[1];
        out[2] += phi * p;
    }
    out
}

/// `∫∫ p` over the step in reference time.
fn pressure_integral(level: &Level, x: &[f64]) -> f64 {
    let op = &level.op;
    let layout = op.layout();
    let weights = &op.temporal().radau().weights;
    (0..layout.slots)
        .map(|a| weights[a] * op.pressure_space().integral(&x[layout.pressure(a)]))
        .sum()
}

fn table_c1() -> bool {
    let levels = descriptors_for(HierarchyStrategy::HpSpaceTime, 2, 0, 2, 2).unwrap();
    let rows: Vec<_> = levels
        .iter()
        .map(|d| (d.mesh_level, d.r, d.time_level, d.k, d.transfer.map(|t| t.label())))
        .collect();
    rows == vec![
        (0, 1, 0, 1, None),
        (1, 1, 0, 2, Some("h_space+p_time".to_string())),
        (2, 1, 0, 2, Some("h_space".to_string())),
        (2, 2, 0, 2, Some("p_space".to_string())),
    ]
}

pub fn transfers() -> Check {
    let start = Instant::now();
    let mut adjoint = 0.0_f64;
    let mut exactness = 0.0_f64;
    let mut mean = 0.0_f64;
    let mut kinds = Vec::new();
    let mut rng = rng(4242);
    let config = VCycleConfig::default();
    let hierarchies = [
        multigrid(HierarchyStrategy::HpSpaceTime, 2, 3, 2, config),
        multigrid(HierarchyStrategy::SpatialHOnly, 2, 2, 1, config),
    ];
    for mg in &hierarchies {
        for pair in mg.levels().windows(2) {
            let (coarse, fine) = (&pair[0], &pair[1]);
            let transfer = fine.transfer.as_ref().unwrap();
            kinds.push(transfer.kind().label());
            let prolongation = prolongation_dense(transfer);
            let restriction = restriction_dense(transfer);
            let coarse_fixed = boundary_rows(&coarse.op);
            let fine_fixed = boundary_rows(&fine.op);
            for i in (0..restriction.nrows()).filter(|i| !coarse_fixed.contains(i)) {
                for j in (0..restriction.ncols()).filter(|j| !fine_fixed.contains(j)) {
                    adjoint = adjoint.max((restriction[(i, j)] - prolongation[(j, i)]).abs());
                }
            }
            let mut xc = random_vec(coarse.op.layout().len(), &mut rng);
            coarse.op.zero_boundary(&mut xc);
            let mut xf = vec![0.0; fine.op.layout().len()];
            transfer.prolongate(&xc, &mut xf, false);
            let scale = max_abs(&xc);
            for _ in 0..50 {
                let t_ref = rng.random_range(-1.0..1.0);
                let point = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                let (vc, vf) = (evaluate(coarse, &xc, t_ref, point), evaluate(fine, &xf, t_ref, point));
                exactness = exactness.max(max_abs_diff(&vc, &vf) / scale);
            }
            mean = mean.max((pressure_integral(coarse, &xc) - pressure_integral(fine, &xf)).abs());
        }
    }
    kinds.sort();
    kinds.dedup();
    let c1 = table_c1();
    let seconds = start.elapsed().as_secs_f64();
    Check::new(
        adjoint == 0.0 && exactness <= 1e-12 && mean <= 1e-13 && c1,
        format!(
            "|R − Pᵀ| {adjoint:.1e}, exactness {exactness:.1e} at 50 points per pair, mean drift {mean:.1e}, \
             kinds [{}], level table {}; {seconds:.1} s",
            kinds.join(" "),
            if c1 { "reproduced" } else { "MISMATCH" }
        ),
    )
}
