//! Quick oracle checks run by the `selftest` subcommand.

use crate::dof_space::{PressureSpace, VelocitySpace};
use crate::error::Result;
use crate::fe_basis::gauss_radau_right;
use crate::hierarchy::{combine_hierarchies, construct_hierarchy};
use crate::linalg::{dot, LinearOperator};
use crate::mesh::Mesh;
use crate::st_operator::{assemble_sparse_oracle, SpaceTimeOperator};
use crate::time_basis::{dg_ode_step, temporal_matrices};
use crate::transfer::{LevelSpaces, TransferPair};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Stability function of the `stages`-stage Radau IIA method, the
/// `(stages−1, stages)` Padé approximant of `exp(z)`.
pub fn radau_iia_stability(stages: usize, z: f64) -> f64 {
    let (m, n) = (stages - 1, stages);
    let total = factorial(m + n);
    let num: f64 = (0..=m)
        .map(|j| factorial(m + n - j) * factorial(m) / (total * factorial(j) * factorial(m - j)) * z.powi(j as i32))
        .sum();
    let den: f64 = (0..=n)
        .map(|j| factorial(m + n - j) * factorial(n) / (total * factorial(j) * factorial(n - j)) * (-z).powi(j as i32))
        .sum();
    num / den
}

/// Deterministic pseudo-random values in (-1, 1).
fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

fn check(name: &'static str, err: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: err <= tol,
        detail: format!("max error {err:.3e} (tolerance {tol:.0e})"),
    }
}

fn radau_rule() -> Result<CheckResult> {
    let rule = gauss_radau_right(2)?;
    let err = [
        (rule.points[0] + 1.0 / 3.0).abs(),
        (rule.points[1] - 1.0).abs(),
        (rule.weights[0] - 1.5).abs(),
        (rule.weights[1] - 0.5).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(check("two-point right Radau rule", err, 1e-14))
}

fn dg_radau() -> Result<CheckResult> {
    let mut err: f64 = 0.0;
    for k in 0..=3 {
        for z in [-0.1, -1.0, -4.0] {
            let y = dg_ode_step(k, 1.0, z, 1.0)?;
            err = err.max((y - radau_iia_stability(k + 1, z)).abs());
        }
    }
    Ok(check("DG(k) endpoint equals Radau IIA", err, 1e-12))
}

fn operator_oracle() -> Result<CheckResult> {
    let mesh = Mesh::unit_square_refined(1);
    let mut err: f64 = 0.0;
    for (r, k) in [(1, 1), (2, 0)] {
        let v = VelocitySpace::new(&mesh, 1, r)?;
        let p = PressureSpace::new(&mesh, 1, r)?;
        let op = SpaceTimeOperator::new(&v, &p, temporal_matrices(k, 0.3)?, 0.1)?;
        let oracle = assemble_sparse_oracle(&op)?;
        let x = pseudo_random(op.dim(), 7 + r as u64);
        let mut y = vec![0.0; op.dim()];
        let mut z = vec![0.0; op.dim()];
        op.apply(&x, &mut y);
        oracle.mul_vec(&x, &mut z);
        let scale = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        err = err.max(y.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale);
    }
    Ok(check("matrix-free operator equals assembled oracle", err, 1e-12))
}

fn transfer_adjoint() -> Result<CheckResult> {
    let mesh = Mesh::unit_square_refined(2);
    let tc = temporal_matrices(1, 0.5)?;
    let tf = temporal_matrices(2, 0.5)?;
    let (vc, pc) = (VelocitySpace::new(&mesh, 1, 1)?, PressureSpace::new(&mesh, 1, 1)?);
    let (vf, pf) = (VelocitySpace::new(&mesh, 2, 1)?, PressureSpace::new(&mesh, 2, 1)?);
    let pair = TransferPair::build(
        &LevelSpaces {
            velocity: &vc,
            pressure: &pc,
            temporal: &tc,
        },
        &LevelSpaces {
            velocity: &vf,
            pressure: &pf,
            temporal: &tf,
        },
    )?;
    let mut xc = pseudo_random(pair.coarse_layout().len(), 3);
    let mut yf = pseudo_random(pair.fine_layout().len(), 4);
    let zero_bd = |x: &mut [f64], space: &VelocitySpace, slots: usize, nv: usize| {
        for s in 0..slots {
            space.zero_boundary(&mut x[s * nv..(s + 1) * nv]);
        }
    };
    zero_bd(&mut xc, &vc, pair.coarse_layout().slots, pair.coarse_layout().nv);
    zero_bd(&mut yf, &vf, pair.fine_layout().slots, pair.fine_layout().nv);
    let mut pxc = vec![0.0; yf.len()];
    let mut ryf = vec![0.0; xc.len()];
    pair.prolongate(&xc, &mut pxc, false);
    pair.restrict(&yf, &mut ryf, false);
    let (a, b) = (dot(&pxc, &yf), dot(&xc, &ryf));
    Ok(check(
        "restriction is the adjoint of prolongation",
        (a - b).abs() / a.abs().max(1.0),
        1e-13,
    ))
}

fn hierarchy_table() -> Result<CheckResult> {
    let spatial = construct_hierarchy(2, 0, 2, 1)?;
    let temporal = construct_hierarchy(0, 0, 2, 1)?;
    let got: Vec<_> = combine_hierarchies(&spatial, &temporal)?
        .iter()
        .map(|d| (d.mesh_level, d.r, d.time_level, d.k))
        .collect();
    let want = vec![(0, 1, 0, 1), (1, 1, 0, 2), (2, 1, 0, 2), (2, 2, 0, 2)];
    Ok(CheckResult {
        name: "four-level hp hierarchy",
        passed: got == want,
        detail: format!("{got:?}"),
    })
}

type NamedCheck = (&'static str, fn() -> Result<CheckResult>);

/// Runs every check; errors inside a check count as failures.
pub fn run_selftest() -> Vec<CheckResult> {
    let checks: [NamedCheck; 5] = [
        ("two-point right Radau rule", radau_rule),
        ("DG(k) endpoint equals Radau IIA", dg_radau),
        ("matrix-free operator equals assembled oracle", operator_oracle),
        ("restriction is the adjoint of prolongation", transfer_adjoint),
        ("four-level hp hierarchy", hierarchy_table),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            f().unwrap_or_else(|e| CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            })
        })
        .collect()
}
