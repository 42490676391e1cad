use super::problems::ManufacturedProblem;
use crate::error::{check_len, Result};
use crate::fe_basis::gauss_rule;
use crate::st_operator::{BlockVector, SpaceTimeOperator};

/// Space-time error norms over the whole time interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub v_l2: f64,
    pub p_l2: f64,
    /// Gradient seminorm `‖∇(v − v_h)‖` in `L²(L²)`.
    pub v_h1: f64,
    pub div_l2: f64,
    pub v_linf: f64,
}

/// `log2(e_coarse / e_fine)` for a halving of the mesh size.
pub fn eoc(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Errors of a trajectory with one block vector per step, the first step
/// starting at `t_start`. Time integrals use `(k+2)`-point Gauss per step,
/// space integrals `(r+3)`-point Gauss per direction.
pub fn compute_errors(
    problem: &ManufacturedProblem,
    op: &SpaceTimeOperator,
    trajectory: &[BlockVector],
    t_start: f64,
) -> Result<ErrorReport> {
    let layout = op.layout();
    for x in trajectory {
        check_len("compute_errors", layout.len(), x.as_slice().len())?;
    }
    let vspace = op.velocity_space();
    let pspace = op.pressure_space();
    let temporal = op.temporal();
    let tau = temporal.tau();
    let mesh = vspace.mesh();
    let level = vspace.level();
    let h = vspace.cell_size();
    let space_rule = gauss_rule(vspace.r() + 3)?;
    let time_rule = gauss_rule(temporal.degree() + 2)?;
    let tbasis = temporal.basis();
    let jac_space = 0.25 * h[0] * h[1];

    let mut sums = [0.0; 4];
    let mut linf: f64 = 0.0;
    for (step, x) in trajectory.iter().enumerate() {
        let t0 = t_start + step as f64 * tau;
        for cell in 0..vspace.n_cells() {
            let origin = mesh.cell_origin(level, cell);
            for (qy, &ey) in space_rule.points.iter().enumerate() {
                for (qx, &ex) in space_rule.points.iter().enumerate() {
                    let xi = [ex, ey];
                    let pt = [origin[0] + 0.5 * h[0] * (ex + 1.0), origin[1] + 0.5 * h[1] * (ey + 1.0)];
                    let slots: Vec<_> = (0..layout.slots)
                        .map(|a| {
                            let (v, g) = vspace.eval_in_cell(x.velocity(a), cell, xi);
                            (v, g, pspace.eval_in_cell(x.pressure(a), cell, xi))
                        })
                        .collect();
                    let ws = space_rule.weights[qx] * space_rule.weights[qy] * jac_space;
                    for (&s, &wt) in time_rule.points.iter().zip(&time_rule.weights) {
                        let t = t0 + 0.5 * tau * (s + 1.0);
                        let w = ws * wt * 0.5 * tau;
                        let mut v = [0.0; 2];
                        let mut g = [[0.0; 2]; 2];
                        let mut p = 0.0;
                        for (a, (va, ga, pa)) in slots.iter().enumerate() {
                            let phi = tbasis.value(a, s);
                            for c in 0..2 {
                                v[c] += phi * va[c];
                                for d in 0..2 {
                                    g[c][d] += phi * ga[c][d];
                                }
                            }
                            p += phi * pa;
                        }
                        let ve = problem.velocity(t, pt);
                        let ge = problem.velocity_gradient(t, pt);
                        let pe = problem.pressure(t, pt);
                        let dv = [v[0] - ve[0], v[1] - ve[1]];
                        sums[0] += w * (dv[0] * dv[0] + dv[1] * dv[1]);
                        sums[1] += w * (p - pe).powi(2);
                        let mut gsum = 0.0;
                        for c in 0..2 {
                            for d in 0..2 {
                                gsum += (g[c][d] - ge[c][d]).powi(2);
                            }
                        }
                        sums[2] += w * gsum;
                        sums[3] += w * (g[0][0] + g[1][1]).powi(2);
                        linf = linf.max(dv[0].abs()).max(dv[1].abs());
                    }
                }
            }
        }
    }
    Ok(ErrorReport {
        v_l2: sums[0].sqrt(),
        p_l2: sums[1].sqrt(),
        v_h1: sums[2].sqrt(),
        div_l2: sums[3].sqrt(),
        v_linf: linf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof_space::{PressureSpace, VelocitySpace};
    use crate::harness::problems::manufactured_problem;
    use crate::mesh::Mesh;
    use crate::time_basis::temporal_matrices;

    fn operator(mesh: &Mesh, level: usize, r: usize, k: usize, tau: f64) -> SpaceTimeOperator {
        let v = VelocitySpace::new(mesh, level, r).unwrap();
        let p = PressureSpace::new(mesh, level, r).unwrap();
        SpaceTimeOperator::new(&v, &p, temporal_matrices(k, tau).unwrap(), 0.1).unwrap()
    }

    /// Interpolates the exact solution at the temporal nodes of every step.
    fn interpolated(problem: &ManufacturedProblem, op: &SpaceTimeOperator, steps: usize) -> Vec<BlockVector> {
        let layout = op.layout();
        let tau = op.temporal().tau();
        (0..steps)
            .map(|n| {
                let mut x = BlockVector::zeros(layout);
                for (a, &t) in op.temporal().node_times(n as f64 * tau).iter().enumerate() {
                    x.velocity_mut(a)
                        .copy_from_slice(&op.velocity_space().interpolate(|p| problem.velocity(t, p)));
                    x.pressure_mut(a)
                        .copy_from_slice(&op.pressure_space().project(|p| problem.pressure(t, p)));
                }
                x
            })
            .collect()
    }

    #[test]
    fn zero_solution_gives_exact_norms() {
        let problem = manufactured_problem();
        let mesh = Mesh::unit_square_refined(1);
        let op = operator(&mesh, 1, 2, 1, 0.5);
        let zeros = vec![BlockVector::zeros(op.layout()); 2];
        let rep = compute_errors(&problem, &op, &zeros, 0.0).unwrap();
        // ∫ sin²t dt · ∫∫ |v(x)|² with ∫ sin⁴ = 3/8, ∫ sin²cos² = 1/8 on [0,1]
        let time = 0.5 - (2.0f64).sin() / 4.0;
        let v2 = 2.0 * (3.0 / 8.0) * (1.0 / 8.0);
        // the prescribed time rule is not exact for sin², hence the tolerance
        let exact_v = (time * v2).sqrt();
        assert!((rep.v_l2 - exact_v).abs() < 2e-5 * exact_v, "{} vs {exact_v}", rep.v_l2);
        let exact_p = (time / 64.0).sqrt();
        assert!((rep.p_l2 - exact_p).abs() < 1e-4 * exact_p, "{} vs {exact_p}", rep.p_l2);
        assert_eq!(rep.div_l2, 0.0);
        assert!(rep.v_linf > 0.0);
    }

    #[test]
    fn interpolation_errors_decrease() {
        let problem = manufactured_problem();
        let mut prev: Option<ErrorReport> = None;
        for c in 1..=3 {
            let mesh = Mesh::unit_square_refined(c);
            let h = mesh.h(c);
            let op = operator(&mesh, c, 2, 2, h);
            let steps = (1.0_f64 / h).round() as usize;
            let rep = compute_errors(&problem, &op, &interpolated(&problem, &op, steps), 0.0).unwrap();
            assert!(rep.v_l2 > 0.0 && rep.p_l2 > 0.0 && rep.v_h1 > 0.0 && rep.div_l2 > 0.0);
            if let Some(p) = prev {
                assert!(eoc(p.v_l2, rep.v_l2) > 3.5, "{}", eoc(p.v_l2, rep.v_l2));
                assert!(eoc(p.v_h1, rep.v_h1) > 2.5);
                if c == 3 {
                    // h = 1/2 is preasymptotic for the pressure
                    assert!(eoc(p.p_l2, rep.p_l2) > 2.5);
                }
            }
            prev = Some(rep);
        }
        assert!((eoc(4.0, 1.0) - 2.0).abs() < 1e-15);
    }
}
