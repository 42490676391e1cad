use crate::solver::StokesProblem;
use std::f64::consts::PI;

/// Smooth solution on the unit square with homogeneous boundary data:
/// `v = sin t (sin²πx sinπy cosπy, −sinπx cosπx sin²πy)`,
/// `p = sin t sinπx cosπx sinπy cosπy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub nu: f64,
    pub t_end: f64,
}

pub fn manufactured_problem() -> ManufacturedProblem {
    ManufacturedProblem { nu: 0.1, t_end: 1.0 }
}

// sin²(πs) and sin(πs)cos(πs) with derivatives
fn sq(s: f64) -> f64 {
    (PI * s).sin().powi(2)
}

fn sc(s: f64) -> f64 {
    0.5 * (2.0 * PI * s).sin()
}

fn sq_d(s: f64) -> f64 {
    PI * (2.0 * PI * s).sin()
}

fn sq_dd(s: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * s).cos()
}

fn sc_d(s: f64) -> f64 {
    PI * (2.0 * PI * s).cos()
}

fn sc_dd(s: f64) -> f64 {
    -4.0 * PI * PI * sc(s)
}

impl ManufacturedProblem {
    pub fn velocity(&self, t: f64, [x, y]: [f64; 2]) -> [f64; 2] {
        let s = t.sin();
        [s * sq(x) * sc(y), -s * sc(x) * sq(y)]
    }

    /// `grad[c][d] = ∂_d v_c`
    pub fn velocity_gradient(&self, t: f64, [x, y]: [f64; 2]) -> [[f64; 2]; 2] {
        let s = t.sin();
        [
            [s * sq_d(x) * sc(y), s * sq(x) * sc_d(y)],
            [-s * sc_d(x) * sq(y), -s * sc(x) * sq_d(y)],
        ]
    }

    pub fn pressure(&self, t: f64, [x, y]: [f64; 2]) -> f64 {
        t.sin() * sc(x) * sc(y)
    }

    pub fn divergence(&self, t: f64, x: [f64; 2]) -> f64 {
        let g = self.velocity_gradient(t, x);
        g[0][0] + g[1][1]
    }

    /// `∂_t v − ν Δv + ∇p`
    pub fn rhs(&self, t: f64, [x, y]: [f64; 2]) -> [f64; 2] {
        let (s, ds) = (t.sin(), t.cos());
        let lap = [
            s * (sq_dd(x) * sc(y) + sq(x) * sc_dd(y)),
            -s * (sc_dd(x) * sq(y) + sc(x) * sq_dd(y)),
        ];
        let grad_p = [s * sc_d(x) * sc(y), s * sc(x) * sc_d(y)];
        [
            ds * sq(x) * sc(y) - self.nu * lap[0] + grad_p[0],
            -ds * sc(x) * sq(y) - self.nu * lap[1] + grad_p[1],
        ]
    }
}

impl StokesProblem for ManufacturedProblem {
    fn forcing(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        self.rhs(t, x)
    }
}

/// Lid-driven cavity with lid velocity `(sin(πt/4), 0)` on `y = 1`, no-slip
/// elsewhere and no forcing. The two top corners belong to the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityProblem {
    pub nu: f64,
    pub t_end: f64,
}

impl Default for CavityProblem {
    fn default() -> Self {
        Self { nu: 0.1, t_end: 8.0 }
    }
}

impl CavityProblem {
    pub fn lid_speed(t: f64) -> f64 {
        (0.25 * PI * t).sin()
    }
}

impl StokesProblem for CavityProblem {
    fn forcing(&self, _t: f64, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn boundary_velocity(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let on_lid = (x[1] - 1.0).abs() < 1e-12 && x[0] > 1e-12 && x[0] < 1.0 - 1e-12;
        if on_lid {
            [Self::lid_speed(t), 0.0]
        } else {
            [0.0, 0.0]
        }
    }

    fn has_boundary_data(&self) -> bool {
        true
    }
}
