//! Dense reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use hpstmg::linalg::CsrMatrix;
use hpstmg::mesh::{DomainBox, Mesh};
use hpstmg::solver::{Multigrid, VCycleConfig};
use hpstmg::st_operator::{assemble_sparse_oracle, BlockLayout, SpaceTimeOperator};
use hpstmg::transfer::TransferPair;
use hpstmg::vanka::VankaSmoother;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Unit square with `levels` refinement levels starting from one cell.
pub fn unit_mesh(levels: usize) -> Mesh {
    Mesh::build_cartesian(DomainBox::UNIT_SQUARE, [1, 1], levels).expect("valid mesh")
}

pub fn dense_from_csr(m: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for (j, v) in m.row(i) {
            d[(i, j)] += v;
        }
    }
    d
}

pub fn dense_operator(op: &SpaceTimeOperator) -> DMatrix<f64> {
    dense_from_csr(&assemble_sparse_oracle(op).expect("oracle within size limit"))
}

/// Columns are the images of unit vectors under `f`.
pub fn columns_of(nrows: usize, ncols: usize, f: impl Fn(&[f64], &mut [f64])) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(nrows, ncols);
    let mut e = vec![0.0; ncols];
    let mut out = vec![0.0; nrows];
    for j in 0..ncols {
        e[j] = 1.0;
        f(&e, &mut out);
        for i in 0..nrows {
            d[(i, j)] = out[i];
        }
        e[j] = 0.0;
    }
    d
}

/// `I − c mᵀ / (cᵀ m)` on every pressure slot, where `c` are the
/// coefficients of the constant and `m` the mean functional.
#[derive(Debug, Clone)]
pub struct PressureProjection {
    layout: BlockLayout,
    constant: Vec<f64>,
    mean: Vec<f64>,
    scale: f64,
}

impl PressureProjection {
    pub fn new(op: &SpaceTimeOperator) -> Self {
        let constant = op.pressure_space().constant().to_vec();
        let mean = op.pressure_space().mean_vector().to_vec();
        let scale: f64 = constant.iter().zip(&mean).map(|(a, b)| a * b).sum();
        Self {
            layout: op.layout(),
            constant,
            mean,
            scale,
        }
    }

    pub fn apply(&self, x: &mut DVector<f64>) {
        for slot in 0..self.layout.slots {
            let range = self.layout.pressure(slot);
            let mean: f64 = range.clone().zip(&self.mean).map(|(i, m)| x[i] * m).sum();
            for (i, c) in range.zip(&self.constant) {
                x[i] -= c * mean / self.scale;
            }
        }
    }
}

/// Velocity rows eliminated by the Dirichlet condition, over all slots.
pub fn boundary_rows(op: &SpaceTimeOperator) -> Vec<usize> {
    let layout = op.layout();
    (0..layout.slots)
        .flat_map(|slot| {
            let base = layout.velocity(slot).start;
            op.boundary_dofs().iter().map(move |&d| base + d)
        })
        .collect()
}

/// `diag(w) Σ_T R_Tᵀ (R_T S R_Tᵀ)^{-1} R_T` from the assembled operator.
/// Pinned pressure unknowns are dropped from the patch.
pub fn vanka_oracle(dense: &DMatrix<f64>, smoother: &VankaSmoother) -> DMatrix<f64> {
    let n = dense.nrows();
    let mut out = DMatrix::zeros(n, n);
    for patch in smoother.patches() {
        let d: Vec<usize> = patch
            .dofs
            .iter()
            .enumerate()
            .filter(|(i, _)| !patch.pinned().contains(i))
            .map(|(_, &g)| g)
            .collect();
        let local = DMatrix::from_fn(d.len(), d.len(), |i, j| dense[(d[i], d[j])]);
        let inv = local.try_inverse().expect("regular patch matrix");
        for (i, &gi) in d.iter().enumerate() {
            for (j, &gj) in d.iter().enumerate() {
                out[(gi, gj)] += inv[(i, j)];
            }
        }
    }
    for (i, w) in smoother.weights().iter().enumerate() {
        let mut row = out.row_mut(i);
        row *= *w;
    }
    out
}

pub fn prolongation_dense(pair: &TransferPair) -> DMatrix<f64> {
    let (c, f) = (pair.coarse_layout().len(), pair.fine_layout().len());
    columns_of(f, c, |x, y| pair.prolongate(x, y, false))
}

pub fn restriction_dense(pair: &TransferPair) -> DMatrix<f64> {
    let (c, f) = (pair.coarse_layout().len(), pair.fine_layout().len());
    columns_of(c, f, |x, y| pair.restrict(x, y, false))
}

struct DenseLevel {
    operator: DMatrix<f64>,
    projection: PressureProjection,
    /// `ω` times the additive Vanka matrix; absent on level 0.
    smoother: Option<DMatrix<f64>>,
    transfer: Option<(DMatrix<f64>, DMatrix<f64>)>,
    pseudo_inverse: Option<DMatrix<f64>>,
}

/// The V-cycle rebuilt from assembled operators, explicit patch inverses,
/// explicit transfer matrices and a pseudo-inverse on the coarsest level.
pub struct DenseMultigrid {
    levels: Vec<DenseLevel>,
    config: VCycleConfig,
}

impl DenseMultigrid {
    pub fn new(mg: &Multigrid) -> Self {
        let config = *mg.config();
        let levels = mg
            .levels()
            .iter()
            .map(|lvl| {
                let operator = dense_operator(&lvl.op);
                let smoother = lvl.smoother.as_ref().map(|s| vanka_oracle(&operator, s) * config.omega);
                let transfer = lvl
                    .transfer
                    .as_ref()
                    .map(|t| (restriction_dense(t), prolongation_dense(t)));
                let pseudo_inverse = lvl
                    .coarse
                    .as_ref()
                    .map(|_| operator.clone().pseudo_inverse(1e-12).expect("svd converges"));
                DenseLevel {
                    projection: PressureProjection::new(&lvl.op),
                    operator,
                    smoother,
                    transfer,
                    pseudo_inverse,
                }
            })
            .collect();
        Self { levels, config }
    }

    pub fn cycle(&self, level: usize, b: &DVector<f64>) -> DVector<f64> {
        let lvl = &self.levels[level];
        if let Some(pinv) = &lvl.pseudo_inverse {
            let mut x = pinv * b;
            lvl.projection.apply(&mut x);
            return x;
        }
        let smoother = lvl.smoother.as_ref().unwrap();
        let (restriction, prolongation) = lvl.transfer.as_ref().unwrap();
        let mut x = DVector::zeros(b.len());
        for _ in 0..self.config.nu1 {
            x += smoother * (b - &lvl.operator * &x);
        }
        let mut coarse_rhs = restriction * (b - &lvl.operator * &x);
        if self.config.project_pressure {
            self.levels[level - 1].projection.apply(&mut coarse_rhs);
        }
        let mut correction = prolongation * self.cycle(level - 1, &coarse_rhs);
        if self.config.project_pressure {
            lvl.projection.apply(&mut correction);
        }
        x += correction;
        for _ in 0..self.config.nu2 {
            x += smoother * (b - &lvl.operator * &x);
        }
        x
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `‖a − b‖_∞ / ‖b‖_∞`
pub fn relative_diff(a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b) / max_abs(b).max(f64::MIN_POSITIVE)
}
