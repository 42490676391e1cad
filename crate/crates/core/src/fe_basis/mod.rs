//! One-dimensional rules and bases plus the modal pressure basis.

mod lagrange;
mod pdisc;
mod quadrature;

pub use lagrange::{lagrange_basis, NodalBasis1D};
pub use pdisc::{binomial, pdisc_basis, PDiscBasis};
pub use quadrature::{gauss_lobatto, gauss_radau_right, gauss_rule, legendre, QuadratureRule};

/// Nodal velocity basis of degree `degree` at the Gauss–Lobatto points.
pub fn lobatto_nodal_basis(degree: usize) -> NodalBasis1D {
    let rule = gauss_lobatto(degree + 1).expect("degree >= 1");
    lagrange_basis(&rule.points).expect("Lobatto nodes are distinct")
}
