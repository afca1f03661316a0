//! Polynomial spaces: scalar, bubble, edge and Raviart-Thomas.

pub mod basis;
pub mod legendre;
mod space;
pub mod spaces;
mod types;

pub use basis::{
    eval_modes, eval_modes_grad, mode_index, mode_of, scalar_dim, tabulate, tabulate_grad,
};
pub use space::PolySpace;
pub use spaces::{
    bubble_basis, bubble_dim, curl_matrix, diff_matrices, div_matrix, edge_bubble_dim, rt_basis,
    rt_bubble_basis, rt_bubble_dim, rt_dim, stiffness,
};
pub use types::{
    edge_basis, edge_bubbles_at, rt_bubble_space_basis, rt_space_basis, scalar_basis,
    scalar_bubble_basis, BasisHandle, EdgePoly, RtPoly, ScalarPoly, SpaceTag,
};
