//! Continuum-limit diffusion models of continuous-time average consensus.
//!
//! A lattice core graph with a path tail of `q` vertices hanging off every
//! core vertex becomes, as `q → ∞`, a set of diffusion equations on `[0, 1]`
//! coupled through the core Laplacian at `ξ = 0`. This crate computes the
//! optimal core weights, the resulting decay rates for constant and
//! quadratic diffusion profiles, modal series solutions, the symmetric-star
//! closed forms, and discrete oracles (RK4 simulation, Sturm–Liouville
//! finite differences) that check all of it.

pub mod graph;
pub mod oracle;
pub mod pde;
pub mod quadrature;
pub mod rate;
pub mod roots;
pub mod special_fn;
pub mod spectral;
pub mod star;

pub use graph::{
    build_laplacian, lambda2_closed_form, optimal_core_weights, BudgetRule, CoreTopology,
    GraphError, TopologyKind, WeightBudget, WeightedGraph,
};
pub use spectral::{eig_sym, lambda2, Matrix, SpectralDecomposition, SpectralError};
