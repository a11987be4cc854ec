//! Formal graded-series engine and the curved-geometry identities built on
//! it: warped models, the lower-order term E, special defining functions,
//! and the curved Dirichlet-to-Neumann formulas.

pub mod boundary;
pub mod scatter;
pub mod series;
pub mod warped;

pub use boundary::{general_boundary_dtn, BoundaryDtn};
pub use scatter::{
    curved_dtn, curved_dtn_iterated, solve_eigen_companion, special_defining_function,
    CurvedDtn, ScatterSeries,
};
pub use series::GradedSeries;
pub use warped::{
    closed_form_e, compute_e, defining_relations, eigen_operator, mean_curvature,
    solve_constant_scalar, EForm, WarpedModel,
};
