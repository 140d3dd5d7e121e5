//! Discrete optimal transport, negative Sobolev norms, and the monotone
//! perturbation map on one-dimensional sections.

pub mod duality;
pub mod hminus1;
pub mod measure;
pub mod monotone;
pub mod w2;

pub use duality::{variance_bound_on_grid, verify_transport_duality, verify_variance_bound, DualityReport, DualityRow, VarianceBound};
pub use hminus1::{hminus1_norm, HMinus1};
pub use measure::{DiscreteMeasure, Lattice};
pub use monotone::{monotone_transport_1d, SectionFn, TransportMap1D};
pub use w2::{equal_weight_atoms, w2_1d, w2_assignment};
