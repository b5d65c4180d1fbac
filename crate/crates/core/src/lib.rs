//! Lattice, cone and potential computations for toric Sasaki manifolds.
//!
//! The exact side ([`lattice`], [`cone`], [`cy`], [`topology`]) works over
//! arbitrary-precision integers and rationals. The analytic side
//! ([`volume`], [`potentials`]) works in `f64`.

pub mod cone;
pub mod cy;
pub mod families;
pub mod json;
pub mod lattice;
pub mod potentials;
pub mod topology;
pub mod volume;

pub use cone::{is_good, validate_diagram, DiagramError, GoodnessVerdict, ToricDiagram};
pub use cy::{compute_gamma, normalize_height, CalabiYauData};
pub use lattice::{smith_normal_form, IntMatrix, Rational};
pub use topology::TopologyReport;
pub use volume::{minimize_volume, ReebMinimum};
