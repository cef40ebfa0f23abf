//! Green's functions of the five-point discretization of the 2D Schrödinger
//! operator, assembled from contour integrals on a spectral curve.
//!
//! The genus-zero curve (the Riemann sphere) is handled exactly by
//! [`sphere::Sphere`]; higher genus enters through the theta-function engine
//! in [`theta`], which works on Jacobian-level data supplied by the caller.

pub mod backend;
pub mod contour;
pub mod green;
pub mod lattice;
pub mod qmap;
pub mod sphere;
pub mod table;
pub mod theta;
pub mod verify;

pub use backend::{GreenContour, MarkedPoints, SpectralBackend, WeightedArc};
pub use contour::{Contour, Orientation, QuadError};
pub use green::{GreenError, GreenEvaluator, GreenKind};
pub use lattice::{LatticeError, LatticeField, Site, Window};
pub use qmap::{Grid, QuasimomentumMap};
pub use sphere::{Sphere, SphereError, SpherePoint};
pub use table::{GreenTable, LambdaLabel};
pub use theta::{JacobianSpectralData, RiemannMatrix, ThetaError};
