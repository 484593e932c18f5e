//! Depth-efficient folding ReLU networks for the regular-polygon
//! classification family, exact linear-region enumeration for planar ReLU
//! MLPs, and checks of the associated counting bounds.
//!
//! ```
//! use foldnet::construction::build_collapsed;
//! use foldnet::geometry::{Class, Point2};
//!
//! let net = build_collapsed(3).unwrap();
//! assert_eq!(net.depth(), 4);
//! assert_eq!(net.classify(Point2::ORIGIN), Class::Positive);
//! assert_eq!(net.classify(Point2::new(0.0, 1.01)), Class::Negative);
//! ```

pub mod construction;
pub mod error;
pub mod geometry;
pub mod network;
pub mod regions;
pub mod sampling;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{Class, ConvexPolygon, Label, Line, Point2, ProblemInstance};
pub use network::{ActivationPattern, AffineLayer, MlpNetwork, OutputHead, Stage, StagedNetwork};
pub use regions::{enumerate_regions, BoundingBox, Decomposition, Region};
pub use verification::VerificationReport;
