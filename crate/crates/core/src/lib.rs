//! Three-phase electrical fault detection and classification from sampled
//! voltage/current waveforms.
//!
//! The analysis chain treats the three instantaneous phase values as a point
//! in 3-D space. Under sinusoidal excitation that point traces a closed flat
//! curve: a circle in the Kirchhoff plane for a balanced system, an ellipse
//! (possibly in a tilted plane) under fault conditions. The library
//!
//! 1. estimates the trajectory plane as a bivector of the Euclidean
//!    geometric algebra G3 ([`ga3`]),
//! 2. rotates the trajectory onto the sigma12 coordinate plane with a
//!    geometric rotor, reducing it to 2-D without distorting its shape
//!    ([`pipeline`]),
//! 3. fits an origin-centered conic with a constrained generalized
//!    eigenproblem and extracts semi-axes and inclination ([`gac`]), and
//! 4. maps normalized bivector components and ellipse parameters to one of
//!    ten fault types plus a severity estimate ([`classify`]).
//!
//! [`synth`] generates deterministic synthetic fault waveforms and drives the
//! noise/accuracy studies used to validate the chain.
//!
//! ```
//! use trifault_core::classify::{summarize_record, ClassifierConfig, SeverityModel};
//! use trifault_core::pipeline::{analyze_record, WindowConfig};
//! use trifault_core::synth::{generate, FaultScenario};
//! use trifault_core::FaultLabel;
//!
//! let scenario = FaultScenario { label: FaultLabel::BCG, severity: 0.6, ..Default::default() };
//! let frames = generate(&scenario, 42);
//! let analyses = analyze_record(&frames, &WindowConfig::default()).unwrap();
//! let summary =
//!     summarize_record(&analyses, &ClassifierConfig::default(), &SeverityModel::per_unit());
//! assert_eq!(summary.dominant, FaultLabel::BCG);
//! assert!((summary.mean_severity.unwrap() - 0.6).abs() < 0.01);
//! ```

// numeric code style: indexed loops mirror the matrix formulas, and negated
// comparisons like `!(x > 0.0)` deliberately catch NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod ga3;
pub mod gac;
pub mod pipeline;
pub mod synth;

pub use classify::{ClassifierConfig, FaultLabel, FaultReport, RecordSummary, SeverityModel};
pub use ga3::{Bivector3, Multivector3, Rotor3, Vector3};
pub use gac::{ConicVector, EllipseParams, GacPoint, LineParams};
pub use pipeline::{SampleFrame, ShapeFit, WindowAnalysis, WindowConfig};
pub use synth::FaultScenario;
