//! Higgs pairs on discretized flat Kähler tori.
//!
//! Pseudo-spectral fields on a periodic grid, the Yang–Mills–Higgs energy and
//! its gradient flow, the Hermitian-metric heat flow, the Hermitian–Einstein
//! residual, the Weitzenböck identity for Higgs fields and the constrained
//! least eigenvalue of the rough Laplacian.

pub mod error;
pub mod field;
pub mod linalg;
pub mod geometry;
pub mod bundle;
pub mod functionals;
pub mod flow;
pub mod spectral;

pub use bundle::{Connection, GaugeFlavor, GaugeTransform, HiggsField, ModelKind, PairSpec};
pub use error::{Error, Result};
pub use field::{MatrixField, ScalarField};
pub use flow::{DiagnosticsRecord, FlowConfig, FlowRun, HiggsState, MetricFlowConfig, MetricState};
pub use functionals::{ChernNumbers, EnergyReport, HeResidual};
pub use geometry::{FormField, FormKind, TorusGeometry};
pub use linalg::C64;
pub use spectral::{EigenOptions, EigenResult, WeitzenbockReport};
