//! Run configuration: one JSON document with geometry, bundle data, flow,
//! eigen, verification and output blocks.

use crate::error::CliError;
use higgslab_core::bundle::{random_connection, random_higgs_pair};
use higgslab_core::linalg::{self, C64};
use higgslab_core::{Connection, EigenOptions, FlowConfig, HiggsField, MatrixField, ModelKind, PairSpec, TorusGeometry};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryBlock,
    pub bundle: BundleBlock,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub eigen: EigenBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    /// complex dimension
    pub n: usize,
    pub sides: Vec<f64>,
    pub grid: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleBlock {
    pub rank: usize,
    #[serde(default)]
    pub seed: u64,
    pub data: DataSpec,
}

/// Initial data generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    /// `A = 0`, `θ = 0`
    Zero,
    /// `A = 0`, `θ = e₁₂ dz₁`
    Nilpotent,
    /// complex-gauge orbit of a constant model pair
    Orbit {
        #[serde(default = "default_model")]
        model: ModelKind,
        roughness: usize,
        amplitude: f64,
        #[serde(default = "default_gauge_scale")]
        gauge_scale: f64,
    },
    /// random unitary connection, `θ = 0`
    Connection { amplitude: f64, roughness: usize },
    /// `A = 0`, `θ = amplitude · sin(2πx₀) e₁₂ dz₁`: fails holomorphicity
    NonHolomorphic { amplitude: f64 },
}

fn default_model() -> ModelKind {
    ModelKind::Diagonal
}

fn default_gauge_scale() -> f64 {
    0.3
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenBlock {
    pub options: EigenOptions,
    pub sweep: Option<SweepSpec>,
}

/// Perturbation sweep for the continuity check around the base connection.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub amplitudes: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_sweep_roughness")]
    pub roughness: usize,
    /// seeds used to calibrate the constant at the largest amplitude
    pub calibration_seeds: Vec<u64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_sweep_roughness() -> usize {
    1
}

fn default_safety() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Weitzenbock,
    Energy,
    Chern,
    Cutoff,
    CrossCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBlock {
    pub suites: Vec<Suite>,
    /// threshold for the Weitzenböck residual, energy gap and Chern integrals
    pub tolerance: f64,
    pub cutoff_ratios: Vec<f64>,
    pub cutoff_radius: f64,
    /// end time of the connection/metric flow comparison
    pub cross_check_t: f64,
    pub cross_check_dt: f64,
    pub cross_check_tolerance: f64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self {
            suites: vec![Suite::Weitzenbock, Suite::Energy, Suite::Chern, Suite::Cutoff, Suite::CrossCheck],
            tolerance: 1e-6,
            cutoff_ratios: vec![4.0, 16.0, 64.0],
            cutoff_radius: 0.4,
            cross_check_t: 0.05,
            cross_check_dt: 1e-3,
            cross_check_tolerance: 1e-5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// write every k-th accepted diagnostics record (the last one always)
    pub emit_every: usize,
    /// write a checkpoint every k accepted steps (0 = final state only)
    pub checkpoint_every: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: PathBuf::from("higgslab-out"), emit_every: 1, checkpoint_every: 0 }
    }
}

impl RunConfig {
    /// Parses and validates; parse errors carry line and column.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.torus()?;
        if self.bundle.rank == 0 {
            return bad("bundle.rank must be positive".into());
        }
        if matches!(self.bundle.data, DataSpec::Nilpotent | DataSpec::NonHolomorphic { .. }) && self.bundle.rank < 2 {
            return bad("nilpotent data needs bundle.rank ≥ 2".into());
        }
        if let DataSpec::Orbit { amplitude, gauge_scale, .. } = self.bundle.data {
            if !(amplitude > 0.0 && gauge_scale >= 0.0) {
                return bad("orbit amplitude must be positive and gauge_scale non-negative".into());
            }
        }
        self.flow.validate().map_err(|e| CliError::Config(format!("flow: {e}")))?;
        let e = &self.eigen.options;
        if e.penalties.is_empty() || e.penalties.iter().any(|p| !(*p > 0.0)) || !(e.tol > 0.0) || e.max_iter == 0 {
            return bad("eigen.options: penalties and tol must be positive, max_iter nonzero".into());
        }
        if let Some(s) = &self.eigen.sweep {
            if s.amplitudes.is_empty() || s.amplitudes.iter().any(|a| !(*a > 0.0)) || s.seeds.is_empty() || s.calibration_seeds.is_empty() || !(s.safety >= 1.0) {
                return bad("eigen.sweep: need positive amplitudes, seeds, calibration_seeds and safety ≥ 1".into());
            }
        }
        let v = &self.verify;
        if !(v.tolerance > 0.0 && v.cross_check_tolerance > 0.0 && v.cross_check_dt > 0.0 && v.cross_check_t >= 0.0 && v.cutoff_radius > 0.0) {
            return bad("verify: tolerances, cross_check_dt and cutoff_radius must be positive".into());
        }
        if v.cutoff_ratios.iter().any(|n| !(*n > 1.0)) {
            return bad("verify.cutoff_ratios must exceed 1".into());
        }
        if self.output.emit_every == 0 {
            return bad("output.emit_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<TorusGeometry, CliError> {
        let g = &self.geometry;
        TorusGeometry::new(g.n, &g.sides, &g.grid).map_err(|e| CliError::Config(format!("geometry: {e}")))
    }

    /// Initial pair described by the bundle block.
    pub fn initial_data(&self, geom: &TorusGeometry) -> Result<(Connection, HiggsField), CliError> {
        let b = &self.bundle;
        let r = b.rank;
        let e12 = |scale: &[C64]| -> HiggsField {
            let mut comps = vec![MatrixField::zeros(geom.npts(), r); geom.n()];
            comps[0] = MatrixField::scalar_times(scale, &linalg::unit(r, 0, 1));
            HiggsField::from_components_unchecked(comps)
        };
        Ok(match &b.data {
            DataSpec::Zero => (Connection::zero(geom, r), HiggsField::zero(geom, r)),
            DataSpec::Nilpotent => (Connection::zero(geom, r), e12(&vec![C64::new(1.0, 0.0); geom.npts()])),
            DataSpec::Orbit { model, roughness, amplitude, gauge_scale } => {
                let spec = PairSpec { model: *model, gauge_scale: *gauge_scale, ..PairSpec::new(b.seed, r, *roughness, *amplitude) };
                random_higgs_pair(geom, &spec).map_err(|e| CliError::Config(format!("bundle.data: {e}")))?
            }
            DataSpec::Connection { amplitude, roughness } => (random_connection(geom, r, b.seed, *amplitude, *roughness), HiggsField::zero(geom, r)),
            DataSpec::NonHolomorphic { amplitude } => {
                let prof: Vec<C64> = (0..geom.npts()).map(|p| C64::new(amplitude * (2.0 * PI * geom.coords(p)[0] / geom.sides()[0]).sin(), 0.0)).collect();
                (Connection::zero(geom, r), e12(&prof))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn shipped_configs_parse_and_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }

    #[test]
    fn omitted_blocks_take_defaults() {
        let cfg = parse(r#"{"geometry": {"n": 1, "sides": [1, 1], "grid": [8, 8]}, "bundle": {"rank": 2, "data": {"kind": "zero"}}}"#).unwrap();
        assert_eq!(cfg.flow, FlowConfig::default());
        assert_eq!(cfg.eigen.options, EigenOptions::default());
        assert_eq!(cfg.verify.suites.len(), 5);
        assert_eq!(cfg.output.emit_every, 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let err = parse("{\n\"geometry\": {\"n\": 1, \"sides\": [1, 1], \"grid\": [8, 8], \"extra\": 1}}").unwrap_err();
        assert_eq!(err.line(), 2);
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let base = r#"{"geometry": {"n": 1, "sides": [1, 1], "grid": [8, 8]}, "bundle": {"rank": 1, "data": {"kind": "nilpotent"}}}"#;
        assert_eq!(parse(base).unwrap().validate().unwrap_err().exit_code(), 2);
        let odd = r#"{"geometry": {"n": 1, "sides": [1, 1], "grid": [8, 11]}, "bundle": {"rank": 2, "data": {"kind": "zero"}}}"#;
        assert!(matches!(parse(odd).unwrap().validate(), Err(CliError::Config(_))));
        let dt = r#"{"geometry": {"n": 1, "sides": [1, 1], "grid": [8, 8]}, "bundle": {"rank": 2, "data": {"kind": "zero"}}, "flow": {"dt0": -1}}"#;
        assert!(matches!(parse(dt).unwrap().validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn generated_data_matches_the_description() {
        let cfg = parse(r#"{"geometry": {"n": 2, "sides": [1, 1, 1, 1], "grid": [8, 8, 8, 8]}, "bundle": {"rank": 2, "data": {"kind": "nilpotent"}}}"#).unwrap();
        let g = cfg.torus().unwrap();
        let (a, theta) = cfg.initial_data(&g).unwrap();
        assert_eq!(a, Connection::zero(&g, 2));
        assert_eq!(theta.comps()[0].at(17), linalg::unit(2, 0, 1).as_slice());
        assert_eq!(theta.comps()[1].max_abs_entry(), 0.0);
        assert!((theta.norm_sq(&g) - 2.0).abs() < 1e-14);
    }
}
