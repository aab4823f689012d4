//! Strict JSON run configurations.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::energy::{EnergyParams, ParameterStrategy};
use crate::error::{Error, Result};
use crate::fem::PenaltyMode;
use crate::field::{Constant, FieldSum, GaussianBump, C64};
use crate::geometry::{Domain, DomainKind};
use crate::planewave::{NetConfig, Ridge, Schedule};
use crate::study::Reference;

/// Multiplier centre: the literal `"center"` or explicit coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OriginConfig {
    Named(NamedOrigin),
    Point(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedOrigin {
    Center,
}

impl Default for OriginConfig {
    fn default() -> Self {
        Self::Named(NamedOrigin::Center)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub origin: OriginConfig,
}

impl DomainConfig {
    pub fn unit(dim: usize) -> Self {
        let kind = match dim {
            1 => DomainKind::Interval,
            2 => DomainKind::Rectangle,
            _ => DomainKind::Box,
        };
        Self {
            kind,
            bounds: vec![[0.0, 1.0]; dim],
            origin: OriginConfig::default(),
        }
    }

    pub fn build(&self) -> Result<Domain> {
        let bounds: Vec<(f64, f64)> = self.bounds.iter().map(|b| (b[0], b[1])).collect();
        let d = Domain::new(&bounds)?;
        if d.kind() != self.kind {
            return Err(Error::InvalidDomain(format!(
                "kind {:?} does not match {} bounds",
                self.kind,
                bounds.len()
            )));
        }
        match &self.origin {
            OriginConfig::Named(NamedOrigin::Center) => Ok(d),
            OriginConfig::Point(p) => d.with_origin(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum SourceConfig {
    /// `a·exp(-|x - c|²/ε)`; the centre defaults to the domain midpoint.
    Gaussian {
        #[serde(default)]
        centre: Option<Vec<f64>>,
        eps: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant {
        value: f64,
        #[serde(default)]
        imag: f64,
    },
    /// Bumps at `(½, ½)` and `(¾, ¼)` with amplitudes `a` and `0.8a`;
    /// `a` defaults to `k²`.
    TwoGaussian {
        eps: f64,
        #[serde(default)]
        amplitude: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl SourceConfig {
    pub fn build(&self, domain: &Domain, k: f64) -> Result<FieldSum> {
        let dim = domain.dim();
        let bump = |c: &[f64], eps: f64, a: f64| -> Result<Box<dyn crate::field::ClosedFormField + Send>> {
            if !(eps > 0.0) {
                return Err(Error::InvalidParams(format!("eps must be positive (got {eps})")));
            }
            if c.len() != dim {
                return Err(Error::InvalidParams(format!("centre needs {dim} coordinates")));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(c);
            Ok(Box::new(GaussianBump::new(dim, p, eps, a)))
        };
        let parts = match self {
            Self::Gaussian { centre, eps, amplitude } => {
                let mid: Vec<f64> = domain.bounds().iter().map(|b| 0.5 * (b.0 + b.1)).collect();
                vec![bump(centre.as_deref().unwrap_or(&mid), *eps, *amplitude)?]
            }
            Self::Constant { value, imag } => {
                vec![Box::new(Constant(C64::new(*value, *imag))) as Box<dyn crate::field::ClosedFormField + Send>]
            }
            Self::TwoGaussian { eps, amplitude } => {
                if dim != 2 {
                    return Err(Error::InvalidParams("two-gaussian needs a 2D domain".into()));
                }
                let a = amplitude.unwrap_or(k * k);
                vec![bump(&[0.5, 0.5], *eps, a)?, bump(&[0.75, 0.25], *eps, 0.8 * a)?]
            }
        };
        Ok(FieldSum { parts })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldCase {
    Constant,
    Linear,
    Polynomial,
    PlaneWave,
    Gaussian,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub domain: DomainConfig,
    pub case: FieldCase,
    pub k: f64,
    /// Morawetz weight; the default parameter pack's `β` when absent.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "identity_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn identity_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoercivityConfig {
    pub domain: DomainConfig,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "recommended_strategy")]
    pub strategy: ParameterStrategy,
    /// Replaces the selected pack.
    #[serde(default)]
    pub params: Option<EnergyParams>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn recommended_strategy() -> ParameterStrategy {
    ParameterStrategy::Recommended
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemSolveConfig {
    pub domain: DomainConfig,
    pub h: f64,
    pub k: f64,
    #[serde(default)]
    pub gamma1: Option<f64>,
    #[serde(default)]
    pub gamma2: Option<f64>,
    /// Selects the `λ/h` impedance penalty.
    #[serde(default)]
    pub lambda: Option<f64>,
    pub f: SourceConfig,
    #[serde(default)]
    pub export: Option<PathBuf>,
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn grid_points() -> usize {
    101
}

impl FemSolveConfig {
    pub fn penalty_mode(&self) -> PenaltyMode {
        match self.lambda {
            Some(lambda) => PenaltyMode::LambdaOverH { lambda },
            None => PenaltyMode::Energy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    #[serde(rename = "P", alias = "p")]
    pub p: usize,
    #[serde(rename = "R", alias = "r")]
    pub r: usize,
    pub spread: f64,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        Self { p: 32, r: 4, spread: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub gamma1: f64,
    #[serde(default = "fifty")]
    pub gamma_bnd: f64,
    #[serde(default)]
    pub ridge: Ridge,
    /// `ϖ/h` for the least-squares initialisation; `ϖ = 50` over the mean
    /// sample spacing when absent.
    #[serde(default)]
    pub boundary_weight: Option<f64>,
    #[serde(default = "one")]
    pub physical: f64,
}

fn fifty() -> f64 {
    50.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnTrainConfig {
    pub domain: DomainConfig,
    pub k: f64,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub net: NetConfig,
    pub weights: WeightsConfig,
    #[serde(default)]
    pub schedule: Schedule,
    pub f: SourceConfig,
    /// Fit the linear coefficients by least squares before training.
    #[serde(default = "yes")]
    pub ls_init: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, rename = "export-every", alias = "export_every")]
    pub export_every: Option<usize>,
    #[serde(default)]
    pub export: Option<PathBuf>,
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub deterministic: bool,
    /// Order of the quadrature used for the final energy; skipped when absent.
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCase {
    #[serde(rename = "1d-constant")]
    Constant1d,
    #[serde(rename = "1d-minimiser")]
    Minimiser1d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub case: OracleCase,
    pub k: f64,
    #[serde(default = "one")]
    pub f: f64,
    #[serde(default = "unit_interval")]
    pub domain: DomainConfig,
    /// Weights of the minimiser; the default pack when absent.
    #[serde(default)]
    pub gamma1: Option<f64>,
    #[serde(default)]
    pub gamma2: Option<f64>,
    #[serde(default = "oracle_points")]
    pub points: usize,
    #[serde(default)]
    pub export: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn unit_interval() -> DomainConfig {
    DomainConfig::unit(1)
}

fn oracle_points() -> usize {
    201
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub k: f64,
    #[serde(default = "one")]
    pub f: f64,
    pub cells: Vec<usize>,
    #[serde(default = "exact")]
    pub reference: Reference,
    #[serde(default = "energy_mode")]
    pub mode: PenaltyMode,
    #[serde(default)]
    pub params: Option<EnergyParams>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

fn exact() -> Reference {
    Reference::Exact
}

fn energy_mode() -> PenaltyMode {
    PenaltyMode::Energy
}

/// Strict parse; any failure is a configuration error.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) {
        let a: T = parse(text).unwrap();
        let b: T = parse(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn configs_round_trip() {
        round_trip::<FemSolveConfig>(
            r#"{"domain":{"kind":"rectangle","bounds":[[0,1],[0,1]],"origin":"center"},
                "h":0.125,"k":10,"lambda":50,
                "f":{"kind":"gaussian","params":{"eps":0.01}},"export":"u.csv"}"#,
        );
        round_trip::<NnTrainConfig>(
            r#"{"domain":{"kind":"rectangle","bounds":[[0,1],[0,1]]},"k":20,
                "features":{"P":16,"R":2,"spread":0.1},"weights":{"gamma1":2},
                "schedule":{"iterations":10},"f":{"kind":"two-gaussian","params":{"eps":0.0001}},
                "export-every":5,"seed":3}"#,
        );
        round_trip::<ConvergenceConfig>(r#"{"k":3.14,"cells":[8,16],"reference":"minimiser"}"#);
        round_trip::<OracleConfig>(r#"{"case":"1d-minimiser","k":3,"gamma1":2}"#);
        round_trip::<IdentitiesConfig>(
            r#"{"domain":{"kind":"interval","bounds":[[0,2]],"origin":[0.5]},"case":"all","k":5}"#,
        );
        round_trip::<CoercivityConfig>(r#"{"domain":{"kind":"box","bounds":[[0,1],[0,1],[0,1]]}}"#);
    }

    #[test]
    fn unknown_keys_rejected() {
        let r = parse::<ConvergenceConfig>(r#"{"k":1,"cells":[8],"colour":"red"}"#);
        assert!(matches!(r, Err(Error::Config(_))));
        let r = parse::<FemSolveConfig>(
            r#"{"domain":{"kind":"interval","bounds":[[0,1]],"extra":1},"h":0.1,"k":1,"f":{"kind":"constant","params":{"value":1}}}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn domain_kind_must_match() {
        let d = DomainConfig {
            kind: DomainKind::Rectangle,
            bounds: vec![[0.0, 1.0]],
            origin: OriginConfig::default(),
        };
        assert!(d.build().is_err());
        let d = DomainConfig {
            origin: OriginConfig::Point(vec![0.25]),
            ..DomainConfig::unit(1)
        };
        assert_eq!(d.build().unwrap().origin()[0], 0.25);
    }

    #[test]
    fn two_gaussian_defaults_to_k_squared() {
        let s = SourceConfig::TwoGaussian { eps: 0.01, amplitude: None };
        let f = s.build(&Domain::unit_square(), 3.0).unwrap();
        let v = crate::field::SourceField::value(&f, &[0.5, 0.5, 0.0]);
        assert!((v.re - 9.0).abs() < 1e-4);
    }
}
