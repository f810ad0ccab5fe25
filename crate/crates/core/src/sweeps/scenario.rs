use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::plant::{sort_locations, AXIS_TOL};
use crate::lti::{PlantModel, RationalFn, TransferMatrix};
use crate::network::{butter1, ChannelSpec, NetworkConstraints, Quantizer};
use crate::oracle::{QuadratureGrid, YoulaBasis};

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Coefficients in ascending powers of `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfConfig {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PlantConfig {
    Pz {
        #[serde(default)]
        zeros: Vec<Point>,
        #[serde(default)]
        poles: Vec<Point>,
        #[serde(default = "one")]
        gain: f64,
    },
    Tf {
        num: Vec<f64>,
        den: Vec<f64>,
    },
    Matrix {
        entries: Vec<Vec<TfConfig>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitsQuantizer {
    pub bits: u32,
    #[serde(default = "one")]
    pub range: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaQuantizer {
    pub sigma_q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantizerConfig {
    Bits(BitsQuantizer),
    Sigma(SigmaQuantizer),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FilterConfig {
    Butter1 { cutoff_rad_s: f64 },
    Tf { num: Vec<f64>, den: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default)]
    pub sigma_n: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub quantizer: Option<QuantizerConfig>,
    #[serde(default)]
    pub filter: Option<FilterConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub sigma_r: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    pub basis_degree: usize,
    pub grid_points: usize,
    pub basis_pole: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { enabled: false, basis_degree: 40, grid_points: 2000, basis_pole: 1.0 }
    }
}

impl OracleConfig {
    pub fn basis(&self) -> Result<YoulaBasis> {
        YoulaBasis::new(self.basis_degree, self.basis_pole)
    }

    pub fn grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::log(self.grid_points, 1e-4, 1e4)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub plant: PlantConfig,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    #[serde(default)]
    pub oracle: OracleConfig,
}

/// A validated scenario ready for evaluation.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub plant: PlantModel,
    pub constraints: NetworkConstraints,
    pub oracle: OracleConfig,
}

fn field_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("{field}: {e}"))
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(field, format!("expected a finite number, got {v}")))
    }
}

fn tf_from(field: &str, num: &[f64], den: &[f64]) -> Result<RationalFn> {
    for (k, v) in num.iter().enumerate() {
        finite(&format!("{field}.num[{k}]"), *v)?;
    }
    for (k, v) in den.iter().enumerate() {
        finite(&format!("{field}.den[{k}]"), *v)?;
    }
    if den.is_empty() {
        return Err(field_err(&format!("{field}.den"), "required, expected at least one coefficient"));
    }
    RationalFn::from_coeffs(num, den).map_err(|e| field_err(field, e))
}

/// Every non-real entry has a matching conjugate, counted with multiplicity.
fn conjugates_paired(list: &[Complex64]) -> bool {
    let tol = |c: Complex64| 1e-12 * (1.0 + c.norm());
    let mut rest: Vec<Complex64> = list.iter().copied().filter(|c| c.im.abs() > tol(*c)).collect();
    while let Some(c) = rest.pop() {
        match rest.iter().position(|d| (*d - c.conj()).norm() <= tol(c)) {
            Some(k) => {
                rest.swap_remove(k);
            }
            None => return false,
        }
    }
    true
}

impl PlantConfig {
    pub fn build(&self) -> Result<PlantModel> {
        match self {
            PlantConfig::Pz { zeros, poles, gain } => {
                let pts = |name: &str, list: &[Point]| -> Result<Vec<Complex64>> {
                    list.iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let f = format!("plant.{name}[{k}]");
                            let c = Complex64::new(finite(&format!("{f}.re"), p.re)?, finite(&format!("{f}.im"), p.im)?);
                            if name == "poles" && c.re.abs() <= AXIS_TOL {
                                return Err(field_err(&f, "poles on the imaginary axis are not supported"));
                            }
                            Ok(c)
                        })
                        .collect()
                };
                let (z, p) = (pts("zeros", zeros)?, pts("poles", poles)?);
                for (name, list) in [("zeros", &z), ("poles", &p)] {
                    if !conjugates_paired(list) {
                        return Err(field_err(&format!("plant.{name}"), "complex entries must come in conjugate pairs"));
                    }
                }
                if z.len() > p.len() {
                    return Err(field_err("plant", "more zeros than poles gives an improper plant"));
                }
                let gain = finite("plant.gain", *gain)?;
                if gain == 0.0 {
                    return Err(field_err("plant.gain", "must be nonzero"));
                }
                let g = RationalFn::from_zpk(&z, &p, gain).map_err(|e| field_err("plant", e))?;
                // Listed locations are kept even when they cancel, so collisions surface as divergence.
                let mut up: Vec<Complex64> = p.iter().copied().filter(|c| c.re > 0.0).collect();
                let mut nz: Vec<Complex64> = z.iter().copied().filter(|c| c.re > AXIS_TOL).collect();
                sort_locations(&mut up);
                sort_locations(&mut nz);
                PlantModel::new(TransferMatrix::scalar(g), up, nz).map_err(|e| field_err("plant", e))
            }
            PlantConfig::Tf { num, den } => {
                let g = tf_from("plant", num, den)?;
                PlantModel::from_tf(TransferMatrix::scalar(g)).map_err(|e| field_err("plant", e))
            }
            PlantConfig::Matrix { entries } => {
                if entries.is_empty() {
                    return Err(field_err("plant.entries", "required, expected at least one row"));
                }
                let rows = entries
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, t)| tf_from(&format!("plant.entries[{i}][{j}]"), &t.num, &t.den))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let g = TransferMatrix::from_rows(rows).map_err(|e| field_err("plant.entries", e))?;
                PlantModel::from_tf(g).map_err(|e| field_err("plant", e))
            }
        }
    }
}

impl ChannelConfig {
    pub fn build(&self, field: &str) -> Result<ChannelSpec> {
        let quantizer = match self.quantizer {
            None => None,
            Some(QuantizerConfig::Bits(b)) => {
                if b.bits == 0 || b.bits > 64 {
                    return Err(field_err(&format!("{field}.quantizer.bits"), "expected an integer in 1..=64"));
                }
                Some(Quantizer::Bits { bits: b.bits, range: b.range })
            }
            Some(QuantizerConfig::Sigma(s)) => Some(Quantizer::Sigma { sigma_q: s.sigma_q }),
        };
        let filter = match &self.filter {
            None => RationalFn::one(),
            Some(FilterConfig::Butter1 { cutoff_rad_s }) => {
                butter1(*cutoff_rad_s).map_err(|e| field_err(&format!("{field}.filter.cutoff_rad_s"), e))?
            }
            Some(FilterConfig::Tf { num, den }) => tf_from(&format!("{field}.filter"), num, den)?,
        };
        ChannelSpec::new(self.sigma_n, quantizer, self.lambda, filter).map_err(|e| field_err(field, e))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let at = format!("line {} column {}", inner.line(), inner.column());
            if path == "." {
                Error::Scenario(format!("{at}: {inner}"))
            } else {
                Error::Scenario(format!("{path} ({at}): {inner}"))
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<Scenario> {
        let plant = self.plant.build()?;
        let m = plant.outputs();
        if self.channels.is_empty() {
            return Err(field_err("channels", format!("required, expected {m} entries")));
        }
        if self.channels.len() != m {
            return Err(field_err(
                "channels",
                format!("dimension mismatch: {} entries for a plant with {m} outputs", self.channels.len()),
            ));
        }
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| c.build(&format!("channels[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let sigma_r = match &self.reference {
            None => vec![0.0; m],
            Some(r) if r.sigma_r.len() != m => {
                return Err(field_err(
                    "reference.sigma_r",
                    format!("dimension mismatch: {} entries for a plant with {m} outputs", r.sigma_r.len()),
                ))
            }
            Some(r) => r.sigma_r.clone(),
        };
        let constraints = NetworkConstraints::new(channels, sigma_r).map_err(|e| field_err("reference", e))?;
        if self.oracle.enabled {
            self.oracle.basis().map_err(|e| field_err("oracle.basis_degree", e))?;
            self.oracle.grid().map_err(|e| field_err("oracle.grid_points", e))?;
        }
        Ok(Scenario { plant, constraints, oracle: self.oracle.clone() })
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
