//! Run configuration (TOML) and the shipped presets.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cutoffs::NFParams;
use crate::error::{Error, Result};
use crate::lattice::{dual_basis, DualLattice, Lattice, Mode};
use crate::normalform::{NfConfig, Perturbation};
use crate::spectra::floquet_shift;
use crate::symexpr::{parse, FourierSymbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Generators of Γ, one per row.
    pub basis: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Coordinates of k in the dual basis.
    pub k: Vec<i64>,
    /// Coefficient â(k, ξ) in the expression syntax of [`crate::symexpr::parse`].
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub m: f64,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfSection {
    pub frak_e: f64,
    pub delta: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub gamma: f64,
    #[serde(default = "default_n_target")]
    pub n_target: usize,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_floor: Option<f64>,
}

fn default_n_target() -> usize {
    3
}

fn default_j_max() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub r_trunc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusConfig {
    pub radii: Vec<f64>,
    pub mc_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub operator: OperatorConfig,
    pub nf: NfSection,
    pub truncation: TruncationConfig,
    pub census: CensusConfig,
    pub output: OutputConfig,
}

/// Objects built from a validated config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub dual: Arc<DualLattice>,
    pub params: NFParams,
    pub perturbation: Perturbation,
    pub nf: NfConfig,
}

pub const PRESETS: [&str; 4] = ["mathieu-1d", "square-2d", "unbounded-2d", "floquet-2d"];

fn term(k: &[i64], coeff: &str) -> TermConfig {
    TermConfig { k: k.to_vec(), coeff: coeff.to_string() }
}

fn census(radii: &[f64]) -> CensusConfig {
    CensusConfig { radii: radii.to_vec(), mc_samples: 100_000, seed: 20_240_917 }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<RunConfig> {
        let two_pi = 2.0 * PI;
        let square = LatticeConfig { basis: vec![vec![two_pi, 0.0], vec![0.0, two_pi]] };
        let output = OutputConfig { dir: "out".into() };
        let cfg = match name {
            "mathieu-1d" => RunConfig {
                lattice: LatticeConfig { basis: vec![vec![two_pi]] },
                operator: OperatorConfig {
                    m: 2.0,
                    symmetric: true,
                    kappa: None,
                    terms: vec![term(&[1], "1"), term(&[-1], "1")],
                },
                nf: NfSection {
                    frak_e: 2.0,
                    delta: 0.75,
                    tau: 0.5,
                    epsilon: 0.5,
                    gamma: 0.4,
                    n_target: 2,
                    j_max: 3,
                    order_floor: None,
                },
                truncation: TruncationConfig { r_trunc: 128.0 },
                census: census(&[50.0, 100.0, 200.0, 400.0]),
                output,
            },
            "square-2d" | "floquet-2d" => RunConfig {
                lattice: square,
                operator: OperatorConfig {
                    m: 2.0,
                    symmetric: true,
                    kappa: (name == "floquet-2d").then(|| vec![0.3, 0.0]),
                    terms: vec![term(&[1, 0], "1"), term(&[-1, 0], "1"), term(&[0, 1], "1"), term(&[0, -1], "1")],
                },
                nf: NfSection {
                    frak_e: 2.0,
                    delta: 0.75,
                    tau: 2.0,
                    epsilon: 0.25,
                    gamma: 0.4,
                    n_target: 2,
                    j_max: 3,
                    order_floor: None,
                },
                truncation: TruncationConfig { r_trunc: 24.0 },
                census: census(&[50.0, 100.0, 200.0, 400.0]),
                output,
            },
            "unbounded-2d" => RunConfig {
                lattice: square,
                operator: OperatorConfig {
                    m: 2.0,
                    symmetric: true,
                    kappa: None,
                    terms: vec![term(&[1, 0], "0.5*jap(0.5)"), term(&[-1, 0], "0.5*jap(0.5)")],
                },
                nf: NfSection {
                    frak_e: 1.5,
                    delta: 0.8,
                    tau: 1.5,
                    epsilon: 0.32,
                    gamma: 0.4,
                    n_target: 2,
                    j_max: 3,
                    order_floor: None,
                },
                truncation: TruncationConfig { r_trunc: 24.0 },
                census: census(&[25.0, 50.0, 100.0, 200.0]),
                output,
            },
            other => {
                return Err(Error::Config(format!("unknown preset `{other}`; expected one of {}", PRESETS.join(", "))))
            }
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.setup()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lattice.basis.len()
    }

    pub fn params(&self) -> NFParams {
        NFParams {
            m: self.operator.m,
            frak_e: self.nf.frak_e,
            delta: self.nf.delta,
            tau: self.nf.tau,
            epsilon: self.nf.epsilon,
            gamma: self.nf.gamma,
            dim: self.dim(),
        }
    }

    /// Validates every invariant and builds lattice, parameters and perturbation.
    pub fn setup(&self) -> Result<Setup> {
        let dual = Arc::new(dual_basis(&Lattice::new(self.lattice.basis.clone())?)?);
        let params = self.params();
        params.validate(&dual)?;
        let d = self.dim();
        let mut terms = Vec::with_capacity(self.operator.terms.len());
        for t in &self.operator.terms {
            if t.k.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.k.len() });
            }
            terms.push((Mode(t.k.clone()), parse(&t.coeff, d)?));
        }
        let declared = params.m - params.frak_e;
        let v0 = FourierSymbol::from_terms(dual.clone(), terms, declared, 1.0)?;
        let mut perturbation = Perturbation::new(v0, self.operator.symmetric)?;
        perturbation.check_order(declared)?;
        if let Some(kappa) = &self.operator.kappa {
            perturbation = floquet_shift(&perturbation, kappa)?;
        }
        if !(self.truncation.r_trunc > 0.0) {
            return Err(Error::Config("r_trunc must be positive".into()));
        }
        let mut nf = NfConfig::new(&params, self.nf.n_target, self.nf.j_max);
        if let Some(floor) = self.nf.order_floor {
            nf = nf.with_floor(floor);
        }
        Ok(Setup { dual, params, perturbation, nf })
    }
}
