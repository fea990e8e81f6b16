//! JSON run configurations. Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use aniso_symm::aniso_fd::FdSettings;
use aniso_symm::radial_solver::{radial_data, SolveSettings, ZeroOrderTerm};
use aniso_symm::symmetrize::{klimov, GridFunction, KlimovSettings, MonotoneCurve};
use aniso_symm::young::{YoungFunction1D, YoungFunctionND};
use aniso_symm::Result;

use crate::CliError;

/// Tolerance constant `C` in `tol_disc = C·(h + h_s)`, calibrated on the
/// torsion problem `−Δu + u = 1` on the disk of unit area (twice the largest
/// observed `sup|B − B̃| / (h + h_s)` over meshes 32…256).
pub const DEFAULT_TOL_CONSTANT: f64 = 0.2;

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> std::result::Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlimovConfig {
    pub phi: YoungFunctionND,
    #[serde(default)]
    pub settings: KlimovSettings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Square { lower: Vec<f64>, side: f64 },
    Disk { center: Vec<f64>, radius: f64 },
}

impl DomainSpec {
    pub fn grid(&self, n: usize) -> Result<GridFunction> {
        match self {
            Self::Square { lower, side } => GridFunction::square(lower.len(), lower.clone(), *side, n),
            Self::Disk { center, radius } => GridFunction::disk(center.len(), center.clone(), *radius, n),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Square { lower, side } => lower.iter().map(|l| l + side / 2.0).collect(),
            Self::Disk { center, .. } => center.clone(),
        }
    }
}

/// Right-hand side on the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Constant {
        value: f64,
    },
    /// `amplitude · exp(−sharpness·|x − center|²)`, centered in the domain by default.
    Bump {
        amplitude: f64,
        sharpness: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
}

impl DataSpec {
    pub fn sample(&self, domain: &DomainSpec, n: usize) -> Result<GridFunction> {
        let g = domain.grid(n)?;
        Ok(match self {
            Self::Constant { value } => {
                let v = *value;
                g.with_values(move |_| v)
            }
            Self::Bump { amplitude, sharpness, center } => {
                let c = center.clone().unwrap_or_else(|| domain.center());
                g.with_values(|x| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    amplitude * (-sharpness * r2).exp()
                })
            }
        })
    }
}

/// Where the one-dimensional Young function of the radial problem comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiDiamondSpec {
    Explicit {
        function: YoungFunction1D,
    },
    /// Klimov symmetrization of `phi`; in comparison runs `phi` defaults to
    /// the power sum of the anisotropic problem.
    Klimov {
        #[serde(default)]
        phi: Option<YoungFunctionND>,
        #[serde(default)]
        settings: KlimovSettings,
    },
}

impl Default for PhiDiamondSpec {
    fn default() -> Self {
        Self::Klimov { phi: None, settings: KlimovSettings { equivalence: false, ..Default::default() } }
    }
}

impl PhiDiamondSpec {
    pub fn resolve(&self, fallback: Option<&YoungFunctionND>) -> std::result::Result<YoungFunction1D, CliError> {
        match self {
            Self::Explicit { function } => Ok(function.clone()),
            Self::Klimov { phi, settings } => {
                let phi = phi
                    .as_ref()
                    .or(fallback)
                    .ok_or_else(|| CliError::Config("klimov source needs `phi`".into()))?;
                Ok(klimov(phi, settings)?.phi_diamond)
            }
        }
    }
}

/// Datum of a stand-alone radial solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialDataSpec {
    Constant { value: f64 },
    /// Nonincreasing radial profile `f̃(r)` through `(r, values)`.
    Profile { r: Vec<f64>, values: Vec<f64> },
}

impl RadialDataSpec {
    pub fn rearranged(&self, dim: usize, measure: f64, cells: usize) -> Result<MonotoneCurve> {
        match self {
            Self::Constant { value } => radial_data(dim, measure, |_| *value, cells),
            Self::Profile { r, values } => {
                if r.len() < 2 || r.len() != values.len() {
                    return Err(aniso_symm::Error::InvalidInput("profile needs matching r and values".into()));
                }
                radial_data(dim, measure, |x| aniso_symm::numeric::interp_linear(r, values, x), cells)
            }
        }
    }
}

fn default_cells() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRadialConfig {
    pub dim: usize,
    pub measure: f64,
    pub phi_diamond: PhiDiamondSpec,
    pub b: ZeroOrderTerm,
    pub data: RadialDataSpec,
    /// Cells of the step representation of `f̃*`.
    #[serde(default = "default_cells")]
    pub data_cells: usize,
    #[serde(default)]
    pub settings: SolveSettings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveAnisoConfig {
    pub domain: DomainSpec,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    pub b: ZeroOrderTerm,
    pub data: DataSpec,
    #[serde(default)]
    pub settings: FdSettings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedYoung {
    pub name: String,
    pub function: YoungFunction1D,
}

pub fn default_masses() -> Vec<NamedYoung> {
    (1..=3)
        .map(|k| NamedYoung {
            name: if k == 1 { "t".into() } else { format!("t^{k}") },
            function: YoungFunction1D::power_law(1.0, k as f64).expect("valid power"),
        })
        .collect()
}

/// Remark (K): the radial side is solved with `Φ_★` and the anisotropic
/// concentrations are scaled by `K` (the lower equivalence constant by default).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KVariantSpec {
    #[serde(default)]
    pub k: Option<f64>,
}

/// Samples `t_min..t_max` for the contraction test of `b̃⁻¹ ≺ b⁻¹`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRange {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    pub domain: DomainSpec,
    pub meshes: Vec<usize>,
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    pub b: ZeroOrderTerm,
    pub data: DataSpec,
    /// `f̃ = scale · f★`.
    #[serde(default = "one")]
    pub data_tilde_scale: f64,
    #[serde(default)]
    pub phi_diamond: PhiDiamondSpec,
    #[serde(default)]
    pub fd: FdSettings,
    #[serde(default)]
    pub radial: SolveSettings,
    #[serde(default = "default_masses")]
    pub masses: Vec<NamedYoung>,
    #[serde(default)]
    pub uniqueness: bool,
    #[serde(default)]
    pub k_variant: Option<KVariantSpec>,
    /// Zero-order term of the radial side; when set, margins are reported
    /// without a pass threshold.
    #[serde(default)]
    pub b_tilde: Option<ZeroOrderTerm>,
    #[serde(default)]
    pub weaker_samples: Option<SampleRange>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "default_tol_constant")]
    pub tol_constant: f64,
    pub cases: Vec<CaseConfig>,
}

fn default_tol_constant() -> f64 {
    DEFAULT_TOL_CONSTANT
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    FenchelMoreau,
    YoungGap,
    PolyaSzego,
    Delta2Inheritance,
    PsiInequality,
    Torsion,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::FenchelMoreau,
        Suite::YoungGap,
        Suite::PolyaSzego,
        Suite::Delta2Inheritance,
        Suite::PsiInequality,
        Suite::Torsion,
    ];
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

fn default_seed() -> u64 {
    20_240_601
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random tables in the Fenchel–Moreau suite.
    #[serde(default = "default_fm_count")]
    pub fenchel_moreau_count: usize,
    /// Random bumps in the Pólya–Szegő suite.
    #[serde(default = "default_ps_count")]
    pub polya_szego_count: usize,
    /// Negative control: shifts the computed torsion profiles by this amount.
    #[serde(default)]
    pub perturbation: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        parse("{}").expect("defaults parse")
    }
}

fn default_fm_count() -> usize {
    100
}

fn default_ps_count() -> usize {
    50
}
