//! JSON scenario documents.
//!
//! Every key is optional; missing keys take the tabulated simulation defaults. Intensities are
//! written either as `{"count": n}` (expected aircraft in the whole box) or
//! `{"density": x}` (aircraft per km³). See `configs/schema.md` for the full key list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, PathlossUnit, RadioParams};
use crate::error::{Error, Result};
use crate::geometry::{AltitudeBand, BoxSpace, Intensity};
use crate::scenario::{InterferenceRegion, QuadratureSettings, Scenario};

/// Convention set used to turn a configuration into the engines' inputs.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// One intensity per class for both the target-distance law and the interferer field,
    /// class altitude bands everywhere.
    #[default]
    SelfConsistent,
    /// Reference-figure conventions: the target-distance law reads the UAV count as a per-km³
    /// density, interferer integrals run over the full box height, and the short bucket is
    /// weighted by the nearest-distance law.
    PaperLiteral,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::SelfConsistent, Preset::PaperLiteral];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SelfConsistent => "self-consistent",
            Preset::PaperLiteral => "paper-literal",
        }
    }

    /// Provenance remark carried by every row computed under this preset.
    pub fn provenance(self) -> Option<&'static str> {
        match self {
            Preset::SelfConsistent => None,
            Preset::PaperLiteral => {
                Some("provenance: paper-literal conventions aimed at the reference figures, not the self-consistent model")
            }
        }
    }

    /// Intensity of the target-distance law for a UAV field of `lambda_uav` in `space`.
    pub fn lambda_pdf(
        self,
        lambda_uav: &Intensity<f64>,
        space: &BoxSpace<f64>,
    ) -> Result<Intensity<f64>> {
        match self {
            Preset::SelfConsistent => Ok(*lambda_uav),
            Preset::PaperLiteral => Intensity::density(lambda_uav.expected_count(space.volume())),
        }
    }

    pub fn interference_region(self) -> InterferenceRegion {
        match self {
            Preset::SelfConsistent => InterferenceRegion::ClassBands,
            Preset::PaperLiteral => InterferenceRegion::FullHeight,
        }
    }

    /// Sets the target-distance intensity and the interference region of `scenario` to this
    /// preset's convention for its current UAV field.
    pub fn apply(self, scenario: &mut Scenario<f64>) -> Result<()> {
        scenario.lambda_pdf = self.lambda_pdf(&scenario.lambda_uav, &scenario.space)?;
        scenario.interference_region = self.interference_region();
        Ok(())
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self-consistent" => Ok(Preset::SelfConsistent),
            "paper-literal" => Ok(Preset::PaperLiteral),
            other => Err(Error::Parse {
                field: "preset".into(),
                message: format!("expected `self-consistent` or `paper-literal`, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum IntensitySpec {
    /// Expected aircraft in the whole box.
    Count(f64),
    /// Aircraft per km³.
    Density(f64),
}

impl IntensitySpec {
    pub fn resolve(self, space: &BoxSpace<f64>) -> Result<Intensity<f64>> {
        match self {
            IntensitySpec::Count(n) => Intensity::from_count(n, space.volume()),
            IntensitySpec::Density(x) => Intensity::density(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub half_x: f64,
    pub half_y: f64,
    pub height: f64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self {
            half_x: 10.0,
            half_y: 10.0,
            height: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub laplace_rel_tol: Option<f64>,
    pub outer_rel_tol: Option<f64>,
    pub truncation_mass: Option<f64>,
    pub max_segments: Option<usize>,
}

/// A scenario document as written; `None` means "use the default".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<Preset>,
    pub box_km: Option<BoxConfig>,
    pub uav_band_km: Option<[f64; 2]>,
    pub ca_band_km: Option<[f64; 2]>,
    pub lambda1: Option<IntensitySpec>,
    pub lambda2: Option<IntensitySpec>,
    /// Overrides the preset's target-distance intensity.
    pub lambda_pdf: Option<IntensitySpec>,
    pub p_u_w: Option<f64>,
    pub p_c_w: Option<f64>,
    pub g_u_dbi: Option<f64>,
    pub g_c_dbi: Option<f64>,
    pub alpha: Option<f64>,
    pub noise_dbm_per_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub fading_shape: Option<f64>,
    pub theta_db: Option<f64>,
    pub range_cutoff_km: Option<f64>,
    pub pathloss_unit: Option<PathlossUnit>,
    /// Overrides the preset's interference region.
    pub interference_region: Option<InterferenceRegion>,
    pub quadrature: Option<QuadratureConfig>,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scenario: Scenario<f64>,
    pub preset: Preset,
    pub quadrature: QuadratureSettings<f64>,
}

fn invalid(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Validation {
        field: field.into(),
        constraint: e.to_string(),
    }
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| invalid(name, e))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse {
                field: if path == "." {
                    "<document>".into()
                } else {
                    path
                },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let preset = self.preset.unwrap_or_default();
        let bx = self.box_km.unwrap_or_default();
        let space = field("box_km", BoxSpace::new(bx.half_x, bx.half_y, bx.height))?;
        let band =
            |name: &str, v: Option<[f64; 2]>, default: [f64; 2]| -> Result<AltitudeBand<f64>> {
                let [lo, hi] = v.unwrap_or(default);
                let b = field(name, AltitudeBand::new(lo, hi))?;
                field(name, b.check_within(&space))?;
                Ok(b)
            };
        let uav_band = band("uav_band_km", self.uav_band_km, [1.0, 6.0])?;
        let ca_band = band("ca_band_km", self.ca_band_km, [6.0, 10.0])?;

        let lambda_uav = field(
            "lambda1",
            self.lambda1
                .unwrap_or(IntensitySpec::Count(30.0))
                .resolve(&space),
        )?;
        let lambda_ca = field(
            "lambda2",
            self.lambda2
                .unwrap_or(IntensitySpec::Count(15.0))
                .resolve(&space),
        )?;
        let lambda_pdf = match self.lambda_pdf {
            Some(spec) => field("lambda_pdf", spec.resolve(&space))?,
            None => preset.lambda_pdf(&lambda_uav, &space)?,
        };

        let uav_radio = field(
            "p_u_w",
            RadioParams::new(self.p_u_w.unwrap_or(16.0), self.g_u_dbi.unwrap_or(23.0)),
        )?;
        let ca_radio = field(
            "p_c_w",
            RadioParams::new(self.p_c_w.unwrap_or(30.0), self.g_c_dbi.unwrap_or(20.0)),
        )?;
        let channel = ChannelParams {
            alpha: self.alpha.unwrap_or(2.0),
            noise_density_dbm_per_hz: self.noise_dbm_per_hz.unwrap_or(-174.0),
            bandwidth_hz: self.bandwidth_hz.unwrap_or(1e6),
            fading_shape: self.fading_shape.unwrap_or(1.0),
            pathloss_unit: self.pathloss_unit.unwrap_or_default(),
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("alpha", channel.alpha)?;
        positive("bandwidth_hz", channel.bandwidth_hz)?;
        positive("fading_shape", channel.fading_shape)?;
        if !channel.noise_density_dbm_per_hz.is_finite() {
            return Err(invalid("noise_dbm_per_hz", "must be finite"));
        }

        let scenario = Scenario {
            space,
            uav_band,
            ca_band,
            lambda_pdf,
            lambda_uav,
            lambda_ca,
            uav_radio,
            ca_radio,
            channel,
            theta_db: self.theta_db.unwrap_or(7.0),
            range_cutoff_km: self
                .range_cutoff_km
                .unwrap_or(crate::geometry::DEFAULT_RANGE_CUTOFF_KM),
            interference_region: self
                .interference_region
                .unwrap_or(preset.interference_region()),
        };
        scenario.validate()?;

        let q = self.quadrature.unwrap_or_default();
        let d = QuadratureSettings::<f64>::default();
        let quadrature = QuadratureSettings {
            laplace_rel_tol: q.laplace_rel_tol.unwrap_or(d.laplace_rel_tol),
            outer_rel_tol: q.outer_rel_tol.unwrap_or(d.outer_rel_tol),
            truncation_mass: q.truncation_mass.unwrap_or(d.truncation_mass),
            max_segments: q.max_segments.unwrap_or(d.max_segments),
        };
        quadrature.validate()?;
        Ok(Experiment {
            scenario,
            preset,
            quadrature,
        })
    }
}

pub fn parse_experiment(text: &str) -> Result<Experiment> {
    ScenarioConfig::parse(text)?.resolve()
}

pub fn load_experiment(path: impl AsRef<Path>) -> Result<Experiment> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_experiment(&text)
}

/// The validated scenario of the document at `path`.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario<f64>> {
    load_experiment(path).map(|e| e.scenario)
}
