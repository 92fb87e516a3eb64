//! Configuration, sweeps, figure reproduction and the property suite.
//!
//! The harness works in `f64` throughout; every row it emits names the preset it was computed
//! under.

pub mod config;
pub mod figures;
pub mod properties;
pub mod replication;
pub mod sweep;

pub use config::{
    load_experiment, load_scenario, parse_experiment, Experiment, Preset, ScenarioConfig,
};
pub use figures::{reproduce_figure, FigureOptions, FigureSummary, GridDensity};
pub use properties::{run_property_suite, Fault, PropertyReport, PropertyResult, SuiteOptions};
pub use replication::{replication_report, ReplicationReport};
pub use sweep::{
    read_csv, run_sweep, write_csv, Engines, Series, SweepRow, SweepSpec, SweepVar, CSV_HEADER,
};

use crate::analytic::{conditional_success, p_suc_bucket, p_suc_nearest, p_suc_nearest_in_bucket};
use crate::error::Result;
use crate::geometry::RangeBucket;
use crate::montecarlo::TrialProtocol;
use crate::scenario::{QuadratureSettings, Scenario};

/// Analytic counterpart of a Monte Carlo protocol under `preset`.
///
/// Population buckets use the uniform-placement distance law, except the short bucket under
/// the paper-literal preset, which is weighted by the nearest-distance law. The long bucket
/// keeps uniform placement there because the nearest-distance law has no mass beyond the
/// cutoff at the reference densities.
pub fn analytic_value(
    preset: Preset,
    scenario: &Scenario<f64>,
    protocol: TrialProtocol,
    bucket: Option<RangeBucket>,
    quad: &QuadratureSettings<f64>,
) -> Result<f64> {
    match protocol {
        TrialProtocol::FixedDistance(d) => conditional_success(d, scenario, quad),
        TrialProtocol::NearestTarget => p_suc_nearest(scenario, quad),
        TrialProtocol::Population => {
            let bucket = bucket.unwrap_or(RangeBucket::Short);
            match (preset, bucket) {
                (Preset::PaperLiteral, RangeBucket::Short) => {
                    p_suc_nearest_in_bucket(scenario, bucket, quad)
                }
                _ => p_suc_bucket(scenario, bucket, quad),
            }
        }
    }
}
