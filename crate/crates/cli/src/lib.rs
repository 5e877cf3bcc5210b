//! Experiment harness for `advest-core`: table presets, custom runs from
//! `key = value` configs, and a seeded randomized check of the guaranteed
//! error bound. All output is CSV.

pub mod check;
pub mod config;
pub mod presets;
pub mod runner;
pub mod source;

pub use check::{run_check, CheckSummary};
pub use config::{ConfigError, Origin, RunConfig};
pub use presets::{run_preset, Preset, PresetOutput};
pub use runner::{run_custom, CellResult, RunError};
pub use source::SourceSpec;

/// Environment variable overriding the Gauss order for analytic data.
pub const QUAD_ORDER_ENV: &str = "ADVEST_QUAD_ORDER";

/// Parses a quadrature-order override such as the value of
/// [`QUAD_ORDER_ENV`]; `None` or an empty string means no override.
pub fn parse_quad_order(value: Option<&str>) -> Result<Option<usize>, ConfigError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => {
            let mut probe = RunConfig::default();
            probe.set("quad_order", v).map_err(|_| ConfigError::Field {
                origin: Origin::CommandLine,
                field: QUAD_ORDER_ENV.to_string(),
                message: format!("expected a positive integer, got `{v}`"),
            })?;
            Ok(probe.quad_order)
        }
    }
}
