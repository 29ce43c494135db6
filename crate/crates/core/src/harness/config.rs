//! Experiment configuration: a flat JSON file with defaults matching the
//! standard simulation setup, validated on parse.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::McrlbNoise;
use crate::doppler_init::TrainingConfig;
use crate::error::{Error, Result};
use crate::signal::OfdmConfig;

/// Which experiment a config drives. Normally implied by the CLI subcommand;
/// a value in the file must agree when both are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BerVsSnr,
    BerVsSpeed,
    RmseVsSnr,
    TrainFnn,
    Accounting,
}

/// Doppler initialization strategy fed to the decision-directed tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Start every path at ν̂ = 0.
    Zd,
    /// Grid search minimizing the pilot error vector magnitude.
    Evm,
    /// Dense-network regression on the normalized pilot branch.
    Dl,
    /// Bypass estimation entirely; the receiver gets the true channel.
    PerfectCsi,
}

fn default_fc_hz() -> f64 {
    5.9e9
}
fn default_subcarriers() -> usize {
    128
}
fn default_symbols() -> usize {
    32
}
fn default_delta_f() -> f64 {
    30e3
}
fn default_t_cp() -> f64 {
    5e-6
}
fn default_antennas() -> usize {
    32
}
fn default_tx_power() -> f64 {
    1.0
}
fn default_mod_order() -> usize {
    4
}
fn default_v_max() -> f64 {
    300.0
}
fn default_snr_db() -> f64 {
    -4.0
}
fn default_trials() -> usize {
    500
}
fn default_init() -> InitMethod {
    InitMethod::Zd
}
fn default_cfar_pfa() -> f64 {
    1e-3
}
fn default_cfar_training() -> usize {
    8
}
fn default_cfar_guard() -> usize {
    2
}
fn default_angle_step_deg() -> f64 {
    0.5
}
fn default_delay_grid_divisor() -> usize {
    10
}
fn default_evm_max_hz() -> f64 {
    5e3
}
fn default_evm_step_hz() -> f64 {
    50.0
}
fn default_coherence_time_s() -> f64 {
    10e-3
}
fn default_short_frame_s() -> f64 {
    1e-3
}

/// Full experiment description. Every field has a default, so an empty file
/// runs the standard setup.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    /// Sweep grid: SNR values in dB for SNR sweeps, speeds in km/h for the
    /// speed sweep. Omit for the per-experiment default grid.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "default_v_max")]
    pub v_max_kmh: f64,
    /// Fixed SNR used by sweeps whose variable is not SNR.
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_init")]
    pub init: InitMethod,
    #[serde(default)]
    pub seed: u64,

    #[serde(default = "default_fc_hz")]
    pub fc_hz: f64,
    #[serde(default = "default_subcarriers")]
    pub num_subcarriers: usize,
    #[serde(default = "default_symbols")]
    pub num_symbols: usize,
    #[serde(default = "default_delta_f")]
    pub delta_f_hz: f64,
    #[serde(default = "default_t_cp")]
    pub t_cp_s: f64,
    #[serde(default = "default_antennas")]
    pub num_rx_antennas: usize,
    #[serde(default = "default_tx_power")]
    pub tx_power: f64,
    #[serde(default = "default_mod_order")]
    pub mod_order: usize,

    #[serde(default = "default_cfar_pfa")]
    pub cfar_pfa: f64,
    #[serde(default = "default_cfar_training")]
    pub cfar_training_cells: usize,
    #[serde(default = "default_cfar_guard")]
    pub cfar_guard_cells: usize,
    #[serde(default = "default_angle_step_deg")]
    pub angle_step_deg: f64,
    /// Delay grid step is Δτ divided by this.
    #[serde(default = "default_delay_grid_divisor")]
    pub delay_grid_divisor: usize,

    #[serde(default = "default_evm_max_hz")]
    pub evm_max_hz: f64,
    #[serde(default = "default_evm_step_hz")]
    pub evm_step_hz: f64,

    #[serde(default)]
    pub mcrlb_noise: McrlbNoise,

    /// Coherence interval for the continuous-transmission overhead figure.
    #[serde(default = "default_coherence_time_s")]
    pub coherence_time_s: f64,
    /// Frame duration for the short-frame overhead figure.
    #[serde(default = "default_short_frame_s")]
    pub short_frame_s: f64,

    #[serde(default = "TrainingConfig::default")]
    pub training: TrainingConfig,

    #[serde(default)]
    pub model_path: Option<String>,
    #[serde(default)]
    pub out_path: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are total")
    }
}

impl ExperimentConfig {
    pub fn ofdm(&self) -> Result<OfdmConfig> {
        OfdmConfig::new(
            self.fc_hz,
            self.num_subcarriers,
            self.num_symbols,
            self.delta_f_hz,
            self.t_cp_s,
            self.num_rx_antennas,
            self.tx_power,
            self.mod_order,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(Error::Config("sweep grid must be nonempty".into()));
            }
        }
        if !(self.cfar_pfa > 0.0 && self.cfar_pfa < 1.0) {
            return Err(Error::Config("cfar_pfa must lie in (0,1)".into()));
        }
        if self.cfar_training_cells == 0 {
            return Err(Error::Config("cfar_training_cells must be positive".into()));
        }
        if !(self.angle_step_deg > 0.0) {
            return Err(Error::Config("angle_step_deg must be positive".into()));
        }
        if self.delay_grid_divisor == 0 {
            return Err(Error::Config("delay_grid_divisor must be positive".into()));
        }
        if !(self.evm_step_hz > 0.0) || !(self.evm_max_hz >= self.evm_step_hz) {
            return Err(Error::Config("EVM grid must have positive step <= range".into()));
        }
        if !(self.coherence_time_s > 0.0) || !(self.short_frame_s > 0.0) {
            return Err(Error::Config("accounting durations must be positive".into()));
        }
        self.ofdm().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Canonical JSON rendering (stable field order, pretty-printed).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses an experiment config file. An empty (or whitespace-only) file
/// yields the full default setup.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&raw)
}

/// Parses config text; see [`parse_config`].
pub fn parse_config_str(raw: &str) -> Result<ExperimentConfig> {
    let text = if raw.trim().is_empty() { "{}" } else { raw };
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}
