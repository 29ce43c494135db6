//! Monte Carlo experiment harness: seeded sweeps over SNR, speed, or Doppler,
//! BER/RMSE aggregation with bound overlays, resource accounting, and CSV
//! emission.
//!
//! Determinism: every trial derives its RNG seed from (master seed, sweep
//! point index, trial index), and aggregation is a plain sum over trial
//! outcomes collected in index order, so results are byte-identical for a
//! given (config, seed) regardless of thread scheduling.

pub mod config;

use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::bounds::{mcrlb_weighted, McrlbNoise};
use crate::channel::{
    default_pilot, draw_channel, generate_frame, random_data_bits, ChannelRealization,
    ObservationFrame, PathParams, ScenarioSpec, TxFrame,
};
use crate::doppler_init::{self, evm_grid, init_dl, init_evm, model_io, FnnModel, TrainingReport};
use crate::error::{Error, Result};
use crate::estimator::{angle_mf, estimate_paths, CfarConfig, SearchGrids};
use crate::receiver::{
    delay_compensate, detect_frame, ici_compensate, mrc_combine, window_length,
};
use crate::signal::{q_function, qam_slice, OfdmConfig};

pub use config::{parse_config, parse_config_str, ExperimentConfig, ExperimentKind, InitMethod};

/// Aggregated results for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub ber: f64,
    pub ber_awgn_ref: f64,
    pub rmse_hz: f64,
    pub mcrlb_hz: f64,
    pub trials: usize,
    pub frame_failures: usize,
}

/// One per-window tracker diagnostic record (emitted under --verbose).
#[derive(Debug, Clone)]
pub struct DiagRow {
    pub sweep_value: f64,
    pub trial: usize,
    pub path: usize,
    pub window_start: usize,
    pub nu_hz: f64,
    pub gain_re: f64,
    pub gain_im: f64,
}

/// Full sweep output.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub wall_clock: Duration,
    pub diagnostics: Vec<DiagRow>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed independent of scheduling or batching.
fn derive_seed(master: u64, point: usize, trial: usize) -> u64 {
    let a = splitmix64(master.wrapping_add(splitmix64(point as u64 + 1)));
    splitmix64(a ^ splitmix64((trial as u64) << 1 | 1))
}

/// Bit errors between two equal-length bit strings.
pub fn count_bit_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

struct TrialSetup<'a> {
    ofdm: &'a OfdmConfig,
    scenario: &'a ScenarioSpec,
    init: InitMethod,
    model: Option<&'a FnnModel>,
    cfar: &'a CfarConfig,
    grids: &'a SearchGrids,
    evm: &'a [f64],
    k: usize,
    pilot: &'a [Complex64],
    collect_diag: bool,
    sweep_value: f64,
}

#[derive(Debug, Default, Clone)]
struct TrialOutcome {
    bit_errors: u64,
    bits: u64,
    weighted_sq_err: f64,
    failed: bool,
    diag: Vec<DiagRow>,
}

/// Σ_p |α_p|²·ν_p²/‖α‖² — the RMSE contribution of a frame with no usable
/// Doppler estimates.
fn all_paths_missed(channel: &ChannelRealization) -> f64 {
    let total = channel.total_gain_power();
    channel
        .paths
        .iter()
        .map(|p| p.alpha.norm_sqr() * p.nu_hz * p.nu_hz)
        .sum::<f64>()
        / total
}

/// Power-weighted squared Doppler error with nearest-angle association.
///
/// Each estimated path is assigned to the true path nearest in angle; true
/// paths that attract no estimate contribute their full ν_p² (as if ν̂ = 0).
fn weighted_doppler_sq_err(channel: &ChannelRealization, estimates: &[(f64, f64)]) -> f64 {
    let nearest_true = |theta_hat: f64| -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in channel.paths.iter().enumerate() {
            let d = (p.theta_rad - theta_hat).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    };
    let total = channel.total_gain_power();
    let mut acc = 0.0;
    for (i, p) in channel.paths.iter().enumerate() {
        let mut nu_hat = 0.0;
        let mut best_d = f64::INFINITY;
        for &(theta_hat, nu) in estimates {
            if nearest_true(theta_hat) == i {
                let d = (p.theta_rad - theta_hat).abs();
                if d < best_d {
                    best_d = d;
                    nu_hat = nu;
                }
            }
        }
        let e = p.nu_hz - nu_hat;
        acc += p.alpha.norm_sqr() * e * e;
    }
    acc / total
}

/// Slices every data symbol against the true per-symbol gains (perfect CSI).
fn decode_perfect_csi(
    frame: &ObservationFrame,
    tx: &TxFrame,
    channel: &ChannelRealization,
    ofdm: &OfdmConfig,
) -> u64 {
    let bits_per_symbol = ofdm.bits_per_symbol();
    let mut errors = 0u64;
    for n in 2..=ofdm.num_symbols {
        let mut per_path = Vec::with_capacity(channel.paths.len());
        let mut gains = Vec::with_capacity(channel.paths.len());
        for (p, path) in channel.paths.iter().enumerate() {
            let branch = angle_mf(frame.symbol(n), path.theta_rad);
            let y_ici = ici_compensate(&branch, path.nu_hz, ofdm.delay_resolution());
            per_path.push(delay_compensate(&y_ici, path.tau_s, ofdm.delta_f_hz));
            gains.push(channel.time_varying_gain(p, n, ofdm));
        }
        let combined = mrc_combine(&per_path, &gains).expect("nonempty path list");
        let (_, got) = qam_slice(&combined);
        let want = &tx.data_bits[(n - 2) * bits_per_symbol..(n - 1) * bits_per_symbol];
        errors += count_bit_errors(&got, want);
    }
    errors
}

fn run_trial(setup: &TrialSetup<'_>, trial: usize, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = TrialOutcome::default();

    let channel = match draw_channel(setup.ofdm, setup.scenario, &mut rng) {
        Ok(c) => c,
        Err(_) => {
            out.failed = true;
            return out;
        }
    };
    let bits = random_data_bits(setup.ofdm, &mut rng);
    let (frame, tx) = match generate_frame(setup.pilot, &bits, &channel, setup.ofdm, &mut rng) {
        Ok(v) => v,
        Err(_) => {
            out.failed = true;
            return out;
        }
    };
    out.bits = tx.data_bits.len() as u64;

    if setup.init == InitMethod::PerfectCsi {
        out.bit_errors = decode_perfect_csi(&frame, &tx, &channel, setup.ofdm);
        return out;
    }

    let mut paths = match estimate_paths(frame.symbol(1), setup.pilot, setup.ofdm, setup.cfar, setup.grids)
    {
        Ok(p) => p,
        Err(_) => {
            out.failed = true;
            out.bits = 0;
            out.weighted_sq_err = all_paths_missed(&channel);
            return out;
        }
    };

    for p in paths.iter_mut() {
        let nu0 = match setup.init {
            InitMethod::Zd => Ok(doppler_init::init_zero()),
            InitMethod::Evm => {
                let branch = angle_mf(frame.symbol(1), p.theta_rad);
                init_evm(&branch, p.tau_s, p.alpha, setup.pilot, setup.ofdm, setup.evm)
            }
            InitMethod::Dl => {
                let branch = angle_mf(frame.symbol(1), p.theta_rad);
                init_dl(
                    setup.model.expect("model checked before the sweep"),
                    &branch,
                    p.alpha,
                    setup.ofdm.tx_power,
                )
            }
            InitMethod::PerfectCsi => unreachable!("handled above"),
        };
        match nu0 {
            Ok(nu) => p.nu_hz = nu,
            Err(_) => {
                out.failed = true;
                out.bits = 0;
                out.weighted_sq_err = all_paths_missed(&channel);
                return out;
            }
        }
    }

    match detect_frame(&frame, &paths, setup.k, setup.ofdm) {
        Ok(decoded) => {
            out.bit_errors = count_bit_errors(&decoded.data_bits, &tx.data_bits);
            let estimates: Vec<(f64, f64)> = paths
                .iter()
                .zip(&decoded.final_nu_hz)
                .map(|(p, &nu)| (p.theta_rad, nu))
                .collect();
            out.weighted_sq_err = weighted_doppler_sq_err(&channel, &estimates);
            if setup.collect_diag {
                for (p_idx, windows) in decoded.nu_trajectory.iter().enumerate() {
                    for &(start, nu) in windows {
                        let g = decoded.gain_tracks[p_idx][start - 1];
                        out.diag.push(DiagRow {
                            sweep_value: setup.sweep_value,
                            trial,
                            path: p_idx,
                            window_start: start,
                            nu_hz: nu,
                            gain_re: g.re,
                            gain_im: g.im,
                        });
                    }
                }
            }
        }
        Err(_) => {
            out.failed = true;
            out.bits = 0;
            out.weighted_sq_err = all_paths_missed(&channel);
        }
    }
    out
}

#[derive(Debug, Default)]
struct PointAccum {
    bit_errors: u64,
    bits: u64,
    sq_sum: f64,
    trials: usize,
    failures: usize,
    diag: Vec<DiagRow>,
}

impl PointAccum {
    fn absorb(&mut self, o: TrialOutcome) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.sq_sum += o.weighted_sq_err;
        self.trials += 1;
        if o.failed {
            self.failures += 1;
        }
        self.diag.extend(o.diag);
    }

    #[cfg(test)]
    fn pool(&mut self, other: PointAccum) {
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.sq_sum += other.sq_sum;
        self.trials += other.trials;
        self.failures += other.failures;
        self.diag.extend(other.diag);
    }
}

fn run_point(
    setup: &TrialSetup<'_>,
    master_seed: u64,
    point_idx: usize,
    trial_range: std::ops::Range<usize>,
) -> PointAccum {
    let outcomes: Vec<TrialOutcome> = trial_range
        .clone()
        .into_par_iter()
        .map(|t| run_trial(setup, t, derive_seed(master_seed, point_idx, t)))
        .collect();
    let mut acc = PointAccum::default();
    for o in outcomes {
        acc.absorb(o);
    }
    acc
}

/// MCRLB overlay for a sweep point: the bound for the scenario's nominal
/// channel (average-power gains, zero gain phase), in Hz.
fn mcrlb_overlay(
    ofdm: &OfdmConfig,
    scenario: &ScenarioSpec,
    pilot: &[Complex64],
    noise: McrlbNoise,
) -> Result<f64> {
    let paths: Vec<PathParams> = scenario
        .angles_deg
        .iter()
        .zip(&scenario.delays_s)
        .zip(&scenario.powers_db)
        .map(|((&deg, &tau), &p_db)| {
            let power = 10f64.powf(p_db / 10.0);
            PathParams {
                theta_rad: deg.to_radians(),
                tau_s: tau,
                nu_hz: 0.0,
                alpha: Complex64::new(power.sqrt(), 0.0),
                avg_power: power,
            }
        })
        .collect();
    let gain_power: f64 = paths.iter().map(|p| p.alpha.norm_sqr()).sum();
    let channel = ChannelRealization {
        paths,
        sigma2: gain_power * ofdm.tx_power / scenario.snr_linear(),
    };
    Ok(mcrlb_weighted(&channel, ofdm, pilot, noise)?
        .weighted_mcrlb_hz2
        .sqrt())
}

enum SweepVariable {
    SnrDb,
    SpeedKmh,
}

fn run_sweep(
    cfg: &ExperimentConfig,
    variable: SweepVariable,
    default_grid: Vec<f64>,
    verbose: bool,
) -> Result<SweepResult> {
    cfg.validate()?;
    let ofdm = cfg.ofdm()?;
    let cfar = CfarConfig::from_pfa(
        cfg.cfar_pfa,
        ofdm.num_subcarriers,
        cfg.cfar_training_cells,
        cfg.cfar_guard_cells,
        cfg.angle_step_deg.to_radians(),
    )?;
    let mut grids = SearchGrids::default_for(&ofdm, &cfar);
    if cfg.delay_grid_divisor != 10 {
        let step = ofdm.delay_resolution() / cfg.delay_grid_divisor as f64;
        let count = (ofdm.t_cp_s / step).floor() as usize + 1;
        grids.delays_s = (0..count).map(|i| i as f64 * step).collect();
    }
    let evm = evm_grid(cfg.evm_max_hz, cfg.evm_step_hz);
    let model = match (cfg.init, &cfg.model_path) {
        (InitMethod::Dl, Some(path)) => Some(model_io::load_model(std::path::Path::new(path))?),
        (InitMethod::Dl, None) => {
            return Err(Error::Config("dl init needs model_path".into()));
        }
        _ => None,
    };
    if let Some(m) = &model {
        if m.num_subcarriers != ofdm.num_subcarriers {
            return Err(Error::Config(format!(
                "model was trained for M={} but config has M={}",
                m.num_subcarriers, ofdm.num_subcarriers
            )));
        }
    }
    let pilot = default_pilot(ofdm.num_subcarriers);
    let sweep = cfg.sweep.clone().unwrap_or(default_grid);

    let started = Instant::now();
    let mut points = Vec::with_capacity(sweep.len());
    let mut diagnostics = Vec::new();
    for (idx, &value) in sweep.iter().enumerate() {
        let scenario = match variable {
            SweepVariable::SnrDb => ScenarioSpec::new(cfg.v_max_kmh, value),
            SweepVariable::SpeedKmh => ScenarioSpec::new(value, cfg.snr_db),
        };
        let sigma_nu = scenario.doppler_spread_hz(ofdm.fc_hz);
        let k = window_length(sigma_nu, ofdm.total_symbol_duration(), ofdm.num_symbols);
        if k <= 2 {
            return Err(Error::Parameter(format!(
                "Doppler spread {sigma_nu:.0} Hz leaves no valid window (K={k})"
            )));
        }
        let setup = TrialSetup {
            ofdm: &ofdm,
            scenario: &scenario,
            init: cfg.init,
            model: model.as_ref(),
            cfar: &cfar,
            grids: &grids,
            evm: &evm,
            k,
            pilot: &pilot,
            collect_diag: verbose,
            sweep_value: value,
        };
        let acc = run_point(&setup, cfg.seed, idx, 0..cfg.trials);
        let snr_linear = scenario.snr_linear();
        points.push(SweepPoint {
            sweep_value: value,
            ber: if acc.bits > 0 {
                acc.bit_errors as f64 / acc.bits as f64
            } else {
                f64::NAN
            },
            ber_awgn_ref: q_function((ofdm.num_rx_antennas as f64 * snr_linear).sqrt()),
            rmse_hz: (acc.sq_sum / acc.trials as f64).sqrt(),
            mcrlb_hz: mcrlb_overlay(&ofdm, &scenario, &pilot, cfg.mcrlb_noise)?,
            trials: acc.trials,
            frame_failures: acc.failures,
        });
        diagnostics.extend(acc.diag);
    }
    Ok(SweepResult {
        points,
        wall_clock: started.elapsed(),
        diagnostics,
    })
}

/// BER against SNR at fixed maximum speed.
pub fn run_ber_vs_snr(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(
        cfg,
        SweepVariable::SnrDb,
        vec![-10.0, -8.0, -6.0, -4.0, -2.0, 0.0],
        false,
    )
}

/// BER against maximum speed at fixed SNR.
pub fn run_ber_vs_speed(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(
        cfg,
        SweepVariable::SpeedKmh,
        (1..=10).map(|i| i as f64 * 100.0).collect(),
        false,
    )
}

/// Weighted Doppler RMSE against SNR at fixed maximum speed, with the MCRLB
/// overlay column.
pub fn run_rmse_vs_snr(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(cfg, SweepVariable::SnrDb, vec![-5.0, 0.0, 5.0, 10.0, 15.0], false)
}

/// Sweep runner with explicit kind and verbosity, for the CLI.
pub fn run_kind(cfg: &ExperimentConfig, kind: ExperimentKind, verbose: bool) -> Result<SweepResult> {
    match kind {
        ExperimentKind::BerVsSnr => run_sweep(
            cfg,
            SweepVariable::SnrDb,
            vec![-10.0, -8.0, -6.0, -4.0, -2.0, 0.0],
            verbose,
        ),
        ExperimentKind::BerVsSpeed => run_sweep(
            cfg,
            SweepVariable::SpeedKmh,
            (1..=10).map(|i| i as f64 * 100.0).collect(),
            verbose,
        ),
        ExperimentKind::RmseVsSnr => run_sweep(
            cfg,
            SweepVariable::SnrDb,
            vec![-5.0, 0.0, 5.0, 10.0, 15.0],
            verbose,
        ),
        ExperimentKind::TrainFnn | ExperimentKind::Accounting => Err(Error::Parameter(
            "run_kind only handles sweep experiments".into(),
        )),
    }
}

/// Frame BER for a single deterministic-Doppler path under zero-Doppler
/// initialization, swept over ν.
///
/// This isolates the zero-init decision limit at 1/(8T'): one path at 10°,
/// 0.9 µs delay, unit power, with the window length chosen for the sweep
/// maximum so the gain-phase measurement itself never wraps.
pub fn run_zd_limit(
    ofdm: &OfdmConfig,
    nu_grid_hz: &[f64],
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if nu_grid_hz.is_empty() || trials == 0 {
        return Err(Error::Parameter("empty Doppler grid or zero trials".into()));
    }
    let cfar = CfarConfig::default_for(ofdm);
    let grids = SearchGrids::default_for(ofdm, &cfar);
    let pilot = default_pilot(ofdm.num_subcarriers);
    let max_nu = nu_grid_hz.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let k = window_length(max_nu, ofdm.total_symbol_duration(), ofdm.num_symbols);
    if k <= 2 {
        return Err(Error::Parameter("sweep maximum leaves no valid window".into()));
    }
    let snr_linear = 10f64.powf(snr_db / 10.0);

    let mut out = Vec::with_capacity(nu_grid_hz.len());
    for (idx, &nu) in nu_grid_hz.iter().enumerate() {
        let outcomes: Vec<(u64, u64, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, idx, t));
                let alpha = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * std::f64::consts::PI));
                let channel = ChannelRealization {
                    paths: vec![PathParams {
                        theta_rad: 10f64.to_radians(),
                        tau_s: 0.9e-6,
                        nu_hz: nu,
                        alpha,
                        avg_power: 1.0,
                    }],
                    sigma2: alpha.norm_sqr() * ofdm.tx_power / snr_linear,
                };
                let bits = random_data_bits(ofdm, &mut rng);
                let (frame, tx) = match generate_frame(&pilot, &bits, &channel, ofdm, &mut rng) {
                    Ok(v) => v,
                    Err(_) => return (0, 0, true),
                };
                let paths = match estimate_paths(frame.symbol(1), &pilot, ofdm, &cfar, &grids) {
                    Ok(p) => p,
                    Err(_) => return (0, 0, true),
                };
                match detect_frame(&frame, &paths, k, ofdm) {
                    Ok(decoded) => (
                        count_bit_errors(&decoded.data_bits, &tx.data_bits),
                        tx.data_bits.len() as u64,
                        false,
                    ),
                    Err(_) => (0, 0, true),
                }
            })
            .collect();
        let mut errors = 0u64;
        let mut bits = 0u64;
        for (e, b, _) in outcomes {
            errors += e;
            bits += b;
        }
        out.push((nu, if bits > 0 { errors as f64 / bits as f64 } else { f64::NAN }));
    }
    Ok(out)
}

/// Trains the Doppler regressor per the config's training section and writes
/// it to `model_path` when set.
pub fn train_fnn_experiment(cfg: &ExperimentConfig) -> Result<(FnnModel, TrainingReport)> {
    cfg.validate()?;
    let ofdm = cfg.ofdm()?;
    let pilot = default_pilot(ofdm.num_subcarriers);
    let (model, report) = doppler_init::fnn_train(&cfg.training, &pilot, &ofdm)?;
    if let Some(path) = &cfg.model_path {
        model_io::save_model(&model, std::path::Path::new(path))?;
    }
    Ok((model, report))
}

/// Pilot-overhead, complexity, and latency accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountingReport {
    pub t_prime_s: f64,
    pub coherence_time_s: f64,
    /// Symbols fitting in one coherence interval (continuous transmission).
    pub n_continuous: usize,
    pub overhead_continuous: f64,
    pub short_frame_s: f64,
    pub n_short: usize,
    pub overhead_short: f64,
    pub window_k: usize,
    pub decoding_latency_s: f64,
    /// N·K·P·M·N_r term (combining and beamforming work).
    pub complexity_combining: u64,
    /// N·K·P·M·log2(M) term (transform work).
    pub complexity_transforms: u64,
}

impl fmt::Display for AccountingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pilot overhead, continuous ({} ms coherence): 1/{} = {:.3}%",
            self.coherence_time_s * 1e3,
            self.n_continuous,
            self.overhead_continuous * 100.0
        )?;
        writeln!(
            f,
            "pilot overhead, short frame ({} ms): 1/{} = {:.3}%",
            self.short_frame_s * 1e3,
            self.n_short,
            self.overhead_short * 100.0
        )?;
        writeln!(
            f,
            "receiver complexity: O(N K P M N_r) = {} plus O(N K P M log2 M) = {}",
            self.complexity_combining, self.complexity_transforms
        )?;
        writeln!(
            f,
            "decoding latency: K·T' = {}·{:.4} us = {:.1} us",
            self.window_k,
            self.t_prime_s * 1e6,
            self.decoding_latency_s * 1e6
        )
    }
}

/// Computes the resource accounting for the configured numerology.
pub fn accounting(cfg: &ExperimentConfig) -> Result<AccountingReport> {
    cfg.validate()?;
    let ofdm = cfg.ofdm()?;
    let t_prime = ofdm.total_symbol_duration();
    let scenario = ScenarioSpec::new(cfg.v_max_kmh, cfg.snr_db);
    let sigma_nu = scenario.doppler_spread_hz(ofdm.fc_hz);
    let k = window_length(sigma_nu, t_prime, ofdm.num_symbols);
    let n_continuous = (cfg.coherence_time_s / t_prime).floor() as usize;
    let n_short = (cfg.short_frame_s / t_prime).floor() as usize;
    if n_continuous == 0 || n_short == 0 {
        return Err(Error::Parameter("coherence shorter than one symbol".into()));
    }
    let n = ofdm.num_symbols as u64;
    let p = scenario.angles_deg.len() as u64;
    let m = ofdm.num_subcarriers as u64;
    let log2m = (ofdm.num_subcarriers as f64).log2().ceil() as u64;
    Ok(AccountingReport {
        t_prime_s: t_prime,
        coherence_time_s: cfg.coherence_time_s,
        n_continuous,
        overhead_continuous: 1.0 / n_continuous as f64,
        short_frame_s: cfg.short_frame_s,
        n_short,
        overhead_short: 1.0 / n_short as f64,
        window_k: k,
        decoding_latency_s: k as f64 * t_prime,
        complexity_combining: n * k as u64 * p * m * ofdm.num_rx_antennas as u64,
        complexity_transforms: n * k as u64 * p * m * log2m,
    })
}

/// Renders sweep points as CSV with the fixed column schema.
pub fn render_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("sweep_value,ber,ber_awgn_ref,rmse_hz,mcrlb_hz,trials,frame_failures\n");
    for p in points {
        out.push_str(&format!(
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{}\n",
            p.sweep_value, p.ber, p.ber_awgn_ref, p.rmse_hz, p.mcrlb_hz, p.trials, p.frame_failures
        ));
    }
    out
}

/// Renders per-window tracker diagnostics as CSV.
pub fn render_diag_csv(rows: &[DiagRow]) -> String {
    let mut out = String::from("sweep_value,trial,path,window_start,nu_hat_hz,gain_re,gain_im\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6e},{},{},{},{:.6e},{:.6e},{:.6e}\n",
            r.sweep_value, r.trial, r.path, r.window_start, r.nu_hz, r.gain_re, r.gain_im
        ));
    }
    out
}
