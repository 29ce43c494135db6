//! Channel realization draws and synthesis of the received time-spatial
//! observation grid with calibrated noise.
//!
//! The model is the post-CP-removal discrete observation: for symbol n the
//! receiver sees Y_n = √P_T Σ_p α̃_{p,n} [F^H(x_n⊙b(τ_p))⊙c(ν_p)] a_rx^T(θ_p) + N,
//! with α̃_{p,n} = α_p e^{j2πν_p t_n} and vec(N) ~ CN(0, σ²I). No sample-level
//! cyclic prefix is simulated; delays act as the circular operator b(τ).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{
    delay_phasor, doppler_phasor, idft, qam_map, steering_vector, ComplexMat, OfdmConfig,
    SPEED_OF_LIGHT,
};

/// Fixed multipath geometry and sweep variables for one simulated scenario.
///
/// The defaults are the four-path urban geometry used throughout the
/// experiments: DoAs [10°, 50°, -30°, 20°], delays [0, 0.9, 2.4, 3] µs,
/// average powers [0, -1, -5, -7] dB.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioSpec {
    /// Maximum scatterer/UE speed (km/h); per-path Doppler is
    /// ν_p = f_c·(v_max/c)·cos(φ) with φ ~ U[0, 2π).
    pub v_max_kmh: f64,
    /// Target SNR (dB) used to calibrate the noise variance.
    pub snr_db: f64,
    /// Path directions of arrival (degrees).
    #[serde(default = "default_angles_deg")]
    pub angles_deg: Vec<f64>,
    /// Path propagation delays (seconds).
    #[serde(default = "default_delays_s")]
    pub delays_s: Vec<f64>,
    /// Average path powers (dB).
    #[serde(default = "default_powers_db")]
    pub powers_db: Vec<f64>,
}

fn default_angles_deg() -> Vec<f64> {
    vec![10.0, 50.0, -30.0, 20.0]
}

fn default_delays_s() -> Vec<f64> {
    vec![0.0, 0.9e-6, 2.4e-6, 3.0e-6]
}

fn default_powers_db() -> Vec<f64> {
    vec![0.0, -1.0, -5.0, -7.0]
}

impl ScenarioSpec {
    pub fn new(v_max_kmh: f64, snr_db: f64) -> Self {
        Self {
            v_max_kmh,
            snr_db,
            angles_deg: default_angles_deg(),
            delays_s: default_delays_s(),
            powers_db: default_powers_db(),
        }
    }

    /// Doppler spread σ_ν = (f_c/c)·v_max in Hz for carrier `fc_hz`.
    pub fn doppler_spread_hz(&self, fc_hz: f64) -> f64 {
        fc_hz * (self.v_max_kmh / 3.6) / SPEED_OF_LIGHT
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    fn validate(&self) -> Result<()> {
        if self.v_max_kmh < 0.0 {
            return Err(Error::Parameter("v_max must be nonnegative".into()));
        }
        let p = self.angles_deg.len();
        if p == 0 || self.delays_s.len() != p || self.powers_db.len() != p {
            return Err(Error::Parameter(
                "angles, delays, and powers must have equal nonzero length".into(),
            ));
        }
        Ok(())
    }
}

/// One propagation path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathParams {
    /// Direction of arrival (radians).
    pub theta_rad: f64,
    /// Propagation delay (seconds).
    pub tau_s: f64,
    /// Doppler shift (Hz).
    pub nu_hz: f64,
    /// Complex gain α_p at t = 0.
    pub alpha: Complex64,
    /// Average power E[|α_p|²] (linear).
    pub avg_power: f64,
}

/// All paths plus the calibrated noise variance for one geometric-coherence
/// interval. Parameters are constant over the N symbols of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<PathParams>,
    /// Noise variance σ² = N_0·B (linear).
    pub sigma2: f64,
}

impl ChannelRealization {
    /// Time-varying gain α̃_{p,n} = α_p·e^{j2πν_p t_n} with t_n = n·T_CP + (n-1)·T.
    pub fn time_varying_gain(&self, path: usize, n: usize, config: &OfdmConfig) -> Complex64 {
        let p = &self.paths[path];
        let t_n = config.symbol_start_time(n);
        p.alpha * Complex64::from_polar(1.0, 2.0 * PI * p.nu_hz * t_n)
    }

    /// Realized total gain power ‖α‖².
    pub fn total_gain_power(&self) -> f64 {
        self.paths.iter().map(|p| p.alpha.norm_sqr()).sum()
    }

    /// Largest path delay (seconds).
    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.tau_s).fold(0.0, f64::max)
    }
}

/// Noise variance that places a realization with gains `alpha` at the target
/// linear SNR: σ² = ‖α‖²·P_T / SNR.
pub fn noise_variance_for_snr(alpha: &[Complex64], tx_power: f64, snr_linear: f64) -> Result<f64> {
    if !(snr_linear > 0.0) {
        return Err(Error::Parameter("SNR must be positive".into()));
    }
    let gain_power: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    Ok(gain_power * tx_power / snr_linear)
}

/// Draws one channel realization for the scenario.
///
/// Angles, delays, and average powers are the fixed scenario values; each
/// Doppler is drawn independently through the cosine law, and each gain is
/// √(avg_power)·e^{jφ} with φ ~ U[0, 2π). The noise variance is set from the
/// realized ‖α‖² so every trial sits exactly at the target SNR.
pub fn draw_channel(
    config: &OfdmConfig,
    scenario: &ScenarioSpec,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    scenario.validate()?;
    let spread = scenario.doppler_spread_hz(config.fc_hz);
    let paths: Vec<PathParams> = scenario
        .angles_deg
        .iter()
        .zip(&scenario.delays_s)
        .zip(&scenario.powers_db)
        .map(|((&deg, &tau), &p_db)| {
            let avg_power = 10f64.powf(p_db / 10.0);
            let nu = spread * rng.gen_range(0.0..2.0 * PI).cos();
            let phase = rng.gen_range(0.0..2.0 * PI);
            PathParams {
                theta_rad: deg.to_radians(),
                tau_s: tau,
                nu_hz: nu,
                alpha: Complex64::from_polar(avg_power.sqrt(), phase),
                avg_power,
            }
        })
        .collect();
    let alphas: Vec<Complex64> = paths.iter().map(|p| p.alpha).collect();
    let sigma2 = noise_variance_for_snr(&alphas, config.tx_power, scenario.snr_linear())?;
    Ok(ChannelRealization { paths, sigma2 })
}

/// Circular complex Gaussian sample with variance `var` (split evenly between
/// the real and imaginary parts).
pub fn complex_gaussian(rng: &mut impl Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Received M×N_r observation for symbol `n` (1-based) carrying symbols `x_n`.
pub fn generate_observation(
    x_n: &[Complex64],
    n: usize,
    channel: &ChannelRealization,
    config: &OfdmConfig,
    rng: &mut impl Rng,
) -> Result<ComplexMat> {
    let m = config.num_subcarriers;
    let n_r = config.num_rx_antennas;
    if x_n.len() != m {
        return Err(Error::Dimension(format!(
            "symbol vector has length {} but M = {m}",
            x_n.len()
        )));
    }
    if n < 1 {
        return Err(Error::Parameter("symbol index is 1-based".into()));
    }
    if channel.max_delay() > config.t_cp_s {
        return Err(Error::Parameter(format!(
            "path delay {:.3e} s exceeds the cyclic prefix {:.3e} s",
            channel.max_delay(),
            config.t_cp_s
        )));
    }

    let sqrt_pt = config.tx_power.sqrt();
    let mut y = ComplexMat::zeros(m, n_r);
    for (p_idx, path) in channel.paths.iter().enumerate() {
        let b = delay_phasor(path.tau_s, m, config.delta_f_hz);
        let shifted: Vec<Complex64> = x_n.iter().zip(&b).map(|(x, b)| x * b).collect();
        let mut branch = idft(&shifted);
        let c = doppler_phasor(path.nu_hz, m, config.delay_resolution());
        for (v, c) in branch.iter_mut().zip(&c) {
            *v *= c;
        }
        let gain = sqrt_pt * channel.time_varying_gain(p_idx, n, config);
        let a = steering_vector(path.theta_rad, n_r, config.spacing_over_wavelength());
        for q in 0..m {
            let gb = gain * branch[q];
            let row = y.row_mut(q);
            for (r, ar) in a.iter().enumerate() {
                row[r] += gb * ar;
            }
        }
    }
    if channel.sigma2 > 0.0 {
        for q in 0..m {
            let row = y.row_mut(q);
            for v in row.iter_mut() {
                *v += complex_gaussian(rng, channel.sigma2);
            }
        }
    }
    Ok(y)
}

/// Transmitted frame content: one pilot symbol followed by N-1 data symbols.
#[derive(Debug, Clone)]
pub struct TxFrame {
    /// Frequency-domain symbol vectors, index 0 is the pilot.
    pub symbols: Vec<Vec<Complex64>>,
    /// Data bits, symbol-major, for symbols n = 2..N.
    pub data_bits: Vec<u8>,
}

/// The received grid for one frame: N matrices of shape M×N_r.
///
/// `truth` is retained for oracle metrics only; receiver-side processing must
/// never read it.
#[derive(Debug, Clone)]
pub struct ObservationFrame {
    observations: Vec<ComplexMat>,
    pub config: OfdmConfig,
    pub truth: ChannelRealization,
}

impl ObservationFrame {
    /// Observation Y_n for 1-based symbol index n.
    pub fn symbol(&self, n: usize) -> &ComplexMat {
        assert!(n >= 1 && n <= self.observations.len(), "symbol index out of range");
        &self.observations[n - 1]
    }

    pub fn num_symbols(&self) -> usize {
        self.observations.len()
    }
}

/// Synthesizes a full frame: the pilot in symbol 1, mapped data bits in
/// symbols 2..N, independent noise per symbol, one shared channel realization.
pub fn generate_frame(
    pilot: &[Complex64],
    data_bits: &[u8],
    channel: &ChannelRealization,
    config: &OfdmConfig,
    rng: &mut impl Rng,
) -> Result<(ObservationFrame, TxFrame)> {
    let n = config.num_symbols;
    let bits_per_symbol = config.bits_per_symbol();
    if pilot.len() != config.num_subcarriers {
        return Err(Error::Dimension(format!(
            "pilot has length {} but M = {}",
            pilot.len(),
            config.num_subcarriers
        )));
    }
    if data_bits.len() != (n - 1) * bits_per_symbol {
        return Err(Error::Dimension(format!(
            "need {} data bits for {} data symbols, got {}",
            (n - 1) * bits_per_symbol,
            n - 1,
            data_bits.len()
        )));
    }

    let mut symbols = Vec::with_capacity(n);
    symbols.push(pilot.to_vec());
    for chunk in data_bits.chunks_exact(bits_per_symbol) {
        symbols.push(qam_map(chunk)?);
    }

    let mut observations = Vec::with_capacity(n);
    for (idx, x_n) in symbols.iter().enumerate() {
        observations.push(generate_observation(x_n, idx + 1, channel, config, rng)?);
    }

    Ok((
        ObservationFrame {
            observations,
            config: config.clone(),
            truth: channel.clone(),
        },
        TxFrame {
            symbols,
            data_bits: data_bits.to_vec(),
        },
    ))
}

/// Random data bits for the N-1 data symbols of one frame.
pub fn random_data_bits(config: &OfdmConfig, rng: &mut impl Rng) -> Vec<u8> {
    (0..(config.num_symbols - 1) * config.bits_per_symbol())
        .map(|_| rng.gen_range(0u8..2))
        .collect()
}

/// Deterministic pseudo-random 4-QAM pilot shared by transmitter and receiver.
pub fn default_pilot(m: usize) -> Vec<Complex64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x00f0_44a7_1e57_0bed);
    let bits: Vec<u8> = (0..2 * m).map(|_| rng.gen_range(0u8..2)).collect();
    qam_map(&bits).expect("even bit count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::dft_matrix;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn table1_config() -> OfdmConfig {
        OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap()
    }

    fn small_config(m: usize, n_r: usize) -> OfdmConfig {
        OfdmConfig::new(5.9e9, m, 8, 30e3, 5e-6, n_r, 1.0, 4).unwrap()
    }

    fn single_path_channel(theta: f64, tau: f64, nu: f64, alpha: Complex64, sigma2: f64) -> ChannelRealization {
        ChannelRealization {
            paths: vec![PathParams {
                theta_rad: theta,
                tau_s: tau,
                nu_hz: nu,
                alpha,
                avg_power: alpha.norm_sqr(),
            }],
            sigma2,
        }
    }

    #[test]
    fn zero_speed_gives_zero_doppler() {
        let cfg = table1_config();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let ch = draw_channel(&cfg, &ScenarioSpec::new(0.0, 10.0), &mut rng).unwrap();
        for p in &ch.paths {
            assert_eq!(p.nu_hz, 0.0);
        }
    }

    #[test]
    fn doppler_bounded_by_cosine_law() {
        let cfg = table1_config();
        let scenario = ScenarioSpec::new(300.0, 10.0);
        let bound = scenario.doppler_spread_hz(cfg.fc_hz);
        // f_c·v_max/c at 300 km/h and 5.9 GHz.
        assert_abs_diff_eq!(bound, 5.9e9 * (300.0 / 3.6) / SPEED_OF_LIGHT, epsilon = 1e-9);
        assert!((bound - 1640.0).abs() < 2.0);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let ch = draw_channel(&cfg, &scenario, &mut rng).unwrap();
            for p in &ch.paths {
                assert!(p.nu_hz.abs() <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn doppler_mean_is_zero() {
        // E[cos φ] = 0, so the empirical mean over many draws stays within
        // 3σ of zero; σ_mean = spread/√(2·draws).
        let cfg = table1_config();
        let scenario = ScenarioSpec::new(300.0, 10.0);
        let spread = scenario.doppler_spread_hz(cfg.fc_hz);
        let draws = 100_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut sum = 0.0;
        for _ in 0..draws / 4 {
            let ch = draw_channel(&cfg, &scenario, &mut rng).unwrap();
            for p in &ch.paths {
                sum += p.nu_hz;
            }
        }
        let mean = sum / draws as f64;
        let three_sigma = 3.0 * spread / (2.0 * draws as f64).sqrt();
        assert!(mean.abs() < three_sigma, "mean {mean} vs 3σ {three_sigma}");
    }

    #[test]
    fn gains_have_configured_average_power() {
        let cfg = table1_config();
        let scenario = ScenarioSpec::new(300.0, 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let ch = draw_channel(&cfg, &scenario, &mut rng).unwrap();
        let powers: Vec<f64> = [0.0f64, -1.0, -5.0, -7.0]
            .iter()
            .map(|db| 10f64.powf(db / 10.0))
            .collect();
        for (p, want) in ch.paths.iter().zip(&powers) {
            assert_abs_diff_eq!(p.alpha.norm_sqr(), *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_speed_rejected() {
        let cfg = table1_config();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        assert!(draw_channel(&cfg, &ScenarioSpec::new(-1.0, 0.0), &mut rng).is_err());
    }

    #[test]
    fn noise_variance_examples() {
        let one = [Complex64::new(1.0, 0.0)];
        assert_abs_diff_eq!(noise_variance_for_snr(&one, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(noise_variance_for_snr(&one, 1.0, 0.0).is_err());
        assert!(noise_variance_for_snr(&one, 1.0, -2.0).is_err());
        // SNR → ∞ drives σ² → 0.
        assert!(noise_variance_for_snr(&one, 1.0, 1e12).unwrap() < 1e-11);

        // Four-path average powers at -4 dB: σ² = 2.310082/0.398107.
        let alphas: Vec<Complex64> = [0.0f64, -1.0, -5.0, -7.0]
            .iter()
            .map(|db| Complex64::from_polar(10f64.powf(db / 20.0), 0.3))
            .collect();
        let sigma2 = noise_variance_for_snr(&alphas, 1.0, 10f64.powf(-0.4)).unwrap();
        assert_abs_diff_eq!(sigma2, 5.8027, epsilon = 2e-3);
    }

    #[test]
    fn single_static_path_collapses_to_idft() {
        // θ = 0, τ = 0, ν = 0, α = 1, σ² = 0: every column is √P_T·F^H·x.
        let cfg = small_config(16, 4);
        let ch = single_path_channel(0.0, 0.0, 0.0, Complex64::new(1.0, 0.0), 0.0);
        let pilot = default_pilot(16);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let y = generate_observation(&pilot, 1, &ch, &cfg, &mut rng).unwrap();
        let want = idft(&pilot);
        for q in 0..16 {
            for r in 0..4 {
                assert!((y.at(q, r) - want[q]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_form_oracle_matches_elementwise_form() {
        // Oracle: Y_n = Σ_p α̃_{p,n}·C(ν)F^H B(τ) F s_n a^T with explicit
        // diagonal matrices and s_n = √P_T F^H x_n.
        let m = 32;
        let cfg = small_config(m, 4);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let channel = ChannelRealization {
            paths: vec![
                PathParams {
                    theta_rad: 0.4,
                    tau_s: 1.3e-6,
                    nu_hz: 2.1e3,
                    alpha: Complex64::new(0.8, -0.3),
                    avg_power: 0.73,
                },
                PathParams {
                    theta_rad: -0.7,
                    tau_s: 3.9e-6,
                    nu_hz: -0.9e3,
                    alpha: Complex64::new(-0.2, 0.55),
                    avg_power: 0.34,
                },
            ],
            sigma2: 0.0,
        };
        let bits = random_data_bits(&cfg, &mut rng);
        let x = qam_map(&bits[..2 * m]).unwrap();
        let n = 3usize;
        let fast = generate_observation(&x, n, &channel, &cfg, &mut rng).unwrap();

        let f = dft_matrix(m);
        let fh = f.hermitian();
        let mut oracle = ComplexMat::zeros(m, cfg.num_rx_antennas);
        for (p_idx, path) in channel.paths.iter().enumerate() {
            let b = delay_phasor(path.tau_s, m, cfg.delta_f_hz);
            let c = doppler_phasor(path.nu_hz, m, cfg.delay_resolution());
            let b_diag = ComplexMat::from_fn(m, m, |r, q| {
                if r == q { b[r] } else { Complex64::new(0.0, 0.0) }
            });
            let c_diag = ComplexMat::from_fn(m, m, |r, q| {
                if r == q { c[r] } else { Complex64::new(0.0, 0.0) }
            });
            let s_n: Vec<Complex64> = fh
                .mul_vec(&x)
                .unwrap()
                .iter()
                .map(|v| v * cfg.tx_power.sqrt())
                .collect();
            let col = c_diag
                .mul_mat(&fh)
                .unwrap()
                .mul_mat(&b_diag)
                .unwrap()
                .mul_mat(&f)
                .unwrap()
                .mul_vec(&s_n)
                .unwrap();
            let gain = channel.time_varying_gain(p_idx, n, &cfg);
            let a = steering_vector(path.theta_rad, cfg.num_rx_antennas, 0.5);
            for q in 0..m {
                for r in 0..cfg.num_rx_antennas {
                    let v = oracle.at(q, r) + gain * col[q] * a[r];
                    oracle.set(q, r, v);
                }
            }
        }
        let mut max_err = 0.0f64;
        for q in 0..m {
            for r in 0..cfg.num_rx_antennas {
                max_err = max_err.max((fast.at(q, r) - oracle.at(q, r)).norm());
            }
        }
        assert!(max_err < 1e-10, "max deviation {max_err}");
    }

    #[test]
    fn noise_energy_is_calibrated() {
        // Noise-only frames: mean ‖N‖_F²/(M·N_r) ≈ σ² within 2%.
        let cfg = small_config(32, 8);
        let sigma2 = 2.0;
        let ch = single_path_channel(0.0, 0.0, 0.0, Complex64::new(0.0, 0.0), sigma2);
        let x = vec![Complex64::new(0.0, 0.0); 32];
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let frames = 10_000;
        let mut acc = 0.0;
        for _ in 0..frames {
            let y = generate_observation(&x, 1, &ch, &cfg, &mut rng).unwrap();
            acc += y.frobenius_norm().powi(2) / (32.0 * 8.0);
        }
        let mean = acc / frames as f64;
        assert!((mean - sigma2).abs() / sigma2 < 0.02, "mean {mean}");
    }

    #[test]
    fn delay_beyond_cp_rejected() {
        let cfg = small_config(16, 2);
        let ch = single_path_channel(0.1, 6e-6, 0.0, Complex64::new(1.0, 0.0), 0.0);
        let x = vec![Complex64::new(1.0, 0.0); 16];
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        assert!(generate_observation(&x, 1, &ch, &cfg, &mut rng).is_err());
    }

    #[test]
    fn frame_has_table1_shape() {
        let cfg = table1_config();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let ch = draw_channel(&cfg, &ScenarioSpec::new(300.0, 10.0), &mut rng).unwrap();
        let pilot = default_pilot(128);
        let bits = random_data_bits(&cfg, &mut rng);
        let (frame, tx) = generate_frame(&pilot, &bits, &ch, &cfg, &mut rng).unwrap();
        assert_eq!(frame.num_symbols(), 32);
        assert_eq!(frame.symbol(1).rows(), 128);
        assert_eq!(frame.symbol(1).cols(), 32);
        assert_eq!(tx.symbols.len(), 32);
        assert_eq!(tx.data_bits.len(), 31 * 256);
    }

    #[test]
    fn noiseless_frame_is_deterministic_and_energy_calibrated() {
        let cfg = small_config(16, 4);
        let alpha = Complex64::from_polar(0.9, 1.1);
        let ch = single_path_channel(0.0, 0.0, 0.0, alpha, 0.0);
        let pilot = default_pilot(16);
        let mut rng_a = ChaCha12Rng::seed_from_u64(11);
        let mut rng_b = ChaCha12Rng::seed_from_u64(11);
        let bits = random_data_bits(&cfg, &mut rng_a);
        let bits_b = random_data_bits(&cfg, &mut rng_b);
        let (fa, _) = generate_frame(&pilot, &bits, &ch, &cfg, &mut rng_a).unwrap();
        let (fb, _) = generate_frame(&pilot, &bits_b, &ch, &cfg, &mut rng_b).unwrap();
        for n in 1..=8 {
            assert_eq!(fa.symbol(n).as_slice(), fb.symbol(n).as_slice());
            // ‖Y_n‖_F² = P_T·|α|²·M·N_r for a noiseless single path.
            let energy = fa.symbol(n).frobenius_norm().powi(2);
            assert_abs_diff_eq!(energy, alpha.norm_sqr() * 16.0 * 4.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn doppler_only_path_preserves_frame_energy() {
        let cfg = small_config(16, 4);
        let ch = single_path_channel(0.3, 0.0, 2.5e3, Complex64::new(0.7, 0.1), 0.0);
        let pilot = default_pilot(16);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let bits = random_data_bits(&cfg, &mut rng);
        let (frame, _) = generate_frame(&pilot, &bits, &ch, &cfg, &mut rng).unwrap();
        let e1 = frame.symbol(1).frobenius_norm();
        for n in 2..=8 {
            assert_abs_diff_eq!(frame.symbol(n).frobenius_norm(), e1, epsilon = 1e-9);
        }
    }

    #[test]
    fn gain_track_law_is_exact() {
        let cfg = table1_config();
        let ch = single_path_channel(0.2, 1e-6, 1.4e3, Complex64::from_polar(0.8, 0.4), 0.0);
        let step = Complex64::from_polar(1.0, 2.0 * PI * 1.4e3 * cfg.total_symbol_duration());
        for n in 1..31 {
            let g_n = ch.time_varying_gain(0, n, &cfg);
            let g_next = ch.time_varying_gain(0, n + 1, &cfg);
            assert!((g_next / g_n - step).norm() < 1e-12);
            assert_abs_diff_eq!(g_n.norm(), 0.8, epsilon = 1e-12);
        }
    }

    #[test]
    fn seeded_frames_are_bit_identical() {
        let cfg = small_config(32, 4);
        let scenario = ScenarioSpec::new(500.0, 5.0);
        let pilot = default_pilot(32);
        let run = |seed: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let ch = draw_channel(&cfg, &scenario, &mut rng).unwrap();
            let bits = random_data_bits(&cfg, &mut rng);
            generate_frame(&pilot, &bits, &ch, &cfg, &mut rng).unwrap()
        };
        let (fa, ta) = run(77);
        let (fb, tb) = run(77);
        assert_eq!(ta.data_bits, tb.data_bits);
        for n in 1..=8 {
            assert_eq!(fa.symbol(n).as_slice(), fb.symbol(n).as_slice());
        }
    }
}
