//! Modified Cramér-Rao lower bound for the per-path Doppler estimates:
//! Slepian-Bangs conditional Fisher information per OFDM symbol, the pilot
//! term, the aggregated information over a frame, and the power-weighted
//! bound used as the RMSE reference curve.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::signal::{delay_phasor, idft, qam_map, steering_vector, OfdmConfig};

/// Which noise power enters the CFI denominator.
///
/// The bound as derived uses the array-level σ² next to the IPI power. The
/// beamformed variant replaces it with σ²/N_r, the branch noise actually seen
/// after the angle matched filter, for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McrlbNoise {
    AsPrinted,
    Beamformed,
}

impl Default for McrlbNoise {
    fn default() -> Self {
        McrlbNoise::AsPrinted
    }
}

/// How the expectation over random data symbols is evaluated in the
/// aggregated information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataExpectation {
    /// Unit-energy constant-modulus symbols collapse E|[F^H(x⊙b)]_q|² to 1,
    /// leaving the closed-form ‖Θ‖².
    Analytic,
    /// Sample-average over random 4-QAM draws (validation oracle).
    MonteCarlo { symbols: usize, seed: u64 },
}

/// Inter-path interference power seen by path `p`:
/// P_IPI = P_T·|α_p|²·Σ_{i≠p} |a^T(θ_p)·a*(θ_i)|².
pub fn ipi_power(p: usize, channel: &ChannelRealization, config: &OfdmConfig) -> f64 {
    let n_r = config.num_rx_antennas;
    let a_p = steering_vector(channel.paths[p].theta_rad, n_r, 0.5);
    let mut acc = 0.0;
    for (i, path) in channel.paths.iter().enumerate() {
        if i == p {
            continue;
        }
        let a_i = steering_vector(path.theta_rad, n_r, 0.5);
        let dot: Complex64 = a_p.iter().zip(&a_i).map(|(x, y)| x * y.conj()).sum();
        acc += dot.norm_sqr();
    }
    config.tx_power * channel.paths[p].alpha.norm_sqr() * acc
}

fn effective_noise(p: usize, channel: &ChannelRealization, config: &OfdmConfig, noise: McrlbNoise) -> f64 {
    let sigma2 = match noise {
        McrlbNoise::AsPrinted => channel.sigma2,
        McrlbNoise::Beamformed => channel.sigma2 / config.num_rx_antennas as f64,
    };
    sigma2 + ipi_power(p, channel, config)
}

/// Delay-matched pilot signature magnitudes |[F^H(x⊙b(τ))]_q|².
fn branch_power(x: &[Complex64], tau_s: f64, config: &OfdmConfig) -> Vec<f64> {
    let b = delay_phasor(tau_s, x.len(), config.delta_f_hz);
    let shifted: Vec<Complex64> = x.iter().zip(&b).map(|(x, b)| x * b).collect();
    idft(&shifted).iter().map(|v| v.norm_sqr()).collect()
}

/// Conditional Fisher information for path `p` at symbol `n` (1-based):
/// I_{p,n} = 8π²|α_p|²P_T/(σ²+P_IPI) · Σ_q (t_n+qΔτ)²·|[F^H(x_n⊙b(τ_p))]_q|².
pub fn cfi_symbol(
    p: usize,
    n: usize,
    x_n: &[Complex64],
    channel: &ChannelRealization,
    config: &OfdmConfig,
    noise: McrlbNoise,
) -> Result<f64> {
    let denom = effective_noise(p, channel, config, noise);
    if denom <= 0.0 {
        return Err(Error::Parameter(
            "CFI undefined for zero noise-plus-interference power".into(),
        ));
    }
    let t_n = config.symbol_start_time(n);
    let dt = config.delay_resolution();
    let powers = branch_power(x_n, channel.paths[p].tau_s, config);
    let sum: f64 = powers
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let t = t_n + q as f64 * dt;
            t * t * w
        })
        .sum();
    let alpha2 = channel.paths[p].alpha.norm_sqr();
    Ok(8.0 * PI * PI * alpha2 * config.tx_power / denom * sum)
}

/// Pilot-symbol CFI: `cfi_symbol` at n = 1, where t_1 = T_CP.
pub fn cfi_pilot(
    p: usize,
    pilot: &[Complex64],
    channel: &ChannelRealization,
    config: &OfdmConfig,
    noise: McrlbNoise,
) -> Result<f64> {
    cfi_symbol(p, 1, pilot, channel, config, noise)
}

/// ‖Θ‖² over the data symbols, built through the flat index map
/// i = M(n-2)+q with [Θ]_i = t_n + qΔτ, n = 2..N, q = 0..M-1.
pub(crate) fn theta_norm_sq(m: usize, num_symbols: usize, t_cp_s: f64, t_s: f64) -> f64 {
    let dt = t_s / m as f64;
    let len = (num_symbols - 1) * m;
    let mut theta = vec![0.0f64; len];
    for i in 0..len {
        let n = i / m + 2;
        let q = i % m;
        theta[i] = n as f64 * t_cp_s + (n as f64 - 1.0) * t_s + q as f64 * dt;
    }
    theta.iter().map(|t| t * t).sum()
}

/// Aggregated information for path `p` over the whole frame: the pilot term
/// plus the data-symbol expectation,
/// I_p = 8π²·P_p·P_T/(σ²+P_IPI)·(Σ_q(T_CP+qΔτ)²|[b̃(τ_p)]_q|² + ‖Θ‖²).
pub fn aggregated_cfi(
    p: usize,
    pilot: &[Complex64],
    channel: &ChannelRealization,
    config: &OfdmConfig,
    data: DataExpectation,
    noise: McrlbNoise,
) -> Result<f64> {
    if config.num_symbols < 2 {
        return Err(Error::Parameter("need at least two symbols".into()));
    }
    let denom = effective_noise(p, channel, config, noise);
    if denom <= 0.0 {
        return Err(Error::Parameter(
            "CFI undefined for zero noise-plus-interference power".into(),
        ));
    }
    let m = config.num_subcarriers;
    let dt = config.delay_resolution();

    let pilot_powers = branch_power(pilot, channel.paths[p].tau_s, config);
    let t_1 = config.symbol_start_time(1);
    let pilot_term: f64 = pilot_powers
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let t = t_1 + q as f64 * dt;
            t * t * w
        })
        .sum();

    let data_term = match data {
        DataExpectation::Analytic => {
            theta_norm_sq(m, config.num_symbols, config.t_cp_s, config.symbol_duration())
        }
        DataExpectation::MonteCarlo { symbols, seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut acc = 0.0;
            for n in 2..=config.num_symbols {
                let t_n = config.symbol_start_time(n);
                let mut weights = vec![0.0f64; m];
                for _ in 0..symbols {
                    let bits: Vec<u8> = (0..2 * m).map(|_| rng.gen_range(0u8..2)).collect();
                    let x = qam_map(&bits)?;
                    for (w, v) in weights.iter_mut().zip(branch_power(&x, channel.paths[p].tau_s, config)) {
                        *w += v;
                    }
                }
                acc += weights
                    .iter()
                    .enumerate()
                    .map(|(q, w)| {
                        let t = t_n + q as f64 * dt;
                        t * t * w / symbols as f64
                    })
                    .sum::<f64>();
            }
            acc
        }
    };

    let avg_power = channel.paths[p].avg_power;
    Ok(8.0 * PI * PI * avg_power * config.tx_power / denom * (pilot_term + data_term))
}

/// Per-path bound terms and the power-weighted Doppler MCRLB.
#[derive(Debug, Clone)]
pub struct FimTerms {
    pub per_path_ipi: Vec<f64>,
    pub per_path_cfi: Vec<f64>,
    pub per_path_mcrlb_hz2: Vec<f64>,
    pub weighted_mcrlb_hz2: f64,
}

/// Weighted MCRLB over all paths: Σ_p P_p·I_p⁻¹ / Σ_p P_p, in Hz².
pub fn mcrlb_weighted(
    channel: &ChannelRealization,
    config: &OfdmConfig,
    pilot: &[Complex64],
    noise: McrlbNoise,
) -> Result<FimTerms> {
    let mut per_path_ipi = Vec::new();
    let mut per_path_cfi = Vec::new();
    let mut per_path_mcrlb = Vec::new();
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..channel.paths.len() {
        let info = aggregated_cfi(p, pilot, channel, config, DataExpectation::Analytic, noise)?;
        if info <= 0.0 {
            return Err(Error::Parameter(format!(
                "path {p} carries no Doppler information"
            )));
        }
        let power = channel.paths[p].avg_power;
        per_path_ipi.push(ipi_power(p, channel, config));
        per_path_cfi.push(info);
        per_path_mcrlb.push(1.0 / info);
        num += power / info;
        den += power;
    }
    Ok(FimTerms {
        per_path_ipi,
        per_path_cfi,
        per_path_mcrlb_hz2: per_path_mcrlb.clone(),
        weighted_mcrlb_hz2: num / den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{default_pilot, PathParams};
    use crate::signal::doppler_phasor;
    use approx::assert_abs_diff_eq;

    fn table1_config() -> OfdmConfig {
        OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap()
    }

    fn path(theta_deg: f64, tau: f64, power_db: f64) -> PathParams {
        let power = 10f64.powf(power_db / 10.0);
        PathParams {
            theta_rad: theta_deg.to_radians(),
            tau_s: tau,
            nu_hz: 700.0,
            alpha: Complex64::from_polar(power.sqrt(), 0.25),
            avg_power: power,
        }
    }

    fn table1_channel(sigma2: f64) -> ChannelRealization {
        ChannelRealization {
            paths: vec![
                path(10.0, 0.0, 0.0),
                path(50.0, 0.9e-6, -1.0),
                path(-30.0, 2.4e-6, -5.0),
                path(20.0, 3.0e-6, -7.0),
            ],
            sigma2,
        }
    }

    #[test]
    fn ipi_power_trivial_cases() {
        let cfg = table1_config();
        let single = ChannelRealization {
            paths: vec![path(10.0, 0.0, 0.0)],
            sigma2: 1.0,
        };
        assert_eq!(ipi_power(0, &single, &cfg), 0.0);

        // Orthogonal steering vectors with N_r = 2 and a sinθ gap of 1.
        let cfg2 = OfdmConfig::new(5.9e9, 16, 8, 30e3, 5e-6, 2, 1.0, 4).unwrap();
        let two = ChannelRealization {
            paths: vec![path(30.0, 0.0, 0.0), path(-30.0, 1e-6, 0.0)],
            sigma2: 1.0,
        };
        assert!(ipi_power(0, &two, &cfg2) < 1e-24);
        assert!(ipi_power(1, &two, &cfg2) < 1e-24);
    }

    #[test]
    fn ipi_power_matches_dirichlet_oracle() {
        // Independent route: |a^T(θ_p)a*(θ_i)|² = sin²(πN_rΔs/2)/sin²(πΔs/2)
        // with Δs the sinθ difference.
        let cfg = table1_config();
        let channel = table1_channel(1.0);
        for p in 0..4 {
            let s_p = channel.paths[p].theta_rad.sin();
            let mut expect = 0.0;
            for (i, other) in channel.paths.iter().enumerate() {
                if i == p {
                    continue;
                }
                let ds = s_p - other.theta_rad.sin();
                let num = (PI * 32.0 * ds / 2.0).sin();
                let den = (PI * ds / 2.0).sin();
                expect += (num / den).powi(2);
            }
            expect *= cfg.tx_power * channel.paths[p].alpha.norm_sqr();
            let got = ipi_power(p, &channel, &cfg);
            assert_abs_diff_eq!(got, expect, epsilon = expect.abs() * 1e-10);
        }
    }

    #[test]
    fn cfi_scales_linearly_with_path_power() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let mut ch = ChannelRealization {
            paths: vec![path(10.0, 1.0e-6, 0.0)],
            sigma2: 1.0,
        };
        let base = cfi_symbol(0, 3, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
        ch.paths[0].alpha *= std::f64::consts::SQRT_2;
        let doubled = cfi_symbol(0, 3, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
        assert_abs_diff_eq!(doubled / base, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cfi_matches_direct_summation_for_zero_delay() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = ChannelRealization {
            paths: vec![path(10.0, 0.0, 0.0)],
            sigma2: 1.7,
        };
        let n = 4usize;
        let got = cfi_symbol(0, n, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
        // Direct oracle with explicitly computed |[F^H x]_q|².
        let u = idft(&pilot);
        let t_n = cfg.symbol_start_time(n);
        let dt = cfg.delay_resolution();
        let sum: f64 = u
            .iter()
            .enumerate()
            .map(|(q, v)| (t_n + q as f64 * dt).powi(2) * v.norm_sqr())
            .sum();
        let want = 8.0 * PI * PI * ch.paths[0].alpha.norm_sqr() / 1.7 * sum;
        assert_abs_diff_eq!(got, want, epsilon = want * 1e-12);
    }

    #[test]
    fn cfi_grows_with_symbol_index() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = table1_channel(2.0);
        let mut prev = 0.0;
        for n in 1..=8 {
            let v = cfi_symbol(0, n, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
            assert!(v > prev, "I(n={n}) = {v} did not grow");
            prev = v;
        }
    }

    #[test]
    fn pilot_cfi_is_symbol_one() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = table1_channel(0.8);
        for p in 0..4 {
            let a = cfi_pilot(p, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
            let b = cfi_symbol(p, 1, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pilot_cfi_matches_finite_difference_fisher_oracle() {
        // Central difference of μ_p(ν) with a 1e-3 Hz step plugged into
        // 2/(σ²+P_IPI)·‖∂μ/∂ν‖².
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = table1_channel(1.3);
        let m = 128;
        let dt = cfg.delay_resolution();
        for p in 0..4 {
            let mu = |nu: f64| -> Vec<Complex64> {
                let b = delay_phasor(ch.paths[p].tau_s, m, cfg.delta_f_hz);
                let shifted: Vec<Complex64> = pilot.iter().zip(&b).map(|(x, b)| x * b).collect();
                let c = doppler_phasor(nu, m, dt);
                let t1 = cfg.symbol_start_time(1);
                let slow = Complex64::from_polar(1.0, 2.0 * PI * nu * t1);
                idft(&shifted)
                    .iter()
                    .zip(&c)
                    .map(|(v, c)| cfg.tx_power.sqrt() * ch.paths[p].alpha * slow * v * c)
                    .collect()
            };
            let h = 1e-3;
            let nu0 = ch.paths[p].nu_hz;
            let up = mu(nu0 + h);
            let down = mu(nu0 - h);
            let deriv_norm_sq: f64 = up
                .iter()
                .zip(&down)
                .map(|(a, b)| ((a - b) / (2.0 * h)).norm_sqr())
                .sum();
            let denom = ch.sigma2 + ipi_power(p, &ch, &cfg);
            let oracle = 2.0 / denom * deriv_norm_sq;
            let got = cfi_pilot(p, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
            assert!(
                (got - oracle).abs() / oracle < 1e-4,
                "path {p}: {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn zero_delay_branch_power_matches_idft() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let powers = branch_power(&pilot, 0.0, &cfg);
        for (w, v) in powers.iter().zip(idft(&pilot)) {
            assert_abs_diff_eq!(*w, v.norm_sqr(), epsilon = 1e-14);
        }
    }

    #[test]
    fn theta_norm_single_element() {
        // N = 2, M = 1: a single entry t_2 = 2T_CP + T.
        let t_cp = 5e-6;
        let t = 1.0 / 30e3;
        let got = theta_norm_sq(1, 2, t_cp, t);
        assert_abs_diff_eq!(got, (2.0 * t_cp + t).powi(2), epsilon = 1e-18);
    }

    #[test]
    fn theta_norm_index_map_matches_double_loop() {
        let cfg = table1_config();
        let got = theta_norm_sq(128, 32, cfg.t_cp_s, cfg.symbol_duration());
        let mut oracle = 0.0;
        for n in 2..=32u32 {
            for q in 0..128u32 {
                let t = cfg.symbol_start_time(n as usize) + q as f64 * cfg.delay_resolution();
                oracle += t * t;
            }
        }
        assert!((got - oracle).abs() / oracle < 1e-9);
    }

    #[test]
    fn analytic_expectation_matches_sampled_oracle() {
        let cfg = OfdmConfig::new(5.9e9, 32, 8, 30e3, 5e-6, 8, 1.0, 4).unwrap();
        let pilot = default_pilot(32);
        let ch = ChannelRealization {
            paths: vec![path(10.0, 1.1e-6, 0.0)],
            sigma2: 1.0,
        };
        let analytic = aggregated_cfi(
            0, &pilot, &ch, &cfg, DataExpectation::Analytic, McrlbNoise::AsPrinted,
        )
        .unwrap();
        let sampled = aggregated_cfi(
            0,
            &pilot,
            &ch,
            &cfg,
            DataExpectation::MonteCarlo { symbols: 3000, seed: 9 },
            McrlbNoise::AsPrinted,
        )
        .unwrap();
        assert!(
            (analytic - sampled).abs() / analytic < 0.02,
            "analytic {analytic} vs sampled {sampled}"
        );
    }

    #[test]
    fn aggregated_dominates_pilot_information() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = table1_channel(1.0);
        for p in 0..4 {
            let agg = aggregated_cfi(
                p, &pilot, &ch, &cfg, DataExpectation::Analytic, McrlbNoise::AsPrinted,
            )
            .unwrap();
            let pil = cfi_pilot(p, &pilot, &ch, &cfg, McrlbNoise::AsPrinted).unwrap();
            assert!(agg >= pil, "path {p}: aggregated {agg} < pilot {pil}");
        }
    }

    #[test]
    fn information_grows_with_frame_length() {
        let pilot = default_pilot(128);
        let mut prev = 0.0;
        for n in [8usize, 16, 32] {
            let cfg = OfdmConfig::new(5.9e9, 128, n, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let ch = ChannelRealization {
                paths: vec![path(10.0, 0.5e-6, 0.0)],
                sigma2: 1.0,
            };
            let agg = aggregated_cfi(
                0, &pilot, &ch, &cfg, DataExpectation::Analytic, McrlbNoise::AsPrinted,
            )
            .unwrap();
            assert!(agg > prev, "N={n}");
            prev = agg;
        }
    }

    #[test]
    fn single_path_bound_is_reciprocal_information() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = ChannelRealization {
            paths: vec![path(10.0, 0.0, 0.0)],
            sigma2: 2.0,
        };
        let terms = mcrlb_weighted(&ch, &cfg, &pilot, McrlbNoise::AsPrinted).unwrap();
        let info = aggregated_cfi(
            0, &pilot, &ch, &cfg, DataExpectation::Analytic, McrlbNoise::AsPrinted,
        )
        .unwrap();
        assert_abs_diff_eq!(terms.weighted_mcrlb_hz2, 1.0 / info, epsilon = 1e-18);
    }

    #[test]
    fn symmetric_equal_power_paths_share_the_bound() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = ChannelRealization {
            paths: vec![path(25.0, 1.0e-6, -3.0), path(-25.0, 1.0e-6, -3.0)],
            sigma2: 1.0,
        };
        let terms = mcrlb_weighted(&ch, &cfg, &pilot, McrlbNoise::AsPrinted).unwrap();
        assert_abs_diff_eq!(
            terms.per_path_mcrlb_hz2[0],
            terms.per_path_mcrlb_hz2[1],
            epsilon = terms.per_path_mcrlb_hz2[0] * 1e-9
        );
        assert_abs_diff_eq!(
            terms.weighted_mcrlb_hz2,
            terms.per_path_mcrlb_hz2[0],
            epsilon = terms.per_path_mcrlb_hz2[0] * 1e-9
        );
    }

    #[test]
    fn bound_scales_with_noise_variance() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let make = |sigma2: f64| ChannelRealization {
            paths: vec![path(10.0, 0.7e-6, 0.0)],
            sigma2,
        };
        let full = mcrlb_weighted(&make(2.0), &cfg, &pilot, McrlbNoise::AsPrinted)
            .unwrap()
            .weighted_mcrlb_hz2;
        let half = mcrlb_weighted(&make(1.0), &cfg, &pilot, McrlbNoise::AsPrinted)
            .unwrap()
            .weighted_mcrlb_hz2;
        assert_abs_diff_eq!(full / half, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn beamformed_noise_variant_tightens_the_bound() {
        let cfg = table1_config();
        let pilot = default_pilot(128);
        let ch = table1_channel(2.31);
        let printed = mcrlb_weighted(&ch, &cfg, &pilot, McrlbNoise::AsPrinted)
            .unwrap()
            .weighted_mcrlb_hz2;
        let beamformed = mcrlb_weighted(&ch, &cfg, &pilot, McrlbNoise::Beamformed)
            .unwrap()
            .weighted_mcrlb_hz2;
        assert!(beamformed < printed);
    }
}
