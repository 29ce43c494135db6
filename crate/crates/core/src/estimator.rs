//! Block-pilot path estimation: CFAR peak detection on the angular spectrum,
//! then per-path delay and least-squares gain estimation.
//!
//! The pilot observation Y_1 is scanned over a uniform angle grid with
//! P(θ) = ‖Y_1·a_rx*(θ)‖²; cell-averaging CFAR picks the path directions, a
//! quadratic interpolation refines each peak, and detections closer than one
//! beamwidth in sin-space are merged (strongest kept). Each detected branch
//! is then beamformed, correlated against the delayed pilot signature to find
//! its delay, and its gain is recovered with the LS estimator.

use num_complex::Complex64;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::signal::{dft, steering_vector, ComplexMat, OfdmConfig};

/// One estimated propagation path.
///
/// `nu_hz` starts at the value assigned by a Doppler initializer (zero until
/// one runs) and is refined by the decision-directed tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEstimate {
    pub theta_rad: f64,
    pub tau_s: f64,
    /// Estimated gain α̃̂_{p,1} at the pilot symbol.
    pub alpha: Complex64,
    /// Current Doppler hypothesis (Hz).
    pub nu_hz: f64,
}

/// Cell-averaging CFAR configuration for the angular spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CfarConfig {
    /// Angular grid step (radians).
    pub grid_step_rad: f64,
    /// Training cells per side.
    pub training_cells: usize,
    /// Guard cells per side.
    pub guard_cells: usize,
    /// Multiplier applied to the training-cell mean.
    pub threshold_scale: f64,
}

impl CfarConfig {
    /// Builds a CFAR config whose threshold scale hits the target per-cell
    /// false-alarm probability on noise-only spectra.
    ///
    /// A noise-only cell is ‖N·a*(θ)‖² over `m` subcarriers, i.e.
    /// Gamma-distributed with shape `m`; the cell-to-training-sum ratio then
    /// follows a Beta(m, N_t·m) law, inverted here for the scale.
    pub fn from_pfa(
        pfa: f64,
        m: usize,
        training_cells: usize,
        guard_cells: usize,
        grid_step_rad: f64,
    ) -> Result<Self> {
        if !(pfa > 0.0 && pfa < 1.0) {
            return Err(Error::Parameter("false-alarm probability must be in (0,1)".into()));
        }
        if training_cells == 0 {
            return Err(Error::Parameter("need at least one training cell per side".into()));
        }
        let n_t = 2 * training_cells;
        let beta = Beta::new(m as f64, (n_t * m) as f64)
            .map_err(|e| Error::Parameter(format!("beta distribution: {e}")))?;
        let b = beta.inverse_cdf(1.0 - pfa);
        let threshold_scale = n_t as f64 * b / (1.0 - b);
        Ok(Self {
            grid_step_rad,
            training_cells,
            guard_cells,
            threshold_scale,
        })
    }

    /// Default detector: 0.5° grid, 8 training + 2 guard cells per side,
    /// threshold from P_fa = 1e-3.
    pub fn default_for(config: &OfdmConfig) -> Self {
        Self::from_pfa(1e-3, config.num_subcarriers, 8, 2, 0.5f64.to_radians())
            .expect("default CFAR parameters are valid")
    }
}

/// Search grids for the pilot-based estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrids {
    /// Angle grid (radians), ascending.
    pub angles_rad: Vec<f64>,
    /// Delay grid (seconds), ascending, spanning [0, T_CP].
    pub delays_s: Vec<f64>,
}

impl SearchGrids {
    /// Angle grid -89°..89° at the CFAR step; delay grid [0, T_CP] at Δτ/10.
    pub fn default_for(config: &OfdmConfig, cfar: &CfarConfig) -> Self {
        let lo = (-89f64).to_radians();
        let hi = 89f64.to_radians();
        let step = cfar.grid_step_rad;
        let count = ((hi - lo) / step).round() as usize + 1;
        let angles_rad = (0..count).map(|i| lo + i as f64 * step).collect();
        let dstep = config.delay_resolution() / 10.0;
        let dcount = (config.t_cp_s / dstep).floor() as usize + 1;
        let delays_s = (0..dcount).map(|i| i as f64 * dstep).collect();
        Self { angles_rad, delays_s }
    }
}

/// Received power as a function of direction: P(θ) = ‖Y·a_rx*(θ)‖².
pub fn angular_spectrum(y: &ComplexMat, grid: &[f64]) -> Vec<f64> {
    let n_r = y.cols();
    grid.iter()
        .map(|&theta| {
            let a = steering_vector(theta, n_r, 0.5);
            let mut power = 0.0;
            for q in 0..y.rows() {
                let dot: Complex64 = y
                    .row(q)
                    .iter()
                    .zip(&a)
                    .map(|(v, s)| v * s.conj())
                    .sum();
                power += dot.norm_sqr();
            }
            power
        })
        .collect()
}

/// Cell-averaging CFAR over a 1-D spectrum.
///
/// A cell is detected when it is a strict local maximum and exceeds
/// `threshold_scale` times the mean of its training cells (guard cells
/// excluded; windows truncate at the spectrum edges). An empty return is a
/// legal outcome and signals "no paths" to the caller.
pub fn cfar_detect(spectrum: &[f64], cfar: &CfarConfig) -> Vec<usize> {
    let n = spectrum.len();
    let mut hits = Vec::new();
    if n < 3 {
        return hits;
    }
    let guard = cfar.guard_cells;
    let train = cfar.training_cells;
    for i in 1..n - 1 {
        if !(spectrum[i] > spectrum[i - 1] && spectrum[i] > spectrum[i + 1]) {
            continue;
        }
        let mut sum = 0.0;
        let mut count = 0usize;
        let left_hi = i.saturating_sub(guard + 1);
        let left_lo = i.saturating_sub(guard + train);
        if i > guard {
            for j in left_lo..=left_hi {
                sum += spectrum[j];
                count += 1;
            }
        }
        let right_lo = i + guard + 1;
        let right_hi = (i + guard + train).min(n - 1);
        if right_lo <= right_hi {
            for j in right_lo..=right_hi {
                sum += spectrum[j];
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let noise_floor = sum / count as f64;
        if spectrum[i] > cfar.threshold_scale * noise_floor {
            hits.push(i);
        }
    }
    hits
}

/// Angle-domain matched filter: y_{p,n} = Y_n·a_rx*(θ)/N_r.
pub fn angle_mf(y: &ComplexMat, theta_rad: f64) -> Vec<Complex64> {
    let n_r = y.cols();
    let a = steering_vector(theta_rad, n_r, 0.5);
    let scale = 1.0 / n_r as f64;
    (0..y.rows())
        .map(|q| {
            let dot: Complex64 = y.row(q).iter().zip(&a).map(|(v, s)| v * s.conj()).sum();
            dot * scale
        })
        .collect()
}

/// Delay correlator values |b̃(τ)^H y| over the grid, where
/// b̃(τ) = F^H(x_1⊙b(τ)). Computed as (x_1⊙b(τ))^H·(F y) so one transform
/// serves every grid point.
fn delay_correlations(y_p1: &[Complex64], pilot: &[Complex64], grid: &[f64], delta_f_hz: f64) -> Vec<f64> {
    let z = dft(y_p1);
    grid.iter()
        .map(|&tau| {
            let step = 2.0 * std::f64::consts::PI * tau * delta_f_hz;
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, (x, zq)) in pilot.iter().zip(&z).enumerate() {
                let rot = Complex64::from_polar(1.0, step * q as f64);
                acc += x.conj() * zq * rot;
            }
            acc.norm()
        })
        .collect()
}

/// Delay estimate: grid maximizer of |b̃(τ)^H y_{p,1}|, ties toward smaller τ.
pub fn estimate_delay(y_p1: &[Complex64], pilot: &[Complex64], grid: &[f64], delta_f_hz: f64) -> f64 {
    let corr = delay_correlations(y_p1, pilot, grid, delta_f_hz);
    let mut best = 0usize;
    for (i, &v) in corr.iter().enumerate() {
        if v > corr[best] {
            best = i;
        }
    }
    grid[best]
}

/// LS gain estimate α̃̂_{p,1} = b̃(τ̂)^H·y_{p,1}/(M√P_T).
pub fn estimate_gain(
    y_p1: &[Complex64],
    pilot: &[Complex64],
    tau_hat_s: f64,
    config: &OfdmConfig,
) -> Complex64 {
    let m = pilot.len();
    let z = dft(y_p1);
    let step = 2.0 * std::f64::consts::PI * tau_hat_s * config.delta_f_hz;
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, (x, zq)) in pilot.iter().zip(&z).enumerate() {
        let rot = Complex64::from_polar(1.0, step * q as f64);
        acc += x.conj() * zq * rot;
    }
    acc / (m as f64 * config.tx_power.sqrt())
}

/// Quadratic interpolation of a sampled peak; returns the refined abscissa.
fn refine_peak(grid: &[f64], spectrum: &[f64], idx: usize) -> f64 {
    if idx == 0 || idx + 1 >= grid.len() {
        return grid[idx];
    }
    let (l, c, r) = (spectrum[idx - 1], spectrum[idx], spectrum[idx + 1]);
    let denom = l - 2.0 * c + r;
    if denom.abs() < f64::EPSILON {
        return grid[idx];
    }
    let offset = 0.5 * (l - r) / denom;
    let step = grid[idx] - grid[idx - 1];
    grid[idx] + offset.clamp(-0.5, 0.5) * step
}

/// Upper envelope of the normalized ULA power response |a^T(θ₁)a*(θ₂)|²/N_r²
/// at a sin-domain separation Δs: 1/(N_r·sin(πΔs/2))², capped at 1.
fn sidelobe_envelope(delta_sin: f64, n_r: usize) -> f64 {
    let s = (std::f64::consts::PI * delta_sin / 2.0).sin() * n_r as f64;
    if s.abs() < 1.0 {
        1.0
    } else {
        1.0 / (s * s)
    }
}

/// Full pilot-based estimation: CFAR path detection and per-path DoA, delay,
/// and gain estimates.
///
/// Two cleanup passes follow the raw CFAR: detections within one beamwidth
/// of a stronger one (|Δsinθ| < 2/N_r) are duplicates of the same physical
/// path and get merged, and a detection whose power is explainable by the
/// array sidelobe envelope of the stronger kept peaks is blanked (otherwise
/// every strong path would spawn phantom paths at its sidelobe angles once
/// the peak stands far enough above the noise floor).
pub fn estimate_paths(
    y_1: &ComplexMat,
    pilot: &[Complex64],
    config: &OfdmConfig,
    cfar: &CfarConfig,
    grids: &SearchGrids,
) -> Result<Vec<PathEstimate>> {
    let spectrum = angular_spectrum(y_1, &grids.angles_rad);
    let hits = cfar_detect(&spectrum, cfar);
    if hits.is_empty() {
        return Err(Error::NoPathsDetected);
    }

    let mut peaks: Vec<(f64, f64)> = hits
        .iter()
        .map(|&i| (refine_peak(&grids.angles_rad, &spectrum, i), spectrum[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let n_r = config.num_rx_antennas;
    let beamwidth_sin = 2.0 / n_r as f64;
    const SIDELOBE_MARGIN: f64 = 2.0;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for (theta, power) in peaks {
        let separated = kept
            .iter()
            .all(|(t, _)| (t.sin() - theta.sin()).abs() >= beamwidth_sin);
        let sidelobe_budget: f64 = kept
            .iter()
            .map(|(t, p)| sidelobe_envelope(t.sin() - theta.sin(), n_r) * p)
            .sum();
        if separated && power > SIDELOBE_MARGIN * sidelobe_budget {
            kept.push((theta, power));
        }
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(kept
        .into_iter()
        .map(|(theta, _)| {
            let branch = angle_mf(y_1, theta);
            let tau = estimate_delay(&branch, pilot, &grids.delays_s, config.delta_f_hz);
            let alpha = estimate_gain(&branch, pilot, tau, config);
            PathEstimate {
                theta_rad: theta,
                tau_s: tau,
                alpha,
                nu_hz: 0.0,
            }
        })
        .collect())
}
