//! Decision-directed frame detection: per-path ICI and delay compensation,
//! maximum ratio combining, LS gain tracking over a sliding window, and
//! Doppler refinement from the tracked gain phase drift.
//!
//! The per-frame flow follows the two-branch sliding-window schedule: while a
//! full window fits, every symbol in the window is tentatively detected with
//! phase-propagated gains, the gains are refreshed by LS against the hard
//! decisions, the per-path Doppler is re-estimated from the refreshed window
//! endpoints, and the window's first symbol is re-detected and committed with
//! the updated Doppler. The final K symbols are decoded once by extrapolating
//! the last refreshed gains.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ObservationFrame;
use crate::error::{Error, Result};
use crate::estimator::{angle_mf, PathEstimate};
use crate::signal::{delay_phasor, dft, doppler_phasor, idft, qam_slice, OfdmConfig};

/// Sliding-window length K = min(⌊1 + 1/(2σ_ν·T')⌋, N/2).
///
/// The first term keeps the per-window phase drift 2πσ_ν(K-1)T' below π so
/// the gain-phase Doppler estimate cannot wrap; σ_ν = 0 leaves only the N/2
/// cap.
pub fn window_length(sigma_nu_hz: f64, t_prime_s: f64, num_symbols: usize) -> usize {
    let cap = num_symbols / 2;
    if sigma_nu_hz <= 0.0 {
        return cap;
    }
    let unwrapped = (1.0 + 1.0 / (2.0 * sigma_nu_hz * t_prime_s)).floor() as usize;
    unwrapped.min(cap)
}

/// Doppler (fast-time) compensation: y ⊙ c*(ν̂). Unit-modulus multiply, so
/// energy is preserved; exact inverse of the channel phasor when ν̂ = ν.
pub fn ici_compensate(y_pn: &[Complex64], nu_hat_hz: f64, delta_tau_s: f64) -> Vec<Complex64> {
    let c = doppler_phasor(nu_hat_hz, y_pn.len(), delta_tau_s);
    y_pn.iter().zip(&c).map(|(y, c)| y * c.conj()).collect()
}

/// Delay compensation: transform to the frequency domain and strip the delay
/// ramp, x̂ = (F·y^ICI) ⊙ b*(τ̂).
pub fn delay_compensate(y_ici: &[Complex64], tau_hat_s: f64, delta_f_hz: f64) -> Vec<Complex64> {
    let freq = dft(y_ici);
    let b = delay_phasor(tau_hat_s, y_ici.len(), delta_f_hz);
    freq.iter().zip(&b).map(|(x, b)| x * b.conj()).collect()
}

/// Maximum ratio combining: x̂ = Σ_p α̂*_p·x̂_p.
pub fn mrc_combine(branches: &[Vec<Complex64>], gains: &[Complex64]) -> Result<Vec<Complex64>> {
    if branches.is_empty() {
        return Err(Error::Parameter("MRC needs at least one branch".into()));
    }
    if branches.len() != gains.len() {
        return Err(Error::Dimension(format!(
            "{} branches but {} gains",
            branches.len(),
            gains.len()
        )));
    }
    let m = branches[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (branch, gain) in branches.iter().zip(gains) {
        if branch.len() != m {
            return Err(Error::Dimension("branch length mismatch".into()));
        }
        let w = gain.conj();
        for (o, v) in out.iter_mut().zip(branch) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// Decision-directed LS gain refresh:
/// α̂ = [F^H(x†⊙b(τ̂))⊙c(ν̂)]^H · y / (M·√P_T).
pub fn ls_gain_update(
    y_pn: &[Complex64],
    hard_symbols: &[Complex64],
    tau_hat_s: f64,
    nu_hat_hz: f64,
    config: &OfdmConfig,
) -> Complex64 {
    let m = y_pn.len();
    let b = delay_phasor(tau_hat_s, m, config.delta_f_hz);
    let shifted: Vec<Complex64> = hard_symbols.iter().zip(&b).map(|(x, b)| x * b).collect();
    let template = idft(&shifted);
    let c = doppler_phasor(nu_hat_hz, m, config.delay_resolution());
    let mut acc = Complex64::new(0.0, 0.0);
    for ((t, c), y) in template.iter().zip(&c).zip(y_pn) {
        acc += (t * c).conj() * y;
    }
    acc / (m as f64 * config.tx_power.sqrt())
}

/// Doppler from the phase drift between two tracked gains K-1 symbols apart:
/// ν̂ = ∠(α̂_end·α̂*_start) / (2π(K-1)T').
///
/// Unambiguous only while 2π|ν|(K-1)T' < π; beyond that the angle wraps and
/// the estimate aliases.
pub fn doppler_from_gains(
    alpha_end: Complex64,
    alpha_start: Complex64,
    k: usize,
    t_prime_s: f64,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Parameter("window must span at least two symbols".into()));
    }
    if alpha_end.norm_sqr() == 0.0 || alpha_start.norm_sqr() == 0.0 {
        return Err(Error::Parameter("gain phase undefined for zero gain".into()));
    }
    if !alpha_end.is_finite() || !alpha_start.is_finite() {
        return Err(Error::Parameter("gain is not finite".into()));
    }
    let phase = (alpha_end * alpha_start.conj()).arg();
    Ok(phase / (2.0 * PI * (k as f64 - 1.0) * t_prime_s))
}

/// Advances a tracked gain by one symbol under the Doppler hypothesis:
/// α ← α·e^{j2πν̂T'}. Phase-only, so |α| is preserved.
pub fn propagate_gain(alpha: Complex64, nu_hat_hz: f64, t_prime_s: f64) -> Complex64 {
    alpha * Complex64::from_polar(1.0, 2.0 * PI * nu_hat_hz * t_prime_s)
}

/// Per-path tracking state across one frame.
#[derive(Debug, Clone)]
pub struct GainTrack {
    /// Gain estimates indexed [path][symbol-1] for symbols 1..=N.
    pub gains: Vec<Vec<Complex64>>,
    /// Current Doppler hypothesis per path (Hz).
    pub nu_hz: Vec<f64>,
    /// Sliding-window length.
    pub k: usize,
}

impl GainTrack {
    fn new(paths: &[PathEstimate], k: usize, num_symbols: usize) -> Result<Self> {
        if !(k > 2 && k < num_symbols - 1) {
            return Err(Error::Parameter(format!(
                "window length K={k} violates 2 < K < N-1 with N={num_symbols}"
            )));
        }
        let mut gains = Vec::with_capacity(paths.len());
        for p in paths {
            if !p.alpha.is_finite() {
                return Err(Error::DecodeAbort("initial path gain is not finite".into()));
            }
            let mut track = vec![Complex64::new(0.0, 0.0); num_symbols];
            track[0] = p.alpha;
            gains.push(track);
        }
        Ok(Self {
            gains,
            nu_hz: paths.iter().map(|p| p.nu_hz).collect(),
            k,
        })
    }

    fn gain(&self, path: usize, n: usize) -> Complex64 {
        self.gains[path][n - 1]
    }

    fn set_gain(&mut self, path: usize, n: usize, value: Complex64) {
        self.gains[path][n - 1] = value;
    }
}

/// Decoded data symbols and the tracker state they were produced with.
#[derive(Debug, Clone)]
pub struct DecodedFrame {
    /// Hard symbols for n = 2..N, index 0 ↔ n = 2.
    pub hard_symbols: Vec<Vec<Complex64>>,
    /// Sliced bits, symbol-major, matching `hard_symbols`.
    pub data_bits: Vec<u8>,
    /// Final Doppler estimate per path (Hz).
    pub final_nu_hz: Vec<f64>,
    /// Per-path (window start symbol, ν̂) trajectory.
    pub nu_trajectory: Vec<Vec<(usize, f64)>>,
    /// Full per-path gain tracks for diagnostics.
    pub gain_tracks: Vec<Vec<Complex64>>,
    /// LS refreshes that produced a non-finite or zero gain and were clamped
    /// to the propagated value.
    pub clamped_updates: usize,
}

/// Runs the decision-directed receiver over one frame.
///
/// `paths` must carry the pilot gains α̃̂_{p,1} and initial Doppler
/// hypotheses; the frame must hold N ≥ K+2 symbols.
pub fn detect_frame(
    frame: &ObservationFrame,
    paths: &[PathEstimate],
    k: usize,
    config: &OfdmConfig,
) -> Result<DecodedFrame> {
    if paths.is_empty() {
        return Err(Error::NoPathsDetected);
    }
    let big_n = frame.num_symbols();
    if big_n != config.num_symbols {
        return Err(Error::Dimension(format!(
            "frame has {big_n} symbols but config says {}",
            config.num_symbols
        )));
    }
    let m = config.num_subcarriers;
    let dt = config.delay_resolution();
    let df = config.delta_f_hz;
    let t_prime = config.total_symbol_duration();
    let p_hat = paths.len();

    let mut track = GainTrack::new(paths, k, big_n)?;

    // Beamformed per-path branches for every symbol, computed once.
    let branches: Vec<Vec<Vec<Complex64>>> = (0..p_hat)
        .map(|p| {
            (1..=big_n)
                .map(|n| angle_mf(frame.symbol(n), paths[p].theta_rad))
                .collect()
        })
        .collect();
    let branch = |p: usize, n: usize| -> &[Complex64] { &branches[p][n - 1] };

    let mut committed: Vec<Option<Vec<Complex64>>> = vec![None; big_n + 1];
    let mut trajectory: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p_hat];
    let mut clamped = 0usize;

    let detect_symbol = |track: &GainTrack, n: usize| -> Result<Vec<Complex64>> {
        let mut per_path = Vec::with_capacity(p_hat);
        for p in 0..p_hat {
            let y_ici = ici_compensate(branch(p, n), track.nu_hz[p], dt);
            per_path.push(delay_compensate(&y_ici, paths[p].tau_s, df));
        }
        let gains: Vec<Complex64> = (0..p_hat).map(|p| track.gain(p, n)).collect();
        mrc_combine(&per_path, &gains)
    };

    let mut commit = |n: usize, symbols: Vec<Complex64>| -> Result<()> {
        if committed[n].is_some() {
            return Err(Error::DecodeAbort(format!("symbol {n} decoded twice")));
        }
        if symbols.iter().any(|s| !s.is_finite()) {
            return Err(Error::DecodeAbort(format!("non-finite estimate at symbol {n}")));
        }
        committed[n] = Some(symbols);
        Ok(())
    };

    let last_window_start = big_n - k + 1;
    for n in 2..=last_window_start {
        if n < last_window_start {
            for kk in 1..=k {
                let sym = n + kk - 1;
                // Predict this symbol's gain by phase propagation, detect,
                // then refresh the gain by LS against the hard decisions.
                for p in 0..p_hat {
                    let predicted = propagate_gain(track.gain(p, sym - 1), track.nu_hz[p], t_prime);
                    track.set_gain(p, sym, predicted);
                }
                let combined = detect_symbol(&track, sym)?;
                let (hard, _) = qam_slice(&combined);
                for p in 0..p_hat {
                    let refreshed =
                        ls_gain_update(branch(p, sym), &hard, paths[p].tau_s, track.nu_hz[p], config);
                    if refreshed.is_finite() && refreshed.norm_sqr() > 0.0 {
                        track.set_gain(p, sym, refreshed);
                    } else {
                        clamped += 1;
                    }
                }
            }
            for p in 0..p_hat {
                match doppler_from_gains(track.gain(p, n + k - 1), track.gain(p, n), k, t_prime) {
                    Ok(nu) => track.nu_hz[p] = nu,
                    Err(_) => clamped += 1,
                }
                trajectory[p].push((n, track.nu_hz[p]));
            }
            // Re-detect the window's first symbol with the refined Doppler
            // and commit that decision.
            let combined = detect_symbol(&track, n)?;
            let (hard, _) = qam_slice(&combined);
            commit(n, hard)?;
        } else {
            // Tail: extrapolate the last refreshed gains and decode the
            // remaining K symbols once each.
            for kk in 1..=k {
                let sym = n + kk - 1;
                for p in 0..p_hat {
                    let base = track.gain(p, n - 1);
                    let stepped = base
                        * Complex64::from_polar(
                            1.0,
                            2.0 * PI * track.nu_hz[p] * kk as f64 * t_prime,
                        );
                    track.set_gain(p, sym, stepped);
                }
                let combined = detect_symbol(&track, sym)?;
                let (hard, _) = qam_slice(&combined);
                commit(sym, hard)?;
            }
        }
    }

    let mut hard_symbols = Vec::with_capacity(big_n - 1);
    let mut data_bits = Vec::with_capacity((big_n - 1) * 2 * m);
    for n in 2..=big_n {
        let symbols = committed[n]
            .take()
            .ok_or_else(|| Error::DecodeAbort(format!("symbol {n} never decoded")))?;
        let (_, bits) = qam_slice(&symbols);
        data_bits.extend(bits);
        hard_symbols.push(symbols);
    }

    Ok(DecodedFrame {
        hard_symbols,
        data_bits,
        final_nu_hz: track.nu_hz.clone(),
        nu_trajectory: trajectory,
        gain_tracks: track.gains,
        clamped_updates: clamped,
    })
}
