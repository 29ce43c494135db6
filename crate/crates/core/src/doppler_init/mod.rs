//! Initial Doppler estimates for the decision-directed tracker: zero
//! initialization, EVM grid minimization over the pilot branch, and a trained
//! dense-network regressor with its synthetic training pipeline.

pub mod model_io;
pub mod nn;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channel::complex_gaussian;
use crate::error::{Error, Result};
use crate::signal::{delay_phasor, dft, doppler_phasor, idft, OfdmConfig};

pub use nn::{FnnModel, TrainingReport};

/// Zero-Doppler initialization.
pub fn init_zero() -> f64 {
    0.0
}

/// Error vector magnitude of the pilot branch under Doppler hypothesis ν:
/// EVM(ν) = ‖F[y⊙c*(ν)]⊙b*(τ̂)/(α̂√P_T) - x_1‖²/M.
pub fn evm_objective(
    nu_hz: f64,
    y_p1: &[Complex64],
    tau_hat_s: f64,
    alpha_hat: Complex64,
    pilot: &[Complex64],
    config: &OfdmConfig,
) -> Result<f64> {
    if alpha_hat.norm_sqr() == 0.0 {
        return Err(Error::Parameter("EVM undefined for zero gain estimate".into()));
    }
    let m = pilot.len();
    if y_p1.len() != m {
        return Err(Error::Dimension("branch and pilot lengths differ".into()));
    }
    let c = doppler_phasor(nu_hz, m, config.delay_resolution());
    let compensated: Vec<Complex64> = y_p1.iter().zip(&c).map(|(y, c)| y * c.conj()).collect();
    let freq = dft(&compensated);
    let b = delay_phasor(tau_hat_s, m, config.delta_f_hz);
    let scale = alpha_hat * config.tx_power.sqrt();
    let mut acc = 0.0;
    for ((f, b), x) in freq.iter().zip(&b).zip(pilot) {
        acc += (f * b.conj() / scale - x).norm_sqr();
    }
    Ok(acc / m as f64)
}

/// Uniform Doppler search grid ±max_hz with the given step, centered on zero.
pub fn evm_grid(max_hz: f64, step_hz: f64) -> Vec<f64> {
    let n = (max_hz / step_hz).round() as i64;
    (-n..=n).map(|i| i as f64 * step_hz).collect()
}

/// EVM-minimizing coarse Doppler: grid argmin, ties toward the smallest |ν|.
pub fn init_evm(
    y_p1: &[Complex64],
    tau_hat_s: f64,
    alpha_hat: Complex64,
    pilot: &[Complex64],
    config: &OfdmConfig,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty Doppler grid".into()));
    }
    let mut best_nu = 0.0f64;
    let mut best_val = f64::INFINITY;
    for &nu in grid {
        let val = evm_objective(nu, y_p1, tau_hat_s, alpha_hat, pilot, config)?;
        if val < best_val || (val == best_val && nu.abs() < best_nu.abs()) {
            best_val = val;
            best_nu = nu;
        }
    }
    Ok(best_nu)
}

/// Stacks a complex branch into the regressor's real input layout
/// [Re y_0..Re y_{M-1}, Im y_0..Im y_{M-1}].
pub fn stack_branch(branch: &[Complex64]) -> Vec<f64> {
    branch
        .iter()
        .map(|v| v.re)
        .chain(branch.iter().map(|v| v.im))
        .collect()
}

/// One synthetic training sample: the normalized pilot branch
/// F^H(x_1⊙b(τ))⊙c(ν) + w with w ~ CN(0, I/SNR), stacked to 2M reals, and
/// the normalized target ν/ν_max.
pub fn generate_training_sample(
    tau_s: f64,
    nu_hz: f64,
    snr_linear: f64,
    pilot: &[Complex64],
    nu_max_hz: f64,
    config: &OfdmConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, f64)> {
    if !(snr_linear > 0.0) {
        return Err(Error::Parameter("sample SNR must be positive".into()));
    }
    let m = pilot.len();
    let b = delay_phasor(tau_s, m, config.delta_f_hz);
    let shifted: Vec<Complex64> = pilot.iter().zip(&b).map(|(x, b)| x * b).collect();
    let mut branch = idft(&shifted);
    let c = doppler_phasor(nu_hz, m, config.delay_resolution());
    for (v, c) in branch.iter_mut().zip(&c) {
        *v *= c;
    }
    let noise_var = 1.0 / snr_linear;
    for v in branch.iter_mut() {
        *v += complex_gaussian(rng, noise_var);
    }
    Ok((stack_branch(&branch), nu_hz / nu_max_hz))
}

/// Dense-network Doppler initialization from the normalized pilot branch
/// y_{p,1}/(α̂√P_T).
pub fn init_dl(
    model: &FnnModel,
    y_p1: &[Complex64],
    alpha_hat: Complex64,
    tx_power: f64,
) -> Result<f64> {
    if alpha_hat.norm_sqr() == 0.0 {
        return Err(Error::Parameter("DL input undefined for zero gain estimate".into()));
    }
    let scale = alpha_hat * tx_power.sqrt();
    let normalized: Vec<Complex64> = y_p1.iter().map(|y| y / scale).collect();
    model.predict_hz(&stack_branch(&normalized))
}

/// Synthetic-pilot training recipe for the Doppler regressor.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainingConfig {
    /// Total sample count before the train/validation split.
    pub num_samples: usize,
    /// Training fraction; the rest is validation.
    pub train_fraction: f64,
    /// Delay support [0, max] in seconds.
    pub tau_max_s: f64,
    /// Doppler support ±ν_max in Hz (also the target normalization).
    pub nu_max_hz: f64,
    /// Per-sample SNR range in dB.
    pub snr_db_range: (f64, f64),
    pub batch_size: usize,
    /// Initial Adam step size; decays to zero on a cosine schedule.
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Rotate each training branch by a random global phase.
    ///
    /// At inference the branch is normalized by the estimated pilot gain,
    /// whose own phase error (the Doppler-kernel rotation plus noise) is
    /// unknowable to the receiver, so the regressor must not key on absolute
    /// phase. Training without this augmentation halves predictions at
    /// 5 kHz once the real normalization is applied.
    pub random_phase: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            num_samples: 50_000,
            train_fraction: 0.8,
            tau_max_s: 5e-6,
            nu_max_hz: 5e3,
            snr_db_range: (12.0, 18.0),
            batch_size: 128,
            learning_rate: 2e-3,
            epochs: 30,
            seed: 1,
            random_phase: true,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<()> {
        if self.num_samples < 2 {
            return Err(Error::Parameter("need at least two samples".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Parameter("train fraction must lie in (0,1)".into()));
        }
        if !(self.nu_max_hz > 0.0) || self.tau_max_s < 0.0 {
            return Err(Error::Parameter("invalid sample distribution bounds".into()));
        }
        if self.snr_db_range.1 < self.snr_db_range.0 {
            return Err(Error::Parameter("SNR range is reversed".into()));
        }
        Ok(())
    }
}

/// Trains the Doppler regressor on synthetic pilot branches.
///
/// Features are standardized on the training split; the affine map is folded
/// back into the first layer of the returned model, so inference consumes raw
/// stacked branches.
pub fn fnn_train(
    tc: &TrainingConfig,
    pilot: &[Complex64],
    config: &OfdmConfig,
) -> Result<(FnnModel, TrainingReport)> {
    use rand::SeedableRng;
    tc.validate()?;
    let m = pilot.len();
    let in_dim = 2 * m;
    let mut rng = ChaCha12Rng::seed_from_u64(tc.seed);

    let total = tc.num_samples;
    let mut inputs = vec![0.0f64; total * in_dim];
    let mut targets = vec![0.0f64; total];
    for i in 0..total {
        let tau = rng.gen_range(0.0..=tc.tau_max_s);
        let nu = rng.gen_range(-tc.nu_max_hz..=tc.nu_max_hz);
        let snr_db = rng.gen_range(tc.snr_db_range.0..=tc.snr_db_range.1);
        let (mut x, y) = generate_training_sample(
            tau,
            nu,
            10f64.powf(snr_db / 10.0),
            pilot,
            tc.nu_max_hz,
            config,
            &mut rng,
        )?;
        if tc.random_phase {
            let (sin, cos) = rng.gen_range(0.0..2.0 * std::f64::consts::PI).sin_cos();
            for q in 0..m {
                let (re, im) = (x[q], x[q + m]);
                x[q] = cos * re - sin * im;
                x[q + m] = sin * re + cos * im;
            }
        }
        inputs[i * in_dim..(i + 1) * in_dim].copy_from_slice(&x);
        targets[i] = y;
    }

    let n_train = ((total as f64) * tc.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, total - 1);
    let (train_in, val_in) = inputs.split_at(n_train * in_dim);
    let (train_tgt, val_tgt) = targets.split_at(n_train);

    // Per-feature standardization fitted on the training split.
    let mut mean = vec![0.0f64; in_dim];
    for row in train_in.chunks_exact(in_dim) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n_train as f64;
    }
    let mut var = vec![0.0f64; in_dim];
    for row in train_in.chunks_exact(in_dim) {
        for ((v, m), x) in var.iter_mut().zip(&mean).zip(row) {
            let d = x - m;
            *v += d * d;
        }
    }
    let std: Vec<f64> = var
        .iter()
        .map(|v| (v / n_train as f64).sqrt().max(1e-9))
        .collect();
    let standardize = |buf: &[f64]| -> Vec<f64> {
        buf.chunks_exact(in_dim)
            .flat_map(|row| {
                row.iter()
                    .zip(mean.iter().zip(&std))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect::<Vec<f64>>()
            })
            .collect()
    };
    let train_std = standardize(train_in);
    let val_std = standardize(val_in);

    let mut model = FnnModel::new_regressor(m, tc.nu_max_hz, tc.seed ^ 0x5eed)?;
    let report = nn::train(
        &mut model,
        &train_std,
        train_tgt,
        &val_std,
        val_tgt,
        tc.batch_size,
        tc.learning_rate,
        tc.epochs,
        tc.seed ^ 0xba7c4,
    )?;
    nn::fold_standardization(&mut model, &mean, &std)?;
    Ok((model, report))
}
