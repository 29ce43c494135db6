//! Deterministic signal primitives: OFDM grid parameters, transform
//! matrices, array/delay/Doppler phasors, 4-QAM mapping and slicing, and
//! scalar special functions.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and safe to share across threads.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier, array, and time-frequency grid parameters of the link.
///
/// Derived quantities (symbol duration, wavelength, resolutions) are exposed
/// as methods so they can never drift out of sync with the primary fields.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    /// Carrier frequency f_c (Hz).
    pub fc_hz: f64,
    /// Subcarrier count M.
    pub num_subcarriers: usize,
    /// OFDM symbols per frame N (pilot + N-1 data symbols).
    pub num_symbols: usize,
    /// Subcarrier spacing Δf (Hz).
    pub delta_f_hz: f64,
    /// Cyclic-prefix duration T_CP (s).
    pub t_cp_s: f64,
    /// Receive antennas N_r (half-wavelength ULA).
    pub num_rx_antennas: usize,
    /// Average transmit power P_T (linear).
    pub tx_power: f64,
    /// Constellation size (4-QAM only).
    pub mod_order: usize,
}

impl OfdmConfig {
    pub fn new(
        fc_hz: f64,
        num_subcarriers: usize,
        num_symbols: usize,
        delta_f_hz: f64,
        t_cp_s: f64,
        num_rx_antennas: usize,
        tx_power: f64,
        mod_order: usize,
    ) -> Result<Self> {
        if !(fc_hz > 0.0) {
            return Err(Error::Parameter("carrier frequency must be positive".into()));
        }
        if num_subcarriers < 2 {
            return Err(Error::Parameter("need at least 2 subcarriers".into()));
        }
        if num_symbols < 4 {
            return Err(Error::Parameter("need at least 4 OFDM symbols per frame".into()));
        }
        if !(delta_f_hz > 0.0) {
            return Err(Error::Parameter("subcarrier spacing must be positive".into()));
        }
        if !(t_cp_s > 0.0) {
            return Err(Error::Parameter("CP duration must be positive".into()));
        }
        if num_rx_antennas < 1 {
            return Err(Error::Parameter("need at least one receive antenna".into()));
        }
        if !(tx_power > 0.0) {
            return Err(Error::Parameter("transmit power must be positive".into()));
        }
        if mod_order != 4 {
            return Err(Error::Parameter("only 4-QAM is supported".into()));
        }
        Ok(Self {
            fc_hz,
            num_subcarriers,
            num_symbols,
            delta_f_hz,
            t_cp_s,
            num_rx_antennas,
            tx_power,
            mod_order,
        })
    }

    /// Useful OFDM symbol duration T = 1/Δf (s).
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.delta_f_hz
    }

    /// Total symbol duration T' = T + T_CP (s).
    pub fn total_symbol_duration(&self) -> f64 {
        self.symbol_duration() + self.t_cp_s
    }

    /// Carrier wavelength λ = c/f_c (m).
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc_hz
    }

    /// Antenna spacing d = λ/2 (m).
    pub fn antenna_spacing(&self) -> f64 {
        self.wavelength() / 2.0
    }

    /// d/λ ratio of the ULA (fixed at 1/2).
    pub fn spacing_over_wavelength(&self) -> f64 {
        0.5
    }

    /// Delay resolution Δτ = T/M = 1/B (s).
    pub fn delay_resolution(&self) -> f64 {
        self.symbol_duration() / self.num_subcarriers as f64
    }

    /// Signal bandwidth B = M·Δf (Hz).
    pub fn bandwidth(&self) -> f64 {
        self.num_subcarriers as f64 * self.delta_f_hz
    }

    /// Start time of the n-th OFDM symbol, t_n = n·T_CP + (n-1)·T, n ≥ 1.
    pub fn symbol_start_time(&self, n: usize) -> f64 {
        n as f64 * self.t_cp_s + (n as f64 - 1.0) * self.symbol_duration()
    }

    /// Bits carried by one OFDM data symbol.
    pub fn bits_per_symbol(&self) -> usize {
        self.num_subcarriers * (self.mod_order as f64).log2() as usize
    }
}

/// A dense complex matrix with fixed dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        assert!(r < self.rows, "row out of bounds");
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        assert!(r < self.rows, "row out of bounds");
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but vector has length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
            })
            .collect())
    }

    /// Matrix-matrix product `self * rhs`.
    pub fn mul_mat(&self, rhs: &ComplexMat) -> Result<ComplexMat> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMat {
        ComplexMat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Unitary M-point DFT matrix, [F]_{m,q} = e^{-j2πmq/M}/√M.
pub fn dft_matrix(m: usize) -> ComplexMat {
    assert!(m >= 1, "DFT size must be at least 1");
    let scale = 1.0 / (m as f64).sqrt();
    ComplexMat::from_fn(m, m, |r, q| {
        let phase = -2.0 * PI * (r as f64) * (q as f64) / m as f64;
        Complex64::from_polar(scale, phase)
    })
}

thread_local! {
    static FFT_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    FFT_PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Unitary DFT `F_M x`, computed in O(M log M).
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    plan(x.len(), FftDirection::Forward).process(&mut buf);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Unitary inverse DFT `F_M^H x`, computed in O(M log M).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    plan(x.len(), FftDirection::Inverse).process(&mut buf);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// ULA steering vector a_rx(θ), element n = e^{j2π(d/λ)n·sinθ}.
pub fn steering_vector(theta_rad: f64, num_antennas: usize, d_over_lambda: f64) -> Vec<Complex64> {
    assert!(num_antennas >= 1, "need at least one antenna");
    let step = 2.0 * PI * d_over_lambda * theta_rad.sin();
    (0..num_antennas)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}

/// Frequency-domain delay phasor b(τ), element q = e^{-j2πqτΔf}.
pub fn delay_phasor(tau_s: f64, m: usize, delta_f_hz: f64) -> Vec<Complex64> {
    let step = -2.0 * PI * tau_s * delta_f_hz;
    (0..m)
        .map(|q| Complex64::from_polar(1.0, step * q as f64))
        .collect()
}

/// Fast-time Doppler phasor c(ν), element q = e^{j2πqνΔτ}.
pub fn doppler_phasor(nu_hz: f64, m: usize, delta_tau_s: f64) -> Vec<Complex64> {
    let step = 2.0 * PI * nu_hz * delta_tau_s;
    (0..m)
        .map(|q| Complex64::from_polar(1.0, step * q as f64))
        .collect()
}

const QAM_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gray-maps a bit string onto unit-energy 4-QAM symbols.
///
/// Bit pair (b0, b1) selects the quadrant: b0 is the sign of the real part,
/// b1 the sign of the imaginary part (0 → +, 1 → -), so (0,0) → (1+j)/√2.
pub fn qam_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "bit count {} is not divisible by 2",
            bits.len()
        )));
    }
    bits.chunks_exact(2)
        .map(|pair| {
            for &b in pair {
                if b > 1 {
                    return Err(Error::Parameter(format!("bit value {b} is not 0 or 1")));
                }
            }
            let re = if pair[0] == 0 { QAM_SCALE } else { -QAM_SCALE };
            let im = if pair[1] == 0 { QAM_SCALE } else { -QAM_SCALE };
            Ok(Complex64::new(re, im))
        })
        .collect()
}

/// Slices noisy symbols to the nearest 4-QAM point and its Gray-mapped bits.
///
/// The decision is by sign of the real and imaginary parts, so any positive
/// real scaling of the input leaves the output unchanged. An exact zero
/// component is resolved toward the positive half-plane.
pub fn qam_slice(symbols: &[Complex64]) -> (Vec<Complex64>, Vec<u8>) {
    let mut hard = Vec::with_capacity(symbols.len());
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        let b0 = u8::from(s.re < 0.0);
        let b1 = u8::from(s.im < 0.0);
        let re = if b0 == 0 { QAM_SCALE } else { -QAM_SCALE };
        let im = if b1 == 0 { QAM_SCALE } else { -QAM_SCALE };
        hard.push(Complex64::new(re, im));
        bits.push(b0);
        bits.push(b1);
    }
    (hard, bits)
}

/// Gaussian tail probability Q(x) = erfc(x/√2)/2.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
