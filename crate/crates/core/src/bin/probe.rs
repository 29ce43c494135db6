//! Scratch experiment driver (removed before release).

use std::path::Path;
use std::time::Instant;

use doa_ofdm::channel::default_pilot;
use doa_ofdm::doppler_init::{fnn_train, model_io, TrainingConfig};
use doa_ofdm::harness::{
    accounting, run_ber_vs_snr, run_ber_vs_speed, run_rmse_vs_snr, run_zd_limit, render_csv,
    ExperimentConfig, InitMethod,
};
use doa_ofdm::signal::OfdmConfig;

fn model_path() -> &'static Path {
    Path::new("/tmp/probe_model.fnn")
}

fn ensure_model() {
    if model_path().exists() {
        return;
    }
    let cfg = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
    let pilot = default_pilot(128);
    let tc = TrainingConfig::default();
    let t0 = Instant::now();
    let (model, report) = fnn_train(&tc, &pilot, &cfg).unwrap();
    println!(
        "trained model in {:.0} s, best val MSE {:.3e}",
        t0.elapsed().as_secs_f64(),
        report.best_val_mse
    );
    model_io::save_model(&model, model_path()).unwrap();
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "help".into());
    let trials: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    match which.as_str() {
        "csi" => {
            let mut cfg = ExperimentConfig::default();
            cfg.init = InitMethod::PerfectCsi;
            cfg.v_max_kmh = 300.0;
            cfg.trials = trials;
            cfg.sweep = Some(vec![-10.0, -8.0, -6.0]);
            let t0 = Instant::now();
            let r = run_ber_vs_snr(&cfg).unwrap();
            println!("{}", render_csv(&r.points));
            for p in &r.points {
                println!(
                    "snr {:+.0}: ber {:.4e} bound {:.4e} ratio {:.3}",
                    p.sweep_value,
                    p.ber,
                    p.ber_awgn_ref,
                    p.ber / p.ber_awgn_ref
                );
            }
            println!("elapsed {:.1} s", t0.elapsed().as_secs_f64());
        }
        "zdlimit" => {
            let ofdm = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let nu_max = 1.0 / (8.0 * ofdm.total_symbol_duration());
            let grid: Vec<f64> = [0.4, 0.6, 0.8, 1.0, 1.2, 1.4]
                .iter()
                .map(|f| f * nu_max)
                .collect();
            let t0 = Instant::now();
            let curve = run_zd_limit(&ofdm, &grid, 10.0, trials, 11).unwrap();
            println!("nu_max = {nu_max:.1} Hz");
            for (nu, ber) in curve {
                println!("nu {:.0} ({:.2} nu_max): BER {:.4e}", nu, nu / nu_max, ber);
            }
            println!("elapsed {:.1} s", t0.elapsed().as_secs_f64());
        }
        "speed" => {
            ensure_model();
            for init in [InitMethod::Dl, InitMethod::Zd, InitMethod::Evm] {
                let mut cfg = ExperimentConfig::default();
                cfg.init = init;
                cfg.snr_db = -4.0;
                cfg.trials = trials;
                cfg.sweep = Some(vec![100.0, 1000.0]);
                cfg.model_path = Some(model_path().display().to_string());
                let t0 = Instant::now();
                let r = run_ber_vs_speed(&cfg).unwrap();
                for p in &r.points {
                    println!(
                        "{init:?} v={:.0}: ber {:.4e} rmse {:.1} Hz fail {} ({:.1} s)",
                        p.sweep_value,
                        p.ber,
                        p.rmse_hz,
                        p.frame_failures,
                        t0.elapsed().as_secs_f64()
                    );
                }
            }
        }
        "rmse" => {
            ensure_model();
            for (v, init) in [
                (300.0, InitMethod::Zd),
                (1000.0, InitMethod::Zd),
                (1000.0, InitMethod::Evm),
                (1000.0, InitMethod::Dl),
            ] {
                let mut cfg = ExperimentConfig::default();
                cfg.init = init;
                cfg.v_max_kmh = v;
                cfg.trials = trials;
                cfg.sweep = Some(vec![0.0, 5.0]);
                cfg.model_path = Some(model_path().display().to_string());
                let t0 = Instant::now();
                let r = run_rmse_vs_snr(&cfg).unwrap();
                for p in &r.points {
                    println!(
                        "{init:?} v={v:.0} snr {:+.0}: rmse {:.2} Hz mcrlb {:.2} Hz ratio {:.2} fail {} ({:.1} s)",
                        p.sweep_value,
                        p.rmse_hz,
                        p.mcrlb_hz,
                        p.rmse_hz / p.mcrlb_hz,
                        p.frame_failures,
                        t0.elapsed().as_secs_f64()
                    );
                }
            }
        }

        "trace" => {
            use doa_ofdm::channel::{generate_frame, random_data_bits, ChannelRealization, PathParams};
            use doa_ofdm::estimator::{estimate_paths, CfarConfig, SearchGrids};
            use doa_ofdm::receiver::{detect_frame, window_length};
            use num_complex::Complex64;
            use rand::SeedableRng;
            use rand_chacha::ChaCha12Rng;
            let nu: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2609.0);
            let ofdm = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let alpha = Complex64::from_polar(1.0, 0.3);
            let channel = ChannelRealization {
                paths: vec![PathParams { theta_rad: 10f64.to_radians(), tau_s: 0.9e-6, nu_hz: nu, alpha, avg_power: 1.0 }],
                sigma2: alpha.norm_sqr() / 10.0,
            };
            let pilot = default_pilot(128);
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            let bits = random_data_bits(&ofdm, &mut rng);
            let (frame, tx) = generate_frame(&pilot, &bits, &channel, &ofdm, &mut rng).unwrap();
            let cfar = CfarConfig::default_for(&ofdm);
            let grids = SearchGrids::default_for(&ofdm, &cfar);
            let paths = estimate_paths(frame.symbol(1), &pilot, &ofdm, &cfar, &grids).unwrap();
            println!("P_hat = {}", paths.len());
            for p in &paths {
                println!("  theta {:.2} deg tau {:.3} us alpha {:.4} /_{:.3}", p.theta_rad.to_degrees(), p.tau_s*1e6, p.alpha.norm(), p.alpha.arg());
            }
            let true_g1 = channel.time_varying_gain(0, 1, &ofdm);
            println!("true pilot gain: {:.4} /_{:.3}", true_g1.norm(), true_g1.arg());
            let k = window_length(1.4 * 3260.9, ofdm.total_symbol_duration(), 32);
            println!("K = {k}");
            let decoded = detect_frame(&frame, &paths, k, &ofdm).unwrap();
            println!("clamped: {}", decoded.clamped_updates);
            for (p_idx, traj) in decoded.nu_trajectory.iter().enumerate() {
                let line: Vec<String> = traj.iter().map(|(n, v)| format!("n{n}:{v:.0}")).collect();
                println!("path {p_idx} nu trajectory: {}", line.join(" "));
            }
            let bits_per = ofdm.bits_per_symbol();
            for n in 2..=32usize {
                let got = &decoded.data_bits[(n - 2) * bits_per..(n - 1) * bits_per];
                let want = &tx.data_bits[(n - 2) * bits_per..(n - 1) * bits_per];
                let errs = got.iter().zip(want).filter(|(a, b)| a != b).count();
                if errs > 0 { println!("symbol {n}: {errs}/{bits_per} bit errors"); }
            }
        }

        "trace2" => {
            use doa_ofdm::channel::{generate_frame, random_data_bits, ChannelRealization, PathParams};
            use doa_ofdm::estimator::{angle_mf, estimate_gain};
            use doa_ofdm::receiver::{delay_compensate, ici_compensate, ls_gain_update, propagate_gain};
            use doa_ofdm::signal::{qam_slice};
            use num_complex::Complex64;
            use rand::SeedableRng;
            use rand_chacha::ChaCha12Rng;
            let nu: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2609.0);
            let ofdm = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let alpha = Complex64::from_polar(1.0, 0.3);
            let theta = 10f64.to_radians();
            let tau = 0.9e-6;
            let channel = ChannelRealization {
                paths: vec![PathParams { theta_rad: theta, tau_s: tau, nu_hz: nu, alpha, avg_power: 1.0 }],
                sigma2: 0.0,
            };
            let pilot = default_pilot(128);
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            let bits = random_data_bits(&ofdm, &mut rng);
            let (frame, tx) = generate_frame(&pilot, &bits, &channel, &ofdm, &mut rng).unwrap();
            // Algorithm-1-style pilot gain (zero-Doppler LS on the true angle/delay).
            let b1 = angle_mf(frame.symbol(1), theta);
            let a1 = estimate_gain(&b1, &pilot, tau, &ofdm);
            let g1 = channel.time_varying_gain(0, 1, &ofdm);
            println!("pilot LS gain {:.4} /_{:+.4}   true {:.4} /_{:+.4}", a1.norm(), a1.arg(), g1.norm(), g1.arg());
            let mut track = a1;
            let nu_hat = 0.0;
            for sym in 2..=4usize {
                let branch = angle_mf(frame.symbol(sym), theta);
                let y_ici = ici_compensate(&branch, nu_hat, ofdm.delay_resolution());
                let xh = delay_compensate(&y_ici, tau, ofdm.delta_f_hz);
                let pred = propagate_gain(track, nu_hat, ofdm.total_symbol_duration());
                let combined: Vec<Complex64> = xh.iter().map(|v| pred.conj() * v).collect();
                let (hard, got_bits) = qam_slice(&combined);
                let want = &tx.data_bits[(sym - 2) * 256..(sym - 1) * 256];
                let errs = got_bits.iter().zip(want).filter(|(a, b)| a != b).count();
                let refreshed = ls_gain_update(&branch, &hard, tau, nu_hat, &ofdm);
                let g_true = channel.time_varying_gain(0, sym, &ofdm);
                println!(
                    "sym {sym}: pred /_{:+.4} true /_{:+.4} decision errs {errs}/256 refreshed {:.4} /_{:+.4}",
                    pred.arg(), g_true.arg(), refreshed.norm(), refreshed.arg()
                );
                track = refreshed;
            }
        }

        "dlerr" => {
            use doa_ofdm::channel::{draw_channel, generate_frame, random_data_bits, ScenarioSpec};
            use doa_ofdm::doppler_init::{init_dl, model_io};
            use doa_ofdm::estimator::{angle_mf, estimate_paths, CfarConfig, SearchGrids};
            use doa_ofdm::receiver::{detect_frame, window_length};
            use doa_ofdm::harness::count_bit_errors;
            use rand::SeedableRng;
            use rand_chacha::ChaCha12Rng;
            ensure_model();
            let model = model_io::load_model(model_path()).unwrap();
            let ofdm = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let snr_db: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(-4.0);
            let scenario = ScenarioSpec::new(1000.0, snr_db);
            let pilot = default_pilot(128);
            let cfar = CfarConfig::default_for(&ofdm);
            let grids = SearchGrids::default_for(&ofdm, &cfar);
            let k = window_length(scenario.doppler_spread_hz(ofdm.fc_hz), ofdm.total_symbol_duration(), 32);
            println!("K={k} snr={snr_db}");
            let mut init_errs: Vec<(f64, f64, f64)> = Vec::new(); // (power, |err_init|, |err_final|)
            let mut frames_bad = 0usize;
            for t in 0..trials as u64 {
                let mut rng = ChaCha12Rng::seed_from_u64(90_000 + t);
                let channel = draw_channel(&ofdm, &scenario, &mut rng).unwrap();
                let bits = random_data_bits(&ofdm, &mut rng);
                let (frame, tx) = generate_frame(&pilot, &bits, &channel, &ofdm, &mut rng).unwrap();
                let mut paths = match estimate_paths(frame.symbol(1), &pilot, &ofdm, &cfar, &grids) {
                    Ok(p) => p, Err(_) => continue,
                };
                for p in paths.iter_mut() {
                    let branch = angle_mf(frame.symbol(1), p.theta_rad);
                    p.nu_hz = init_dl(&model, &branch, p.alpha, 1.0).unwrap();
                }
                let decoded = detect_frame(&frame, &paths, k, &ofdm).unwrap();
                let ber = count_bit_errors(&decoded.data_bits, &tx.data_bits) as f64 / tx.data_bits.len() as f64;
                if ber > 1e-2 { frames_bad += 1; }
                // associate: nearest estimated angle per true path
                for tp in &channel.paths {
                    let mut best = None; let mut bd = f64::INFINITY;
                    for (i, ep) in paths.iter().enumerate() {
                        let d = (ep.theta_rad - tp.theta_rad).abs();
                        if d < bd { bd = d; best = Some(i); }
                    }
                    if let Some(i) = best {
                        init_errs.push((tp.avg_power, (paths[i].nu_hz - tp.nu_hz).abs(), (decoded.final_nu_hz[i] - tp.nu_hz).abs()));
                        if ber > 1e-2 && (decoded.final_nu_hz[i] - tp.nu_hz).abs() > 500.0 {
                            println!("  bad frame {t}: ber {ber:.3} path pow {:.2} nu {:.0} init {:.0} final {:.0}", tp.avg_power, tp.nu_hz, paths[i].nu_hz, decoded.final_nu_hz[i]);
                        }
                    }
                }
            }
            println!("frames with BER>1e-2: {frames_bad}/{trials}");
            for (lo, hi, label) in [(0.9f64, 1.1f64, "P=1.0"), (0.7, 0.9, "P=0.79"), (0.25, 0.4, "P=0.32"), (0.15, 0.25, "P=0.2")] {
                let sel: Vec<&(f64, f64, f64)> = init_errs.iter().filter(|e| e.0 > lo && e.0 < hi).collect();
                if sel.is_empty() { continue; }
                let mut errs: Vec<f64> = sel.iter().map(|e| e.1).collect();
                errs.sort_by(f64::total_cmp);
                let q = |f: f64| errs[((errs.len() - 1) as f64 * f) as usize];
                let over = sel.iter().filter(|e| e.1 > 2000.0).count();
                println!("{label}: init err median {:.0} p90 {:.0} p99 {:.0} max {:.0}  >2kHz: {}/{}", q(0.5), q(0.9), q(0.99), errs[errs.len()-1], over, sel.len());
            }
        }

        "phase" => {
            use doa_ofdm::doppler_init::{model_io, stack_branch};
            use doa_ofdm::signal::{delay_phasor, doppler_phasor, idft};
            use num_complex::Complex64;
            ensure_model();
            let model = model_io::load_model(model_path()).unwrap();
            let cfg = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let pilot = default_pilot(128);
            let tau = 1.5e-6;
            for nu in [1e3, 2e3, 3e3, 4e3, 5e3] {
                let b = delay_phasor(tau, 128, cfg.delta_f_hz);
                let shifted: Vec<Complex64> = pilot.iter().zip(&b).map(|(x, b)| x * b).collect();
                let u = idft(&shifted);
                let c = doppler_phasor(nu, 128, cfg.delay_resolution());
                let clean: Vec<Complex64> = u.iter().zip(&c).map(|(v, c)| v * c).collect();
                // Kernel g(nu) = <u, u ⊙ c(nu)> — the pilot LS gain picks this up.
                let g: Complex64 = u.iter().zip(&clean).map(|(a, b)| a.conj() * b).sum();
                let contaminated: Vec<Complex64> = clean.iter().map(|v| v * (128.0 / g)).collect();
                let p_clean = model.predict_hz(&stack_branch(&clean)).unwrap();
                let p_cont = model.predict_hz(&stack_branch(&contaminated)).unwrap();
                println!("nu {nu:5.0}: clean pred {p_clean:7.0}   contaminated pred {p_cont:7.0}   kernel phase {:.3} rad |g|/M {:.3}", g.arg(), g.norm()/128.0);
            }
        }

        "train" => {
            use doa_ofdm::doppler_init::generate_training_sample;
            use rand::{Rng, SeedableRng};
            use rand_chacha::ChaCha12Rng;
            let batch: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(128);
            let lr: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(2e-3);
            let seed: u64 = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(1);
            let cfg = OfdmConfig::new(5.9e9, 128, 32, 30e3, 5e-6, 32, 1.0, 4).unwrap();
            let pilot = default_pilot(128);
            let tc = TrainingConfig { num_samples: trials, batch_size: batch, learning_rate: lr, seed, ..TrainingConfig::default() };
            let t0 = Instant::now();
            let (model, report) = fnn_train(&tc, &pilot, &cfg).unwrap();
            println!("batch {batch} lr {lr} seed {seed}: {:.0} s, best val MSE {:.4e}", t0.elapsed().as_secs_f64(), report.best_val_mse);
            // Held-out at 15 dB with random global phase (matches deployment).
            let mut rng = ChaCha12Rng::seed_from_u64(777);
            let n_eval = 4000;
            let mut preds = Vec::new();
            let mut truths = Vec::new();
            for _ in 0..n_eval {
                let tau = rng.gen_range(0.0..=5e-6);
                let nu = rng.gen_range(-5e3..=5e3);
                let (mut x, y) = generate_training_sample(tau, nu, 10f64.powf(1.5), &pilot, 5e3, &cfg, &mut rng).unwrap();
                let (sin, cos) = rng.gen_range(0.0..2.0 * std::f64::consts::PI).sin_cos();
                for q in 0..128 {
                    let (re, im) = (x[q], x[q + 128]);
                    x[q] = cos * re - sin * im;
                    x[q + 128] = sin * re + cos * im;
                }
                preds.push(model.forward_normalized(&x).unwrap());
                truths.push(y);
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let (mx, my) = (mean(&preds), mean(&truths));
            let (mut cov, mut vx, mut vy, mut mse) = (0.0, 0.0, 0.0, 0.0);
            for (a, b) in preds.iter().zip(&truths) {
                cov += (a - mx) * (b - my); vx += (a - mx) * (a - mx); vy += (b - my) * (b - my); mse += (a - b) * (a - b);
            }
            println!("held-out @15dB(random phase): pearson {:.5}, nRMSE {:.5}", cov / (vx.sqrt() * vy.sqrt()), (mse / n_eval as f64).sqrt());
        }
        "accounting" => {
            let cfg = ExperimentConfig::default();
            print!("{}", accounting(&cfg).unwrap());
        }
        other => {
            eprintln!("unknown probe '{other}': use csi|zdlimit|speed|rmse|accounting");
        }
    }
}
