//! Noise-sweep experiment harness.
//!
//! For every (noise level, trial) cell one synthetic tensor is
//! generated and every requested method runs on that same tensor:
//! select indices, recover factors, score the reconstruction. Records
//! come out in canonical order (level, trial, method) and can be
//! written as CSV together with per-level mean rows.

use std::io::Write;
use std::time::Instant;

use crate::error::Result;
use crate::recover::{recover_factors, reconstruct, rel_error, RecoverOptions};
use crate::sampling::{tcur_deim_select, DeimPairing, DistKind, TcurDeimOptions};
use crate::select::{cosntf_select, hybrid_select, CosntfOptions};
use crate::synth::{gen_synthetic, SynthSpec};

/// Selection method tags as they appear in CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Cosntf,
    TcurUniform,
    TcurSlice,
    TcurLeverage,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Cosntf,
        Method::TcurUniform,
        Method::TcurSlice,
        Method::TcurLeverage,
        Method::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cosntf => "cosntf",
            Method::TcurUniform => "tcur-uniform",
            Method::TcurSlice => "tcur-slice",
            Method::TcurLeverage => "tcur-leverage",
            Method::Hybrid => "hybrid",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Seed offset so the random methods of one trial do not share a
    /// stream with the generator or each other.
    fn seed_offset(self) -> u64 {
        match self {
            Method::Cosntf => 0,
            Method::TcurUniform => 11,
            Method::TcurSlice => 22,
            Method::TcurLeverage => 33,
            Method::Hybrid => 44,
        }
    }
}

/// Grid and solver settings for one sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    pub slice_sum: f64,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub select: CosntfOptions,
    pub recover: RecoverOptions,
    pub pairing: DeimPairing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            m: 100,
            n: 100,
            p: 10,
            r1: 10,
            r2: 3,
            slice_sum: 100.0,
            noise_levels: default_noise_levels(),
            trials: 10,
            methods: Method::ALL.to_vec(),
            seed: 0,
            select: CosntfOptions::default(),
            recover: RecoverOptions::default(),
            pairing: DeimPairing::default(),
        }
    }
}

/// `1e-7, 1e-6, ..., 1e-1`.
pub fn default_noise_levels() -> Vec<f64> {
    (-7..=-1).map(|e| 10f64.powi(e)).collect()
}

/// One (level, trial, method) measurement. `rel_error` is `NaN` when
/// the method failed on that trial.
#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub method: Method,
    pub r1: usize,
    pub r2: usize,
    pub seed: u64,
    pub noise: f64,
    pub rel_error: f64,
    pub rel_approx: f64,
    pub wall_ms: f64,
}

/// Per-(level, method) arithmetic mean over the successful trials.
#[derive(Clone, Debug)]
pub struct MeanRecord {
    pub method: Method,
    pub r1: usize,
    pub r2: usize,
    pub noise: f64,
    pub rel_error: f64,
    pub rel_approx: f64,
    pub wall_ms: f64,
    pub trials: usize,
}

/// Deterministic per-cell generator seed.
pub fn trial_seed(base: u64, level_idx: usize, trial: usize) -> u64 {
    base.wrapping_add(1 + (level_idx as u64) * 1_000_003 + trial as u64)
}

fn run_method(
    cfg: &SweepConfig,
    tensor: &crate::tensor::Tensor3,
    method: Method,
    cell_seed: u64,
) -> Result<f64> {
    let sel = match method {
        Method::Cosntf => cosntf_select(tensor, cfg.r1, cfg.r2, &cfg.select)?,
        Method::Hybrid => hybrid_select(
            tensor,
            cfg.r1,
            cfg.r2,
            cell_seed + method.seed_offset(),
            &cfg.select,
        )?,
        Method::TcurUniform | Method::TcurSlice | Method::TcurLeverage => {
            let dist = match method {
                Method::TcurUniform => DistKind::Uniform,
                Method::TcurSlice => DistKind::SliceSize,
                _ => DistKind::Leverage,
            };
            let opts = TcurDeimOptions { dist, pairing: cfg.pairing };
            tcur_deim_select(tensor, cfg.r1, cfg.r2, cell_seed + method.seed_offset(), &opts)?
        }
    };
    let model = recover_factors(tensor, &sel.i, &sel.j, &cfg.recover)?;
    rel_error(tensor, &reconstruct(&model))
}

/// Runs the whole grid. Per-trial failures are recorded as `NaN`
/// entries, not propagated.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    let methods: Vec<Method> =
        Method::ALL.into_iter().filter(|m| cfg.methods.contains(m)).collect();
    let mut records = Vec::new();
    for (level_idx, &noise) in cfg.noise_levels.iter().enumerate() {
        for trial in 0..cfg.trials {
            let cell_seed = trial_seed(cfg.seed, level_idx, trial);
            let spec = SynthSpec {
                m: cfg.m,
                n: cfg.n,
                p: cfg.p,
                r1: cfg.r1,
                r2: cfg.r2,
                noise,
                slice_sum: cfg.slice_sum,
                seed: cell_seed,
            };
            let generated = gen_synthetic(&spec)?;
            for &method in &methods {
                let start = Instant::now();
                let err = run_method(cfg, &generated.tensor, method, cell_seed);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let rel = err.unwrap_or(f64::NAN);
                records.push(ExperimentRecord {
                    method,
                    r1: cfg.r1,
                    r2: cfg.r2,
                    seed: cell_seed,
                    noise,
                    rel_error: rel,
                    rel_approx: 1.0 - rel,
                    wall_ms,
                });
            }
        }
    }
    Ok(records)
}

/// Groups by (noise, method) in record order and averages the
/// successful trials.
pub fn means(records: &[ExperimentRecord]) -> Vec<MeanRecord> {
    let mut keys: Vec<(u64, Method)> = Vec::new();
    let mut out: Vec<MeanRecord> = Vec::new();
    for rec in records {
        let key = (rec.noise.to_bits(), rec.method);
        let pos = match keys.iter().position(|&k| k == key) {
            Some(pos) => pos,
            None => {
                keys.push(key);
                out.push(MeanRecord {
                    method: rec.method,
                    r1: rec.r1,
                    r2: rec.r2,
                    noise: rec.noise,
                    rel_error: 0.0,
                    rel_approx: 0.0,
                    wall_ms: 0.0,
                    trials: 0,
                });
                out.len() - 1
            }
        };
        if rec.rel_error.is_finite() {
            let entry = &mut out[pos];
            entry.trials += 1;
            entry.rel_error += rec.rel_error;
            entry.rel_approx += rec.rel_approx;
            entry.wall_ms += rec.wall_ms;
        }
    }
    for entry in &mut out {
        if entry.trials > 0 {
            let t = entry.trials as f64;
            entry.rel_error /= t;
            entry.rel_approx /= t;
            entry.wall_ms /= t;
        } else {
            entry.rel_error = f64::NAN;
            entry.rel_approx = f64::NAN;
        }
    }
    out
}

/// Writes trial rows and (optionally) mean rows. `include_wall` keeps
/// measured wall times; when off the column is written as 0 so a fixed
/// seed reproduces the file byte for byte.
pub fn write_csv<W: Write>(
    w: &mut W,
    records: &[ExperimentRecord],
    include_means: bool,
    include_wall: bool,
) -> std::io::Result<()> {
    writeln!(w, "method,r1,r2,seed,noise,rel_error,rel_approx,wall_ms")?;
    let wall = |ms: f64| if include_wall { format!("{ms:.3}") } else { "0".to_string() };
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:e},{:e},{:e},{}",
            r.method.name(),
            r.r1,
            r.r2,
            r.seed,
            r.noise,
            r.rel_error,
            r.rel_approx,
            wall(r.wall_ms)
        )?;
    }
    if include_means {
        for m in means(records) {
            writeln!(
                w,
                "{},{},{},mean,{:e},{:e},{:e},{}",
                m.method.name(),
                m.r1,
                m.r2,
                m.noise,
                m.rel_error,
                m.rel_approx,
                wall(m.wall_ms)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SweepConfig {
        SweepConfig {
            m: 12,
            n: 12,
            p: 2,
            r1: 3,
            r2: 2,
            noise_levels: vec![0.0],
            trials: 1,
            methods: vec![Method::Cosntf],
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn single_cell_cosntf_hits_the_floor() {
        let records = run_sweep(&tiny_config()).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.method, Method::Cosntf);
        assert!(r.rel_error <= 1e-6, "rel error {:.3e}", r.rel_error);
        assert!((r.rel_approx - (1.0 - r.rel_error)).abs() <= 1e-12);
    }

    #[test]
    fn records_are_deterministic_per_seed() {
        let a = run_sweep(&tiny_config()).unwrap();
        let b = run_sweep(&tiny_config()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.rel_error.to_bits(), y.rel_error.to_bits());
            assert_eq!(x.seed, y.seed);
        }
        let mut csv_a = Vec::new();
        write_csv(&mut csv_a, &a, true, false).unwrap();
        let mut csv_b = Vec::new();
        write_csv(&mut csv_b, &b, true, false).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn default_grid_has_seven_levels() {
        assert_eq!(default_noise_levels().len(), 7);
        assert_eq!(default_noise_levels()[0], 1e-7);
        assert_eq!(*default_noise_levels().last().unwrap(), 1e-1);
    }

    #[test]
    fn means_are_exact_arithmetic_means() {
        let mk = |method, noise, rel: f64, seed| ExperimentRecord {
            method,
            r1: 3,
            r2: 2,
            seed,
            noise,
            rel_error: rel,
            rel_approx: 1.0 - rel,
            wall_ms: 1.0,
        };
        let records = vec![
            mk(Method::Cosntf, 1e-3, 0.25, 1),
            mk(Method::Cosntf, 1e-3, 0.75, 2),
            mk(Method::Hybrid, 1e-3, 0.5, 1),
            mk(Method::Cosntf, 1e-2, 0.1, 3),
        ];
        let ms = means(&records);
        assert_eq!(ms.len(), 3);
        let mean_cos = ms
            .iter()
            .find(|m| m.method == Method::Cosntf && m.noise == 1e-3)
            .unwrap();
        assert!((mean_cos.rel_error - 0.5).abs() <= 1e-12);
        assert_eq!(mean_cos.trials, 2);
        // per-level mean rows: one per (method, level) pair
        let mut csv = Vec::new();
        write_csv(&mut csv, &records, true, false).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().filter(|l| l.contains(",mean,")).count(), 3);
        assert!(text.lines().next().unwrap().starts_with("method,"));
    }

    #[test]
    fn failed_trials_are_reported_as_nan_and_skipped_in_means() {
        let good = ExperimentRecord {
            method: Method::Cosntf,
            r1: 2,
            r2: 2,
            seed: 1,
            noise: 0.0,
            rel_error: 0.5,
            rel_approx: 0.5,
            wall_ms: 1.0,
        };
        let bad = ExperimentRecord { rel_error: f64::NAN, rel_approx: f64::NAN, seed: 2, ..good.clone() };
        let ms = means(&[good, bad]);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].trials, 1);
        assert!((ms[0].rel_error - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("nope"), None);
    }
}
