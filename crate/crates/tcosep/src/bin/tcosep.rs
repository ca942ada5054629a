//! Command-line front end: synthetic generation, index selection,
//! factor recovery, scoring, noise sweeps and PGM ingestion.
//!
//! Indices in `.idx` files and on the terminal are 1-based. Every
//! randomized subcommand takes `--seed` and is bit-reproducible for a
//! fixed seed; `sweep` writes wall-clock times only under `--timings`
//! so its CSV stays byte-identical across runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tcosep::{
    cosntf_select, gen_synthetic, hybrid_select, recover_factors, reconstruct, rel_approx,
    rel_error, run_sweep, tcur_deim_select, write_csv, CosntfOptions, DeimPairing, DistKind,
    FgmParams, IndexList, Method, Mode, RecoverOptions, SweepConfig, SynthSpec,
};

#[derive(Parser)]
#[command(name = "tcosep", version, about = "Coseparable nonnegative tensor factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Cosntf,
    Tcur,
    Hybrid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Uniform,
    Slice,
    Leverage,
}

impl From<DistArg> for DistKind {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Uniform => DistKind::Uniform,
            DistArg::Slice => DistKind::SliceSize,
            DistArg::Leverage => DistKind::Leverage,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PairingArg {
    /// W feeds the horizontal picks, V the lateral ones.
    Swapped,
    /// The transposed pairing exactly as printed; errors when a pick
    /// runs past the sampled set.
    Printed,
}

impl From<PairingArg> for DeimPairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Swapped => DeimPairing::Swapped,
            PairingArg::Printed => DeimPairing::AsPrinted,
        }
    }
}

#[derive(Args)]
struct SelectTuning {
    /// Stopping threshold on the selected-subtensor movement.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    /// Outer alternation cap.
    #[arg(long, default_value_t = 50)]
    maxiter: usize,
    /// Trace regularization weight of the self-dictionary model.
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
}

impl SelectTuning {
    fn options(&self) -> CosntfOptions {
        CosntfOptions {
            delta: self.delta,
            max_outer: self.maxiter,
            fgm: FgmParams { lambda: self.lambda, ..FgmParams::default() },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a noisy coseparable tensor and its ground truth.
    Gen {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long, default_value_t = 10)]
        r1: usize,
        #[arg(long, default_value_t = 3)]
        r2: usize,
        /// Noise level ε with ‖N‖_F = ε·‖A_scale‖_F.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Common slice-sum target of both modes.
        #[arg(long, default_value_t = 100.0)]
        slice_sum: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output tensor path.
        #[arg(long, short)]
        out: PathBuf,
        /// Ground-truth index pair output.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Optional noiseless tensor output.
        #[arg(long)]
        noiseless: Option<PathBuf>,
    },
    /// Select a coseparable core index pair.
    Select {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Sampling distribution for the tcur method.
        #[arg(long, value_enum, default_value_t = DistArg::Uniform)]
        dist: DistArg,
        #[arg(long)]
        r1: usize,
        #[arg(long)]
        r2: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: SelectTuning,
        /// DEIM pairing for the tcur method.
        #[arg(long, value_enum, default_value_t = PairingArg::Swapped)]
        deim_pairing: PairingArg,
        /// Output .idx path.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Recover nonnegative factors for a given index pair.
    Factor {
        #[arg(long, short)]
        input: PathBuf,
        /// Index pair (.idx) selecting the core.
        #[arg(long)]
        idx: PathBuf,
        #[arg(long, default_value_t = 100)]
        maxiter: usize,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        /// Prefix for <prefix>.p1.t3t, <prefix>.core.t3t, <prefix>.p2.t3t.
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },
    /// Relative error and approximation of a candidate tensor.
    Eval {
        /// Reference tensor A.
        #[arg(long)]
        reference: PathBuf,
        /// Candidate tensor Ã.
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Noise sweep over methods; writes per-trial and mean CSV rows.
    Sweep {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long, default_value_t = 10)]
        r1: usize,
        #[arg(long, default_value_t = 3)]
        r2: usize,
        /// Comma-separated noise levels; default 1e-7..1e-1 log-spaced.
        #[arg(long, value_delimiter = ',')]
        noise_levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Comma-separated subset of cosntf,tcur-uniform,tcur-slice,tcur-leverage,hybrid.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: SelectTuning,
        #[arg(long, value_enum, default_value_t = PairingArg::Swapped)]
        deim_pairing: PairingArg,
        /// Record measured wall times (breaks byte-reproducibility).
        #[arg(long)]
        timings: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Stack a directory of grayscale PGM images into a tensor.
    Ingest {
        /// Directory containing .pgm files (P2 or P5).
        #[arg(long)]
        dir: PathBuf,
        /// Bilinear resize target as HxW, e.g. 24x21.
        #[arg(long)]
        resize: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn parse_resize(spec: &str) -> Result<(usize, usize), String> {
    let (h, w) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("resize must look like HxW, got {spec:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height in {spec:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width in {spec:?}"))?;
    Ok((h, w))
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Gen { m, n, p, r1, r2, noise, slice_sum, seed, out, truth, noiseless } => {
            let spec = SynthSpec { m, n, p, r1, r2, noise, slice_sum, seed };
            let gen = gen_synthetic(&spec).map_err(|e| e.to_string())?;
            tcosep::fileio::write_t3t(&out, &gen.tensor).map_err(|e| e.to_string())?;
            println!("wrote {} ({m}x{n}x{p}, noise {noise:e}, seed {seed})", out.display());
            if let Some(path) = truth {
                tcosep::fileio::write_idx(&path, &gen.truth.i, &gen.truth.j)
                    .map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = noiseless {
                tcosep::fileio::write_t3t(&path, &gen.truth.noiseless)
                    .map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Select { input, method, dist, r1, r2, seed, tuning, deim_pairing, out } => {
            let tensor = tcosep::fileio::read_t3t(&input).map_err(|e| e.to_string())?;
            let opts = tuning.options();
            let result = match method {
                MethodArg::Cosntf => cosntf_select(&tensor, r1, r2, &opts),
                MethodArg::Hybrid => hybrid_select(&tensor, r1, r2, seed, &opts),
                MethodArg::Tcur => tcur_deim_select(
                    &tensor,
                    r1,
                    r2,
                    seed,
                    &tcosep::TcurDeimOptions {
                        dist: dist.into(),
                        pairing: deim_pairing.into(),
                    },
                ),
            }
            .map_err(|e| e.to_string())?;
            tcosep::fileio::write_idx(&out, &result.i, &result.j).map_err(|e| e.to_string())?;
            println!(
                "I: {}",
                result.i.to_one_based().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            );
            println!(
                "J: {}",
                result.j.to_one_based().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            );
            println!(
                "outer_iterations: {} converged: {}",
                result.outer_iterations, result.converged
            );
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Factor { input, idx, maxiter, delta, out_prefix } => {
            let tensor = tcosep::fileio::read_t3t(&input).map_err(|e| e.to_string())?;
            let (m, n, _) = tensor.dims();
            let (raw_i, raw_j) = tcosep::fileio::read_idx(&idx).map_err(|e| e.to_string())?;
            let i = IndexList::from_one_based(Mode::Horizontal, &raw_i, m)
                .map_err(|e| e.to_string())?;
            let j =
                IndexList::from_one_based(Mode::Lateral, &raw_j, n).map_err(|e| e.to_string())?;
            let opts = RecoverOptions { max_iter: maxiter, delta, ..RecoverOptions::default() };
            let model = recover_factors(&tensor, &i, &j, &opts).map_err(|e| e.to_string())?;
            let rebuilt = reconstruct(&model);
            let err = rel_error(&tensor, &rebuilt).map_err(|e| e.to_string())?;
            println!("rel_error: {err:e}");
            println!("rel_approx: {:.4}%", 100.0 * (1.0 - err));
            println!("iterations: {} converged: {}", model.iterations, model.converged);
            if let Some(prefix) = out_prefix {
                let stem = prefix.display().to_string();
                for (tag, t) in
                    [("p1", &model.p1), ("core", &model.core), ("p2", &model.p2)]
                {
                    let path = PathBuf::from(format!("{stem}.{tag}.t3t"));
                    tcosep::fileio::write_t3t(&path, t).map_err(|e| e.to_string())?;
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Eval { reference, candidate } => {
            let a = tcosep::fileio::read_t3t(&reference).map_err(|e| e.to_string())?;
            let b = tcosep::fileio::read_t3t(&candidate).map_err(|e| e.to_string())?;
            let err = rel_error(&a, &b).map_err(|e| e.to_string())?;
            let approx = rel_approx(&a, &b).map_err(|e| e.to_string())?;
            println!("rel_error: {err:e}");
            println!("rel_approx: {:.4}%", 100.0 * approx);
            Ok(())
        }
        Command::Sweep {
            m,
            n,
            p,
            r1,
            r2,
            noise_levels,
            trials,
            methods,
            seed,
            tuning,
            deim_pairing,
            timings,
            out,
        } => {
            let methods = match methods {
                None => Method::ALL.to_vec(),
                Some(names) => {
                    let mut parsed = Vec::new();
                    for name in &names {
                        parsed.push(
                            Method::parse(name)
                                .ok_or_else(|| format!("unknown method {name:?}"))?,
                        );
                    }
                    parsed
                }
            };
            let cfg = SweepConfig {
                m,
                n,
                p,
                r1,
                r2,
                noise_levels: noise_levels.unwrap_or_else(tcosep::default_noise_levels),
                trials,
                methods,
                seed,
                select: tuning.options(),
                pairing: deim_pairing.into(),
                ..SweepConfig::default()
            };
            let records = run_sweep(&cfg).map_err(|e| e.to_string())?;
            let mut file = std::fs::File::create(&out).map_err(|e| e.to_string())?;
            write_csv(&mut file, &records, true, timings).map_err(|e| e.to_string())?;
            println!("wrote {} ({} trial rows)", out.display(), records.len());
            Ok(())
        }
        Command::Ingest { dir, resize, out } => {
            let target = match resize {
                Some(spec) => Some(parse_resize(&spec)?),
                None => None,
            };
            let tensor = tcosep::img::ingest_images(&dir, target).map_err(|e| e.to_string())?;
            let (m, n, p) = tensor.dims();
            tcosep::fileio::write_t3t(&out, &tensor).map_err(|e| e.to_string())?;
            println!("wrote {} ({m}x{n}x{p} from {} images)", out.display(), n);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
