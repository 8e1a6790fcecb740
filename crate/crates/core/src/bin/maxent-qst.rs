use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use maxent_rbm::dense::TargetDocument;
use maxent_rbm::experiment::{
    apply_overrides, cmd_bench_sampler, cmd_eval, cmd_gen_target, cmd_train, generate_target, BenchSpec,
    ExperimentSpec,
};
use maxent_rbm::optimizer::{gradcheck, h_sweep, EntropyKind, Fault, GradcheckConfig};
use maxent_rbm::samplers::SamplerConfig;
use maxent_rbm::Result;

#[derive(Parser)]
#[command(name = "maxent-qst", version, about = "Maximum-entropy state reconstruction with RBM purifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Experiment spec JSON; defaults are used for missing fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override a spec field, e.g. `--set optimizer.epochs=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; falls back to the spec, then to $MAXENT_QST_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a target from a random circuit state.
    GenTarget(SpecArgs),
    /// Train against a target; generates one from the spec when --target is absent.
    Train {
        #[command(flatten)]
        args: SpecArgs,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Evaluate a checkpoint against a target.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Samples per replica stream for the sampled entropy.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference cost gradients.
    Gradcheck {
        /// n_sys,n_env,n_hidden
        #[arg(long, value_delimiter = ',', default_values_t = [2, 1, 2])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        /// Use the von Neumann polynomial with this cutoff instead of S_2.
        #[arg(long)]
        vne_cutoff: Option<usize>,
        /// Report the error for h in {1e-4, 1e-5, 1e-6}.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_enum, default_value = "none")]
        fault: FaultArg,
    },
    /// Compare proposal kinds on a fixed RBM.
    BenchSampler {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FaultArg {
    None,
    FlipEntropySign,
}

fn load_spec(args: &SpecArgs) -> Result<ExperimentSpec> {
    let base = match &args.spec {
        Some(p) => ExperimentSpec::read(p)?,
        None => ExperimentSpec::default(),
    };
    let mut spec = base.with_overrides(&args.overrides)?;
    if let Some(out) = &args.out {
        spec.output_dir = Some(out.clone());
    }
    Ok(spec)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenTarget(args) => {
            let spec = load_spec(&args)?;
            let dir = spec.resolve_output_dir();
            let path = dir.join("target.json");
            let doc = cmd_gen_target(&spec, &path)?;
            spec.write(&dir.join("spec.json"))?;
            eprintln!("wrote {}", path.display());
            print_json(&doc)?;
        }
        Command::Train { args, target } => {
            let spec = load_spec(&args)?;
            let target = match target {
                Some(p) => TargetDocument::read(&p)?,
                None => generate_target(&spec)?,
            };
            let summary = cmd_train(&spec, &target, &spec.resolve_output_dir())?;
            eprintln!("wrote {}", summary.output_dir.display());
            if spec.runs == 1 {
                print_json(&summary.runs[0].report)?;
            } else {
                print_json(&summary.sweep)?;
            }
            if let Some(run) = summary.halted() {
                eprintln!("run {} halted: {:?}", run.index, run.outcome.trace.status);
                return Ok(ExitCode::from(3));
            }
        }
        Command::Eval {
            checkpoint,
            target,
            samples,
            seed,
            out,
        } => {
            let sampler = SamplerConfig {
                n_samples: samples,
                seed,
                ..SamplerConfig::default()
            };
            let report = cmd_eval(&checkpoint, &target, &sampler)?;
            if let Some(p) = out {
                write_json(&p, &report)?;
            }
            print_json(&report)?;
        }
        Command::Gradcheck {
            sizes,
            seed,
            h,
            vne_cutoff,
            sweep,
            fault,
        } => {
            let [n_sys, n_env, n_hidden] = sizes[..] else {
                return Err(maxent_rbm::Error::InvalidInput("--sizes takes n_sys,n_env,n_hidden".into()));
            };
            let config = GradcheckConfig {
                n_sys,
                n_env,
                n_hidden,
                seed,
                h,
                entropy: vne_cutoff.map_or(EntropyKind::Renyi2, |cutoff| EntropyKind::Vne { cutoff }),
                fault: match fault {
                    FaultArg::None => Fault::None,
                    FaultArg::FlipEntropySign => Fault::FlipEntropySign,
                },
                ..GradcheckConfig::default()
            };
            let report = gradcheck(&config)?;
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            match &report.worst {
                Some(w) => println!(
                    "{verdict}: max rel err {:.3e}, worst coordinate {} ({}) analytic {:.6e} numeric {:.6e}",
                    report.max_rel_error, w.index, w.coordinate, w.analytic, w.numeric
                ),
                None => println!("{verdict}: no coordinates"),
            }
            if sweep {
                for (step, err) in h_sweep(&config, &[1e-4, 1e-5, 1e-6])? {
                    println!("h = {step:.0e}: max abs err {err:.3e}");
                }
            }
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::BenchSampler { spec, overrides, out } => {
            let base: BenchSpec = match spec {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => BenchSpec::default(),
            };
            let bench = apply_overrides(&base, &overrides)?;
            let report = cmd_bench_sampler(&bench)?;
            if let Some(p) = out {
                write_json(&p, &report)?;
            }
            print_json(&report)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
