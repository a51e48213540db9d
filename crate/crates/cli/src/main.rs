use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::error;
use svrnaq_core::harness::{self, OptimizerKind, RunConfig, RunStatus};

#[derive(Parser)]
#[command(name = "svrnaq", version, about = "Train small networks with variance-reduced quasi-Newton optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one optimizer and write per-epoch metrics.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        optimizer: Option<String>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        memory: Option<usize>,
        /// Metrics CSV path; parameters go next to it with a `.params` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train several optimizers on identical data, weights and batches.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated optimizer names.
        #[arg(long, value_delimiter = ',', required = true)]
        optimizers: Vec<String>,
        /// Output prefix; defaults to the config's `out` without extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check backpropagation against finite differences.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Config file or preset name.
    #[arg(long)]
    config: String,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut c = RunConfig::load(&self.config)?;
        if let Some(b) = self.batch {
            c.batch = b;
        }
        if let Some(e) = self.epochs {
            c.epochs = e;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("override `{kv}` is not KEY=VALUE"))?;
            c.set(k.trim(), v)?;
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            common,
            optimizer,
            mu,
            memory,
            out,
        } => {
            let mut c = common.load()?;
            if let Some(o) = optimizer {
                c.optimizer = o.parse()?;
            }
            if let Some(m) = mu {
                c.mu = m;
            }
            if let Some(m) = memory {
                c.memory = m;
            }
            if let Some(o) = out {
                c.out = o;
            }
            let s = harness::run(&c)?;
            println!("metrics: {}", s.metrics_path.display());
            Ok(report(&s))
        }
        Command::Compare {
            common,
            optimizers,
            out,
        } => {
            let base = common.load()?;
            let prefix = out.unwrap_or_else(|| base.out.with_extension(""));
            let configs = optimizers
                .iter()
                .map(|name| {
                    let mut c = base.clone();
                    c.optimizer = name.parse::<OptimizerKind>()?;
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()?;
            let cmp = harness::compare(&configs, &prefix)?;
            let mut code = ExitCode::SUCCESS;
            for s in &cmp.runs {
                if report(s) != ExitCode::SUCCESS {
                    code = ExitCode::FAILURE;
                }
            }
            println!("merged: {}", cmp.merged_path.display());
            Ok(code)
        }
        Command::Gradcheck { common, tol } => {
            let c = common.load()?;
            let r = harness::gradcheck(&c, tol)?;
            let worst = harness::describe_coordinate(&c.layers, r.worst_coordinate);
            let verdict = if r.passed() { "pass" } else { "FAIL" };
            println!(
                "{verdict}: max relative error {:.3e} (tolerance {:.1e}) over {} coordinates, batch {}; \
                 worst coordinate {} ({worst}): backprop {:e}, finite difference {:e}",
                r.max_rel_err, r.tolerance, r.coordinates, r.batch, r.worst_coordinate, r.analytic, r.numeric
            );
            Ok(if r.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Presets => {
            for name in RunConfig::preset_names() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report(s: &harness::RunSummary) -> ExitCode {
    let last = s.final_record();
    let metric = last
        .and_then(|r| r.train_rmse.map(|x| format!("train rmse {x:.6}")))
        .or_else(|| last.map(|r| format!("train loss {:.6}", r.train_loss)))
        .unwrap_or_else(|| "no epochs".into());
    match &s.status {
        RunStatus::Completed => {
            println!("{}: {metric}", s.optimizer);
            ExitCode::SUCCESS
        }
        RunStatus::Diverged { epoch, reason } => {
            println!("{}: diverged in epoch {epoch} ({reason})", s.optimizer);
            ExitCode::FAILURE
        }
    }
}
