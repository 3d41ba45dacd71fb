use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use neurolsys::genome::Encoding;
use neurolsys::harness::report;
use neurolsys::harness::{cmd_baseline, cmd_compare, cmd_run, cmd_scaling, cmd_transfer, RunConfig};
use neurolsys::world::WorldType;
use neurolsys::Error;

/// Evolve Hebbian-network foragers with direct and L-system genotypes.
#[derive(Parser)]
#[command(name = "neurolsys", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file applied before command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Food count that marks a competitive animat.
    #[arg(long, global = true)]
    threshold: Option<u32>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one population.
    Run {
        #[arg(long)]
        encoding: Option<Encoding>,
        #[arg(long)]
        world: Option<WorldType>,
        #[arg(long)]
        generations: Option<u64>,
    },
    /// Evolve several encodings over several seeds and summarize.
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "Lsys,MatrixLSG,Matrix")]
        encodings: Vec<Encoding>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        #[arg(long)]
        generations: Option<u64>,
    },
    /// Continue evolving saved populations in another world.
    Transfer {
        /// Population snapshots.
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, default_value = "Maze")]
        world: WorldType,
        #[arg(long, default_value_t = 100)]
        generations: u64,
    },
    /// Food collected by random-action animats.
    Baseline {
        #[arg(long)]
        world: Option<WorldType>,
        #[arg(long, default_value_t = 200)]
        lives: usize,
    },
    /// Genotype size against network size.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512,1024,2048,4096")]
        neurons: Vec<usize>,
    },
}

fn load(common: &Common) -> neurolsys::Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.run_seed = seed;
    }
    if let Some(out) = &common.out {
        config.out = out.clone();
    }
    if let Some(jobs) = common.jobs {
        config.jobs = jobs;
    }
    if let Some(threshold) = common.threshold {
        config.threshold = threshold;
    }
    for kv in &common.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`--set {kv}`: expected KEY=VALUE")))?;
        config.set(key.trim(), value.trim())?;
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: Cli) -> neurolsys::Result<()> {
    let mut config = load(&cli.common)?;
    match cli.command {
        Command::Run {
            encoding,
            world,
            generations,
        } => {
            config.encoding = encoding.unwrap_or(config.encoding);
            config.world_type = world.unwrap_or(config.world_type);
            config.generations = generations.unwrap_or(config.generations);
            let outcome = cmd_run(&config)?;
            if let Some(last) = outcome.stats.last() {
                println!(
                    "generation {}: max {} mean {:.1} best ever {}",
                    last.generation, last.max_food, last.mean_food, last.best_ever
                );
            }
            println!("wrote {}", config.out.display());
        }
        Command::Compare {
            encodings,
            seeds,
            generations,
        } => {
            config.generations = generations.unwrap_or(config.generations);
            let result = cmd_compare(&config, &encodings, &seeds)?;
            print!("{}", report::summary_csv(&result.summaries));
            for run in result.runs.iter().filter(|r| r.result.is_err()) {
                eprintln!(
                    "{} seed {} failed: {}",
                    run.encoding,
                    run.seed,
                    run.result.as_ref().unwrap_err()
                );
            }
        }
        Command::Transfer {
            snapshots,
            world,
            generations,
        } => {
            let results = cmd_transfer(&config, &snapshots, world, generations, config.run_seed)?;
            for r in &results {
                if let (Some(a), Some(b)) = (r.first(), r.last()) {
                    println!(
                        "{} ({}): generation 1 max {}, generation {} max {}",
                        r.source.display(),
                        r.encoding,
                        a.max_food,
                        b.generation,
                        b.max_food
                    );
                }
            }
        }
        Command::Baseline { world, lives } => {
            let world = world.unwrap_or(config.world_type);
            let b = cmd_baseline(&config, world, lives, config.run_seed)?;
            println!("world,lives,mean,max,sd");
            println!("{},{},{:.3},{},{:.3}", b.world_type, b.lives, b.mean, b.max, b.sd);
        }
        Command::Scaling { neurons } => {
            let out = cli.common.out.as_deref();
            let r = cmd_scaling(&neurons, out)?;
            print!("{}", neurolsys::harness::commands::scaling_csv(&r));
            println!();
            print!("{}", neurolsys::harness::commands::proof_csv(&r));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParam(_) | Error::InvalidNeuronCount(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
