//! The subcommands. Each writes its artifacts under the configured output
//! directory and returns the computed data.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::animat::random_policy_life;
use crate::error::{Error, Result};
use crate::evolution::{evolve, with_jobs, GenerationStats, Population, RunOutcome};
use crate::genome::lsys::{genotype_gene_count, ls_proof_stats, ProofSystemStats};
use crate::genome::{check_neurons, Encoding};
use crate::rng::{stream, Purpose};
use crate::world::WorldType;

use super::config::RunConfig;
use super::report::{self, ConditionSummary};
use super::svg::{LineChart, Series};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn food_chart(title: &str, stats: &[GenerationStats]) -> LineChart {
    let mut chart = LineChart::new(title, "generation", "food");
    let g = |s: &GenerationStats| s.generation as f64;
    chart.push(Series::new(
        "max food",
        stats.iter().map(|s| (g(s), s.max_food as f64)).collect(),
    ));
    chart.push(Series::new(
        "mean food",
        stats.iter().map(|s| (g(s), s.mean_food)).collect(),
    ));
    chart
}

/// Evolves one population, streaming `stats.csv` as generations finish,
/// then writes `final.pop` and `fitness.svg`.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    create_dir(&config.out)?;
    let world = config.world()?;
    let population = Population::random(config.encoding, &config.ga, config.run_seed)?;

    let mut csv = BufWriter::new(File::create(config.out.join("stats.csv"))?);
    writeln!(csv, "{}", report::STATS_HEADER)?;
    csv.flush()?;
    let mut write_error = None;
    let outcome = with_jobs(config.jobs, || {
        evolve(
            population,
            &world,
            config.generations,
            &config.ga,
            config.run_seed,
            |row| {
                let written = writeln!(csv, "{}", report::stats_row(row)).and_then(|_| csv.flush());
                if let Err(e) = written {
                    write_error.get_or_insert(e);
                }
            },
        )
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }

    fs::write(config.out.join("final.pop"), outcome.population.to_text())?;
    let title = format!("{} in {}", config.encoding, world.world_type());
    fs::write(
        config.out.join("fitness.svg"),
        food_chart(&title, &outcome.stats).render(),
    )?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct CompareRun {
    pub encoding: Encoding,
    pub seed: u64,
    pub result: std::result::Result<RunOutcome, String>,
}

impl CompareRun {
    pub fn stats(&self) -> Option<&[GenerationStats]> {
        self.result.as_ref().ok().map(|o| o.stats.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub runs: Vec<CompareRun>,
    pub summaries: Vec<ConditionSummary>,
}

impl ComparisonReport {
    pub fn runs_of(&self, encoding: Encoding) -> impl Iterator<Item = &CompareRun> {
        self.runs.iter().filter(move |r| r.encoding == encoding)
    }

    pub fn summary(&self, encoding: Encoding) -> Option<&ConditionSummary> {
        self.summaries.iter().find(|s| s.label == encoding.name())
    }
}

/// Per generation, the mean over successful runs of `max_food`.
fn mean_curve<'a>(runs: impl Iterator<Item = &'a CompareRun>, generations: u64) -> Vec<(f64, f64)> {
    let series: Vec<&[GenerationStats]> = runs.filter_map(CompareRun::stats).collect();
    (0..generations as usize)
        .filter_map(|g| {
            let values: Vec<f64> = series
                .iter()
                .filter_map(|s| s.get(g))
                .map(|r| r.max_food as f64)
                .collect();
            (!values.is_empty()).then(|| ((g + 1) as f64, report::mean(&values)))
        })
        .collect()
}

/// Runs every (encoding, seed) pair with the base config and writes the
/// comparison artifacts: `curves.csv`, `traces.csv`, `summary.csv`,
/// `curves.svg`, `traces.svg` and one `<encoding>_<seed>.pop` per run.
pub fn cmd_compare(base: &RunConfig, encodings: &[Encoding], seeds: &[u64]) -> Result<ComparisonReport> {
    base.validate()?;
    if seeds.len() < 2 {
        return Err(Error::Config("compare needs at least two seeds".into()));
    }
    if encodings.is_empty() {
        return Err(Error::Config("compare needs at least one encoding".into()));
    }
    create_dir(&base.out)?;
    let world = base.world()?;

    let mut runs = Vec::new();
    for &encoding in encodings {
        for &seed in seeds {
            let result = Population::random(encoding, &base.ga, seed).and_then(|population| {
                with_jobs(base.jobs, || {
                    evolve(population, &world, base.generations, &base.ga, seed, |_| {})
                })
            });
            if let Ok(outcome) = &result {
                let name = format!("{}_{seed}.pop", encoding.name().to_lowercase());
                fs::write(base.out.join(name), outcome.population.to_text())?;
            }
            runs.push(CompareRun {
                encoding,
                seed,
                result: result.map_err(|e| e.to_string()),
            });
        }
    }

    let summaries: Vec<ConditionSummary> = encodings
        .iter()
        .map(|&e| {
            let stats: Vec<Option<&[GenerationStats]>> =
                runs.iter().filter(|r| r.encoding == e).map(CompareRun::stats).collect();
            ConditionSummary::new(e.name(), &stats, base.threshold)
        })
        .collect();
    let report = ComparisonReport { runs, summaries };

    let mut curves = String::from("generation");
    for e in encodings {
        curves.push(',');
        curves.push_str(e.name());
    }
    curves.push('\n');
    let per_encoding: Vec<Vec<(f64, f64)>> = encodings
        .iter()
        .map(|&e| mean_curve(report.runs_of(e), base.generations))
        .collect();
    for g in 1..=base.generations {
        curves.push_str(&g.to_string());
        for curve in &per_encoding {
            match curve.iter().find(|p| p.0 == g as f64) {
                Some(p) => curves.push_str(&format!(",{:.3}", p.1)),
                None => curves.push_str(",NA"),
            }
        }
        curves.push('\n');
    }
    fs::write(base.out.join("curves.csv"), curves)?;

    let mut traces = String::from("encoding,seed,generation,max_food,mean_food\n");
    for run in &report.runs {
        for s in run.stats().unwrap_or_default() {
            traces.push_str(&format!(
                "{},{},{},{},{:.3}\n",
                run.encoding, run.seed, s.generation, s.max_food, s.mean_food
            ));
        }
    }
    fs::write(base.out.join("traces.csv"), traces)?;
    fs::write(base.out.join("summary.csv"), report::summary_csv(&report.summaries))?;

    let mut chart = LineChart::new("Mean of max food over runs", "generation", "food");
    for (e, curve) in encodings.iter().zip(per_encoding) {
        chart.push(Series::new(e.name(), curve));
    }
    fs::write(base.out.join("curves.svg"), chart.render())?;

    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"];
    let mut chart = LineChart::new("Max food per run", "generation", "food");
    for run in &report.runs {
        let idx = encodings.iter().position(|&e| e == run.encoding).unwrap_or(0);
        let points = run
            .stats()
            .unwrap_or_default()
            .iter()
            .map(|s| (s.generation as f64, s.max_food as f64))
            .collect();
        chart.push(
            Series::new(format!("{} seed {}", run.encoding, run.seed), points).with_color(palette[idx % palette.len()]),
        );
    }
    fs::write(base.out.join("traces.svg"), chart.render())?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub source: PathBuf,
    pub encoding: Encoding,
    pub stats: Vec<GenerationStats>,
}

impl TransferResult {
    pub fn first(&self) -> Option<&GenerationStats> {
        self.stats.first()
    }

    pub fn last(&self) -> Option<&GenerationStats> {
        self.stats.last()
    }
}

/// Moves each snapshot population into a world of `world_type` and keeps
/// evolving it. Writes `transfer.csv`, `transfer_summary.csv` and
/// `transfer.svg`.
pub fn cmd_transfer(
    config: &RunConfig,
    snapshots: &[PathBuf],
    world_type: WorldType,
    generations: u64,
    seed: u64,
) -> Result<Vec<TransferResult>> {
    config.validate()?;
    if snapshots.is_empty() {
        return Err(Error::Config("transfer needs at least one snapshot".into()));
    }
    let populations = snapshots
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path)?;
            Population::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = populations[0].n();
    if let Some((path, p)) = snapshots.iter().zip(&populations).find(|(_, p)| p.n() != n) {
        return Err(Error::Config(format!(
            "{} has {} neurons, expected {n}",
            path.display(),
            p.n()
        )));
    }
    let mut ga = config.ga;
    ga.neurons = n;
    create_dir(&config.out)?;
    let world = config.world_of_type(world_type)?;

    let mut results = Vec::new();
    for (path, mut population) in snapshots.iter().zip(populations) {
        let encoding = population.encoding;
        population.generation = 0;
        ga.population = population.size();
        let outcome = with_jobs(config.jobs, || {
            evolve(population, &world, generations, &ga, seed, |_| {})
        })?;
        results.push(TransferResult {
            source: path.clone(),
            encoding,
            stats: outcome.stats,
        });
    }

    let mut csv = String::from("population,encoding,generation,max_food,mean_food,best_ever,starved,mean_clicks\n");
    let mut summary = String::from(
        "population,encoding,first_max_food,first_mean_food,last_generation,last_max_food,last_mean_food\n",
    );
    let mut chart = LineChart::new(format!("Transfer to {world_type}"), "generation", "max food");
    for (i, r) in results.iter().enumerate() {
        for s in &r.stats {
            csv.push_str(&format!("{i},{},{}\n", r.encoding, report::stats_row(s)));
        }
        if let (Some(a), Some(b)) = (r.first(), r.last()) {
            summary.push_str(&format!(
                "{i},{},{},{:.3},{},{},{:.3}\n",
                r.encoding, a.max_food, a.mean_food, b.generation, b.max_food, b.mean_food
            ));
        }
        let points = r
            .stats
            .iter()
            .map(|s| (s.generation as f64, s.max_food as f64))
            .collect();
        chart.push(Series::new(format!("{} #{i}", r.encoding), points));
    }
    fs::write(config.out.join("transfer.csv"), csv)?;
    fs::write(config.out.join("transfer_summary.csv"), summary)?;
    fs::write(config.out.join("transfer.svg"), chart.render())?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub world_type: WorldType,
    pub lives: usize,
    pub mean: f64,
    pub max: u32,
    pub sd: f64,
}

/// Random-policy lives; life `i` uses the generation-0 streams of index `i`.
pub fn cmd_baseline(config: &RunConfig, world_type: WorldType, lives: usize, seed: u64) -> Result<BaselineReport> {
    config.validate()?;
    if lives == 0 {
        return Err(Error::Config("baseline needs at least one life".into()));
    }
    let world = match (&config.world_file, world_type == config.world_type) {
        (Some(_), true) => config.world()?,
        _ => config.world_of_type(world_type)?,
    };
    let food: Vec<u32> = with_jobs(config.jobs, || {
        (0..lives as u64)
            .into_par_iter()
            .map(|i| {
                let mut food_rng = stream(seed, 0, i, Purpose::FoodScatter);
                let spawn_rng = stream(seed, 0, i, Purpose::Spawn);
                random_policy_life(&world, &config.ga.life, &mut food_rng, spawn_rng).map(|l| l.fitness)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let values: Vec<f64> = food.iter().map(|&f| f as f64).collect();
    Ok(BaselineReport {
        world_type,
        lives,
        mean: report::mean(&values),
        max: food.iter().copied().max().unwrap_or(0),
        sd: report::sample_sd(&values),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub lsys_genes: usize,
    pub matrix_genes: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub proof: Vec<ProofSystemStats>,
}

pub const PROOF_LEVELS: u32 = 8;

/// Genotype sizes per neuron count plus the rewrite-level table. With an
/// output directory, also writes `scaling.csv` and `proof.csv`.
pub fn cmd_scaling(ns: &[usize], out: Option<&Path>) -> Result<ScalingReport> {
    let rows = ns
        .iter()
        .map(|&n| {
            check_neurons(n)?;
            let lsys_genes = genotype_gene_count(n)?;
            let matrix_genes = n * n;
            Ok(ScalingRow {
                n,
                lsys_genes,
                matrix_genes,
                ratio: matrix_genes as f64 / lsys_genes as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let proof = (1..=PROOF_LEVELS).map(ls_proof_stats).collect::<Result<Vec<_>>>()?;
    let report = ScalingReport { rows, proof };
    if let Some(dir) = out {
        create_dir(dir)?;
        fs::write(dir.join("scaling.csv"), scaling_csv(&report))?;
        fs::write(dir.join("proof.csv"), proof_csv(&report))?;
    }
    Ok(report)
}

pub fn scaling_csv(report: &ScalingReport) -> String {
    let mut out = String::from("n,lsys_genes,matrix_genes,ratio\n");
    for r in &report.rows {
        out.push_str(&format!("{},{},{},{:.3}\n", r.n, r.lsys_genes, r.matrix_genes, r.ratio));
    }
    out
}

pub fn proof_csv(report: &ScalingReport) -> String {
    let mut out = String::from("i,symbols,terminals,neurons\n");
    for p in &report.proof {
        out.push_str(&format!("{},{},{},{}\n", p.i, p.symbols, p.terminals, p.neurons));
    }
    out
}
