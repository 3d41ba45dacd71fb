//! Rank-based genetic algorithm with elitism.
//!
//! Every life in generation `g` draws its food layout and spawn pose from
//! streams keyed by `(run_seed, g, member index)`, so a fitness vector does
//! not depend on evaluation order or worker count.

use rand::Rng;
use rayon::prelude::*;

use crate::animat::{live, DeathCause, LifeParams, LifeResult};
use crate::error::{Error, Result};
use crate::genome::{Encoding, Genotype, GenotypeParams, LsysGenotype, MatrixGenotype, MutationParams};
use crate::hebbnet::{Network, NetworkConfig, DEFAULT_NEURONS};
use crate::rng::{stream, Purpose};
use crate::world::World;

pub const DEFAULT_POPULATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub neurons: usize,
    /// Per-gene mutation probability.
    pub pm: f64,
    pub p_type: f64,
    pub k_points: usize,
    /// Probability that a mating recombines; otherwise the child copies the
    /// ranked parent.
    pub pc: f64,
    pub genotype: GenotypeParams,
    pub life: LifeParams,
    pub network: NetworkConfig,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: DEFAULT_POPULATION,
            neurons: DEFAULT_NEURONS,
            pm: 0.01,
            p_type: 0.3,
            k_points: 2,
            pc: 1.0,
            genotype: GenotypeParams::default(),
            life: LifeParams::default(),
            network: NetworkConfig::default(),
        }
    }
}

impl GaParams {
    pub fn mutation(&self) -> MutationParams {
        MutationParams {
            rate: self.pm,
            p_type: self.p_type,
            genotype: self.genotype,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_population_size(self.population)?;
        crate::genome::check_neurons(self.neurons)?;
        for (name, p) in [("pm", self.pm), ("p_type", self.p_type), ("pc", self.pc)] {
            crate::genome::check_probability(name, p)?;
        }
        if self.k_points == 0 {
            return Err(Error::InvalidParam("k_points must be at least 1".into()));
        }
        if self.network.eta.is_nan() || self.network.eta <= 0.0 {
            return Err(Error::InvalidParam("eta must be positive".into()));
        }
        self.genotype.validate()?;
        self.life.validate()
    }
}

fn check_population_size(size: usize) -> Result<()> {
    if size < 8 || !size.is_multiple_of(4) {
        return Err(Error::Population(format!(
            "population size {size} must be at least 8 and divisible by 4"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub encoding: Encoding,
    pub members: Vec<Genotype>,
    /// Last generation this population was evaluated in (0 = fresh).
    pub generation: u64,
}

impl Population {
    /// Fresh random population. Member `i` draws from its own init stream.
    pub fn random(encoding: Encoding, ga: &GaParams, run_seed: u64) -> Result<Population> {
        check_population_size(ga.population)?;
        let members = (0..ga.population)
            .map(|i| {
                let mut rng = stream(run_seed, 0, i as u64, Purpose::Init);
                Ok(match encoding {
                    Encoding::Matrix => Genotype::Matrix(MatrixGenotype::random(ga.neurons, &ga.genotype, &mut rng)?),
                    Encoding::Lsys => Genotype::Lsys(LsysGenotype::random(ga.neurons, &ga.genotype, &mut rng)?),
                    Encoding::MatrixLsg => {
                        Genotype::Matrix(LsysGenotype::random(ga.neurons, &ga.genotype, &mut rng)?.to_matrix())
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Population {
            encoding,
            members,
            generation: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn n(&self) -> usize {
        self.members.first().map_or(0, Genotype::n)
    }

    pub fn validate(&self) -> Result<()> {
        check_population_size(self.size())?;
        let n = self.n();
        for (i, m) in self.members.iter().enumerate() {
            if m.n() != n {
                return Err(Error::Population(format!(
                    "member {i} has {} neurons, expected {n}",
                    m.n()
                )));
            }
            let lsys = matches!(m, Genotype::Lsys(_));
            if lsys != (self.encoding == Encoding::Lsys) {
                return Err(Error::Population(format!(
                    "member {i} does not match encoding {}",
                    self.encoding
                )));
            }
        }
        Ok(())
    }

    /// `POPULATION <encoding> <size> <n> <generation>` then each member in
    /// its own format, members separated by `%%` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "POPULATION {} {} {} {}\n",
            self.encoding,
            self.size(),
            self.n(),
            self.generation
        );
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                out.push_str("%%\n");
            }
            out.push_str(&m.to_text(&format!("member {i}")));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Population> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "POPULATION" {
            return Err(Error::parse(
                1,
                "header must be `POPULATION <encoding> <size> <n> <generation>`",
            ));
        }
        let encoding: Encoding = fields[1].parse().map_err(|e: Error| Error::parse(1, e.to_string()))?;
        let number = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::parse(1, format!("bad {what} `{s}`")))
        };
        let size = number(fields[2], "size")? as usize;
        let n = number(fields[3], "n")? as usize;
        let generation = number(fields[4], "generation")?;

        let mut members = Vec::with_capacity(size);
        let mut chunk = String::new();
        let mut chunk_start = 2;
        let flush = |chunk: &str, start: usize, members: &mut Vec<Genotype>| -> Result<()> {
            let parsed = match encoding {
                Encoding::Lsys => LsysGenotype::parse(chunk).map(|(_, g)| Genotype::Lsys(g)),
                _ => MatrixGenotype::parse(chunk).map(Genotype::Matrix),
            };
            members.push(parsed.map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line: line + start - 1,
                    message,
                },
                other => other,
            })?);
            Ok(())
        };
        for (i, line) in body.lines().enumerate() {
            if line == "%%" {
                flush(&chunk, chunk_start, &mut members)?;
                chunk.clear();
                chunk_start = i + 3;
            } else {
                chunk.push_str(line);
                chunk.push('\n');
            }
        }
        if !chunk.trim().is_empty() {
            flush(&chunk, chunk_start, &mut members)?;
        }
        if members.len() != size {
            return Err(Error::Population(format!(
                "header says {size} members, found {}",
                members.len()
            )));
        }
        let population = Population {
            encoding,
            members,
            generation,
        };
        population.validate()?;
        if population.n() != n {
            return Err(Error::Population(format!(
                "header says n={n}, members have {}",
                population.n()
            )));
        }
        Ok(population)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: u64,
    pub max_food: u32,
    pub mean_food: f64,
    pub best_ever: u32,
    pub starved: u32,
    pub mean_clicks: f64,
}

impl GenerationStats {
    pub fn from_lives(generation: u64, lives: &[LifeResult], previous_best: u32) -> Self {
        let count = lives.len().max(1) as f64;
        let max_food = lives.iter().map(|l| l.fitness).max().unwrap_or(0);
        GenerationStats {
            generation,
            max_food,
            mean_food: lives.iter().map(|l| l.fitness as f64).sum::<f64>() / count,
            best_ever: previous_best.max(max_food),
            starved: lives.iter().filter(|l| l.death_cause == DeathCause::Starved).count() as u32,
            mean_clicks: lives.iter().map(|l| l.clicks_lived as f64).sum::<f64>() / count,
        }
    }
}

/// Lives every member once. Runs in parallel on the current rayon pool;
/// the result is identical for any pool size.
pub fn evaluate_population(
    population: &Population,
    world: &World,
    ga: &GaParams,
    run_seed: u64,
    generation: u64,
) -> Result<Vec<LifeResult>> {
    population
        .members
        .par_iter()
        .enumerate()
        .map(|(i, genotype)| {
            evaluate_member(genotype, world, ga, run_seed, generation, i).map_err(|e| Error::Member {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn evaluate_member(
    genotype: &Genotype,
    world: &World,
    ga: &GaParams,
    run_seed: u64,
    generation: u64,
    index: usize,
) -> Result<LifeResult> {
    let phenotype = genotype.to_phenotype()?;
    let mut network = Network::build(&phenotype, ga.network)?;
    let mut food = stream(run_seed, generation, index as u64, Purpose::FoodScatter);
    let mut spawn = stream(run_seed, generation, index as u64, Purpose::Spawn);
    live(world, &mut network, &ga.life, &mut food, &mut spawn)
}

/// Member indices sorted by fitness, best first; ties keep the lower index.
pub fn rank(fitness: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].cmp(&fitness[a]).then(a.cmp(&b)));
    order
}

/// Builds the next generation.
///
/// Children 0..4 are the best genotype, a mutated copy of it, the second
/// best, and a mutated copy of that. The remaining children come from
/// cycling through the fittest quarter in rank order, mating each with a
/// partner drawn uniformly from the fittest third; children at even
/// offsets in this block are mutated.
pub fn next_generation<R: Rng + ?Sized>(
    members: &[Genotype],
    fitness: &[u32],
    ga: &GaParams,
    rng: &mut R,
) -> Result<Vec<Genotype>> {
    let size = members.len();
    check_population_size(size)?;
    if fitness.len() != size {
        return Err(Error::Population(format!(
            "{} fitness values for {size} members",
            fitness.len()
        )));
    }
    let order = rank(fitness);
    let mutation = ga.mutation();
    let quarter = size / 4;
    let third = size / 3;

    let mut children = Vec::with_capacity(size);
    for &elite in &order[..2] {
        children.push(members[elite].clone());
        children.push(members[elite].mutate(&mutation, rng));
    }
    for offset in 0..size - 4 {
        let parent = &members[order[offset % quarter]];
        let partner = &members[order[rng.random_range(0..third)]];
        let child = if ga.pc >= 1.0 || rng.random_bool(ga.pc) {
            parent.crossover(partner, ga.k_points, rng)?
        } else {
            parent.clone()
        };
        children.push(if offset % 2 == 0 {
            child.mutate(&mutation, rng)
        } else {
            child
        });
    }
    Ok(children)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub stats: Vec<GenerationStats>,
    pub population: Population,
}

/// Evaluates and reproduces `population` for `generations` generations in
/// `world`. The returned population is the last one evaluated.
pub fn evolve(
    mut population: Population,
    world: &World,
    generations: u64,
    ga: &GaParams,
    run_seed: u64,
    mut on_generation: impl FnMut(&GenerationStats),
) -> Result<RunOutcome> {
    ga.validate()?;
    population.validate()?;
    let mut stats = Vec::with_capacity(generations as usize);
    let mut best = 0;
    for generation in 1..=generations {
        let lives = evaluate_population(&population, world, ga, run_seed, generation)?;
        let row = GenerationStats::from_lives(generation, &lives, best);
        best = row.best_ever;
        on_generation(&row);
        stats.push(row);
        population.generation = generation;
        if generation < generations {
            let fitness: Vec<u32> = lives.iter().map(|l| l.fitness).collect();
            let mut rng = stream(run_seed, generation, 0, Purpose::Reproduction);
            population.members = next_generation(&population.members, &fitness, ga, &mut rng)?;
        }
    }
    Ok(RunOutcome { stats, population })
}

/// Random initial population followed by `generations` of evolution.
pub fn run_evolution(
    encoding: Encoding,
    world: &World,
    generations: u64,
    ga: &GaParams,
    run_seed: u64,
) -> Result<RunOutcome> {
    ga.validate()?;
    let population = Population::random(encoding, ga, run_seed)?;
    evolve(population, world, generations, ga, run_seed, |_| {})
}

/// Continues evolving an existing population in a different world.
pub fn transfer_run(
    population: Population,
    world: &World,
    generations: u64,
    ga: &GaParams,
    seed: u64,
) -> Result<RunOutcome> {
    let mut population = population;
    population.generation = 0;
    evolve(population, world, generations, ga, seed, |_| {})
}

/// Runs `f` on a rayon pool with `jobs` workers.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::world::WorldType;

    fn small_ga() -> GaParams {
        GaParams {
            population: 8,
            neurons: 32,
            life: LifeParams {
                life_span: 400,
                starvation_limit: 64,
                infancy_span: 40,
                end_on_empty: true,
            },
            genotype: GenotypeParams {
                p_conn: 0.2,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn members(ga: &GaParams, encoding: Encoding, seed: u64) -> Vec<Genotype> {
        Population::random(encoding, ga, seed).unwrap().members
    }

    #[test]
    fn rank_breaks_ties_by_index() {
        assert_eq!(rank(&[3, 5, 5, 1, 3]), vec![1, 2, 0, 4, 3]);
    }

    #[test]
    fn elites_lead_the_next_generation() {
        let ga = GaParams { pm: 0.0, ..small_ga() };
        let pop = members(&ga, Encoding::Lsys, 1);
        let fitness = [1, 9, 3, 9, 0, 2, 2, 4];
        let next = next_generation(&pop, &fitness, &ga, &mut seeded(0)).unwrap();
        assert_eq!(next.len(), 8);
        assert_eq!(next[0], pop[1]);
        assert_eq!(next[1], pop[1]);
        assert_eq!(next[2], pop[3]);
        assert_eq!(next[3], pop[3]);
    }

    #[test]
    fn mutated_elite_differs_with_high_rate() {
        let ga = GaParams { pm: 0.5, ..small_ga() };
        let pop = members(&ga, Encoding::Matrix, 2);
        let next = next_generation(&pop, &[0; 8], &ga, &mut seeded(0)).unwrap();
        assert_eq!(next[0], pop[0]);
        assert_ne!(next[1], pop[0]);
    }

    #[test]
    fn mating_rounds_cycle_the_top_quarter() {
        // Count how many mating children each rank emits for size 64 by
        // replaying the round-robin: ranks 0..12 get 4 children, 12..16 get 3.
        let size = 64;
        let quarter = size / 4;
        let mut per_rank = vec![0; quarter];
        for offset in 0..size - 4 {
            per_rank[offset % quarter] += 1;
        }
        assert_eq!(per_rank.iter().sum::<usize>(), 60);
        assert!(per_rank[..12].iter().all(|&c| c == 4));
        assert!(per_rank[12..].iter().all(|&c| c == 3));

        let ga = GaParams {
            population: 64,
            ..small_ga()
        };
        let pop = members(&ga, Encoding::Lsys, 3);
        let next = next_generation(&pop, &(0..64).collect::<Vec<u32>>(), &ga, &mut seeded(5)).unwrap();
        assert_eq!(next.len(), 64);
    }

    #[test]
    fn bad_sizes_rejected() {
        let ga = small_ga();
        let pop = members(&ga, Encoding::Matrix, 1);
        assert!(next_generation(&pop[..6], &[0; 6], &ga, &mut seeded(0)).is_err());
        assert!(next_generation(&pop, &[0; 7], &ga, &mut seeded(0)).is_err());
        assert!(Population::random(Encoding::Lsys, &GaParams { population: 10, ..ga }, 0).is_err());
    }

    #[test]
    fn matrix_lsg_members_are_expanded_lsys() {
        let ga = small_ga();
        let lsg = Population::random(Encoding::MatrixLsg, &ga, 4).unwrap();
        let lsys = Population::random(Encoding::Lsys, &ga, 4).unwrap();
        for (a, b) in lsg.members.iter().zip(&lsys.members) {
            let (Genotype::Matrix(m), Genotype::Lsys(l)) = (a, b) else {
                panic!("wrong kinds")
            };
            assert_eq!(m, &l.to_matrix());
        }
    }

    #[test]
    fn evaluation_is_deterministic_and_order_free() {
        let ga = small_ga();
        let world = World::generate(WorldType::Open, 40, 30, 1).unwrap();
        let mut pop = Population::random(Encoding::Matrix, &ga, 7).unwrap();
        pop.members[5] = pop.members[2].clone();
        let a = with_jobs(1, || evaluate_population(&pop, &world, &ga, 7, 3).unwrap());
        let b = with_jobs(4, || evaluate_population(&pop, &world, &ga, 7, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        // a single member evaluated alone gets the same life
        let solo = evaluate_member(&pop.members[6], &world, &ga, 7, 3, 6).unwrap();
        assert_eq!(solo, a[6]);
    }

    #[test]
    fn zero_generations_returns_initial_population() {
        let ga = small_ga();
        let world = World::generate(WorldType::Open, 40, 30, 1).unwrap();
        let out = run_evolution(Encoding::Lsys, &world, 0, &ga, 9).unwrap();
        assert!(out.stats.is_empty());
        assert_eq!(out.population, Population::random(Encoding::Lsys, &ga, 9).unwrap());
    }

    #[test]
    fn short_run_is_reproducible_with_monotone_best() {
        let ga = small_ga();
        let world = World::generate(WorldType::RoundedBarrier1, 40, 30, 1).unwrap();
        let a = run_evolution(Encoding::Lsys, &world, 4, &ga, 11).unwrap();
        let b = run_evolution(Encoding::Lsys, &world, 4, &ga, 11).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.population, b.population);
        assert!(a.stats.windows(2).all(|w| w[0].best_ever <= w[1].best_ever));
        for s in &a.stats {
            assert!(s.max_food as f64 >= s.mean_food && s.mean_food >= 0.0);
        }
    }

    #[test]
    fn transfer_of_fresh_population_matches_a_run() {
        let ga = small_ga();
        let world = World::generate(WorldType::Maze, 40, 30, 1).unwrap();
        let fresh = Population::random(Encoding::Matrix, &ga, 5).unwrap();
        let t = transfer_run(fresh, &world, 3, &ga, 5).unwrap();
        let r = run_evolution(Encoding::Matrix, &world, 3, &ga, 5).unwrap();
        assert_eq!(t.stats, r.stats);
        assert_eq!(t.stats.len(), 3);
    }

    #[test]
    fn snapshot_round_trip_and_errors() {
        let ga = small_ga();
        for enc in Encoding::ALL {
            let mut pop = Population::random(enc, &ga, 12).unwrap();
            pop.generation = 17;
            let text = pop.to_text();
            assert!(text.starts_with(&format!("POPULATION {enc} 8 32 17\n")));
            assert_eq!(Population::parse(&text).unwrap(), pop);
        }
        let pop = Population::random(Encoding::Lsys, &ga, 12).unwrap();
        let text = pop.to_text().replacen("POPULATION Lsys 8", "POPULATION Lsys 12", 1);
        assert!(Population::parse(&text).is_err());
        let text = pop.to_text().replacen("POPULATION Lsys", "POPULATION Matrix", 1);
        assert!(Population::parse(&text).is_err());
    }
}
