//! `key = value` run configuration files.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::GaParams;
use crate::genome::Encoding;
use crate::world::{World, WorldType, DEFAULT_HEIGHT, DEFAULT_WIDTH};

pub const DEFAULT_THRESHOLD: u32 = 2000;

/// Every knob of a run. Keys in config files use the field names.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub encoding: Encoding,
    pub world_type: WorldType,
    /// Load terrain from a world file instead of generating it.
    pub world_file: Option<PathBuf>,
    pub width: usize,
    pub height: usize,
    pub layout_seed: u64,
    pub generations: u64,
    pub run_seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub threshold: u32,
    pub ga: GaParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            encoding: Encoding::Lsys,
            world_type: WorldType::RoundedBarrier1,
            world_file: None,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            layout_seed: 1,
            generations: 100,
            run_seed: 1,
            out: PathBuf::from("out"),
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threshold: DEFAULT_THRESHOLD,
            ga: GaParams::default(),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{raw}`")))
}

fn probability(key: &str, raw: &str) -> Result<f64> {
    let p: f64 = value(key, raw)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("`{key}`: {p} is not a probability in [0, 1]")));
    }
    Ok(p)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let ga = &mut self.ga;
        match key {
            "encoding" => self.encoding = value(key, raw)?,
            "world_type" => self.world_type = value(key, raw)?,
            "world_file" => self.world_file = Some(PathBuf::from(raw)),
            "width" => self.width = value(key, raw)?,
            "height" => self.height = value(key, raw)?,
            "layout_seed" => self.layout_seed = value(key, raw)?,
            "generations" => self.generations = value(key, raw)?,
            "run_seed" | "seed" => self.run_seed = value(key, raw)?,
            "out" => self.out = PathBuf::from(raw),
            "jobs" => self.jobs = value(key, raw)?,
            "threshold" => self.threshold = value(key, raw)?,
            "population" => ga.population = value(key, raw)?,
            "neurons" => ga.neurons = value(key, raw)?,
            "pm" => ga.pm = probability(key, raw)?,
            "p_type" => ga.p_type = probability(key, raw)?,
            "k_points" => ga.k_points = value(key, raw)?,
            "pc" => ga.pc = probability(key, raw)?,
            "p_conn" => ga.genotype.p_conn = probability(key, raw)?,
            "p_hard" => ga.genotype.p_hard = probability(key, raw)?,
            "p_adult" => ga.genotype.p_adult = probability(key, raw)?,
            "life_span" => ga.life.life_span = value(key, raw)?,
            "starvation_limit" => ga.life.starvation_limit = value(key, raw)?,
            "infancy_span" => ga.life.infancy_span = value(key, raw)?,
            "end_on_empty" => ga.life.end_on_empty = value(key, raw)?,
            "eta" => ga.network.eta = value(key, raw)?,
            "rule" => ga.network.rule = value(key, raw)?,
            "theta" => ga.network.theta = value(key, raw)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults. Blank lines and text
    /// after `#` are ignored.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            config.set(key.trim(), raw.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.jobs == 0 {
            return Err(Error::Config("`jobs` must be at least 1".into()));
        }
        Ok(())
    }

    pub fn world(&self) -> Result<World> {
        match &self.world_file {
            Some(path) => World::parse(&std::fs::read_to_string(path)?),
            None => World::generate(self.world_type, self.width, self.height, self.layout_seed),
        }
    }

    pub fn world_of_type(&self, world_type: WorldType) -> Result<World> {
        World::generate(world_type, self.width, self.height, self.layout_seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn values_parse() {
        let c = RunConfig::parse(
            "pm = 0.02\nencoding = matrix # inline\nworld_type = Maze\nrule = hebb\nend_on_empty = false",
        )
        .unwrap();
        assert_eq!(c.ga.pm, 0.02);
        assert_eq!(c.encoding, Encoding::Matrix);
        assert_eq!(c.world_type, WorldType::Maze);
        assert_eq!(c.ga.network.rule, crate::hebbnet::LearningRule::Hebb);
        assert!(!c.ga.life.end_on_empty);
    }

    #[test]
    fn bad_values_name_the_key() {
        let err = RunConfig::parse("pm = 2%").unwrap_err();
        assert!(err.to_string().contains("`pm`"), "{err}");
        let err = RunConfig::parse("generations = many").unwrap_err();
        assert!(err.to_string().contains("generations"), "{err}");
        assert!(RunConfig::parse("pm = 1.5").is_err());
        assert!(RunConfig::parse("mutation = 0.1").is_err());
        assert!(RunConfig::parse("pm 0.1").is_err());
        assert!(RunConfig::parse("population = 30").is_err());
    }
}
