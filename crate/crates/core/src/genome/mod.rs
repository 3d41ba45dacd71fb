//! Genotype encodings and the pieces they share: the weight-gene alphabet,
//! its sampling and mutation scheme, and k-point recombination.

pub mod lsys;
pub mod matrix;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hebbnet::{ConnectionClass, Phenotype};

pub use lsys::LsysGenotype;
pub use matrix::MatrixGenotype;

/// Weight gene value marking an adult-learning soft connection.
pub const ADULT_SOFT: i8 = 100;
/// Weight gene value marking an infancy-learning soft connection.
pub const SOFT: i8 = 0;

pub fn is_legal_weight(w: i8) -> bool {
    (-10..=10).contains(&w) || w == ADULT_SOFT
}

pub fn is_hard_weight(w: i8) -> bool {
    w != SOFT && w != ADULT_SOFT
}

/// Interprets one `(C, W)` gene pair.
pub fn decode_pair(connected: bool, w: i8) -> Result<Option<(ConnectionClass, f64)>> {
    if !is_legal_weight(w) {
        return Err(Error::CorruptGenotype(format!(
            "weight gene {w} outside [-10..10, 100]"
        )));
    }
    if !connected {
        return Ok(None);
    }
    Ok(Some(match w {
        SOFT => (ConnectionClass::Soft, 0.0),
        ADULT_SOFT => (ConnectionClass::AdultSoft, 0.0),
        w => (ConnectionClass::Hard, w as f64 / 10.0),
    }))
}

pub(crate) fn is_power_of_two_network(n: usize) -> bool {
    n >= crate::hebbnet::MIN_NEURONS && n.is_power_of_two()
}

pub(crate) fn check_neurons(n: usize) -> Result<()> {
    if is_power_of_two_network(n) {
        Ok(())
    } else {
        Err(Error::InvalidNeuronCount(n))
    }
}

/// Knobs for random genotype generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenotypeParams {
    pub p_conn: f64,
    pub p_hard: f64,
    pub p_adult: f64,
}

impl Default for GenotypeParams {
    /// Initial networks are fully hard-wired; learning connections enter
    /// through type mutations.
    fn default() -> Self {
        GenotypeParams {
            p_conn: 0.05,
            p_hard: 1.0,
            p_adult: 0.1,
        }
    }
}

impl GenotypeParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_conn", self.p_conn),
            ("p_hard", self.p_hard),
            ("p_adult", self.p_adult),
        ] {
            check_probability(name, p)?;
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationParams {
    /// Per-gene mutation probability.
    pub rate: f64,
    /// Probability that a mutation changes the connection type rather than
    /// the weight.
    pub p_type: f64,
    pub genotype: GenotypeParams,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            rate: 0.01,
            p_type: 0.3,
            genotype: GenotypeParams::default(),
        }
    }
}

fn random_hard<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    let v = rng.random_range(0..20i8);
    if v < 10 {
        v - 10
    } else {
        v - 9
    }
}

fn random_soft<R: Rng + ?Sized>(p_adult: f64, rng: &mut R) -> i8 {
    if rng.random_bool(p_adult) {
        ADULT_SOFT
    } else {
        SOFT
    }
}

/// Draws a weight gene: hard (uniform nonzero in -10..=10) with
/// probability `p_hard`, otherwise adult-soft with probability `p_adult`,
/// otherwise soft.
pub fn sample_weight<R: Rng + ?Sized>(params: &GenotypeParams, rng: &mut R) -> i8 {
    if rng.random_bool(params.p_hard) {
        random_hard(rng)
    } else {
        random_soft(params.p_adult, rng)
    }
}

/// Swaps the gene between the hard and soft categories.
pub fn flip_weight_category<R: Rng + ?Sized>(w: i8, params: &GenotypeParams, rng: &mut R) -> i8 {
    if is_hard_weight(w) {
        random_soft(params.p_adult, rng)
    } else {
        random_hard(rng)
    }
}

/// Mutates a weight gene that is known to mutate. With probability
/// `p_type` the category flips; otherwise a hard weight moves to a
/// different nonzero value and a soft gene stays as it is.
pub fn mutate_weight<R: Rng + ?Sized>(w: i8, mutation: &MutationParams, rng: &mut R) -> i8 {
    if rng.random_bool(mutation.p_type) {
        flip_weight_category(w, &mutation.genotype, rng)
    } else if is_hard_weight(w) {
        loop {
            let v = random_hard(rng);
            if v != w {
                break v;
            }
        }
    } else {
        w
    }
}

/// `k` distinct cut points in `1..len`, ascending. `k` is capped at `len - 1`.
pub fn cut_points<R: Rng + ?Sized>(len: usize, k: usize, rng: &mut R) -> Vec<usize> {
    if len < 2 {
        return Vec::new();
    }
    let k = k.min(len - 1);
    let mut cuts: Vec<usize> = index::sample(rng, len - 1, k).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    cuts
}

/// Alternating-segment recombination starting with `a`.
pub fn recombine<T: Clone>(a: &[T], b: &[T], cuts: &[usize]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut child = Vec::with_capacity(a.len());
    let mut start = 0;
    let mut from_a = true;
    for &cut in cuts.iter().chain(std::iter::once(&a.len())) {
        let src = if from_a { a } else { b };
        child.extend_from_slice(&src[start..cut]);
        start = cut;
        from_a = !from_a;
    }
    child
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    Matrix,
    Lsys,
    /// Matrix genotypes seeded from expanded random L-system genotypes.
    MatrixLsg,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::Lsys, Encoding::MatrixLsg, Encoding::Matrix];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Matrix => "Matrix",
            Encoding::Lsys => "Lsys",
            Encoding::MatrixLsg => "MatrixLSG",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matrix" => Ok(Encoding::Matrix),
            "lsys" => Ok(Encoding::Lsys),
            "matrixlsg" => Ok(Encoding::MatrixLsg),
            _ => Err(Error::InvalidParam(format!("unknown encoding `{s}`"))),
        }
    }
}

/// A genotype of either alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Genotype {
    Matrix(MatrixGenotype),
    Lsys(LsysGenotype),
}

impl Genotype {
    pub fn n(&self) -> usize {
        match self {
            Genotype::Matrix(g) => g.n(),
            Genotype::Lsys(g) => g.n(),
        }
    }

    pub fn gene_count(&self) -> usize {
        match self {
            Genotype::Matrix(g) => g.pairs().len(),
            Genotype::Lsys(g) => g.gene_count(),
        }
    }

    pub fn to_phenotype(&self) -> Result<Phenotype> {
        match self {
            Genotype::Matrix(g) => g.decode(),
            Genotype::Lsys(g) => g.expand(),
        }
    }

    pub fn mutate<R: Rng + ?Sized>(&self, mutation: &MutationParams, rng: &mut R) -> Genotype {
        match self {
            Genotype::Matrix(g) => Genotype::Matrix(g.mutate(mutation, rng)),
            Genotype::Lsys(g) => Genotype::Lsys(g.mutate(mutation, rng)),
        }
    }

    pub fn crossover<R: Rng + ?Sized>(&self, other: &Genotype, k_points: usize, rng: &mut R) -> Result<Genotype> {
        match (self, other) {
            (Genotype::Matrix(a), Genotype::Matrix(b)) => Ok(Genotype::Matrix(a.crossover(b, k_points, rng)?)),
            (Genotype::Lsys(a), Genotype::Lsys(b)) => Ok(Genotype::Lsys(a.crossover(b, k_points, rng)?)),
            _ => Err(Error::Population(
                "cannot cross genotypes of different alphabets".into(),
            )),
        }
    }

    pub fn to_text(&self, name: &str) -> String {
        match self {
            Genotype::Matrix(g) => g.to_text(),
            Genotype::Lsys(g) => g.to_text(name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn decode_pair_examples() {
        assert_eq!(decode_pair(true, 5).unwrap(), Some((ConnectionClass::Hard, 0.5)));
        assert_eq!(decode_pair(true, -10).unwrap(), Some((ConnectionClass::Hard, -1.0)));
        assert_eq!(decode_pair(true, 0).unwrap(), Some((ConnectionClass::Soft, 0.0)));
        assert_eq!(decode_pair(true, 100).unwrap(), Some((ConnectionClass::AdultSoft, 0.0)));
        assert_eq!(decode_pair(false, 7).unwrap(), None);
        assert!(decode_pair(true, 11).is_err());
        assert!(decode_pair(false, 50).is_err());
    }

    #[test]
    fn hard_samples_are_nonzero_in_range() {
        let mut rng = seeded(1);
        let mut seen = [false; 21];
        for _ in 0..5000 {
            let w = random_hard(&mut rng);
            assert!(w != 0 && (-10..=10).contains(&w));
            seen[(w + 10) as usize] = true;
        }
        assert_eq!(seen.iter().filter(|&&s| s).count(), 20);
    }

    #[test]
    fn recombine_single_cut() {
        let a = [1, 1, 1, 1, 1];
        let b = [2, 2, 2, 2, 2];
        assert_eq!(recombine(&a, &b, &[2]), vec![1, 1, 2, 2, 2]);
        assert_eq!(recombine(&a, &b, &[1, 3]), vec![1, 2, 2, 1, 1]);
        assert_eq!(recombine(&a, &b, &[]), a.to_vec());
    }

    #[test]
    fn cut_points_distinct_and_in_range() {
        let mut rng = seeded(9);
        for k in 1..6 {
            let cuts = cut_points(10, k, &mut rng);
            assert_eq!(cuts.len(), k);
            assert!(cuts.windows(2).all(|w| w[0] < w[1]));
            assert!(cuts.iter().all(|&c| (1..10).contains(&c)));
        }
        assert_eq!(cut_points(3, 10, &mut rng), vec![1, 2]);
    }

    #[test]
    fn weight_mutation_stays_legal() {
        let mut rng = seeded(4);
        let m = MutationParams {
            rate: 1.0,
            p_type: 0.5,
            ..Default::default()
        };
        let mut w = 0;
        for _ in 0..1000 {
            w = mutate_weight(w, &m, &mut rng);
            assert!(is_legal_weight(w));
        }
    }
}
