//! Direct matrix encoding: one `(C, W)` gene pair per ordered neuron pair.

use rand::Rng;

use super::{
    check_neurons, cut_points, decode_pair, is_legal_weight, mutate_weight, recombine, sample_weight, GenotypeParams,
    MutationParams,
};
use crate::error::{Error, Result};
use crate::hebbnet::Phenotype;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenePair {
    pub connected: bool,
    pub weight: i8,
}

impl GenePair {
    pub fn new(connected: bool, weight: i8) -> Self {
        GenePair { connected, weight }
    }
}

/// `n * n` gene pairs, row-major over (postsynaptic, presynaptic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGenotype {
    n: usize,
    pairs: Vec<GenePair>,
}

impl MatrixGenotype {
    pub fn from_pairs(n: usize, pairs: Vec<GenePair>) -> Result<Self> {
        check_neurons(n)?;
        if pairs.len() != n * n {
            return Err(Error::CorruptGenotype(format!(
                "expected {} gene pairs, found {}",
                n * n,
                pairs.len()
            )));
        }
        if let Some(p) = pairs.iter().find(|p| !is_legal_weight(p.weight)) {
            return Err(Error::CorruptGenotype(format!(
                "weight gene {} outside [-10..10, 100]",
                p.weight
            )));
        }
        Ok(MatrixGenotype { n, pairs })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, params: &GenotypeParams, rng: &mut R) -> Result<Self> {
        check_neurons(n)?;
        params.validate()?;
        let pairs = (0..n * n)
            .map(|_| {
                let connected = rng.random_bool(params.p_conn);
                GenePair::new(connected, sample_weight(params, rng))
            })
            .collect();
        Ok(MatrixGenotype { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[GenePair] {
        &self.pairs
    }

    pub fn connection_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.connected).count()
    }

    pub fn decode(&self) -> Result<Phenotype> {
        let mut phenotype = Phenotype::empty(self.n);
        for (i, pair) in self.pairs.iter().enumerate() {
            if let Some((class, weight)) = decode_pair(pair.connected, pair.weight)? {
                phenotype.set(i / self.n, i % self.n, class, weight);
            }
        }
        Ok(phenotype)
    }

    /// Each pair mutates with probability `rate`. A mutating pair either
    /// flips its connection bit (probability `p_type`) or perturbs its
    /// weight within the hard category. When a connection is removed the
    /// now silent weight gene is redrawn from the generation scheme, so a
    /// later reconnection can land in any class.
    pub fn mutate<R: Rng + ?Sized>(&self, mutation: &MutationParams, rng: &mut R) -> Self {
        let mut pairs = self.pairs.clone();
        if mutation.rate <= 0.0 {
            return MatrixGenotype { n: self.n, pairs };
        }
        for pair in pairs.iter_mut() {
            if !rng.random_bool(mutation.rate) {
                continue;
            }
            if rng.random_bool(mutation.p_type) {
                if pair.connected {
                    pair.weight = sample_weight(&mutation.genotype, rng);
                }
                pair.connected = !pair.connected;
            } else {
                let within = MutationParams {
                    p_type: 0.0,
                    ..*mutation
                };
                pair.weight = mutate_weight(pair.weight, &within, rng);
            }
        }
        MatrixGenotype { n: self.n, pairs }
    }

    pub fn crossover<R: Rng + ?Sized>(&self, other: &Self, k_points: usize, rng: &mut R) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        if k_points == 0 {
            return Err(Error::InvalidParam("k_points must be at least 1".into()));
        }
        let cuts = cut_points(self.pairs.len(), k_points, rng);
        Ok(MatrixGenotype {
            n: self.n,
            pairs: recombine(&self.pairs, &other.pairs, &cuts),
        })
    }

    /// `MATRIX n` followed by `n` rows of `n` space-separated `C:W` tokens.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.pairs.len() * 5 + 16);
        out.push_str(&format!("MATRIX {}\n", self.n));
        for row in self.pairs.chunks(self.n) {
            for (i, p) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push(if p.connected { '1' } else { '0' });
                out.push(':');
                out.push_str(&p.weight.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix genotype"))?;
        let n: usize = header
            .strip_prefix("MATRIX ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(1, "header must be `MATRIX n`"))?;
        check_neurons(n).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut pairs = Vec::with_capacity(n * n);
        for row in 0..n {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| Error::parse(row + 2, format!("expected {n} rows, found {row}")))?;
            let mut count = 0;
            for (col, tok) in line.split_whitespace().enumerate() {
                pairs.push(parse_pair(tok).map_err(|m| Error::parse(line_no, format!("column {}: {m}", col + 1)))?);
                count += 1;
            }
            if count != n {
                return Err(Error::parse(line_no, format!("row has {count} pairs, expected {n}")));
            }
        }
        if let Some((line_no, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(line_no, format!("unexpected content `{l}`")));
        }
        Ok(MatrixGenotype { n, pairs })
    }
}

fn parse_pair(tok: &str) -> std::result::Result<GenePair, String> {
    let (c, w) = tok.split_once(':').ok_or_else(|| format!("bad pair `{tok}`"))?;
    let connected = match c {
        "0" => false,
        "1" => true,
        _ => return Err(format!("connection bit must be 0 or 1 in `{tok}`")),
    };
    let weight: i8 = w.parse().map_err(|_| format!("bad weight in `{tok}`"))?;
    if !is_legal_weight(weight) {
        return Err(format!("weight {weight} outside [-10..10, 100]"));
    }
    Ok(GenePair { connected, weight })
}
