//! Constrained two-ruleset L-system encoding.
//!
//! Each ruleset starts from a four-symbol axiom over `{A, B, C, D}`. A
//! production line holds sixteen symbols: the right-hand sides of `A`, `B`,
//! `C` and `D` for that level, four symbols each. For `n` neurons there are
//! `log2(n) - 2` production lines; the last one produces terminals `a..p`.
//! Connectivity terminals expand to their index as four bits (most
//! significant first); weight terminals expand to four entries of a
//! 64-value weight table. Expansion therefore always yields exactly `n * n`
//! gene pairs from `O(log2 n)` genes.

use rand::Rng;

use super::matrix::{GenePair, MatrixGenotype};
use super::{
    check_neurons, cut_points, is_legal_weight, mutate_weight, recombine, sample_weight, GenotypeParams, MutationParams,
};
use crate::error::{Error, Result};
use crate::hebbnet::Phenotype;

pub const AXIOM_LEN: usize = 4;
pub const LINE_LEN: usize = 16;
pub const WEIGHT_TABLE_LEN: usize = 64;
pub const NONTERMINALS: u8 = 4;
pub const TERMINALS: u8 = 16;

/// Number of production lines per ruleset for `n` neurons.
pub fn production_levels(n: usize) -> usize {
    n.trailing_zeros() as usize - 2
}

/// Total genes in an L-system genotype for `n` neurons:
/// `2 * (4 + 16 * (log2 n - 2)) + 64`.
pub fn genotype_gene_count(n: usize) -> Result<usize> {
    check_neurons(n)?;
    Ok(2 * (AXIOM_LEN + LINE_LEN * production_levels(n)) + WEIGHT_TABLE_LEN)
}

/// Size statistics of the `i`-th system in the logarithmic-growth
/// construction: rule symbols `S`, terminal expansion length `T` and
/// encodable neuron count `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofSystemStats {
    pub i: u32,
    pub symbols: u64,
    pub terminals: u64,
    pub neurons: u64,
}

pub fn ls_proof_stats(i: u32) -> Result<ProofSystemStats> {
    if !(1..=31).contains(&i) {
        return Err(Error::InvalidParam(format!("level {i} outside 1..=31")));
    }
    Ok(ProofSystemStats {
        i,
        symbols: 5 + (i as u64 - 1) * 20,
        terminals: 4u64.pow(i),
        neurons: 1u64 << i,
    })
}

/// One set of productions. Symbols are stored as alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ruleset {
    pub axiom: [u8; AXIOM_LEN],
    pub lines: Vec<[u8; LINE_LEN]>,
}

impl Ruleset {
    fn validate(&self, levels: usize) -> Result<()> {
        if self.lines.len() != levels {
            return Err(Error::CorruptGenotype(format!(
                "expected {levels} production lines, found {}",
                self.lines.len()
            )));
        }
        if self.axiom.iter().any(|&s| s >= NONTERMINALS) {
            return Err(Error::CorruptGenotype("axiom symbol outside A..D".into()));
        }
        for (i, line) in self.lines.iter().enumerate() {
            let limit = if i + 1 == levels { TERMINALS } else { NONTERMINALS };
            if line.iter().any(|&s| s >= limit) {
                return Err(Error::CorruptGenotype(format!(
                    "production line {} has an out-of-alphabet symbol",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Rewrites level by level: symbol `s` becomes `line[4s..4s+4]`.
    /// Returns the terminal string.
    pub fn expand(&self) -> Vec<u8> {
        let mut current = self.axiom.to_vec();
        for line in &self.lines {
            let mut next = Vec::with_capacity(current.len() * 4);
            for &s in &current {
                let s = s as usize * 4;
                next.extend_from_slice(&line[s..s + 4]);
            }
            current = next;
        }
        current
    }

    fn flatten_into(&self, out: &mut Vec<i8>) {
        out.extend(self.axiom.iter().map(|&s| s as i8));
        for line in &self.lines {
            out.extend(line.iter().map(|&s| s as i8));
        }
    }

    fn inflate(genes: &[i8], levels: usize) -> Ruleset {
        let mut axiom = [0; AXIOM_LEN];
        for (a, &g) in axiom.iter_mut().zip(genes) {
            *a = g as u8;
        }
        let lines = genes[AXIOM_LEN..AXIOM_LEN + levels * LINE_LEN]
            .chunks(LINE_LEN)
            .map(|c| {
                let mut line = [0; LINE_LEN];
                for (l, &g) in line.iter_mut().zip(c) {
                    *l = g as u8;
                }
                line
            })
            .collect();
        Ruleset { axiom, lines }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsysGenotype {
    n: usize,
    pub connectivity: Ruleset,
    pub weights: Ruleset,
    pub weight_table: [i8; WEIGHT_TABLE_LEN],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GeneKind {
    Nonterminal,
    Terminal,
    Weight,
}

impl LsysGenotype {
    pub fn new(
        n: usize,
        connectivity: Ruleset,
        weights: Ruleset,
        weight_table: [i8; WEIGHT_TABLE_LEN],
    ) -> Result<Self> {
        check_neurons(n)?;
        let levels = production_levels(n);
        connectivity.validate(levels)?;
        weights.validate(levels)?;
        if let Some(w) = weight_table.iter().find(|&&w| !is_legal_weight(w)) {
            return Err(Error::CorruptGenotype(format!(
                "weight table entry {w} outside [-10..10, 100]"
            )));
        }
        Ok(LsysGenotype {
            n,
            connectivity,
            weights,
            weight_table,
        })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, params: &GenotypeParams, rng: &mut R) -> Result<Self> {
        check_neurons(n)?;
        params.validate()?;
        let levels = production_levels(n);
        let nonterminal_lines = |rng: &mut R| -> Ruleset {
            let mut axiom = [0; AXIOM_LEN];
            axiom.iter_mut().for_each(|s| *s = rng.random_range(0..NONTERMINALS));
            let lines = (0..levels - 1)
                .map(|_| {
                    let mut line = [0; LINE_LEN];
                    line.iter_mut().for_each(|s| *s = rng.random_range(0..NONTERMINALS));
                    line
                })
                .collect();
            Ruleset { axiom, lines }
        };

        let mut connectivity = nonterminal_lines(rng);
        let mut terminal = [0u8; LINE_LEN];
        for t in terminal.iter_mut() {
            for _ in 0..4 {
                *t = (*t << 1) | u8::from(rng.random_bool(params.p_conn));
            }
        }
        connectivity.lines.push(terminal);

        let mut weights = nonterminal_lines(rng);
        let mut terminal = [0u8; LINE_LEN];
        terminal.iter_mut().for_each(|t| *t = rng.random_range(0..TERMINALS));
        weights.lines.push(terminal);

        let mut weight_table = [0i8; WEIGHT_TABLE_LEN];
        weight_table.iter_mut().for_each(|w| *w = sample_weight(params, rng));

        Ok(LsysGenotype {
            n,
            connectivity,
            weights,
            weight_table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        production_levels(self.n)
    }

    pub fn gene_count(&self) -> usize {
        2 * (AXIOM_LEN + LINE_LEN * self.levels()) + WEIGHT_TABLE_LEN
    }

    /// The positionally paired `(C, W)` stream, row-major, `n * n` long.
    pub fn expand_pairs(&self) -> Vec<GenePair> {
        let conn = self.connectivity.expand();
        let weights = self.weights.expand();
        debug_assert_eq!(conn.len() * 4, self.n * self.n);
        let mut pairs = Vec::with_capacity(self.n * self.n);
        for (&c, &w) in conn.iter().zip(&weights) {
            let table = &self.weight_table[w as usize * 4..w as usize * 4 + 4];
            for (bit, &weight) in (0..4).rev().zip(table) {
                pairs.push(GenePair::new((c >> bit) & 1 == 1, weight));
            }
        }
        pairs
    }

    pub fn to_matrix(&self) -> MatrixGenotype {
        MatrixGenotype::from_pairs(self.n, self.expand_pairs()).expect("expansion yields a valid matrix genotype")
    }

    pub fn expand(&self) -> Result<Phenotype> {
        self.to_matrix().decode()
    }

    /// Genes in crossover order: connectivity axiom and lines, weight
    /// axiom and lines, weight table.
    pub fn flatten(&self) -> Vec<i8> {
        let mut genes = Vec::with_capacity(self.gene_count());
        self.connectivity.flatten_into(&mut genes);
        self.weights.flatten_into(&mut genes);
        genes.extend_from_slice(&self.weight_table);
        genes
    }

    fn inflate(n: usize, genes: &[i8]) -> Self {
        let levels = production_levels(n);
        let block = AXIOM_LEN + levels * LINE_LEN;
        let mut weight_table = [0; WEIGHT_TABLE_LEN];
        weight_table.copy_from_slice(&genes[2 * block..]);
        LsysGenotype {
            n,
            connectivity: Ruleset::inflate(&genes[..block], levels),
            weights: Ruleset::inflate(&genes[block..2 * block], levels),
            weight_table,
        }
    }

    fn gene_kind(&self, pos: usize) -> GeneKind {
        let block = AXIOM_LEN + self.levels() * LINE_LEN;
        if pos >= 2 * block {
            return GeneKind::Weight;
        }
        let within = pos % block;
        if within >= block - LINE_LEN {
            GeneKind::Terminal
        } else {
            GeneKind::Nonterminal
        }
    }

    /// Every gene mutates with probability `rate`. Symbols move to a
    /// different symbol of the same alphabet; weight-table entries follow
    /// the shared weight-gene scheme.
    pub fn mutate<R: Rng + ?Sized>(&self, mutation: &MutationParams, rng: &mut R) -> Self {
        if mutation.rate <= 0.0 {
            return self.clone();
        }
        let mut genes = self.flatten();
        for (pos, gene) in genes.iter_mut().enumerate() {
            if !rng.random_bool(mutation.rate) {
                continue;
            }
            *gene = match self.gene_kind(pos) {
                GeneKind::Nonterminal => other_symbol(*gene, NONTERMINALS, rng),
                GeneKind::Terminal => other_symbol(*gene, TERMINALS, rng),
                GeneKind::Weight => mutate_weight(*gene, mutation, rng),
            };
        }
        Self::inflate(self.n, &genes)
    }

    pub fn crossover<R: Rng + ?Sized>(&self, other: &Self, k_points: usize, rng: &mut R) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        if k_points == 0 {
            return Err(Error::InvalidParam("k_points must be at least 1".into()));
        }
        let a = self.flatten();
        let b = other.flatten();
        let cuts = cut_points(a.len(), k_points, rng);
        Ok(Self::inflate(self.n, &recombine(&a, &b, &cuts)))
    }

    pub fn to_text(&self, name: &str) -> String {
        let mut out = format!("[{name}]\n");
        write_ruleset(&mut out, &self.connectivity);
        out.push('\n');
        write_ruleset(&mut out, &self.weights);
        for row in self.weight_table.chunks(32) {
            let row: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the listing format, returning the genotype name and genotype.
    pub fn parse(text: &str) -> Result<(String, Self)> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines
            .first()
            .ok_or_else(|| Error::parse(1, "empty L-system genotype"))?
            .trim();
        let name = header
            .strip_prefix('[')
            .and_then(|h| h.strip_suffix(']'))
            .ok_or_else(|| Error::parse(1, "header must be `[name]`"))?
            .to_string();

        let blank = lines
            .iter()
            .skip(1)
            .position(|l| l.trim().is_empty())
            .map(|p| p + 1)
            .ok_or_else(|| Error::parse(lines.len() + 1, "missing blank line between rulesets"))?;
        let levels = blank
            .checked_sub(2)
            .filter(|&l| l >= 3)
            .ok_or_else(|| Error::parse(blank + 1, "connectivity ruleset needs an axiom and at least 3 lines"))?;
        let n = 1usize
            .checked_shl((levels + 2) as u32)
            .ok_or_else(|| Error::parse(blank + 1, "too many production lines"))?;

        let connectivity = parse_ruleset(&lines[1..blank], 1, levels)?;
        let weight_start = blank + 1;
        if lines.len() < weight_start + levels + 1 {
            return Err(Error::parse(lines.len() + 1, "weight ruleset is truncated"));
        }
        let weights = parse_ruleset(&lines[weight_start..weight_start + levels + 1], weight_start, levels)?;

        let mut table = Vec::with_capacity(WEIGHT_TABLE_LEN);
        let table_start = weight_start + levels + 1;
        for (i, line) in lines[table_start..].iter().enumerate() {
            let line_no = table_start + i + 1;
            for tok in line.split_whitespace() {
                let w: i8 = tok
                    .parse()
                    .ok()
                    .filter(|&w| is_legal_weight(w))
                    .ok_or_else(|| Error::parse(line_no, format!("bad weight `{tok}`")))?;
                table.push(w);
            }
        }
        if table.len() != WEIGHT_TABLE_LEN {
            return Err(Error::parse(
                lines.len(),
                format!("weight table has {} entries, expected {WEIGHT_TABLE_LEN}", table.len()),
            ));
        }
        let mut weight_table = [0; WEIGHT_TABLE_LEN];
        weight_table.copy_from_slice(&table);
        Ok((
            name,
            LsysGenotype {
                n,
                connectivity,
                weights,
                weight_table,
            },
        ))
    }
}

fn other_symbol<R: Rng + ?Sized>(current: i8, alphabet: u8, rng: &mut R) -> i8 {
    let shift = rng.random_range(1..alphabet) as i8;
    (current + shift) % alphabet as i8
}

pub fn nonterminal_char(s: u8) -> char {
    (b'A' + s) as char
}

pub fn terminal_char(s: u8) -> char {
    (b'a' + s) as char
}

fn write_ruleset(out: &mut String, rules: &Ruleset) {
    out.extend(rules.axiom.iter().map(|&s| nonterminal_char(s)));
    out.push('\n');
    let last = rules.lines.len() - 1;
    for (i, line) in rules.lines.iter().enumerate() {
        if i == last {
            out.extend(line.iter().map(|&s| terminal_char(s)));
        } else {
            out.extend(line.iter().map(|&s| nonterminal_char(s)));
        }
        out.push('\n');
    }
}

/// Parses an axiom line of four `A..D` symbols.
pub fn parse_axiom(line: &str) -> std::result::Result<[u8; AXIOM_LEN], String> {
    let mut axiom = [0; AXIOM_LEN];
    let syms = parse_symbols(line, b'A', NONTERMINALS)?;
    if syms.len() != AXIOM_LEN {
        return Err(format!("axiom has {} symbols, expected {AXIOM_LEN}", syms.len()));
    }
    axiom.copy_from_slice(&syms);
    Ok(axiom)
}

fn parse_symbols(line: &str, base: u8, alphabet: u8) -> std::result::Result<Vec<u8>, String> {
    line.trim_end()
        .bytes()
        .map(|b| {
            b.checked_sub(base).filter(|&s| s < alphabet).ok_or_else(|| {
                format!(
                    "symbol `{}` outside {}..{}",
                    b as char,
                    base as char,
                    (base + alphabet - 1) as char
                )
            })
        })
        .collect()
}

fn parse_ruleset(lines: &[&str], first_index: usize, levels: usize) -> Result<Ruleset> {
    let axiom = parse_axiom(lines[0]).map_err(|m| Error::parse(first_index + 1, m))?;
    let mut rules = Vec::with_capacity(levels);
    for (i, line) in lines[1..=levels].iter().enumerate() {
        let line_no = first_index + i + 2;
        let (base, alphabet) = if i + 1 == levels {
            (b'a', TERMINALS)
        } else {
            (b'A', NONTERMINALS)
        };
        let syms = parse_symbols(line, base, alphabet).map_err(|m| Error::parse(line_no, m))?;
        if syms.len() != LINE_LEN {
            return Err(Error::parse(
                line_no,
                format!("production line has {} symbols, expected {LINE_LEN}", syms.len()),
            ));
        }
        let mut l = [0; LINE_LEN];
        l.copy_from_slice(&syms);
        rules.push(l);
    }
    Ok(Ruleset { axiom, lines: rules })
}
