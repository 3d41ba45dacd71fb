//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.
//!
//! Criteria 8 and 9 need hundreds of evolution runs' worth of simulation
//! and are ignored by default:
//! `cargo test --release --test acceptance -- --include-ignored`.

use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;

use neurolsys::evolution::Population;
use neurolsys::genome::lsys::{genotype_gene_count, LsysGenotype, Ruleset, LINE_LEN};
use neurolsys::genome::matrix::MatrixGenotype;
use neurolsys::genome::{Encoding, Genotype, GenotypeParams};
use neurolsys::harness::commands::{cmd_baseline, cmd_compare, cmd_run, cmd_scaling, cmd_transfer, ComparisonReport};
use neurolsys::harness::report::median;
use neurolsys::harness::report::{cv, sample_sd};
use neurolsys::harness::RunConfig;
use neurolsys::hebbnet::{
    hebb_delta, oja_delta, ConnectionClass, LearningRule, Network, NetworkConfig, Phenotype, Stage,
};
use neurolsys::rng::seeded;
use neurolsys::world::{World, WorldType};

/// Prints the verdict outside the test harness' capture, then asserts.
fn verdict(criterion: u32, title: &str, pass: bool, detail: String) {
    let line = format!(
        "{} criterion {criterion}: {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{}", line.trim_end());
}

#[test]
fn criterion_1_scaling_tables() {
    let report = cmd_scaling(&[32, 64, 128, 256, 512, 1024, 2048, 4096], None).unwrap();
    let expected = [(1, 5, 4, 2), (2, 25, 16, 4), (3, 45, 64, 8), (4, 65, 256, 16)];
    let mut problems = Vec::new();
    for (i, s, t, n) in expected {
        let row = &report.proof[i as usize - 1];
        if (row.i, row.symbols, row.terminals, row.neurons) != (i, s, t, n) {
            problems.push(format!("i={i}: got {row:?}"));
        }
    }
    if report.proof.len() != 8 {
        problems.push(format!("proof table has {} rows", report.proof.len()));
    }
    let n256 = report.rows.iter().find(|r| r.n == 256).unwrap();
    if n256.matrix_genes != 65536 {
        problems.push(format!("matrix genes at 256 = {}", n256.matrix_genes));
    }
    verdict(
        1,
        "scaling tables",
        problems.is_empty(),
        if problems.is_empty() {
            format!("proof rows i=1..4 exact, matrix genes at n=256 = {}", n256.matrix_genes)
        } else {
            problems.join("; ")
        },
    );
}

#[test]
fn criterion_2_growth_law() {
    let mut ok = true;
    let mut diffs = Vec::new();
    let mut n = 32;
    while n < 4096 {
        let d = genotype_gene_count(2 * n).unwrap() - genotype_gene_count(n).unwrap();
        diffs.push(d);
        ok &= d == 32 && (2 * n) * (2 * n) == 4 * n * n;
        n *= 2;
    }
    verdict(
        2,
        "Lsys growth law",
        ok,
        format!("lsys differences {diffs:?} for n=32..4096, matrix x4 per doubling"),
    );
}

/// Independent expansion: depth-first recursive rewriting of one symbol.
fn rewrite(rules: &Ruleset, symbol: u8, depth: usize, out: &mut Vec<u8>) {
    if depth == rules.lines.len() {
        out.push(symbol);
        return;
    }
    for k in 0..4 {
        let child = rules.lines[depth][symbol as usize * 4 + k];
        rewrite(rules, child, depth + 1, out);
    }
}

fn oracle_phenotype(g: &LsysGenotype) -> Phenotype {
    let n = g.n();
    let mut conn_terms = Vec::new();
    let mut weight_terms = Vec::new();
    for &s in &g.connectivity.axiom {
        rewrite(&g.connectivity, s, 0, &mut conn_terms);
    }
    for &s in &g.weights.axiom {
        rewrite(&g.weights, s, 0, &mut weight_terms);
    }
    let bits: Vec<bool> = conn_terms
        .iter()
        .flat_map(|&t| (0..4).rev().map(move |b| (t >> b) & 1 == 1))
        .collect();
    let weights: Vec<i8> = weight_terms
        .iter()
        .flat_map(|&t| g.weight_table[4 * t as usize..4 * t as usize + 4].to_vec())
        .collect();
    assert_eq!(bits.len(), n * n);
    assert_eq!(weights.len(), n * n);
    let mut p = Phenotype {
        n,
        connect: vec![false; n * n],
        weight: vec![0.0; n * n],
        class: vec![ConnectionClass::Hard; n * n],
    };
    for i in 0..n * n {
        if bits[i] {
            p.connect[i] = true;
            match weights[i] {
                0 => p.class[i] = ConnectionClass::Soft,
                100 => p.class[i] = ConnectionClass::AdultSoft,
                w => p.weight[i] = w as f64 / 10.0,
            }
        }
    }
    p
}

#[test]
fn criterion_3_expansion_oracle() {
    let params = GenotypeParams {
        p_conn: 0.3,
        ..GenotypeParams::default()
    };
    let mut mismatches = 0;
    let mut conversion_mismatches = 0;
    for seed in 0..200 {
        let g = LsysGenotype::random(32, &params, &mut seeded(seed)).unwrap();
        let expanded = g.expand().unwrap();
        if expanded != oracle_phenotype(&g) {
            mismatches += 1;
        }
        if g.to_matrix().decode().unwrap() != expanded {
            conversion_mismatches += 1;
        }
    }
    verdict(
        3,
        "expansion oracle equivalence",
        mismatches == 0 && conversion_mismatches == 0,
        format!("200 genotypes at n=32: {mismatches} oracle mismatches, {conversion_mismatches} conversion mismatches"),
    );
}

fn terminal_bits(terminal: u8) -> Vec<bool> {
    // every connectivity terminal becomes `terminal`; all weights hard 5
    let levels = 3;
    let mut lines = vec![[0u8; LINE_LEN]; levels];
    lines[levels - 1] = [terminal; LINE_LEN];
    let connectivity = Ruleset {
        axiom: [0; 4],
        lines: lines.clone(),
    };
    let weights = Ruleset {
        axiom: [0; 4],
        lines: vec![[0u8; LINE_LEN]; levels],
    };
    let g = LsysGenotype::new(32, connectivity, weights, [5; 64]).unwrap();
    g.expand().unwrap().connect[..4].to_vec()
}

#[test]
fn criterion_4_codec_round_trips() {
    let params = GenotypeParams::default();
    let mut failures = Vec::new();
    for seed in 0..100 {
        let mut rng = seeded(seed);
        let m = MatrixGenotype::random(32, &params, &mut rng).unwrap();
        if MatrixGenotype::parse(&m.to_text()).unwrap() != m {
            failures.push(format!("matrix {seed}"));
        }
        let l = LsysGenotype::random(32 << (seed % 4), &params, &mut rng).unwrap();
        let (name, parsed) = LsysGenotype::parse(&l.to_text(&format!("g{seed}"))).unwrap();
        if parsed != l || name != format!("g{seed}") {
            failures.push(format!("lsys {seed}"));
        }
        let lsg = LsysGenotype::random(32, &params, &mut rng).unwrap().to_matrix();
        if MatrixGenotype::parse(&lsg.to_text()).unwrap() != lsg {
            failures.push(format!("matrixlsg {seed}"));
        }
    }
    for (i, t) in WorldType::ALL.into_iter().enumerate() {
        for seed in 0..4 {
            let w = World::generate(t, 40 + 10 * i, 30 + 7 * seed as usize, seed).unwrap();
            if World::parse(&w.to_text()).unwrap().to_text() != w.to_text() {
                failures.push(format!("world {t} {seed}"));
            }
        }
    }
    let mut ga = RunConfig::default().ga;
    ga.population = 8;
    ga.neurons = 32;
    for e in Encoding::ALL {
        let pop = Population::random(e, &ga, 3).unwrap();
        if Population::parse(&pop.to_text()).unwrap() != pop {
            failures.push(format!("population {e}"));
        }
    }
    let a = terminal_bits(0);
    let c = terminal_bits(2);
    let p = terminal_bits(15);
    if a != [false; 4] || c != [false, false, true, false] || p != [true; 4] {
        failures.push(format!("terminal map a={a:?} c={c:?} p={p:?}"));
    }
    verdict(
        4,
        "codec round-trips",
        failures.is_empty(),
        if failures.is_empty() {
            "300 genotypes, 12 worlds, 3 snapshots round-trip; a=0000 c=0010 p=1111".to_string()
        } else {
            failures.join(", ")
        },
    );
}

#[test]
fn criterion_5_learning_rules() {
    let eta = 0.0035;
    let mut problems = Vec::new();
    if hebb_delta(0.3, 1.0, 1.0, eta) != eta {
        problems.push("hebb_delta(.,1,1)".to_string());
    }
    if oja_delta(1.0, 1.0, 1.0, eta) != 0.0 {
        problems.push("oja fixed point".to_string());
    }

    // one soft connection from input 0 into neuron 26, which also has a
    // hard full-weight connection from input 0 so it fires when input 0 does
    let mut ph = Phenotype::empty(32);
    ph.set(26, 0, ConnectionClass::Soft, 0.0);
    ph.set(26, 1, ConnectionClass::Hard, 1.0);
    ph.set(27, 1, ConnectionClass::Hard, -0.7);
    let config = NetworkConfig {
        eta,
        rule: LearningRule::Oja,
        theta: 0.5,
    };
    let mut net = Network::build(&ph, config).unwrap();
    let mut pre = vec![0u8; 32];
    pre[0] = 1;
    pre[1] = 1;
    let mut post = pre.clone();
    post[26] = 1;
    post[27] = 1;
    let mut worst = 0.0f64;
    for t in 1..=2000 {
        net.learn_step(&pre, &post, Stage::Infancy);
        let closed = 1.0 - (1.0 - eta).powi(t);
        worst = worst.max((net.weight(26, 0).unwrap() - closed).abs());
    }
    if worst > 1e-9 {
        problems.push(format!("oja closed form off by {worst:e}"));
    }
    if net.weight(26, 1) != Some(1.0) || net.weight(27, 1) != Some(-0.7) {
        problems.push("hard weight changed".to_string());
    }
    let before = net.weight(26, 0).unwrap();
    for _ in 0..100 {
        net.learn_step(&pre, &post, Stage::Adult);
    }
    if net.weight(26, 0) != Some(before) {
        problems.push("soft weight moved in adulthood".to_string());
    }
    verdict(
        5,
        "learning rules",
        problems.is_empty(),
        if problems.is_empty() {
            format!("hebb 0.0035, oja fixed point 0, closed form max error {worst:.1e}, hard invariant, soft frozen in adulthood")
        } else {
            problems.join("; ")
        },
    );
}

fn run_csv(config: &RunConfig) -> String {
    cmd_run(config).unwrap();
    std::fs::read_to_string(config.out.join("stats.csv")).unwrap()
}

#[test]
fn criterion_6_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig {
        generations: 5,
        run_seed: 11,
        ..RunConfig::default()
    };
    let mut csvs = Vec::new();
    for (i, jobs) in [1, 4, 1, 1].into_iter().enumerate() {
        config.jobs = jobs;
        config.out = dir.path().join(format!("run{i}"));
        csvs.push(run_csv(&config));
    }
    let same = csvs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        6,
        "determinism",
        same && csvs[0].lines().count() == 6,
        format!("default config, 5 generations: 1 vs 4 workers and 3 repeats byte-identical = {same}"),
    );
}

#[test]
fn criterion_7_evolution_beats_random() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig {
        generations: 50,
        ..RunConfig::default()
    };
    let mut passed = 0;
    let mut detail = Vec::new();
    for seed in 1..=5u64 {
        config.run_seed = seed;
        config.out = dir.path().join(format!("seed{seed}"));
        let baseline = cmd_baseline(&config, WorldType::RoundedBarrier1, 200, seed).unwrap();
        let outcome = cmd_run(&config).unwrap();
        let first = outcome.stats.first().unwrap().max_food;
        let last = outcome.stats.last().unwrap().max_food;
        let ok = last as f64 > 2.0 * baseline.mean && last > first;
        passed += usize::from(ok);
        detail.push(format!(
            "seed {seed}: g1 {first} -> g50 {last} vs 2x{:.1}{}",
            baseline.mean,
            if ok { "" } else { " (miss)" }
        ));
    }
    verdict(
        7,
        "evolution beats random",
        passed >= 4,
        format!("{passed}/5 Lsys runs [{}]", detail.join("; ")),
    );
}

/// The 100-generation comparison shared by criteria 8 and 9.
fn comparison() -> &'static (PathBuf, ComparisonReport) {
    static RUNS: OnceLock<(PathBuf, ComparisonReport)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("neurolsys-acceptance-{}", std::process::id()));
        let config = RunConfig {
            generations: 100,
            out: dir.clone(),
            ..RunConfig::default()
        };
        let report = cmd_compare(
            &config,
            &[Encoding::Lsys, Encoding::MatrixLsg, Encoding::Matrix],
            &[1, 2, 3, 4, 5],
        )
        .unwrap();
        (dir, report)
    })
}

fn final_maxes(report: &ComparisonReport, e: Encoding) -> Vec<f64> {
    report.summary(e).unwrap().final_max.clone()
}

#[test]
#[ignore = "slow: 15 runs of 100 generations"]
fn criterion_8_encoding_ordering() {
    let (_, report) = comparison();
    let lsys = final_maxes(report, Encoding::Lsys);
    let lsg = final_maxes(report, Encoding::MatrixLsg);
    let matrix = final_maxes(report, Encoding::Matrix);
    let (ml, mg, mm) = (median(&lsys), median(&lsg), median(&matrix));
    let cv_l = cv(&lsys).unwrap_or(f64::INFINITY);
    let cv_m = cv(&matrix).unwrap_or(f64::INFINITY);
    let ok = ml > mg && mg >= mm && cv_l < cv_m;
    let show = |name: &str, v: &[f64]| {
        format!(
            "{name} median {:.0} ({:.0} +- {:.0}, cv {:.3})",
            median(v),
            v.iter().sum::<f64>() / v.len() as f64,
            sample_sd(v),
            cv(v).unwrap_or(f64::NAN)
        )
    };
    verdict(
        8,
        "encoding ordering",
        ok,
        format!(
            "{}; {}; {} [reference runs: 3802+-197, 1954+-1178, 1388+-610]",
            show("Lsys", &lsys),
            show("MatrixLSG", &lsg),
            show("Matrix", &matrix)
        ),
    );
}

#[test]
#[ignore = "slow: needs the 100-generation comparison plus two transfers"]
fn criterion_9_transfer() {
    let (dir, report) = comparison();
    let best = |e: Encoding| {
        report
            .runs_of(e)
            .filter_map(|r| r.stats().map(|s| (r.seed, s.last().unwrap().max_food)))
            .max_by_key(|&(seed, food)| (food, std::cmp::Reverse(seed)))
            .unwrap()
    };
    let (lsys_seed, lsys_trained) = best(Encoding::Lsys);
    let (matrix_seed, _) = best(Encoding::Matrix);
    let config = RunConfig {
        out: dir.join("transfer"),
        ..RunConfig::default()
    };
    let pops = [
        dir.join(format!("lsys_{lsys_seed}.pop")),
        dir.join(format!("matrix_{matrix_seed}.pop")),
    ];
    let results = cmd_transfer(&config, &pops, WorldType::Maze, 100, 1).unwrap();
    let lsys_first = results[0].first().unwrap().max_food;
    let lsys_last = results[0].last().unwrap().max_food;
    let matrix_last = results[1].last().unwrap().max_food;
    let retains = lsys_first as f64 >= 0.5 * lsys_trained as f64;
    let beats = lsys_last > matrix_last;
    verdict(
        9,
        "transfer behavior",
        retains && beats,
        format!(
            "Lsys seed {lsys_seed} trained {lsys_trained}, Maze g1 {lsys_first} (retains >=50%: {retains}), \
             g100 {lsys_last} vs Matrix seed {matrix_seed} g100 {matrix_last} [reference runs: 2447 at g1, 2455 vs 422 at g100]"
        ),
    );
}

#[test]
fn genotype_enum_round_trips_through_population() {
    // guards the snapshot format used by the transfer criterion
    let mut ga = RunConfig::default().ga;
    ga.population = 8;
    ga.neurons = 64;
    let pop = Population::random(Encoding::Lsys, &ga, 4).unwrap();
    assert!(pop.members.iter().all(|m| matches!(m, Genotype::Lsys(_))));
    assert_eq!(Population::parse(&pop.to_text()).unwrap(), pop);
}
