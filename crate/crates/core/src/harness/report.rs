//! CSV emission and summary statistics.

use std::fmt::Write as _;

use crate::evolution::GenerationStats;

pub const STATS_HEADER: &str = "generation,max_food,mean_food,best_ever,starved,mean_clicks";

pub fn stats_row(s: &GenerationStats) -> String {
    format!(
        "{},{},{:.3},{},{},{:.3}",
        s.generation, s.max_food, s.mean_food, s.best_ever, s.starved, s.mean_clicks
    )
}

pub fn stats_csv(stats: &[GenerationStats]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&stats_row(s));
        out.push('\n');
    }
    out
}

/// Parses a stats CSV back into rows.
pub fn parse_stats_csv(text: &str) -> Option<Vec<GenerationStats>> {
    let mut lines = text.lines();
    if lines.next()? != STATS_HEADER {
        return None;
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return None;
            }
            Some(GenerationStats {
                generation: f[0].parse().ok()?,
                max_food: f[1].parse().ok()?,
                mean_food: f[2].parse().ok()?,
                best_ever: f[3].parse().ok()?,
                starved: f[4].parse().ok()?,
                mean_clicks: f[5].parse().ok()?,
            })
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Coefficient of variation; undefined when the mean is not positive.
pub fn cv(xs: &[f64]) -> Option<f64> {
    let m = mean(xs);
    (m > 0.0).then(|| sample_sd(xs) / m)
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// First generation whose max food strictly exceeds `threshold`.
pub fn first_crossing(stats: &[GenerationStats], threshold: u32) -> Option<u64> {
    stats.iter().find(|s| s.max_food > threshold).map(|s| s.generation)
}

/// Summary of one encoding across seeds, taken at the final generation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSummary {
    pub label: String,
    pub runs: usize,
    pub failed: usize,
    pub final_max: Vec<f64>,
    pub final_mean: Vec<f64>,
    pub crossings: Vec<Option<u64>>,
}

impl ConditionSummary {
    pub fn new(label: impl Into<String>, runs: &[Option<&[GenerationStats]>], threshold: u32) -> Self {
        let ok: Vec<&[GenerationStats]> = runs.iter().flatten().copied().collect();
        ConditionSummary {
            label: label.into(),
            runs: runs.len(),
            failed: runs.len() - ok.len(),
            final_max: ok.iter().map(|s| s.last().map_or(0.0, |r| r.max_food as f64)).collect(),
            final_mean: ok.iter().map(|s| s.last().map_or(0.0, |r| r.mean_food)).collect(),
            crossings: ok.iter().map(|s| first_crossing(s, threshold)).collect(),
        }
    }
}

pub const SUMMARY_HEADER: &str =
    "encoding,runs,failed,max_food_mean,max_food_sd,max_food_cv,mean_food_mean,mean_food_sd,mean_food_cv,first_crossings";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

pub fn summary_csv(rows: &[ConditionSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let crossings: Vec<String> = r
            .crossings
            .iter()
            .map(|c| c.map_or_else(|| "none".to_string(), |g| g.to_string()))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{:.3},{},{:.3},{:.3},{},{}",
            r.label,
            r.runs,
            r.failed,
            mean(&r.final_max),
            sample_sd(&r.final_max),
            opt(cv(&r.final_max)),
            mean(&r.final_mean),
            sample_sd(&r.final_mean),
            opt(cv(&r.final_mean)),
            crossings.join(";")
        );
    }
    out
}
