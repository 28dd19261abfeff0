//! Post-hoc analytics over finished runs: action distributions, stage entropy,
//! Pearson correlation and the per-condition report tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::curriculum::ScheduleName;
use crate::error::{Error, Result};
use crate::trainer::{csv_error, ActionRow, EvalRow, Method, RunConfig, STAGES};

#[derive(Debug, Clone, PartialEq)]
pub struct StageActionDistribution {
    pub stage: usize,
    pub probabilities: Vec<f64>,
    pub total: u64,
}

impl StageActionDistribution {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

/// Normalises per-action counts. An all-zero vector yields an empty distribution.
pub fn action_distribution(stage: usize, counts: &[i64]) -> Result<StageActionDistribution> {
    if let Some(c) = counts.iter().find(|c| **c < 0) {
        return Err(Error::InvalidArgument(format!("negative action count {c}")));
    }
    let total: u64 = counts.iter().map(|c| *c as u64).sum();
    let probabilities = if total == 0 {
        vec![0.0; counts.len()]
    } else {
        counts.iter().map(|c| *c as f64 / total as f64).collect()
    };
    Ok(StageActionDistribution {
        stage,
        probabilities,
        total,
    })
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(dist: &StageActionDistribution) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::UndefinedEntropy);
    }
    let h: f64 = dist
        .probabilities
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    // -0.0 from a single certain action
    Ok(h.max(0.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("n = {} < 2", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub stage: usize,
    pub r: Option<f64>,
    pub n: usize,
}

/// Everything read back from one run directory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run_id: String,
    pub method: Method,
    pub schedule: ScheduleName,
    pub seed: u64,
    /// Success rate and average turns per stage, `None` where absent.
    pub evals: [Option<(f64, f64)>; STAGES],
    pub stage_counts: [Vec<i64>; STAGES],
}

impl RunArtifacts {
    /// Table row label: the method alone for unscheduled methods.
    pub fn condition(&self) -> String {
        condition_label(self.method, self.schedule)
    }

    pub fn stage_entropy(&self, stage: usize) -> Option<f64> {
        let counts = &self.stage_counts[stage - 1];
        action_distribution(stage, counts).ok().and_then(|d| entropy(&d).ok())
    }
}

pub fn condition_label(method: Method, schedule: ScheduleName) -> String {
    if method.is_scheduled() {
        format!("{method}_{schedule}")
    } else {
        method.to_string()
    }
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

/// Reads one run directory written by the trainer.
pub fn load_run(dir: &Path) -> Result<RunArtifacts> {
    let config = RunConfig::load(&dir.join("config.json"))?;
    let mut evals: Vec<EvalRow> = read_rows(&dir.join("eval.csv"))?;
    evals.sort_by_key(|e| e.checkpoint_epoch);
    let mut stage_evals = [None; STAGES];
    for (slot, e) in stage_evals.iter_mut().zip(&evals) {
        *slot = Some((e.success_rate, e.avg_turns));
    }
    let mut stage_counts: [Vec<i64>; STAGES] = std::array::from_fn(|_| Vec::new());
    let actions_path = dir.join("actions.csv");
    if actions_path.is_file() {
        for row in read_rows::<ActionRow>(&actions_path)? {
            if !(1..=STAGES).contains(&row.stage) {
                continue;
            }
            let counts = &mut stage_counts[row.stage - 1];
            if counts.len() <= row.action_index {
                counts.resize(row.action_index + 1, 0);
            }
            counts[row.action_index] = row.count as i64;
        }
    }
    Ok(RunArtifacts {
        run_id: config.run_id(),
        method: config.method,
        schedule: config.schedule,
        seed: config.seed,
        evals: stage_evals,
        stage_counts,
    })
}

/// Finds every run directory (one holding `config.json` and `eval.csv`) directly
/// under `runs_dir`, in name order.
pub fn discover_runs(runs_dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(runs_dir).map_err(|e| Error::io(runs_dir, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(runs_dir, e))?.path();
        if path.join("config.json").is_file() && path.join("eval.csv").is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub conditions: Vec<String>,
    pub correlations: Vec<CorrelationResult>,
    pub files: Vec<PathBuf>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn condition_key(run: &RunArtifacts) -> (Method, ScheduleName) {
    if run.method.is_scheduled() {
        (run.method, run.schedule)
    } else {
        (run.method, ScheduleName::Random)
    }
}

/// Per-condition, per-stage mean over seeds of `f(run, stage)`.
fn stage_table<F>(groups: &BTreeMap<(Method, ScheduleName), Vec<&RunArtifacts>>, f: F) -> String
where
    F: Fn(&RunArtifacts, usize) -> Option<f64>,
{
    let mut out = String::from("condition,S1,S2,S3,S4\n");
    for ((method, schedule), runs) in groups {
        out.push_str(&condition_label(*method, *schedule));
        for stage in 1..=STAGES {
            let vals: Vec<f64> = runs.iter().filter_map(|r| f(r, stage)).collect();
            out.push(',');
            out.push_str(&cell(mean(&vals)));
        }
        out.push('\n');
    }
    out
}

/// Stage entropy vs final success, across runs.
pub fn stage_correlations(runs: &[RunArtifacts]) -> Vec<CorrelationResult> {
    (1..=STAGES)
        .map(|stage| {
            let pairs: Vec<(f64, f64)> = runs
                .iter()
                .filter_map(|r| Some((r.stage_entropy(stage)?, r.evals[STAGES - 1]?.0)))
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            CorrelationResult {
                stage,
                r: pearson(&x, &y).ok(),
                n: x.len(),
            }
        })
        .collect()
}

/// Writes tables and figure data for all runs found under `runs_dir`.
pub fn build_report(runs_dir: &Path, out_dir: &Path) -> Result<Report> {
    let dirs = discover_runs(runs_dir)?;
    if dirs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no runs found under {}",
            runs_dir.display()
        )));
    }
    let runs = dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    build_report_from(&runs, out_dir)
}

pub fn build_report_from(runs: &[RunArtifacts], out_dir: &Path) -> Result<Report> {
    let mut groups: BTreeMap<(Method, ScheduleName), Vec<&RunArtifacts>> = BTreeMap::new();
    for r in runs {
        groups.entry(condition_key(r)).or_default().push(r);
    }
    let mut files = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<()> {
        let path = out_dir.join(name);
        crate::io::write_text(&path, &text)?;
        files.push(path);
        Ok(())
    };

    emit("table4.csv", stage_table(&groups, |r, s| r.evals[s - 1].map(|e| e.0)))?;
    emit("table5.csv", stage_table(&groups, |r, s| r.evals[s - 1].map(|e| e.1)))?;
    emit("table6.csv", stage_table(&groups, |r, s| r.stage_entropy(s)))?;

    let mut text = String::from("run_id,stage,entropy\n");
    for r in runs {
        for stage in 1..=STAGES {
            let _ = writeln!(text, "{},{stage},{}", r.run_id, cell(r.stage_entropy(stage)));
        }
    }
    emit("entropy.csv", text)?;

    let mut text = String::from("run_id,stage,action_index,probability\n");
    for r in runs {
        for stage in 1..=STAGES {
            let Ok(d) = action_distribution(stage, &r.stage_counts[stage - 1]) else {
                continue;
            };
            if d.is_empty() {
                continue;
            }
            for (a, p) in d.probabilities.iter().enumerate() {
                let _ = writeln!(text, "{},{stage},{a},{p:.6}", r.run_id);
            }
        }
    }
    emit("fig8_action_distributions.csv", text)?;

    let mut text = String::from("condition,run_id,stage,success_rate,avg_turns\n");
    for r in runs {
        for (i, e) in r.evals.iter().enumerate() {
            if let Some((s, t)) = e {
                let _ = writeln!(text, "{},{},{},{s:.4},{t:.4}", r.condition(), r.run_id, i + 1);
            }
        }
    }
    emit("fig11_success_vs_turns.csv", text)?;

    let mut text = String::from("group,S1,S2,S3,S4\n");
    for (label, method, easy_first) in [
        ("curiosity_EFS", Method::ScDdq, true),
        ("curiosity_DFS", Method::ScDdq, false),
        ("no_curiosity_EFS", Method::SDdq, true),
        ("no_curiosity_DFS", Method::SDdq, false),
    ] {
        text.push_str(label);
        // Mean over schedules of each schedule's seed mean.
        let schedule_means: Vec<Vec<Option<f64>>> = groups
            .iter()
            .filter(|((m, s), _)| *m == method && s.is_easy_first() == easy_first && *s != ScheduleName::Custom)
            .map(|(_, rs)| {
                (1..=STAGES)
                    .map(|stage| {
                        mean(&rs.iter().filter_map(|r| r.evals[stage - 1].map(|e| e.0)).collect::<Vec<_>>())
                    })
                    .collect()
            })
            .collect();
        for stage in 0..STAGES {
            let vals: Vec<f64> = schedule_means.iter().filter_map(|m| m[stage]).collect();
            text.push(',');
            text.push_str(&cell(mean(&vals)));
        }
        text.push('\n');
    }
    emit("fig12_stage_curves.csv", text)?;

    let correlations = stage_correlations(runs);
    let mut text = String::from("stage,r,n\n");
    for c in &correlations {
        let _ = writeln!(text, "{},{},{}", c.stage, cell(c.r), c.n);
    }
    emit("correlation.csv", text)?;

    emit("plots.gp", GNUPLOT_SCRIPT.to_string())?;

    Ok(Report {
        conditions: groups.keys().map(|(m, s)| condition_label(*m, *s)).collect(),
        correlations,
        files,
    })
}

const GNUPLOT_SCRIPT: &str = r#"set datafile separator ","
set terminal pngcairo size 900,600
set key autotitle columnhead

set output "fig11_success_vs_turns.png"
set xlabel "average turns"
set ylabel "success rate"
plot "fig11_success_vs_turns.csv" using 5:4 with points pt 7 notitle

set output "fig12_stage_curves.png"
set xlabel "stage"
set xtics ("S1" 2, "S2" 3, "S3" 4, "S4" 5)
plot for [row=0:3] "fig12_stage_curves.csv" matrix every ::1:row::row with linespoints title columnhead(1)

set output "correlation.png"
set style data histograms
set style fill solid
set ylabel "Pearson r"
plot "correlation.csv" using 2:xtic(1) notitle
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_cases() {
        let uniform = action_distribution(1, &[5; 29]).unwrap();
        assert!((entropy(&uniform).unwrap() - 29f64.log2()).abs() < 1e-9);
        let mut one = vec![0; 29];
        one[3] = 9;
        assert_eq!(entropy(&action_distribution(1, &one).unwrap()).unwrap(), 0.0);
        let mut two = vec![0; 29];
        two[0] = 4;
        two[7] = 4;
        assert!((entropy(&action_distribution(1, &two).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            entropy(&action_distribution(1, &[0; 29]).unwrap()),
            Err(Error::UndefinedEntropy)
        ));
        assert!(action_distribution(1, &[1, -1]).is_err());
    }

    #[test]
    fn pearson_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn condition_labels() {
        assert_eq!(condition_label(Method::Ddq, ScheduleName::Random), "DDQ");
        assert_eq!(condition_label(Method::ScDdq, ScheduleName::Emd), "SC-DDQ_EMD");
    }
}
