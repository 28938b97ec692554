//! CSV tables written after a sweep.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::experiment::{TrialOutcome, TrialRecord};

pub const TRIAL_COLUMNS: [&str; 17] = [
    "regime",
    "p",
    "trial",
    "seed",
    "n",
    "m",
    "k",
    "epsilon_total",
    "sigma",
    "accuracy",
    "lp_objective",
    "lp_iterations",
    "estimate_ms",
    "sample_support_ms",
    "solve_ms",
    "sample_synthetic_ms",
    "error",
];

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "regime",
    "p",
    "trials",
    "failed",
    "n",
    "m",
    "k",
    "median_accuracy",
    "mean_accuracy",
    "median_lp_objective",
    "median_solve_ms",
    "mean_solve_ms",
    "median_total_ms",
    "mean_total_ms",
];

/// Columns that hold wall-clock measurements and are excluded from
/// determinism comparisons.
pub fn is_wall_time_column(name: &str) -> bool {
    name.ends_with("_ms")
}

#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub trials: PathBuf,
    pub summary: PathBuf,
    pub plot_time: PathBuf,
    pub plot_error: PathBuf,
    pub data_dir: Option<PathBuf>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn trial_row(r: &TrialRecord) -> Vec<String> {
    vec![
        r.regime.to_string(),
        r.p.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.k.to_string(),
        r.epsilon_total.to_string(),
        r.sigma.to_string(),
        opt(r.accuracy),
        opt(r.lp_objective),
        opt(r.lp_iterations),
        r.estimate_ms.to_string(),
        r.sample_support_ms.to_string(),
        r.solve_ms.to_string(),
        r.sample_synthetic_ms.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

/// Per (regime, p) group in order of first appearance.
pub struct GroupSummary<'a> {
    pub regime: String,
    pub p: usize,
    pub records: Vec<&'a TrialRecord>,
}

impl GroupSummary<'_> {
    fn ok(&self) -> impl Iterator<Item = &&TrialRecord> {
        self.records.iter().filter(|r| r.error.is_none())
    }

    pub fn median_accuracy(&self) -> Option<f64> {
        median(&mut self.ok().filter_map(|r| r.accuracy).collect::<Vec<_>>())
    }

    pub fn median_solve_ms(&self) -> Option<f64> {
        median(&mut self.ok().map(|r| r.solve_ms).collect::<Vec<_>>())
    }

    pub fn median_total_ms(&self) -> Option<f64> {
        median(&mut self.ok().map(|r| r.total_ms()).collect::<Vec<_>>())
    }

    fn row(&self) -> Vec<String> {
        let acc: Vec<f64> = self.ok().filter_map(|r| r.accuracy).collect();
        let solve: Vec<f64> = self.ok().map(|r| r.solve_ms).collect();
        let total: Vec<f64> = self.ok().map(|r| r.total_ms()).collect();
        let first = self.records[0];
        vec![
            self.regime.clone(),
            self.p.to_string(),
            self.records.len().to_string(),
            (self.records.len() - acc.len()).to_string(),
            first.n.to_string(),
            first.m.to_string(),
            first.k.to_string(),
            opt(self.median_accuracy()),
            opt(mean(&acc)),
            opt(median(
                &mut self.ok().filter_map(|r| r.lp_objective).collect::<Vec<_>>(),
            )),
            opt(self.median_solve_ms()),
            opt(mean(&solve)),
            opt(self.median_total_ms()),
            opt(mean(&total)),
        ]
    }
}

pub fn group(records: &[TrialRecord]) -> Vec<GroupSummary<'_>> {
    let mut groups: Vec<GroupSummary> = Vec::new();
    for r in records {
        let name = r.regime.to_string();
        match groups.iter_mut().find(|g| g.regime == name && g.p == r.p) {
            Some(g) => g.records.push(r),
            None => groups.push(GroupSummary {
                regime: name,
                p: r.p,
                records: vec![r],
            }),
        }
    }
    groups
}

fn write_plot<F>(path: &Path, groups: &[GroupSummary], metric: F) -> Result<()>
where
    F: Fn(&GroupSummary) -> Option<f64>,
{
    let mut regimes: Vec<&str> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    for g in groups {
        if !regimes.contains(&g.regime.as_str()) {
            regimes.push(&g.regime);
        }
        if !dims.contains(&g.p) {
            dims.push(g.p);
        }
    }
    dims.sort_unstable();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["p".to_string()];
    header.extend(regimes.iter().map(|r| r.to_string()));
    w.write_record(&header)?;
    for p in dims {
        let mut row = vec![p.to_string()];
        for r in &regimes {
            let value = groups.iter().find(|g| g.p == p && g.regime == *r).and_then(&metric);
            row.push(opt(value));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `summary.csv`, `plotdata_time.csv` and
/// `plotdata_error.csv` under `output_dir`, plus `data/` when outcomes
/// carry datasets.
pub fn emit_reports(outcomes: &[TrialOutcome], output_dir: &Path) -> Result<ReportPaths> {
    if outcomes.is_empty() {
        return Err(BenchError::config("no trial records to report"));
    }
    fs::create_dir_all(output_dir)?;
    let records: Vec<TrialRecord> = outcomes.iter().map(|o| o.record.clone()).collect();

    let trials = output_dir.join("trials.csv");
    let mut w = csv::Writer::from_path(&trials)?;
    w.write_record(TRIAL_COLUMNS)?;
    for r in &records {
        w.write_record(trial_row(r))?;
    }
    w.flush()?;

    let groups = group(&records);
    let summary = output_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for g in &groups {
        w.write_record(g.row())?;
    }
    w.flush()?;

    let plot_time = output_dir.join("plotdata_time.csv");
    write_plot(&plot_time, &groups, |g| g.median_total_ms())?;
    let plot_error = output_dir.join("plotdata_error.csv");
    write_plot(&plot_error, &groups, |g| g.median_accuracy())?;

    let mut data_dir = None;
    if outcomes.iter().any(|o| o.original.is_some()) {
        let dir = output_dir.join("data");
        fs::create_dir_all(&dir)?;
        for o in outcomes {
            let r = &o.record;
            let stem = format!("p{}_{}_trial{}", r.p, r.regime, r.trial);
            if let Some(x) = &o.original {
                x.save_csv(dir.join(format!("{stem}_X.csv")))?;
            }
            if let Some(y) = &o.synthetic {
                y.save_csv(dir.join(format!("{stem}_Y.csv")))?;
            }
        }
        data_dir = Some(dir);
    }

    Ok(ReportPaths {
        trials,
        summary,
        plot_time,
        plot_error,
        data_dir,
    })
}
