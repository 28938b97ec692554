use std::fs;
use std::path::Path;

use dpsynth_bench::config::ExperimentConfig;
use dpsynth_bench::experiment::{plan, run_experiment};
use dpsynth_bench::report::{emit_reports, is_wall_time_column, SUMMARY_COLUMNS, TRIAL_COLUMNS};
use dpsynth_core::metrics::{accuracy, Regime};
use dpsynth_core::query::build_marginal_family;
use dpsynth_core::{Dataset, DomainSpec};

fn tiny(regimes: &str, trials: usize, extra_run: &str) -> ExperimentConfig {
    let text = format!(
        r#"
[domain]
kind = "discrete"
dims = [2]

[privacy]
epsilon = 1.0
delta = 0.25
gamma = 0.25

[sizes]
n = 200
m = 64
k = 50

[run]
regimes = {regimes}
trials = {trials}
seed = 11
{extra_run}
"#
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

/// Drops wall-time columns so runs can be compared byte for byte.
fn strip_times(path: &Path) -> String {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().clone();
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| !is_wall_time_column(&header[i]))
        .collect();
    let mut out = keep.iter().map(|&i| &header[i]).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in reader.records() {
        let row = row.unwrap();
        out.push_str(&keep.iter().map(|&i| &row[i]).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn smoke_single_uniform_trial() {
    let config = tiny(r#"["uniform"]"#, 1, "");
    let outcomes = run_experiment(&config).unwrap();
    assert_eq!(outcomes.len(), 1);
    let r = &outcomes[0].record;
    assert_eq!(r.regime, Regime::UniformRef);
    assert!(r.error.is_none(), "{:?}", r.error);
    let acc = r.accuracy.unwrap();
    assert!((0.0..=2.0).contains(&acc));
    for t in [r.estimate_ms, r.sample_support_ms, r.solve_ms, r.sample_synthetic_ms] {
        assert!(t >= 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let paths = emit_reports(&outcomes, dir.path()).unwrap();
    let text = fs::read_to_string(&paths.trials).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn same_seed_same_bytes() {
    let config = tiny(r#"["uniform", "histogram"]"#, 3, "threads = 3");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = emit_reports(&run_experiment(&config).unwrap(), a.path()).unwrap();
    let pb = emit_reports(&run_experiment(&config).unwrap(), b.path()).unwrap();
    assert_eq!(strip_times(&pa.trials), strip_times(&pb.trials));
    assert_eq!(strip_times(&pa.summary), strip_times(&pb.summary));
    assert_eq!(fs::read(&pa.plot_error).unwrap(), fs::read(&pb.plot_error).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let one = run_experiment(&tiny(r#"["histogram"]"#, 4, "threads = 1")).unwrap();
    let many = run_experiment(&tiny(r#"["histogram"]"#, 4, "threads = 4")).unwrap();
    let strip = |o: &dpsynth_bench::experiment::TrialOutcome| (o.record.accuracy, o.record.lp_objective, o.record.seed);
    assert_eq!(
        one.iter().map(strip).collect::<Vec<_>>(),
        many.iter().map(strip).collect::<Vec<_>>()
    );
}

#[test]
fn summary_has_one_row_per_regime() {
    let config = tiny(r#"["uniform", "histogram"]"#, 5, "");
    let outcomes = run_experiment(&config).unwrap();
    assert_eq!(outcomes.len(), 10);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_reports(&outcomes, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(&paths.summary).unwrap();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "uniform");
    assert_eq!(&rows[1][0], "histogram");
    assert_eq!(&rows[0][2], "5");
}

#[test]
fn headers_are_fixed() {
    let config = tiny(r#"["uniform"]"#, 1, "");
    let outcomes = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_reports(&outcomes, dir.path()).unwrap();
    assert_eq!(first_line(&paths.trials), TRIAL_COLUMNS.join(","));
    assert_eq!(first_line(&paths.summary), SUMMARY_COLUMNS.join(","));
    assert_eq!(
        first_line(&paths.trials),
        "regime,p,trial,seed,n,m,k,epsilon_total,sigma,accuracy,lp_objective,lp_iterations,\
         estimate_ms,sample_support_ms,solve_ms,sample_synthetic_ms,error"
    );
    assert_eq!(first_line(&paths.plot_time), "p,uniform");
}

#[test]
fn empty_records_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_reports(&[], dir.path()).is_err());
}

#[test]
fn budget_accounting_by_regime() {
    let config = tiny(r#"["uniform", "histogram"]"#, 2, "");
    for o in run_experiment(&config).unwrap() {
        let r = o.record;
        let expected = match r.regime {
            Regime::UniformRef => 1.0,
            _ => 2.0,
        };
        assert_eq!(r.epsilon_total, expected, "{:?}", r.regime);
    }
}

#[test]
fn dumped_data_reproduces_accuracy() {
    let config = tiny(r#"["uniform", "histogram"]"#, 2, "dump_data = true");
    let outcomes = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_reports(&outcomes, dir.path()).unwrap();
    let data_dir = paths.data_dir.unwrap();
    let domain = DomainSpec::boolean(2).unwrap();
    let family = build_marginal_family(&domain, 2).unwrap();
    for o in &outcomes {
        let r = &o.record;
        let stem = format!("p{}_{}_trial{}", r.p, r.regime, r.trial);
        let x = Dataset::load_csv(domain, data_dir.join(format!("{stem}_X.csv"))).unwrap();
        let y = Dataset::load_csv(domain, data_dir.join(format!("{stem}_Y.csv"))).unwrap();
        let recomputed = accuracy(&family, &x, &y).unwrap().worst_gap;
        assert!((recomputed - r.accuracy.unwrap()).abs() <= 1e-12, "{stem}");
    }
}

#[test]
fn histogram_support_smaller_than_uniform() {
    let text = r#"
[domain]
kind = "discrete"
dims = [3, 4, 5, 6]

[privacy]
epsilon = 0.2
delta = 0.5
gamma = 0.25

[run]
regimes = ["uniform", "histogram"]
"#;
    let config = ExperimentConfig::from_toml_str(text).unwrap();
    let cells = plan(&config).unwrap();
    for p in 3..=6 {
        let m = |regime| cells.iter().find(|c| c.p == p && c.regime == regime).unwrap().m;
        assert!(m(Regime::HistogramRef) < m(Regime::UniformRef), "p = {p}");
    }
}

#[test]
fn support_cap_is_a_config_error() {
    let config = tiny(r#"["uniform"]"#, 1, "max_support = 10");
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn continuous_kde_regime_runs() {
    let text = r#"
[domain]
kind = "continuous"
dims = [2]

[privacy]
epsilon = 1.0
delta = 0.25
gamma = 0.25

[sizes]
n = 300
m = 100
k = 40

[kde]
lattice = 8
order = 2

[run]
regimes = ["kde"]
trials = 2
"#;
    let config = ExperimentConfig::from_toml_str(text).unwrap();
    let outcomes = run_experiment(&config).unwrap();
    assert_eq!(outcomes.len(), 2);
    for o in outcomes {
        assert!(o.record.error.is_none(), "{:?}", o.record.error);
        assert_eq!(o.record.epsilon_total, 2.0);
    }
}
