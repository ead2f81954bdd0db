//! The `dodge` command line: tune, fft, baseline, report, cells,
//! experiment, synth.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dodge_cli::cells::cell_occupancy;
use dodge_cli::config::{ExperimentConfig, Treatment};
use dodge_cli::harness::{
    self, defect_split, run_treatment_defect, run_treatment_text, RunRecord,
};
use dodge_cli::report::report;
use dodge_core::data::load_text_csv;
use dodge_core::error::Error as CoreError;
use dodge_core::metrics::Goal;
use dodge_core::options::TaskKind;
use dodge_core::synth;

#[derive(Parser)]
#[command(name = "dodge", version, about = "Tuning-redundancy hyperparameter optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// defect: a directory of per-release CSVs; text: a text,severe CSV
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "defect")]
    task: String,
    #[arg(long, default_value = "d2h")]
    goal: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "defects")]
    label_column: String,
    #[arg(long, default_value = "severe")]
    text_label_column: String,
    /// empty string loads defect data without a LOC column
    #[arg(long, default_value = "loc")]
    loc_column: String,
    /// cross-validation repeats (text task)
    #[arg(long, default_value_t = 5)]
    cross_x: usize,
    /// cross-validation bins (text task)
    #[arg(long, default_value_t = 5)]
    cross_y: usize,
    /// write the run history under this directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tuning-redundancy optimizer on one dataset
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// total evaluation budget
        #[arg(long, default_value_t = 30)]
        n: usize,
        /// random-exploration evaluations before weighted descent
        #[arg(long, default_value_t = 12)]
        n1: usize,
    },
    /// Train and evaluate a fast-and-frugal tree
    Fft {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Run a comparison optimizer
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        /// random | smotuned | de-rf
        #[arg(long)]
        kind: String,
        /// evaluation budget for random search
        #[arg(long, default_value_t = 30)]
        n: usize,
        /// learner tuned alongside SMOTE
        #[arg(long, default_value = "DecisionTree")]
        learner: String,
    },
    /// Render comparison tables from persisted records
    Report {
        /// records.jsonl (or the directory containing it)
        records: PathBuf,
        #[arg(long, default_value = "d2h")]
        goal: String,
        /// also write the table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Count occupied output-space cells over persisted records
    Cells {
        /// records.jsonl (or the directory containing it)
        records: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
    },
    /// Run a full experiment from a JSON configuration
    Experiment {
        config: PathBuf,
    },
    /// Generate synthetic benchmark data
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// number of planted-signal datasets
        #[arg(long, default_value_t = 10)]
        datasets: usize,
        /// documents in the synthetic issue corpus
        #[arg(long, default_value_t = 200)]
        docs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_goal(raw: &str) -> Result<Goal, CoreError> {
    raw.parse()
}

fn parse_task(raw: &str) -> Result<TaskKind, CoreError> {
    raw.parse()
}

/// Run one treatment on one dataset and print a JSON summary.
fn run_single(data: &DataArgs, treatment: Treatment) -> anyhow::Result<()> {
    let goal = parse_goal(&data.goal)?;
    let task = parse_task(&data.task)?;
    if task == TaskKind::Text && goal == Goal::Popt20 {
        return Err(CoreError::Incompatible(
            "Popt(20) measures source-code inspection effort; the text task has no LOC".into(),
        )
        .into());
    }
    let started = std::time::Instant::now();
    let outcome = match task {
        TaskKind::Defect => {
            let loc =
                if data.loc_column.is_empty() { None } else { Some(data.loc_column.as_str()) };
            let split = defect_split(&data.data, &data.label_column, loc)?;
            run_treatment_defect(&treatment, &split, goal, data.seed)?
        }
        TaskKind::Text => {
            let corpus = load_text_csv(&data.data, &data.text_label_column)?;
            run_treatment_text(&treatment, &corpus, goal, data.seed, data.cross_x, data.cross_y)?
        }
    };

    let mut history_ref = serde_json::Value::Null;
    if let Some(out) = &data.out {
        std::fs::create_dir_all(out)
            .map_err(|source| CoreError::Io { path: out.clone(), source })?;
        let name = format!("{}_{}_{}.jsonl", treatment.name(), goal.name(), data.seed);
        let name: String =
            name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '-' }).collect();
        let path = out.join(name);
        let mut body = String::new();
        for entry in &outcome.history {
            body.push_str(&entry.to_string());
            body.push('\n');
        }
        std::fs::write(&path, body)
            .map_err(|source| CoreError::Io { path: path.clone(), source })?;
        history_ref = serde_json::Value::String(path.display().to_string());
    }

    let summary = serde_json::json!({
        "treatment": treatment.name(),
        "task": task.to_string(),
        "goal": goal.name(),
        "seed": data.seed,
        "test_score": outcome.test_score.value,
        "evaluations": outcome.evaluations,
        "wall_time_ms": started.elapsed().as_millis() as u64,
        "history": history_ref,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn resolve_records(path: &Path) -> anyhow::Result<Vec<RunRecord>> {
    let dir = if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let records = harness::read_records(&dir)?;
    if records.is_empty() {
        return Err(CoreError::InvalidData(format!(
            "no records found under {}",
            path.display()
        ))
        .into());
    }
    Ok(records)
}

fn cells_command(records_path: &Path, epsilon: f64) -> anyhow::Result<()> {
    let records = resolve_records(records_path)?;
    // one point per (dataset, treatment, seed); coordinates are the goal
    // scores in goal-name order
    let mut grouped: BTreeMap<(String, String, u64), BTreeMap<String, f64>> = BTreeMap::new();
    for r in &records {
        grouped
            .entry((r.dataset.clone(), r.treatment.clone(), r.seed))
            .or_default()
            .insert(r.goal.name().to_string(), r.test_score.value);
    }
    let goal_sets: std::collections::HashSet<Vec<String>> =
        grouped.values().map(|m| m.keys().cloned().collect()).collect();
    if goal_sets.len() != 1 {
        return Err(CoreError::InvalidData(
            "records disagree on which goals each run carries; cannot form uniform points".into(),
        )
        .into());
    }
    let points: Vec<Vec<f64>> =
        grouped.values().map(|m| m.values().copied().collect()).collect();
    let report = cell_occupancy(&points, epsilon)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn main_inner() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Tune { data, epsilon, n, n1 } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(CoreError::InvalidParam(format!(
                    "epsilon must be in (0,1), got {epsilon}"
                ))
                .into());
            }
            if n1 < 1 || n1 >= n {
                return Err(CoreError::InvalidParam(format!(
                    "need 1 <= n1 < n (got n1={n1}, n={n})"
                ))
                .into());
            }
            run_single(&data, Treatment::Dodge { epsilon, n, n1 })
        }
        Command::Fft { data, depth } => {
            if depth != 4 {
                // the treatment enum pins the published depth; other depths
                // go through the library API
                return Err(CoreError::InvalidParam(
                    "fft treatment runs at depth 4; use the library for other depths".into(),
                )
                .into());
            }
            run_single(&data, Treatment::Fft)
        }
        Command::Baseline { data, kind, n, learner } => {
            let treatment = match kind.as_str() {
                "random" => Treatment::Random { n },
                "smotuned" => Treatment::Smotuned { learner },
                "de-rf" => Treatment::DeRf,
                other => {
                    return Err(CoreError::InvalidParam(format!(
                        "unknown baseline kind '{other}' (random | smotuned | de-rf)"
                    ))
                    .into())
                }
            };
            run_single(&data, treatment)
        }
        Command::Report { records, goal, csv } => {
            let goal = parse_goal(&goal)?;
            let all = resolve_records(&records)?;
            let out = report(&all, goal)?;
            if let Some(csv_path) = csv {
                std::fs::write(&csv_path, &out.csv)
                    .map_err(|source| CoreError::Io { path: csv_path, source })?;
            }
            print!("{}", out.text);
            Ok(())
        }
        Command::Cells { records, epsilon } => cells_command(&records, epsilon),
        Command::Experiment { config } => {
            let config = ExperimentConfig::load(&config)?;
            let records = harness::run_experiment(&config)?;
            println!(
                "{} records in {}",
                records.len(),
                config.output_dir.join("records.jsonl").display()
            );
            Ok(())
        }
        Command::Synth { out, datasets, docs, seed } => {
            let io_err = |p: &Path, source| CoreError::Io { path: p.to_path_buf(), source };
            let poi_dir = out.join("poi");
            std::fs::create_dir_all(&poi_dir).map_err(|e| io_err(&poi_dir, e))?;
            synth::write_poi_fixtures(&poi_dir, seed)?;
            for (name, split) in synth::synthetic_suite(datasets, seed) {
                let dir = out.join(&name);
                std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                split.train.to_csv(&dir.join("r0-train.csv"), "defects", Some("loc"))?;
                split.test.to_csv(&dir.join("r1-test.csv"), "defects", Some("loc"))?;
            }
            synth::write_text_fixture(&out.join("issues.csv"), docs, seed)?;
            println!("wrote {} planted datasets, poi-shaped releases and issues.csv under {}",
                datasets, out.display());
            Ok(())
        }
    }
}

/// 1 for configuration problems, 2 for data problems.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidParam(_)) | Some(CoreError::Incompatible(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
