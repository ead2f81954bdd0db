//! Comparison tables over persisted run records.
//!
//! Per dataset: the mean test score per treatment, the best column marked,
//! and treatments statistically worse than the best flagged. A second
//! table summarizes mean evaluation counts per treatment so the
//! computational-cost comparison can be read off directly.

use std::collections::BTreeMap;

use dodge_core::error::{Error, Result};
use dodge_core::metrics::Goal;
use dodge_core::stats::{compare, SampleSet};

use crate::harness::RunRecord;

#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub csv: String,
}

struct TreatmentRow {
    treatment: String,
    mean: f64,
    runs: usize,
    mean_evaluations: f64,
    worse: bool,
    significant: bool,
    effect_a12: f64,
    best: bool,
}

/// Build the comparison report for one goal. The bootstrap inside the
/// verdicts is seeded from the goal so reports are reproducible.
pub fn report(records: &[RunRecord], goal: Goal) -> Result<Report> {
    let filtered: Vec<&RunRecord> = records.iter().filter(|r| r.goal == goal).collect();
    if filtered.is_empty() {
        return Err(Error::InvalidData(format!("no records for goal {goal}")));
    }

    // dataset -> treatment -> scores/evaluations
    let mut by_dataset: BTreeMap<String, BTreeMap<String, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for r in &filtered {
        let slot = by_dataset
            .entry(r.dataset.clone())
            .or_default()
            .entry(r.treatment.clone())
            .or_default();
        slot.0.push(r.test_score.value);
        slot.1.push(r.evaluations as f64);
    }

    let maximize = goal.maximize();
    let mut text = String::new();
    let mut csv = String::from("dataset,treatment,goal,mean,runs,mean_evaluations,best,worse,significant,effect_a12\n");
    text.push_str(&format!(
        "goal: {goal} ({} is better)\n\n",
        if maximize { "larger" } else { "smaller" }
    ));

    let mut eval_summary: BTreeMap<String, (f64, usize)> = BTreeMap::new();

    for (dataset, treatments) in &by_dataset {
        let samples: Vec<SampleSet> = treatments
            .iter()
            .map(|(name, (scores, _))| SampleSet::new(name.clone(), scores.clone()))
            .collect::<Result<_>>()?;
        let verdicts = if samples.len() >= 2 {
            compare(&samples, maximize, 0xD0D6E)?
        } else {
            Vec::new()
        };

        let best_label = samples
            .iter()
            .map(|s| (s.label.clone(), s.mean()))
            .reduce(|best, cur| {
                let better = if maximize { cur.1 > best.1 } else { cur.1 < best.1 };
                if better {
                    cur
                } else {
                    best
                }
            })
            .map(|(label, _)| label)
            .expect("at least one treatment");

        let mut rows: Vec<TreatmentRow> = Vec::new();
        for (name, (scores, evals)) in treatments {
            let verdict = verdicts.iter().find(|v| &v.label == name);
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let mean_evaluations = evals.iter().sum::<f64>() / evals.len() as f64;
            rows.push(TreatmentRow {
                treatment: name.clone(),
                mean,
                runs: scores.len(),
                mean_evaluations,
                worse: verdict.map(|v| v.worse).unwrap_or(false),
                significant: verdict.map(|v| v.significant).unwrap_or(false),
                effect_a12: verdict.map(|v| v.effect_a12).unwrap_or(0.5),
                best: name == &best_label,
            });
            let entry = eval_summary.entry(name.clone()).or_insert((0.0, 0));
            entry.0 += evals.iter().sum::<f64>();
            entry.1 += evals.len();
        }

        text.push_str(&format!("dataset: {dataset}\n"));
        text.push_str(&format!("  {:<28} {:>8} {:>6}  flag\n", "treatment", "mean", "runs"));
        for row in &rows {
            let flag = if row.best {
                "best"
            } else if row.worse {
                "WORSE"
            } else {
                ""
            };
            text.push_str(&format!(
                "  {:<28} {:>8.4} {:>6}  {}\n",
                row.treatment, row.mean, row.runs, flag
            ));
            csv.push_str(&format!(
                "{dataset},{},{goal},{:.6},{},{:.1},{},{},{},{:.4}\n",
                row.treatment,
                row.mean,
                row.runs,
                row.mean_evaluations,
                row.best,
                row.worse,
                row.significant,
                row.effect_a12
            ));
        }
        text.push('\n');
    }

    text.push_str("evaluations per run (mean)\n");
    for (treatment, (total, n)) in &eval_summary {
        text.push_str(&format!("  {:<28} {:>10.1}\n", treatment, total / *n as f64));
    }

    Ok(Report { text, csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dodge_core::metrics::GoalScore;

    fn record(dataset: &str, treatment: &str, seed: u64, value: f64) -> RunRecord {
        RunRecord {
            treatment: treatment.into(),
            dataset: dataset.into(),
            seed,
            goal: Goal::D2h,
            test_score: GoalScore::new(Goal::D2h, value),
            evaluations: 30,
            wall_time_ms: 1,
            history_ref: "h".into(),
        }
    }

    #[test]
    fn single_treatment_reports_without_flags() {
        let records: Vec<RunRecord> =
            (0..5).map(|i| record("d", "dodge", i, 0.3 + i as f64 * 0.01)).collect();
        let out = report(&records, Goal::D2h).unwrap();
        assert!(out.text.contains("best"));
        assert!(!out.text.contains("WORSE"));
    }

    #[test]
    fn identical_distributions_are_never_flagged() {
        let mut records = Vec::new();
        for i in 0..25 {
            let v = 0.4 + (i % 5) as f64 * 0.01;
            records.push(record("d", "a", i, v));
            records.push(record("d", "b", i, v));
        }
        let out = report(&records, Goal::D2h).unwrap();
        assert!(!out.text.contains("WORSE"));
    }

    #[test]
    fn dominated_treatment_is_the_only_one_flagged() {
        let mut records = Vec::new();
        for i in 0..25 {
            // "mid" overlaps "good" almost entirely: not statistically worse
            records.push(record("d", "good", i, 0.10 + (i % 5) as f64 * 0.01));
            records.push(record("d", "mid", i, 0.101 + (i % 5) as f64 * 0.01));
            records.push(record("d", "bad", i, 0.90 + (i % 5) as f64 * 0.01));
        }
        let out = report(&records, Goal::D2h).unwrap();
        let flagged: Vec<&str> = out
            .csv
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(7) == Some("true"))
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(flagged, vec!["bad"]);
        // csv carries the evaluation summary inputs
        assert!(out.text.contains("evaluations per run"));
    }

    #[test]
    fn missing_goal_is_an_error() {
        let records = vec![record("d", "a", 1, 0.5)];
        assert!(report(&records, Goal::Popt20).is_err());
    }
}
