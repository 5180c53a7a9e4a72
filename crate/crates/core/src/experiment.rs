//! Experiment orchestration: run every bundled or user story under each
//! selection mode and budget, and emit deterministic, plot-ready reports.
//!
//! Stories are independent, so they run in parallel; determinism comes
//! from per-story seed derivation (position in the id-sorted story list,
//! not scheduling order) and from sorting rows canonically before output.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::counter::{Counter, CounterConfig};
use crate::encoder::Budget;
use crate::simnet::{simulate, SelectionMode};
use crate::story::{ingest, StoryFile};

/// Offset between the seed streams of adjacent stories; large enough that
/// no realistic seed count overlaps the next story's stream.
const STORY_SEED_STRIDE: u64 = 10_007;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    /// Sentence budgets to run under `scld` and `random` modes.
    pub budgets: Vec<usize>,
    /// Number of random-baseline repetitions per story and budget.
    pub seeds: u64,
    pub base_seed: u64,
    /// Worker threads for story parallelism; 0 uses the default pool.
    pub workers: usize,
    pub max_decisions: u64,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            budgets: vec![1, 2, 3],
            seeds: 30,
            base_seed: 7,
            workers: 0,
            max_decisions: CounterConfig::default().max_decisions,
        }
    }
}

impl ExperimentConfig {
    fn counter(&self) -> Counter {
        Counter::new(CounterConfig { max_decisions: self.max_decisions, ..Default::default() })
    }
}

/// One simulation outcome. `m` is the configured sentence budget, except
/// in `all` mode where it is the story's sentence count. `seed` is set
/// only for the random baseline. `accuracy` and `chosen` are set only
/// when the story carries hypotheses.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub story: String,
    pub mode: String,
    pub m: usize,
    pub seed: Option<u64>,
    pub messages: usize,
    pub bits: u64,
    pub reduction_pct: f64,
    pub accuracy: Option<f64>,
    pub chosen: Option<usize>,
}

/// Mean over all rows of one (mode, budget) group; `m` is `None` for the
/// `all` group, whose budget is each story's own sentence count.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub mode: String,
    pub m: Option<usize>,
    pub rows: usize,
    pub mean_bits: f64,
    pub mean_reduction_pct: f64,
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StoryFailure {
    pub story: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
    pub aggregates: Vec<Aggregate>,
    pub failures: Vec<StoryFailure>,
}

impl ExperimentReport {
    /// One line per row, stable column set, fixed float precision: the
    /// same report always serializes to identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("story,mode,m,seed,messages,bits,reduction_pct,accuracy,chosen\n");
        for r in &self.rows {
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            let accuracy = r.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
            let chosen = r.chosen.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.4},{},{}\n",
                r.story, r.mode, r.m, seed, r.messages, r.bits, r.reduction_pct, accuracy, chosen
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn story_rows(file: StoryFile, pos: usize, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, String> {
    let mut counter = cfg.counter();
    let story = ingest(file, &mut counter).map_err(|e| e.to_string())?;
    let id = story.id().to_string();
    let set = story.hypotheses.as_ref();
    let mut rows = Vec::new();
    let mut push = |run: crate::simnet::SimulationRun, m: usize, seed: Option<u64>| {
        rows.push(ExperimentRow {
            story: id.clone(),
            mode: run.mode.as_str().to_string(),
            m,
            seed,
            messages: run.transcript.messages.len(),
            bits: run.transcript.total_bits,
            reduction_pct: run.reduction_pct,
            accuracy: run.task.as_ref().map(|t| t.accuracy),
            chosen: run.task.as_ref().map(|t| t.chosen),
        });
    };

    let full = simulate(
        &story.world,
        &mut counter,
        &story.evidence,
        set,
        &story.dict,
        &story.table,
        SelectionMode::All,
        Budget::Sentences(story.sentence_count()),
        0,
    )
    .map_err(|e| e.to_string())?;
    push(full, story.sentence_count(), None);

    for &m in &cfg.budgets {
        let greedy = simulate(
            &story.world,
            &mut counter,
            &story.evidence,
            set,
            &story.dict,
            &story.table,
            SelectionMode::Scld,
            Budget::Sentences(m),
            0,
        )
        .map_err(|e| e.to_string())?;
        push(greedy, m, None);

        for s in 0..cfg.seeds {
            let seed = cfg.base_seed + pos as u64 * STORY_SEED_STRIDE + s;
            let random = simulate(
                &story.world,
                &mut counter,
                &story.evidence,
                set,
                &story.dict,
                &story.table,
                SelectionMode::Random,
                Budget::Sentences(m),
                seed,
            )
            .map_err(|e| e.to_string())?;
            push(random, m, Some(seed));
        }
    }
    Ok(rows)
}

fn aggregates_of(rows: &[ExperimentRow]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(String, Option<usize>), Vec<&ExperimentRow>> = BTreeMap::new();
    for r in rows {
        let m = if r.mode == "all" { None } else { Some(r.m) };
        groups.entry((r.mode.clone(), m)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((mode, m), rs)| {
            let n = rs.len() as f64;
            let with_acc: Vec<f64> = rs.iter().filter_map(|r| r.accuracy).collect();
            Aggregate {
                mode,
                m,
                rows: rs.len(),
                mean_bits: rs.iter().map(|r| r.bits as f64).sum::<f64>() / n,
                mean_reduction_pct: rs.iter().map(|r| r.reduction_pct).sum::<f64>() / n,
                mean_accuracy: if with_acc.is_empty() {
                    None
                } else {
                    Some(with_acc.iter().sum::<f64>() / with_acc.len() as f64)
                },
            }
        })
        .collect()
}

/// Runs every story under every mode and budget. Per-story failures are
/// collected, not fatal; the report is canonical regardless of input
/// order and thread scheduling.
pub fn run_experiment(files: Vec<StoryFile>, cfg: &ExperimentConfig) -> ExperimentReport {
    let mut files = files;
    files.sort_by(|a, b| a.id.cmp(&b.id));

    let work = |files: Vec<StoryFile>| -> Vec<Result<Vec<ExperimentRow>, StoryFailure>> {
        files
            .into_par_iter()
            .enumerate()
            .map(|(pos, file)| {
                let id = file.id.clone();
                story_rows(file, pos, cfg).map_err(|error| StoryFailure { story: id, error })
            })
            .collect()
    };
    let outcomes = if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("experiment worker pool")
            .install(|| work(files))
    } else {
        work(files)
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(rs) => rows.extend(rs),
            Err(f) => failures.push(f),
        }
    }
    rows.sort_by(|a, b| {
        (&a.story, &a.mode, a.m, a.seed).cmp(&(&b.story, &b.mode, b.m, b.seed))
    });
    failures.sort_by(|a, b| a.story.cmp(&b.story));
    let aggregates = aggregates_of(&rows);
    ExperimentReport { schema: 1, config: cfg.clone(), rows, aggregates, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::story::StoryPredicate;

    fn tiny_story(id: &str, flip: bool) -> StoryFile {
        // Two monadic predicates over two entities; evidence pins P both
        // ways depending on `flip`, leaving Q(b) free.
        let p_a = if flip { "~P(a)" } else { "P(a)" };
        StoryFile {
            id: id.to_string(),
            predicates: vec![
                StoryPredicate { name: "P".into(), arity: 1 },
                StoryPredicate { name: "Q".into(), arity: 1 },
            ],
            entities: vec!["a".into(), "b".into()],
            sentences: vec![
                p_a.to_string(),
                "P(b)".into(),
                "Q(a)".into(),
                format!("{p_a} | Q(a)"),
            ],
            hypotheses: Some(vec![
                "forall v. P(v)".into(),
                "forall v. ~P(v)".into(),
            ]),
            source: None,
        }
    }

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig { budgets: vec![1, 2], seeds: 3, ..Default::default() }
    }

    #[test]
    fn full_transmission_rows_reach_total_reduction() {
        let report =
            run_experiment(vec![tiny_story("s1", false), tiny_story("s2", true)], &quick_config());
        assert!(report.failures.is_empty());
        let all_rows: Vec<_> = report.rows.iter().filter(|r| r.mode == "all").collect();
        assert_eq!(all_rows.len(), 2);
        for r in all_rows {
            assert_eq!(r.reduction_pct, 100.0);
            assert_eq!(r.messages, 4);
        }
    }

    #[test]
    fn report_is_byte_identical_and_input_order_free() {
        let cfg = quick_config();
        let a = run_experiment(vec![tiny_story("s1", false), tiny_story("s2", true)], &cfg);
        let b = run_experiment(vec![tiny_story("s2", true), tiny_story("s1", false)], &cfg);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        let again = run_experiment(vec![tiny_story("s1", false), tiny_story("s2", true)], &cfg);
        assert_eq!(a.to_csv(), again.to_csv());
    }

    #[test]
    fn aggregates_recompute_from_rows() {
        let report = run_experiment(vec![tiny_story("s1", false)], &quick_config());
        for agg in &report.aggregates {
            let members: Vec<_> = report
                .rows
                .iter()
                .filter(|r| {
                    r.mode == agg.mode && (agg.m.is_none() || agg.m == Some(r.m))
                })
                .collect();
            assert_eq!(members.len(), agg.rows);
            let mean_bits =
                members.iter().map(|r| r.bits as f64).sum::<f64>() / members.len() as f64;
            assert_eq!(mean_bits, agg.mean_bits);
        }
        // scld and random at every budget, plus the all group.
        assert_eq!(report.aggregates.len(), 5);
    }

    #[test]
    fn broken_story_is_isolated() {
        let mut bad = tiny_story("broken", false);
        bad.sentences.push("~P(b)".into());
        let report = run_experiment(vec![bad, tiny_story("good", false)], &quick_config());
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].story, "broken");
        assert!(report.failures[0].error.contains("unsatisfiable"));
        assert!(report.rows.iter().all(|r| r.story == "good"));
    }

    #[test]
    fn csv_shape_matches_config() {
        let cfg = quick_config();
        let report = run_experiment(vec![tiny_story("s1", false)], &cfg);
        // 1 all + per budget (1 scld + seeds random).
        let expected = 1 + cfg.budgets.len() * (1 + cfg.seeds as usize);
        assert_eq!(report.rows.len(), expected);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), expected + 1);
        assert!(csv.starts_with("story,mode,m,seed,"));
        // Random rows carry their seed; scld/all rows leave it blank.
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 9);
            assert_eq!(cells[3].is_empty(), cells[1] != "random");
        }
    }

    #[test]
    fn workers_flag_does_not_change_output() {
        let mut cfg = quick_config();
        let serial = run_experiment(vec![tiny_story("s1", false), tiny_story("s2", true)], &cfg);
        cfg.workers = 2;
        let parallel =
            run_experiment(vec![tiny_story("s1", false), tiny_story("s2", true)], &cfg);
        assert_eq!(serial.to_csv(), parallel.to_csv());
    }
}
