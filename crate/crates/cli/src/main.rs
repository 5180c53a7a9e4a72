//! `scld`: exact model counting, content-information queries, greedy
//! sentence selection, and transmitter/receiver simulations over finite
//! first-order worlds described by story files.
//!
//! Exit codes: 0 on success, 2 on input errors (bad files, parse
//! failures, unsatisfiable evidence), 3 when a counting resource budget
//! is exceeded.

mod folio;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use scld_core::codec::fixed_cost;
use scld_core::counter::{Counter, CounterConfig, CounterError};
use scld_core::encoder::{self, Budget};
use scld_core::experiment::{run_experiment, ExperimentConfig};
use scld_core::fol::{display, import_dimacs};
use scld_core::semantics::{confirmation, uncertainty_reduction, Evidence, MeasureConfig, Probability};
use scld_core::simnet::{simulate, SelectionMode};
use scld_core::story::{ingest, CompiledStory, StoryFile};

#[derive(Parser)]
#[command(
    name = "scld",
    version,
    about = "Semantic communication for logical deduction over finite first-order worlds"
)]
struct Cli {
    /// Base seed for the randomized baselines.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Worker threads for story-parallel commands (0 = default pool).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Decision budget per exact counting call.
    #[arg(long, global = true, default_value_t = CounterConfig::default().max_decisions)]
    max_decisions: u64,

    /// Output format for tabular results (curves, bit reports, experiment
    /// rows); scalar results are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SelectModeArg {
    Scld,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimModeArg {
    Scld,
    Random,
    All,
}

impl From<SimModeArg> for SelectionMode {
    fn from(m: SimModeArg) -> SelectionMode {
        match m {
            SimModeArg::Scld => SelectionMode::Scld,
            SimModeArg::Random => SelectionMode::Random,
            SimModeArg::All => SelectionMode::All,
        }
    }
}

/// `K=<n>` sentences or `bits=<n>`.
fn parse_budget(s: &str) -> Result<Budget, String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=<n> or bits=<n>, got {s:?}"))?;
    match key {
        "K" => value
            .parse::<usize>()
            .map(Budget::Sentences)
            .map_err(|e| format!("bad sentence budget {value:?}: {e}")),
        "bits" => value
            .parse::<u64>()
            .map(Budget::Bits)
            .map_err(|e| format!("bad bit budget {value:?}: {e}")),
        other => Err(format!("unknown budget kind {other:?}; use K= or bits=")),
    }
}

fn parse_budget_list(s: &str) -> Result<BudgetList, String> {
    let budgets = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad budget {p:?}: {e}")))
        .collect::<Result<Vec<usize>, String>>()?;
    if budgets.is_empty() {
        return Err("at least one budget is required".into());
    }
    Ok(BudgetList(budgets))
}

#[derive(Debug, Clone)]
struct BudgetList(Vec<usize>);

#[derive(Subcommand)]
enum Cmd {
    /// Validate a story file and report the derived world.
    Ingest {
        #[arg(long)]
        story: PathBuf,
        /// Treat the input as FOLIO-style records: convert the formula
        /// side of one record into a story, then ingest it.
        #[arg(long)]
        folio: bool,
        /// Record index within a FOLIO-style file.
        #[arg(long, default_value_t = 0)]
        record: usize,
    },
    /// Exactly count the models of a DIMACS CNF file.
    Count {
        /// Path to a `.cnf` file.
        file: PathBuf,
    },
    /// Degree of confirmation c(sentence | given) in a story's world.
    Confirm {
        #[arg(long)]
        story: PathBuf,
        /// The sentence being assessed.
        #[arg(long)]
        sentence: String,
        /// Conditioning sentences (repeatable); omitted = prior.
        #[arg(long)]
        given: Vec<String>,
    },
    /// Content information cont = 1 - c(sentence | given).
    Cont {
        #[arg(long)]
        story: PathBuf,
        #[arg(long)]
        sentence: String,
        #[arg(long)]
        given: Vec<String>,
    },
    /// Greedily select sentences under a budget; print the transcript.
    Select {
        #[arg(long)]
        story: PathBuf,
        #[arg(long, value_enum, default_value_t = SelectModeArg::Scld)]
        mode: SelectModeArg,
        /// `K=<n>` sentences or `bits=<n>`.
        #[arg(long, value_parser = parse_budget)]
        budget: Budget,
    },
    /// Per-sentence encoded sizes under a coder.
    Bits {
        #[arg(long)]
        story: PathBuf,
        #[arg(long, value_enum, default_value_t = CoderArg::Huffman)]
        coder: CoderArg,
    },
    /// Transmit under a budget, replay at the receiver, and deduce.
    Simulate {
        #[arg(long)]
        story: PathBuf,
        /// JSON array of hypothesis sentences; overrides the story's own.
        #[arg(long)]
        hypotheses: Option<PathBuf>,
        /// `K=<n>` or `bits=<n>`; omitted = every sentence.
        #[arg(long, value_parser = parse_budget)]
        budget: Option<Budget>,
        #[arg(long, value_enum, default_value_t = SimModeArg::Scld)]
        mode: SimModeArg,
    },
    /// Run every story under each mode and budget; emit a report.
    Experiment {
        /// Story files or directories of `*.json` stories (repeatable).
        #[arg(long, required = true)]
        stories: Vec<PathBuf>,
        /// Comma-separated sentence budgets.
        #[arg(long, default_value = "1,2,3", value_parser = parse_budget_list)]
        budgets: BudgetList,
        /// Random-baseline repetitions per story and budget.
        #[arg(long, default_value_t = 30)]
        seeds: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoderArg {
    Huffman,
    Fixed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for exhausted counting budgets anywhere in the chain, 2 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    let budget = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<CounterError>(),
            Some(CounterError::DecisionBudget(_) | CounterError::CacheBudget(_))
        )
    });
    if budget {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    let counter_cfg = CounterConfig {
        max_decisions: cli.max_decisions,
        ..CounterConfig::default()
    };
    match cli.cmd {
        Cmd::Ingest { story, folio, record } => cmd_ingest(&story, folio, record, counter_cfg),
        Cmd::Count { file } => cmd_count(&file, counter_cfg),
        Cmd::Confirm { story, sentence, given } => {
            cmd_confirm(&story, &sentence, &given, counter_cfg, false)
        }
        Cmd::Cont { story, sentence, given } => {
            cmd_confirm(&story, &sentence, &given, counter_cfg, true)
        }
        Cmd::Select { story, mode, budget } => {
            cmd_select(&story, mode, budget, cli.seed, counter_cfg)
        }
        Cmd::Bits { story, coder } => cmd_bits(&story, coder, cli.output, counter_cfg),
        Cmd::Simulate { story, hypotheses, budget, mode } => cmd_simulate(
            &story,
            hypotheses.as_deref(),
            budget,
            mode,
            cli.seed,
            cli.output,
            counter_cfg,
        ),
        Cmd::Experiment { stories, budgets, seeds } => cmd_experiment(
            &stories,
            budgets.0,
            seeds,
            cli.seed,
            cli.workers,
            cli.max_decisions,
            cli.output,
        ),
    }
}

fn load_story(path: &Path, cfg: CounterConfig) -> Result<(CompiledStory, Counter)> {
    let mut counter = Counter::new(cfg);
    let story = ingest(StoryFile::load(path)?, &mut counter)?;
    Ok((story, counter))
}

fn probability_json(p: &Probability) -> serde_json::Value {
    json!({ "exact": p.to_string(), "value": p.as_f64() })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable report"));
}

fn cmd_ingest(path: &Path, folio: bool, record: usize, cfg: CounterConfig) -> Result<()> {
    let file = if folio {
        folio::convert_file(path, record)?
    } else {
        StoryFile::load(path)?
    };
    let mut counter = Counter::new(cfg);
    let story = ingest(file.clone(), &mut counter)?;
    let mut out = json!({
        "schema": 1,
        "id": story.id(),
        "sentences": story.sentence_count(),
        "variables": story.world.var_count(),
        "predicates": story.file.predicates.iter()
            .map(|p| json!({ "name": p.name, "arity": p.arity }))
            .collect::<Vec<_>>(),
        "entities": story.file.entities,
        "hypotheses": story.hypotheses.as_ref().map(|h| h.len()),
        "hypothesis_validity": story.hypotheses.as_ref()
            .map(|h| h.validity().unwrap_or("valid")),
    });
    if folio {
        // Echo the converted story so it can be saved and reused.
        out["story"] = serde_json::to_value(&file)?;
    }
    print_json(&out);
    Ok(())
}

fn cmd_count(file: &Path, cfg: CounterConfig) -> Result<()> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let inst = import_dimacs(&text)?;
    let mut counter = Counter::new(cfg);
    let count = counter.count(&inst)?;
    print_json(&json!({
        "schema": 1,
        "file": file.display().to_string(),
        "variables": inst.var_count,
        "clauses": inst.clauses.len(),
        "count": count.to_string(),
        "log2": count.log2(),
    }));
    Ok(())
}

fn cmd_confirm(
    path: &Path,
    sentence: &str,
    given: &[String],
    cfg: CounterConfig,
    complement: bool,
) -> Result<()> {
    let (story, mut counter) = load_story(path, cfg)?;
    let world = &story.world;
    let m = world.parse(sentence)?;
    let mut evidence = Evidence::empty(world);
    for g in given {
        let s = world.parse(g).with_context(|| format!("conditioning sentence {g:?}"))?;
        evidence = evidence.try_extended(world, &mut counter, s)?;
    }
    let c = confirmation(&m, &evidence, world, &mut counter, &MeasureConfig::default())?;
    let mut out = json!({
        "schema": 1,
        "story": story.id(),
        "sentence": display(&m, world.signature()),
        "given": given,
        "confirmation": probability_json(&c),
    });
    if complement {
        out["cont"] = probability_json(&c.complement());
    }
    print_json(&out);
    Ok(())
}

fn cmd_select(
    path: &Path,
    mode: SelectModeArg,
    budget: Budget,
    seed: u64,
    cfg: CounterConfig,
) -> Result<()> {
    let (story, mut counter) = load_story(path, cfg)?;
    let transcript = match mode {
        SelectModeArg::Scld => encoder::run(
            &story.world,
            &mut counter,
            &story.evidence,
            &story.dict,
            &story.table,
            budget,
        )?,
        SelectModeArg::Random => encoder::select_random(
            &story.world,
            &mut counter,
            &story.evidence,
            &story.dict,
            &story.table,
            budget,
            seed,
        )?,
    };
    let mut received = Evidence::empty(&story.world);
    for m in &transcript.messages {
        received = received.try_extended(&story.world, &mut counter, m.formula.clone())?;
    }
    let reduction = uncertainty_reduction(&received, &story.evidence)?;
    let messages: Vec<_> = transcript
        .messages
        .iter()
        .enumerate()
        .map(|(order, m)| {
            json!({
                "order": order,
                "sentence_index": m.sentence_index,
                "text": display(&m.formula, story.world.signature()),
                "bits": m.bit_len,
                "payload": m.payload.to_string(),
                "conditional": probability_json(&m.conditional),
            })
        })
        .collect();
    print_json(&json!({
        "schema": 1,
        "story": story.id(),
        "mode": match mode { SelectModeArg::Scld => "scld", SelectModeArg::Random => "random" },
        "budget": budget_json(budget),
        "messages": messages,
        "total_bits": transcript.total_bits,
        "stop": transcript.stop.as_str(),
        "reduction_pct": reduction,
    }));
    Ok(())
}

fn budget_json(b: Budget) -> serde_json::Value {
    match b {
        Budget::Sentences(k) => json!({ "kind": "sentences", "limit": k }),
        Budget::Bits(n) => json!({ "kind": "bits", "limit": n }),
    }
}

fn cmd_bits(path: &Path, coder: CoderArg, output: OutputFormat, cfg: CounterConfig) -> Result<()> {
    let (story, _) = load_story(path, cfg)?;
    let sig = story.world.signature();
    let mut rows = Vec::new();
    let mut total = 0u64;
    for (index, f) in story.evidence.sentences().iter().enumerate() {
        let ids = story.dict.tokenize(f, sig)?;
        let bits = match coder {
            CoderArg::Huffman => story.table.cost_bits(&ids)?,
            CoderArg::Fixed => fixed_cost(&ids, &story.dict),
        };
        total += bits;
        rows.push((index, ids.len(), bits, display(f, sig)));
    }
    match output {
        OutputFormat::Csv => {
            let mut out = String::from("index,tokens,bits\n");
            for (index, tokens, bits, _) in &rows {
                out.push_str(&format!("{index},{tokens},{bits}\n"));
            }
            print!("{out}");
        }
        OutputFormat::Json => {
            print_json(&json!({
                "schema": 1,
                "story": story.id(),
                "coder": match coder { CoderArg::Huffman => "huffman", CoderArg::Fixed => "fixed" },
                "rows": rows.iter().map(|(index, tokens, bits, text)| json!({
                    "index": index, "tokens": tokens, "bits": bits, "text": text,
                })).collect::<Vec<_>>(),
                "total_bits": total,
                "table": match coder {
                    CoderArg::Huffman => json!({
                        "coded_tokens": story.table.coded_tokens(),
                        "table_bits": story.table.table_bits(),
                    }),
                    CoderArg::Fixed => serde_json::Value::Null,
                },
            }));
        }
    }
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    hypotheses: Option<&Path>,
    budget: Option<Budget>,
    mode: SimModeArg,
    seed: u64,
    output: OutputFormat,
    cfg: CounterConfig,
) -> Result<()> {
    let mut file = StoryFile::load(path)?;
    if let Some(hp) = hypotheses {
        let text =
            fs::read_to_string(hp).with_context(|| format!("reading {}", hp.display()))?;
        let list: Vec<String> = serde_json::from_str(&text)
            .with_context(|| format!("{}: expected a JSON array of sentences", hp.display()))?;
        file.hypotheses = Some(list);
    }
    let mut counter = Counter::new(cfg);
    let story = ingest(file, &mut counter)?;
    let budget = budget.unwrap_or(Budget::Sentences(story.sentence_count()));
    let run = simulate(
        &story.world,
        &mut counter,
        &story.evidence,
        story.hypotheses.as_ref(),
        &story.dict,
        &story.table,
        mode.into(),
        budget,
        seed,
    )?;
    match output {
        OutputFormat::Csv => {
            let mut out = String::from("messages,bits,reduction_pct,chosen,accuracy\n");
            for p in &run.curve {
                let chosen = p.chosen.map(|c| c.to_string()).unwrap_or_default();
                let accuracy = p.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{:.4},{},{}\n",
                    p.messages, p.bits, p.reduction_pct, chosen, accuracy
                ));
            }
            print!("{out}");
        }
        OutputFormat::Json => {
            let task = run.task.as_ref().map(|t| {
                let set = story.hypotheses.as_ref().expect("task implies hypotheses");
                json!({
                    "chosen": t.chosen,
                    "hypothesis": display(set.formula(t.chosen), story.world.signature()),
                    "confirmation": probability_json(&t.confirmation),
                    "accuracy": t.accuracy,
                    "per_entity": t.per_entity,
                    "messages_used": t.messages_used,
                    "bits_used": t.bits_used,
                })
            });
            print_json(&json!({
                "schema": 1,
                "story": story.id(),
                "mode": run.mode.as_str(),
                "budget": budget_json(budget),
                "tie_break": "lowest-index",
                "stop": run.transcript.stop.as_str(),
                "messages": run.transcript.messages.iter()
                    .map(|m| m.sentence_index).collect::<Vec<_>>(),
                "total_bits": run.transcript.total_bits,
                "receiver_count": run.receiver_count.to_string(),
                "reduction_pct": run.reduction_pct,
                "hypothesis_validity": story.hypotheses.as_ref()
                    .map(|h| h.validity().unwrap_or("valid")),
                "task": task,
                "curve": run.curve.iter().map(|p| json!({
                    "messages": p.messages,
                    "bits": p.bits,
                    "reduction_pct": p.reduction_pct,
                    "chosen": p.chosen,
                    "accuracy": p.accuracy,
                })).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(())
}

fn collect_story_files(paths: &[PathBuf]) -> Result<Vec<StoryFile>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|path| path.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            if entries.is_empty() {
                return Err(anyhow!("no *.json stories in {}", p.display()));
            }
            for path in entries {
                files.push(StoryFile::load(&path)?);
            }
        } else {
            files.push(StoryFile::load(p)?);
        }
    }
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    paths: &[PathBuf],
    budgets: Vec<usize>,
    seeds: u64,
    base_seed: u64,
    workers: usize,
    max_decisions: u64,
    output: OutputFormat,
) -> Result<()> {
    let files = collect_story_files(paths)?;
    let cfg = ExperimentConfig { budgets, seeds, base_seed, workers, max_decisions };
    let report = run_experiment(files, &cfg);
    match output {
        OutputFormat::Csv => print!("{}", report.to_csv()),
        OutputFormat::Json => print!("{}", report.to_json()),
    }
    Ok(())
}
