use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tokio::sync::oneshot;

use fecraft_core::engine::{
    format_mean_std, resume_session, run_benchmark, run_session, BenchDataset, BenchReport, Decision, DecisionMode,
    EngineError, EventKind, HumanDecision, IterationRecord, SessionConfig, SessionEvent, SessionHooks,
};
use fecraft_core::fedsl::{execute, parse, FeatureScript};
use fecraft_core::llm::{backend_from_config, parse_playbook, BackendKind, LlmConfig};
use fecraft_core::models::ModelSpec;
use fecraft_core::prompt::FeedbackResult;
use fecraft_core::tabular::{gen_tictactoe, load_csv, read_schema_override, write_csv, SplitPlan, Table};

use crate::api::{self, ApiState};
use crate::{EXIT_DATA, EXIT_INTERNAL, EXIT_LLM, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "fecraft", version, about = "Iterative LLM-driven feature engineering for tabular classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a feature engineering session.
    Run(RunArgs),
    /// Apply a feature script to a CSV file.
    Apply(ApplyArgs),
    /// Compare held-out ROC AUC with and without feature scripts.
    Eval(EvalArgs),
    /// Serve the review API over an existing session directory.
    Serve(ServeArgs),
    /// Write the tic-tac-toe endgame table as CSV.
    GenTictactoe {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Logreg,
    Forest,
}

impl ModelArg {
    fn spec(self, seed: u64) -> ModelSpec {
        match self {
            ModelArg::Logreg => ModelSpec::logistic(),
            ModelArg::Forest => ModelSpec::forest(seed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LlmArg {
    Http,
    Scripted,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    /// File with the dataset description.
    #[arg(long)]
    pub description: Option<PathBuf>,
    /// `column=dtype` lines overriding type inference.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Logreg)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = LlmArg::Http)]
    pub llm: LlmArg,
    /// JSON array of responses for the scripted backend.
    #[arg(long)]
    pub playbook: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model_name: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Environment variable holding the API key; empty for none.
    #[arg(long, default_value = "LLM_API_KEY")]
    pub api_key_env: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Anonymize column names and withhold the description.
    #[arg(long)]
    pub blind: bool,
    /// Ask for a human decision on every candidate through the API.
    #[arg(long)]
    pub review: bool,
    /// Continue the interrupted session in `--out` instead of starting anew.
    #[arg(long)]
    pub resume: bool,
    /// Session directory.
    #[arg(long, default_value = "fecraft-session")]
    pub out: PathBuf,
    /// Serve the API while the session runs (0 picks a free port). Review
    /// mode defaults to 8080.
    #[arg(long)]
    pub serve_port: Option<u16>,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    #[arg(long)]
    pub script: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// CSV file; repeat for several datasets.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// Target column, one per --data (a single value applies to all).
    #[arg(long, required = true)]
    pub target: Vec<String>,
    /// Feature script, one per --data. Without it the "with" condition equals
    /// the raw table.
    #[arg(long)]
    pub script: Vec<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_enum, default_values_t = [ModelArg::Logreg, ModelArg::Forest])]
    pub model: Vec<ModelArg>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.csv and report.json.
    #[arg(long, default_value = "fecraft-eval")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

pub(crate) struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::Data(_) | EngineError::Script(_) | EngineError::SchemaMismatch(_) => EXIT_DATA,
            EngineError::Llm(_) => EXIT_LLM,
            EngineError::Config(_) => EXIT_USAGE,
            EngineError::Model(_) | EngineError::Io(_) | EngineError::Store(_) => EXIT_INTERNAL,
        };
        fail(code, e)
    }
}

pub(crate) fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Serve(a) => cmd_serve(a),
        Command::GenTictactoe { out } => {
            write_csv(&gen_tictactoe(), &out).map_err(|e| fail(EXIT_DATA, e))?;
            println!("wrote {} boards to {}", gen_tictactoe().row_count(), out.display());
            Ok(())
        }
    }
}

fn load(data: &Path, schema: Option<&Path>, target: &str) -> Result<Table, Failure> {
    let ov = schema.map(read_schema_override).transpose().map_err(|e| fail(EXIT_DATA, e))?;
    load_csv(data, ov.as_ref(), target).map_err(|e| fail(EXIT_DATA, format!("{}: {e}", data.display())))
}

fn read_script(path: &Path) -> Result<FeatureScript, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_DATA, format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| fail(EXIT_DATA, e))
}

/// Prints one line per finished iteration and forwards events to the API.
struct CliHooks {
    api: Option<Arc<ApiState>>,
    total: usize,
}

impl SessionHooks for CliHooks {
    fn on_event(&self, event: &SessionEvent) {
        if let Some(api) = &self.api {
            api.on_event(event);
        }
        let Some(r) = &event.record else { return };
        match event.kind {
            EventKind::DecisionRequired => {
                let score = r.outcome.as_ref().map_or(0.0, |o| o.decision_score);
                println!("[{}/{}] awaiting review (decision score {score:.4})", r.index, self.total);
            }
            EventKind::IterationFinished => {
                let text = match (&r.decision, &r.feedback.result) {
                    (Decision::Error, FeedbackResult::Error(m)) => format!("error: {m}"),
                    (d, FeedbackResult::Performance(p)) => {
                        format!("{}: {}", if *d == Decision::Accepted { "accepted" } else { "rejected" }, p)
                    }
                    (d, _) => format!("{d:?}"),
                };
                println!("[{}/{}] {}", r.index, self.total, text.replace('\n', " "));
            }
            _ => {}
        }
    }

    fn decide(&self, record: &IterationRecord) -> Option<HumanDecision> {
        self.api.as_ref()?.decide(record)
    }

    fn description_override(&self) -> Option<String> {
        self.api.as_ref()?.description_override()
    }

    fn supports_review(&self) -> bool {
        self.api.as_ref().is_some_and(|a| a.supports_review())
    }
}

fn llm_config(a: &RunArgs) -> LlmConfig {
    let mut c = LlmConfig {
        backend: match a.llm {
            LlmArg::Http => BackendKind::Http,
            LlmArg::Scripted => BackendKind::Scripted,
        },
        api_key_env_var: a.api_key_env.clone(),
        ..LlmConfig::default()
    };
    if let Some(e) = &a.endpoint {
        c.endpoint_url = e.clone();
    }
    if let Some(m) = &a.model_name {
        c.model_name = m.clone();
    }
    if let Some(t) = a.temperature {
        c.temperature = t;
    }
    c
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| fail(EXIT_INTERNAL, e))
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    if a.iterations == 0 {
        return Err(fail(EXIT_USAGE, "--iterations must be at least 1"));
    }
    let table = load(&a.data, a.schema.as_deref(), &a.target)?;
    let description = match &a.description {
        Some(p) => std::fs::read_to_string(p).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let llm = llm_config(&a);
    let playbook = match (&a.llm, &a.playbook) {
        (LlmArg::Scripted, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?;
            Some(parse_playbook(&text).map_err(|e| fail(EXIT_USAGE, e))?)
        }
        (LlmArg::Scripted, None) => return Err(fail(EXIT_USAGE, "--llm scripted needs --playbook")),
        _ => None,
    };
    let backend = backend_from_config(&llm, playbook).map_err(|e| fail(EXIT_USAGE, e))?;

    let mut config = SessionConfig::new(&a.target, description, a.seed);
    config.data_path = Some(a.data.display().to_string());
    config.iterations = a.iterations;
    config.model = a.model.spec(a.seed);
    config.split_plan = SplitPlan { seed: a.seed, ..SplitPlan::default() };
    config.llm = llm;
    config.blinded = a.blind;
    config.decision_mode = if a.review { DecisionMode::Review } else { DecisionMode::Auto };
    config.out_dir = Some(a.out.clone());
    std::fs::create_dir_all(&a.out).map_err(|e| fail(EXIT_INTERNAL, e))?;

    let out = a.out.clone();
    let resume = a.resume;
    let go = move |hooks: &CliHooks| {
        if resume {
            resume_session(&out, table, backend.as_ref(), hooks)
        } else {
            run_session(config, table, backend.as_ref(), hooks)
        }
    };
    let port = a.serve_port.or(if a.review { Some(8080) } else { None });
    let Some(port) = port else {
        let hooks = CliHooks { api: None, total: a.iterations };
        return finish(go(&hooks), &a.out);
    };

    let state = ApiState::live(&a.out);
    let rt = runtime()?;
    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let (ready_tx, ready_rx) = std::sync::mpsc::channel();
    let server = rt.spawn(api::serve(
        state.clone(),
        format!("127.0.0.1:{port}"),
        a.static_dir.clone(),
        move |addr| {
            let _ = ready_tx.send(addr);
        },
        async move {
            let _ = stop_rx.await;
        },
    ));
    let addr = match ready_rx.recv() {
        Ok(addr) => addr,
        Err(_) => {
            let e = rt.block_on(server).map_err(|e| fail(EXIT_INTERNAL, e))?;
            return Err(fail(EXIT_INTERNAL, format!("cannot bind port {port}: {e:?}")));
        }
    };
    eprintln!("review API listening on http://{addr}");
    let hooks = CliHooks { api: Some(state), total: a.iterations };
    let result = go(&hooks);
    let _ = stop_tx.send(());
    let _ = rt.block_on(server);
    finish(result, &a.out)
}

fn finish(result: Result<fecraft_core::engine::Session, EngineError>, out: &Path) -> Result<(), Failure> {
    let s = result?;
    let r = s.report(true);
    println!(
        "done: {} accepted, {} rejected, {} errors; ROC AUC {:.4} -> {:.4}; session in {}",
        r.accepted,
        r.rejected,
        r.errors,
        r.baseline.roc_auc,
        r.current.roc_auc,
        out.display()
    );
    Ok(())
}

fn cmd_apply(a: ApplyArgs) -> Result<(), Failure> {
    let script = read_script(&a.script)?;
    let table = load(&a.data, a.schema.as_deref(), &a.target)?;
    let out = execute(&script, &table).map_err(|e| fail(EXIT_DATA, e))?;
    write_csv(&out, &a.out).map_err(|e| fail(EXIT_INTERNAL, e))?;
    Ok(())
}

fn write_eval_report(report: &BenchReport, dir: &Path) -> Result<(), Failure> {
    let io = |e: std::io::Error| fail(EXIT_INTERNAL, e);
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut w = csv::Writer::from_path(dir.join("report.csv")).map_err(|e| fail(EXIT_INTERNAL, e))?;
    let header =
        ["dataset", "model", "without", "with", "mean_without", "std_without", "mean_with", "std_with", "delta"];
    w.write_record(header).map_err(|e| fail(EXIT_INTERNAL, e))?;
    for r in &report.rows {
        w.write_record([
            r.dataset.clone(),
            r.model.clone(),
            format_mean_std(r.mean_without, r.std_without),
            format_mean_std(r.mean_with, r.std_with),
            r.mean_without.to_string(),
            r.std_without.to_string(),
            r.mean_with.to_string(),
            r.std_with.to_string(),
            r.delta.to_string(),
        ])
        .map_err(|e| fail(EXIT_INTERNAL, e))?;
    }
    w.flush().map_err(io)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| fail(EXIT_INTERNAL, e))?;
    std::fs::write(dir.join("report.json"), json + "\n").map_err(io)?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let n = a.data.len();
    if a.target.len() != 1 && a.target.len() != n {
        return Err(fail(EXIT_USAGE, "give one --target, or one per --data"));
    }
    if !a.script.is_empty() && a.script.len() != n {
        return Err(fail(EXIT_USAGE, "give one --script per --data, or none"));
    }
    let mut datasets = vec![];
    for (i, path) in a.data.iter().enumerate() {
        let target = if a.target.len() == 1 { &a.target[0] } else { &a.target[i] };
        let table = load(path, a.schema.as_deref(), target)?;
        let script = match a.script.get(i) {
            Some(p) => read_script(p)?,
            None => FeatureScript::default(),
        };
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        datasets.push(BenchDataset { name, table, script });
    }
    let models: Vec<ModelSpec> = a.model.iter().map(|m| m.spec(a.seed)).collect();
    let report = run_benchmark(&datasets, &models, a.repetitions, a.seed)?;
    write_eval_report(&report, &a.out)?;

    println!("{:<24} {:<20} {:>12} {:>12} {:>9}", "dataset", "model", "without", "with", "delta");
    for r in &report.rows {
        println!(
            "{:<24} {:<20} {:>12} {:>12} {:>+9.4}",
            r.dataset,
            r.model,
            format_mean_std(r.mean_without, r.std_without),
            format_mean_std(r.mean_with, r.std_with),
            r.delta
        );
    }
    let seeds: Vec<String> = report.seeds.iter().map(|s| s.to_string()).collect();
    println!("{} repetitions, seeds: {}", report.repetitions, seeds.join(", "));
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let state = ApiState::from_dir(&a.session).map_err(|e| fail(EXIT_USAGE, e))?;
    let rt = runtime()?;
    rt.block_on(api::serve(
        state,
        a.bind.clone(),
        a.static_dir,
        |addr| eprintln!("serving {} on http://{addr}", a.session.display()),
        async {
            let _ = tokio::signal::ctrl_c().await;
        },
    ))
    .map_err(|e| fail(EXIT_INTERNAL, e))
}
