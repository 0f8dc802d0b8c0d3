//! `mavar check | run | verify`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mavar_core::engine::{EngineConfig, DEFAULT_MAX_CASCADE_DEPTH};
use mavar_core::validate::Origin;
use mavar_core::{validate, ContextStore, ContextValue, FeatureId, RuleSet, SceneModel, Workflow};

use crate::compare::{compare_traces, Verdict};
use crate::rules_dsl::parse_rules;
use crate::scenario::{parse_scenario, run_scenario, Scenario, Setup};
use crate::scene_file::parse_scene;
use crate::state::{load_state, render_state};
use crate::workflow_file::parse_workflow;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Mismatch = 1,
    Input = 2,
    Runtime = 3,
}

pub const USE_COUNT: &str = "user.app_use_count";

#[derive(Debug, Parser)]
#[command(name = "mavar", version, about = "Replay and verify context-adaptive UI rule sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a rule set, optionally against a scene and workflow.
    Check(CheckArgs),
    /// Replay a scenario and print its trace.
    Run(RunArgs),
    /// Replay a scenario and compare the trace with a golden file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub workflow: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunInputs {
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub workflow: Option<PathBuf>,
    /// Persisted context; `user.app_use_count` is incremented on every run.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_CASCADE_DEPTH, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_cascade: u32,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inputs: RunInputs,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub inputs: RunInputs,
    #[arg(long)]
    pub golden: PathBuf,
}

/// Runs the command line `args` (including the program name).
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{}", text);
                return Exit::Input;
            }
            let _ = write!(out, "{}", text);
            return Exit::Ok;
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(&a, err),
        Command::Run(a) => run(&a, out, err),
        Command::Verify(a) => verify(&a, err),
    };
    result.unwrap_or_else(|code| code)
}

fn read(path: &Path, err: &mut dyn Write) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "{}: error: cannot read: {}", path.display(), e);
        Exit::Input
    })
}

fn parsed<T, E: std::fmt::Display>(
    path: &Path,
    result: Result<T, E>,
    line: impl Fn(&E) -> usize,
    err: &mut dyn Write,
) -> Result<T, Exit> {
    result.map_err(|e| {
        let _ = writeln!(err, "{}:{}: error: {}", path.display(), line(&e), e);
        Exit::Input
    })
}

struct Loaded {
    rules: RuleSet,
    scene: Option<SceneModel>,
    workflow: Option<Workflow>,
}

fn load(rules: &Path, scene: Option<&Path>, workflow: Option<&Path>, err: &mut dyn Write) -> Result<Loaded, Exit> {
    let text = read(rules, err)?;
    let rule_set = parsed(rules, parse_rules(&text), |e| e.line(), err)?;
    let scene = match scene {
        Some(p) => {
            let text = read(p, err)?;
            Some(parsed(p, parse_scene(&text), |e| e.line(), err)?)
        }
        None => None,
    };
    let wf = match workflow {
        Some(p) => {
            let text = read(p, err)?;
            Some(parsed(p, parse_workflow(&text), |e| e.line(), err)?)
        }
        None => None,
    };
    let diagnostics = validate(&rule_set, scene.as_ref(), wf.as_ref());
    let mut failed = false;
    for d in &diagnostics {
        let file = match d.origin {
            Origin::Rules => rules,
            Origin::Workflow => workflow.unwrap_or(rules),
        };
        let _ = writeln!(err, "{}:{}: {}", file.display(), d.line, d);
        failed |= d.is_error();
    }
    if failed {
        return Err(Exit::Input);
    }
    Ok(Loaded {
        rules: rule_set,
        scene,
        workflow: wf,
    })
}

fn check(a: &CheckArgs, err: &mut dyn Write) -> Result<Exit, Exit> {
    load(&a.rules, a.scene.as_deref(), a.workflow.as_deref(), err)?;
    Ok(Exit::Ok)
}

struct Prepared {
    setup: Setup,
    scenario: Scenario,
    store: ContextStore,
}

/// Loads every input and, with `--state-file`, bumps and saves the use
/// count before the run.
fn prepare(a: &RunInputs, err: &mut dyn Write) -> Result<Prepared, Exit> {
    let loaded = load(&a.rules, Some(&a.scene), a.workflow.as_deref(), err)?;
    let text = read(&a.scenario, err)?;
    let scenario = parsed(&a.scenario, parse_scenario(&text), |e| e.line(), err)?;
    let mut store = ContextStore::new();
    if let Some(path) = &a.state_file {
        store = if path.exists() {
            let text = read(path, err)?;
            parsed(path, load_state(&text), |e| e.line, err)?
        } else {
            ContextStore::new()
        };
        let count = FeatureId::parse(USE_COUNT).expect("valid id");
        let next = match store.get_feature(&count) {
            Ok(ContextValue::Int(n)) => n.checked_add(1),
            Ok(_) => None,
            Err(_) => Some(1),
        };
        let Some(next) = next else {
            let _ = writeln!(
                err,
                "{}: error: {} must be an integer below the maximum",
                path.display(),
                USE_COUNT
            );
            return Err(Exit::Input);
        };
        store
            .set_feature(&count, ContextValue::Int(next))
            .expect("type checked above");
        store.drain_dirty();
        if let Err(e) = fs::write(path, render_state(&store)) {
            let _ = writeln!(err, "{}: error: cannot write: {}", path.display(), e);
            return Err(Exit::Input);
        }
    }
    Ok(Prepared {
        setup: Setup {
            rules: loaded.rules,
            scene: loaded.scene.expect("scene is required"),
            workflow: loaded.workflow,
            config: EngineConfig {
                max_cascade_depth: a.max_cascade,
            },
        },
        scenario,
        store,
    })
}

/// Replays and returns the trace text plus the runtime error, if any.
fn replay(p: Prepared, scenario_path: &Path, err: &mut dyn Write) -> Result<(String, Option<String>), Exit> {
    let report = run_scenario(&p.setup, &p.scenario, p.store).map_err(|e| {
        let _ = writeln!(err, "{}: error: {}", scenario_path.display(), e);
        Exit::Input
    })?;
    Ok((report.trace_text(), report.error.map(|e| e.to_string())))
}

fn run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, Exit> {
    let prepared = prepare(&a.inputs, err)?;
    let (trace, failure) = replay(prepared, &a.inputs.scenario, err)?;
    match &a.trace {
        Some(path) => {
            if let Err(e) = fs::write(path, &trace) {
                let _ = writeln!(err, "{}: error: cannot write: {}", path.display(), e);
                return Err(Exit::Input);
            }
        }
        None => {
            let _ = out.write_all(trace.as_bytes());
        }
    }
    match failure {
        Some(msg) => {
            let _ = writeln!(err, "error: {}", msg);
            Ok(Exit::Runtime)
        }
        None => Ok(Exit::Ok),
    }
}

fn verify(a: &VerifyArgs, err: &mut dyn Write) -> Result<Exit, Exit> {
    let golden = read(&a.golden, err)?;
    let prepared = prepare(&a.inputs, err)?;
    let (trace, failure) = replay(prepared, &a.inputs.scenario, err)?;
    if let v @ Verdict::Mismatch { .. } = compare_traces(&trace, &golden) {
        let _ = writeln!(err, "{}: {}", a.golden.display(), v);
        return Ok(Exit::Mismatch);
    }
    match failure {
        Some(msg) => {
            let _ = writeln!(err, "error: {}", msg);
            Ok(Exit::Runtime)
        }
        None => Ok(Exit::Ok),
    }
}
