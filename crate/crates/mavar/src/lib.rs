//! File formats, scenario replay and the `mavar` command line for the
//! [`mavar_core`] adaptation engine.

pub mod cli;
pub mod compare;
pub mod lex;
pub mod rules_dsl;
pub mod scenario;
pub mod scene_file;
pub mod state;
pub mod workflow_file;

pub use compare::{compare_traces, Verdict};
pub use rules_dsl::{parse_rules, pretty_print, RulesError};
pub use scenario::{parse_scenario, run_scenario, run_scenario_observed, RunReport, Scenario, ScenarioError, Setup};
pub use scene_file::{parse_scene, SceneFileError};
pub use state::{load_state, save_state, MalformedStateFile};
pub use workflow_file::{parse_workflow, WorkflowFileError};
