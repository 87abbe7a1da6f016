//! Turn natural-language bug reports into ranked, executable candidate
//! bug-reproducing tests.
//!
//! The pipeline stages map onto modules:
//!
//! * [`report`]: bug reports, few-shot examples, dataset manifests
//! * [`prompt`]: Markdown prompt rendering
//! * [`completion`]: sampling completions (live or replayed) and parsing them
//! * [`java`]: lexing and indexing of the target project's Java sources
//! * [`inject`]: host class selection, import resolution and test injection
//! * [`harness`]: running injected tests on buggy and fixed versions
//! * [`select`]: failure clustering, the agreement gate and ranking
//! * [`metrics`]: acc@n, precision, recall and wasted effort
//! * [`mining`]: issue-linked test additions in commit histories
//! * [`pipeline`]: one bug from report to ranking

pub mod completion;
pub mod harness;
mod hash;
pub mod inject;
pub mod java;
pub mod metrics;
pub mod mining;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod select;

pub use completion::{RawCompletion, SamplingParams, TestCandidate};
pub use harness::{CandidateVerdict, ExecutionRecord, FailureOutput, RunStatus, Runner, Version};
pub use hash::sha256_hex;
pub use inject::{InjectionConfig, InjectionPlan, MatchResult, ModifiedSuite};
pub use java::{SourceIndex, TestClassInfo};
pub use metrics::{BugOutcome, EvaluationReport};
pub use pipeline::{BugRun, ExecutionConfig, ProjectPair};
pub use prompt::{PromptConfig, PromptText};
pub use report::{BugReport, DatasetManifest, ExamplePair};
pub use select::{FailureKey, RankedSuggestions, SelectionConfig};
