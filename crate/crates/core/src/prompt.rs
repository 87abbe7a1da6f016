//! Markdown prompt rendering.
//!
//! A prompt is zero or more solved examples followed by the target report,
//! ending with an open code fence and the seed `public void test` so that the
//! model continues with a test method:
//!
//! ~~~text
//! # {title}
//! ## Description
//! {description}
//!
//! ## Reproduction
//! >Provide a self-contained example that reproduces this issue.
//! ```
//! public void test
//! ~~~
//!
//! Example documents use the same shape with the fence closed after the
//! reference test. Documents are separated by one blank line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{BugReport, ExamplePair};

pub const SEED_MARKER: &str = "public void test";
pub const COMMAND_LINE: &str = ">Provide a self-contained example that reproduces this issue.";
pub const FENCE: &str = "```";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt asks for {wanted} examples but only {available} were supplied")]
    NotEnoughExamples { wanted: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    pub n_examples: usize,
    pub include_stack: bool,
    /// Constructor signatures of the suspected faulty class.
    pub constructor_info: Option<String>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            n_examples: 2,
            include_stack: false,
            constructor_info: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub text: String,
    pub report_id: String,
}

fn header(report: &BugReport) -> String {
    format!("# {}\n## Description\n{}\n", report.title, report.description)
}

fn reproduction_opening() -> String {
    format!("\n## Reproduction\n{COMMAND_LINE}\n{FENCE}\n")
}

/// A solved example: the report followed by its test in a closed fence.
pub fn render_example(pair: &ExamplePair) -> String {
    let mut doc = header(&pair.report);
    doc.push_str(&reproduction_opening());
    doc.push_str(&pair.test_source);
    doc.push('\n');
    doc.push_str(FENCE);
    doc
}

pub fn render_prompt(
    report: &BugReport,
    examples: &[ExamplePair],
    config: &PromptConfig,
) -> Result<PromptText, PromptError> {
    if config.n_examples > examples.len() {
        return Err(PromptError::NotEnoughExamples {
            wanted: config.n_examples,
            available: examples.len(),
        });
    }
    let mut text = String::new();
    for pair in &examples[..config.n_examples] {
        text.push_str(&render_example(pair));
        text.push_str("\n\n");
    }
    text.push_str(&header(report));
    if config.include_stack {
        if let Some(trace) = &report.stack_trace {
            text.push_str(&format!("\n## Stack Trace\n{FENCE}\n{trace}\n{FENCE}\n"));
        }
    }
    if let Some(ctors) = &config.constructor_info {
        text.push_str(&format!("\n## Constructors\n{FENCE}\n{ctors}\n{FENCE}\n"));
    }
    text.push_str(&reproduction_opening());
    text.push_str(SEED_MARKER);
    Ok(PromptText {
        text,
        report_id: report.id.clone(),
    })
}
