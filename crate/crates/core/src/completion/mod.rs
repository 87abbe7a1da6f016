//! Sampling test-method completions and turning them into candidates.

mod http;
mod provider;
mod replay;

use std::collections::BTreeSet;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{extract_text, request_body, HttpProvider, HttpProviderConfig};
pub use provider::{CompletionRequest, Provider, ProviderError};
pub use replay::{RecordingProvider, ReplayEntry, ReplayProvider, ReplayStore, ScriptedProvider};

use crate::hash::sha256_hex;
use crate::java::{parse_method, print_tokens, ParseError, Token};
use crate::prompt::{PromptText, FENCE, SEED_MARKER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub n_samples: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.7,
            max_tokens: 256,
            n_samples: 10,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GatewayError::InvalidParams(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::InvalidParams("max_tokens must be > 0".into()));
        }
        if self.n_samples == 0 {
            return Err(GatewayError::InvalidParams("n_samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stable hash of everything that determines a single sample.
pub fn request_fingerprint(prompt: &str, params: &SamplingParams, sample_index: usize) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        prompt: &'a str,
        temperature: f64,
        max_tokens: u32,
        sample_index: usize,
    }
    let key = Key {
        prompt,
        temperature: params.temperature,
        max_tokens: params.max_tokens,
        sample_index,
    };
    sha256_hex(&serde_json::to_vec(&key).expect("plain struct serializes"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub text: String,
    pub provider_id: String,
    pub request_fingerprint: String,
    pub report_id: String,
    pub sample_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("invalid sampling parameters: {0}")]
    InvalidParams(String),
    #[error("unrecorded request {fingerprint} (sample {sample_index})")]
    Unrecorded { fingerprint: String, sample_index: usize },
    #[error("sample {sample_index} failed after {attempts} attempt(s): {source}")]
    Provider {
        sample_index: usize,
        attempts: u32,
        #[source]
        source: ProviderError,
    },
}

fn complete_with_retry(
    provider: &dyn Provider,
    request: &CompletionRequest<'_>,
    retry: &RetryPolicy,
) -> Result<String, GatewayError> {
    let attempts = retry.attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match provider.complete(request) {
            Ok(text) => return Ok(text),
            Err(ProviderError::Unrecorded(fingerprint)) => {
                return Err(GatewayError::Unrecorded {
                    fingerprint,
                    sample_index: request.sample_index,
                })
            }
            Err(e) if e.is_retryable() && attempt < attempts => {
                thread::sleep(retry.base_delay * 2u32.saturating_pow(attempt - 1));
            }
            Err(source) => {
                return Err(GatewayError::Provider {
                    sample_index: request.sample_index,
                    attempts: attempt,
                    source,
                })
            }
        }
    }
}

/// Draw `params.n_samples` completions. Requests may run concurrently; the
/// result is always in sample-index order. On failure the error of the lowest
/// failing index is returned.
pub fn sample(
    prompt: &PromptText,
    params: &SamplingParams,
    provider: &dyn Provider,
    retry: &RetryPolicy,
) -> Result<Vec<RawCompletion>, GatewayError> {
    params.validate()?;
    let results: Vec<Result<RawCompletion, GatewayError>> = (0..params.n_samples)
        .into_par_iter()
        .map(|sample_index| {
            let fingerprint = request_fingerprint(&prompt.text, params, sample_index);
            let request = CompletionRequest {
                prompt: &prompt.text,
                params,
                sample_index,
                fingerprint: &fingerprint,
            };
            let text = complete_with_retry(provider, &request, retry)?;
            Ok(RawCompletion {
                text,
                provider_id: provider.id().to_string(),
                request_fingerprint: fingerprint,
                report_id: prompt.report_id.clone(),
                sample_index,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Prefix of `text` before the first code fence.
pub fn truncate_at_fence(text: &str) -> &str {
    match text.find(FENCE) {
        Some(i) => &text[..i],
        None => text,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateOrigin {
    pub report_id: String,
    pub sample_index: usize,
}

impl CandidateOrigin {
    /// `<report_id>#<sample_index>`.
    pub fn id(&self) -> String {
        format!("{}#{}", self.report_id, self.sample_index)
    }
}

/// One generated test method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCandidate {
    pub source: String,
    pub method_name: String,
    pub token_seq: Vec<String>,
    pub token_set: BTreeSet<String>,
    /// Number of tokens inside the method body.
    pub tok_cnt: usize,
    pub origin: CandidateOrigin,
}

impl TestCandidate {
    /// Build a candidate from complete method source.
    pub fn from_source(source: String, origin: CandidateOrigin) -> Result<Self, ParseError> {
        let (tokens, shape) = parse_method(&source)?;
        let token_seq: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
        Ok(TestCandidate {
            method_name: shape.name.clone(),
            tok_cnt: shape.body_tokens(&tokens).len(),
            token_set: token_seq.iter().cloned().collect(),
            token_seq,
            source,
            origin,
        })
    }

    pub fn id(&self) -> String {
        self.origin.id()
    }

    /// Hash of the method source; keys fixture outcomes and verdict caches.
    pub fn source_hash(&self) -> String {
        sha256_hex(self.source.as_bytes())
    }

    /// Lexed tokens with kinds and spans; parse is guaranteed at construction.
    pub fn tokens(&self) -> Vec<Token> {
        crate::java::lex(&self.source).expect("candidate source lexed at construction")
    }

    /// Token sequence with the method name removed.
    pub fn normalized_tokens(&self) -> Vec<&str> {
        let name_index = parse_method(&self.source)
            .map(|(_, s)| s.name_index)
            .expect("candidate source parsed at construction");
        self.token_seq
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != name_index)
            .map(|(_, t)| t.as_str())
            .collect()
    }

    pub fn printed(&self) -> String {
        print_tokens(&self.token_seq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub origin: CandidateOrigin,
    pub diagnostic: String,
}

/// Seed marker + fenced-off completion, parsed as a single method.
pub fn to_candidate(raw: &RawCompletion) -> Result<TestCandidate, Rejection> {
    let origin = CandidateOrigin {
        report_id: raw.report_id.clone(),
        sample_index: raw.sample_index,
    };
    let source = format!("{SEED_MARKER}{}", truncate_at_fence(&raw.text));
    TestCandidate::from_source(source, origin.clone()).map_err(|e| Rejection {
        origin,
        diagnostic: e.to_string(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateBatch {
    pub candidates: Vec<TestCandidate>,
    pub rejections: Vec<Rejection>,
}

pub fn to_candidates(raws: &[RawCompletion]) -> CandidateBatch {
    let mut batch = CandidateBatch::default();
    for raw in raws {
        match to_candidate(raw) {
            Ok(c) => batch.candidates.push(c),
            Err(r) => batch.rejections.push(r),
        }
    }
    batch
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    fn raw(text: &str) -> RawCompletion {
        RawCompletion {
            text: text.into(),
            provider_id: "t".into(),
            request_fingerprint: "f".into(),
            report_id: "R-1".into(),
            sample_index: 0,
        }
    }

    fn prompt() -> PromptText {
        PromptText {
            text: "# t\n## Description\nd\n".into(),
            report_id: "R-1".into(),
        }
    }

    fn no_wait() -> RetryPolicy {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::ZERO,
        }
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_at_fence("Foo() { }\n```\nextra"), "Foo() { }\n");
        assert_eq!(truncate_at_fence("no fence"), "no fence");
        assert_eq!(truncate_at_fence("```abc"), "");
    }

    #[test]
    fn listing_style_candidate() {
        let c = to_candidate(&raw(
            "Equals() {\n assertFalse(MathUtils.equals(Double.NaN, Double.NaN));\n}\n```",
        ))
        .unwrap();
        assert_eq!(
            c.source,
            "public void testEquals() {\n assertFalse(MathUtils.equals(Double.NaN, Double.NaN));\n}\n"
        );
        assert_eq!(c.method_name, "testEquals");
        assert_eq!(c.id(), "R-1#0");
    }

    #[test]
    fn empty_body_candidate() {
        let c = to_candidate(&raw("X() {}")).unwrap();
        assert_eq!(c.tok_cnt, 0);
        assert_eq!(c.token_seq.len(), 7);
        assert_eq!(c.token_set.len(), 7);
    }

    #[test]
    fn truncated_completion_is_rejected() {
        let r = to_candidate(&raw("X() { if (")).unwrap_err();
        assert!(r.diagnostic.contains("unbalanced"), "{}", r.diagnostic);
    }

    #[test]
    fn fingerprint_depends_on_every_key_field() {
        let p = SamplingParams::default();
        let base = request_fingerprint("p", &p, 0);
        assert_eq!(base, request_fingerprint("p", &p, 0));
        assert_ne!(base, request_fingerprint("q", &p, 0));
        assert_ne!(base, request_fingerprint("p", &p, 1));
        assert_ne!(
            base,
            request_fingerprint(
                "p",
                &SamplingParams {
                    temperature: 0.8,
                    ..p.clone()
                },
                0
            )
        );
        assert_ne!(
            base,
            request_fingerprint(
                "p",
                &SamplingParams {
                    max_tokens: 128,
                    ..p.clone()
                },
                0
            )
        );
        // n_samples is not part of the key: a larger run reuses earlier samples.
        assert_eq!(
            base,
            request_fingerprint("p", &SamplingParams { n_samples: 50, ..p }, 0)
        );
    }

    #[test]
    fn zero_samples_is_invalid() {
        let params = SamplingParams {
            n_samples: 0,
            ..SamplingParams::default()
        };
        let provider = ScriptedProvider::new(vec![]);
        assert!(matches!(
            sample(&prompt(), &params, &provider, &no_wait()),
            Err(GatewayError::InvalidParams(_))
        ));
    }

    #[test]
    fn replay_returns_recorded_texts_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let store = ReplayStore::new(dir.path());
        let params = SamplingParams {
            n_samples: 3,
            ..SamplingParams::default()
        };
        for i in 0..3 {
            store
                .put(
                    &request_fingerprint(&prompt().text, &params, i),
                    &format!("T{i}() {{}}"),
                )
                .unwrap();
        }
        let out = sample(&prompt(), &params, &ReplayProvider::new(store), &no_wait()).unwrap();
        let texts: Vec<_> = out.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts, ["T0() {}", "T1() {}", "T2() {}"]);
        assert!(out.iter().enumerate().all(|(i, r)| r.sample_index == i));
    }

    #[test]
    fn replay_miss_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let params = SamplingParams {
            n_samples: 2,
            ..SamplingParams::default()
        };
        let err = sample(
            &prompt(),
            &params,
            &ReplayProvider::new(ReplayStore::new(dir.path())),
            &no_wait(),
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("unrecorded request"));
        assert!(matches!(err, GatewayError::Unrecorded { sample_index: 0, .. }));
    }

    struct Flaky {
        calls: AtomicUsize,
        failures: usize,
        error: ProviderError,
    }

    impl Provider for Flaky {
        fn id(&self) -> &str {
            "flaky"
        }
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<String, ProviderError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures {
                Err(self.error.clone())
            } else {
                Ok("X() {}".into())
            }
        }
    }

    fn one_sample() -> SamplingParams {
        SamplingParams {
            n_samples: 1,
            ..SamplingParams::default()
        }
    }

    #[test]
    fn retries_transport_errors() {
        let p = Flaky {
            calls: AtomicUsize::new(0),
            failures: 2,
            error: ProviderError::Transport("reset".into()),
        };
        assert!(sample(&prompt(), &one_sample(), &p, &no_wait()).is_ok());
        assert_eq!(p.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn gives_up_after_three_attempts() {
        let p = Flaky {
            calls: AtomicUsize::new(0),
            failures: 10,
            error: ProviderError::Status {
                status: 503,
                body: String::new(),
            },
        };
        let err = sample(&prompt(), &one_sample(), &p, &no_wait()).unwrap_err();
        assert!(matches!(
            err,
            GatewayError::Provider {
                sample_index: 0,
                attempts: 3,
                ..
            }
        ));
        assert_eq!(p.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let p = Flaky {
            calls: AtomicUsize::new(0),
            failures: 10,
            error: ProviderError::Status {
                status: 400,
                body: String::new(),
            },
        };
        assert!(sample(&prompt(), &one_sample(), &p, &no_wait()).is_err());
        assert_eq!(p.calls.load(Ordering::SeqCst), 1);
    }

    /// Emits a fence-free completion exactly `max_tokens` whitespace tokens long.
    struct MaxLength {
        seen: Mutex<Vec<usize>>,
    }

    impl Provider for MaxLength {
        fn id(&self) -> &str {
            "stub"
        }
        fn complete(&self, r: &CompletionRequest<'_>) -> Result<String, ProviderError> {
            self.seen.lock().unwrap().push(r.sample_index);
            Ok(vec!["x"; r.params.max_tokens as usize].join(" "))
        }
    }

    #[test]
    fn max_length_completion_passes_through() {
        let p = MaxLength {
            seen: Mutex::new(Vec::new()),
        };
        let params = SamplingParams {
            max_tokens: 16,
            n_samples: 4,
            ..SamplingParams::default()
        };
        let out = sample(&prompt(), &params, &p, &no_wait()).unwrap();
        assert_eq!(out.len(), 4);
        for r in &out {
            assert_eq!(r.text.split_whitespace().count(), 16);
            assert_eq!(truncate_at_fence(&r.text), r.text);
        }
        let mut seen = p.seen.lock().unwrap().clone();
        seen.sort();
        assert_eq!(seen, [0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn truncation_is_idempotent(s in ".{0,40}(```)?.{0,10}") {
            let once = truncate_at_fence(&s);
            prop_assert_eq!(truncate_at_fence(once), once);
            prop_assert!(!once.contains(FENCE));
        }

        #[test]
        fn accepted_candidates_relex_stably(
            name in "[A-Z][a-zA-Z0-9]{0,8}",
            stmts in proptest::collection::vec(
                prop_oneof![
                    Just("int x = 1;"),
                    Just("assertEquals(\"a b\", f(2.5));"),
                    Just("Foo f = new Foo<>();"),
                    Just("if (a >= b) { c++; }"),
                    Just("// note\n"),
                    Just("char c = '\\n';"),
                ],
                0..6,
            ),
        ) {
            let text = format!("{name}() {{\n{}\n}}\n```", stmts.join("\n"));
            let c = to_candidate(&raw(&text)).unwrap();
            let relexed = crate::java::lex_tokens(&c.printed()).unwrap();
            prop_assert_eq!(relexed, c.token_seq.clone());
        }
    }
}
