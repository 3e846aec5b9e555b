//! AI reference-corpus generation through a chat-completion-style endpoint.
//!
//! Each prompt is sent as a `{model, messages:[...]}` POST; the completion
//! text is extracted from the response JSON at a configurable path and
//! written out as a JSONL record labeled `ai`. Failed prompts are retried,
//! then logged and skipped; only a total failure is an error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::corpus::{MetaValue, Metadata, RawRecord, SourceLabel};
use crate::error::{Error, Result};

/// Configuration of the generation endpoint.
///
/// The auth secret is only ever read from the environment variable named in
/// `auth_token_env_var`, never stored in configuration.
#[derive(Debug, Clone, Serialize)]
pub struct GenEndpointConfig {
    /// Full URL of the chat-completion endpoint.
    pub base_url: String,
    /// Name of the environment variable holding the bearer token.
    /// Empty means the endpoint needs no auth header.
    pub auth_token_env_var: String,
    pub model_name: String,
    pub system_prompt: String,
    /// Retries after the first attempt, per prompt.
    pub max_retries: usize,
    pub timeout_s: f64,
    /// Dot/bracket path to the completion text in the response JSON.
    pub response_path: String,
    /// Bound on parallel in-flight requests.
    pub concurrency: usize,
}

impl GenEndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        GenEndpointConfig {
            base_url: base_url.into(),
            auth_token_env_var: String::new(),
            model_name: model_name.into(),
            system_prompt: String::new(),
            max_retries: 3,
            timeout_s: 30.0,
            response_path: "choices[0].message.content".into(),
            concurrency: 1,
        }
    }
}

/// Send every prompt to the endpoint and append the completions to
/// `out_path` as JSONL records with `label: "ai"`.
///
/// Returns the number of records written. Prompts that still fail after
/// `max_retries` retries are logged and skipped; if every prompt fails the
/// whole call fails with a transport error.
pub fn generate_ai_reference(
    prompts: &[String],
    cfg: &GenEndpointConfig,
    out_path: &Path,
) -> Result<usize> {
    if prompts.is_empty() {
        return Err(Error::InvalidConfig("no prompts to send".into()));
    }
    let token = if cfg.auth_token_env_var.is_empty() {
        None
    } else {
        Some(std::env::var(&cfg.auth_token_env_var).map_err(|_| {
            Error::Auth(format!(
                "environment variable {} is not set",
                cfg.auth_token_env_var
            ))
        })?)
    };

    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs_f64(cfg.timeout_s))
        .build()
        .map_err(|e| Error::Transport(e.to_string()))?;

    let results = run_prompts(&client, cfg, token.as_deref(), prompts);

    let file = File::create(out_path).map_err(|e| Error::io(out_path, e))?;
    let mut writer = BufWriter::new(file);
    let mut written = 0usize;
    let mut last_failure = String::new();
    for (idx, result) in results.into_iter().enumerate() {
        match result {
            Ok(text) => {
                let mut meta = Metadata::new();
                meta.insert("prompt_index".into(), MetaValue::Num(idx as f64));
                meta.insert("model".into(), MetaValue::Str(cfg.model_name.clone()));
                let record = RawRecord {
                    id: format!("gen{idx:05}"),
                    text,
                    meta,
                    label: SourceLabel::Ai,
                };
                let line =
                    serde_json::to_string(&record).map_err(|e| Error::Transport(e.to_string()))?;
                writeln!(writer, "{line}").map_err(|e| Error::io(out_path, e))?;
                written += 1;
            }
            Err(reason) => {
                log::warn!(
                    "prompt {idx} skipped after {} retries: {reason}",
                    cfg.max_retries
                );
                last_failure = reason;
            }
        }
    }
    writer.flush().map_err(|e| Error::io(out_path, e))?;

    if written == 0 {
        return Err(Error::Transport(format!(
            "all {} prompts failed (last: {last_failure})",
            prompts.len()
        )));
    }
    Ok(written)
}

fn run_prompts(
    client: &reqwest::blocking::Client,
    cfg: &GenEndpointConfig,
    token: Option<&str>,
    prompts: &[String],
) -> Vec<std::result::Result<String, String>> {
    let workers = cfg.concurrency.clamp(1, prompts.len());
    if workers == 1 {
        return prompts
            .iter()
            .map(|p| request_with_retries(client, cfg, token, p))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<std::result::Result<String, String>>>> =
        Mutex::new(vec![None; prompts.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= prompts.len() {
                    break;
                }
                let outcome = request_with_retries(client, cfg, token, &prompts[idx]);
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every prompt index was claimed by a worker"))
        .collect()
}

fn request_with_retries(
    client: &reqwest::blocking::Client,
    cfg: &GenEndpointConfig,
    token: Option<&str>,
    prompt: &str,
) -> std::result::Result<String, String> {
    let mut last = String::new();
    for attempt in 0..=cfg.max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(250 * attempt as u64));
        }
        match request_once(client, cfg, token, prompt) {
            Ok(text) => return Ok(text),
            Err(reason) => last = reason,
        }
    }
    Err(last)
}

fn request_once(
    client: &reqwest::blocking::Client,
    cfg: &GenEndpointConfig,
    token: Option<&str>,
    prompt: &str,
) -> std::result::Result<String, String> {
    let mut messages = Vec::new();
    if !cfg.system_prompt.is_empty() {
        messages.push(json!({"role": "system", "content": cfg.system_prompt}));
    }
    messages.push(json!({"role": "user", "content": prompt}));
    let body = json!({"model": cfg.model_name, "messages": messages});

    let mut request = client.post(&cfg.base_url).json(&body);
    if let Some(token) = token {
        request = request.bearer_auth(token);
    }
    let response = request.send().map_err(|e| e.to_string())?;
    let status = response.status();
    if !status.is_success() {
        return Err(format!("endpoint returned status {status}"));
    }
    let value: Value = response.json().map_err(|e| e.to_string())?;
    let text = extract_path(&value, &cfg.response_path)
        .and_then(Value::as_str)
        .ok_or_else(|| format!("response has no string at {:?}", cfg.response_path))?;
    Ok(text.to_string())
}

/// Walk a dot/bracket path like `choices[0].message.content` through a JSON value.
fn extract_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    let mut current = value;
    for segment in path.split('.') {
        let (name, indices) = parse_segment(segment)?;
        if !name.is_empty() {
            current = current.get(name)?;
        }
        for idx in indices {
            current = current.get(idx)?;
        }
    }
    Some(current)
}

fn parse_segment(segment: &str) -> Option<(&str, Vec<usize>)> {
    let bracket = segment.find('[').unwrap_or(segment.len());
    let name = &segment[..bracket];
    let mut indices = Vec::new();
    let mut rest = &segment[bracket..];
    while let Some(stripped) = rest.strip_prefix('[') {
        let close = stripped.find(']')?;
        indices.push(stripped[..close].parse().ok()?);
        rest = &stripped[close + 1..];
    }
    if rest.is_empty() {
        Some((name, indices))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;

    #[test]
    fn extract_path_walks_objects_and_arrays() {
        let v = json!({"choices": [{"message": {"content": "hi"}}], "alt": [["x"]]});
        assert_eq!(
            extract_path(&v, "choices[0].message.content").and_then(Value::as_str),
            Some("hi")
        );
        assert_eq!(
            extract_path(&v, "alt[0][0]").and_then(Value::as_str),
            Some("x")
        );
        assert!(extract_path(&v, "choices[1].message").is_none());
        assert!(extract_path(&v, "nope").is_none());
    }

    #[test]
    fn empty_prompts_are_a_precondition_error() {
        let cfg = GenEndpointConfig::new("http://127.0.0.1:1/v1", "m");
        let out = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            generate_ai_reference(&[], &cfg, out.path()).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }

    #[test]
    fn missing_auth_env_var_is_an_auth_error() {
        let mut cfg = GenEndpointConfig::new("http://127.0.0.1:1/v1", "m");
        cfg.auth_token_env_var = "TEXTMIX_TEST_UNSET_TOKEN_VAR".into();
        let out = tempfile::NamedTempFile::new().unwrap();
        let err = generate_ai_reference(&["p".to_string()], &cfg, out.path()).unwrap_err();
        assert!(matches!(err, Error::Auth(_)));
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let mut cfg = GenEndpointConfig::new("http://127.0.0.1:1/v1/chat", "m");
        cfg.max_retries = 0;
        cfg.timeout_s = 2.0;
        let out = tempfile::NamedTempFile::new().unwrap();
        let err = generate_ai_reference(&["p".to_string()], &cfg, out.path()).unwrap_err();
        assert!(matches!(err, Error::Transport(_)));
    }

    /// Minimal HTTP/1.1 server answering `n` chat-completion requests.
    /// Requests whose user content contains "FAIL" get a 500.
    fn spawn_mock_server(n: usize) -> (String, std::thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            for _ in 0..n {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let trimmed = line.trim();
                    if trimmed.is_empty() {
                        break;
                    }
                    if let Some(rest) = trimmed.to_ascii_lowercase().strip_prefix("content-length:")
                    {
                        content_length = rest.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0u8; content_length];
                reader.read_exact(&mut body).unwrap();
                let body: Value = serde_json::from_slice(&body).unwrap();
                let user = body["messages"]
                    .as_array()
                    .and_then(|m| m.last())
                    .and_then(|m| m["content"].as_str())
                    .unwrap_or("");
                let (status, payload) = if user.contains("FAIL") {
                    ("500 Internal Server Error", json!({"error": "boom"}))
                } else {
                    (
                        "200 OK",
                        json!({"choices": [{"message": {"content": format!("echo: {user}")}}]}),
                    )
                };
                let payload = payload.to_string();
                let response = format!(
                    "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                stream.write_all(response.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    #[test]
    fn successful_prompts_are_written_in_order() {
        let (url, server) = spawn_mock_server(3);
        let mut cfg = GenEndpointConfig::new(url, "test-model");
        cfg.system_prompt = "You write reviews.".into();
        cfg.max_retries = 0;
        let out = tempfile::NamedTempFile::new().unwrap();
        let prompts: Vec<String> = (0..3).map(|i| format!("prompt {i}")).collect();
        let written = generate_ai_reference(&prompts, &cfg, out.path()).unwrap();
        server.join().unwrap();
        assert_eq!(written, 3);

        let lines: Vec<String> = BufReader::new(File::open(out.path()).unwrap())
            .lines()
            .map(|l| l.unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        for (i, line) in lines.iter().enumerate() {
            let rec: RawRecord = serde_json::from_str(line).unwrap();
            assert_eq!(rec.text, format!("echo: prompt {i}"));
            assert_eq!(rec.label, SourceLabel::Ai);
            assert_eq!(rec.id, format!("gen{i:05}"));
        }
    }

    #[test]
    fn permanently_failing_prompt_is_skipped() {
        // 1 retry for the failing prompt: 2 good + 2 attempts at the bad one.
        let (url, server) = spawn_mock_server(4);
        let mut cfg = GenEndpointConfig::new(url, "test-model");
        cfg.max_retries = 1;
        let out = tempfile::NamedTempFile::new().unwrap();
        let prompts = vec![
            "one".to_string(),
            "FAIL please".to_string(),
            "two".to_string(),
        ];
        let written = generate_ai_reference(&prompts, &cfg, out.path()).unwrap();
        server.join().unwrap();
        assert_eq!(written, 2);
        let lines: Vec<String> = BufReader::new(File::open(out.path()).unwrap())
            .lines()
            .map(|l| l.unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
    }
}
