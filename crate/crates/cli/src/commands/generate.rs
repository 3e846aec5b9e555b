use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use textmix::corpus::{generate_ai_reference, GenEndpointConfig};
use textmix::{Error, Result};

use crate::manifest::ManifestBuilder;

/// Generate an AI reference corpus through a chat-completion endpoint.
///
/// The auth secret is read from the environment variable named by
/// `--auth-env`; it never appears in configuration or manifests.
#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Prompt file, one prompt per line (blank lines skipped).
    #[arg(long)]
    pub prompts: PathBuf,
    /// Full URL of the chat-completion endpoint.
    #[arg(long)]
    pub endpoint: String,
    /// Model name sent in the request body.
    #[arg(long)]
    pub model_name: String,
    /// System message prepended to every prompt.
    #[arg(long, default_value = "")]
    pub system_prompt: String,
    /// Read the system message from a file instead.
    #[arg(long, conflicts_with = "system_prompt")]
    pub system_prompt_file: Option<PathBuf>,
    /// Environment variable holding the bearer token; empty for no auth.
    #[arg(long, default_value = "")]
    pub auth_env: String,
    /// Retries per prompt after the first attempt.
    #[arg(long, default_value_t = 3)]
    pub max_retries: usize,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    /// Bound on parallel in-flight requests.
    #[arg(long, default_value_t = 1)]
    pub concurrency: usize,
    /// Path to the completion text inside the response JSON.
    #[arg(long, default_value = "choices[0].message.content")]
    pub response_path: String,
    /// Output JSONL path for the generated records.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct GenerateSummary {
    written: usize,
    requested: usize,
    out: String,
}

pub fn run(args: &GenerateArgs, mb: &mut ManifestBuilder) -> Result<()> {
    mb.hash_input(&args.prompts)?;
    let text = std::fs::read_to_string(&args.prompts).map_err(|e| Error::Io {
        path: args.prompts.clone(),
        source: e,
    })?;
    let prompts: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();

    let system_prompt = match &args.system_prompt_file {
        Some(path) => {
            mb.hash_input(path)?;
            std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?
        }
        None => args.system_prompt.clone(),
    };

    let cfg = GenEndpointConfig {
        base_url: args.endpoint.clone(),
        auth_token_env_var: args.auth_env.clone(),
        model_name: args.model_name.clone(),
        system_prompt,
        max_retries: args.max_retries,
        timeout_s: args.timeout,
        response_path: args.response_path.clone(),
        concurrency: args.concurrency,
    };
    let written = generate_ai_reference(&prompts, &cfg, &args.out)?;
    let summary = GenerateSummary {
        written,
        requested: prompts.len(),
        out: args.out.display().to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(())
}
