use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use argchat_core::harness::{run_exhaustive, run_suite};
use argchat_core::kb::{lint, parse_document, parse_paraphrases, Severity};
use argchat_core::nlu::DEFAULT_THRESHOLD;
use clap::{Args, Parser, Subcommand};

use crate::api;
use crate::config::{EncoderMode, FallbackMode, KbConfig, ServiceConfig, StoreMode};
use crate::remote::DEFAULT_TIMEOUT;
use crate::repl::{self, ReplOptions};

/// Environment variable holding the `Authorization` header value for remote
/// encoder and fallback endpoints.
pub const AUTH_ENV: &str = "ARGCHAT_REMOTE_AUTH";

#[derive(Debug, Parser)]
#[command(name = "argchat", version, about = "Argumentation-driven interview assistant")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP API and the web UI bundle.
    Serve(ServeArgs),
    /// Run one interview on the terminal.
    Repl(ReplArgs),
    /// Check a knowledge base for structural problems.
    Lint(KbPaths),
    /// Simulate interviews with random profiles and compare against the oracle.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct KbPaths {
    /// Argument graph file.
    #[arg(long)]
    pub kb: PathBuf,
    /// Paraphrase JSON file.
    #[arg(long)]
    pub paraphrases: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct KbArgs {
    #[command(flatten)]
    pub paths: KbPaths,
    /// Similarity threshold in (0, 1].
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// builtin or remote=URL.
    #[arg(long, default_value = "builtin")]
    pub encoder: EncoderMode,
    /// disabled, stub or remote=URL.
    #[arg(long, default_value = "disabled")]
    pub fallback: FallbackMode,
    /// Opening prompt shown to the user.
    #[arg(long)]
    pub greeting: Option<String>,
}

impl KbArgs {
    pub fn to_config(&self) -> KbConfig {
        let mut cfg = KbConfig::new(&self.paths.kb, &self.paths.paraphrases);
        cfg.threshold = self.threshold;
        cfg.encoder = self.encoder.clone();
        cfg.fallback = self.fallback.clone();
        cfg.auth = std::env::var(AUTH_ENV).ok().filter(|v| !v.is_empty());
        cfg.timeout = DEFAULT_TIMEOUT;
        if let Some(g) = &self.greeting {
            cfg.greeting = g.clone();
        }
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// memory or file=DIR.
    #[arg(long, default_value = "memory")]
    pub store: StoreMode,
    /// Directory with the web UI bundle, served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    /// Also explain why every other outcome was rejected.
    #[arg(long)]
    pub explain_verbose: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[arg(long, default_value_t = 10)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Every full profile with every possible opening fact instead of random cases.
    #[arg(long)]
    pub exhaustive: bool,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Serve(args) => serve(args),
        Command::Repl(args) => run_repl(args),
        Command::Lint(paths) => run_lint(paths),
        Command::Simulate(args) => simulate(args),
    }
}

fn serve(args: ServeArgs) -> ExitCode {
    let config = ServiceConfig {
        kb: args.kb.to_config(),
        listen: SocketAddr::new(args.host, args.port),
        store: args.store,
        static_dir: args.static_dir,
    };
    let manager = match config.build_manager() {
        Ok(m) => Arc::new(m),
        Err(e) => return fail(e),
    };
    let rt = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => return fail(e),
    };
    let result = rt.block_on(async move {
        let listener = api::bind(config.listen).await?;
        api::serve(listener, manager, config.static_dir, api::shutdown_signal()).await
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn run_repl(args: ReplArgs) -> ExitCode {
    let interviewer = match args.kb.to_config().build_interviewer() {
        Ok(iv) => iv,
        Err(e) => return fail(e),
    };
    let opts = ReplOptions {
        explain_verbose: args.explain_verbose,
    };
    match repl::run(&interviewer, io::stdin().lock(), io::stdout().lock(), opts) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn run_lint(paths: KbPaths) -> ExitCode {
    let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()));
    let (graph, para) = match (read(&paths.kb), read(&paths.paraphrases)) {
        (Ok(g), Ok(p)) => (g, p),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let doc = match parse_document(&graph) {
        Ok(d) => d,
        Err(e) => return fail(format!("{}: {e}", paths.kb.display())),
    };
    let para = match parse_paraphrases(&para) {
        Ok(p) => p,
        Err(e) => return fail(format!("{}: {e}", paths.paraphrases.display())),
    };
    let findings = lint(&doc, &para);
    let mut out = io::stdout().lock();
    for f in &findings {
        let _ = writeln!(out, "{f}");
    }
    let errors = findings.iter().filter(|f| f.severity == Severity::Error).count();
    let _ = writeln!(out, "{} finding(s), {errors} error(s)", findings.len());
    if errors > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(args: SimulateArgs) -> ExitCode {
    let interviewer = match args.kb.to_config().build_interviewer() {
        Ok(iv) => iv,
        Err(e) => return fail(e),
    };
    let report = if args.exhaustive {
        match run_exhaustive(&interviewer) {
            Ok(r) => r,
            Err(e) => return fail(e),
        }
    } else {
        if args.cases == 0 {
            return fail("--cases must be at least 1");
        }
        run_suite(&interviewer, args.cases, args.seed)
    };
    print!("{}", report.render_table());
    if let Some(path) = &args.json {
        let written = serde_json::to_string_pretty(&report)
            .map_err(|e| e.to_string())
            .and_then(|j| std::fs::write(path, j).map_err(|e| format!("cannot write {}: {e}", path.display())));
        if let Err(e) = written {
            return fail(e);
        }
    }
    if report.all_agree() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn serve_flags_parse() {
        let cli = Cli::try_parse_from([
            "argchat", "serve", "--kb", "k", "--paraphrases", "p", "--threshold", "0.8", "--port", "9000",
            "--encoder", "remote=http://e", "--fallback", "stub", "--store", "file=/tmp/x",
        ])
        .unwrap();
        let Command::Serve(s) = cli.command else { panic!() };
        assert_eq!(s.port, 9000);
        assert_eq!(s.kb.threshold, 0.8);
        assert_eq!(s.kb.encoder, EncoderMode::Remote("http://e".into()));
        assert_eq!(s.kb.fallback, FallbackMode::Stub);
        assert_eq!(s.store, StoreMode::File("/tmp/x".into()));
    }

    #[test]
    fn bad_mode_rejected() {
        assert!(Cli::try_parse_from(["argchat", "repl", "--kb", "k", "--paraphrases", "p", "--encoder", "x"]).is_err());
    }
}
