use std::process::ExitCode;

use argchat_service::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    argchat_service::init_tracing();
    run(Cli::parse())
}
