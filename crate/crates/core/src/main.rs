use std::io;
use std::process::ExitCode;

use clap::Parser;
use scholar_tracker::cli::{run, Cli, Env};
use scholar_tracker::fetcher::{SystemClock, UreqTransport};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let transport = UreqTransport::new();
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr();
    let mut env = Env { transport: &transport, clock: &SystemClock, stdout: &mut stdout, stderr: &mut stderr };
    let code = run(&cli, &mut env);
    ExitCode::from(code as u8)
}
