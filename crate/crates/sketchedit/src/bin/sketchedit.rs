use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sketchedit::cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(out) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sketchedit: error class={}: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
