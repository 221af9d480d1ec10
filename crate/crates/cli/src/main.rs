use std::process::ExitCode;

use clap::Parser;

use sensyn_cli::args::Cli;
use sensyn_cli::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match sensyn_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let kind = match e {
                CliError::Usage(_) => "usage error",
                CliError::Runtime(_) => "error",
            };
            eprintln!("{kind}: {e}");
            ExitCode::from(code as u8)
        }
    }
}
