use std::io::Write;

use clap::Parser;
use ptlc::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, &mut out) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    let _ = out.flush();
    std::process::exit(code);
}
