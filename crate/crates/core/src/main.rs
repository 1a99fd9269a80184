use clap::Parser;
use rdg_core::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = execute(&cli, &mut std::io::stdout());
    std::process::exit(code);
}
