use clap::Parser;
use photocert_cli::args::Cli;

fn main() {
    if let Err(e) = photocert_cli::run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
