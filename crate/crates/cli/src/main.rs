use clap::Parser;
use fermidicke_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = fermidicke_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
