use clap::Parser;

fn main() {
    let cli = scanmax::cli::Cli::parse();
    if let Err(e) = scanmax::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
