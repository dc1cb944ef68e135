use clap::Parser;

fn main() {
    let cli = coerr::cli::Cli::parse();
    std::process::exit(coerr::cli::execute(cli));
}
