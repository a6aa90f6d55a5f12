use clap::Parser;

fn main() {
    let args = qsd_cli::Args::parse();
    std::process::exit(qsd_cli::run_cli(&args));
}
