use clap::Parser;

fn main() {
    let cli = kneading_cli::Cli::parse();
    std::process::exit(kneading_cli::run(&cli));
}
