use clap::Parser;

fn main() {
    let cli = lrno_cli::args::Cli::parse();
    std::process::exit(lrno_cli::run(cli));
}
