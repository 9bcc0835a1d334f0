use clap::Parser;

fn main() {
    let cli = lcusim_cli::Cli::parse();
    std::process::exit(lcusim_cli::run(&cli));
}
