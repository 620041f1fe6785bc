use clap::Parser;
use kltl_synth::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
