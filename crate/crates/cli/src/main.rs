mod align;
mod args;
mod error;
mod eval;
mod record;
mod synth;
mod train;

use clap::Parser;

use crate::args::{Cli, Command, ConfigFile};
use crate::error::CliResult;

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Synth(a) => synth::run(a.or(file.synth)),
        Command::Train(a) => train::run(a.or(file.train)),
        Command::Align(a) => align::run(a.or(file.align)),
        Command::Eval(a) => eval::run(a.or(file.eval)),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
