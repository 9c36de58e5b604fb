use std::process::ExitCode;

use clap::Parser;
use explab::cli::{main_with, Cli};

fn main() -> ExitCode {
    env_logger::init();
    main_with(Cli::parse())
}
