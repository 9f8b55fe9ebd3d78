//! `degradekit` command-line driver.
//!
//! Exit codes: 0 success, 1 partial or runtime failure, 2 invalid usage.

mod common;
mod count;
mod degrade;
mod demo;
mod embed;
mod eval;
mod gmad;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::{CliResult, Completion};

#[derive(Parser, Debug)]
#[command(name = "degradekit", version, about = "Synthetic degradation, contrastive training and IQA evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Degrade images and write a JSON Lines manifest.
    Degrade(degrade::DegradeArgs),
    /// Sample degradations without touching images.
    Sample(degrade::SampleArgs),
    /// Count the possible ordered compositions.
    Count(count::CountArgs),
    /// Print the severity ladder table.
    Ladder(count::LadderArgs),
    /// Train the projector on a corpus and report held-out retrieval.
    DemoTrain(demo::DemoArgs),
    /// Compute five-crop feature tables for a dataset.
    Embed(embed::EmbedArgs),
    /// Run the ridge-regression evaluation protocol.
    Eval(eval::EvalArgs),
    /// Select gMAD image pairs from two score tables.
    Gmad(gmad::GmadArgs),
}

fn dispatch(cmd: &Command) -> CliResult<Completion> {
    match cmd {
        Command::Degrade(a) => degrade::run(a),
        Command::Sample(a) => degrade::run_sample(a),
        Command::Count(a) => count::run(a),
        Command::Ladder(a) => count::run_ladder(a),
        Command::DemoTrain(a) => demo::run(a),
        Command::Embed(a) => embed::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Gmad(a) => gmad::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(Completion::Clean) => ExitCode::SUCCESS,
        Ok(Completion::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("degradekit: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
