use clap::{Parser, Subcommand};
use lerc20::scenario::{self, GasOverrides, GasReportOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(version, about = "Lockable token energy-market runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a market session scenario and write its report files.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the order throughput table with and without token locks.
    GasReport {
        #[arg(long)]
        out: PathBuf,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// JSON file with gas settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gas_limit: Option<u64>,
        #[arg(long)]
        block_time_s: Option<u64>,
        #[arg(long)]
        session_seconds: Option<u64>,
        #[arg(long)]
        resolution_s: Option<u64>,
    },
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run { scenario, out } => scenario::run(&scenario, &out).map(|output| {
            println!(
                "session {}: {} orders, {} trades -> {}",
                output.report.session_id,
                output.report.orders.len(),
                output.report.trades.len(),
                out.display()
            );
        }),
        Command::GasReport {
            out,
            json,
            config,
            gas_limit,
            block_time_s,
            session_seconds,
            resolution_s,
        } => {
            let options = GasReportOptions {
                out,
                json_out: json,
                config,
                overrides: GasOverrides {
                    block_gas_limit: gas_limit,
                    block_time_s,
                    session_seconds,
                    resolution_s,
                    ..Default::default()
                },
            };
            scenario::gas_report(&options).map(|report| {
                println!(
                    "{} orders/block with lock, {} without",
                    report.orders_per_block_with_lock, report.orders_per_block_plain
                );
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
