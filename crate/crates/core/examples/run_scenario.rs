// Runs a bundled scenario file end to end and writes its report files.
//
// ```text
// cargo run --example run_scenario -- scenarios/neighbourhood.json /tmp/out
// ```

use lerc20::scenario;
use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    run(&args)
}

/// `[scenario] [out_dir]`, defaulting to the two-party scenario and a temp dir.
fn run(args: &[String]) -> ExitCode {
    let path = args.first().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/two_party.json")
    });
    let out = args
        .get(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lerc20-run"));
    match scenario::run(&path, &out) {
        Ok(output) => {
            for s in &output.report.settlements {
                println!(
                    "trade {}: {} Wh delivered, {} -> {} paid {}, compensation {}",
                    s.trade_id,
                    s.delivered,
                    s.buyer,
                    s.seller,
                    s.buyer_to_seller,
                    s.seller_to_buyer
                );
            }
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
