// Orders per block and per session with and without the lock, at the
// default and at a doubled block gas limit.

use lerc20::gas::{GasParams, DEFAULT_SESSION_SECONDS, PLACE_ORDER_PLAIN, PLACE_ORDER_WITH_LOCK};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut params = GasParams::default();
    let report = params.overhead_report(DEFAULT_SESSION_SECONDS, 1_800)?;
    println!(
        "lock costs {} extra gas; {} vs {} orders per block (ratio {:.3})",
        report.gas_delta,
        report.orders_per_block_with_lock,
        report.orders_per_block_plain,
        report.throughput_ratio.unwrap_or(f64::NAN)
    );
    println!("{:>7} {:>8} {:>10}", "t [s]", "plain", "with lock");
    for row in &report.rows {
        println!(
            "{:>7} {:>8} {:>10}",
            row.t_seconds, row.orders_plain, row.orders_with_lock
        );
    }

    params.set_block_gas_limit(30_000_000)?;
    println!(
        "at 30M gas: {} plain, {} with lock per block",
        params.orders_per_block(PLACE_ORDER_PLAIN)?,
        params.orders_per_block(PLACE_ORDER_WITH_LOCK)?
    );

    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
