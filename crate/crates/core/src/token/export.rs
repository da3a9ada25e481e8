use super::LockEventRecord;
use std::io;

pub const EVENTS_CSV_HEADER: [&str; 10] = [
    "seq",
    "owner",
    "locking_address",
    "amount",
    "no_blocks",
    "unlocking_address",
    "status",
    "timestamp",
    "hour",
    "min",
];

/// Writes the lock event log as CSV, one row per record in append order.
/// `seq` counts from 0.
pub fn write_events_csv<W: io::Write>(events: &[LockEventRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENTS_CSV_HEADER)?;
    for (seq, e) in events.iter().enumerate() {
        w.write_record([
            seq.to_string(),
            e.owner.to_string(),
            e.locking_address.to_string(),
            e.amount.to_string(),
            e.no_blocks.to_string(),
            e.unlocking_address.to_string(),
            (e.status as u8).to_string(),
            e.timestamp.to_string(),
            e.hour.to_string(),
            e.min.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
