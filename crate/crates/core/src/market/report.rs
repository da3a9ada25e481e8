use super::{LockCountPoint, Order, Settlement, Trade};
use crate::token::{Address, BlockNumber};
use serde::{Deserialize, Serialize};
use std::io;

pub const LOCKS_CSV_HEADER: [&str; 2] = ["block", "active_locks"];

/// Change of an account's balance over a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFlow {
    pub account: Address,
    #[serde(with = "crate::decimal::signed")]
    pub net: i128,
}

/// Outcome of a closed session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: u64,
    pub operator: Address,
    pub escrow: Address,
    pub opened_at_block: BlockNumber,
    pub ends_at_block: BlockNumber,
    pub closed_at_block: BlockNumber,
    pub orders: Vec<Order>,
    pub trades: Vec<Trade>,
    pub settlements: Vec<Settlement>,
    /// One entry per account that placed an order, in address order.
    pub net_flows: Vec<NetFlow>,
    pub lock_count_series: Vec<LockCountPoint>,
}

impl SessionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn net_flow_of(&self, account: &Address) -> i128 {
        self.net_flows
            .iter()
            .find(|f| &f.account == account)
            .map_or(0, |f| f.net)
    }
}

pub fn write_lock_series_csv<W: io::Write>(series: &[LockCountPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOCKS_CSV_HEADER)?;
    for p in series {
        w.write_record([p.block.to_string(), p.active_locks.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
