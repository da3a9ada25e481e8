//! Order throughput under a block gas limit.
//!
//! A block holds `floor(block_gas_limit / gas_per_tx)` transactions of one
//! kind, and a session of `t` seconds spans `floor(t / block_time_s)` blocks.
//! All capacity figures are exact integers.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io;
use thiserror::Error;

/// Order placement without the token lock.
pub const PLACE_ORDER_PLAIN: &str = "place_order_plain";
/// Order placement that also locks the order's tokens.
pub const PLACE_ORDER_WITH_LOCK: &str = "place_order_with_lock";

pub const DEFAULT_BLOCK_GAS_LIMIT: u64 = 15_000_000;
pub const DEFAULT_BLOCK_TIME_S: u64 = 15;
pub const DEFAULT_PLACE_ORDER_PLAIN_GAS: u64 = 348_774;
pub const DEFAULT_PLACE_ORDER_WITH_LOCK_GAS: u64 = 748_565;
/// Four hours.
pub const DEFAULT_SESSION_SECONDS: u64 = 14_400;

pub const THROUGHPUT_CSV_HEADER: [&str; 3] = ["t_seconds", "orders_plain", "orders_with_lock"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GasError {
    #[error("unknown operation {0:?}")]
    UnknownOperation(String),

    #[error("{0} must be positive")]
    NonPositive(String),

    #[error("capacity overflows")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGasParams", into = "RawGasParams")]
pub struct GasParams {
    block_gas_limit: u64,
    block_time_s: u64,
    gas_table: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGasParams {
    block_gas_limit: u64,
    block_time_s: u64,
    gas_table: BTreeMap<String, u64>,
}

impl TryFrom<RawGasParams> for GasParams {
    type Error = GasError;

    fn try_from(raw: RawGasParams) -> Result<Self, GasError> {
        GasParams::new(raw.block_gas_limit, raw.block_time_s, raw.gas_table)
    }
}

impl From<GasParams> for RawGasParams {
    fn from(p: GasParams) -> Self {
        RawGasParams {
            block_gas_limit: p.block_gas_limit,
            block_time_s: p.block_time_s,
            gas_table: p.gas_table,
        }
    }
}

impl Default for GasParams {
    fn default() -> Self {
        let gas_table = BTreeMap::from([
            (PLACE_ORDER_PLAIN.to_owned(), DEFAULT_PLACE_ORDER_PLAIN_GAS),
            (
                PLACE_ORDER_WITH_LOCK.to_owned(),
                DEFAULT_PLACE_ORDER_WITH_LOCK_GAS,
            ),
        ]);
        Self {
            block_gas_limit: DEFAULT_BLOCK_GAS_LIMIT,
            block_time_s: DEFAULT_BLOCK_TIME_S,
            gas_table,
        }
    }
}

fn positive(value: u64, what: impl Into<String>) -> Result<u64, GasError> {
    if value == 0 {
        Err(GasError::NonPositive(what.into()))
    } else {
        Ok(value)
    }
}

impl GasParams {
    pub fn new(
        block_gas_limit: u64,
        block_time_s: u64,
        gas_table: BTreeMap<String, u64>,
    ) -> Result<Self, GasError> {
        positive(block_gas_limit, "block_gas_limit")?;
        positive(block_time_s, "block_time_s")?;
        for (op, gas) in &gas_table {
            positive(*gas, format!("gas for {op}"))?;
        }
        Ok(Self {
            block_gas_limit,
            block_time_s,
            gas_table,
        })
    }

    pub fn block_gas_limit(&self) -> u64 {
        self.block_gas_limit
    }

    pub fn block_time_s(&self) -> u64 {
        self.block_time_s
    }

    pub fn gas_table(&self) -> &BTreeMap<String, u64> {
        &self.gas_table
    }

    pub fn gas_for(&self, op_name: &str) -> Result<u64, GasError> {
        self.gas_table
            .get(op_name)
            .copied()
            .ok_or_else(|| GasError::UnknownOperation(op_name.to_owned()))
    }

    pub fn set_block_gas_limit(&mut self, limit: u64) -> Result<(), GasError> {
        self.block_gas_limit = positive(limit, "block_gas_limit")?;
        Ok(())
    }

    pub fn set_block_time_s(&mut self, seconds: u64) -> Result<(), GasError> {
        self.block_time_s = positive(seconds, "block_time_s")?;
        Ok(())
    }

    pub fn set_gas(&mut self, op_name: impl Into<String>, gas: u64) -> Result<(), GasError> {
        let op_name = op_name.into();
        positive(gas, format!("gas for {op_name}"))?;
        self.gas_table.insert(op_name, gas);
        Ok(())
    }

    /// Whole transactions of `op_name` that fit in one block.
    pub fn orders_per_block(&self, op_name: &str) -> Result<u64, GasError> {
        Ok(self.block_gas_limit / self.gas_for(op_name)?)
    }

    /// Transactions of `op_name` that fit in the blocks mined during
    /// `session_seconds`.
    pub fn session_capacity(&self, op_name: &str, session_seconds: u64) -> Result<u64, GasError> {
        let per_block = self.orders_per_block(op_name)?;
        (session_seconds / self.block_time_s)
            .checked_mul(per_block)
            .ok_or(GasError::Overflow)
    }

    /// Compares plain and locking order placement over a session, sampling the
    /// cumulative capacity every `resolution_s` seconds. The last sample is
    /// always at `session_seconds`.
    pub fn overhead_report(
        &self,
        session_seconds: u64,
        resolution_s: u64,
    ) -> Result<OverheadReport, GasError> {
        positive(resolution_s, "resolution_s")?;
        let gas_plain = self.gas_for(PLACE_ORDER_PLAIN)?;
        let gas_with_lock = self.gas_for(PLACE_ORDER_WITH_LOCK)?;
        let per_block_plain = self.orders_per_block(PLACE_ORDER_PLAIN)?;
        let per_block_with_lock = self.orders_per_block(PLACE_ORDER_WITH_LOCK)?;

        let mut times: Vec<u64> = (0..=session_seconds)
            .step_by(usize::try_from(resolution_s).unwrap_or(usize::MAX))
            .collect();
        if times.last() != Some(&session_seconds) {
            times.push(session_seconds);
        }
        let rows = times
            .into_iter()
            .map(|t| {
                Ok(ThroughputRow {
                    t_seconds: t,
                    orders_plain: self.session_capacity(PLACE_ORDER_PLAIN, t)?,
                    orders_with_lock: self.session_capacity(PLACE_ORDER_WITH_LOCK, t)?,
                })
            })
            .collect::<Result<Vec<_>, GasError>>()?;

        Ok(OverheadReport {
            block_gas_limit: self.block_gas_limit,
            block_time_s: self.block_time_s,
            gas_plain,
            gas_with_lock,
            gas_delta: i128::from(gas_with_lock) - i128::from(gas_plain),
            orders_per_block_plain: per_block_plain,
            orders_per_block_with_lock: per_block_with_lock,
            throughput_ratio: (per_block_plain > 0)
                .then(|| per_block_with_lock as f64 / per_block_plain as f64),
            session_seconds,
            capacity_plain: self.session_capacity(PLACE_ORDER_PLAIN, session_seconds)?,
            capacity_with_lock: self.session_capacity(PLACE_ORDER_WITH_LOCK, session_seconds)?,
            rows,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub t_seconds: u64,
    pub orders_plain: u64,
    pub orders_with_lock: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub block_gas_limit: u64,
    pub block_time_s: u64,
    pub gas_plain: u64,
    pub gas_with_lock: u64,
    /// Extra gas the lock adds to an order; negative if overridden that way.
    pub gas_delta: i128,
    pub orders_per_block_plain: u64,
    pub orders_per_block_with_lock: u64,
    /// `orders_per_block_with_lock / orders_per_block_plain`, absent when no
    /// plain order fits in a block.
    pub throughput_ratio: Option<f64>,
    pub session_seconds: u64,
    pub capacity_plain: u64,
    pub capacity_with_lock: u64,
    pub rows: Vec<ThroughputRow>,
}

impl OverheadReport {
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(THROUGHPUT_CSV_HEADER)?;
        for row in &self.rows {
            w.write_record([
                row.t_seconds.to_string(),
                row.orders_plain.to_string(),
                row.orders_with_lock.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
