//! Day-ahead peer-to-peer energy market session on top of the token ledger.
//!
//! A session moves through `Open -> Matching -> Delivery -> Closed`:
//!
//! * **Open**: every order locks `price * energy` tokens of its account until
//!   the session's end block. The lock is taken by the account's order agent
//!   (see [`MarketEngine::agent_for`]) and is releasable by the session escrow.
//! * **Matching**: once the session has ended the book is cleared by a
//!   merit-order double auction, each trade executing at the offer price.
//! * **Delivery**: each trade is settled against a meter reading. The buyer
//!   pays for delivered energy and gets the rest of its lock back; the seller's
//!   lock is collateral that is returned for delivered energy and paid to the
//!   buyer for any shortfall.
//! * **Closed**: leftover locks of unmatched energy are released to their
//!   owners and a [`SessionReport`] is produced.

mod engine;
mod matching;
mod report;

use crate::token::{Address, Amount, BlockNumber, TokenError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{MarketEngine, Session};
pub use report::{write_lock_series_csv, NetFlow, SessionReport, LOCKS_CSV_HEADER};

/// Watt-hours.
pub type EnergyQuantity = u64;

/// Token units per watt-hour.
pub type Price = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Sell,
    Buy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderStatus {
    Open,
    PartiallyMatched,
    Matched,
    Settled,
    Expired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Open,
    Matching,
    Delivery,
    Closed,
}

/// Tokens an order locks: its price times its energy.
pub fn order_tokens(price: Price, energy: EnergyQuantity) -> Amount {
    Amount::from(price) * Amount::from(energy)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: u64,
    pub side: Side,
    pub account: Address,
    pub energy: EnergyQuantity,
    pub price: Price,
    #[serde(with = "crate::decimal::unsigned")]
    pub tokens_locked: Amount,
    pub placed_at_block: BlockNumber,
    pub remaining_energy: EnergyQuantity,
    pub status: OrderStatus,
    /// Part of `tokens_locked` not yet released by settlement or close.
    #[serde(with = "crate::decimal::unsigned")]
    pub tokens_outstanding: Amount,
}

impl Order {
    pub fn matched_energy(&self) -> EnergyQuantity {
        self.energy - self.remaining_energy
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub id: u64,
    pub sell_order_id: u64,
    pub buy_order_id: u64,
    pub energy: EnergyQuantity,
    /// Execution price: the matched offer's price.
    pub price: Price,
    pub settled: bool,
    pub delivered: Option<EnergyQuantity>,
}

/// Metered delivery for one trade. Readings above the traded energy are
/// clamped to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterReading {
    pub trade_id: u64,
    pub delivered: EnergyQuantity,
}

/// Token movements of one settled trade.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settlement {
    pub trade_id: u64,
    pub seller: Address,
    pub buyer: Address,
    /// Delivered energy after clamping.
    pub delivered: EnergyQuantity,
    /// Payment for delivered energy.
    #[serde(with = "crate::decimal::unsigned")]
    pub buyer_to_seller: Amount,
    /// Seller collateral forfeited for undelivered energy.
    #[serde(with = "crate::decimal::unsigned")]
    pub seller_to_buyer: Amount,
    /// Buyer lock released without transfer: bid premium plus the unpaid
    /// part for undelivered energy.
    #[serde(with = "crate::decimal::unsigned")]
    pub buyer_released: Amount,
    /// Seller collateral released without transfer for delivered energy.
    #[serde(with = "crate::decimal::unsigned")]
    pub seller_released: Amount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockCountPoint {
    pub block: BlockNumber,
    /// Orders of the session still holding locked tokens.
    pub active_locks: usize,
    pub phase: SessionState,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("a session is already active")]
    SessionAlreadyActive,

    #[error("no session has been opened")]
    NoSession,

    #[error("session is not open for orders")]
    SessionNotOpen,

    #[error("session ends at block {ends_at}, current block is {current}")]
    SessionNotEnded {
        ends_at: BlockNumber,
        current: BlockNumber,
    },

    #[error("session is not in delivery")]
    SessionNotInDelivery,

    #[error("order energy must be positive")]
    ZeroEnergy,

    #[error("order price must be positive")]
    ZeroPrice,

    #[error("trade {0} not found")]
    TradeNotFound(u64),

    #[error("trade {0} is already settled")]
    TradeAlreadySettled(u64),

    #[error("{0} trades are not settled")]
    UnsettledTradesRemain(usize),

    #[error(transparent)]
    Token(#[from] TokenError),
}
