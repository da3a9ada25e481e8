//! The lockable token ledger.
//!
//! A [`Ledger`] is a plain ERC20 balance/allowance book extended with
//! time-locked escrow locks. A lock makes part of an owner's balance
//! unspendable until a block height is reached; only the designated unlocking
//! address (the escrow) can then release it, either by transferring the
//! tokens to a recipient or by leaving them with the owner.
//!
//! Locks are keyed by `(unlocking_address, locking_address)`. Repeated locks on
//! one key aggregate into a single [`LockedEntity`] whose unlock height is the
//! maximum of the heights requested so far.

mod error;
mod export;
mod ledger;
mod snapshot;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use error::{SnapshotError, TokenError};
pub use export::{write_events_csv, EVENTS_CSV_HEADER};
pub use ledger::{Ledger, DEFAULT_BLOCK_TIME_S, TOKEN_NAME, TOKEN_SYMBOL};

/// Smallest indivisible token units.
pub type Amount = u128;

/// Block height.
pub type BlockNumber = u64;

/// Opaque account identifier. Never empty; ordered so that every map keyed by
/// addresses iterates deterministically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Address(String);

impl Address {
    pub fn new(label: impl Into<String>) -> Result<Self, TokenError> {
        let label = label.into();
        if label.is_empty() {
            return Err(TokenError::EmptyAddress);
        }
        Ok(Self(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Address {
    type Error = TokenError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Address> for String {
    fn from(value: Address) -> Self {
        value.0
    }
}

impl std::str::FromStr for Address {
    type Err = TokenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

/// One escrowed lock.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockedEntity {
    pub owner: Address,
    #[serde(with = "crate::decimal::unsigned")]
    pub amount: Amount,
    /// First block at which the lock may be released.
    pub block_no: BlockNumber,
    pub is_active: bool,
}

/// Kind of a [`LockEventRecord`]; the discriminant is the wire value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum LockStatus {
    Lock = 0,
    UnlockTransfer = 1,
    UnlockWithoutTransfer = 2,
}

impl From<LockStatus> for u8 {
    fn from(value: LockStatus) -> Self {
        value as u8
    }
}

impl TryFrom<u8> for LockStatus {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Self::Lock),
            1 => Ok(Self::UnlockTransfer),
            2 => Ok(Self::UnlockWithoutTransfer),
            other => Err(format!("invalid lock status {other}")),
        }
    }
}

/// Audit entry appended by every successful lock or unlock.
///
/// `no_blocks` is the requested lock period for lock records and 0 for unlock
/// records. `hour` and `min` are the UTC time of day of `timestamp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockEventRecord {
    pub owner: Address,
    pub locking_address: Address,
    #[serde(with = "crate::decimal::unsigned")]
    pub amount: Amount,
    pub no_blocks: BlockNumber,
    pub unlocking_address: Address,
    pub status: LockStatus,
    pub timestamp: u64,
    pub hour: u8,
    pub min: u8,
}
