use super::{Address, Amount};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("address must not be empty")]
    EmptyAddress,

    #[error("{account} has {available} unlocked tokens, {requested} requested")]
    InsufficientUnlockedBalance {
        account: Address,
        requested: Amount,
        available: Amount,
    },

    #[error("allowance of {spender} over {owner} is {available}, {requested} requested")]
    InsufficientAllowance {
        owner: Address,
        spender: Address,
        requested: Amount,
        available: Amount,
    },

    #[error("lock amount must be positive")]
    ZeroAmount,

    #[error(
        "lock slot ({unlocking_address}, {locking_address}) is held by {existing_owner}, not {owner}"
    )]
    LockSlotOwnerMismatch {
        unlocking_address: Address,
        locking_address: Address,
        existing_owner: Address,
        owner: Address,
    },

    #[error(
        "no releasable lock of {amount} for {owner} at ({unlocking_address}, {locking_address})"
    )]
    LockVerificationFailed {
        owner: Address,
        amount: Amount,
        unlocking_address: Address,
        locking_address: Address,
    },

    #[error("arithmetic overflow")]
    Overflow,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Json(#[from] serde_json::Error),

    #[error("inconsistent snapshot: {0}")]
    Inconsistent(String),
}
