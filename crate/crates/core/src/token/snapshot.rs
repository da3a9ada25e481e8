//! JSON snapshot of a whole [`Ledger`]. Amounts are written as decimal strings.

use super::{
    Address, Amount, BlockNumber, Ledger, LockEventRecord, LockedEntity, SnapshotError, TOKEN_NAME,
    TOKEN_SYMBOL,
};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerSnapshot {
    name: String,
    symbol: String,
    #[serde(with = "crate::decimal::unsigned")]
    total_supply: Amount,
    current_block: BlockNumber,
    genesis_time: u64,
    block_time_s: u64,
    balances: Vec<BalanceEntry>,
    allowances: Vec<AllowanceEntry>,
    locks: Vec<LockEntry>,
    locked_balances: Vec<BalanceEntry>,
    events: Vec<LockEventRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BalanceEntry {
    address: Address,
    #[serde(with = "crate::decimal::unsigned")]
    amount: Amount,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllowanceEntry {
    owner: Address,
    spender: Address,
    #[serde(with = "crate::decimal::unsigned")]
    amount: Amount,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LockEntry {
    unlocking_address: Address,
    locking_address: Address,
    owner: Address,
    #[serde(with = "crate::decimal::unsigned")]
    amount: Amount,
    block_no: BlockNumber,
    is_active: bool,
}

fn balance_entries<'a>(it: impl Iterator<Item = (&'a Address, Amount)>) -> Vec<BalanceEntry> {
    it.map(|(address, amount)| BalanceEntry {
        address: address.clone(),
        amount,
    })
    .collect()
}

impl Ledger {
    pub fn to_json(&self) -> String {
        let snapshot = LedgerSnapshot {
            name: TOKEN_NAME.to_owned(),
            symbol: TOKEN_SYMBOL.to_owned(),
            total_supply: self.total_supply,
            current_block: self.current_block,
            genesis_time: self.genesis_time,
            block_time_s: self.block_time_s,
            balances: balance_entries(self.balances()),
            allowances: self
                .allowances()
                .map(|((owner, spender), amount)| AllowanceEntry {
                    owner: owner.clone(),
                    spender: spender.clone(),
                    amount,
                })
                .collect(),
            locks: self
                .locks()
                .map(|(u, l, e)| LockEntry {
                    unlocking_address: u.clone(),
                    locking_address: l.clone(),
                    owner: e.owner.clone(),
                    amount: e.amount,
                    block_no: e.block_no,
                    is_active: e.is_active,
                })
                .collect(),
            locked_balances: balance_entries(self.locked_balances()),
            events: self.event_log.clone(),
        };
        serde_json::to_string_pretty(&snapshot).expect("snapshot serialization is infallible")
    }

    /// Restores a ledger written by [`Ledger::to_json`], rejecting snapshots
    /// that violate any ledger invariant.
    pub fn from_json(json: &str) -> Result<Self, SnapshotError> {
        let snapshot: LedgerSnapshot = serde_json::from_str(json)?;
        let inconsistent = |msg: String| Err(SnapshotError::Inconsistent(msg));

        if snapshot.name != TOKEN_NAME || snapshot.symbol != TOKEN_SYMBOL {
            return inconsistent(format!(
                "token is {}/{}, expected {TOKEN_NAME}/{TOKEN_SYMBOL}",
                snapshot.name, snapshot.symbol
            ));
        }
        if snapshot
            .current_block
            .checked_mul(snapshot.block_time_s)
            .and_then(|t| t.checked_add(snapshot.genesis_time))
            .is_none()
        {
            return inconsistent("block timestamp overflows".to_owned());
        }

        let mut ledger = Ledger::with_block_time(
            Address::new("snapshot").expect("non-empty"),
            0,
            snapshot.genesis_time,
            snapshot.block_time_s,
        );
        ledger.total_supply = snapshot.total_supply;
        ledger.current_block = snapshot.current_block;
        for e in snapshot.balances {
            if ledger
                .balances
                .insert(e.address.clone(), e.amount)
                .is_some()
            {
                return inconsistent(format!("duplicate balance for {}", e.address));
            }
        }
        for e in snapshot.allowances {
            if ledger
                .allowances
                .insert((e.owner.clone(), e.spender.clone()), e.amount)
                .is_some()
            {
                return inconsistent(format!("duplicate allowance {} -> {}", e.owner, e.spender));
            }
        }
        for e in snapshot.locks {
            let key = (e.unlocking_address, e.locking_address);
            if ledger.locks.contains_key(&key) {
                return inconsistent(format!("duplicate lock ({}, {})", key.0, key.1));
            }
            ledger.locks.insert(
                key,
                LockedEntity {
                    owner: e.owner,
                    amount: e.amount,
                    block_no: e.block_no,
                    is_active: e.is_active,
                },
            );
        }
        for e in snapshot.locked_balances {
            if ledger
                .locked_balances
                .insert(e.address.clone(), e.amount)
                .is_some()
            {
                return inconsistent(format!("duplicate locked balance for {}", e.address));
            }
        }
        ledger.event_log = snapshot.events;

        let problems = ledger.audit();
        if !problems.is_empty() {
            return inconsistent(problems.join("; "));
        }
        Ok(ledger)
    }
}
