//! Naive reference ledger: every lock is its own list entry and all derived
//! quantities are recomputed by scanning.

use super::{account, universe, Op, ACCOUNTS};
use lerc20::token::{Ledger, LockStatus, TokenError};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefError {
    Unlocked,
    Allowance,
    Zero,
    SlotOwner,
    Verify,
    Overflow,
}

pub fn classify(e: &TokenError) -> RefError {
    match e {
        TokenError::InsufficientUnlockedBalance { .. } => RefError::Unlocked,
        TokenError::InsufficientAllowance { .. } => RefError::Allowance,
        TokenError::ZeroAmount => RefError::Zero,
        TokenError::LockSlotOwnerMismatch { .. } => RefError::SlotOwner,
        TokenError::LockVerificationFailed { .. } => RefError::Verify,
        TokenError::Overflow => RefError::Overflow,
        TokenError::EmptyAddress => panic!("unexpected {e}"),
    }
}

#[derive(Clone, Debug)]
struct Entry {
    unlocking: usize,
    locker: usize,
    owner: usize,
    amount: u128,
    block_no: u64,
    active: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefEvent {
    pub status: u8,
    pub owner: usize,
    pub locker: usize,
    pub unlocking: usize,
    pub amount: u128,
}

#[derive(Clone, Debug, Default)]
pub struct RefLedger {
    balances: [u128; ACCOUNTS],
    allowances: BTreeMap<(usize, usize), u128>,
    entries: Vec<Entry>,
    block: u64,
    pub events: Vec<RefEvent>,
}

impl RefLedger {
    /// Mirrors `common::funded_ledger`.
    pub fn funded() -> Self {
        Self {
            balances: [20; ACCOUNTS],
            ..Default::default()
        }
    }

    pub fn balance(&self, a: usize) -> u128 {
        self.balances[a]
    }

    pub fn allowance(&self, o: usize, s: usize) -> u128 {
        self.allowances.get(&(o, s)).copied().unwrap_or(0)
    }

    pub fn locked(&self, a: usize) -> u128 {
        self.entries
            .iter()
            .filter(|e| e.active && e.owner == a)
            .map(|e| e.amount)
            .sum()
    }

    pub fn unlocked(&self, a: usize) -> u128 {
        self.balance(a) - self.locked(a)
    }

    fn slot(&self, unlocking: usize, locker: usize) -> Vec<&Entry> {
        self.entries
            .iter()
            .filter(|e| e.active && e.unlocking == unlocking && e.locker == locker)
            .collect()
    }

    /// `(owner, total amount, unlock height)` of the active slot, if any.
    pub fn slot_summary(&self, unlocking: usize, locker: usize) -> Option<(usize, u128, u64)> {
        let slot = self.slot(unlocking, locker);
        let first = slot.first()?;
        Some((
            first.owner,
            slot.iter().map(|e| e.amount).sum(),
            slot.iter().map(|e| e.block_no).max().unwrap(),
        ))
    }

    pub fn verify(&self, owner: usize, amount: u128, unlocking: usize, locker: usize) -> bool {
        let slot = self.slot(unlocking, locker);
        !slot.is_empty()
            && slot.iter().all(|e| e.owner == owner)
            && slot.iter().map(|e| e.amount).sum::<u128>() >= amount
            && slot.iter().all(|e| self.block >= e.block_no)
    }

    fn set_allowance(&mut self, o: usize, s: usize, v: u128) {
        self.allowances.insert((o, s), v);
    }

    fn add_lock(
        &mut self,
        owner: usize,
        locker: usize,
        amount: u128,
        no_blocks: u64,
        unlocking: usize,
    ) -> Result<(), RefError> {
        if self
            .slot(unlocking, locker)
            .iter()
            .any(|e| e.owner != owner)
        {
            return Err(RefError::SlotOwner);
        }
        let block_no = self
            .block
            .checked_add(no_blocks)
            .ok_or(RefError::Overflow)?;
        self.entries.push(Entry {
            unlocking,
            locker,
            owner,
            amount,
            block_no,
            active: true,
        });
        let raised = self.allowance(owner, unlocking) + amount;
        self.set_allowance(owner, unlocking, raised);
        self.events.push(RefEvent {
            status: 0,
            owner,
            locker,
            unlocking,
            amount,
        });
        Ok(())
    }

    fn consume(&mut self, unlocking: usize, locker: usize, amount: u128) {
        let total: u128 = self.slot(unlocking, locker).iter().map(|e| e.amount).sum();
        let mut left = amount;
        for e in self
            .entries
            .iter_mut()
            .filter(|e| e.active && e.unlocking == unlocking && e.locker == locker)
        {
            if amount == total {
                e.active = false;
            } else {
                let take = left.min(e.amount);
                e.amount -= take;
                left -= take;
            }
        }
    }

    pub fn apply(&mut self, op: &Op) -> Result<(), RefError> {
        match *op {
            Op::Advance(n) => {
                self.block = self.block.checked_add(n).ok_or(RefError::Overflow)?;
                Ok(())
            }
            Op::Approve(c, s, x) => {
                self.set_allowance(c, s, x);
                Ok(())
            }
            Op::IncreaseAllowance(c, s, x) => {
                if x > self.unlocked(c) {
                    return Err(RefError::Unlocked);
                }
                let v = self.allowance(c, s) + x;
                self.set_allowance(c, s, v);
                Ok(())
            }
            Op::DecreaseAllowance(c, s, x) => {
                if x > self.allowance(c, s) {
                    return Err(RefError::Allowance);
                }
                let v = self.allowance(c, s) - x;
                self.set_allowance(c, s, v);
                Ok(())
            }
            Op::Transfer(c, r, x) => {
                if x > self.unlocked(c) {
                    return Err(RefError::Unlocked);
                }
                self.balances[c] -= x;
                self.balances[r] += x;
                Ok(())
            }
            Op::TransferFrom(c, s, r, x) => {
                if x > self.unlocked(s) {
                    return Err(RefError::Unlocked);
                }
                if self.allowance(s, c) < x {
                    return Err(RefError::Allowance);
                }
                self.balances[s] -= x;
                self.balances[r] += x;
                let v = self.allowance(s, c) - x;
                self.set_allowance(s, c, v);
                Ok(())
            }
            Op::Lock(c, x, n, u) => {
                if x == 0 {
                    return Err(RefError::Zero);
                }
                if x > self.unlocked(c) {
                    return Err(RefError::Unlocked);
                }
                self.add_lock(c, c, x, n, u)
            }
            Op::LockFrom(c, o, x, n, u) => {
                if x == 0 {
                    return Err(RefError::Zero);
                }
                if x > self.unlocked(o) {
                    return Err(RefError::Unlocked);
                }
                if self.allowance(o, c) < x {
                    return Err(RefError::Allowance);
                }
                let saved = self.clone();
                let v = self.allowance(o, c) - x;
                self.set_allowance(o, c, v);
                let r = self.add_lock(o, c, x, n, u);
                if r.is_err() {
                    *self = saved;
                }
                r
            }
            Op::UnlockTransfer(c, o, x, r, l) => {
                if !self.verify(o, x, c, l) {
                    return Err(RefError::Verify);
                }
                if self.allowance(o, c) < x {
                    return Err(RefError::Allowance);
                }
                self.consume(c, l, x);
                self.balances[o] -= x;
                self.balances[r] += x;
                let v = self.allowance(o, c) - x;
                self.set_allowance(o, c, v);
                self.events.push(RefEvent {
                    status: 1,
                    owner: o,
                    locker: l,
                    unlocking: c,
                    amount: x,
                });
                Ok(())
            }
            Op::UnlockWithoutTransfer(c, o, x, l) => {
                if !self.verify(o, x, c, l) {
                    return Err(RefError::Verify);
                }
                self.consume(c, l, x);
                let v = self.allowance(o, c).saturating_sub(x);
                self.set_allowance(o, c, v);
                self.events.push(RefEvent {
                    status: 2,
                    owner: o,
                    locker: l,
                    unlocking: c,
                    amount: x,
                });
                Ok(())
            }
        }
    }
}

fn index_of(a: &lerc20::token::Address) -> usize {
    universe()
        .iter()
        .position(|u| u == a)
        .expect("known account")
}

/// Compares every observable of `ledger` with the reference.
pub fn compare(ledger: &Ledger, reference: &RefLedger) -> Result<(), String> {
    for i in 0..ACCOUNTS {
        let a = account(i);
        if ledger.balance_of(&a) != reference.balance(i) {
            return Err(format!("balance of {a}"));
        }
        if ledger.locked_balance_of(&a) != reference.locked(i) {
            return Err(format!(
                "locked balance of {a}: {} vs {}",
                ledger.locked_balance_of(&a),
                reference.locked(i)
            ));
        }
        if ledger.unlocked_balance_of(&a) != reference.unlocked(i) {
            return Err(format!("unlocked balance of {a}"));
        }
        for j in 0..ACCOUNTS {
            let b = account(j);
            if ledger.allowance(&a, &b) != reference.allowance(i, j) {
                return Err(format!(
                    "allowance {a}->{b}: {} vs {}",
                    ledger.allowance(&a, &b),
                    reference.allowance(i, j)
                ));
            }
            let actual = ledger
                .lock_entity(&a, &b)
                .filter(|e| e.is_active)
                .map(|e| (index_of(&e.owner), e.amount, e.block_no));
            if actual != reference.slot_summary(i, j) {
                return Err(format!(
                    "lock slot ({a},{b}): {actual:?} vs {:?}",
                    reference.slot_summary(i, j)
                ));
            }
        }
    }
    let events: Vec<RefEvent> = ledger
        .events()
        .iter()
        .map(|e| RefEvent {
            status: e.status as u8,
            owner: index_of(&e.owner),
            locker: index_of(&e.locking_address),
            unlocking: index_of(&e.unlocking_address),
            amount: e.amount,
        })
        .collect();
    if events != reference.events {
        return Err("event logs differ".into());
    }
    if ledger.events_filtered(LockStatus::Lock).count()
        != reference.events.iter().filter(|e| e.status == 0).count()
    {
        return Err("lock event count".into());
    }
    Ok(())
}

/// Runs `ops` on both implementations, comparing results and observables
/// after every step.
pub fn run_against_reference(ops: &[Op]) -> Result<(), String> {
    let mut ledger = super::funded_ledger();
    let mut reference = RefLedger::funded();
    for (step, op) in ops.iter().enumerate() {
        let actual = super::apply(&mut ledger, op).map_err(|e| classify(&e));
        let expected = reference.apply(op);
        if actual != expected {
            return Err(format!("step {step} {op:?}: {actual:?} vs {expected:?}"));
        }
        compare(&ledger, &reference).map_err(|m| format!("step {step} {op:?}: {m}"))?;
    }
    Ok(())
}
