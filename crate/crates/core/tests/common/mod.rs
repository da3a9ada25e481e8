#![allow(dead_code)]

pub mod reference;

use lerc20::token::{Address, Ledger, LockStatus, TokenError};
use proptest::prelude::*;
use std::collections::BTreeMap;

pub const ACCOUNTS: usize = 5;

pub fn addr(s: &str) -> Address {
    Address::new(s).unwrap()
}

pub fn account(i: usize) -> Address {
    addr(&format!("a{i}"))
}

pub fn universe() -> Vec<Address> {
    (0..ACCOUNTS).map(account).collect()
}

/// One token operation over account indices.
#[derive(Clone, Debug)]
pub enum Op {
    Advance(u64),
    Approve(usize, usize, u128),
    IncreaseAllowance(usize, usize, u128),
    DecreaseAllowance(usize, usize, u128),
    Transfer(usize, usize, u128),
    TransferFrom(usize, usize, usize, u128),
    Lock(usize, u128, u64, usize),
    LockFrom(usize, usize, u128, u64, usize),
    UnlockTransfer(usize, usize, u128, usize, usize),
    UnlockWithoutTransfer(usize, usize, u128, usize),
}

pub fn op_strategy() -> impl Strategy<Value = Op> {
    let a = || 0..ACCOUNTS;
    let amt = || 0u128..=20;
    let blocks = || 0u64..=5;
    prop_oneof![
        2 => blocks().prop_map(Op::Advance),
        1 => (a(), a(), amt()).prop_map(|(c, s, x)| Op::Approve(c, s, x)),
        1 => (a(), a(), amt()).prop_map(|(c, s, x)| Op::IncreaseAllowance(c, s, x)),
        1 => (a(), a(), amt()).prop_map(|(c, s, x)| Op::DecreaseAllowance(c, s, x)),
        2 => (a(), a(), amt()).prop_map(|(c, r, x)| Op::Transfer(c, r, x)),
        2 => (a(), a(), a(), amt()).prop_map(|(c, s, r, x)| Op::TransferFrom(c, s, r, x)),
        3 => (a(), amt(), blocks(), a()).prop_map(|(c, x, n, u)| Op::Lock(c, x, n, u)),
        3 => (a(), a(), amt(), blocks(), a()).prop_map(|(c, o, x, n, u)| Op::LockFrom(c, o, x, n, u)),
        3 => (a(), a(), amt(), a(), a()).prop_map(|(c, o, x, r, l)| Op::UnlockTransfer(c, o, x, r, l)),
        3 => (a(), a(), amt(), a()).prop_map(|(c, o, x, l)| Op::UnlockWithoutTransfer(c, o, x, l)),
    ]
}

/// A lock, a wait and a release aimed at the same slot. The wait may be too
/// short and the release amount may exceed the lock, so both outcomes occur.
pub fn lock_cycle_strategy() -> impl Strategy<Value = Vec<Op>> {
    let a = || 0..ACCOUNTS;
    (
        a(),
        a(),
        a(),
        1u128..=20,
        0u64..=5,
        0u64..=6,
        any::<bool>(),
        0u128..=22,
        a(),
        any::<bool>(),
    )
        .prop_map(
            |(owner, locker, escrow, x, n, wait, transfer, y, r, delegated)| {
                let lock = if delegated {
                    Op::LockFrom(locker, owner, x, n, escrow)
                } else {
                    Op::Lock(owner, x, n, escrow)
                };
                let l = if delegated { locker } else { owner };
                let release = if transfer {
                    Op::UnlockTransfer(escrow, owner, y, r, l)
                } else {
                    Op::UnlockWithoutTransfer(escrow, owner, y, l)
                };
                let mut ops = Vec::new();
                if delegated {
                    ops.push(Op::Approve(owner, locker, x));
                }
                ops.extend([lock, Op::Advance(wait), release]);
                ops
            },
        )
}

/// Random operations mixed with targeted lock cycles, at most `max_len` long.
pub fn ops_strategy(max_len: usize) -> impl Strategy<Value = Vec<Op>> {
    let chunk = prop_oneof![
        4 => op_strategy().prop_map(|op| vec![op]),
        1 => lock_cycle_strategy(),
    ];
    prop::collection::vec(chunk, 0..=max_len).prop_map(move |chunks| {
        let mut ops: Vec<Op> = chunks.into_iter().flatten().collect();
        ops.truncate(max_len);
        ops
    })
}

/// A ledger where each of the five accounts holds 20 tokens.
pub fn funded_ledger() -> Ledger {
    let mut ledger = Ledger::new(account(0), 100, 0);
    for i in 1..ACCOUNTS {
        ledger.transfer(&account(0), &account(i), 20).unwrap();
    }
    ledger
}

pub fn apply(ledger: &mut Ledger, op: &Op) -> Result<(), TokenError> {
    let a = account;
    match *op {
        Op::Advance(n) => ledger.advance_block(n),
        Op::Approve(c, s, x) => {
            ledger.approve(&a(c), &a(s), x);
            Ok(())
        }
        Op::IncreaseAllowance(c, s, x) => ledger.increase_allowance(&a(c), &a(s), x),
        Op::DecreaseAllowance(c, s, x) => ledger.decrease_allowance(&a(c), &a(s), x),
        Op::Transfer(c, r, x) => ledger.transfer(&a(c), &a(r), x),
        Op::TransferFrom(c, s, r, x) => ledger.transfer_from(&a(c), &a(s), &a(r), x),
        Op::Lock(c, x, n, u) => ledger.lock(&a(c), x, n, &a(u)),
        Op::LockFrom(c, o, x, n, u) => ledger.lock_from(&a(c), &a(o), x, n, &a(u)),
        Op::UnlockTransfer(c, o, x, r, l) => ledger.unlock_transfer(&a(c), &a(o), x, &a(r), &a(l)),
        Op::UnlockWithoutTransfer(c, o, x, l) => {
            ledger.unlock_without_transfer(&a(c), &a(o), x, &a(l))
        }
    }
}

/// State invariants recomputed from public reads only.
pub fn check_state(ledger: &Ledger) -> Result<(), String> {
    let supply: u128 = ledger.balances().map(|(_, v)| v).sum();
    if supply != ledger.total_supply() {
        return Err(format!(
            "conservation: Σ balances {supply} != supply {}",
            ledger.total_supply()
        ));
    }
    let mut from_locks: BTreeMap<Address, u128> = BTreeMap::new();
    for (u, l, e) in ledger.locks() {
        if e.is_active {
            if e.amount == 0 {
                return Err(format!("active lock ({u},{l}) with zero amount"));
            }
            *from_locks.entry(e.owner.clone()).or_default() += e.amount;
        }
    }
    for who in universe() {
        let (bal, locked, free) = (
            ledger.balance_of(&who),
            ledger.locked_balance_of(&who),
            ledger.unlocked_balance_of(&who),
        );
        if locked > bal || free + locked != bal {
            return Err(format!(
                "split identity for {who}: {free} + {locked} != {bal}"
            ));
        }
        let summed = from_locks.get(&who).copied().unwrap_or(0);
        if locked != summed {
            return Err(format!(
                "lock ledger identity for {who}: {locked} != {summed}"
            ));
        }
    }
    Ok(())
}

#[derive(Default, Debug)]
pub struct EventCounts {
    pub locks: usize,
    pub unlock_transfers: usize,
    pub unlock_without_transfers: usize,
}

fn balances(ledger: &Ledger) -> Vec<u128> {
    universe().iter().map(|a| ledger.balance_of(a)).collect()
}

/// Checks the per-step properties of one operation.
pub fn check_step(
    before: &Ledger,
    op: &Op,
    result: &Result<(), TokenError>,
    after: &Ledger,
    counts: &mut EventCounts,
) -> Result<(), String> {
    if result.is_err() {
        if before != after {
            return Err(format!("failed {op:?} mutated the ledger"));
        }
        return Ok(());
    }
    check_state(after)?;

    let new_events = &after.events()[before.events().len()..];
    if after.events()[..before.events().len()] != *before.events() {
        return Err("event log rewritten".into());
    }
    let expect_status = match op {
        Op::Lock(..) | Op::LockFrom(..) => Some(LockStatus::Lock),
        Op::UnlockTransfer(..) => Some(LockStatus::UnlockTransfer),
        Op::UnlockWithoutTransfer(..) => Some(LockStatus::UnlockWithoutTransfer),
        _ => None,
    };
    match (expect_status, new_events) {
        (None, []) => {}
        (Some(s), [e]) if e.status == s => match s {
            LockStatus::Lock => counts.locks += 1,
            LockStatus::UnlockTransfer => counts.unlock_transfers += 1,
            LockStatus::UnlockWithoutTransfer => counts.unlock_without_transfers += 1,
        },
        _ => return Err(format!("{op:?} appended {new_events:?}")),
    }
    let statuses = |s| after.events_filtered(s).count();
    if statuses(LockStatus::Lock) != counts.locks
        || statuses(LockStatus::UnlockTransfer) != counts.unlock_transfers
        || statuses(LockStatus::UnlockWithoutTransfer) != counts.unlock_without_transfers
    {
        return Err(format!("event completeness: {counts:?}"));
    }

    match *op {
        Op::Lock(..) | Op::LockFrom(..) | Op::UnlockWithoutTransfer(..)
            if balances(before) != balances(after) =>
        {
            return Err(format!("lock neutrality violated by {op:?}"));
        }
        _ => {}
    }
    match *op {
        Op::Lock(c, _, _, u) | Op::LockFrom(c, _, _, _, u) => {
            let (u, l) = (account(u), account(c));
            if let Some(prev) = before.lock_entity(&u, &l).filter(|e| e.is_active) {
                let now = after.lock_entity(&u, &l).unwrap();
                if now.block_no < prev.block_no {
                    return Err(format!("aggregation lowered unlock height: {op:?}"));
                }
            }
        }
        Op::UnlockTransfer(c, _, _, _, l) | Op::UnlockWithoutTransfer(c, _, _, l) => {
            let entity = before.lock_entity(&account(c), &account(l)).unwrap();
            if before.current_block() < entity.block_no {
                return Err(format!("time-lock broken by {op:?}"));
            }
        }
        Op::Transfer(c, _, x) => {
            if x > before.unlocked_balance_of(&account(c)) {
                return Err(format!("locked funds spent by {op:?}"));
            }
        }
        Op::TransferFrom(_, s, _, x) if x > before.unlocked_balance_of(&account(s)) => {
            return Err(format!("locked funds spent by {op:?}"));
        }
        _ => {}
    }
    Ok(())
}

/// Applies `ops` to a funded ledger, checking every step.
pub fn run_checked(ops: &[Op]) -> Result<Ledger, String> {
    let mut ledger = funded_ledger();
    let mut counts = EventCounts::default();
    for op in ops {
        let before = ledger.clone();
        let result = apply(&mut ledger, op);
        check_step(&before, op, &result, &ledger, &mut counts)?;
    }
    Ok(ledger)
}
