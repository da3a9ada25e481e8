// A time-locked escrow: the owner locks tokens for an escrow, which can
// release them once the lock expires, either back to the owner or onward.

use lerc20::token::{Address, Ledger, LockStatus, TokenError, EVENTS_CSV_HEADER};

fn main() -> Result<(), TokenError> {
    let alice = Address::new("alice")?;
    let escrow = Address::new("escrow")?;
    let shop = Address::new("shop")?;
    let mut ledger = Ledger::new(alice.clone(), 1_000, 1_700_000_000);

    ledger.lock(&alice, 300, 10, &escrow)?;
    println!(
        "locked {} of {}, spendable {}",
        ledger.locked_balance_of(&alice),
        ledger.balance_of(&alice),
        ledger.unlocked_balance_of(&alice)
    );

    // too early: the lock holds until block 10
    let early = ledger.unlock_without_transfer(&escrow, &alice, 300, &alice);
    println!(
        "at block {}: {}",
        ledger.current_block(),
        early.unwrap_err()
    );

    ledger.advance_block(10)?;
    assert!(ledger.verify_lock(&alice, 300, &escrow, &alice, ledger.current_block()));
    ledger.unlock_transfer(&escrow, &alice, 120, &shop, &alice)?;
    ledger.unlock_without_transfer(&escrow, &alice, 180, &alice)?;

    println!(
        "alice {}, shop {}",
        ledger.balance_of(&alice),
        ledger.balance_of(&shop)
    );
    println!("{}", EVENTS_CSV_HEADER.join(","));
    for e in ledger.events() {
        println!(
            "{:?} {} by {} at {:02}:{:02} UTC",
            e.status, e.amount, e.unlocking_address, e.hour, e.min
        );
    }
    assert_eq!(ledger.events_filtered(LockStatus::Lock).count(), 1);
    assert_eq!(ledger.active_lock_count(), 0);
    Ok(())
}
