// Plain ERC20 flows: mint, transfer, approve and transfer_from.

use lerc20::token::{Address, Ledger, TokenError};

fn main() -> Result<(), TokenError> {
    let alice = Address::new("alice")?;
    let bob = Address::new("bob")?;
    let carol = Address::new("carol")?;

    let mut ledger = Ledger::new(alice.clone(), 1_000, 1_700_000_000);
    println!(
        "{} ({}), supply {}",
        ledger.name(),
        ledger.symbol(),
        ledger.total_supply()
    );

    ledger.transfer(&alice, &bob, 250)?;
    ledger.approve(&bob, &carol, 100);
    ledger.transfer_from(&carol, &bob, &carol, 60)?;

    for (who, balance) in ledger.balances() {
        println!("{who:>6}: {balance}");
    }
    println!(
        "carol may still move {} of bob's tokens",
        ledger.allowance(&bob, &carol)
    );

    // failures leave the ledger untouched
    let err = ledger.transfer(&carol, &alice, 61).unwrap_err();
    println!("rejected: {err}");
    assert_eq!(ledger.balance_of(&carol), 60);
    Ok(())
}
