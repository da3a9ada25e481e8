// One day-ahead session driven directly through the engine: two sellers,
// one buyer, partial delivery and close.

use lerc20::market::{MarketEngine, MarketError, MeterReading, Side};
use lerc20::token::{Address, Ledger};

fn addr(s: &str) -> Address {
    Address::new(s).expect("non-empty")
}

fn main() -> Result<(), MarketError> {
    let treasury = addr("treasury");
    let mut ledger = Ledger::new(treasury.clone(), 3_000, 1_700_000_000);
    let mut engine = MarketEngine::new(addr("market"));

    for who in ["solar-a", "solar-b", "home"] {
        let a = addr(who);
        ledger.transfer(&treasury, &a, 1_000)?;
        ledger.approve(&a, &engine.agent_for(&a), 1_000);
    }

    // 960 blocks of 15 s: a four hour session
    engine.open_session(&ledger, 1, 960, addr("escrow"))?;
    engine.place_order(&mut ledger, &addr("solar-a"), Side::Sell, 50, 5)?;
    ledger.advance_block(100)?;
    engine.place_order(&mut ledger, &addr("solar-b"), Side::Sell, 50, 6)?;
    ledger.advance_block(100)?;
    engine.place_order(&mut ledger, &addr("home"), Side::Buy, 80, 7)?;

    ledger.advance_block(760)?;
    for t in engine.run_matching(&ledger)? {
        println!(
            "trade {}: {} Wh @ {} (sell #{} / buy #{})",
            t.id, t.energy, t.price, t.sell_order_id, t.buy_order_id
        );
    }

    let s = engine.settle_trade(
        &mut ledger,
        MeterReading {
            trade_id: 0,
            delivered: 50,
        },
    )?;
    println!("trade 0 paid {}", s.buyer_to_seller);
    let s = engine.settle_trade(
        &mut ledger,
        MeterReading {
            trade_id: 1,
            delivered: 20,
        },
    )?;
    println!(
        "trade 1 paid {}, compensation {}",
        s.buyer_to_seller, s.seller_to_buyer
    );

    let report = engine.close_session(&mut ledger)?;
    for f in &report.net_flows {
        println!("{:>8}: {:+}", f.account, f.net);
    }
    let series: Vec<_> = report
        .lock_count_series
        .iter()
        .map(|p| p.active_locks)
        .collect();
    println!("active locks over the session: {series:?}");
    assert_eq!(ledger.active_lock_count(), 0);
    Ok(())
}
