//! Merit-order double auction.
//!
//! Offers are taken cheapest first and bids dearest first, ties broken by
//! order id. A trade forms while the best bid is at least the best offer; it
//! carries the smaller of the two remaining quantities at the offer's price.

use super::{Order, OrderStatus, Side, Trade};

/// Clears `orders` in place and returns the trades, numbered from
/// `first_trade_id`. Every order leaves with status `Matched`,
/// `PartiallyMatched` or `Expired`.
pub(crate) fn clear(orders: &mut [Order], first_trade_id: u64) -> Vec<Trade> {
    let mut sells: Vec<usize> = indices(orders, Side::Sell);
    let mut buys: Vec<usize> = indices(orders, Side::Buy);
    sells.sort_by_key(|&i| (orders[i].price, orders[i].id));
    buys.sort_by_key(|&i| (std::cmp::Reverse(orders[i].price), orders[i].id));

    let mut trades = Vec::new();
    let (mut s, mut b) = (0, 0);
    while s < sells.len() && b < buys.len() {
        let (si, bi) = (sells[s], buys[b]);
        if orders[bi].price < orders[si].price {
            break;
        }
        let energy = orders[si].remaining_energy.min(orders[bi].remaining_energy);
        trades.push(Trade {
            id: first_trade_id + trades.len() as u64,
            sell_order_id: orders[si].id,
            buy_order_id: orders[bi].id,
            energy,
            price: orders[si].price,
            settled: false,
            delivered: None,
        });
        orders[si].remaining_energy -= energy;
        orders[bi].remaining_energy -= energy;
        if orders[si].remaining_energy == 0 {
            s += 1;
        }
        if orders[bi].remaining_energy == 0 {
            b += 1;
        }
    }

    for order in orders.iter_mut() {
        order.status = if order.remaining_energy == 0 {
            OrderStatus::Matched
        } else if order.remaining_energy < order.energy {
            OrderStatus::PartiallyMatched
        } else {
            OrderStatus::Expired
        };
    }
    trades
}

fn indices(orders: &[Order], side: Side) -> Vec<usize> {
    orders
        .iter()
        .enumerate()
        .filter(|(_, o)| o.side == side && o.remaining_energy > 0)
        .map(|(i, _)| i)
        .collect()
}
