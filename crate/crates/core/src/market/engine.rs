use super::matching;
use super::report::{NetFlow, SessionReport};
use super::{
    order_tokens, EnergyQuantity, LockCountPoint, MarketError, MeterReading, Order, OrderStatus,
    Price, SessionState, Settlement, Side, Trade,
};
use crate::token::{Address, Amount, BlockNumber, Ledger};
use std::collections::{BTreeMap, BTreeSet};

/// One market session: its order book, trades and lock bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    id: u64,
    state: SessionState,
    opened_at_block: BlockNumber,
    duration_blocks: BlockNumber,
    escrow: Address,
    orders: Vec<Order>,
    trades: Vec<Trade>,
    settlements: Vec<Settlement>,
    lock_series: Vec<LockCountPoint>,
    opening_balances: BTreeMap<Address, Amount>,
}

impl Session {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn opened_at_block(&self) -> BlockNumber {
        self.opened_at_block
    }

    pub fn duration_blocks(&self) -> BlockNumber {
        self.duration_blocks
    }

    /// Block at which order placement ends and every session lock becomes
    /// releasable.
    pub fn ends_at_block(&self) -> BlockNumber {
        self.opened_at_block.saturating_add(self.duration_blocks)
    }

    pub fn escrow(&self) -> &Address {
        &self.escrow
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn settlements(&self) -> &[Settlement] {
        &self.settlements
    }

    /// Number of orders holding locked tokens, sampled at every lock-affecting
    /// event. Starts at 0 when the session opens and ends at 0 after close.
    pub fn lock_count_series(&self) -> &[LockCountPoint] {
        &self.lock_series
    }

    pub fn active_locks(&self) -> usize {
        self.orders
            .iter()
            .filter(|o| o.tokens_outstanding > 0)
            .count()
    }

    fn record_locks(&mut self, block: BlockNumber) {
        let point = LockCountPoint {
            block,
            active_locks: self.active_locks(),
            phase: self.state,
        };
        self.lock_series.push(point);
    }

    fn order_mut(&mut self, id: u64) -> &mut Order {
        // order ids are their positions in the book
        &mut self.orders[id as usize]
    }
}

/// Runs market sessions against a ledger, one at a time.
///
/// The engine places every order through a per-account agent address which
/// takes the lock with `lock_from`. Each participant therefore approves its
/// own agent for the tokens it wants to commit, and every participant's locks
/// aggregate into one lock slot `(escrow, agent)`.
#[derive(Clone, Debug)]
pub struct MarketEngine {
    operator: Address,
    session: Option<Session>,
}

impl MarketEngine {
    pub fn new(operator: Address) -> Self {
        Self {
            operator,
            session: None,
        }
    }

    pub fn operator(&self) -> &Address {
        &self.operator
    }

    /// The address that locks `account`'s tokens for its orders.
    pub fn agent_for(&self, account: &Address) -> Address {
        agent_address(&self.operator, account)
    }

    /// The current or most recently closed session.
    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn open_session(
        &mut self,
        ledger: &Ledger,
        session_id: u64,
        duration_blocks: BlockNumber,
        escrow: Address,
    ) -> Result<&Session, MarketError> {
        if self
            .session
            .as_ref()
            .is_some_and(|s| s.state != SessionState::Closed)
        {
            return Err(MarketError::SessionAlreadyActive);
        }
        let opened_at_block = ledger.current_block();
        let mut session = Session {
            id: session_id,
            state: SessionState::Open,
            opened_at_block,
            duration_blocks,
            escrow,
            orders: Vec::new(),
            trades: Vec::new(),
            settlements: Vec::new(),
            lock_series: Vec::new(),
            opening_balances: ledger.balances().map(|(a, v)| (a.clone(), v)).collect(),
        };
        session.record_locks(opened_at_block);
        Ok(self.session.insert(session))
    }

    /// Places an order and locks `price * energy` of the account's tokens until
    /// the session ends. A rejected order leaves both the book and the ledger
    /// untouched.
    pub fn place_order(
        &mut self,
        ledger: &mut Ledger,
        account: &Address,
        side: Side,
        energy: EnergyQuantity,
        price: Price,
    ) -> Result<Order, MarketError> {
        let agent = self.agent_for(account);
        let session = self.session.as_mut().ok_or(MarketError::NoSession)?;
        if session.state != SessionState::Open {
            return Err(MarketError::SessionNotOpen);
        }
        if energy == 0 {
            return Err(MarketError::ZeroEnergy);
        }
        if price == 0 {
            return Err(MarketError::ZeroPrice);
        }

        let tokens = order_tokens(price, energy);
        let block = ledger.current_block();
        let no_blocks = session.ends_at_block().saturating_sub(block);
        ledger.lock_from(&agent, account, tokens, no_blocks, &session.escrow)?;

        let order = Order {
            id: session.orders.len() as u64,
            side,
            account: account.clone(),
            energy,
            price,
            tokens_locked: tokens,
            placed_at_block: block,
            remaining_energy: energy,
            status: OrderStatus::Open,
            tokens_outstanding: tokens,
        };
        session.orders.push(order.clone());
        session.record_locks(block);
        Ok(order)
    }

    /// Clears the book once the session has ended and moves to delivery.
    pub fn run_matching(&mut self, ledger: &Ledger) -> Result<Vec<Trade>, MarketError> {
        let session = self.session.as_mut().ok_or(MarketError::NoSession)?;
        if session.state != SessionState::Open {
            return Err(MarketError::SessionNotOpen);
        }
        if ledger.current_block() < session.ends_at_block() {
            return Err(MarketError::SessionNotEnded {
                ends_at: session.ends_at_block(),
                current: ledger.current_block(),
            });
        }
        session.state = SessionState::Matching;
        let trades = matching::clear(&mut session.orders, 0);
        session.trades = trades.clone();
        session.state = SessionState::Delivery;
        Ok(trades)
    }

    /// Settles one trade against its meter reading.
    ///
    /// With execution price `p`, traded energy `E_m` and delivered energy
    /// `E_d <= E_m`:
    /// * the buyer pays `p * E_d` to the seller and the rest of its lock for
    ///   the trade, `bid * E_m - p * E_d`, is released in place;
    /// * the seller's collateral `p * E_d` is released in place and
    ///   `p * (E_m - E_d)` is paid to the buyer.
    ///
    /// All four ledger calls apply or none do.
    pub fn settle_trade(
        &mut self,
        ledger: &mut Ledger,
        reading: MeterReading,
    ) -> Result<Settlement, MarketError> {
        let session = self.session.as_mut().ok_or(MarketError::NoSession)?;
        if session.state != SessionState::Delivery {
            return Err(MarketError::SessionNotInDelivery);
        }
        let trade = session
            .trades
            .iter()
            .find(|t| t.id == reading.trade_id)
            .ok_or(MarketError::TradeNotFound(reading.trade_id))?
            .clone();
        if trade.settled {
            return Err(MarketError::TradeAlreadySettled(trade.id));
        }
        let sell = session.orders[trade.sell_order_id as usize].clone();
        let buy = session.orders[trade.buy_order_id as usize].clone();

        let delivered = reading.delivered.min(trade.energy);
        let shortfall = trade.energy - delivered;
        let buyer_locked = order_tokens(buy.price, trade.energy);
        let seller_locked = order_tokens(trade.price, trade.energy);
        let settlement = Settlement {
            trade_id: trade.id,
            seller: sell.account.clone(),
            buyer: buy.account.clone(),
            delivered,
            buyer_to_seller: order_tokens(trade.price, delivered),
            seller_to_buyer: order_tokens(trade.price, shortfall),
            buyer_released: buyer_locked - order_tokens(trade.price, delivered),
            seller_released: order_tokens(trade.price, delivered),
        };

        let escrow = session.escrow.clone();
        let buyer_agent = agent_address(&self.operator, &buy.account);
        let seller_agent = agent_address(&self.operator, &sell.account);
        let backup = ledger.clone();
        let applied = (|| {
            if settlement.buyer_to_seller > 0 {
                ledger.unlock_transfer(
                    &escrow,
                    &buy.account,
                    settlement.buyer_to_seller,
                    &sell.account,
                    &buyer_agent,
                )?;
            }
            if settlement.buyer_released > 0 {
                ledger.unlock_without_transfer(
                    &escrow,
                    &buy.account,
                    settlement.buyer_released,
                    &buyer_agent,
                )?;
            }
            if settlement.seller_released > 0 {
                ledger.unlock_without_transfer(
                    &escrow,
                    &sell.account,
                    settlement.seller_released,
                    &seller_agent,
                )?;
            }
            if settlement.seller_to_buyer > 0 {
                ledger.unlock_transfer(
                    &escrow,
                    &sell.account,
                    settlement.seller_to_buyer,
                    &buy.account,
                    &seller_agent,
                )?;
            }
            Ok::<_, MarketError>(())
        })();
        if let Err(e) = applied {
            *ledger = backup;
            return Err(e);
        }

        for (order_id, released) in [
            (trade.buy_order_id, buyer_locked),
            (trade.sell_order_id, seller_locked),
        ] {
            let order = session.order_mut(order_id);
            order.tokens_outstanding -= released;
            if order.tokens_outstanding == 0 {
                order.status = OrderStatus::Settled;
            }
        }
        let stored = session
            .trades
            .iter_mut()
            .find(|t| t.id == trade.id)
            .expect("trade exists");
        stored.settled = true;
        stored.delivered = Some(delivered);
        session.settlements.push(settlement.clone());
        session.record_locks(ledger.current_block());
        Ok(settlement)
    }

    /// Releases every remaining lock of the session to its owner and closes
    /// the session.
    pub fn close_session(&mut self, ledger: &mut Ledger) -> Result<SessionReport, MarketError> {
        let operator = self.operator.clone();
        let session = self.session.as_mut().ok_or(MarketError::NoSession)?;
        if session.state != SessionState::Delivery {
            return Err(MarketError::SessionNotInDelivery);
        }
        let unsettled = session.trades.iter().filter(|t| !t.settled).count();
        if unsettled > 0 {
            return Err(MarketError::UnsettledTradesRemain(unsettled));
        }

        let backup = ledger.clone();
        for order in session.orders.iter().filter(|o| o.tokens_outstanding > 0) {
            let agent = agent_address(&operator, &order.account);
            if let Err(e) = ledger.unlock_without_transfer(
                &session.escrow,
                &order.account,
                order.tokens_outstanding,
                &agent,
            ) {
                *ledger = backup;
                return Err(e.into());
            }
        }

        let block = ledger.current_block();
        for id in 0..session.orders.len() as u64 {
            let order = session.order_mut(id);
            if order.tokens_outstanding == 0 {
                continue;
            }
            order.tokens_outstanding = 0;
            if order.status != OrderStatus::Expired {
                order.status = OrderStatus::Settled;
            }
            session.record_locks(block);
        }
        session.state = SessionState::Closed;
        session.record_locks(block);

        let participants: BTreeSet<&Address> = session.orders.iter().map(|o| &o.account).collect();
        let net_flows = participants
            .into_iter()
            .map(|account| {
                let before = session.opening_balances.get(account).copied().unwrap_or(0);
                let after = ledger.balance_of(account);
                NetFlow {
                    account: account.clone(),
                    net: signed_delta(before, after),
                }
            })
            .collect();

        Ok(SessionReport {
            session_id: session.id,
            operator,
            escrow: session.escrow.clone(),
            opened_at_block: session.opened_at_block,
            ends_at_block: session.ends_at_block(),
            closed_at_block: block,
            orders: session.orders.clone(),
            trades: session.trades.clone(),
            settlements: session.settlements.clone(),
            net_flows,
            lock_count_series: session.lock_series.clone(),
        })
    }
}

fn agent_address(operator: &Address, account: &Address) -> Address {
    Address::new(format!("{operator}/agent/{account}")).expect("non-empty")
}

fn signed_delta(before: Amount, after: Amount) -> i128 {
    // balances are bounded by total supply; saturate at i128 range
    if after >= before {
        i128::try_from(after - before).unwrap_or(i128::MAX)
    } else {
        i128::try_from(before - after).map_or(i128::MIN, |d| -d)
    }
}
