//! Lockable ERC20 token ledger and a peer-to-peer day-ahead energy market
//! built on top of it.
//!
//! * [`token`] is the token state machine: balances, allowances, time-locked
//!   escrow locks and the lock event log, with block height as the clock.
//! * [`market`] runs a market session that locks tokens for every order,
//!   clears the book with a merit-order double auction and settles trades
//!   against metered delivery.
//! * [`gas`] estimates on-chain order throughput under a block gas limit.
//! * [`scenario`] drives a whole session from a JSON scenario file and writes
//!   the report files; the `lerc20` binary is a thin wrapper around it.
//!
//! ```
//! use lerc20::token::{Address, Ledger};
//!
//! let alice = Address::new("alice").unwrap();
//! let escrow = Address::new("escrow").unwrap();
//! let mut ledger = Ledger::new(alice.clone(), 1000, 0);
//! ledger.lock(&alice, 300, 10, &escrow).unwrap();
//! assert_eq!(ledger.unlocked_balance_of(&alice), 700);
//!
//! ledger.advance_block(10).unwrap();
//! ledger.unlock_without_transfer(&escrow, &alice, 300, &alice).unwrap();
//! assert_eq!(ledger.unlocked_balance_of(&alice), 1000);
//! ```

pub mod gas;
pub mod market;
pub mod scenario;
pub mod token;

mod decimal;
mod output;
