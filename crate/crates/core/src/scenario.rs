//! End-to-end session runs driven by a JSON scenario file.
//!
//! ```json
//! {
//!   "accounts": [{"address": "alice", "initial_balance": "1000", "approve_market": "500"}],
//!   "session": {"duration_blocks": 960, "block_time_s": 15},
//!   "orders": [{"block_offset": 0, "account": "alice", "side": "sell", "energy_wh": 10, "price": 5}],
//!   "deliveries": [{"trade_id": 0, "delivered_wh": 6}],
//!   "gas": {"block_gas_limit": 30000000}
//! }
//! ```
//!
//! A run opens a session at block 0, places the orders at their block offsets,
//! advances to the session end, clears the book, settles every trade (trades
//! without a delivery entry are settled as undelivered) and closes the
//! session. [`run`] writes `report.json`, `locks.csv`, `events.csv` and
//! `throughput.csv` into the output directory.

use crate::decimal;
use crate::gas::{GasError, GasParams, OverheadReport, DEFAULT_SESSION_SECONDS};
use crate::market::{
    write_lock_series_csv, MarketEngine, MarketError, MeterReading, SessionReport, Side,
};
use crate::output::write_all_atomic;
use crate::token::{write_events_csv, Address, Amount, BlockNumber, Ledger};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Address of the market operator; order agents are derived from it.
pub const MARKET_OPERATOR: &str = "market";
/// Address of the session escrow that releases every order lock.
pub const MARKET_ESCROW: &str = "market-escrow";
/// Address that receives the initial mint before it is distributed.
pub const GENESIS_ACCOUNT: &str = "genesis";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{context}: {source}")]
    Domain {
        context: String,
        #[source]
        source: Box<MarketError>,
    },
}

impl RunError {
    /// Process exit code: 1 for I/O, 2 for schema, 3 for domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 1,
            RunError::Schema(_) => 2,
            RunError::Domain { .. } => 3,
        }
    }
}

impl From<GasError> for RunError {
    fn from(e: GasError) -> Self {
        RunError::Schema(format!("gas parameters: {e}"))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub accounts: Vec<AccountSpec>,
    #[serde(default)]
    pub session: SessionSpec,
    #[serde(default)]
    pub orders: Vec<OrderSpec>,
    #[serde(default)]
    pub deliveries: Vec<DeliverySpec>,
    #[serde(default)]
    pub gas: GasOverrides,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountSpec {
    pub address: Address,
    #[serde(with = "decimal::unsigned")]
    pub initial_balance: Amount,
    /// Allowance granted to the account's order agent.
    #[serde(default, with = "decimal::unsigned")]
    pub approve_market: Amount,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSpec {
    #[serde(default)]
    pub session_id: u64,
    #[serde(default)]
    pub duration_blocks: BlockNumber,
    #[serde(default = "default_block_time")]
    pub block_time_s: u64,
    #[serde(default)]
    pub genesis_time: u64,
}

fn default_block_time() -> u64 {
    crate::token::DEFAULT_BLOCK_TIME_S
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self {
            session_id: 0,
            duration_blocks: 0,
            block_time_s: default_block_time(),
            genesis_time: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSpec {
    pub block_offset: BlockNumber,
    pub account: Address,
    pub side: Side,
    pub energy_wh: u64,
    pub price: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliverySpec {
    /// Trade ids are assigned from 0 in matching order, so the id is also the
    /// trade's index.
    #[serde(alias = "pair_index")]
    pub trade_id: u64,
    pub delivered_wh: u64,
}

/// Optional gas-model settings. Unset fields keep their defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasOverrides {
    pub block_gas_limit: Option<u64>,
    pub block_time_s: Option<u64>,
    /// Entries merged into the default gas table.
    #[serde(default)]
    pub gas_table: BTreeMap<String, u64>,
    pub session_seconds: Option<u64>,
    pub resolution_s: Option<u64>,
}

impl GasOverrides {
    /// Flag values take precedence over `self`.
    pub fn merged_with(mut self, flags: &GasOverrides) -> Self {
        self.block_gas_limit = flags.block_gas_limit.or(self.block_gas_limit);
        self.block_time_s = flags.block_time_s.or(self.block_time_s);
        self.session_seconds = flags.session_seconds.or(self.session_seconds);
        self.resolution_s = flags.resolution_s.or(self.resolution_s);
        self.gas_table
            .extend(flags.gas_table.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    /// Builds the throughput report. `default_block_time` and
    /// `default_session_seconds` apply when not overridden; the sampling
    /// resolution defaults to one block.
    pub fn report(
        &self,
        default_block_time: u64,
        default_session_seconds: u64,
    ) -> Result<OverheadReport, GasError> {
        let mut params = GasParams::default();
        if let Some(limit) = self.block_gas_limit {
            params.set_block_gas_limit(limit)?;
        }
        params.set_block_time_s(self.block_time_s.unwrap_or(default_block_time))?;
        for (op, gas) in &self.gas_table {
            params.set_gas(op.clone(), *gas)?;
        }
        params.overhead_report(
            self.session_seconds.unwrap_or(default_session_seconds),
            self.resolution_s.unwrap_or(params.block_time_s()),
        )
    }
}

impl ScenarioFile {
    pub fn from_json(json: &str) -> Result<Self, RunError> {
        let scenario: ScenarioFile =
            serde_json::from_str(json).map_err(|e| RunError::Schema(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let json = fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&json)
    }

    /// Structural checks that need no ledger.
    pub fn validate(&self) -> Result<(), RunError> {
        let schema = |msg: String| Err(RunError::Schema(msg));
        if self.session.block_time_s == 0 {
            return schema("session.block_time_s must be positive".into());
        }
        let mut known = BTreeSet::new();
        let mut supply: Amount = 0;
        for acct in &self.accounts {
            let name = acct.address.as_str();
            if [MARKET_OPERATOR, MARKET_ESCROW, GENESIS_ACCOUNT].contains(&name)
                || name.starts_with(&format!("{MARKET_OPERATOR}/"))
            {
                return schema(format!("account address {name:?} is reserved"));
            }
            if !known.insert(&acct.address) {
                return schema(format!("duplicate account {name:?}"));
            }
            supply = match supply.checked_add(acct.initial_balance) {
                Some(s) => s,
                None => return schema("initial balances overflow".into()),
            };
        }
        for (i, order) in self.orders.iter().enumerate() {
            if !known.contains(&order.account) {
                return schema(format!(
                    "order #{i}: unknown account {:?}",
                    order.account.as_str()
                ));
            }
            if order.block_offset > self.session.duration_blocks {
                return schema(format!(
                    "order #{i}: block_offset {} is past the session end ({})",
                    order.block_offset, self.session.duration_blocks
                ));
            }
        }
        let session_end = self
            .session
            .duration_blocks
            .checked_mul(self.session.block_time_s)
            .and_then(|t| t.checked_add(self.session.genesis_time));
        if session_end.is_none() {
            return schema("session length overflows the clock".into());
        }
        Ok(())
    }
}

/// Everything a run produces, before it is written out.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: SessionReport,
    pub ledger: Ledger,
    pub throughput: OverheadReport,
}

impl RunOutput {
    /// The four output files as `(file name, contents)`.
    pub fn files(&self) -> Vec<(&'static str, Vec<u8>)> {
        let mut locks = Vec::new();
        write_lock_series_csv(&self.report.lock_count_series, &mut locks)
            .expect("writing to memory");
        let mut events = Vec::new();
        write_events_csv(self.ledger.events(), &mut events).expect("writing to memory");
        let mut throughput = Vec::new();
        self.throughput
            .write_csv(&mut throughput)
            .expect("writing to memory");
        let mut report = self.report.to_json().into_bytes();
        report.push(b'\n');
        vec![
            ("report.json", report),
            ("locks.csv", locks),
            ("events.csv", events),
            ("throughput.csv", throughput),
        ]
    }
}

fn addr(label: &str) -> Address {
    Address::new(label).expect("constant address is non-empty")
}

/// Runs a validated scenario in memory.
pub fn execute(scenario: &ScenarioFile) -> Result<RunOutput, RunError> {
    scenario.validate()?;
    let spec = &scenario.session;
    let genesis = addr(GENESIS_ACCOUNT);
    let supply: Amount = scenario.accounts.iter().map(|a| a.initial_balance).sum();
    let mut ledger = Ledger::with_block_time(
        genesis.clone(),
        supply,
        spec.genesis_time,
        spec.block_time_s,
    );
    let mut engine = MarketEngine::new(addr(MARKET_OPERATOR));
    let domain = |context: String| {
        move |source: MarketError| RunError::Domain {
            context,
            source: Box::new(source),
        }
    };

    for acct in &scenario.accounts {
        ledger
            .transfer(&genesis, &acct.address, acct.initial_balance)
            .map_err(|e| domain(format!("funding {}", acct.address))(e.into()))?;
        ledger.approve(
            &acct.address,
            &engine.agent_for(&acct.address),
            acct.approve_market,
        );
    }

    engine
        .open_session(
            &ledger,
            spec.session_id,
            spec.duration_blocks,
            addr(MARKET_ESCROW),
        )
        .map_err(domain("opening session".into()))?;
    let opened = ledger.current_block();

    let mut orders: Vec<(usize, &OrderSpec)> = scenario.orders.iter().enumerate().collect();
    orders.sort_by_key(|(_, o)| o.block_offset);
    for (i, order) in orders {
        let target = opened + order.block_offset;
        let context = || {
            format!(
                "order #{i} ({} {:?} {} Wh @ {})",
                order.account, order.side, order.energy_wh, order.price
            )
        };
        ledger
            .advance_block(target - ledger.current_block())
            .map_err(|e| domain(context())(e.into()))?;
        engine
            .place_order(
                &mut ledger,
                &order.account,
                order.side,
                order.energy_wh,
                order.price,
            )
            .map_err(domain(context()))?;
    }

    let end = opened + spec.duration_blocks;
    ledger
        .advance_block(end - ledger.current_block())
        .map_err(|e| domain("advancing to session end".into())(e.into()))?;
    let trades = engine
        .run_matching(&ledger)
        .map_err(domain("matching".into()))?;

    for delivery in &scenario.deliveries {
        let reading = MeterReading {
            trade_id: delivery.trade_id,
            delivered: delivery.delivered_wh,
        };
        engine
            .settle_trade(&mut ledger, reading)
            .map_err(domain(format!("delivery for trade {}", delivery.trade_id)))?;
    }
    let metered: BTreeSet<u64> = scenario.deliveries.iter().map(|d| d.trade_id).collect();
    for trade in trades.iter().filter(|t| !metered.contains(&t.id)) {
        let reading = MeterReading {
            trade_id: trade.id,
            delivered: 0,
        };
        engine
            .settle_trade(&mut ledger, reading)
            .map_err(domain(format!("settling unmetered trade {}", trade.id)))?;
    }

    let report = engine
        .close_session(&mut ledger)
        .map_err(domain("closing session".into()))?;

    let session_seconds = spec.duration_blocks * spec.block_time_s;
    let throughput = scenario.gas.report(spec.block_time_s, session_seconds)?;

    Ok(RunOutput {
        report,
        ledger,
        throughput,
    })
}

/// Loads `scenario_path`, runs it and writes the output files into `out_dir`.
/// Nothing is written unless the whole run succeeds.
pub fn run(scenario_path: &Path, out_dir: &Path) -> Result<RunOutput, RunError> {
    let scenario = ScenarioFile::load(scenario_path)?;
    let output = execute(&scenario)?;
    let files: Vec<(PathBuf, Vec<u8>)> = output
        .files()
        .into_iter()
        .map(|(name, bytes)| (out_dir.join(name), bytes))
        .collect();
    write_all_atomic(&files).map_err(|(path, source)| RunError::Io { path, source })?;
    Ok(output)
}

/// Settings of the `gas-report` command.
#[derive(Clone, Debug, Default)]
pub struct GasReportOptions {
    pub out: PathBuf,
    pub json_out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub overrides: GasOverrides,
}

/// Writes the throughput CSV (and optionally JSON) for the given settings.
/// Flags in `options.overrides` win over the config file.
pub fn gas_report(options: &GasReportOptions) -> Result<OverheadReport, RunError> {
    let from_file = match &options.config {
        Some(path) => {
            let json = fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str::<GasOverrides>(&json)
                .map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?
        }
        None => GasOverrides::default(),
    };
    let settings = from_file.merged_with(&options.overrides);
    let report = settings.report(crate::gas::DEFAULT_BLOCK_TIME_S, DEFAULT_SESSION_SECONDS)?;

    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("writing to memory");
    let mut files = vec![(options.out.clone(), csv)];
    if let Some(json_out) = &options.json_out {
        let mut json = report.to_json().into_bytes();
        json.push(b'\n');
        files.push((json_out.clone(), json));
    }
    write_all_atomic(&files).map_err(|(path, source)| RunError::Io { path, source })?;
    Ok(report)
}
