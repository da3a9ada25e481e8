use super::{Address, Amount, BlockNumber, LockEventRecord, LockStatus, LockedEntity, TokenError};
use std::collections::BTreeMap;

pub const TOKEN_NAME: &str = "LockableERC20";
pub const TOKEN_SYMBOL: &str = "LERC20";
pub const DEFAULT_BLOCK_TIME_S: u64 = 15;

/// Full token state.
///
/// Every mutating operation validates all of its preconditions before it
/// touches any field, so a call that returns `Err` leaves the ledger exactly
/// as it was. Zero balances, allowances and locked balances are not stored;
/// absent keys read as 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ledger {
    pub(super) total_supply: Amount,
    pub(super) balances: BTreeMap<Address, Amount>,
    pub(super) allowances: BTreeMap<(Address, Address), Amount>,
    /// Keyed by `(unlocking_address, locking_address)`.
    pub(super) locks: BTreeMap<(Address, Address), LockedEntity>,
    pub(super) locked_balances: BTreeMap<Address, Amount>,
    pub(super) current_block: BlockNumber,
    pub(super) genesis_time: u64,
    pub(super) block_time_s: u64,
    pub(super) event_log: Vec<LockEventRecord>,
}

/// A validated `_lock` that only needs to be written.
struct LockPlan {
    key: (Address, Address),
    entity: LockedEntity,
    owner_escrow_allowance: Amount,
    locked_balance: Amount,
    event: LockEventRecord,
}

fn store<K: Ord>(map: &mut BTreeMap<K, Amount>, key: K, value: Amount) {
    if value == 0 {
        map.remove(&key);
    } else {
        map.insert(key, value);
    }
}

impl Ledger {
    /// Mints `amount` to `initial_owner` at block 0 with the default 15 s
    /// block time.
    pub fn new(initial_owner: Address, amount: Amount, genesis_time: u64) -> Self {
        Self::with_block_time(initial_owner, amount, genesis_time, DEFAULT_BLOCK_TIME_S)
    }

    pub fn with_block_time(
        initial_owner: Address,
        amount: Amount,
        genesis_time: u64,
        block_time_s: u64,
    ) -> Self {
        let mut balances = BTreeMap::new();
        store(&mut balances, initial_owner, amount);
        Self {
            total_supply: amount,
            balances,
            allowances: BTreeMap::new(),
            locks: BTreeMap::new(),
            locked_balances: BTreeMap::new(),
            current_block: 0,
            genesis_time,
            block_time_s,
            event_log: Vec::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        TOKEN_NAME
    }

    pub fn symbol(&self) -> &'static str {
        TOKEN_SYMBOL
    }

    pub fn current_block(&self) -> BlockNumber {
        self.current_block
    }

    pub fn genesis_time(&self) -> u64 {
        self.genesis_time
    }

    pub fn block_time_s(&self) -> u64 {
        self.block_time_s
    }

    /// Wall-clock seconds of the current block.
    pub fn timestamp(&self) -> u64 {
        // advance_block refuses heights whose timestamp would overflow
        self.genesis_time + self.current_block * self.block_time_s
    }

    pub fn advance_block(&mut self, n: BlockNumber) -> Result<(), TokenError> {
        let block = self
            .current_block
            .checked_add(n)
            .ok_or(TokenError::Overflow)?;
        block
            .checked_mul(self.block_time_s)
            .and_then(|elapsed| elapsed.checked_add(self.genesis_time))
            .ok_or(TokenError::Overflow)?;
        self.current_block = block;
        Ok(())
    }

    pub fn total_supply(&self) -> Amount {
        self.total_supply
    }

    pub fn balance_of(&self, account: &Address) -> Amount {
        self.balances.get(account).copied().unwrap_or(0)
    }

    pub fn allowance(&self, owner: &Address, spender: &Address) -> Amount {
        self.allowances
            .get(&(owner.clone(), spender.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn locked_balance_of(&self, account: &Address) -> Amount {
        self.locked_balances.get(account).copied().unwrap_or(0)
    }

    pub fn unlocked_balance_of(&self, account: &Address) -> Amount {
        self.balance_of(account) - self.locked_balance_of(account)
    }

    pub fn lock_entity(
        &self,
        unlocking_address: &Address,
        locking_address: &Address,
    ) -> Option<&LockedEntity> {
        self.locks
            .get(&(unlocking_address.clone(), locking_address.clone()))
    }

    /// Non-zero balances in address order.
    pub fn balances(&self) -> impl Iterator<Item = (&Address, Amount)> {
        self.balances.iter().map(|(a, v)| (a, *v))
    }

    /// Non-zero allowances as `((owner, spender), amount)`.
    pub fn allowances(&self) -> impl Iterator<Item = ((&Address, &Address), Amount)> {
        self.allowances.iter().map(|((o, s), v)| ((o, s), *v))
    }

    /// Non-zero locked balances in address order.
    pub fn locked_balances(&self) -> impl Iterator<Item = (&Address, Amount)> {
        self.locked_balances.iter().map(|(a, v)| (a, *v))
    }

    /// All lock entities, active or not, as
    /// `(unlocking_address, locking_address, entity)`.
    pub fn locks(&self) -> impl Iterator<Item = (&Address, &Address, &LockedEntity)> {
        self.locks.iter().map(|((u, l), e)| (u, l, e))
    }

    pub fn active_lock_count(&self) -> usize {
        self.locks.values().filter(|e| e.is_active).count()
    }

    pub fn events(&self) -> &[LockEventRecord] {
        &self.event_log
    }

    pub fn events_filtered(&self, status: LockStatus) -> impl Iterator<Item = &LockEventRecord> {
        self.event_log.iter().filter(move |e| e.status == status)
    }

    pub fn approve(&mut self, caller: &Address, spender: &Address, amount: Amount) {
        store(
            &mut self.allowances,
            (caller.clone(), spender.clone()),
            amount,
        );
    }

    pub fn increase_allowance(
        &mut self,
        caller: &Address,
        spender: &Address,
        amount: Amount,
    ) -> Result<(), TokenError> {
        self.require_unlocked(caller, amount)?;
        let raised = self
            .allowance(caller, spender)
            .checked_add(amount)
            .ok_or(TokenError::Overflow)?;
        self.approve(caller, spender, raised);
        Ok(())
    }

    pub fn decrease_allowance(
        &mut self,
        caller: &Address,
        spender: &Address,
        amount: Amount,
    ) -> Result<(), TokenError> {
        let lowered = self.require_allowance(caller, spender, amount)?;
        self.approve(caller, spender, lowered);
        Ok(())
    }

    pub fn transfer(
        &mut self,
        caller: &Address,
        recipient: &Address,
        amount: Amount,
    ) -> Result<(), TokenError> {
        self.require_unlocked(caller, amount)?;
        self.move_balance(caller, recipient, amount);
        Ok(())
    }

    /// Moves `amount` from `sender` to `recipient` on `caller`'s allowance.
    pub fn transfer_from(
        &mut self,
        caller: &Address,
        sender: &Address,
        recipient: &Address,
        amount: Amount,
    ) -> Result<(), TokenError> {
        self.require_unlocked(sender, amount)?;
        let remaining = self.require_allowance(sender, caller, amount)?;
        self.move_balance(sender, recipient, amount);
        self.approve(sender, caller, remaining);
        Ok(())
    }

    /// Locks the caller's own tokens until `current_block + no_blocks`,
    /// releasable by `unlocking_address`.
    pub fn lock(
        &mut self,
        caller: &Address,
        amount: Amount,
        no_blocks: BlockNumber,
        unlocking_address: &Address,
    ) -> Result<(), TokenError> {
        if amount == 0 {
            return Err(TokenError::ZeroAmount);
        }
        self.require_unlocked(caller, amount)?;
        let escrow_allowance = self.allowance(caller, unlocking_address);
        let plan = self.plan_lock(
            caller,
            caller,
            amount,
            no_blocks,
            unlocking_address,
            escrow_allowance,
        )?;
        self.commit_lock(plan);
        Ok(())
    }

    /// Locks `owner`'s tokens on the caller's allowance. The caller becomes
    /// the locking address of the resulting lock.
    pub fn lock_from(
        &mut self,
        caller: &Address,
        owner: &Address,
        amount: Amount,
        no_blocks: BlockNumber,
        unlocking_address: &Address,
    ) -> Result<(), TokenError> {
        if amount == 0 {
            return Err(TokenError::ZeroAmount);
        }
        self.require_unlocked(owner, amount)?;
        let locker_allowance = self.require_allowance(owner, caller, amount)?;
        let escrow_allowance = if unlocking_address == caller {
            locker_allowance
        } else {
            self.allowance(owner, unlocking_address)
        };
        let plan = self.plan_lock(
            owner,
            caller,
            amount,
            no_blocks,
            unlocking_address,
            escrow_allowance,
        )?;
        self.approve(owner, caller, locker_allowance);
        self.commit_lock(plan);
        Ok(())
    }

    /// True when the lock at `(unlocking_address, locking_address)` is active,
    /// belongs to `owner`, holds at least `amount` and is due at `at_block`.
    pub fn verify_lock(
        &self,
        owner: &Address,
        amount: Amount,
        unlocking_address: &Address,
        locking_address: &Address,
        at_block: BlockNumber,
    ) -> bool {
        self.lock_entity(unlocking_address, locking_address)
            .is_some_and(|e| {
                e.is_active && &e.owner == owner && e.amount >= amount && at_block >= e.block_no
            })
    }

    /// Releases `amount` of `owner`'s lock and transfers it to `recipient`.
    /// The caller is the unlocking address and spends its allowance over
    /// `owner`, which the lock granted.
    pub fn unlock_transfer(
        &mut self,
        caller: &Address,
        owner: &Address,
        amount: Amount,
        recipient: &Address,
        locking_address: &Address,
    ) -> Result<(), TokenError> {
        self.require_releasable(caller, owner, amount, locking_address)?;
        let remaining = self.require_allowance(owner, caller, amount)?;

        self.release(caller, owner, amount, locking_address);
        // the released tokens are now unlocked, so the transfer guard holds
        self.move_balance(owner, recipient, amount);
        self.approve(owner, caller, remaining);
        self.push_event(
            owner,
            locking_address,
            amount,
            0,
            caller,
            LockStatus::UnlockTransfer,
        );
        Ok(())
    }

    /// Releases `amount` of `owner`'s lock, leaving the tokens with the owner.
    /// The allowance granted to the caller at lock time is withdrawn by the
    /// same amount (never below zero).
    pub fn unlock_without_transfer(
        &mut self,
        caller: &Address,
        owner: &Address,
        amount: Amount,
        locking_address: &Address,
    ) -> Result<(), TokenError> {
        self.require_releasable(caller, owner, amount, locking_address)?;

        self.release(caller, owner, amount, locking_address);
        let remaining = self.allowance(owner, caller).saturating_sub(amount);
        self.approve(owner, caller, remaining);
        self.push_event(
            owner,
            locking_address,
            amount,
            0,
            caller,
            LockStatus::UnlockWithoutTransfer,
        );
        Ok(())
    }

    /// Checks the structural invariants and returns a description of every
    /// violation found. An empty result means the ledger is consistent.
    pub fn audit(&self) -> Vec<String> {
        let mut problems = Vec::new();

        let supply: Option<Amount> = self
            .balances
            .values()
            .try_fold(0u128, |acc, v| acc.checked_add(*v));
        if supply != Some(self.total_supply) {
            problems.push(format!(
                "balances sum to {supply:?}, total supply is {}",
                self.total_supply
            ));
        }

        let mut from_locks: BTreeMap<&Address, Amount> = BTreeMap::new();
        for ((unlocking, locking), entity) in &self.locks {
            if entity.is_active {
                if entity.amount == 0 {
                    problems.push(format!(
                        "active lock ({unlocking}, {locking}) holds zero tokens"
                    ));
                }
                let slot = from_locks.entry(&entity.owner).or_default();
                *slot = slot.saturating_add(entity.amount);
            }
        }
        for account in self
            .locked_balances
            .keys()
            .chain(from_locks.keys().copied())
        {
            let recorded = self.locked_balance_of(account);
            let summed = from_locks.get(account).copied().unwrap_or(0);
            if recorded != summed {
                problems.push(format!(
                    "{account}: locked balance {recorded}, active locks hold {summed}"
                ));
            }
            if recorded > self.balance_of(account) {
                problems.push(format!(
                    "{account}: locked balance {recorded} exceeds balance {}",
                    self.balance_of(account)
                ));
            }
        }

        if self.balances.values().any(|v| *v == 0)
            || self.allowances.values().any(|v| *v == 0)
            || self.locked_balances.values().any(|v| *v == 0)
        {
            problems.push("zero-valued entry stored".to_owned());
        }
        problems.sort();
        problems.dedup();
        problems
    }

    fn require_unlocked(&self, account: &Address, amount: Amount) -> Result<(), TokenError> {
        let available = self.unlocked_balance_of(account);
        if amount > available {
            return Err(TokenError::InsufficientUnlockedBalance {
                account: account.clone(),
                requested: amount,
                available,
            });
        }
        Ok(())
    }

    /// Returns the allowance left after spending `amount`.
    fn require_allowance(
        &self,
        owner: &Address,
        spender: &Address,
        amount: Amount,
    ) -> Result<Amount, TokenError> {
        let available = self.allowance(owner, spender);
        available
            .checked_sub(amount)
            .ok_or_else(|| TokenError::InsufficientAllowance {
                owner: owner.clone(),
                spender: spender.clone(),
                requested: amount,
                available,
            })
    }

    fn require_releasable(
        &self,
        unlocking_address: &Address,
        owner: &Address,
        amount: Amount,
        locking_address: &Address,
    ) -> Result<(), TokenError> {
        if self.verify_lock(
            owner,
            amount,
            unlocking_address,
            locking_address,
            self.current_block,
        ) {
            Ok(())
        } else {
            Err(TokenError::LockVerificationFailed {
                owner: owner.clone(),
                amount,
                unlocking_address: unlocking_address.clone(),
                locking_address: locking_address.clone(),
            })
        }
    }

    fn plan_lock(
        &self,
        owner: &Address,
        locker: &Address,
        amount: Amount,
        no_blocks: BlockNumber,
        unlocking_address: &Address,
        escrow_allowance: Amount,
    ) -> Result<LockPlan, TokenError> {
        let unlock_block = self
            .current_block
            .checked_add(no_blocks)
            .ok_or(TokenError::Overflow)?;
        let key = (unlocking_address.clone(), locker.clone());
        let entity = match self.locks.get(&key) {
            Some(existing) if existing.is_active => {
                if &existing.owner != owner {
                    return Err(TokenError::LockSlotOwnerMismatch {
                        unlocking_address: unlocking_address.clone(),
                        locking_address: locker.clone(),
                        existing_owner: existing.owner.clone(),
                        owner: owner.clone(),
                    });
                }
                LockedEntity {
                    owner: owner.clone(),
                    amount: existing
                        .amount
                        .checked_add(amount)
                        .ok_or(TokenError::Overflow)?,
                    block_no: existing.block_no.max(unlock_block),
                    is_active: true,
                }
            }
            _ => LockedEntity {
                owner: owner.clone(),
                amount,
                block_no: unlock_block,
                is_active: true,
            },
        };
        let owner_escrow_allowance = escrow_allowance
            .checked_add(amount)
            .ok_or(TokenError::Overflow)?;
        let locked_balance = self
            .locked_balance_of(owner)
            .checked_add(amount)
            .ok_or(TokenError::Overflow)?;
        let event = self.event(
            owner,
            locker,
            amount,
            no_blocks,
            unlocking_address,
            LockStatus::Lock,
        );
        Ok(LockPlan {
            key,
            entity,
            owner_escrow_allowance,
            locked_balance,
            event,
        })
    }

    fn commit_lock(&mut self, plan: LockPlan) {
        let owner = plan.entity.owner.clone();
        let unlocking = plan.key.0.clone();
        self.locks.insert(plan.key, plan.entity);
        self.approve(&owner, &unlocking, plan.owner_escrow_allowance);
        store(&mut self.locked_balances, owner, plan.locked_balance);
        self.event_log.push(plan.event);
    }

    /// Lock bookkeeping shared by both unlock flavours. Callers have run
    /// `require_releasable`.
    fn release(
        &mut self,
        unlocking_address: &Address,
        owner: &Address,
        amount: Amount,
        locking_address: &Address,
    ) {
        let key = (unlocking_address.clone(), locking_address.clone());
        let entity = self.locks.get_mut(&key).expect("verified lock must exist");
        if amount < entity.amount {
            entity.amount -= amount;
        } else {
            entity.is_active = false;
        }
        let locked = self.locked_balance_of(owner) - amount;
        store(&mut self.locked_balances, owner.clone(), locked);
    }

    fn move_balance(&mut self, from: &Address, to: &Address, amount: Amount) {
        if from == to || amount == 0 {
            return;
        }
        // balances sum to total_supply, so the credit cannot overflow
        let debited = self.balance_of(from) - amount;
        let credited = self.balance_of(to) + amount;
        store(&mut self.balances, from.clone(), debited);
        store(&mut self.balances, to.clone(), credited);
    }

    fn event(
        &self,
        owner: &Address,
        locking_address: &Address,
        amount: Amount,
        no_blocks: BlockNumber,
        unlocking_address: &Address,
        status: LockStatus,
    ) -> LockEventRecord {
        let timestamp = self.timestamp();
        LockEventRecord {
            owner: owner.clone(),
            locking_address: locking_address.clone(),
            amount,
            no_blocks,
            unlocking_address: unlocking_address.clone(),
            status,
            timestamp,
            hour: ((timestamp / 3600) % 24) as u8,
            min: ((timestamp / 60) % 60) as u8,
        }
    }

    fn push_event(
        &mut self,
        owner: &Address,
        locking_address: &Address,
        amount: Amount,
        no_blocks: BlockNumber,
        unlocking_address: &Address,
        status: LockStatus,
    ) {
        let event = self.event(
            owner,
            locking_address,
            amount,
            no_blocks,
            unlocking_address,
            status,
        );
        self.event_log.push(event);
    }
}
