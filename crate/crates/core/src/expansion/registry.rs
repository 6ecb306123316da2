//! Lookup tables from (unit, role, hour) to model variables and rows.

use std::collections::BTreeMap;

use gep_milp::{RowId, VarId};

/// Decision-variable roles. Each corresponds to one symbol of the
/// formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    On,
    Start,
    Stop,
    AboveMin,
    Discharge,
    Charge,
    Level,
    ScrUp,
    ScrDown,
    TcrUp,
    TcrDown,
    ResProd,
    LoadShed,
    Angle,
    Flow,
    Invest,
}

impl Role {
    pub const ALL: [Role; 16] = [
        Role::On,
        Role::Start,
        Role::Stop,
        Role::AboveMin,
        Role::Discharge,
        Role::Charge,
        Role::Level,
        Role::ScrUp,
        Role::ScrDown,
        Role::TcrUp,
        Role::TcrDown,
        Role::ResProd,
        Role::LoadShed,
        Role::Angle,
        Role::Flow,
        Role::Invest,
    ];

    /// Prefix of generated variable names.
    pub fn prefix(self) -> &'static str {
        match self {
            Role::On => "u",
            Role::Start => "v",
            Role::Stop => "w",
            Role::AboveMin => "pmin",
            Role::Discharge => "dis",
            Role::Charge => "ch",
            Role::Level => "e",
            Role::ScrUp => "scrup",
            Role::ScrDown => "scrdn",
            Role::TcrUp => "tcrup",
            Role::TcrDown => "tcrdn",
            Role::ResProd => "p",
            Role::LoadShed => "ls",
            Role::Angle => "delta",
            Role::Flow => "flow",
            Role::Invest => "inv",
        }
    }

    /// Formulation symbol; storage and thermal reserve variables share one.
    pub fn symbol(self) -> &'static str {
        match self {
            Role::On => "u",
            Role::Start => "v",
            Role::Stop => "w",
            Role::AboveMin => "p^min",
            Role::Discharge => "p^dis",
            Role::Charge => "p^ch",
            Role::Level => "e",
            Role::ScrUp => "r^SCR,up",
            Role::ScrDown => "r^SCR,down",
            Role::TcrUp => "r^TCR,up",
            Role::TcrDown => "r^TCR,down",
            Role::ResProd => "p_r",
            Role::LoadShed => "ls",
            Role::Angle => "delta",
            Role::Flow => "p_l",
            Role::Invest => "u^inv",
        }
    }

    pub fn is_hourly(self) -> bool {
        self != Role::Invest
    }
}

/// Constraint families emitted by the builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKind {
    /// Above-minimum output covers downward reserve.
    DownGen,
    /// Upper output limit with start-up capability (min up time 1).
    UpGenStart,
    /// Upper output limit with shut-down capability (min up time 1).
    UpGenStop,
    /// Combined upper output limit (min up time 2 or more).
    UpGen,
    Logic,
    Maintenance,
    RampUp,
    RampDown,
    MinUp,
    MinDown,
    StorageBalance,
    StorageTerminal,
    StorageUpReserve,
    StorageDownReserve,
    DamDownFloor,
    DamDownCeiling,
    InvestOn,
    InvestDischarge,
    InvestCharge,
    InvestLevelMax,
    InvestLevelMin,
    ResCandidateCap,
    TcrUpRequirement,
    TcrDownRequirement,
    ScrUpRequirement,
    ScrDownRequirement,
    Balance,
    LineFlow,
    ResTarget,
}

impl RowKind {
    pub fn prefix(self) -> &'static str {
        match self {
            RowKind::DownGen => "dngen",
            RowKind::UpGenStart => "upsu",
            RowKind::UpGenStop => "upsd",
            RowKind::UpGen => "upgen",
            RowKind::Logic => "logic",
            RowKind::Maintenance => "maint",
            RowKind::RampUp => "rampup",
            RowKind::RampDown => "rampdn",
            RowKind::MinUp => "minup",
            RowKind::MinDown => "mindn",
            RowKind::StorageBalance => "soc",
            RowKind::StorageTerminal => "socend",
            RowKind::StorageUpReserve => "stup",
            RowKind::StorageDownReserve => "stdn",
            RowKind::DamDownFloor => "damlo",
            RowKind::DamDownCeiling => "damhi",
            RowKind::InvestOn => "invon",
            RowKind::InvestDischarge => "invdis",
            RowKind::InvestCharge => "invch",
            RowKind::InvestLevelMax => "invemax",
            RowKind::InvestLevelMin => "invemin",
            RowKind::ResCandidateCap => "rescap",
            RowKind::TcrUpRequirement => "reqtcrup",
            RowKind::TcrDownRequirement => "reqtcrdn",
            RowKind::ScrUpRequirement => "reqscrup",
            RowKind::ScrDownRequirement => "reqscrdn",
            RowKind::Balance => "bal",
            RowKind::LineFlow => "flowdef",
            RowKind::ResTarget => "restarget",
        }
    }
}

/// Key used for rows that belong to the whole system rather than a unit.
pub const SYSTEM_KEY: &str = "system";

type Table<K, V> = BTreeMap<String, BTreeMap<K, Vec<Option<V>>>>;

fn insert<K: Ord + Copy, V>(table: &mut Table<K, V>, owner: &str, key: K, slot: usize, value: V) {
    let v = table
        .entry(owner.to_string())
        .or_default()
        .entry(key)
        .or_default();
    if v.len() <= slot {
        v.resize_with(slot + 1, || None);
    }
    debug_assert!(v[slot].is_none(), "registry slot filled twice");
    v[slot] = Some(value);
}

fn lookup<K: Ord, V: Copy>(table: &Table<K, V>, owner: &str, key: K, slot: usize) -> Option<V> {
    table.get(owner)?.get(&key)?.get(slot).copied().flatten()
}

/// Maps unit, role and hour to variables (and constraint families to rows)
/// so builders and decoders agree on what each column means.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableRegistry {
    vars: Table<Role, VarId>,
    rows: Table<RowKind, RowId>,
    var_keys: Vec<(String, Role, Option<usize>)>,
}

impl VariableRegistry {
    pub(crate) fn record_var(&mut self, owner: &str, role: Role, hour: Option<usize>, id: VarId) {
        debug_assert_eq!(id.0, self.var_keys.len());
        insert(&mut self.vars, owner, role, hour.unwrap_or(0), id);
        self.var_keys.push((owner.to_string(), role, hour));
    }

    pub(crate) fn record_row(&mut self, owner: &str, kind: RowKind, hour: Option<usize>, id: RowId) {
        insert(&mut self.rows, owner, kind, hour.unwrap_or(0), id);
    }

    /// Hourly variable of `owner`.
    pub fn var(&self, owner: &str, role: Role, hour: usize) -> Option<VarId> {
        lookup(&self.vars, owner, role, hour)
    }

    /// Investment variable of a candidate.
    pub fn invest(&self, candidate: &str) -> Option<VarId> {
        lookup(&self.vars, candidate, Role::Invest, 0)
    }

    pub fn row(&self, owner: &str, kind: RowKind, hour: usize) -> Option<RowId> {
        lookup(&self.rows, owner, kind, hour)
    }

    /// All hourly variables of one role for `owner`, in hour order.
    pub fn series(&self, owner: &str, role: Role) -> Vec<VarId> {
        self.vars
            .get(owner)
            .and_then(|m| m.get(&role))
            .map(|v| v.iter().flatten().copied().collect())
            .unwrap_or_default()
    }

    pub fn has_role(&self, owner: &str, role: Role) -> bool {
        self.vars.get(owner).is_some_and(|m| m.contains_key(&role))
    }

    /// (owner, role, hour) of a variable.
    pub fn key(&self, id: VarId) -> Option<(&str, Role, Option<usize>)> {
        self.var_keys.get(id.0).map(|(o, r, h)| (o.as_str(), *r, *h))
    }

    pub fn num_vars(&self) -> usize {
        self.var_keys.len()
    }

    /// Number of variables per role.
    pub fn role_counts(&self) -> BTreeMap<Role, usize> {
        let mut out = BTreeMap::new();
        for (_, role, _) in &self.var_keys {
            *out.entry(*role).or_insert(0) += 1;
        }
        out
    }
}
