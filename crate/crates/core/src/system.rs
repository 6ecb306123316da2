//! Power system and scenario data.
//!
//! All series are hourly with one entry per hour of [`PowerSystem::hours`].
//! Powers are MW, energies MWh, costs currency per MWh (investments currency
//! per year, or per MW-year for renewable candidates).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::timegrid::Compression;

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub zone: String,
    pub demand: Vec<f64>,
    /// Net injection from unmodeled neighbours; negative values are exports.
    pub fixed_injection: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Per unit on the system base.
    pub susceptance: f64,
    pub limit: f64,
    pub is_tie_line: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Nuclear,
    Biomass,
    Fossil,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalUnit {
    pub id: String,
    pub bus: String,
    pub fuel: Fuel,
    pub p_min: f64,
    pub p_max: f64,
    pub startup_cap: f64,
    pub shutdown_cap: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub min_up: usize,
    pub min_down: usize,
    pub cost_prod: f64,
    pub cost_startup: f64,
    /// 1 when the unit may run, 0 during planned maintenance.
    pub availability: Vec<f64>,
    pub scr_eligible: bool,
    pub tcr_eligible: bool,
    pub initial_on: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageKind {
    Battery,
    PumpDaily,
    PumpSeasonal,
    Dam,
}

impl StorageKind {
    pub fn is_hydro(self) -> bool {
        !matches!(self, StorageKind::Battery)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageUnit {
    pub id: String,
    pub bus: String,
    pub kind: StorageKind,
    pub p_max_dis: f64,
    pub p_max_ch: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub e_initial: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    /// Natural inflow per hour, MWh.
    pub inflow: Vec<f64>,
    pub cost_charge: f64,
    pub scr_eligible: bool,
    pub tcr_eligible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResTechnology {
    Pv,
    Wind,
    RunOfRiver,
    /// Biomass or waste plants dispatched along a fixed profile.
    Biomass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResUnit {
    pub id: String,
    pub bus: String,
    pub technology: ResTechnology,
    pub p_max: f64,
    pub capacity_factor: Vec<f64>,
    pub cost_prod: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidatePayload {
    Thermal(ThermalUnit),
    Storage(StorageUnit),
    Res(ResUnit),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CandidateKind {
    Thermal,
    Storage,
    Res,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateUnit {
    pub payload: CandidatePayload,
    /// Per year for thermal and storage, per MW-year for renewables.
    pub invest_cost: f64,
    /// Largest buildable capacity, renewables only.
    pub invest_cap_max: f64,
    pub counts_toward_res_target: bool,
}

impl CandidateUnit {
    pub fn id(&self) -> &str {
        match &self.payload {
            CandidatePayload::Thermal(u) => &u.id,
            CandidatePayload::Storage(u) => &u.id,
            CandidatePayload::Res(u) => &u.id,
        }
    }

    pub fn bus(&self) -> &str {
        match &self.payload {
            CandidatePayload::Thermal(u) => &u.bus,
            CandidatePayload::Storage(u) => &u.bus,
            CandidatePayload::Res(u) => &u.bus,
        }
    }

    pub fn kind(&self) -> CandidateKind {
        match self.payload {
            CandidatePayload::Thermal(_) => CandidateKind::Thermal,
            CandidatePayload::Storage(_) => CandidateKind::Storage,
            CandidatePayload::Res(_) => CandidateKind::Res,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReservePolicy {
    pub scr_up: Vec<f64>,
    pub scr_down: Vec<f64>,
    pub tcr_up: Vec<f64>,
    pub tcr_down: Vec<f64>,
    pub a_wind_up: f64,
    pub a_wind_down: f64,
    pub a_pv_up: f64,
    pub a_pv_down: f64,
}

/// Which storage flow carries the storage production cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageCostSide {
    /// Cost of purchasing energy while charging (pumping).
    #[default]
    Charge,
    Discharge,
}

pub const DEFAULT_LOAD_SHED_COST: f64 = 3000.0;
pub const DEFAULT_WATER_INCENTIVE: f64 = 1e-4;
pub const DEFAULT_BASE_MVA: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub load_shed_cost: f64,
    /// Annual energy target for flagged renewables, MWh.
    pub res_target_energy: Option<f64>,
    pub water_incentive: f64,
    /// Angle reference; the first bus when absent.
    pub slack_bus: Option<String>,
    pub compression: Compression,
    pub storage_cost_side: StorageCostSide,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            load_shed_cost: DEFAULT_LOAD_SHED_COST,
            res_target_energy: None,
            water_incentive: DEFAULT_WATER_INCENTIVE,
            slack_bus: None,
            compression: Compression::FullYear,
            storage_cost_side: StorageCostSide::Charge,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSystem {
    pub hours: usize,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub thermal: Vec<ThermalUnit>,
    pub storage: Vec<StorageUnit>,
    pub res: Vec<ResUnit>,
    pub candidates: Vec<CandidateUnit>,
    pub reserves: ReservePolicy,
}

impl PowerSystem {
    /// An empty system over `hours` with zero reserve requirements.
    pub fn empty(hours: usize) -> Self {
        Self {
            hours,
            base_mva: DEFAULT_BASE_MVA,
            buses: Vec::new(),
            lines: Vec::new(),
            thermal: Vec::new(),
            storage: Vec::new(),
            res: Vec::new(),
            candidates: Vec::new(),
            reserves: ReservePolicy {
                scr_up: vec![0.0; hours],
                scr_down: vec![0.0; hours],
                tcr_up: vec![0.0; hours],
                tcr_down: vec![0.0; hours],
                ..ReservePolicy::default()
            },
        }
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn slack_bus<'a>(&'a self, config: &'a ScenarioConfig) -> Option<&'a str> {
        config
            .slack_bus
            .as_deref()
            .or_else(|| self.buses.first().map(|b| b.id.as_str()))
    }

    /// Applies `f` to every hourly series, producing a system over `hours`.
    pub fn map_series<E>(
        &self,
        hours: usize,
        mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    ) -> Result<PowerSystem, E> {
        let mut out = self.clone();
        out.hours = hours;
        for b in &mut out.buses {
            b.demand = f(&b.demand)?;
            b.fixed_injection = f(&b.fixed_injection)?;
        }
        let mut thermal = |u: &mut ThermalUnit| -> Result<(), E> {
            u.availability = f(&u.availability)?;
            Ok(())
        };
        for u in &mut out.thermal {
            thermal(u)?;
        }
        for c in &mut out.candidates {
            if let CandidatePayload::Thermal(u) = &mut c.payload {
                thermal(u)?;
            }
        }
        for u in &mut out.storage {
            u.inflow = f(&u.inflow)?;
        }
        for u in &mut out.res {
            u.capacity_factor = f(&u.capacity_factor)?;
        }
        for c in &mut out.candidates {
            match &mut c.payload {
                CandidatePayload::Storage(u) => u.inflow = f(&u.inflow)?,
                CandidatePayload::Res(u) => u.capacity_factor = f(&u.capacity_factor)?,
                CandidatePayload::Thermal(_) => {}
            }
        }
        let r = &mut out.reserves;
        r.scr_up = f(&r.scr_up)?;
        r.scr_down = f(&r.scr_down)?;
        r.tcr_up = f(&r.tcr_up)?;
        r.tcr_down = f(&r.tcr_down)?;
        Ok(out)
    }
}

/// Model symbols that parameterize the model, each mapped to the field that
/// stores it.
pub const PARAMETER_SYMBOLS: &[(&str, &str)] = &[
    ("C^prod_j", "ThermalUnit.cost_prod"),
    ("C^su_j", "ThermalUnit.cost_startup"),
    ("P^min_j", "ThermalUnit.p_min"),
    ("P^max_j", "ThermalUnit.p_max"),
    ("SU_j", "ThermalUnit.startup_cap"),
    ("SD_j", "ThermalUnit.shutdown_cap"),
    ("M^ut_j", "ThermalUnit.min_up"),
    ("M^dt_j", "ThermalUnit.min_down"),
    ("S_{j,t}", "ThermalUnit.availability"),
    ("C^prod_s", "StorageUnit.cost_charge"),
    ("P^max,dis_s", "StorageUnit.p_max_dis"),
    ("P^max,ch_s", "StorageUnit.p_max_ch"),
    ("E^min_s", "StorageUnit.e_min"),
    ("E^max_s", "StorageUnit.e_max"),
    ("E_{s,0}", "StorageUnit.e_initial"),
    ("eta^ch_s", "StorageUnit.eta_ch"),
    ("eta^dis_s", "StorageUnit.eta_dis"),
    ("xi_{s,t}", "StorageUnit.inflow"),
    ("C^prod_r", "ResUnit.cost_prod"),
    ("P^max_r", "ResUnit.p_max"),
    ("CF_{r,t}", "ResUnit.capacity_factor"),
    ("C^ls", "ScenarioConfig.load_shed_cost"),
    ("I_c", "CandidateUnit.invest_cost"),
    ("P^inv,max_c", "CandidateUnit.invest_cap_max"),
    ("TCR^up,sys_t", "ReservePolicy.tcr_up"),
    ("TCR^down,sys_t", "ReservePolicy.tcr_down"),
    ("SCR^up,sys_t", "ReservePolicy.scr_up"),
    ("SCR^down,sys_t", "ReservePolicy.scr_down"),
    ("A^up_wind", "ReservePolicy.a_wind_up"),
    ("A^down_wind", "ReservePolicy.a_wind_down"),
    ("A^up_pv", "ReservePolicy.a_pv_up"),
    ("A^down_pv", "ReservePolicy.a_pv_down"),
    ("P^D_{n,t}", "Bus.demand"),
    ("B_l", "Line.susceptance"),
    ("P^max_l", "Line.limit"),
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    /// Offending record, e.g. `thermal G1`.
    pub entity: String,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.entity, self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: &str, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            entity: entity.to_string(),
            field: field.to_string(),
            message: message.into(),
        });
    }

    /// True when some violation mentions `needle` in its message.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))
}

struct Checker<'a> {
    report: ValidationReport,
    hours: usize,
    buses: BTreeSet<&'a str>,
}

impl Checker<'_> {
    fn series(&mut self, entity: &str, field: &str, s: &[f64]) -> bool {
        if s.len() != self.hours {
            self.report.push(
                entity,
                field,
                format!("series has {} entries, horizon is {}", s.len(), self.hours),
            );
            return false;
        }
        if let Some(h) = s.iter().position(|v| !v.is_finite()) {
            self.report.push(entity, field, format!("non-finite value at hour {h}"));
            return false;
        }
        true
    }

    fn nonneg_series(&mut self, entity: &str, field: &str, s: &[f64]) {
        if self.series(entity, field, s) {
            if let Some(h) = s.iter().position(|&v| v < 0.0) {
                self.report
                    .push(entity, field, format!("negative value {} at hour {h}", s[h]));
            }
        }
    }

    fn bus_ref(&mut self, entity: &str, field: &str, bus: &str) {
        if !self.buses.contains(bus) {
            self.report.push(entity, field, format!("unknown bus `{bus}`"));
        }
    }

    fn finite(&mut self, entity: &str, field: &str, v: f64) -> bool {
        if !v.is_finite() {
            self.report.push(entity, field, format!("value {v} is not finite"));
            return false;
        }
        true
    }

    fn thermal(&mut self, u: &ThermalUnit, entity: &str) {
        self.bus_ref(entity, "bus", &u.bus);
        let fields = [
            ("p_min", u.p_min),
            ("p_max", u.p_max),
            ("startup_cap", u.startup_cap),
            ("shutdown_cap", u.shutdown_cap),
            ("ramp_up", u.ramp_up),
            ("ramp_down", u.ramp_down),
            ("cost_prod", u.cost_prod),
            ("cost_startup", u.cost_startup),
        ];
        if !fields.iter().all(|&(f, v)| self.finite(entity, f, v)) {
            return;
        }
        if !(0.0 <= u.p_min && u.p_min <= u.startup_cap && u.startup_cap <= u.p_max) {
            self.report
                .push(entity, "startup_cap", "requires 0 <= p_min <= startup_cap <= p_max");
        }
        if !(u.p_min <= u.shutdown_cap && u.shutdown_cap <= u.p_max) {
            self.report
                .push(entity, "shutdown_cap", "requires p_min <= shutdown_cap <= p_max");
        }
        if u.min_up < 1 {
            self.report.push(entity, "min_up", "must be at least 1 hour");
        }
        if u.min_down < 1 {
            self.report.push(entity, "min_down", "must be at least 1 hour");
        }
        if u.ramp_up <= 0.0 {
            self.report.push(entity, "ramp_up", "must be positive");
        }
        if u.ramp_down <= 0.0 {
            self.report.push(entity, "ramp_down", "must be positive");
        }
        if u.cost_prod < 0.0 || u.cost_startup < 0.0 {
            self.report.push(entity, "cost_prod", "costs must be nonnegative");
        }
        if self.series(entity, "availability", &u.availability) {
            if let Some(h) = u.availability.iter().position(|&v| v != 0.0 && v != 1.0) {
                self.report.push(
                    entity,
                    "availability",
                    format!("value {} at hour {h} is not 0 or 1", u.availability[h]),
                );
            }
        }
    }

    fn storage(&mut self, u: &StorageUnit, entity: &str) {
        self.bus_ref(entity, "bus", &u.bus);
        let fields = [
            ("p_max_dis", u.p_max_dis),
            ("p_max_ch", u.p_max_ch),
            ("e_min", u.e_min),
            ("e_max", u.e_max),
            ("e_initial", u.e_initial),
            ("eta_ch", u.eta_ch),
            ("eta_dis", u.eta_dis),
            ("cost_charge", u.cost_charge),
        ];
        if !fields.iter().all(|&(f, v)| self.finite(entity, f, v)) {
            return;
        }
        if !(u.eta_ch > 0.0 && u.eta_ch <= 1.0) {
            self.report.push(entity, "eta_ch", "efficiency must lie in (0, 1]");
        }
        if !(u.eta_dis > 0.0 && u.eta_dis <= 1.0) {
            self.report.push(entity, "eta_dis", "efficiency must lie in (0, 1]");
        }
        if u.p_max_dis < 0.0 || u.p_max_ch < 0.0 {
            self.report.push(entity, "p_max_dis", "power ratings must be nonnegative");
        }
        if !(0.0 <= u.e_min && u.e_min <= u.e_initial && u.e_initial <= u.e_max) {
            self.report
                .push(entity, "e_initial", "requires 0 <= e_min <= e_initial <= e_max");
        }
        if u.cost_charge < 0.0 {
            self.report.push(entity, "cost_charge", "must be nonnegative");
        }
        if u.kind == StorageKind::Dam && u.p_max_ch != 0.0 {
            self.report.push(entity, "p_max_ch", "dam cannot pump: p_max_ch must be 0");
        }
        if u.kind == StorageKind::Battery && u.tcr_eligible {
            self.report.push(entity, "tcr_eligible", "battery TCR must be zero");
        }
        self.nonneg_series(entity, "inflow", &u.inflow);
        if u.kind == StorageKind::Battery && u.inflow.iter().any(|&v| v != 0.0) {
            self.report.push(entity, "inflow", "battery inflow must be zero");
        }
    }

    fn res(&mut self, u: &ResUnit, entity: &str, candidate: bool) {
        self.bus_ref(entity, "bus", &u.bus);
        if !self.finite(entity, "p_max", u.p_max) || !self.finite(entity, "cost_prod", u.cost_prod) {
            return;
        }
        if u.p_max < 0.0 && !candidate {
            self.report.push(entity, "p_max", "must be nonnegative");
        }
        if u.cost_prod < 0.0 {
            self.report.push(entity, "cost_prod", "must be nonnegative");
        }
        if self.series(entity, "capacity_factor", &u.capacity_factor) {
            if let Some(h) = u.capacity_factor.iter().position(|v| !(0.0..=1.0).contains(v)) {
                self.report.push(
                    entity,
                    "capacity_factor",
                    format!("value {} at hour {h} outside [0, 1]", u.capacity_factor[h]),
                );
            }
        }
    }
}

/// Collects every invariant violation; an empty report means the data is
/// usable by the model builders.
pub fn validate_system(system: &PowerSystem, config: &ScenarioConfig) -> ValidationReport {
    let mut c = Checker {
        report: ValidationReport::default(),
        hours: system.hours,
        buses: system.buses.iter().map(|b| b.id.as_str()).collect(),
    };

    if !(system.base_mva.is_finite() && system.base_mva > 0.0) {
        c.report.push("system", "base_mva", "must be positive");
    }

    // ids: unique per table, and unit ids unique across all unit kinds
    let mut bus_ids = BTreeSet::new();
    for b in &system.buses {
        let entity = format!("bus {}", b.id);
        if !valid_id(&b.id) {
            c.report.push(&entity, "id", "ids use letters, digits, `_`, `-`, `.`");
        }
        if !bus_ids.insert(b.id.as_str()) {
            c.report.push(&entity, "id", "duplicate bus id");
        }
        if !valid_id(&b.zone) {
            c.report.push(&entity, "zone", "zones use letters, digits, `_`, `-`, `.`");
        }
        c.nonneg_series(&entity, "demand", &b.demand);
        c.series(&entity, "fixed_injection", &b.fixed_injection);
    }

    let mut line_ids = BTreeSet::new();
    for l in &system.lines {
        let entity = format!("line {}", l.id);
        if !valid_id(&l.id) {
            c.report.push(&entity, "id", "ids use letters, digits, `_`, `-`, `.`");
        }
        if !line_ids.insert(l.id.as_str()) {
            c.report.push(&entity, "id", "duplicate line id");
        }
        c.bus_ref(&entity, "from_bus", &l.from_bus);
        c.bus_ref(&entity, "to_bus", &l.to_bus);
        if l.from_bus == l.to_bus {
            c.report.push(&entity, "to_bus", "line must connect two different buses");
        }
        if !(l.limit.is_finite() && l.limit > 0.0) {
            c.report.push(&entity, "limit", "must be positive");
        }
        if !(l.susceptance.is_finite() && l.susceptance > 0.0) {
            c.report.push(&entity, "susceptance", "must be positive");
        }
    }

    let mut unit_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let all_ids = system
        .thermal
        .iter()
        .map(|u| u.id.as_str())
        .chain(system.storage.iter().map(|u| u.id.as_str()))
        .chain(system.res.iter().map(|u| u.id.as_str()))
        .chain(system.candidates.iter().map(|c| c.id()));
    for id in all_ids {
        *unit_ids.entry(id).or_insert(0) += 1;
    }
    for (id, count) in &unit_ids {
        if !valid_id(id) {
            c.report
                .push(&format!("unit {id}"), "id", "ids use letters, digits, `_`, `-`, `.`");
        }
        if *count > 1 {
            c.report.push(&format!("unit {id}"), "id", "unit id used more than once");
        }
    }

    for u in &system.thermal {
        c.thermal(u, &format!("thermal {}", u.id));
    }
    for u in &system.storage {
        c.storage(u, &format!("storage {}", u.id));
    }
    for u in &system.res {
        c.res(u, &format!("res {}", u.id), false);
    }
    for cand in &system.candidates {
        let entity = format!("candidate {}", cand.id());
        if !(cand.invest_cost.is_finite() && cand.invest_cost >= 0.0) {
            c.report.push(&entity, "invest_cost", "must be nonnegative");
        }
        match &cand.payload {
            CandidatePayload::Thermal(u) => {
                c.thermal(u, &entity);
                if u.initial_on {
                    c.report.push(&entity, "initial_on", "candidate units start offline");
                }
            }
            CandidatePayload::Storage(u) => c.storage(u, &entity),
            CandidatePayload::Res(u) => {
                c.res(u, &entity, true);
                if !(cand.invest_cap_max.is_finite() && cand.invest_cap_max > 0.0) {
                    c.report.push(&entity, "invest_cap_max", "renewable candidates need a positive cap");
                }
            }
        }
    }

    let r = &system.reserves;
    c.nonneg_series("reserves", "scr_up", &r.scr_up);
    c.nonneg_series("reserves", "scr_down", &r.scr_down);
    c.nonneg_series("reserves", "tcr_up", &r.tcr_up);
    c.nonneg_series("reserves", "tcr_down", &r.tcr_down);
    for (field, v) in [
        ("a_wind_up", r.a_wind_up),
        ("a_wind_down", r.a_wind_down),
        ("a_pv_up", r.a_pv_up),
        ("a_pv_down", r.a_pv_down),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            c.report.push("reserves", field, "coefficient must be nonnegative");
        }
    }

    // scenario settings measured against the unit costs
    let costs: Vec<f64> = system
        .thermal
        .iter()
        .map(|u| u.cost_prod)
        .chain(system.storage.iter().map(|u| u.cost_charge))
        .chain(system.res.iter().map(|u| u.cost_prod))
        .chain(system.candidates.iter().map(|c| match &c.payload {
            CandidatePayload::Thermal(u) => u.cost_prod,
            CandidatePayload::Storage(u) => u.cost_charge,
            CandidatePayload::Res(u) => u.cost_prod,
        }))
        .filter(|v| v.is_finite())
        .collect();
    let max_cost = costs.iter().copied().fold(0.0, f64::max);
    if !(config.load_shed_cost.is_finite() && config.load_shed_cost > max_cost) {
        c.report.push(
            "config",
            "load_shed_cost",
            format!("must exceed every production cost (largest is {max_cost})"),
        );
    }
    let min_cost = costs
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(config.water_incentive.is_finite() && config.water_incentive >= 0.0) {
        c.report.push("config", "water_incentive", "must be nonnegative");
    } else if min_cost.is_finite() && config.water_incentive > min_cost * 1e-3 {
        c.report.push(
            "config",
            "water_incentive",
            format!("must be at least 1000 times below the smallest production cost ({min_cost})"),
        );
    }
    if let Some(target) = config.res_target_energy {
        if !(target.is_finite() && target >= 0.0) {
            c.report.push("config", "res_target_energy", "must be nonnegative");
        }
    }
    if let Some(slack) = &config.slack_bus {
        if !c.buses.contains(slack.as_str()) {
            c.report.push("config", "slack_bus", format!("unknown bus `{slack}`"));
        }
    }
    c.report
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn thermal(id: &str, bus: &str, hours: usize) -> ThermalUnit {
        ThermalUnit {
            id: id.into(),
            bus: bus.into(),
            fuel: Fuel::Fossil,
            p_min: 100.0,
            p_max: 300.0,
            startup_cap: 150.0,
            shutdown_cap: 150.0,
            ramp_up: 80.0,
            ramp_down: 90.0,
            min_up: 2,
            min_down: 2,
            cost_prod: 50.0,
            cost_startup: 1000.0,
            availability: vec![1.0; hours],
            scr_eligible: true,
            tcr_eligible: true,
            initial_on: false,
        }
    }

    pub fn storage(id: &str, bus: &str, kind: StorageKind, hours: usize) -> StorageUnit {
        StorageUnit {
            id: id.into(),
            bus: bus.into(),
            kind,
            p_max_dis: 50.0,
            p_max_ch: if kind == StorageKind::Dam { 0.0 } else { 40.0 },
            e_min: 0.0,
            e_max: 200.0,
            e_initial: 100.0,
            eta_ch: 0.9,
            eta_dis: 0.8,
            inflow: vec![0.0; hours],
            cost_charge: 1.0,
            scr_eligible: true,
            tcr_eligible: kind != StorageKind::Battery,
        }
    }

    pub fn res(id: &str, bus: &str, tech: ResTechnology, hours: usize) -> ResUnit {
        ResUnit {
            id: id.into(),
            bus: bus.into(),
            technology: tech,
            p_max: 100.0,
            capacity_factor: vec![0.5; hours],
            cost_prod: 0.5,
        }
    }

    pub fn system(hours: usize, buses: &[&str]) -> PowerSystem {
        let mut s = PowerSystem::empty(hours);
        for b in buses {
            s.buses.push(Bus {
                id: (*b).into(),
                zone: "CH".into(),
                demand: vec![100.0; hours],
                fixed_injection: vec![0.0; hours],
            });
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn battery_with_tcr_is_rejected() {
        let mut s = system(4, &["N1"]);
        let mut b = storage("B1", "N1", StorageKind::Battery, 4);
        b.tcr_eligible = true;
        s.storage.push(b);
        let r = validate_system(&s, &ScenarioConfig::default());
        assert!(r.mentions("battery TCR must be zero"), "{r}");
    }

    #[test]
    fn valid_dam_passes() {
        let mut s = system(4, &["N1"]);
        let mut d = storage("D1", "N1", StorageKind::Dam, 4);
        d.inflow = vec![3.0; 4];
        s.storage.push(d);
        let r = validate_system(&s, &ScenarioConfig::default());
        assert!(r.is_empty(), "{r}");
    }

    #[test]
    fn capacity_factor_above_one_names_unit_and_hour() {
        let mut s = system(4, &["N1"]);
        let mut u = res("PV1", "N1", ResTechnology::Pv, 4);
        u.capacity_factor[2] = 1.2;
        s.res.push(u);
        let r = validate_system(&s, &ScenarioConfig::default());
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!(v.entity, "res PV1");
        assert!(v.message.contains("hour 2"), "{v}");
    }

    #[test]
    fn series_length_and_references() {
        let mut s = system(4, &["N1"]);
        s.buses[0].demand.pop();
        s.lines.push(Line {
            id: "L1".into(),
            from_bus: "N1".into(),
            to_bus: "N9".into(),
            susceptance: 10.0,
            limit: 100.0,
            is_tie_line: false,
        });
        let mut g = thermal("G1", "N1", 4);
        g.startup_cap = 50.0;
        s.thermal.push(g);
        s.res.push(res("G1", "N1", ResTechnology::Wind, 4));
        let r = validate_system(&s, &ScenarioConfig::default());
        assert!(r.mentions("series has 3 entries"));
        assert!(r.mentions("unknown bus `N9`"));
        assert!(r.mentions("p_min <= startup_cap"));
        assert!(r.mentions("more than once"));
    }

    #[test]
    fn config_cost_rules() {
        let mut s = system(2, &["N1"]);
        s.thermal.push(thermal("G1", "N1", 2));
        let config = ScenarioConfig {
            load_shed_cost: 40.0,
            water_incentive: 0.1,
            ..ScenarioConfig::default()
        };
        let r = validate_system(&s, &config);
        assert!(r.mentions("must exceed every production cost"));
        assert!(r.mentions("1000 times below"));
    }

    #[test]
    fn parameter_symbols_are_unique() {
        let symbols: BTreeSet<_> = PARAMETER_SYMBOLS.iter().map(|p| p.0).collect();
        let fields: BTreeSet<_> = PARAMETER_SYMBOLS.iter().map(|p| p.1).collect();
        assert_eq!(symbols.len(), PARAMETER_SYMBOLS.len());
        assert_eq!(fields.len(), PARAMETER_SYMBOLS.len());
    }
}
