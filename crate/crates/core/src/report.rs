//! Result views: investments, monthly energy by technology class, storage
//! trajectories, prices and cross-border exchange.
//!
//! All energies are physical-year MWh: each simulated hour is weighted by the
//! cost scale of the time grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use gep_milp::{Solution, Status};
use serde::Serialize;

use crate::expansion::{Role, RowKind, VariableRegistry, SYSTEM_KEY};
use crate::redispatch::{price_stats, PriceStats, PricingResult};
use crate::system::{CandidatePayload, Fuel, PowerSystem, ResTechnology, ScenarioConfig, StorageKind};
use crate::timegrid::{TimeGrid, MONTH_NAMES};

/// Technology classes of the monthly energy view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnergyClass {
    Nuclear,
    HydroDam,
    PumpedHydro,
    Battery,
    RunOfRiver,
    Pv,
    Wind,
    Biomass,
    Thermal,
    /// Fixed injections into the zone and flows in over zone borders.
    Imports,
    Exports,
    StorageCharge,
    LoadShed,
    Demand,
}

impl EnergyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EnergyClass::Nuclear => "nuclear",
            EnergyClass::HydroDam => "hydro_dam",
            EnergyClass::PumpedHydro => "pumped_hydro",
            EnergyClass::Battery => "battery",
            EnergyClass::RunOfRiver => "run_of_river",
            EnergyClass::Pv => "pv",
            EnergyClass::Wind => "wind",
            EnergyClass::Biomass => "biomass",
            EnergyClass::Thermal => "thermal",
            EnergyClass::Imports => "imports",
            EnergyClass::Exports => "exports",
            EnergyClass::StorageCharge => "storage_charge",
            EnergyClass::LoadShed => "load_shed",
            EnergyClass::Demand => "demand",
        }
    }

    /// True for classes that produce energy inside the zone.
    pub fn is_generation(self) -> bool {
        !matches!(
            self,
            EnergyClass::Imports
                | EnergyClass::Exports
                | EnergyClass::StorageCharge
                | EnergyClass::LoadShed
                | EnergyClass::Demand
        )
    }

    fn of_fuel(fuel: Fuel) -> Self {
        match fuel {
            Fuel::Nuclear => EnergyClass::Nuclear,
            Fuel::Biomass => EnergyClass::Biomass,
            Fuel::Fossil => EnergyClass::Thermal,
        }
    }

    fn of_storage(kind: StorageKind) -> Self {
        match kind {
            StorageKind::Dam => EnergyClass::HydroDam,
            StorageKind::PumpDaily | StorageKind::PumpSeasonal => EnergyClass::PumpedHydro,
            StorageKind::Battery => EnergyClass::Battery,
        }
    }

    fn of_res(tech: ResTechnology) -> Self {
        match tech {
            ResTechnology::Pv => EnergyClass::Pv,
            ResTechnology::Wind => EnergyClass::Wind,
            ResTechnology::RunOfRiver => EnergyClass::RunOfRiver,
            ResTechnology::Biomass => EnergyClass::Biomass,
        }
    }
}

/// `(zone, class)` to energy per calendar month.
pub type MonthlyEnergy = BTreeMap<(String, EnergyClass), [f64; 12]>;

fn value_series(values: &[f64], registry: &VariableRegistry, owner: &str, role: Role) -> Vec<f64> {
    registry.series(owner, role).into_iter().map(|v| values[v.0]).collect()
}

/// Hourly output of a thermal unit, `P^min u + p^min`.
pub fn thermal_output(values: &[f64], registry: &VariableRegistry, id: &str, p_min: f64) -> Vec<f64> {
    let on = value_series(values, registry, id, Role::On);
    let above = value_series(values, registry, id, Role::AboveMin);
    on.iter().zip(&above).map(|(u, p)| p_min * u + p).collect()
}

/// Every unit of the system, existing or candidate, with its zone.
struct Units<'a> {
    thermal: Vec<(&'a crate::system::ThermalUnit, &'a str)>,
    storage: Vec<(&'a crate::system::StorageUnit, &'a str)>,
    res: Vec<(&'a crate::system::ResUnit, &'a str)>,
}

fn units(system: &PowerSystem) -> Units<'_> {
    let zone = |bus: &str| system.bus(bus).map(|b| b.zone.as_str()).unwrap_or("");
    let mut u = Units {
        thermal: system.thermal.iter().map(|x| (x, zone(&x.bus))).collect(),
        storage: system.storage.iter().map(|x| (x, zone(&x.bus))).collect(),
        res: system.res.iter().map(|x| (x, zone(&x.bus))).collect(),
    };
    for c in &system.candidates {
        match &c.payload {
            CandidatePayload::Thermal(x) => u.thermal.push((x, zone(&x.bus))),
            CandidatePayload::Storage(x) => u.storage.push((x, zone(&x.bus))),
            CandidatePayload::Res(x) => u.res.push((x, zone(&x.bus))),
        }
    }
    u.thermal.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    u.storage.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    u.res.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    u
}

/// Monthly energy per zone and class. `system` lives on the simulated
/// horizon of `grid`; each simulated day counts toward the month of its
/// calendar date.
pub fn aggregate_monthly(
    values: &[f64],
    registry: &VariableRegistry,
    system: &PowerSystem,
    grid: &TimeGrid,
) -> MonthlyEnergy {
    let mut out = MonthlyEnergy::new();
    let k = grid.cost_scale;
    let mut add = |zone: &str, class: EnergyClass, series: &[f64]| {
        let months = out.entry((zone.to_string(), class)).or_insert([0.0; 12]);
        for (t, &p) in series.iter().enumerate() {
            months[grid.month_of_hour(t)] += k * p;
        }
    };
    let u = units(system);
    for (x, zone) in &u.thermal {
        add(zone, EnergyClass::of_fuel(x.fuel), &thermal_output(values, registry, &x.id, x.p_min));
    }
    for (x, zone) in &u.storage {
        add(zone, EnergyClass::of_storage(x.kind), &value_series(values, registry, &x.id, Role::Discharge));
        add(zone, EnergyClass::StorageCharge, &value_series(values, registry, &x.id, Role::Charge));
    }
    for (x, zone) in &u.res {
        add(zone, EnergyClass::of_res(x.technology), &value_series(values, registry, &x.id, Role::ResProd));
    }
    for b in &system.buses {
        add(&b.zone, EnergyClass::Demand, &b.demand);
        add(&b.zone, EnergyClass::LoadShed, &value_series(values, registry, &b.id, Role::LoadShed));
        let imports: Vec<f64> = b.fixed_injection.iter().map(|f| f.max(0.0)).collect();
        let exports: Vec<f64> = b.fixed_injection.iter().map(|f| (-f).max(0.0)).collect();
        add(&b.zone, EnergyClass::Imports, &imports);
        add(&b.zone, EnergyClass::Exports, &exports);
    }
    for l in &system.lines {
        let (Some(from), Some(to)) = (system.bus(&l.from_bus), system.bus(&l.to_bus)) else {
            continue;
        };
        if from.zone == to.zone {
            continue;
        }
        let flow = value_series(values, registry, &l.id, Role::Flow);
        let forward: Vec<f64> = flow.iter().map(|f| f.max(0.0)).collect();
        let backward: Vec<f64> = flow.iter().map(|f| (-f).max(0.0)).collect();
        add(&from.zone, EnergyClass::Exports, &forward);
        add(&to.zone, EnergyClass::Imports, &forward);
        add(&to.zone, EnergyClass::Exports, &backward);
        add(&from.zone, EnergyClass::Imports, &backward);
    }
    out
}

/// Hourly storage levels with the compression bound scale divided out.
pub fn storage_levels(
    values: &[f64],
    registry: &VariableRegistry,
    system: &PowerSystem,
    grid: &TimeGrid,
) -> BTreeMap<String, Vec<f64>> {
    units(system)
        .storage
        .iter()
        .map(|(x, _)| {
            let scale = grid.storage_scaling(x.kind).bound;
            let levels = value_series(values, registry, &x.id, Role::Level)
                .into_iter()
                .map(|e| e / scale)
                .collect();
            (x.id.clone(), levels)
        })
        .collect()
}

/// Level at the last simulated hour of each calendar month; `None` for
/// months the horizon does not reach.
pub fn storage_trajectory(levels: &[f64], grid: &TimeGrid) -> [Option<f64>; 12] {
    let mut out = [None; 12];
    for (t, &e) in levels.iter().enumerate() {
        out[grid.month_of_hour(t)] = Some(e);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exchange {
    pub zone_a: String,
    pub zone_b: String,
    /// Energy flowing from `zone_a` to `zone_b`, MWh.
    pub a_to_b: f64,
    pub b_to_a: f64,
}

impl Exchange {
    pub fn net(&self) -> f64 {
        self.a_to_b - self.b_to_a
    }
}

/// Tie-line energy per border, zones of each border in sorted order.
pub fn cross_border_exchange(
    values: &[f64],
    registry: &VariableRegistry,
    system: &PowerSystem,
    grid: &TimeGrid,
) -> Vec<Exchange> {
    let mut borders: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for l in system.lines.iter().filter(|l| l.is_tie_line) {
        let (Some(from), Some(to)) = (system.bus(&l.from_bus), system.bus(&l.to_bus)) else {
            continue;
        };
        if from.zone == to.zone {
            continue;
        }
        let forward = from.zone < to.zone;
        let key = if forward {
            (from.zone.clone(), to.zone.clone())
        } else {
            (to.zone.clone(), from.zone.clone())
        };
        let entry = borders.entry(key).or_insert((0.0, 0.0));
        for f in value_series(values, registry, &l.id, Role::Flow) {
            // positive flow runs from `from` to `to`
            let a_to_b = if forward { f } else { -f };
            if a_to_b >= 0.0 {
                entry.0 += grid.cost_scale * a_to_b;
            } else {
                entry.1 -= grid.cost_scale * a_to_b;
            }
        }
    }
    borders
        .into_iter()
        .map(|((zone_a, zone_b), (a_to_b, b_to_a))| Exchange {
            zone_a,
            zone_b,
            a_to_b,
            b_to_a,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Investment {
    pub id: String,
    pub kind: &'static str,
    pub bus: String,
    /// Value of the investment variable: 0/1 for thermal and storage, MW for
    /// renewables.
    pub decision: f64,
    pub capacity_mw: f64,
    pub cost: f64,
}

pub fn investments(values: &[f64], registry: &VariableRegistry, system: &PowerSystem) -> Vec<Investment> {
    let mut out: Vec<Investment> = system
        .candidates
        .iter()
        .map(|c| {
            let decision = registry.invest(c.id()).map(|v| values[v.0]).unwrap_or(0.0);
            let (kind, capacity_mw) = match &c.payload {
                CandidatePayload::Thermal(u) => ("thermal", decision * u.p_max),
                CandidatePayload::Storage(u) => ("storage", decision * u.p_max_dis),
                CandidatePayload::Res(_) => ("res", decision),
            };
            Investment {
                id: c.id().to_string(),
                kind,
                bus: c.bus().to_string(),
                decision,
                capacity_mw,
                cost: decision * c.invest_cost,
            }
        })
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// System-wide annual energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBalance {
    pub generation: f64,
    pub imports: f64,
    pub load_shed: f64,
    pub demand: f64,
    pub exports: f64,
    pub storage_charge: f64,
}

impl EnergyBalance {
    pub fn from_monthly(monthly: &MonthlyEnergy) -> Self {
        let mut b = EnergyBalance {
            generation: 0.0,
            imports: 0.0,
            load_shed: 0.0,
            demand: 0.0,
            exports: 0.0,
            storage_charge: 0.0,
        };
        for ((_, class), months) in monthly {
            let e: f64 = months.iter().sum();
            match class {
                EnergyClass::Imports => b.imports += e,
                EnergyClass::Exports => b.exports += e,
                EnergyClass::StorageCharge => b.storage_charge += e,
                EnergyClass::LoadShed => b.load_shed += e,
                EnergyClass::Demand => b.demand += e,
                _ => b.generation += e,
            }
        }
        b
    }

    /// |supply - use| relative to use (or absolute below 1 MWh).
    pub fn relative_residual(&self) -> f64 {
        let supply = self.generation + self.imports + self.load_shed;
        let uses = self.demand + self.exports + self.storage_charge;
        (supply - uses).abs() / uses.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSummary {
    pub simple_mean: f64,
    pub load_weighted_mean: f64,
}

impl From<PriceStats> for PriceSummary {
    fn from(s: PriceStats) -> Self {
        Self {
            simple_mean: s.simple_mean,
            load_weighted_mean: s.load_weighted_mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub compression: String,
    pub status: String,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: usize,
    pub investment_cost: f64,
    pub operating_cost: f64,
    pub pricing_objective: f64,
    pub pricing_objective_delta: f64,
    pub demand_mwh: f64,
    pub load_shed_mwh: f64,
    pub res_target_mwh: Option<f64>,
    /// Annual production credited toward the target.
    pub res_target_credit_mwh: Option<f64>,
    pub energy_balance: EnergyBalance,
    pub prices: Option<PriceSummary>,
    pub zone_prices: BTreeMap<String, PriceSummary>,
}

/// Everything written to a results directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub summary: Summary,
    pub investments: Vec<Investment>,
    pub monthly_energy: MonthlyEnergy,
    pub storage_hourly: BTreeMap<String, Vec<f64>>,
    pub storage_monthly: BTreeMap<String, [Option<f64>; 12]>,
    pub prices: BTreeMap<String, Vec<f64>>,
    pub exchange: Vec<Exchange>,
    /// Calendar day of each simulated day, for the hourly tables.
    pub day_map: Vec<usize>,
}

pub fn status_name(status: Status) -> &'static str {
    match status {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::LimitFeasible => "limit_feasible",
        Status::LimitNoSolution => "limit_no_solution",
        Status::NumericalFailure => "numerical_failure",
    }
}

/// Builds the report from the expansion solution and the pricing run.
/// `system` is the compressed system the model was assembled from.
pub fn build_report(
    system: &PowerSystem,
    config: &ScenarioConfig,
    grid: &TimeGrid,
    registry: &VariableRegistry,
    model: &gep_milp::MilpModel,
    milp: &Solution,
    pricing: &PricingResult,
) -> ScenarioReport {
    let values = &pricing.dispatch;
    let monthly = aggregate_monthly(values, registry, system, grid);
    let balance = EnergyBalance::from_monthly(&monthly);
    let investments = investments(&milp.values, registry, system);
    let investment_cost: f64 = investments.iter().map(|i| i.cost).sum();
    let storage_hourly = storage_levels(values, registry, system, grid);
    let storage_monthly = storage_hourly
        .iter()
        .map(|(id, e)| (id.clone(), storage_trajectory(e, grid)))
        .collect();

    let mut zones: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for b in &system.buses {
        zones.entry(&b.zone).or_default().push(&b.id);
    }
    let prices = &pricing.nodal_prices;
    let zone_prices = zones
        .iter()
        .filter_map(|(z, buses)| {
            price_stats(prices, system, buses.iter().copied()).map(|s| (z.to_string(), s.into()))
        })
        .collect();
    let all = price_stats(prices, system, system.buses.iter().map(|b| b.id.as_str())).map(Into::into);

    let credit = registry
        .row(SYSTEM_KEY, RowKind::ResTarget, 0)
        .map(|r| model.constraint(r).activity(values));

    let summary = Summary {
        scenario: config.name.clone(),
        compression: grid.compression.to_string(),
        status: status_name(milp.status).to_string(),
        objective: milp.objective,
        best_bound: milp.bound,
        nodes: milp.nodes,
        investment_cost,
        operating_cost: milp.objective - investment_cost,
        pricing_objective: pricing.objective,
        pricing_objective_delta: pricing.objective_delta,
        demand_mwh: balance.demand,
        load_shed_mwh: balance.load_shed,
        res_target_mwh: config.res_target_energy,
        res_target_credit_mwh: credit,
        energy_balance: balance,
        prices: all,
        zone_prices,
    };
    ScenarioReport {
        summary,
        investments,
        monthly_energy: monthly,
        storage_hourly,
        storage_monthly,
        prices: prices.clone(),
        exchange: cross_border_exchange(values, registry, system, grid),
        day_map: grid.day_map.clone(),
    }
}

/// Fixed-decimal rendering with negative zero folded into zero.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|c| c == b'0' || c == b'.') => rest.to_string(),
        _ => s,
    }
}

fn hourly_table(series: &BTreeMap<String, Vec<f64>>, day_map: &[usize]) -> String {
    let mut out = String::from("hour,day");
    for id in series.keys() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    let hours = series.values().map(Vec::len).max().unwrap_or(0);
    if series.is_empty() {
        return out;
    }
    for t in 0..hours {
        let day = day_map.get(t / 24).copied().unwrap_or(0);
        let _ = write!(out, "{t},{day}");
        for s in series.values() {
            out.push(',');
            out.push_str(&s.get(t).map(|&v| fmt_num(v)).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

impl ScenarioReport {
    /// CSV tables as `(file name, contents)`, in a fixed order.
    pub fn tables(&self) -> Vec<(&'static str, String)> {
        let mut inv = String::from("id,kind,bus,decision,capacity_mw,cost\n");
        for i in &self.investments {
            let _ = writeln!(
                inv,
                "{},{},{},{},{},{}",
                i.id,
                i.kind,
                i.bus,
                fmt_num(i.decision),
                fmt_num(i.capacity_mw),
                fmt_num(i.cost)
            );
        }

        let mut monthly = String::from("zone,class,month,mwh\n");
        for ((zone, class), months) in &self.monthly_energy {
            for (m, e) in months.iter().enumerate() {
                let _ = writeln!(monthly, "{zone},{},{},{}", class.as_str(), MONTH_NAMES[m], fmt_num(*e));
            }
        }

        let mut storage = String::from("storage,month,level_mwh\n");
        for (id, months) in &self.storage_monthly {
            for (m, e) in months.iter().enumerate() {
                if let Some(e) = e {
                    let _ = writeln!(storage, "{id},{},{}", MONTH_NAMES[m], fmt_num(*e));
                }
            }
        }

        let mut exchange = String::from("zone_a,zone_b,a_to_b_mwh,b_to_a_mwh,net_mwh\n");
        for x in &self.exchange {
            let _ = writeln!(
                exchange,
                "{},{},{},{},{}",
                x.zone_a,
                x.zone_b,
                fmt_num(x.a_to_b),
                fmt_num(x.b_to_a),
                fmt_num(x.net())
            );
        }

        vec![
            ("investments.csv", inv),
            ("monthly_energy.csv", monthly),
            ("storage_monthly.csv", storage),
            ("storage_hourly.csv", hourly_table(&self.storage_hourly, &self.day_map)),
            ("prices.csv", hourly_table(&self.prices, &self.day_map)),
            ("exchange.csv", exchange),
        ]
    }
}
