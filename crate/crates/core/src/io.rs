//! Scenario directories and result files.
//!
//! A scenario directory holds a `scenario.toml` manifest, one CSV table per
//! entity type and a `series/` folder with one single-column CSV per hourly
//! series (header row plus 8760 values):
//!
//! | file | content |
//! |------|---------|
//! | `buses.csv` | `id,zone` |
//! | `lines.csv` | `id,from_bus,to_bus,susceptance,limit,is_tie_line` |
//! | `thermal_units.csv` | technical and cost data of thermal units |
//! | `storage_units.csv` | storage ratings, levels and efficiencies |
//! | `res_units.csv` | `id,bus,technology,p_max,cost_prod` |
//! | `candidates.csv` | `id,invest_cost,invest_cap_max,counts_toward_res_target` |
//! | `series/demand_<bus>.csv` | required for every bus |
//! | `series/cf_<unit>.csv` | required for every renewable unit |
//! | `series/injection_<bus>.csv` | optional, zero by default |
//! | `series/availability_<unit>.csv` | optional thermal availability, one by default |
//! | `series/inflow_<unit>.csv` | optional storage inflow, zero by default |
//! | `series/{scr_up,scr_down,tcr_up,tcr_down}.csv` | optional, zero by default |
//!
//! A candidate is a row of a unit table whose id also appears in
//! `candidates.csv`. Only `buses.csv` is mandatory; other tables default to
//! empty.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::ScenarioReport;
use crate::system::{
    validate_system, Bus, CandidatePayload, CandidateUnit, Fuel, Line, PowerSystem, ReservePolicy, ResTechnology,
    ResUnit, ScenarioConfig, StorageCostSide, StorageKind, StorageUnit, ThermalUnit, ValidationReport,
    DEFAULT_BASE_MVA, DEFAULT_LOAD_SHED_COST, DEFAULT_WATER_INCENTIVE,
};
use crate::timegrid::{Compression, HOURS_PER_YEAR};

pub const MANIFEST: &str = "scenario.toml";
const SERIES_DIR: &str = "series";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: required file is missing", .0.display())]
    Missing(PathBuf),
    #[error("{}:{line}: {message}", file.display())]
    Parse { file: PathBuf, line: u64, message: String },
    #[error("{}: {message}", file.display())]
    Manifest { file: PathBuf, message: String },
    #[error("{entity} references unknown bus `{bus}`")]
    UnknownBus { entity: String, bus: String },
    #[error("{}: expected {expected} values, found {got}", file.display())]
    SeriesLength { file: PathBuf, expected: usize, got: usize },
    #[error("candidate `{0}` matches no unit row")]
    UnknownCandidate(String),
    #[error("invalid scenario:\n{0}")]
    Invalid(ValidationReport),
}

impl ScenarioError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    name: String,
    #[serde(default = "default_base_mva")]
    base_mva: f64,
    #[serde(default = "default_load_shed_cost")]
    load_shed_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    res_target_mwh: Option<f64>,
    #[serde(default = "default_water_incentive")]
    water_incentive: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slack_bus: Option<String>,
    #[serde(default)]
    compression: Compression,
    #[serde(default)]
    storage_cost_side: StorageCostSide,
    #[serde(default)]
    reserves: ReserveCoefficients,
}

fn default_base_mva() -> f64 {
    DEFAULT_BASE_MVA
}

fn default_load_shed_cost() -> f64 {
    DEFAULT_LOAD_SHED_COST
}

fn default_water_incentive() -> f64 {
    DEFAULT_WATER_INCENTIVE
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReserveCoefficients {
    #[serde(default)]
    a_wind_up: f64,
    #[serde(default)]
    a_wind_down: f64,
    #[serde(default)]
    a_pv_up: f64,
    #[serde(default)]
    a_pv_down: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BusRow {
    id: String,
    zone: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LineRow {
    id: String,
    from_bus: String,
    to_bus: String,
    susceptance: f64,
    limit: f64,
    is_tie_line: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThermalRow {
    id: String,
    bus: String,
    fuel: Fuel,
    p_min: f64,
    p_max: f64,
    startup_cap: f64,
    shutdown_cap: f64,
    ramp_up: f64,
    ramp_down: f64,
    min_up: usize,
    min_down: usize,
    cost_prod: f64,
    cost_startup: f64,
    scr_eligible: bool,
    tcr_eligible: bool,
    initial_on: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct StorageRow {
    id: String,
    bus: String,
    kind: StorageKind,
    p_max_dis: f64,
    p_max_ch: f64,
    e_min: f64,
    e_max: f64,
    e_initial: f64,
    eta_ch: f64,
    eta_dis: f64,
    cost_charge: f64,
    scr_eligible: bool,
    tcr_eligible: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResRow {
    id: String,
    bus: String,
    technology: ResTechnology,
    p_max: f64,
    cost_prod: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CandidateRow {
    id: String,
    invest_cost: f64,
    #[serde(default)]
    invest_cap_max: f64,
    #[serde(default)]
    counts_toward_res_target: bool,
}

fn read_table<T: DeserializeOwned>(dir: &Path, name: &str, required: bool) -> Result<Vec<T>, ScenarioError> {
    let path = dir.join(name);
    if !path.exists() {
        return if required {
            Err(ScenarioError::Missing(path))
        } else {
            Ok(Vec::new())
        };
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| csv_error(&path, e))?;
    rdr.deserialize().map(|r| r.map_err(|e| csv_error(&path, e))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> ScenarioError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ScenarioError::io(path, source),
        kind => ScenarioError::Parse {
            file: path.to_path_buf(),
            line,
            message: match kind {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                other => format!("{other:?}"),
            },
        },
    }
}

/// Reads a one-column series with a header row.
pub fn read_series(path: &Path, expected: usize) -> Result<Vec<f64>, ScenarioError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut out = Vec::with_capacity(expected);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = rec.get(0).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| ScenarioError::Parse {
            file: path.to_path_buf(),
            line,
            message: format!("`{field}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(ScenarioError::Parse {
                file: path.to_path_buf(),
                line,
                message: format!("`{field}` is not finite"),
            });
        }
        out.push(v);
    }
    if out.len() != expected {
        return Err(ScenarioError::SeriesLength {
            file: path.to_path_buf(),
            expected,
            got: out.len(),
        });
    }
    Ok(out)
}

fn series(dir: &Path, name: &str, default: Option<f64>) -> Result<Vec<f64>, ScenarioError> {
    let path = dir.join(SERIES_DIR).join(format!("{name}.csv"));
    match default {
        Some(d) if !path.exists() => Ok(vec![d; HOURS_PER_YEAR]),
        None if !path.exists() => Err(ScenarioError::Missing(path)),
        _ => read_series(&path, HOURS_PER_YEAR),
    }
}

fn read_manifest(dir: &Path) -> Result<Manifest, ScenarioError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(ScenarioError::Missing(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| ScenarioError::io(&path, e))?;
    toml::from_str(&text).map_err(|e| ScenarioError::Manifest {
        file: path,
        message: e.to_string(),
    })
}

/// Loads and validates a scenario directory.
pub fn load_scenario(dir: &Path) -> Result<(PowerSystem, ScenarioConfig), ScenarioError> {
    let manifest = read_manifest(dir)?;
    let bus_rows: Vec<BusRow> = read_table(dir, "buses.csv", true)?;
    let line_rows: Vec<LineRow> = read_table(dir, "lines.csv", false)?;
    let thermal_rows: Vec<ThermalRow> = read_table(dir, "thermal_units.csv", false)?;
    let storage_rows: Vec<StorageRow> = read_table(dir, "storage_units.csv", false)?;
    let res_rows: Vec<ResRow> = read_table(dir, "res_units.csv", false)?;
    let cand_rows: Vec<CandidateRow> = read_table(dir, "candidates.csv", false)?;

    let known = |entity: String, bus: &str| -> Result<(), ScenarioError> {
        if bus_rows.iter().any(|b| b.id == bus) {
            Ok(())
        } else {
            Err(ScenarioError::UnknownBus {
                entity,
                bus: bus.to_string(),
            })
        }
    };
    for l in &line_rows {
        known(format!("line {}", l.id), &l.from_bus)?;
        known(format!("line {}", l.id), &l.to_bus)?;
    }
    for u in &thermal_rows {
        known(format!("thermal unit {}", u.id), &u.bus)?;
    }
    for u in &storage_rows {
        known(format!("storage unit {}", u.id), &u.bus)?;
    }
    for u in &res_rows {
        known(format!("renewable unit {}", u.id), &u.bus)?;
    }
    if let Some(slack) = &manifest.slack_bus {
        known("slack_bus".to_string(), slack)?;
    }

    let mut system = PowerSystem::empty(HOURS_PER_YEAR);
    system.base_mva = manifest.base_mva;
    for b in bus_rows {
        system.buses.push(Bus {
            demand: series(dir, &format!("demand_{}", b.id), None)?,
            fixed_injection: series(dir, &format!("injection_{}", b.id), Some(0.0))?,
            id: b.id,
            zone: b.zone,
        });
    }
    system.lines = line_rows
        .into_iter()
        .map(|l| Line {
            id: l.id,
            from_bus: l.from_bus,
            to_bus: l.to_bus,
            susceptance: l.susceptance,
            limit: l.limit,
            is_tie_line: l.is_tie_line,
        })
        .collect();

    let mut thermal = Vec::new();
    for r in thermal_rows {
        thermal.push(ThermalUnit {
            availability: series(dir, &format!("availability_{}", r.id), Some(1.0))?,
            id: r.id,
            bus: r.bus,
            fuel: r.fuel,
            p_min: r.p_min,
            p_max: r.p_max,
            startup_cap: r.startup_cap,
            shutdown_cap: r.shutdown_cap,
            ramp_up: r.ramp_up,
            ramp_down: r.ramp_down,
            min_up: r.min_up,
            min_down: r.min_down,
            cost_prod: r.cost_prod,
            cost_startup: r.cost_startup,
            scr_eligible: r.scr_eligible,
            tcr_eligible: r.tcr_eligible,
            initial_on: r.initial_on,
        });
    }
    let mut storage = Vec::new();
    for r in storage_rows {
        storage.push(StorageUnit {
            inflow: series(dir, &format!("inflow_{}", r.id), Some(0.0))?,
            id: r.id,
            bus: r.bus,
            kind: r.kind,
            p_max_dis: r.p_max_dis,
            p_max_ch: r.p_max_ch,
            e_min: r.e_min,
            e_max: r.e_max,
            e_initial: r.e_initial,
            eta_ch: r.eta_ch,
            eta_dis: r.eta_dis,
            cost_charge: r.cost_charge,
            scr_eligible: r.scr_eligible,
            tcr_eligible: r.tcr_eligible,
        });
    }
    let mut res = Vec::new();
    for r in res_rows {
        res.push(ResUnit {
            capacity_factor: series(dir, &format!("cf_{}", r.id), None)?,
            id: r.id,
            bus: r.bus,
            technology: r.technology,
            p_max: r.p_max,
            cost_prod: r.cost_prod,
        });
    }

    for c in cand_rows {
        let payload = if let Some(i) = thermal.iter().position(|u| u.id == c.id) {
            CandidatePayload::Thermal(thermal.remove(i))
        } else if let Some(i) = storage.iter().position(|u| u.id == c.id) {
            CandidatePayload::Storage(storage.remove(i))
        } else if let Some(i) = res.iter().position(|u| u.id == c.id) {
            CandidatePayload::Res(res.remove(i))
        } else {
            return Err(ScenarioError::UnknownCandidate(c.id));
        };
        system.candidates.push(CandidateUnit {
            payload,
            invest_cost: c.invest_cost,
            invest_cap_max: c.invest_cap_max,
            counts_toward_res_target: c.counts_toward_res_target,
        });
    }
    system.thermal = thermal;
    system.storage = storage;
    system.res = res;

    let k = &manifest.reserves;
    system.reserves = ReservePolicy {
        scr_up: series(dir, "scr_up", Some(0.0))?,
        scr_down: series(dir, "scr_down", Some(0.0))?,
        tcr_up: series(dir, "tcr_up", Some(0.0))?,
        tcr_down: series(dir, "tcr_down", Some(0.0))?,
        a_wind_up: k.a_wind_up,
        a_wind_down: k.a_wind_down,
        a_pv_up: k.a_pv_up,
        a_pv_down: k.a_pv_down,
    };

    let config = ScenarioConfig {
        name: manifest.name,
        load_shed_cost: manifest.load_shed_cost,
        res_target_energy: manifest.res_target_mwh,
        water_incentive: manifest.water_incentive,
        slack_bus: manifest.slack_bus,
        compression: manifest.compression,
        storage_cost_side: manifest.storage_cost_side,
    };
    let report = validate_system(&system, &config);
    if !report.is_empty() {
        return Err(ScenarioError::Invalid(report));
    }
    Ok((system, config))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, ScenarioError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ScenarioError::io(path, e))
}

fn write_table<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ScenarioError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| ScenarioError::io(path, e))
}

fn write_series(path: &Path, header: &str, values: &[f64]) -> Result<(), ScenarioError> {
    let mut w = create(path)?;
    let mut body = String::with_capacity(values.len() * 8);
    body.push_str(header);
    body.push('\n');
    for v in values {
        body.push_str(&v.to_string());
        body.push('\n');
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| ScenarioError::io(path, e))
}

/// Writes `system` and `config` as a scenario directory that
/// [`load_scenario`] reads back unchanged.
pub fn save_scenario(system: &PowerSystem, config: &ScenarioConfig, dir: &Path) -> Result<(), ScenarioError> {
    let series_dir = dir.join(SERIES_DIR);
    fs::create_dir_all(&series_dir).map_err(|e| ScenarioError::io(&series_dir, e))?;
    let r = &system.reserves;
    let manifest = Manifest {
        name: config.name.clone(),
        base_mva: system.base_mva,
        load_shed_cost: config.load_shed_cost,
        res_target_mwh: config.res_target_energy,
        water_incentive: config.water_incentive,
        slack_bus: config.slack_bus.clone(),
        compression: config.compression,
        storage_cost_side: config.storage_cost_side,
        reserves: ReserveCoefficients {
            a_wind_up: r.a_wind_up,
            a_wind_down: r.a_wind_down,
            a_pv_up: r.a_pv_up,
            a_pv_down: r.a_pv_down,
        },
    };
    let path = dir.join(MANIFEST);
    let text = toml::to_string(&manifest).map_err(|e| ScenarioError::Manifest {
        file: path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))?;

    let s = |name: String, values: &[f64]| write_series(&series_dir.join(format!("{name}.csv")), "value", values);
    let buses: Vec<BusRow> = system
        .buses
        .iter()
        .map(|b| BusRow {
            id: b.id.clone(),
            zone: b.zone.clone(),
        })
        .collect();
    write_table(&dir.join("buses.csv"), &buses, &["id", "zone"])?;
    for b in &system.buses {
        s(format!("demand_{}", b.id), &b.demand)?;
        s(format!("injection_{}", b.id), &b.fixed_injection)?;
    }
    let lines: Vec<LineRow> = system
        .lines
        .iter()
        .map(|l| LineRow {
            id: l.id.clone(),
            from_bus: l.from_bus.clone(),
            to_bus: l.to_bus.clone(),
            susceptance: l.susceptance,
            limit: l.limit,
            is_tie_line: l.is_tie_line,
        })
        .collect();
    write_table(
        &dir.join("lines.csv"),
        &lines,
        &["id", "from_bus", "to_bus", "susceptance", "limit", "is_tie_line"],
    )?;

    let mut thermal: Vec<&ThermalUnit> = system.thermal.iter().collect();
    let mut storage: Vec<&StorageUnit> = system.storage.iter().collect();
    let mut res: Vec<&ResUnit> = system.res.iter().collect();
    let mut cands = Vec::new();
    for c in &system.candidates {
        match &c.payload {
            CandidatePayload::Thermal(u) => thermal.push(u),
            CandidatePayload::Storage(u) => storage.push(u),
            CandidatePayload::Res(u) => res.push(u),
        }
        cands.push(CandidateRow {
            id: c.id().to_string(),
            invest_cost: c.invest_cost,
            invest_cap_max: c.invest_cap_max,
            counts_toward_res_target: c.counts_toward_res_target,
        });
    }
    let rows: Vec<ThermalRow> = thermal
        .iter()
        .map(|u| ThermalRow {
            id: u.id.clone(),
            bus: u.bus.clone(),
            fuel: u.fuel,
            p_min: u.p_min,
            p_max: u.p_max,
            startup_cap: u.startup_cap,
            shutdown_cap: u.shutdown_cap,
            ramp_up: u.ramp_up,
            ramp_down: u.ramp_down,
            min_up: u.min_up,
            min_down: u.min_down,
            cost_prod: u.cost_prod,
            cost_startup: u.cost_startup,
            scr_eligible: u.scr_eligible,
            tcr_eligible: u.tcr_eligible,
            initial_on: u.initial_on,
        })
        .collect();
    write_table(
        &dir.join("thermal_units.csv"),
        &rows,
        &[
            "id", "bus", "fuel", "p_min", "p_max", "startup_cap", "shutdown_cap", "ramp_up", "ramp_down", "min_up",
            "min_down", "cost_prod", "cost_startup", "scr_eligible", "tcr_eligible", "initial_on",
        ],
    )?;
    for u in &thermal {
        s(format!("availability_{}", u.id), &u.availability)?;
    }
    let rows: Vec<StorageRow> = storage
        .iter()
        .map(|u| StorageRow {
            id: u.id.clone(),
            bus: u.bus.clone(),
            kind: u.kind,
            p_max_dis: u.p_max_dis,
            p_max_ch: u.p_max_ch,
            e_min: u.e_min,
            e_max: u.e_max,
            e_initial: u.e_initial,
            eta_ch: u.eta_ch,
            eta_dis: u.eta_dis,
            cost_charge: u.cost_charge,
            scr_eligible: u.scr_eligible,
            tcr_eligible: u.tcr_eligible,
        })
        .collect();
    write_table(
        &dir.join("storage_units.csv"),
        &rows,
        &[
            "id", "bus", "kind", "p_max_dis", "p_max_ch", "e_min", "e_max", "e_initial", "eta_ch", "eta_dis",
            "cost_charge", "scr_eligible", "tcr_eligible",
        ],
    )?;
    for u in &storage {
        s(format!("inflow_{}", u.id), &u.inflow)?;
    }
    let rows: Vec<ResRow> = res
        .iter()
        .map(|u| ResRow {
            id: u.id.clone(),
            bus: u.bus.clone(),
            technology: u.technology,
            p_max: u.p_max,
            cost_prod: u.cost_prod,
        })
        .collect();
    write_table(&dir.join("res_units.csv"), &rows, &["id", "bus", "technology", "p_max", "cost_prod"])?;
    for u in &res {
        s(format!("cf_{}", u.id), &u.capacity_factor)?;
    }
    write_table(
        &dir.join("candidates.csv"),
        &cands,
        &["id", "invest_cost", "invest_cap_max", "counts_toward_res_target"],
    )?;
    s("scr_up".into(), &r.scr_up)?;
    s("scr_down".into(), &r.scr_down)?;
    s("tcr_up".into(), &r.tcr_up)?;
    s("tcr_down".into(), &r.tcr_down)?;
    Ok(())
}

/// Writes the result tables and `summary.json` into `dir`.
pub fn save_results(report: &ScenarioReport, dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    for (name, table) in report.tables() {
        let path = dir.join(name);
        let mut w = create(&path)?;
        w.write_all(table.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| ScenarioError::io(&path, e))?;
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::fixtures::{res, storage, system, thermal};

    fn sample() -> (PowerSystem, ScenarioConfig) {
        let h = HOURS_PER_YEAR;
        let mut s = system(h, &["N1", "N2"]);
        s.buses[1].zone = "DE".into();
        s.buses[1].fixed_injection = (0..h).map(|t| (t % 7) as f64 - 3.25).collect();
        s.lines.push(Line {
            id: "L1".into(),
            from_bus: "N1".into(),
            to_bus: "N2".into(),
            susceptance: 12.5,
            limit: 400.0,
            is_tie_line: true,
        });
        s.thermal.push(thermal("G1", "N1", h));
        s.thermal[0].availability[100] = 0.0;
        s.storage.push(storage("D1", "N2", StorageKind::Dam, h));
        s.storage[0].inflow = vec![0.1; h];
        s.res.push(res("W1", "N2", ResTechnology::Wind, h));
        s.res[0].capacity_factor[5] = 1.0 / 3.0;
        s.candidates.push(CandidateUnit {
            payload: CandidatePayload::Res(res("PVC", "N1", ResTechnology::Pv, h)),
            invest_cost: 55_000.0,
            invest_cap_max: 3254.0,
            counts_toward_res_target: true,
        });
        s.candidates.push(CandidateUnit {
            payload: CandidatePayload::Thermal(thermal("GC", "N2", h)),
            invest_cost: 1e6,
            invest_cap_max: 0.0,
            counts_toward_res_target: false,
        });
        s.reserves.tcr_up = vec![30.0; h];
        s.reserves.a_pv_up = 26.0 / 3254.0;
        let config = ScenarioConfig {
            name: "sample".into(),
            res_target_energy: Some(9e6),
            slack_bus: Some("N1".into()),
            compression: Compression::EveryOtherDay,
            ..ScenarioConfig::default()
        };
        (s, config)
    }

    #[test]
    fn save_then_load_is_identity() {
        let (s, c) = sample();
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, &c, dir.path()).unwrap();
        let (s2, c2) = load_scenario(dir.path()).unwrap();
        assert_eq!(c2, c);
        assert_eq!(s2, s);
    }

    #[test]
    fn line_to_missing_bus_names_the_line() {
        let (mut s, c) = sample();
        let dir = tempfile::tempdir().unwrap();
        s.lines[0].to_bus = "N9".into();
        // validation is bypassed on save, so the broken reference reaches disk
        save_scenario(&s, &c, dir.path()).unwrap();
        let err = load_scenario(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ScenarioError::UnknownBus { .. }));
        assert!(msg.contains("line L1") && msg.contains("N9"), "{msg}");
    }

    #[test]
    fn short_series_is_a_length_error_with_filename() {
        let (s, c) = sample();
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, &c, dir.path()).unwrap();
        let path = dir.path().join("series/demand_N1.csv");
        write_series(&path, "value", &vec![1.0; 8759]).unwrap();
        let err = load_scenario(dir.path()).unwrap_err();
        assert!(matches!(err, ScenarioError::SeriesLength { expected: 8760, got: 8759, .. }));
        assert!(err.to_string().contains("demand_N1.csv"));
    }

    #[test]
    fn malformed_value_reports_file_and_line() {
        let (s, c) = sample();
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, &c, dir.path()).unwrap();
        let path = dir.path().join("series/cf_W1.csv");
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replacen("0.5\n", "abc\n", 1);
        fs::write(&path, text).unwrap();
        let err = load_scenario(dir.path()).unwrap_err();
        match err {
            ScenarioError::Parse { file, line, .. } => {
                assert!(file.ends_with("cf_W1.csv"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_table_row_reports_line() {
        let (s, c) = sample();
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, &c, dir.path()).unwrap();
        fs::write(dir.path().join("lines.csv"), "id,from_bus,to_bus,susceptance,limit,is_tie_line\nL1,N1,N2,x,1,false\n").unwrap();
        let err = load_scenario(dir.path()).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn minimal_one_bus_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST), "name = \"mini\"\n").unwrap();
        fs::write(dir.path().join("buses.csv"), "id,zone\nN1,CH\n").unwrap();
        fs::create_dir(dir.path().join(SERIES_DIR)).unwrap();
        write_series(&dir.path().join("series/demand_N1.csv"), "mw", &vec![10.0; 8760]).unwrap();
        let (s, c) = load_scenario(dir.path()).unwrap();
        assert_eq!(s.buses.len(), 1);
        assert_eq!(c.load_shed_cost, DEFAULT_LOAD_SHED_COST);
        assert_eq!(c.compression, Compression::FullYear);
        assert!(validate_system(&s, &c).is_empty());
    }

    #[test]
    fn missing_manifest_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_scenario(dir.path()), Err(ScenarioError::Missing(_))));
        fs::write(dir.path().join(MANIFEST), "name = \"x\"\nbogus = 1\n").unwrap();
        assert!(matches!(load_scenario(dir.path()), Err(ScenarioError::Manifest { .. })));
    }

    #[test]
    fn invalid_data_is_rejected() {
        let (mut s, c) = sample();
        s.res[0].capacity_factor[7] = 1.2;
        let dir = tempfile::tempdir().unwrap();
        save_scenario(&s, &c, dir.path()).unwrap();
        match load_scenario(dir.path()).unwrap_err() {
            ScenarioError::Invalid(r) => assert!(r.violations.iter().any(|v| v.entity.contains("W1"))),
            other => panic!("unexpected {other}"),
        }
    }
}
