//! Acceptance checks for the expansion-planning pipeline.
//!
//! Runs without the libtest harness so every check prints exactly one
//! PASS/FAIL line. Exits non-zero when any check fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gep_core::expansion::{add_storage, assemble, compress_system, Assembly, Role, RowKind};
use gep_core::io::{save_results, save_scenario};
use gep_core::pipeline::{run_scenario, RunOptions};
use gep_core::redispatch::{add_water_incentive, fix_binaries, incentive_bound, price_dispatch};
use gep_core::system::*;
use gep_core::timegrid::{build_time_grid, Compression, TimeGrid};
use gep_milp::{
    enumerate_oracle, lp_certificate, parse_mps, solve_lp, solve_milp, write_mps, MilpModel, Sense, SolveOptions,
    Solution, Status,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MINI_SYSTEMS: u64 = 50;
const MPS_MODELS: usize = 20;
const MAX_MINI_BINARIES: usize = 12;

fn options() -> SolveOptions {
    SolveOptions {
        mip_gap: 1e-10,
        ..SolveOptions::default()
    }
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass,
            detail: detail.into(),
        }
    }
}

/// Worst certificate residuals over every optimal LP solved by the suite.
#[derive(Default)]
struct Duality {
    solves: usize,
    worst_gap: f64,
    worst_cs: f64,
    failures: Vec<String>,
}

impl Duality {
    fn record(&mut self, label: &str, model: &MilpModel, sol: &Solution) {
        if sol.status != Status::Optimal {
            return;
        }
        let Some(c) = lp_certificate(model, sol) else {
            self.failures.push(format!("{label}: no duals"));
            return;
        };
        self.solves += 1;
        let gap = c.gap / (1.0 + sol.objective.abs());
        self.worst_gap = self.worst_gap.max(gap);
        self.worst_cs = self.worst_cs.max(c.complementary_slackness);
        if gap > 1e-6 || c.complementary_slackness > 1e-6 {
            self.failures
                .push(format!("{label}: gap {:e}, cs {:e}", gap, c.complementary_slackness));
        }
    }
}

fn bus(id: &str, zone: &str, demand: Vec<f64>) -> Bus {
    let hours = demand.len();
    Bus {
        id: id.into(),
        zone: zone.into(),
        demand,
        fixed_injection: vec![0.0; hours],
    }
}

fn thermal(id: &str, bus: &str, hours: usize) -> ThermalUnit {
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

fn storage(id: &str, bus: &str, kind: StorageKind, hours: usize) -> StorageUnit {
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

fn res(id: &str, bus: &str, technology: ResTechnology, capacity_factor: Vec<f64>) -> ResUnit {
    ResUnit {
        id: id.into(),
        bus: bus.into(),
        technology,
        p_max: 100.0,
        capacity_factor,
        cost_prod: 0.0,
    }
}

fn candidate(payload: CandidatePayload, invest_cost: f64, invest_cap_max: f64) -> CandidateUnit {
    CandidateUnit {
        payload,
        invest_cost,
        invest_cap_max,
        counts_toward_res_target: false,
    }
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

// ---------------------------------------------------------------------------
// Randomized mini systems

fn random_thermal(rng: &mut ChaCha8Rng, id: &str, bus: &str, hours: usize) -> ThermalUnit {
    let p_min = round1(rng.gen_range(5.0..40.0));
    let p_max = p_min + round1(rng.gen_range(40.0..150.0));
    let startup_cap = round1(rng.gen_range(p_min..p_max));
    let shutdown_cap = round1(rng.gen_range(p_min..p_max));
    let mut availability = vec![1.0; hours];
    if hours > 1 && rng.gen_bool(0.2) {
        availability[rng.gen_range(0..hours)] = 0.0;
    }
    let tcr_eligible = rng.gen_bool(0.7);
    ThermalUnit {
        id: id.into(),
        bus: bus.into(),
        fuel: if rng.gen_bool(0.2) { Fuel::Biomass } else { Fuel::Fossil },
        p_min,
        p_max,
        startup_cap,
        shutdown_cap,
        ramp_up: round1(rng.gen_range(20.0..120.0)),
        ramp_down: round1(rng.gen_range(20.0..120.0)),
        min_up: rng.gen_range(1..=3),
        min_down: rng.gen_range(1..=3),
        cost_prod: round1(rng.gen_range(20.0..80.0)),
        cost_startup: round1(rng.gen_range(0.0..1500.0)),
        availability,
        scr_eligible: rng.gen_bool(0.7),
        tcr_eligible,
        initial_on: rng.gen_bool(0.5),
    }
}

fn random_storage(rng: &mut ChaCha8Rng, id: &str, bus: &str, kind: StorageKind, hours: usize) -> StorageUnit {
    let e_max = round1(rng.gen_range(40.0..200.0));
    let e_min = if rng.gen_bool(0.5) { 0.0 } else { round1(0.1 * e_max) };
    let dam = kind == StorageKind::Dam;
    StorageUnit {
        id: id.into(),
        bus: bus.into(),
        kind,
        p_max_dis: round1(rng.gen_range(10.0..60.0)),
        p_max_ch: if dam { 0.0 } else { round1(rng.gen_range(10.0..60.0)) },
        e_min,
        e_max,
        e_initial: round1(rng.gen_range(e_min..=e_max)),
        eta_ch: if dam { 1.0 } else { round1(rng.gen_range(8.0..9.6)) / 10.0 },
        eta_dis: round1(rng.gen_range(8.0..9.6)) / 10.0,
        inflow: if dam {
            (0..hours).map(|_| round1(rng.gen_range(0.0..15.0))).collect()
        } else {
            vec![0.0; hours]
        },
        cost_charge: round1(rng.gen_range(0.0..5.0)),
        scr_eligible: rng.gen_bool(0.5),
        tcr_eligible: kind != StorageKind::Battery && rng.gen_bool(0.5),
    }
}

fn random_cf(rng: &mut ChaCha8Rng, hours: usize) -> Vec<f64> {
    (0..hours).map(|_| round1(rng.gen_range(0.0..10.0)) / 10.0).collect()
}

const STORAGE_KINDS: [StorageKind; 4] = [
    StorageKind::Battery,
    StorageKind::PumpDaily,
    StorageKind::PumpSeasonal,
    StorageKind::Dam,
];

/// Up to 3 buses, 2 thermal units (existing or candidate), 1 existing
/// storage, 2 candidates and 12 hours, with at most 12 binaries.
fn mini_system(seed: u64) -> (PowerSystem, ScenarioConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bus = rng.gen_range(1..=3);
    let n_thermal = rng.gen_range(0..=2usize);
    let n_cand = rng.gen_range(0..=2usize);

    // 0 thermal, 1 storage, 2 renewable
    let mut cand_kinds = Vec::new();
    let mut thermal_cands = 0;
    for _ in 0..n_cand {
        let k = rng.gen_range(0..3);
        if k == 0 && thermal_cands < n_thermal {
            thermal_cands += 1;
            cand_kinds.push(0);
        } else if k == 0 {
            cand_kinds.push(2);
        } else {
            cand_kinds.push(k);
        }
    }
    let invest_binaries = cand_kinds.iter().filter(|&&k| k < 2).count();
    let max_hours = if n_thermal == 0 {
        12
    } else {
        (MAX_MINI_BINARIES - invest_binaries) / (3 * n_thermal)
    };
    let hours = rng.gen_range(1..=max_hours.clamp(1, 12));

    let buses: Vec<String> = (1..=n_bus).map(|i| format!("N{i}")).collect();
    let mut s = PowerSystem::empty(hours);
    for (i, b) in buses.iter().enumerate() {
        let zone = if i > 0 && rng.gen_bool(0.4) { "DE" } else { "CH" };
        let demand = (0..hours).map(|_| round1(rng.gen_range(20.0..120.0))).collect();
        let mut bus = bus(b, zone, demand);
        if rng.gen_bool(0.3) {
            bus.fixed_injection = (0..hours).map(|_| round1(rng.gen_range(-10.0..20.0))).collect();
        }
        s.buses.push(bus);
    }
    for i in 1..n_bus {
        let tie = s.buses[i - 1].zone != s.buses[i].zone;
        s.lines.push(Line {
            id: format!("L{i}"),
            from_bus: buses[i - 1].clone(),
            to_bus: buses[i].clone(),
            susceptance: round1(rng.gen_range(5.0..20.0)),
            limit: round1(rng.gen_range(20.0..150.0)),
            is_tie_line: tie,
        });
    }
    let pick = |rng: &mut ChaCha8Rng| buses[rng.gen_range(0..n_bus)].clone();

    for i in 0..n_thermal - thermal_cands {
        let b = pick(&mut rng);
        s.thermal.push(random_thermal(&mut rng, &format!("G{i}"), &b, hours));
    }
    let kind = STORAGE_KINDS[rng.gen_range(0..4)];
    let b = pick(&mut rng);
    s.storage.push(random_storage(&mut rng, "S1", &b, kind, hours));
    if rng.gen_bool(0.6) {
        let tech = [ResTechnology::Pv, ResTechnology::Wind, ResTechnology::RunOfRiver, ResTechnology::Biomass]
            [rng.gen_range(0..4)];
        let cf = random_cf(&mut rng, hours);
        let b = pick(&mut rng);
        let mut u = res("R1", &b, tech, cf);
        u.p_max = round1(rng.gen_range(20.0..100.0));
        u.cost_prod = round1(rng.gen_range(0.0..5.0));
        s.res.push(u);
    }
    for (i, k) in cand_kinds.iter().enumerate() {
        let b = pick(&mut rng);
        let id = format!("C{i}");
        let c = match k {
            0 => {
                let mut u = random_thermal(&mut rng, &id, &b, hours);
                u.initial_on = false;
                candidate(CandidatePayload::Thermal(u), round1(rng.gen_range(100.0..5000.0)), 0.0)
            }
            1 => {
                let kind = [StorageKind::Battery, StorageKind::PumpDaily][rng.gen_range(0..2)];
                let u = random_storage(&mut rng, &id, &b, kind, hours);
                candidate(CandidatePayload::Storage(u), round1(rng.gen_range(100.0..3000.0)), 0.0)
            }
            _ => {
                let cf = random_cf(&mut rng, hours);
                let mut u = res(&id, &b, ResTechnology::Pv, cf);
                u.technology = if rng.gen_bool(0.5) { ResTechnology::Pv } else { ResTechnology::Wind };
                let cap = round1(rng.gen_range(20.0..150.0));
                u.p_max = cap;
                candidate(CandidatePayload::Res(u), round1(rng.gen_range(1.0..80.0)), cap)
            }
        };
        let mut c = c;
        c.counts_toward_res_target = rng.gen_bool(0.5);
        s.candidates.push(c);
    }

    let providers = s.thermal.iter().any(|u| u.tcr_eligible) || s.storage.iter().any(|u| u.tcr_eligible);
    if providers && rng.gen_bool(0.5) {
        s.reserves.tcr_up = (0..hours).map(|_| round1(rng.gen_range(0.0..10.0))).collect();
        s.reserves.a_pv_up = 0.02;
        s.reserves.a_wind_down = 0.01;
    }
    let mut config = ScenarioConfig {
        name: format!("mini{seed}"),
        ..ScenarioConfig::default()
    };
    if rng.gen_bool(0.25) {
        config.res_target_energy = Some(round1(rng.gen_range(1.0..50.0)));
    }
    (s, config)
}

struct Mini {
    system: PowerSystem,
    grid: TimeGrid,
    asm: Assembly,
}

fn build_minis() -> Vec<Mini> {
    (0..MINI_SYSTEMS)
        .map(|seed| {
            let (system, config) = mini_system(seed);
            let grid = TimeGrid::identity(system.hours);
            let asm = assemble(&system, &config, &grid).unwrap_or_else(|e| panic!("mini system {seed}: {e}"));
            assert!(asm.model.num_binaries() <= MAX_MINI_BINARIES, "mini system {seed}");
            Mini { system, grid, asm }
        })
        .collect()
}

fn check_oracle(minis: &[Mini], duality: &mut Duality) -> (Check, Vec<Solution>) {
    let start = Instant::now();
    let mut sols = Vec::new();
    let mut bad = Vec::new();
    let mut optimal = 0;
    let mut worst_abs = 0.0f64;
    let mut worst_rel = 0.0f64;
    for (i, m) in minis.iter().enumerate() {
        let model = &m.asm.model;
        let relaxed = solve_lp(model, &options()).unwrap();
        duality.record(&format!("mini {i} relaxation"), model, &relaxed);
        let sol = solve_milp(model, &options()).unwrap();
        let oracle = enumerate_oracle(model, &options()).unwrap();
        if sol.status != oracle.status {
            bad.push(format!("#{i}: {:?} vs oracle {:?}", sol.status, oracle.status));
        } else if sol.status == Status::Optimal {
            optimal += 1;
            let diff = (sol.objective - oracle.objective).abs();
            worst_abs = worst_abs.max(diff);
            worst_rel = worst_rel.max(diff / oracle.objective.abs().max(1.0));
            if diff > 1e-6 * oracle.objective.abs().max(1.0) {
                bad.push(format!("#{i}: {} vs oracle {}", sol.objective, oracle.objective));
            }
        }
        sols.push(sol);
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < Duration::from_secs(60) && optimal > 0;
    let detail = format!(
        "{} systems ({optimal} optimal), worst |diff| {worst_abs:.2e} (rel {worst_rel:.2e}), {:.1} s{}",
        minis.len(),
        elapsed.as_secs_f64(),
        if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
    );
    (Check::new("oracle equivalence", pass, detail), sols)
}

// ---------------------------------------------------------------------------
// Hand-computed builder rows

type RowView = (Vec<(String, f64)>, Sense, f64);

fn row_of(model: &MilpModel, name: &str) -> Option<RowView> {
    let c = model.constraint(model.row_by_name(name)?);
    let mut terms: Vec<(String, f64)> = c
        .terms
        .iter()
        .map(|&(v, a)| (model.variable(v).name.clone(), a))
        .collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Some((terms, c.sense, c.rhs))
}

fn check_builder_rows() -> Check {
    let h = 3;
    let mut s = PowerSystem::empty(h);
    s.buses.push(bus("N1", "CH", vec![100.0; h]));
    s.buses.push(bus("N2", "CH", vec![90.0; h]));
    s.lines.push(Line {
        id: "L1".into(),
        from_bus: "N1".into(),
        to_bus: "N2".into(),
        susceptance: 10.0,
        limit: 80.0,
        is_tie_line: false,
    });
    let g1 = thermal("G1", "N1", h);
    let mut g2 = thermal("G2", "N1", h);
    g2.min_up = 1;
    g2.min_down = 1;
    g2.shutdown_cap = 120.0;
    g2.availability = vec![1.0, 0.0, 1.0];
    g2.initial_on = true;
    g2.scr_eligible = false;
    g2.tcr_eligible = false;
    let mut g3 = thermal("G3", "N2", h);
    g3.p_min = 50.0;
    g3.min_up = 1;
    g3.min_down = 1;
    g3.scr_eligible = false;
    g3.tcr_eligible = false;
    s.thermal.push(g1.clone());
    s.thermal.push(g2.clone());
    let s1 = storage("S1", "N2", StorageKind::PumpDaily, h);
    let mut d1 = storage("D1", "N1", StorageKind::Dam, h);
    d1.e_min = 10.0;
    d1.inflow = vec![5.0; h];
    d1.eta_ch = 1.0;
    s.storage.push(s1.clone());
    s.storage.push(d1.clone());
    let mut b2 = storage("B2", "N2", StorageKind::Battery, h);
    b2.p_max_dis = 30.0;
    b2.p_max_ch = 20.0;
    b2.e_min = 5.0;
    b2.e_max = 60.0;
    b2.e_initial = 20.0;
    b2.scr_eligible = false;
    let w1 = {
        let mut u = res("W1", "N1", ResTechnology::Wind, vec![0.4; h]);
        u.cost_prod = 1.0;
        u
    };
    s.res.push(w1.clone());
    let pv_cap = 3254.0;
    let pv = {
        let mut u = res("PV1", "N2", ResTechnology::Pv, vec![0.5; h]);
        u.p_max = pv_cap;
        u
    };
    s.candidates.push(candidate(CandidatePayload::Thermal(g3.clone()), 1e4, 0.0));
    s.candidates.push(candidate(CandidatePayload::Storage(b2.clone()), 1e3, 0.0));
    let mut pv_cand = candidate(CandidatePayload::Res(pv.clone()), 10.0, pv_cap);
    pv_cand.counts_toward_res_target = true;
    s.candidates.push(pv_cand);
    s.reserves.tcr_up = vec![10.0; h];
    s.reserves.a_pv_up = 26.0 / pv_cap;
    let config = ScenarioConfig {
        res_target_energy: Some(50.0),
        ..ScenarioConfig::default()
    };
    let asm = match assemble(&s, &config, &TimeGrid::identity(h)) {
        Ok(a) => a,
        Err(e) => return Check::new("builder coefficients", false, e.to_string()),
    };
    let model = &asm.model;

    type Row = (&'static str, Vec<(&'static str, f64)>, Sense, f64);
    let (head, su, sd) = (g1.p_max - g1.p_min, g1.p_max - g1.startup_cap, g1.p_max - g1.shutdown_cap);
    let b_base = 10.0 * s.base_mva;
    let mut rows: Vec<Row> = vec![
        // combined upper limit, min up time 2
        (
            "upgen_G1_0",
            vec![("pmin_G1_0", 1.0), ("scrup_G1_0", 1.0), ("tcrup_G1_0", 1.0), ("u_G1_0", -head), ("v_G1_0", su), ("w_G1_1", sd)],
            Sense::Le,
            0.0,
        ),
        ("upgen_G1_2", vec![("pmin_G1_2", 1.0), ("scrup_G1_2", 1.0), ("tcrup_G1_2", 1.0), ("u_G1_2", -head), ("v_G1_2", su)], Sense::Le, 0.0),
        ("dngen_G1_0", vec![("pmin_G1_0", 1.0), ("scrdn_G1_0", -1.0), ("tcrdn_G1_0", -1.0)], Sense::Ge, 0.0),
        // split limits, min up time 1
        ("upsu_G2_0", vec![("pmin_G2_0", 1.0), ("u_G2_0", -200.0), ("v_G2_0", 150.0)], Sense::Le, 0.0),
        ("upsd_G2_0", vec![("pmin_G2_0", 1.0), ("u_G2_0", -200.0), ("w_G2_1", 180.0)], Sense::Le, 0.0),
        ("upsd_G2_2", vec![("pmin_G2_2", 1.0), ("u_G2_2", -200.0)], Sense::Le, 0.0),
        ("logic_G2_0", vec![("u_G2_0", -1.0), ("v_G2_0", 1.0), ("w_G2_0", -1.0)], Sense::Eq, -1.0),
        ("logic_G1_1", vec![("u_G1_0", 1.0), ("u_G1_1", -1.0), ("v_G1_1", 1.0), ("w_G1_1", -1.0)], Sense::Eq, 0.0),
        ("maint_G2_1", vec![("u_G2_1", 1.0)], Sense::Le, 0.0),
        ("rampup_G1_1", vec![("pmin_G1_0", -1.0), ("pmin_G1_1", 1.0)], Sense::Le, g1.ramp_up),
        ("rampdn_G1_1", vec![("pmin_G1_0", 1.0), ("pmin_G1_1", -1.0)], Sense::Le, g1.ramp_down),
        ("minup_G1_1", vec![("u_G1_1", -1.0), ("v_G1_0", 1.0), ("v_G1_1", 1.0)], Sense::Le, 0.0),
        ("mindn_G1_1", vec![("u_G1_1", 1.0), ("w_G1_0", 1.0), ("w_G1_1", 1.0)], Sense::Le, 1.0),
        // storage
        ("soc_S1_0", vec![("ch_S1_0", -s1.eta_ch), ("dis_S1_0", 1.0 / s1.eta_dis), ("e_S1_0", 1.0)], Sense::Eq, s1.e_initial),
        (
            "soc_S1_1",
            vec![("ch_S1_1", -s1.eta_ch), ("dis_S1_1", 1.0 / s1.eta_dis), ("e_S1_0", -1.0), ("e_S1_1", 1.0)],
            Sense::Eq,
            0.0,
        ),
        ("socend_S1", vec![("e_S1_2", 1.0)], Sense::Eq, s1.e_initial),
        ("stup_S1_0", vec![("ch_S1_0", -1.0), ("dis_S1_0", 1.0), ("scrup_S1_0", 1.0), ("tcrup_S1_0", 1.0)], Sense::Le, s1.p_max_dis),
        ("stdn_S1_0", vec![("ch_S1_0", 1.0), ("dis_S1_0", -1.0), ("scrdn_S1_0", 1.0), ("tcrdn_S1_0", 1.0)], Sense::Le, s1.p_max_ch),
        ("soc_D1_0", vec![("ch_D1_0", -1.0), ("dis_D1_0", 1.0 / d1.eta_dis), ("e_D1_0", 1.0)], Sense::Eq, d1.e_initial + 5.0),
        ("damlo_D1_0", vec![("dis_D1_0", 1.0), ("scrdn_D1_0", -1.0), ("tcrdn_D1_0", -1.0)], Sense::Ge, 0.0),
        ("damhi_D1_0", vec![("dis_D1_0", 1.0), ("scrdn_D1_0", -1.0), ("tcrdn_D1_0", -1.0)], Sense::Le, d1.p_max_dis),
        // investment linking
        ("invon_G3_0", vec![("inv_G3", -1.0), ("u_G3_0", 1.0)], Sense::Le, 0.0),
        (
            "soc_B2_0",
            vec![("ch_B2_0", -b2.eta_ch), ("dis_B2_0", 1.0 / b2.eta_dis), ("e_B2_0", 1.0), ("inv_B2", -b2.e_initial)],
            Sense::Eq,
            0.0,
        ),
        ("invdis_B2_0", vec![("dis_B2_0", 1.0), ("inv_B2", -b2.p_max_dis)], Sense::Le, 0.0),
        ("invch_B2_0", vec![("ch_B2_0", 1.0), ("inv_B2", -b2.p_max_ch)], Sense::Le, 0.0),
        ("invemax_B2_0", vec![("e_B2_0", 1.0), ("inv_B2", -b2.e_max)], Sense::Le, 0.0),
        ("invemin_B2_0", vec![("e_B2_0", 1.0), ("inv_B2", -b2.e_min)], Sense::Ge, 0.0),
        ("socend_B2", vec![("e_B2_2", 1.0), ("inv_B2", -b2.e_initial)], Sense::Eq, 0.0),
        ("rescap_PV1_0", vec![("inv_PV1", -0.5), ("p_PV1_0", 1.0)], Sense::Le, 0.0),
        // system rows
        (
            "reqtcrup_system_0",
            vec![("inv_PV1", -(26.0 / pv_cap)), ("tcrup_D1_0", 1.0), ("tcrup_G1_0", 1.0), ("tcrup_S1_0", 1.0)],
            Sense::Ge,
            10.0,
        ),
        ("flowdef_L1_0", vec![("delta_N1_0", -b_base), ("delta_N2_0", b_base), ("flow_L1_0", 1.0)], Sense::Eq, 0.0),
        (
            "bal_N1_0",
            vec![
                ("ch_D1_0", -1.0),
                ("dis_D1_0", 1.0),
                ("flow_L1_0", -1.0),
                ("ls_N1_0", 1.0),
                ("p_W1_0", 1.0),
                ("pmin_G1_0", 1.0),
                ("pmin_G2_0", 1.0),
                ("u_G1_0", g1.p_min),
                ("u_G2_0", g2.p_min),
            ],
            Sense::Eq,
            100.0,
        ),
        (
            "bal_N2_0",
            vec![
                ("ch_B2_0", -1.0),
                ("ch_S1_0", -1.0),
                ("dis_B2_0", 1.0),
                ("dis_S1_0", 1.0),
                ("flow_L1_0", 1.0),
                ("ls_N2_0", 1.0),
                ("p_PV1_0", 1.0),
                ("pmin_G3_0", 1.0),
                ("u_G3_0", g3.p_min),
            ],
            Sense::Eq,
            90.0,
        ),
    ];
    let mut target: Vec<(&'static str, f64)> = vec![("p_PV1_0", 1.0), ("p_PV1_1", 1.0), ("p_PV1_2", 1.0)];
    target.extend([("p_W1_0", 1.0), ("p_W1_1", 1.0), ("p_W1_2", 1.0)]);
    rows.push(("restarget_system", target, Sense::Ge, 50.0));

    let mut bad = Vec::new();
    for (name, mut terms, sense, rhs) in rows.iter().cloned() {
        terms.sort_by(|a, b| a.0.cmp(b.0));
        let want: Vec<(String, f64)> = terms.iter().map(|&(n, a)| (n.to_string(), a)).collect();
        match row_of(model, name) {
            None => bad.push(format!("{name} missing")),
            Some(got) if got != (want.clone(), sense, rhs) => bad.push(format!("{name}: got {got:?}, want {want:?}")),
            Some(_) => {}
        }
    }

    // bounds carried by columns
    let bound = |name: &str| {
        let v = model.variable(model.var_by_name(name).expect("column exists"));
        (v.lower, v.upper)
    };
    for (name, want) in [
        ("p_W1_0", (0.0, 0.4 * w1.p_max)),
        ("e_D1_0", (d1.e_min, d1.e_max)),
        ("ls_N2_0", (0.0, 90.0)),
        ("flow_L1_0", (-80.0, 80.0)),
        ("delta_N1_0", (0.0, 0.0)),
    ] {
        if bound(name) != want {
            bad.push(format!("{name} bounds {:?}, want {want:?}", bound(name)));
        }
    }

    // worked example: started this hour, stays on next hour; output above
    // minimum plus upward reserve is capped at P^max - P^min - (P^max - SU)
    let upgen = model.constraint(model.row_by_name("upgen_G1_0").unwrap());
    let mut x = vec![0.0; model.num_vars()];
    let set = |x: &mut Vec<f64>, name: &str, v: f64| x[model.var_by_name(name).unwrap().0] = v;
    set(&mut x, "u_G1_0", 1.0);
    set(&mut x, "v_G1_0", 1.0);
    set(&mut x, "pmin_G1_0", 30.0);
    set(&mut x, "scrup_G1_0", 20.0);
    let room_used = upgen.violation(&x);
    set(&mut x, "tcrup_G1_0", 1.0);
    let over = upgen.violation(&x);
    let example_ok = room_used == 0.0 && over == 1.0;
    if !example_ok {
        bad.push(format!("50 MW example: violations {room_used} and {over}"));
    }

    Check::new(
        "builder coefficients",
        bad.is_empty(),
        format!(
            "{} rows and 5 column bounds compared exactly; 50 MW bound {}{}",
            rows.len(),
            if example_ok { "holds" } else { "broken" },
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

// ---------------------------------------------------------------------------
// Compression

/// Forward-simulates the level rows of `id` with the charge and discharge
/// columns fixed.
fn simulate_levels(asm: &Assembly, id: &str, hours: usize, ch: &[f64], dis: &[f64]) -> Vec<f64> {
    let reg = &asm.registry;
    let mut x = vec![0.0; asm.model.num_vars()];
    for t in 0..hours {
        x[reg.var(id, Role::Charge, t).unwrap().0] = ch[t % ch.len()];
        x[reg.var(id, Role::Discharge, t).unwrap().0] = dis[t % dis.len()];
    }
    let mut levels = Vec::with_capacity(hours);
    for t in 0..hours {
        let row = asm.model.constraint(reg.row(id, RowKind::StorageBalance, t).unwrap());
        let e = reg.var(id, Role::Level, t).unwrap();
        let a = row.coefficient(e).unwrap();
        let rest: f64 = row.terms.iter().filter(|(v, _)| *v != e).map(|&(v, c)| c * x[v.0]).sum();
        x[e.0] = (row.rhs - rest) / a;
        levels.push(x[e.0]);
    }
    levels
}

fn check_compression() -> Check {
    let compressed = TimeGrid {
        compression: Compression::EveryOtherDay,
        physical_hours: 48,
        simulated_hours: 24,
        day_map: vec![1],
        cost_scale: 2.0,
        storage_scale: 2.0,
    };
    let full = TimeGrid::identity(48);
    let ch: Vec<f64> = (0..24).map(|t| if (1..7).contains(&t) { 12.5 + t as f64 } else { 0.0 }).collect();
    let dis: Vec<f64> = (0..24).map(|t| if (17..22).contains(&t) { 7.0 + 0.5 * t as f64 } else { 0.0 }).collect();
    let inflow: Vec<f64> = (0..24).map(|t| 3.0 + (t % 5) as f64).collect();

    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for kind in [StorageKind::PumpDaily, StorageKind::PumpSeasonal, StorageKind::Dam] {
        let dam = kind == StorageKind::Dam;
        let mut unit = storage("S", "N1", kind, 48);
        unit.e_max = 2000.0;
        unit.e_initial = 900.0;
        unit.p_max_ch = if dam { 0.0 } else { 40.0 };
        let unit_ch: Vec<f64> = if dam { vec![0.0; 24] } else { ch.clone() };
        if dam {
            unit.inflow = inflow.iter().chain(&inflow).copied().collect();
        }
        let mut asm_full = Assembly::default();
        add_storage(&mut asm_full, &unit, &full, None).unwrap();
        let e_full = simulate_levels(&asm_full, "S", 48, &unit_ch, &dis);
        let physical = e_full[47] - unit.e_initial;

        unit.inflow.truncate(24);
        let mut asm_c = Assembly::default();
        add_storage(&mut asm_c, &unit, &compressed, None).unwrap();
        let e_c = simulate_levels(&asm_c, "S", 24, &unit_ch, &dis);
        let bound = compressed.storage_scaling(kind).bound;
        let simulated = e_c[23] - bound * unit.e_initial;
        let err = (simulated - physical).abs();
        worst = worst.max(err);
        parts.push(format!("{kind:?} {physical:.3}"));
    }
    let grid = build_time_grid(Compression::EveryOtherDay);
    let counts_ok = grid.day_map.len() == 183 && grid.simulated_hours == 4392;
    Check::new(
        "compression identity",
        worst <= 1e-9 && counts_ok,
        format!(
            "2-day level change ({}) worst error {worst:.1e}; grid {} days / {} hours",
            parts.join(", "),
            grid.day_map.len(),
            grid.simulated_hours
        ),
    )
}

/// One bus with a fixed injection, run-of-river and a battery covering an
/// evening peak; every day identical.
fn periodic_system(hours: usize) -> PowerSystem {
    let mut s = PowerSystem::empty(hours);
    let demand = (0..hours).map(|t| if t % 24 == 18 { 130.0 } else { 100.0 }).collect();
    let mut n1 = bus("N1", "CH", demand);
    n1.fixed_injection = vec![40.0; hours];
    s.buses.push(n1);
    let mut ror = res("ROR", "N1", ResTechnology::RunOfRiver, vec![1.0; hours]);
    ror.p_max = 80.0;
    ror.cost_prod = 2.0;
    s.res.push(ror);
    let mut bat = storage("BAT", "N1", StorageKind::Battery, hours);
    bat.eta_ch = 0.9;
    bat.eta_dis = 0.9;
    bat.cost_charge = 0.0;
    bat.scr_eligible = false;
    s.storage.push(bat);
    s
}

fn check_cost_doubling(duality: &mut Duality) -> Check {
    let start = Instant::now();
    let system = periodic_system(8760);
    let config = ScenarioConfig::default();
    let mut per_day = Vec::new();
    for mode in [Compression::FullYear, Compression::EveryOtherDay] {
        let grid = build_time_grid(mode);
        let sys = compress_system(&system, &grid).unwrap();
        let asm = assemble(&sys, &config, &grid).unwrap();
        assert_eq!(asm.model.num_binaries(), 0);
        let sol = solve_lp(&asm.model, &options()).unwrap();
        if sol.status != Status::Optimal {
            return Check::new("operating-cost doubling", false, format!("{mode} solve ended {:?}", sol.status));
        }
        duality.record(&format!("periodic {mode}"), &asm.model, &sol);
        // the compressed objective already carries the cost scale
        let days = grid.cost_scale * grid.day_map.len() as f64;
        per_day.push(sol.objective / days);
    }
    let elapsed = start.elapsed();
    let rel = (per_day[0] - per_day[1]).abs() / per_day[0].abs();
    Check::new(
        "operating-cost doubling",
        rel <= 1e-3 && elapsed < Duration::from_secs(30),
        format!(
            "daily cost full {:.3} vs compressed {:.3} (rel {:.2e}), {:.1} s",
            per_day[0],
            per_day[1],
            rel,
            elapsed.as_secs_f64()
        ),
    )
}

fn check_reserve_coupling() -> Check {
    let h = 2;
    let mut s = PowerSystem::empty(h);
    s.buses.push(bus("N1", "CH", vec![100.0; h]));
    s.thermal.push(thermal("G1", "N1", h));
    let cap = 3254.0;
    let mut pv = res("PV", "N1", ResTechnology::Pv, vec![0.3; h]);
    pv.p_max = cap;
    s.candidates.push(candidate(CandidatePayload::Res(pv), 10.0, cap));
    s.reserves.tcr_up = vec![10.0; h];
    s.reserves.tcr_down = vec![5.0; h];
    s.reserves.a_pv_up = 26.0 / cap;
    s.reserves.a_pv_down = 28.0 / cap;
    let asm = assemble(&s, &ScenarioConfig::default(), &TimeGrid::identity(h)).unwrap();
    let inv = asm.registry.invest("PV").unwrap();
    let mut worst = 0.0f64;
    let mut raised = Vec::new();
    for (kind, want) in [(RowKind::TcrUpRequirement, 26.0), (RowKind::TcrDownRequirement, 28.0)] {
        for t in 0..h {
            let row = asm.model.constraint(asm.registry.row("system", kind, t).unwrap());
            // requirement(inv) = rhs - coefficient * inv
            let increase = -row.coefficient(inv).unwrap_or(0.0) * cap;
            worst = worst.max((increase - want).abs() / want);
            if t == 0 {
                raised.push(format!("{increase}"));
            }
        }
    }
    // 26/3254 has no exact binary form; allow a few ulps
    Check::new(
        "reserve coupling",
        worst <= 4.0 * f64::EPSILON,
        format!("building 3254 MW raises TCR up/down by {} MW (rel error {worst:.1e})", raised.join(" / ")),
    )
}

fn check_redispatch(minis: &[Mini], sols: &[Solution], duality: &mut Duality) -> Check {
    let opts = options();
    let mut bad = Vec::new();
    let mut priced = 0;
    let mut worst_zero = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (i, (m, sol)) in minis.iter().zip(sols).enumerate() {
        if sol.status != Status::Optimal {
            continue;
        }
        priced += 1;
        let (model, reg) = (&m.asm.model, &m.asm.registry);
        let p0 = match price_dispatch(model, reg, &m.system, &m.grid, sol, 0.0, &opts) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let d0 = (p0.objective - sol.objective).abs() / (1.0 + sol.objective.abs());
        worst_zero = worst_zero.max(d0);
        if d0 > 1e-6 {
            bad.push(format!("#{i}: epsilon 0 moves objective by {d0:e}"));
        }
        let eps = 1e-4;
        let p4 = price_dispatch(model, reg, &m.system, &m.grid, sol, eps, &opts).unwrap();
        let bound = incentive_bound(&m.system, &m.grid, eps);
        let slack = 1e-6 * (1.0 + sol.objective.abs());
        if p4.objective_delta.abs() > bound + slack {
            bad.push(format!("#{i}: delta {} above bound {bound}", p4.objective_delta));
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(p4.objective_delta.abs() / bound);
        }
        let mut lp = fix_binaries(model, &sol.values, opts.integrality_tol).unwrap();
        add_water_incentive(&mut lp, reg, &m.system, eps);
        let s = solve_lp(&lp, &opts).unwrap();
        duality.record(&format!("mini {i} pricing"), &lp, &s);
    }

    // single bus: a cheap renewable and a partly loaded thermal unit
    let h = 4;
    let mut s = PowerSystem::empty(h);
    s.buses.push(bus("N1", "CH", vec![150.0; h]));
    let mut cheap = res("WIND", "N1", ResTechnology::Wind, vec![1.0; h]);
    cheap.cost_prod = 20.0;
    s.res.push(cheap);
    let mut g = thermal("GAS", "N1", h);
    g.p_min = 20.0;
    g.p_max = 200.0;
    g.startup_cap = 200.0;
    g.shutdown_cap = 200.0;
    g.ramp_up = 200.0;
    g.ramp_down = 200.0;
    g.min_up = 1;
    g.min_down = 1;
    g.cost_prod = 35.0;
    g.initial_on = true;
    s.thermal.push(g);
    let grid = TimeGrid::identity(h);
    let asm = assemble(&s, &ScenarioConfig::default(), &grid).unwrap();
    let milp = solve_milp(&asm.model, &opts).unwrap();
    let prices = price_dispatch(&asm.model, &asm.registry, &s, &grid, &milp, 0.0, &opts)
        .map(|p| p.nodal_prices["N1"].clone())
        .unwrap_or_default();
    let price_ok = prices.len() == h && prices.iter().all(|&p| p == 35.0);
    if !price_ok {
        bad.push(format!("single-bus prices {prices:?}, want 35"));
    }

    Check::new(
        "re-dispatch consistency",
        bad.is_empty() && priced > 0,
        format!(
            "{priced} systems priced; epsilon 0 worst rel change {worst_zero:.1e}; epsilon 1e-4 uses at most {:.0}% of the bound; marginal price {}{}",
            100.0 * worst_ratio,
            prices.first().copied().unwrap_or(f64::NAN),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn check_res_target() -> Check {
    let h = 24;
    let mut s = PowerSystem::empty(h);
    s.buses.push(bus("N1", "CH", vec![100.0; h]));
    let mut g = thermal("GAS", "N1", h);
    g.p_min = 0.0;
    g.p_max = 200.0;
    g.startup_cap = 200.0;
    g.shutdown_cap = 200.0;
    g.ramp_up = 200.0;
    g.ramp_down = 200.0;
    g.min_up = 1;
    g.min_down = 1;
    g.cost_prod = 30.0;
    g.cost_startup = 0.0;
    g.initial_on = true;
    s.thermal.push(g);
    let cf = (0..h).map(|t| if (8..16).contains(&t) { 0.5 } else { 0.0 }).collect();
    let mut pv = res("PV", "N1", ResTechnology::Pv, cf);
    pv.p_max = 100.0;
    let mut c = candidate(CandidatePayload::Res(pv), 500.0, 100.0);
    c.counts_toward_res_target = true;
    s.candidates.push(c);
    let grid = TimeGrid::identity(h);

    let mut built = Vec::new();
    for target in [None, Some(300.0)] {
        let config = ScenarioConfig {
            res_target_energy: target,
            ..ScenarioConfig::default()
        };
        let asm = assemble(&s, &config, &grid).unwrap();
        let sol = solve_milp(&asm.model, &options()).unwrap();
        if sol.status != Status::Optimal {
            return Check::new("RES target", false, format!("target {target:?}: {:?}", sol.status));
        }
        built.push(sol.values[asm.registry.invest("PV").unwrap().0]);
    }
    Check::new(
        "RES target",
        built[0] <= 1e-9 && built[1] > 1e-6,
        format!("PV built {:.3} MW without target, {:.3} MW with 300 MWh target", built[0], built[1]),
    )
}

fn check_mps(minis: &[Mini], sols: &[Solution]) -> Check {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (i, (m, sol)) in minis.iter().zip(sols).take(MPS_MODELS).enumerate() {
        let mut buf = Vec::new();
        write_mps(&m.asm.model, "mini", &mut buf).unwrap();
        let parsed = match parse_mps(buf.as_slice()) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let again = solve_milp(&parsed, &options()).unwrap();
        if again.status != sol.status {
            bad.push(format!("#{i}: {:?} vs {:?}", again.status, sol.status));
        } else if sol.status == Status::Optimal {
            let d = (again.objective - sol.objective).abs() / (1.0 + sol.objective.abs());
            worst = worst.max(d);
            if d > 1e-8 {
                bad.push(format!("#{i}: {} vs {}", again.objective, sol.objective));
            }
        }
    }
    Check::new(
        "MPS round trip",
        bad.is_empty(),
        format!(
            "{MPS_MODELS} models, worst rel objective difference {worst:.1e}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn check_determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = tmp.path().join("scenario");
    let mut system = periodic_system(8760);
    system.buses.push(bus("D1", "DE", vec![60.0; 8760]));
    system.lines.push(Line {
        id: "X1".into(),
        from_bus: "N1".into(),
        to_bus: "D1".into(),
        susceptance: 10.0,
        limit: 40.0,
        is_tie_line: true,
    });
    let mut wind = res("WND", "D1", ResTechnology::Wind, (0..8760).map(|t| if t % 3 == 0 { 0.6 } else { 0.2 }).collect());
    wind.p_max = 80.0;
    system.res.push(wind);
    let config = ScenarioConfig {
        name: "determinism".into(),
        compression: Compression::EveryOtherDay,
        ..ScenarioConfig::default()
    };
    save_scenario(&system, &config, &scenario).unwrap();

    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let outcome = match run_scenario(&scenario, &RunOptions::default()) {
            Ok(o) => o,
            Err(e) => return Check::new("end-to-end determinism", false, e.to_string()),
        };
        save_results(&outcome.report, &out).unwrap();
        dirs.push(dir_files(&out));
    }
    let same = dirs[0] == dirs[1];
    let bytes: usize = dirs[0].iter().map(|(_, b)| b.len()).sum();
    Check::new(
        "end-to-end determinism",
        same && !dirs[0].is_empty(),
        format!(
            "{} files, {bytes} bytes, {}",
            dirs[0].len(),
            if same { "identical" } else { "differ" }
        ),
    )
}

fn main() -> ExitCode {
    let mut duality = Duality::default();
    let minis = build_minis();
    let (oracle, sols) = check_oracle(&minis, &mut duality);
    let builder = check_builder_rows();
    let compression = check_compression();
    let doubling = check_cost_doubling(&mut duality);
    let reserve = check_reserve_coupling();
    let redispatch = check_redispatch(&minis, &sols, &mut duality);
    let target = check_res_target();
    let mps = check_mps(&minis, &sols);
    let determinism = check_determinism();
    let duality_check = Check::new(
        "LP duality",
        duality.failures.is_empty() && duality.solves > 0,
        format!(
            "{} optimal LPs, worst rel gap {:.1e}, worst complementary slackness {:.1e}{}",
            duality.solves,
            duality.worst_gap,
            duality.worst_cs,
            if duality.failures.is_empty() { String::new() } else { format!("; {}", duality.failures.join("; ")) }
        ),
    );

    let checks = [
        oracle,
        duality_check,
        builder,
        compression,
        doubling,
        reserve,
        redispatch,
        target,
        mps,
        determinism,
    ];
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
