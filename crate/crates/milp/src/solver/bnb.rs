//! Best-bound branch-and-bound.
//!
//! Children are solved as soon as they are created and enter the queue keyed
//! by their LP bound; ties go to the lower node id. Branching picks the most
//! fractional binary, lowest id on ties. The whole search is sequential, so a
//! given model and option set always yields the same incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::debug;

use super::simplex::{LpData, LpStatus};
use super::{lp_with_data, objective_value, SolveOptions, Solution, Status};
use crate::model::MilpModel;

struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(usize, f64, f64)>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: reverse so the smallest (bound, id) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn prune_threshold(incumbent: f64, gap: f64) -> f64 {
    incumbent - gap * incumbent.abs().max(1.0)
}

pub(super) fn branch_and_bound(model: &MilpModel, options: &SolveOptions) -> Solution {
    let start = Instant::now();
    let data = LpData::new(model);
    let tol = options.tolerances();
    let binaries: Vec<usize> = model.binaries().map(|v| v.0).collect();

    let mut iterations = 0usize;
    let mut nodes = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut trouble = false;

    let solve_node = |fixings: &[(usize, f64, f64)], iterations: &mut usize| {
        let out = data.solve(fixings, &tol);
        *iterations += out.iterations;
        out
    };

    let root = solve_node(&[], &mut iterations);
    nodes += 1;
    match root.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return finish(Status::Infeasible, None, f64::INFINITY, nodes, iterations, model),
        LpStatus::Unbounded => return finish(Status::Unbounded, None, f64::NEG_INFINITY, nodes, iterations, model),
        LpStatus::IterationLimit | LpStatus::NumericalFailure => {
            return finish(Status::NumericalFailure, None, f64::NEG_INFINITY, nodes, iterations, model)
        }
    }
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        id: next_id,
        bound: objective_value(model, &root.x),
        fixings: Vec::new(),
        values: root.x,
    });
    next_id += 1;

    let mut hit_limit = false;
    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= prune_threshold(*inc, options.mip_gap) {
                // every remaining node is at least as bad
                heap.clear();
                heap.push(node);
                break;
            }
        }
        let branch = binaries
            .iter()
            .copied()
            .map(|j| {
                let v = node.values[j];
                (j, (v - v.floor()).min(v.ceil() - v))
            })
            .filter(|&(_, frac)| frac > options.integrality_tol)
            .fold(None, |best: Option<(usize, f64)>, (j, f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((j, f)),
            });
        let Some((j, _)) = branch else {
            // integral: candidate incumbent
            let obj = objective_value(model, &node.values);
            if incumbent.as_ref().is_none_or(|(inc, _)| obj < *inc) {
                incumbent = Some((obj, node.values));
            }
            continue;
        };

        if options.node_limit.is_some_and(|lim| nodes >= lim)
            || options.time_limit.is_some_and(|lim| start.elapsed() >= lim)
        {
            hit_limit = true;
            heap.push(node);
            break;
        }

        for value in [0.0, 1.0] {
            let mut fixings = node.fixings.clone();
            fixings.push((j, value, value));
            let out = solve_node(&fixings, &mut iterations);
            nodes += 1;
            match out.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                // a relaxation of a bounded root cannot be unbounded; treat as trouble
                LpStatus::Unbounded | LpStatus::IterationLimit | LpStatus::NumericalFailure => {
                    trouble = true;
                    continue;
                }
            }
            let bound = objective_value(model, &out.x);
            if let Some((inc, _)) = &incumbent {
                if bound >= prune_threshold(*inc, options.mip_gap) {
                    continue;
                }
            }
            heap.push(Node {
                id: next_id,
                bound,
                fixings,
                values: out.x,
            });
            next_id += 1;
        }
    }

    let best_bound = heap
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    debug!("branch-and-bound: {nodes} nodes, {iterations} simplex iterations");

    let status = match (&incumbent, hit_limit) {
        (Some(_), true) => Status::LimitFeasible,
        (None, true) => Status::LimitNoSolution,
        (Some(_), false) if trouble => Status::NumericalFailure,
        (Some(_), false) => Status::Optimal,
        (None, false) if trouble => Status::NumericalFailure,
        (None, false) => Status::Infeasible,
    };
    let bound = match &incumbent {
        Some((inc, _)) => best_bound.min(*inc),
        None => best_bound,
    };
    let polished = incumbent.map(|(obj, values)| polish(model, &data, options, obj, values));
    finish(status, polished, bound, nodes, iterations, model)
}

/// Re-solves the LP with binaries fixed at their rounded values so the
/// returned point has exactly integral binaries. Falls back to the raw node
/// solution if that LP misbehaves.
fn polish(
    model: &MilpModel,
    data: &LpData,
    options: &SolveOptions,
    obj: f64,
    values: Vec<f64>,
) -> (f64, Vec<f64>) {
    let fixings: Vec<(usize, f64, f64)> = model
        .binaries()
        .map(|v| {
            let r = values[v.0].round();
            (v.0, r, r)
        })
        .collect();
    let s = lp_with_data(model, data, &fixings, options);
    if s.status == Status::Optimal && s.objective <= obj + options.mip_gap * obj.abs().max(1.0) {
        (s.objective, s.values)
    } else {
        (obj, values)
    }
}

fn finish(
    status: Status,
    incumbent: Option<(f64, Vec<f64>)>,
    bound: f64,
    nodes: usize,
    iterations: usize,
    model: &MilpModel,
) -> Solution {
    let (objective, values) = match incumbent {
        Some((obj, values)) => (obj, values),
        None => {
            let obj = if status == Status::Unbounded {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            (obj, vec![0.0; model.num_vars()])
        }
    };
    Solution {
        status,
        values,
        objective,
        duals: None,
        bound,
        nodes,
        iterations,
    }
}
