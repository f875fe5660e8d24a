//! The comparison strategies behind one adaptation interface.
//!
//! * `datesso` — debt-aware two-level reasoning, local triggers only.
//! * `tlhca` — both constraint levels hard: triggers on local or global
//!   violations, and when the searched plan still violates a global bound it
//!   reruns with every abstract service replaceable.
//! * `doa` — the same pipeline without the debt term in the score.
//! * `rbc` — region-based composition: candidates clustered on historical
//!   utilization/latency, best-ranked feasible member of the most favorable
//!   region, global triggers only, no forecasting.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{self, is_feasible, observe_global};
use crate::debt::CostBounds;
use crate::model::{ComponentService, CompositionPlan, ServiceRepository, SlaConstraints};
use crate::reasoner::{self, round_workload, AdaptationDecision, ScoreMode};
use crate::Scalar;

const REGION_COUNT: usize = 3;
const REGION_SEED: u64 = 0x5eed;
const KMEANS_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Datesso,
    Tlhca,
    Doa,
    Rbc,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [StrategyKind::Datesso, StrategyKind::Tlhca, StrategyKind::Doa, StrategyKind::Rbc];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Datesso => "datesso",
            StrategyKind::Tlhca => "tlhca",
            StrategyKind::Doa => "doa",
            StrategyKind::Rbc => "rbc",
        }
    }

    pub fn build<S: Scalar>(self) -> Box<dyn AdaptationStrategy<S>> {
        match self {
            StrategyKind::Datesso => Box::new(Datesso),
            StrategyKind::Tlhca => Box::new(Tlhca),
            StrategyKind::Doa => Box::new(Doa),
            StrategyKind::Rbc => Box::new(Rbc),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "datesso" => Ok(StrategyKind::Datesso),
            "tlhca" => Ok(StrategyKind::Tlhca),
            "doa" => Ok(StrategyKind::Doa),
            "rbc" => Ok(StrategyKind::Rbc),
            other => Err(format!("unknown strategy `{other}` (expected datesso, tlhca, doa, or rbc)")),
        }
    }
}

/// Running mean utilization and normalized latency per candidate, fed by the
/// simulator as components serve realized workload.
#[derive(Debug, Clone)]
pub struct QosHistory<S> {
    records: Vec<Vec<(S, S, usize)>>,
}

impl<S: Scalar> QosHistory<S> {
    pub fn new(repo: &ServiceRepository<S>) -> Self {
        QosHistory {
            records: (0..repo.abstract_count())
                .map(|x| vec![(S::zero(), S::zero(), 0); repo.candidates(x).len()])
                .collect(),
        }
    }

    pub fn observe(&mut self, abstract_index: usize, candidate: usize, utilization: S, latency_norm: S) {
        let slot = &mut self.records[abstract_index][candidate];
        slot.0 += utilization;
        slot.1 += latency_norm;
        slot.2 += 1;
    }

    /// Mean (utilization, latency_norm) when the candidate has any history.
    pub fn mean(&self, abstract_index: usize, candidate: usize) -> Option<(S, S)> {
        let (u, l, n) = self.records[abstract_index][candidate];
        (n > 0).then(|| {
            let count = S::from_count(n);
            (u / count, l / count)
        })
    }
}

/// Everything a strategy may consult when deciding.
pub struct DecisionContext<'a, S: Scalar> {
    pub timestep: usize,
    pub plan: &'a CompositionPlan,
    pub repo: &'a ServiceRepository<S>,
    /// Realized workload of the current timestep.
    pub workloads: &'a [u32],
    /// Predicted workloads per abstract service for the next `horizon`
    /// timesteps; empty for strategies that do not forecast.
    pub forecasts: &'a [Vec<S>],
    pub sla: &'a SlaConstraints<S>,
    pub cost_bounds: &'a CostBounds<S>,
    pub horizon: usize,
    pub history: &'a QosHistory<S>,
}

/// The uniform interface the simulator drives every strategy through.
pub trait AdaptationStrategy<S: Scalar> {
    fn kind(&self) -> StrategyKind;

    /// Per-strategy trigger rule, evaluated each timestep.
    fn triggers_on(&self, local_violation: bool, global_violation: bool) -> bool;

    fn needs_forecast(&self) -> bool {
        true
    }

    fn decide(&mut self, ctx: &DecisionContext<'_, S>) -> AdaptationDecision<S>;
}

pub struct Datesso;

impl<S: Scalar> AdaptationStrategy<S> for Datesso {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Datesso
    }

    fn triggers_on(&self, local_violation: bool, _global_violation: bool) -> bool {
        local_violation
    }

    fn decide(&mut self, ctx: &DecisionContext<'_, S>) -> AdaptationDecision<S> {
        reasoner::reason(
            ctx.plan,
            ctx.repo,
            ctx.workloads,
            ctx.forecasts,
            ctx.sla,
            ctx.cost_bounds,
            ctx.timestep,
            ctx.horizon,
        )
    }
}

pub struct Doa;

impl<S: Scalar> AdaptationStrategy<S> for Doa {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Doa
    }

    fn triggers_on(&self, local_violation: bool, _global_violation: bool) -> bool {
        local_violation
    }

    fn decide(&mut self, ctx: &DecisionContext<'_, S>) -> AdaptationDecision<S> {
        let infeasible = reasoner::identify_infeasible(ctx.plan, ctx.repo, ctx.workloads, ctx.sla);
        reasoner::search_over(
            &infeasible,
            ctx.plan,
            ctx.repo,
            ctx.workloads,
            ctx.forecasts,
            ctx.sla,
            ctx.cost_bounds,
            ctx.timestep,
            ctx.horizon,
            ScoreMode::DebtFree,
        )
    }
}

pub struct Tlhca;

impl Tlhca {
    /// Whether `plan` breaks a global bound at any forecast step within
    /// `depth`.
    fn violates_global<S: Scalar>(
        plan: &CompositionPlan,
        repo: &ServiceRepository<S>,
        forecasts: &[Vec<S>],
        sla: &SlaConstraints<S>,
        depth: usize,
    ) -> bool {
        (0..depth).any(|k| {
            let row: Vec<u32> = forecasts.iter().map(|f| round_workload(f[k])).collect();
            let obs = observe_global(plan, repo, &row, sla);
            obs.latency_violated || obs.utilization_violated
        })
    }
}

impl<S: Scalar> AdaptationStrategy<S> for Tlhca {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Tlhca
    }

    fn triggers_on(&self, local_violation: bool, global_violation: bool) -> bool {
        local_violation || global_violation
    }

    fn decide(&mut self, ctx: &DecisionContext<'_, S>) -> AdaptationDecision<S> {
        let infeasible = reasoner::identify_infeasible(ctx.plan, ctx.repo, ctx.workloads, ctx.sla);
        let first = reasoner::search_over(
            &infeasible,
            ctx.plan,
            ctx.repo,
            ctx.workloads,
            ctx.forecasts,
            ctx.sla,
            ctx.cost_bounds,
            ctx.timestep,
            ctx.horizon,
            ScoreMode::DebtAware,
        );

        let check_depth = if first.horizon_used > 0 { first.horizon_used } else { ctx.horizon };
        if !Self::violates_global(&first.new_plan, ctx.repo, ctx.forecasts, ctx.sla, check_depth) {
            return first;
        }

        // Global bounds are hard here: rerun with every service replaceable.
        let everything: BTreeSet<usize> = (0..ctx.repo.abstract_count()).collect();
        let mut second = reasoner::search_over(
            &everything,
            ctx.plan,
            ctx.repo,
            ctx.workloads,
            ctx.forecasts,
            ctx.sla,
            ctx.cost_bounds,
            ctx.timestep,
            ctx.horizon,
            ScoreMode::DebtAware,
        );
        second.evaluation_count += first.evaluation_count;
        if Self::violates_global(&second.new_plan, ctx.repo, ctx.forecasts, ctx.sla, second.horizon_used.max(1)) {
            // Nothing satisfies the global bounds; keep the best plan found
            // and leave the violation to retrigger.
            second.global_violation = true;
        }
        second
    }
}

/// One cluster of candidates with similar history.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<S> {
    /// (mean historical utilization, mean historical normalized latency).
    pub centroid: (S, S),
    /// Candidate indices, repository order.
    pub members: Vec<usize>,
}

/// K-means over per-candidate (utilization, latency) history points with a
/// fixed seed. Empty clusters are dropped; regions come back ordered by
/// centroid utilization, highest first.
pub fn cluster_regions<S: Scalar>(points: &[(S, S)], k: usize) -> Vec<Region<S>> {
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.max(1).min(points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(REGION_SEED);

    // k-means++ seeding.
    let mut centroids: Vec<(S, S)> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    while centroids.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| {
                centroids
                    .iter()
                    .map(|c| distance2(*p, *c).to_f64().unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut draw = rng.gen_range(0.0..total);
            let mut chosen = points.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if draw < *w {
                    chosen = i;
                    break;
                }
                draw -= w;
            }
            chosen
        } else {
            // All remaining distances are zero (duplicate points).
            rng.gen_range(0..points.len())
        };
        centroids.push(points[next]);
    }

    let mut assignment = vec![0usize; points.len()];
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = distance2(*p, centroids[0]);
            for (ci, c) in centroids.iter().enumerate().skip(1) {
                let d = distance2(*p, *c);
                if d < best_d {
                    best_d = d;
                    best = ci;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        for (ci, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..points.len()).filter(|&i| assignment[i] == ci).collect();
            if members.is_empty() {
                continue;
            }
            let count = S::from_count(members.len());
            let mut u = S::zero();
            let mut l = S::zero();
            for &i in &members {
                u += points[i].0;
                l += points[i].1;
            }
            *centroid = (u / count, l / count);
        }
        if !changed {
            break;
        }
    }

    let mut regions: Vec<Region<S>> = (0..k)
        .filter_map(|ci| {
            let members: Vec<usize> = (0..points.len()).filter(|&i| assignment[i] == ci).collect();
            (!members.is_empty()).then(|| Region {
                centroid: centroids[ci],
                members,
            })
        })
        .collect();
    regions.sort_by(|a, b| b.centroid.0.partial_cmp(&a.centroid.0).expect("centroids are finite"));
    regions
}

pub struct Rbc;

impl Rbc {
    fn history_point<S: Scalar>(
        history: &QosHistory<S>,
        candidate: &ComponentService<S>,
        abstract_index: usize,
        index: usize,
        workload: u32,
        sla: &SlaConstraints<S>,
    ) -> (S, S) {
        history.mean(abstract_index, index).unwrap_or_else(|| {
            // Cold start: synthesize one observation from the candidate's
            // capacity at the current workload.
            let obs = constraints::observe_local(candidate, workload, sla);
            (obs.utilization, obs.latency_norm)
        })
    }
}

impl<S: Scalar> AdaptationStrategy<S> for Rbc {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Rbc
    }

    fn triggers_on(&self, _local_violation: bool, global_violation: bool) -> bool {
        global_violation
    }

    fn needs_forecast(&self) -> bool {
        false
    }

    fn decide(&mut self, ctx: &DecisionContext<'_, S>) -> AdaptationDecision<S> {
        let mut decision = AdaptationDecision::unchanged(ctx.plan, ctx.timestep);
        for x in 0..ctx.repo.abstract_count() {
            let candidates = ctx.repo.candidates(x);
            let w = ctx.workloads[x];
            let points: Vec<(S, S)> = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| Self::history_point(ctx.history, c, x, i, w, ctx.sla))
                .collect();
            decision.evaluation_count += candidates.len();
            let rank = |i: usize| points[i].0 - points[i].1;

            let regions = cluster_regions(&points, REGION_COUNT);
            let mut pick = None;
            for region in &regions {
                let best = region
                    .members
                    .iter()
                    .copied()
                    .filter(|&i| is_feasible(&candidates[i], w, ctx.sla))
                    .fold(None::<usize>, |acc, i| match acc {
                        Some(current) if rank(i) <= rank(current) => Some(current),
                        _ => Some(i),
                    });
                if best.is_some() {
                    pick = best;
                    break;
                }
            }
            // No region has a feasible member: least-violating candidate.
            let pick = pick.unwrap_or_else(|| {
                (0..candidates.len())
                    .min_by(|&a, &b| {
                        let va = violation_at(&candidates[a], w, ctx.sla);
                        let vb = violation_at(&candidates[b], w, ctx.sla);
                        va.partial_cmp(&vb).expect("violation magnitudes are finite")
                    })
                    .expect("candidate lists are non-empty")
            });

            decision.per_service_scores.insert(x, rank(pick));
            if pick != ctx.plan.selected_index(x) {
                decision.replaced.insert(x);
                decision.new_plan.set(x, pick);
            }
        }
        decision
    }
}

fn distance2<S: Scalar>(a: (S, S), b: (S, S)) -> S {
    let du = a.0 - b.0;
    let dl = a.1 - b.1;
    du * du + dl * dl
}

fn violation_at<S: Scalar>(candidate: &ComponentService<S>, workload: u32, sla: &SlaConstraints<S>) -> S {
    let x = candidate.abstract_index;
    let latency_excess =
        (constraints::local_latency(candidate, workload) / sla.local_latency_cap(x) - S::one()).max(S::zero());
    let shortfall =
        (sla.local_utilization_floor(x) - constraints::local_utilization(candidate, workload, sla)).max(S::zero());
    latency_excess + shortfall
}
