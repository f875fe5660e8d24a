//! Debt-aware two-level constraint reasoning.
//!
//! Adaptation runs in two phases. Identification returns the abstract
//! services whose selected component violates a hard local constraint at the
//! current timestep. Search then works on each identified service
//! independently: build a feasibility matrix over the forecast window, shrink
//! the window so every service keeps at least one viable candidate, and pick
//! the candidate with the best debt-aware utility. Per-service decomposition
//! is sound because the composition objective is a plain sum of per-service
//! scores; the search never caps on a global bound, global pressure enters
//! only through the interest terms of the score.

use std::collections::{BTreeMap, BTreeSet};

use crate::constraints::{self, is_feasible};
use crate::debt::{self, CostBounds};
use crate::model::{ComponentService, CompositionPlan, ServiceRepository, SlaConstraints};
use crate::{Error, Result, Scalar};

/// Round a non-negative forecast value half-up to an integer workload.
pub fn round_workload<S: Scalar>(value: S) -> u32 {
    let v = value.max(S::zero()) + S::from_f64_lossy(0.5);
    v.floor().to_u32().unwrap_or(u32::MAX)
}

/// Whether the candidate score keeps the debt term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    DebtAware,
    DebtFree,
}

/// Utilization and normalized latency of one candidate at one workload.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CandidateObservation<S> {
    utilization: S,
    latency_norm: S,
    feasible: bool,
}

/// Feasibility of every candidate of one abstract service across the
/// forecast window, with the per-step observations cached for scoring.
#[derive(Debug, Clone)]
pub struct FeasibilityRow<S> {
    pub abstract_index: usize,
    /// `steps[k]` lists the candidate indices feasible at forecast step
    /// `n + 1 + k`.
    pub steps: Vec<Vec<usize>>,
    /// Candidate feasibility at the realized workload of the current
    /// timestep; selections must hold at decision time, not just in the
    /// forecast.
    pub feasible_now: Vec<bool>,
    /// Rounded workloads the row was built against.
    pub workloads: Vec<u32>,
    observations: Vec<Vec<CandidateObservation<S>>>,
    /// Candidate-at-forecast-step feasibility evaluations performed.
    pub evaluation_count: usize,
}

impl<S: Scalar> FeasibilityRow<S> {
    /// Candidates feasible now and at every forecast step up to `depth`.
    pub fn survivors(&self, depth: usize) -> Vec<usize> {
        (0..self.feasible_now.len())
            .filter(|&c| self.feasible_now[c] && (0..depth).all(|k| self.observations[c][k].feasible))
            .collect()
    }

    /// Largest number of forecast steps some candidate survives from the
    /// start of the window, also requiring feasibility at the current
    /// timestep. `None` when no candidate survives even the first step.
    pub fn largest_feasible_depth(&self) -> Option<usize> {
        let best = (0..self.feasible_now.len())
            .filter(|&c| self.feasible_now[c])
            .map(|c| self.observations[c].iter().take_while(|o| o.feasible).count())
            .max()
            .unwrap_or(0);
        (best > 0).then_some(best)
    }
}

/// Per problematic abstract service, the candidate feasibility vectors over
/// the forecast window.
#[derive(Debug, Clone)]
pub struct FeasibilityMatrix<S> {
    pub rows: BTreeMap<usize, FeasibilityRow<S>>,
}

/// The outcome of one reasoning pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationDecision<S> {
    /// Timestep the decision was made at.
    pub timestep: usize,
    /// Abstract services that were searched for a replacement.
    pub replaced: BTreeSet<usize>,
    pub new_plan: CompositionPlan,
    /// Forecast steps actually scored after the window shrink.
    pub horizon_used: usize,
    /// Chosen candidate's utility score per searched service.
    pub per_service_scores: BTreeMap<usize, S>,
    /// Candidate-at-forecast-step evaluations performed by the search.
    pub evaluation_count: usize,
    /// Some service had no feasible candidate and fell back to the least
    /// violating one.
    pub degraded: bool,
    /// Set by strategies that verify global bounds when even the best plan
    /// still violates one.
    pub global_violation: bool,
}

impl<S: Scalar> AdaptationDecision<S> {
    pub(crate) fn unchanged(plan: &CompositionPlan, timestep: usize) -> Self {
        AdaptationDecision {
            timestep,
            replaced: BTreeSet::new(),
            new_plan: plan.clone(),
            horizon_used: 0,
            per_service_scores: BTreeMap::new(),
            evaluation_count: 0,
            degraded: false,
            global_violation: false,
        }
    }
}

/// Abstract services whose selected component violates a hard local
/// constraint at the current workloads.
pub fn identify_infeasible<S: Scalar>(
    plan: &CompositionPlan,
    repo: &ServiceRepository<S>,
    workloads: &[u32],
    sla: &SlaConstraints<S>,
) -> BTreeSet<usize> {
    (0..repo.abstract_count())
        .filter(|&x| !is_feasible(plan.selected(repo, x), workloads[x], sla))
        .collect()
}

/// Evaluate every candidate of abstract service `x` at the realized workload
/// and at each forecast workload of the window.
pub fn build_feasibility_row<S: Scalar>(
    x: usize,
    candidates: &[ComponentService<S>],
    workload_now: u32,
    forecast: &[S],
    sla: &SlaConstraints<S>,
) -> FeasibilityRow<S> {
    let workloads: Vec<u32> = forecast.iter().map(|&v| round_workload(v)).collect();
    let feasible_now: Vec<bool> = candidates.iter().map(|c| is_feasible(c, workload_now, sla)).collect();

    let mut steps = vec![Vec::new(); workloads.len()];
    let mut observations = Vec::with_capacity(candidates.len());
    let mut evaluation_count = 0;
    for (ci, candidate) in candidates.iter().enumerate() {
        let mut per_step = Vec::with_capacity(workloads.len());
        for (k, &w) in workloads.iter().enumerate() {
            let obs = constraints::observe_local(candidate, w, sla);
            evaluation_count += 1;
            if obs.feasible {
                steps[k].push(ci);
            }
            per_step.push(CandidateObservation {
                utilization: obs.utilization,
                latency_norm: obs.latency_norm,
                feasible: obs.feasible,
            });
        }
        observations.push(per_step);
    }

    FeasibilityRow {
        abstract_index: x,
        steps,
        feasible_now,
        workloads,
        observations,
        evaluation_count,
    }
}

/// Best candidate among `survivors` by debt-aware utility over the first
/// `depth` forecast steps; ties fall to repository order. The principal is
/// charged only when the candidate differs from the incumbent.
#[allow(clippy::too_many_arguments)]
pub fn search_utility<S: Scalar>(
    row: &FeasibilityRow<S>,
    survivors: &[usize],
    depth: usize,
    incumbent: usize,
    candidates: &[ComponentService<S>],
    sla: &SlaConstraints<S>,
    cost_bounds: &CostBounds<S>,
    mode: ScoreMode,
) -> Result<(usize, S)> {
    if survivors.is_empty() {
        return Err(Error::invalid("survivor set", "no candidate survives the considered window"));
    }
    let mut best: Option<(usize, S)> = None;
    for &c in survivors {
        let score = candidate_score(row, c, depth, incumbent, candidates, sla, cost_bounds, mode);
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((c, score)),
        }
    }
    Ok(best.unwrap())
}

#[allow(clippy::too_many_arguments)]
fn candidate_score<S: Scalar>(
    row: &FeasibilityRow<S>,
    candidate: usize,
    depth: usize,
    incumbent: usize,
    candidates: &[ComponentService<S>],
    sla: &SlaConstraints<S>,
    cost_bounds: &CostBounds<S>,
    mode: ScoreMode,
) -> S {
    let obs = &row.observations[candidate][..depth];
    let utilizations: Vec<S> = obs.iter().map(|o| o.utilization).collect();
    let latencies: Vec<S> = obs.iter().map(|o| o.latency_norm).collect();
    let debt_value = match mode {
        ScoreMode::DebtFree => S::zero(),
        ScoreMode::DebtAware => {
            let principal = if candidate == incumbent {
                S::zero()
            } else {
                debt::principal(&candidates[candidate], sla, cost_bounds)
            };
            let (alpha, beta) =
                debt::interest(&utilizations, &latencies, sla).expect("series built with identical length");
            principal + alpha + beta
        }
    };
    debt::utility_score(&utilizations, &latencies, debt_value)
}

/// How far a candidate misses its hard local constraints at `workload`, on a
/// dimensionless scale; 0 when feasible.
fn violation_magnitude<S: Scalar>(candidate: &ComponentService<S>, workload: u32, sla: &SlaConstraints<S>) -> S {
    let x = candidate.abstract_index;
    let cap = sla.local_latency_cap(x);
    let latency_excess = (constraints::local_latency(candidate, workload) / cap - S::one()).max(S::zero());
    let shortfall =
        (sla.local_utilization_floor(x) - constraints::local_utilization(candidate, workload, sla)).max(S::zero());
    latency_excess + shortfall
}

/// One reasoning pass over the services in `replaceable`.
///
/// This is the shared search used by the debt-aware strategy and by the
/// baselines that vary only the trigger, the replaceable set, or the score.
#[allow(clippy::too_many_arguments)]
pub fn search_over<S: Scalar>(
    replaceable: &BTreeSet<usize>,
    plan: &CompositionPlan,
    repo: &ServiceRepository<S>,
    workloads: &[u32],
    forecasts: &[Vec<S>],
    sla: &SlaConstraints<S>,
    cost_bounds: &CostBounds<S>,
    timestep: usize,
    horizon: usize,
    mode: ScoreMode,
) -> AdaptationDecision<S> {
    assert!(horizon >= 1, "need at least one forecast step");
    if replaceable.is_empty() {
        return AdaptationDecision::unchanged(plan, timestep);
    }

    let mut evaluation_count = 0;
    let mut rows: BTreeMap<usize, FeasibilityRow<S>> = BTreeMap::new();
    for &x in replaceable {
        assert!(forecasts[x].len() >= horizon, "forecast for service {x} shorter than the horizon");
        let row = build_feasibility_row(x, repo.candidates(x), workloads[x], &forecasts[x][..horizon], sla);
        evaluation_count += row.evaluation_count;
        rows.insert(x, row);
    }

    // Shrink the window to the largest depth every service can sustain; a
    // service with no viable candidate at all forces the minimum window and
    // a fallback pick.
    let mut depth = horizon;
    let mut degraded = false;
    for row in rows.values() {
        match row.largest_feasible_depth() {
            Some(d) => depth = depth.min(d),
            None => {
                depth = 1;
                degraded = true;
            }
        }
    }

    let mut new_plan = plan.clone();
    let mut per_service_scores = BTreeMap::new();
    for (&x, row) in &rows {
        let incumbent = plan.selected_index(x);
        let candidates = repo.candidates(x);
        let survivors = row.survivors(depth);
        let choice = if survivors.is_empty() {
            // Least-violating candidate at decision time and at the first
            // forecast step, repository order breaking ties.
            let c = (0..candidates.len())
                .min_by(|&a, &b| {
                    let va = violation_magnitude(&candidates[a], workloads[x], sla)
                        + violation_magnitude(&candidates[a], row.workloads[0], sla);
                    let vb = violation_magnitude(&candidates[b], workloads[x], sla)
                        + violation_magnitude(&candidates[b], row.workloads[0], sla);
                    va.partial_cmp(&vb).expect("violation magnitudes are finite")
                })
                .expect("candidate lists are non-empty");
            let score = candidate_score(row, c, depth, incumbent, candidates, sla, cost_bounds, mode);
            (c, score)
        } else {
            search_utility(row, &survivors, depth, incumbent, candidates, sla, cost_bounds, mode)
                .expect("survivor set checked non-empty")
        };
        new_plan.set(x, choice.0);
        per_service_scores.insert(x, choice.1);
    }

    AdaptationDecision {
        timestep,
        replaced: replaceable.clone(),
        new_plan,
        horizon_used: depth,
        per_service_scores,
        evaluation_count,
        degraded,
        global_violation: false,
    }
}

/// Full debt-aware reasoning pass: identify the locally infeasible services,
/// then search replacements for exactly those.
#[allow(clippy::too_many_arguments)]
pub fn reason<S: Scalar>(
    plan: &CompositionPlan,
    repo: &ServiceRepository<S>,
    workloads: &[u32],
    forecasts: &[Vec<S>],
    sla: &SlaConstraints<S>,
    cost_bounds: &CostBounds<S>,
    timestep: usize,
    horizon: usize,
) -> AdaptationDecision<S> {
    let infeasible = identify_infeasible(plan, repo, workloads, sla);
    search_over(
        &infeasible,
        plan,
        repo,
        workloads,
        forecasts,
        sla,
        cost_bounds,
        timestep,
        horizon,
        ScoreMode::DebtAware,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ServiceId;

    /// A candidate sized so its feasible band under the default local bounds
    /// (cap 0.09 s, floor 0.8) is `[0.8 * sweet_spot, sweet_spot]`.
    fn banded(id: &str, x: usize, sweet_spot: u32, overhead: f64) -> ComponentService<f64> {
        let per_request = 0.09 / sweet_spot as f64;
        ComponentService::new(ServiceId::new(id), x, 100, per_request * 100.0, overhead).unwrap()
    }

    fn sla(n: usize) -> SlaConstraints<f64> {
        SlaConstraints::uniform(n, 0.09, 0.8, 1.0, 0.9, 0.0025).unwrap()
    }

    fn bounds() -> CostBounds<f64> {
        CostBounds::new(0.0, 0.05).unwrap()
    }

    #[test]
    fn identify_empty_when_all_feasible() {
        let repo =
            ServiceRepository::new(vec![vec![banded("a", 0, 100, 1.0)], vec![banded("b", 1, 100, 1.0)]]).unwrap();
        let plan = CompositionPlan::initial(&repo);
        assert!(identify_infeasible(&plan, &repo, &[90, 95], &sla(2)).is_empty());
    }

    #[test]
    fn identify_all_on_zero_workload() {
        let repo =
            ServiceRepository::new(vec![vec![banded("a", 0, 100, 1.0)], vec![banded("b", 1, 100, 1.0)]]).unwrap();
        let plan = CompositionPlan::initial(&repo);
        let out = identify_infeasible(&plan, &repo, &[0, 0], &sla(2));
        assert_eq!(out, BTreeSet::from([0, 1]));
    }

    #[test]
    fn identify_singles_out_the_overloaded_service() {
        let repo =
            ServiceRepository::new(vec![vec![banded("a", 0, 100, 1.0)], vec![banded("b", 1, 100, 1.0)]]).unwrap();
        let plan = CompositionPlan::initial(&repo);
        let out = identify_infeasible(&plan, &repo, &[150, 90], &sla(2));
        assert_eq!(out, BTreeSet::from([0]));
    }

    #[test]
    fn feasibility_row_matches_hand_enumeration() {
        // Candidate bands: a covers [80, 100], b covers [40, 50].
        let candidates = vec![banded("a", 0, 100, 1.0), banded("b", 0, 50, 1.0)];
        let row = build_feasibility_row(0, &candidates, 90, &[90.0, 45.0, 120.0], &sla(1));
        assert_eq!(row.steps, vec![vec![0], vec![1], vec![]]);
        assert_eq!(row.feasible_now, vec![true, false]);
        assert_eq!(row.evaluation_count, 6);
    }

    #[test]
    fn empty_forecast_step_when_workload_is_zero() {
        let candidates = vec![banded("a", 0, 100, 1.0), banded("b", 0, 50, 1.0)];
        let row = build_feasibility_row(0, &candidates, 90, &[0.0], &sla(1));
        assert!(row.steps[0].is_empty());
    }

    #[test]
    fn largest_depth_full_and_partial() {
        let candidates = vec![banded("a", 0, 100, 1.0), banded("b", 0, 10, 1.0)];
        let full = build_feasibility_row(0, &candidates, 90, &[90.0; 5], &sla(1));
        assert_eq!(full.largest_feasible_depth(), Some(5));

        // a holds for the first three steps only; b never does.
        let partial = build_feasibility_row(0, &candidates, 90, &[90.0, 85.0, 95.0, 120.0, 130.0], &sla(1));
        assert_eq!(partial.largest_feasible_depth(), Some(3));

        let none = build_feasibility_row(0, &candidates, 90, &[130.0, 130.0], &sla(1));
        assert_eq!(none.largest_feasible_depth(), None);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_workload(2.4), 2);
        assert_eq!(round_workload(2.5), 3);
        assert_eq!(round_workload(-1.0), 0);
    }

    #[test]
    fn search_utility_single_and_dominant() {
        let candidates = vec![banded("a", 0, 100, 1.0), banded("b", 0, 101, 1.0)];
        let row = build_feasibility_row(0, &candidates, 90, &[90.0, 88.0], &sla(1));
        let (only, _) =
            search_utility(&row, &[1], 2, 0, &candidates, &sla(1), &bounds(), ScoreMode::DebtAware).unwrap();
        assert_eq!(only, 1);

        // At workload 90 candidate a runs closer to its sweet spot, so it
        // dominates pointwise with equal principal.
        let (winner, _) =
            search_utility(&row, &[0, 1], 2, 9, &candidates, &sla(1), &bounds(), ScoreMode::DebtAware).unwrap();
        assert_eq!(winner, 0);

        assert!(search_utility(&row, &[], 2, 0, &candidates, &sla(1), &bounds(), ScoreMode::DebtAware).is_err());
    }

    #[test]
    fn search_utility_matches_brute_force_ranking() {
        let sla = sla(1);
        let cb = bounds();
        let candidates = vec![banded("a", 0, 100, 8.0), banded("b", 0, 105, 2.0), banded("c", 0, 95, 5.0)];
        let forecast = [92.0, 88.0];
        let row = build_feasibility_row(0, &candidates, 90, &forecast, &sla);
        let survivors = row.survivors(2);
        assert_eq!(survivors.len(), 3);

        // Independent ranking through the debt operations directly.
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for &c in &survivors {
            let svc = &candidates[c];
            let us: Vec<f64> = forecast
                .iter()
                .map(|&w| crate::constraints::local_utilization(svc, w as u32, &sla))
                .collect();
            let ls: Vec<f64> = forecast
                .iter()
                .map(|&w| crate::constraints::normalized_latency(crate::constraints::local_latency(svc, w as u32), 0.09))
                .collect();
            let record = crate::debt::debt(svc, &us, &ls, (1, 2), &sla, &cb).unwrap();
            let s = crate::debt::utility_score(&us, &ls, record.debt());
            if s > best.1 {
                best = (c, s);
            }
        }

        let (winner, score) =
            search_utility(&row, &survivors, 2, 9, &candidates, &sla, &cb, ScoreMode::DebtAware).unwrap();
        assert_eq!(winner, best.0);
        assert!((score - best.1).abs() < 1e-12);
    }

    #[test]
    fn reason_shrinks_to_the_tightest_service() {
        let sla = sla(2);
        let cb = bounds();
        // Both incumbents are overloaded; service 0's replacement survives
        // two forecast steps, service 1's all five.
        let repo = ServiceRepository::new(vec![
            vec![banded("dead0", 0, 10, 1.0), banded("tight", 0, 100, 1.0)],
            vec![banded("dead1", 1, 10, 1.0), banded("wide", 1, 100, 1.0)],
        ])
        .unwrap();
        let plan = CompositionPlan::initial(&repo);

        let forecasts = vec![vec![90.0, 95.0, 130.0, 130.0, 130.0], vec![90.0; 5]];
        let decision = reason(&plan, &repo, &[90, 90], &forecasts, &sla, &cb, 7, 5);
        assert_eq!(decision.replaced, BTreeSet::from([0, 1]));
        assert_eq!(decision.horizon_used, 2, "the two-step service caps the window");
        assert!(!decision.degraded);
        assert_eq!(decision.new_plan.selected_index(0), 1);
        assert_eq!(decision.new_plan.selected_index(1), 1);
        assert!(decision.evaluation_count <= 2 * 2 * 5);
    }

    #[test]
    fn reason_matches_exhaustive_enumeration() {
        let sla = sla(3);
        let cb = bounds();
        // Every incumbent is a dead candidate, so all three services are
        // searched and the three live alternatives compete.
        let mut groups = Vec::new();
        for x in 0..3 {
            groups.push(vec![
                banded(&format!("{x}dead"), x, 10, 1.0),
                banded(&format!("{x}a"), x, 100, 7.0),
                banded(&format!("{x}b"), x, 96, 3.0),
                banded(&format!("{x}c"), x, 104, 5.0),
            ]);
        }
        let repo = ServiceRepository::new(groups).unwrap();
        let plan = CompositionPlan::initial(&repo);
        let forecasts = vec![vec![90.0, 93.0, 87.0]; 3];
        let w_now = [90u32, 90, 90];

        let decision = reason(&plan, &repo, &w_now, &forecasts, &sla, &cb, 0, 3);
        assert_eq!(decision.replaced.len(), 3);
        assert!(!decision.degraded);
        let decomposed: f64 = decision.per_service_scores.values().sum();

        // Brute force over every survivor-feasible full assignment.
        let rows: Vec<FeasibilityRow<f64>> = (0..3)
            .map(|x| build_feasibility_row(x, repo.candidates(x), w_now[x], &forecasts[x], &sla))
            .collect();
        let depth = decision.horizon_used;
        let survivor_sets: Vec<Vec<usize>> = rows.iter().map(|r| r.survivors(depth)).collect();
        let mut best = f64::NEG_INFINITY;
        for &a in &survivor_sets[0] {
            for &b in &survivor_sets[1] {
                for &c in &survivor_sets[2] {
                    let total: f64 = [(0, a), (1, b), (2, c)]
                        .iter()
                        .map(|&(x, ci)| {
                            candidate_score(
                                &rows[x],
                                ci,
                                depth,
                                plan.selected_index(x),
                                repo.candidates(x),
                                &sla,
                                &cb,
                                ScoreMode::DebtAware,
                            )
                        })
                        .sum();
                    best = best.max(total);
                }
            }
        }
        assert!((decomposed - best).abs() < 1e-9, "decomposed {decomposed} vs enumerated {best}");
    }

    #[test]
    fn fallback_picks_least_violating_candidate() {
        let sla = sla(1);
        let cb = bounds();
        let repo =
            ServiceRepository::new(vec![vec![banded("far", 0, 10, 1.0), banded("near", 0, 60, 1.0)]]).unwrap();
        let plan = CompositionPlan::initial(&repo);
        // Forecast spikes far beyond every candidate's band.
        let decision = reason(&plan, &repo, &[90], &[vec![90.0; 3]], &sla, &cb, 0, 3);
        assert!(decision.degraded);
        assert_eq!(decision.horizon_used, 1);
        assert_eq!(decision.new_plan.selected_index(0), 1, "the wider candidate violates less");
    }

    #[test]
    fn no_infeasible_service_means_no_change() {
        let sla = sla(1);
        let cb = bounds();
        let repo = ServiceRepository::new(vec![vec![banded("a", 0, 100, 1.0)]]).unwrap();
        let plan = CompositionPlan::initial(&repo);
        let decision = reason(&plan, &repo, &[90], &[vec![90.0; 5]], &sla, &cb, 3, 5);
        assert!(decision.replaced.is_empty());
        assert_eq!(decision.new_plan, plan);
        assert_eq!(decision.evaluation_count, 0);
    }
}
