//! Discrete-time trace replay, adaptation triggering, metric collection, and
//! the comparative harness.
//!
//! A run trains the per-service forecasters on the first part of the trace
//! and replays the remainder timestep by timestep: observe the realized
//! workload, accrue interest for the selected components, evaluate both
//! constraint levels, let the strategy react per its trigger rule, and apply
//! decisions at the next timestep while charging the principal. Runs are
//! deterministic given the inputs; wall-clock reasoning times are collected
//! in memory but kept out of every file the harness writes.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::baselines::{DecisionContext, QosHistory, StrategyKind};
use crate::constraints::{observe_global, observe_local, GlobalObservation};
use crate::debt::{self, CostBounds, DebtLedger};
use crate::forecast::{self, ForecastModel};
use crate::model::{CompositionPlan, ServiceId, ServiceRepository, SlaConstraints, WorkloadTrace};
use crate::reasoner::AdaptationDecision;
use crate::{stats, Error, Result, Scalar};

/// Harness parameters. Defaults: a five-step lookahead, two thirds of the
/// trace for training, refits every 600 timesteps.
#[derive(Debug, Clone)]
pub struct SimConfig<S> {
    /// Forecast steps considered per decision.
    pub horizon_offset: usize,
    /// Leading fraction of the trace used to train the forecasters.
    pub train_fraction: f64,
    /// Refit cadence in timesteps; 0 disables refitting.
    pub refit_every: usize,
    /// Trailing history samples handed to the forecaster per prediction.
    pub history_window: usize,
    /// Order-search caps for the forecaster grid.
    pub p_max: usize,
    pub q_max: usize,
    /// Principal normalization bounds; derived from the repository when
    /// absent.
    pub cost_bounds: Option<CostBounds<S>>,
}

impl<S: Scalar> Default for SimConfig<S> {
    fn default() -> Self {
        SimConfig {
            horizon_offset: 5,
            train_fraction: 2.0 / 3.0,
            refit_every: 600,
            history_window: 512,
            p_max: 2,
            q_max: 1,
            cost_bounds: None,
        }
    }
}

/// Violations counted once per constraint kind per timestep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ViolationCounts {
    pub local_latency: u32,
    pub local_utilization: u32,
    pub global_latency: u32,
    pub global_utilization: u32,
}

impl ViolationCounts {
    pub fn local(&self) -> u32 {
        self.local_latency + self.local_utilization
    }

    pub fn global(&self) -> u32 {
        self.global_latency + self.global_utilization
    }

    pub fn total(&self) -> u32 {
        self.local() + self.global()
    }
}

/// One simulated timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<S> {
    pub timestep: usize,
    pub global: GlobalObservation<S>,
    /// Local constraint kinds violated this timestep (0..=2).
    pub local_violations: u32,
    /// Global constraint kinds violated this timestep (0..=2).
    pub global_violations: u32,
    /// A reasoning invocation happened this timestep.
    pub adapted: bool,
}

/// A component swap within one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionChange<S> {
    pub abstract_index: usize,
    pub old_id: ServiceId,
    pub new_id: ServiceId,
    pub score: S,
}

/// One reasoning invocation and what it decided.
#[derive(Debug, Clone)]
pub struct AdaptationEvent<S> {
    pub decision: AdaptationDecision<S>,
    pub changes: Vec<DecisionChange<S>>,
    /// Wall clock of the strategy's decision call; excluded from output
    /// files so runs stay reproducible byte for byte.
    pub reasoning_time: Duration,
}

/// Everything one strategy produced over one replay.
#[derive(Debug, Clone)]
pub struct SimulationResult<S> {
    pub strategy: StrategyKind,
    /// First simulated timestep (end of the training split).
    pub start: usize,
    pub steps: Vec<StepRecord<S>>,
    pub adaptations: Vec<AdaptationEvent<S>>,
    pub violations: ViolationCounts,
    pub ledger: DebtLedger<S>,
    /// Total utilization minus total normalized latency minus accumulated
    /// debt, over the whole replay.
    pub total_score: S,
    pub final_plan: CompositionPlan,
}

impl<S: Scalar> SimulationResult<S> {
    pub fn utilization_series(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.global.utilization.to_f64().unwrap()).collect()
    }

    pub fn latency_series(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.global.latency.to_f64().unwrap()).collect()
    }

    /// Accumulated debt per simulated timestep.
    pub fn debt_series(&self) -> Vec<S> {
        self.steps.iter().map(|s| self.ledger.accumulated_debt(s.timestep)).collect()
    }

    pub fn median_reasoning_time(&self) -> Option<Duration> {
        if self.adaptations.is_empty() {
            return None;
        }
        let mut times: Vec<Duration> = self.adaptations.iter().map(|a| a.reasoning_time).collect();
        times.sort();
        Some(times[times.len() / 2])
    }

    /// Write `timeseries.csv`, `ledger.csv`, and `decisions.csv` under `dir`.
    pub fn write_outputs(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;

        let mut timeseries = String::from("timestep,global_utilization,global_latency_s,local_violations,global_violations,adapted\n");
        for s in &self.steps {
            timeseries.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.timestep,
                s.global.utilization,
                s.global.latency,
                s.local_violations,
                s.global_violations,
                u8::from(s.adapted)
            ));
        }
        fs::write(dir.join("timeseries.csv"), timeseries)?;

        self.ledger.export_csv(dir.join("ledger.csv"))?;

        let mut decisions =
            String::from("timestep,abstract_index,old_id,new_id,score,horizon_used,fallback_flag,strategy\n");
        for event in &self.adaptations {
            for change in &event.changes {
                decisions.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    event.decision.timestep,
                    change.abstract_index,
                    change.old_id,
                    change.new_id,
                    change.score,
                    event.decision.horizon_used,
                    u8::from(event.decision.degraded),
                    self.strategy
                ));
            }
        }
        fs::write(dir.join("decisions.csv"), decisions)?;
        Ok(())
    }
}

/// Train one forecaster per abstract service. Degenerate or unstable
/// training data falls back to the mean-prediction model so replay can
/// proceed on any trace.
fn train_models<S: Scalar>(
    trace: &WorkloadTrace,
    split: usize,
    config: &SimConfig<S>,
) -> Vec<ForecastModel<S>> {
    (0..trace.services())
        .map(|x| {
            let series: Vec<S> = trace
                .column(x, 0..split)
                .into_iter()
                .map(|w| S::from_u32(w).unwrap())
                .collect();
            fit_or_fallback(&series, config.p_max, config.q_max)
        })
        .collect()
}

fn fit_or_fallback<S: Scalar>(series: &[S], p_max: usize, q_max: usize) -> ForecastModel<S> {
    let attempt = forecast::select_order(series, p_max, q_max)
        .and_then(|(p, q)| forecast::fit(series, p, q));
    attempt.unwrap_or_else(|_| {
        let mean = if series.is_empty() {
            S::zero()
        } else {
            series.iter().copied().sum::<S>() / S::from_count(series.len())
        };
        ForecastModel::from_coefficients(S::zero(), Vec::new(), Vec::new(), mean)
            .expect("the mean model is always valid")
    })
}

fn refit_models<S: Scalar>(models: &mut [ForecastModel<S>], trace: &WorkloadTrace, up_to: usize) {
    for (x, model) in models.iter_mut().enumerate() {
        let series: Vec<S> = trace
            .column(x, 0..up_to)
            .into_iter()
            .map(|w| S::from_u32(w).unwrap())
            .collect();
        let refit = forecast::fit(&series, model.p, model.q);
        if let Ok(m) = refit {
            *model = m;
        }
        // A failed refit keeps the previous model.
    }
}

/// Replay the test split of `trace` under one adaptation strategy.
pub fn run<S: Scalar>(
    kind: StrategyKind,
    repo: &ServiceRepository<S>,
    trace: &WorkloadTrace,
    sla: &SlaConstraints<S>,
    config: &SimConfig<S>,
) -> Result<SimulationResult<S>> {
    let n = repo.abstract_count();
    if trace.services() != n {
        return Err(Error::Config(format!(
            "trace covers {} abstract services, repository has {n}",
            trace.services()
        )));
    }
    if sla.service_count() != n {
        return Err(Error::Config(format!(
            "SLA covers {} abstract services, repository has {n}",
            sla.service_count()
        )));
    }
    if config.horizon_offset < 1 {
        return Err(Error::Config("horizon offset must be >= 1".into()));
    }
    let horizon = trace.horizon();
    let split = ((horizon as f64) * config.train_fraction).floor() as usize;
    if split < 1 || split >= horizon {
        return Err(Error::Config(format!(
            "training fraction {} leaves no test split on a {horizon}-step trace",
            config.train_fraction
        )));
    }

    let mut strategy = kind.build::<S>();
    let cost_bounds = match &config.cost_bounds {
        Some(b) => *b,
        // A repository with no actuation overhead anywhere normalizes every
        // principal to zero.
        None => CostBounds::from_repository(repo, sla).unwrap_or(CostBounds::new(S::zero(), S::one())?),
    };
    let mut models = if strategy.needs_forecast() {
        Some(train_models(trace, split, config))
    } else {
        None
    };

    let mut plan = CompositionPlan::initial(repo);
    let mut pending: Option<CompositionPlan> = None;
    let mut ledger = DebtLedger::new(split);
    let mut history = QosHistory::new(repo);
    let mut steps = Vec::with_capacity(horizon - split);
    let mut adaptations: Vec<AdaptationEvent<S>> = Vec::new();
    let mut violations = ViolationCounts::default();
    let mut utility_sum = S::zero();
    let cl_global_norm = sla.normalized_global_latency_bound();

    for t in split..horizon {
        if config.refit_every > 0 && t > split && (t - split) % config.refit_every == 0 {
            if let Some(models) = models.as_mut() {
                refit_models(models, trace, t);
            }
        }

        // A decision made at t-1 takes effect now; the principal is charged
        // on application.
        if let Some(next) = pending.take() {
            for x in 0..n {
                if next.selected_index(x) != plan.selected_index(x) {
                    let svc = next.selected(repo, x);
                    let principal = debt::principal(svc, sla, &cost_bounds);
                    ledger.record(t, &svc.id, principal, S::zero(), S::zero());
                }
            }
            plan = next;
        }

        let workloads = trace.row(t);
        let mut local_latency_violated = false;
        let mut local_utilization_violated = false;
        for x in 0..n {
            let svc = plan.selected(repo, x);
            let obs = observe_local(svc, workloads[x], sla);
            history.observe(x, plan.selected_index(x), obs.utilization, obs.latency_norm);
            utility_sum += obs.utilization - obs.latency_norm;

            if obs.latency_raw > sla.local_latency_cap(x) {
                local_latency_violated = true;
            }
            if obs.utilization < sla.local_utilization_floor(x) {
                local_utilization_violated = true;
            }

            // Interest accrues for the live selection from its potential
            // contribution to global violations.
            let mut alpha = S::zero();
            if sla.global_utilization >= obs.utilization {
                alpha = sla.global_utilization - obs.utilization;
            }
            let mut beta = S::zero();
            if obs.latency_norm >= cl_global_norm {
                beta = obs.latency_norm - cl_global_norm;
            }
            ledger.record(t, &svc.id, S::zero(), alpha, beta);
        }

        let global = observe_global(&plan, repo, workloads, sla);
        let mut local_count = 0;
        if local_latency_violated {
            violations.local_latency += 1;
            local_count += 1;
        }
        if local_utilization_violated {
            violations.local_utilization += 1;
            local_count += 1;
        }
        let mut global_count = 0;
        if global.latency_violated {
            violations.global_latency += 1;
            global_count += 1;
        }
        if global.utilization_violated {
            violations.global_utilization += 1;
            global_count += 1;
        }

        let local_any = local_latency_violated || local_utilization_violated;
        let global_any = global.latency_violated || global.utilization_violated;
        let triggered = strategy.triggers_on(local_any, global_any);

        if triggered {
            let forecasts: Vec<Vec<S>> = match &models {
                Some(models) => (0..n)
                    .map(|x| {
                        let from = (t + 1).saturating_sub(config.history_window);
                        let hist: Vec<S> = trace
                            .column(x, from..t + 1)
                            .into_iter()
                            .map(|w| S::from_u32(w).unwrap())
                            .collect();
                        models[x].forecast(&hist, config.horizon_offset)
                    })
                    .collect(),
                None => Vec::new(),
            };
            let ctx = DecisionContext {
                timestep: t,
                plan: &plan,
                repo,
                workloads,
                forecasts: &forecasts,
                sla,
                cost_bounds: &cost_bounds,
                horizon: config.horizon_offset,
                history: &history,
            };
            let started = Instant::now();
            let decision = strategy.decide(&ctx);
            let reasoning_time = started.elapsed();

            let changes: Vec<DecisionChange<S>> = decision
                .replaced
                .iter()
                .map(|&x| DecisionChange {
                    abstract_index: x,
                    old_id: plan.selected(repo, x).id.clone(),
                    new_id: decision.new_plan.selected(repo, x).id.clone(),
                    score: decision.per_service_scores.get(&x).copied().unwrap_or(S::zero()),
                })
                .collect();
            if decision.new_plan != plan {
                pending = Some(decision.new_plan.clone());
            }
            adaptations.push(AdaptationEvent {
                decision,
                changes,
                reasoning_time,
            });
        }

        ledger.seal_timestep(t);
        steps.push(StepRecord {
            timestep: t,
            global,
            local_violations: local_count,
            global_violations: global_count,
            adapted: triggered,
        });
    }

    let total_score = utility_sum - ledger.total();
    Ok(SimulationResult {
        strategy: kind,
        start: split,
        steps,
        adaptations,
        violations,
        ledger,
        total_score,
        final_plan: plan,
    })
}

/// Per-strategy (total score, violation count) pairs for the sustainability
/// metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SustainabilityInput {
    pub entries: Vec<(f64, u32)>,
}

/// Benefit per violation handled: `(1/V) * ((S - S_min)/(S_max - S_min) + 1)`
/// with the extremes taken across strategies.
pub fn sustainability_score(input: &SustainabilityInput) -> Result<Vec<f64>> {
    if input.entries.len() < 2 {
        return Err(Error::Config("sustainability needs at least two strategies".into()));
    }
    let s_min = input.entries.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let s_max = input.entries.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    if s_max == s_min {
        return Err(Error::Config("degenerate comparison: every strategy scored identically".into()));
    }
    input
        .entries
        .iter()
        .map(|&(s, v)| {
            if v == 0 {
                return Err(Error::Config("sustainability is undefined with zero violations".into()));
            }
            Ok(((s - s_min) / (s_max - s_min) + 1.0) / v as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub total_score: f64,
    pub violations: ViolationCounts,
    pub violation_total: u32,
    pub adaptation_count: usize,
    pub final_accumulated_debt: f64,
    /// Absent when sustainability is undefined for this comparison.
    pub sustainability: Option<f64>,
    /// Accumulated debt per simulated timestep.
    pub debt_series: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseTest {
    pub left: String,
    pub right: String,
    pub metric: String,
    pub h_statistic: f64,
    pub p_value: f64,
    pub eta_squared: f64,
    pub effect: String,
}

/// The deterministic comparison report serialized to `comparison.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub start_timestep: usize,
    pub simulated_timesteps: usize,
    pub strategies: Vec<StrategySummary>,
    pub pairwise: Vec<PairwiseTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sustainability_note: Option<String>,
}

/// Results of running several strategies on identical inputs.
pub struct Comparison<S> {
    pub results: Vec<SimulationResult<S>>,
    pub report: ComparisonReport,
}

/// Run every strategy on the same inputs and assemble the comparison report.
pub fn compare<S: Scalar>(
    kinds: &[StrategyKind],
    repo: &ServiceRepository<S>,
    trace: &WorkloadTrace,
    sla: &SlaConstraints<S>,
    config: &SimConfig<S>,
) -> Result<Comparison<S>> {
    if kinds.len() < 2 {
        return Err(Error::Config("comparison needs at least two strategies".into()));
    }
    let results: Vec<SimulationResult<S>> = kinds
        .iter()
        .map(|&kind| run(kind, repo, trace, sla, config))
        .collect::<Result<_>>()?;

    let entries: Vec<(f64, u32)> = results
        .iter()
        .map(|r| (r.total_score.to_f64().unwrap(), r.violations.total()))
        .collect();
    let (sustainability, note) = if entries.iter().any(|e| e.1 == 0) {
        (None, Some("sustainability undefined: a strategy finished without violations".to_string()))
    } else {
        match sustainability_score(&SustainabilityInput { entries: entries.clone() }) {
            Ok(scores) => (Some(scores), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };

    let strategies = results
        .iter()
        .enumerate()
        .map(|(i, r)| StrategySummary {
            strategy: r.strategy.name().to_string(),
            total_score: entries[i].0,
            violations: r.violations,
            violation_total: entries[i].1,
            adaptation_count: r.adaptations.len(),
            final_accumulated_debt: r.ledger.total().to_f64().unwrap(),
            sustainability: sustainability.as_ref().map(|s| s[i]),
            debt_series: r.debt_series().iter().map(|d| d.to_f64().unwrap()).collect(),
        })
        .collect();

    let mut pairwise = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            for (metric, a, b) in [
                ("global_utilization", results[i].utilization_series(), results[j].utilization_series()),
                ("global_latency", results[i].latency_series(), results[j].latency_series()),
            ] {
                let (h, p) = stats::kruskal_wallis(&[&a, &b])?;
                let eta = stats::eta_squared(h, a.len() + b.len(), 2);
                pairwise.push(PairwiseTest {
                    left: results[i].strategy.name().to_string(),
                    right: results[j].strategy.name().to_string(),
                    metric: metric.to_string(),
                    h_statistic: h,
                    p_value: p,
                    eta_squared: eta,
                    effect: stats::effect_size_label(eta).to_string(),
                });
            }
        }
    }

    let report = ComparisonReport {
        start_timestep: results[0].start,
        simulated_timesteps: results[0].steps.len(),
        strategies,
        pairwise,
        sustainability_note: note,
    };
    Ok(Comparison { results, report })
}

/// Write per-strategy outputs plus `comparison.json` under `dir`.
pub fn write_comparison<S: Scalar>(dir: impl AsRef<Path>, comparison: &Comparison<S>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for result in &comparison.results {
        result.write_outputs(dir.join(result.strategy.name()))?;
    }
    let json = serde_json::to_string_pretty(&comparison.report).expect("report serializes");
    fs::write(dir.join("comparison.json"), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{self, ComponentService, TraceProfile};

    fn sweet_repo(n: usize, sweet: u32) -> ServiceRepository<f64> {
        let groups = (0..n)
            .map(|x| {
                vec![ComponentService::new(format!("s{x}"), x, 100, 0.09 / sweet as f64 * 100.0, 2.0).unwrap()]
            })
            .collect();
        ServiceRepository::new(groups).unwrap()
    }

    fn default_sla(n: usize) -> SlaConstraints<f64> {
        SlaConstraints::uniform(n, 0.09, 0.8, 1.0, 0.9, 0.0025).unwrap()
    }

    fn constant_trace(n: usize, horizon: usize, level: u32) -> WorkloadTrace {
        WorkloadTrace::from_rows(n, vec![vec![level; n]; horizon]).unwrap()
    }

    fn quick_config() -> SimConfig<f64> {
        SimConfig {
            refit_every: 0,
            history_window: 64,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_workload_trace() {
        let repo = sweet_repo(2, 100);
        let sla = default_sla(2);
        let trace = constant_trace(2, 120, 0);
        let result = run(StrategyKind::Datesso, &repo, &trace, &sla, &quick_config()).unwrap();

        assert_eq!(result.steps.len(), 40);
        // Utilization 0 violates every local floor at every timestep, and
        // the empty composition has zero latency.
        assert_eq!(result.violations.local_utilization, 40);
        assert_eq!(result.violations.global_latency, 0);
        assert!(result.steps.iter().all(|s| s.global.latency == 0.0));
        // At most one reasoning invocation per timestep.
        assert!(result.adaptations.len() <= 40);
        assert!(!result.adaptations.is_empty());
    }

    #[test]
    fn sweet_spot_trace_never_adapts() {
        let repo = sweet_repo(3, 100);
        let sla = default_sla(3);
        // Workload 95 keeps every selection feasible with utilization above
        // the global floor, so no interest and no triggers.
        let trace = constant_trace(3, 90, 95);
        let result = run(StrategyKind::Datesso, &repo, &trace, &sla, &quick_config()).unwrap();

        assert!(result.adaptations.is_empty());
        assert_eq!(result.violations.total(), 0);
        assert_eq!(result.ledger.total(), 0.0);
        assert!((result.total_score - 0.0).abs() < 1e-9);
    }

    #[test]
    fn runs_are_deterministic() {
        let repo: ServiceRepository<f64> = model::synthetic_repository(3, 4, 5, 0.09, (40, 400)).unwrap();
        let sla = default_sla(4);
        let trace = model::generate_synthetic_trace(11, 600, 4, &TraceProfile {
            base_level: 120.0,
            ..TraceProfile::default()
        })
        .unwrap();
        let config = quick_config();

        let a = run(StrategyKind::Datesso, &repo, &trace, &sla, &config).unwrap();
        let b = run(StrategyKind::Datesso, &repo, &trace, &sla, &config).unwrap();

        assert_eq!(a.steps, b.steps);
        assert_eq!(a.total_score, b.total_score);
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.final_plan, b.final_plan);
        assert_eq!(a.adaptations.len(), b.adaptations.len());
        for (x, y) in a.adaptations.iter().zip(&b.adaptations) {
            assert_eq!(x.decision, y.decision);
            assert_eq!(x.changes, y.changes);
        }
        assert_eq!(a.ledger.entries(), b.ledger.entries());
    }

    #[test]
    fn debt_accumulation_matches_entry_sum() {
        let repo: ServiceRepository<f64> = model::synthetic_repository(5, 3, 4, 0.09, (40, 400)).unwrap();
        let sla = default_sla(3);
        let trace = model::generate_synthetic_trace(7, 450, 3, &TraceProfile::default()).unwrap();
        let result = run(StrategyKind::Datesso, &repo, &trace, &sla, &quick_config()).unwrap();

        let entry_sum: f64 = result.ledger.entries().iter().map(|e| e.principal + e.alpha + e.beta).sum();
        assert!((result.ledger.total() - entry_sum).abs() < 1e-9);

        let series = result.debt_series();
        assert!(series.windows(2).all(|w| w[1] >= w[0]), "accumulated debt must be non-decreasing");
    }

    #[test]
    fn sustainability_anchors() {
        let input = SustainabilityInput {
            entries: vec![(417.10, 113), (-3146.66, 187), (-910.61, 102), (-1478.67, 133)],
        };
        let scores = sustainability_score(&input).unwrap();
        let expected = [0.0177, 0.0053, 0.0160, 0.0110];
        for (got, want) in scores.iter().zip(expected) {
            assert!((got - want).abs() < 5e-4, "{got} vs {want}");
        }
    }

    #[test]
    fn sustainability_rejects_degenerate_inputs() {
        let equal = SustainabilityInput {
            entries: vec![(10.0, 5), (10.0, 9)],
        };
        assert!(sustainability_score(&equal).is_err());

        let zero_v = SustainabilityInput {
            entries: vec![(10.0, 0), (20.0, 9)],
        };
        assert!(sustainability_score(&zero_v).is_err());
    }

    #[test]
    fn compare_requires_two_strategies() {
        let repo = sweet_repo(2, 100);
        let sla = default_sla(2);
        let trace = constant_trace(2, 60, 95);
        assert!(compare(&[StrategyKind::Datesso], &repo, &trace, &sla, &quick_config()).is_err());
    }

    #[test]
    fn compare_is_self_consistent() {
        let repo: ServiceRepository<f64> = model::synthetic_repository(9, 3, 4, 0.09, (40, 400)).unwrap();
        let sla = default_sla(3);
        let trace = model::generate_synthetic_trace(13, 450, 3, &TraceProfile::default()).unwrap();
        let comparison = compare(
            &[StrategyKind::Datesso, StrategyKind::Datesso],
            &repo,
            &trace,
            &sla,
            &quick_config(),
        )
        .unwrap();

        // A strategy against itself: identical series, H = 0.
        assert_eq!(comparison.report.strategies.len(), 2);
        for test in &comparison.report.pairwise {
            assert!(test.h_statistic.abs() < 1e-9);
        }
        assert!(comparison.report.sustainability_note.is_some(), "self-comparison is degenerate");
    }

    #[test]
    fn debt_aware_strategy_accumulates_no_more_debt_than_oblivious() {
        // First-listed candidates carry the heavy overheads, so the
        // tie-breaking debt-oblivious picks are expensive swaps.
        let mut groups = Vec::new();
        for x in 0..3usize {
            let mut list = Vec::new();
            for (i, (sweet, overhead)) in [(100u32, 9.5f64), (102, 9.0), (98, 1.5), (101, 1.0)].iter().enumerate() {
                list.push(
                    ComponentService::new(
                        format!("c{x}-{i}"),
                        x,
                        *sweet,
                        0.09,
                        *overhead,
                    )
                    .unwrap(),
                );
            }
            groups.push(list);
        }
        let repo = ServiceRepository::new(groups).unwrap();
        let sla = default_sla(3);
        let trace = model::generate_synthetic_trace(21, 600, 3, &TraceProfile {
            base_level: 90.0,
            cycle_amplitude: 0.5,
            cycle_period: 120,
            ..TraceProfile::default()
        })
        .unwrap();
        let config = quick_config();

        let datesso = run(StrategyKind::Datesso, &repo, &trace, &sla, &config).unwrap();
        let doa = run(StrategyKind::Doa, &repo, &trace, &sla, &config).unwrap();
        assert!(
            datesso.ledger.total() <= doa.ledger.total(),
            "debt-aware {} vs oblivious {}",
            datesso.ledger.total(),
            doa.ledger.total()
        );
    }

    #[test]
    fn outputs_are_written_and_byte_stable() {
        let repo: ServiceRepository<f64> = model::synthetic_repository(17, 3, 4, 0.09, (40, 400)).unwrap();
        let sla = default_sla(3);
        let trace = model::generate_synthetic_trace(17, 450, 3, &TraceProfile::default()).unwrap();
        let config = quick_config();
        let kinds = [StrategyKind::Datesso, StrategyKind::Rbc];

        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_comparison(dir_a.path(), &compare(&kinds, &repo, &trace, &sla, &config).unwrap()).unwrap();
        write_comparison(dir_b.path(), &compare(&kinds, &repo, &trace, &sla, &config).unwrap()).unwrap();

        for file in ["comparison.json", "datesso/timeseries.csv", "datesso/ledger.csv", "datesso/decisions.csv", "rbc/timeseries.csv"] {
            let a = fs::read(dir_a.path().join(file)).unwrap();
            let b = fs::read(dir_b.path().join(file)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }
}
