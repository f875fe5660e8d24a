//! Temporal debt-aware utility: principal, accumulated interest, debt, and
//! the per-component utility score over a timestep window.
//!
//! A component's principal is the one-off normalized cost of composing it in.
//! Interest accrues per timestep from its potential contribution to global
//! constraint violations: a utilization shortfall against the global floor
//! (alpha) plus a normalized-latency excess over the normalized global bound
//! (beta). Debt is principal plus interest; interest is a plain sum, there is
//! no compounding.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::model::{ComponentService, ServiceId, ServiceRepository, SlaConstraints};
use crate::{Error, Result, Scalar};

/// Min-max bounds for normalizing raw principal cost into [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBounds<S> {
    lower: S,
    upper: S,
}

impl<S: Scalar> CostBounds<S> {
    pub fn new(lower: S, upper: S) -> Result<Self> {
        if !(upper > lower) {
            return Err(Error::Config(format!(
                "principal cost bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(CostBounds { lower, upper })
    }

    /// Default bounds: zero up to the most expensive actuation in the
    /// repository.
    pub fn from_repository(repo: &ServiceRepository<S>, sla: &SlaConstraints<S>) -> Result<Self> {
        CostBounds::new(S::zero(), repo.max_overhead() * sla.compute_cost)
    }

    pub fn normalize(&self, raw: S) -> S {
        ((raw - self.lower) / (self.upper - self.lower)).clamp01()
    }
}

/// One-off actuation cost in currency: overhead seconds times compute cost
/// per second.
pub fn raw_principal<S: Scalar>(service: &ComponentService<S>, sla: &SlaConstraints<S>) -> S {
    service.overhead * sla.compute_cost
}

/// Normalized principal in [0,1].
pub fn principal<S: Scalar>(service: &ComponentService<S>, sla: &SlaConstraints<S>, bounds: &CostBounds<S>) -> S {
    bounds.normalize(raw_principal(service, sla))
}

/// Accumulated interest over a window of per-timestep utilization and
/// normalized-latency values.
///
/// Alpha sums `CU_global - u` over timesteps where the global utilization
/// floor is at or above `u`; beta sums `l - CL_global_norm` over timesteps
/// where the normalized latency is at or above the normalized global latency
/// bound. Both are non-negative by construction.
pub fn interest<S: Scalar>(utilizations: &[S], latencies_norm: &[S], sla: &SlaConstraints<S>) -> Result<(S, S)> {
    interest_against(
        utilizations,
        latencies_norm,
        sla.global_utilization,
        sla.normalized_global_latency_bound(),
    )
}

pub(crate) fn interest_against<S: Scalar>(
    utilizations: &[S],
    latencies_norm: &[S],
    utilization_floor: S,
    latency_bound_norm: S,
) -> Result<(S, S)> {
    if utilizations.len() != latencies_norm.len() {
        return Err(Error::LengthMismatch {
            left: utilizations.len(),
            right: latencies_norm.len(),
        });
    }
    let mut alpha = S::zero();
    let mut beta = S::zero();
    for (&u, &l) in utilizations.iter().zip(latencies_norm) {
        if utilization_floor >= u {
            alpha += utilization_floor - u;
        }
        if l >= latency_bound_norm {
            beta += l - latency_bound_norm;
        }
    }
    Ok((alpha, beta))
}

/// Principal plus interest for one component over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebtRecord<S> {
    pub principal: S,
    pub alpha: S,
    pub beta: S,
    /// Inclusive timestep window (n, m) the interest was accumulated over.
    pub window: (usize, usize),
}

impl<S: Scalar> DebtRecord<S> {
    pub fn debt(&self) -> S {
        self.principal + self.alpha + self.beta
    }
}

/// Debt of a feasible component over a window: principal plus accumulated
/// interest.
pub fn debt<S: Scalar>(
    service: &ComponentService<S>,
    utilizations: &[S],
    latencies_norm: &[S],
    window: (usize, usize),
    sla: &SlaConstraints<S>,
    bounds: &CostBounds<S>,
) -> Result<DebtRecord<S>> {
    let (alpha, beta) = interest(utilizations, latencies_norm, sla)?;
    Ok(DebtRecord {
        principal: principal(service, sla, bounds),
        alpha,
        beta,
        window,
    })
}

/// Debt-aware utility score over a window: total utilization minus total
/// normalized latency minus debt. Larger is better.
pub fn utility_score<S: Scalar>(utilizations: &[S], latencies_norm: &[S], debt: S) -> S {
    let u: S = utilizations.iter().copied().sum();
    let l: S = latencies_norm.iter().copied().sum();
    u - l - debt
}

/// One charged contribution: a principal at adaptation time or one
/// timestep's interest for a selected component.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry<S> {
    pub timestep: usize,
    pub component_id: ServiceId,
    pub principal: S,
    pub alpha: S,
    pub beta: S,
    /// Running total after this entry.
    pub cumulative: S,
}

/// Per-run debt history: principals charged at adaptations plus interest
/// accrued per timestep by the components selected in the live plan.
///
/// Single writer (the simulation loop), read freely afterwards.
#[derive(Debug, Clone)]
pub struct DebtLedger<S> {
    base: usize,
    total: S,
    cumulative: Vec<S>,
    entries: Vec<LedgerEntry<S>>,
    per_component: BTreeMap<ServiceId, (S, S, S)>,
}

impl<S: Scalar> DebtLedger<S> {
    /// `base` is the first timestep the run simulates.
    pub fn new(base: usize) -> Self {
        DebtLedger {
            base,
            total: S::zero(),
            cumulative: Vec::new(),
            entries: Vec::new(),
            per_component: BTreeMap::new(),
        }
    }

    /// Record a contribution at `timestep`. Zero contributions are dropped.
    pub fn record(&mut self, timestep: usize, component_id: &ServiceId, principal: S, alpha: S, beta: S) {
        debug_assert!(principal >= S::zero() && alpha >= S::zero() && beta >= S::zero());
        debug_assert!(timestep >= self.base + self.cumulative.len(), "ledger timesteps must not go backwards");
        let amount = principal + alpha + beta;
        if amount == S::zero() {
            return;
        }
        self.total += amount;
        let totals = self.per_component.entry(component_id.clone()).or_insert((S::zero(), S::zero(), S::zero()));
        totals.0 += principal;
        totals.1 += alpha;
        totals.2 += beta;
        self.entries.push(LedgerEntry {
            timestep,
            component_id: component_id.clone(),
            principal,
            alpha,
            beta,
            cumulative: self.total,
        });
    }

    /// Close out one timestep; must be called once per simulated timestep in
    /// order, after all of its contributions were recorded.
    pub fn seal_timestep(&mut self, timestep: usize) {
        debug_assert_eq!(timestep, self.base + self.cumulative.len());
        self.cumulative.push(self.total);
    }

    /// Accumulated composition debt from the start of the run through `t`.
    /// Non-decreasing in `t`.
    pub fn accumulated_debt(&self, t: usize) -> S {
        if t < self.base || self.cumulative.is_empty() {
            return S::zero();
        }
        let i = (t - self.base).min(self.cumulative.len() - 1);
        self.cumulative[i]
    }

    pub fn total(&self) -> S {
        self.total
    }

    pub fn entries(&self) -> &[LedgerEntry<S>] {
        &self.entries
    }

    /// (principal, alpha, beta) totals per component, since run start.
    pub fn component_totals(&self) -> &BTreeMap<ServiceId, (S, S, S)> {
        &self.per_component
    }

    /// Export as `timestep,component_id,principal,alpha,beta,debt_cumulative`.
    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::from("timestep,component_id,principal,alpha,beta,debt_cumulative\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.timestep, e.component_id, e.principal, e.alpha, e.beta, e.cumulative
            ));
        }
        fs::write(path, out)?;
        Ok(())
    }
}
