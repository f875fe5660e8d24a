//! Hard local and soft global latency/utilization constraints.
//!
//! Constraint checks compare raw per-request latency in seconds against the
//! SLA caps; the normalized forms in [0,1] exist only for the debt and
//! utility arithmetic. Local constraints are hard: an infeasible component is
//! a classification, never an error. Global constraints are soft: violations
//! are flagged, nothing aborts.

use crate::model::{ComponentService, CompositionPlan, ServiceRepository, SlaConstraints};
use crate::Scalar;

/// What one component looks like under a given workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObservation<S> {
    /// Per-request latency in seconds under the observed workload.
    pub latency_raw: S,
    /// Latency scaled by the local cap, clamped to [0,1].
    pub latency_norm: S,
    /// Utilization per the SLA-scaled definition, clamped to [0,1].
    pub utilization: S,
    /// Both hard local constraints hold.
    pub feasible: bool,
}

/// Composition-wide view at one timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalObservation<S> {
    /// Sum of the selected components' raw latencies, in seconds.
    pub latency: S,
    /// Mean of the selected components' utilizations.
    pub utilization: S,
    pub latency_violated: bool,
    pub utilization_violated: bool,
}

/// Raw per-request latency when `workload` requests arrive at `service`:
/// `capacity_latency * workload / capacity_requests` seconds.
pub fn local_latency<S: Scalar>(service: &ComponentService<S>, workload: u32) -> S {
    service.capacity_latency * S::from_u32(workload).unwrap() / S::from_u32(service.capacity_requests).unwrap()
}

/// Raw latency mapped onto [0,1] by the local cap.
pub fn normalized_latency<S: Scalar>(latency_raw: S, cap: S) -> S {
    (latency_raw / cap).clamp01()
}

/// SLA-scaled utilization, clamped to [0,1] because requests beyond capacity
/// are discarded.
pub fn local_utilization<S: Scalar>(service: &ComponentService<S>, workload: u32, sla: &SlaConstraints<S>) -> S {
    let cap = sla.local_latency_cap(service.abstract_index);
    (local_latency(service, workload) / cap).clamp01()
}

/// Hard local feasibility: raw latency within the cap and utilization at or
/// above the floor, both boundaries inclusive.
pub fn is_feasible<S: Scalar>(service: &ComponentService<S>, workload: u32, sla: &SlaConstraints<S>) -> bool {
    let x = service.abstract_index;
    local_latency(service, workload) <= sla.local_latency_cap(x)
        && local_utilization(service, workload, sla) >= sla.local_utilization_floor(x)
}

pub fn observe_local<S: Scalar>(service: &ComponentService<S>, workload: u32, sla: &SlaConstraints<S>) -> LocalObservation<S> {
    let x = service.abstract_index;
    let latency_raw = local_latency(service, workload);
    let utilization = (latency_raw / sla.local_latency_cap(x)).clamp01();
    LocalObservation {
        latency_raw,
        latency_norm: normalized_latency(latency_raw, sla.local_latency_cap(x)),
        utilization,
        feasible: latency_raw <= sla.local_latency_cap(x) && utilization >= sla.local_utilization_floor(x),
    }
}

/// Aggregate the selected components sequentially: latency sums, utilization
/// averages. Violation flags are informational; global constraints are soft.
pub fn observe_global<S: Scalar>(
    plan: &CompositionPlan,
    repo: &ServiceRepository<S>,
    workloads: &[u32],
    sla: &SlaConstraints<S>,
) -> GlobalObservation<S> {
    debug_assert_eq!(workloads.len(), repo.abstract_count());
    let n = repo.abstract_count();
    let mut latency = S::zero();
    let mut utilization = S::zero();
    for x in 0..n {
        let svc = plan.selected(repo, x);
        latency += local_latency(svc, workloads[x]);
        utilization += local_utilization(svc, workloads[x], sla);
    }
    utilization /= S::from_count(n);
    GlobalObservation {
        latency,
        utilization,
        latency_violated: latency > sla.global_latency,
        utilization_violated: utilization < sla.global_utilization,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ServiceId;
    use proptest::prelude::*;

    fn svc(t: u32, l: f64) -> ComponentService<f64> {
        ComponentService::new(ServiceId::new("s"), 0, t, l, 0.0).unwrap()
    }

    fn sla1(cl: f64, cu: f64) -> SlaConstraints<f64> {
        SlaConstraints::uniform(1, cl, cu, 1.0, 0.9, 0.0025).unwrap()
    }

    #[test]
    fn latency_at_capacity_point() {
        // 50 requests in 0.5 s: raw latency at w=50 is the full 0.5 s.
        assert_eq!(local_latency(&svc(50, 0.5), 50), 0.5);
        assert_eq!(local_latency(&svc(50, 0.5), 0), 0.0);
        assert!((local_latency(&svc(50, 0.19), 25) - 0.095).abs() < 1e-15);
    }

    #[test]
    fn utilization_values_and_clamp() {
        let sla = sla1(0.09, 0.8);
        assert_eq!(local_utilization(&svc(50, 0.09), 0, &sla), 0.0);
        assert!((local_utilization(&svc(50, 0.09), 40, &sla) - 0.8).abs() < 1e-12);
        // w=100 gives 2.0 before the clamp.
        assert_eq!(local_utilization(&svc(50, 0.09), 100, &sla), 1.0);
    }

    #[test]
    fn feasibility_boundaries_are_inclusive() {
        // Latency exactly at the cap and utilization exactly at the floor.
        let sla = sla1(0.09, 1.0);
        assert!(is_feasible(&svc(50, 0.09), 50, &sla));

        let sla = sla1(0.09, 0.8);
        assert!(is_feasible(&svc(50, 0.09), 45, &sla));
        // Zero workload forces utilization 0 below any positive floor.
        assert!(!is_feasible(&svc(50, 0.09), 0, &sla));
        // Above capacity the latency check fails even though utilization clamps.
        assert!(!is_feasible(&svc(50, 0.09), 100, &sla));
    }

    #[test]
    fn global_aggregation() {
        let mut groups = Vec::new();
        for x in 0..10 {
            groups.push(vec![ComponentService::new(format!("g{x}"), x, 50, 0.09, 0.0).unwrap()]);
        }
        let repo = ServiceRepository::new(groups).unwrap();
        let sla = SlaConstraints::uniform(10, 0.09, 0.8, 1.0, 0.9, 0.0025).unwrap();
        let plan = CompositionPlan::initial(&repo);

        // Every component at its 0.09 s cap sums to 0.9 s <= 1 s.
        let obs: GlobalObservation<f64> = observe_global(&plan, &repo, &[50; 10], &sla);
        assert!((obs.latency - 0.9).abs() < 1e-12);
        assert!(!obs.latency_violated);
        assert_eq!(obs.utilization, 1.0);
        assert!(!obs.utilization_violated);

        // Mean of identical utilizations is that utilization.
        let obs: GlobalObservation<f64> = observe_global(&plan, &repo, &[40; 10], &sla);
        assert!((obs.utilization - 0.8).abs() < 1e-12);
        assert!(obs.utilization_violated);
    }

    #[test]
    fn single_service_global_equals_local() {
        let repo = ServiceRepository::new(vec![vec![svc(50, 0.09)]]).unwrap();
        let sla = sla1(0.09, 0.8);
        let plan = CompositionPlan::initial(&repo);
        let local = observe_local(repo.candidate(0, 0), 30, &sla);
        let global = observe_global(&plan, &repo, &[30], &sla);
        assert_eq!(global.latency, local.latency_raw);
        assert_eq!(global.utilization, local.utilization);
    }

    proptest! {
        #[test]
        fn latency_and_utilization_monotone_in_workload(t in 1u32..500, l in 0.01f64..5.0, w in 0u32..1000) {
            let s = svc(t, l);
            let sla = sla1(0.09, 0.8);
            prop_assert!(local_latency(&s, w + 1) >= local_latency(&s, w));
            prop_assert!(local_utilization(&s, w + 1, &sla) >= local_utilization(&s, w, &sla));
        }

        #[test]
        fn doubling_capacity_pair_changes_nothing(t in 1u32..500, l in 0.01f64..5.0, w in 0u32..1000) {
            let a = svc(t, l);
            let b = svc(2 * t, 2.0 * l);
            let sla = sla1(0.09, 0.8);
            prop_assert!((local_latency(&a, w) - local_latency(&b, w)).abs() < 1e-12);
            prop_assert!((local_utilization(&a, w, &sla) - local_utilization(&b, w, &sla)).abs() < 1e-12);
        }

        #[test]
        fn observation_ranges(t in 1u32..500, l in 0.01f64..5.0, w in 0u32..2000) {
            let sla = sla1(0.09, 0.8);
            let obs = observe_local(&svc(t, l), w, &sla);
            prop_assert!(obs.latency_raw >= 0.0);
            prop_assert!((0.0..=1.0).contains(&obs.latency_norm));
            prop_assert!((0.0..=1.0).contains(&obs.utilization));
        }
    }
}
