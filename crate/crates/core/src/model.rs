//! Domain types, dataset ingestion, and validation for service repositories,
//! workloads, and SLA parameters.
//!
//! File formats are canonical to this project:
//!
//! * repository CSV: `abstract_index,service_id,capacity_requests,capacity_latency_s,overhead_s`
//! * workload CSV: `timestep,w_0,w_1,...,w_{N-1}`, timesteps contiguous from 0
//!
//! Both are UTF-8 with `.` as the decimal separator. Candidate order in the
//! repository file is preserved and defines deterministic tie-breaking order
//! downstream (first listed wins ties).

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{forecast, Error, Result, Scalar};

pub const REPOSITORY_HEADER: &str =
    "abstract_index,service_id,capacity_requests,capacity_latency_s,overhead_s";

/// Opaque identifier of a concrete component service.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ServiceId(String);

impl ServiceId {
    pub fn new(id: impl Into<String>) -> Self {
        ServiceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ServiceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ServiceId {
    fn from(s: &str) -> Self {
        ServiceId(s.to_owned())
    }
}

impl From<String> for ServiceId {
    fn from(s: String) -> Self {
        ServiceId(s)
    }
}

/// A concrete service candidate: it can process `capacity_requests` requests
/// in `capacity_latency` seconds, and composing it in costs `overhead`
/// seconds of actuation time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentService<S> {
    pub id: ServiceId,
    /// Index of the abstract service this candidate can realize.
    pub abstract_index: usize,
    pub capacity_requests: u32,
    pub capacity_latency: S,
    pub overhead: S,
}

impl<S: Scalar> ComponentService<S> {
    pub fn new(
        id: impl Into<ServiceId>,
        abstract_index: usize,
        capacity_requests: u32,
        capacity_latency: S,
        overhead: S,
    ) -> Result<Self> {
        let svc = ComponentService {
            id: id.into(),
            abstract_index,
            capacity_requests,
            capacity_latency,
            overhead,
        };
        svc.validate()?;
        Ok(svc)
    }

    fn validate(&self) -> Result<()> {
        if self.capacity_requests < 1 {
            return Err(Error::invalid("component service", format!("{}: capacity_requests must be >= 1", self.id)));
        }
        if !(self.capacity_latency > S::zero()) || !self.capacity_latency.is_finite() {
            return Err(Error::invalid("component service", format!("{}: capacity_latency must be positive and finite", self.id)));
        }
        if !(self.overhead >= S::zero()) || !self.overhead.is_finite() {
            return Err(Error::invalid("component service", format!("{}: overhead must be non-negative and finite", self.id)));
        }
        Ok(())
    }

    /// Seconds spent per request when running exactly at capacity.
    pub fn per_request_time(&self) -> S {
        self.capacity_latency / S::from_u32(self.capacity_requests).unwrap()
    }
}

/// All candidates, grouped by the abstract service they can realize.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRepository<S> {
    candidates: Vec<Vec<ComponentService<S>>>,
}

impl<S: Scalar> ServiceRepository<S> {
    pub fn new(candidates: Vec<Vec<ComponentService<S>>>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("repository", "no abstract services"));
        }
        let mut seen = std::collections::HashSet::new();
        for (x, list) in candidates.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::invalid(
                    "repository",
                    format!("abstract service {x} has no candidates"),
                ));
            }
            for svc in list {
                svc.validate()?;
                if svc.abstract_index != x {
                    return Err(Error::invalid(
                        "repository",
                        format!("{} declares abstract index {} but is listed under {}", svc.id, svc.abstract_index, x),
                    ));
                }
                if !seen.insert(svc.id.clone()) {
                    return Err(Error::invalid("repository", format!("duplicate service id {}", svc.id)));
                }
            }
        }
        Ok(ServiceRepository { candidates })
    }

    /// Number of abstract services N.
    pub fn abstract_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidates(&self, abstract_index: usize) -> &[ComponentService<S>] {
        &self.candidates[abstract_index]
    }

    pub fn candidate(&self, abstract_index: usize, candidate_index: usize) -> &ComponentService<S> {
        &self.candidates[abstract_index][candidate_index]
    }

    /// Position of `id` in the candidate list of `abstract_index`.
    pub fn find(&self, abstract_index: usize, id: &ServiceId) -> Option<usize> {
        self.candidates[abstract_index].iter().position(|c| &c.id == id)
    }

    pub fn iter_all(&self) -> impl Iterator<Item = &ComponentService<S>> {
        self.candidates.iter().flatten()
    }

    pub fn total_candidates(&self) -> usize {
        self.candidates.iter().map(Vec::len).sum()
    }

    pub fn max_overhead(&self) -> S {
        self.iter_all().map(|c| c.overhead).fold(S::zero(), S::max)
    }
}

/// The currently selected candidate per abstract service, stored as indices
/// into the repository's candidate lists so validity holds by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionPlan {
    selected: Vec<usize>,
}

impl CompositionPlan {
    /// First-listed candidate for every abstract service.
    pub fn initial<S: Scalar>(repo: &ServiceRepository<S>) -> Self {
        CompositionPlan {
            selected: vec![0; repo.abstract_count()],
        }
    }

    pub fn from_indices<S: Scalar>(repo: &ServiceRepository<S>, selected: Vec<usize>) -> Result<Self> {
        let plan = CompositionPlan { selected };
        plan.validate(repo)?;
        Ok(plan)
    }

    pub fn from_ids<S: Scalar>(repo: &ServiceRepository<S>, ids: &[ServiceId]) -> Result<Self> {
        if ids.len() != repo.abstract_count() {
            return Err(Error::invalid(
                "composition plan",
                format!("{} selections for {} abstract services", ids.len(), repo.abstract_count()),
            ));
        }
        let selected = ids
            .iter()
            .enumerate()
            .map(|(x, id)| {
                repo.find(x, id)
                    .ok_or_else(|| Error::invalid("composition plan", format!("{id} is not a candidate of abstract service {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompositionPlan { selected })
    }

    pub fn validate<S: Scalar>(&self, repo: &ServiceRepository<S>) -> Result<()> {
        if self.selected.len() != repo.abstract_count() {
            return Err(Error::invalid(
                "composition plan",
                format!("{} selections for {} abstract services", self.selected.len(), repo.abstract_count()),
            ));
        }
        for (x, &i) in self.selected.iter().enumerate() {
            if i >= repo.candidates(x).len() {
                return Err(Error::invalid(
                    "composition plan",
                    format!("candidate index {i} out of range for abstract service {x}"),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn selected_index(&self, abstract_index: usize) -> usize {
        self.selected[abstract_index]
    }

    pub fn set(&mut self, abstract_index: usize, candidate_index: usize) {
        self.selected[abstract_index] = candidate_index;
    }

    pub fn selected<'a, S: Scalar>(&self, repo: &'a ServiceRepository<S>, abstract_index: usize) -> &'a ComponentService<S> {
        repo.candidate(abstract_index, self.selected[abstract_index])
    }

    pub fn ids<S: Scalar>(&self, repo: &ServiceRepository<S>) -> Vec<ServiceId> {
        self.selected
            .iter()
            .enumerate()
            .map(|(x, &i)| repo.candidate(x, i).id.clone())
            .collect()
    }
}

/// Latency/utilization bounds and cost parameters of the SLA.
///
/// Local latency caps and utilization floors are per abstract service; the
/// global bounds apply to the whole composition. Latency bounds are raw
/// seconds per request.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaConstraints<S> {
    local_latency: Vec<S>,
    local_utilization: Vec<S>,
    pub global_latency: S,
    pub global_utilization: S,
    pub compute_cost: S,
}

impl<S: Scalar> SlaConstraints<S> {
    pub fn new(
        local_latency: Vec<S>,
        local_utilization: Vec<S>,
        global_latency: S,
        global_utilization: S,
        compute_cost: S,
    ) -> Result<Self> {
        if local_latency.len() != local_utilization.len() || local_latency.is_empty() {
            return Err(Error::invalid("sla", "per-service bound lists must be non-empty and equal length"));
        }
        for (x, &cap) in local_latency.iter().enumerate() {
            if !(cap > S::zero()) || !cap.is_finite() {
                return Err(Error::invalid("sla", format!("local latency bound for service {x} must be positive")));
            }
        }
        for (x, &floor) in local_utilization.iter().enumerate() {
            if !(floor > S::zero() && floor <= S::one()) {
                return Err(Error::invalid("sla", format!("local utilization bound for service {x} must be in (0, 1]")));
            }
        }
        if !(global_latency > S::zero()) {
            return Err(Error::invalid("sla", "global latency bound must be positive"));
        }
        if !(global_utilization > S::zero() && global_utilization <= S::one()) {
            return Err(Error::invalid("sla", "global utilization bound must be in (0, 1]"));
        }
        if !(compute_cost >= S::zero()) {
            return Err(Error::invalid("sla", "compute cost must be non-negative"));
        }
        Ok(SlaConstraints {
            local_latency,
            local_utilization,
            global_latency,
            global_utilization,
            compute_cost,
        })
    }

    /// One shared local bound pair for all `n` abstract services.
    pub fn uniform(
        n: usize,
        local_latency: S,
        local_utilization: S,
        global_latency: S,
        global_utilization: S,
        compute_cost: S,
    ) -> Result<Self> {
        SlaConstraints::new(
            vec![local_latency; n],
            vec![local_utilization; n],
            global_latency,
            global_utilization,
            compute_cost,
        )
    }

    pub fn service_count(&self) -> usize {
        self.local_latency.len()
    }

    /// Local latency cap (seconds per request) for abstract service `x`.
    pub fn local_latency_cap(&self, x: usize) -> S {
        self.local_latency[x]
    }

    /// Local utilization floor for abstract service `x`.
    pub fn local_utilization_floor(&self, x: usize) -> S {
        self.local_utilization[x]
    }

    pub fn max_local_latency_cap(&self) -> S {
        self.local_latency.iter().copied().fold(S::zero(), S::max)
    }

    /// Global latency bound mapped onto the normalized [0,1] latency scale,
    /// where 1 is the point at which every component sits exactly at its
    /// local cap: `global_latency / (N * max local cap)`, clamped to [0,1].
    pub fn normalized_global_latency_bound(&self) -> S {
        let n = S::from_count(self.service_count());
        (self.global_latency / (n * self.max_local_latency_cap())).clamp01()
    }
}

/// Requests arriving at each abstract service per timestep. One timestep is
/// one second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadTrace {
    services: usize,
    demand: Vec<u32>,
}

impl WorkloadTrace {
    pub fn from_rows(services: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if services == 0 {
            return Err(Error::invalid("workload trace", "zero abstract services"));
        }
        let mut demand = Vec::with_capacity(rows.len() * services);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != services {
                return Err(Error::invalid(
                    "workload trace",
                    format!("row {t} has {} entries, expected {services}", row.len()),
                ));
            }
            demand.extend_from_slice(row);
        }
        Ok(WorkloadTrace { services, demand })
    }

    pub fn horizon(&self) -> usize {
        self.demand.len() / self.services
    }

    pub fn services(&self) -> usize {
        self.services
    }

    /// Demand for every abstract service at timestep `t`.
    pub fn row(&self, t: usize) -> &[u32] {
        &self.demand[t * self.services..(t + 1) * self.services]
    }

    /// Demand history of abstract service `x` over `range`.
    pub fn column(&self, x: usize, range: std::ops::Range<usize>) -> Vec<u32> {
        range.map(|t| self.row(t)[x]).collect()
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

fn parse_scalar<S: Scalar>(field: &str, what: &str, path: &Path, line: usize) -> Result<S> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::ingestion(path, line, format!("invalid {what} `{field}`")))?;
    S::from_f64(value).ok_or_else(|| Error::ingestion(path, line, format!("{what} `{field}` out of range")))
}

fn parse_int<T: std::str::FromStr>(field: &str, what: &str, path: &Path, line: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::ingestion(path, line, format!("invalid {what} `{field}`")))
}

/// Load and validate a service repository from its CSV format.
pub fn load_repository<S: Scalar>(path: impl AsRef<Path>) -> Result<ServiceRepository<S>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    match lines.next() {
        Some((_, header)) if header.trim() == REPOSITORY_HEADER => {}
        Some((_, header)) => {
            return Err(Error::ingestion(path, 1, format!("unexpected header `{}`", header.trim())))
        }
        None => return Err(Error::ingestion(path, 1, "empty file")),
    }

    let mut groups: Vec<Vec<ComponentService<S>>> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::ingestion(path, line, format!("expected 5 fields, found {}", fields.len())));
        }
        let abstract_index: usize = parse_int(fields[0], "abstract index", path, line)?;
        let id = ServiceId::new(fields[1].trim());
        let capacity_requests: i64 = parse_int(fields[2], "capacity_requests", path, line)?;
        if capacity_requests < 1 {
            return Err(Error::ingestion(path, line, format!("capacity_requests must be >= 1, got {capacity_requests}")));
        }
        let capacity_latency: S = parse_scalar(fields[3], "capacity_latency_s", path, line)?;
        let overhead: S = parse_scalar(fields[4], "overhead_s", path, line)?;

        let svc = ComponentService::new(id, abstract_index, capacity_requests as u32, capacity_latency, overhead)
            .map_err(|e| Error::ingestion(path, line, e.to_string()))?;
        if groups.len() <= abstract_index {
            groups.resize_with(abstract_index + 1, Vec::new);
        }
        groups[abstract_index].push(svc);
    }

    ServiceRepository::new(groups).map_err(|e| match e {
        Error::Invalid { message, .. } => Error::ingestion(path, 0, message),
        other => other,
    })
}

/// Write a repository in the canonical CSV format. Candidate order is kept.
pub fn save_repository<S: Scalar>(path: impl AsRef<Path>, repo: &ServiceRepository<S>) -> Result<()> {
    let mut out = String::from(REPOSITORY_HEADER);
    out.push('\n');
    for svc in repo.iter_all() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            svc.abstract_index, svc.id, svc.capacity_requests, svc.capacity_latency, svc.overhead
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load and validate a workload trace from its CSV format.
pub fn load_workload(path: impl AsRef<Path>) -> Result<WorkloadTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let services = match lines.next() {
        Some((_, header)) => {
            let cols: Vec<&str> = header.trim().split(',').collect();
            if cols.first() != Some(&"timestep") || cols.len() < 2 {
                return Err(Error::ingestion(path, 1, format!("unexpected header `{}`", header.trim())));
            }
            for (i, col) in cols[1..].iter().enumerate() {
                if *col != format!("w_{i}") {
                    return Err(Error::ingestion(path, 1, format!("expected column w_{i}, found `{col}`")));
                }
            }
            cols.len() - 1
        }
        None => return Err(Error::ingestion(path, 1, "empty file")),
    };

    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != services + 1 {
            return Err(Error::ingestion(path, line, format!("expected {} fields, found {}", services + 1, fields.len())));
        }
        let t: usize = parse_int(fields[0], "timestep", path, line)?;
        if t != rows.len() {
            return Err(Error::ingestion(path, line, format!("timesteps must be contiguous from 0; expected {}, found {t}", rows.len())));
        }
        let mut row = Vec::with_capacity(services);
        for field in &fields[1..] {
            let w: i64 = parse_int(field, "demand", path, line)?;
            if w < 0 {
                return Err(Error::ingestion(path, line, format!("negative demand {w}")));
            }
            row.push(w as u32);
        }
        rows.push(row);
    }

    WorkloadTrace::from_rows(services, rows).map_err(|e| Error::ingestion(path, 0, e.to_string()))
}

/// Write a workload trace in the canonical CSV format.
pub fn save_workload(path: impl AsRef<Path>, trace: &WorkloadTrace) -> Result<()> {
    let mut out = String::from("timestep");
    for x in 0..trace.services() {
        out.push_str(&format!(",w_{x}"));
    }
    out.push('\n');
    for t in 0..trace.horizon() {
        out.push_str(&t.to_string());
        for &w in trace.row(t) {
            out.push_str(&format!(",{w}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Synthetic workloads and repositories
// ---------------------------------------------------------------------------

/// Shape of a synthetic workload: base load plus a daily-style cycle, random
/// excursions (bursts up, lulls down), and fractionally integrated noise so
/// the series has long memory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceProfile {
    /// Mean requests per timestep.
    pub base_level: f64,
    /// Cycle swing as a fraction of the base level.
    pub cycle_amplitude: f64,
    /// Cycle period in timesteps.
    pub cycle_period: usize,
    /// Burst peak as a fraction of the base level; 0 disables excursions.
    pub burst_amplitude: f64,
    /// Probability that an excursion starts at any given timestep.
    pub burst_rate: f64,
    /// Excursion length in timesteps.
    pub burst_duration: usize,
    /// Fraction of excursions that are demand lulls instead of bursts.
    pub lull_fraction: f64,
    /// Trough of a lull as a fraction of the current level.
    pub lull_depth: f64,
    /// Standard deviation of the long-memory noise, in requests.
    pub noise_scale: f64,
    /// Memory parameter of the noise, in (-0.5, 0.5).
    pub memory: f64,
}

impl Default for TraceProfile {
    fn default() -> Self {
        TraceProfile {
            base_level: 150.0,
            cycle_amplitude: 0.2,
            cycle_period: 2400,
            burst_amplitude: 0.35,
            burst_rate: 0.003,
            burst_duration: 60,
            lull_fraction: 0.5,
            lull_depth: 0.3,
            noise_scale: 2.0,
            memory: 0.3,
        }
    }
}

/// Generate a deterministic synthetic workload trace.
///
/// The same `(seed, horizon, n, profile)` always produces the same matrix.
pub fn generate_synthetic_trace(seed: u64, horizon: usize, n: usize, profile: &TraceProfile) -> Result<WorkloadTrace> {
    if horizon < 1 {
        return Err(Error::invalid("trace profile", "horizon must be >= 1"));
    }
    if n < 1 {
        return Err(Error::invalid("trace profile", "need at least one abstract service"));
    }
    if !(profile.memory > -0.5 && profile.memory < 0.5) {
        return Err(Error::invalid("trace profile", "memory parameter must be in (-0.5, 0.5)"));
    }

    let mut rows = vec![vec![0u32; n]; horizon];
    for x in 0..n {
        // Independent stream per service so adding services does not shift
        // the others.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let phase = 2.0 * std::f64::consts::PI * x as f64 / n as f64;

        let noise = if profile.noise_scale > 0.0 {
            let white: Vec<f64> = (0..horizon).map(|_| gaussian(&mut rng)).collect();
            // Integrating with -d turns white noise into a long-memory series.
            forecast::frac_diff(&white, -profile.memory)
        } else {
            vec![0.0; horizon]
        };

        let mut excursion_left = 0usize;
        let mut excursion_peak = 0.0f64;
        for (t, row) in rows.iter_mut().enumerate() {
            let cycle = 1.0
                + profile.cycle_amplitude
                    * (2.0 * std::f64::consts::PI * t as f64 / profile.cycle_period as f64 + phase).sin();
            let level = profile.base_level * cycle;
            if excursion_left == 0 && profile.burst_amplitude > 0.0 && rng.gen::<f64>() < profile.burst_rate {
                excursion_left = profile.burst_duration.max(1);
                excursion_peak = if rng.gen::<f64>() < profile.lull_fraction {
                    // A demand lull: traffic falls away toward the configured
                    // trough.
                    -level * profile.lull_depth * rng.gen_range(0.75..1.0)
                } else {
                    profile.base_level * profile.burst_amplitude * rng.gen_range(0.5..1.0)
                };
            }
            let excursion = if excursion_left > 0 {
                // Triangular envelope over the excursion duration.
                let progress = excursion_left as f64 / profile.burst_duration.max(1) as f64;
                excursion_left -= 1;
                excursion_peak * (1.0 - (2.0 * progress - 1.0).abs())
            } else {
                0.0
            };
            let value = level + excursion + profile.noise_scale * noise[t];
            row[x] = value.max(0.0).round() as u32;
        }
    }

    WorkloadTrace::from_rows(n, rows)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw per call keeps the stream simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Build a deterministic desk-scale repository whose candidates tile a
/// workload range: candidate `i` of every abstract service is sized so its
/// feasible workload band sits around `w_lo * (w_hi/w_lo)^(i/(k-1))`.
///
/// With a utilization floor of 0.8 a candidate covers workloads within
/// [0.8, 1.0] of its sweet spot, so callers should keep the spacing ratio
/// `(w_hi/w_lo)^(1/(k-1))` at or below 1.2 for gap-free coverage. Candidate
/// order is shuffled per service so file order does not coincide with
/// quality order.
pub fn synthetic_repository<S: Scalar>(
    seed: u64,
    abstract_count: usize,
    candidates_per_service: usize,
    latency_cap: S,
    workload_range: (u32, u32),
) -> Result<ServiceRepository<S>> {
    if abstract_count < 1 || candidates_per_service < 1 {
        return Err(Error::invalid("repository", "need at least one service and one candidate"));
    }
    let (w_lo, w_hi) = workload_range;
    if w_lo < 1 || w_hi < w_lo {
        return Err(Error::invalid("repository", "workload range must satisfy 1 <= lo <= hi"));
    }
    let cap = latency_cap.to_f64().unwrap();

    let mut groups = Vec::with_capacity(abstract_count);
    for x in 0..abstract_count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1).wrapping_mul(0xA076_1D64_78BD_642F) ^ x as u64);
        let mut list = Vec::with_capacity(candidates_per_service);
        for i in 0..candidates_per_service {
            let frac = if candidates_per_service == 1 {
                0.5
            } else {
                i as f64 / (candidates_per_service - 1) as f64
            };
            let sweet_spot = w_lo as f64 * (w_hi as f64 / w_lo as f64).powf(frac);
            // Per-request time that puts the latency cap exactly at the sweet
            // spot; the jitter stays small enough to keep neighboring bands
            // overlapping.
            let per_request = cap / sweet_spot * rng.gen_range(0.98..1.02);
            let capacity_requests = rng.gen_range(20..=200u32);
            let capacity_latency = per_request * capacity_requests as f64;
            let overhead = rng.gen_range(1.0..10.0f64);
            list.push(ComponentService::new(
                format!("c{x}-{i:02}"),
                x,
                capacity_requests,
                S::from_f64_lossy(capacity_latency),
                S::from_f64_lossy(overhead),
            )?);
        }
        // Fisher-Yates with the same stream.
        for i in (1..list.len()).rev() {
            let j = rng.gen_range(0..=i);
            list.swap(i, j);
        }
        groups.push(list);
    }
    ServiceRepository::new(groups)
}
