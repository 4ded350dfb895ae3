//! Prints tail means for every scenario under the default constants.

use beamband::bandit::{IndexKind, PolicyKind};
use beamband::ratio::SweepRatio;
use beamband::scenarios::*;

fn var(name: &str) -> Option<f64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn tune(mut cfg: ScenarioConfig) -> ScenarioConfig {
    if let Some(v) = var("SIDELOBE") { cfg.env.budget.sidelobe_gain_dbi = v; }
    if let Some(v) = var("NF") { cfg.env.budget.noise_figure_db = v; }
    if let Some(v) = var("HN") { cfg.env.mobility.heading_noise_deg_sqrt_s = v; }
    if let Some(v) = var("SE") { cfg.env.budget.se_cap_bps_hz = v; }
    if let Some(v) = var("QO") { cfg.env.quasi_omni_gain_dbi = v; }
    if let Some(v) = var("TH") { cfg.env.connect_threshold_db = v; }
    cfg
}

fn main() {
    let reals: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let t = std::time::Instant::now();

    let cfg = tune(ScenarioConfig { realizations: reals, ..ScenarioConfig::new(Scenario::I) });
    let eval = evaluate_static_policies(&cfg).unwrap();
    for (a, r) in eval.arms.iter().zip(&eval.mean_rate_gbps) {
        println!("I static {a}: {r:.4}");
    }
    println!("I genius {} worst {} gap {:.3}", eval.genius_rate_gbps(), eval.worst_rate_gbps(), eval.genius_rate_gbps() / eval.worst_rate_gbps() - 1.0);
    for spec in [PolicySpec::Random, PolicySpec::Flat(PolicyKind::Ucb1), PolicySpec::Flat(PolicyKind::TsGaussian), PolicySpec::Flat(PolicyKind::KlUcb)] {
        let agg = aggregate(&run_scenario_i(&cfg, spec, None).unwrap(), 100).unwrap();
        println!("I {:8} tail {:.4} vs genius {:.3}", spec.default_label(&cfg), agg.tail_mean_gbps, agg.tail_mean_gbps / eval.genius_rate_gbps());
    }

    let cfg2 = tune(ScenarioConfig { realizations: reals, ..ScenarioConfig::new(Scenario::II) });
    let eval2 = evaluate_static_policies(&cfg2).unwrap();
    println!("II genius {} {:.4} worst {} {:.4}", eval2.genius_arm(), eval2.genius_rate_gbps(), eval2.worst_arm(), eval2.worst_rate_gbps());
    for (a, r) in eval2.arms.iter().zip(&eval2.mean_rate_gbps) {
        print!("{a}={r:.3} ");
    }
    println!();
    for spec in [PolicySpec::Random, PolicySpec::Flat(PolicyKind::KlUcb), PolicySpec::Tree(IndexKind::KlUcb)] {
        let agg = aggregate(&run_scenario_ii(&cfg2, spec, None).unwrap(), 100).unwrap();
        let conv = first_slot_reaching(&agg.mean_rate_gbps, 0.9 * agg.tail_mean_gbps, 10);
        println!("II {:8} tail {:.4} conv {conv:?}", spec.default_label(&cfg2), agg.tail_mean_gbps);
    }

    for ratio in [SweepRatio::FULL, SweepRatio::new(1, 2).unwrap(), SweepRatio::new(1, 4).unwrap()] {
        let cfg3 = tune(ScenarioConfig { realizations: reals, ratio, ..ScenarioConfig::new(Scenario::III) });
        for spec in [PolicySpec::Random, PolicySpec::Tree(IndexKind::KlUcb)] {
            let agg = aggregate(&run_scenario_iii(&cfg3, spec, None).unwrap(), 1).unwrap();
            let tail10 = aggregate(&run_scenario_iii(&cfg3, spec, None).unwrap(), 20).unwrap().tail_mean_gbps;
            println!("III R={ratio} {:8} slot300 {:.4} last20 {:.4}", spec.default_label(&cfg3), agg.tail_mean_gbps, tail10);
        }
    }
    eprintln!("elapsed {:?}", t.elapsed());
}
