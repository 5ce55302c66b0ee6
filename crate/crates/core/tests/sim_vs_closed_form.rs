use std::time::Instant;

use idlegap::cstate::{ideal_core_residency, ideal_package_residency, CStateTable};
use idlegap::queueing::{erlang_p0, idle_band_fraction, package_idle_law, BandEnd, Level, QueueParams};
use idlegap::sim::{empirical_idle_distribution, simulate, IdleSource, SimConfig};
use idlegap::trace::{package_residency_from_trace, residency_from_trace, IdleIntervalTrace};

#[test]
fn mm1_big_run() {
    let t = Instant::now();
    let p = QueueParams::mm1(2000.0, 100e-6).unwrap();
    let r = simulate(&SimConfig::new(p, 7, 1_000_000)).unwrap();
    eprintln!("mm1 1e6: {:?}", t.elapsed());
    let busy = r.busy_fraction(0);
    assert!((busy - 0.2).abs() < 0.005, "{busy}");
    let mean = r.mean_idle_secs(IdleSource::Core(0)).unwrap();
    assert!((mean / 500e-6 - 1.0).abs() < 0.01, "{mean}");

    let edges = [0.0, 2e-6, 600e-6, f64::INFINITY];
    let emp = empirical_idle_distribution(&r, IdleSource::Core(0), &edges).unwrap();
    for (i, f) in emp.fractions.iter().enumerate() {
        let hi = BandEnd::from_secs(edges[i + 1]);
        let want = idle_band_fraction(&p, Level::Core, edges[i], hi).unwrap();
        assert!((f - want).abs() < 0.01, "band {i}: {f} vs {want}");
    }

    // Oracle-labeled export analyzed as a measured trace reproduces the ideal.
    let table = CStateTable::default_core();
    let trace = IdleIntervalTrace::from_sim(&r, Some(&table));
    let measured = &residency_from_trace(&trace)[0];
    let ideal = ideal_core_residency(&p, &table).unwrap();
    for (state, &want) in &ideal.entries {
        assert!((measured.get(state) - want).abs() < 0.01, "{state}");
    }
}

#[test]
fn cxmm1_package_run() {
    let t = Instant::now();
    let p = QueueParams::cxmm1(10, 2000.0, 100e-6).unwrap();
    let r = simulate(&SimConfig::new(p, 21, 1_000_000)).unwrap();
    eprintln!("cxmm1 10x1e6: {:?}", t.elapsed());
    let law = package_idle_law(&p).unwrap();
    assert!((r.package_idle_fraction() - law.idle_fraction).abs() < 0.005);
    let mean = r.mean_idle_secs(IdleSource::Package).unwrap();
    assert!((mean / 50e-6 - 1.0).abs() < 0.02, "{mean}");

    let emp = empirical_idle_distribution(&r, IdleSource::Package, &[0.0, 183e-6, f64::INFINITY]).unwrap();
    assert!((emp.fractions[0] - 0.0945).abs() < 0.01);
    assert!((emp.fractions[1] - 0.0129).abs() < 0.01);

    let pkg = CStateTable::default_package();
    let trace = IdleIntervalTrace::from_sim(&r, None);
    let measured = package_residency_from_trace(&trace, &pkg, None).unwrap();
    let ideal = ideal_package_residency(&p, &pkg).unwrap();
    for (state, &want) in &ideal.entries {
        assert!((measured.get(state) - want).abs() < 0.01, "{state}");
    }
}

#[test]
fn mmc_empty_occupancy() {
    let t = Instant::now();
    let p = QueueParams::mmc(10, 2000.0, 100e-6).unwrap();
    let r = simulate(&SimConfig::new(p, 5, 1_000_000)).unwrap();
    eprintln!("mmc 1e6: {:?}", t.elapsed());
    let p0 = erlang_p0(10, 2.0).unwrap();
    assert!((r.package_idle_fraction() - p0).abs() < 0.005, "{}", r.package_idle_fraction());
    let mean_busy: f64 = r.busy_fractions().iter().sum::<f64>() / 10.0;
    assert!((mean_busy - 0.2).abs() < 0.005);
}

#[test]
fn busy_fraction_converges() {
    let p = QueueParams::mm1(2000.0, 100e-6).unwrap();
    let err = |n: u64| -> f64 {
        // average absolute error over a few seeds
        (0..8).map(|s| (simulate(&SimConfig::new(p, s, n)).unwrap().busy_fraction(0) - 0.2).abs()).sum::<f64>() / 8.0
    };
    let small = err(10_000);
    let large = err(1_000_000);
    assert!(large < small, "{large} !< {small}");
}

#[test]
fn oracle_governor_beats_ewma_on_simulated_traces() {
    use idlegap::sim::{governor_replay, simulate_many, GovernorKind, GovernorPolicy};
    let p = QueueParams::mm1(2000.0, 100e-6).unwrap();
    let table = CStateTable::default_core();
    let oracle = GovernorPolicy::new(GovernorKind::Oracle, table.clone()).unwrap();
    let ewma = GovernorPolicy::new(GovernorKind::Ewma { alpha: 0.3 }, table).unwrap();
    let configs: Vec<_> = (0..8).map(|s| SimConfig::new(p, 100 + s, 50_000)).collect();
    for r in simulate_many(&configs) {
        let r = r.unwrap();
        let o = governor_replay(&r, &oracle, 0).unwrap();
        let e = governor_replay(&r, &ewma, 0).unwrap();
        assert!(o.report.get("C6") > e.report.get("C6"));
        assert!(e.mispredictions > o.mispredictions);
    }
}
