use idlegap::cstate::{ideal_core_residency, oracle_select, CStateTable, Scope};
use idlegap::interval::Interval;
use idlegap::queueing::{erlang_p0, idle_band_fraction, idle_tail_time_weighted, BandEnd, Level, QueueParams};
use idlegap::sim::{replay_intervals, GovernorKind, GovernorPolicy};
use idlegap::trace::{package_overlap, parse_interval_trace, residency_from_trace, IdleIntervalTrace, TraceInterval};
use proptest::prelude::*;

const STATES: [&str; 3] = ["C1", "C1E", "C6"];

/// Random trace with integer-microsecond endpoints.
fn trace_strategy(max_cores: usize, max_horizon_us: u64) -> impl Strategy<Value = IdleIntervalTrace> {
    (1..=max_cores, 10..=max_horizon_us).prop_flat_map(|(cores, horizon)| {
        let core = prop::collection::vec((0..horizon / 4 + 1, 1..horizon / 4 + 2, 0..STATES.len()), 0..12);
        prop::collection::vec(core, cores).prop_map(move |raw| {
            let intervals = raw
                .into_iter()
                .map(|steps| {
                    let mut t = 0u64;
                    let mut list = Vec::new();
                    for (gap, len, s) in steps {
                        let start = t + gap;
                        let end = (start + len).min(horizon);
                        if start >= end {
                            break;
                        }
                        list.push(TraceInterval {
                            start_ns: start * 1000,
                            end_ns: end * 1000,
                            state: STATES[s].into(),
                        });
                        t = end;
                    }
                    list
                })
                .collect();
            IdleIntervalTrace { horizon_ns: horizon * 1000, intervals }
        })
    })
}

/// Tick-by-tick oracle: a microsecond is package-idle when every core has an
/// interval covering it.
fn scan_overlap(trace: &IdleIntervalTrace, states: Option<&[String]>) -> Vec<Interval> {
    let horizon_us = trace.horizon_ns / 1000;
    let idle_at = |tick: u64| {
        trace.intervals.iter().all(|list| {
            list.iter().any(|iv| {
                iv.start_ns <= tick * 1000
                    && tick * 1000 < iv.end_ns
                    && states.is_none_or(|s| s.contains(&iv.state))
            })
        })
    };
    let mut out: Vec<Interval> = Vec::new();
    let mut run: Option<u64> = None;
    for tick in 0..=horizon_us {
        let idle = tick < horizon_us && idle_at(tick);
        match (idle, run) {
            (true, None) => run = Some(tick),
            (false, Some(s)) => {
                out.push(Interval::new(s * 1000, tick * 1000));
                run = None;
            }
            _ => {}
        }
    }
    out
}

fn params_strategy() -> impl Strategy<Value = QueueParams> {
    (1.0f64..1e5, 0.01f64..0.95, 1u32..=16)
        .prop_map(|(lambda, rho, cores)| QueueParams::cxmm1(cores, lambda, rho / lambda).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tail_is_normalized_and_monotone(rate in 1e-3f64..1e7, a in 0.0f64..1e-2, b in 0.0f64..1e-2) {
        prop_assert_eq!(idle_tail_time_weighted(rate, 0.0).unwrap(), 1.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(idle_tail_time_weighted(rate, lo).unwrap() >= idle_tail_time_weighted(rate, hi).unwrap());
        prop_assert!(idle_tail_time_weighted(rate, 1e6 / rate).unwrap() < 1e-300);
    }

    #[test]
    fn bands_partition_idle_time(p in params_strategy(), mut cuts in prop::collection::vec(1e-7f64..1e-1, 0..8)) {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![0.0];
        edges.extend(cuts);
        for level in [Level::Core, Level::Package] {
            let total: f64 = edges
                .iter()
                .enumerate()
                .map(|(i, &lo)| {
                    let hi = edges.get(i + 1).map_or(BandEnd::Unbounded, |&h| BandEnd::Finite(h));
                    idle_band_fraction(&p, level, lo, hi).unwrap()
                })
                .sum();
            let whole = idle_band_fraction(&p, level, 0.0, BandEnd::Unbounded).unwrap();
            prop_assert!((total - whole).abs() < 1e-9);
        }
    }

    #[test]
    fn erlang_is_a_probability(c in 1u32..64, frac in 0.001f64..0.999) {
        let a = frac * f64::from(c);
        let p0 = erlang_p0(c, a).unwrap();
        prop_assert!(p0 > 0.0 && p0 < 1.0);
        prop_assert_eq!(erlang_p0(1, frac).unwrap(), 1.0 - frac);
    }

    #[test]
    fn oracle_select_is_monotone(a in 0.0f64..2e-3, b in 0.0f64..2e-3) {
        let t = CStateTable::default_core();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r = |len| t.selection_rank(oracle_select(&t, len)).unwrap();
        prop_assert!(r(lo) <= r(hi));
    }

    #[test]
    fn ideal_reports_sum_to_one(p in params_strategy()) {
        let r = ideal_core_residency(&p, &CStateTable::default_core()).unwrap();
        prop_assert!(r.check(1e-6).is_ok());
    }

    #[test]
    fn collapsing_states_merges_residency(p in params_strategy()) {
        let full = CStateTable::new(Scope::Core, &[("C1", 0.0, 2e-6), ("C1E", 0.0, 20e-6), ("C6", 0.0, 600e-6)]).unwrap();
        let merged = CStateTable::new(Scope::Core, &[("C1", 0.0, 2e-6), ("C6", 0.0, 600e-6)]).unwrap();
        let a = ideal_core_residency(&p, &full).unwrap();
        let b = ideal_core_residency(&p, &merged).unwrap();
        prop_assert!((a.get("C1") + a.get("C1E") - b.get("C1")).abs() < 1e-12);
        prop_assert!((a.get("C6") - b.get("C6")).abs() < 1e-15);
    }

    #[test]
    fn overlap_matches_tick_scan(trace in trace_strategy(8, 400)) {
        prop_assert_eq!(package_overlap(&trace, None), scan_overlap(&trace, None));
        let c6 = vec!["C6".to_string()];
        prop_assert_eq!(package_overlap(&trace, Some(&c6)), scan_overlap(&trace, Some(&c6)));
    }

    #[test]
    fn overlap_ignores_core_order(trace in trace_strategy(6, 300), rot in 0usize..6) {
        let mut relabeled = trace.clone();
        let n = relabeled.intervals.len();
        relabeled.intervals.rotate_left(rot % n);
        prop_assert_eq!(package_overlap(&trace, None), package_overlap(&relabeled, None));
    }

    #[test]
    fn export_parse_round_trip(trace in trace_strategy(5, 10_000)) {
        let text = trace.to_csv();
        let back = parse_interval_trace(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn shuffled_rows_parse_identically(trace in trace_strategy(4, 5_000)) {
        let text = trace.to_csv();
        let mut lines: Vec<&str> = text.lines().collect();
        let (head, rows) = lines.split_at_mut(2);
        rows.reverse();
        let shuffled = format!("{}\n{}\n{}\n", head[0], head[1], rows.join("\n"));
        prop_assert_eq!(parse_interval_trace(shuffled.as_bytes()).unwrap(), trace);
    }

    #[test]
    fn trace_residency_sums_to_one(trace in trace_strategy(4, 5_000)) {
        for r in residency_from_trace(&trace) {
            prop_assert!((r.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn governor_reports_sum_to_one(
        lens in prop::collection::vec(1u64..3_000_000, 1..200),
        alpha in 0.01f64..1.0,
    ) {
        let mut t = 0;
        let list: Vec<Interval> = lens.iter().map(|&l| { let iv = Interval::new(t, t + l); t += l + 1000; iv }).collect();
        let table = CStateTable::default_core();
        let oracle = replay_intervals(&list, t, &GovernorPolicy::new(GovernorKind::Oracle, table.clone()).unwrap());
        let ewma = replay_intervals(&list, t, &GovernorPolicy::new(GovernorKind::Ewma { alpha }, table.clone()).unwrap());
        prop_assert!(oracle.report.check(1e-9).is_ok());
        prop_assert!(ewma.report.check(1e-9).is_ok());
    }
}

#[test]
fn package_idle_shrinks_with_cores() {
    for rho in [0.05, 0.2, 0.5, 0.9] {
        let frac = |c: u32| (1.0f64 - rho).powi(c as i32);
        for c in 1..32 {
            assert!(frac(c + 1) < frac(c));
        }
    }
}

#[test]
fn deep_state_grows_with_service_time() {
    let table = CStateTable::default_core();
    let mut last = 0.0;
    for service in [100e-6, 500e-6, 1e-3, 5e-3, 10e-3] {
        let p = QueueParams::mm1(0.2 / service, service).unwrap();
        let c6 = ideal_core_residency(&p, &table).unwrap().get("C6");
        assert!(c6 >= last);
        last = c6;
    }
}
