//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `HAGSIM_BLESS=1` to rewrite the golden traces.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use hagsim_core::apps::{App, WorkloadSpec};
use hagsim_core::atsss::{
    select_access, AccessState, AtsssPolicy, Decision, Evaluator, FlowMonitor, SteeringMode, Thresholds,
};
use hagsim_core::harness::{self, fig5, fig6, ExperimentConfig, LinkEventConfig};
use hagsim_core::mptransport::{lia_alpha, AdvertiseMode, CcEvent, LossKind, Side, SubflowState, TransportConfig};
use hagsim_core::netpath::{AccessId, Direction, LinkState, TopologyMode};
use hagsim_core::SimTime;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;

const MSS: u32 = 1440;
const TRANSFER: u64 = 100_000_000;

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn subflow(id: u16, cwnd: f64, rtt: SimTime) -> SubflowState {
    let mut s = SubflowState::new(id, AccessId::new(format!("p{id}")), MSS, &TransportConfig::default());
    s.cwnd = cwnd;
    s.srtt = Some(rtt);
    s.established = true;
    s
}

// ---------------------------------------------------------------- LIA / Reno

/// Textbook Reno, replayed against the congestion events the simulator logged.
#[derive(Debug)]
struct RenoOracle {
    cwnd: f64,
    ssthresh: f64,
    slow_start: bool,
    recovering: bool,
}

impl RenoOracle {
    fn new(initial_segments: u32) -> Self {
        RenoOracle {
            cwnd: (initial_segments * MSS) as f64,
            ssthresh: f64::INFINITY,
            slow_start: true,
            recovering: false,
        }
    }

    fn step(&mut self, ev: CcEvent) {
        let mss = MSS as f64;
        match ev {
            CcEvent::Ack {
                acked_bytes,
                ends_recovery,
            } => {
                if ends_recovery && self.recovering {
                    self.recovering = false;
                }
                if self.recovering {
                    return;
                }
                if self.slow_start {
                    self.cwnd += acked_bytes as f64;
                    if self.cwnd >= self.ssthresh {
                        self.slow_start = false;
                    }
                } else {
                    self.cwnd += acked_bytes as f64 * mss / self.cwnd;
                }
            }
            CcEvent::Loss(LossKind::TripleDupack) => {
                self.ssthresh = (self.cwnd / 2.0).max(2.0 * mss);
                self.cwnd = self.ssthresh;
                self.slow_start = false;
                self.recovering = true;
            }
            CcEvent::Loss(LossKind::Rto) => {
                self.ssthresh = (self.cwnd / 2.0).max(2.0 * mss);
                self.cwnd = 2.0 * mss;
                self.slow_start = true;
                self.recovering = false;
            }
        }
    }
}

fn criterion_lia_reno() -> Outcome {
    let one = lia_alpha(&[subflow(0, 23.0 * MSS as f64, SimTime::from_millis(37))]);
    if one != 1.0 {
        return Err(format!("single subflow alpha = {one}"));
    }
    for (segs, ms) in [(10.0, 13), (4.0, 53), (117.5, 80), (2.0, 1)] {
        let rtt = SimTime::from_millis(ms);
        let a = lia_alpha(&[subflow(0, segs * MSS as f64, rtt), subflow(1, segs * MSS as f64, rtt)]);
        if (a - 0.5).abs() > 1e-12 {
            return Err(format!("symmetric alpha = {a} for cwnd {segs} segs, rtt {ms} ms"));
        }
    }

    let (mut events, mut losses, mut timeouts) = (0, 0, 0);
    for (loss, seed) in [(0.01, 11), (0.08, 5)] {
        let mut cfg = ExperimentConfig::testbed().with_accesses(&["fbb"]);
        cfg.accesses[0].downlink.loss = loss;
        cfg.workloads = vec![WorkloadSpec {
            transfer_bytes: 3_000_000,
            ..WorkloadSpec::new(App::Scp, Direction::Downlink)
        }];
        cfg.record_cc = true;
        cfg.seed = seed;
        let out = harness::run(&cfg).map_err(|e| e.to_string())?;
        let log: Vec<_> = out
            .cc_log
            .iter()
            .filter(|e| e.side == Side::Server && e.record.subflow_id == 0)
            .map(|e| e.record)
            .collect();
        let mut oracle = RenoOracle::new(cfg.transport.initial_cwnd_segments);
        for (i, r) in log.iter().enumerate() {
            oracle.step(r.event);
            match r.event {
                CcEvent::Loss(LossKind::TripleDupack) => losses += 1,
                CcEvent::Loss(LossKind::Rto) => timeouts += 1,
                _ => {}
            }
            if oracle.cwnd != r.cwnd || oracle.ssthresh != r.ssthresh {
                return Err(format!(
                    "loss {loss}, event {i} at {:?} ({:?}): simulator cwnd {} ssthresh {}, oracle cwnd {} ssthresh {}",
                    r.at, r.event, r.cwnd, r.ssthresh, oracle.cwnd, oracle.ssthresh
                ));
            }
        }
        events += log.len();
    }
    if losses < 5 || timeouts == 0 {
        return Err(format!(
            "{losses} fast retransmits, {timeouts} timeouts: trajectory check too weak"
        ));
    }
    Ok(format!(
        "alpha 1 and 0.5 exact; {events} cwnd events ({losses} fast-retransmit, {timeouts} timeout) match Reno"
    ))
}

fn criterion_alpha_oracle() -> Outcome {
    let cwnd = 10 * MSS;
    let got = lia_alpha(&[
        subflow(0, cwnd as f64, SimTime::from_millis(13)),
        subflow(1, cwnd as f64, SimTime::from_millis(53)),
    ]);
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let c = q(cwnd as i64, 1);
    let (r1, r2) = (q(13_000, 1), q(53_000, 1));
    let total = &c + &c;
    let best = [&c / (&r1 * &r1), &c / (&r2 * &r2)].into_iter().max().expect("two");
    let sum = &c / &r1 + &c / &r2;
    let exact = total * best / (&sum * &sum);
    let exact_f = exact.to_f64().ok_or("alpha not representable")?;
    if (got - exact_f).abs() > 1e-12 {
        return Err(format!("alpha {got} vs exact {exact} = {exact_f}"));
    }
    if (got - 1.2897).abs() > 1e-4 {
        return Err(format!("alpha {got} not within 1e-4 of 1.2897"));
    }
    Ok(format!("alpha {got:.6} = {exact} exactly"))
}

// ---------------------------------------------------------------- Fig 5 / 6

fn criterion_fig5() -> Outcome {
    let base = ExperimentConfig::testbed();
    let t0 = Instant::now();
    let dl = fig5(&base, Direction::Downlink, App::Scp).map_err(|e| e.to_string())?;
    let dl_time = t0.elapsed();
    let t1 = Instant::now();
    let ul = fig5(&base, Direction::Uplink, App::Scp).map_err(|e| e.to_string())?;
    let ul_time = t1.elapsed();

    let mut errs = Vec::new();
    for r in dl.runs.iter().chain(&ul.runs) {
        if !r.summary.complete {
            errs.push(format!("{} run incomplete", r.label));
        }
    }
    if dl.utilization.len() != 2 {
        errs.push(format!("expected two utilization ratios, got {:?}", dl.utilization));
    }
    for (a, &u) in &dl.utilization {
        if !(0.70..=0.97).contains(&u) || u >= 1.0 {
            errs.push(format!("downlink {a} utilization {u:.3} outside [0.70, 0.97]"));
        }
    }
    let (dl_agg, ul_agg) = (dl.fmc_aggregate_mbps, ul.fmc_aggregate_mbps);
    if !(80.0 * 0.85..=80.0 * 1.15).contains(&dl_agg) {
        errs.push(format!("downlink aggregate {dl_agg:.2} Mbps outside 80 ±15%"));
    }
    if !(18.0 * 0.85..=18.0 * 1.15).contains(&ul_agg) {
        errs.push(format!("uplink aggregate {ul_agg:.2} Mbps outside 18 ±15%"));
    }
    let limit = Duration::from_secs(60);
    if dl_time >= limit || ul_time >= limit {
        errs.push(format!("too slow: dl {dl_time:?}, ul {ul_time:?}"));
    }
    let util: Vec<String> = dl.utilization.iter().map(|(a, u)| format!("{a} {u:.3}")).collect();
    let detail = format!(
        "dl utilization [{}], dl aggregate {dl_agg:.2} Mbps, ul aggregate {ul_agg:.2} Mbps, wall {:.1}s/{:.1}s",
        util.join(", "),
        dl_time.as_secs_f64(),
        ul_time.as_secs_f64()
    );
    if errs.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", errs.join("; ")))
    }
}

fn criterion_fig6() -> Outcome {
    let base = ExperimentConfig::testbed();
    let mut reports = Vec::new();
    for app in [App::Scp, App::Wget, App::Iperf] {
        reports.push((app, fig6(&base, Direction::Downlink, app).map_err(|e| e.to_string())?));
    }
    let mut errs = Vec::new();
    let scp = &reports[0].1;
    let session = |r: &harness::Fig6Report, mode: &str| r.session_setup(mode);
    for (mode, target) in [("fbb-only", 400.0), ("mbb-only", 900.0), ("fmc", 300.0)] {
        match session(scp, mode) {
            Some(v) if (v - target).abs() <= 0.25 * target => {}
            other => errs.push(format!("scp {mode} setup {other:?} ms, want {target} ±25%")),
        }
    }
    for (app, r) in &reports {
        for (link, standalone_mode) in [("fbb", "fbb-only"), ("mbb", "mbb-only")] {
            let fmc = r.setup("fmc").get(link).copied().flatten();
            let alone = r.setup(standalone_mode).get(link).copied().flatten();
            match (fmc, alone) {
                (Some(f), Some(s)) if f <= s => {}
                _ => errs.push(format!(
                    "{} {link}: fmc setup {fmc:?} vs standalone {alone:?}",
                    app.as_str()
                )),
            }
        }
        if *app != App::Scp {
            for mode in ["fbb-only", "mbb-only", "fmc"] {
                match (session(r, mode), session(scp, mode)) {
                    (Some(x), Some(s)) if x < s => {}
                    (x, s) => errs.push(format!("{} {mode}: setup {x:?} not below scp {s:?}", app.as_str())),
                }
            }
        }
    }
    let fmt = |m: &str| session(scp, m).map_or("none".into(), |v| format!("{v:.1}"));
    let detail = format!(
        "scp setup fbb-only {} ms, mbb-only {} ms, fmc {} ms",
        fmt("fbb-only"),
        fmt("mbb-only"),
        fmt("fmc")
    );
    if errs.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", errs.join("; ")))
    }
}

// ---------------------------------------------------------------- failover

#[derive(Clone, Debug)]
struct KillCase {
    seed: u64,
    topology: TopologyMode,
    /// 0: fbb, 1: mbb, 2: both (always restored).
    victims: u8,
    kill_at_ms: f64,
    restore_after_ms: Option<f64>,
}

fn kill_case() -> impl Strategy<Value = KillCase> {
    (
        any::<u64>(),
        prop_oneof![
            Just(TopologyMode::EndpointMptcp),
            Just(TopologyMode::Hag),
            Just(TopologyMode::ConvergedCore)
        ],
        0u8..3,
        0.0f64..15_000.0,
        proptest::option::of(50.0f64..8_000.0),
    )
        .prop_map(|(seed, topology, victims, kill_at_ms, restore)| KillCase {
            seed,
            topology,
            victims,
            kill_at_ms,
            restore_after_ms: if victims == 2 {
                Some(restore.unwrap_or(500.0))
            } else {
                restore
            },
        })
}

fn check_kill_case(c: &KillCase) -> Result<(), String> {
    let mut cfg = ExperimentConfig::testbed();
    cfg.topology = c.topology;
    cfg.seed = c.seed;
    if cfg.policies.is_none() {
        cfg.policies = Some(ExperimentConfig::default_policies());
    }
    for a in &mut cfg.accesses {
        a.downlink.loss = 0.0005;
        a.uplink.loss = 0.0005;
    }
    let victims: &[&str] = match c.victims {
        0 => &["fbb"],
        1 => &["mbb"],
        _ => &["fbb", "mbb"],
    };
    for v in victims {
        cfg.link_events.push(LinkEventConfig {
            at_ms: c.kill_at_ms,
            access: v.to_string(),
            state: LinkState::Down,
        });
        if let Some(r) = c.restore_after_ms {
            cfg.link_events.push(LinkEventConfig {
                at_ms: c.kill_at_ms + r,
                access: v.to_string(),
                state: LinkState::Up,
            });
        }
    }
    let out = harness::run(&cfg).map_err(|e| e.to_string())?;
    let o = &out.outcomes[0];
    let f = &out.summary.flows[0];
    if o.rejected || o.completed_at.is_none() {
        return Err(format!("flow did not complete (rejected {})", o.rejected));
    }
    if o.app_delivered != TRANSFER || f.delivered_bytes != TRANSFER {
        return Err(format!(
            "delivered {} (trace {}) of {TRANSFER}",
            o.app_delivered, f.delivered_bytes
        ));
    }
    if !o.streams_intact {
        return Err("application saw a corrupted or duplicated byte stream".into());
    }
    Ok(())
}

fn criterion_failover() -> Outcome {
    const CASES: u32 = 100;
    let mut r = runner(CASES);
    let strategy = kill_case();
    let cases: Vec<KillCase> = (0..CASES)
        .map(|_| strategy.new_tree(&mut r).expect("strategy").current())
        .collect();
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let failures: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .chunks(cases.len().div_ceil(workers))
            .map(|chunk| {
                s.spawn(move || {
                    chunk
                        .iter()
                        .filter_map(|c| check_kill_case(c).err().map(|e| format!("{c:?}: {e}")))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    });
    if failures.is_empty() {
        Ok(format!(
            "{CASES} random kill/restore cases delivered exactly {TRANSFER} bytes in order"
        ))
    } else {
        Err(format!(
            "{} of {CASES} cases failed, first: {}",
            failures.len(),
            failures[0]
        ))
    }
}

// ---------------------------------------------------------------- determinism

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden_scenarios() -> Vec<(&'static str, ExperimentConfig)> {
    let base = ExperimentConfig::testbed();

    let mut hag = base.clone();
    hag.workloads = vec![WorkloadSpec {
        transfer_bytes: 300_000,
        ..WorkloadSpec::new(App::Scp, Direction::Downlink)
    }];

    let mut conv = base.clone();
    conv.topology = TopologyMode::ConvergedCore;
    conv.transport.advertise_mode = AdvertiseMode::Fast;
    conv.seed = 3;
    conv.workloads = vec![WorkloadSpec {
        transfer_bytes: 200_000,
        ..WorkloadSpec::new(App::Wget, Direction::Uplink)
    }];

    let mut lossy = base;
    lossy.topology = TopologyMode::EndpointMptcp;
    lossy.seed = 7;
    lossy.accesses[0].downlink.loss = 0.01;
    lossy.accesses[1].downlink.loss = 0.01;
    lossy.workloads = vec![WorkloadSpec {
        transfer_bytes: 300_000,
        ..WorkloadSpec::new(App::Iperf, Direction::Downlink)
    }];
    lossy.link_events = vec![
        LinkEventConfig {
            at_ms: 120.0,
            access: "fbb".into(),
            state: LinkState::Down,
        },
        LinkEventConfig {
            at_ms: 260.0,
            access: "fbb".into(),
            state: LinkState::Up,
        },
    ];

    vec![
        ("hag_scp_dl", hag),
        ("converged_wget_ul", conv),
        ("endpoint_iperf_failover", lossy),
    ]
}

fn trace_bytes(cfg: &ExperimentConfig) -> Result<Vec<u8>, String> {
    let out = harness::run(cfg).map_err(|e| e.to_string())?;
    if !out.summary.complete {
        return Err("scenario did not complete".into());
    }
    let mut buf = Vec::new();
    out.trace.write_csv(&mut buf).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn criterion_determinism() -> Outcome {
    let bless = std::env::var_os("HAGSIM_BLESS").is_some();
    let mut notes = Vec::new();
    for (name, cfg) in golden_scenarios() {
        let a = trace_bytes(&cfg)?;
        let b = trace_bytes(&cfg)?;
        if a != b {
            return Err(format!("{name}: two runs with seed {} differ", cfg.seed));
        }
        let path = golden_dir().join(format!("{name}.csv"));
        if bless {
            std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &a).map_err(|e| e.to_string())?;
        }
        let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if golden != a {
            let line = golden
                .split(|&c| c == b'\n')
                .zip(a.split(|&c| c == b'\n'))
                .position(|(x, y)| x != y)
                .map_or("length".to_string(), |i| format!("line {}", i + 1));
            return Err(format!("{name}: trace differs from golden file at {line}"));
        }
        notes.push(format!("{name} ({} lines)", a.iter().filter(|&&c| c == b'\n').count()));
    }
    Ok(format!("byte-identical traces: {}", notes.join(", ")))
}

// ---------------------------------------------------------------- ATSSS

const IDS: [&str; 3] = ["fbb", "mbb", "sat"];

fn thresholds() -> impl Strategy<Value = Thresholds> {
    (
        proptest::option::of(1e5f64..1e8),
        proptest::option::of(1_000u64..200_000),
        proptest::option::of(0.0f64..0.2),
    )
        .prop_map(|(tp, rtt, loss)| Thresholds {
            min_throughput_bps: tp,
            max_rtt: rtt.map(SimTime::from_micros),
            max_loss_rate: loss,
        })
}

fn policy() -> impl Strategy<Value = AtsssPolicy> {
    (
        prop_oneof![
            Just(SteeringMode::Steer),
            Just(SteeringMode::Switch),
            Just(SteeringMode::Split)
        ],
        Just(IDS.to_vec()).prop_shuffle(),
        1usize..=3,
        thresholds(),
        0.0f64..0.5,
    )
        .prop_map(|(mode, order, n, thresholds, hysteresis)| AtsssPolicy {
            service_class: "default".into(),
            mode,
            access_priority: order[..n].iter().map(|s| AccessId::new(*s)).collect(),
            thresholds,
            hysteresis,
        })
}

fn access_states() -> impl Strategy<Value = Vec<AccessState>> {
    let one = (
        prop::bool::weighted(0.8),
        proptest::option::of(1_000u64..200_000),
        proptest::option::of(1e5f64..1e8),
        proptest::option::of(0.0f64..0.2),
    );
    proptest::collection::vec(one, 3).prop_map(|v| {
        v.into_iter()
            .zip(IDS)
            .map(|((up, rtt, tp, loss), id)| AccessState {
                access_id: AccessId::new(id),
                up,
                measured_rtt: rtt.map(SimTime::from_micros),
                measured_throughput_bps: tp,
                measured_loss_rate: loss,
            })
            .collect()
    })
}

/// Independent statement of "this access may carry the flow right now".
fn admissible(t: &Thresholds, a: &AccessState) -> bool {
    let rtt_ok = match (t.max_rtt, a.measured_rtt) {
        (Some(max), Some(m)) => m <= max,
        _ => true,
    };
    let tp_ok = match (t.min_throughput_bps, a.measured_throughput_bps) {
        (Some(min), Some(m)) => m >= min,
        _ => true,
    };
    let loss_ok = match (t.max_loss_rate, a.measured_loss_rate) {
        (Some(max), Some(m)) => m <= max,
        _ => true,
    };
    a.up && rtt_ok && tp_ok && loss_ok
}

fn newly_assigned(d: &Decision) -> Vec<AccessId> {
    match d {
        Decision::Stay => Vec::new(),
        Decision::Switch(a) => vec![a.clone()],
        Decision::StartSplit(v) | Decision::StopSplit(v) => v.clone(),
    }
}

fn criterion_atsss() -> Outcome {
    const CASES: u32 = 2000;
    let window = SimTime::from_secs(1);
    let step = SimTime::from_millis(250);
    let mut r = runner(CASES);
    let case = (policy(), proptest::collection::vec(access_states(), 1..40));
    let decisions = std::cell::Cell::new(0u64);
    r.run(&case, |(policy, rounds)| {
        let first = &rounds[0];
        if let Ok(sel) = select_access(&policy, first) {
            for id in &sel {
                let a = first.iter().find(|a| &a.access_id == id).expect("known");
                prop_assert!(
                    admissible(&policy.thresholds, a),
                    "select_access chose {id:?} in {first:?}"
                );
            }
        }
        let initial = select_access(&policy, first).unwrap_or_else(|_| vec![policy.access_priority[0].clone()]);
        let ids: Vec<AccessId> = IDS.iter().map(|s| AccessId::new(*s)).collect();
        let monitor = FlowMonitor::new(0, ids, window, SimTime::ZERO);
        let mut ev = Evaluator::new(window, initial);
        let mut now = SimTime::ZERO;
        for states in &rounds {
            now += step;
            let d = ev.evaluate(now, &monitor, &policy, states);
            for id in newly_assigned(&d) {
                let a = states.iter().find(|a| a.access_id == id).expect("known");
                prop_assert!(
                    admissible(&policy.thresholds, a),
                    "{d:?} at {now:?} assigned {id:?} violating {:?}: {a:?}",
                    policy.thresholds
                );
            }
            if d != Decision::Stay {
                decisions.set(decisions.get() + 1);
            }
        }
        Ok(())
    })
    .map_err(|e| format!("threshold soundness: {e}"))?;

    const OSC: u32 = 1000;
    let mut r = runner(OSC);
    let osc = (
        2_000u64..100_000,
        0.05f64..0.5,
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20..200),
        1u64..1000,
    );
    let worst = std::cell::Cell::new(0);
    r.run(&osc, |(max_rtt_us, h, wiggle, step_ms)| {
        let policy = AtsssPolicy {
            service_class: "default".into(),
            mode: SteeringMode::Switch,
            access_priority: vec![AccessId::new("fbb"), AccessId::new("mbb")],
            thresholds: Thresholds {
                max_rtt: Some(SimTime::from_micros(max_rtt_us)),
                ..Thresholds::default()
            },
            hysteresis: h,
        };
        let ids = vec![AccessId::new("fbb"), AccessId::new("mbb")];
        let monitor = FlowMonitor::new(0, ids.clone(), window, SimTime::ZERO);
        let mut ev = Evaluator::new(window, vec![ids[0].clone()]);
        let in_band = |x: f64| {
            // Strictly inside [max(1-h), max(1+h)].
            let us = max_rtt_us as f64 * (1.0 + 0.999 * h * x);
            SimTime::from_micros(us.round() as u64)
        };
        let mut switches = 0;
        let mut now = SimTime::ZERO;
        for &(x, y) in &wiggle {
            now += SimTime::from_millis(step_ms);
            let states: Vec<AccessState> = [(x, &ids[0]), (y, &ids[1])]
                .into_iter()
                .map(|(w, id)| AccessState {
                    measured_rtt: Some(in_band(w)),
                    ..AccessState::unmeasured(id.clone(), true)
                })
                .collect();
            if matches!(ev.evaluate(now, &monitor, &policy, &states), Decision::Switch(_)) {
                switches += 1;
            }
        }
        worst.set(worst.get().max(switches));
        prop_assert!(switches <= 1, "{switches} switches under in-band oscillation");
        Ok(())
    })
    .map_err(|e| format!("hysteresis: {e}"))?;

    Ok(format!(
        "{CASES} policy/state cases ({} decisions) all admissible; {OSC} oscillation cases, at most {} switch",
        decisions.get(),
        worst.get()
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("1 lia-reno-trajectory", criterion_lia_reno),
        ("2 lia-alpha-asymmetric", criterion_alpha_oracle),
        ("3 fig5-utilization", criterion_fig5),
        ("4 fig6-setup-times", criterion_fig6),
        ("5 failover-conservation", criterion_failover),
        ("6 trace-determinism", criterion_determinism),
        ("7 atsss-threshold-soundness", criterion_atsss),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        match f() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
