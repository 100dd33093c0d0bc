use digisub::codec::{encode_goose, encode_sv};
use digisub::grid::build_ieee14;
use digisub::harness::{
    enumerate_conditions, generate_dataset, inspect_frame, run_scenario, EventConfig, FaultConfig, GenOptions,
    ScenarioConfig,
};
use digisub::sim::{SimConfig, SystemSim};

fn subset(seed: u64) -> GenOptions {
    let mut o = GenOptions::new(seed);
    o.normal_samples = 3;
    // one condition of each attack kind and target end, two fault types
    o.conditions = Some(vec![0, 1, 2, 3, 1021, 1606]);
    o
}

fn csv_of(opts: &GenOptions) -> Vec<u8> {
    let g = generate_dataset(&build_ieee14(), opts).unwrap();
    let mut buf = Vec::new();
    g.dataset.write_csv(&mut buf).unwrap();
    buf
}

#[test]
fn same_seed_gives_identical_csv() {
    let a = csv_of(&subset(11));
    assert_eq!(a, csv_of(&subset(11)));
    assert_ne!(a, csv_of(&subset(12)));
}

#[test]
fn subset_labels_and_discriminators() {
    let net = build_ieee14();
    let conds = enumerate_conditions(&net);
    assert_eq!(conds.len(), 3200);
    let g = generate_dataset(&net, &subset(3)).unwrap();
    let counts = g.dataset.class_counts();
    assert_eq!(counts[0], 3);
    assert_eq!(counts[11], 6);
    assert_eq!(counts.iter().sum::<usize>(), 15);
    for (s, d) in g.dataset.samples.iter().zip(&g.diagnostics) {
        assert_eq!(s.label, d.label);
        match s.label {
            0 => assert!(d.first_open.is_none()),
            11 => {
                // attacks leave every bus voltage within the sag threshold
                assert!(d.deviation.iter().all(|&x| x < 0.008), "{:?}", d.deviation);
                assert!(d.first_open.is_some());
            }
            _ => {
                assert!(d.deviation.iter().any(|&x| x >= 0.008));
                let lat = d.trip_latency().unwrap();
                assert!((80..=240).contains(&lat), "latency {lat}");
            }
        }
    }
    let fault_conds: Vec<usize> = vec![0, 1, 2, 3, 1021, 1606];
    let faults: Vec<_> = g.dataset.samples.iter().filter(|s| (1..=10).contains(&s.label)).collect();
    for (s, &i) in faults.iter().zip(&fault_conds) {
        assert_eq!(s.label as u8, conds[i].fault.fault_type.class());
    }
}

fn fault_scenario(ohm: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::with_seed(2);
    cfg.duration_s = 1.5;
    cfg.event = EventConfig::Fault {
        start_s: 0.5,
        fault: FaultConfig {
            branch: 14,
            location: 0.5,
            impedance_ohm: ohm,
            fault_type: "B-gnd".into(),
        },
    };
    cfg
}

#[test]
fn fault_scenario_clears_within_three_cycles() {
    let out = run_scenario(&build_ieee14(), &fault_scenario(1.0), None).unwrap();
    assert!(out.verdict.passed(), "{}", out.verdict.to_text());
    assert!(out.detections.is_empty());
}

#[test]
fn undetectable_fault_fails_verdict() {
    let out = run_scenario(&build_ieee14(), &fault_scenario(1e6), None).unwrap();
    assert!(!out.verdict.passed());
    assert!(out.verdict.to_text().ends_with("VERDICT: FAIL\n"));
}

#[test]
fn attack_scenario_needs_a_model() {
    assert!(run_scenario(&build_ieee14(), &ScenarioConfig::reference_scenario(1), None).is_err());
}

#[test]
fn shipped_configs_parse() {
    for f in ["fdi_sv_bus8", "fault_line_7_8", "steady_state"] {
        let path = format!("{}/../../configs/{f}.toml", env!("CARGO_MANIFEST_DIR"));
        let cfg = ScenarioConfig::load(std::path::Path::new(&path)).unwrap();
        assert_eq!(ScenarioConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
    let path = format!("{}/../../configs/fdi_sv_bus8.toml", env!("CARGO_MANIFEST_DIR"));
    let shipped = ScenarioConfig::load(std::path::Path::new(&path)).unwrap();
    assert_eq!(shipped, ScenarioConfig::reference_scenario(1));
}

#[test]
fn inspect_goose_and_errors() {
    let mut sim = SystemSim::new(build_ieee14(), SimConfig::default()).unwrap();
    sim.run_until(5).unwrap();
    let g = sim.live_goose(8, 2).unwrap();
    let raw = encode_goose(&g).unwrap();
    let hex: String = raw.bytes.iter().map(|b| format!("{b:02x}")).collect();
    let text = inspect_frame(&hex).unwrap();
    assert!(text.contains(&format!("stNum: {}", g.st_num)), "{text}");
    assert!(text.contains(&format!("sqNum: {}", g.sq_num)), "{text}");

    // corrupt the Length field of an SV frame
    let mut sv = encode_sv(&sim.live_sv(8, 2).unwrap()).unwrap().bytes;
    let off = if sv[12..14] == [0x81, 0x00] { 18 } else { 14 } + 2;
    sv[off + 1] = sv[off + 1].wrapping_add(3);
    let hex: String = sv.iter().map(|b| format!("{b:02x}")).collect();
    let e = inspect_frame(&hex).unwrap_err().to_string();
    assert!(e.starts_with("length-field mismatch"), "{e}");

    let ipv4 = "ffffffffffff02000000000108004500001c";
    assert_eq!(inspect_frame(ipv4).unwrap_err().to_string(), "unsupported Ethertype 0x0800");
}
