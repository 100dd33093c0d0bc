use std::time::Instant;

use digisub::codec::{decode_frame, decode_sv, Frame};
use digisub::grid::{build_ieee14, FaultSpec, FaultType};
use digisub::sim::{Action, EventKind, SimConfig, SystemSim, SAMPLES_PER_CYCLE};

fn sim() -> SystemSim {
    SystemSim::new(build_ieee14(), SimConfig::default()).unwrap()
}

#[test]
fn quiescent_system_never_trips() {
    let mut s = sim();
    let t = Instant::now();
    s.run_until(10_000).unwrap();
    eprintln!("10k steps: {:?}", t.elapsed());
    assert_eq!(s.log().of_kind(EventKind::TripIssued).count(), 0);
    assert_eq!(s.log().of_kind(EventKind::CbOpened).count(), 0);
    assert_eq!(s.log().of_kind(EventKind::FrameDropped).count(), 0);
}

#[test]
fn smp_cnt_wraps_each_second() {
    let mut s = sim();
    let port = s.substation(8).unwrap().monitor_port();
    s.start_capture(8, port).unwrap();
    s.run_until(4800 + 10).unwrap();
    let frames = s.stop_capture(8).unwrap();
    let cnts: Vec<u16> = frames
        .iter()
        .filter_map(|f| decode_sv(f).ok())
        .filter(|f| f.sv_id == "S08MU02")
        .map(|f| f.smp_cnt)
        .collect();
    assert_eq!(cnts.len(), 4810);
    for (i, c) in cnts.iter().enumerate() {
        assert_eq!(*c as usize, i % 4800);
    }
    for w in frames.windows(2) {
        assert!(w[0].timestamp_us < w[1].timestamp_us);
    }
}

#[test]
fn goose_heartbeat_increments_sq_num() {
    let mut s = sim();
    let port = s.substation(4).unwrap().monitor_port();
    s.start_capture(4, port).unwrap();
    s.run_until(4800 * 2).unwrap();
    let frames = s.stop_capture(4).unwrap();
    let g: Vec<_> = frames
        .iter()
        .filter_map(|f| match decode_frame(f) {
            Ok(Frame::Goose(g)) if g.go_id == "S04IED01" => Some(g),
            _ => None,
        })
        .collect();
    assert!(g.len() >= 4, "{}", g.len());
    for (i, f) in g.iter().enumerate() {
        assert_eq!(f.st_num, 1);
        assert_eq!(f.sq_num as usize, i);
        assert_eq!(f.all_data, g[0].all_data);
    }
}

#[test]
fn line_fault_trips_both_ends_only() {
    let mut s = sim();
    let fault = FaultSpec {
        branch: 14,
        location: 0.5,
        impedance_ohm: 1.0,
        fault_type: FaultType::BG,
    };
    s.schedule(800, Action::ApplyFault(fault));
    let t = Instant::now();
    s.run_until(800 + 6 * SAMPLES_PER_CYCLE).unwrap();
    eprintln!("fault run: {:?}", t.elapsed());
    let trips: Vec<_> = s.log().of_kind(EventKind::TripIssued).collect();
    let names: Vec<&str> = trips.iter().map(|e| e.source.as_str()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
    assert!(names.contains(&"S07IED05") || names.iter().any(|n| n.starts_with("S07")));
    assert!(names.contains(&"S08IED02"));
    for e in &trips {
        let lat = e.sample - 800;
        assert!((SAMPLES_PER_CYCLE..3 * SAMPLES_PER_CYCLE).contains(&lat), "latency {lat}");
    }
    let opened: Vec<_> = s.log().of_kind(EventKind::CbOpened).collect();
    assert_eq!(opened.len(), 2);
    for (o, t) in opened.iter().zip(&trips) {
        assert_eq!(o.sample, t.sample + SAMPLES_PER_CYCLE);
        assert!(o.sample - 800 <= 240, "open after {} samples", o.sample - 800);
    }
    assert!(s.log().first(EventKind::FaultCleared).is_some());
}

#[test]
fn cied_takes_over_and_trips() {
    let mut s = sim();
    s.run_until(200).unwrap();
    assert!(s.activate_cied(8, 2).unwrap());
    assert!(!s.activate_cied(8, 2).unwrap());
    assert!(s.activate_cied(8, 1).is_err());
    let kinds: Vec<EventKind> = s.log().events().iter().rev().take(5).rev().map(|e| e.kind).collect();
    assert_eq!(
        kinds,
        [
            EventKind::PortDisabled,
            EventKind::PortDisabled,
            EventKind::PortEnabled,
            EventKind::PortEnabled,
            EventKind::CiedActivated
        ]
    );
    let fault = FaultSpec {
        branch: 14,
        location: 0.5,
        impedance_ohm: 1.0,
        fault_type: FaultType::BG,
    };
    s.schedule(4800, Action::ApplyFault(fault));
    s.run_until(4800 + 6 * SAMPLES_PER_CYCLE).unwrap();
    let cied_trip = s
        .log()
        .of_kind(EventKind::TripIssued)
        .find(|e| e.source == "S08CIED")
        .expect("CIED trip");
    assert!(cied_trip.sample - 4800 < 3 * SAMPLES_PER_CYCLE);
    let open = s.log().of_kind(EventKind::CbOpened).find(|e| e.source == "S08CB02").unwrap();
    assert!(open.sample - 4800 <= 3 * SAMPLES_PER_CYCLE);
    assert!(s.log().of_kind(EventKind::TripIssued).all(|e| e.source != "S08IED02"));
    // heartbeats of the isolated IED die at the switch
    assert!(s
        .log()
        .of_kind(EventKind::FrameDropped)
        .any(|e| e.detail.contains("IED02")));
}
