//! Random SV and GOOSE frame generators.

use proptest::prelude::*;

use digisub::codec::{GooseEntry, GooseFrame, MacAddr, SvEntry, SvFrame, Timestamp, VlanTag};

pub fn mac() -> impl Strategy<Value = MacAddr> {
    any::<[u8; 6]>().prop_map(MacAddr)
}

pub fn vlan() -> impl Strategy<Value = Option<VlanTag>> {
    proptest::option::of((0u8..8, 0u16..4096).prop_map(|(priority, vid)| VlanTag { priority, vid }))
}

pub fn sv_frame() -> impl Strategy<Value = SvFrame> {
    (
        mac(),
        mac(),
        vlan(),
        any::<u16>(),
        "[A-Za-z0-9_/$]{0,130}",
        0u16..4800,
        any::<u32>(),
        any::<u8>(),
        any::<[(i32, u32); 8]>(),
    )
        .prop_map(|(dst, src, vlan, appid, sv_id, smp_cnt, conf_rev, smp_synch, d)| SvFrame {
            dst,
            src,
            vlan,
            appid,
            sv_id,
            smp_cnt,
            conf_rev,
            smp_synch,
            dataset: d.map(|(value, quality)| SvEntry { value, quality }),
        })
}

pub fn goose_frame() -> impl Strategy<Value = GooseFrame> {
    (
        (mac(), mac(), vlan(), any::<u16>()),
        ("[A-Za-z0-9_/$]{0,70}", "[A-Za-z0-9_/$]{0,70}", "[A-Za-z0-9_]{0,40}"),
        (any::<u32>(), any::<u32>(), 0u32..(1 << 24), any::<u8>()),
        (any::<u32>(), any::<u32>(), any::<bool>(), any::<u32>(), any::<bool>()),
        proptest::collection::vec((any::<bool>(), any::<bool>()), 0..40),
    )
        .prop_map(|((dst, src, vlan, appid), (gocb_ref, dat_set, go_id), (tal, secs, frac, q), (st, sq, test, rev, nds), data)| {
            GooseFrame {
                dst,
                src,
                vlan,
                appid,
                gocb_ref,
                time_allowed_to_live: tal,
                dat_set,
                go_id,
                t: Timestamp {
                    seconds: secs,
                    fraction: frac,
                    quality: q,
                },
                st_num: st,
                sq_num: sq,
                test,
                conf_rev: rev,
                nds_com: nds,
                all_data: data
                    .into_iter()
                    .map(|(trip, cb_closed)| GooseEntry { trip, cb_closed })
                    .collect(),
            }
        })
}
