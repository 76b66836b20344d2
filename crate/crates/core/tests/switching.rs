//! Switch-state machines against plain map models, and the contentionless
//! rule on an 8x8 node by exhaustive enumeration.

use std::collections::BTreeMap;

use cdc_roadm::devices::{ChannelKey, McsSpec, McsState, RoutePolicy, WssSpec, WssState};
use cdc_roadm::node::{build_node, NodeArchitecture, NodeConfig, Side};
use cdc_roadm::spectrum::{Band, BandName, Grid};
use cdc_roadm::Error;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum WssOp {
    Route(usize, BandName, usize),
    Release(BandName, usize),
}

fn wss_op() -> impl Strategy<Value = WssOp> {
    let band = prop_oneof![Just(BandName::C), Just(BandName::L)];
    prop_oneof![
        (0usize..10, band.clone(), 0usize..6).prop_map(|(p, b, s)| WssOp::Route(p, b, s)),
        (band, 0usize..6).prop_map(|(b, s)| WssOp::Release(b, s)),
    ]
}

#[derive(Debug, Clone)]
enum McsOp {
    Connect(usize, usize),
    Disconnect(usize),
}

fn mcs_op() -> impl Strategy<Value = McsOp> {
    prop_oneof![
        (0usize..9, 0usize..17).prop_map(|(c, d)| McsOp::Connect(c, d)),
        (0usize..9).prop_map(McsOp::Disconnect),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wss_strict_matches_model(ops in prop::collection::vec(wss_op(), 0..80)) {
        let slots = BTreeMap::from([(BandName::C, 5usize), (BandName::L, 5usize)]);
        let mut wss = WssState::new("w", 9, slots, RoutePolicy::Strict);
        let mut model: BTreeMap<(BandName, usize), usize> = BTreeMap::new();
        for op in ops {
            match op {
                WssOp::Route(port, band, slot) => {
                    let ch = ChannelKey { band, slot };
                    let r = wss.route(port, ch);
                    let valid = port < 9 && slot < 5;
                    match (valid, model.get(&(band, slot)).copied()) {
                        (false, _) => prop_assert!(r.is_err()),
                        // re-routing to the same port is a no-op
                        (true, Some(existing)) if existing == port => prop_assert!(r.is_ok()),
                        (true, Some(existing)) => {
                            prop_assert_eq!(
                                r,
                                Err(Error::Contention { device: "w".into(), channel: ch.to_string(), existing })
                            );
                        }
                        (true, None) => {
                            prop_assert!(r.is_ok());
                            model.insert((band, slot), port);
                        }
                    }
                }
                WssOp::Release(band, slot) => {
                    let got = wss.release(ChannelKey { band, slot });
                    prop_assert_eq!(got, model.remove(&(band, slot)));
                }
            }
            prop_assert_eq!(wss.len(), model.len());
            for (&(band, slot), &port) in &model {
                prop_assert_eq!(wss.port_of(ChannelKey { band, slot }), Some(port));
            }
        }
    }

    #[test]
    fn wss_replace_keeps_one_route(ops in prop::collection::vec((0usize..9, 0usize..4), 0..60)) {
        let slots = BTreeMap::from([(BandName::C, 4usize)]);
        let mut wss = WssState::new("w", 9, slots, RoutePolicy::Replace);
        let mut model = BTreeMap::new();
        for (port, slot) in ops {
            let ch = ChannelKey { band: BandName::C, slot };
            wss.route(port, ch).unwrap();
            model.insert(slot, port);
            prop_assert_eq!(wss.len(), model.len());
            prop_assert_eq!(wss.port_of(ch), Some(port));
        }
    }

    #[test]
    fn mcs_matches_model(ops in prop::collection::vec(mcs_op(), 0..80)) {
        let spec = McsSpec::cl_16x8();
        let mut mcs = McsState::new("m", &spec);
        let mut model: BTreeMap<usize, usize> = BTreeMap::new();
        for op in ops {
            match op {
                McsOp::Connect(c, d) => {
                    let r = mcs.connect(c, d);
                    if c >= 8 || d >= 16 {
                        prop_assert!(r.is_err());
                    } else if let Some(&degree) = model.get(&c) {
                        prop_assert_eq!(r, Err(Error::ClientBusy { device: "m".into(), client: c, degree }));
                    } else {
                        prop_assert!(r.is_ok());
                        model.insert(c, d);
                    }
                }
                McsOp::Disconnect(c) => {
                    prop_assert_eq!(mcs.disconnect(c), model.remove(&c));
                }
            }
            let got: BTreeMap<usize, usize> = mcs.connected().collect();
            prop_assert_eq!(&got, &model);
            for c in 0..8 {
                prop_assert_eq!(mcs.is_free(c), !model.contains_key(&c));
            }
        }
    }
}

fn eight_by_eight() -> cdc_roadm::node::Node {
    let grid = Grid::new(&[Band::c_default()], 50.0).unwrap();
    let wss = WssSpec::cl_1x9().with_ports("wss-c-1x20", 20, vec![Band::c_default()]);
    let mut mcs = McsSpec::cl_16x8();
    mcs.degree_ports = 8;
    mcs.bands = vec![Band::c_default()];
    let cfg = NodeConfig::new("X", NodeArchitecture::COnly, 8, wss, mcs);
    build_node(&cfg, &grid).unwrap()
}

#[test]
fn contentionless_exhaustive_8x8() {
    let ch = ChannelKey { band: BandName::C, slot: 17 };
    let other = ChannelKey { band: BandName::C, slot: 18 };
    for side in [Side::Add, Side::Drop] {
        for subset in 0u32..256 {
            let mut node = eight_by_eight();
            let held: Vec<usize> = (0..8).filter(|d| subset & (1 << d) != 0).collect();
            // same slot, same bank, distinct degrees: always admitted
            for &d in &held {
                node.occupy(side, ch, 0, d).unwrap();
            }
            for d in 0..8 {
                let r = node.contention_check(side, ch, 0, d);
                if held.contains(&d) {
                    assert!(matches!(r, Err(Error::Contention { .. })), "{side:?} {subset:#b} degree {d}");
                } else {
                    r.unwrap();
                }
                // other slot, other bank and other side are never affected
                node.contention_check(side, other, 0, d).unwrap();
                node.contention_check(side, ch, 1, d).unwrap();
                let flip = if side == Side::Add { Side::Drop } else { Side::Add };
                node.contention_check(flip, ch, 0, d).unwrap();
            }
        }
    }
}

#[test]
fn mcs_clients_fan_out_to_all_degrees() {
    // every client of an 8x8 MCS on a different degree at once
    let node = eight_by_eight();
    let mcs = node.mcs_state(0, Side::Drop).unwrap();
    assert_eq!((mcs.degree_ports(), mcs.client_ports()), (8, 8));
    let mut node = node;
    for c in 0..8 {
        node.mcs_connect(0, Side::Drop, c, 7 - c).unwrap();
    }
    for c in 0..8 {
        assert!(node.mcs_connect(0, Side::Drop, c, 0).is_err());
    }
}
