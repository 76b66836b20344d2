//! Random provision/release churn on a small ring, checked against an
//! occupancy recount built from the live lightpaths.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cdc_roadm::devices::{McsSpec, TransceiverSpec, WssSpec};
use cdc_roadm::network::{Lightpath, LightpathRequest, Link, Port, SpanParams, Topology};
use cdc_roadm::node::{build_node, NodeArchitecture, NodeConfig};
use cdc_roadm::spectrum::{BandName, Grid, SignalClass, SpacingVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NODES: usize = 4;

/// Bidirectional 4-node ring: degree 0 faces the next node, degree 1 the previous.
pub fn ring(arch: NodeArchitecture) -> Topology {
    let grid = Grid::c_and_l(150.0).unwrap();
    let mut topo = Topology::new(grid.clone());
    for i in 0..NODES {
        let mut cfg = NodeConfig::new(&format!("R{i}"), arch, 2, WssSpec::cl_1x9(), McsSpec::cl_16x8());
        // few client ports so that port blocking shows up too
        cfg.mcs_count_override = Some(2);
        topo.add_node(build_node(&cfg, &grid).unwrap());
    }
    let span = SpanParams::default();
    for i in 0..NODES {
        let j = (i + 1) % NODES;
        let (a, b) = (Port { node: i, degree: 0 }, Port { node: j, degree: 1 });
        let kind = |n: &str, f, t| {
            if arch == NodeArchitecture::COnly {
                Link::c_only(n, f, t, &span)
            } else {
                Link::c_plus_l(n, f, t, &span)
            }
        };
        topo.add_link(kind(&format!("{i}>{j}"), a, b)).unwrap();
        topo.add_link(kind(&format!("{j}>{i}"), b, a)).unwrap();
    }
    topo
}

/// What the links and MCS clients should look like given the live lightpaths.
pub fn recount(topo: &Topology, live: &BTreeMap<usize, Lightpath>) {
    let mut occ: BTreeSet<(usize, BandName, usize)> = BTreeSet::new();
    let mut add_clients = BTreeSet::new();
    let mut drop_clients = BTreeSet::new();
    for lp in live.values() {
        // continuity: consecutive links meet at a node, ends are the endpoints
        let links = topo.links();
        assert_eq!(links[lp.links[0]].from.node, lp.src.node);
        assert_eq!(links[*lp.links.last().unwrap()].to.node, lp.dst.node);
        for w in lp.links.windows(2) {
            assert_eq!(links[w[0]].to.node, links[w[1]].from.node);
        }
        assert_eq!(lp.span_count, lp.links.len());
        for &l in &lp.links {
            assert!(occ.insert((l, lp.band, lp.slot)), "slot {} reused on link {l}", lp.slot);
        }
        assert!(add_clients.insert((lp.src.node, lp.src.bank, lp.src.client)));
        assert!(drop_clients.insert((lp.dst.node, lp.dst.bank, lp.dst.client)));
    }
    let mut seen = BTreeSet::new();
    for (l, link) in topo.links().iter().enumerate() {
        for &band in &link.bands {
            for slot in link.occupancy(band).unwrap().used() {
                seen.insert((l, band, slot));
            }
        }
    }
    assert_eq!(seen, occ);
    for (n, node) in topo.nodes().iter().enumerate() {
        for bank in 0..node.banks().len() {
            for (side, set) in [
                (cdc_roadm::node::Side::Add, &add_clients),
                (cdc_roadm::node::Side::Drop, &drop_clients),
            ] {
                let mcs = node.mcs_state(bank, side).unwrap();
                for c in 0..mcs.client_ports() {
                    assert_eq!(!mcs.is_free(c), set.contains(&(n, bank, c)), "node {n} bank {bank} client {c}");
                }
            }
        }
    }
}

pub fn churn(arch: NodeArchitecture, seed: u64, ops: usize) -> (usize, usize) {
    let mut topo = ring(arch);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals = [
        SignalClass::dp16qam(800, SpacingVariant::Oif).unwrap(),
        SignalClass::dual_carrier_1t(),
    ];
    let mut live: BTreeMap<usize, Lightpath> = BTreeMap::new();
    let (mut ok, mut blocked) = (0, 0);
    for step in 0..ops {
        let release = !live.is_empty() && rng.random_bool(0.45);
        if release {
            let k = rng.random_range(0..live.len());
            let id = *live.keys().nth(k).unwrap();
            let got = topo.release(id).unwrap();
            assert_eq!(got, live.remove(&id).unwrap());
        } else {
            let src = rng.random_range(0..NODES);
            let dst = (src + rng.random_range(1..NODES)) % NODES;
            let band = if arch == NodeArchitecture::COnly || rng.random_bool(0.5) {
                BandName::C
            } else {
                BandName::L
            };
            let mut req = LightpathRequest::new(src, dst, signals[rng.random_range(0..2)].clone(), band);
            req.transceiver = TransceiverSpec::single_band(band);
            match topo.provision(&req) {
                Ok(lp) => {
                    ok += 1;
                    assert!(live.insert(lp.id, lp).is_none());
                }
                Err(e) => {
                    assert!(e.is_blocking(), "step {step}: {e}");
                    blocked += 1;
                }
            }
        }
        assert_eq!(topo.lightpaths().count(), live.len());
        if step % 16 == 0 || step + 1 == ops {
            recount(&topo, &live);
            topo.audit().unwrap();
        }
    }
    // drain everything: state must return to empty
    for id in live.keys().copied().collect::<Vec<_>>() {
        topo.release(id).unwrap();
    }
    live.clear();
    recount(&topo, &live);
    topo.audit().unwrap();
    for link in topo.links() {
        for &b in &link.bands {
            assert_eq!(link.occupancy(b).unwrap().count_used(), 0);
        }
    }
    (ok, blocked)
}

