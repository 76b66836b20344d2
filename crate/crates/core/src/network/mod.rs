//! Topology of ROADM nodes and emulated links, and CDC lightpath provisioning.
//!
//! Links are directed: one fiber from an add WSS of one node to the drop WSS
//! of another. Provisioning picks the hop-count shortest route, the lowest
//! free slot that is continuous along it, and the lowest free MCS clients.

pub mod scenario;
pub mod slots;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::devices::{AttenuatorSpec, ChannelKey, CouplerKind, CouplerSpec, EdfaSpec, McsSpec, TransceiverSpec, WssSpec};
use crate::error::{Error, Result};
use crate::node::{DropSide, Node, Side};
use crate::spectrum::{superchannel_centers, BandName, Grid, SignalClass};

pub use slots::SlotMap;

/// Where a fixed per-subchannel power is enforced along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PowerPoint {
    /// Input of the destination node.
    A,
    /// Input of an intermediate node.
    B,
    /// Launch into a link.
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    Transmitter,
    Receiver,
    Mcs { spec: McsSpec },
    Wss { spec: WssSpec, port: usize },
    Splitter { ports: usize },
    Coupler { loss_db: f64 },
    Attenuator { loss_db: f64 },
    Amplifier { stage: Vec<EdfaSpec> },
    PowerPoint { point: PowerPoint },
    /// Position between the drop WSS and drop MCS where an optional
    /// amplifier can be inserted.
    InlineAmpSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathElement {
    pub id: String,
    #[serde(flatten)]
    pub kind: ElementKind,
}

impl PathElement {
    fn new(id: impl Into<String>, kind: ElementKind) -> Self {
        PathElement { id: id.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkElement {
    Attenuator(AttenuatorSpec),
    Coupler(CouplerSpec),
    /// Parallel single-band amplifiers; a signal passes the one for its band.
    Amplifiers(Vec<EdfaSpec>),
}

/// Element parameters of an emulated fiber span.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanParams {
    pub attenuation_db: f64,
    pub coupler_loss_db: f64,
    pub edfa_c: EdfaSpec,
    pub edfa_l: EdfaSpec,
}

impl Default for SpanParams {
    fn default() -> Self {
        SpanParams {
            attenuation_db: 20.0,
            coupler_loss_db: 0.5,
            edfa_c: EdfaSpec::new("edfa-C", BandName::C, 20.0),
            edfa_l: EdfaSpec::new("edfa-L", BandName::L, 20.0),
        }
    }
}

impl SpanParams {
    fn attenuator(&self, link: &str) -> LinkElement {
        LinkElement::Attenuator(AttenuatorSpec {
            name: format!("{link}/fiber"),
            loss_db: self.attenuation_db,
        })
    }

    fn amp(&self, link: &str, spec: &EdfaSpec) -> EdfaSpec {
        EdfaSpec {
            name: format!("{link}/{}", spec.name),
            ..spec.clone()
        }
    }
}

/// Attachment point of a link end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Port {
    pub node: usize,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub from: Port,
    pub to: Port,
    pub bands: Vec<BandName>,
    pub elements: Vec<LinkElement>,
    occupancy: BTreeMap<BandName, SlotMap>,
}

impl Link {
    pub fn new(name: &str, from: Port, to: Port, bands: Vec<BandName>, elements: Vec<LinkElement>) -> Self {
        Link {
            name: name.into(),
            from,
            to,
            bands,
            elements,
            occupancy: BTreeMap::new(),
        }
    }

    /// Attenuator followed by per-band EDFAs between a demux and a mux coupler.
    pub fn c_plus_l(name: &str, from: Port, to: Port, span: &SpanParams) -> Self {
        let coupler = |suffix: &str, kind| {
            LinkElement::Coupler(CouplerSpec {
                name: format!("{name}/{suffix}"),
                kind,
                loss_per_pass_db: span.coupler_loss_db,
            })
        };
        Link::new(
            name,
            from,
            to,
            BandName::ALL.to_vec(),
            vec![
                span.attenuator(name),
                coupler("demux", CouplerKind::Demux),
                LinkElement::Amplifiers(vec![span.amp(name, &span.edfa_c), span.amp(name, &span.edfa_l)]),
                coupler("mux", CouplerKind::Mux),
            ],
        )
    }

    /// Attenuator followed by a C-band EDFA.
    pub fn c_only(name: &str, from: Port, to: Port, span: &SpanParams) -> Self {
        Link::new(
            name,
            from,
            to,
            vec![BandName::C],
            vec![span.attenuator(name), LinkElement::Amplifiers(vec![span.amp(name, &span.edfa_c)])],
        )
    }

    pub fn supports(&self, band: BandName) -> bool {
        self.bands.contains(&band)
    }

    pub fn attenuation_db(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                LinkElement::Attenuator(a) => a.loss_db,
                _ => 0.0,
            })
            .sum()
    }

    pub fn occupancy(&self, band: BandName) -> Option<&SlotMap> {
        self.occupancy.get(&band)
    }

    fn validate(&self) -> Result<()> {
        for e in &self.elements {
            match e {
                LinkElement::Attenuator(a) => a.validate()?,
                LinkElement::Coupler(c) => c.validate()?,
                LinkElement::Amplifiers(amps) => {
                    for amp in amps {
                        amp.validate()?;
                    }
                    for band in &self.bands {
                        if !amps.iter().any(|a| a.band == *band) {
                            return Err(Error::InvalidSpec {
                                device: self.name.clone(),
                                reason: format!("no amplifier for the {band} band"),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A transceiver position on a node: MCS bank and client index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Endpoint {
    pub node: usize,
    pub bank: usize,
    pub client: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lightpath {
    pub id: usize,
    pub signal: SignalClass,
    pub band: BandName,
    pub slot: usize,
    pub slot_center_thz: f64,
    pub subcarriers_thz: Vec<f64>,
    pub src: Endpoint,
    pub dst: Endpoint,
    pub links: Vec<usize>,
    pub span_count: usize,
    pub elements: Vec<PathElement>,
    pub transceiver: TransceiverSpec,
}

impl Lightpath {
    pub fn channel(&self) -> ChannelKey {
        ChannelKey {
            band: self.band,
            slot: self.slot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotChoice {
    #[default]
    FirstFit,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RouteChoice {
    #[default]
    Shortest,
    Links(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct LightpathRequest {
    pub src: usize,
    pub dst: usize,
    pub signal: SignalClass,
    pub band: BandName,
    pub transceiver: TransceiverSpec,
    pub slot: SlotChoice,
    pub route: RouteChoice,
    /// Replaces the layout of subcarriers around the slot center.
    pub subcarriers_thz: Option<Vec<f64>>,
}

impl LightpathRequest {
    pub fn new(src: usize, dst: usize, signal: SignalClass, band: BandName) -> Self {
        LightpathRequest {
            src,
            dst,
            signal,
            band,
            transceiver: TransceiverSpec::single_band(band),
            slot: SlotChoice::FirstFit,
            route: RouteChoice::Shortest,
            subcarriers_thz: None,
        }
    }
}

/// Node-level hop: the degree a path enters and leaves by.
#[derive(Debug, Clone, Copy)]
struct Hop {
    node: usize,
    chain: usize,
    input: Option<usize>,
    output: Option<usize>,
}

/// Everything a lightpath holds, so release can undo it exactly.
#[derive(Debug, Clone, Default)]
struct Reservation {
    links: Vec<usize>,
    wss: Vec<(usize, usize, usize, Side)>,
    mcs: Vec<(usize, usize, Side, usize)>,
    active: Vec<(usize, Side, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Topology {
    grid: Grid,
    nodes: Vec<Node>,
    links: Vec<Link>,
    lightpaths: BTreeMap<usize, (Lightpath, Reservation)>,
    next_id: usize,
}

impl Topology {
    pub fn new(grid: Grid) -> Self {
        Topology {
            grid,
            nodes: Vec::new(),
            links: Vec::new(),
            lightpaths: BTreeMap::new(),
            next_id: 0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn add_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn add_link(&mut self, mut link: Link) -> Result<usize> {
        link.validate()?;
        for end in [link.from, link.to] {
            let node = self
                .nodes
                .get(end.node)
                .ok_or_else(|| Error::OutOfRange(format!("link {}: node {}", link.name, end.node)))?;
            if end.degree >= node.degrees() {
                return Err(Error::OutOfRange(format!(
                    "link {}: degree {} of node {}",
                    link.name,
                    end.degree,
                    node.name()
                )));
            }
        }
        if self.links.iter().any(|l| l.from == link.from) {
            return Err(Error::InvalidArgument(format!(
                "link {}: node {} degree {} already has an outgoing fiber",
                link.name, link.from.node, link.from.degree
            )));
        }
        if self.links.iter().any(|l| l.to == link.to) {
            return Err(Error::InvalidArgument(format!(
                "link {}: node {} degree {} already has an incoming fiber",
                link.name, link.to.node, link.to.degree
            )));
        }
        link.occupancy = link
            .bands
            .iter()
            .filter_map(|b| self.grid.plan(*b).map(|p| (*b, SlotMap::new(p.count()))))
            .collect();
        self.links.push(link);
        Ok(self.links.len() - 1)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> Result<&Node> {
        self.nodes
            .get(idx)
            .ok_or_else(|| Error::OutOfRange(format!("node {idx}")))
    }

    pub fn node_mut(&mut self, idx: usize) -> Result<&mut Node> {
        self.nodes
            .get_mut(idx)
            .ok_or_else(|| Error::OutOfRange(format!("node {idx}")))
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name() == name)
    }

    pub fn lightpaths(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths.values().map(|(lp, _)| lp)
    }

    pub fn lightpath(&self, id: usize) -> Option<&Lightpath> {
        self.lightpaths.get(&id).map(|(lp, _)| lp)
    }

    /// Hop-count shortest path; ties go to the lowest link indices.
    pub fn shortest_route(&self, src: usize, dst: usize) -> Result<Vec<usize>> {
        if src == dst {
            return Err(Error::InvalidArgument("source and destination coincide".into()));
        }
        let mut prev: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(n) = queue.pop_front() {
            for (li, link) in self.links.iter().enumerate() {
                let next = link.to.node;
                if link.from.node == n && !seen[next] {
                    seen[next] = true;
                    prev[next] = Some(li);
                    queue.push_back(next);
                }
            }
        }
        let mut route = Vec::new();
        let mut at = dst;
        while at != src {
            let li = prev[at].ok_or(Error::NoRoute { from: src, to: dst })?;
            route.push(li);
            at = self.links[li].from.node;
        }
        route.reverse();
        Ok(route)
    }

    fn hops(&self, src: usize, dst: usize, route: &[usize], band: BandName) -> Result<Vec<Hop>> {
        if route.is_empty() {
            return Err(Error::InvalidArgument("empty route".into()));
        }
        let links: Vec<&Link> = route
            .iter()
            .map(|&li| {
                self.links
                    .get(li)
                    .ok_or_else(|| Error::OutOfRange(format!("link {li}")))
            })
            .collect::<Result<_>>()?;
        if links[0].from.node != src || links[links.len() - 1].to.node != dst {
            return Err(Error::InvalidArgument("route does not join source and destination".into()));
        }
        for pair in links.windows(2) {
            if pair[0].to.node != pair[1].from.node {
                return Err(Error::InvalidArgument(format!(
                    "links {} and {} are not adjacent",
                    pair[0].name, pair[1].name
                )));
            }
            if pair[0].to.degree == pair[1].from.degree {
                return Err(Error::InvalidArgument(format!(
                    "route turns back on degree {} of node {}",
                    pair[0].to.degree, pair[0].to.node
                )));
            }
        }
        let mut visited: Vec<usize> = std::iter::once(src).chain(links.iter().map(|l| l.to.node)).collect();
        visited.sort_unstable();
        if visited.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("route visits a node twice".into()));
        }
        if let Some(link) = links.iter().find(|l| !l.supports(band)) {
            return Err(Error::BandBlocked {
                link: link.name.clone(),
                band,
            });
        }
        let mut hops = Vec::with_capacity(links.len() + 1);
        for i in 0..=links.len() {
            let node = if i == 0 { src } else { links[i - 1].to.node };
            let input = (i > 0).then(|| links[i - 1].to.degree);
            let output = links.get(i).map(|l| l.from.degree);
            let n = &self.nodes[node];
            let chain = n.chain_for(band).ok_or_else(|| Error::BandBlocked {
                link: n.name().to_string(),
                band,
            })?;
            for d in input.into_iter().chain(output) {
                if !n.switches(chain, d)?.spec.supports(band) {
                    return Err(Error::BandBlocked {
                        link: format!("{}/deg{d}", n.name()),
                        band,
                    });
                }
            }
            hops.push(Hop {
                node,
                chain,
                input,
                output,
            });
        }
        Ok(hops)
    }

    fn spectrum_free(&self, route: &[usize], hops: &[Hop], ch: ChannelKey) -> bool {
        let links_free = route.iter().all(|&li| {
            self.links[li]
                .occupancy
                .get(&ch.band)
                .is_some_and(|m| ch.slot < m.len() && !m.is_set(ch.slot))
        });
        links_free
            && hops.iter().all(|h| {
                let node = &self.nodes[h.node];
                let free = |d: usize, side: Side| {
                    let sw = node.switches(h.chain, d).expect("hop degrees validated");
                    let st = match side {
                        Side::Add => &sw.add,
                        Side::Drop => &sw.drop,
                    };
                    st.port_of(ch).is_none()
                };
                h.input.is_none_or(|d| free(d, Side::Drop)) && h.output.is_none_or(|d| free(d, Side::Add))
            })
    }

    /// Lowest (bank, client) that can source or sink `ch` towards `degree`.
    fn pick_client(&self, node: usize, side: Side, ch: ChannelKey, degree: usize, trx: &TransceiverSpec) -> Option<(usize, usize)> {
        let n = &self.nodes[node];
        for (bi, bank) in n.banks().iter().enumerate() {
            if n.contention_check(side, ch, bi, degree).is_err() {
                continue;
            }
            let state = match side {
                Side::Add => &bank.add,
                Side::Drop => &bank.drop,
            };
            for client in 0..state.client_ports() {
                if !state.is_free(client) {
                    continue;
                }
                let fits = match n.transceiver(bi, client) {
                    Some(existing) => existing.supports(ch.band),
                    None => n.validate_transponder(trx, bi, client).is_ok(),
                };
                if fits {
                    return Some((bi, client));
                }
            }
        }
        None
    }

    pub fn provision(&mut self, req: &LightpathRequest) -> Result<Lightpath> {
        req.signal.validate()?;
        req.transceiver.validate()?;
        if !req.transceiver.supports(req.band) {
            return Err(Error::MisPlug {
                band_list: req.transceiver.band_label(),
                bank_band: req.band.to_string(),
            });
        }
        self.node(req.src)?;
        self.node(req.dst)?;
        let plan = self
            .grid
            .plan(req.band)
            .ok_or_else(|| Error::InvalidArgument(format!("no {} band channel plan", req.band)))?
            .clone();
        if req.signal.channel_spacing_ghz > plan.spacing_ghz + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "signal {} needs {} GHz but the grid slot is {} GHz",
                req.signal.name, req.signal.channel_spacing_ghz, plan.spacing_ghz
            )));
        }
        let route = match &req.route {
            RouteChoice::Shortest => self.shortest_route(req.src, req.dst)?,
            RouteChoice::Links(links) => links.clone(),
        };
        let hops = self.hops(req.src, req.dst, &route, req.band)?;
        let first = hops[0];
        let last = hops[hops.len() - 1];
        let out_degree = first.output.expect("first hop has an output");
        let in_degree = last.input.expect("last hop has an input");

        let candidates: Vec<usize> = match req.slot {
            SlotChoice::FirstFit => (0..plan.count()).collect(),
            SlotChoice::Fixed(s) if s < plan.count() => vec![s],
            SlotChoice::Fixed(s) => {
                return Err(Error::OutOfRange(format!("slot {s} of {} in {}", plan.count(), req.band)))
            }
        };
        let mut spectrum_ok = false;
        let mut chosen = None;
        for slot in candidates {
            let ch = ChannelKey { band: req.band, slot };
            if !self.spectrum_free(&route, &hops, ch) {
                continue;
            }
            spectrum_ok = true;
            let Some(src_port) = self.pick_client(req.src, Side::Add, ch, out_degree, &req.transceiver) else {
                continue;
            };
            let Some(dst_port) = self.pick_client(req.dst, Side::Drop, ch, in_degree, &req.transceiver) else {
                continue;
            };
            chosen = Some((ch, src_port, dst_port));
            break;
        }
        let Some((ch, (src_bank, src_client), (dst_bank, dst_client))) = chosen else {
            return Err(if spectrum_ok {
                Error::PortBlocked(format!(
                    "no free MCS client between node {} and node {}",
                    req.src, req.dst
                ))
            } else {
                Error::SpectrumBlocked { band: req.band }
            });
        };

        let slot_center = plan.center(ch.slot).expect("slot within plan");
        let subcarriers = match &req.subcarriers_thz {
            Some(f) => f.clone(),
            None => superchannel_centers(
                slot_center,
                req.signal.subcarrier_count,
                req.signal.subcarrier_spacing_ghz,
                plan.spacing_ghz,
            )?,
        };
        for &f in &subcarriers {
            if !plan.band.contains(f) {
                return Err(Error::InvalidArgument(format!(
                    "subcarrier {f:.4} THz lies outside the {} band",
                    req.band
                )));
            }
        }

        let src = Endpoint {
            node: req.src,
            bank: src_bank,
            client: src_client,
            degree: out_degree,
        };
        let dst = Endpoint {
            node: req.dst,
            bank: dst_bank,
            client: dst_client,
            degree: in_degree,
        };
        let mut res = Reservation::default();
        self.commit(&route, &hops, ch, src, dst, &req.transceiver, &mut res)?;
        let elements = self.path_elements(&route, &hops, src, dst)?;

        let id = self.next_id;
        self.next_id += 1;
        let lp = Lightpath {
            id,
            signal: req.signal.clone(),
            band: req.band,
            slot: ch.slot,
            slot_center_thz: slot_center,
            subcarriers_thz: subcarriers,
            src,
            dst,
            span_count: route.len(),
            links: route,
            elements,
            transceiver: req.transceiver.clone(),
        };
        self.lightpaths.insert(id, (lp.clone(), res));
        Ok(lp)
    }

    #[allow(clippy::too_many_arguments)]
    fn commit(
        &mut self,
        route: &[usize],
        hops: &[Hop],
        ch: ChannelKey,
        src: Endpoint,
        dst: Endpoint,
        trx: &TransceiverSpec,
        res: &mut Reservation,
    ) -> Result<()> {
        // Every check already passed; these calls only record state.
        for &li in route {
            let map = self.links[li].occupancy.get_mut(&ch.band).expect("band checked");
            map.set(ch.slot);
            res.links.push(li);
        }
        for h in hops {
            let node = &mut self.nodes[h.node];
            if let Some(d) = h.input {
                let port = match h.output {
                    Some(out) => node.interconnect_port(d, out)?,
                    None => node.bank_port(dst.bank)?,
                };
                node.route_wss(h.chain, d, Side::Drop, port, ch)?;
                res.wss.push((h.node, h.chain, d, Side::Drop));
            }
            if let Some(d) = h.output {
                let port = match h.input {
                    Some(inp) => node.interconnect_port(d, inp)?,
                    None => node.bank_port(src.bank)?,
                };
                node.route_wss(h.chain, d, Side::Add, port, ch)?;
                res.wss.push((h.node, h.chain, d, Side::Add));
            }
        }
        for (ep, side) in [(src, Side::Add), (dst, Side::Drop)] {
            let node = &mut self.nodes[ep.node];
            node.mcs_connect(ep.bank, side, ep.client, ep.degree)?;
            res.mcs.push((ep.node, ep.bank, side, ep.client));
            node.occupy(side, ch, ep.bank, ep.degree)?;
            res.active.push((ep.node, side, ep.bank, ep.degree));
            if node.transceiver(ep.bank, ep.client).is_none() {
                node.attach_transceiver(trx.clone(), ep.bank, ep.client)?;
            }
        }
        Ok(())
    }

    fn path_elements(&self, route: &[usize], hops: &[Hop], src: Endpoint, dst: Endpoint) -> Result<Vec<PathElement>> {
        let mut out = Vec::new();
        let src_node = &self.nodes[src.node];
        let tag = |n: &Node, rest: String| format!("{}/{rest}", n.name());
        out.push(PathElement::new(
            tag(src_node, format!("bank{}/client{}/tx", src.bank, src.client)),
            ElementKind::Transmitter,
        ));
        out.push(PathElement::new(
            tag(src_node, format!("bank{}/add-mcs", src.bank)),
            ElementKind::Mcs {
                spec: src_node.config.mcs.clone(),
            },
        ));
        for (i, h) in hops.iter().enumerate() {
            let node = &self.nodes[h.node];
            if let Some(d) = h.input {
                let point = if h.output.is_some() { PowerPoint::B } else { PowerPoint::A };
                out.push(PathElement::new(
                    tag(node, format!("deg{d}/input")),
                    ElementKind::PowerPoint { point },
                ));
                let sw = node.switches(h.chain, d)?;
                let port = match h.output {
                    Some(o) => node.interconnect_port(d, o)?,
                    None => node.bank_port(dst.bank)?,
                };
                let splitter = h.output.is_none() && node.config.drop_side == DropSide::Splitter;
                let kind = if splitter {
                    ElementKind::Splitter {
                        ports: sw.spec.port_count,
                    }
                } else {
                    ElementKind::Wss {
                        spec: sw.spec.clone(),
                        port,
                    }
                };
                out.push(PathElement::new(tag(node, format!("deg{d}/drop-wss[p{port}]")), kind));
            }
            if let Some(d) = h.output {
                let sw = node.switches(h.chain, d)?;
                let port = match h.input {
                    Some(inp) => node.interconnect_port(d, inp)?,
                    None => node.bank_port(src.bank)?,
                };
                out.push(PathElement::new(
                    tag(node, format!("deg{d}/add-wss[p{port}]")),
                    ElementKind::Wss {
                        spec: sw.spec.clone(),
                        port,
                    },
                ));
                let link = &self.links[route[i]];
                out.push(PathElement::new(
                    format!("{}/launch", link.name),
                    ElementKind::PowerPoint { point: PowerPoint::C },
                ));
                for e in &link.elements {
                    out.push(match e {
                        LinkElement::Attenuator(a) => {
                            PathElement::new(a.name.clone(), ElementKind::Attenuator { loss_db: a.loss_db })
                        }
                        LinkElement::Coupler(c) => PathElement::new(
                            c.name.clone(),
                            ElementKind::Coupler {
                                loss_db: c.loss_per_pass_db,
                            },
                        ),
                        LinkElement::Amplifiers(amps) => PathElement::new(
                            format!("{}/amp", link.name),
                            ElementKind::Amplifier { stage: amps.clone() },
                        ),
                    });
                }
            }
        }
        let dst_node = &self.nodes[dst.node];
        out.push(PathElement::new(
            tag(dst_node, format!("deg{}/inline-amp", dst.degree)),
            ElementKind::InlineAmpSlot,
        ));
        out.push(PathElement::new(
            tag(dst_node, format!("bank{}/drop-mcs", dst.bank)),
            ElementKind::Mcs {
                spec: dst_node.config.mcs.clone(),
            },
        ));
        out.push(PathElement::new(
            tag(dst_node, format!("bank{}/client{}/rx", dst.bank, dst.client)),
            ElementKind::Receiver,
        ));
        Ok(out)
    }

    /// Tears a lightpath down, returning every resource it held.
    pub fn release(&mut self, id: usize) -> Result<Lightpath> {
        let (lp, res) = self.lightpaths.remove(&id).ok_or(Error::UnknownLightpath(id))?;
        let ch = lp.channel();
        for li in res.links {
            if let Some(map) = self.links[li].occupancy.get_mut(&ch.band) {
                map.clear(ch.slot);
            }
        }
        for (n, chain, d, side) in res.wss {
            self.nodes[n].release_wss(chain, d, side, ch);
        }
        for (n, bank, side, client) in res.mcs {
            self.nodes[n].mcs_disconnect(bank, side, client);
        }
        for (n, side, bank, degree) in res.active {
            self.nodes[n].vacate(side, ch, bank, degree);
        }
        Ok(lp)
    }

    /// Recounts link occupancy from the active lightpaths and compares it
    /// with the stored bitmaps, WSS routes and MCS connections.
    pub fn audit(&self) -> Result<()> {
        let fail = |what: String| Err(Error::InvalidArgument(format!("audit: {what}")));
        let mut expected: BTreeMap<(usize, BandName), Vec<usize>> = BTreeMap::new();
        let mut wss_routes = 0usize;
        let mut mcs_links = 0usize;
        for lp in self.lightpaths() {
            if lp.span_count != lp.links.len() {
                return fail(format!("lightpath {} span count", lp.id));
            }
            for &li in &lp.links {
                expected.entry((li, lp.band)).or_default().push(lp.slot);
            }
            wss_routes += 2 * lp.links.len();
            mcs_links += 2;
            for (ep, side) in [(lp.src, Side::Add), (lp.dst, Side::Drop)] {
                let st = self.nodes[ep.node].mcs_state(ep.bank, side)?;
                if st.degree_of(ep.client) != Some(ep.degree) {
                    return fail(format!("lightpath {} MCS connection", lp.id));
                }
            }
        }
        for (li, link) in self.links.iter().enumerate() {
            for (band, map) in &link.occupancy {
                let mut want = expected.remove(&(li, *band)).unwrap_or_default();
                want.sort_unstable();
                if want.windows(2).any(|w| w[0] == w[1]) {
                    return fail(format!("slot double-booked on {}", link.name));
                }
                let have: Vec<usize> = map.used().collect();
                if have != want {
                    return fail(format!("{} {band}: {have:?} != {want:?}", link.name));
                }
            }
        }
        if !expected.is_empty() {
            return fail("lightpath on a link without occupancy".into());
        }
        let mut routed = 0usize;
        let mut connected = 0usize;
        for node in &self.nodes {
            node.check_invariants()?;
            for chain in 0..node.chain_count() {
                for d in 0..node.degrees() {
                    let sw = node.switches(chain, d)?;
                    routed += sw.add.len() + sw.drop.len();
                }
            }
            for bank in node.banks() {
                connected += bank.add.connected().count() + bank.drop.connected().count();
            }
        }
        if routed != wss_routes {
            return fail(format!("{routed} WSS routes for {wss_routes} expected"));
        }
        if connected != mcs_links {
            return fail(format!("{connected} MCS connections for {mcs_links} expected"));
        }
        Ok(())
    }
}
