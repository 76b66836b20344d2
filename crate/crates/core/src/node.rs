//! ROADM node assembly: port budgets, add/drop ratios, device inventories
//! and transceiver attachment.
//!
//! Every degree has an add-side and a drop-side WSS per band chain. On each
//! WSS, service ports `0..D-1` interconnect the other degrees and the ports
//! after them connect one MCS bank each. A bank is an add MCS and a drop MCS
//! sharing client indices, so one transceiver sits on client `c` of both.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::devices::{ChannelKey, McsSpec, McsState, RoutePolicy, TransceiverSpec, WssSpec, WssState};
use crate::error::{Error, Result};
use crate::spectrum::{BandName, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeArchitecture {
    /// Single-band C devices.
    COnly,
    /// Separate C and L switch chains joined by band couplers.
    ClSeparate,
    /// C+L switches shared by both bands.
    ClMultiband,
}

impl NodeArchitecture {
    /// Band of each switch chain; `None` means the chain carries every band.
    pub fn chains(self) -> &'static [Option<BandName>] {
        match self {
            NodeArchitecture::COnly => &[Some(BandName::C)],
            NodeArchitecture::ClSeparate => &[Some(BandName::C), Some(BandName::L)],
            NodeArchitecture::ClMultiband => &[None],
        }
    }

    pub fn line_bands(self) -> &'static [BandName] {
        match self {
            NodeArchitecture::COnly => &[BandName::C],
            _ => &BandName::ALL,
        }
    }
}

impl fmt::Display for NodeArchitecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeArchitecture::COnly => "C_ONLY",
            NodeArchitecture::ClSeparate => "CL_SEPARATE",
            NodeArchitecture::ClMultiband => "CL_MULTIBAND",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropSide {
    #[default]
    Wss,
    /// Broadcast 1xW splitter in place of the drop WSS.
    Splitter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Add,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub name: String,
    pub architecture: NodeArchitecture,
    pub degrees: usize,
    pub wss: WssSpec,
    /// Per-degree replacement WSS, e.g. a C-only device on one degree.
    pub degree_wss: BTreeMap<usize, WssSpec>,
    pub mcs: McsSpec,
    pub channels_per_degree: usize,
    pub mcs_count_override: Option<usize>,
    pub drop_side: DropSide,
}

impl NodeConfig {
    pub fn new(name: &str, architecture: NodeArchitecture, degrees: usize, wss: WssSpec, mcs: McsSpec) -> Self {
        NodeConfig {
            name: name.into(),
            architecture,
            degrees,
            wss,
            degree_wss: BTreeMap::new(),
            mcs,
            channels_per_degree: 96,
            mcs_count_override: None,
            drop_side: DropSide::Wss,
        }
    }

    pub fn wss_for(&self, degree: usize) -> &WssSpec {
        self.degree_wss.get(&degree).unwrap_or(&self.wss)
    }

    /// Smallest WSS port count over all degrees.
    pub fn min_wss_ports(&self) -> usize {
        (0..self.degrees)
            .map(|d| self.wss_for(d).port_count)
            .min()
            .unwrap_or(self.wss.port_count)
    }

    /// MCS banks per band chain.
    pub fn bank_count(&self) -> Result<usize> {
        let max = max_mcs_count(self.min_wss_ports(), self.degrees)?;
        match self.mcs_count_override {
            Some(n) if n > max => Err(Error::OverSubscribed { requested: n, max }),
            Some(n) => Ok(n),
            None => Ok(max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degrees == 0 {
            return Err(Error::InvalidArgument(format!("node {}: degrees must be >= 1", self.name)));
        }
        if let Some(&d) = self.degree_wss.keys().find(|&&d| d >= self.degrees) {
            return Err(Error::OutOfRange(format!(
                "node {}: WSS override for degree {d} of {}",
                self.name, self.degrees
            )));
        }
        self.wss.validate()?;
        for spec in self.degree_wss.values() {
            spec.validate()?;
        }
        self.mcs.validate()?;
        if self.mcs.degree_ports < self.degrees {
            return Err(Error::InvalidSpec {
                device: self.mcs.name.clone(),
                reason: format!(
                    "{} degree ports cannot reach {} node degrees",
                    self.mcs.degree_ports, self.degrees
                ),
            });
        }
        self.bank_count()?;
        Ok(())
    }
}

/// Service ports left for add/drop banks after inter-degree interconnection.
pub fn max_mcs_count(wss_ports: usize, degrees: usize) -> Result<usize> {
    if degrees == 0 || wss_ports < degrees {
        return Err(Error::InsufficientPorts {
            ports: wss_ports,
            degrees,
        });
    }
    Ok(wss_ports - (degrees - 1))
}

/// Fraction of the node's wavelength capacity that can be added/dropped.
pub fn add_drop_ratio(wss_ports: usize, degrees: usize, clients: usize, channels_per_degree: usize) -> Result<f64> {
    if channels_per_degree == 0 {
        return Err(Error::InvalidArgument("channels per degree must be positive".into()));
    }
    let banks = max_mcs_count(wss_ports, degrees)?;
    Ok((banks * clients) as f64 / (degrees * channels_per_degree) as f64)
}

/// Average per-node share of the network's wavelengths.
pub fn required_add_drop_ratio(_total_wavelengths: usize, node_count: usize) -> Result<f64> {
    if node_count == 0 {
        return Err(Error::InvalidArgument("node count must be >= 1".into()));
    }
    Ok(1.0 / node_count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct NodeInventory {
    pub wss: usize,
    pub splitters: usize,
    pub mcs: usize,
    pub c_edfa: usize,
    pub l_edfa: usize,
    pub wdm_couplers: usize,
}

impl NodeInventory {
    pub fn total(&self) -> usize {
        self.wss + self.splitters + self.mcs + self.c_edfa + self.l_edfa + self.wdm_couplers
    }
}

pub fn inventory(config: &NodeConfig) -> Result<NodeInventory> {
    let d = config.degrees;
    let chains = config.architecture.chains().len();
    let banks = config.bank_count()?;
    let drop_wss = matches!(config.drop_side, DropSide::Wss) as usize;
    let (l_edfa, couplers) = match config.architecture {
        NodeArchitecture::COnly => (0, 0),
        // line stage: demux, C-EDFA, L-EDFA, mux
        NodeArchitecture::ClMultiband => (d, 2 * d),
        // plus a band mux on the add side and a band demux on the drop side
        NodeArchitecture::ClSeparate => (d, 4 * d),
    };
    Ok(NodeInventory {
        wss: chains * d * (1 + drop_wss),
        splitters: chains * d * (1 - drop_wss),
        mcs: chains * banks * 2,
        c_edfa: d,
        l_edfa,
        wdm_couplers: couplers,
    })
}

#[derive(Debug, Clone)]
pub struct DegreeSwitches {
    pub spec: WssSpec,
    pub add: WssState,
    pub drop: WssState,
}

#[derive(Debug, Clone)]
pub struct McsBank {
    pub chain: usize,
    pub band: Option<BandName>,
    /// Index within the chain; selects the WSS service port.
    pub position: usize,
    pub add: McsState,
    pub drop: McsState,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub config: NodeConfig,
    /// `[chain][degree]`
    switches: Vec<Vec<DegreeSwitches>>,
    banks: Vec<McsBank>,
    transceivers: BTreeMap<(usize, usize), TransceiverSpec>,
    active: BTreeSet<(Side, usize, usize, ChannelKey)>,
}

pub fn build_node(config: &NodeConfig, grid: &Grid) -> Result<Node> {
    config.validate()?;
    let banks_per_chain = config.bank_count()?;
    let grid_slots = grid.slot_counts();
    let mut switches = Vec::new();
    let mut banks = Vec::new();
    for (ci, chain_band) in config.architecture.chains().iter().enumerate() {
        let mut per_degree = Vec::with_capacity(config.degrees);
        for d in 0..config.degrees {
            let base = config.wss_for(d);
            let spec = match chain_band {
                Some(b) => {
                    let bands = base.bands.iter().copied().filter(|x| x.name == *b).collect();
                    base.with_ports(&format!("{}-{b}", base.name), base.port_count, bands)
                }
                None => base.clone(),
            };
            let slots: BTreeMap<BandName, usize> = grid_slots
                .iter()
                .filter(|(b, _)| spec.supports(**b))
                .map(|(b, n)| (*b, *n))
                .collect();
            let label = |side: &str| match chain_band {
                Some(b) => format!("{}/deg{d}/{side}-wss-{b}", config.name),
                None => format!("{}/deg{d}/{side}-wss", config.name),
            };
            per_degree.push(DegreeSwitches {
                add: WssState::new(&label("add"), spec.port_count, slots.clone(), RoutePolicy::Strict),
                drop: WssState::new(&label("drop"), spec.port_count, slots, RoutePolicy::Strict),
                spec,
            });
        }
        switches.push(per_degree);
        for position in 0..banks_per_chain {
            let idx = banks.len();
            banks.push(McsBank {
                chain: ci,
                band: *chain_band,
                position,
                add: McsState::new(&format!("{}/bank{idx}/add-mcs", config.name), &config.mcs),
                drop: McsState::new(&format!("{}/bank{idx}/drop-mcs", config.name), &config.mcs),
            });
        }
    }
    let node = Node {
        config: config.clone(),
        switches,
        banks,
        transceivers: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    node.check_invariants()?;
    Ok(node)
}

impl Node {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn degrees(&self) -> usize {
        self.config.degrees
    }

    pub fn banks(&self) -> &[McsBank] {
        &self.banks
    }

    pub fn bank(&self, bank: usize) -> Result<&McsBank> {
        self.banks
            .get(bank)
            .ok_or_else(|| Error::OutOfRange(format!("{}: MCS bank {bank}", self.config.name)))
    }

    pub fn add_drop_ports(&self) -> usize {
        self.banks.iter().map(|b| b.add.client_ports()).sum()
    }

    pub fn chain_count(&self) -> usize {
        self.switches.len()
    }

    /// Switch chain that carries `band`.
    pub fn chain_for(&self, band: BandName) -> Option<usize> {
        self.config
            .architecture
            .chains()
            .iter()
            .position(|c| c.is_none() || *c == Some(band))
    }

    pub fn switches(&self, chain: usize, degree: usize) -> Result<&DegreeSwitches> {
        self.switches
            .get(chain)
            .and_then(|c| c.get(degree))
            .ok_or_else(|| Error::OutOfRange(format!("{}: chain {chain} degree {degree}", self.config.name)))
    }

    fn switches_mut(&mut self, chain: usize, degree: usize) -> Result<&mut DegreeSwitches> {
        let name = self.config.name.clone();
        self.switches
            .get_mut(chain)
            .and_then(|c| c.get_mut(degree))
            .ok_or_else(|| Error::OutOfRange(format!("{name}: chain {chain} degree {degree}")))
    }

    /// WSS service port on `degree` that leads to `peer`.
    pub fn interconnect_port(&self, degree: usize, peer: usize) -> Result<usize> {
        let d = self.config.degrees;
        if degree >= d || peer >= d || degree == peer {
            return Err(Error::OutOfRange(format!(
                "{}: no interconnect between degree {degree} and {peer}",
                self.config.name
            )));
        }
        Ok(if peer < degree { peer } else { peer - 1 })
    }

    /// WSS service port that feeds/receives a bank.
    pub fn bank_port(&self, bank: usize) -> Result<usize> {
        Ok(self.config.degrees - 1 + self.bank(bank)?.position)
    }

    /// Service ports in use on one WSS: interconnects plus attached banks.
    pub fn used_service_ports(&self, chain: usize) -> usize {
        let banks = self.banks.iter().filter(|b| b.chain == chain).count();
        self.config.degrees - 1 + banks
    }

    pub fn check_invariants(&self) -> Result<()> {
        for (ci, chain) in self.switches.iter().enumerate() {
            let used = self.used_service_ports(ci);
            for sw in chain {
                if used > sw.spec.port_count {
                    return Err(Error::InsufficientPorts {
                        ports: sw.spec.port_count,
                        degrees: self.config.degrees,
                    });
                }
            }
        }
        Ok(())
    }

    fn bank_bands(&self, bank: &McsBank) -> Vec<BandName> {
        match bank.band {
            Some(b) => vec![b],
            None => BandName::ALL
                .into_iter()
                .filter(|b| self.config.mcs.supports(*b))
                .collect(),
        }
    }

    /// Checks that a transceiver may sit on `(bank, client)`.
    pub fn validate_transponder(&self, trx: &TransceiverSpec, bank: usize, client: usize) -> Result<()> {
        let b = self.bank(bank)?;
        if client >= b.add.client_ports() {
            return Err(Error::OutOfRange(format!(
                "{}: client {client} of bank {bank}",
                self.config.name
            )));
        }
        let allowed = self.bank_bands(b);
        if trx.bands.iter().any(|band| allowed.contains(band)) {
            Ok(())
        } else {
            Err(Error::MisPlug {
                band_list: trx.band_label(),
                bank_band: allowed.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("+"),
            })
        }
    }

    pub fn attach_transceiver(&mut self, trx: TransceiverSpec, bank: usize, client: usize) -> Result<()> {
        self.validate_transponder(&trx, bank, client)?;
        if self.transceivers.contains_key(&(bank, client)) {
            return Err(Error::PortBlocked(format!(
                "{}: bank {bank} client {client} already holds a transceiver",
                self.config.name
            )));
        }
        self.transceivers.insert((bank, client), trx);
        Ok(())
    }

    pub fn detach_transceiver(&mut self, bank: usize, client: usize) -> Option<TransceiverSpec> {
        self.transceivers.remove(&(bank, client))
    }

    pub fn transceiver(&self, bank: usize, client: usize) -> Option<&TransceiverSpec> {
        self.transceivers.get(&(bank, client))
    }

    pub fn transceivers(&self) -> impl Iterator<Item = (&(usize, usize), &TransceiverSpec)> {
        self.transceivers.iter()
    }

    /// Contentionless rule: one instance of a channel per (bank, degree) on each side.
    pub fn contention_check(&self, side: Side, channel: ChannelKey, bank: usize, degree: usize) -> Result<()> {
        self.bank(bank)?;
        if degree >= self.config.degrees {
            return Err(Error::OutOfRange(format!("{}: degree {degree}", self.config.name)));
        }
        if self.active.contains(&(side, bank, degree, channel)) {
            return Err(Error::Contention {
                device: format!("{}/bank{bank}/{side:?}-mcs", self.config.name).to_lowercase(),
                channel: channel.to_string(),
                existing: degree,
            });
        }
        Ok(())
    }

    pub fn occupy(&mut self, side: Side, channel: ChannelKey, bank: usize, degree: usize) -> Result<()> {
        self.contention_check(side, channel, bank, degree)?;
        self.active.insert((side, bank, degree, channel));
        Ok(())
    }

    pub fn vacate(&mut self, side: Side, channel: ChannelKey, bank: usize, degree: usize) -> bool {
        self.active.remove(&(side, bank, degree, channel))
    }

    pub fn active(&self) -> &BTreeSet<(Side, usize, usize, ChannelKey)> {
        &self.active
    }

    pub fn route_wss(&mut self, chain: usize, degree: usize, side: Side, port: usize, channel: ChannelKey) -> Result<()> {
        let sw = self.switches_mut(chain, degree)?;
        match side {
            Side::Add => sw.add.route(port, channel),
            Side::Drop => sw.drop.route(port, channel),
        }
    }

    pub fn release_wss(&mut self, chain: usize, degree: usize, side: Side, channel: ChannelKey) -> Option<usize> {
        let sw = self.switches_mut(chain, degree).ok()?;
        match side {
            Side::Add => sw.add.release(channel),
            Side::Drop => sw.drop.release(channel),
        }
    }

    pub fn mcs_state(&self, bank: usize, side: Side) -> Result<&McsState> {
        let b = self.bank(bank)?;
        Ok(match side {
            Side::Add => &b.add,
            Side::Drop => &b.drop,
        })
    }

    pub fn mcs_connect(&mut self, bank: usize, side: Side, client: usize, degree: usize) -> Result<()> {
        let name = self.config.name.clone();
        let b = self
            .banks
            .get_mut(bank)
            .ok_or_else(|| Error::OutOfRange(format!("{name}: MCS bank {bank}")))?;
        match side {
            Side::Add => b.add.connect(client, degree),
            Side::Drop => b.drop.connect(client, degree),
        }
    }

    pub fn mcs_disconnect(&mut self, bank: usize, side: Side, client: usize) -> Option<usize> {
        let b = self.banks.get_mut(bank)?;
        match side {
            Side::Add => b.add.disconnect(client),
            Side::Drop => b.drop.disconnect(client),
        }
    }
}
