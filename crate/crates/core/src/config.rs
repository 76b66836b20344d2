//! TOML run configuration: device library, nodes, links, scenarios and
//! evaluation settings, with every cross-reference resolved at load time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::devices::{AttenuatorSpec, CouplerKind, CouplerSpec, EdfaSpec, McsSpec, TransceiverSpec, WssSpec};
use crate::error::{Error, Result};
use crate::impairment::{Evaluation, PenaltyModel, PowerPlan, SpanPenalty, SWEEP_RANGE_DBM};
use crate::network::scenario::{Position, ScenarioId, TestSignal, TestbedParams};
use crate::network::{Link, Port, SpanParams, Topology};
use crate::node::{build_node, max_mcs_count, DropSide, NodeArchitecture, NodeConfig};
use crate::spectrum::{spacing_for_signal, Band, BandName, Grid, SignalClass, SpacingVariant};

/// The bundled defaults.
pub const PAPER_DEFAULTS: &str = include_str!("../../../configs/paper_defaults.toml");

// ------------------------------------------------------------------ raw

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    output_dir: PathBuf,
    bands: BTreeMap<BandName, RawBand>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    signals: Vec<RawSignal>,
    devices: RawDevices,
    #[serde(default)]
    spans: BTreeMap<String, RawSpan>,
    adddrop: RawAddDrop,
    network: RawNetwork,
    testbed: RawTestbed,
    power: RawPower,
    penalty: RawPenalty,
    scenarios: RawScenarios,
    sweep: RawSweep,
    budget: RawBudget,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    low_thz: f64,
    high_thz: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default)]
    spacing_variant: RawVariant,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawVariant {
    #[default]
    Oif,
    OpenRoadm,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    name: String,
    bit_rate_gbps: u32,
    #[serde(default = "dp16qam")]
    modulation: String,
    baud_rate_gbaud: f64,
    channel_spacing_ghz: Option<f64>,
    #[serde(default = "one")]
    subcarrier_count: usize,
    #[serde(default)]
    subcarrier_spacing_ghz: f64,
}

fn dp16qam() -> String {
    "DP-16QAM".into()
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevices {
    #[serde(default)]
    wss: BTreeMap<String, RawWss>,
    #[serde(default)]
    mcs: BTreeMap<String, RawMcs>,
    #[serde(default)]
    edfa: BTreeMap<String, RawEdfa>,
    #[serde(default)]
    coupler: BTreeMap<String, RawCoupler>,
    #[serde(default)]
    attenuator: BTreeMap<String, RawAttenuator>,
    #[serde(default)]
    transceiver: BTreeMap<String, RawTransceiver>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWss {
    port_count: usize,
    bands: Vec<BandName>,
    loss_min_db: f64,
    loss_max_db: f64,
    loss_avg_low_db: f64,
    loss_avg_high_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMcs {
    degree_ports: usize,
    client_ports: usize,
    excess_loss_db: f64,
    min_isolation_db: f64,
    #[serde(default)]
    isolation_ripple_db: f64,
    bands: Vec<BandName>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdfa {
    band: BandName,
    gain_db: f64,
    max_output_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupler {
    kind: CouplerKind,
    loss_per_pass_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttenuator {
    loss_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransceiver {
    bands: Vec<BandName>,
    fec_threshold_q_db: f64,
    loopback_margin_db: f64,
    sensitivity_min_dbm: f64,
    sensitivity_max_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpan {
    attenuator: String,
    coupler: String,
    edfa_c: String,
    edfa_l: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddDrop {
    clients: Vec<usize>,
    reference_nodes: usize,
    total_wavelengths: usize,
    #[serde(default)]
    rows: Vec<RawAddDropRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddDropRow {
    label: String,
    wss: String,
    degrees: usize,
    channels_per_degree: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    grid_spacing_ghz: f64,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    requests: Vec<RawRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: String,
    architecture: NodeArchitecture,
    degrees: usize,
    wss: String,
    #[serde(default)]
    degree_wss: BTreeMap<String, String>,
    mcs: String,
    #[serde(default = "ninety_six")]
    channels_per_degree: usize,
    mcs_count: Option<usize>,
    #[serde(default)]
    drop_side: DropSide,
}

fn ninety_six() -> usize {
    96
}

#[derive(Debug, Clone, Copy, Deserialize)]
enum RawLinkKind {
    #[serde(rename = "c+l")]
    CPlusL,
    #[serde(rename = "c-only")]
    COnly,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPort {
    node: String,
    degree: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    name: String,
    kind: RawLinkKind,
    from: RawPort,
    to: RawPort,
    span: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    from: String,
    to: String,
    band: BandName,
    signal: String,
    transceiver: String,
    #[serde(default = "one")]
    count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestbed {
    grid_spacing_ghz: f64,
    signal: String,
    wss_cl: String,
    wss_c: String,
    mcs: String,
    span: String,
    transceivers: BTreeMap<BandName, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    launch_dbm: f64,
    point_a_dbm: Option<f64>,
    point_b_dbm: Option<f64>,
    point_c_dbm: Option<f64>,
    inline_amp_gain_db: Option<f64>,
    floor_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPenalty {
    first_span_db: f64,
    extra_span_db: f64,
    crosstalk_k: f64,
    rolloff_db_per_db2: f64,
    #[serde(default)]
    band_overrides: BTreeMap<BandName, SpanPenalty>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarios {
    run: Vec<u8>,
    signals: Vec<TestSignal>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    scenario: u8,
    band: BandName,
    position: Position,
    subchannel: usize,
    powers_dbm: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    scenario: u8,
    inline_amp_gain_db: f64,
}

// ------------------------------------------------------------- resolved

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviceLibrary {
    pub wss: BTreeMap<String, WssSpec>,
    pub mcs: BTreeMap<String, McsSpec>,
    pub edfa: BTreeMap<String, EdfaSpec>,
    pub coupler: BTreeMap<String, CouplerSpec>,
    pub attenuator: BTreeMap<String, AttenuatorSpec>,
    pub transceiver: BTreeMap<String, TransceiverSpec>,
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| Error::UnresolvedReference {
        kind: kind.into(),
        name: name.into(),
    })
}

impl DeviceLibrary {
    pub fn wss(&self, name: &str) -> Result<&WssSpec> {
        lookup(&self.wss, "wss", name)
    }

    pub fn mcs(&self, name: &str) -> Result<&McsSpec> {
        lookup(&self.mcs, "mcs", name)
    }

    pub fn edfa(&self, name: &str) -> Result<&EdfaSpec> {
        lookup(&self.edfa, "edfa", name)
    }

    pub fn transceiver(&self, name: &str) -> Result<&TransceiverSpec> {
        lookup(&self.transceiver, "transceiver", name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddDropRow {
    pub label: String,
    pub wss_ports: usize,
    pub degrees: usize,
    pub channels_per_degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddDropConfig {
    pub rows: Vec<AddDropRow>,
    pub clients: Vec<usize>,
    pub reference_nodes: usize,
    pub total_wavelengths: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub name: String,
    pub c_plus_l: bool,
    pub from: Port,
    pub to: Port,
    pub span: SpanParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteRequest {
    pub from: usize,
    pub to: usize,
    pub band: BandName,
    pub signal: SignalClass,
    pub transceiver: TransceiverSpec,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub grid: Grid,
    pub nodes: Vec<NodeConfig>,
    pub links: Vec<LinkConfig>,
    pub requests: Vec<RouteRequest>,
}

impl NetworkConfig {
    pub fn build(&self) -> Result<Topology> {
        let mut topo = Topology::new(self.grid.clone());
        for cfg in &self.nodes {
            topo.add_node(build_node(cfg, &self.grid)?);
        }
        for l in &self.links {
            let link = if l.c_plus_l {
                Link::c_plus_l(&l.name, l.from, l.to, &l.span)
            } else {
                Link::c_only(&l.name, l.from, l.to, &l.span)
            };
            topo.add_link(link)?;
        }
        Ok(topo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: ScenarioId,
    pub band: BandName,
    pub position: Position,
    /// 0-based subcarrier index.
    pub subcarrier: usize,
    pub powers_dbm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetConfig {
    pub scenario: ScenarioId,
    pub inline_amp_gain_db: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub bands: Vec<Band>,
    pub spacing_variant: SpacingVariant,
    pub signals: Vec<SignalClass>,
    pub devices: DeviceLibrary,
    pub adddrop: AddDropConfig,
    pub network: NetworkConfig,
    pub testbed: TestbedParams,
    pub scenarios: Vec<ScenarioId>,
    pub test_signals: Vec<TestSignal>,
    pub evaluation: Evaluation,
    pub sweep: SweepConfig,
    pub budget: BudgetConfig,
}

impl RunConfig {
    pub fn paper_defaults() -> Result<Self> {
        parse_config(PAPER_DEFAULTS)
    }

    /// Replaces the seed everywhere it is used.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.evaluation.seed = seed;
    }

    pub fn signal(&self, name: &str) -> Result<&SignalClass> {
        self.signals
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnresolvedReference {
                kind: "signal".into(),
                name: name.into(),
            })
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Errors raised while checking the model invariants are reported as
/// configuration errors, tagged with where they came from.
fn in_config<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| {
        if e.is_config_error() {
            e
        } else {
            Error::InvalidSpec {
                device: what.into(),
                reason: e.to_string(),
            }
        }
    })
}

fn scenario_id(n: u8) -> Result<ScenarioId> {
    n.to_string().parse().map_err(|_| Error::UnresolvedReference {
        kind: "scenario".into(),
        name: n.to_string(),
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;

    let mut bands = Vec::new();
    for (name, b) in &raw.bands {
        bands.push(in_config(&format!("band {name}"), Band::new(*name, b.low_thz, b.high_thz))?);
    }
    if let (Some(c), Some(l)) = (
        bands.iter().find(|b| b.name == BandName::C),
        bands.iter().find(|b| b.name == BandName::L),
    ) {
        in_config("bands", crate::spectrum::check_band_pair(c, l))?;
    }
    let band = |name: BandName| -> Result<Band> {
        bands.iter().copied().find(|b| b.name == name).ok_or_else(|| Error::UnresolvedReference {
            kind: "band".into(),
            name: name.to_string(),
        })
    };
    let band_list = |names: &[BandName]| names.iter().map(|&n| band(n)).collect::<Result<Vec<_>>>();

    let variant = match raw.grid.spacing_variant {
        RawVariant::Oif => SpacingVariant::Oif,
        RawVariant::OpenRoadm => SpacingVariant::OpenRoadm,
    };

    let mut signals = Vec::new();
    for s in raw.signals {
        let what = format!("signal {}", s.name);
        let spacing = match s.channel_spacing_ghz {
            Some(v) => v,
            None => in_config(&what, spacing_for_signal(s.bit_rate_gbps, variant))?,
        };
        let sig = SignalClass {
            name: s.name,
            bit_rate_gbps: s.bit_rate_gbps,
            modulation: s.modulation,
            baud_rate_gbaud: s.baud_rate_gbaud,
            channel_spacing_ghz: spacing,
            subcarrier_count: s.subcarrier_count,
            subcarrier_spacing_ghz: s.subcarrier_spacing_ghz,
        };
        in_config(&what, sig.validate())?;
        signals.push(sig);
    }

    let d = raw.devices;
    let mut devices = DeviceLibrary::default();
    for (name, w) in d.wss {
        let spec = WssSpec {
            name: name.clone(),
            port_count: w.port_count,
            bands: band_list(&w.bands)?,
            loss_min_db: w.loss_min_db,
            loss_max_db: w.loss_max_db,
            loss_avg_low_db: w.loss_avg_low_db,
            loss_avg_high_db: w.loss_avg_high_db,
        };
        spec.validate()?;
        devices.wss.insert(name, spec);
    }
    for (name, m) in d.mcs {
        let spec = McsSpec {
            name: name.clone(),
            degree_ports: m.degree_ports,
            client_ports: m.client_ports,
            excess_loss_db: m.excess_loss_db,
            min_isolation_db: m.min_isolation_db,
            isolation_ripple_db: m.isolation_ripple_db,
            bands: band_list(&m.bands)?,
        };
        spec.validate()?;
        devices.mcs.insert(name, spec);
    }
    for (name, e) in d.edfa {
        let spec = EdfaSpec {
            name: name.clone(),
            band: e.band,
            gain_db: e.gain_db,
            max_output_dbm: e.max_output_dbm,
        };
        spec.validate()?;
        devices.edfa.insert(name, spec);
    }
    for (name, c) in d.coupler {
        let spec = CouplerSpec {
            name: name.clone(),
            kind: c.kind,
            loss_per_pass_db: c.loss_per_pass_db,
        };
        spec.validate()?;
        devices.coupler.insert(name, spec);
    }
    for (name, a) in d.attenuator {
        let spec = AttenuatorSpec {
            name: name.clone(),
            loss_db: a.loss_db,
        };
        spec.validate()?;
        devices.attenuator.insert(name, spec);
    }
    for (name, t) in d.transceiver {
        let spec = TransceiverSpec {
            name: name.clone(),
            bands: t.bands,
            fec_threshold_q_db: t.fec_threshold_q_db,
            loopback_margin_db: t.loopback_margin_db,
            sensitivity_min_dbm: t.sensitivity_min_dbm,
            sensitivity_max_dbm: t.sensitivity_max_dbm,
        };
        spec.validate()?;
        devices.transceiver.insert(name, spec);
    }

    let mut spans = BTreeMap::new();
    for (name, s) in &raw.spans {
        let edfa_c = devices.edfa(&s.edfa_c)?.clone();
        let edfa_l = match &s.edfa_l {
            Some(n) => devices.edfa(n)?.clone(),
            None => EdfaSpec::new("edfa-L", BandName::L, edfa_c.gain_db),
        };
        if edfa_c.band != BandName::C || edfa_l.band != BandName::L {
            return Err(Error::InvalidSpec {
                device: format!("span {name}"),
                reason: "edfa_c must be a C-band and edfa_l an L-band amplifier".into(),
            });
        }
        let span = SpanParams {
            attenuation_db: lookup(&devices.attenuator, "attenuator", &s.attenuator)?.loss_db,
            coupler_loss_db: lookup(&devices.coupler, "coupler", &s.coupler)?.loss_per_pass_db,
            edfa_c,
            edfa_l,
        };
        spans.insert(name.clone(), span);
    }
    let span = |name: &str| lookup(&spans, "span", name).cloned();

    let mut rows = Vec::new();
    for r in raw.adddrop.rows {
        let wss_ports = devices.wss(&r.wss)?.port_count;
        max_mcs_count(wss_ports, r.degrees)?;
        if r.channels_per_degree == 0 {
            return Err(Error::InvalidSpec {
                device: format!("add/drop row `{}`", r.label),
                reason: "channels_per_degree must be positive".into(),
            });
        }
        rows.push(AddDropRow {
            label: r.label,
            wss_ports,
            degrees: r.degrees,
            channels_per_degree: r.channels_per_degree,
        });
    }
    if raw.adddrop.reference_nodes == 0 {
        return Err(Error::InvalidSpec {
            device: "adddrop".into(),
            reason: "reference_nodes must be >= 1".into(),
        });
    }
    let adddrop = AddDropConfig {
        rows,
        clients: raw.adddrop.clients,
        reference_nodes: raw.adddrop.reference_nodes,
        total_wavelengths: raw.adddrop.total_wavelengths,
    };

    let net = raw.network;
    let net_grid = in_config("network grid", Grid::new(&bands, net.grid_spacing_ghz))?;
    let mut nodes = Vec::new();
    for n in net.nodes {
        let mut cfg = NodeConfig::new(
            &n.name,
            n.architecture,
            n.degrees,
            devices.wss(&n.wss)?.clone(),
            devices.mcs(&n.mcs)?.clone(),
        );
        for (deg, w) in &n.degree_wss {
            let deg: usize = deg.parse().map_err(|_| Error::InvalidSpec {
                device: format!("node {}", n.name),
                reason: format!("degree_wss key `{deg}` is not a degree index"),
            })?;
            cfg.degree_wss.insert(deg, devices.wss(w)?.clone());
        }
        cfg.channels_per_degree = n.channels_per_degree;
        cfg.mcs_count_override = n.mcs_count;
        cfg.drop_side = n.drop_side;
        in_config(&format!("node {}", n.name), cfg.validate())?;
        nodes.push(cfg);
    }
    let node_idx = |name: &str| {
        nodes.iter().position(|n| n.name == name).ok_or_else(|| Error::UnresolvedReference {
            kind: "node".into(),
            name: name.into(),
        })
    };
    let mut links = Vec::new();
    for l in net.links {
        links.push(LinkConfig {
            from: Port { node: node_idx(&l.from.node)?, degree: l.from.degree },
            to: Port { node: node_idx(&l.to.node)?, degree: l.to.degree },
            c_plus_l: matches!(l.kind, RawLinkKind::CPlusL),
            span: span(&l.span)?,
            name: l.name,
        });
    }
    let signal = |name: &str| {
        signals.iter().find(|s| s.name == name).cloned().ok_or_else(|| Error::UnresolvedReference {
            kind: "signal".into(),
            name: name.into(),
        })
    };
    let mut requests = Vec::new();
    for r in net.requests {
        requests.push(RouteRequest {
            from: node_idx(&r.from)?,
            to: node_idx(&r.to)?,
            band: r.band,
            signal: signal(&r.signal)?,
            transceiver: devices.transceiver(&r.transceiver)?.clone(),
            count: r.count,
        });
    }
    let network = NetworkConfig {
        grid: net_grid,
        nodes,
        links,
        requests,
    };
    // topology-level checks (port uniqueness, link ends) at load time
    in_config("network", network.build())?;

    let tb = raw.testbed;
    let mut transceivers = BTreeMap::new();
    for (b, name) in &tb.transceivers {
        transceivers.insert(*b, devices.transceiver(name)?.clone());
    }
    let testbed = TestbedParams {
        grid: in_config("test bed grid", Grid::new(&bands, tb.grid_spacing_ghz))?,
        wss_cl: devices.wss(&tb.wss_cl)?.clone(),
        wss_c: devices.wss(&tb.wss_c)?.clone(),
        mcs: devices.mcs(&tb.mcs)?.clone(),
        span: span(&tb.span)?,
        signal: signal(&tb.signal)?,
        transceivers,
    };

    let p = raw.penalty;
    let model = PenaltyModel {
        first_span_db: p.first_span_db,
        extra_span_db: p.extra_span_db,
        crosstalk_k: p.crosstalk_k,
        rolloff_db_per_db2: p.rolloff_db_per_db2,
        band_overrides: p.band_overrides,
    };
    in_config("penalty", model.validate())?;
    let pw = raw.power;
    let evaluation = Evaluation {
        model,
        plan: PowerPlan {
            point_a_dbm: pw.point_a_dbm,
            point_b_dbm: pw.point_b_dbm,
            point_c_dbm: pw.point_c_dbm,
            inline_amp_gain_db: pw.inline_amp_gain_db,
            floor_dbm: pw.floor_dbm,
        },
        launch_dbm: pw.launch_dbm,
        seed: raw.seed,
    };

    let scenarios = raw.scenarios.run.iter().map(|&n| scenario_id(n)).collect::<Result<Vec<_>>>()?;
    for s in &raw.scenarios.signals {
        in_config(&format!("test signal {}", s.label()), s.subcarriers_thz())?;
    }

    let sw = raw.sweep;
    if sw.subchannel == 0 || sw.subchannel > testbed.signal.subcarrier_count {
        return Err(Error::InvalidSpec {
            device: "sweep".into(),
            reason: format!(
                "subchannel {} outside 1..={}",
                sw.subchannel, testbed.signal.subcarrier_count
            ),
        });
    }
    let (lo, hi) = SWEEP_RANGE_DBM;
    if let Some(p) = sw.powers_dbm.iter().find(|p| !(lo..=hi).contains(*p)) {
        return Err(Error::InvalidSpec {
            device: "sweep".into(),
            reason: format!("power {p} dBm outside [{lo}, {hi}] dBm"),
        });
    }
    let sweep = SweepConfig {
        scenario: scenario_id(sw.scenario)?,
        band: sw.band,
        position: sw.position,
        subcarrier: sw.subchannel - 1,
        powers_dbm: sw.powers_dbm,
    };
    let budget = BudgetConfig {
        scenario: scenario_id(raw.budget.scenario)?,
        inline_amp_gain_db: raw.budget.inline_amp_gain_db,
    };

    Ok(RunConfig {
        seed: raw.seed,
        output_dir: raw.output_dir,
        bands,
        spacing_variant: variant,
        signals,
        devices,
        adddrop,
        network,
        testbed,
        scenarios,
        test_signals: raw.scenarios.signals,
        evaluation,
        sweep,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::scenario::table2_signals;

    #[test]
    fn defaults_match_builtins() {
        let cfg = RunConfig::paper_defaults().unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.devices.wss["wss-cl-1x9"], WssSpec::cl_1x9());
        assert_eq!(cfg.devices.mcs["mcs-cl-16x8"], McsSpec::cl_16x8());
        assert_eq!(cfg.evaluation, Evaluation::default());
        assert_eq!(cfg.test_signals, table2_signals());
        let tb = TestbedParams::default();
        assert_eq!(cfg.testbed.wss_cl, tb.wss_cl);
        assert_eq!(cfg.testbed.mcs, tb.mcs);
        assert_eq!(cfg.testbed.signal, tb.signal);
        assert_eq!(cfg.testbed.grid, tb.grid);
        assert_eq!(cfg.testbed.transceivers, tb.transceivers);
        assert_eq!(cfg.testbed.span.attenuation_db, 20.0);
        assert_eq!(cfg.testbed.span.coupler_loss_db, 0.5);
        assert_eq!(cfg.testbed.span.edfa_c.gain_db, 20.0);
        assert_eq!(cfg.sweep.subcarrier, 1);
        assert_eq!(cfg.signal("800G").unwrap().channel_spacing_ghz, 150.0);
        assert_eq!(cfg.signal("400G").unwrap().channel_spacing_ghz, 75.0);
    }

    #[test]
    fn open_roadm_variant() {
        let text = PAPER_DEFAULTS.replace("spacing_variant = \"oif\"", "spacing_variant = \"open-roadm\"");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.signal("400G").unwrap().channel_spacing_ghz, 87.5);
    }

    #[test]
    fn unresolved_reference_names_it() {
        let text = PAPER_DEFAULTS.replace("mcs = \"mcs-cl-16x8\"\nspan", "mcs = \"mcs-missing\"\nspan");
        match parse_config(&text) {
            Err(Error::UnresolvedReference { kind, name }) => {
                assert_eq!(kind, "mcs");
                assert_eq!(name, "mcs-missing");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fewer_ports_than_degrees_fails_at_load() {
        let text = PAPER_DEFAULTS.replacen("degrees = 2\nwss = \"wss-cl-1x9\"", "degrees = 12\nwss = \"wss-cl-1x9\"", 1);
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, Error::InsufficientPorts { ports: 9, degrees: 12 }), "{err:?}");
        assert!(err.is_config_error());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_config("seed = 1\noutput_dir = \n").unwrap_err();
        let Error::ConfigParse(msg) = &err else { panic!("{err:?}") };
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = PAPER_DEFAULTS.replace("seed = 1\n", "seed = 1\nsede = 2\n");
        assert!(matches!(parse_config(&text), Err(Error::ConfigParse(_))));
    }
}
