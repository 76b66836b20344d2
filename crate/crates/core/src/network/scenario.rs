//! The two-link C+L test bed and its three routing scenarios.
//!
//! Three CL_MULTIBAND nodes are chained by a C+L link and a C-only link.
//! Degree 0 of each node faces the C+L link through C+L WSSs, degree 1 faces
//! the C-only link through C-band WSSs. The middle node's drop WSS on one
//! degree is looped into the add WSS of the other, which gives the C signal
//! its second span.
//!
//! | scenario | fiber order   | C route  | L route |
//! |----------|---------------|----------|---------|
//! | 1        | C+L, then C   | C+L      | C+L     |
//! | 2        | C+L, then C   | C+L, C   | C+L     |
//! | 3        | C, then C+L   | C, C+L   | C+L     |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::devices::{McsSpec, TransceiverSpec, WssSpec};
use crate::error::{Error, Result};
use crate::impairment::{inline_amp_benefit, input_power_sweep, q_margin, Evaluation, QReport};
use crate::network::{Lightpath, LightpathRequest, Link, Port, RouteChoice, SlotChoice, SpanParams, Topology};
use crate::node::{build_node, NodeArchitecture, NodeConfig};
use crate::spectrum::{wavelength_to_frequency, Band, BandName, Grid, SignalClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ScenarioId {
    One,
    Two,
    Three,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [ScenarioId::One, ScenarioId::Two, ScenarioId::Three];

    pub fn number(self) -> u8 {
        match self {
            ScenarioId::One => 1,
            ScenarioId::Two => 2,
            ScenarioId::Three => 3,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(ScenarioId::One),
            "2" => Ok(ScenarioId::Two),
            "3" => Ok(ScenarioId::Three),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Short,
    Middle,
    Long,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Short => "short",
            Position::Middle => "middle",
            Position::Long => "long",
        })
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "short" => Ok(Position::Short),
            "middle" => Ok(Position::Middle),
            "long" => Ok(Position::Long),
            other => Err(Error::InvalidArgument(format!("unknown signal position `{other}`"))),
        }
    }
}

/// One dual-carrier test super-channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSignal {
    pub band: BandName,
    pub position: Position,
    pub subcarriers_nm: [f64; 2],
}

impl TestSignal {
    pub fn label(&self) -> String {
        format!("{}-{}", self.band, self.position)
    }

    pub fn subcarriers_thz(&self) -> Result<Vec<f64>> {
        self.subcarriers_nm.iter().map(|&nm| wavelength_to_frequency(nm)).collect()
    }
}

/// The six measured test super-channels.
pub fn table2_signals() -> Vec<TestSignal> {
    let mk = |band, position, a, b| TestSignal {
        band,
        position,
        subcarriers_nm: [a, b],
    };
    vec![
        mk(BandName::C, Position::Short, 1532.68, 1533.27),
        mk(BandName::C, Position::Middle, 1546.32, 1546.92),
        mk(BandName::C, Position::Long, 1563.86, 1564.47),
        mk(BandName::L, Position::Short, 1572.48, 1573.09),
        mk(BandName::L, Position::Middle, 1588.09, 1588.73),
        mk(BandName::L, Position::Long, 1606.61, 1607.25),
    ]
}

/// Device and link parameters of the test bed.
#[derive(Debug, Clone, PartialEq)]
pub struct TestbedParams {
    pub grid: Grid,
    pub wss_cl: WssSpec,
    pub wss_c: WssSpec,
    pub mcs: McsSpec,
    pub span: SpanParams,
    pub signal: SignalClass,
    pub transceivers: BTreeMap<BandName, TransceiverSpec>,
}

impl Default for TestbedParams {
    fn default() -> Self {
        let wss_cl = WssSpec::cl_1x9();
        TestbedParams {
            grid: Grid::c_and_l(150.0).expect("default bands hold a 150 GHz plan"),
            wss_c: wss_cl.with_ports("wss-c-1x9", 9, vec![Band::c_default()]),
            wss_cl,
            mcs: McsSpec::cl_16x8(),
            span: SpanParams::default(),
            signal: SignalClass::dual_carrier_1t(),
            transceivers: BandName::ALL
                .into_iter()
                .map(|b| (b, TransceiverSpec::single_band(b)))
                .collect(),
        }
    }
}

/// Which nodes and links a band's signal crosses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BandRoute {
    pub src: usize,
    pub dst: usize,
    pub links: Vec<usize>,
}

/// Service-port interconnect inside a node used as a span loopback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Loopback {
    pub node: usize,
    pub drop_degree: usize,
    pub drop_port: usize,
    pub add_degree: usize,
    pub add_port: usize,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: ScenarioId,
    pub topology: Topology,
    pub routes: BTreeMap<BandName, BandRoute>,
    pub loopbacks: Vec<Loopback>,
    pub params: TestbedParams,
}

impl Scenario {
    pub fn span_count(&self, band: BandName) -> usize {
        self.routes.get(&band).map_or(0, |r| r.links.len())
    }
}

pub fn build_scenario(id: ScenarioId, params: &TestbedParams) -> Result<Scenario> {
    let grid = params.grid.clone();
    let mut topo = Topology::new(grid.clone());
    for name in ["N1", "N2", "N3"] {
        let mut cfg = NodeConfig::new(name, NodeArchitecture::ClMultiband, 2, params.wss_cl.clone(), params.mcs.clone());
        cfg.degree_wss.insert(1, params.wss_c.clone());
        topo.add_node(build_node(&cfg, &grid)?);
    }
    let cl = |from: usize, to: usize| {
        Link::c_plus_l(
            "link-cl",
            Port { node: from, degree: 0 },
            Port { node: to, degree: 0 },
            &params.span,
        )
    };
    let c = |from: usize, to: usize| {
        Link::c_only(
            "link-c",
            Port { node: from, degree: 1 },
            Port { node: to, degree: 1 },
            &params.span,
        )
    };
    let (first, second) = match id {
        ScenarioId::One | ScenarioId::Two => (cl(0, 1), c(1, 2)),
        ScenarioId::Three => (c(0, 1), cl(1, 2)),
    };
    let first = topo.add_link(first)?;
    let second = topo.add_link(second)?;
    let (c_route, l_route) = match id {
        ScenarioId::One => (
            BandRoute { src: 0, dst: 1, links: vec![first] },
            BandRoute { src: 0, dst: 1, links: vec![first] },
        ),
        ScenarioId::Two => (
            BandRoute { src: 0, dst: 2, links: vec![first, second] },
            BandRoute { src: 0, dst: 1, links: vec![first] },
        ),
        ScenarioId::Three => (
            BandRoute { src: 0, dst: 2, links: vec![first, second] },
            BandRoute { src: 1, dst: 2, links: vec![second] },
        ),
    };
    let mid = topo.node(1)?;
    let loopbacks = vec![
        Loopback {
            node: 1,
            drop_degree: 0,
            drop_port: mid.interconnect_port(0, 1)?,
            add_degree: 1,
            add_port: mid.interconnect_port(1, 0)?,
        },
        Loopback {
            node: 1,
            drop_degree: 1,
            drop_port: mid.interconnect_port(1, 0)?,
            add_degree: 0,
            add_port: mid.interconnect_port(0, 1)?,
        },
    ];
    Ok(Scenario {
        id,
        topology: topo,
        routes: BTreeMap::from([(BandName::C, c_route), (BandName::L, l_route)]),
        loopbacks,
        params: params.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalResult {
    pub signal: TestSignal,
    pub lightpath: Lightpath,
    /// One report per subcarrier.
    pub reports: Vec<QReport>,
}

impl SignalResult {
    pub fn worst_margin_db(&self) -> f64 {
        self.reports
            .iter()
            .map(|r| r.margin_db)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn error_free(&self) -> bool {
        self.reports
            .iter()
            .all(|r| r.verdict == crate::impairment::Verdict::ErrorFree)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub results: Vec<SignalResult>,
}

impl ScenarioRun {
    pub fn result(&self, band: BandName, position: Position) -> Option<&SignalResult> {
        self.results
            .iter()
            .find(|r| r.signal.band == band && r.signal.position == position)
    }

    fn transceiver(&self, band: BandName) -> Result<&TransceiverSpec> {
        self.scenario
            .params
            .transceivers
            .get(&band)
            .ok_or_else(|| Error::UnresolvedReference {
                kind: "transceiver".into(),
                name: format!("{band} band"),
            })
    }

    /// Margin vs point-A power for one subcarrier of one test signal.
    pub fn sweep(&self, band: BandName, position: Position, subcarrier: usize, eval: &Evaluation, powers: &[f64]) -> Result<Vec<(f64, f64)>> {
        let res = self
            .result(band, position)
            .ok_or_else(|| Error::InvalidArgument(format!("no {band}-{position} signal in this run")))?;
        input_power_sweep(&res.lightpath, subcarrier, eval, self.transceiver(band)?, powers)
    }

    pub fn inline_amp_benefit(&self, band: BandName, position: Position, subcarrier: usize, eval: &Evaluation, gain_db: f64) -> Result<f64> {
        let res = self
            .result(band, position)
            .ok_or_else(|| Error::InvalidArgument(format!("no {band}-{position} signal in this run")))?;
        inline_amp_benefit(&res.lightpath, subcarrier, eval, self.transceiver(band)?, gain_db)
    }
}

/// Provisions each test signal on its band's prescribed route and scores it.
pub fn run_scenario(mut scenario: Scenario, signals: &[TestSignal], eval: &Evaluation) -> Result<ScenarioRun> {
    let mut results = Vec::with_capacity(signals.len());
    for sig in signals {
        let route = scenario
            .routes
            .get(&sig.band)
            .ok_or_else(|| Error::InvalidArgument(format!("scenario has no {} route", sig.band)))?
            .clone();
        let trx = scenario
            .params
            .transceivers
            .get(&sig.band)
            .ok_or_else(|| Error::UnresolvedReference {
                kind: "transceiver".into(),
                name: format!("{} band", sig.band),
            })?
            .clone();
        let subs = sig.subcarriers_thz()?;
        let mid = 0.5 * (subs[0] + subs[1]);
        let slot = scenario
            .topology
            .grid()
            .plan(sig.band)
            .and_then(|p| p.nearest_slot(mid))
            .ok_or_else(|| Error::InvalidArgument(format!("{} lies outside its band", sig.label())))?;
        let req = LightpathRequest {
            src: route.src,
            dst: route.dst,
            signal: scenario.params.signal.clone(),
            band: sig.band,
            transceiver: trx.clone(),
            slot: SlotChoice::Fixed(slot),
            route: RouteChoice::Links(route.links.clone()),
            subcarriers_thz: Some(subs),
        };
        let lp = scenario.topology.provision(&req)?;
        let reports = (0..lp.subcarriers_thz.len())
            .map(|i| q_margin(&lp, i, eval, &trx))
            .collect::<Result<Vec<_>>>()?;
        results.push(SignalResult {
            signal: sig.clone(),
            lightpath: lp,
            reports,
        });
    }
    Ok(ScenarioRun { scenario, results })
}
