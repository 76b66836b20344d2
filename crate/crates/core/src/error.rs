use thiserror::Error;

use crate::spectrum::BandName;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported signal: {0} Gbps")]
    UnsupportedSignal(u32),

    #[error("spacing {spacing} GHz does not fit in a {width} GHz band")]
    EmptyPlan { spacing: f64, width: f64 },

    #[error("{subcarriers} subcarriers at {sub_spacing} GHz overflow a {slot_width} GHz slot")]
    SlotOverflow {
        subcarriers: usize,
        sub_spacing: f64,
        slot_width: f64,
    },

    #[error("invalid device spec `{device}`: {reason}")]
    InvalidSpec { device: String, reason: String },

    #[error("{device}: {what} is outside the supported bands")]
    BandUnsupported { device: String, what: String },

    #[error("{device}: channel {channel} already routed to port {existing}")]
    Contention {
        device: String,
        channel: String,
        existing: usize,
    },

    #[error("{device}: client {client} already connected to degree {degree}")]
    ClientBusy {
        device: String,
        client: usize,
        degree: usize,
    },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient ports: {ports} WSS ports cannot interconnect {degrees} degrees")]
    InsufficientPorts { ports: usize, degrees: usize },

    #[error("over-subscription: {requested} MCS banks requested, at most {max} fit")]
    OverSubscribed { requested: usize, max: usize },

    #[error("mis-plug: {band_list} transceiver cannot use a {bank_band} bank")]
    MisPlug { band_list: String, bank_band: String },

    #[error("spectrum blocked: no free {band} slot on route")]
    SpectrumBlocked { band: BandName },

    #[error("port blocked: {0}")]
    PortBlocked(String),

    #[error("band blocked: link `{link}` does not carry the {band} band")]
    BandBlocked { link: String, band: BandName },

    #[error("no route from node {from} to node {to}")]
    NoRoute { from: usize, to: usize },

    #[error("unknown lightpath {0}")]
    UnknownLightpath(usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("signal lost at `{element}`: {power:.2} dBm below floor {floor:.2} dBm")]
    SignalLost {
        element: String,
        power: f64,
        floor: f64,
    },

    #[error("crosstalk penalty saturated: k*sqrt(eps) = {0:.4} >= 1")]
    SaturatedPenalty(f64),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("unresolved reference: {kind} `{name}` is not defined")]
    UnresolvedReference { kind: String, name: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Configuration problems (as opposed to simulation outcomes).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse(_)
                | Error::UnresolvedReference { .. }
                | Error::InvalidSpec { .. }
                | Error::InsufficientPorts { .. }
                | Error::OverSubscribed { .. }
                | Error::EmptyPlan { .. }
                | Error::Io(_)
        )
    }

    /// Provisioning refusals are reported outcomes rather than failures.
    pub fn is_blocking(&self) -> bool {
        matches!(
            self,
            Error::SpectrumBlocked { .. } | Error::PortBlocked(_) | Error::BandBlocked { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
