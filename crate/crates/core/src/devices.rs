//! Parametric device models and switch state machines.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Band, BandName};

fn find_band(bands: &[Band], freq_thz: f64) -> Option<&Band> {
    bands.iter().find(|b| b.contains(freq_thz))
}

fn invalid(device: &str, reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        device: device.to_string(),
        reason: reason.into(),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 1xN wavelength selective switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WssSpec {
    pub name: String,
    pub port_count: usize,
    pub bands: Vec<Band>,
    pub loss_min_db: f64,
    pub loss_max_db: f64,
    pub loss_avg_low_db: f64,
    pub loss_avg_high_db: f64,
}

impl WssSpec {
    /// The measured C+L 1x9 LCoS prototype.
    pub fn cl_1x9() -> Self {
        WssSpec {
            name: "wss-cl-1x9".into(),
            port_count: 9,
            bands: vec![Band::c_default(), Band::l_default()],
            loss_min_db: 5.1,
            loss_max_db: 6.7,
            loss_avg_low_db: 5.5,
            loss_avg_high_db: 6.1,
        }
    }

    /// Same loss figures with a different port count and band set.
    pub fn with_ports(&self, name: &str, port_count: usize, bands: Vec<Band>) -> Self {
        WssSpec {
            name: name.into(),
            port_count,
            bands,
            ..self.clone()
        }
    }

    pub fn mode_db(&self) -> f64 {
        0.5 * (self.loss_avg_low_db + self.loss_avg_high_db)
    }

    /// Mean of the triangular loss distribution.
    pub fn mean_loss_db(&self) -> f64 {
        (self.loss_min_db + self.loss_max_db + self.mode_db()) / 3.0
    }

    pub fn supports(&self, band: BandName) -> bool {
        self.bands.iter().any(|b| b.name == band)
    }

    pub fn validate(&self) -> Result<()> {
        if self.port_count < 2 {
            return Err(invalid(&self.name, "port_count must be >= 2"));
        }
        if self.bands.is_empty() {
            return Err(invalid(&self.name, "no bands supported"));
        }
        let ordered = self.loss_min_db <= self.loss_avg_low_db
            && self.loss_avg_low_db <= self.loss_avg_high_db
            && self.loss_avg_high_db <= self.loss_max_db
            && self.loss_min_db >= 0.0;
        if !ordered {
            return Err(invalid(
                &self.name,
                "require 0 <= loss_min <= loss_avg_low <= loss_avg_high <= loss_max",
            ));
        }
        let mean = self.mean_loss_db();
        if self.loss_max_db > self.loss_min_db
            && !(self.loss_avg_low_db..=self.loss_avg_high_db).contains(&mean)
        {
            return Err(invalid(
                &self.name,
                format!("loss distribution mean {mean:.3} dB falls outside the stated average range"),
            ));
        }
        Ok(())
    }

    /// Deterministic per-(port, frequency, seed) insertion loss.
    pub fn insertion_loss(&self, port: usize, freq_thz: f64, seed: u64) -> Result<f64> {
        if port >= self.port_count {
            return Err(Error::OutOfRange(format!(
                "{}: port {port} >= {}",
                self.name, self.port_count
            )));
        }
        if find_band(&self.bands, freq_thz).is_none() {
            return Err(Error::BandUnsupported {
                device: self.name.clone(),
                what: format!("{freq_thz:.4} THz"),
            });
        }
        if self.loss_max_db <= self.loss_min_db {
            return Ok(self.loss_min_db);
        }
        // 1 MHz resolution on the frequency key.
        let freq_key = (freq_thz * 1e6).round() as i64 as u64;
        let key = splitmix64(splitmix64(splitmix64(seed) ^ port as u64) ^ freq_key);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let tri = Triangular::new(self.loss_min_db, self.loss_max_db, self.mode_db())
            .map_err(|e| invalid(&self.name, e.to_string()))?;
        Ok(tri.sample(&mut rng).clamp(self.loss_min_db, self.loss_max_db))
    }
}

/// DxC multicast switch (D degree ports, C client ports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsSpec {
    pub name: String,
    pub degree_ports: usize,
    pub client_ports: usize,
    pub excess_loss_db: f64,
    pub min_isolation_db: f64,
    /// Peak-to-peak isolation ripple above the floor across each band.
    pub isolation_ripple_db: f64,
    pub bands: Vec<Band>,
}

impl McsSpec {
    /// The PLC 16x8 C+L device.
    pub fn cl_16x8() -> Self {
        McsSpec {
            name: "mcs-cl-16x8".into(),
            degree_ports: 16,
            client_ports: 8,
            excess_loss_db: 2.5,
            min_isolation_db: 45.0,
            isolation_ripple_db: 0.0,
            bands: vec![Band::c_default(), Band::l_default()],
        }
    }

    pub fn with_clients(&self, client_ports: usize) -> Self {
        McsSpec {
            client_ports,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree_ports == 0 || self.client_ports == 0 {
            return Err(invalid(&self.name, "port counts must be positive"));
        }
        if !(self.min_isolation_db > 0.0) {
            return Err(invalid(&self.name, "min cumulative isolation must be > 0"));
        }
        if self.excess_loss_db < 0.0 || self.isolation_ripple_db < 0.0 {
            return Err(invalid(&self.name, "excess loss and ripple must be >= 0"));
        }
        if self.bands.is_empty() {
            return Err(invalid(&self.name, "no bands supported"));
        }
        Ok(())
    }

    pub fn supports(&self, band: BandName) -> bool {
        self.bands.iter().any(|b| b.name == band)
    }

    /// Splitting loss, 10 log10(C).
    pub fn intrinsic_loss_db(&self) -> f64 {
        10.0 * (self.client_ports as f64).log10()
    }

    pub fn insertion_loss_db(&self) -> f64 {
        self.intrinsic_loss_db() + self.excess_loss_db
    }

    /// Cumulative same-wavelength isolation: the floor plus a raised-cosine
    /// ripple that peaks at the band edges.
    pub fn cumulative_isolation_db(&self, freq_thz: f64) -> Result<f64> {
        let band = find_band(&self.bands, freq_thz).ok_or_else(|| Error::BandUnsupported {
            device: self.name.clone(),
            what: format!("{freq_thz:.4} THz"),
        })?;
        let x = (freq_thz - band.low_thz) / (band.high_thz - band.low_thz);
        let shape = 0.5 + 0.5 * (2.0 * std::f64::consts::PI * x).cos();
        Ok(self.min_isolation_db + self.isolation_ripple_db * shape)
    }
}

/// Single-band EDFA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdfaSpec {
    pub name: String,
    pub band: BandName,
    pub gain_db: f64,
    pub max_output_dbm: f64,
}

impl EdfaSpec {
    pub fn new(name: &str, band: BandName, gain_db: f64) -> Self {
        EdfaSpec {
            name: name.into(),
            band,
            gain_db,
            max_output_dbm: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gain_db.is_finite() || self.gain_db < 0.0 {
            return Err(invalid(&self.name, "gain must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn apply(&self, power_in_dbm: f64, band: BandName) -> Result<f64> {
        if band != self.band {
            return Err(Error::BandUnsupported {
                device: self.name.clone(),
                what: format!("{band} band signal"),
            });
        }
        if !power_in_dbm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{}: input power {power_in_dbm} is not finite",
                self.name
            )));
        }
        Ok((power_in_dbm + self.gain_db).min(self.max_output_dbm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplerKind {
    Mux,
    Demux,
}

/// C/L band WDM coupler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerSpec {
    pub name: String,
    pub kind: CouplerKind,
    pub loss_per_pass_db: f64,
}

impl CouplerSpec {
    pub fn new(name: &str, kind: CouplerKind) -> Self {
        CouplerSpec {
            name: name.into(),
            kind,
            loss_per_pass_db: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loss_per_pass_db >= 0.0) {
            return Err(invalid(&self.name, "loss_per_pass must be >= 0"));
        }
        Ok(())
    }
}

/// Fixed attenuator; stands in for transmission fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuatorSpec {
    pub name: String,
    pub loss_db: f64,
}

impl AttenuatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.loss_db >= 0.0) {
            return Err(invalid(&self.name, "loss must be >= 0"));
        }
        Ok(())
    }
}

/// Coherent transceiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransceiverSpec {
    pub name: String,
    pub bands: Vec<BandName>,
    pub fec_threshold_q_db: f64,
    /// Q margin above the FEC threshold measured in back-to-back loopback.
    pub loopback_margin_db: f64,
    pub sensitivity_min_dbm: f64,
    pub sensitivity_max_dbm: f64,
}

impl TransceiverSpec {
    pub fn single_band(band: BandName) -> Self {
        TransceiverSpec {
            name: format!("trx-{band}"),
            bands: vec![band],
            fec_threshold_q_db: 6.0,
            loopback_margin_db: 4.0,
            sensitivity_min_dbm: -20.0,
            sensitivity_max_dbm: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(invalid(&self.name, "no bands supported"));
        }
        if !(self.sensitivity_min_dbm < self.sensitivity_max_dbm) {
            return Err(invalid(&self.name, "sensitivity_min must be < sensitivity_max"));
        }
        Ok(())
    }

    pub fn supports(&self, band: BandName) -> bool {
        self.bands.contains(&band)
    }

    pub fn band_label(&self) -> String {
        self.bands
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// A WSS channel: one slot of one band's channel plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChannelKey {
    pub band: BandName,
    pub slot: usize,
}

impl fmt::Display for ChannelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.band, self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutePolicy {
    /// Routing a channel that is already on another port fails.
    #[default]
    Strict,
    /// The newer route replaces the old one.
    Replace,
}

/// Channel-to-service-port map of one WSS. Each channel reaches the common
/// port through at most one service port.
#[derive(Debug, Clone, PartialEq)]
pub struct WssState {
    pub device: String,
    port_count: usize,
    slots: BTreeMap<BandName, usize>,
    policy: RoutePolicy,
    routes: BTreeMap<ChannelKey, usize>,
}

impl WssState {
    /// `slots` gives the number of plan slots per supported band.
    pub fn new(device: &str, port_count: usize, slots: BTreeMap<BandName, usize>, policy: RoutePolicy) -> Self {
        WssState {
            device: device.into(),
            port_count,
            slots,
            policy,
            routes: BTreeMap::new(),
        }
    }

    pub fn port_count(&self) -> usize {
        self.port_count
    }

    pub fn route(&mut self, port: usize, channel: ChannelKey) -> Result<()> {
        if port >= self.port_count {
            return Err(Error::OutOfRange(format!(
                "{}: service port {port} >= {}",
                self.device, self.port_count
            )));
        }
        match self.slots.get(&channel.band) {
            None => {
                return Err(Error::BandUnsupported {
                    device: self.device.clone(),
                    what: format!("{} band channel", channel.band),
                })
            }
            Some(&n) if channel.slot >= n => {
                return Err(Error::OutOfRange(format!(
                    "{}: channel {channel} beyond {n} slots",
                    self.device
                )))
            }
            Some(_) => {}
        }
        if let Some(&existing) = self.routes.get(&channel) {
            if existing != port && self.policy == RoutePolicy::Strict {
                return Err(Error::Contention {
                    device: self.device.clone(),
                    channel: channel.to_string(),
                    existing,
                });
            }
        }
        self.routes.insert(channel, port);
        Ok(())
    }

    pub fn release(&mut self, channel: ChannelKey) -> Option<usize> {
        self.routes.remove(&channel)
    }

    pub fn port_of(&self, channel: ChannelKey) -> Option<usize> {
        self.routes.get(&channel).copied()
    }

    pub fn routes(&self) -> &BTreeMap<ChannelKey, usize> {
        &self.routes
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}

/// Client-to-degree connections of one MCS.
#[derive(Debug, Clone, PartialEq)]
pub struct McsState {
    pub device: String,
    degree_ports: usize,
    connections: Vec<Option<usize>>,
}

impl McsState {
    pub fn new(device: &str, spec: &McsSpec) -> Self {
        McsState {
            device: device.into(),
            degree_ports: spec.degree_ports,
            connections: vec![None; spec.client_ports],
        }
    }

    pub fn client_ports(&self) -> usize {
        self.connections.len()
    }

    pub fn degree_ports(&self) -> usize {
        self.degree_ports
    }

    pub fn connect(&mut self, client: usize, degree: usize) -> Result<()> {
        if client >= self.connections.len() || degree >= self.degree_ports {
            return Err(Error::OutOfRange(format!(
                "{}: client {client} / degree {degree} outside {}x{}",
                self.device,
                self.degree_ports,
                self.connections.len()
            )));
        }
        if let Some(existing) = self.connections[client] {
            return Err(Error::ClientBusy {
                device: self.device.clone(),
                client,
                degree: existing,
            });
        }
        self.connections[client] = Some(degree);
        Ok(())
    }

    pub fn disconnect(&mut self, client: usize) -> Option<usize> {
        self.connections.get_mut(client).and_then(Option::take)
    }

    pub fn degree_of(&self, client: usize) -> Option<usize> {
        self.connections.get(client).copied().flatten()
    }

    pub fn is_free(&self, client: usize) -> bool {
        matches!(self.connections.get(client), Some(None))
    }

    pub fn connected(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.connections
            .iter()
            .enumerate()
            .filter_map(|(c, d)| d.map(|d| (c, d)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_slots(n: usize) -> BTreeMap<BandName, usize> {
        BTreeMap::from([(BandName::C, n)])
    }

    #[test]
    fn wss_loss_range_and_determinism() {
        let spec = WssSpec::cl_1x9();
        spec.validate().unwrap();
        let a = spec.insertion_loss(3, 193.1, 7).unwrap();
        let b = spec.insertion_loss(3, 193.1, 7).unwrap();
        assert_eq!(a, b);
        assert!((5.1..=6.7).contains(&a));
        assert_ne!(a, spec.insertion_loss(4, 193.1, 7).unwrap());
    }

    #[test]
    fn wss_loss_out_of_band() {
        let spec = WssSpec::cl_1x9();
        assert!(matches!(
            spec.insertion_loss(0, 200.0, 1),
            Err(Error::BandUnsupported { .. })
        ));
        assert!(matches!(
            spec.insertion_loss(9, 193.1, 1),
            Err(Error::OutOfRange(_))
        ));
        let c_only = spec.with_ports("wss-c", 9, vec![Band::c_default()]);
        assert!(c_only.insertion_loss(0, 188.0, 1).is_err());
    }

    #[test]
    fn wss_mean_over_ports_and_grid() {
        let spec = WssSpec::cl_1x9();
        let plan = crate::spectrum::build_channel_plan(Band::c_default(), 75.0).unwrap();
        assert_eq!(plan.count(), 64);
        let mut sum = 0.0;
        for port in 0..9 {
            for &f in &plan.centers_thz {
                sum += spec.insertion_loss(port, f, 1).unwrap();
            }
        }
        let mean = sum / (9.0 * 64.0);
        assert!((5.5..=6.1).contains(&mean), "{mean}");
    }

    #[test]
    fn wss_spec_validation() {
        let mut spec = WssSpec::cl_1x9();
        spec.port_count = 1;
        assert!(spec.validate().is_err());
        let mut spec = WssSpec::cl_1x9();
        spec.loss_avg_low_db = 7.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn mcs_losses() {
        let spec = McsSpec::cl_16x8();
        assert!((spec.intrinsic_loss_db() - 9.03).abs() < 0.05);
        assert!((spec.insertion_loss_db() - 11.5309).abs() < 1e-4);
        let unity = McsSpec {
            client_ports: 1,
            excess_loss_db: 0.0,
            ..McsSpec::cl_16x8()
        };
        assert_eq!(unity.insertion_loss_db(), 0.0);
        assert!((spec.with_clients(16).insertion_loss_db() - 14.5412).abs() < 1e-4);
    }

    #[test]
    fn intrinsic_loss_is_exact() {
        for c in [4usize, 8, 12, 16, 24] {
            let spec = McsSpec::cl_16x8().with_clients(c);
            assert!((spec.intrinsic_loss_db() - 10.0 * (c as f64).log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn mcs_isolation() {
        let spec = McsSpec::cl_16x8();
        let c = Band::c_default();
        assert_eq!(spec.cumulative_isolation_db(c.center_thz()).unwrap(), 45.0);
        assert_eq!(spec.cumulative_isolation_db(c.low_thz).unwrap(), 45.0);
        assert!(spec.cumulative_isolation_db(170.0).is_err());

        let rippled = McsSpec {
            isolation_ripple_db: 1.5,
            ..McsSpec::cl_16x8()
        };
        let edge = rippled.cumulative_isolation_db(c.low_thz).unwrap();
        let mid = rippled.cumulative_isolation_db(c.center_thz()).unwrap();
        assert!(mid >= 45.0 && edge >= 45.0);
        assert!((edge - mid).abs() <= 1.5 + 1e-12);
    }

    #[test]
    fn edfa_behaviour() {
        let amp = EdfaSpec::new("c-edfa", BandName::C, 20.0);
        assert_eq!(amp.apply(-15.0, BandName::C).unwrap(), 5.0);
        assert!(matches!(
            amp.apply(-15.0, BandName::L),
            Err(Error::BandUnsupported { .. })
        ));
        let flat = EdfaSpec::new("flat", BandName::L, 0.0);
        assert_eq!(flat.apply(-3.25, BandName::L).unwrap(), -3.25);
        assert_eq!(amp.apply(10.0, BandName::C).unwrap(), 20.0);
    }

    #[test]
    fn wss_routing() {
        let mut st = WssState::new("wss", 9, c_slots(96), RoutePolicy::Strict);
        let ch5 = ChannelKey { band: BandName::C, slot: 5 };
        st.route(2, ch5).unwrap();
        assert!(matches!(st.route(3, ch5), Err(Error::Contention { existing: 2, .. })));
        assert_eq!(st.port_of(ch5), Some(2));
        st.route(2, ch5).unwrap();

        let mut all = WssState::new("wss", 9, c_slots(96), RoutePolicy::Strict);
        for slot in 0..96 {
            all.route(slot % 9, ChannelKey { band: BandName::C, slot }).unwrap();
        }
        assert_eq!(all.len(), 96);

        let mut lax = WssState::new("wss", 9, c_slots(96), RoutePolicy::Replace);
        lax.route(2, ch5).unwrap();
        lax.route(3, ch5).unwrap();
        assert_eq!(lax.port_of(ch5), Some(3));

        assert!(st
            .route(0, ChannelKey { band: BandName::L, slot: 0 })
            .is_err());
        assert!(st
            .route(0, ChannelKey { band: BandName::C, slot: 96 })
            .is_err());
    }

    #[test]
    fn mcs_connections() {
        let spec = McsSpec::cl_16x8();
        let mut st = McsState::new("mcs", &spec);
        st.connect(0, 3).unwrap();
        assert!(matches!(
            st.connect(0, 5),
            Err(Error::ClientBusy { client: 0, degree: 3, .. })
        ));
        let mut full = McsState::new("mcs", &spec);
        for c in 0..8 {
            full.connect(c, c + 4).unwrap();
        }
        assert_eq!(full.connected().count(), 8);
        assert!(full.connect(8, 0).is_err());
        assert_eq!(full.disconnect(2), Some(6));
        assert!(full.is_free(2));
    }
}
