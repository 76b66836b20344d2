//! Bands, channel plans and signal classes.
//!
//! Frequencies are carried in THz, spacings and widths in GHz. Channel plans
//! are anchored at `low_edge + spacing / 2` and step upward, so the same band
//! and spacing always produce the same list of centers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slack used when flooring width/spacing ratios, so that 4800 / 50 is 96
/// even after THz -> GHz conversion noise.
const RATIO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BandName {
    C,
    L,
}

impl BandName {
    pub const ALL: [BandName; 2] = [BandName::C, BandName::L];
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandName::C => f.write_str("C"),
            BandName::L => f.write_str("L"),
        }
    }
}

impl FromStr for BandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "C" | "c" => Ok(BandName::C),
            "L" | "l" => Ok(BandName::L),
            other => Err(Error::InvalidArgument(format!("unknown band `{other}`"))),
        }
    }
}

/// A transmission window between two frequency edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: BandName,
    pub low_thz: f64,
    pub high_thz: f64,
}

impl Band {
    pub fn new(name: BandName, low_thz: f64, high_thz: f64) -> Result<Self> {
        if !(low_thz.is_finite() && high_thz.is_finite()) || high_thz <= low_thz || low_thz <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "band {name}: edges [{low_thz}, {high_thz}] THz are not increasing"
            )));
        }
        Ok(Band {
            name,
            low_thz,
            high_thz,
        })
    }

    /// 191.30 - 196.10 THz; 4.8 THz wide, 96 slots at 50 GHz.
    pub fn c_default() -> Self {
        Band {
            name: BandName::C,
            low_thz: 191.30,
            high_thz: 196.10,
        }
    }

    /// 186.05 - 190.85 THz; same width as the C band.
    pub fn l_default() -> Self {
        Band {
            name: BandName::L,
            low_thz: 186.05,
            high_thz: 190.85,
        }
    }

    pub fn default_for(name: BandName) -> Self {
        match name {
            BandName::C => Self::c_default(),
            BandName::L => Self::l_default(),
        }
    }

    pub fn width_ghz(&self) -> f64 {
        (self.high_thz - self.low_thz) * 1e3
    }

    pub fn contains(&self, freq_thz: f64) -> bool {
        freq_thz >= self.low_thz && freq_thz <= self.high_thz
    }

    pub fn center_thz(&self) -> f64 {
        0.5 * (self.low_thz + self.high_thz)
    }
}

/// Checks that C and L do not overlap and that C sits above L.
pub fn check_band_pair(c: &Band, l: &Band) -> Result<()> {
    if c.name != BandName::C || l.name != BandName::L {
        return Err(Error::InvalidArgument("expected a (C, L) band pair".into()));
    }
    if l.high_thz > c.low_thz {
        return Err(Error::InvalidArgument(format!(
            "L band upper edge {} THz overlaps C band lower edge {} THz",
            l.high_thz, c.low_thz
        )));
    }
    Ok(())
}

/// Which of the two published 400G spacings to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingVariant {
    /// 400ZR, 75 GHz.
    #[default]
    Oif,
    /// OpenROADM operational mode, 87.5 GHz.
    OpenRoadm,
}

/// Number of whole slots of `spacing_ghz` that fit into `band_width_ghz`.
pub fn channels_in_band(band_width_ghz: f64, spacing_ghz: f64) -> Result<usize> {
    if !(band_width_ghz > 0.0 && spacing_ghz > 0.0) || !band_width_ghz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "band width {band_width_ghz} GHz and spacing {spacing_ghz} GHz must be positive"
        )));
    }
    Ok((band_width_ghz / spacing_ghz + RATIO_EPS).floor() as usize)
}

/// WDM slot width for the dual-polarization 16QAM line rates.
pub fn spacing_for_signal(bit_rate_gbps: u32, variant: SpacingVariant) -> Result<f64> {
    match (bit_rate_gbps, variant) {
        (200, _) => Ok(50.0),
        (400, SpacingVariant::Oif) => Ok(75.0),
        (400, SpacingVariant::OpenRoadm) => Ok(87.5),
        (800, _) => Ok(150.0),
        (other, _) => Err(Error::UnsupportedSignal(other)),
    }
}

/// A line signal: rate, format, symbol rate and the slot it occupies.
///
/// `baud_rate_gbaud` is per subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalClass {
    pub name: String,
    pub bit_rate_gbps: u32,
    pub modulation: String,
    pub baud_rate_gbaud: f64,
    pub channel_spacing_ghz: f64,
    pub subcarrier_count: usize,
    pub subcarrier_spacing_ghz: f64,
}

impl SignalClass {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidSpec {
                device: format!("signal {}", self.name),
                reason,
            })
        };
        if self.subcarrier_count == 0 {
            return fail("subcarrier_count must be >= 1".into());
        }
        if !(self.baud_rate_gbaud > 0.0 && self.channel_spacing_ghz > 0.0) {
            return fail("baud rate and spacing must be positive".into());
        }
        let occupied = self.baud_rate_gbaud * self.subcarrier_count as f64;
        if self.channel_spacing_ghz + RATIO_EPS < occupied {
            return fail(format!(
                "{occupied} GHz of symbol bandwidth does not fit a {} GHz slot",
                self.channel_spacing_ghz
            ));
        }
        if self.subcarrier_count > 1 {
            subcarrier_offsets(
                self.subcarrier_count,
                self.subcarrier_spacing_ghz,
                self.channel_spacing_ghz,
            )?;
        }
        Ok(())
    }

    /// Single-carrier DP-16QAM class with the default spacing.
    pub fn dp16qam(bit_rate_gbps: u32, variant: SpacingVariant) -> Result<Self> {
        let baud = match bit_rate_gbps {
            200 => 32.0,
            400 => 64.0,
            800 => 130.0,
            other => return Err(Error::UnsupportedSignal(other)),
        };
        let spacing = spacing_for_signal(bit_rate_gbps, variant)?;
        Ok(SignalClass {
            name: format!("{bit_rate_gbps}G"),
            bit_rate_gbps,
            modulation: "DP-16QAM".into(),
            baud_rate_gbaud: baud,
            channel_spacing_ghz: spacing,
            subcarrier_count: 1,
            subcarrier_spacing_ghz: 0.0,
        })
    }

    /// Dual-carrier 1 Tb/s super-channel (2 x 500G) in a 150 GHz slot.
    pub fn dual_carrier_1t() -> Self {
        SignalClass {
            name: "1T-DC".into(),
            bit_rate_gbps: 1000,
            modulation: "DP-16QAM".into(),
            baud_rate_gbaud: 65.0,
            channel_spacing_ghz: 150.0,
            subcarrier_count: 2,
            subcarrier_spacing_ghz: 75.0,
        }
    }
}

/// The grid of slot centers for one band at one spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelPlan {
    pub band: Band,
    pub spacing_ghz: f64,
    pub centers_thz: Vec<f64>,
}

impl ChannelPlan {
    pub fn count(&self) -> usize {
        self.centers_thz.len()
    }

    pub fn center(&self, slot: usize) -> Option<f64> {
        self.centers_thz.get(slot).copied()
    }

    /// Slot whose center is closest to `freq_thz`, if the frequency falls in the band.
    pub fn nearest_slot(&self, freq_thz: f64) -> Option<usize> {
        if !self.band.contains(freq_thz) || self.centers_thz.is_empty() {
            return None;
        }
        let spacing_thz = self.spacing_ghz * 1e-3;
        let first = self.centers_thz[0];
        let idx = ((freq_thz - first) / spacing_thz).round();
        Some(idx.clamp(0.0, (self.count() - 1) as f64) as usize)
    }
}

pub fn build_channel_plan(band: Band, spacing_ghz: f64) -> Result<ChannelPlan> {
    let width = band.width_ghz();
    if !(spacing_ghz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spacing {spacing_ghz} GHz must be positive"
        )));
    }
    if spacing_ghz > width + RATIO_EPS {
        return Err(Error::EmptyPlan {
            spacing: spacing_ghz,
            width,
        });
    }
    let count = channels_in_band(width, spacing_ghz)?;
    let spacing_thz = spacing_ghz * 1e-3;
    let centers_thz = (0..count)
        .map(|i| band.low_thz + (i as f64 + 0.5) * spacing_thz)
        .collect();
    Ok(ChannelPlan {
        band,
        spacing_ghz,
        centers_thz,
    })
}

/// One channel plan per band, shared by every node and link of a network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    plans: BTreeMap<BandName, ChannelPlan>,
}

impl Grid {
    pub fn new(bands: &[Band], spacing_ghz: f64) -> Result<Self> {
        let mut plans = BTreeMap::new();
        for band in bands {
            plans.insert(band.name, build_channel_plan(*band, spacing_ghz)?);
        }
        Ok(Grid { plans })
    }

    /// Default C and L bands at the given spacing.
    pub fn c_and_l(spacing_ghz: f64) -> Result<Self> {
        Self::new(&[Band::c_default(), Band::l_default()], spacing_ghz)
    }

    pub fn plan(&self, band: BandName) -> Option<&ChannelPlan> {
        self.plans.get(&band)
    }

    pub fn plans(&self) -> impl Iterator<Item = &ChannelPlan> {
        self.plans.values()
    }

    pub fn slot_counts(&self) -> BTreeMap<BandName, usize> {
        self.plans.iter().map(|(b, p)| (*b, p.count())).collect()
    }

    pub fn bands(&self) -> Vec<Band> {
        self.plans.values().map(|p| p.band).collect()
    }
}

pub fn wavelength_to_frequency(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) || !lambda_nm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wavelength {lambda_nm} nm must be positive"
        )));
    }
    // c [m/s] / (lambda [nm] * 1e-9) / 1e12
    Ok(SPEED_OF_LIGHT * 1e-3 / lambda_nm)
}

pub fn frequency_to_wavelength(freq_thz: f64) -> Result<f64> {
    if !(freq_thz > 0.0) || !freq_thz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frequency {freq_thz} THz must be positive"
        )));
    }
    Ok(SPEED_OF_LIGHT * 1e-3 / freq_thz)
}

/// Offsets of each subcarrier from the slot center, in GHz.
fn subcarrier_offsets(subcarriers: usize, sub_spacing_ghz: f64, slot_width_ghz: f64) -> Result<Vec<f64>> {
    if subcarriers == 0 {
        return Err(Error::InvalidArgument("at least one subcarrier is required".into()));
    }
    if !(sub_spacing_ghz > 0.0) && subcarriers > 1 {
        return Err(Error::InvalidArgument(format!(
            "subcarrier spacing {sub_spacing_ghz} GHz must be positive"
        )));
    }
    let span = (subcarriers - 1) as f64 * sub_spacing_ghz;
    if span > slot_width_ghz + RATIO_EPS {
        return Err(Error::SlotOverflow {
            subcarriers,
            sub_spacing: sub_spacing_ghz,
            slot_width: slot_width_ghz,
        });
    }
    let mid = (subcarriers - 1) as f64 / 2.0;
    Ok((0..subcarriers)
        .map(|i| (i as f64 - mid) * sub_spacing_ghz)
        .collect())
}

/// Subcarrier frequencies laid out symmetrically around a slot center.
pub fn superchannel_centers(
    slot_center_thz: f64,
    subcarriers: usize,
    sub_spacing_ghz: f64,
    slot_width_ghz: f64,
) -> Result<Vec<f64>> {
    Ok(subcarrier_offsets(subcarriers, sub_spacing_ghz, slot_width_ghz)?
        .into_iter()
        .map(|off| slot_center_thz + off * 1e-3)
        .collect())
}
