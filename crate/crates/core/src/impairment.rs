//! Power budget, crosstalk and Q-margin accounting along a lightpath.
//!
//! The Q model is a penalty ledger calibrated to measured degradations: a
//! first-span penalty, a penalty per additional span, an in-band crosstalk
//! term from the MCS isolation, and a receiver power penalty that is zero
//! inside the transceiver's sensitivity window. All powers are per
//! subchannel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::devices::TransceiverSpec;
use crate::error::{Error, Result};
use crate::network::{ElementKind, Lightpath, PowerPoint};
use crate::spectrum::BandName;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub element: String,
    pub power_in_dbm: f64,
    pub delta_db: f64,
    pub power_out_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTrace {
    pub launch_dbm: f64,
    pub entries: Vec<TraceEntry>,
}

impl PowerTrace {
    pub fn output_dbm(&self) -> f64 {
        self.entries.last().map_or(self.launch_dbm, |e| e.power_out_dbm)
    }

    pub fn total_delta_db(&self) -> f64 {
        self.entries.iter().map(|e| e.delta_db).sum()
    }

    /// Power entering the element with the given id.
    pub fn power_at(&self, element: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.element == element)
            .map(|e| e.power_in_dbm)
    }
}

/// Fixed powers enforced at the marked points, plus the optional amplifier
/// between the drop WSS and drop MCS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPlan {
    pub point_a_dbm: Option<f64>,
    pub point_b_dbm: Option<f64>,
    pub point_c_dbm: Option<f64>,
    pub inline_amp_gain_db: Option<f64>,
    pub floor_dbm: f64,
}

impl Default for PowerPlan {
    fn default() -> Self {
        PowerPlan {
            point_a_dbm: Some(5.0),
            point_b_dbm: Some(2.0),
            point_c_dbm: Some(5.0),
            inline_amp_gain_db: None,
            floor_dbm: -60.0,
        }
    }
}

impl PowerPlan {
    /// No setpoints: every element contributes its own loss or gain.
    pub fn open_loop() -> Self {
        PowerPlan {
            point_a_dbm: None,
            point_b_dbm: None,
            point_c_dbm: None,
            inline_amp_gain_db: None,
            floor_dbm: -60.0,
        }
    }

    fn setpoint(&self, point: PowerPoint) -> Option<f64> {
        match point {
            PowerPoint::A => self.point_a_dbm,
            PowerPoint::B => self.point_b_dbm,
            PowerPoint::C => self.point_c_dbm,
        }
    }
}

/// Walks the lightpath elements for one subcarrier. Every entry satisfies
/// `power_out == power_in + delta`.
pub fn propagate_power(lp: &Lightpath, freq_thz: f64, launch_dbm: f64, plan: &PowerPlan, seed: u64) -> Result<PowerTrace> {
    if !launch_dbm.is_finite() {
        return Err(Error::InvalidArgument(format!("launch power {launch_dbm} is not finite")));
    }
    let mut entries = Vec::with_capacity(lp.elements.len());
    let mut power = launch_dbm;
    for el in &lp.elements {
        let delta = match &el.kind {
            ElementKind::Transmitter | ElementKind::Receiver => 0.0,
            ElementKind::Mcs { spec } => -spec.insertion_loss_db(),
            ElementKind::Wss { spec, port } => -spec.insertion_loss(*port, freq_thz, seed)?,
            ElementKind::Splitter { ports } => -10.0 * (*ports as f64).log10(),
            ElementKind::Coupler { loss_db } | ElementKind::Attenuator { loss_db } => -loss_db,
            ElementKind::Amplifier { stage } => {
                let amp = stage
                    .iter()
                    .find(|a| a.band == lp.band)
                    .ok_or_else(|| Error::BandUnsupported {
                        device: el.id.clone(),
                        what: format!("{} band signal", lp.band),
                    })?;
                amp.apply(power, lp.band)? - power
            }
            ElementKind::PowerPoint { point } => plan.setpoint(*point).map_or(0.0, |target| target - power),
            ElementKind::InlineAmpSlot => plan.inline_amp_gain_db.unwrap_or(0.0),
        };
        let out = power + delta;
        entries.push(TraceEntry {
            element: el.id.clone(),
            power_in_dbm: power,
            delta_db: delta,
            power_out_dbm: out,
        });
        if out < plan.floor_dbm {
            return Err(Error::SignalLost {
                element: el.id.clone(),
                power: out,
                floor: plan.floor_dbm,
            });
        }
        power = out;
    }
    Ok(PowerTrace { launch_dbm, entries })
}

/// Same-wavelength crosstalk penalty, `-10 log10(1 - k sqrt(eps))` with
/// `eps` the summed leakage of all isolations.
pub fn crosstalk_penalty(isolations_db: &[f64], k: f64) -> Result<f64> {
    if let Some(bad) = isolations_db.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::InvalidArgument(format!("isolation {bad} dB must be positive")));
    }
    let eps: f64 = isolations_db.iter().map(|x| 10f64.powf(-x / 10.0)).sum();
    let field = k * eps.sqrt();
    if field >= 1.0 {
        return Err(Error::SaturatedPenalty(field));
    }
    Ok((-10.0 * (1.0 - field).log10()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanPenalty {
    pub first_span_db: f64,
    pub extra_span_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyModel {
    pub first_span_db: f64,
    pub extra_span_db: f64,
    pub crosstalk_k: f64,
    /// Receiver penalty per dB^2 of excursion outside the sensitivity window.
    pub rolloff_db_per_db2: f64,
    #[serde(default)]
    pub band_overrides: BTreeMap<BandName, SpanPenalty>,
}

impl Default for PenaltyModel {
    fn default() -> Self {
        PenaltyModel {
            first_span_db: 1.5,
            extra_span_db: 1.0,
            crosstalk_k: 2.0,
            rolloff_db_per_db2: 0.5,
            band_overrides: BTreeMap::new(),
        }
    }
}

impl PenaltyModel {
    pub fn validate(&self) -> Result<()> {
        let all_spans = std::iter::once((self.first_span_db, self.extra_span_db))
            .chain(self.band_overrides.values().map(|p| (p.first_span_db, p.extra_span_db)));
        for (p1, p2) in all_spans {
            if !(p1 >= 0.0 && p2 >= 0.0) {
                return Err(Error::InvalidArgument("span penalties must be >= 0".into()));
            }
        }
        if !(self.crosstalk_k >= 0.0 && self.rolloff_db_per_db2 >= 0.0) {
            return Err(Error::InvalidArgument(
                "crosstalk coefficient and roll-off must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn span_penalty_db(&self, band: BandName, spans: usize) -> f64 {
        let (p1, p2) = self
            .band_overrides
            .get(&band)
            .map_or((self.first_span_db, self.extra_span_db), |o| (o.first_span_db, o.extra_span_db));
        match spans {
            0 => 0.0,
            n => p1 + (n - 1) as f64 * p2,
        }
    }

    pub fn power_penalty_db(&self, rx_dbm: f64, trx: &TransceiverSpec) -> f64 {
        let excursion = if rx_dbm < trx.sensitivity_min_dbm {
            trx.sensitivity_min_dbm - rx_dbm
        } else if rx_dbm > trx.sensitivity_max_dbm {
            rx_dbm - trx.sensitivity_max_dbm
        } else {
            0.0
        };
        self.rolloff_db_per_db2 * excursion * excursion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ErrorFree,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QReport {
    pub lightpath: usize,
    pub subcarrier: usize,
    pub freq_thz: f64,
    pub span_count: usize,
    pub rx_power_dbm: f64,
    pub span_penalty_db: f64,
    pub crosstalk_penalty_db: f64,
    pub power_penalty_db: f64,
    pub margin_db: f64,
    pub q_db: f64,
    pub verdict: Verdict,
    pub trace: PowerTrace,
}

/// Everything needed to score a lightpath besides the lightpath itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub model: PenaltyModel,
    pub plan: PowerPlan,
    pub launch_dbm: f64,
    pub seed: u64,
}

impl Default for Evaluation {
    fn default() -> Self {
        Evaluation {
            model: PenaltyModel::default(),
            plan: PowerPlan::default(),
            launch_dbm: 0.0,
            seed: 1,
        }
    }
}

/// Isolations met by one subcarrier: one entry per MCS it crosses.
pub fn path_isolations(lp: &Lightpath, freq_thz: f64) -> Result<Vec<f64>> {
    lp.elements
        .iter()
        .filter_map(|e| match &e.kind {
            ElementKind::Mcs { spec } => Some(spec.cumulative_isolation_db(freq_thz)),
            _ => None,
        })
        .collect()
}

/// Q margin of one subcarrier against the transceiver's FEC threshold.
pub fn q_margin(lp: &Lightpath, subcarrier: usize, eval: &Evaluation, trx: &TransceiverSpec) -> Result<QReport> {
    let freq = *lp
        .subcarriers_thz
        .get(subcarrier)
        .ok_or_else(|| Error::OutOfRange(format!("subcarrier {subcarrier} of lightpath {}", lp.id)))?;
    let trace = propagate_power(lp, freq, eval.launch_dbm, &eval.plan, eval.seed)?;
    let rx = trace.output_dbm();
    let span = eval.model.span_penalty_db(lp.band, lp.span_count);
    let xt = crosstalk_penalty(&path_isolations(lp, freq)?, eval.model.crosstalk_k)?;
    let pp = eval.model.power_penalty_db(rx, trx);
    let margin = trx.loopback_margin_db - span - xt - pp;
    Ok(QReport {
        lightpath: lp.id,
        subcarrier,
        freq_thz: freq,
        span_count: lp.span_count,
        rx_power_dbm: rx,
        span_penalty_db: span,
        crosstalk_penalty_db: xt,
        power_penalty_db: pp,
        margin_db: margin,
        q_db: trx.fec_threshold_q_db + margin,
        verdict: if margin > 0.0 { Verdict::ErrorFree } else { Verdict::Failed },
        trace,
    })
}

/// Allowed point-A powers for a sweep.
pub const SWEEP_RANGE_DBM: (f64, f64) = (-40.0, 20.0);

/// Margin as a function of the node input power at point A.
pub fn input_power_sweep(
    lp: &Lightpath,
    subcarrier: usize,
    eval: &Evaluation,
    trx: &TransceiverSpec,
    powers_dbm: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = SWEEP_RANGE_DBM;
    if let Some(p) = powers_dbm.iter().find(|p| !(lo..=hi).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "sweep power {p} dBm outside [{lo}, {hi}] dBm"
        )));
    }
    powers_dbm
        .iter()
        .map(|&p| {
            let mut e = eval.clone();
            e.plan.point_a_dbm = Some(p);
            Ok((p, q_margin(lp, subcarrier, &e, trx)?.margin_db))
        })
        .collect()
}

/// Margin gained by an amplifier of `gain_db` between the drop WSS and MCS.
pub fn inline_amp_benefit(lp: &Lightpath, subcarrier: usize, eval: &Evaluation, trx: &TransceiverSpec, gain_db: f64) -> Result<f64> {
    if !(gain_db >= 0.0) {
        return Err(Error::InvalidArgument(format!("gain {gain_db} dB must be >= 0")));
    }
    let mut without = eval.clone();
    without.plan.inline_amp_gain_db = None;
    let mut with = eval.clone();
    with.plan.inline_amp_gain_db = Some(gain_db);
    let base = q_margin(lp, subcarrier, &without, trx)?.margin_db;
    Ok(q_margin(lp, subcarrier, &with, trx)?.margin_db - base)
}
