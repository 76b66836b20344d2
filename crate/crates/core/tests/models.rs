//! Device constants, channel counts, add/drop ratio sweeps and the dB ledger
//! of every scenario trace.

use cdc_roadm::devices::{McsSpec, WssSpec};
use cdc_roadm::impairment::{q_margin, Evaluation, PowerTrace};
use cdc_roadm::network::scenario::{build_scenario, run_scenario, table2_signals, ScenarioId, TestbedParams};
use cdc_roadm::node::{add_drop_ratio, max_mcs_count};
use cdc_roadm::spectrum::{channels_in_band, spacing_for_signal, Band, BandName, SpacingVariant};
use cdc_roadm::Error;

/// Counts slots whose upper edge still fits below the band edge.
fn slot_edge_count(low_ghz: f64, high_ghz: f64, spacing: f64) -> usize {
    let mut k = 0;
    while low_ghz + (k + 1) as f64 * spacing <= high_ghz + 1e-6 {
        k += 1;
    }
    k
}

#[test]
fn channel_counts_against_slot_edges() {
    for band in [Band::c_default(), Band::l_default()] {
        for spacing in [50.0, 75.0, 87.5, 100.0, 150.0, 200.0] {
            let want = slot_edge_count(band.low_thz * 1e3, band.high_thz * 1e3, spacing);
            assert_eq!(channels_in_band(band.width_ghz(), spacing).unwrap(), want, "{spacing}");
        }
    }
    assert_eq!(channels_in_band(4800.0, 50.0).unwrap(), 96);
    assert_eq!(channels_in_band(4800.0, 150.0).unwrap(), 32);
    assert_eq!(spacing_for_signal(200, SpacingVariant::Oif).unwrap(), 50.0);
    assert_eq!(spacing_for_signal(400, SpacingVariant::Oif).unwrap(), 75.0);
    assert_eq!(spacing_for_signal(400, SpacingVariant::OpenRoadm).unwrap(), 87.5);
    assert_eq!(spacing_for_signal(800, SpacingVariant::OpenRoadm).unwrap(), 150.0);
    assert_eq!(spacing_for_signal(100, SpacingVariant::Oif), Err(Error::UnsupportedSignal(100)));
}

#[test]
fn mcs_losses() {
    let spec = McsSpec::cl_16x8();
    let intrinsic = 10.0 * 8f64.ln() / 10f64.ln();
    assert!((spec.intrinsic_loss_db() - intrinsic).abs() < 1e-12);
    assert!((spec.insertion_loss_db() - (intrinsic + 2.5)).abs() < 1e-12);
    assert!((spec.insertion_loss_db() - 11.5).abs() < 0.05);
    let mut none = spec.with_clients(1);
    none.excess_loss_db = 0.0;
    assert_eq!(none.insertion_loss_db(), 0.0);
    assert!((spec.with_clients(16).insertion_loss_db() - 14.5412).abs() < 1e-4);
}

#[test]
fn wss_ten_thousand_samples() {
    let spec = WssSpec::cl_1x9();
    let bands = [Band::c_default(), Band::l_default()];
    let mut sum = 0.0;
    let n = 10_000;
    for i in 0..n {
        let band = bands[i % 2];
        let f = band.low_thz + (band.high_thz - band.low_thz) * ((i / 2) as f64 + 0.5) / (n / 2) as f64;
        let port = (i * 7) % 9;
        let seed = (i / 97) as u64;
        let loss = spec.insertion_loss(port, f, seed).unwrap();
        assert!((5.1..=6.7).contains(&loss), "{loss}");
        assert_eq!(loss, spec.insertion_loss(port, f, seed).unwrap());
        sum += loss;
    }
    let mean = sum / n as f64;
    assert!((5.5..=6.1).contains(&mean), "{mean}");
}

#[test]
fn wss_mean_over_ports_and_grid() {
    // 9 ports x 64 slot centers of the 150 GHz C+L grid
    let grid = cdc_roadm::spectrum::Grid::c_and_l(150.0).unwrap();
    let spec = WssSpec::cl_1x9();
    let freqs: Vec<f64> = grid.plans().flat_map(|p| p.centers_thz.clone()).collect();
    assert_eq!(freqs.len(), 64);
    let mut all = Vec::new();
    for port in 0..9 {
        for &f in &freqs {
            all.push(spec.insertion_loss(port, f, 1).unwrap());
        }
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    assert!((5.5..=6.1).contains(&mean), "{mean}");
    assert!(spec.insertion_loss(0, 200.0, 1).is_err());
}

#[test]
fn isolation_at_two_hundred_frequencies() {
    let mut spec = McsSpec::cl_16x8();
    for ripple in [0.0, 3.0] {
        spec.isolation_ripple_db = ripple;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for band in [Band::c_default(), Band::l_default()] {
            for i in 0..100 {
                let f = band.low_thz + (band.high_thz - band.low_thz) * i as f64 / 99.0;
                let iso = spec.cumulative_isolation_db(f).unwrap();
                assert!(iso >= 45.0, "{f} THz: {iso}");
                lo = lo.min(iso);
                hi = hi.max(iso);
            }
        }
        assert!(hi - lo <= ripple + 1e-12);
    }
    assert!(spec.cumulative_isolation_db(191.0).is_err());
}

#[test]
fn add_drop_ratio_sweep() {
    let mut points = 0;
    for w in 2..=41usize {
        for d in 1..=5usize {
            for n in [32usize, 64, 96, 128, 192] {
                points += 1;
                if w < d {
                    assert!(matches!(add_drop_ratio(w, d, 8, n), Err(Error::InsufficientPorts { .. })));
                    continue;
                }
                let banks = max_mcs_count(w, d).unwrap();
                assert_eq!(banks, w + 1 - d);
                let unit = add_drop_ratio(w, d, 1, n).unwrap();
                assert_eq!(add_drop_ratio(w, d, 0, n).unwrap(), 0.0);
                for c in [2usize, 4, 8, 12, 16, 24] {
                    let r = add_drop_ratio(w, d, c, n).unwrap();
                    // linear in clients, exact against integer arithmetic
                    assert!((r - c as f64 * unit).abs() < 1e-12);
                    assert!((r * (d * n) as f64 - (banks * c) as f64).abs() < 1e-9);
                    // more WSS ports never hurt, more degrees never help
                    if w > d {
                        assert!(add_drop_ratio(w - 1, d, c, n).unwrap() < r);
                    }
                    if d > 1 {
                        assert!(add_drop_ratio(w, d - 1, c, n).unwrap() > r);
                    }
                    assert!(add_drop_ratio(w, d, c, n * 2).unwrap() < r);
                }
            }
        }
    }
    assert_eq!(points, 1000);
}

fn check_ledger(trace: &PowerTrace) {
    let mut p = trace.launch_dbm;
    for e in &trace.entries {
        assert!((e.power_in_dbm - p).abs() < 1e-9, "{}", e.element);
        assert!((e.power_out_dbm - (e.power_in_dbm + e.delta_db)).abs() < 1e-9, "{}", e.element);
        p = e.power_out_dbm;
    }
    assert!((trace.output_dbm() - (trace.launch_dbm + trace.total_delta_db())).abs() < 1e-9);
}

#[test]
fn db_ledger_on_every_trace() {
    let params = TestbedParams::default();
    for seed in [1u64, 2, 99] {
        for launch in [-3.0, 0.0, 4.5] {
            let eval = Evaluation {
                seed,
                launch_dbm: launch,
                ..Evaluation::default()
            };
            for id in ScenarioId::ALL {
                let run = run_scenario(build_scenario(id, &params).unwrap(), &table2_signals(), &eval).unwrap();
                for res in &run.results {
                    for r in &res.reports {
                        check_ledger(&r.trace);
                        // point A holds regardless of launch power
                        let input = format!("N{}/deg{}/input", res.lightpath.dst.node + 1, res.lightpath.dst.degree);
                        let a = r.trace.entries.iter().find(|e| e.element == input).unwrap();
                        assert!((a.power_out_dbm - 5.0).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn drop_path_example_with_fixed_losses() {
    // 5 dBm at the node input, 5.8 dB WSS, 11.5 dB MCS -> -12.3 dBm
    let mut params = TestbedParams::default();
    for w in [&mut params.wss_cl, &mut params.wss_c] {
        w.loss_min_db = 5.8;
        w.loss_max_db = 5.8;
        w.loss_avg_low_db = 5.8;
        w.loss_avg_high_db = 5.8;
    }
    params.mcs.excess_loss_db = 11.5 - 10.0 * 8f64.log10();
    let eval = Evaluation::default();
    let run = run_scenario(build_scenario(ScenarioId::One, &params).unwrap(), &table2_signals(), &eval).unwrap();
    for res in &run.results {
        for r in &res.reports {
            assert!((r.rx_power_dbm - -12.3).abs() < 1e-9, "{}", r.rx_power_dbm);
            assert_eq!(r.power_penalty_db, 0.0);
        }
    }
    // an inline amplifier cannot buy margin inside the window
    let c_mid = &run.results[1];
    let trx = &c_mid.lightpath.transceiver;
    let mut with = eval.clone();
    with.plan.inline_amp_gain_db = Some(5.0);
    let base = q_margin(&c_mid.lightpath, 1, &eval, trx).unwrap();
    let amp = q_margin(&c_mid.lightpath, 1, &with, trx).unwrap();
    assert!((amp.rx_power_dbm - (base.rx_power_dbm + 5.0)).abs() < 1e-9);
    assert!(amp.margin_db - base.margin_db < 0.2);
    // too much gain pushes the receiver over its window
    with.plan.inline_amp_gain_db = Some(25.0);
    assert!(q_margin(&c_mid.lightpath, 1, &with, trx).unwrap().margin_db < base.margin_db);
}

#[test]
fn receiver_curve_declines_below_window() {
    let eval = Evaluation::default();
    let run = run_scenario(
        build_scenario(ScenarioId::One, &TestbedParams::default()).unwrap(),
        &table2_signals(),
        &eval,
    )
    .unwrap();
    let lp = &run.results[1].lightpath;
    let trx = &lp.transceiver;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=40 {
        let p = -20.0 + 0.5 * i as f64;
        let mut e = eval.clone();
        e.plan.point_a_dbm = Some(p);
        let r = q_margin(lp, 1, &e, trx).unwrap();
        if let Some((prev_rx, prev_margin)) = prev {
            if prev_rx < trx.sensitivity_min_dbm {
                // still below the window: raising the input strictly helps
                assert!(r.margin_db > prev_margin, "{p} dBm");
            } else if r.rx_power_dbm <= trx.sensitivity_max_dbm {
                assert!((r.margin_db - prev_margin).abs() < 1e-12, "{p} dBm");
            }
        }
        prev = Some((r.rx_power_dbm, r.margin_db));
    }
    let pts = run
        .sweep(BandName::C, cdc_roadm::network::scenario::Position::Middle, 1, &eval, &[-20.0, -10.0, 0.0])
        .unwrap();
    assert!(pts[0].1 < pts[1].1 && pts[1].1 < pts[2].1, "{pts:?}");
    assert!(run.sweep(BandName::C, cdc_roadm::network::scenario::Position::Middle, 1, &eval, &[-41.0]).is_err());
}
