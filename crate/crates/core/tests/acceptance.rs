//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as part of `cargo test`. A failing criterion is reported but does not
//! fail the run unless `ACCEPTANCE_STRICT=1` is set.

use std::path::Path;
use std::time::Instant;

use statrs::function::erf::erfc;

use wdnoma::channel::{ChannelModel, TapDelayProfile};
use wdnoma::harness::{
    required_snr_search, run_bler_sweep, run_evm_experiment, write_results, DecodeOrderRule, Reconstruction,
    RequiredSnr, Scheme, SimulationConfig, Simulator,
};
use wdnoma::{selftest, Result};

type Criterion = fn() -> Result<Verdict>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn ten_taps() -> ChannelModel {
    ChannelModel::Selective(TapDelayProfile::uniform(10).expect("valid profile"))
}

/// Single-user uncoded QPSK over AWGN against `0.5·erfc(√(Eb/N0))`.
fn awgn_ber() -> Result<Verdict> {
    let eb_n0 = [5.0, 6.0, 6.5, 7.0, 7.5];
    // QPSK at unit symbol energy: Es/N0 = 2·Eb/N0
    let offset = 10.0 * 2f64.log10();
    let cfg = SimulationConfig {
        scheme: Scheme::PowerDomain,
        coded: false,
        single_user: true,
        snr_db: eb_n0.iter().map(|e| e + offset).collect(),
        min_block_errors: u64::MAX,
        max_trials: 16_000,
        ..SimulationConfig::default()
    };
    let records = run_bler_sweep(&Simulator::new(cfg)?)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut bits = 0;
    for (e, r) in eb_n0.iter().zip(&records) {
        let theory = 0.5 * erfc(10f64.powf(e / 10.0).sqrt());
        let measured = r.ber[0].unwrap_or(f64::NAN);
        let rel = (measured - theory).abs() / theory;
        bits = r.trials * 256;
        if (3e-4..=3e-3).contains(&theory) {
            worst = worst.max(rel);
            parts.push(format!("{e}dB {measured:.3e}/{theory:.3e}"));
        }
    }
    verdict(
        worst <= 0.05 && bits >= 1_000_000,
        format!("max rel err {:.2}% near BER 1e-3 over {bits} bits/point [{}]", 100.0 * worst, parts.join(", ")),
    )
}

fn llr_oracle() -> Result<Verdict> {
    let c = selftest::compare_llrs(2024, 400)?;
    verdict(
        c.mismatches == 0 && c.instances >= 1000 && c.sign_agreement() >= 0.99 && c.max_exact_error < 1e-9,
        format!(
            "{} instances, {} LLRs, {} max-log mismatches, exact err {:.1e}, sign agreement {:.4} over {} high-SNR bits, mean |exact-maxlog| {:.3}",
            c.instances,
            c.llrs,
            c.mismatches,
            c.max_exact_error,
            c.sign_agreement(),
            c.sign_total,
            c.mean_maxlog_gap
        ),
    )
}

fn wilson(errors: u64, n: u64) -> (f64, f64) {
    let z = 1.96;
    let (n, p) = (n as f64, errors as f64 / n as f64);
    let centre = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
    (centre - half, centre + half)
}

fn perfect_sic() -> Result<Verdict> {
    let residual = selftest::perfect_sic_residual_error(5, 200)?;
    let mut ok = residual <= 1e-12;
    let mut parts = vec![format!("residual rel err {residual:.1e}")];
    let snr = 6.0;
    let trials = 2_000;
    for (order, alone_scheme, second) in [
        (DecodeOrderRule::User1First, Scheme::PowerDomain, 1),
        (DecodeOrderRule::User2First, Scheme::WaveformDomain, 0),
    ] {
        let genie = SimulationConfig {
            decode_order: order,
            genie_first_user: true,
            reconstruction: Reconstruction::Hard,
            channel: ten_taps(),
            snr_db: vec![snr],
            min_block_errors: u64::MAX,
            max_trials: trials,
            ..SimulationConfig::default()
        };
        let g = &run_bler_sweep(&Simulator::new(genie)?)?[0];
        // the second user transmitting alone, on independent realizations
        let alone = SimulationConfig {
            scheme: alone_scheme,
            single_user: true,
            channel: ten_taps(),
            snr_db: vec![snr],
            min_block_errors: u64::MAX,
            max_trials: trials,
            seed: 1009,
            ..SimulationConfig::default()
        };
        let s = &run_bler_sweep(&Simulator::new(alone)?)?[0];
        let (eg, es) = (g.block_errors[second].unwrap_or(0), s.block_errors[0].unwrap_or(0));
        let (a, b) = (wilson(eg, g.trials), wilson(es, s.trials));
        let overlap = a.0 <= b.1 && b.0 <= a.1;
        ok &= overlap;
        parts.push(format!(
            "user {} genie BLER {:.4} vs alone {:.4} ({})",
            second + 1,
            eg as f64 / g.trials as f64,
            es as f64 / s.trials as f64,
            if overlap { "95% CIs overlap" } else { "95% CIs disjoint" }
        ));
    }
    verdict(ok, parts.join("; "))
}

fn evm_soft_vs_hard() -> Result<Verdict> {
    let cfg = SimulationConfig {
        scheme: Scheme::WaveformDomain,
        decode_order: DecodeOrderRule::User1First,
        channel: ten_taps(),
        snr_db: vec![6.0, 8.0, 10.0, 12.0],
        evm_mse: vec![0.0, 0.01, 0.1],
        evm_frames: 200,
        ..SimulationConfig::default()
    };
    let records = run_evm_experiment(&Simulator::new(cfg)?)?;
    let mut ok = true;
    let mut monotone = true;
    let mut parts = Vec::new();
    for pair in records.chunks(2) {
        let (h, s) = (pair[0].evm_db.unwrap_or(f64::NAN), pair[1].evm_db.unwrap_or(f64::NAN));
        ok &= s <= h;
        let mse = pair[0].scheme.rsplit('=').next().unwrap_or("?");
        parts.push(format!("{}dB/{mse}: {h:.2}>{s:.2}", pair[0].snr_db.unwrap_or(f64::NAN)));
    }
    // for fixed SNR and method, EVM grows with σ_e²
    for snr_block in records.chunks(6) {
        for m in 0..2 {
            let v: Vec<f64> = (0..3).map(|i| snr_block[2 * i + m].evm_db.unwrap_or(f64::NAN)).collect();
            monotone &= v[0] <= v[1] && v[1] <= v[2];
        }
    }
    verdict(
        ok,
        format!(
            "hard vs soft EVM (dB), 200 frames/point: {}; monotone in mse: {monotone}",
            parts.join(", ")
        ),
    )
}

fn required(r: Option<RequiredSnr>) -> f64 {
    match r {
        Some(RequiredSnr::Achieved(x) | RequiredSnr::AtOrBelow(x)) => x,
        _ => f64::INFINITY,
    }
}

fn worst_user_required(scheme: Scheme, grid: &[f64]) -> Result<Vec<f64>> {
    let cfg = SimulationConfig {
        scheme,
        coded: false,
        snr_db: vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0, 27.0, 30.0, 35.0, 40.0],
        delta_p_db: grid.to_vec(),
        min_block_errors: 50,
        max_trials: 3_000,
        ..SimulationConfig::default()
    };
    let sim = Simulator::new(cfg)?;
    grid.iter()
        .map(|&dp| {
            let (req, _) = required_snr_search(&sim, 1e-2, dp)?;
            Ok(required(req[0]).max(required(req[1])))
        })
        .collect()
}

fn ambiguity_regions() -> Result<Verdict> {
    let grid = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0];
    let wd = worst_user_required(Scheme::WaveformDomain, &grid)?;
    let pd = worst_user_required(Scheme::PowerDomain, &grid)?;
    let at = |v: &[f64], lo: f64, hi: f64, max: bool| {
        let it = grid.iter().zip(v).filter(|(g, _)| (lo..=hi).contains(*g)).map(|(_, &x)| x);
        if max {
            it.fold(f64::NEG_INFINITY, f64::max)
        } else {
            it.fold(f64::INFINITY, f64::min)
        }
    };
    let margin = 6.0;
    let low_peak = at(&wd, -2.5, -0.5, true);
    let high_peak = at(&wd, 4.0, 6.0, true);
    let valley = at(&wd, 1.0, 3.0, false);
    let wd_ok = low_peak >= valley + margin
        && low_peak >= at(&wd, -4.0, -4.0, true) + margin
        && high_peak >= valley + margin
        && high_peak >= at(&wd, 8.0, 8.0, true) + margin;
    let pd_zero = at(&pd, 0.0, 0.0, true);
    let pd_ok = pd.iter().all(|&x| x <= pd_zero) && pd_zero >= at(&pd, -2.0, -2.0, true).max(at(&pd, 2.0, 2.0, true)) + margin;
    let fmt = |v: &[f64]| {
        grid.iter()
            .zip(v)
            .map(|(g, x)| if x.is_finite() { format!("{g}:{x:.1}") } else { format!("{g}:NA") })
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        wd_ok && pd_ok,
        format!(
            "required SNR (dB) for BLER 1e-2, worst user, by dP: waveform-domain [{}]; power-domain [{}]",
            fmt(&wd),
            fmt(&pd)
        ),
    )
}

fn coded_gain() -> Result<Verdict> {
    let mut req = Vec::new();
    for scheme in [Scheme::WaveformDomain, Scheme::PowerDomain] {
        let cfg = SimulationConfig {
            scheme,
            channel: ten_taps(),
            snr_db: (6..=20).map(f64::from).collect(),
            delta_p_db: vec![0.0],
            min_block_errors: 50,
            max_trials: 3_000,
            ..SimulationConfig::default()
        };
        let (r, _) = required_snr_search(&Simulator::new(cfg)?, 1e-2, 0.0)?;
        req.push([required(r[0]), required(r[1])]);
    }
    let gain = [req[1][0] - req[0][0], req[1][1] - req[0][1]];
    verdict(
        gain.iter().all(|&g| g >= 0.5),
        format!(
            "SNR for BLER 1e-2 at dP=0 dB, 10 taps: waveform-domain u1 {:.2} u2 {:.2}; power-domain u1 {:.2} u2 {:.2}; gain u1 {:+.2} u2 {:+.2} dB (need >= 0.5)",
            req[0][0], req[0][1], req[1][0], req[1][1], gain[0], gain[1]
        ),
    )
}

fn capacity_identity() -> Result<Verdict> {
    let e = selftest::capacity_identity_error(17, 2_000)?;
    verdict(e <= 1e-12, format!("max rel deviation {e:.2e} over 2000 random instances, both orders"))
}

fn determinism() -> Result<Verdict> {
    let dir = std::env::temp_dir().join(format!("wdnoma-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| wdnoma::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let read = |p: &Path| std::fs::read(p).unwrap_or_default();
    let mut files = Vec::new();
    for (run, workers) in [(0, Some(1)), (1, Some(2))] {
        let st = dir.join(format!("selftest{run}.csv"));
        selftest::write_checks(&selftest::run(1)?, &st)?;
        let cfg = SimulationConfig {
            snr_db: vec![6.0, 10.0],
            delta_p_db: vec![0.0, 4.0],
            channel: ten_taps(),
            min_block_errors: 20,
            max_trials: 200,
            workers,
            ..SimulationConfig::default()
        };
        let sw = dir.join(format!("sweep{run}.csv"));
        write_results(&run_bler_sweep(&Simulator::new(cfg)?)?, &sw)?;
        files.push((read(&st), read(&sw)));
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = files[0] == files[1] && !files[0].1.is_empty();
    verdict(
        same,
        format!(
            "selftest ({} bytes) and sweep ({} bytes) identical across two runs with 1 and 2 workers",
            files[0].0.len(),
            files[0].1.len()
        ),
    )
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(&str, Criterion); 8] = [
        ("awgn_ber_matches_theory", awgn_ber),
        ("llr_oracle_equivalence", llr_oracle),
        ("perfect_sic_residual", perfect_sic),
        ("evm_soft_not_worse_than_hard", evm_soft_vs_hard),
        ("ambiguity_regions", ambiguity_regions),
        ("coded_power_balanced_gain", coded_gain),
        ("capacity_sum_rate_identity", capacity_identity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} {name} ({:.1}s): {detail}",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
