//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use crgen_core::capacity::{aux_mutual_informations, constraint_gap};
use crgen_core::source::quadrature_mutual_information;
use crgen_core::typicality::{estimate_independent_pairing_probability, estimate_joint_typicality_probability};
use crgen_core::{
    cr_capacity, mutual_information, presets, run_perfect_scheme, run_trials, DiscretizerConfig, Information,
    SourceParams, TrialReport, TypicalityConfig,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn oracle_mi(rho: f64) -> f64 {
    -0.5 * (-rho * rho).ln_1p() / std::f64::consts::LN_2
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for rho in [0.0, 0.3, 0.5, 0.8, 0.95] {
        let p = SourceParams::standard(rho).unwrap();
        let closed = mutual_information(&p).finite().ok_or("finite MI expected")?;
        let quad = quadrature_mutual_information(&p).map_err(|e| e.to_string())?;
        ensure((closed - oracle_mi(rho)).abs() < 1e-12, || format!("rho={rho}: closed form {closed}"))?;
        worst = worst.max((closed - quad).abs());
    }
    ensure(worst <= 1e-6, || format!("max |closed - quadrature| = {worst:e}"))?;
    let t = within_time(start, Duration::from_secs(5))?;
    Ok(format!("max deviation {worst:.1e} bits in {t:.2?}"))
}

fn criterion_2() -> Outcome {
    for c in [0.5, 1.0, 2.0] {
        let got = cr_capacity(&SourceParams::standard(0.0).unwrap(), c).map_err(|e| e.to_string())?;
        let v = got.value.finite().ok_or("finite capacity expected")?;
        ensure((v - c).abs() <= 1e-9, || format!("rho=0, C={c}: capacity {v}"))?;
    }
    for rho in [1.0, -1.0] {
        for c in [0.0, 0.5, 3.0] {
            let got = cr_capacity(&SourceParams::standard(rho).unwrap(), c).map_err(|e| e.to_string())?;
            ensure(got.value == Information::Infinite, || format!("rho={rho}, C={c}: {}", got.value))?;
        }
    }
    for rho in [0.0, 0.5, -0.7, 0.99] {
        let got = cr_capacity(&SourceParams::standard(rho).unwrap(), 0.0).map_err(|e| e.to_string())?;
        ensure(got.value == Information::Finite(0.0), || format!("rho={rho}, C=0: {}", got.value))?;
    }
    Ok("rho=0 -> C, |rho|=1 -> inf, C=0 -> 0".into())
}

/// Test-channel quantities in closed form for unit variances.
fn oracle_channel(rho: f64, noise_var: f64) -> (f64, f64) {
    let i_ux = 0.5 * (1.0 / noise_var).ln_1p() / std::f64::consts::LN_2;
    let i_uy = -0.5 * (-rho * rho / (1.0 + noise_var)).ln_1p() / std::f64::consts::LN_2;
    (i_ux, i_uy)
}

/// Largest I(U;X) on a log grid of noise variances subject to the gap
/// constraint, refined once between the bracketing grid neighbours.
fn grid_capacity(rho: f64, c: f64) -> f64 {
    const POINTS: usize = 10_000;
    let feasible = |v: f64| {
        let (a, b) = oracle_channel(rho, v);
        a - b <= c
    };
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        (0..POINTS)
            .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (POINTS - 1) as f64).exp())
            .collect()
    };
    let coarse = grid(1e-8, 1e8);
    let first = coarse.iter().position(|&v| feasible(v)).expect("large noise is feasible");
    let (lo, hi) = (coarse[first.saturating_sub(1)], coarse[first]);
    grid(lo, hi)
        .into_iter()
        .filter(|&v| feasible(v))
        .map(|v| oracle_channel(rho, v).0)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_3() -> Outcome {
    let mut worst_value: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for rho in [0.5, 0.8, 0.95] {
        let p = SourceParams::standard(rho).unwrap();
        for c in [0.25, 1.0, 3.0] {
            let res = cr_capacity(&p, c).map_err(|e| e.to_string())?;
            let v = res.value.finite().ok_or("finite capacity expected")?;
            let ch = res.optimizer.ok_or("optimizer expected")?;
            let oracle = grid_capacity(rho, c);
            worst_value = worst_value.max((v - oracle).abs());
            let gap = constraint_gap(&p, &ch).map_err(|e| e.to_string())?;
            let (a, b) = oracle_channel(rho, ch.noise_var());
            worst_gap = worst_gap.max((gap - c).abs()).max((a - b - c).abs());
        }
    }
    ensure(worst_value <= 1e-4, || format!("capacity vs grid {worst_value:e}"))?;
    ensure(worst_gap <= 1e-9, || format!("gap at optimizer off by {worst_gap:e}"))?;
    Ok(format!("max |bisection - grid| {worst_value:.1e}, max gap error {worst_gap:.1e}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let p = SourceParams::standard(0.8).unwrap();
    let cfg = TypicalityConfig::for_source(&p, 0.2).map_err(|e| e.to_string())?;
    let mut prev = None;
    let mut seen = Vec::new();
    for n in [10, 50, 200] {
        let est = estimate_joint_typicality_probability(&p, &cfg, n, 10_000, 4).map_err(|e| e.to_string())?;
        if let Some(prev) = prev {
            ensure(est.not_below(&prev, 3.0), || format!("n={n}: {} after {}", est.estimate, prev.estimate))?;
        }
        seen.push(format!("{:.4}", est.estimate));
        prev = Some(est);
    }
    let last = estimate_joint_typicality_probability(&p, &cfg, 500, 10_000, 4).map_err(|e| e.to_string())?;
    ensure(last.estimate >= 0.99, || format!("n=500: {}", last.estimate))?;
    let t = within_time(start, Duration::from_secs(60))?;
    Ok(format!("p(10,50,200) = {}, p(500) = {:.4}, {t:.2?}", seen.join(", "), last.estimate))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let p = SourceParams::standard(0.8).unwrap();
    let (delta, n) = (0.3, 10);
    let i = oracle_mi(0.8);
    let cfg = TypicalityConfig::new(delta, i).map_err(|e| e.to_string())?;
    let est = estimate_independent_pairing_probability(&p, &cfg, n, 1_000_000, 5, 3.0).map_err(|e| e.to_string())?;
    let (e, se) = (est.exponent, est.exponent_std_error);
    ensure(e.is_finite(), || "no hits".into())?;
    ensure(e + 3.0 * se >= -(i + delta) && e - 3.0 * se <= -(i - delta), || {
        format!("exponent {e:.4} ± {se:.4} outside [{:.4}, {:.4}]", -(i + delta), -(i - delta))
    })?;
    let t = within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "log2(p)/n = {e:.4} ± {se:.4} in [{:.4}, {:.4}], {t:.2?}",
        -(i + delta),
        -(i - delta)
    ))
}

fn union_identity(r: &TrialReport) -> Result<(), String> {
    ensure(r.unexplained_disagreements == 0 && r.union_bound_holds, || {
        format!(
            "n={}: {} disagreements not covered by an event; Pr(K!=L)={} vs sum {}",
            r.config.n, r.unexplained_disagreements, r.disagreement.estimate, r.union_bound
        )
    })
}

fn below_capacity_reports() -> Result<(TrialReport, TrialReport), String> {
    let small = run_trials(&presets::below_capacity(16)).map_err(|e| e.to_string())?;
    let large = run_trials(&presets::below_capacity(32)).map_err(|e| e.to_string())?;
    Ok((small, large))
}

fn criterion_6(small: &TrialReport, large: &TrialReport) -> Outcome {
    for r in [small, large] {
        ensure((r.i_ux - 0.6).abs() < 1e-9 && (r.i_uy - 0.35).abs() < 1e-9, || {
            format!("channel gives I(U;X)={}, I(U;Y)={}", r.i_ux, r.i_uy)
        })?;
        ensure(r.config.delta == 0.25 && r.config.error_prob == 0.0 && r.config.trials == 2000, || {
            "preset drifted".into()
        })?;
        union_identity(r)?;
    }
    let (a, b) = (&small.agreement, &large.agreement);
    ensure(b.not_below(a, 3.0), || format!("agreement n=32 {} < n=16 {}", b.estimate, a.estimate))?;
    Ok(format!(
        "agreement n=16 {:.4}±{:.4}, n=32 {:.4}±{:.4}; union bound holds",
        a.estimate, a.std_error, b.estimate, b.std_error
    ))
}

fn criterion_7() -> Outcome {
    let base = run_trials(&presets::collision(false)).map_err(|e| e.to_string())?;
    let over = run_trials(&presets::collision(true)).map_err(|e| e.to_string())?;
    let (source, ch) = presets::collision_law();
    let (_, i_uy) = aux_mutual_informations(&source, &ch).map_err(|e| e.to_string())?;
    let expect_n2 = |rate: f64| (24.0 * rate).exp2().ceil() as u64;
    ensure(base.config.n2 == expect_n2(i_uy - 0.2) && over.config.n2 == expect_n2(i_uy + 0.2), || {
        format!("N2 = {} / {}", base.config.n2, over.config.n2)
    })?;
    ensure(base.config.n == 24 && over.config.trials == 2000, || "preset drifted".into())?;
    let (b, o) = (&base.events.e3, &over.events.e3);
    let diff = o.estimate - b.estimate;
    let se = o.combined_std_error(b);
    ensure(diff >= 3.0 * se, || format!("E3 {} vs {}: diff {diff} < 3 x {se}", o.estimate, b.estimate))?;
    Ok(format!(
        "E3 N2={}: {:.4}, N2={}: {:.4}; diff = {:.1} se",
        base.config.n2,
        b.estimate,
        over.config.n2,
        o.estimate,
        diff / se
    ))
}

fn criterion_8() -> Outcome {
    let p = SourceParams::standard(1.0).unwrap();
    let cfg = DiscretizerConfig::new(8).map_err(|e| e.to_string())?;
    let r = run_perfect_scheme(&p, &cfg, 1_000_000, 8).map_err(|e| e.to_string())?;
    ensure(r.agreement.hits == r.agreement.trials && r.agreement.trials == 1_000_000, || {
        format!("agreement {}/{}", r.agreement.hits, r.agreement.trials)
    })?;
    ensure((r.plugin_entropy_bits - 8.0).abs() <= 0.02, || format!("entropy {}", r.plugin_entropy_bits))?;
    ensure(r.ks_statistic <= r.ks_critical, || format!("KS {} > {}", r.ks_statistic, r.ks_critical))?;
    ensure(r.channel_uses == 0, || "channel used".into())?;
    let scheme = include_str!("../../core/src/perfect.rs");
    ensure(
        !scheme.contains("IndexChannel") && !scheme.contains("transmit"),
        || "scheme module references the index channel".into(),
    )?;
    Ok(format!(
        "agreement 1.0, entropy {:.4} bits, KS {:.2e} <= {:.2e}, no channel",
        r.plugin_entropy_bits, r.ks_statistic, r.ks_critical
    ))
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".meta.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn criterion_9() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["capacity", "--rho", "0,0.5,0.8,1", "--cw", "0,0.5,2"],
        &["protocol", "--rho", "0.8", "--cw", "1", "--noise-var", "1", "--n", "8,12", "--delta", "0.05", "--trials", "1000", "--seed", "9"],
        &["protocol", "--preset", "oversized-n2", "--trials", "300", "--seed", "9"],
        &["lemmas", "--rho", "0,0.8", "--delta", "0.3", "--n", "5,10", "--trials", "5000", "--seed", "9"],
        &["perfect", "--trials", "20000", "--key-bits", "6", "--seed", "9"],
    ];
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{k}-{rep}"));
            let out = Command::new(env!("CARGO_BIN_EXE_crgen"))
                .args(*args)
                .arg("--out")
                .arg(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?} exited {:?}", out.status.code()))?;
            ensure(dir.join(format!("{}.meta.json", args[0])).exists(), || "no sidecar".into())?;
            outputs.push(data_files(&dir));
        }
        ensure(!outputs[0].is_empty() && outputs[0] == outputs[1], || format!("{args:?} differs between runs"))?;
        compared += outputs[0].len();
    }
    Ok(format!("{compared} data files byte-identical across {} commands", runs.len()))
}

fn criterion_10(reports: &[&TrialReport]) -> Outcome {
    let mut parts = Vec::new();
    for r in reports {
        let k = r.key_entropy.ok_or("key entropy missing")?;
        let n = r.config.n as f64;
        let lower = r.i_ux - 2.0 * r.config.delta - k.bias_bits / n;
        let upper = ((r.config.n1 as f64) * (r.config.n2 as f64)).log2() / n;
        ensure(k.rate >= lower - 0.05 && k.rate <= upper + 0.05, || {
            format!("n={}: H/n {:.4} outside [{lower:.4}, {upper:.4}]", r.config.n, k.rate)
        })?;
        parts.push(format!(
            "n={}: H/n {:.4} in [{lower:.4}, {upper:.4}] (MM bias {:.3} bits)",
            r.config.n, k.rate, k.bias_bits
        ));
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    };
    report(1, "closed-form vs quadrature MI", criterion_1());
    report(2, "capacity reductions", criterion_2());
    report(3, "bisection vs grid oracle", criterion_3());
    report(4, "joint typicality trend", criterion_4());
    report(5, "independent pairing bracket", criterion_5());
    match below_capacity_reports() {
        Ok((small, large)) => {
            report(6, "protocol trend below capacity", criterion_6(&small, &large));
            report(7, "oversized column count", criterion_7());
            report(8, "perfect-correlation scheme", criterion_8());
            report(9, "CLI determinism", criterion_9());
            report(10, "key-entropy bracket", criterion_10(&[&small, &large]));
        }
        Err(e) => {
            report(6, "protocol trend below capacity", Err(e.clone()));
            report(7, "oversized column count", criterion_7());
            report(8, "perfect-correlation scheme", criterion_8());
            report(9, "CLI determinism", criterion_9());
            report(10, "key-entropy bracket", Err(e));
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
