use rayon::prelude::*;
use serde::Serialize;

use crgen_core::perfect::PerfectReport;
use crgen_core::typicality::{
    estimate_independent_pairing_probability, estimate_joint_typicality_probability, BracketStatus,
    PairingEstimate,
};
use crgen_core::{
    cr_capacity, mutual_information, presets, run_perfect_scheme, run_trials, DiscretizerConfig, Information,
    Proportion, ProtocolConfig, Sizing, SourceParams, TestChannel, TrialReport, TypicalityConfig,
};

use crate::error::{CliError, Context};
use crate::output::{num, OutputDir};
use crate::spec::ExperimentSpec;

/// Standard errors allowed in the trend and bracket checks.
const K_SIGMA: f64 = 3.0;

pub struct Summary {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when a statistical check failed; files are still written.
    pub failure: Option<String>,
}

fn source(rho: f64) -> Result<SourceParams, CliError> {
    SourceParams::standard(rho).context(|| format!("rho={rho}"))
}

pub fn capacity(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<Summary, CliError> {
    let mut grid: Vec<(f64, f64)> = spec
        .rho
        .iter()
        .flat_map(|&r| spec.cw.iter().map(move |&c| (r, c)))
        .collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    grid.dedup();

    let rows = grid
        .par_iter()
        .map(|&(rho, cw)| {
            let res = cr_capacity(&source(rho)?, cw).context(|| format!("rho={rho}, cw={cw}"))?;
            let gap = match res.value {
                Information::Infinite => 0.0,
                Information::Finite(_) => cw + res.constraint_slack,
            };
            Ok(vec![
                num(rho),
                num(cw),
                res.value.to_string(),
                res.optimizer.map(|ch| num(ch.noise_var())).unwrap_or_default(),
                num(gap),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    out.write_csv("capacity.csv", &["rho", "cw", "capacity", "noise_var", "constraint_gap"], &rows)?;
    Ok(Summary {
        lines: vec![format!("{} capacity points", rows.len())],
        warnings: Vec::new(),
        failure: None,
    })
}

fn protocol_configs(spec: &ExperimentSpec) -> Result<Vec<ProtocolConfig>, CliError> {
    if let Some(name) = &spec.preset {
        let base = presets::by_name(&name.to_lowercase()).context(|| "--preset".to_string())?;
        let ns = if spec.is_explicit("n") { spec.n.clone() } else { vec![base.n] };
        return Ok(ns
            .into_iter()
            .map(|n| {
                let mut cfg = base;
                cfg.n = n;
                if spec.is_explicit("trials") {
                    cfg.trials = spec.trials;
                }
                if spec.is_explicit("seed") {
                    cfg.master_seed = spec.seed;
                }
                if spec.is_explicit("error-prob") {
                    cfg.error_prob = spec.error_prob;
                }
                if spec.is_explicit("budget") {
                    cfg.budget = spec.budget;
                }
                cfg
            })
            .collect());
    }

    let sizing = match (spec.bin_rate, spec.column_rate) {
        (Some(bin_rate), Some(column_rate)) => Sizing::Rates { bin_rate, column_rate },
        _ => Sizing::Default,
    };
    let mut configs = Vec::new();
    for &rho in &spec.rho {
        let src = source(rho)?;
        for &cw in &spec.cw {
            let ch = match spec.noise_var {
                Some(v) => TestChannel::new(v).context(|| "--noise-var".to_string())?,
                None => cr_capacity(&src, cw)
                    .context(|| format!("rho={rho}, cw={cw}"))?
                    .optimizer
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "rho={rho}, cw={cw}: no finite optimizing test channel; pass --noise-var"
                        ))
                    })?,
            };
            for &n in &spec.n {
                let mut cfg = ProtocolConfig::new(src, ch, n, spec.delta, spec.trials, spec.seed);
                cfg.error_prob = spec.error_prob;
                cfg.sizing = sizing;
                cfg.budget = spec.budget;
                cfg.channel_capacity = Some(cw);
                configs.push(cfg);
            }
        }
    }
    Ok(configs)
}

pub fn protocol(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<Summary, CliError> {
    let configs = protocol_configs(spec)?;
    let mut rows = Vec::with_capacity(configs.len());
    let mut lines = Vec::new();
    for (idx, cfg) in configs.iter().enumerate() {
        let report = run_trials(cfg).context(|| {
            format!(
                "rho={}, noise_var={}, n={}",
                cfg.source.rho(),
                cfg.test_channel.noise_var(),
                cfg.n
            )
        })?;
        out.write_text(&format!("protocol_{idx:03}.json"), &(report.to_json() + "\n"))?;
        lines.push(format!(
            "[{idx}] rho={} n={} agreement={:.4}±{:.4}",
            cfg.source.rho(),
            cfg.n,
            report.agreement.estimate,
            report.agreement.std_error
        ));
        rows.push(report.csv_record());
    }
    out.write_csv("protocol.csv", TrialReport::csv_header(), &rows)?;
    Ok(Summary {
        lines,
        warnings: Vec::new(),
        failure: None,
    })
}

#[derive(Debug, Serialize)]
struct LemmaRow {
    n: usize,
    joint: Proportion,
    /// Joint estimate did not fall below the previous block length's by
    /// more than three combined standard errors.
    trend_ok: bool,
    pairing: PairingEstimate,
}

#[derive(Debug, Serialize)]
struct LemmaSource {
    rho: f64,
    mutual_information: f64,
    rows: Vec<LemmaRow>,
}

#[derive(Debug, Serialize)]
struct LemmaReport {
    schema_version: &'static str,
    delta: f64,
    trials: u64,
    seed: u64,
    k_sigma: f64,
    sources: Vec<LemmaSource>,
}

pub fn lemmas(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<Summary, CliError> {
    let mut ns = spec.n.clone();
    ns.sort_unstable();
    ns.dedup();

    let mut sources = Vec::new();
    let mut failures = Vec::new();
    let mut inconclusive = 0;
    for &rho in &spec.rho {
        let params = source(rho)?;
        let ctx = || format!("rho={rho}, delta={}", spec.delta);
        let cfg = TypicalityConfig::for_source(&params, spec.delta).context(ctx)?;
        let mut rows: Vec<LemmaRow> = Vec::new();
        for &n in &ns {
            let joint = estimate_joint_typicality_probability(&params, &cfg, n, spec.trials, spec.seed).context(ctx)?;
            let pairing = estimate_independent_pairing_probability(&params, &cfg, n, spec.trials, spec.seed, K_SIGMA)
                .context(ctx)?;
            let trend_ok = rows.last().is_none_or(|prev| joint.not_below(&prev.joint, K_SIGMA));
            if !trend_ok {
                failures.push(format!("rho={rho} n={n}: joint-typicality estimate decreased"));
            }
            match pairing.status {
                BracketStatus::Outside => failures.push(format!("rho={rho} n={n}: pairing estimate outside bracket")),
                BracketStatus::Inconclusive => inconclusive += 1,
                BracketStatus::Inside => {}
            }
            rows.push(LemmaRow { n, joint, trend_ok, pairing });
        }
        sources.push(LemmaSource {
            rho,
            mutual_information: mutual_information(&params).to_f64(),
            rows,
        });
    }

    let header = [
        "rho",
        "n",
        "delta",
        "joint_probability",
        "joint_std_error",
        "trend_ok",
        "pairing_probability",
        "pairing_std_error",
        "lower_bound",
        "upper_bound",
        "exponent",
        "exponent_std_error",
        "bracket_status",
    ];
    let csv_rows: Vec<Vec<String>> = sources
        .iter()
        .flat_map(|s| {
            s.rows.iter().map(move |r| {
                vec![
                    num(s.rho),
                    r.n.to_string(),
                    num(spec.delta),
                    num(r.joint.estimate),
                    num(r.joint.std_error),
                    r.trend_ok.to_string(),
                    num(r.pairing.probability.estimate),
                    num(r.pairing.probability.std_error),
                    num(r.pairing.lower_bound),
                    num(r.pairing.upper_bound),
                    num(r.pairing.exponent),
                    num(r.pairing.exponent_std_error),
                    format!("{:?}", r.pairing.status).to_lowercase(),
                ]
            })
        })
        .collect();
    let report = LemmaReport {
        schema_version: crgen_core::protocol::SCHEMA_VERSION,
        delta: spec.delta,
        trials: spec.trials,
        seed: spec.seed,
        k_sigma: K_SIGMA,
        sources,
    };
    out.write_json("lemmas.json", &report)?;
    out.write_csv("lemmas.csv", &header, &csv_rows)?;

    let mut warnings = Vec::new();
    if inconclusive > 0 {
        warnings.push(format!(
            "{inconclusive} bracket checks inconclusive (too few expected hits); raise --trials"
        ));
    }
    Ok(Summary {
        lines: vec![format!("{} rows", csv_rows.len())],
        warnings,
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

pub fn perfect(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<Summary, CliError> {
    let cfg = DiscretizerConfig::new(spec.key_bits).context(|| "--key-bits".to_string())?;
    let reports = spec
        .rho
        .iter()
        .map(|&rho| {
            run_perfect_scheme(&source(rho)?, &cfg, spec.trials, spec.seed).context(|| format!("rho={rho}"))
        })
        .collect::<Result<Vec<PerfectReport>, CliError>>()?;

    let header = [
        "rho",
        "key_bits",
        "trials",
        "agreement",
        "plugin_entropy_bits",
        "chi_square",
        "chi_square_critical",
        "ks_statistic",
        "ks_critical",
        "channel_uses",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                num(r.rho),
                r.key_bits.to_string(),
                r.trials.to_string(),
                num(r.agreement.estimate),
                num(r.plugin_entropy_bits),
                num(r.chi_square),
                num(r.chi_square_critical),
                num(r.ks_statistic),
                num(r.ks_critical),
                r.channel_uses.to_string(),
            ]
        })
        .collect();
    out.write_json("perfect.json", &reports)?;
    out.write_csv("perfect.csv", &header, &rows)?;
    let lines = reports
        .iter()
        .map(|r| {
            format!(
                "rho={} agreement={} entropy={:.4} bits",
                r.rho, r.agreement.estimate, r.plugin_entropy_bits
            )
        })
        .collect();
    Ok(Summary {
        lines,
        warnings: Vec::new(),
        failure: None,
    })
}
