use serde::Serialize;

use super::args::*;
use super::{write_output, Record};
use crate::capacity::{secrecy_capacity_degraded, shannon_capacity, CapacityResult, SolverOptions};
use crate::channel::{check_degradedness, marginal_z, WiretapChannel};
use crate::gaussian::{
    estimate_acceptance, full_power_input, gaussian_qn_estimate, sample_k_statistic,
    sample_k_statistic_random_input, GaussianWtcParams, KStatistic,
};
use crate::io::{csv_bytes, read_channel, read_distribution, read_joint, read_pair_list, read_wiretap};
use crate::metrics::{compute_metrics, csiszar_bound_check, CsiszarCheck, MetricReport};
use crate::nonstationary::{
    cesaro_means, convergence_diagnostic, qn_quadratic_decay_check, ChannelSequence, Family, LetterParams,
};
use crate::prob::Distribution;
use crate::rng::MonteCarlo;
use crate::sim::{
    estimate_leakage_tails, estimate_qn, exact_leakage, fits_in_memory, generate_codebook, run_reliability,
    run_reliability_ensemble, CodebookSpec, LeakageTails, ReliabilityReport, SweepOptions,
};
use crate::spectrum::{estimate_eps_limits, sample_information_density, EpsLimitEstimate};
use crate::stats::{fit_line, Estimate, LineFit};
use crate::{Error, Result};

pub(super) fn dispatch(cmd: &Command) -> Result<Record> {
    match cmd {
        Command::Capacity(CapacityCmd::Shannon(a)) => shannon(a),
        Command::Capacity(CapacityCmd::Secrecy(a)) => secrecy(a),
        Command::DegradedCheck(a) => {
            let w = read_wiretap(&a.wiretap)?;
            Record::new("degraded-check", a, &check_degradedness(&w, a.tol)?)
        }
        Command::Metrics(a) => metrics(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Gaussian(g) => gaussian(g),
        Command::Cesaro(a) => cesaro(a),
        Command::Run(_) => Err(Error::Config("`run` cannot be nested".into())),
    }
}

#[derive(Serialize)]
struct CapacityOut<'a> {
    value_bits: f64,
    optimal_input: &'a Distribution,
    kkt_slack: f64,
    iterations: usize,
    converged: bool,
}

impl<'a> From<&'a CapacityResult> for CapacityOut<'a> {
    fn from(r: &'a CapacityResult) -> Self {
        Self {
            value_bits: r.value,
            optimal_input: &r.optimal_input,
            kkt_slack: r.kkt_slack,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

fn shannon(a: &ShannonArgs) -> Result<Record> {
    let c = read_channel(&a.channel)?;
    let r = shannon_capacity(&c, a.tol, a.max_iter);
    Record::new("capacity shannon", a, &CapacityOut::from(&r))
}

fn secrecy(a: &SecrecyArgs) -> Result<Record> {
    let w = read_wiretap(&a.wiretap)?;
    let r = secrecy_capacity_degraded(&w, SolverOptions::new(a.tol, a.max_iter))?;
    Record::new("capacity secrecy", a, &CapacityOut::from(&r))
}

fn metrics(a: &MetricsArgs) -> Result<Record> {
    #[derive(Serialize)]
    struct Out {
        metrics: MetricReport,
        csiszar: Option<CsiszarCheck>,
    }
    let joint = read_joint(&a.joint)?;
    let m = compute_metrics(&joint, a.n, a.eta1, a.eta2)?;
    // the bound is stated for s2 ≤ 1/4 only
    let csiszar = csiszar_bound_check(m.s1, m.s2, joint.rows()).ok();
    Record::new("metrics", a, &Out { metrics: m, csiszar })
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    quantile: f64,
    mean: f64,
    variance: f64,
}

fn spectrum(a: &SpectrumArgs) -> Result<Record> {
    #[derive(Serialize)]
    struct Out {
        rows: Vec<SpectrumRow>,
        eps_limits: Option<EpsLimitEstimate>,
    }
    let c = read_channel(&a.channel)?;
    let px = match &a.input {
        Some(p) => read_distribution(p)?,
        None => Distribution::uniform(c.inputs()),
    };
    let mc = MonteCarlo::new(a.seed);
    let estimates = a
        .n_list
        .iter()
        .map(|&n| sample_information_density(&px, &c, n, a.trials, &mc))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SpectrumRow> = estimates
        .iter()
        .map(|e| SpectrumRow {
            n: e.n,
            quantile: e.quantile_right(a.eps),
            mean: e.mean,
            variance: e.variance,
        })
        .collect();
    let eps_limits = if estimates.len() >= 3 {
        Some(estimate_eps_limits(&estimates, a.eps)?)
    } else {
        None
    };
    if let Some(path) = &a.csv {
        write_output(path, &csv_bytes(&rows)?)?;
    }
    Record::new("spectrum", a, &Out { rows, eps_limits })
}

fn secrecy_input(w: &WiretapChannel) -> Result<Distribution> {
    Ok(secrecy_capacity_degraded(w, SolverOptions::default())?.optimal_input)
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Leakage {
    Exact(MetricReport),
    /// Only S3 and S6 are estimated by sampling; S1 and S2 are not.
    Tails(LeakageTails),
    Unavailable { reason: String },
}

#[derive(Serialize)]
struct SimulationReport {
    input_distribution: Distribution,
    messages_log2: f64,
    subcode_log2: f64,
    messages: Option<u64>,
    subcode_size: Option<u64>,
    decode_threshold_bits: f64,
    qn_threshold_bits: f64,
    reliability: ReliabilityReport,
    leakage: Leakage,
    qn: Estimate,
}

fn simulate(a: &SimulateArgs) -> Result<Record> {
    let w = read_wiretap(&a.wiretap)?;
    let wz = marginal_z(&w);
    let input = secrecy_input(&w)?;
    let spec = CodebookSpec::for_secrecy(a.n, a.rate, a.gamma, input.clone(), &wz, a.seed)?;
    let mc = MonteCarlo::new(a.seed);
    let fits = fits_in_memory(&spec, a.codebook_bytes);
    let codebook = if fits {
        Some(generate_codebook(&spec, a.codebook_bytes)?)
    } else {
        None
    };
    let reliability = match (a.method, &codebook) {
        (MethodArg::Ensemble, _) | (MethodArg::Auto, None) => {
            run_reliability_ensemble(&spec, &w, a.trials, &mc.fork(1), a.atom_budget)?
        }
        (_, Some(cb)) => run_reliability(cb, &spec, &w, a.trials, &mc.fork(1))?,
        (MethodArg::Codebook, None) => {
            generate_codebook(&spec, a.codebook_bytes)?;
            unreachable!("the codebook did not fit")
        }
    };
    let leakage = match &codebook {
        None if a.exact_leakage => {
            return Err(Error::BudgetExceeded {
                what: "codebook bytes",
                required: spec.log2_total().exp2() * spec.n as f64 * 2.0,
                budget: a.codebook_bytes as f64,
            })
        }
        None => Leakage::Unavailable {
            reason: "codebook exceeds the memory budget".into(),
        },
        Some(cb) => match exact_leakage(cb, &wz, a.enumeration_budget, a.eta1, a.eta2) {
            Ok(r) => Leakage::Exact(r),
            Err(e @ Error::BudgetExceeded { .. }) if a.exact_leakage => return Err(e),
            Err(Error::BudgetExceeded { .. }) => Leakage::Tails(estimate_leakage_tails(
                cb,
                &wz,
                a.leakage_trials,
                &mc.fork(2),
                a.eta1,
                a.eta2,
            )?),
            Err(e) => return Err(e),
        },
    };
    let qn = estimate_qn(&spec, &wz, a.trials, &mc.fork(3))?;
    let report = SimulationReport {
        input_distribution: input,
        messages_log2: spec.messages.log2,
        subcode_log2: spec.subcode.log2,
        messages: spec.messages.exact,
        subcode_size: spec.subcode.exact,
        decode_threshold_bits: spec.decode_threshold_bits(),
        qn_threshold_bits: spec.qn_threshold_bits(),
        reliability,
        leakage,
        qn,
    };
    Record::new("simulate", a, &report)
}

/// `start:stop:step` (inclusive, step > 0) or a comma-separated list.
pub(crate) fn parse_rates(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad rate grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let rates = match parts.as_slice() {
        [one] => one.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0 && b >= a) {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| a + k as f64 * step).collect()
        }
        _ => return Err(bad()),
    };
    if rates.is_empty() || rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(bad());
    }
    Ok(rates)
}

fn sweep(a: &SweepArgs) -> Result<Record> {
    let w = read_wiretap(&a.wiretap)?;
    let rates = parse_rates(&a.rates)?;
    let opts = SweepOptions {
        gamma: a.gamma,
        trials: a.trials,
        leakage_trials: a.leakage_trials,
        eta2_bits: a.eta2,
        ..SweepOptions::default()
    };
    let rows = crate::sim::phase_sweep(&w, &rates, &a.n_list, &opts, &MonteCarlo::new(a.seed))?;
    if let Some(path) = &a.csv {
        write_output(path, &csv_bytes(&rows)?)?;
    }
    Record::new("sweep", a, &rows)
}

fn gaussian_params(p: &GaussianParamArgs, delta: Option<f64>) -> Result<GaussianWtcParams> {
    match delta {
        Some(d) => GaussianWtcParams::new(p.power, p.sigma1_sq, p.sigma2_sq, d),
        None => GaussianWtcParams::with_default_delta(p.power, p.sigma1_sq, p.sigma2_sq),
    }
}

fn gaussian(cmd: &GaussianCmd) -> Result<Record> {
    match cmd {
        GaussianCmd::Capacity(a) => {
            #[derive(Serialize)]
            struct Out {
                value_bits: f64,
                variance_constant: f64,
            }
            let p = gaussian_params(a, None)?;
            let out = Out {
                value_bits: p.secrecy_capacity(),
                variance_constant: p.variance_constant(),
            };
            Record::new("gaussian capacity", a, &out)
        }
        GaussianCmd::KStat(a) => {
            let p = gaussian_params(&a.params, a.delta)?;
            let mc = MonteCarlo::new(a.seed);
            let rows = a
                .n
                .iter()
                .map(|&n| match a.input {
                    GaussianInput::FullPower => sample_k_statistic(&p, &full_power_input(&p, n), a.trials, &mc),
                    GaussianInput::Zero => sample_k_statistic(&p, &vec![0.0; n], a.trials, &mc),
                    GaussianInput::Random => sample_k_statistic_random_input(&p, n, a.trials, &mc),
                })
                .collect::<Result<Vec<KStatistic>>>()?;
            if let Some(path) = &a.csv {
                #[derive(Serialize)]
                struct Row {
                    n: usize,
                    mean: f64,
                    mean_ci: f64,
                    n_variance: f64,
                    n_variance_ci: f64,
                }
                let table: Vec<Row> = rows
                    .iter()
                    .map(|k| Row {
                        n: k.n,
                        mean: k.mean.value,
                        mean_ci: k.mean.radius,
                        n_variance: k.n_variance,
                        n_variance_ci: k.n_variance_radius,
                    })
                    .collect();
                write_output(path, &csv_bytes(&table)?)?;
            }
            Record::new("gaussian k-stat", a, &rows)
        }
        GaussianCmd::Qn(a) => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                qn_hat: f64,
                qn_ci: f64,
            }
            #[derive(Serialize)]
            struct Out {
                rows: Vec<Row>,
                log2_fit: Option<LineFit>,
            }
            let p = gaussian_params(&a.params, None)?;
            let mc = MonteCarlo::new(a.seed);
            let rows = a
                .n_list
                .iter()
                .map(|&n| {
                    let q = gaussian_qn_estimate(&p, a.gamma, n, a.trials, &mc)?;
                    Ok(Row {
                        n,
                        qn_hat: q.value,
                        qn_ci: q.radius,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.qn_hat > 0.0)
                .map(|r| (r.n as f64, r.qn_hat.log2()))
                .unzip();
            if let Some(path) = &a.csv {
                write_output(path, &csv_bytes(&rows)?)?;
            }
            Record::new("gaussian qn", a, &Out { log2_fit: fit_line(&xs, &ys), rows })
        }
        GaussianCmd::Acceptance(a) => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                acceptance: Estimate,
            }
            let p = gaussian_params(&a.params, a.delta)?;
            let mc = MonteCarlo::new(a.seed);
            let rows = a
                .n_list
                .iter()
                .map(|&n| {
                    Ok(Row {
                        n,
                        acceptance: estimate_acceptance(&p, n, a.attempts, &mc)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Record::new("gaussian acceptance", a, &rows)
        }
    }
}

fn family(name: &str, q: usize, params: &[f64]) -> Result<ChannelSequence> {
    let base = name.strip_prefix("bsc-").unwrap_or(name);
    if base != name && q != 2 {
        return Err(Error::Config(format!("family `{name}` is binary but --q is {q}")));
    }
    if !["constant", "alternating", "block-doubling", "convergent"].contains(&base) {
        return Err(Error::Config(format!("unknown family `{name}`")));
    }
    let need = if base == "constant" { 2 } else { 4 };
    if params.len() != need {
        return Err(Error::Config(format!(
            "family `{name}` takes {need} parameters, got {}",
            params.len()
        )));
    }
    let a = LetterParams::new(params[0], params[1]);
    let b = || LetterParams::new(params[2], params[3]);
    let f = match base {
        "constant" => Family::Constant { pair: a },
        "alternating" => Family::Alternating { a, b: b() },
        "block-doubling" => Family::BlockDoubling { a, b: b() },
        _ => Family::Convergent { start: a, limit: b() },
    };
    ChannelSequence::family(q, f)
}

fn cesaro(a: &CesaroArgs) -> Result<Record> {
    #[derive(Serialize)]
    struct Out {
        rows: Vec<crate::nonstationary::CesaroRow>,
        diagnostic: Option<crate::nonstationary::ConvergenceDiagnostic>,
        qn_check: Option<crate::nonstationary::QnDecayReport>,
    }
    let seq = match (&a.family, &a.list) {
        (Some(name), None) => family(name, a.q, &a.params)?,
        (None, Some(path)) => ChannelSequence::explicit(read_pair_list(path)?)?,
        _ => return Err(Error::Config("give exactly one of --family and --list".into())),
    };
    let rows = cesaro_means(&seq, &a.n_list)?;
    let diagnostic = if a.window <= rows.len() {
        Some(convergence_diagnostic(&rows, a.window, a.tol)?)
    } else {
        None
    };
    let qn_check = match (a.gamma, a.seed) {
        (Some(g), Some(seed)) => Some(qn_quadratic_decay_check(&seq, g, &a.qn_n_list, a.trials, &MonteCarlo::new(seed))?),
        _ => None,
    };
    if let Some(path) = &a.csv {
        write_output(path, &csv_bytes(&rows)?)?;
    }
    Record::new("cesaro", a, &Out { rows, diagnostic, qn_check })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_grids() {
        assert_eq!(parse_rates("0:0.3:0.1").unwrap().len(), 4);
        assert_eq!(parse_rates("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_rates("0.2").unwrap(), vec![0.2]);
        for bad in ["", "a:b:c", "0:1:0", "1:0:0.1", "0:1", "-0.1"] {
            assert!(parse_rates(bad).is_err(), "{bad}");
        }
    }
}
