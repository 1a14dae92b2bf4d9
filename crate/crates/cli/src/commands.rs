use std::fs;
use std::path::Path;
use std::sync::Arc;

use nndisp::analytics::dispersion_report;
use nndisp::delta_method::{clt_check, delta_variance, scenario_spec};
use nndisp::montecarlo::{estimator, typical_set_diagnostic, StatisticSampler};
use nndisp::noise::FiniteTable;
use nndisp::parallel::workers_from_env;
use nndisp::sweep::{format_float, parse_values, run_sweep, SweepConfig, SweepVar};
use nndisp::{analytics, CodebookKind, Error, NoiseModel, Result, Scenario, SweepTable};
use serde_json::{json, Value};

use crate::args::{
    ApproxArgs, ChannelArgs, Cli, CltArgs, CodebookChoice, Command, DiagArgs, Format, MethodChoice, OutputArgs,
    SimulateArgs, SingleCodebook, SweepArgs,
};

const LN2: f64 = std::f64::consts::LN_2;

pub fn run(cli: Cli) -> Result<()> {
    if let Some(k) = workers_from_env()? {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match cli.command {
        Command::Approx(a) => approx(a),
        Command::Simulate(a) | Command::Interfere(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::CltCheck(a) => clt(a),
        Command::DiagTypical(a) => diag(a),
    }
}

fn parse_powers(spec: &Option<String>) -> Result<Vec<f64>> {
    match spec {
        None => Ok(Vec::new()),
        Some(s) if s.trim().is_empty() => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad interferer power '{}': {e}", t.trim())))
            })
            .collect(),
    }
}

fn noise(ch: &ChannelArgs) -> Result<NoiseModel> {
    match &ch.noise_table {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(NoiseModel::new(Arc::new(FiniteTable::from_json(&text)?)))
        }
        None => NoiseModel::by_name(&ch.noise),
    }
}

fn scenario(ch: &ChannelArgs, codebook: SingleCodebook) -> Result<Scenario> {
    let intended = CodebookKind::by_name(codebook.name(), ch.power)?;
    let others = parse_powers(&ch.interferers)?
        .into_iter()
        .map(|p| CodebookKind::by_name(ch.interferer_codebook.name(), p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario::new(intended, others, noise(ch)?))
}

fn units(bits: bool) -> &'static str {
    if bits {
        "bits"
    } else {
        "nats"
    }
}

fn emit(out: &OutputArgs, text: String) -> Result<()> {
    match &out.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// `key: value` lines for a flat JSON object; nested values are inlined.
fn text_lines(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(map) = v {
        for (k, val) in map {
            let shown = match val {
                Value::String(t) => t.clone(),
                Value::Number(x) => match x.as_f64() {
                    Some(f) if !x.is_u64() && !x.is_i64() => format_float(f),
                    _ => x.to_string(),
                },
                other => other.to_string(),
            };
            s.push_str(&format!("{k}: {shown}\n"));
        }
    }
    s
}

/// Emits one record as text, JSON, or a single-row CSV.
fn emit_record(out: &OutputArgs, record: Value, flat: &[(&str, f64)]) -> Result<()> {
    let text = match out.format.unwrap_or(Format::Text) {
        Format::Json => json_text(&record),
        Format::Text => text_lines(&record),
        Format::Csv => {
            let header: Vec<&str> = flat.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = flat.iter().map(|(_, v)| format_float(*v)).collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    };
    emit(out, text)
}

fn emit_table(out: &OutputArgs, table: &SweepTable) -> Result<()> {
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let mut s = table.to_json();
            s.push('\n');
            s
        }
        Format::Csv | Format::Text => table.to_csv(),
    };
    emit(out, text)
}

fn approx(a: ApproxArgs) -> Result<()> {
    let kinds: &[SingleCodebook] = match a.codebook {
        CodebookChoice::Shell => &[SingleCodebook::Shell],
        CodebookChoice::Iid => &[SingleCodebook::Iid],
        CodebookChoice::Both => &[SingleCodebook::Shell, SingleCodebook::Iid],
    };
    let scale = if a.output.bits { LN2 } else { 1.0 };
    let mut reports = Vec::new();
    let mut flat: Vec<(String, f64)> = Vec::new();
    let mut summary = Value::Null;
    for &kind in kinds {
        let s = scenario(&a.channel, kind)?;
        if summary.is_null() {
            summary = serde_json::to_value(s.summary()).expect("summary serializes");
        }
        let r = dispersion_report(&s, a.n, a.eps)?;
        let (c, v, lm) = (r.capacity_nats_per_use / scale, r.dispersion_nats2_per_use / (scale * scale), r.log_m_approx / scale);
        let tag = kind.name();
        flat.push((format!("{tag}_capacity"), c));
        flat.push((format!("{tag}_dispersion"), v));
        flat.push((format!("{tag}_log_m"), lm));
        let mut rv = serde_json::to_value(&r).expect("report serializes");
        rv["capacity"] = json!(c);
        rv["dispersion"] = json!(v);
        rv["log_m"] = json!(lm);
        rv["rate"] = json!(lm / a.n as f64);
        reports.push(rv);
    }
    let out = &a.output;
    match out.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut s = format!("units: {}\nn: {}\neps: {}\n", units(out.bits), a.n, format_float(a.eps));
            for r in &reports {
                s.push_str(&format!(
                    "[{}] capacity: {}  dispersion: {}  log M: {}  rate: {}\n",
                    r["codebook"].as_str().unwrap_or(""),
                    format_float(r["capacity"].as_f64().unwrap_or(f64::NAN)),
                    format_float(r["dispersion"].as_f64().unwrap_or(f64::NAN)),
                    format_float(r["log_m"].as_f64().unwrap_or(f64::NAN)),
                    format_float(r["rate"].as_f64().unwrap_or(f64::NAN)),
                ));
            }
            emit(out, s)
        }
        _ => {
            let record = json!({
                "kind": "approx",
                "units": units(out.bits),
                "scenario": summary,
                "reports": reports,
            });
            let flat: Vec<(&str, f64)> = flat.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            emit_record(out, record, &flat)
        }
    }
}

fn method_name(m: MethodChoice) -> &'static str {
    match m {
        MethodChoice::Semi => "semi",
        MethodChoice::Brute => "brute",
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    let s = scenario(&a.channel, a.codebook)?;
    let scale = if a.output.bits { LN2 } else { 1.0 };
    let log_m = match (a.logm, a.rate, a.eps) {
        (Some(l), None, None) => l * scale,
        (None, Some(r), None) => r * a.n as f64 * scale,
        (None, None, Some(e)) => dispersion_report(&s, a.n, e)?.log_m_approx,
        _ => return Err(Error::Config("give exactly one of --logm, --rate, --eps".into())),
    };
    let est = estimator(method_name(a.method))?.estimate(&s, a.n, log_m, a.trials, a.seed)?;
    let (c, v, _, _) = analytics::first_and_second_order(&s).unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    let record = json!({
        "kind": "simulate",
        "units": units(a.output.bits),
        "scenario": s.summary(),
        "n": a.n,
        "log_m": log_m / scale,
        "rate": log_m / scale / a.n as f64,
        "capacity": if c.is_finite() { json!(c / scale) } else { Value::Null },
        "dispersion": if v.is_finite() { json!(v / (scale * scale)) } else { Value::Null },
        "estimate": est.estimate,
        "std_error": est.std_error,
        "trials": est.trials,
        "seed": est.seed,
        "method": est.method,
    });
    let flat = [
        ("n", a.n as f64),
        ("log_m", log_m / scale),
        ("estimate", est.estimate),
        ("std_error", est.std_error),
        ("trials", est.trials as f64),
        ("seed", est.seed as f64),
    ];
    emit_record(&a.output, record, &flat)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let var: SweepVar = a.var.parse()?;
    let values = parse_values(&a.values)?;
    let cfg = SweepConfig {
        power: a.channel.power,
        interferers: parse_powers(&a.channel.interferers)?,
        codebook: a.codebook.name().into(),
        interferer_codebook: a.channel.interferer_codebook.name().into(),
        noise: noise(&a.channel)?,
        n: a.n,
        eps: a.eps,
        trials: a.trials,
        seed: a.seed,
        method: method_name(a.method).into(),
        bits: a.output.bits,
    };
    emit_table(&a.output, &run_sweep(var, &values, &cfg)?)
}

fn clt(a: CltArgs) -> Result<()> {
    let ns = parse_values(&a.n_values)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("blocklength must be a positive integer, got {v}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let s = scenario(&a.channel, SingleCodebook::Shell)?;
    let sigma2 = delta_variance(&scenario_spec(&s)?)?;
    let sampler = StatisticSampler::new(&s)?;
    let rep = clt_check(|n, st| sampler.sample(n, st), sigma2, &ns, a.trials, a.seed)?;
    let mut t = SweepTable::new("n", &["ks_distance", "fluctuation"]);
    for r in &rep.rows {
        t.push(vec![r.n as f64, r.ks_distance, r.fluctuation])?;
    }
    let m = &mut t.metadata;
    m.insert("sigma2".into(), format_float(rep.sigma2));
    m.insert("trials".into(), rep.trials.to_string());
    m.insert("seed".into(), rep.seed.to_string());
    m.insert("noise".into(), s.noise.name().to_string());
    m.insert("power".into(), format_float(a.channel.power));
    if let Some(slope) = rep.decay_slope {
        m.insert("decay_slope".into(), format_float(slope));
    }
    emit_table(&a.output, &t)
}

fn diag(a: DiagArgs) -> Result<()> {
    if a.channel.interferers.is_some() {
        return Err(Error::Unsupported("the typical-set diagnostic is point-to-point only".into()));
    }
    let nm = noise(&a.channel)?;
    let eta = a.eta.unwrap_or(a.channel.power);
    let r = typical_set_diagnostic(a.channel.power, &nm, a.n, eta, a.trials, a.seed)?;
    let mut record = json!({ "kind": "diag_typical", "noise": nm.name(), "power": a.channel.power });
    if let (Value::Object(dst), Value::Object(src)) = (&mut record, serde_json::to_value(&r).expect("report serializes")) {
        dst.extend(src);
    }
    let flat = [
        ("n", r.n as f64),
        ("eta", r.eta),
        ("p_y_out", r.p_y_out),
        ("p_z_out", r.p_z_out),
        ("q_out", r.q_out),
        ("total_out", r.total_out),
        ("q_exponential_bound", r.q_exponential_bound),
    ];
    emit_record(&a.output, record, &flat)
}
