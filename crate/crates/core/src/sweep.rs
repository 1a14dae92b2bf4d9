//! Parameter sweeps and their tabular output.
//!
//! A [`SweepTable`] holds one row per value of the swept variable. CSV output
//! writes metadata as leading `# key=value` lines, then a header row, then
//! values with 17 significant digits so that a read-back is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::{capacity, first_and_second_order, normal_approx_log_m, sinr, v_iid, v_shell,
    v_shell_interference, xi_prime};
use crate::error::{Error, Result};
use crate::montecarlo::{estimator, Scenario};
use crate::noise::NoiseModel;
use crate::sampling::CodebookKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepTable {
    pub fn new(variable: &str, columns: &[&str]) -> Self {
        let mut cols = vec![variable.to_string()];
        cols.extend(columns.iter().map(|c| c.to_string()));
        Self { variable: variable.into(), columns: cols, rows: Vec::new(), metadata: BTreeMap::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# variable={}", self.variable);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Config(format!("malformed sweep CSV: {m}"));
        let mut metadata = BTreeMap::new();
        let mut variable = None;
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header = loop {
            let line = lines.next().ok_or_else(|| bad("missing header".into()))?;
            match line.strip_prefix("# ") {
                Some(kv) => {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("metadata line '{line}'")))?;
                    if k == "variable" {
                        variable = Some(v.to_string());
                    } else {
                        metadata.insert(k.to_string(), v.to_string());
                    }
                }
                None => break line,
            }
        };
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let variable = variable.unwrap_or_else(|| columns[0].clone());
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .map(|c| f64::from_str(c.trim()).map_err(|e| bad(format!("'{c}': {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(bad(format!("row '{line}' has {} cells", row.len())));
            }
            rows.push(row);
        }
        Ok(Self { variable, columns, rows, metadata })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed sweep JSON: {e}")))
    }
}

/// Seventeen significant digits; enough to round-trip any double.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    N,
    Eps,
    Power,
    NumInterferers,
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(Self::N),
            "eps" | "epsilon" => Ok(Self::Eps),
            "power" => Ok(Self::Power),
            "num_interferers" | "num-interferers" | "k" => Ok(Self::NumInterferers),
            _ => Err(Error::Config(format!(
                "unknown sweep variable '{s}' (known: n, eps, power, num_interferers)"
            ))),
        }
    }
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::N => "n",
            Self::Eps => "eps",
            Self::Power => "power",
            Self::NumInterferers => "num_interferers",
        }
    }
}

/// Everything a sweep needs besides the swept values.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub power: f64,
    pub interferers: Vec<f64>,
    pub codebook: String,
    pub interferer_codebook: String,
    pub noise: NoiseModel,
    pub n: usize,
    pub eps: f64,
    /// Monte Carlo trials per row; zero skips simulation.
    pub trials: u64,
    pub seed: u64,
    pub method: String,
    pub bits: bool,
}

impl SweepConfig {
    pub fn scenario(&self, power: f64, interferers: &[f64]) -> Result<Scenario> {
        let intended = CodebookKind::by_name(&self.codebook, power)?;
        let others = interferers
            .iter()
            .map(|&p| CodebookKind::by_name(&self.interferer_codebook, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario::new(intended, others, self.noise.clone()))
    }

    fn metadata(&self, table: &mut SweepTable) {
        let m = &mut table.metadata;
        m.insert("power".into(), format_float(self.power));
        m.insert(
            "interferers".into(),
            self.interferers.iter().map(|p| format_float(*p)).collect::<Vec<_>>().join(";"),
        );
        m.insert("codebook".into(), self.codebook.clone());
        m.insert("interferer_codebook".into(), self.interferer_codebook.clone());
        m.insert("noise".into(), self.noise.name().to_string());
        m.insert("xi".into(), format_float(self.noise.xi()));
        m.insert("n".into(), self.n.to_string());
        m.insert("eps".into(), format_float(self.eps));
        m.insert("trials".into(), self.trials.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("method".into(), self.method.clone());
        m.insert("units".into(), if self.bits { "bits" } else { "nats" }.into());
    }
}

/// Dispersion curves of user 1 against the number of equal-power
/// interferers: the all-shell dispersion, the all-i.i.d. dispersion at the
/// SINR, and the shell-intended dispersion with i.i.d. interferers.
pub fn interferer_sweep(p1: f64, interferer_power: f64, xi: f64, counts: &[usize]) -> Result<SweepTable> {
    let mut t = SweepTable::new(
        "num_interferers",
        &["sinr", "xi_prime", "capacity", "v_shell_interference", "v_iid_sinr", "v_shell_sinr"],
    );
    for &k in counts {
        let powers = vec![interferer_power; k];
        let (pb, pt) = sinr(p1, &powers)?;
        let xp = xi_prime(xi, pt)?;
        t.push(vec![
            k as f64,
            pb,
            xp,
            capacity(pb)?,
            v_shell_interference(p1, &powers, xi)?,
            v_iid(pb, xp)?,
            v_shell(pb, xp)?,
        ])?;
    }
    Ok(t)
}

/// Parses `"1,2,5"` or an inclusive integer range `"1..8"`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let bad = |m: String| Error::Config(format!("bad value list '{spec}': {m}"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let b: i64 = b.trim().trim_start_matches('=').parse().map_err(|e| bad(format!("{e}")))?;
        if b < a {
            return Err(Error::Config(format!("empty sweep range '{spec}'")));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    let v = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("'{s}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Config("empty sweep range".into()));
    }
    Ok(v)
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("{what} must be a nonnegative integer, got {v}")))
    }
}

pub fn run_sweep(var: SweepVar, values: &[f64], cfg: &SweepConfig) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::Config("empty sweep range".into()));
    }
    let mut table = if var == SweepVar::NumInterferers {
        let unit = cfg.interferers.first().copied().unwrap_or(1.0);
        let counts = values.iter().map(|&v| as_count(v, "interferer count")).collect::<Result<Vec<_>>>()?;
        let mut t = interferer_sweep(cfg.power, unit, cfg.noise.xi(), &counts)?;
        if cfg.bits {
            let k = t.columns.iter().position(|c| c == "capacity").expect("capacity column");
            let l2 = std::f64::consts::LN_2;
            for row in &mut t.rows {
                row[k] /= l2;
                for v in &mut row[k + 1..] {
                    *v /= l2 * l2;
                }
            }
        }
        t
    } else {
        let mut cols = vec!["capacity", "dispersion", "log_m", "rate"];
        if cfg.trials > 0 {
            cols.extend(["mc_estimate", "mc_std_error"]);
        }
        let mut t = SweepTable::new(var.name(), &cols);
        for &v in values {
            let (mut n, mut eps, mut power) = (cfg.n, cfg.eps, cfg.power);
            match var {
                SweepVar::N => n = as_count(v, "n")?,
                SweepVar::Eps => eps = v,
                SweepVar::Power => power = v,
                SweepVar::NumInterferers => unreachable!(),
            }
            let scenario = cfg.scenario(power, &cfg.interferers)?;
            let (c, disp, _, _) = first_and_second_order(&scenario)?;
            let log_m = normal_approx_log_m(n, eps, c, disp)?;
            let rate = log_m / n as f64;
            let (c, disp, log_m, rate) = if cfg.bits {
                let l2 = std::f64::consts::LN_2;
                (c / l2, disp / (l2 * l2), log_m / l2, rate / l2)
            } else {
                (c, disp, log_m, rate)
            };
            let mut row = vec![v, c, disp, log_m, rate];
            if cfg.trials > 0 {
                let natural_log_m = if cfg.bits { log_m * std::f64::consts::LN_2 } else { log_m };
                let est = estimator(&cfg.method)?.estimate(&scenario, n, natural_log_m, cfg.trials, cfg.seed)?;
                row.extend([est.estimate, est.std_error]);
            }
            t.push(row)?;
        }
        t
    };
    cfg.metadata(&mut table);
    Ok(table)
}
