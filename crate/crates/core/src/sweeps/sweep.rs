use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::scenario::{Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::limits::{mimo_limit, siso_limit, PerfBreakdown};
use crate::oracle::{doubly_coprime, optimize_youla};

pub const CSV_HEADER: &str = "param,j1,j2,j_total,j_oracle,rel_gap,status";

/// Largest output count the oracle is run for.
pub const ORACLE_MAX_OUTPUTS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Range {
        from: f64,
        to: f64,
        steps: usize,
        #[serde(default)]
        scale: Scale,
    },
}

impl SweepValues {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let vals = match *self {
            SweepValues::List(ref v) => v.clone(),
            SweepValues::Range { from, to, steps, scale } => {
                if steps < 2 {
                    return Err(Error::Scenario("sweep.values.steps: expected at least 2".into()));
                }
                let last = (steps - 1) as f64;
                match scale {
                    Scale::Linear => (0..steps).map(|k| from + (to - from) * k as f64 / last).collect(),
                    Scale::Log => {
                        if !(from > 0.0 && to > 0.0) {
                            return Err(Error::Scenario("sweep.values: log scale needs positive endpoints".into()));
                        }
                        let (a, b) = (from.log10(), to.log10());
                        (0..steps).map(|k| 10f64.powf(a + (b - a) * k as f64 / last)).collect()
                    }
                }
            }
        };
        if vals.is_empty() {
            return Err(Error::Scenario("sweep.values: expected at least one value".into()));
        }
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::Scenario(format!("sweep.values: {v} is not finite")));
        }
        Ok(vals)
    }
}

/// `parameter` is a dotted path into the scenario, e.g. `channels[0].filter.cutoff_rad_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: SweepValues,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<Segment>> {
    let bad = || Error::Scenario(format!("sweep.parameter: cannot parse path `{path}`"));
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        out.push(Segment::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            out.push(Segment::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(out)
}

/// Writes `value` at `path`, which must already hold a number.
fn set_path(root: &mut Value, path: &str, value: f64) -> Result<()> {
    let missing = || Error::Scenario(format!("sweep.parameter: `{path}` does not exist in the scenario"));
    let mut cur = root;
    for seg in parse_path(path)? {
        cur = match seg {
            Segment::Key(k) => cur.get_mut(&k),
            Segment::Index(i) => cur.get_mut(i),
        }
        .ok_or_else(missing)?;
    }
    match cur {
        Value::Number(n) if n.is_u64() && !n.is_f64() => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::Scenario(format!("sweep: `{path}` is an integer field, got {value}")));
            }
            *cur = Value::from(value as u64);
        }
        Value::Number(_) => *cur = Value::from(value),
        _ => return Err(Error::Scenario(format!("sweep.parameter: `{path}` is not numeric"))),
    }
    Ok(())
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("sweep file: {e}")))
    }

    /// One configuration per sweep value, in order.
    pub fn expand(&self, base: &ScenarioConfig) -> Result<Vec<(f64, ScenarioConfig)>> {
        let root = serde_json::to_value(base).expect("scenario serializes");
        self.values
            .resolve()?
            .into_iter()
            .map(|v| {
                let mut doc = root.clone();
                set_path(&mut doc, &self.parameter, v)?;
                let cfg: ScenarioConfig =
                    serde_json::from_value(doc).map_err(|e| Error::Scenario(format!("{}: {e}", self.parameter)))?;
                Ok((v, cfg))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Diverged,
    OracleSkipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Diverged => "diverged",
            Status::OracleSkipped => "oracle_skipped",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Status::Ok),
            "diverged" => Ok(Status::Diverged),
            "oracle_skipped" => Ok(Status::OracleSkipped),
            other => Err(Error::Scenario(format!("unknown status `{other}`"))),
        }
    }
}

/// Diverged rows carry infinite limits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub param: f64,
    pub j1: f64,
    pub j2: f64,
    pub j_total: f64,
    pub j_oracle: Option<f64>,
    pub rel_gap: Option<f64>,
    pub status: Status,
}

impl ResultRow {
    pub fn diverged(param: f64) -> Self {
        let inf = f64::INFINITY;
        ResultRow { param, j1: inf, j2: inf, j_total: inf, j_oracle: None, rel_gap: None, status: Status::Diverged }
    }
}

pub fn rel_gap(j_oracle: f64, j_total: f64) -> f64 {
    (j_oracle - j_total).abs() / j_total.max(1e-12)
}

/// Closed-form limit, through the scalar formula when the plant is scalar.
pub fn closed_form(sc: &Scenario) -> Result<PerfBreakdown> {
    if sc.plant.is_siso() {
        siso_limit(&sc.plant, &sc.constraints.channels[0], sc.constraints.sigma_r[0])
    } else {
        mimo_limit(&sc.plant, &sc.constraints)
    }
}

/// Oracle value; `None` when the oracle does not apply or its objective is infinite.
pub fn oracle_value(sc: &Scenario) -> Result<Option<f64>> {
    if sc.plant.outputs() > ORACLE_MAX_OUTPUTS {
        return Ok(None);
    }
    let cf = doubly_coprime(&sc.plant, &sc.constraints.filter_matrix())?;
    let opt = optimize_youla(&cf, &sc.constraints, &sc.oracle.basis()?, &sc.oracle.grid()?)?;
    Ok((!opt.objective.infinite()).then(|| opt.j_min()))
}

/// Evaluates one scenario; divergence is a row status, other failures are errors.
pub fn evaluate(param: f64, cfg: &ScenarioConfig) -> Result<ResultRow> {
    let sc = cfg.validate()?;
    let perf = match closed_form(&sc) {
        Ok(p) => p,
        Err(e) if e.is_divergence() => return Ok(ResultRow::diverged(param)),
        Err(e) => return Err(e),
    };
    let mut row = ResultRow {
        param,
        j1: perf.j1,
        j2: perf.j2,
        j_total: perf.total,
        j_oracle: None,
        rel_gap: None,
        status: Status::Ok,
    };
    if sc.oracle.enabled {
        match oracle_value(&sc) {
            Ok(Some(j)) => {
                row.j_oracle = Some(j);
                row.rel_gap = Some(rel_gap(j, perf.total));
            }
            Ok(None) | Err(_) => row.status = Status::OracleSkipped,
        }
    }
    Ok(row)
}

/// Evaluates every sweep point concurrently; rows come back in sweep order.
pub fn run_sweep(base: &ScenarioConfig, sweep: &SweepSpec) -> Result<Vec<ResultRow>> {
    let points = sweep.expand(base)?;
    points.par_iter().map(|(v, cfg)| evaluate(*v, cfg)).collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    for r in rows {
        w.write_record([
            r.param.to_string(),
            r.j1.to_string(),
            r.j2.to_string(),
            r.j_total.to_string(),
            fmt_opt(r.j_oracle),
            fmt_opt(r.rel_gap),
            r.status.as_str().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let header = rd.headers().map_err(io)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Scenario(format!("unexpected CSV header `{header}`")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Scenario(format!("bad number `{s}`")));
    let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(io)?;
            if rec.len() != 7 {
                return Err(Error::Scenario(format!("expected 7 fields, got {}", rec.len())));
            }
            Ok(ResultRow {
                param: num(&rec[0])?,
                j1: num(&rec[1])?,
                j2: num(&rec[2])?,
                j_total: num(&rec[3])?,
                j_oracle: opt(&rec[4])?,
                rel_gap: opt(&rec[5])?,
                status: Status::parse(&rec[6])?,
            })
        })
        .collect()
}

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(rows, std::io::BufWriter::new(f))
}
