//! Versioned text checkpoints for both engines.
//!
//! The format is line-oriented and self-describing: a header line naming the
//! engine and format version, `key = value` lines for scalar state, then one
//! `row` line per microcolumn holding the reservoir resource followed by the
//! connected resources. Floats are printed with Rust's shortest round-trip
//! representation, so a dump reloads bit-exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::digital::{CountThreshold, DigitalClassifier};
use crate::error::{Error, Result};
use crate::plasticity::{PlasticityParams, ResourceVector};
use crate::snn::{Network, SimSchedule};

const DIGITAL_HEADER: &str = "colanet-model digital v1";
const SNN_HEADER: &str = "colanet-model snn v1";

pub fn save_digital(model: &DigitalClassifier, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(DIGITAL_HEADER);
    out.push('\n');
    let _ = writeln!(out, "num_inputs = {}", model.num_inputs());
    let _ = writeln!(out, "count_threshold = {}", model.mode());
    write_params(&mut out, model.params());
    let _ = writeln!(out, "rows = {}", model.num_microcolumns());
    for a in 0..model.num_microcolumns() {
        write_row(&mut out, model.resources(a));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_digital(path: &Path) -> Result<DigitalClassifier> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = Lines::new(&text, path);
    lines.expect_header(DIGITAL_HEADER)?;
    let num_inputs: usize = lines.scalar("num_inputs")?;
    let mode = CountThreshold::from_str(&lines.scalar::<String>("count_threshold")?)?;
    let params = read_params(&mut lines)?;
    let rows: usize = lines.scalar("rows")?;
    let resources = lines.rows(rows, num_inputs)?;
    DigitalClassifier::from_resources(num_inputs, params, mode, resources)
}

pub fn save_network(net: &Network, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(SNN_HEADER);
    out.push('\n');
    let _ = writeln!(out, "num_inputs = {}", net.num_inputs());
    let _ = writeln!(out, "seed = {}", net.seed());
    let _ = writeln!(out, "rng_word_pos = {}", net.rng_word_pos());
    let _ = writeln!(out, "presentation_ticks = {}", net.schedule().presentation_ticks);
    let _ = writeln!(out, "silence_ticks = {}", net.schedule().silence_ticks);
    write_params(&mut out, net.params());
    let _ = writeln!(out, "rows = {}", net.num_microcolumns());
    for k in 0..net.num_microcolumns() {
        write_row(&mut out, net.resources(k));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = Lines::new(&text, path);
    lines.expect_header(SNN_HEADER)?;
    let num_inputs: usize = lines.scalar("num_inputs")?;
    let seed: u64 = lines.scalar("seed")?;
    let rng_word_pos: u128 = lines.scalar("rng_word_pos")?;
    let schedule = SimSchedule {
        presentation_ticks: lines.scalar("presentation_ticks")?,
        silence_ticks: lines.scalar("silence_ticks")?,
    };
    let params = read_params(&mut lines)?;
    let rows: usize = lines.scalar("rows")?;
    let resources = lines.rows(rows, num_inputs)?;
    Network::from_parts(num_inputs, params, schedule, seed, resources, rng_word_pos)
}

fn write_params(out: &mut String, p: &PlasticityParams) {
    let _ = writeln!(out, "w_min = {}", p.w_min);
    let _ = writeln!(out, "w_max = {}", p.w_max);
    let _ = writeln!(out, "d = {}", p.d);
    let _ = writeln!(out, "d_h = {}", p.d_h);
    let _ = writeln!(out, "d_d = {}", p.d_d);
    let _ = writeln!(out, "n_s = {}", p.n_s);
    let _ = writeln!(out, "alpha = {}", p.alpha);
    let _ = writeln!(out, "t_h = {}", p.t_h);
    let _ = writeln!(out, "t_p = {}", p.t_p);
    let _ = writeln!(out, "tau_v = {}", p.tau_v);
}

fn read_params(lines: &mut Lines<'_>) -> Result<PlasticityParams> {
    Ok(PlasticityParams {
        w_min: lines.scalar("w_min")?,
        w_max: lines.scalar("w_max")?,
        d: lines.scalar("d")?,
        d_h: lines.scalar("d_h")?,
        d_d: lines.scalar("d_d")?,
        n_s: lines.scalar("n_s")?,
        alpha: lines.scalar("alpha")?,
        t_h: lines.scalar("t_h")?,
        t_p: lines.scalar("t_p")?,
        tau_v: lines.scalar("tau_v")?,
    })
}

fn write_row(out: &mut String, rv: &ResourceVector) {
    out.push_str("row ");
    let _ = write!(out, "{}", rv.reservoir);
    for r in &rv.connected {
        let _ = write!(out, " {r}");
    }
    out.push('\n');
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    path: String,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &Path) -> Self {
        Self {
            iter: text.lines(),
            path: path.display().to_string(),
            line_no: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format(format!("{}:{}: {}", self.path, self.line_no, msg.into()))
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.iter
            .next()
            .ok_or_else(|| self.err("unexpected end of file"))
    }

    fn expect_header(&mut self, header: &str) -> Result<()> {
        let line = self.next_line()?;
        if line.trim() != header {
            return Err(self.err(format!("expected header {header:?}, found {line:?}")));
        }
        Ok(())
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.next_line()?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| self.err(format!("expected `{key} = <value>`")))?;
        if k.trim() != key {
            return Err(self.err(format!("expected key {key:?}, found {:?}", k.trim())));
        }
        v.trim()
            .parse::<T>()
            .map_err(|_| self.err(format!("cannot parse value {:?} for {key}", v.trim())))
    }

    fn rows(&mut self, count: usize, num_inputs: usize) -> Result<Vec<ResourceVector>> {
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            let line = self.next_line()?;
            let mut fields = line.split_whitespace();
            if fields.next() != Some("row") {
                return Err(self.err("expected a `row` line"));
            }
            let values: std::result::Result<Vec<f64>, _> =
                fields.map(|f| f.parse::<f64>()).collect();
            let values = values.map_err(|e| self.err(format!("bad float: {e}")))?;
            if values.len() != num_inputs + 1 {
                return Err(self.err(format!(
                    "row holds {} values, expected reservoir + {num_inputs} resources",
                    values.len()
                )));
            }
            rows.push(ResourceVector {
                reservoir: values[0],
                connected: values[1..].to_vec(),
            });
        }
        Ok(rows)
    }
}
