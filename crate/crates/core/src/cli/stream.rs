use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::estimator::{fixed_time_half_width, LossObservation, Oeuvre};

/// One input row of the `stream` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamRecord {
    pub t: u64,
    pub loss_curr: f64,
    pub loss_prev: Option<f64>,
    pub sigma_override: Option<f64>,
}

/// Column positions, from a header row or the default order
/// `t,loss_curr,loss_prev,sigma_override`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    t: usize,
    curr: usize,
    prev: Option<usize>,
    sigma: Option<usize>,
}

impl Layout {
    const POSITIONAL: Layout = Layout {
        t: 0,
        curr: 1,
        prev: Some(2),
        sigma: Some(3),
    };

    fn from_header(fields: &[&str]) -> std::result::Result<Self, String> {
        let find = |name: &str| fields.iter().position(|f| f.trim() == name);
        Ok(Self {
            t: find("t").ok_or("header lacks a `t` column")?,
            curr: find("loss_curr").ok_or("header lacks a `loss_curr` column")?,
            prev: find("loss_prev"),
            sigma: find("sigma_override").or_else(|| find("sigma")),
        })
    }

    fn parse(&self, fields: &[&str]) -> std::result::Result<StreamRecord, String> {
        let get = |i: usize| fields.get(i).map(|f| f.trim()).filter(|f| !f.is_empty());
        let num = |i: usize, name: &str| -> std::result::Result<Option<f64>, String> {
            get(i)
                .map(|f| f.parse::<f64>().map_err(|_| format!("{name} `{f}` is not a number")))
                .transpose()
        };
        let t = get(self.t)
            .ok_or("missing t")?
            .parse::<u64>()
            .map_err(|_| "t is not a non-negative integer".to_string())?;
        let loss_curr = num(self.curr, "loss_curr")?.ok_or("missing loss_curr")?;
        let loss_prev = match self.prev {
            Some(i) => num(i, "loss_prev")?,
            None => None,
        };
        let sigma_override = match self.sigma {
            Some(i) => num(i, "sigma_override")?,
            None => None,
        };
        Ok(StreamRecord {
            t,
            loss_curr,
            loss_prev,
            sigma_override,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSummary {
    pub emitted: u64,
    pub skipped: u64,
}

/// Feeds every record to `est`, writing `t,estimate[,half_width]` per
/// accepted record. Rows that cannot be used are reported on `warnings` and
/// skipped; a non-increasing `t` stops the stream with an error.
pub fn stream_estimates(
    est: &mut Oeuvre,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    warnings: &mut dyn Write,
    delta: Option<f64>,
) -> Result<StreamSummary> {
    if let Some(d) = delta {
        // reject a bad level before reading any input
        fixed_time_half_width(0.0, d)?;
    }
    let mut layout: Option<Layout> = None;
    let mut last_t: Option<u64> = None;
    let mut summary = StreamSummary { emitted: 0, skipped: 0 };
    let mut line = String::new();
    let mut lineno = 0u64;
    let io_out = |e| Error::io("<stdout>", e);

    loop {
        line.clear();
        if input.read_line(&mut line).map_err(|e| Error::io("<input>", e))? == 0 {
            break;
        }
        lineno += 1;
        let text = line.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();

        let active = match layout {
            Some(l) => l,
            None => {
                let first = fields[0].trim();
                if first.parse::<u64>().is_err() && first.parse::<f64>().is_err() {
                    match Layout::from_header(&fields) {
                        Ok(l) => {
                            layout = Some(l);
                            continue;
                        }
                        Err(msg) => return Err(Error::Config(format!("line {lineno}: {msg}"))),
                    }
                }
                layout = Some(Layout::POSITIONAL);
                Layout::POSITIONAL
            }
        };

        let record = match active.parse(&fields) {
            Ok(r) => r,
            Err(msg) => {
                skip(warnings, &mut summary, lineno, &msg);
                continue;
            }
        };
        if let Some(prev) = last_t {
            if record.t <= prev {
                out.flush().map_err(io_out)?;
                return Err(Error::InvalidArgument(format!(
                    "line {lineno}: t = {} does not increase (previous {prev})",
                    record.t
                )));
            }
        }
        let Some(loss_prev) = record.loss_prev else {
            skip(warnings, &mut summary, lineno, "loss_prev is required");
            continue;
        };
        let obs = match LossObservation::new(record.loss_curr, loss_prev) {
            Ok(o) => o,
            Err(e) => {
                skip(warnings, &mut summary, lineno, &e.to_string());
                continue;
            }
        };
        // snapshot so a rejected row leaves the estimator untouched
        let before = est.clone();
        let estimate = match est.observe_with_sigma(&obs, record.sigma_override) {
            Ok(v) => v,
            Err(e) => {
                *est = before;
                skip(warnings, &mut summary, lineno, &e.to_string());
                continue;
            }
        };
        last_t = Some(record.t);
        match delta {
            Some(d) if est.state().is_running() => {
                let h = fixed_time_half_width(est.state().var_bound(), d)?;
                writeln!(out, "{},{},{}", record.t, estimate, h).map_err(io_out)?;
            }
            Some(_) => writeln!(out, "{},{},", record.t, estimate).map_err(io_out)?,
            None => writeln!(out, "{},{}", record.t, estimate).map_err(io_out)?,
        }
        summary.emitted += 1;
    }
    out.flush().map_err(io_out)?;
    Ok(summary)
}

fn skip(warnings: &mut dyn Write, summary: &mut StreamSummary, lineno: u64, msg: &str) {
    summary.skipped += 1;
    let _ = writeln!(warnings, "warning: skipping line {lineno}: {msg}");
}
