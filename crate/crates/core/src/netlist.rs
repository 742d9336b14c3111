//! Plain-text netlist format.
//!
//! ```text
//! registers 4
//! period 2
//! 0:1 2:3
//! 1:2
//! ```
//!
//! Line 1 gives the register count, line 2 the declared period (`-` for
//! none), and every following line is one stage of space-separated `i:j`
//! comparators with `i < j`. An empty line is an empty stage. Every line,
//! including the last, ends with `\n`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::netcore::{Comparator, Network, Stage};

pub fn to_netlist(net: &Network) -> String {
    let mut out = String::new();
    writeln!(out, "registers {}", net.n_registers()).unwrap();
    match net.period() {
        Some(p) => writeln!(out, "period {p}").unwrap(),
        None => out.push_str("period -\n"),
    }
    for s in net.stages() {
        let line: Vec<String> = s.comparators().iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header<'a>(line: Option<&'a str>, no: usize, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| parse_err(no, format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| parse_err(no, format!("expected `{key} <value>`")))
}

pub fn parse_netlist(text: &str) -> Result<Network> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| parse_err(text.lines().count().max(1), "missing trailing newline"))?;
    let mut lines = body.split('\n');

    let n_registers: usize = header(lines.next(), 1, "registers")?
        .parse()
        .map_err(|_| parse_err(1, "register count is not a number"))?;
    let period = match header(lines.next(), 2, "period")? {
        "-" => None,
        p => Some(
            p.parse::<usize>()
                .map_err(|_| parse_err(2, "period is not a number or `-`"))?,
        ),
    };

    let mut stages = Vec::new();
    for (i, line) in lines.enumerate() {
        let no = i + 3;
        let mut comps = Vec::new();
        if !line.is_empty() {
            for tok in line.split(' ') {
                let (a, b) = tok
                    .split_once(':')
                    .ok_or_else(|| parse_err(no, format!("bad comparator `{tok}`")))?;
                let lo: usize = a
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad register `{a}`")))?;
                let hi: usize = b
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad register `{b}`")))?;
                if lo >= hi {
                    return Err(parse_err(no, format!("comparator `{tok}` is not standard")));
                }
                if hi >= n_registers {
                    return Err(parse_err(no, format!("register {hi} out of range")));
                }
                comps.push(Comparator { lo, hi });
            }
        }
        stages.push(Stage::new(comps).map_err(|e| parse_err(no, e.to_string()))?);
    }
    Network::new(n_registers, stages, period).map_err(|e| parse_err(2, e.to_string()))
}
