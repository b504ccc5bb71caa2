//! Line-oriented text formats for instances and solutions.
//!
//! Instance files:
//! ```text
//! # comment
//! instance T=3 gamma=2 s=s d=d
//! vertex s
//! vertex v
//! vertex d
//! edge e0 s v u=1 tau=0 delta=3
//! edge e* v d u=1 tau=0 delta=0
//! ```
//!
//! Solution files hold one line per triple or per temporally repeated path:
//! ```text
//! triple path=e0,e* rate=1 a=0 b=1
//! trpath path=e2,e* rate=6/11
//! ```

use super::{
    fmt_rat, parse_rat, Capacity, Delay, Instance, Path, Rational, TemporallyRepeatedFlow, Triple,
    TripleSolution,
};
use crate::{Error, Result};
use num_traits::Signed;

/// A parsed solution file: pure `trpath` files stay temporally repeated,
/// anything containing a `triple` line becomes a triple solution.
#[derive(Debug, Clone)]
pub enum Solution {
    Triples(TripleSolution),
    TemporallyRepeated(TemporallyRepeatedFlow),
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Strips `#` comments and splits into (1-based line number, tokens).
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            None
        } else {
            Some((i + 1, toks))
        }
    })
}

fn expect_kv<'a>(tok: &'a str, key: &str, line: usize) -> Result<&'a str> {
    match tok.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(parse_err(
            line,
            format!("expected `{key}=...`, found `{tok}`"),
        )),
    }
}

fn parse_u64(tok: &str, what: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_capacity(tok: &str, line: usize) -> Result<Capacity> {
    if tok == "inf" {
        return Ok(Capacity::Infinite);
    }
    let r = parse_rat(tok).map_err(|e| parse_err(line, e))?;
    Ok(Capacity::Finite(r))
}

fn parse_delay(tok: &str, line: usize) -> Result<Delay> {
    if tok == "inf" {
        return Ok(Delay::Infinite);
    }
    Ok(Delay::Finite(parse_u64(tok, "delay", line)?))
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header: Option<(u64, usize, String, String, usize)> = None;
    let mut vertices: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, String, Capacity, u64, Delay)> = Vec::new();

    for (line, toks) in significant_lines(text) {
        match toks[0] {
            "instance" => {
                if header.is_some() {
                    return Err(parse_err(line, "duplicate `instance` header"));
                }
                if toks.len() != 5 {
                    return Err(parse_err(
                        line,
                        "expected `instance T=.. gamma=.. s=.. d=..`",
                    ));
                }
                let t = parse_u64(expect_kv(toks[1], "T", line)?, "horizon", line)?;
                let gamma = parse_u64(expect_kv(toks[2], "gamma", line)?, "budget", line)? as usize;
                let s = expect_kv(toks[3], "s", line)?.to_string();
                let d = expect_kv(toks[4], "d", line)?.to_string();
                header = Some((t, gamma, s, d, line));
            }
            "vertex" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `vertex <id>`"));
                }
                vertices.push(toks[1].to_string());
            }
            "edge" => {
                if toks.len() != 7 {
                    return Err(parse_err(
                        line,
                        "expected `edge <id> <tail> <head> u=.. tau=.. delta=..`",
                    ));
                }
                let u = parse_capacity(expect_kv(toks[4], "u", line)?, line)?;
                let tau = parse_u64(expect_kv(toks[5], "tau", line)?, "travel time", line)?;
                let delta = parse_delay(expect_kv(toks[6], "delta", line)?, line)?;
                edges.push((
                    toks[1].to_string(),
                    toks[2].to_string(),
                    toks[3].to_string(),
                    u,
                    tau,
                    delta,
                ));
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }

    let (horizon, gamma, s, d, hline) =
        header.ok_or_else(|| parse_err(1, "missing `instance` header"))?;
    Instance::new(vertices, edges, &s, &d, horizon, gamma).map_err(|e| match e {
        Error::InvalidInstance(msg) => parse_err(hline, msg),
        other => other,
    })
}

/// Serializes an instance in canonical order (header, vertices, edges).
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "instance T={} gamma={} s={} d={}\n",
        inst.horizon(),
        inst.budget(),
        inst.vertex_name(inst.source()),
        inst.vertex_name(inst.sink())
    ));
    for name in inst.vertex_names() {
        out.push_str(&format!("vertex {name}\n"));
    }
    for e in inst.edges() {
        out.push_str(&format!(
            "edge {} {} {} u={} tau={} delta={}\n",
            e.id,
            inst.vertex_name(e.tail),
            inst.vertex_name(e.head),
            e.capacity,
            e.travel_time,
            e.delay
        ));
    }
    out
}

fn parse_path(tok: &str, inst: &Instance, line: usize) -> Result<Path> {
    let ids: Vec<&str> = tok.split(',').collect();
    Path::from_edge_ids(inst, &ids).map_err(|e| match e {
        Error::InvalidSolution(msg) => parse_err(line, msg),
        other => other,
    })
}

fn parse_positive_rate(tok: &str, line: usize) -> Result<Rational> {
    let r = parse_rat(tok).map_err(|e| parse_err(line, e))?;
    if !r.is_positive() {
        return Err(parse_err(line, "rate must be positive"));
    }
    Ok(r)
}

/// Parses a solution file against an instance. Every line is validated:
/// paths must be simple s-d paths, rates positive, intervals inside the
/// horizon. Capacity feasibility is not checked here; that is the
/// verifier's job.
pub fn parse_solution(text: &str, inst: &Instance) -> Result<Solution> {
    let mut triples: Vec<Triple> = Vec::new();
    let mut trpaths: Vec<(Path, Rational)> = Vec::new();
    let mut saw_triple = false;

    for (line, toks) in significant_lines(text) {
        match toks[0] {
            "triple" => {
                if toks.len() != 5 {
                    return Err(parse_err(
                        line,
                        "expected `triple path=.. rate=.. a=.. b=..`",
                    ));
                }
                saw_triple = true;
                let path = parse_path(expect_kv(toks[1], "path", line)?, inst, line)?;
                let rate = parse_positive_rate(expect_kv(toks[2], "rate", line)?, line)?;
                let a = parse_u64(expect_kv(toks[3], "a", line)?, "interval start", line)?;
                let b = parse_u64(expect_kv(toks[4], "b", line)?, "interval end", line)?;
                if a >= b || b > inst.horizon() {
                    return Err(parse_err(
                        line,
                        format!(
                            "dispatch interval must satisfy 0 <= a < b <= {}",
                            inst.horizon()
                        ),
                    ));
                }
                triples.push(Triple { path, rate, a, b });
            }
            "trpath" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `trpath path=.. rate=..`"));
                }
                let path = parse_path(expect_kv(toks[1], "path", line)?, inst, line)?;
                let rate = parse_positive_rate(expect_kv(toks[2], "rate", line)?, line)?;
                if path.travel_time(inst) >= inst.horizon() {
                    return Err(parse_err(
                        line,
                        "temporally repeated path has an empty dispatch window",
                    ));
                }
                trpaths.push((path, rate));
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }

    if saw_triple || trpaths.is_empty() {
        for (path, rate) in trpaths {
            let b = inst.horizon() - path.travel_time(inst);
            triples.push(Triple {
                path,
                rate,
                a: 0,
                b,
            });
        }
        Ok(Solution::Triples(TripleSolution::new(triples)))
    } else {
        let flow = TemporallyRepeatedFlow::new(trpaths);
        flow.validate(inst)?;
        Ok(Solution::TemporallyRepeated(flow))
    }
}

/// Serializes a triple solution, one `triple` line per element.
pub fn write_triples(sol: &TripleSolution, inst: &Instance) -> String {
    let mut out = String::new();
    for t in &sol.triples {
        out.push_str(&format!(
            "triple path={} rate={} a={} b={}\n",
            t.path.display(inst),
            fmt_rat(&t.rate),
            t.a,
            t.b
        ));
    }
    out
}

/// Serializes a temporally repeated flow, one `trpath` line per path.
pub fn write_tr(flow: &TemporallyRepeatedFlow, inst: &Instance) -> String {
    let mut out = String::new();
    for (p, x) in &flow.rates {
        out.push_str(&format!(
            "trpath path={} rate={}\n",
            p.display(inst),
            fmt_rat(x)
        ));
    }
    out
}
