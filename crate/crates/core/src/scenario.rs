//! Plain-text scenario files.
//!
//! ```text
//! # two oscillators pulled toward a 45 degree spacing
//! [model]
//! kind = kuramoto-bond
//!
//! [params]
//! kappa0 = 1
//! kappa1 = 5
//! kappa2 = 10
//!
//! [target]
//! phases = 0 45 deg
//!
//! [initial]
//! theta = 0.1 0.5 rad
//! omega = constrained
//!
//! [run]
//! dt = 0.01
//! t_end = 5
//! ```
//!
//! Angles and angular rates (`theta`, `omega`, `nu`, Kuramoto `phases` and
//! `matrix`) end with a `rad` or `deg` unit token. Multi-row values (`points`,
//! `matrix`, `x`, `v`) separate rows with `;`. `weight` is `constant-one`,
//! `algebraic`, or `table r:psi r:psi ...`. `gap_floor = none` disables the
//! gap monitor.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cucker_smale::CommWeight;
use crate::error::{Error, Result};
use crate::kuramoto::{constrained_initial_frequencies, Km1Params};
use crate::model::{
    target_from_phases, target_from_points, validate_scenario, CsState, InitialState,
    KuramotoState, ModelKind, ModelParams, Scenario, TargetMatrix, DEFAULT_GAP_FLOOR,
};

const SECTIONS: [(&str, &[&str]); 5] = [
    ("model", &["kind", "weight"]),
    ("params", &["kappa0", "kappa1", "kappa2", "nu"]),
    ("target", &["phases", "points", "matrix"]),
    ("initial", &["theta", "omega", "x", "v"]),
    ("run", &["dt", "t_end", "stride", "gap_floor"]),
];

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Doc {
    sections: BTreeMap<&'static str, (usize, BTreeMap<&'static str, Entry>)>,
    last_line: usize,
}

impl Doc {
    fn parse(text: &str) -> Result<Doc> {
        let mut sections: BTreeMap<&'static str, (usize, BTreeMap<&'static str, Entry>)> =
            BTreeMap::new();
        let mut current: Option<&'static str> = None;
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                let name = name.trim();
                let Some(&(known, _)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                    return Err(perr(line, format!("unknown section [{name}]")));
                };
                if sections.contains_key(known) {
                    return Err(perr(line, format!("section [{known}] appears twice")));
                }
                sections.insert(known, (line, BTreeMap::new()));
                current = Some(known);
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(perr(
                    line,
                    format!("expected `key = value`, found `{body}`"),
                ));
            };
            let Some(section) = current else {
                return Err(perr(line, "key outside of any section"));
            };
            let key = key.trim();
            let keys = SECTIONS
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            let Some(&known) = keys.iter().find(|k| **k == key) else {
                return Err(perr(line, format!("unknown key `{key}` in [{section}]")));
            };
            let table = &mut sections
                .get_mut(section)
                .expect("section registered above")
                .1;
            if table.contains_key(known) {
                return Err(perr(line, format!("duplicate key `{key}` in [{section}]")));
            }
            table.insert(
                known,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }
        Ok(Doc {
            sections,
            last_line,
        })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|(_, t)| t.get(key))
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry> {
        self.get(section, key).ok_or_else(|| {
            let line = self
                .sections
                .get(section)
                .map_or(self.last_line, |(l, _)| *l);
            perr(line, format!("missing `{key}` in [{section}]"))
        })
    }
}

fn number(e: &Entry, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| perr(e.line, format!("`{tok}` is not a number")))
}

fn scalar(e: &Entry) -> Result<f64> {
    number(e, &e.value)
}

fn numbers(e: &Entry, text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| number(e, t))
        .collect()
}

/// Splits off the trailing `rad`/`deg` token and returns the radian factor.
fn strip_unit(e: &Entry) -> Result<(&str, f64)> {
    let v = e.value.trim_end();
    if let Some(rest) = v.strip_suffix("rad") {
        Ok((rest, 1.0))
    } else if let Some(rest) = v.strip_suffix("deg") {
        Ok((rest, std::f64::consts::PI / 180.0))
    } else {
        Err(perr(
            e.line,
            "angle values need a trailing unit, `rad` or `deg`",
        ))
    }
}

fn angles(e: &Entry) -> Result<Vec<f64>> {
    let (body, factor) = strip_unit(e)?;
    let vals = numbers(e, body)?;
    Ok(if factor == 1.0 {
        vals
    } else {
        vals.into_iter().map(f64::to_radians).collect()
    })
}

fn rows(e: &Entry, text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|r| numbers(e, r))
        .filter(|r| !matches!(r, Ok(v) if v.is_empty()))
        .collect()
}

fn weight(e: &Entry) -> Result<CommWeight> {
    let mut toks = e.value.split_whitespace();
    match toks.next() {
        Some("constant-one") if toks.next().is_none() => Ok(CommWeight::ConstantOne),
        Some("algebraic") if toks.next().is_none() => Ok(CommWeight::Algebraic),
        Some("table") => toks
            .map(|knot| {
                let (r, p) = knot
                    .trim_end_matches(',')
                    .split_once(':')
                    .ok_or_else(|| perr(e.line, format!("table knot `{knot}` is not `r:psi`")))?;
                Ok((number(e, r)?, number(e, p)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(CommWeight::Table),
        _ => Err(perr(e.line, format!("unknown weight `{}`", e.value))),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc = Doc::parse(text)?;

    let kind = doc.require("model", "kind")?;
    let model = ModelKind::from_tag(&kind.value)
        .ok_or_else(|| perr(kind.line, format!("unknown model kind `{}`", kind.value)))?;
    let weight = match doc.get("model", "weight") {
        Some(e) => weight(e)?,
        None if model.is_kuramoto() => CommWeight::ConstantOne,
        None => CommWeight::Algebraic,
    };

    let params = ModelParams {
        kappa0: scalar(doc.require("params", "kappa0")?)?,
        kappa1: scalar(doc.require("params", "kappa1")?)?,
        kappa2: scalar(doc.require("params", "kappa2")?)?,
    };
    let nu = doc.get("params", "nu").map(angles).transpose()?;

    let target_keys: Vec<&str> = ["phases", "points", "matrix"]
        .into_iter()
        .filter(|k| doc.get("target", k).is_some())
        .collect();
    let target = match target_keys.as_slice() {
        ["phases"] => {
            let e = doc.require("target", "phases")?;
            if !model.is_kuramoto() {
                return Err(perr(
                    e.line,
                    "`phases` targets are for Kuramoto models; use `points`",
                ));
            }
            target_from_phases(&angles(e)?)?
        }
        ["points"] => {
            let e = doc.require("target", "points")?;
            target_from_points(&rows(e, &e.value)?)?
        }
        ["matrix"] => {
            let e = doc.require("target", "matrix")?;
            let m = if model.is_kuramoto() {
                let (body, factor) = strip_unit(e)?;
                let r = rows(e, body)?;
                if factor == 1.0 {
                    r
                } else {
                    r.into_iter()
                        .map(|row| row.into_iter().map(f64::to_radians).collect())
                        .collect()
                }
            } else {
                rows(e, &e.value)?
            };
            TargetMatrix::from_rows(&m)?
        }
        [] => {
            let line = doc
                .sections
                .get("target")
                .map_or(doc.last_line, |(l, _)| *l);
            return Err(perr(
                line,
                "[target] needs one of `phases`, `points`, `matrix`",
            ));
        }
        _ => {
            let line = doc.require("target", target_keys[1])?.line;
            return Err(perr(
                line,
                "[target] takes exactly one of `phases`, `points`, `matrix`",
            ));
        }
    };

    let initial = if model.is_kuramoto() {
        let theta = angles(doc.require("initial", "theta")?)?;
        let constrained = |theta: &[f64]| {
            let nu = nu.clone().unwrap_or_else(|| vec![0.0; theta.len()]);
            constrained_initial_frequencies(
                theta,
                &Km1Params {
                    kappa0: params.kappa0,
                    nu,
                },
            )
        };
        let omega = match doc.get("initial", "omega") {
            Some(e) if e.value == "constrained" => constrained(&theta)?,
            Some(e) => angles(e)?,
            None if model == ModelKind::KuramotoFirstOrder => constrained(&theta)?,
            None => angles(doc.require("initial", "omega")?)?,
        };
        InitialState::Kuramoto(KuramotoState {
            t: 0.0,
            theta,
            omega,
        })
    } else {
        let xe = doc.require("initial", "x")?;
        let ve = doc.require("initial", "v")?;
        let (x, v) = (rows(xe, &xe.value)?, rows(ve, &ve.value)?);
        if x.len() != v.len() {
            return Err(perr(
                ve.line,
                format!("{} position rows but {} velocity rows", x.len(), v.len()),
            ));
        }
        InitialState::Cs(CsState::from_rows(0.0, &x, &v)?)
    };

    let stride = match doc.get("run", "stride") {
        Some(e) => e
            .value
            .parse::<usize>()
            .map_err(|_| perr(e.line, format!("`{}` is not a stride", e.value)))?,
        None => 1,
    };
    let gap_floor = match doc.get("run", "gap_floor") {
        Some(e) if e.value == "none" => None,
        Some(e) => Some(scalar(e)?),
        None => Some(DEFAULT_GAP_FLOOR),
    };
    let s = Scenario {
        model,
        params,
        nu,
        target,
        initial,
        weight,
        dt: scalar(doc.require("run", "dt")?)?,
        t_end: scalar(doc.require("run", "t_end")?)?,
        stride,
        gap_floor,
    };
    validate_scenario(&s)?;
    Ok(s)
}

/// Shortest text that parses back to exactly `v`.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn join(vals: &[f64]) -> String {
    vals.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ")
}

fn join_rows(vals: &[f64], width: usize) -> String {
    vals.chunks(width).map(join).collect::<Vec<_>>().join("; ")
}

/// Writes a document that [`parse_scenario`] maps back to `s` exactly.
pub fn emit_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let kura = s.model.is_kuramoto();
    let w = match &s.weight {
        CommWeight::ConstantOne => "constant-one".to_string(),
        CommWeight::Algebraic => "algebraic".to_string(),
        CommWeight::Table(k) => {
            let knots: Vec<String> = k
                .iter()
                .map(|&(r, p)| format!("{}:{}", num(r), num(p)))
                .collect();
            format!("table {}", knots.join(" "))
        }
    };
    let _ = writeln!(out, "[model]\nkind = {}\nweight = {w}\n", s.model.tag());
    let p = &s.params;
    let _ = writeln!(
        out,
        "[params]\nkappa0 = {}\nkappa1 = {}\nkappa2 = {}",
        num(p.kappa0),
        num(p.kappa1),
        num(p.kappa2)
    );
    if let Some(nu) = &s.nu {
        let _ = writeln!(out, "nu = {} rad", join(nu));
    }
    let unit = if kura { " rad" } else { "" };
    let _ = writeln!(
        out,
        "\n[target]\nmatrix = {}{unit}\n",
        join_rows(s.target.entries(), s.target.n())
    );
    match &s.initial {
        InitialState::Kuramoto(k) => {
            let _ = writeln!(
                out,
                "[initial]\ntheta = {} rad\nomega = {} rad\n",
                join(&k.theta),
                join(&k.omega)
            );
        }
        InitialState::Cs(c) => {
            let _ = writeln!(
                out,
                "[initial]\nx = {}\nv = {}\n",
                join_rows(&c.x, c.dim),
                join_rows(&c.v, c.dim)
            );
        }
    }
    let floor = s.gap_floor.map_or_else(|| "none".to_string(), num);
    let _ = writeln!(
        out,
        "[run]\ndt = {}\nt_end = {}\nstride = {}\ngap_floor = {floor}",
        num(s.dt),
        num(s.t_end),
        s.stride
    );
    out
}
