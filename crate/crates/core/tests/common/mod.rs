//! Standalone readers for the LP and free MPS text the exporter writes.
//! They share nothing with the writer so a round trip checks both.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub lin: BTreeMap<String, f64>,
    /// Coefficient of `a·b`, keyed by the sorted pair.
    pub quad: BTreeMap<(String, String), f64>,
    pub sense: char,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    pub obj: BTreeMap<String, f64>,
    pub obj_const: f64,
    pub rows: BTreeMap<String, Row>,
    /// Every column with its bounds (`±∞` for none).
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
}

fn pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

fn num(tok: &str) -> Result<f64, String> {
    match tok {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| format!("bad number {tok:?}")),
    }
}

fn is_num(tok: &str) -> bool {
    num(tok).is_ok()
}

impl Model {
    pub fn eval_row(&self, name: &str, x: &BTreeMap<String, f64>) -> f64 {
        let r = &self.rows[name];
        let lin: f64 = r.lin.iter().map(|(v, c)| c * x[v]).sum();
        let quad: f64 = r.quad.iter().map(|((a, b), c)| c * x[a] * x[b]).sum();
        lin + quad - r.rhs
    }

    fn touch(&mut self, v: &str) {
        self.bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
    }
}

/// Linear and bracketed quadratic terms with an optional constant, as in
/// `+ 2 x - 3 y + [ + 1 x ^ 2 - 2 x * y ] + 4`.
fn terms(toks: &[&str], m: &mut Model) -> Result<(BTreeMap<String, f64>, BTreeMap<(String, String), f64>, f64), String> {
    let (mut lin, mut quad, mut constant) = (BTreeMap::new(), BTreeMap::new(), 0.0);
    let mut i = 0;
    let mut in_quad = false;
    while i < toks.len() {
        match toks[i] {
            "[" => {
                in_quad = true;
                i += 1;
                continue;
            }
            "]" => {
                in_quad = false;
                i += 1;
                continue;
            }
            _ => {}
        }
        let mut sign = 1.0;
        if toks[i] == "+" || toks[i] == "-" {
            sign = if toks[i] == "-" { -1.0 } else { 1.0 };
            i += 1;
            if toks.get(i) == Some(&"[") {
                continue;
            }
        }
        let mut coef = 1.0;
        if let Some(t) = toks.get(i).filter(|t| is_num(t)) {
            coef = num(t)?;
            i += 1;
        }
        match toks.get(i) {
            None | Some(&"+") | Some(&"-") | Some(&"]") => {
                constant += sign * coef;
                continue;
            }
            Some(v) => {
                let v = v.to_string();
                m.touch(&v);
                i += 1;
                if toks.get(i) == Some(&"^") {
                    if !in_quad || toks.get(i + 1) != Some(&"2") {
                        return Err("misplaced ^".into());
                    }
                    *quad.entry(pair(&v, &v)).or_insert(0.0) += sign * coef;
                    i += 2;
                } else if toks.get(i) == Some(&"*") {
                    let w = toks.get(i + 1).ok_or("dangling *")?.to_string();
                    if !in_quad {
                        return Err("product outside brackets".into());
                    }
                    m.touch(&w);
                    *quad.entry(pair(&v, &w)).or_insert(0.0) += sign * coef;
                    i += 2;
                } else {
                    if in_quad {
                        return Err(format!("linear term {v} inside brackets"));
                    }
                    *lin.entry(v).or_insert(0.0) += sign * coef;
                }
            }
        }
    }
    if in_quad {
        return Err("unclosed bracket".into());
    }
    Ok((lin, quad, constant))
}

pub fn parse_lp(text: &str) -> Result<Model, String> {
    let mut m = Model::default();
    let mut section = "";
    let mut ended = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" | "Subject To" | "Bounds" | "Binaries" => {
                section = line;
                continue;
            }
            "End" => {
                ended = true;
                break;
            }
            _ => {}
        }
        let (label, body) = match line.split_once(": ") {
            Some((l, b)) if section == "Minimize" || section == "Subject To" => (Some(l.trim()), b),
            _ => (None, line),
        };
        let toks: Vec<&str> = body.split_whitespace().collect();
        match section {
            "Minimize" => {
                let (lin, quad, c) = terms(&toks, &mut m)?;
                if !quad.is_empty() {
                    return Err("quadratic objective".into());
                }
                m.obj = lin;
                m.obj_const = c;
            }
            "Subject To" => {
                let name = label.ok_or_else(|| format!("unnamed row: {line}"))?.to_string();
                let k = toks.iter().position(|t| ["<=", ">=", "="].contains(t)).ok_or("row without sense")?;
                let (lin, quad, c) = terms(&toks[..k], &mut m)?;
                if toks.len() != k + 2 {
                    return Err(format!("row {name}: trailing tokens"));
                }
                let sense = match toks[k] {
                    "<=" => 'L',
                    ">=" => 'G',
                    _ => 'E',
                };
                let rhs = num(toks[k + 1])? - c;
                let lin = lin.into_iter().filter(|(_, c)| *c != 0.0).collect();
                if m.rows.insert(name.clone(), Row { lin, quad, sense, rhs }).is_some() {
                    return Err(format!("duplicate row {name}"));
                }
            }
            "Bounds" => match toks.as_slice() {
                [v, "free"] => {
                    m.bounds.insert(v.to_string(), (f64::NEG_INFINITY, f64::INFINITY));
                }
                [l, "<=", v, "<=", u] => {
                    m.bounds.insert(v.to_string(), (num(l)?, num(u)?));
                }
                [v, ">=", l] => {
                    let u = m.bounds.get(*v).map_or(f64::INFINITY, |b| b.1);
                    m.bounds.insert(v.to_string(), (num(l)?, u));
                }
                [v, "<=", u] => {
                    let l = m.bounds.get(*v).map_or(0.0, |b| b.0);
                    m.bounds.insert(v.to_string(), (l, num(u)?));
                }
                [v, "=", x] => {
                    let x = num(x)?;
                    m.bounds.insert(v.to_string(), (x, x));
                }
                _ => return Err(format!("bad bound: {line}")),
            },
            "Binaries" => {
                for v in toks {
                    m.binaries.insert(v.to_string());
                    let b = m.bounds.entry(v.to_string()).or_insert((0.0, 1.0));
                    // binaries without an explicit bound line live in [0, 1]
                    if *b == (0.0, f64::INFINITY) {
                        *b = (0.0, 1.0);
                    }
                }
            }
            _ => return Err(format!("text outside a section: {line}")),
        }
    }
    if !ended {
        return Err("missing End".into());
    }
    Ok(m)
}

pub fn parse_mps(text: &str) -> Result<Model, String> {
    let mut m = Model::default();
    let mut section = String::new();
    let mut qrow = String::new();
    let mut in_int = false;
    let mut ended = false;
    let mut objective = None;
    for raw in text.lines() {
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = toks[0].to_string();
            match toks.as_slice() {
                ["NAME", ..] | ["ROWS"] | ["COLUMNS"] | ["RHS"] | ["BOUNDS"] => {}
                ["QCMATRIX", row] => {
                    if !m.rows.contains_key(*row) {
                        return Err(format!("QCMATRIX for unknown row {row}"));
                    }
                    qrow = row.to_string();
                }
                ["ENDATA"] => {
                    ended = true;
                    break;
                }
                _ => return Err(format!("unknown section line {raw:?}")),
            }
            continue;
        }
        match section.as_str() {
            "ROWS" => match toks.as_slice() {
                ["N", name] => objective = Some(name.to_string()),
                [s @ ("L" | "G" | "E"), name] => {
                    let row = Row { sense: s.chars().next().unwrap(), ..Default::default() };
                    if m.rows.insert(name.to_string(), row).is_some() {
                        return Err(format!("duplicate row {name}"));
                    }
                }
                _ => return Err(format!("bad ROWS line {raw:?}")),
            },
            "COLUMNS" => {
                if toks.len() == 3 && toks[1] == "'MARKER'" || toks.get(1) == Some(&"MARKER") {
                    in_int = match toks[2].trim_matches('\'') {
                        "INTORG" => true,
                        "INTEND" => false,
                        t => return Err(format!("bad marker {t}")),
                    };
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(format!("bad COLUMNS line {raw:?}"));
                }
                let col = toks[0];
                m.touch(col);
                if in_int {
                    m.binaries.insert(col.to_string());
                }
                for pair in toks[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        if v != 0.0 {
                            *m.obj.entry(col.into()).or_insert(0.0) += v;
                        }
                    } else {
                        let r = m.rows.get_mut(pair[0]).ok_or_else(|| format!("unknown row {}", pair[0]))?;
                        *r.lin.entry(col.into()).or_insert(0.0) += v;
                    }
                }
            }
            "RHS" => {
                if toks.len() != 3 {
                    return Err(format!("bad RHS line {raw:?}"));
                }
                let v = num(toks[2])?;
                if Some(toks[1]) == objective.as_deref() {
                    m.obj_const = -v;
                } else {
                    m.rows.get_mut(toks[1]).ok_or_else(|| format!("unknown row {}", toks[1]))?.rhs = v;
                }
            }
            "BOUNDS" => {
                let col = *toks.get(2).ok_or("short BOUNDS line")?;
                let b = m.bounds.get_mut(col).ok_or_else(|| format!("bound on unknown column {col}"))?;
                let val = || toks.get(3).ok_or("missing bound value").map(|t| num(t));
                match toks[0] {
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "BV" => *b = (0.0, 1.0),
                    "LO" => b.0 = val()??,
                    "UP" => b.1 = val()??,
                    "FX" => {
                        let x = val()??;
                        *b = (x, x);
                    }
                    t => return Err(format!("bad bound type {t}")),
                }
            }
            "QCMATRIX" => {
                if toks.len() != 3 {
                    return Err(format!("bad QCMATRIX line {raw:?}"));
                }
                let v = num(toks[2])?;
                let r = m.rows.get_mut(&qrow).unwrap();
                *r.quad.entry(pair(toks[0], toks[1])).or_insert(0.0) += v;
            }
            s => return Err(format!("data in section {s:?}")),
        }
    }
    if !ended {
        return Err("missing ENDATA".into());
    }
    for b in &m.binaries {
        let bd = m.bounds[b];
        if bd.0 < 0.0 || bd.1 > 1.0 {
            return Err(format!("binary {b} has bounds {bd:?}"));
        }
    }
    Ok(m)
}
