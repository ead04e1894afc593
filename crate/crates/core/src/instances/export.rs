//! LP, MPS and JSON writers for formulations.
//!
//! Quadratic perspective rows are first rewritten as rotated rows
//! `λ·u ≥ Σ e_k²`, which are written as `[Σ e_k² − u·λ] ≤ 0`. Perspective rows
//! of other functions only exist in JSON. Names are made file-safe by
//! turning `::` into `.` and any other unusual character into `_`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::disjunctive::model::{ExtendedFormulation, LinExpr, RotatedRow, Sense, VarKind};
use crate::error::{Error, Result};

pub const FORMULATION_SCHEMA: &str = "indicvex-form/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Lp,
    Mps,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lp" => Ok(ExportFormat::Lp),
            "mps" => Ok(ExportFormat::Mps),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other}; expected lp, mps or json"))),
        }
    }
}

pub fn export(f: &ExtendedFormulation, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Lp => export_lp(f),
        ExportFormat::Mps => export_mps(f),
        ExportFormat::Json => export_json(f),
    }
}

#[derive(Serialize, Deserialize)]
struct FormDoc {
    schema: String,
    #[serde(flatten)]
    formulation: ExtendedFormulation,
}

pub fn export_json(f: &ExtendedFormulation) -> Result<String> {
    f.validate()?;
    let doc = FormDoc { schema: FORMULATION_SCHEMA.into(), formulation: f.clone() };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn import_json(text: &str) -> Result<ExtendedFormulation> {
    let doc: FormDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.schema != FORMULATION_SCHEMA {
        return Err(Error::Parse(format!("unknown schema {}", doc.schema)));
    }
    doc.formulation.validate()?;
    Ok(doc.formulation)
}

pub fn sanitize(name: &str) -> String {
    name.replace("::", ".")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c) { c } else { '_' })
        .collect()
}

/// A row `linear + quadratic (sense) rhs` over variable indices.
struct Row {
    name: String,
    linear: BTreeMap<usize, f64>,
    /// Keys `(i, j)` with `i ≤ j`.
    quad: BTreeMap<(usize, usize), f64>,
    sense: Sense,
    rhs: f64,
}

fn add(map: &mut BTreeMap<usize, f64>, v: usize, c: f64) {
    *map.entry(v).or_insert(0.0) += c;
}

fn add_q(map: &mut BTreeMap<(usize, usize), f64>, i: usize, j: usize, c: f64) {
    *map.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
}

fn linear_row(name: &str, e: &LinExpr, sense: Sense, rhs: f64) -> Row {
    let mut linear = BTreeMap::new();
    for &(v, c) in &e.terms {
        add(&mut linear, v.0, c);
    }
    Row { name: sanitize(name), linear, quad: BTreeMap::new(), sense, rhs: rhs - e.constant }
}

/// `Σ e_k² − u·λ ≤ 0` expanded into monomials.
fn rotated_row(r: &RotatedRow) -> Row {
    let mut linear = BTreeMap::new();
    let mut quad = BTreeMap::new();
    let mut constant = 0.0;
    for e in &r.exprs {
        let e = e.canonical();
        for (a, &(vi, ci)) in e.terms.iter().enumerate() {
            add_q(&mut quad, vi.0, vi.0, ci * ci);
            for &(vj, cj) in &e.terms[a + 1..] {
                add_q(&mut quad, vi.0, vj.0, 2.0 * ci * cj);
            }
            add(&mut linear, vi.0, 2.0 * e.constant * ci);
        }
        constant += e.constant * e.constant;
    }
    let lam = r.lambda.canonical();
    for &(v, c) in &lam.terms {
        add_q(&mut quad, r.u.0, v.0, -c);
    }
    add(&mut linear, r.u.0, -lam.constant);
    linear.retain(|_, c| *c != 0.0);
    quad.retain(|_, c| *c != 0.0);
    Row { name: sanitize(&r.name), linear, quad, sense: Sense::Le, rhs: -constant }
}

struct Prepared {
    names: Vec<String>,
    f: ExtendedFormulation,
    rows: Vec<Row>,
}

fn prepare(f: &ExtendedFormulation) -> Result<Prepared> {
    f.validate()?;
    let f = f.lower_quadratic_perspectives()?;
    if let Some(p) = f.perspective_rows.first() {
        return Err(Error::Unsupported(format!("row {} uses a non-quadratic function; only JSON can carry it", p.name)));
    }
    let names: Vec<String> = f.variables.iter().map(|v| sanitize(&v.name)).collect();
    let mut seen = BTreeSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return Err(Error::Unsupported(format!("variable name {n} is ambiguous after sanitizing")));
        }
    }
    let mut rows: Vec<Row> = f.linear_rows.iter().map(|r| linear_row(&r.name, &r.expr, r.sense, r.rhs)).collect();
    rows.extend(f.rotated_rows.iter().map(rotated_row));
    let mut seen = BTreeSet::new();
    for r in &rows {
        if r.name == "obj" || !seen.insert(r.name.clone()) {
            return Err(Error::Unsupported(format!("row name {} is reserved or repeated", r.name)));
        }
    }
    Ok(Prepared { names, f, rows })
}

/// Shortest text that reads back to the same value.
pub fn num(v: f64) -> String {
    let v = v + 0.0;
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn signed(c: f64) -> String {
    if c < 0.0 {
        format!("- {}", num(-c))
    } else {
        format!("+ {}", num(c))
    }
}

fn sense_str(s: Sense) -> &'static str {
    match s {
        Sense::Le => "<=",
        Sense::Ge => ">=",
        Sense::Eq => "=",
    }
}

pub fn export_lp(f: &ExtendedFormulation) -> Result<String> {
    let p = prepare(f)?;
    let nm = |i: usize| p.names[i].as_str();
    let mut out = String::new();
    writeln!(out, "\\ {}", p.f.name).unwrap();
    writeln!(out, "Minimize").unwrap();
    write!(out, " obj:").unwrap();
    let obj = p.f.objective.canonical();
    for &(v, c) in &obj.terms {
        write!(out, " {} {}", signed(c), nm(v.0)).unwrap();
    }
    let constant = obj.constant + p.f.offset;
    if constant != 0.0 || obj.terms.is_empty() {
        write!(out, " {}", signed(constant)).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "Subject To").unwrap();
    for r in &p.rows {
        write!(out, " {}:", r.name).unwrap();
        for (&v, &c) in &r.linear {
            write!(out, " {} {}", signed(c), nm(v)).unwrap();
        }
        if !r.quad.is_empty() {
            write!(out, " + [").unwrap();
            for (&(i, j), &c) in &r.quad {
                if i == j {
                    write!(out, " {} {} ^ 2", signed(c), nm(i)).unwrap();
                } else {
                    write!(out, " {} {} * {}", signed(c), nm(i), nm(j)).unwrap();
                }
            }
            write!(out, " ]").unwrap();
        }
        if r.linear.is_empty() && r.quad.is_empty() {
            write!(out, " 0 {}", nm(0)).unwrap();
        }
        writeln!(out, " {} {}", sense_str(r.sense), num(r.rhs)).unwrap();
    }
    writeln!(out, "Bounds").unwrap();
    let mut binaries = Vec::new();
    for (i, v) in p.f.variables.iter().enumerate() {
        let is_bin = v.kind == VarKind::Binary;
        if is_bin {
            binaries.push(nm(i));
            if v.lower == Some(0.0) && v.upper == Some(1.0) {
                continue;
            }
        }
        match (v.lower, v.upper) {
            (None, None) => writeln!(out, " {} free", nm(i)),
            (Some(l), Some(u)) if l == u => writeln!(out, " {} = {}", nm(i), num(l)),
            (Some(l), Some(u)) => writeln!(out, " {} <= {} <= {}", num(l), nm(i), num(u)),
            (Some(l), None) => writeln!(out, " {} >= {}", nm(i), num(l)),
            (None, Some(u)) => writeln!(out, " -inf <= {} <= {}", nm(i), num(u)),
        }
        .unwrap();
    }
    if !binaries.is_empty() {
        writeln!(out, "Binaries").unwrap();
        for b in binaries {
            writeln!(out, " {b}").unwrap();
        }
    }
    writeln!(out, "End").unwrap();
    Ok(out)
}

pub fn export_mps(f: &ExtendedFormulation) -> Result<String> {
    let p = prepare(f)?;
    let nm = |i: usize| p.names[i].as_str();
    let mut out = String::new();
    writeln!(out, "NAME {}", sanitize(&p.f.name)).unwrap();
    writeln!(out, "ROWS").unwrap();
    writeln!(out, " N obj").unwrap();
    for r in &p.rows {
        let s = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        writeln!(out, " {s} {}", r.name).unwrap();
    }
    // column-major entries
    let nvars = p.f.variables.len();
    let mut cols: Vec<Vec<(String, f64)>> = vec![Vec::new(); nvars];
    let obj = p.f.objective.canonical();
    for &(v, c) in &obj.terms {
        cols[v.0].push(("obj".into(), c));
    }
    for r in &p.rows {
        for (&v, &c) in &r.linear {
            cols[v].push((r.name.clone(), c));
        }
    }
    writeln!(out, "COLUMNS").unwrap();
    let mut in_int = false;
    for i in 0..nvars {
        let is_bin = p.f.variables[i].kind == VarKind::Binary;
        if is_bin != in_int {
            let tag = if is_bin { "INTORG" } else { "INTEND" };
            writeln!(out, "    MARKER MARKER {tag}").unwrap();
            in_int = is_bin;
        }
        if cols[i].is_empty() {
            writeln!(out, "    {} obj 0", nm(i)).unwrap();
        }
        for (row, c) in &cols[i] {
            writeln!(out, "    {} {} {}", nm(i), row, num(*c)).unwrap();
        }
    }
    if in_int {
        writeln!(out, "    MARKER MARKER INTEND").unwrap();
    }
    writeln!(out, "RHS").unwrap();
    let constant = obj.constant + p.f.offset;
    if constant != 0.0 {
        // the objective constant enters with a flipped sign
        writeln!(out, "    RHS obj {}", num(-constant)).unwrap();
    }
    for r in &p.rows {
        if r.rhs != 0.0 {
            writeln!(out, "    RHS {} {}", r.name, num(r.rhs)).unwrap();
        }
    }
    writeln!(out, "BOUNDS").unwrap();
    for (i, v) in p.f.variables.iter().enumerate() {
        let n = nm(i);
        if v.kind == VarKind::Binary && v.lower == Some(0.0) && v.upper == Some(1.0) {
            writeln!(out, " BV BND {n}").unwrap();
            continue;
        }
        match (v.lower, v.upper) {
            (None, None) => writeln!(out, " FR BND {n}").unwrap(),
            (Some(l), Some(u)) if l == u => writeln!(out, " FX BND {n} {}", num(l)).unwrap(),
            (lo, up) => {
                match lo {
                    None => writeln!(out, " MI BND {n}").unwrap(),
                    Some(l) => writeln!(out, " LO BND {n} {}", num(l)).unwrap(),
                }
                if let Some(u) = up {
                    writeln!(out, " UP BND {n} {}", num(u)).unwrap();
                }
            }
        }
    }
    for r in &p.rows {
        if r.quad.is_empty() {
            continue;
        }
        writeln!(out, "QCMATRIX {}", r.name).unwrap();
        // full symmetric listing of xᵀQx
        let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(i, j), &c) in &r.quad {
            if i == j {
                entries.insert((i, i), c);
            } else {
                entries.insert((i, j), c / 2.0);
                entries.insert((j, i), c / 2.0);
            }
        }
        for ((i, j), c) in entries {
            writeln!(out, "    {} {} {}", nm(i), nm(j), num(c)).unwrap();
        }
    }
    writeln!(out, "ENDATA").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::UnivariateConvex;
    use crate::disjunctive::rank1::{build_conic_quadratic, build_rank1_compact};
    use crate::envelope::RankOneInstance;

    fn conic(n: usize) -> ExtendedFormulation {
        let inst = RankOneInstance::homogeneous(vec![1.0; n], vec![], UnivariateConvex::quadratic(1.0).unwrap()).unwrap();
        build_conic_quadratic(&inst).unwrap()
    }

    #[test]
    fn names() {
        assert_eq!(sanitize("V{1,3}::x2"), "V{1,3}.x2");
        assert_eq!(sanitize("a b:c"), "a_b_c");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1e-10), "1e-10");
        assert_eq!("MPS".parse::<ExportFormat>().unwrap(), ExportFormat::Mps);
    }

    #[test]
    fn json_round_trip() {
        let f = conic(2);
        let text = export_json(&f).unwrap();
        assert_eq!(import_json(&text).unwrap(), f);
        assert_eq!(export_json(&import_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn non_quadratic_rejected_outside_json() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![], UnivariateConvex::huber(1.0).unwrap()).unwrap();
        let f = build_rank1_compact(&inst).unwrap();
        assert!(matches!(export_lp(&f), Err(Error::Unsupported(_))));
        assert!(matches!(export_mps(&f), Err(Error::Unsupported(_))));
        assert!(export_json(&f).is_ok());
    }

    #[test]
    fn rotated_row_text() {
        let lp = export_lp(&conic(1)).unwrap();
        assert!(lp.contains(" rot1: + [ + 1 x1 ^ 2 - 2 x1 * tau1 - 1 lambda1 * u1 + 1 tau1 ^ 2 ] <= 0\n"), "{lp}");
    }
}
