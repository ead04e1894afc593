//! Hull of `(y − v)² + Ω(y − Σ a_i x_i)²` with indicators `z_i` on `x_i`, `u`
//! on `y` and `w` on `v`.
//!
//! Variable order is `x1..xℓ, y, v`. Only the pieces whose support makes the
//! function strictly convex on its span are needed: single variables, the
//! pairs `{x_i, y}`, `{x_i, v}`, `{y, v}`, and the cone where both squares
//! vanish. Pairs `{x_i, x_j}` are dominated and left out.

use crate::convex::UnivariateConvex;
use crate::error::{Error, Result};

use super::hull::AffineConvexSpec;
use super::model::{ConeFunction, ExtendedFormulation};
use super::union::{build_union_hull, PieceBody, UnionPiece, UnionSpec};

/// Dense row over `x1..xℓ, y, v`.
fn row(ell: usize, entries: &[(usize, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; ell + 2];
    for &(j, v) in entries {
        r[j] += v;
    }
    r
}

fn quad(coef: f64) -> Result<ConeFunction> {
    Ok(ConeFunction::Univariate { g: UnivariateConvex::quadratic(coef)? })
}

fn diag(omega: f64) -> ConeFunction {
    ConeFunction::QuadraticForm { q: vec![vec![1.0, 0.0], vec![0.0, omega]] }
}

fn check(omega: f64, a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidInstance("the window needs at least one coefficient".into()));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInstance(format!("Ω must be positive, got {omega}")));
    }
    if a.iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::InvalidInstance("window coefficients must be finite and nonzero".into()));
    }
    Ok(())
}

/// Variable names `x1..xℓ, y, v` and indicator names `z1..zℓ, u, w`.
pub fn q2_names(ell: usize) -> (Vec<String>, Vec<String>) {
    let mut vars: Vec<String> = (1..=ell).map(|i| format!("x{i}")).collect();
    vars.push("y".into());
    vars.push("v".into());
    let mut inds: Vec<String> = (1..=ell).map(|i| format!("z{i}")).collect();
    inds.push("u".into());
    inds.push("w".into());
    (vars, inds)
}

/// Minimizes `t` over the hull. Groups `x` (all `ℓ + 2` variables), `z`, `t`, `lambda`.
pub fn build_q2_hull(omega: f64, a: &[f64]) -> Result<ExtendedFormulation> {
    check(omega, a)?;
    let ell = a.len();
    let (y, v) = (ell, ell + 1);
    let (var_names, indicator_names) = q2_names(ell);
    let mut pieces = vec![UnionPiece {
        name: "V{}".into(),
        support: vec![],
        body: PieceBody::Cone { equalities: vec![] },
    }];
    let mut push = |name: String, support: Vec<usize>, rows: Vec<Vec<f64>>, func: ConeFunction| {
        pieces.push(UnionPiece { name, support, body: PieceBody::Function { rows, func } });
    };
    for i in 0..ell {
        push(format!("V{{x{}}}", i + 1), vec![i], vec![row(ell, &[(i, a[i])])], quad(omega)?);
    }
    push("V{y}".into(), vec![y], vec![row(ell, &[(y, 1.0)])], quad(1.0 + omega)?);
    push("V{v}".into(), vec![v], vec![row(ell, &[(v, 1.0)])], quad(1.0)?);
    for i in 0..ell {
        push(
            format!("V{{x{},y}}", i + 1),
            vec![i, y],
            vec![row(ell, &[(y, 1.0)]), row(ell, &[(y, 1.0), (i, -a[i])])],
            diag(omega),
        );
    }
    for i in 0..ell {
        push(
            format!("V{{x{},v}}", i + 1),
            vec![i, v],
            vec![row(ell, &[(v, 1.0)]), row(ell, &[(i, a[i])])],
            diag(omega),
        );
    }
    push(
        "V{y,v}".into(),
        vec![y, v],
        vec![row(ell, &[(y, 1.0), (v, -1.0)]), row(ell, &[(y, 1.0)])],
        diag(omega),
    );
    let spec = q2_affine_spec(omega, a)?;
    pieces.push(UnionPiece {
        name: "R".into(),
        support: (0..ell + 2).collect(),
        body: PieceBody::Cone { equalities: spec.a },
    });
    let union = UnionSpec { name: "q2-hull".into(), var_names, indicator_names, nonneg: vec![], pieces };
    let mut f = build_union_hull(&union)?;
    f.metadata.insert("omega".into(), omega.to_string());
    Ok(f)
}

/// The same function as `g(Ax)` with `A = [e_y − e_v; e_y − Σ a_i e_i]` and
/// `g = diag(1, Ω)`, for the general two-row hull.
pub fn q2_affine_spec(omega: f64, a: &[f64]) -> Result<AffineConvexSpec> {
    check(omega, a)?;
    let ell = a.len();
    let mut second = row(ell, &[(ell, 1.0)]);
    for i in 0..ell {
        second[i] = -a[i];
    }
    AffineConvexSpec::new(vec![row(ell, &[(ell, 1.0), (ell + 1, -1.0)]), second], vec![0.0; ell + 2], diag(omega), vec![])
}
