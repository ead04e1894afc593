mod common;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use indicvex::convex::UnivariateConvex;
use indicvex::disjunctive::{build_conic_quadratic, build_q2_hull, build_rank1_compact, ExtendedFormulation, Sense, VarKind};
use indicvex::envelope::RankOneInstance;
use indicvex::instances::export::sanitize;
use indicvex::instances::{
    build_portfolio_strengthened, export_json, export_lp, export_mps, generate_denoising, import_json, DenoisingFormulation,
    DenoisingOverrides, PortfolioInstance,
};
use indicvex::Error;

use common::{parse_lp, parse_mps, Model};

fn quad() -> UnivariateConvex {
    UnivariateConvex::quadratic(1.0).unwrap()
}

fn conic(a: Vec<f64>, iplus: Vec<usize>) -> ExtendedFormulation {
    build_conic_quadratic(&RankOneInstance::homogeneous(a, iplus, quad()).unwrap()).unwrap()
}

fn samples() -> Vec<ExtendedFormulation> {
    let over = DenoisingOverrides { spikes: Some(1), k1: Some(2), k2: Some(1), ..Default::default() };
    let mut out = vec![conic(vec![1.0], vec![]), conic(vec![1.0, -2.0], vec![1]), build_q2_hull(0.3, &[0.9, 0.81]).unwrap()];
    for ell in [1, 2] {
        let inst = generate_denoising(12, ell, 0.2, 5, over).unwrap();
        for kind in [DenoisingFormulation::Basic, DenoisingFormulation::RankOne, DenoisingFormulation::RankTwo] {
            out.push(kind.build(&inst).unwrap());
        }
    }
    let p = PortfolioInstance {
        n: 3,
        a: vec![vec![1.0, 0.0, -0.5]],
        c: vec![1.0, 1.1, 0.9],
        d: vec![0.3, 0.2, 0.4],
        h: vec![0.01; 3],
        b: 0.5,
    };
    out.push(build_portfolio_strengthened(&p).unwrap());
    out
}

#[test]
fn golden_lp_for_single_variable_cone() {
    let lp = export_lp(&conic(vec![1.0], vec![])).unwrap();
    assert_eq!(lp, include_str!("golden/conic_n1.lp"));
}

fn bound(v: Option<f64>, default: f64) -> f64 {
    v.unwrap_or(default)
}

/// Compares a parsed model with the formulation it came from: every
/// variable, bound, row and the objective, the rows by evaluating them at
/// random points.
fn check_against(model: &Model, f: &ExtendedFormulation, what: &str) {
    let f = f.lower_quadratic_perspectives().unwrap();
    let names: Vec<String> = f.variables.iter().map(|v| sanitize(&v.name)).collect();
    assert_eq!(model.bounds.len(), f.num_vars(), "{what}: column count");
    for (v, n) in f.variables.iter().zip(&names) {
        let b = model.bounds.get(n).unwrap_or_else(|| panic!("{what}: column {n} lost"));
        let want = (bound(v.lower, f64::NEG_INFINITY), bound(v.upper, f64::INFINITY));
        assert_eq!(*b, want, "{what}: bounds of {n}");
        assert_eq!(model.binaries.contains(n), v.kind == VarKind::Binary, "{what}: kind of {n}");
    }
    assert_eq!(model.rows.len(), f.linear_rows.len() + f.rotated_rows.len(), "{what}: row count");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let x: Vec<f64> = (0..f.num_vars()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xm: BTreeMap<String, f64> = names.iter().cloned().zip(x.iter().copied()).collect();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        for r in &f.linear_rows {
            let got = model.eval_row(&sanitize(&r.name), &xm);
            let want = r.expr.eval(&x) - r.rhs;
            assert!(close(got, want), "{what}: row {} gives {got}, expected {want}", r.name);
            let sense = match r.sense {
                Sense::Le => 'L',
                Sense::Ge => 'G',
                Sense::Eq => 'E',
            };
            assert_eq!(model.rows[&sanitize(&r.name)].sense, sense);
        }
        for r in &f.rotated_rows {
            let got = model.eval_row(&sanitize(&r.name), &xm);
            let want: f64 = r.exprs.iter().map(|e| e.eval(&x).powi(2)).sum::<f64>() - x[r.u.0] * r.lambda.eval(&x);
            assert!(close(got, want), "{what}: cone row {} gives {got}, expected {want}", r.name);
            assert_eq!(model.rows[&sanitize(&r.name)].sense, 'L');
        }
        let obj: f64 = model.obj.iter().map(|(v, c)| c * xm[v]).sum::<f64>() + model.obj_const;
        let want = f.objective.eval(&x) + f.offset;
        assert!(close(obj, want), "{what}: objective {obj} vs {want}");
    }
}

#[test]
fn lp_and_mps_reparse_without_loss() {
    for f in samples() {
        let lp = parse_lp(&export_lp(&f).unwrap()).unwrap_or_else(|e| panic!("{}: LP rejected: {e}", f.name));
        let mps = parse_mps(&export_mps(&f).unwrap()).unwrap_or_else(|e| panic!("{}: MPS rejected: {e}", f.name));
        check_against(&lp, &f, &format!("{} (lp)", f.name));
        check_against(&mps, &f, &format!("{} (mps)", f.name));
        assert_eq!(lp, mps, "{}: the two formats disagree", f.name);
    }
}

#[test]
fn mps_of_two_variable_cone_block() {
    let f = conic(vec![1.0, -2.0], vec![1]);
    let text = export_mps(&f).unwrap();
    let m = parse_mps(&text).unwrap();
    assert_eq!(m.binaries.len(), 2);
    assert_eq!(text.matches("QCMATRIX").count(), 2);
    // λ₁u₁ ≥ (x₁ − τ₁)² written as x₁² − 2x₁τ₁ + τ₁² − λ₁u₁ ≤ 0
    let r = &m.rows["rot1"];
    assert_eq!(r.quad[&("lambda1".to_string(), "u1".to_string())], -1.0);
    assert_eq!(r.quad[&("tau1".to_string(), "x1".to_string())], -2.0);
    assert_eq!(r.quad[&("x1".to_string(), "x1".to_string())], 1.0);
}

#[test]
fn exports_are_deterministic_and_json_round_trips() {
    for (f, g) in samples().into_iter().zip(samples()) {
        assert_eq!(export_lp(&f).unwrap(), export_lp(&g).unwrap());
        assert_eq!(export_mps(&f).unwrap(), export_mps(&g).unwrap());
        let text = export_json(&f).unwrap();
        assert_eq!(text, export_json(&g).unwrap());
        assert_eq!(import_json(&text).unwrap(), f);
    }
}

#[test]
fn non_quadratic_cones_stay_in_json() {
    let inst = RankOneInstance::homogeneous(vec![1.0, 2.0], vec![], UnivariateConvex::power_abs(1.5).unwrap()).unwrap();
    let f = build_rank1_compact(&inst).unwrap();
    assert!(matches!(export_lp(&f), Err(Error::Unsupported(_))));
    assert!(matches!(export_mps(&f), Err(Error::Unsupported(_))));
    let back = import_json(&export_json(&f).unwrap()).unwrap();
    assert_eq!(back, f);
}

#[test]
fn import_rejects_other_schemas() {
    let text = export_json(&conic(vec![1.0], vec![])).unwrap().replace("indicvex-form/1", "indicvex-form/9");
    assert!(matches!(import_json(&text), Err(Error::Parse(_))));
    assert!(import_json("{").is_err());
}
