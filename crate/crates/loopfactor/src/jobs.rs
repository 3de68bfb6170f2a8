//! Thin JSON wrappers around factorization, bracket and evolution operations.

use crate::config::RunConfig;
use crate::io::{diagnostics, loop_json, mat_rows, tensor_json, SCHEMA};
use clap::ValueEnum;
use loopfactor_core::brackets::*;
use loopfactor_core::dynamics::{evolve_infty, DualChiralPoint};
use loopfactor_core::factorization::{factor_gr_gstar, factor_gstar_gl, infty_cartan, iwasawa_pointwise};
use loopfactor_core::loop_algebra::Subgroup;
use loopfactor_core::rmatrix::TrigForm;
use loopfactor_core::sampling::a_matrix;
use loopfactor_core::{build_cartan_weyl, AffineBasis, Error, LoopElement};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// l = u v with u in G*, v in G_L.
    GstarGl,
    /// k = v u with v in G_R, u in G*.
    GrGstar,
    /// s = k_l a Ξ_R(k_r a).
    InftyCartan,
    /// Pointwise k·an.
    Iwasawa,
}

fn verdict(e: &Error) -> Value {
    json!({ "ok": false, "error": format!("{e:?}"), "message": e.to_string() })
}

pub fn factorize(x: &LoopElement, which: Which) -> (Value, bool) {
    let head = |body: Value| {
        let mut v = json!({ "schema": SCHEMA, "command": "factorize", "which": format!("{which:?}"), "input": diagnostics(x) });
        v.as_object_mut().expect("object").extend(body.as_object().expect("object").clone());
        v
    };
    let pair = |r: loopfactor_core::Result<loopfactor_core::factorization::FactorPair>, vgroup: Subgroup| match r {
        Ok(fp) => {
            let memb = loopfactor_core::factorization::pair_membership(&fp, vgroup);
            (
                head(json!({
                    "verdict": { "ok": true },
                    "u": loop_json(&fp.u),
                    "v": loop_json(&fp.v),
                    "residual": fp.residual,
                    "condition": fp.cond,
                    "size": fp.size,
                    "membership_defect": memb,
                })),
                true,
            )
        }
        Err(e) => (head(json!({ "verdict": verdict(&e) })), false),
    };
    match which {
        Which::GstarGl => pair(factor_gstar_gl(x), Subgroup::GL),
        Which::GrGstar => pair(factor_gr_gstar(x), Subgroup::GR),
        Which::InftyCartan => match infty_cartan(x) {
            Ok(t) => (
                head(json!({
                    "verdict": { "ok": true, "weyl_wall": t.degenerate },
                    "k_l": loop_json(&t.k_l),
                    "a": t.a,
                    "k_r": loop_json(&t.k_r),
                    "phase_fix": t.phase_fix,
                    "residual": t.residual,
                })),
                true,
            ),
            Err(e) => (head(json!({ "verdict": verdict(&e) })), false),
        },
        Which::Iwasawa => match iwasawa_pointwise(x) {
            Ok((k, an)) => {
                let residual = k.mul(&an).dist(x);
                (head(json!({ "verdict": { "ok": true }, "k": loop_json(&k), "an": loop_json(&an), "residual": residual })), true)
            }
            Err(e) => (head(json!({ "verdict": verdict(&e) })), false),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BracketKind {
    PistarUU,
    PistarDD,
    PistarDU,
    CurrentLeft,
    CurrentRight,
    ChiralAKa,
    ChiralKaKa,
    ChiralDD,
    ChiralKaD,
    LambdaLambda,
    KLambda,
    ALambda,
    DualAK,
    DualKK,
    FiniteAK,
    FiniteKK,
}

impl BracketKind {
    /// Whether the kind depends on the Cartan coordinates of a.
    pub fn needs_phi(self) -> bool {
        use BracketKind::*;
        !matches!(self, PistarUU | PistarDD | PistarDU | CurrentLeft | CurrentRight)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Star,
    Op,
    L,
    R,
}

impl From<Variant> for PiStarVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Star => PiStarVariant::Star,
            Variant::Op => PiStarVariant::Op,
            Variant::L => PiStarVariant::L,
            Variant::R => PiStarVariant::R,
        }
    }
}

pub struct BracketJob {
    pub kind: BracketKind,
    pub variant: Variant,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub phi: Vec<f64>,
    pub eps_k: Option<(f64, i64)>,
    /// Cutoff of the bivector route; `None` skips the oracle.
    pub oracle_cutoff: Option<i64>,
}

enum Route {
    PiStar(Shape, Shape),
    Current(MatrixObservable),
    Chiral(ChiralObs, ChiralObs),
    None,
}

fn route(kind: BracketKind) -> (ExchangeKind, Route) {
    use BracketKind::*;
    let (u, d) = (Shape::Upsilon, Shape::UpsilonDagInv);
    match kind {
        PistarUU => (ExchangeKind::PiStar(PiStarVariant::Star, PairKind::UU), Route::PiStar(u, u)),
        PistarDD => (ExchangeKind::PiStar(PiStarVariant::Star, PairKind::DD), Route::PiStar(d, d)),
        PistarDU => (ExchangeKind::PiStar(PiStarVariant::Star, PairKind::DU), Route::PiStar(d, u)),
        CurrentLeft => (ExchangeKind::CurrentL, Route::Current(MatrixObservable::left_current())),
        CurrentRight => (ExchangeKind::CurrentR, Route::Current(MatrixObservable::right_current())),
        ChiralAKa => (ExchangeKind::ChiralAKa, Route::Chiral(ChiralObs::A, ChiralObs::KA)),
        ChiralKaKa => (ExchangeKind::ChiralKaKa, Route::Chiral(ChiralObs::KA, ChiralObs::KA)),
        ChiralDD => (ExchangeKind::ChiralDD, Route::Chiral(ChiralObs::KADagInv, ChiralObs::KADagInv)),
        ChiralKaD => (ExchangeKind::ChiralKaD, Route::Chiral(ChiralObs::KA, ChiralObs::KADagInv)),
        LambdaLambda => (ExchangeKind::LambdaLambda, Route::Chiral(ChiralObs::LambdaL, ChiralObs::LambdaL)),
        KLambda => (ExchangeKind::KLambda, Route::Chiral(ChiralObs::K, ChiralObs::LambdaL)),
        ALambda => (ExchangeKind::ALambda, Route::Chiral(ChiralObs::A, ChiralObs::LambdaL)),
        DualAK => (ExchangeKind::DualAK, Route::None),
        DualKK => (ExchangeKind::DualKK, Route::None),
        FiniteAK => (ExchangeKind::FiniteAK, Route::None),
        FiniteKK => (ExchangeKind::FiniteKK, Route::None),
    }
}

/// Right-hand side at (σ, σ′) and, where a bivector route exists, its windowed deviation
/// from the truncation-consistent closed form.
pub fn bracket(x: &LoopElement, job: &BracketJob) -> Result<Value, Error> {
    let cw = build_cartan_weyl(x.n())?;
    let (mut kind, route) = route(job.kind);
    if let ExchangeKind::PiStar(_, pair) = kind {
        kind = ExchangeKind::PiStar(job.variant.into(), pair);
    }
    if job.kind.needs_phi() && job.phi.len() != cw.rank {
        return Err(Error::InvalidDimension { expected: cw.rank, found: job.phi.len() });
    }
    let a = if job.kind.needs_phi() { a_matrix(&cw, &job.phi) } else { loopfactor_core::linalg::eye(cw.n) };
    let (first, second) = match &route {
        Route::PiStar(f, g) => {
            let dag = x.adjoint().inverse()?.cleaned();
            let pick = |s: &Shape| if *s == Shape::Upsilon { x.clone() } else { dag.clone() };
            (pick(f), pick(g))
        }
        Route::Current(obs) => {
            let l = obs.eval(x)?.cleaned();
            (l.clone(), l)
        }
        Route::Chiral(f, g) => (f.eval(x, &a)?.cleaned(), g.eval(x, &a)?.cleaned()),
        Route::None => match job.kind {
            BracketKind::DualAK | BracketKind::FiniteAK => (LoopElement::constant(a.clone()), x.clone()),
            _ => (x.clone(), x.clone()),
        },
    };
    let args = ExchangeArgs { first, second, phi: job.phi.clone(), eps_k: job.eps_k };
    let rhs = exchange_rhs(&cw, kind, &args, job.sigma, job.sigma_prime, TrigForm::Closed)?;
    let oracle = match (job.oracle_cutoff, &route) {
        (_, Route::None) => json!({ "available": false, "reason": "no bivector route for this kind" }),
        (None, _) => json!({ "available": false, "reason": "oracle disabled" }),
        (Some(nc), r) => {
            let basis = AffineBasis::new(&cw, nc);
            let (field, w) = match r {
                Route::PiStar(f, g) => (pistar_bracket(&basis, job.variant.into(), *f, *g, x, None)?, nc - 2),
                Route::Current(obs) => (
                    bivector_bracket(&BivectorSpec::pi_d_infty(nc), &basis, obs, obs, x, DerivativePolicy::default(), None)?,
                    nc - 2,
                ),
                Route::Chiral(f, g) => (chiral_bracket(&basis, *f, *g, x, &job.phi, true, Fd::default(), None)?, nc - 1),
                Route::None => unreachable!(),
            };
            let closed = exchange_field(&cw, kind, &args, nc)?;
            let d = window_deviation(&field, &closed, w.max(0), 1.0);
            json!({ "available": true, "cutoff": nc, "window": w.max(0), "abs_deviation": d.abs, "rel_deviation": d.rel })
        }
    };
    Ok(json!({
        "schema": SCHEMA,
        "command": "bracket",
        "kind": format!("{:?}", job.kind),
        "sigma": job.sigma,
        "sigma_prime": job.sigma_prime,
        "phi": job.phi,
        "matrix": tensor_json(&rhs),
        "oracle": oracle,
    }))
}

/// Snapshots of E_∞ at τ·j/steps, j = 0..=steps, with the S_∞ certificate of each.
pub fn evolve(x: &LoopElement, phi: &[f64], tau: f64, steps: usize) -> Result<Value, Error> {
    let cw = build_cartan_weyl(x.n())?;
    let p = DualChiralPoint::new(&cw, x.clone(), phi.to_vec())?;
    let steps = steps.max(1);
    let mut snaps = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let t = tau * j as f64 / steps as f64;
        let e = evolve_infty(&cw, &p, t)?;
        let c = e.certificate();
        snaps.push(json!({ "tau": t, "loop": loop_json(e.k()), "certificate": { "valid": c.valid, "residual": finite(c.residual) } }));
    }
    Ok(json!({
        "schema": SCHEMA,
        "command": "evolve",
        "phi": phi,
        "tau": tau,
        "steps": steps,
        "a_tilde": mat_rows(&a_matrix(&cw, phi)),
        "snapshots": snaps,
    }))
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Cutoff used for the bracket oracle: the configured cutoff, capped for desk-scale cost.
pub fn oracle_cutoff(cfg: &RunConfig) -> i64 {
    cfg.cutoff.min(4)
}
