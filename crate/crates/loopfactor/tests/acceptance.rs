//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use loopfactor::checks::{chiral_split_defect, duality_form_defect, registry};
use loopfactor::config::RunConfig;
use loopfactor::suite::{run_check, Status};
use loopfactor_core::dynamics::{duality_u, duality_v, ChiralPoint};
use loopfactor_core::factorization::{compose_phi, factor_gr_gstar, factor_gstar_gl, infty_cartan, pair_membership};
use loopfactor_core::loop_algebra::Subgroup;
use loopfactor_core::rmatrix::{decay_rate, limit_deviation};
use loopfactor_core::sampling::{random_a_plus, random_gl, random_gr, random_gstar, random_phi_plus};
use loopfactor_core::build_cartan_weyl;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::Instant;

const GROUPS: [usize; 2] = [2, 3];

type Measured = Result<f64, String>;

struct Outcome {
    worst: f64,
    tol: f64,
    budget: Option<f64>,
    note: String,
}

/// Deviation of a registry check at (n, cutoff, seed); skips and errors are failures here.
fn measure(name: &str, n: usize, cutoff: i64, seed: u64) -> Measured {
    let check = registry().into_iter().find(|c| c.name == name).ok_or_else(|| format!("no check {name}"))?;
    let cfg = RunConfig { group_n: n, cutoff, seed, ..RunConfig::default() };
    let r = run_check(&cfg, &check);
    match (r.status, r.deviation) {
        (Status::Pass | Status::Fail, Some(d)) => Ok(d),
        _ => Err(format!("{name} n={n} seed={seed}: {:?} {}", r.status, r.reason.unwrap_or_default())),
    }
}

fn worst_of(names: &[&str], cutoff: i64, seeds: std::ops::Range<u64>) -> Measured {
    let mut w = 0.0f64;
    for n in GROUPS {
        for name in names {
            for s in seeds.clone() {
                w = w.max(measure(name, n, cutoff, s)?);
            }
        }
    }
    Ok(w)
}

fn c1() -> Measured {
    worst_of(&["loop_algebra.gram_t_tl", "loop_algebra.gram_t_tr", "loop_algebra.isotropy"], 6, 0..1)
}

fn c2() -> Measured {
    let mut rng = ChaCha8Rng::seed_from_u64(2001);
    let mut w = 0.0f64;
    for i in 0..50 {
        let n = GROUPS[i % 2];
        let u = random_gstar(&mut rng, n, 2, 2, 0.3);
        let v = random_gl(&mut rng, n, 2);
        let fp = factor_gstar_gl(&u.mul(&v)).map_err(|e| e.to_string())?;
        w = w.max(fp.residual).max(fp.u.dist(&u)).max(fp.v.dist(&v)).max(pair_membership(&fp, Subgroup::GL));
        let vr = random_gr(&mut rng, n, 2, 2, 0.3);
        let fp = factor_gr_gstar(&vr.mul(&u)).map_err(|e| e.to_string())?;
        w = w.max(fp.residual).max(fp.u.dist(&u)).max(fp.v.dist(&vr)).max(pair_membership(&fp, Subgroup::GR));
    }
    // Grid uniqueness has the tighter bound; scale it onto the round-trip tolerance.
    let g = worst_of(&["factorization.grid_uniqueness"], 6, 0..5)?;
    Ok(w.max(g * 100.0))
}

fn c3() -> Measured {
    let mut rng = ChaCha8Rng::seed_from_u64(3001);
    let mut w = 0.0f64;
    for i in 0..20 {
        let n = GROUPS[i % 2];
        let (kl, a, kr) = (random_gr(&mut rng, n, 1, 2, 0.3), random_a_plus(&mut rng, n, 0.3, 0.5), random_gr(&mut rng, n, 1, 2, 0.3));
        let s = compose_phi(&kl, &a, &kr).map_err(|e| e.to_string())?;
        let t = infty_cartan(&s).map_err(|e| e.to_string())?;
        if t.degenerate {
            return Err(format!("triple {i} reported on a Weyl wall"));
        }
        w = w.max(t.residual);
        let back = compose_phi(&t.k_l, &t.a, &t.k_r).map_err(|e| e.to_string())?;
        w = w.max(back.dist(&s));
        for (x, y) in t.a.iter().zip(&a) {
            w = w.max((x - y).abs());
        }
    }
    Ok(w)
}

fn c4() -> Measured {
    let mut rng = ChaCha8Rng::seed_from_u64(4001);
    let mut w = 0.0f64;
    for i in 0..10 {
        let cw = build_cartan_weyl(GROUPS[i % 2]).map_err(|e| e.to_string())?;
        let kl = random_gr(&mut rng, cw.n, 1, 1, 0.3);
        let kr = random_gr(&mut rng, cw.n, 1, 1, 0.3);
        let phi = random_phi_plus(&mut rng, &cw, 0.3, 0.5);
        for _ in 0..10 {
            w = w.max(chiral_split_defect(&cw, &kl, &phi, &kr, &mut rng).map_err(|e| e.to_string())?);
        }
    }
    Ok(w)
}

fn c5() -> Measured {
    worst_of(
        &[
            "brackets.pistar_closed_forms",
            "brackets.current_left",
            "brackets.current_right",
            "brackets.chiral_a_ka",
            "brackets.chiral_ka_ka",
            "brackets.chiral_d_d",
            "brackets.chiral_ka_d",
            "brackets.chiral_k_lambda",
            "brackets.chiral_a_lambda",
            "brackets.chiral_lambda_lambda",
        ],
        4,
        0..2,
    )
}

fn c6() -> Measured {
    worst_of(&["forms.symplectic_inverse"], 6, 0..10)
}

fn c7() -> Measured {
    worst_of(&["forms.moment_field_left", "forms.moment_field_right"], 3, 0..3)
}

fn c8() -> Measured {
    let mut rng = ChaCha8Rng::seed_from_u64(8001);
    let mut round = 0.0f64;
    let mut form = 0.0f64;
    for i in 0..10 {
        let cw = build_cartan_weyl(GROUPS[i % 2]).map_err(|e| e.to_string())?;
        let k = random_gr(&mut rng, cw.n, 2, 2, 0.4);
        let phi = random_phi_plus(&mut rng, &cw, 0.3, 0.5);
        let p = ChiralPoint::new(&cw, k.clone(), phi.clone()).map_err(|e| e.to_string())?;
        let d = duality_u(&cw, &p).map_err(|e| e.to_string())?;
        let q = duality_v(&cw, &d).map_err(|e| e.to_string())?;
        let d2 = duality_u(&cw, &q).map_err(|e| e.to_string())?;
        round = round.max(q.k.dist(&p.k)).max(d2.k().dist(d.k()));
        for (x, y) in q.a.phi.iter().zip(&p.a.phi) {
            round = round.max((x - y).abs());
        }
        let k1 = random_gr(&mut rng, cw.n, 1, 1, 0.3);
        form = form.max(duality_form_defect(&cw, &k1, &phi, &mut rng).map_err(|e| e.to_string())?);
    }
    // Two tolerances: the round trip at 1e-9 and the form identity at 1e-6.
    Ok((round / 1e-9).max(form / 1e-6) * 1e-6)
}

fn c9() -> Measured {
    let eps = [-2.0, -4.0, -6.0, -8.0, -10.0, -12.0];
    let mut rng = ChaCha8Rng::seed_from_u64(9001);
    let mut w = 0.0f64;
    for n in GROUPS {
        let cw = build_cartan_weyl(n).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let phi = random_phi_plus(&mut rng, &cw, 0.3, 0.5);
            for sigma in [0.7, 1.1, 2.5] {
                let dev: Vec<f64> = eps.iter().map(|&e| limit_deviation(&cw, &phi, sigma, e, 1)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
                if !dev.windows(2).all(|p| p[1] < p[0]) {
                    return Err(format!("n={n} σ={sigma}: not strictly decreasing {dev:?}"));
                }
                let c = decay_rate(&eps, &dev);
                if !(c > 0.0) {
                    return Err(format!("n={n} σ={sigma}: decay rate {c}"));
                }
                w = w.max(dev[5]);
            }
        }
    }
    Ok(w)
}

fn c10() -> Measured {
    let law = worst_of(&["dynamics.group_law"], 6, 0..5)?;
    // A lost certificate is an error of the check, so only validity is gated here.
    worst_of(&["dynamics.certificate_along_flow"], 6, 0..5)?;
    let inv = worst_of(&["dynamics.exchange_invariance"], 6, 0..5)?;
    // Group law at 1e-12, invariance at 1e-10.
    Ok((law / 1e-12).max(inv / 1e-10) * 1e-12)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Measured, f64, Option<f64>, &str); 10] = [
        ("dual-basis Gram and isotropy, N=6", c1, 1e-12, Some(1.0), "max entry error"),
        ("factorization round trips (50 loops) and grid uniqueness", c2, 1e-8, Some(30.0), "sup residual"),
        ("infinity-Cartan round trip (20 triples)", c3, 1e-7, Some(60.0), "residual"),
        ("chiral decomposition of the groupoid form (10 x 10)", c4, 1e-6, None, "form defect"),
        ("bracket oracle registry", c5, 1e-6, Some(300.0), "relative deviation"),
        ("symplectic inverse, N=6 (10 points per group)", c6, 1e-12, None, "max |PW - I|"),
        ("moment-map fields", c7, 1e-5, None, "scaled deviation"),
        ("duality round trips and form reversal", c8, 1e-6, None, "normalized to 1e-6"),
        ("elliptic-to-trigonometric limit", c9, 1e-6, Some(60.0), "deviation at eps=-12"),
        ("evolution group law, certificate, exchange invariance", c10, 1e-12, None, "normalized to 1e-12"),
    ];
    let mut failed = 0;
    for (i, (name, f, tol, budget, what)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let r = f();
        let secs = t0.elapsed().as_secs_f64();
        let o = match r {
            Ok(worst) => Outcome { worst, tol, budget, note: format!("{what} {worst:.3e} (tol {tol:e})") },
            Err(e) => Outcome { worst: f64::NAN, tol, budget, note: format!("error: {e}") },
        };
        let in_time = o.budget.map_or(true, |b| secs < b);
        let ok = o.worst <= o.tol && in_time;
        let time = match o.budget {
            Some(b) => format!("{secs:.2}s of {b}s"),
            None => format!("{secs:.2}s"),
        };
        println!("criterion {:>2} {} {name}: {} [{time}]", i + 1, if ok { "PASS" } else { "FAIL" }, o.note);
        if !ok {
            failed += 1;
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
