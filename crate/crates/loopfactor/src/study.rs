use loopfactor_core::rmatrix::{decay_rate, limit_deviation, r_trig, TrigForm};
use loopfactor_core::{CartanWeylBasis, Error};
use std::io::Write;

/// One row of the limit study; `Err` rows are flagged and the run continues.
pub struct StudyRow {
    pub eps: f64,
    pub sigma: f64,
    pub result: Result<f64, Error>,
}

fn variant(e: &Error) -> String {
    let d = format!("{e:?}");
    d.split([' ', '{', '(']).next().unwrap_or_default().to_string()
}

pub fn limit_rows(cw: &CartanWeylBasis, eps: &[f64], phi: &[f64], sigmas: &[f64], k: i64) -> Vec<StudyRow> {
    let mut rows = Vec::with_capacity(eps.len() * sigmas.len());
    for &sigma in sigmas {
        for &e in eps {
            // The cotangent target fails first at coincident points.
            let result = r_trig(cw, sigma, TrigForm::Closed).and_then(|_| limit_deviation(cw, phi, sigma, e, k));
            rows.push(StudyRow { eps: e, sigma, result });
        }
    }
    rows
}

/// CSV with columns (eps, sigma, phi_1.., deviation, status) and one footer comment per σ
/// with the fitted decay rate over its successful rows.
pub fn write_csv<W: Write>(out: W, rank: usize, phi: &[f64], rows: &[StudyRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["eps".to_string(), "sigma".to_string()];
    header.extend((1..=rank).map(|mu| format!("phi_{mu}")));
    header.extend(["deviation".to_string(), "status".to_string()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.eps.to_string(), r.sigma.to_string()];
        rec.extend(phi.iter().map(|p| p.to_string()));
        match &r.result {
            Ok(d) => rec.extend([format!("{d:e}"), "ok".to_string()]),
            Err(e) => rec.extend([String::new(), variant(e)]),
        }
        w.write_record(&rec)?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    let mut sigmas: Vec<f64> = Vec::new();
    for r in rows {
        if !sigmas.contains(&r.sigma) {
            sigmas.push(r.sigma);
        }
    }
    for s in sigmas {
        let ok: Vec<(f64, f64)> = rows.iter().filter(|r| r.sigma == s).filter_map(|r| r.result.as_ref().ok().map(|d| (r.eps, *d))).collect();
        if ok.len() >= 2 && ok.iter().all(|(_, d)| *d > 0.0) {
            let (e, d): (Vec<f64>, Vec<f64>) = ok.into_iter().unzip();
            writeln!(out, "# decay_rate sigma={s} c={}", decay_rate(&e, &d))?;
        } else {
            writeln!(out, "# decay_rate sigma={s} c=NA (fewer than two positive deviations)")?;
        }
    }
    out.flush()?;
    Ok(())
}
