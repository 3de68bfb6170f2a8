use loopfactor_core::linalg::{self, c, Mat};
use loopfactor_core::loop_algebra::{membership, Subgroup};
use loopfactor_core::{LoopElement, TensorOperator};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Report schema version carried by every JSON document.
pub const SCHEMA: &str = "loopfactor/1";

/// Loop file: `{"n": int, "modes": {"<k>": [[[re, im], ...], ...]}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopFile {
    pub n: usize,
    pub modes: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "input error: {}", self.0)
    }
}

impl std::error::Error for InputError {}

impl LoopFile {
    pub fn to_loop(&self) -> Result<LoopElement, InputError> {
        if self.n < 2 {
            return Err(InputError(format!("n must be >= 2, got {}", self.n)));
        }
        if self.modes.is_empty() {
            return Err(InputError("no modes given".into()));
        }
        let mut pairs = Vec::with_capacity(self.modes.len());
        for (key, rows) in &self.modes {
            let k: i64 = key.trim().parse().map_err(|_| InputError(format!("mode key {key:?} is not an integer")))?;
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                return Err(InputError(format!("mode {k} is not {}x{}", self.n, self.n)));
            }
            let mut m = linalg::zeros(self.n);
            for (i, row) in rows.iter().enumerate() {
                for (j, z) in row.iter().enumerate() {
                    if !z[0].is_finite() || !z[1].is_finite() {
                        return Err(InputError(format!("mode {k} entry ({i},{j}) is not finite")));
                    }
                    m[(i, j)] = c(z[0], z[1]);
                }
            }
            pairs.push((k, m));
        }
        Ok(LoopElement::from_pairs(self.n, &pairs))
    }

    pub fn from_loop(x: &LoopElement) -> Self {
        let modes = x
            .iter_modes()
            .filter(|(_, m)| linalg::max_abs(m) > 0.0)
            .map(|(k, m)| (k.to_string(), mat_rows(m)))
            .collect::<BTreeMap<_, _>>();
        let modes = if modes.is_empty() { BTreeMap::from([("0".to_string(), mat_rows(&linalg::zeros(x.n())))]) } else { modes };
        LoopFile { n: x.n(), modes }
    }
}

pub fn mat_rows(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn tensor_json(t: &TensorOperator) -> Value {
    json!(mat_rows(&t.m))
}

pub fn loop_json(x: &LoopElement) -> Value {
    serde_json::to_value(LoopFile::from_loop(x)).expect("loop serializes")
}

/// Reads a loop file and reports structural diagnostics.
pub fn read_loop(path: &Path) -> Result<(LoopElement, Value), InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let file: LoopFile = serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let x = file.to_loop()?;
    Ok((x.clone(), diagnostics(&x)))
}

/// Membership verdicts and conditioning of a loop.
pub fn diagnostics(x: &LoopElement) -> Value {
    let verdict = |s: Subgroup| {
        let m = membership(x, s);
        json!({ "member": m.member, "worst": m.worst })
    };
    json!({
        "lo": x.lo(),
        "hi": x.hi(),
        "min_abs_det": x.min_abs_det(),
        "g_star": verdict(Subgroup::GStar),
        "g_l": verdict(Subgroup::GL),
        "g_r": verdict(Subgroup::GR),
    })
}

/// Pretty JSON with a trailing newline; serde_json prints shortest round-trip floats.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}
