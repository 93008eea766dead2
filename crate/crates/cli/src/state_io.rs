//! JSON state files: `{"dims": [..], "labels": [..], "re": [[..]], "im": [[..]]}`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use recoverlib::linalg::{self, CMat};
use recoverlib::qcore::MultipartiteState;
use serde::Deserialize;

/// Traces within this distance of one are accepted and rescaled with a
/// warning; the core constructor itself only tolerates 1e-6.
pub const LOAD_TRACE_TOL: f64 = 1e-4;
const SILENT_TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub state: MultipartiteState,
    pub warnings: Vec<String>,
}

pub fn parse_state(text: &str) -> Result<Loaded> {
    let f: StateFile = serde_json::from_str(text).context("malformed state file")?;
    let n: usize = f.dims.iter().product();
    if f.re.len() != n || f.im.len() != n || f.re.iter().chain(&f.im).any(|row| row.len() != n) {
        bail!("matrix must be {n}x{n} for dims {:?}", f.dims);
    }
    let mut m = CMat::from_fn(n, n, |i, j| linalg::c(f.re[i][j], f.im[i][j]));
    let mut warnings = Vec::new();
    let tr = m.trace().re;
    if (tr - 1.0).abs() > SILENT_TRACE_TOL {
        if (tr - 1.0).abs() > LOAD_TRACE_TOL {
            bail!("trace {tr} deviates from 1 by more than {LOAD_TRACE_TOL:e}");
        }
        warnings.push(format!("trace {tr:.17e} renormalized to 1"));
        m /= linalg::r(tr);
    }
    let state = MultipartiteState::new(f.dims, f.labels, m)?;
    Ok(Loaded { state, warnings })
}

pub fn load_state(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_state(&text).with_context(|| format!("loading {}", path.display()))
}

fn push_number(out: &mut String, x: f64) {
    // 17 significant digits round-trip every double
    write!(out, "{x:.16e}").expect("write to string");
}

fn push_rows(out: &mut String, m: &CMat, part: impl Fn(linalg::C64) -> f64) {
    out.push('[');
    for i in 0..m.nrows() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            push_number(out, part(m[(i, j)]));
        }
        out.push(']');
    }
    out.push(']');
}

pub fn state_to_json(s: &MultipartiteState) -> String {
    let mut out = String::from("{\"dims\":");
    out.push_str(&serde_json::to_string(s.dims()).expect("dims"));
    out.push_str(",\"labels\":");
    out.push_str(&serde_json::to_string(s.labels()).expect("labels"));
    out.push_str(",\"re\":");
    push_rows(&mut out, s.matrix(), |z| z.re);
    out.push_str(",\"im\":");
    push_rows(&mut out, s.matrix(), |z| z.im);
    out.push_str("}\n");
    out
}

pub fn save_state(s: &MultipartiteState, path: &Path) -> Result<()> {
    std::fs::write(path, state_to_json(s)).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use recoverlib::qcore::maximally_entangled;

    #[test]
    fn text_round_trip_is_exact() {
        let bell = maximally_entangled(2, ["A", "B"]).unwrap();
        let text = state_to_json(&bell);
        let back = parse_state(&text).unwrap();
        assert!(back.warnings.is_empty());
        assert_eq!(state_to_json(&back.state), text);
        assert_eq!(back.state.matrix(), bell.matrix());
    }

    #[test]
    fn slightly_off_trace_is_rescaled_with_warning() {
        let text = r#"{"dims":[2],"labels":["A"],"re":[[0.50001,0],[0,0.5]],"im":[[0,0],[0,0]]}"#;
        let l = parse_state(text).unwrap();
        assert_eq!(l.warnings.len(), 1);
        assert!((l.state.trace().re - 1.0).abs() < 1e-15);
        let far = r#"{"dims":[2],"labels":["A"],"re":[[0.6,0],[0,0.5]],"im":[[0,0],[0,0]]}"#;
        assert!(parse_state(far).is_err());
    }

    #[test]
    fn asymmetric_input_names_the_entry() {
        let text = r#"{"dims":[2],"labels":["A"],"re":[[0.5,0.1],[0,0.5]],"im":[[0,0],[0,0]]}"#;
        let err = format!("{:#}", parse_state(text).unwrap_err());
        assert!(err.contains("Hermitian") && err.contains("(0, 1)"), "{err}");
    }
}
