//! Named state constructions.

use anyhow::{anyhow, bail, Result};
use recoverlib::channels::private_state;
use recoverlib::linalg::{self, CMat};
use recoverlib::qcore::{classical_copy, ghz, maximally_entangled, random_density, random_unitary, MultipartiteState};
use recoverlib::StreamRng;

#[derive(Debug, Clone, Default)]
pub struct MakeParams {
    /// Local dimension, or the number of parties for `ghz`.
    pub d: Option<usize>,
    /// Mixing weight for `werner`.
    pub p: Option<f64>,
    pub dims: Option<Vec<usize>>,
    pub rank: Option<usize>,
    /// `none`, `swap` or `random`.
    pub twisting: Option<String>,
}

pub const KINDS: &[&str] = &["bell", "max-entangled", "classical-copy", "ghz", "werner", "private", "random", "cq", "markov-chain"];

fn letters(n: usize) -> Vec<String> {
    (0..n).map(|k| ((b'A' + k as u8) as char).to_string()).collect()
}

/// `p Φ + (1-p) I/4` on two qubits.
pub fn werner(p: f64) -> Result<MultipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        bail!("werner weight {p} outside [0, 1]");
    }
    let phi = maximally_entangled(2, ["A", "B"])?;
    let m = phi.matrix() * linalg::r(p) + linalg::identity(4) * linalg::r((1.0 - p) / 4.0);
    Ok(MultipartiteState::from_strs(&[2, 2], &["A", "B"], m)?)
}

/// `Σ_x p(x) |x⟩⟨x|_X ⊗ ρ_B^x` with random weights and conditional states.
pub fn cq_state(dx: usize, db: usize, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let p = rng.simplex(dx);
    let mut m = CMat::zeros(dx * db, dx * db);
    for (x, w) in p.iter().enumerate() {
        let flag = MultipartiteState::basis_state(&[dx], &["X"], x)?;
        let b = random_density(&[db], &["B"], db, rng)?;
        m += flag.tensor(&b)?.matrix() * linalg::r(*w);
    }
    Ok(MultipartiteState::from_strs(&[dx, db], &["X", "B"], m)?)
}

/// `Σ_x p(x) ρ_A^x ⊗ ρ_B^x ⊗ |x⟩⟨x|_C`.
pub fn markov_chain(da: usize, db: usize, dc: usize, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let p = rng.simplex(dc);
    let n = da * db * dc;
    let mut m = CMat::zeros(n, n);
    for (x, w) in p.iter().enumerate() {
        let a = random_density(&[da], &["A"], da, rng)?;
        let b = random_density(&[db], &["B"], db, rng)?;
        let flag = MultipartiteState::basis_state(&[dc], &["C"], x)?;
        m += a.tensor(&b)?.tensor(&flag)?.matrix() * linalg::r(*w);
    }
    Ok(MultipartiteState::from_strs(&[da, db, dc], &["A", "B", "C"], m)?)
}

/// Key dimension `d` with a two-qubit shield in a random full-rank state.
pub fn private(d: usize, twisting: &str, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let unitaries: Vec<CMat> = match twisting {
        "none" => vec![linalg::identity(4); d],
        "swap" => {
            let swap = CMat::from_fn(4, 4, |r, c| if r == 2 * (c % 2) + c / 2 { linalg::ONE } else { linalg::ZERO });
            (0..d).map(|i| if i % 2 == 0 { linalg::identity(4) } else { swap.clone() }).collect()
        }
        "random" => (0..d).map(|_| random_unitary(4, rng)).collect(),
        other => bail!("unknown twisting `{other}` (none, swap, random)"),
    };
    let sigma = random_density(&[2, 2], &["A'", "B'"], 4, rng)?;
    Ok(private_state(d, [2, 2], &unitaries, &sigma, ["A", "B", "A'", "B'"])?)
}

pub fn make_state(kind: &str, params: &MakeParams, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let d = params.d;
    let dims = |default: &[usize]| params.dims.clone().unwrap_or_else(|| default.to_vec());
    Ok(match kind {
        "bell" => maximally_entangled(2, ["A", "B"])?,
        "max-entangled" => maximally_entangled(d.unwrap_or(2), ["A", "B"])?,
        "classical-copy" => classical_copy(d.unwrap_or(2), ["X", "B"])?,
        "ghz" => {
            let names = letters(d.unwrap_or(3));
            ghz(&names.iter().map(String::as_str).collect::<Vec<_>>())?
        }
        "werner" => werner(params.p.ok_or_else(|| anyhow!("werner needs --p"))?)?,
        "private" => private(d.unwrap_or(2), params.twisting.as_deref().unwrap_or("random"), rng)?,
        "random" => {
            let dims = dims(&[2, 2, 2]);
            let names = letters(dims.len());
            let n: usize = dims.iter().product();
            let labels: Vec<&str> = names.iter().map(String::as_str).collect();
            random_density(&dims, &labels, params.rank.unwrap_or(n), rng)?
        }
        "cq" => match dims(&[2, 2])[..] {
            [dx, db] => cq_state(dx, db, rng)?,
            _ => bail!("cq takes two dimensions"),
        },
        "markov-chain" => match dims(&[2, 2, 2])[..] {
            [da, db, dc] => markov_chain(da, db, dc, rng)?,
            _ => bail!("markov-chain takes three dimensions"),
        },
        other => bail!("unknown state kind `{other}`; expected one of {}", KINDS.join(", ")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use recoverlib::infoquant::cqmi;

    #[test]
    fn constructions() {
        let mut rng = StreamRng::new(1, 0);
        let p = MakeParams { d: Some(3), ..Default::default() };
        let phi = make_state("max-entangled", &p, &mut rng).unwrap();
        let marg = phi.partial_trace(&["A"]).unwrap();
        assert!((marg.matrix() - linalg::identity(3) / linalg::r(3.0)).norm() < 1e-12);
        let mc = make_state("markov-chain", &MakeParams::default(), &mut rng).unwrap();
        assert!(cqmi(&mc, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-7);
        let g = make_state("private", &MakeParams { twisting: Some("swap".into()), ..Default::default() }, &mut rng).unwrap();
        assert_eq!(g.dims(), &[2, 2, 2, 2]);
        assert!(make_state("nope", &MakeParams::default(), &mut rng).is_err());
        assert!(make_state("werner", &MakeParams::default(), &mut rng).is_err());
    }
}
