use sha2::{Digest, Sha256};

use crate::linalg::CMat;

/// A real number or `+∞` (support violations), never a float sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PosInfinity => None,
        }
    }

    /// Value with `+∞` mapped to `f64::INFINITY`, for comparisons.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Negation; `-(+∞)` has no representation here and maps to `f64::NEG_INFINITY`
    /// wrapped as finite.
    pub fn neg(self) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PosInfinity => ExtReal::Finite(f64::NEG_INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    Fidelity,
    RootFidelity,
    TraceDistance,
    PurifiedDistance,
    Entropy,
    ConditionalMutualInformation,
    RenyiDivergence,
    SandwichedRenyiDivergence,
    ConditionalRenyiEntropy,
    RenyiConditionalMutualInformation,
    BinaryEntropy,
}

impl QuantityKind {
    pub fn is_fidelity(&self) -> bool {
        matches!(self, QuantityKind::Fidelity | QuantityKind::RootFidelity)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            QuantityKind::Fidelity => "fidelity",
            QuantityKind::RootFidelity => "root-fidelity",
            QuantityKind::TraceDistance => "trace-distance",
            QuantityKind::PurifiedDistance => "purified-distance",
            QuantityKind::Entropy => "entropy",
            QuantityKind::ConditionalMutualInformation => "cqmi",
            QuantityKind::RenyiDivergence => "renyi-divergence",
            QuantityKind::SandwichedRenyiDivergence => "sandwiched-renyi",
            QuantityKind::ConditionalRenyiEntropy => "conditional-renyi-entropy",
            QuantityKind::RenyiConditionalMutualInformation => "renyi-cqmi",
            QuantityKind::BinaryEntropy => "binary-entropy",
        }
    }
}

/// A computed scalar tagged with its kind and a digest of the operands.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: ExtReal,
    pub kind: QuantityKind,
    pub inputs_digest: String,
}

impl Quantity {
    pub fn new(kind: QuantityKind, value: ExtReal, operands: &[&CMat]) -> Self {
        Quantity { value, kind, inputs_digest: digest_matrices(operands) }
    }
}

/// Hex SHA-256 over the shapes and bit patterns of the operands.
pub fn digest_matrices(ms: &[&CMat]) -> String {
    let mut h = Sha256::new();
    for m in ms {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
