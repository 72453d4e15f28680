use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, DenseMatrix, C64, ZERO};

use super::kraus::KrausChannel;

/// The six single-qubit noise families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    PhaseFlip,
    BitFlip,
    BitPhaseFlip,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::Depolarizing,
        NoiseKind::AmplitudeDamping,
        NoiseKind::PhaseDamping,
        NoiseKind::PhaseFlip,
        NoiseKind::BitFlip,
        NoiseKind::BitPhaseFlip,
    ];

    pub const FLIPS: [NoiseKind; 3] = [
        NoiseKind::PhaseFlip,
        NoiseKind::BitFlip,
        NoiseKind::BitPhaseFlip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::AmplitudeDamping => "amplitude-damping",
            NoiseKind::PhaseDamping => "phase-damping",
            NoiseKind::PhaseFlip => "phase-flip",
            NoiseKind::BitFlip => "bit-flip",
            NoiseKind::BitPhaseFlip => "bit-phase-flip",
        }
    }

    /// Stable small integer used when deriving per-task seeds.
    pub fn code(self) -> u64 {
        match self {
            NoiseKind::Depolarizing => 0,
            NoiseKind::AmplitudeDamping => 1,
            NoiseKind::PhaseDamping => 2,
            NoiseKind::PhaseFlip => 3,
            NoiseKind::BitFlip => 4,
            NoiseKind::BitPhaseFlip => 5,
        }
    }

    /// The Pauli that a flip family applies, if it is one.
    pub fn flip_pauli(self) -> Option<DenseMatrix> {
        match self {
            NoiseKind::PhaseFlip => Some(pauli_z()),
            NoiseKind::BitFlip => Some(pauli_x()),
            NoiseKind::BitPhaseFlip => Some(pauli_y()),
            _ => None,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown noise family `{s}`")))
    }
}

/// A noise family at a fixed strength α ∈ [0, 1]; α = 0 is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseFamily {
    pub kind: NoiseKind,
    pub alpha: f64,
}

impl NoiseFamily {
    pub fn new(kind: NoiseKind, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { kind, alpha })
    }

    pub fn kraus(&self) -> Result<KrausChannel> {
        noise_kraus(*self)
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single-qubit Kraus operators of the family. Zero-weight operators are kept
/// so the operator count does not depend on α.
pub fn noise_kraus(family: NoiseFamily) -> Result<KrausChannel> {
    let a = family.alpha;
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidAlpha(a));
    }
    let id = DenseMatrix::identity(2);
    let ops = match family.kind {
        NoiseKind::Depolarizing => {
            let w = (a / 4.0).sqrt();
            vec![
                id.scale_real((1.0 - 3.0 * a / 4.0).sqrt()),
                pauli_x().scale_real(w),
                pauli_y().scale_real(w),
                pauli_z().scale_real(w),
            ]
        }
        NoiseKind::AmplitudeDamping => vec![
            DenseMatrix::diag(&[real(1.0), real((1.0 - a).sqrt())]),
            DenseMatrix::from_vec(2, 2, vec![ZERO, real(a.sqrt()), ZERO, ZERO])?,
        ],
        NoiseKind::PhaseDamping => vec![
            DenseMatrix::diag(&[real(1.0), real((1.0 - a).sqrt())]),
            DenseMatrix::diag(&[ZERO, real(a.sqrt())]),
        ],
        NoiseKind::PhaseFlip | NoiseKind::BitFlip | NoiseKind::BitPhaseFlip => {
            let p = family.kind.flip_pauli().expect("flip family");
            vec![id.scale_real((1.0 - a).sqrt()), p.scale_real(a.sqrt())]
        }
    };
    KrausChannel::new(ops)
}

/// Lifts a qubit channel to N qubits acting independently: the n^N operators
/// e_{i1} ⊗ … ⊗ e_{iN}, with i1 the most significant index.
pub fn lift_local(base: &KrausChannel, n_qubits: usize) -> Result<KrausChannel> {
    if n_qubits < 1 {
        return Err(Error::InvalidArgument("n_qubits must be at least 1".into()));
    }
    if base.d_in() != 2 || base.d_out() != 2 {
        return Err(mismatch(
            "lift_local",
            "qubit channel",
            format!("{}->{}", base.d_in(), base.d_out()),
        ));
    }
    let mut lifted = base.clone();
    for _ in 1..n_qubits {
        lifted = lifted.tensor(base);
    }
    Ok(lifted)
}

/// Applies the single-qubit channel to every qubit of `rho` in turn. Same
/// result as applying [`lift_local`], at a fraction of the cost.
pub fn apply_local_noise(
    base: &KrausChannel,
    rho: &DenseMatrix,
    n_qubits: usize,
) -> Result<DenseMatrix> {
    let dim = 1usize << n_qubits;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(mismatch(
            "apply_local_noise",
            format!("{dim}x{dim}"),
            format!("{}x{}", rho.rows(), rho.cols()),
        ));
    }
    if base.d_in() != 2 || base.d_out() != 2 {
        return Err(mismatch(
            "apply_local_noise",
            "qubit channel",
            format!("{}->{}", base.d_in(), base.d_out()),
        ));
    }
    let mut state = rho.clone();
    for q in 0..n_qubits {
        let left = DenseMatrix::identity(1 << q);
        let right = DenseMatrix::identity(1 << (n_qubits - q - 1));
        let ops: Vec<DenseMatrix> = base
            .ops()
            .iter()
            .map(|e| left.kron(e).kron(&right))
            .collect();
        state = KrausChannel::from_parts_unchecked(dim, dim, ops).apply(&state)?;
    }
    Ok(state)
}
