//! The Magic Square game's quantum strategy and its win probability.
//!
//! Four qubits |q1 q2 q3 q4⟩ are indexed as 8·q1 + 4·q2 + 2·q3 + q4. Alice
//! holds q1 q2 and Bob q3 q4, so the row-i/column-j operation is A_i ⊗ B_j.

use crate::channels::{apply_local_noise, noise_kraus, ChoiMatrix, NoiseFamily};
use crate::error::{mismatch, Error, Result};
use crate::linalg::{DenseMatrix, C64, ZERO};

/// Best success probability of any classical strategy.
pub const CLASSICAL_THRESHOLD: f64 = 8.0 / 9.0;

const STATE_TOL: f64 = 1e-8;

/// Winning outcomes S_ij for (i, j) in row-major order, outcome 0 first.
const WINNING_TABLE: [&str; 9] = [
    "++--++----++--++",
    "++----++++----++",
    "++----++--++++--",
    "+-+-+-+--+-+-+-+",
    "+-+--+-++-+--+-+",
    "+-+--+-+-+-++-+-",
    "-++--++-+--++--+",
    "-++-+--+-++-+--+",
    "-++-+--++--+-++-",
];

#[derive(Clone, Debug)]
pub struct GameDefinition {
    pub psi: DenseMatrix,
    pub a_ops: [DenseMatrix; 3],
    pub b_ops: [DenseMatrix; 3],
    /// `winning[3 * (i - 1) + (j - 1)][outcome]`
    pub winning: [[bool; 16]; 9],
}

/// Outcome probabilities of a computational-basis measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct GameOutcomeDistribution {
    pub probs: [f64; 16],
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn scaled(rows: [[C64; 4]; 4], s: f64) -> DenseMatrix {
    DenseMatrix::from_fn(4, 4, |i, j| rows[i][j] * s)
}

/// The shared state and local unitaries of the standard quantum strategy.
pub fn standard_game() -> GameDefinition {
    let (o, l, m) = (c(1.0, 0.0), c(0.0, 1.0), ZERO);
    let (no, nl) = (-o, -l);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    let a1 = scaled([[l, m, m, o], [m, nl, o, m], [m, l, o, m], [o, m, m, l]], h);
    let a2 = scaled(
        [[l, o, o, l], [nl, o, no, l], [l, o, no, nl], [nl, o, o, nl]],
        0.5,
    );
    let a3 = scaled(
        [
            [no, no, no, o],
            [o, o, no, o],
            [o, no, o, o],
            [o, no, no, no],
        ],
        0.5,
    );
    let b1 = scaled(
        [[l, nl, o, o], [nl, nl, o, no], [o, o, nl, l], [nl, l, o, o]],
        0.5,
    );
    let b2 = scaled(
        [[no, l, o, l], [o, l, o, nl], [o, nl, o, l], [no, nl, o, nl]],
        0.5,
    );
    let b3 = scaled(
        [[o, m, m, o], [no, m, m, o], [m, o, o, m], [m, o, no, m]],
        h,
    );

    let mut psi = DenseMatrix::zeros(16, 1);
    psi[(0b0011, 0)] = c(0.5, 0.0);
    psi[(0b1100, 0)] = c(0.5, 0.0);
    psi[(0b0110, 0)] = c(-0.5, 0.0);
    psi[(0b1001, 0)] = c(-0.5, 0.0);

    let mut winning = [[false; 16]; 9];
    for (row, pattern) in winning.iter_mut().zip(WINNING_TABLE) {
        for (cell, ch) in row.iter_mut().zip(pattern.chars()) {
            *cell = ch == '+';
        }
    }

    GameDefinition {
        psi,
        a_ops: [a1, a2, a3],
        b_ops: [b1, b2, b3],
        winning,
    }
}

/// Validates a 16×16 density operator: Hermitian and unit trace within 1e-8.
pub fn check_state(rho: &DenseMatrix) -> Result<()> {
    if rho.rows() != 16 || rho.cols() != 16 {
        return Err(mismatch(
            "game state",
            "16x16",
            format!("{}x{}", rho.rows(), rho.cols()),
        ));
    }
    let herm = rho.hermitian_residual();
    if herm > STATE_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (residual {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    Ok(())
}

impl GameDefinition {
    /// |ψ⟩⟨ψ|.
    pub fn sigma(&self) -> DenseMatrix {
        DenseMatrix::outer(&self.psi)
    }

    fn local_unitary(&self, i: usize, j: usize) -> Result<DenseMatrix> {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::InvalidArgument(format!(
                "question ({i}, {j}) outside 1..3"
            )));
        }
        Ok(self.a_ops[i - 1].kron(&self.b_ops[j - 1]))
    }

    /// (A_i ⊗ B_j) ρ (A_i ⊗ B_j)† for row i and column j, both in 1..=3.
    pub fn final_state(&self, rho: &DenseMatrix, i: usize, j: usize) -> Result<DenseMatrix> {
        let u = self.local_unitary(i, j)?;
        u.matmul(rho)?.matmul(&u.dagger())
    }

    pub fn outcome_distribution(
        &self,
        rho: &DenseMatrix,
        i: usize,
        j: usize,
    ) -> Result<GameOutcomeDistribution> {
        let f = self.final_state(rho, i, j)?;
        let mut probs = [0.0; 16];
        for (k, p) in probs.iter_mut().enumerate() {
            *p = f[(k, k)].re;
        }
        Ok(GameOutcomeDistribution { probs })
    }

    /// Mean success probability over the nine questions.
    pub fn win_probability(&self, rho: &DenseMatrix) -> Result<f64> {
        check_state(rho)?;
        let mut total = 0.0;
        for i in 1..=3 {
            for j in 1..=3 {
                let dist = self.outcome_distribution(rho, i, j)?;
                let row = &self.winning[3 * (i - 1) + (j - 1)];
                total += dist
                    .probs
                    .iter()
                    .zip(row)
                    .filter(|(_, &win)| win)
                    .map(|(p, _)| p)
                    .sum::<f64>();
            }
        }
        Ok(total / 9.0)
    }

    /// State after local noise on all four qubits: Φ_α^{⊗4}(|ψ⟩⟨ψ|).
    pub fn noisy_state(&self, family: NoiseFamily) -> Result<DenseMatrix> {
        let base = noise_kraus(family)?;
        apply_local_noise(&base, &self.sigma(), 4)
    }

    pub fn noisy_probability(&self, family: NoiseFamily) -> Result<f64> {
        self.win_probability(&self.noisy_state(family)?)
    }

    /// Win probability after `recovery` (a 16 → 16 channel) acts on the noisy
    /// state.
    pub fn recovered_probability(&self, family: NoiseFamily, recovery: &ChoiMatrix) -> Result<f64> {
        if recovery.d_in() != 16 || recovery.d_out() != 16 {
            return Err(mismatch(
                "recovered_probability",
                "16->16 channel",
                format!("{}->{}", recovery.d_in(), recovery.d_out()),
            ));
        }
        recovery.check(1e-6)?;
        let tau = self.noisy_state(family)?;
        self.win_probability(&recovery.apply(&tau)?)
    }
}

/// Free-function form of [`GameDefinition::win_probability`].
pub fn win_probability(g: &GameDefinition, rho: &DenseMatrix) -> Result<f64> {
    g.win_probability(rho)
}

pub fn final_state(
    g: &GameDefinition,
    rho: &DenseMatrix,
    i: usize,
    j: usize,
) -> Result<DenseMatrix> {
    g.final_state(rho, i, j)
}

pub fn noisy_probability(g: &GameDefinition, family: NoiseFamily) -> Result<f64> {
    g.noisy_probability(family)
}

pub fn recovered_probability(
    g: &GameDefinition,
    family: NoiseFamily,
    recovery: &ChoiMatrix,
) -> Result<f64> {
    g.recovered_probability(family, recovery)
}
