//! Alternating optimization of a local recovery channel.
//!
//! Alice and Bob each apply a 4 → 4 channel (`y` and `z`) to their half of
//! the noisy state τ. The fidelity of the recovered state with |ψ⟩ is
//! bilinear in the two Choi matrices,
//!
//! ```text
//! F(Y, Z) = ⟨ψ| T(τ) |ψ⟩ = tr((Y ⊗ Z) M),   M = W(σ ⊗ τᵀ)W,
//! ```
//!
//! so fixing one block turns the problem into a channel SDP for the other.
//! Each half-step is an exact maximization, hence the fidelity never drops.

use rand::Rng;

use crate::channels::{choi_product, random_choi, ChoiMatrix, NoiseFamily};
use crate::error::{mismatch, Result};
use crate::game::GameDefinition;
use crate::linalg::{permute_subsystems, DenseMatrix, SubsystemShape, ZERO};
use crate::sdp::{solve_channel_sdp, ChannelSdpProblem, SdpOptions, SdpSolution};

const LOCAL: usize = 4;
const PAIR: usize = LOCAL * LOCAL;

#[derive(Clone, Debug)]
pub struct RecoverySetup {
    pub family: NoiseFamily,
    pub game: GameDefinition,
    /// |ψ⟩⟨ψ|.
    pub sigma: DenseMatrix,
    /// Noisy state before recovery.
    pub tau: DenseMatrix,
    /// Objective kernel on (Alice out, Alice in, Bob out, Bob in).
    pub m: DenseMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveryOptions {
    /// Total number of starting points, the identity seed included.
    pub restarts: usize,
    pub max_rounds: usize,
    /// Stop once a full round improves the fidelity by less than this.
    pub conv_tol: f64,
    pub sdp: SdpOptions,
    /// Results whose fidelity is within this window of the best count as
    /// optimal; among them the highest win probability is kept.
    pub tie_window: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_rounds: 100,
            conv_tol: 1e-7,
            sdp: SdpOptions::DEFAULT,
            tie_window: 1e-5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// Alice's channel.
    pub y: ChoiMatrix,
    /// Bob's channel.
    pub z: ChoiMatrix,
    /// choi_product(y, z).
    pub t: ChoiMatrix,
    /// Fidelity after every half-step.
    pub objective_trace: Vec<f64>,
    pub objective: f64,
    pub p_recovered: f64,
    pub restarts_used: usize,
    /// Every inner SDP was certified.
    pub certified: bool,
}

pub fn build_setup(family: NoiseFamily, g: &GameDefinition) -> Result<RecoverySetup> {
    let sigma = g.sigma();
    let tau = g.noisy_state(family)?;
    let shape = SubsystemShape::new([LOCAL; 4])?;
    // σ ⊗ τᵀ lives on (σ_A, σ_B, τ_A, τ_B); bring each player's factors together
    let m = permute_subsystems(&sigma.kron(&tau.transpose()), &shape, &[0, 2, 1, 3])?;
    Ok(RecoverySetup {
        family,
        game: g.clone(),
        sigma,
        tau,
        m,
    })
}

fn check_block(op: &'static str, c: &ChoiMatrix) -> Result<()> {
    if c.d_in() != LOCAL || c.d_out() != LOCAL {
        return Err(mismatch(
            op,
            "4->4 channel",
            format!("{}->{}", c.d_in(), c.d_out()),
        ));
    }
    Ok(())
}

/// Cost for Bob's block with Alice's fixed: tr(Z C) = tr((Y ⊗ Z) M).
pub fn cost_for_z(setup: &RecoverySetup, y: &ChoiMatrix) -> Result<ChannelSdpProblem> {
    check_block("cost_for_z", y)?;
    let (y, m) = (y.matrix(), &setup.m);
    let c = DenseMatrix::from_fn(PAIR, PAIR, |b, b2| {
        let mut acc = ZERO;
        for a in 0..PAIR {
            for a2 in 0..PAIR {
                acc += y[(a, a2)] * m[(a2 * PAIR + b, a * PAIR + b2)];
            }
        }
        acc
    });
    ChannelSdpProblem::new(c.hermitian_part(), LOCAL, LOCAL)
}

/// Cost for Alice's block with Bob's fixed: tr(Y C) = tr((Y ⊗ Z) M).
pub fn cost_for_y(setup: &RecoverySetup, z: &ChoiMatrix) -> Result<ChannelSdpProblem> {
    check_block("cost_for_y", z)?;
    let (z, m) = (z.matrix(), &setup.m);
    let c = DenseMatrix::from_fn(PAIR, PAIR, |a, a2| {
        let mut acc = ZERO;
        for b in 0..PAIR {
            for b2 in 0..PAIR {
                acc += z[(b, b2)] * m[(a * PAIR + b2, a2 * PAIR + b)];
            }
        }
        acc
    });
    ChannelSdpProblem::new(c.hermitian_part(), LOCAL, LOCAL)
}

/// tr((Y ⊗ Z) M) by direct contraction.
pub fn objective(setup: &RecoverySetup, y: &ChoiMatrix, z: &ChoiMatrix) -> Result<f64> {
    let c = cost_for_z(setup, y)?;
    c.objective(z.matrix())
}

/// One half-step: solve for a block, but keep the current one if the solver
/// returned something worse (it is feasible, so this only guards against
/// solver tolerance).
fn improve(
    p: &ChannelSdpProblem,
    current: Option<&ChoiMatrix>,
    warm: Option<&SdpSolution>,
    opts: &SdpOptions,
) -> Result<(ChoiMatrix, f64, SdpSolution)> {
    let sol = solve_channel_sdp(p, opts, warm)?;
    if let Some(cur) = current {
        let kept = p.objective(cur.matrix())?;
        if kept > sol.primal_value {
            return Ok((cur.clone(), kept, sol));
        }
    }
    Ok((sol.z.clone(), sol.primal_value, sol))
}

/// Alternates Z ← argmax given Y, then Y ← argmax given Z, starting from
/// `y0`, until a round gains less than `conv_tol` or `max_rounds` is hit.
pub fn alternate(
    setup: &RecoverySetup,
    y0: &ChoiMatrix,
    max_rounds: usize,
    conv_tol: f64,
    sdp: &SdpOptions,
) -> Result<RecoveryResult> {
    check_block("alternate", y0)?;
    let mut y = y0.clone();
    let mut z: Option<ChoiMatrix> = None;
    let mut warm_y: Option<SdpSolution> = None;
    let mut warm_z: Option<SdpSolution> = None;
    let mut trace = Vec::with_capacity(2 * max_rounds);
    let mut certified = true;
    let mut last_round = f64::NEG_INFINITY;

    for _ in 0..max_rounds.max(1) {
        let (z_new, _, sol) = improve(&cost_for_z(setup, &y)?, z.as_ref(), warm_z.as_ref(), sdp)?;
        certified &= sol.certified;
        warm_z = Some(sol);
        let (y_new, value, sol) =
            improve(&cost_for_y(setup, &z_new)?, Some(&y), warm_y.as_ref(), sdp)?;
        certified &= sol.certified;
        warm_y = Some(sol);

        // report both half-steps with the same contraction so the trace is
        // comparable across steps
        trace.push(objective(setup, &y, &z_new)?);
        trace.push(value);
        y = y_new;
        z = Some(z_new);

        if value - last_round < conv_tol {
            break;
        }
        last_round = value;
    }

    let z = z.expect("at least one round");
    finish(setup, y, z, trace, certified)
}

fn finish(
    setup: &RecoverySetup,
    y: ChoiMatrix,
    z: ChoiMatrix,
    objective_trace: Vec<f64>,
    certified: bool,
) -> Result<RecoveryResult> {
    let t = choi_product(&y, &z);
    let objective = *objective_trace.last().expect("non-empty trace");
    let p_recovered = setup.game.win_probability(&t.apply(&setup.tau)?)?;
    Ok(RecoveryResult {
        y,
        z,
        t,
        objective_trace,
        objective,
        p_recovered,
        restarts_used: 1,
        certified,
    })
}

/// Picks among restart results: highest fidelity, and within `tie_window` of
/// it the highest win probability. Earlier results win exact ties.
pub fn select_best(results: Vec<RecoveryResult>, tie_window: f64) -> Option<RecoveryResult> {
    let best = results
        .iter()
        .map(|r| r.objective)
        .fold(f64::NEG_INFINITY, f64::max);
    let restarts = results.len();
    let certified = results.iter().all(|r| r.certified);
    let mut chosen: Option<RecoveryResult> = None;
    for r in results {
        if r.objective < best - tie_window {
            continue;
        }
        if chosen
            .as_ref()
            .is_none_or(|c| r.p_recovered > c.p_recovered)
        {
            chosen = Some(r);
        }
    }
    chosen.map(|mut c| {
        c.restarts_used = restarts;
        c.certified = certified;
        c
    })
}

/// Runs `alternate` from the identity channel and from `restarts − 1` random
/// full-rank channels drawn from `rng`, then applies [`select_best`].
pub fn optimize_recovery<R: Rng + ?Sized>(
    family: NoiseFamily,
    g: &GameDefinition,
    opts: &RecoveryOptions,
    rng: &mut R,
) -> Result<RecoveryResult> {
    let setup = build_setup(family, g)?;
    let restarts = opts.restarts.max(1);
    let mut seeds = vec![ChoiMatrix::identity(LOCAL)];
    for _ in 1..restarts {
        seeds.push(random_choi(LOCAL, LOCAL, PAIR, rng)?);
    }
    let results = seeds
        .iter()
        .map(|y0| alternate(&setup, y0, opts.max_rounds, opts.conv_tol, &opts.sdp))
        .collect::<Result<Vec<_>>>()?;
    Ok(select_best(results, opts.tie_window).expect("at least one restart"))
}
