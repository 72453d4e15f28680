//! Certified solver for the channel SDP
//!
//! ```text
//! maximize   tr(Z C)
//! subject to tr_out(Z) = 1_in,  Z ⪰ 0
//! ```
//!
//! whose dual is `minimize tr(X) subject to 1_out ⊗ X ⪰ C`. The solver is an
//! ADMM splitting between the affine set (closed-form projection) and the PSD
//! cone (eigenvalue clipping). Every returned solution carries a primal point
//! that is exactly feasible and a dual point that is exactly feasible, so
//! `dual_value - primal_value` bounds the suboptimality.

use crate::channels::ChoiMatrix;
use crate::error::{mismatch, Error, Result};
use crate::linalg::{
    hermitian_eig, hermitian_eig_with_guess, inv_sqrt_psd, partial_trace, DenseMatrix,
    SubsystemShape, C64,
};

/// Tolerance on ‖tr_out Z − 1‖_F for a certified solution.
pub const TP_BOUND: f64 = 1e-8;
/// Tolerance on negative eigenvalues of Z and of 1 ⊗ X − C.
pub const EIG_BOUND: f64 = 1e-9;
/// Relative duality-gap bound for a certified solution.
pub const GAP_BOUND: f64 = 1e-6;

const CHECK_EVERY: usize = 10;
const ADAPT_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;
const RECOMPUTE_EIG_EVERY: usize = 50;

#[derive(Clone, Debug)]
pub struct ChannelSdpProblem {
    c: DenseMatrix,
    d_out: usize,
    d_in: usize,
}

impl ChannelSdpProblem {
    /// `c` acts on (output ⊗ input). It is replaced by its Hermitian part.
    pub fn new(c: DenseMatrix, d_out: usize, d_in: usize) -> Result<Self> {
        let n = d_out * d_in;
        if n == 0 || c.rows() != n || c.cols() != n {
            return Err(mismatch(
                "ChannelSdpProblem",
                format!("{n}x{n}"),
                format!("{}x{}", c.rows(), c.cols()),
            ));
        }
        let residual = c.hermitian_residual();
        if residual > 1e-10 * c.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self {
            c: c.hermitian_part(),
            d_out,
            d_in,
        })
    }

    pub fn cost(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::new([self.d_out, self.d_in]).expect("nonzero dims")
    }

    /// tr(Z C), real part.
    pub fn objective(&self, z: &DenseMatrix) -> Result<f64> {
        Ok(z.trace_product(&self.c)?.re)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl SdpOptions {
    pub const DEFAULT: SdpOptions = SdpOptions {
        tol: 1e-7,
        max_iters: 5000,
    };
}

/// Residuals of a primal/dual pair, all recomputed from the matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpResiduals {
    /// ‖tr_out Z − 1‖_F.
    pub tp_residual: f64,
    /// λ_min(Z).
    pub min_eig: f64,
    /// λ_min(1 ⊗ X − C); nonnegative when X is dual feasible.
    pub dual_min_eig: f64,
    /// tr(X) − tr(Z C).
    pub gap: f64,
    pub primal_value: f64,
    pub dual_value: f64,
}

impl SdpResiduals {
    pub fn certified(&self) -> bool {
        self.tp_residual <= TP_BOUND
            && self.min_eig >= -EIG_BOUND
            && self.dual_min_eig >= -EIG_BOUND
            && self.gap >= -EIG_BOUND
            && self.gap <= GAP_BOUND * self.primal_value.abs().max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Primal optimizer, a channel.
    pub z: ChoiMatrix,
    /// Dual certificate on the input space.
    pub x: DenseMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    pub iterations: usize,
    pub residuals: SdpResiduals,
    pub certified: bool,
}

fn io_identity(d_out: usize, h: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::identity(d_out).kron(h)
}

/// Recomputes every residual of (Z, X) from scratch.
pub fn verify_certificate(p: &ChannelSdpProblem, s: &SdpSolution) -> Result<SdpResiduals> {
    residuals_of(p, s.z.matrix(), &s.x)
}

fn residuals_of(p: &ChannelSdpProblem, z: &DenseMatrix, x: &DenseMatrix) -> Result<SdpResiduals> {
    let shape = p.shape();
    let tp_residual = partial_trace(z, &shape, &[1])?.distance(&DenseMatrix::identity(p.d_in))?;
    let min_eig = hermitian_eig(&z.hermitian_part())?.min_eigenvalue();
    let slack = io_identity(p.d_out, &x.hermitian_part()).sub(&p.c)?;
    let dual_min_eig = hermitian_eig(&slack)?.min_eigenvalue();
    let primal_value = p.objective(z)?;
    let dual_value = x.trace().re;
    Ok(SdpResiduals {
        tp_residual,
        min_eig,
        dual_min_eig,
        gap: dual_value - primal_value,
        primal_value,
        dual_value,
    })
}

/// Orthogonal projection onto {Z : tr_out Z = 1}.
fn project_affine(
    v: &DenseMatrix,
    shape: &SubsystemShape,
    d_out: usize,
    d_in: usize,
) -> Result<DenseMatrix> {
    let marginal = partial_trace(v, shape, &[1])?;
    let correction = DenseMatrix::identity(d_in).sub(&marginal)?;
    let mut out = v.clone();
    out.axpy(
        C64::new(1.0 / d_out as f64, 0.0),
        &io_identity(d_out, &correction),
    )?;
    Ok(out)
}

/// Rescales a PSD matrix to satisfy tr_out Z = 1 exactly (a congruence, so
/// positivity is kept).
fn restore_primal(z: &DenseMatrix, shape: &SubsystemShape, d_out: usize) -> Option<DenseMatrix> {
    let marginal = partial_trace(z, shape, &[1]).ok()?.hermitian_part();
    let q = inv_sqrt_psd(&marginal, 1e-12).ok()?;
    let k = io_identity(d_out, &q);
    Some(k.matmul(z).ok()?.matmul(&k).ok()?.hermitian_part())
}

/// Shifts a dual candidate by λ_max(C − 1 ⊗ X)·1 so it becomes feasible.
fn restore_dual(c: &DenseMatrix, x: &DenseMatrix, d_out: usize) -> Result<DenseMatrix> {
    let x = x.hermitian_part();
    let gap = c.sub(&io_identity(d_out, &x))?;
    let lmax = hermitian_eig(&gap.hermitian_part())?.max_eigenvalue();
    if lmax <= 0.0 {
        return Ok(x);
    }
    let mut shifted = x;
    let d = shifted.rows();
    for i in 0..d {
        shifted[(i, i)] += lmax;
    }
    Ok(shifted)
}

struct Candidate {
    z: DenseMatrix,
    x: DenseMatrix,
    gap: f64,
    primal: f64,
}

/// Solves the channel SDP. A previous solution (for a nearby cost matrix) can
/// be passed as a warm start. Running out of iterations is not an error: the
/// best iterate is returned with `certified == false`.
pub fn solve_channel_sdp(
    p: &ChannelSdpProblem,
    opts: &SdpOptions,
    warm: Option<&SdpSolution>,
) -> Result<SdpSolution> {
    let (d_out, d_in) = (p.d_out, p.d_in);
    let n = d_out * d_in;
    let shape = p.shape();

    // work with a unit-norm cost; certificates are rescaled at the end
    let norm = p.c.frobenius_norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let c = p.c.scale_real(1.0 / scale);

    let mut rho = 1.0;
    let mut z = match warm {
        Some(w) if w.z.matrix().rows() == n => w.z.matrix().clone(),
        _ => DenseMatrix::identity(n).scale_real(1.0 / d_out as f64),
    };
    let mut u = match warm {
        Some(w) if w.x.rows() == d_in => c
            .sub(&io_identity(d_out, &w.x.scale_real(1.0 / scale)))?
            .scale_real(1.0 / rho),
        _ => DenseMatrix::zeros(n, n),
    };

    let mut basis: Option<DenseMatrix> = None;
    let mut best: Option<Candidate> = None;
    let mut iterations = 0;

    for iter in 1..=opts.max_iters.max(1) {
        iterations = iter;
        let mut v = z.sub(&u)?;
        v.axpy(C64::new(1.0 / rho, 0.0), &c)?;
        let x_aff = project_affine(&v, &shape, d_out, d_in)?;

        let w = x_aff.add(&u)?.hermitian_part();
        let eig = match (&basis, iter % RECOMPUTE_EIG_EVERY == 0) {
            (Some(b), false) => hermitian_eig_with_guess(&w, b)?,
            _ => hermitian_eig(&w)?,
        };
        let z_next = eig.reconstruct_with(|l| l.max(0.0));
        basis = Some(eig.eigenvectors);

        let r_dual = rho * z_next.distance(&z)?;
        let diff = x_aff.sub(&z_next)?;
        let r_pri = diff.frobenius_norm();
        u.axpy(C64::new(1.0, 0.0), &diff)?;
        z = z_next;

        if iter % CHECK_EVERY == 0 || iter == opts.max_iters {
            if let Some(z_feas) = restore_primal(&z, &shape, d_out) {
                // multiplier of the affine constraint: C − ρU = 1 ⊗ X
                let multiplier = c.sub(&u.scale_real(rho))?;
                let x_raw =
                    partial_trace(&multiplier, &shape, &[1])?.scale_real(1.0 / d_out as f64);
                let x_feas = restore_dual(&c, &x_raw, d_out)?;
                let primal = z_feas.trace_product(&c)?.re * scale;
                let gap = x_feas.trace().re * scale - primal;
                let better = best.as_ref().is_none_or(|b| gap < b.gap);
                if better {
                    best = Some(Candidate {
                        z: z_feas,
                        x: x_feas.scale_real(scale),
                        gap,
                        primal,
                    });
                }
                let b = best.as_ref().expect("just set");
                if b.gap <= opts.tol * b.primal.abs().max(1.0) {
                    break;
                }
            }
        }

        if iter % ADAPT_EVERY == 0 {
            if r_pri > BALANCE_RATIO * r_dual {
                rho *= 2.0;
                u = u.scale_real(0.5);
            } else if r_dual > BALANCE_RATIO * r_pri {
                rho *= 0.5;
                u = u.scale_real(2.0);
            }
        }
    }

    let cand = match best {
        Some(b) => b,
        None => {
            // never restorable: fall back to the trivially feasible point
            let z_feas = DenseMatrix::identity(n).scale_real(1.0 / d_out as f64);
            let x_feas = restore_dual(&p.c, &DenseMatrix::zeros(d_in, d_in), d_out)?;
            Candidate {
                primal: p.objective(&z_feas)?,
                gap: f64::INFINITY,
                z: z_feas,
                x: x_feas,
            }
        }
    };
    let residuals = residuals_of(p, &cand.z, &cand.x)?;
    let certified = residuals.certified();
    Ok(SdpSolution {
        z: ChoiMatrix::new_unchecked(d_out, d_in, cand.z),
        x: cand.x,
        primal_value: residuals.primal_value,
        dual_value: residuals.dual_value,
        iterations,
        residuals,
        certified,
    })
}
