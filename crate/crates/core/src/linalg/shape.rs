use crate::error::{mismatch, Error, Result};

use super::matrix::{DenseMatrix, ONE, ZERO};

/// Tensor factorization of a Hilbert space, most significant factor first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::InvalidShape("no factors".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "zero-sized factor in {dims:?}"
            )));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major strides: the flat index is Σ digit_k · stride_k.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat offsets contributed by the given factors, enumerated in row-major
    /// order over those factors alone.
    fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[f]);
            for &o in &offsets {
                for d in 0..self.dims[f] {
                    next.push(o + d * strides[f]);
                }
            }
            offsets = next;
        }
        offsets
    }

    fn check_matrix(&self, m: &DenseMatrix, op: &'static str) -> Result<()> {
        if !m.is_square() {
            return Err(mismatch(
                op,
                "square matrix",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        if m.rows() != self.total() {
            return Err(Error::InvalidShape(format!(
                "{op}: shape {:?} has total {} but matrix is {}x{}",
                self.dims,
                self.total(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }

    /// Maps each flat index of the permuted space to the flat index of the
    /// original space. Output factor k is input factor `perm[k]`.
    fn permutation_map(&self, perm: &[usize]) -> Result<(SubsystemShape, Vec<usize>)> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::InvalidShape(format!(
                "permutation {perm:?} has wrong length"
            )));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidShape(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        let new_shape = SubsystemShape {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
        };
        // enumerating the original strides in permuted-factor order yields
        // the old flat index for every new flat index
        Ok((new_shape, self.offsets(perm)))
    }
}

/// Traces out every factor not listed in `keep`. Kept factors appear in
/// ascending order in the result.
pub fn partial_trace(
    m: &DenseMatrix,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<DenseMatrix> {
    shape.check_matrix(m, "partial_trace")?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= shape.len()) {
        return Err(Error::InvalidShape(format!(
            "factor {bad} out of range for {} factors",
            shape.len()
        )));
    }
    let traced: Vec<usize> = (0..shape.len()).filter(|k| !kept.contains(k)).collect();
    let kept_off = shape.offsets(&kept);
    let traced_off = shape.offsets(&traced);
    let n = m.rows();
    let dk = kept_off.len();
    let src = m.as_slice();
    let mut out = DenseMatrix::zeros(dk, dk);
    {
        let dst = out.as_mut_slice();
        for (r, &ro) in kept_off.iter().enumerate() {
            for (c, &co) in kept_off.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &traced_off {
                    acc += src[(ro + t) * n + co + t];
                }
                dst[r * dk + c] = acc;
            }
        }
    }
    Ok(out)
}

/// Computes P·m·P† where P reorders tensor factors so that output factor k is
/// input factor `perm[k]`. Pure index shuffling, no arithmetic.
pub fn permute_subsystems(
    m: &DenseMatrix,
    shape: &SubsystemShape,
    perm: &[usize],
) -> Result<DenseMatrix> {
    shape.check_matrix(m, "permute_subsystems")?;
    let (_, map) = shape.permutation_map(perm)?;
    let n = m.rows();
    let src = m.as_slice();
    let mut out = DenseMatrix::zeros(n, n);
    {
        let dst = out.as_mut_slice();
        for (r, &or) in map.iter().enumerate() {
            for (c, &oc) in map.iter().enumerate() {
                dst[r * n + c] = src[or * n + oc];
            }
        }
    }
    Ok(out)
}

/// Permutation matrix exchanging factors `i` and `j` (which must have equal
/// dimension). Self-inverse and unitary.
pub fn swap_operator(shape: &SubsystemShape, i: usize, j: usize) -> Result<DenseMatrix> {
    let n = shape.len();
    if i >= n || j >= n {
        return Err(Error::InvalidShape(format!(
            "swap factors ({i}, {j}) out of range"
        )));
    }
    if i == j {
        return Err(Error::InvalidArgument(
            "swap requires two distinct factors".into(),
        ));
    }
    if shape.dims[i] != shape.dims[j] {
        return Err(mismatch("swap_operator", shape.dims[i], shape.dims[j]));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(i, j);
    let (_, map) = shape.permutation_map(&perm)?;
    let total = shape.total();
    let mut u = DenseMatrix::zeros(total, total);
    for (new, &old) in map.iter().enumerate() {
        u[(new, old)] = ONE;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::C64;

    fn omega_projector() -> DenseMatrix {
        let mut v = DenseMatrix::zeros(4, 1);
        v[(0, 0)] = ONE;
        v[(3, 0)] = ONE;
        DenseMatrix::outer(&v)
    }

    fn sample(n: usize, seed: f64) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| {
            C64::new(
                ((i * 7 + j * 3) as f64 * seed).sin(),
                ((i + 2 * j) as f64 * seed).cos(),
            )
        })
    }

    #[test]
    fn shape_rejects_zero_dims() {
        assert!(SubsystemShape::new(vec![2, 0]).is_err());
        assert!(SubsystemShape::new(Vec::<usize>::new()).is_err());
    }

    #[test]
    fn maximally_entangled_marginal_is_identity() {
        let shape = SubsystemShape::new([2, 2]).unwrap();
        let r = partial_trace(&omega_projector(), &shape, &[0]).unwrap();
        assert_eq!(r, DenseMatrix::identity(2));
    }

    #[test]
    fn product_split() {
        let a = sample(2, 0.3);
        let b = sample(3, 0.7);
        let shape = SubsystemShape::new([2, 3]).unwrap();
        let left = partial_trace(&a.kron(&b), &shape, &[0]).unwrap();
        assert!(left.max_abs_diff(&a.scale(b.trace())).unwrap() < 1e-12);
        let right = partial_trace(&a.kron(&b), &shape, &[1]).unwrap();
        assert!(right.max_abs_diff(&b.scale(a.trace())).unwrap() < 1e-12);
    }

    #[test]
    fn full_trace_is_scalar() {
        let m = sample(6, 1.1);
        let shape = SubsystemShape::new([2, 3]).unwrap();
        let r = partial_trace(&m, &shape, &[]).unwrap();
        assert_eq!((r.rows(), r.cols()), (1, 1));
        assert!((r[(0, 0)] - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn inconsistent_shape_is_rejected() {
        let shape = SubsystemShape::new([2, 2]).unwrap();
        assert!(partial_trace(&DenseMatrix::identity(3), &shape, &[0]).is_err());
        assert!(partial_trace(&DenseMatrix::identity(4), &shape, &[2]).is_err());
    }

    #[test]
    fn swap_moves_basis_kets() {
        // |e0 f1> -> |f1 e0> in a 2x3-free setting: use dims [3, 3]
        let shape = SubsystemShape::new([3, 3]).unwrap();
        let u = swap_operator(&shape, 0, 1).unwrap();
        let ket = DenseMatrix::basis_ket(9, 1); // |0>|1>
        let out = u.matmul(&ket).unwrap();
        assert_eq!(out, DenseMatrix::basis_ket(9, 3)); // |1>|0>
        assert_eq!(u.matmul(&u).unwrap(), DenseMatrix::identity(9));
    }

    #[test]
    fn swap_needs_equal_dims() {
        let shape = SubsystemShape::new([2, 3]).unwrap();
        assert!(matches!(
            swap_operator(&shape, 0, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn large_swap_is_permutation() {
        let shape = SubsystemShape::new([4, 4, 4, 4]).unwrap();
        let w = swap_operator(&shape, 1, 2).unwrap();
        assert_eq!(w.rows(), 256);
        for r in 0..256 {
            let ones = (0..256).filter(|&c| w[(r, c)] == ONE).count();
            let zeros = (0..256).filter(|&c| w[(r, c)] == ZERO).count();
            assert_eq!((ones, zeros), (1, 255));
        }
    }

    #[test]
    fn permute_matches_explicit_swap() {
        let shape = SubsystemShape::new([2, 3, 3]).unwrap();
        let m = sample(18, 0.37);
        let u = swap_operator(&shape, 1, 2).unwrap();
        let explicit = u.matmul(&m).unwrap().matmul(&u.dagger()).unwrap();
        let fast = permute_subsystems(&m, &shape, &[0, 2, 1]).unwrap();
        assert_eq!(explicit, fast);
    }
}
