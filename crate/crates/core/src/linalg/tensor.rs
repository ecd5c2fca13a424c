use nalgebra::DMatrix;

use super::{HermitianMatrix, C64};
use crate::error::{Error, Result};

/// Tensor product `A ⊗ B`; row index `a·dim(B) + i`.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrized(a.as_matrix().kronecker(b.as_matrix()))
}

fn check_bipartite(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 || m.dim() != dim_a * dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_a * dim_b,
            found: m.dim(),
        });
    }
    Ok(())
}

/// `Tr_A[M]`: the `dim_b × dim_b` matrix `Σ_a M[(a,i),(a,j)]`.
pub fn partial_trace_a(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    check_bipartite(m, dim_a, dim_b)?;
    let src = m.as_matrix();
    let mut out = DMatrix::<C64>::zeros(dim_b, dim_b);
    for a in 0..dim_a {
        out += src.view((a * dim_b, a * dim_b), (dim_b, dim_b));
    }
    Ok(HermitianMatrix::symmetrized(out))
}

/// `Tr_B[M]`: the `dim_a × dim_a` matrix `Σ_i M[(a,i),(b,i)]`.
pub fn partial_trace_b(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    check_bipartite(m, dim_a, dim_b)?;
    let src = m.as_matrix();
    let out = DMatrix::from_fn(dim_a, dim_a, |a, b| {
        (0..dim_b)
            .map(|i| src[(a * dim_b + i, b * dim_b + i)])
            .sum()
    });
    Ok(HermitianMatrix::symmetrized(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests_support::{random_hermitian, random_psd_unit_trace};

    #[test]
    fn kron_examples() {
        let i2 = HermitianMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), HermitianMatrix::identity(4));
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert_eq!(kron(&a, &b).diagonal(), vec![3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = random_psd_unit_trace(3, 1);
        let sigma = random_hermitian(2, 2);
        let out = partial_trace_a(&kron(&rho, &sigma), 3, 2).unwrap();
        assert!((&out - &sigma).max_abs_entry() < 1e-12);

        let out_b = partial_trace_b(&kron(&sigma, &rho), 2, 3).unwrap();
        assert!((&out_b - &sigma).max_abs_entry() < 1e-12);
    }

    #[test]
    fn maximally_entangled_reduces_to_half_identity() {
        let s = 0.5;
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = C64::new(s, 0.0);
        }
        let phi = HermitianMatrix::new(m).unwrap();
        let red = partial_trace_a(&phi, 2, 2).unwrap();
        assert!((&red - &(&HermitianMatrix::identity(2) * 0.5)).max_abs_entry() < 1e-15);
    }

    #[test]
    fn trace_preserved() {
        for seed in 0..5 {
            let m = random_hermitian(6, seed);
            let t = partial_trace_a(&m, 2, 3).unwrap().trace();
            assert!((t - m.trace()).abs() < 1e-12);
            let t = partial_trace_b(&m, 3, 2).unwrap().trace();
            assert!((t - m.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = HermitianMatrix::identity(5);
        assert!(matches!(
            partial_trace_a(&m, 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
