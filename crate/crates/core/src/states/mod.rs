//! Density matrices, classical-quantum ensembles, bipartite states, and
//! their seeded random generators.
//!
//! Random states come from the Hilbert–Schmidt (Ginibre) ensemble
//! `G G† / Tr[G G†]`, where `G` has i.i.d. standard complex Gaussian
//! entries. The generator is ChaCha20 (`rand_chacha`) seeded with
//! `seed_from_u64`, and Gaussians are drawn with `rand_distr::StandardNormal`
//! (real part first, then imaginary part, row-major).

pub(crate) mod io;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, eigvalsh, kron, partial_trace_a, partial_trace_b, HermitianMatrix, Spectral, C64,
};

pub use io::{instance_hash, load, save, Instance, InstanceKind};

/// Eigenvalues below this are rejected outright.
pub const PSD_REJECT_TOL: f64 = 1e-8;
/// Eigenvalues below this (and above the reject threshold) are clipped to zero.
pub const PSD_CLIP_TOL: f64 = 1e-12;
/// Accepted deviation of the trace from one without renormalizing.
pub const TRACE_TOL: f64 = 1e-10;
/// Largest trace deviation that is repaired by renormalization.
pub const TRACE_RENORMALIZE_TOL: f64 = 1e-6;
/// Minimum eigenvalue required of the ensemble average / reduced state.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Seed for the reproducible generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// The eigendecomposition is computed once at construction and kept; its
/// eigenvalues are clamped at zero.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    spectral: Spectral,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let trace = matrix.trace();
        if !trace.is_finite() || (trace - 1.0).abs() > TRACE_RENORMALIZE_TOL {
            return Err(Error::Invariant {
                invariant: "unit trace",
                detail: format!("trace is {trace}"),
            });
        }
        let spectral = eigh(&matrix)?;
        let min = spectral.min_eigenvalue();
        if min < -PSD_REJECT_TOL {
            return Err(Error::Invariant {
                invariant: "positive semidefinite",
                detail: format!("minimum eigenvalue is {min:e}"),
            });
        }
        let (mut matrix, mut spectral) = if min < -PSD_CLIP_TOL {
            let clipped: Vec<f64> = spectral.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
            let s = Spectral::from_parts(clipped, spectral.eigenvectors().clone());
            (s.reconstruct(), s)
        } else {
            (matrix, spectral)
        };
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            matrix = &matrix * (1.0 / trace);
            let scaled = spectral.eigenvalues().iter().map(|&l| l / trace).collect();
            spectral = Spectral::from_parts(scaled, spectral.eigenvectors().clone());
        }
        let clamped = spectral.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        let spectral = Spectral::from_parts(clamped, spectral.eigenvectors().clone());
        Ok(Self { matrix, spectral })
    }

    /// Builds a state from a known eigendecomposition. The eigenvalues must
    /// be nonnegative and sum to one.
    pub(crate) fn from_spectral(spectral: Spectral) -> Self {
        debug_assert!(spectral.eigenvalues().iter().all(|&l| l >= 0.0));
        debug_assert!((spectral.eigenvalues().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        Self {
            matrix: spectral.reconstruct(),
            spectral,
        }
    }

    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(probabilities))
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectral.eigenvalues()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    /// `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * eigvalsh(&diff)?.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// `I/d`.
pub fn maximally_mixed(d: usize) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    DensityMatrix::from_diagonal(&vec![1.0 / d as f64; d])
}

/// Probability weights paired with density matrices on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct CQEnsemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl CQEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Parameter(
                "ensemble must contain at least one state".into(),
            ));
        }
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Invariant {
                invariant: "nonnegative weights",
                detail: format!("weight {w}"),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::Invariant {
                invariant: "weights sum to one",
                detail: format!("sum is {total}"),
            });
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ_x P(x) ρ_x`.
    pub fn average_state(&self) -> HermitianMatrix {
        self.weighted_sum()
    }

    fn weighted_sum(&self) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim());
        for (w, s) in self.weights.iter().zip(&self.states) {
            acc = &acc + &(s.matrix() * *w);
        }
        acc
    }

    /// Minimum eigenvalue of the weighted average state.
    pub fn support_floor(&self) -> Result<f64> {
        Ok(eigvalsh(&self.weighted_sum())?[0])
    }

    /// Whether the supports of the weighted states jointly span the space.
    pub fn has_full_support(&self) -> Result<bool> {
        Ok(self.support_floor()? > SUPPORT_TOL)
    }

    /// True when every state is diagonal in the standard basis.
    pub fn is_diagonal(&self) -> bool {
        self.states.iter().all(|s| s.matrix().is_diagonal())
    }

    /// Block-diagonal state `Σ_x P(x) |x⟩⟨x| ⊗ ρ_x` on `X ⊗ B`.
    pub fn to_classical_quantum_state(&self) -> Result<BipartiteState> {
        let n = self.len();
        let d = self.dim();
        let mut m = DMatrix::<C64>::zeros(n * d, n * d);
        for (x, (w, s)) in self.weights.iter().zip(&self.states).enumerate() {
            let block = s.matrix().as_matrix() * C64::new(*w, 0.0);
            m.view_mut((x * d, x * d), (d, d)).copy_from(&block);
        }
        BipartiteState::new(DensityMatrix::new(HermitianMatrix::new(m)?)?, n, d)
    }
}

/// Density matrix on `H_A ⊗ H_B`, row index `a·dim_b + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    state: DensityMatrix,
    dim_a: usize,
    dim_b: usize,
}

impl BipartiteState {
    pub fn new(state: DensityMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || state.dim() != dim_a * dim_b {
            return Err(Error::Invariant {
                invariant: "dimension factorization",
                detail: format!("{} != {dim_a} x {dim_b}", state.dim()),
            });
        }
        Ok(Self {
            state,
            dim_a,
            dim_b,
        })
    }

    /// `ρ_A ⊗ ρ_B`.
    pub fn product(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<Self> {
        let m = kron(rho_a.matrix(), rho_b.matrix());
        Self::new(DensityMatrix::new(m)?, rho_a.dim(), rho_b.dim())
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `ρ_A = Tr_B[ρ_AB]`.
    pub fn reduced_a(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(partial_trace_b(
            self.state.matrix(),
            self.dim_a,
            self.dim_b,
        )?)
    }

    /// `ρ_B = Tr_A[ρ_AB]`.
    pub fn reduced_b(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(partial_trace_a(
            self.state.matrix(),
            self.dim_a,
            self.dim_b,
        )?)
    }

    /// Whether `ρ_B` is full rank.
    pub fn has_full_support(&self) -> Result<bool> {
        Ok(self.reduced_b()?.min_eigenvalue() > SUPPORT_TOL)
    }
}

pub(crate) fn sample_density(d: usize, rng: &mut ChaCha20Rng) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    // Row-major draw order: entry (i, j) takes the (2(i·d + j))-th and next normals.
    let entries: Vec<C64> = (0..d * d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    let g = DMatrix::from_row_slice(d, d, &entries);
    let w = g.clone() * g.adjoint();
    let t: f64 = (0..d).map(|i| w[(i, i)].re).sum();
    DensityMatrix::new(HermitianMatrix::symmetrized(w.map(|z| z / t)))
}

/// Hermitian `(G + G†)/2` with i.i.d. standard complex Gaussian `G`.
pub fn sample_hermitian(d: usize, rng: &mut ChaCha20Rng) -> Result<HermitianMatrix> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
    .transpose();
    Ok(HermitianMatrix::symmetrized(
        g.map(|z| z * 0.5) + g.adjoint().map(|z| z * 0.5),
    ))
}

/// Hilbert–Schmidt random state of dimension `d`.
pub fn random_density(d: usize, seed: Seed) -> Result<DensityMatrix> {
    sample_density(d, &mut seed.rng())
}

/// `n` Hilbert–Schmidt states of dimension `d` with uniform weights.
pub fn random_cq_ensemble(n: usize, d: usize, seed: Seed) -> Result<CQEnsemble> {
    if n == 0 || d == 0 {
        return Err(Error::Parameter(
            "ensemble size and dimension must be at least 1".into(),
        ));
    }
    let mut rng = seed.rng();
    let states = (0..n)
        .map(|_| sample_density(d, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    CQEnsemble::new(vec![1.0 / n as f64; n], states)
}

/// `n` diagonal states of dimension `d` with uniform weights: the
/// diagonals of Hilbert–Schmidt random states.
pub fn random_commuting_cq_ensemble(n: usize, d: usize, seed: Seed) -> Result<CQEnsemble> {
    let full = random_cq_ensemble(n, d, seed)?;
    let states = full
        .states()
        .iter()
        .map(|s| DensityMatrix::from_diagonal(&s.matrix().diagonal()))
        .collect::<Result<Vec<_>>>()?;
    CQEnsemble::new(full.weights().to_vec(), states)
}

/// Hilbert–Schmidt random state on `C^{dim_a} ⊗ C^{dim_b}`.
pub fn random_bipartite(dim_a: usize, dim_b: usize, seed: Seed) -> Result<BipartiteState> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::Parameter(
            "subsystem dimensions must be at least 1".into(),
        ));
    }
    BipartiteState::new(random_density(dim_a * dim_b, seed)?, dim_a, dim_b)
}
