//! Channel matrices, Gram matrices with cached eigenstructure, the compound
//! adversary class, and random/structured channel factories.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::rng::standard_complex_gaussian;

/// Complex channel gain matrix (receive antennas x transmit antennas).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    mat: CMatrix,
}

impl ChannelMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.rows() == 0 || mat.cols() == 0 {
            return Err(Error::InvalidArgument(
                "channel matrix needs at least one row and one column".to_string(),
            ));
        }
        if !mat.is_finite() {
            return Err(Error::InvalidArgument("channel matrix has non-finite entries".to_string()));
        }
        Ok(ChannelMatrix { mat })
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Gram matrix `W = H^H H` with its eigendecomposition.
    pub fn gram(&self) -> Result<GramMatrix> {
        GramMatrix::from_matrix(self.mat.adjoint().mul(&self.mat))
    }
}

/// Hermitian PSD Gram matrix `W = H^H H` with cached eigenstructure.
///
/// Eigenvalues are sorted nonincreasing and clamped at zero from below;
/// eigenvector columns follow the same order.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    matrix: CMatrix,
    eigen: HermitianEigen,
}

impl GramMatrix {
    pub fn from_matrix(w: CMatrix) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::InvalidArgument("gram matrix must be square".to_string()));
        }
        if w.hermitian_defect() > 1.0e-12 {
            return Err(Error::InvalidArgument(format!(
                "gram matrix is not Hermitian (defect {:e})",
                w.hermitian_defect()
            )));
        }
        let sym = w.hermitian_part();
        let mut eigen = linalg::eigh(&sym)?;
        let scale = sym.frobenius_norm();
        for v in &mut eigen.values {
            if *v < -1.0e-12 * scale.max(1.0) {
                return Err(Error::Numerical(format!(
                    "gram matrix has a negative eigenvalue {v:e}"
                )));
            }
            *v = v.max(0.0);
        }
        Ok(GramMatrix { matrix: sym, eigen })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Nonincreasing nonnegative eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Unitary matrix whose columns pair with `eigenvalues()`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    /// Operator norm, i.e. the largest eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigen.values.first().copied().unwrap_or(0.0)
    }
}

/// Adversary uncertainty class: every Gram matrix with operator norm at most
/// `gamma_w` and rank at most `m_active`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundWillieSet {
    pub gamma_w: f64,
    pub m_active: usize,
}

impl CompoundWillieSet {
    pub fn new(gamma_w: f64, m_active: usize) -> Result<Self> {
        if !(gamma_w > 0.0) {
            return Err(Error::InvalidArgument("gamma_w must be positive".to_string()));
        }
        if m_active == 0 {
            return Err(Error::InvalidArgument("m_active must be at least 1".to_string()));
        }
        Ok(CompoundWillieSet { gamma_w, m_active })
    }

    pub fn contains(&self, w: &GramMatrix) -> bool {
        w.spectral_norm() <= self.gamma_w * (1.0 + 1.0e-12)
    }
}

/// Unit-rank channel `H = sqrt(lambda) * left * right^H`.
#[derive(Debug, Clone)]
pub struct UnitRankChannel {
    pub lambda: f64,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

impl UnitRankChannel {
    pub fn new(lambda: f64, left: Vec<Complex64>, right: Vec<Complex64>) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument("lambda must be nonnegative".to_string()));
        }
        for (name, v) in [("left", &left), ("right", &right)] {
            let n = linalg::vec_norm(v);
            if (n - 1.0).abs() > 1.0e-12 {
                return Err(Error::InvalidArgument(format!(
                    "{name} singular vector is not unit norm (|v| = {n})"
                )));
            }
        }
        Ok(UnitRankChannel { lambda, left, right })
    }

    pub fn channel(&self) -> ChannelMatrix {
        let h = linalg::outer(&self.left, &self.right).scale(self.lambda.sqrt());
        ChannelMatrix { mat: h }
    }
}

/// Builds the unit-rank channel matrix `sqrt(lambda) * left * right^H`.
pub fn make_unit_rank(lambda: f64, left: &[Complex64], right: &[Complex64]) -> Result<ChannelMatrix> {
    Ok(UnitRankChannel::new(lambda, left.to_vec(), right.to_vec())?.channel())
}

/// All scalar system parameters of one covert-communication instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas at Alice.
    pub n_a: usize,
    /// Receive antennas at Bob.
    pub n_b: usize,
    /// Receive antennas at Willie.
    pub n_w: usize,
    /// Noise variance at Bob.
    pub sigma_b2: f64,
    /// Noise variance at Willie.
    pub sigma_w2: f64,
    /// Average transmit power budget.
    pub power: f64,
    /// Detection level: Willie's error sum stays above `1 - delta`.
    pub delta: f64,
    /// Number of channel uses per codeword.
    pub blocklength: u64,
    /// Spectral-norm cap of the adversary channel class.
    pub gamma_w: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("sigma_b2", self.sigma_b2),
            ("sigma_w2", self.sigma_w2),
            ("power", self.power),
            ("gamma_w", self.gamma_w),
        ];
        for (name, v) in positives {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_a == 0 || self.n_b == 0 || self.n_w == 0 {
            return Err(Error::InvalidConfig("antenna counts must be at least 1".to_string()));
        }
        // delta = 0 is the degenerate no-transmission budget; the solvers
        // return the all-zero covariance for it.
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if self.blocklength == 0 {
            return Err(Error::InvalidConfig("blocklength must be at least 1".to_string()));
        }
        Ok(())
    }

    /// Active eigenmodes of the main channel, `N = min(n_a, n_b)`.
    pub fn n_active(&self) -> usize {
        self.n_a.min(self.n_b)
    }

    /// Active eigenmodes of the adversary channel, `M = min(n_a, n_w)`.
    pub fn m_active(&self) -> usize {
        self.n_a.min(self.n_w)
    }

    /// Total relative-entropy budget `2 delta^2` over the whole block.
    pub fn divergence_budget_total(&self) -> f64 {
        2.0 * self.delta * self.delta
    }

    /// Per-use relative-entropy budget `2 delta^2 / n`.
    pub fn divergence_budget_per_use(&self) -> f64 {
        self.divergence_budget_total() / self.blocklength as f64
    }

    pub fn willie_set(&self) -> CompoundWillieSet {
        CompoundWillieSet { gamma_w: self.gamma_w, m_active: self.m_active() }
    }
}

/// Divergence-maximizing adversary Gram matrix in the compound class:
/// `gamma_w` on the first `M = min(n_a, n_w)` diagonal entries, zero elsewhere.
pub fn worst_case_willie(cfg: &SystemConfig) -> GramMatrix {
    let m = cfg.m_active();
    let mut entries = alloc::vec![0.0; cfg.n_a];
    for e in entries.iter_mut().take(m) {
        *e = cfg.gamma_w;
    }
    GramMatrix::from_matrix(CMatrix::diagonal(&entries))
        .expect("diagonal nonnegative matrix is a valid Gram matrix")
}

/// A channel matrix realizing the worst-case adversary: `H^H H = gamma_w I-hat`.
pub fn worst_case_willie_channel(cfg: &SystemConfig) -> ChannelMatrix {
    let root = cfg.gamma_w.sqrt();
    let m = cfg.m_active();
    let mat = CMatrix::from_fn(cfg.n_w, cfg.n_a, |r, c| {
        if r == c && r < m {
            Complex64::new(root, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    ChannelMatrix { mat }
}

/// Uniform sample from the complex unit sphere (normalized standard complex
/// Gaussian, which is exactly rotation invariant).
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".to_string()));
    }
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| standard_complex_gaussian(rng)).collect();
        let n = linalg::vec_norm(&v);
        // A vanishing draw has probability ~0; redraw keeps the map total.
        if n > 1.0e-150 {
            return Ok(v.into_iter().map(|z| z / n).collect());
        }
    }
}
