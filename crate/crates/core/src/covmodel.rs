//! Population covariance models, random rotations and data sampling.
//!
//! Four population models are supported:
//!
//! - identity, `Σ = I`;
//! - spike, `Σ = Ω 11ᵀ/p + I` with `Ω > -1`;
//! - power-law and stepwise, `Σ = 11ᵀ/p + Q U diag(h) Uᵀ Qᵀ` where `Q` is the
//!   Helmert contrast basis, `U` a Haar rotation of order `p - 1`, and `h` is
//!   rescaled so that `tr Σ = p`.
//!
//! Samples are rows `x = L z` with `L Lᵀ = Σ` and `z` either standard normal
//! or Student t with three degrees of freedom scaled to unit variance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    Spike { omega: f64 },
    PowerLaw,
    Stepwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    #[default]
    Gaussian,
    /// Student t with 3 degrees of freedom, divided by √3.
    StudentT3,
}

/// A population covariance model together with the noise family used to
/// draw samples from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    pub noise: Noise,
}

impl CovarianceSpec {
    pub fn new(kind: CovarianceKind, noise: Noise) -> Result<Self> {
        let spec = CovarianceSpec { kind, noise };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity() -> Self {
        CovarianceSpec { kind: CovarianceKind::Identity, noise: Noise::Gaussian }
    }

    pub fn spike(omega: f64) -> Result<Self> {
        Self::new(CovarianceKind::Spike { omega }, Noise::Gaussian)
    }

    pub fn with_noise(self, noise: Noise) -> Self {
        CovarianceSpec { noise, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let CovarianceKind::Spike { omega } = self.kind {
            if !(omega > -1.0) || !omega.is_finite() {
                return Err(Error::InvalidOmega(omega));
            }
        }
        Ok(())
    }

    /// Spike strength, with the identity model reported as `Ω = 0`.
    pub fn omega(&self) -> Option<f64> {
        match self.kind {
            CovarianceKind::Identity => Some(0.0),
            CovarianceKind::Spike { omega } => Some(omega),
            CovarianceKind::PowerLaw | CovarianceKind::Stepwise => None,
        }
    }

    /// True when Σ has to be redrawn (fresh rotation) for every replication.
    pub fn is_random(&self) -> bool {
        matches!(self.kind, CovarianceKind::PowerLaw | CovarianceKind::Stepwise)
    }
}

/// A dense symmetric `p × p` matrix.
///
/// Used both for population covariances and for sample covariances. Positive
/// semidefiniteness is not required here; it is checked where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let p = matrix.nrows();
        if p == 0 || matrix.ncols() != p {
            return Err(Error::InvalidDimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..p {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CovarianceMatrix(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidDimension("rows must all have length p".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(p, p, &flat))
    }

    pub fn identity(p: usize) -> Self {
        CovarianceMatrix(DMatrix::identity(p, p))
    }

    // Copies the upper triangle onto the lower one. Only for matrices that
    // are symmetric up to rounding by construction.
    fn symmetrized(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        for j in 0..p {
            for i in (j + 1)..p {
                m[(i, j)] = m[(j, i)];
            }
        }
        CovarianceMatrix(m)
    }

    pub fn p(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scaled(&self, c: f64) -> Self {
        CovarianceMatrix(&self.0 * c)
    }

    /// Inverse via Cholesky; `None` if the matrix is not positive definite.
    pub fn try_inverse(&self) -> Option<Self> {
        let inv = self.0.clone().cholesky()?.inverse();
        Some(Self::symmetrized(inv))
    }
}

/// An `n × p` data matrix whose rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidDimension("data matrix must be non-empty".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("data matrix has non-finite entries".into()));
        }
        Ok(DataMatrix(rows))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn p(&self) -> usize {
        self.0.ncols()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Builds the population covariance for `spec` in dimension `p`.
///
/// `seed` only matters for the power-law and stepwise models, which draw a
/// Haar rotation.
pub fn build_covariance(spec: &CovarianceSpec, p: usize, seed: u64) -> Result<CovarianceMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_covariance_with_rng(spec, p, &mut rng)
}

pub fn build_covariance_with_rng<R: Rng + ?Sized>(
    spec: &CovarianceSpec,
    p: usize,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    spec.validate()?;
    if p < 2 {
        return Err(Error::InvalidDimension(format!("p must be at least 2, got {p}")));
    }
    match spec.kind {
        CovarianceKind::Identity => Ok(CovarianceMatrix::identity(p)),
        CovarianceKind::Spike { omega } => {
            let c = omega / p as f64;
            Ok(CovarianceMatrix(DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    1.0 + c
                } else {
                    c
                }
            })))
        }
        CovarianceKind::PowerLaw | CovarianceKind::Stepwise => {
            let h = rotation_spectrum(&spec.kind, p)?;
            let u = haar_rotation_with_rng(p - 1, rng);
            let b = contrast_basis(p) * u;
            let mut bh = b.clone();
            for (k, mut col) in bh.column_iter_mut().enumerate() {
                col *= h[k];
            }
            let mut sigma = bh * b.transpose();
            sigma.add_scalar_mut(1.0 / p as f64);
            Ok(CovarianceMatrix::symmetrized(sigma))
        }
    }
}

/// Eigenvalues `h` on the contrast subspace, scaled so that `tr Σ = p`.
fn rotation_spectrum(kind: &CovarianceKind, p: usize) -> Result<Vec<f64>> {
    let raw: Vec<f64> = match kind {
        CovarianceKind::PowerLaw => (1..p).map(|j| 1.0 / j as f64).collect(),
        CovarianceKind::Stepwise => {
            if p % 2 != 0 {
                return Err(Error::InvalidDimension(format!(
                    "stepwise model needs an even dimension, got {p}"
                )));
            }
            let half = p / 2;
            std::iter::repeat_n(1.0, half).chain(std::iter::repeat_n(0.5, half - 1)).collect()
        }
        _ => unreachable!("only rotation models carry a spectrum"),
    };
    let total: f64 = raw.iter().sum();
    let c = (p - 1) as f64 / total;
    Ok(raw.into_iter().map(|v| v * c).collect())
}

/// Population scaling vector `w₀` with `W₀ Σ W₀ 1 = 1`, where it has a closed
/// form.
pub fn population_scaling(spec: &CovarianceSpec, p: usize) -> Result<DVector<f64>> {
    spec.validate()?;
    match spec.kind {
        CovarianceKind::Identity => Ok(DVector::from_element(p, 1.0)),
        CovarianceKind::Spike { omega } => Ok(DVector::from_element(p, (omega + 1.0).powf(-0.5))),
        CovarianceKind::PowerLaw | CovarianceKind::Stepwise => Err(Error::Unsupported(
            "population scaling of a rotation model depends on the realized rotation".into(),
        )),
    }
}

/// Draws `n` rows from `cov` with the given noise family.
pub fn sample_data(cov: &CovarianceMatrix, n: usize, noise: Noise, seed: u64) -> Result<DataMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Sampler::new(cov)?.sample(n, noise, &mut rng)
}

/// Precomputed square root of a covariance matrix for repeated sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    // None when Σ is exactly the identity.
    factor: Option<DMatrix<f64>>,
    p: usize,
}

impl Sampler {
    pub fn new(cov: &CovarianceMatrix) -> Result<Self> {
        let p = cov.p();
        if *cov.matrix() == DMatrix::<f64>::identity(p, p) {
            return Ok(Sampler { factor: None, p });
        }
        let eig = SymmetricEigen::new(cov.matrix().clone());
        let scale = eig.eigenvalues.amax().max(1.0);
        let min = eig.eigenvalues.min();
        if min < -PSD_CLIP * scale {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let mut factor = eig.eigenvectors;
        for (k, mut col) in factor.column_iter_mut().enumerate() {
            col *= eig.eigenvalues[k].max(0.0).sqrt();
        }
        Ok(Sampler { factor: Some(factor), p })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, noise: Noise, rng: &mut R) -> Result<DataMatrix> {
        if n == 0 {
            return Err(Error::InvalidDimension("need at least one sample".into()));
        }
        let z = noise_matrix(n, self.p, noise, rng);
        match &self.factor {
            None => DataMatrix::new(z),
            Some(l) => DataMatrix::new(z * l.transpose()),
        }
    }
}

fn noise_matrix<R: Rng + ?Sized>(n: usize, p: usize, noise: Noise, rng: &mut R) -> DMatrix<f64> {
    let values: Vec<f64> = match noise {
        Noise::Gaussian => (0..n * p).map(|_| rng.sample(StandardNormal)).collect(),
        Noise::StudentT3 => {
            let t3 = StudentT::new(3.0).expect("three degrees of freedom is valid");
            let scale = 3.0f64.sqrt().recip();
            (0..n * p).map(|_| rng.sample(t3) * scale).collect()
        }
    };
    DMatrix::from_row_slice(n, p, &values)
}

/// Uncentered sample covariance `S = XᵀX / n`.
pub fn sample_covariance(x: &DataMatrix) -> CovarianceMatrix {
    let s = x.rows().tr_mul(x.rows()) / x.n() as f64;
    CovarianceMatrix::symmetrized(s)
}

/// Haar-distributed orthogonal `d × d` matrix.
pub fn haar_rotation(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_rotation_with_rng(d, &mut rng)
}

/// QR of a Gaussian matrix, with columns of `Q` flipped so that `R` has a
/// positive diagonal. Without the sign fix the distribution is not Haar.
pub fn haar_rotation_with_rng<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(d >= 1, "rotation order must be positive");
    let values: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let qr = DMatrix::from_row_slice(d, d, &values).qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        if r_diag[k] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// Helmert contrast basis: a `p × (p-1)` matrix with orthonormal columns that
/// are all orthogonal to the ones vector.
pub fn contrast_basis(p: usize) -> DMatrix<f64> {
    assert!(p >= 2, "contrast basis needs p >= 2");
    let mut q = DMatrix::zeros(p, p - 1);
    for k in 1..p {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / norm;
        }
        q[(k, k - 1)] = -(k as f64) / norm;
    }
    q
}
