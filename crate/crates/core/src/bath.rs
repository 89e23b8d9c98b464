//! Exponential bath correlation function and colored complex Gaussian noise.
//!
//! The bath enters only through its correlation function
//! `α(t,s) = (γΓ/2)·e^{−γ|t−s|}·e^{−iω₀(t−s)}`, the covariance of a stationary
//! complex Ornstein–Uhlenbeck process. Noise paths are sampled on the
//! half-step grid with the exact discrete-time OU recursion.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::C64;

/// Parameters of the bath correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Inverse memory time γ.
    pub gamma: f64,
    /// Kernel strength Γ.
    pub strength: f64,
    /// Central frequency ω₀.
    pub omega0: f64,
}

impl Default for BathParams {
    fn default() -> Self {
        Self { gamma: 1.0, strength: 1.0, omega0: 0.0 }
    }
}

impl BathParams {
    pub fn new(gamma: f64, strength: f64, omega0: f64) -> Result<Self> {
        let p = Self { gamma, strength, omega0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::param("gamma", format!("must be finite and > 0, got {}", self.gamma)));
        }
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(Error::param("Gamma", format!("must be finite and >= 0, got {}", self.strength)));
        }
        if !self.omega0.is_finite() {
            return Err(Error::param("omega0", "must be finite"));
        }
        Ok(())
    }

    /// `α(0) = γΓ/2`, the stationary variance of the noise.
    #[inline]
    pub fn alpha0(&self) -> f64 {
        0.5 * self.gamma * self.strength
    }

    /// Complex decay rate `γ + iω₀`.
    #[inline]
    pub fn rate(&self) -> C64 {
        C64::new(self.gamma, self.omega0)
    }
}

/// `α(t, s)`.
pub fn kernel(p: &BathParams, t: f64, s: f64) -> C64 {
    let d = t - s;
    // conj(e^{-iω₀d}) = e^{-iω₀(-d)}, so the symmetry holds bit for bit
    p.alpha0() * (-p.gamma * d.abs()).exp() * C64::new((p.omega0 * d).cos(), -(p.omega0 * d).sin())
}

/// `e^w − 1` without cancellation for small `|w|`.
fn expm1c(w: C64) -> C64 {
    if w.norm() < 1e-2 {
        w * (1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0 * (1.0 + w / 5.0))))
    } else {
        w.exp() - 1.0
    }
}

/// `A(t) = ∫₀ᵗ α(t, s) ds`.
pub fn kernel_integral(p: &BathParams, t: f64) -> C64 {
    let k = p.rate();
    p.alpha0() * (-expm1c(-k * t)) / k
}

/// `∫₀ᵗ A(s) ds`.
pub fn kernel_double_integral(p: &BathParams, t: f64) -> C64 {
    let k = p.rate();
    // t − (1 − e^{−kt})/k, written to stay accurate for small kt
    let kt = k * t;
    let inner = if kt.norm() < 1e-3 {
        // kt²/2 − k²t³/6 + k³t⁴/24
        t * (kt / 2.0 - kt * kt / 6.0 + kt * kt * kt / 24.0)
    } else {
        t + expm1c(-kt) / k
    };
    p.alpha0() * inner / k
}

/// One realization of the noise `z(t)` on the half-step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub grid: TimeGrid,
    pub samples: Vec<C64>,
    pub seed: u64,
    pub trajectory_index: u64,
}

impl NoisePath {
    /// Identically zero noise on `grid`.
    pub fn zero(grid: TimeGrid) -> Self {
        Self { grid, samples: vec![C64::new(0.0, 0.0); grid.half_len()], seed: 0, trajectory_index: 0 }
    }

    #[inline]
    pub fn at_half(&self, j: usize) -> C64 {
        self.samples[j]
    }
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for trajectory `index` of a run with master seed `seed`.
///
/// The key depends only on `(seed, index)`, never on scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ splitmix64(index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Standard circular complex Gaussian, `E|ξ|² = 1`.
#[inline]
pub fn circular_normal<R: Rng>(rng: &mut R) -> C64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    C64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// Stationary OU noise path for trajectory `index`.
pub fn sample_noise_path(p: &BathParams, grid: &TimeGrid, seed: u64, index: u64) -> Result<NoisePath> {
    p.validate()?;
    if p.strength == 0.0 {
        return Ok(NoisePath { seed, trajectory_index: index, ..NoisePath::zero(*grid) });
    }
    let h = 0.5 * grid.dt();
    let decay = (-p.rate() * h).exp();
    let sd0 = p.alpha0().sqrt();
    let kick = (p.alpha0() * -(-2.0 * p.gamma * h).exp_m1()).sqrt();
    let mut rng = trajectory_rng(seed, index);
    let mut samples = Vec::with_capacity(grid.half_len());
    let mut z = circular_normal(&mut rng) * sd0;
    samples.push(z);
    for _ in 1..grid.half_len() {
        z = z * decay + circular_normal(&mut rng) * kick;
        samples.push(z);
    }
    Ok(NoisePath { grid: *grid, samples, seed, trajectory_index: index })
}

/// Largest half-step grid the dense covariance oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 4096;

/// Independent sampler that colors white noise with a factor of the full
/// covariance matrix `Σ_jk = α(t_j, t_k)` on the half-step grid.
pub struct NoiseOracle {
    grid: TimeGrid,
    factor: DMatrix<C64>,
}

impl NoiseOracle {
    pub fn new(p: &BathParams, grid: &TimeGrid) -> Result<Self> {
        p.validate()?;
        let m = grid.half_len();
        if m > ORACLE_MAX_POINTS {
            return Err(Error::GridTooLarge { points: m, limit: ORACLE_MAX_POINTS });
        }
        let ts: Vec<f64> = grid.half_times().collect();
        let sigma = DMatrix::from_fn(m, m, |j, k| kernel(p, ts[j], ts[k]));
        if p.strength == 0.0 {
            return Ok(Self { grid: *grid, factor: DMatrix::zeros(m, m) });
        }
        let factor = match Cholesky::new(sigma.clone()) {
            Some(ch) => ch.unpack(),
            None => Self::eigen_factor(sigma, p.alpha0())?,
        };
        Ok(Self { grid: *grid, factor })
    }

    // Fallback for numerically singular Σ: U·sqrt(Λ₊), after checking that no
    // eigenvalue is meaningfully negative.
    fn eigen_factor(sigma: DMatrix<C64>, scale: f64) -> Result<DMatrix<C64>> {
        let eig = SymmetricEigen::new(sigma);
        let tol = 1e-10 * scale.max(1.0);
        if let Some((index, &pivot)) =
            eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))
        {
            if pivot < -tol {
                return Err(Error::NotPositiveSemidefinite { index, pivot });
            }
        }
        let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
        Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
    }

    pub fn draw(&self, seed: u64, index: u64) -> NoisePath {
        let m = self.factor.nrows();
        let mut rng = trajectory_rng(seed, index);
        let white = DVector::from_fn(m, |_, _| circular_normal(&mut rng));
        let z = &self.factor * white;
        NoisePath { grid: self.grid, samples: z.iter().copied().collect(), seed, trajectory_index: index }
    }
}

/// One path from the dense covariance oracle.
pub fn exact_noise_oracle(p: &BathParams, grid: &TimeGrid, seed: u64) -> Result<NoisePath> {
    Ok(NoiseOracle::new(p, grid)?.draw(seed, 0))
}
