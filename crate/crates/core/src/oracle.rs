//! Brute-force reference minimizers and random tensor generators.
//!
//! Nothing here uses the eigen-based search of [`crate::pointwise`]: the
//! margins are minima over random unit test objects evaluated with the
//! tensor-core pairing, optionally polished by coordinate descent.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::lame;
use crate::math;
use crate::par;
use crate::pointwise::Scalars;
use crate::rng;
use crate::tensor::{project_state, real_pairing, CoefficientTensor, GradientState, UnitState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    Strong,
    Lh,
    /// `Re⟨Aξ, ξ + |t| conj ξ⟩` for `m = 1`, with `|t| = |1 - 2/p|`.
    Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Polish the best few draws by coordinate descent.
    pub refine: bool,
    /// Test-set scalars for the strong and LH kinds; `None` follows the
    /// tensor. The scalar kind always draws complex `ξ`.
    pub scalars: Option<Scalars>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            refine: true,
            scalars: None,
        }
    }
}

struct Layout {
    kind: OracleKind,
    n: usize,
    m: usize,
    scalars: Scalars,
    blocks: Vec<(usize, usize)>,
    dim: usize,
}

impl Layout {
    fn new(a: &CoefficientTensor, kind: OracleKind, scalars: Scalars) -> Self {
        let (n, m) = (a.n(), a.m());
        let w = scalars.width();
        let lens: Vec<usize> = match kind {
            OracleKind::Strong => vec![w * n * m, w * m],
            OracleKind::Lh => vec![w * m, w * m, n],
            OracleKind::Scalar => vec![2 * n],
        };
        let mut blocks = Vec::new();
        let mut off = 0;
        for l in lens {
            blocks.push((off, l));
            off += l;
        }
        Self {
            kind,
            n,
            m,
            scalars,
            blocks,
            dim: off,
        }
    }

    fn complex(&self, x: &[f64], block: usize) -> Vec<Complex64> {
        let (off, len) = self.blocks[block];
        let s = if self.kind == OracleKind::Scalar {
            Scalars::Complex
        } else {
            self.scalars
        };
        s.to_complex(&x[off..off + len])
    }

    fn value(&self, a: &CoefficientTensor, t: f64, x: &[f64]) -> Result<f64> {
        match self.kind {
            OracleKind::Strong => {
                let xi = GradientState::new(self.n, self.m, self.complex(x, 0))?;
                let omega = UnitState::new(self.complex(x, 1))?;
                strong(a, t, &xi, &omega)
            }
            OracleKind::Lh => {
                let eta = self.complex(x, 0);
                let omega = UnitState::new(self.complex(x, 1))?;
                let (off, len) = self.blocks[2];
                let xi = GradientState::outer(&x[off..off + len], &eta)?;
                strong(a, t, &xi, &omega)
            }
            OracleKind::Scalar => {
                let z = self.complex(x, 0);
                let xi = GradientState::new(self.n, 1, z.clone())?;
                let c = t.abs();
                let shifted = GradientState::new(
                    self.n,
                    1,
                    z.iter().map(|v| v + v.conj() * c).collect(),
                )?;
                real_pairing(a, &xi, &shifted)
            }
        }
    }

    fn normalize(&self, x: &mut [f64]) {
        for &(off, len) in &self.blocks {
            if !math::normalize(&mut x[off..off + len]) {
                x[off] = 1.0;
            }
        }
    }
}

fn strong(a: &CoefficientTensor, t: f64, xi: &GradientState, omega: &UnitState) -> Result<f64> {
    let z = project_state(xi, omega)?;
    real_pairing(a, &xi.axpy(-t, &z), &xi.axpy(t, &z))
}

/// Draws polished by coordinate descent when `refine` is set.
const REFINE_DRAWS: usize = 16;

/// Coordinate descent with step halving down to `1e-7`.
fn descend(a: &CoefficientTensor, t: f64, layout: &Layout, mut val: f64, mut x: Vec<f64>) -> Result<f64> {
    let mut step = 0.25;
    let mut trial = x.clone();
    while step > 1e-7 {
        let mut improved = true;
        let mut passes = 0;
        while improved && passes < 200 {
            improved = false;
            passes += 1;
            for i in 0..layout.dim {
                for sign in [1.0, -1.0] {
                    trial.copy_from_slice(&x);
                    trial[i] += sign * step;
                    layout.normalize(&mut trial);
                    let v = layout.value(a, t, &trial)?;
                    if v < val {
                        val = v;
                        x.copy_from_slice(&trial);
                        improved = true;
                        break;
                    }
                }
            }
        }
        step *= 0.5;
    }
    Ok(val)
}

/// Minimum of the selected form over random unit test objects: an upper
/// bound on the true infimum.
pub fn brute_margin(a: &CoefficientTensor, t: f64, kind: OracleKind, cfg: &OracleConfig) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::invalid("|t| must be below 1"));
    }
    if cfg.samples == 0 {
        return Err(Error::invalid("oracle needs at least one sample"));
    }
    if kind == OracleKind::Scalar && a.m() != 1 {
        return Err(Error::invalid("scalar kind needs m = 1"));
    }
    let scalars = cfg.scalars.unwrap_or_else(|| Scalars::of_tensor(a));
    let layout = Layout::new(a, kind, scalars);
    let draws = par::map_indexed(cfg.samples, |i| -> Result<(f64, Vec<f64>)> {
        let mut r = rng::substream(cfg.seed, rng::STREAM_ORACLE, i as u64);
        let mut x = vec![0.0; layout.dim];
        for &(off, len) in &layout.blocks {
            x[off..off + len].copy_from_slice(&rng::unit_vector(&mut r, len));
        }
        Ok((layout.value(a, t, &x)?, x))
    });
    let mut draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !cfg.refine {
        return Ok(draws[0].0);
    }
    let polished = par::map_indexed(draws.len().min(REFINE_DRAWS), |i| {
        let (val, x) = &draws[i];
        descend(a, t, &layout, *val, x.clone())
    });
    let mut val = f64::INFINITY;
    for p in polished {
        val = val.min(p?);
    }
    Ok(val)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorStyle {
    /// `B*B + 0.1·I` as a matrix on `C^{nm}`; Legendre constant at least 0.1.
    HermitianPositive,
    /// Hermitian-positive plus an anti-Hermitian part.
    LegendrePerturbed,
    /// A Lamé tensor with random admissible moduli and representative `r`.
    LameLike,
    /// Real symmetric positive definite (`A^{hk}_{αβ} = A^{kh}_{βα}` real).
    RealSymmetric,
}

impl TensorStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            TensorStyle::HermitianPositive => "hermitian-positive",
            TensorStyle::LegendrePerturbed => "legendre-perturbed",
            TensorStyle::LameLike => "lame-like",
            TensorStyle::RealSymmetric => "real-symmetric",
        }
    }
}

/// `min_{|ξ|=1} Re⟨Aξ, ξ⟩` over complex `ξ`.
pub fn legendre_constant(a: &CoefficientTensor) -> Result<f64> {
    let nm = a.n() * a.m();
    let dim = 2 * nm;
    let unit = |i: usize| {
        let mut z = vec![Complex64::new(0.0, 0.0); nm];
        z[i / 2] = if i % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        GradientState::new(a.n(), a.m(), z)
    };
    let basis = (0..dim).map(unit).collect::<Result<Vec<_>>>()?;
    let mut mat = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let v = real_pairing(a, &basis[i], &basis[j])?;
            mat[i * dim + j] += 0.5 * v;
            mat[j * dim + i] += 0.5 * v;
        }
    }
    Ok(eigen::min_eigenpair(&mat, dim, 1e-12)?.0)
}

fn gaussian_matrix(r: &mut rand_chacha::ChaCha8Rng, d: usize, complex: bool) -> Vec<Complex64> {
    let s = 1.0 / math::sqrt(d as f64);
    (0..d * d)
        .map(|_| {
            let re = rng::gaussian(r) * s;
            let im = if complex { rng::gaussian(r) * s } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect()
}

/// `B^H B + 0.1 I` for a `d x d` Gaussian `B`.
fn gram_plus(r: &mut rand_chacha::ChaCha8Rng, d: usize, complex: bool) -> Vec<Complex64> {
    let b = gaussian_matrix(r, d, complex);
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += b[k * d + i].conj() * b[k * d + j];
            }
            g[i * d + j] = acc;
        }
        g[i * d + i] += 0.1;
    }
    g
}

/// Tensor whose `ξ`-pairing matrix is `M`: the pairing `Σ A ξ conj η` equals
/// `η^H Mᵀ ξ`, so storing `Mᵀ` makes the quadratic form `ξ^H M ξ`.
fn from_pairing_matrix(n: usize, m: usize, mat: &[Complex64]) -> Result<CoefficientTensor> {
    let d = n * m;
    CoefficientTensor::from_fn(n, m, |h, k, al, be| mat[(k * m + be) * d + (h * m + al)])
}

pub fn random_elliptic_tensor(n: usize, m: usize, style: TensorStyle, seed: u64) -> Result<CoefficientTensor> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be at least 1"));
    }
    let mut r = rng::substream(seed, rng::STREAM_TENSOR, style as u64);
    let d = n * m;
    match style {
        TensorStyle::HermitianPositive => from_pairing_matrix(n, m, &gram_plus(&mut r, d, true)),
        TensorStyle::RealSymmetric => from_pairing_matrix(n, m, &gram_plus(&mut r, d, false)),
        TensorStyle::LegendrePerturbed => {
            let base = gram_plus(&mut r, d, true);
            let g = gaussian_matrix(&mut r, d, true);
            let mut scale = 0.5 + 1.5 * rng::uniform(&mut r);
            for _ in 0..20 {
                let mut mat = base.clone();
                for i in 0..d {
                    for j in 0..d {
                        mat[i * d + j] += (g[i * d + j] - g[j * d + i].conj()) * (0.5 * scale);
                    }
                }
                let a = from_pairing_matrix(n, m, &mat)?;
                if legendre_constant(&a)? >= 0.05 {
                    return Ok(a);
                }
                scale *= 0.5;
            }
            Err(Error::Numerical("legendre-perturbed tensor kept failing its margin".into()))
        }
        TensorStyle::LameLike => {
            if m != n {
                return Err(Error::invalid("lame-like tensors need m = n"));
            }
            if n < 2 {
                return Err(Error::invalid("lame-like tensors need n >= 2"));
            }
            for _ in 0..20 {
                let mu = 0.5 + 1.5 * rng::uniform(&mut r);
                let ratio = -1.5 + 4.5 * rng::uniform(&mut r);
                let lambda = ratio * mu;
                let s = lame::sufficient_constant(n, lambda, mu)?;
                let rr = s.r_star + (rng::uniform(&mut r) - 0.5) * 0.4 * mu;
                let a = lame::lame_tensor(lambda, mu, rr, n)?;
                if legendre_constant(&a)? >= 0.05 * mu {
                    return Ok(a);
                }
            }
            Err(Error::Numerical("lame-like tensor kept failing its margin".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::{lh_margin, scalar_p_margin, strong_margin, SearchConfig};

    fn cfg(samples: usize) -> OracleConfig {
        OracleConfig {
            samples,
            ..Default::default()
        }
    }

    #[test]
    fn identity_strong() {
        let a = CoefficientTensor::identity(2, 2);
        let v = brute_margin(&a, 0.5, OracleKind::Strong, &OracleConfig { refine: false, ..cfg(100_000) }).unwrap();
        assert!(v >= 0.75 - 1e-12 && v < 0.76, "{v}");
    }

    #[test]
    fn rotated_scalar() {
        let a = CoefficientTensor::identity(3, 1).scaled(Complex64::from_polar(1.0, core::f64::consts::PI / 3.0));
        let v = brute_margin(&a, 0.0, OracleKind::Scalar, &cfg(10_000)).unwrap();
        assert!((v - 0.5).abs() < 0.01, "{v}");
        assert!((v - scalar_p_margin(&a, 2.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn generators_meet_their_margins() {
        for seed in 0..5 {
            let h = random_elliptic_tensor(2, 3, TensorStyle::HermitianPositive, seed).unwrap();
            let m = strong_margin(&h, &SearchConfig::default()).unwrap().value;
            assert!(m >= 0.1 - 1e-8, "{m}");
            let p = random_elliptic_tensor(3, 2, TensorStyle::LegendrePerturbed, seed).unwrap();
            let m = strong_margin(&p, &SearchConfig::default()).unwrap().value;
            assert!(m >= 0.05 - 1e-8, "{m}");
            let l = random_elliptic_tensor(2, 2, TensorStyle::LameLike, seed).unwrap();
            assert!(l.is_real());
            for i in 0..l.entries().len() {
                let (h, k, a, b) = (i / 8, (i / 4) % 2, (i / 2) % 2, i % 2);
                assert_eq!(l.get(h, k, a, b), l.get(k, h, b, a));
            }
            let s = random_elliptic_tensor(3, 1, TensorStyle::RealSymmetric, seed).unwrap();
            assert!(s.is_real() && crate::tensor::adjoint(&s) == s);
        }
        assert_eq!(
            random_elliptic_tensor(2, 2, TensorStyle::LegendrePerturbed, 9).unwrap(),
            random_elliptic_tensor(2, 2, TensorStyle::LegendrePerturbed, 9).unwrap()
        );
        assert!(random_elliptic_tensor(2, 3, TensorStyle::LameLike, 0).is_err());
    }

    #[test]
    fn agrees_with_eigen_search() {
        let oc = cfg(20_000);
        for seed in 0..3 {
            let a = random_elliptic_tensor(2, 2, TensorStyle::LegendrePerturbed, seed).unwrap();
            for &t in &[-0.6, 0.3, 0.8] {
                let s = strong_margin(&a, &SearchConfig { t, ..Default::default() }).unwrap().value;
                let b = brute_margin(&a, t, OracleKind::Strong, &oc).unwrap();
                assert!((s - b).abs() <= 1e-3, "seed {seed} t {t}: {s} vs {b}");
                let l = lh_margin(&a, &SearchConfig { t, ..Default::default() }).unwrap().value;
                let bl = brute_margin(&a, t, OracleKind::Lh, &oc).unwrap();
                assert!((l - bl).abs() <= 1e-3, "lh seed {seed} t {t}: {l} vs {bl}");
            }
        }
    }
}
