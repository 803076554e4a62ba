//! Integral p-ellipticity on lattice test functions.
//!
//! A test function lives on the nodes `i/(N-1)` of `[0,1]^n` and vanishes on
//! the boundary layer. Each cell contributes its averaged forward-difference
//! gradient `∇v`, the midpoint value `v̄` and the coefficient tensor at the
//! cell midpoint; the term `(v/|v|)∇|v|` is taken as the projection of `∇v`
//! onto `ω = v̄/|v̄|`, which is exactly the chain rule for `∇|v|`.
//!
//! A positive strong margin certifies the condition; the random falsifier
//! can only refute it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::par;
use crate::pointwise::{check_t, Kernel, Scalars};
use crate::rng;
use crate::tensor::{pair_raw, project_raw, CoefficientTensor, TensorField};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// Relative size below which `|v|` counts as zero.
pub const DEGENERATE: f64 = 1e-12;
pub const MIN_SIZE: usize = 8;
pub const MAX_SIZE: usize = 65;
pub const MAX_M: usize = 4;
/// Highest sine frequency per axis in random test functions.
pub const MAX_FREQ: usize = 4;

/// `C^m`-valued lattice function on `[0,1]^n`, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionGrid {
    n: usize,
    m: usize,
    size: usize,
    /// Row-major over lattice points (first axis slowest), `m` values each.
    values: Vec<Complex64>,
}

fn check_shape(n: usize, m: usize, size: usize) -> Result<()> {
    if !(2..=3).contains(&n) {
        return Err(Error::invalid("test functions support n = 2 or 3"));
    }
    if !(1..=MAX_M).contains(&m) {
        return Err(Error::invalid("test functions support 1 <= m <= 4"));
    }
    if !(MIN_SIZE..=MAX_SIZE).contains(&size) {
        return Err(Error::invalid("lattice size must be between 8 and 65 points per axis"));
    }
    Ok(())
}

impl TestFunctionGrid {
    pub fn new(n: usize, m: usize, size: usize, values: Vec<Complex64>) -> Result<Self> {
        check_shape(n, m, size)?;
        let count = size.pow(n as u32);
        if values.len() != count * m {
            return Err(Error::Dimension {
                what: "test function values",
                expected: count * m,
                found: values.len(),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("test function"));
        }
        let g = Self { n, m, size, values };
        for p in 0..count {
            if g.on_boundary(p) && g.value(p).iter().any(|z| *z != C0) {
                return Err(Error::invalid("test function must vanish on the boundary"));
            }
        }
        Ok(g)
    }

    /// Samples `f` at interior nodes; boundary nodes are set to zero.
    pub fn from_fn<F>(n: usize, m: usize, size: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<Complex64>,
    {
        check_shape(n, m, size)?;
        let count = size.pow(n as u32);
        let mut values = vec![C0; count * m];
        let mut g = Self {
            n,
            m,
            size,
            values: Vec::new(),
        };
        for p in 0..count {
            if g.on_boundary(p) {
                continue;
            }
            let v = f(&g.coords(p));
            if v.len() != m {
                return Err(Error::Dimension {
                    what: "test function value",
                    expected: m,
                    found: v.len(),
                });
            }
            values[p * m..(p + 1) * m].copy_from_slice(&v);
        }
        g.values = values;
        Self::new(n, m, size, g.values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, point: usize) -> &[Complex64] {
        &self.values[point * self.m..(point + 1) * self.m]
    }

    fn index_of(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.size + i)
    }

    fn multi_index(&self, mut point: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.n).rev() {
            out[axis] = point % self.size;
            point /= self.size;
        }
        out
    }

    pub fn coords(&self, point: usize) -> Vec<f64> {
        let h = 1.0 / (self.size as f64 - 1.0);
        self.multi_index(point)[..self.n].iter().map(|&i| i as f64 * h).collect()
    }

    fn on_boundary(&self, point: usize) -> bool {
        self.multi_index(point)[..self.n]
            .iter()
            .any(|&i| i == 0 || i + 1 == self.size)
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .chunks_exact(self.m)
            .map(|v| math::sqrt(v.iter().map(|z| z.norm_sqr()).sum()))
            .fold(0.0, f64::max)
    }

    fn cell_count(&self) -> usize {
        (self.size - 1).pow(self.n as u32)
    }

    /// Midpoint value, gradient (`grad[h*m + α] = ∂_h v^α`) and midpoint
    /// coordinates of cell `c`.
    fn cell(&self, c: usize, mid: &mut [Complex64], grad: &mut [Complex64], x: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let cells = self.size - 1;
        let mut base = [0usize; 3];
        let mut rem = c;
        for axis in (0..n).rev() {
            base[axis] = rem % cells;
            rem /= cells;
        }
        let h = 1.0 / cells as f64;
        for axis in 0..n {
            x[axis] = (base[axis] as f64 + 0.5) * h;
        }
        mid.iter_mut().for_each(|z| *z = C0);
        grad.iter_mut().for_each(|z| *z = C0);
        let corners = 1usize << n;
        let mut idx = [0usize; 3];
        for corner in 0..corners {
            for axis in 0..n {
                idx[axis] = base[axis] + ((corner >> axis) & 1);
            }
            let v = self.value(self.index_of(&idx[..n]));
            for a in 0..m {
                mid[a] += v[a];
            }
            for axis in 0..n {
                let sign = if (corner >> axis) & 1 == 1 { 1.0 } else { -1.0 };
                for a in 0..m {
                    grad[axis * m + a] += v[a] * sign;
                }
            }
        }
        let inv = 1.0 / corners as f64;
        mid.iter_mut().for_each(|z| *z *= inv);
        // each axis difference is averaged over 2^(n-1) edges
        let scale = 2.0 * inv / h;
        grad.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Tensor used for each cell of `grid`.
fn cell_tensors<'a>(field: &'a TensorField, grid: &TestFunctionGrid) -> Result<Vec<&'a CoefficientTensor>> {
    if field.n() != grid.n() || field.m() != grid.m() {
        return Err(Error::Dimension {
            what: "field vs test function shape",
            expected: field.n() * field.m(),
            found: grid.n() * grid.m(),
        });
    }
    let cells = grid.cell_count();
    match field {
        TensorField::Constant(a) => Ok(vec![a; cells]),
        TensorField::Sampled(s) => {
            let (mut mid, mut grad) = (vec![C0; grid.m], vec![C0; grid.n * grid.m]);
            let mut x = vec![0.0; grid.n];
            let mut out = Vec::with_capacity(cells);
            for c in 0..cells {
                grid.cell(c, &mut mid, &mut grad, &mut x);
                out.push(&s.samples()[s.nearest_index(&x)]);
            }
            Ok(out)
        }
    }
}

/// Unit direction of `v̄`, or zero where `|v̄|` is negligible.
fn direction(mid: &[Complex64], cutoff: f64, omega: &mut [Complex64]) -> f64 {
    let len = math::sqrt(mid.iter().map(|z| z.norm_sqr()).sum());
    if len < cutoff || len == 0.0 {
        omega.iter_mut().for_each(|z| *z = C0);
    } else {
        for (o, v) in omega.iter_mut().zip(mid) {
            *o = v / len;
        }
    }
    len
}

/// `Re Σ⟨A(∇v - t(v/|v|)∇|v|), ∇v + t(v/|v|)∇|v|⟩ / Σ|∇v|²` with `t = 1 - 2/p`.
pub fn discrete_quotient(field: &TensorField, p: f64, v: &TestFunctionGrid) -> Result<f64> {
    let t = crate::range::t_of_p(p)?;
    check_t(t)?;
    quotient_t(field, t, v)
}

fn quotient_t(field: &TensorField, t: f64, v: &TestFunctionGrid) -> Result<f64> {
    let tensors = cell_tensors(field, v)?;
    let vmax = v.max_abs();
    if vmax == 0.0 {
        return Err(Error::invalid("test function is identically zero"));
    }
    let cutoff = DEGENERATE * vmax;
    let (n, m) = (v.n, v.m);
    let (mut mid, mut grad, mut omega) = (vec![C0; m], vec![C0; n * m], vec![C0; m]);
    let mut x = vec![0.0; n];
    let (mut num, mut den) = (0.0, 0.0);
    for (c, a) in tensors.iter().enumerate() {
        v.cell(c, &mut mid, &mut grad, &mut x);
        direction(&mid, cutoff, &mut omega);
        num += Kernel::new(a.entries(), n, m, t).form(&grad, &omega);
        den += grad.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::Numerical("non-finite quotient".into()));
    }
    if den == 0.0 {
        return Err(Error::invalid("test function has zero discrete gradient"));
    }
    Ok(num / den)
}

/// One term `c Π_d sin(π k_d x_d)` of a sine test function.
#[derive(Debug, Clone, PartialEq)]
pub struct SineTerm {
    pub freq: [usize; 3],
    pub coeff: Vec<Complex64>,
}

/// Random test functions built from tensor-product sines.
///
/// Even trials draw every mode with `1 <= k_d <= 4`, weighted by `1/|k|²`.
/// Odd trials put a coefficient `D·ω` with `2 <= D <= 3.5` on the lowest
/// mode and a unit coefficient on one mode that oscillates along a single
/// axis with frequency in `[MIN_OSC, MAX_OSC]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineFamily {
    pub n: usize,
    pub m: usize,
    pub size: usize,
    pub scalars: Scalars,
}

/// Axis frequency range of the oscillating mode in odd trials.
pub const MIN_OSC: usize = 10;
pub const MAX_OSC: usize = 14;

impl SineFamily {
    fn low_modes(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..MAX_FREQ.pow(self.n as u32)).map(move |j| {
            let mut out = [0; 3];
            let mut rem = j;
            for axis in (0..self.n).rev() {
                out[axis] = rem % MAX_FREQ + 1;
                rem /= MAX_FREQ;
            }
            out
        })
    }

    fn draw_scalar(&self, r: &mut rand_chacha::ChaCha8Rng) -> Complex64 {
        let re = rng::gaussian(r);
        let im = match self.scalars {
            Scalars::Complex => rng::gaussian(r),
            Scalars::Real => 0.0,
        };
        Complex64::new(re, im)
    }

    fn draw_vector(&self, r: &mut rand_chacha::ChaCha8Rng, scale: f64) -> Vec<Complex64> {
        (0..self.m).map(|_| self.draw_scalar(r) * scale).collect()
    }

    fn unit(&self, r: &mut rand_chacha::ChaCha8Rng, scale: f64) -> Vec<Complex64> {
        let w = self.scalars.width();
        self.scalars
            .to_complex(&rng::unit_vector(r, w * self.m))
            .into_iter()
            .map(|z| z * scale)
            .collect()
    }

    fn pick(r: &mut rand_chacha::ChaCha8Rng, lo: usize, hi: usize) -> usize {
        (lo + (rng::uniform(r) * (hi - lo + 1) as f64) as usize).min(hi)
    }

    /// Terms of trial `index`; depends only on `(seed, index)`.
    pub fn terms(&self, seed: u64, index: u64) -> Vec<SineTerm> {
        let mut r = rng::substream(seed, rng::STREAM_TRIALS, index);
        let modes: Vec<[usize; 3]> = self.low_modes().collect();
        if index % 2 == 0 {
            return modes
                .into_iter()
                .map(|freq| {
                    let w: usize = freq[..self.n].iter().map(|k| k * k).sum();
                    SineTerm {
                        freq,
                        coeff: self.draw_vector(&mut r, 1.0 / w as f64),
                    }
                })
                .collect();
        }
        let d = 2.0 + 1.5 * rng::uniform(&mut r);
        let mut out = vec![SineTerm {
            freq: [1; 3],
            coeff: self.unit(&mut r, d),
        }];
        let axis = Self::pick(&mut r, 0, self.n - 1);
        let mut freq = [1; 3];
        freq[axis] = Self::pick(&mut r, MIN_OSC, MAX_OSC);
        out.push(SineTerm {
            freq,
            coeff: self.unit(&mut r, 1.0),
        });
        out
    }

    pub fn grid(&self, terms: &[SineTerm]) -> Result<TestFunctionGrid> {
        let (n, m, size) = (self.n, self.m, self.size);
        let top = terms
            .iter()
            .flat_map(|t| t.freq[..n].iter().copied())
            .max()
            .unwrap_or(1);
        if terms.iter().any(|t| t.coeff.len() != m || t.freq[..n].contains(&0)) {
            return Err(Error::invalid("sine terms need m coefficients and positive frequencies"));
        }
        let h = 1.0 / (size as f64 - 1.0);
        let table: Vec<f64> = (1..=top)
            .flat_map(|k| (0..size).map(move |i| math::sin(core::f64::consts::PI * (k * i) as f64 * h)))
            .collect();
        let count = size.pow(n as u32);
        let mut values = vec![C0; count * m];
        for (point, out) in values.chunks_exact_mut(m).enumerate() {
            let mut idx = [0usize; 3];
            let mut rem = point;
            for axis in (0..n).rev() {
                idx[axis] = rem % size;
                rem /= size;
            }
            if idx[..n].iter().any(|&i| i == 0 || i + 1 == size) {
                continue;
            }
            for term in terms {
                let mut s = 1.0;
                for axis in 0..n {
                    s *= table[(term.freq[axis] - 1) * size + idx[axis]];
                }
                for (o, c) in out.iter_mut().zip(&term.coeff) {
                    *o += c * s;
                }
            }
        }
        TestFunctionGrid::new(n, m, size, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub grid: TestFunctionGrid,
    pub quotient: f64,
    pub p: f64,
    pub seed: u64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Lattice points per axis.
    pub size: usize,
    /// Test-function scalars; `None` follows the field.
    pub scalars: Option<Scalars>,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            size: 33,
            scalars: None,
        }
    }
}

fn family(field: &TensorField, size: usize, scalars: Option<Scalars>) -> SineFamily {
    SineFamily {
        n: field.n(),
        m: field.m(),
        size,
        scalars: scalars.unwrap_or(if field.is_real() {
            Scalars::Real
        } else {
            Scalars::Complex
        }),
    }
}

pub fn falsify_integral(field: &TensorField, p: f64, trials: usize, seed: u64) -> Result<Option<Counterexample>> {
    falsify_integral_with(
        field,
        p,
        &FalsifyConfig {
            trials,
            seed,
            ..Default::default()
        },
    )
}

/// First trial (lowest index) with `Q(v) <= 0`, if any. `None` proves nothing.
pub fn falsify_integral_with(field: &TensorField, p: f64, cfg: &FalsifyConfig) -> Result<Option<Counterexample>> {
    let t = crate::range::t_of_p(p)?;
    check_t(t)?;
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    check_shape(field.n(), field.m(), cfg.size)?;
    let fam = family(field, cfg.size, cfg.scalars);
    const CHUNK: usize = 32;
    let mut start = 0;
    while start < cfg.trials {
        let len = CHUNK.min(cfg.trials - start);
        let results = par::map_indexed(len, |i| -> Result<Option<(f64, TestFunctionGrid)>> {
            let trial = (start + i) as u64;
            let grid = fam.grid(&fam.terms(cfg.seed, trial))?;
            let q = quotient_t(field, t, &grid)?;
            Ok(if q <= 0.0 { Some((q, grid)) } else { None })
        });
        for (i, r) in results.into_iter().enumerate() {
            if let Some((quotient, grid)) = r? {
                return Ok(Some(Counterexample {
                    grid,
                    quotient,
                    p,
                    seed: cfg.seed,
                    trial: start + i,
                }));
            }
        }
        start += len;
    }
    Ok(None)
}

/// Smallest sampled `Re Σ⟨A∇u, ∇(|u|^{p-2}u)⟩ / Σ|u|^{p-2}|∇u|²`: an upper
/// bound on the best constant.
pub fn lambda_p_estimate(field: &TensorField, p: f64, trials: usize, seed: u64) -> Result<f64> {
    lambda_p_estimate_with(
        field,
        p,
        &FalsifyConfig {
            trials,
            seed,
            ..Default::default()
        },
    )
}

pub fn lambda_p_estimate_with(field: &TensorField, p: f64, cfg: &FalsifyConfig) -> Result<f64> {
    let t = crate::range::t_of_p(p)?;
    check_t(t)?;
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    check_shape(field.n(), field.m(), cfg.size)?;
    let fam = family(field, cfg.size, cfg.scalars);
    let values = par::map_indexed(cfg.trials, |i| {
        let grid = fam.grid(&fam.terms(cfg.seed, i as u64))?;
        lambda_quotient(field, p, &grid)
    });
    let mut best = f64::INFINITY;
    for v in values {
        best = best.min(v?);
    }
    Ok(best)
}

/// The `λ_p` quotient for one test function; degenerate cells are skipped.
pub fn lambda_quotient(field: &TensorField, p: f64, u: &TestFunctionGrid) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid("p must be in (1, inf)"));
    }
    let tensors = cell_tensors(field, u)?;
    let umax = u.max_abs();
    if umax == 0.0 {
        return Err(Error::invalid("test function is identically zero"));
    }
    let cutoff = DEGENERATE * umax;
    let (n, m) = (u.n, u.m);
    let (mut mid, mut grad, mut omega) = (vec![C0; m], vec![C0; n * m], vec![C0; m]);
    let mut zeta = vec![C0; n * m];
    let mut x = vec![0.0; n];
    let (mut num, mut den) = (0.0, 0.0);
    for (c, a) in tensors.iter().enumerate() {
        u.cell(c, &mut mid, &mut grad, &mut x);
        let len = direction(&mid, cutoff, &mut omega);
        if len < cutoff || len == 0.0 {
            continue;
        }
        // ∇(|u|^{p-2}u) = |u|^{p-2}(∇u + (p-2) P_ω ∇u)
        project_raw(m, &grad, &omega, &mut zeta);
        let target: Vec<Complex64> = grad.iter().zip(&zeta).map(|(g, z)| g + z * (p - 2.0)).collect();
        let w = math::powf(len / umax, p - 2.0);
        num += w * pair_raw(a.entries(), n, m, &grad, &target);
        den += w * grad.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    if !num.is_finite() || !den.is_finite() || den == 0.0 {
        return Err(Error::Numerical("degenerate λ_p quotient".into()));
    }
    Ok(num / den)
}

/// A value `u ∈ C^m` with gradient `grad[h*m + α] = ∂_h u^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSample {
    pub u: Vec<Complex64>,
    pub grad: Vec<Complex64>,
}

impl PowerSample {
    fn parts(&self) -> Result<(f64, Vec<f64>)> {
        let m = self.u.len();
        if m == 0 || self.grad.len() % m != 0 || self.grad.is_empty() {
            return Err(Error::invalid("gradient length must be a positive multiple of m"));
        }
        let len = math::sqrt(self.u.iter().map(|z| z.norm_sqr()).sum());
        let n = self.grad.len() / m;
        // ∂_h|u| = Re Σ u conj(∂_h u) / |u|
        let d_abs = (0..n)
            .map(|h| {
                self.u
                    .iter()
                    .zip(&self.grad[h * m..(h + 1) * m])
                    .map(|(a, b)| (a * b.conj()).re)
                    .sum::<f64>()
                    / len
            })
            .collect();
        Ok((len, d_abs))
    }

    /// `|∇(|u|^{(p-2)/2} u)|² / |u|^{p-2}`, from the product rule.
    fn power_gradient_sq(&self, p: f64, len: f64, d_abs: &[f64]) -> f64 {
        let m = self.u.len();
        let s = (p - 2.0) / 2.0;
        let mut acc = 0.0;
        for (h, &dh) in d_abs.iter().enumerate() {
            for a in 0..m {
                acc += (self.grad[h * m + a] + self.u[a] / len * (s * dh)).norm_sqr();
            }
        }
        acc
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("p must be in (1, inf)"))
    }
}

/// `max |‖∇(|u|^{(p-2)/2}u)‖² - |u|^{p-2}(|∇u|² + (p²/4 - 1)|∇|u||²)|` over
/// samples with `u ≠ 0`.
pub fn power_identity_residual(samples: &[PowerSample], p: f64) -> Result<f64> {
    check_p(p)?;
    let mut worst = 0.0f64;
    for (i, s) in samples.iter().enumerate() {
        let (len, d_abs) = s.parts().map_err(|e| e.at_sample(i))?;
        if len == 0.0 {
            continue;
        }
        let lhs = s.power_gradient_sq(p, len, &d_abs);
        let grad_sq: f64 = s.grad.iter().map(|z| z.norm_sqr()).sum();
        let abs_sq: f64 = d_abs.iter().map(|d| d * d).sum();
        let rhs = grad_sq + (p * p / 4.0 - 1.0) * abs_sq;
        worst = worst.max(math::powf(len, p - 2.0) * (lhs - rhs).abs());
    }
    Ok(worst)
}

/// `(c₁, c₂)` with `c₁|u|^{p-2}|∇u|² <= |∇(|u|^{(p-2)/2}u)|² <= c₂|u|^{p-2}|∇u|²`.
pub fn power_bounds(p: f64) -> (f64, f64) {
    let q = p * p / 4.0;
    if p >= 2.0 {
        (1.0, q)
    } else {
        (q, 1.0)
    }
}

/// True when every sample with `u ≠ 0` satisfies the two-sided bound, up to
/// a relative rounding slack of `1e-12`.
pub fn power_bounds_hold(samples: &[PowerSample], p: f64) -> Result<bool> {
    check_p(p)?;
    let (c1, c2) = power_bounds(p);
    for (i, s) in samples.iter().enumerate() {
        let (len, d_abs) = s.parts().map_err(|e| e.at_sample(i))?;
        if len == 0.0 {
            continue;
        }
        let lhs = s.power_gradient_sq(p, len, &d_abs);
        let base: f64 = s.grad.iter().map(|z| z.norm_sqr()).sum();
        let slack = 1e-12 * base;
        if lhs < c1 * base - slack || lhs > c2 * base + slack {
            return Ok(false);
        }
    }
    Ok(true)
}
