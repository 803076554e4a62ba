//! Pointwise p-ellipticity forms and their margins.
//!
//! With `t = 1 - 2/p` the strong form is
//! `f(ξ, ω) = Re⟨A(ξ - t ξ(ω)), ξ + t ξ(ω)⟩`. For fixed `ω` it is a real
//! quadratic form in the real coordinates of `ξ`, so the infimum over
//! `|ξ| = 1` is the smallest eigenvalue of an explicitly assembled
//! symmetric matrix. Only the `ω` sphere (and the frequency sphere `q` for
//! the Legendre-Hadamard form) is searched heuristically, by multistart
//! Riemannian descent. Margins are therefore upper bounds on the true
//! infimum and are never reported as certified.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::math;
use crate::par;
use crate::rng;
use crate::tensor::{pair_raw, project_raw, CoefficientTensor, GradientState, UnitState};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Scalar field of the test objects `ξ, ω, η`.
///
/// Real coefficient tensors describe real systems, whose conditions are
/// tested over real tensors only; complex tensors use complex test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scalars {
    Real,
    Complex,
}

impl Scalars {
    pub fn of_tensor(a: &CoefficientTensor) -> Self {
        if a.is_real() {
            Scalars::Real
        } else {
            Scalars::Complex
        }
    }

    /// Real coordinates per complex component.
    #[inline]
    pub(crate) fn width(self) -> usize {
        match self {
            Scalars::Real => 1,
            Scalars::Complex => 2,
        }
    }

    #[inline]
    pub(crate) fn unit(self, coord: usize) -> Complex64 {
        if self == Scalars::Complex && coord % 2 == 1 {
            I
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    pub(crate) fn to_complex(self, x: &[f64]) -> Vec<Complex64> {
        match self {
            Scalars::Real => x.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            Scalars::Complex => x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// `t = 1 - 2/p`, must satisfy `|t| < 1`.
    pub t: f64,
    /// Number of seeded random starts on the outer sphere(s).
    pub outer_starts: usize,
    /// Maximum descent iterations per refined start.
    pub refine_iters: usize,
    /// How many of the best screened starts get refined.
    pub refine_top: usize,
    pub seed: u64,
    /// Relative off-diagonal tolerance of the Jacobi eigen solver.
    pub eig_tol: f64,
    /// Test-set scalars; `None` picks them from the tensor.
    pub scalars: Option<Scalars>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            t: 0.0,
            outer_starts: 64,
            refine_iters: 100,
            refine_top: 8,
            seed: 0,
            eig_tol: 1e-10,
            scalars: None,
        }
    }
}

impl SearchConfig {
    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        check_t(self.t)?;
        if self.outer_starts == 0 {
            return Err(Error::invalid("outer_starts must be at least 1"));
        }
        if !(self.eig_tol > 0.0) {
            return Err(Error::invalid("eig_tol must be positive"));
        }
        Ok(())
    }

    pub(crate) fn scalars_for(&self, a: &CoefficientTensor) -> Scalars {
        self.scalars.unwrap_or_else(|| Scalars::of_tensor(a))
    }
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("t = 1 - 2/p must satisfy |t| < 1 (p in (1, inf))"))
    }
}

/// Minimizing test objects of a margin search.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Strong {
        xi: GradientState,
        omega: UnitState,
    },
    LegendreHadamard {
        eta: Vec<Complex64>,
        omega: UnitState,
        q: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginResult {
    /// Estimated infimum of the normalized form (an upper bound).
    pub value: f64,
    pub witness: Witness,
    /// Number of inner eigen solves plus form evaluations.
    pub evaluations: usize,
    /// Always false: the outer search is heuristic.
    pub certified: bool,
}

/// `Re⟨A(ξ - tξ(ω)), ξ + tξ(ω)⟩`.
pub fn strong_form_value(
    a: &CoefficientTensor,
    t: f64,
    xi: &GradientState,
    omega: &UnitState,
) -> Result<f64> {
    check_t(t)?;
    check_omega(a.m(), omega)?;
    if xi.n() != a.n() || xi.m() != a.m() {
        return Err(Error::Dimension {
            what: "gradient state shape",
            expected: a.n() * a.m(),
            found: xi.n() * xi.m(),
        });
    }
    let kernel = Kernel::new(a.entries(), a.n(), a.m(), t);
    Ok(kernel.form(xi.comps(), omega.comps()))
}

/// `Re⟨M_q(η - tζ), η + tζ⟩` with `M_q = Σ A^{hk} q_h q_k` and
/// `ζ = ω Re⟨ω, η⟩`. Equal to the strong form at the rank-one state `q ⊗ η`.
pub fn lh_form_value(
    a: &CoefficientTensor,
    t: f64,
    eta: &[Complex64],
    omega: &UnitState,
    q: &[f64],
) -> Result<f64> {
    check_t(t)?;
    check_omega(a.m(), omega)?;
    if eta.len() != a.m() {
        return Err(Error::Dimension {
            what: "η length",
            expected: a.m(),
            found: eta.len(),
        });
    }
    if q.len() != a.n() {
        return Err(Error::Dimension {
            what: "q length",
            expected: a.n(),
            found: q.len(),
        });
    }
    let qn = math::norm(q);
    if !(qn - 1.0).abs().le(&1e-10) {
        return Err(Error::invalid("q must be a unit vector"));
    }
    if eta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("η"));
    }
    let mq = symbol(a, q);
    let kernel = Kernel::new(&mq, 1, a.m(), t);
    Ok(kernel.form(eta, omega.comps()))
}

fn check_omega(m: usize, omega: &UnitState) -> Result<()> {
    if omega.m() != m {
        return Err(Error::Dimension {
            what: "ω length",
            expected: m,
            found: omega.m(),
        });
    }
    if (omega.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("ω must have unit norm"));
    }
    Ok(())
}

/// `M_q = Σ_{h,k} A^{hk} q_h q_k` as a row-major `m x m` matrix.
pub(crate) fn symbol(a: &CoefficientTensor, q: &[f64]) -> Vec<Complex64> {
    let (n, m) = (a.n(), a.m());
    let mut out = vec![C0; m * m];
    let e = a.entries();
    for h in 0..n {
        for k in 0..n {
            let w = q[h] * q[k];
            if w == 0.0 {
                continue;
            }
            let base = (h * n + k) * m * m;
            for (o, v) in out.iter_mut().zip(&e[base..base + m * m]) {
                *o += v * w;
            }
        }
    }
    out
}

/// The strong form for one tensor block and fixed `t`.
pub(crate) struct Kernel<'a> {
    entries: &'a [Complex64],
    n: usize,
    m: usize,
    t: f64,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(entries: &'a [Complex64], n: usize, m: usize, t: f64) -> Self {
        Self { entries, n, m, t }
    }

    fn pair(&self, x: &[Complex64], y: &[Complex64]) -> f64 {
        pair_raw(self.entries, self.n, self.m, x, y)
    }

    /// `(a, b) = (ξ - tξ(ω), ξ + tξ(ω))`.
    fn split(&self, xi: &[Complex64], omega: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut z = vec![C0; xi.len()];
        project_raw(self.m, xi, omega, &mut z);
        let a = xi.iter().zip(&z).map(|(x, z)| x - z * self.t).collect();
        let b = xi.iter().zip(&z).map(|(x, z)| x + z * self.t).collect();
        (a, b)
    }

    pub(crate) fn form(&self, xi: &[Complex64], omega: &[Complex64]) -> f64 {
        let (a, b) = self.split(xi, omega);
        self.pair(&a, &b)
    }

    /// Symmetric matrix of `ξ ↦ f(ξ, ω)` in the real coordinates of `ξ`.
    fn matrix(&self, omega: &[Complex64], scalars: Scalars) -> (Vec<f64>, usize) {
        let nm = self.n * self.m;
        let w = scalars.width();
        let dim = w * nm;
        let mut left = Vec::with_capacity(dim);
        let mut right = Vec::with_capacity(dim);
        let mut e = vec![C0; nm];
        for i in 0..dim {
            e.iter_mut().for_each(|z| *z = C0);
            e[i / w] = scalars.unit(i);
            let (a, b) = self.split(&e, omega);
            left.push(self.contract_left(&a));
            right.push(b);
        }
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let v: f64 = left[i]
                    .iter()
                    .zip(&right[j])
                    .map(|(h, b)| (h * b.conj()).re)
                    .sum();
                mat[i * dim + j] += 0.5 * v;
                mat[j * dim + i] += 0.5 * v;
            }
        }
        (mat, dim)
    }

    /// `H_k^β = Σ_{h,α} A^{hk}_{αβ} x_h^α`, so that `B(x, y) = Re Σ H ȳ`.
    fn contract_left(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![C0; n * m];
        for h in 0..n {
            for al in 0..m {
                let xa = x[h * m + al];
                if xa == C0 {
                    continue;
                }
                for k in 0..n {
                    let row = ((h * n + k) * m + al) * m;
                    for be in 0..m {
                        out[k * m + be] += self.entries[row + be] * xa;
                    }
                }
            }
        }
        out
    }

    /// `G_h^α = Σ_{k,β} A^{hk}_{αβ} conj(y_k^β)`, so that `B(x, y) = Re Σ x G`.
    fn contract_right(&self, y: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![C0; n * m];
        for h in 0..n {
            for al in 0..m {
                let mut acc = C0;
                for k in 0..n {
                    let row = ((h * n + k) * m + al) * m;
                    for be in 0..m {
                        acc += self.entries[row + be] * y[k * m + be].conj();
                    }
                }
                out[h * m + al] = acc;
            }
        }
        out
    }

    /// Euclidean gradient of `ω ↦ f(ξ, ω)` in the real coordinates of `ω`.
    fn omega_gradient(&self, xi: &[Complex64], omega: &[Complex64], scalars: Scalars, out: &mut [f64]) {
        let (n, m, t) = (self.n, self.m, self.t);
        let (a, b) = self.split(xi, omega);
        let g = self.contract_right(&b);
        let h = self.contract_left(&a);
        let s: Vec<f64> = (0..n)
            .map(|hh| {
                (0..m)
                    .map(|be| (omega[be] * xi[hh * m + be].conj()).re)
                    .sum()
            })
            .collect();
        let w = scalars.width();
        let mut dz = vec![C0; n * m];
        for (coord, o) in out.iter_mut().enumerate().take(w * m) {
            let beta = coord / w;
            let c = scalars.unit(coord);
            for hh in 0..n {
                let ds = (c * xi[hh * m + beta].conj()).re;
                for al in 0..m {
                    let mut v = omega[al] * ds;
                    if al == beta {
                        v += c * s[hh];
                    }
                    dz[hh * m + al] = v;
                }
            }
            // dF = -t B(dζ, b) + t B(a, dζ)
            let left: f64 = dz.iter().zip(&g).map(|(d, g)| (d * g).re).sum();
            let right: f64 = h.iter().zip(&dz).map(|(h, d)| (h * d.conj()).re).sum();
            *o = t * (right - left);
        }
    }

    /// `c_{hk} = Re Σ_{αβ} A^{hk}_{αβ} a^α conj(b^β)` for `m`-vectors `a, b`
    /// (the `q`-derivative weights of the symbol form).
    fn symbol_weights(full: &CoefficientTensor, a: &[Complex64], b: &[Complex64]) -> Vec<f64> {
        let (n, m) = (full.n(), full.m());
        let e = full.entries();
        let mut out = vec![0.0; n * n];
        for h in 0..n {
            for k in 0..n {
                let base = (h * n + k) * m * m;
                let mut acc = 0.0;
                for al in 0..m {
                    for be in 0..m {
                        acc += (e[base + al * m + be] * a[al] * b[be].conj()).re;
                    }
                }
                out[h * n + k] = acc;
            }
        }
        out
    }
}

/// Outer problem: minimize `λ_min(x)` over a product of unit spheres.
pub(crate) trait OuterProblem: Sync {
    /// `(offset, len)` of each sphere block in the outer coordinates.
    fn blocks(&self) -> &[(usize, usize)];
    fn outer_dim(&self) -> usize;
    /// Smallest eigenpair of the inner quadratic form at outer point `x`.
    fn inner(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
    /// Inner form at unit inner vector `v` and outer point `x`.
    fn value(&self, x: &[f64], v: &[f64]) -> f64;
    /// Euclidean gradient in `x` of [`Self::value`].
    fn gradient(&self, x: &[f64], v: &[f64], out: &mut [f64]);
}

pub(crate) struct StrongProblem<'a> {
    kernel: Kernel<'a>,
    scalars: Scalars,
    eig_tol: f64,
    blocks: [(usize, usize); 1],
}

impl<'a> StrongProblem<'a> {
    pub(crate) fn new(a: &'a CoefficientTensor, t: f64, scalars: Scalars, eig_tol: f64) -> Self {
        let dim = scalars.width() * a.m();
        Self {
            kernel: Kernel::new(a.entries(), a.n(), a.m(), t),
            scalars,
            eig_tol,
            blocks: [(0, dim)],
        }
    }
}

impl OuterProblem for StrongProblem<'_> {
    fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    fn outer_dim(&self) -> usize {
        self.blocks[0].1
    }

    fn inner(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let omega = self.scalars.to_complex(x);
        let (mat, dim) = self.kernel.matrix(&omega, self.scalars);
        eigen::min_eigenpair(&mat, dim, self.eig_tol)
    }

    fn value(&self, x: &[f64], v: &[f64]) -> f64 {
        let omega = self.scalars.to_complex(x);
        let xi = self.scalars.to_complex(v);
        self.kernel.form(&xi, &omega)
    }

    fn gradient(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let omega = self.scalars.to_complex(x);
        let xi = self.scalars.to_complex(v);
        self.kernel.omega_gradient(&xi, &omega, self.scalars, out);
    }
}

pub(crate) struct LhProblem<'a> {
    a: &'a CoefficientTensor,
    t: f64,
    scalars: Scalars,
    eig_tol: f64,
    blocks: [(usize, usize); 2],
}

impl<'a> LhProblem<'a> {
    pub(crate) fn new(a: &'a CoefficientTensor, t: f64, scalars: Scalars, eig_tol: f64) -> Self {
        let wm = scalars.width() * a.m();
        Self {
            a,
            t,
            scalars,
            eig_tol,
            blocks: [(0, wm), (wm, a.n())],
        }
    }

    fn parts<'x>(&self, x: &'x [f64]) -> (Vec<Complex64>, &'x [f64]) {
        let wm = self.blocks[0].1;
        (self.scalars.to_complex(&x[..wm]), &x[wm..])
    }
}

impl OuterProblem for LhProblem<'_> {
    fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    fn outer_dim(&self) -> usize {
        self.blocks[1].0 + self.blocks[1].1
    }

    fn inner(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (omega, q) = self.parts(x);
        let mq = symbol(self.a, q);
        let kernel = Kernel::new(&mq, 1, self.a.m(), self.t);
        let (mat, dim) = kernel.matrix(&omega, self.scalars);
        eigen::min_eigenpair(&mat, dim, self.eig_tol)
    }

    fn value(&self, x: &[f64], v: &[f64]) -> f64 {
        let (omega, q) = self.parts(x);
        let mq = symbol(self.a, q);
        let eta = self.scalars.to_complex(v);
        Kernel::new(&mq, 1, self.a.m(), self.t).form(&eta, &omega)
    }

    fn gradient(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let (omega, q) = self.parts(x);
        let mq = symbol(self.a, q);
        let eta = self.scalars.to_complex(v);
        let kernel = Kernel::new(&mq, 1, self.a.m(), self.t);
        let wm = self.blocks[0].1;
        kernel.omega_gradient(&eta, &omega, self.scalars, &mut out[..wm]);
        let (a, b) = kernel.split(&eta, &omega);
        let c = Kernel::symbol_weights(self.a, &a, &b);
        let n = self.a.n();
        for j in 0..n {
            out[wm + j] = (0..n).map(|k| (c[j * n + k] + c[k * n + j]) * q[k]).sum();
        }
    }
}

/// Best point of a multistart search.
#[derive(Debug, Clone)]
pub(crate) struct OuterMin {
    pub value: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub evaluations: usize,
}

fn retract(blocks: &[(usize, usize)], x: &mut [f64]) {
    for &(off, len) in blocks {
        let b = &mut x[off..off + len];
        if !math::normalize(b) {
            b.iter_mut().for_each(|c| *c = 0.0);
            b[0] = 1.0;
        }
    }
}

fn tangent(blocks: &[(usize, usize)], x: &[f64], g: &mut [f64]) {
    for &(off, len) in blocks {
        let dot: f64 = (off..off + len).map(|i| x[i] * g[i]).sum();
        for i in off..off + len {
            g[i] -= dot * x[i];
        }
    }
}

/// Riemannian gradient descent with Armijo backtracking on the smooth
/// joint form; after each accepted step the inner vector is re-minimized,
/// so the tracked eigenvalue never increases.
fn refine<P: OuterProblem>(p: &P, mut x: Vec<f64>, iters: usize) -> Result<OuterMin> {
    let blocks = p.blocks();
    retract(blocks, &mut x);
    let (mut lam, mut v) = p.inner(&x)?;
    let mut evals = 1;
    let mut g = vec![0.0; x.len()];
    let mut trial = vec![0.0; x.len()];
    let mut step = 0.5;
    let mut stalls = 0;
    for _ in 0..iters {
        p.gradient(&x, &v, &mut g);
        tangent(blocks, &x, &mut g);
        let gn2: f64 = g.iter().map(|c| c * c).sum();
        if math::sqrt(gn2) <= 1e-11 * (1.0 + lam.abs()) {
            break;
        }
        let mut accepted = None;
        while step > 1e-14 {
            for ((tr, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *tr = xi - step * gi;
            }
            retract(blocks, &mut trial);
            let f = p.value(&trial, &v);
            evals += 1;
            if f <= lam - 1e-4 * step * gn2 {
                accepted = Some(f);
                break;
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            break;
        }
        let (lam_new, v_new) = p.inner(&trial)?;
        evals += 1;
        let gain = lam - lam_new;
        x.copy_from_slice(&trial);
        lam = lam_new;
        v = v_new;
        step = (step * 2.0).min(4.0);
        if gain <= 1e-15 * (1.0 + lam.abs()) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok(OuterMin {
        value: lam,
        x,
        v,
        evaluations: evals,
    })
}

/// Seeded starts plus `warm`, screened by the inner eigenvalue; warm starts
/// and the best `refine_top` seeded starts are refined.
pub(crate) fn multistart<P: OuterProblem>(
    p: &P,
    cfg: &SearchConfig,
    warm: &[Vec<f64>],
) -> Result<OuterMin> {
    let dim = p.outer_dim();
    let blocks = p.blocks();
    let seeded: Vec<Vec<f64>> = (0..cfg.outer_starts)
        .map(|i| {
            let mut r = rng::substream(cfg.seed, rng::STREAM_STARTS, i as u64);
            let mut x = vec![0.0; dim];
            for &(off, len) in blocks {
                x[off..off + len].copy_from_slice(&rng::unit_vector(&mut r, len));
            }
            x
        })
        .collect();
    let screened = par::map_indexed(seeded.len(), |i| p.inner(&seeded[i]).map(|(l, _)| l));
    let mut order = Vec::with_capacity(seeded.len());
    for (i, s) in screened.into_iter().enumerate() {
        order.push((s?, i));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut starts: Vec<Vec<f64>> = warm.iter().filter(|w| w.len() == dim).cloned().collect();
    starts.extend(
        order
            .iter()
            .take(cfg.refine_top.max(1))
            .map(|&(_, i)| seeded[i].clone()),
    );
    let results = par::map_indexed(starts.len(), |i| refine(p, starts[i].clone(), cfg.refine_iters));
    let mut best: Option<OuterMin> = None;
    let mut evals = seeded.len();
    for r in results {
        let r = r?;
        evals += r.evaluations;
        // ties keep the earlier start
        if best.as_ref().map_or(true, |b| r.value < b.value) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one refined start");
    best.evaluations = evals;
    Ok(best)
}

/// Estimated `inf_{|ξ|=|ω|=1} f(ξ, ω)` at `t = cfg.t`.
pub fn strong_margin(a: &CoefficientTensor, cfg: &SearchConfig) -> Result<MarginResult> {
    strong_margin_warm(a, cfg, &[]).map(|(r, _)| r)
}

/// [`strong_margin`] with extra warm starts (outer coordinates of `ω`);
/// also returns the best outer point for reuse at a nearby `t`.
pub fn strong_margin_warm(
    a: &CoefficientTensor,
    cfg: &SearchConfig,
    warm: &[Vec<f64>],
) -> Result<(MarginResult, Vec<f64>)> {
    cfg.validate()?;
    let scalars = cfg.scalars_for(a);
    let p = StrongProblem::new(a, cfg.t, scalars, cfg.eig_tol);
    let best = multistart(&p, cfg, warm)?;
    let xi = GradientState::new(a.n(), a.m(), scalars.to_complex(&best.v))?;
    let omega = UnitState::new(scalars.to_complex(&best.x))?;
    Ok((
        MarginResult {
            value: best.value,
            witness: Witness::Strong { xi, omega },
            evaluations: best.evaluations,
            certified: false,
        },
        best.x,
    ))
}

/// Estimated `inf_{|η|=|ω|=|q|=1}` of the Legendre-Hadamard form.
pub fn lh_margin(a: &CoefficientTensor, cfg: &SearchConfig) -> Result<MarginResult> {
    lh_margin_warm(a, cfg, &[]).map(|(r, _)| r)
}

/// [`lh_margin`] with warm starts given as `[ω coords, q]`.
pub fn lh_margin_warm(
    a: &CoefficientTensor,
    cfg: &SearchConfig,
    warm: &[Vec<f64>],
) -> Result<(MarginResult, Vec<f64>)> {
    cfg.validate()?;
    let scalars = cfg.scalars_for(a);
    let p = LhProblem::new(a, cfg.t, scalars, cfg.eig_tol);
    let best = multistart(&p, cfg, warm)?;
    let wm = scalars.width() * a.m();
    let eta = scalars.to_complex(&best.v);
    let omega = UnitState::new(scalars.to_complex(&best.x[..wm]))?;
    let q = best.x[wm..].to_vec();
    Ok((
        MarginResult {
            value: best.value,
            witness: Witness::LegendreHadamard { eta, omega, q },
            evaluations: best.evaluations,
            certified: false,
        },
        best.x,
    ))
}

/// `inf_{|ξ|=1, ξ ∈ C^n} Re⟨Aξ, ξ + |1-2/p| conj(ξ)⟩` for a scalar (`m = 1`)
/// tensor. `ξ ↦ conj(ξ)` is real-linear, so this is one eigenvalue problem.
pub fn scalar_p_margin(a: &CoefficientTensor, p: f64) -> Result<f64> {
    scalar_p_margin_tol(a, p, SearchConfig::default().eig_tol)
}

pub fn scalar_p_margin_tol(a: &CoefficientTensor, p: f64, eig_tol: f64) -> Result<f64> {
    if a.m() != 1 {
        return Err(Error::invalid("scalar p-ellipticity needs m = 1"));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid("p must be in (1, inf)"));
    }
    let n = a.n();
    let c = (1.0 - 2.0 / p).abs();
    let e = a.entries();
    let dim = 2 * n;
    let basis = |i: usize| -> (usize, Complex64) { (i / 2, Scalars::Complex.unit(i)) };
    // β(x, y) = Re Σ A^{hk} x_h conj(y_k) + c Re Σ A^{hk} x_h y_k
    let mut mat = vec![0.0; dim * dim];
    for i in 0..dim {
        let (h, xh) = basis(i);
        for j in 0..dim {
            let (k, yk) = basis(j);
            let a_hk = e[h * n + k];
            let v = (a_hk * xh * yk.conj()).re + c * (a_hk * xh * yk).re;
            mat[i * dim + j] += 0.5 * v;
            mat[j * dim + i] += 0.5 * v;
        }
    }
    Ok(eigen::min_eigenpair(&mat, dim, eig_tol)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::project_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lame(lambda: f64, mu: f64, r: f64, n: usize) -> CoefficientTensor {
        crate::lame::lame_tensor(lambda, mu, r, n).unwrap()
    }

    fn random_tensor(n: usize, m: usize, seed: u64) -> CoefficientTensor {
        let mut r = rng::substream(seed, 99, 0);
        CoefficientTensor::from_fn(n, m, |_, _, _, _| c(rng::gaussian(&mut r), rng::gaussian(&mut r)))
            .unwrap()
    }

    fn random_state(n: usize, m: usize, seed: u64) -> (GradientState, UnitState) {
        let mut r = rng::substream(seed, 98, 0);
        let xi = GradientState::new(
            n,
            m,
            (0..n * m).map(|_| c(rng::gaussian(&mut r), rng::gaussian(&mut r))).collect(),
        )
        .unwrap();
        let w = UnitState::new((0..m).map(|_| c(rng::gaussian(&mut r), rng::gaussian(&mut r))).collect())
            .unwrap();
        (xi, w)
    }

    #[test]
    fn identity_form_is_one_minus_t2_projection() {
        let a = CoefficientTensor::identity(2, 2);
        let (xi, w) = random_state(2, 2, 1);
        let xi = xi.scaled(1.0 / xi.norm());
        let pw = project_state(&xi, &w).unwrap();
        let t = 0.6;
        let f = strong_form_value(&a, t, &xi, &w).unwrap();
        assert!((f - (1.0 - t * t * pw.norm() * pw.norm())).abs() < 1e-14);
    }

    #[test]
    fn form_at_t_zero_is_legendre_pairing() {
        let a = random_tensor(2, 3, 4);
        let (xi, w) = random_state(2, 3, 5);
        let f = strong_form_value(&a, 0.0, &xi, &w).unwrap();
        let g = crate::tensor::real_pairing(&a, &xi, &xi).unwrap();
        assert!((f - g).abs() < 1e-12);
    }

    #[test]
    fn form_is_quadratic_in_t_with_projection_leading_coefficient() {
        let a = random_tensor(3, 2, 7);
        let (xi, w) = random_state(3, 2, 8);
        let f = |t: f64| strong_form_value(&a, t, &xi, &w).unwrap();
        let (fm, f0, fp) = (f(-0.5), f(0.0), f(0.5));
        let c2 = (fp + fm - 2.0 * f0) / (2.0 * 0.25);
        let c1 = (fp - fm) / (2.0 * 0.5);
        for &t in &[-0.9, -0.3, 0.2, 0.77, 0.95] {
            assert!((f(t) - (f0 + c1 * t + c2 * t * t)).abs() < 1e-10);
        }
        let pw = project_state(&xi, &w).unwrap();
        let lead = -crate::tensor::real_pairing(&a, &pw, &pw).unwrap();
        assert!((c2 - lead).abs() < 1e-10);
    }

    #[test]
    fn rejects_t_outside_open_interval() {
        let a = CoefficientTensor::identity(1, 1);
        let cfg = SearchConfig { t: 1.0, ..Default::default() };
        assert!(strong_margin(&a, &cfg).unwrap_err().is_input_error());
        let (xi, w) = random_state(1, 1, 0);
        assert!(strong_form_value(&a, -1.2, &xi, &w).is_err());
    }

    #[test]
    fn identity_strong_margin() {
        for &scalars in &[Scalars::Real, Scalars::Complex] {
            let a = CoefficientTensor::identity(2, 3);
            let cfg = SearchConfig { t: 0.5, scalars: Some(scalars), ..Default::default() };
            let r = strong_margin(&a, &cfg).unwrap();
            assert!((r.value - 0.75).abs() < 1e-9, "{scalars:?}: {}", r.value);
            assert!(!r.certified);
        }
    }

    #[test]
    fn scaled_identity_scalar_case() {
        let a = CoefficientTensor::identity(3, 1).scaled(c(2.5, 0.0));
        for &t in &[-0.8, 0.0, 0.4, 0.9] {
            let r = strong_margin(&a, &SearchConfig { t, ..Default::default() }).unwrap();
            assert!((r.value - 2.5 * (1.0 - t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn witness_reproduces_margin() {
        let a = random_tensor(2, 2, 11).try_add(&CoefficientTensor::identity(2, 2).scaled(c(4.0, 0.0))).unwrap();
        let cfg = SearchConfig { t: 0.3, ..Default::default() };
        let r = strong_margin(&a, &cfg).unwrap();
        match &r.witness {
            Witness::Strong { xi, omega } => {
                assert!((xi.norm() - 1.0).abs() < 1e-10);
                assert!((omega.norm() - 1.0).abs() < 1e-10);
                let f = strong_form_value(&a, 0.3, xi, omega).unwrap();
                assert!((f - r.value).abs() < 1e-8);
            }
            _ => panic!("wrong witness kind"),
        }
    }

    #[test]
    fn lame_strong_margin_threshold() {
        // Lamé(1, 1), n = 2, r = 1/2: sign change at t = √3/2.
        let a = lame(1.0, 1.0, 0.5, 2);
        let pos = strong_margin(&a, &SearchConfig { t: 0.8, ..Default::default() }).unwrap();
        let neg = strong_margin(&a, &SearchConfig { t: 0.87, ..Default::default() }).unwrap();
        assert!(pos.value > 0.0, "{}", pos.value);
        assert!(neg.value < 0.0, "{}", neg.value);
        let edge = strong_margin(&a, &SearchConfig { t: 0.75f64.sqrt(), ..Default::default() }).unwrap();
        assert!(edge.value.abs() < 1e-6, "{}", edge.value);
    }

    #[test]
    fn lh_form_reductions() {
        let a = random_tensor(2, 3, 21);
        let mut r = rng::substream(3, 97, 0);
        let eta: Vec<_> = (0..3).map(|_| c(rng::gaussian(&mut r), rng::gaussian(&mut r))).collect();
        let q = rng::unit_vector(&mut r, 2);
        let w = UnitState::new((0..3).map(|_| c(rng::gaussian(&mut r), rng::gaussian(&mut r))).collect()).unwrap();
        // t = 0: classical Legendre-Hadamard form
        let mq = symbol(&a, &q);
        let classical: f64 = (0..3)
            .flat_map(|al| (0..3).map(move |be| (al, be)))
            .map(|(al, be)| (mq[al * 3 + be] * eta[al] * eta[be].conj()).re)
            .sum();
        assert!((lh_form_value(&a, 0.0, &eta, &w, &q).unwrap() - classical).abs() < 1e-12);
        // ω with Re⟨ω, η⟩ = 0 makes the value independent of t
        let dot: Complex64 = w.comps().iter().zip(&eta).map(|(w, e)| w * e.conj()).sum();
        let w_perp: Vec<_> = eta.iter().map(|e| e * c(0.0, 1.0) * dot.re.signum()).collect();
        let w_perp = UnitState::new(w_perp).unwrap();
        let v0 = lh_form_value(&a, 0.0, &eta, &w_perp, &q).unwrap();
        let v1 = lh_form_value(&a, 0.9, &eta, &w_perp, &q).unwrap();
        assert!((v0 - v1).abs() < 1e-12);
        // equals the strong form at q ⊗ η
        let xi = GradientState::outer(&q, &eta).unwrap();
        let s = strong_form_value(&a, 0.4, &xi, &w).unwrap();
        assert!((lh_form_value(&a, 0.4, &eta, &w, &q).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn lh_identity_with_aligned_omega() {
        let a = CoefficientTensor::identity(3, 2);
        let eta = [c(0.6, 0.0), c(0.0, 0.8)];
        let w = UnitState::new(eta.to_vec()).unwrap();
        let q = [0.0, 1.0, 0.0];
        let t = 0.7;
        assert!((lh_form_value(&a, t, &eta, &w, &q).unwrap() - (1.0 - t * t)).abs() < 1e-14);
    }

    #[test]
    fn lh_margin_identity() {
        let a = CoefficientTensor::identity(2, 2);
        for &t in &[-0.5, 0.0, 0.8] {
            let r = lh_margin(&a, &SearchConfig { t, ..Default::default() }).unwrap();
            assert!((r.value - (1.0 - t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn lh_margin_lame_threshold() {
        let a = lame(1.0, 1.0, 0.0, 2);
        let pos = lh_margin(&a, &SearchConfig { t: 0.85, ..Default::default() }).unwrap();
        let neg = lh_margin(&a, &SearchConfig { t: 0.88, ..Default::default() }).unwrap();
        assert!(pos.value > 0.0 && neg.value < 0.0, "{} {}", pos.value, neg.value);
    }

    #[test]
    fn scalar_margin_rotated_identity() {
        for &phi in &[0.0, core::f64::consts::PI / 6.0, core::f64::consts::PI / 3.0] {
            for &p in &[1.5, 2.0, 4.0] {
                let a = CoefficientTensor::identity(3, 1).scaled(c(math::cos(phi), math::sin(phi)));
                let v = scalar_p_margin(&a, p).unwrap();
                let expect = math::cos(phi) - (1.0 - 2.0 / p).abs();
                assert!((v - expect).abs() < 1e-9, "φ={phi} p={p}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn scalar_margin_real_elliptic_lower_bound() {
        let a = CoefficientTensor::scalar(2, &[c(2.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]).unwrap();
        let legendre = scalar_p_margin(&a, 2.0).unwrap();
        // smallest eigenvalue of [[2, .5], [.5, 1]]
        let expect = 1.5 - math::sqrt(0.5);
        assert!((legendre - expect).abs() < 1e-10);
        for &p in &[1.1, 1.5, 3.0, 10.0] {
            let v = scalar_p_margin(&a, p).unwrap();
            assert!(v >= legendre * (1.0 - (1.0 - 2.0 / p).abs()) - 1e-10);
        }
        assert!(scalar_p_margin(&CoefficientTensor::identity(2, 2), 3.0).is_err());
    }
}
