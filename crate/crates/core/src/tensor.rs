//! Coefficient tensors `A^{hk}_{αβ}`, test states and sampled fields.
//!
//! Indices are 0-based in code. Storage of a tensor is row-major over
//! `(h, k, α, β)`, i.e. the flat index is `((h*n + k)*m + α)*m + β`.
//! A gradient state `ξ^α_h` is stored row-major over `(h, α)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    n: usize,
    m: usize,
    entries: Vec<Complex64>,
}

impl CoefficientTensor {
    pub fn new(n: usize, m: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid("tensor dimensions n and m must be at least 1"));
        }
        let expected = n * n * m * m;
        if entries.len() != expected {
            return Err(Error::Dimension {
                what: "tensor entry count",
                expected,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("tensor entries"));
        }
        Ok(Self { n, m, entries })
    }

    /// Builds a tensor from a function of `(h, k, α, β)`.
    pub fn from_fn<F>(n: usize, m: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize) -> Complex64,
    {
        let mut entries = Vec::with_capacity(n * n * m * m);
        for h in 0..n {
            for k in 0..n {
                for a in 0..m {
                    for b in 0..m {
                        entries.push(f(h, k, a, b));
                    }
                }
            }
        }
        Self::new(n, m, entries)
    }

    /// `δ^{hk} δ_{αβ}`.
    pub fn identity(n: usize, m: usize) -> Self {
        Self::from_fn(n, m, |h, k, a, b| {
            if h == k && a == b {
                Complex64::new(1.0, 0.0)
            } else {
                C0
            }
        })
        .expect("identity tensor dimensions must be at least 1")
    }

    /// Scalar (`m = 1`) tensor from a row-major `n x n` matrix `A^{hk}`.
    pub fn scalar(n: usize, matrix: &[Complex64]) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::Dimension {
                what: "scalar coefficient matrix",
                expected: n * n,
                found: matrix.len(),
            });
        }
        Self::new(n, 1, matrix.to_vec())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn index(&self, h: usize, k: usize, a: usize, b: usize) -> usize {
        ((h * self.n + k) * self.m + a) * self.m + b
    }

    #[inline]
    pub fn get(&self, h: usize, k: usize, a: usize, b: usize) -> Complex64 {
        self.entries[self.index(h, k, a, b)]
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            m: self.m,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n: self.n,
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = adjoint(self);
        Self {
            n: self.n,
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&adj.entries)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                what: "tensor spatial dimension n",
                expected: self.n,
                found: other.n,
            });
        }
        if self.m != other.m {
            return Err(Error::Dimension {
                what: "tensor system dimension m",
                expected: self.m,
                found: other.m,
            });
        }
        Ok(())
    }
}

/// A test tensor `ξ = (ξ^α_h) ∈ C^{n×m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientState {
    n: usize,
    m: usize,
    comps: Vec<Complex64>,
}

impl GradientState {
    pub fn new(n: usize, m: usize, comps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid("gradient state dimensions must be at least 1"));
        }
        if comps.len() != n * m {
            return Err(Error::Dimension {
                what: "gradient state component count",
                expected: n * m,
                found: comps.len(),
            });
        }
        if comps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("gradient state"));
        }
        Ok(Self { n, m, comps })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            comps: vec![C0; n * m],
        }
    }

    /// Rank-one state `ξ^α_h = q_h η^α`.
    pub fn outer(q: &[f64], eta: &[Complex64]) -> Result<Self> {
        let comps = q
            .iter()
            .flat_map(|&qh| eta.iter().map(move |&e| e * qh))
            .collect();
        Self::new(q.len(), eta.len(), comps)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn comps(&self) -> &[Complex64] {
        &self.comps
    }

    #[inline]
    pub fn get(&self, h: usize, a: usize) -> Complex64 {
        self.comps[h * self.m + a]
    }

    /// Frobenius norm `|ξ|`.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.comps.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            m: self.m,
            comps: self.comps.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c * other`, dimensions assumed equal.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        Self {
            n: self.n,
            m: self.m,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + b * c)
                .collect(),
        }
    }
}

/// A unit vector `ω ∈ C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitState {
    comps: Vec<Complex64>,
}

impl UnitState {
    /// Normalizes `comps`; rejects the zero vector and non-finite input.
    pub fn new(comps: Vec<Complex64>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::invalid("unit state must have at least one component"));
        }
        if comps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("unit state"));
        }
        let len = math::sqrt(comps.iter().map(|z| z.norm_sqr()).sum());
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Self {
            comps: comps.into_iter().map(|z| z / len).collect(),
        })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The coordinate vector `e_index`.
    pub fn basis(m: usize, index: usize) -> Result<Self> {
        if index >= m {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut comps = vec![C0; m];
        comps[index] = Complex64::new(1.0, 0.0);
        Self::new(comps)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.comps.len()
    }

    #[inline]
    pub fn comps(&self) -> &[Complex64] {
        &self.comps
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.comps.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// Raw bilinear pairing `Re Σ A^{hk}_{αβ} x^α_h conj(y^β_k)` on flat slices.
#[inline]
pub(crate) fn pair_raw(
    entries: &[Complex64],
    n: usize,
    m: usize,
    x: &[Complex64],
    y: &[Complex64],
) -> f64 {
    let mut acc = 0.0;
    for h in 0..n {
        for a in 0..m {
            let xa = x[h * m + a];
            if xa == C0 {
                continue;
            }
            for k in 0..n {
                let row = ((h * n + k) * m + a) * m;
                for b in 0..m {
                    acc += (entries[row + b] * xa * y[k * m + b].conj()).re;
                }
            }
        }
    }
    acc
}

/// Raw `ξ(ω)`: `out^α_h = ω^α Re Σ_β ω^β conj(ξ^β_h)`.
#[inline]
pub(crate) fn project_raw(m: usize, xi: &[Complex64], omega: &[Complex64], out: &mut [Complex64]) {
    let n = xi.len() / m;
    for h in 0..n {
        let row = &xi[h * m..(h + 1) * m];
        let s: f64 = omega
            .iter()
            .zip(row)
            .map(|(w, x)| (w * x.conj()).re)
            .sum();
        for a in 0..m {
            out[h * m + a] = omega[a] * s;
        }
    }
}

/// `Re( Σ A^{hk}_{αβ} ξ^α_h conj(η^β_k) )`.
pub fn real_pairing(a: &CoefficientTensor, xi: &GradientState, eta: &GradientState) -> Result<f64> {
    check_state(a, xi)?;
    check_state(a, eta)?;
    Ok(pair_raw(&a.entries, a.n, a.m, &xi.comps, &eta.comps))
}

fn check_state(a: &CoefficientTensor, xi: &GradientState) -> Result<()> {
    if xi.n != a.n {
        return Err(Error::Dimension {
            what: "gradient state n",
            expected: a.n,
            found: xi.n,
        });
    }
    if xi.m != a.m {
        return Err(Error::Dimension {
            what: "gradient state m",
            expected: a.m,
            found: xi.m,
        });
    }
    Ok(())
}

/// The projection `ξ(ω)^α_h = ω^α Re⟨ω, ξ_h⟩`. Satisfies `|ξ(ω)| ≤ |ξ|`.
pub fn project_state(xi: &GradientState, omega: &UnitState) -> Result<GradientState> {
    if xi.m != omega.m() {
        return Err(Error::Dimension {
            what: "projection direction",
            expected: xi.m,
            found: omega.m(),
        });
    }
    let mut out = vec![C0; xi.comps.len()];
    project_raw(xi.m, &xi.comps, &omega.comps, &mut out);
    Ok(GradientState {
        n: xi.n,
        m: xi.m,
        comps: out,
    })
}

/// `(A*)^{hk}_{αβ} = conj(A^{kh}_{βα})`.
pub fn adjoint(a: &CoefficientTensor) -> CoefficientTensor {
    let (n, m) = (a.n, a.m);
    let mut entries = Vec::with_capacity(a.entries.len());
    for h in 0..n {
        for k in 0..n {
            for al in 0..m {
                for be in 0..m {
                    entries.push(a.get(k, h, be, al).conj());
                }
            }
        }
    }
    CoefficientTensor { n, m, entries }
}

/// Coefficients as a function of position in the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorField {
    Constant(CoefficientTensor),
    Sampled(SampledField),
}

/// Samples on the regular lattice `{ i/N_axis }` of `[0,1)^n`, stored
/// row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Vec<usize>,
    periodic: bool,
    samples: Vec<CoefficientTensor>,
}

impl SampledField {
    pub fn new(grid: Vec<usize>, periodic: bool, samples: Vec<CoefficientTensor>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|&g| g == 0) {
            return Err(Error::invalid("lattice needs at least one point per axis"));
        }
        let count: usize = grid.iter().product();
        if samples.len() != count {
            return Err(Error::Dimension {
                what: "field sample count",
                expected: count,
                found: samples.len(),
            });
        }
        let first = &samples[0];
        for (i, s) in samples.iter().enumerate() {
            first.check_same_shape(s).map_err(|e| e.at_sample(i))?;
        }
        if first.n() != grid.len() {
            return Err(Error::Dimension {
                what: "lattice axes vs tensor n",
                expected: first.n(),
                found: grid.len(),
            });
        }
        Ok(Self {
            grid,
            periodic,
            samples,
        })
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn samples(&self) -> &[CoefficientTensor] {
        &self.samples
    }

    /// Coordinates of lattice point `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut coords = vec![0.0; self.grid.len()];
        for axis in (0..self.grid.len()).rev() {
            let g = self.grid[axis];
            coords[axis] = (rem % g) as f64 / g as f64;
            rem /= g;
        }
        coords
    }

    pub(crate) fn nearest_index(&self, x: &[f64]) -> usize {
        let mut index = 0;
        for (&g, &xi) in self.grid.iter().zip(x) {
            let scaled = xi * g as f64;
            let mut i = math::round(scaled) as i64;
            if self.periodic {
                i = i.rem_euclid(g as i64);
            } else {
                i = i.clamp(0, g as i64 - 1);
            }
            index = index * g + i as usize;
        }
        index
    }
}

impl TensorField {
    pub fn n(&self) -> usize {
        self.first().n()
    }

    pub fn m(&self) -> usize {
        self.first().m()
    }

    fn first(&self) -> &CoefficientTensor {
        match self {
            TensorField::Constant(a) => a,
            TensorField::Sampled(s) => &s.samples[0],
        }
    }

    /// Distinct tensors the field takes (one for a constant field).
    pub fn tensors(&self) -> &[CoefficientTensor] {
        match self {
            TensorField::Constant(a) => core::slice::from_ref(a),
            TensorField::Sampled(s) => &s.samples,
        }
    }

    pub fn is_real(&self) -> bool {
        self.tensors().iter().all(CoefficientTensor::is_real)
    }

    /// The field `x ↦ A(x/ε)` sampled back onto the same lattice.
    pub fn rescaled(&self, eps: f64) -> Result<TensorField> {
        match self {
            TensorField::Constant(a) => Ok(TensorField::Constant(a.clone())),
            TensorField::Sampled(s) => {
                let samples = (0..s.samples.len())
                    .map(|i| sample_field(self, &s.point(i), Some(eps)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TensorField::Sampled(SampledField::new(
                    s.grid.clone(),
                    s.periodic,
                    samples,
                )?))
            }
        }
    }
}

/// Coefficient tensor at `x`, or at `x/ε mod 1` when `eps` is given.
///
/// Sampled fields use the nearest lattice point; no interpolation.
pub fn sample_field(field: &TensorField, x: &[f64], eps: Option<f64>) -> Result<CoefficientTensor> {
    if x.len() != field.n() {
        return Err(Error::Dimension {
            what: "sample point",
            expected: field.n(),
            found: x.len(),
        });
    }
    if x.iter().any(|&c| !c.is_finite() || !(0.0..=1.0).contains(&c)) {
        return Err(Error::invalid("sample point must lie in the unit cube"));
    }
    match field {
        TensorField::Constant(a) => {
            if let Some(e) = eps {
                check_eps(e)?;
            }
            Ok(a.clone())
        }
        TensorField::Sampled(s) => {
            let idx = match eps {
                None => s.nearest_index(x),
                Some(e) => {
                    check_eps(e)?;
                    if !s.periodic {
                        return Err(Error::invalid(
                            "rescaled sampling needs a periodic field",
                        ));
                    }
                    let y: Vec<f64> = x
                        .iter()
                        .map(|&c| {
                            let v = c / e;
                            v - math::floor(v)
                        })
                        .collect();
                    s.nearest_index(&y)
                }
            };
            Ok(s.samples[idx].clone())
        }
    }
}

fn check_eps(e: f64) -> Result<()> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("rescaling ε must be positive and finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e11(n: usize, m: usize) -> GradientState {
        let mut s = GradientState::zeros(n, m);
        s.comps[0] = c(1.0, 0.0);
        s
    }

    #[test]
    fn identity_pairing_is_one_on_unit_state() {
        let a = CoefficientTensor::identity(2, 3);
        let xi = e11(2, 3);
        assert_eq!(real_pairing(&a, &xi, &xi).unwrap(), 1.0);
    }

    #[test]
    fn imaginary_scalar_pairs_to_zero() {
        let a = CoefficientTensor::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        let xi = GradientState::new(1, 1, vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(real_pairing(&a, &xi, &xi).unwrap(), 0.0);
    }

    #[test]
    fn lame_pairing_on_e11() {
        // μ δ^{hk} δ_{αβ} + λ δ^h_α δ^k_β + μ δ^h_β δ^k_α with λ = μ = 1.
        let a = CoefficientTensor::from_fn(2, 2, |h, k, al, be| {
            let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
            c(d(h, k) * d(al, be) + d(h, al) * d(k, be) + d(h, be) * d(k, al), 0.0)
        })
        .unwrap();
        let xi = e11(2, 2);
        assert_eq!(real_pairing(&a, &xi, &xi).unwrap(), 3.0);
    }

    #[test]
    fn pairing_rejects_mismatched_dimensions() {
        let a = CoefficientTensor::identity(2, 2);
        let xi = GradientState::zeros(2, 3);
        assert!(matches!(
            real_pairing(&a, &xi, &xi),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn tensor_constructor_validates() {
        assert!(CoefficientTensor::new(0, 1, vec![]).is_err());
        assert!(CoefficientTensor::new(1, 1, vec![]).is_err());
        assert!(matches!(
            CoefficientTensor::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn projection_onto_real_basis_direction() {
        let xi = GradientState::new(
            2,
            2,
            vec![c(1.5, -2.0), c(3.0, 1.0), c(-0.5, 4.0), c(7.0, 7.0)],
        )
        .unwrap();
        let w = UnitState::basis(2, 0).unwrap();
        let p = project_state(&xi, &w).unwrap();
        assert_eq!(p.get(0, 0), c(1.5, 0.0));
        assert_eq!(p.get(1, 0), c(-0.5, 0.0));
        assert_eq!(p.get(0, 1), C0);
        assert_eq!(p.get(1, 1), C0);
    }

    #[test]
    fn projection_with_orthogonal_phase_vanishes() {
        let xi = GradientState::new(3, 1, vec![c(1.0, 0.0); 3]).unwrap();
        let w = UnitState::new(vec![c(0.0, 1.0)]).unwrap();
        let p = project_state(&xi, &w).unwrap();
        assert!(p.comps().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn unit_state_normalizes_and_rejects_zero() {
        let w = UnitState::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((w.norm() - 1.0).abs() <= 1e-12);
        assert!(UnitState::new(vec![C0, C0]).is_err());
    }

    #[test]
    fn adjoint_of_imaginary_scalar() {
        let a = CoefficientTensor::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(adjoint(&a).entries(), &[c(0.0, -1.0)]);
    }

    #[test]
    fn adjoint_fixes_real_symmetric_tensor() {
        let a = CoefficientTensor::from_fn(2, 2, |h, k, al, be| {
            // symmetric under (h,α) <-> (k,β)
            c(((h + k) * 3 + al + be) as f64 + if h == k && al == be { 5.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert_eq!(adjoint(&a), a);
    }

    #[test]
    fn constant_field_returns_constant() {
        let a = CoefficientTensor::identity(2, 1);
        let f = TensorField::Constant(a.clone());
        assert_eq!(sample_field(&f, &[0.3, 0.9], None).unwrap(), a);
    }

    #[test]
    fn sampled_field_uses_nearest_point() {
        let a0 = CoefficientTensor::identity(1, 1);
        let a1 = a0.scaled(c(2.0, 0.0));
        let f = TensorField::Sampled(SampledField::new(vec![2], false, vec![a0.clone(), a1.clone()]).unwrap());
        assert_eq!(sample_field(&f, &[0.1], None).unwrap(), a0);
        assert_eq!(sample_field(&f, &[0.4], None).unwrap(), a1);
        assert_eq!(sample_field(&f, &[1.0], None).unwrap(), a1);
    }

    #[test]
    fn periodic_rescaled_sampling_wraps() {
        // Lattice {0, 0.2, 0.4, 0.6, 0.8}; x = 0.3, ε = 0.25 → x/ε = 1.2 → 0.2.
        let samples: Vec<_> = (0..5)
            .map(|i| CoefficientTensor::identity(1, 1).scaled(c(1.0 + i as f64, 0.0)))
            .collect();
        let f = TensorField::Sampled(SampledField::new(vec![5], true, samples.clone()).unwrap());
        assert_eq!(sample_field(&f, &[0.3], Some(0.25)).unwrap(), samples[1]);
        // 0.95 wraps to lattice point 0 in the periodic case.
        assert_eq!(sample_field(&f, &[0.95], None).unwrap(), samples[0]);
    }

    #[test]
    fn rescaling_requires_periodic_field() {
        let a = CoefficientTensor::identity(1, 1);
        let f = TensorField::Sampled(SampledField::new(vec![1], false, vec![a]).unwrap());
        assert!(sample_field(&f, &[0.5], Some(0.5)).unwrap_err().is_input_error());
    }

    #[test]
    fn sampled_field_rejects_mixed_shapes() {
        let s = SampledField::new(
            vec![2],
            true,
            vec![CoefficientTensor::identity(1, 1), CoefficientTensor::identity(1, 2)],
        );
        assert!(matches!(s, Err(Error::Sample { index: 1, .. })));
    }
}
