//! The `t = 1 - 2/p` parametrization and admissible ranges of p.
//!
//! For a fixed test pair the strong form is a quadratic in `t` with
//! non-positive leading coefficient whenever the Legendre condition holds, so
//! the margin `t ↦ inf f` is concave and its positivity set is an interval
//! around `t = 0`. Each side is found by sign bisection.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::pointwise::{lh_margin_warm, strong_margin_warm, SearchConfig};
use crate::tensor::{adjoint, CoefficientTensor, TensorField};

/// Bisection tolerance in `t`.
pub const T_TOL: f64 = 1e-4;
/// Allowed violation of sampled midpoint concavity.
pub const CONCAVITY_SLACK: f64 = 1e-6;
const WARM_POOL: usize = 6;

pub fn t_of_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_nan() {
        return Err(Error::invalid("p must be in (1, inf]"));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 - 2.0 / p)
}

pub fn p_of_t(t: f64) -> Result<f64> {
    if !(t > -1.0 && t <= 1.0) {
        return Err(Error::invalid("t must be in (-1, 1]"));
    }
    if t == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / (1.0 - t))
}

#[inline]
fn p_unchecked(t: f64) -> f64 {
    if t >= 1.0 {
        f64::INFINITY
    } else {
        2.0 / (1.0 - t)
    }
}

/// Open interval of admissible exponents, stored as `(t_lo, t_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRange {
    t_lo: f64,
    t_hi: f64,
    empty: bool,
}

impl PRange {
    pub fn new(t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&t_lo) || !(-1.0..=1.0).contains(&t_hi) || t_lo > t_hi {
            return Err(Error::invalid("PRange needs -1 <= t_lo <= t_hi <= 1"));
        }
        Ok(Self {
            t_lo,
            t_hi,
            empty: t_lo == t_hi,
        })
    }

    pub const fn empty() -> Self {
        Self {
            t_lo: 0.0,
            t_hi: 0.0,
            empty: true,
        }
    }

    /// `p ∈ (1, ∞)`.
    pub const fn full() -> Self {
        Self {
            t_lo: -1.0,
            t_hi: 1.0,
            empty: false,
        }
    }

    /// `{p : (1 - 2/p)² < c}`.
    pub fn from_t_squared_bound(c: f64) -> Self {
        if !(c > 0.0) {
            return Self::empty();
        }
        let s = math::sqrt(c.min(1.0));
        Self {
            t_lo: -s,
            t_hi: s,
            empty: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }

    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }

    pub fn p_lo(&self) -> f64 {
        p_unchecked(self.t_lo)
    }

    pub fn p_hi(&self) -> f64 {
        p_unchecked(self.t_hi)
    }

    pub fn contains_t(&self, t: f64) -> bool {
        !self.empty && t > self.t_lo && t < self.t_hi
    }

    pub fn contains_p(&self, p: f64) -> bool {
        t_of_p(p).map_or(false, |t| self.contains_t(t))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        if self.empty || other.empty {
            return Self::empty();
        }
        let lo = self.t_lo.max(other.t_lo);
        let hi = self.t_hi.min(other.t_hi);
        if lo >= hi {
            Self::empty()
        } else {
            Self {
                t_lo: lo,
                t_hi: hi,
                empty: false,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionKind {
    Strong,
    LegendreHadamard,
}

impl ConditionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::Strong => "strong",
            ConditionKind::LegendreHadamard => "legendre-hadamard",
        }
    }
}

impl core::str::FromStr for ConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(ConditionKind::Strong),
            "legendre-hadamard" | "lh" => Ok(ConditionKind::LegendreHadamard),
            _ => Err(Error::invalid("kind must be 'strong' or 'legendre-hadamard'")),
        }
    }
}

/// Margin evaluations at several `t` sharing a pool of recent minimizers.
pub struct MarginScan<'a> {
    a: &'a CoefficientTensor,
    kind: ConditionKind,
    cfg: SearchConfig,
    pool: Vec<Vec<f64>>,
    /// Every `(t, margin)` evaluated so far.
    pub history: Vec<(f64, f64)>,
}

impl<'a> MarginScan<'a> {
    pub fn new(a: &'a CoefficientTensor, kind: ConditionKind, cfg: &SearchConfig) -> Self {
        Self {
            a,
            kind,
            cfg: cfg.clone(),
            pool: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn margin(&mut self, t: f64) -> Result<f64> {
        let cfg = self.cfg.with_t(t);
        let (r, x) = match self.kind {
            ConditionKind::Strong => strong_margin_warm(self.a, &cfg, &self.pool)?,
            ConditionKind::LegendreHadamard => lh_margin_warm(self.a, &cfg, &self.pool)?,
        };
        if !self.pool.iter().any(|p| p == &x) {
            if self.pool.len() == WARM_POOL {
                self.pool.remove(0);
            }
            self.pool.push(x);
        }
        self.history.push((t, r.value));
        Ok(r.value)
    }

    /// Error if the evaluated points violate concavity beyond the slack.
    pub fn check_concavity(&self) -> Result<()> {
        let mut pts = self.history.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        for w in pts.windows(3) {
            let [(t1, m1), (t2, m2), (t3, m3)] = [w[0], w[1], w[2]];
            let chord = ((t3 - t2) * m1 + (t2 - t1) * m3) / (t3 - t1);
            let excess = chord - m2;
            if excess > CONCAVITY_SLACK {
                return Err(Error::NonConcave { t: t2, excess });
            }
        }
        Ok(())
    }

    /// Largest `|t|` in direction `dir` with positive margin, minus the
    /// tolerance; `±1` when the margin stays positive up to the edge.
    fn side(&mut self, dir: f64) -> Result<f64> {
        let edge = 1.0 - T_TOL / 2.0;
        if self.margin(dir * edge)? > 0.0 {
            return Ok(dir);
        }
        let (mut good, mut bad) = (0.0f64, edge);
        while bad - good > T_TOL {
            let mid = 0.5 * (good + bad);
            if self.margin(dir * mid)? > 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(dir * (good - T_TOL).max(0.0))
    }
}

/// `{t : margin(t) > 0}` for a single tensor; empty when the margin at
/// `t = 0` is not positive.
pub fn condition_range(a: &CoefficientTensor, kind: ConditionKind, cfg: &SearchConfig) -> Result<PRange> {
    cfg.with_t(0.0).validate()?;
    let mut scan = MarginScan::new(a, kind, cfg);
    if scan.margin(0.0)? <= 0.0 {
        return Ok(PRange::empty());
    }
    let hi = scan.side(1.0)?;
    let lo = scan.side(-1.0)?;
    scan.check_concavity()?;
    if lo >= hi {
        return Ok(PRange::empty());
    }
    PRange::new(lo, hi)
}

/// Intersection of [`condition_range`] over all samples of the field.
pub fn field_range(field: &TensorField, kind: ConditionKind, cfg: &SearchConfig) -> Result<PRange> {
    let tensors = field.tensors();
    let ranges = crate::par::map_indexed(tensors.len(), |i| condition_range(&tensors[i], kind, cfg));
    let mut out = PRange::full();
    for (i, r) in ranges.into_iter().enumerate() {
        out = out.intersect(&r.map_err(|e| e.at_sample(i))?);
    }
    Ok(out)
}

/// Hausdorff distance between the range of `A*` and the reflection
/// `t ↦ -t` of the range of `A`.
pub fn duality_residual(a: &CoefficientTensor, kind: ConditionKind, cfg: &SearchConfig) -> Result<f64> {
    let r = condition_range(a, kind, cfg)?;
    if r.is_empty() {
        return Err(Error::invalid("duality residual needs a non-empty range"));
    }
    let s = condition_range(&adjoint(a), kind, cfg)?;
    if s.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok((s.t_lo() + r.t_hi()).abs().max((s.t_hi() + r.t_lo()).abs()))
}

/// Margins at each `t` in order, sharing warm starts.
pub fn margin_curve(a: &CoefficientTensor, kind: ConditionKind, cfg: &SearchConfig, ts: &[f64]) -> Result<Vec<f64>> {
    let mut scan = MarginScan::new(a, kind, cfg);
    ts.iter().map(|&t| scan.margin(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lame::lame_tensor;
    use crate::tensor::SampledField;
    use crate::Complex64;

    #[test]
    fn conversions() {
        assert_eq!(t_of_p(2.0).unwrap(), 0.0);
        assert_eq!(t_of_p(4.0).unwrap(), 0.5);
        assert!((t_of_p(4.0 / 3.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(t_of_p(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(p_of_t(1.0).unwrap(), f64::INFINITY);
        for &p in &[1.01, 1.5, 2.0, 3.3, 17.0, 1e6] {
            let back = p_of_t(t_of_p(p).unwrap()).unwrap();
            assert!((back - p).abs() <= 1e-15 * p * p, "{p} {back}");
        }
        for &t in &[-0.99, -0.3, 0.0, 0.4, 0.9] {
            assert!((t_of_p(p_of_t(t).unwrap()).unwrap() - t).abs() <= 1e-15);
        }
        assert!(t_of_p(1.0).is_err() && t_of_p(0.5).is_err() && t_of_p(f64::NAN).is_err());
        assert!(p_of_t(-1.0).is_err() && p_of_t(1.5).is_err());
    }

    #[test]
    fn prange_basics() {
        let full = PRange::full();
        assert_eq!(full.p_lo(), 1.0);
        assert_eq!(full.p_hi(), f64::INFINITY);
        assert!(full.contains_p(1e9));
        let r = PRange::from_t_squared_bound(0.75);
        assert!((r.p_hi() - 2.0 / (1.0 - 0.75f64.sqrt())).abs() < 1e-12);
        assert!(full.intersect(&PRange::empty()).is_empty());
        let a = PRange::new(-0.5, 0.2).unwrap();
        let b = PRange::new(-0.1, 0.6).unwrap();
        let c = a.intersect(&b);
        assert_eq!((c.t_lo(), c.t_hi()), (-0.1, 0.2));
        assert!(PRange::new(0.3, 0.1).is_err());
        assert!(PRange::from_t_squared_bound(0.0).is_empty());
    }

    #[test]
    fn identity_range_is_everything() {
        let a = CoefficientTensor::identity(2, 2);
        let r = condition_range(&a, ConditionKind::Strong, &SearchConfig::default()).unwrap();
        assert_eq!((r.t_lo(), r.t_hi()), (-1.0, 1.0));
        assert_eq!(r.p_hi(), f64::INFINITY);
    }

    #[test]
    fn lame_range_matches_closed_form() {
        let a = lame_tensor(1.0, 1.0, 0.5, 2).unwrap();
        let r = condition_range(&a, ConditionKind::Strong, &SearchConfig::default()).unwrap();
        let s = 0.75f64.sqrt();
        assert!((r.t_hi() - s).abs() <= 5e-3 && (r.t_lo() + s).abs() <= 5e-3, "{r:?}");
        assert!((r.p_lo() - 1.0718).abs() < 0.01 && (r.p_hi() - 14.928).abs() < 0.6);
    }

    #[test]
    fn non_legendre_is_empty() {
        let a = CoefficientTensor::identity(2, 1).scaled(Complex64::new(-1.0, 0.0));
        let r = condition_range(&a, ConditionKind::Strong, &SearchConfig::default()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn field_range_intersects_samples() {
        let lame = lame_tensor(1.0, 1.0, 0.5, 2).unwrap();
        let samples = vec![CoefficientTensor::identity(2, 2), lame.clone()];
        let field = TensorField::Sampled(SampledField::new(vec![2, 1], false, samples).unwrap());
        let cfg = SearchConfig::default();
        let r = field_range(&field, ConditionKind::Strong, &cfg).unwrap();
        let l = condition_range(&lame, ConditionKind::Strong, &cfg).unwrap();
        assert_eq!(r, l);
        let c = field_range(&TensorField::Constant(lame.clone()), ConditionKind::Strong, &cfg).unwrap();
        assert_eq!(c, l);
        let bad = CoefficientTensor::identity(2, 2).scaled(Complex64::new(-1.0, 0.0));
        let field = TensorField::Sampled(SampledField::new(vec![2, 1], false, vec![lame, bad]).unwrap());
        assert!(field_range(&field, ConditionKind::Strong, &cfg).unwrap().is_empty());
    }

    #[test]
    fn lh_range_contains_strong_range() {
        let a = lame_tensor(2.0, 1.0, 0.3, 2).unwrap();
        let cfg = SearchConfig::default();
        let s = condition_range(&a, ConditionKind::Strong, &cfg).unwrap();
        let l = condition_range(&a, ConditionKind::LegendreHadamard, &cfg).unwrap();
        assert!(l.t_lo() <= s.t_lo() + T_TOL && l.t_hi() >= s.t_hi() - T_TOL);
    }

    #[test]
    fn symmetric_duality() {
        let a = lame_tensor(1.0, 1.0, 0.5, 2).unwrap();
        let d = duality_residual(&a, ConditionKind::Strong, &SearchConfig::default()).unwrap();
        assert!(d <= 2e-4, "{d}");
    }

    #[test]
    fn concavity_check_flags_dips() {
        let a = CoefficientTensor::identity(1, 1);
        let mut scan = MarginScan::new(&a, ConditionKind::Strong, &SearchConfig::default());
        scan.history = vec![(-0.5, 1.0), (0.0, 0.5), (0.5, 1.0)];
        assert!(matches!(scan.check_concavity(), Err(Error::NonConcave { .. })));
        scan.history = vec![(-0.5, 0.75), (0.0, 1.0), (0.5, 0.75)];
        scan.check_concavity().unwrap();
    }
}
