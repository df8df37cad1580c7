//! Monotone regulation functions and their convexity certificates.
//!
//! A regulation function maps the concentration of the upstream species to
//! a positive production rate. Three families are supported:
//!
//! * `Hill { lambda, r }`: `x ↦ (1 + λ x^r) / (1 + x^r)`, increasing when
//!   `λ > 1` and decreasing when `λ < 1`;
//! * `Affine { a, b }`: `x ↦ a x + b` with `a, b > 0`;
//! * `ShiftedHill { lambda, r, shift }`: the Hill function evaluated at
//!   `x + shift`.
//!
//! Every function carries closed-form derivatives up to order three, which
//! feed the Schwarzian derivative `S(f) = f'''/f' - 3/2 (f''/f')^2`. Since
//! `(1/√|f'|)'' = -½ (1/√|f'|) S(f)`, convexity of `1/√|f'|` is the same as
//! `S(f) ≤ 0`, which is what [`RegulationFunction::check_gamma_half_convex`]
//! scans for.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{log_space, Scalar};
use crate::search::golden_max;

/// Parameters of a regulation function, exactly as they appear in network
/// description files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegulationKind<T> {
    Hill { lambda: T, r: T },
    Affine { a: T, b: T },
    ShiftedHill { lambda: T, r: T, shift: T },
}

/// Direction of a regulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn sign(self) -> i8 {
        match self {
            Monotonicity::Increasing => 1,
            Monotonicity::Decreasing => -1,
        }
    }
}

/// First three derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives<T> {
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

/// Outcome of a grid scan of the Schwarzian derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Convexity<T> {
    /// `S(f) < -tol` at every grid point.
    StrictlyConvex,
    /// `S(f) ≤ tol` everywhere, touching `[-tol, tol]` somewhere.
    Convex,
    /// `S(f)(x) > tol` at the witness `x`.
    Violated { x: T, schwarzian: T },
}

impl<T> Convexity<T> {
    pub fn is_violated(&self) -> bool {
        matches!(self, Convexity::Violated { .. })
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Convexity::StrictlyConvex)
    }
}

/// Default convexity scan: 512 log-spaced points on `[1e-3, 1e3]`.
pub const DEFAULT_SCAN_LO: f64 = 1e-3;
pub const DEFAULT_SCAN_HI: f64 = 1e3;
pub const DEFAULT_SCAN_POINTS: usize = 512;
pub const DEFAULT_SCAN_TOL: f64 = 1e-9;

/// Smallest admissible grid for a convexity scan.
pub const MIN_SCAN_POINTS: usize = 16;

/// A validated regulation function.
///
/// Construction rejects parameter choices that would break positivity on
/// `[0, ∞)` or give a vanishing derivative: `Hill` with `λ = 1` or `λ < 0`
/// or `r < 1`, `Affine` with `a ≤ 0` or `b ≤ 0`, negative shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RegulationKind<T>",
    into = "RegulationKind<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct RegulationFunction<T> {
    kind: RegulationKind<T>,
}

impl<T: Scalar> TryFrom<RegulationKind<T>> for RegulationFunction<T> {
    type Error = Error;

    fn try_from(kind: RegulationKind<T>) -> Result<Self> {
        Self::new(kind)
    }
}

impl<T> From<RegulationFunction<T>> for RegulationKind<T> {
    fn from(f: RegulationFunction<T>) -> Self {
        f.kind
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidRegulation(msg.into())
}

fn check_hill<T: Scalar>(lambda: T, r: T) -> Result<()> {
    if !lambda.is_finite() || lambda < T::zero() {
        return Err(invalid(format!("hill lambda must be finite and >= 0, got {lambda}")));
    }
    if lambda == T::one() {
        return Err(invalid("hill lambda = 1 gives a constant function"));
    }
    if !r.is_finite() || r < T::one() {
        return Err(invalid(format!("hill exponent r must be finite and >= 1, got {r}")));
    }
    Ok(())
}

impl<T: Scalar> RegulationFunction<T> {
    pub fn new(kind: RegulationKind<T>) -> Result<Self> {
        match kind {
            RegulationKind::Hill { lambda, r } => check_hill(lambda, r)?,
            RegulationKind::ShiftedHill { lambda, r, shift } => {
                check_hill(lambda, r)?;
                if !shift.is_finite() || shift < T::zero() {
                    return Err(invalid(format!("shift must be finite and >= 0, got {shift}")));
                }
            }
            RegulationKind::Affine { a, b } => {
                if !a.is_finite() || a <= T::zero() {
                    return Err(invalid(format!(
                        "affine slope must be finite and > 0 (decreasing regulations use hill with lambda < 1), got {a}"
                    )));
                }
                if !b.is_finite() || b <= T::zero() {
                    return Err(invalid(format!("affine intercept must be finite and > 0, got {b}")));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn hill(lambda: T, r: T) -> Result<Self> {
        Self::new(RegulationKind::Hill { lambda, r })
    }

    pub fn affine(a: T, b: T) -> Result<Self> {
        Self::new(RegulationKind::Affine { a, b })
    }

    pub fn shifted_hill(lambda: T, r: T, shift: T) -> Result<Self> {
        Self::new(RegulationKind::ShiftedHill { lambda, r, shift })
    }

    pub fn kind(&self) -> RegulationKind<T> {
        self.kind
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self.kind {
            RegulationKind::Hill { lambda, .. } | RegulationKind::ShiftedHill { lambda, .. } => {
                if lambda > T::one() {
                    Monotonicity::Increasing
                } else {
                    Monotonicity::Decreasing
                }
            }
            RegulationKind::Affine { .. } => Monotonicity::Increasing,
        }
    }

    pub fn is_decreasing(&self) -> bool {
        self.monotonicity() == Monotonicity::Decreasing
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, RegulationKind::Affine { .. })
    }

    /// `sup_{x ≥ 0} f(x)`, or `None` for unbounded functions.
    pub fn supremum(&self) -> Option<T> {
        match self.kind {
            RegulationKind::Hill { lambda, .. } => Some(lambda.max(T::one())),
            RegulationKind::ShiftedHill { lambda, .. } => {
                if lambda > T::one() {
                    Some(lambda)
                } else {
                    Some(self.value(T::zero()))
                }
            }
            RegulationKind::Affine { .. } => None,
        }
    }

    /// `f(x)` for `x ≥ 0`.
    pub fn eval(&self, x: T) -> Result<T> {
        check_domain(x)?;
        Ok(self.value(x))
    }

    /// `(f', f'', f''')` at `x ≥ 0`.
    pub fn derivatives(&self, x: T) -> Result<Derivatives<T>> {
        check_domain(x)?;
        Ok(self.derivs(x))
    }

    /// Schwarzian derivative `f'''/f' - 3/2 (f''/f')^2`.
    pub fn schwarzian(&self, x: T) -> Result<T> {
        check_domain(x)?;
        let d = self.derivs(x);
        if !(d.d1.abs() >= T::min_positive_value().sqrt()) {
            return Err(Error::Singular { x: x.as_f64() });
        }
        let ratio = d.d2 / d.d1;
        Ok(d.d3 / d.d1 - T::lit(1.5) * ratio * ratio)
    }

    /// Scans `S(f)` on `grid_points` log-spaced points of `[lo, hi]`.
    pub fn check_gamma_half_convex(&self, lo: T, hi: T, grid_points: usize, tol: T) -> Result<Convexity<T>> {
        if !(lo > T::zero()) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::InvalidInterval {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                reason: "need 0 < lo < hi < inf".into(),
            });
        }
        if grid_points < MIN_SCAN_POINTS {
            return Err(Error::InvalidInterval {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                reason: format!("grid needs at least {MIN_SCAN_POINTS} points, got {grid_points}"),
            });
        }
        let mut strict = true;
        for x in log_space(lo, hi, grid_points) {
            let s = self.schwarzian(x)?;
            if !(s <= tol) {
                return Ok(Convexity::Violated { x, schwarzian: s });
            }
            if s >= -tol {
                strict = false;
            }
        }
        Ok(if strict { Convexity::StrictlyConvex } else { Convexity::Convex })
    }

    /// Convexity scan with the default grid.
    pub fn certify(&self) -> Result<Convexity<T>> {
        self.check_gamma_half_convex(
            T::lit(DEFAULT_SCAN_LO),
            T::lit(DEFAULT_SCAN_HI),
            DEFAULT_SCAN_POINTS,
            T::lit(DEFAULT_SCAN_TOL),
        )
    }

    /// Logarithmic sensitivity `x f'(x) / f(x)`.
    pub fn log_sensitivity(&self, x: T) -> Result<T> {
        check_domain(x)?;
        Ok(self.log_sens(x))
    }

    /// `sup_{x > 0} |x f'(x) / f(x)|`.
    ///
    /// Closed form for `Hill` and `Affine`; golden-section search on
    /// `log x` for `ShiftedHill`.
    pub fn log_sensitivity_sup(&self) -> T {
        match self.kind {
            RegulationKind::Hill { lambda, r } => {
                let root = lambda.sqrt();
                r * (lambda - T::one()).abs() / ((T::one() + root) * (T::one() + root))
            }
            RegulationKind::Affine { .. } => T::one(),
            RegulationKind::ShiftedHill { lambda, r, .. } => {
                let phi = |lx: T| self.log_sens(lx.exp()).abs();
                let grid = log_space(T::lit(1e-8), T::lit(1e8), 401);
                let (mut best, mut best_val) = (0, T::zero());
                for (k, x) in grid.iter().enumerate() {
                    let v = phi(x.ln());
                    if v > best_val {
                        best = k;
                        best_val = v;
                    }
                }
                let a = grid[best.saturating_sub(1)].ln();
                let b = grid[(best + 1).min(grid.len() - 1)].ln();
                let (_, peak) = golden_max(phi, a, b, T::lit(1e-10));
                // as x → ∞ the sensitivity tends to r when λ = 0 and to 0 otherwise
                let limit = if lambda == T::zero() { r } else { T::zero() };
                peak.max(best_val).max(limit)
            }
        }
    }

    pub(crate) fn value(&self, x: T) -> T {
        match self.kind {
            RegulationKind::Hill { lambda, r } => hill_value(lambda, r, x),
            RegulationKind::ShiftedHill { lambda, r, shift } => hill_value(lambda, r, x + shift),
            RegulationKind::Affine { a, b } => a * x + b,
        }
    }

    pub(crate) fn slope(&self, x: T) -> T {
        self.value_slope(x).1
    }

    /// `(f(x), f'(x))` sharing the power evaluation.
    pub(crate) fn value_slope(&self, x: T) -> (T, T) {
        match self.kind {
            RegulationKind::Hill { lambda, r } => hill_value_slope(lambda, r, x),
            RegulationKind::ShiftedHill { lambda, r, shift } => hill_value_slope(lambda, r, x + shift),
            RegulationKind::Affine { a, b } => (a * x + b, a),
        }
    }

    fn derivs(&self, x: T) -> Derivatives<T> {
        match self.kind {
            RegulationKind::Hill { lambda, r } => hill_derivs(lambda, r, x),
            RegulationKind::ShiftedHill { lambda, r, shift } => hill_derivs(lambda, r, x + shift),
            RegulationKind::Affine { a, .. } => Derivatives { d1: a, d2: T::zero(), d3: T::zero() },
        }
    }

    fn log_sens(&self, x: T) -> T {
        x * self.slope(x) / self.value(x)
    }
}

fn check_domain<T: Scalar>(x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { x: x.as_f64() })
    }
}

fn hill_value<T: Scalar>(lambda: T, r: T, y: T) -> T {
    let w = (T::one() + y.powf(r)).recip();
    lambda + (T::one() - lambda) * w
}

fn hill_value_slope<T: Scalar>(lambda: T, r: T, y: T) -> (T, T) {
    let u = y.powf(r);
    let w = (T::one() + u).recip();
    let s1 = if y == T::zero() {
        power_over_denominator(r, 1, y)
    } else if u <= T::one() {
        u * w / y
    } else {
        (y * (T::one() + u.recip())).recip()
    };
    let c = T::one() - lambda;
    (lambda + c * w, -c * term(r, s1) * w)
}

/// `y^(r-k) / (1 + y^r)`, evaluated without overflow for large `y`.
fn power_over_denominator<T: Scalar>(r: T, k: i32, y: T) -> T {
    let u = y.powf(r);
    if u <= T::one() {
        y.powf(r - T::from_i32(k).unwrap()) / (T::one() + u)
    } else {
        y.powi(-k) / (T::one() + u.recip())
    }
}

fn term<T: Scalar>(coef: T, s: T) -> T {
    if coef == T::zero() {
        T::zero()
    } else {
        coef * s
    }
}

fn hill_derivs<T: Scalar>(lambda: T, r: T, y: T) -> Derivatives<T> {
    // f = λ + (1 - λ) g with g = 1/(1 + y^r)
    let w = (T::one() + y.powf(r)).recip();
    let s1 = power_over_denominator(r, 1, y);
    let s2 = power_over_denominator(r, 2, y);
    let s3 = power_over_denominator(r, 3, y);
    let (one, two, six) = (T::one(), T::lit(2.0), T::lit(6.0));
    let g1 = -term(r, s1) * w;
    let g2 = (-term(r * (r - one), s2) + two * term(r * r, s1 * s1)) * w;
    let g3 = (-term(r * (r - one) * (r - two), s3) + six * term(r * r * (r - one), s1 * s2)
        - six * term(r * r * r, s1 * s1 * s1))
        * w;
    let c = one - lambda;
    Derivatives { d1: c * g1, d2: c * g2, d3: c * g3 }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = RegulationFunction<f64>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(F::hill(0.0, 2.0).unwrap().eval(1.0).unwrap(), 0.5);
        assert_eq!(F::affine(1.0, 1.0).unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(F::hill(4.0, 1.0).unwrap().eval(3.0).unwrap(), 3.25);
    }

    #[test]
    fn eval_rejects_negative_argument() {
        let f = F::hill(0.0, 2.0).unwrap();
        assert_eq!(f.eval(-1.0), Err(Error::Domain { x: -1.0 }));
        assert!(f.derivatives(f64::NAN).is_err());
    }

    #[test]
    fn derivative_examples() {
        let f = F::hill(0.0, 2.0).unwrap();
        let d = f.derivatives(1.0).unwrap();
        assert!(close(d.d1, -0.5, 1e-15) && close(d.d2, 0.5, 1e-15) && d.d3.abs() < 1e-15);
        let d0 = f.derivatives(0.0).unwrap();
        assert_eq!((d0.d1, d0.d2, d0.d3), (0.0, -2.0, 0.0));
        let a = F::affine(1.0, 1.0).unwrap().derivatives(7.5).unwrap();
        assert_eq!((a.d1, a.d2, a.d3), (1.0, 0.0, 0.0));
    }

    #[test]
    fn hill_r_one_at_origin_is_finite() {
        let d = F::hill(0.0, 1.0).unwrap().derivatives(0.0).unwrap();
        // 1/(1+x): -1, 2, -6
        assert_eq!((d.d1, d.d2, d.d3), (-1.0, 2.0, -6.0));
    }

    #[test]
    fn derivatives_stay_finite_far_out() {
        let d = F::hill(0.0, 4.0).unwrap().derivatives(1e200).unwrap();
        assert!(d.d1.is_finite() && d.d2.is_finite() && d.d3.is_finite());
        assert!(d.d1 <= 0.0);
    }

    #[test]
    fn schwarzian_examples() {
        assert!(close(F::hill(0.0, 2.0).unwrap().schwarzian(1.0).unwrap(), -1.5, 1e-14));
        assert_eq!(F::affine(2.0, 3.0).unwrap().schwarzian(4.0).unwrap(), 0.0);
        let mobius = F::hill(4.0, 1.0).unwrap();
        for x in [0.5, 1.0, 2.0] {
            assert!(mobius.schwarzian(x).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn schwarzian_singular_where_slope_vanishes() {
        let f = F::hill(0.0, 2.0).unwrap();
        assert_eq!(f.schwarzian(0.0), Err(Error::Singular { x: 0.0 }));
    }

    #[test]
    fn schwarzian_of_power_law_composition() {
        // the Schwarzian is invariant under post-composition with Möbius maps,
        // so every Hill function of order r has S = (1 - r^2) / (2 x^2)
        for (lambda, r) in [(0.0, 2.0), (3.0, 1.5), (0.2, 4.0), (7.0, 2.5)] {
            let f = F::hill(lambda, r).unwrap();
            for x in [0.05, 0.3, 1.0, 2.7, 40.0] {
                let expected = (1.0 - r * r) / (2.0 * x * x);
                assert!(close(f.schwarzian(x).unwrap(), expected, 1e-10), "{lambda} {r} {x}");
            }
        }
    }

    #[test]
    fn convexity_examples() {
        let hill = F::hill(0.0, 2.0).unwrap();
        assert_eq!(hill.check_gamma_half_convex(0.1, 10.0, 256, 1e-9).unwrap(), Convexity::StrictlyConvex);
        let aff = F::affine(1.0, 1.0).unwrap();
        assert_eq!(aff.check_gamma_half_convex(0.1, 10.0, 256, 1e-9).unwrap(), Convexity::Convex);
        let mobius = F::hill(4.0, 1.0).unwrap();
        assert_eq!(mobius.check_gamma_half_convex(0.1, 10.0, 256, 1e-9).unwrap(), Convexity::Convex);
        assert_eq!(hill.certify().unwrap(), Convexity::StrictlyConvex);
    }

    #[test]
    fn convexity_scan_validates_arguments() {
        let f = F::hill(0.0, 2.0).unwrap();
        assert!(matches!(f.check_gamma_half_convex(0.0, 1.0, 64, 1e-9), Err(Error::InvalidInterval { .. })));
        assert!(matches!(f.check_gamma_half_convex(2.0, 1.0, 64, 1e-9), Err(Error::InvalidInterval { .. })));
        assert!(matches!(f.check_gamma_half_convex(0.1, 1.0, 8, 1e-9), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn log_sensitivity_examples() {
        assert_eq!(F::hill(0.0, 2.0).unwrap().log_sensitivity_sup(), 2.0);
        assert!(close(F::hill(4.0, 1.0).unwrap().log_sensitivity_sup(), 1.0 / 3.0, 1e-15));
        assert_eq!(F::affine(1.0, 1.0).unwrap().log_sensitivity_sup(), 1.0);
    }

    #[test]
    fn shifted_hill_sup_matches_dense_scan() {
        for (lambda, r, s) in [(0.0, 2.0, 0.5), (3.0, 2.0, 0.3), (0.25, 3.0, 1.0)] {
            let f = F::shifted_hill(lambda, r, s).unwrap();
            let sup = f.log_sensitivity_sup();
            let scan = log_space(1e-6, 1e6, 20_000)
                .into_iter()
                .map(|x| f.log_sensitivity(x).unwrap().abs())
                .fold(0.0, f64::max);
            assert!(scan <= sup + 1e-9, "{scan} > {sup}");
            assert!(sup - scan < 1e-5 * sup.max(1.0), "{lambda} {r} {s}: {sup} vs {scan}");
        }
    }

    #[test]
    fn constructor_rejections() {
        assert!(F::hill(1.0, 2.0).is_err());
        assert!(F::hill(-0.5, 2.0).is_err());
        assert!(F::hill(0.0, 0.5).is_err());
        assert!(F::affine(-1.0, 5.0).is_err());
        assert!(F::affine(1.0, 0.0).is_err());
        assert!(F::shifted_hill(0.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn monotonicity_and_bounds() {
        let rep = F::hill(0.0, 2.0).unwrap();
        assert_eq!(rep.monotonicity(), Monotonicity::Decreasing);
        assert_eq!(rep.supremum(), Some(1.0));
        let act = F::hill(5.0, 2.0).unwrap();
        assert_eq!(act.monotonicity().sign(), 1);
        assert_eq!(act.supremum(), Some(5.0));
        let shifted = F::shifted_hill(0.0, 2.0, 1.0).unwrap();
        assert_eq!(shifted.supremum(), Some(0.5));
        assert_eq!(F::affine(1.0, 1.0).unwrap().supremum(), None);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f: F = serde_json::from_str(r#"{"kind":"shifted_hill","lambda":0.0,"r":2.0,"shift":0.5}"#).unwrap();
        assert_eq!(f.kind(), RegulationKind::ShiftedHill { lambda: 0.0, r: 2.0, shift: 0.5 });
        let back: F = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<F>(r#"{"kind":"hill","lambda":1.0,"r":2.0}"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let f = RegulationFunction::<f32>::hill(0.0, 2.0).unwrap();
        assert_eq!(f.eval(1.0).unwrap(), 0.5f32);
        assert!((f.schwarzian(1.0).unwrap() + 1.5).abs() < 1e-5);
        assert_eq!(f.log_sensitivity_sup(), 2.0f32);
    }
}
