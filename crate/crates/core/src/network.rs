//! Cyclic feedback networks `ẋ_i = α_i f_i(x_{i-1}) - x_i` (with `x_0 = x_d`)
//! and their equilibria.
//!
//! Equilibria are in bijection with fixed points of the composed map
//! `f̃ = α_d f_d ∘ … ∘ α_1 f_1`: a fixed point `t` of `f̃` lifts to the
//! equilibrium `x̄_1 = α_1 f_1(t), x̄_i = α_i f_i(x̄_{i-1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regulation::{RegulationFunction, RegulationKind};
use crate::scalar::Scalar;
use crate::search::{bisect, golden_max};

/// Number of grid points used to bracket fixed points of `f̃`.
pub const FIXED_POINT_GRID: usize = 4096;

/// Default absolute tolerance on `|f̃(t) - t|`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative margin added to the propagated bound on `f̃`.
const BOUND_MARGIN: f64 = 0.01;

/// A cyclic feedback loop of dimension `d ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "NetworkParts<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct CyclicNetwork<T> {
    functions: Vec<RegulationFunction<T>>,
    alpha: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
struct NetworkParts<T> {
    functions: Vec<RegulationFunction<T>>,
    alpha: Vec<T>,
}

impl<T: Scalar> TryFrom<NetworkParts<T>> for CyclicNetwork<T> {
    type Error = Error;

    fn try_from(parts: NetworkParts<T>) -> Result<Self> {
        Self::new(parts.functions, parts.alpha)
    }
}

/// An equilibrium of the network together with its diagnostic values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium<T> {
    pub x_bar: Vec<T>,
    /// `∏ α_i f_i'(x̄_{i-1})`, the slope of `f̃` at the fixed point.
    pub p: T,
    /// `∏ x̄_{i-1} f_i'(x̄_{i-1}) / f_i(x̄_{i-1})`.
    pub g: T,
    /// `max_i |α_i f_i(x̄_{i-1}) - x̄_i|`.
    pub residual: T,
    /// Set when two roots of `f̃(t) = t` merged (tangency).
    pub degenerate: bool,
}

/// Upper bound on `f̃` used as the fixed point search interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBound<T> {
    pub value: T,
    /// Some stage is affine, so the propagated bound may be far from tight.
    pub loose: bool,
}

impl<T: Scalar> CyclicNetwork<T> {
    pub fn new(functions: Vec<RegulationFunction<T>>, alpha: Vec<T>) -> Result<Self> {
        let d = functions.len();
        if d < 2 {
            return Err(Error::InvalidNetwork(format!("dimension must be at least 2, got {d}")));
        }
        if alpha.len() != d {
            return Err(Error::InvalidNetwork(format!(
                "alpha has {} entries but the network has {d} functions",
                alpha.len()
            )));
        }
        if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !(**a > T::zero() && a.is_finite())) {
            return Err(Error::InvalidNetwork(format!("alpha[{}] = {a} must be finite and > 0", i + 1)));
        }
        if !functions.iter().any(RegulationFunction::is_bounded) {
            return Err(Error::InvalidNetwork("at least one regulation function must be bounded".into()));
        }
        Ok(Self { functions, alpha })
    }

    /// `d` identical stages sharing one function and one production rate.
    pub fn uniform(d: usize, f: RegulationFunction<T>, alpha: T) -> Result<Self> {
        Self::new(vec![f; d], vec![alpha; d])
    }

    /// Same regulation functions, new production rates.
    pub fn with_alpha(&self, alpha: Vec<T>) -> Result<Self> {
        Self::new(self.functions.clone(), alpha)
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[RegulationFunction<T>] {
        &self.functions
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Number of decreasing regulations.
    pub fn decreasing_count(&self) -> usize {
        self.functions.iter().filter(|f| f.is_decreasing()).count()
    }

    pub fn is_even(&self) -> bool {
        self.decreasing_count() % 2 == 0
    }

    /// Index of the species regulating species `i` (0-based, cyclic).
    #[inline]
    pub fn upstream(&self, i: usize) -> usize {
        (i + self.dim() - 1) % self.dim()
    }

    /// Production term `α_i f_i(x_{i-1})` of stage `i` (0-based).
    #[inline]
    pub(crate) fn production(&self, i: usize, x: &[T]) -> T {
        self.alpha[i] * self.functions[i].value(x[self.upstream(i)])
    }

    /// `f̃(t) = α_d f_d(… α_1 f_1(t))` for `t ≥ 0`.
    pub fn composed_map(&self, t: T) -> T {
        self.functions
            .iter()
            .zip(&self.alpha)
            .fold(t, |y, (f, a)| *a * f.value(y))
    }

    /// `f̃'(t)` by the chain rule.
    pub fn composed_slope(&self, t: T) -> T {
        let mut y = t;
        let mut slope = T::one();
        for (f, a) in self.functions.iter().zip(&self.alpha) {
            let (v, s) = f.value_slope(y);
            slope = slope * *a * s;
            y = *a * v;
        }
        slope
    }

    /// Cascade `x̄_1 = α_1 f_1(x_d)`, `x̄_i = α_i f_i(x̄_{i-1})`.
    pub fn lift(&self, x_d: T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim());
        let mut y = x_d;
        for (f, a) in self.functions.iter().zip(&self.alpha) {
            y = *a * f.value(y);
            out.push(y);
        }
        out
    }

    /// `p^α_x = ∏ α_i f_i'(x_{i-1})`.
    pub fn p_value(&self, x: &[T]) -> Result<T> {
        self.check_state(x, false)?;
        Ok((0..self.dim()).fold(T::one(), |acc, i| acc * self.alpha[i] * self.functions[i].slope(x[self.upstream(i)])))
    }

    /// The unique production rates making `x` an equilibrium:
    /// `Γ(x)_i = x_i / f_i(x_{i-1})`.
    pub fn gamma_map(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_state(x, true)?;
        Ok((0..self.dim()).map(|i| x[i] / self.functions[i].value(x[self.upstream(i)])).collect())
    }

    /// `G(x) = ∏ x_{i-1} f_i'(x_{i-1}) / f_i(x_{i-1})`, equal to `p^{Γ(x)}_x`.
    pub fn g_value(&self, x: &[T]) -> Result<T> {
        self.check_state(x, true)?;
        Ok((0..self.dim()).fold(T::one(), |acc, i| {
            let y = x[self.upstream(i)];
            let f = &self.functions[i];
            acc * y * f.slope(y) / f.value(y)
        }))
    }

    /// `D = ∏_k sup_{x>0} |x f_k'(x) / f_k(x)|`.
    pub fn d_value(&self) -> T {
        self.functions.iter().fold(T::one(), |acc, f| acc * f.log_sensitivity_sup())
    }

    /// Per-coordinate upper bounds of the absorbing box, obtained by
    /// propagating stage bounds around the cycle from a bounded stage.
    pub fn stage_bounds(&self) -> Vec<T> {
        let d = self.dim();
        let start = self
            .functions
            .iter()
            .position(RegulationFunction::is_bounded)
            .expect("constructor guarantees a bounded stage");
        let stage_max = |i: usize, ub_in: T| {
            let f = &self.functions[i];
            self.alpha[i] * f.value(T::zero()).max(f.value(ub_in))
        };
        let mut ub = vec![T::infinity(); d];
        ub[start] = self.alpha[start] * self.functions[start].supremum().unwrap();
        for step in 1..d {
            let i = (start + step) % d;
            ub[i] = stage_max(i, ub[self.upstream(i)]);
        }
        for step in 0..d {
            let i = (start + step) % d;
            ub[i] = ub[i].min(stage_max(i, ub[self.upstream(i)]));
        }
        ub
    }

    /// Search interval `[0, B]` for fixed points of `f̃`.
    pub fn search_bound(&self) -> SearchBound<T> {
        let ub = self.stage_bounds()[self.dim() - 1];
        SearchBound {
            value: ub * (T::one() + T::lit(BOUND_MARGIN)),
            loose: self.functions.iter().any(|f| matches!(f.kind(), RegulationKind::Affine { .. })),
        }
    }

    /// `max_i |α_i f_i(x_{i-1}) - x_i|`.
    pub fn residual(&self, x: &[T]) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc.max((self.production(i, x) - x[i]).abs()))
    }

    /// Builds the equilibrium record lifted from the fixed point `t` of `f̃`.
    pub fn equilibrium_at(&self, t: T, degenerate: bool) -> Equilibrium<T> {
        let x_bar = self.lift(t);
        let p = self.p_value(&x_bar).expect("lifted state has dimension d");
        let g = self.g_value(&x_bar).expect("lifted state is positive");
        let residual = self.residual(&x_bar);
        Equilibrium { x_bar, p, g, residual, degenerate }
    }

    /// All equilibria, sorted by `x̄_d` ascending.
    ///
    /// Fixed points of `f̃` are bracketed on a uniform grid over the search
    /// interval, augmented with the critical points of `f̃(t) - t` (where
    /// `f̃' = 1`) so that closely spaced roots stay separated. Each bracket is
    /// bisected until `|f̃(t) - t| ≤ tol · max(1, t)` and polished with one
    /// Newton step. Roots closer than `10 · tol` are merged and flagged
    /// degenerate.
    pub fn find_equilibria(&self, tol: T) -> Result<Vec<Equilibrium<T>>> {
        let roots = self.fixed_points(tol)?;
        Ok(roots.into_iter().map(|(t, degenerate)| self.equilibrium_at(t, degenerate)).collect())
    }

    fn fixed_points(&self, tol: T) -> Result<Vec<(T, bool)>> {
        let bound = self.search_bound().value;
        let h = |t: T| self.composed_map(t) - t;
        let last = T::count(FIXED_POINT_GRID - 1);
        let mut grid: Vec<T> = (0..FIXED_POINT_GRID).map(|k| bound * T::count(k) / last).collect();

        if self.is_even() {
            grid.extend(self.critical_points(&grid));
            grid.sort_by(|a, b| a.partial_cmp(b).expect("grid is finite"));
            grid.dedup();
        }

        let values: Vec<T> = grid.iter().map(|&t| h(t)).collect();
        let mut roots: Vec<T> = Vec::new();
        for k in 0..grid.len() {
            if values[k] == T::zero() {
                roots.push(grid[k]);
                continue;
            }
            if k + 1 < grid.len() && values[k + 1] != T::zero() && (values[k] > T::zero()) != (values[k + 1] > T::zero()) {
                roots.push(self.refine_root(grid[k], grid[k + 1], tol)?);
            }
        }

        let merge_radius = T::lit(10.0) * tol;
        let mut merged: Vec<(T, bool)> = Vec::with_capacity(roots.len());
        for t in roots {
            match merged.last_mut() {
                Some((prev, degenerate)) if (t - *prev).abs() < merge_radius => {
                    *prev = (*prev + t) / T::lit(2.0);
                    *degenerate = true;
                }
                _ => merged.push((t, false)),
            }
        }
        if merged.len() > 3 {
            return Err(Error::SuspectCount { count: merged.len() });
        }
        Ok(merged)
    }

    /// Points where `f̃'(t) = 1` plus the location of the peak slope.
    fn critical_points(&self, grid: &[T]) -> Vec<T> {
        let excess = |t: T| self.composed_slope(t) - T::one();
        let slopes: Vec<T> = grid.iter().map(|&t| excess(t)).collect();
        let mut out = Vec::new();
        for k in 0..grid.len() - 1 {
            if (slopes[k] > T::zero()) != (slopes[k + 1] > T::zero()) {
                let b = bisect(excess, grid[k], grid[k + 1], |_, v| v == T::zero(), 200);
                out.push(b.t);
            }
        }
        let peak = (0..slopes.len())
            .max_by(|&a, &b| slopes[a].partial_cmp(&slopes[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let lo = grid[peak.saturating_sub(1)];
        let hi = grid[(peak + 1).min(grid.len() - 1)];
        let (t_peak, s_peak) = golden_max(&excess, lo, hi, (hi - lo) * T::epsilon());
        out.push(t_peak);
        // a slope excursion above 1 hidden inside one grid cell
        if s_peak > T::zero() && slopes[peak.saturating_sub(1)] <= T::zero() {
            out.push(bisect(excess, lo, t_peak, |_, v| v == T::zero(), 200).t);
        }
        if s_peak > T::zero() && slopes[(peak + 1).min(grid.len() - 1)] <= T::zero() {
            out.push(bisect(excess, t_peak, hi, |_, v| v == T::zero(), 200).t);
        }
        out.retain(|t| t.is_finite() && *t >= T::zero());
        out
    }

    fn refine_root(&self, lo: T, hi: T, tol: T) -> Result<T> {
        let h = |t: T| self.composed_map(t) - t;
        let accept = |t: T, v: T| v.abs() <= tol * t.abs().max(T::one());
        let b = bisect(h, lo, hi, accept, 400);
        let (mut t, mut v) = (b.t, b.value);
        let slope = self.composed_slope(t) - T::one();
        if slope != T::zero() && slope.is_finite() {
            let candidate = t - v / slope;
            if candidate >= b.lo && candidate <= b.hi {
                let cv = h(candidate);
                if cv.abs() < v.abs() {
                    t = candidate;
                    v = cv;
                }
            }
        }
        if accept(t, v) {
            Ok(t)
        } else {
            Err(Error::ConvergenceFailure { t: t.as_f64(), residual: v.as_f64() })
        }
    }

    fn check_state(&self, x: &[T], strictly_positive: bool) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidNetwork(format!(
                "state has {} entries, network dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        for &v in x {
            let ok = if strictly_positive { v > T::zero() } else { v >= T::zero() };
            if !ok || !v.is_finite() {
                return Err(Error::Domain { x: v.as_f64() });
            }
        }
        Ok(())
    }
}
