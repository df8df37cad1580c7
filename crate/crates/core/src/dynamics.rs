//! Time integration of the loop and long-time attractor detection.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{CyclicNetwork, Equilibrium, DEFAULT_TOL};
use crate::parallel::map_ordered;
use crate::scalar::Scalar;
use crate::stability::spectrum_report;

pub const DEFAULT_T_END: f64 = 200.0;
pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;
pub const DEFAULT_TRANSIENT: f64 = 50.0;
pub const DEFAULT_EQ_RADIUS: f64 = 1e-6;
pub const DEFAULT_PERIOD_RTOL: f64 = 1e-3;

/// `ẋ_i = α_i f_i(x_{i-1}) - x_i`.
pub fn vector_field<T: Scalar>(net: &CyclicNetwork<T>, x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); net.dim()];
    field_into(net, x, &mut out);
    out
}

fn field_into<T: Scalar>(net: &CyclicNetwork<T>, x: &[T], out: &mut [T]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = net.production(i, x) - x[i];
    }
}

/// Step size control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Initial step; estimated from the field when `None`.
    pub h_init: Option<T>,
    /// Take uniform steps of this size with no error control.
    pub fixed_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Scalar> IntegratorOptions<T> {
    pub fn new(rel_tol: T, abs_tol: T) -> Self {
        Self { rel_tol, abs_tol, h_init: None, fixed_step: None, max_steps: 5_000_000 }
    }
}

impl<T: Scalar> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self::new(T::lit(DEFAULT_RTOL), T::lit(DEFAULT_ATOL))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Accepted steps of a solution with the field value at each, which gives
/// a cubic Hermite interpolant between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub derivatives: Vec<Vec<T>>,
    pub stats: StepStats,
}

impl<T: Scalar> Trajectory<T> {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_end(&self) -> T {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("non-empty trajectory")
    }

    /// State at time `t` within the recorded span.
    pub fn interpolate(&self, t: T) -> Vec<T> {
        let k = match self.times.binary_search_by(|s| s.partial_cmp(&t).expect("finite times")) {
            Ok(k) => return self.states[k].clone(),
            Err(0) => return self.states[0].clone(),
            Err(k) if k >= self.times.len() => return self.final_state().to_vec(),
            Err(k) => k - 1,
        };
        let theta = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (0..self.dim()).map(|i| self.hermite(k, i, theta)).collect()
    }

    /// Cubic Hermite interpolant of component `i` on step `k` at local
    /// coordinate `theta ∈ [0, 1]`.
    pub(crate) fn hermite(&self, k: usize, i: usize, theta: T) -> T {
        let h = self.times[k + 1] - self.times[k];
        let (y0, y1) = (self.states[k][i], self.states[k + 1][i]);
        let (m0, m1) = (self.derivatives[k][i] * h, self.derivatives[k + 1][i] * h);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        (two * t3 - three * t2 + T::one()) * y0
            + (t3 - two * t2 + theta) * m0
            + (three * t2 - two * t3) * y1
            + (t3 - t2) * m1
    }

    /// Appends `other`, which must start where this trajectory ends.
    pub fn append(&mut self, other: Trajectory<T>) {
        let skip = usize::from(!self.is_empty());
        self.times.extend(other.times.into_iter().skip(skip));
        self.states.extend(other.states.into_iter().skip(skip));
        self.derivatives.extend(other.derivatives.into_iter().skip(skip));
        self.stats.accepted += other.stats.accepted;
        self.stats.rejected += other.stats.rejected;
        self.stats.evaluations += other.stats.evaluations;
    }

    /// CSV with header `t,x1,...,xd` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim()).map(|i| format!("x{i}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            write!(out, "{:.16e}", t.as_f64())?;
            for v in x {
                write!(out, ",{:.16e}", v.as_f64())?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth order weights minus embedded fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_BETA: f64 = 0.04;

/// Integrates `ẏ = rhs(y)` from `y0` over `[0, t_end]` with the
/// Dormand–Prince 5(4) pair and a PI step size controller.
///
/// Components that dip below zero by less than `abs_tol` are clamped to zero
/// after every accepted step.
pub fn integrate_rhs<T, F>(rhs: F, y0: &[T], t_end: T, opts: &IntegratorOptions<T>) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    let n = y0.len();
    let mut stats = StepStats::default();
    let coef = |v: f64| T::lit(v);

    let mut t = T::zero();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); n]; 7];
    rhs(&y, &mut k[0]);
    stats.evaluations += 1;

    let mut traj = Trajectory {
        times: vec![t],
        states: vec![y.clone()],
        derivatives: vec![k[0].clone()],
        stats,
    };
    if !(t_end > T::zero()) {
        return Ok(traj);
    }

    let scale = |a: T, b: T| opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
    let mut h = match (opts.fixed_step, opts.h_init) {
        (Some(h), _) | (None, Some(h)) => h,
        (None, None) => initial_step(&rhs, &y, &k[0], opts, &mut stats),
    };
    let mut err_old = T::lit(1e-4);
    let mut stage = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    let mut rejected_last = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepLimit { max_steps: opts.max_steps });
        }
        let mut last = false;
        if t + h >= t_end - T::lit(64.0) * T::epsilon() * t_end.abs().max(T::one()) {
            h = t_end - t;
            last = true;
        }
        if h <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
            return Err(Error::StepSizeUnderflow { t: t.as_f64(), h: h.as_f64() });
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc + coef(a) * kj[i];
                    }
                }
                stage[i] = y[i] + h * acc;
            }
            rhs(&stage, &mut k[s]);
            stats.evaluations += 1;
        }
        // the last stage point is the new state (FSAL)
        y_new.copy_from_slice(&stage);

        let err = if opts.fixed_step.is_some() {
            T::zero()
        } else {
            let mut sum = T::zero();
            for i in 0..n {
                let mut e = T::zero();
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e = e + coef(E[s]) * ks[i];
                    }
                }
                let r = h * e / scale(y[i], y_new[i]);
                sum = sum + r * r;
            }
            (sum / T::count(n.max(1))).sqrt()
        };

        if err <= T::one() {
            t = if last { t_end } else { t + h };
            let mut clamped = false;
            for v in y_new.iter_mut() {
                if *v < T::zero() && *v > -opts.abs_tol {
                    *v = T::zero();
                    clamped = true;
                }
            }
            y.copy_from_slice(&y_new);
            if clamped {
                rhs(&y, &mut k[0]);
                stats.evaluations += 1;
            } else {
                k.swap(0, 6);
            }
            stats.accepted += 1;
            traj.times.push(t);
            traj.states.push(y.clone());
            traj.derivatives.push(k[0].clone());

            if opts.fixed_step.is_none() {
                let expo = T::lit(0.2 - PI_BETA * 0.75);
                let fac = err.max(T::lit(1e-10)).powf(expo) / err_old.powf(T::lit(PI_BETA));
                let fac = (fac / T::lit(SAFETY)).max(T::lit(1.0 / FAC_MAX)).min(T::lit(1.0 / FAC_MIN));
                let mut h_new = h / fac;
                if rejected_last {
                    h_new = h_new.min(h);
                }
                err_old = err.max(T::lit(1e-4));
                rejected_last = false;
                if !last {
                    h = h_new;
                }
            }
        } else {
            stats.rejected += 1;
            rejected_last = true;
            let fac = err.powf(T::lit(0.2 - PI_BETA * 0.75)) / T::lit(SAFETY);
            h = h / fac.min(T::lit(1.0 / FAC_MIN));
        }
    }
    traj.stats = stats;
    Ok(traj)
}

fn initial_step<T, F>(rhs: &F, y: &[T], f0: &[T], opts: &IntegratorOptions<T>, stats: &mut StepStats) -> T
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    let n = y.len();
    let sc: Vec<T> = y.iter().map(|v| opts.abs_tol + opts.rel_tol * v.abs()).collect();
    let norm = |v: &[T]| {
        (v.iter().zip(&sc).map(|(a, s)| (*a / *s) * (*a / *s)).fold(T::zero(), |a, b| a + b) / T::count(n.max(1))).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let y1: Vec<T> = y.iter().zip(f0).map(|(a, b)| *a + h0 * *b).collect();
    let mut f1 = vec![T::zero(); n];
    rhs(&y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1)
}

/// Integrates the network from `x0 ≥ 0` over `[0, t_end]`.
pub fn integrate<T: Scalar>(net: &CyclicNetwork<T>, x0: &[T], t_end: T, rel_tol: T, abs_tol: T) -> Result<Trajectory<T>> {
    integrate_with(net, x0, t_end, &IntegratorOptions::new(rel_tol, abs_tol))
}

pub fn integrate_with<T: Scalar>(
    net: &CyclicNetwork<T>,
    x0: &[T],
    t_end: T,
    opts: &IntegratorOptions<T>,
) -> Result<Trajectory<T>> {
    check_initial(net, x0)?;
    integrate_rhs(|x, out| field_into(net, x, out), x0, t_end, opts)
}

fn check_initial<T: Scalar>(net: &CyclicNetwork<T>, x0: &[T]) -> Result<()> {
    if x0.len() != net.dim() {
        return Err(Error::InvalidNetwork(format!(
            "initial state has {} entries, network dimension is {}",
            x0.len(),
            net.dim()
        )));
    }
    match x0.iter().find(|v| !(**v >= T::zero() && v.is_finite())) {
        Some(v) => Err(Error::Domain { x: v.as_f64() }),
        None => Ok(()),
    }
}

/// Long-time behaviour of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum AttractorKind<T> {
    ConvergedToEquilibrium {
        x_bar: Vec<T>,
        /// Position in the equilibrium list handed to the detector.
        index: usize,
    },
    PeriodicOrbit {
        period: T,
        amplitude: Vec<T>,
        /// Largest distance between states at consecutive section crossings.
        poincare_residual: T,
        returns: usize,
    },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorReport<T> {
    #[serde(flatten)]
    pub kind: AttractorKind<T>,
    pub transient_time: T,
}

impl<T> AttractorReport<T> {
    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, AttractorKind::PeriodicOrbit { .. })
    }

    pub fn equilibrium_index(&self) -> Option<usize> {
        match self.kind {
            AttractorKind::ConvergedToEquilibrium { index, .. } => Some(index),
            _ => None,
        }
    }
}

/// Attractor detection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectOptions<T> {
    /// Time discarded before looking for a periodic orbit.
    pub transient: T,
    /// Max-norm radius around an equilibrium counted as converged.
    pub eq_radius: T,
    /// Relative agreement required between return times.
    pub period_rtol: T,
    /// Fraction of the span that must stay near an equilibrium.
    pub tail_fraction: T,
    /// Neighbourhood of a stable equilibrium, relative to `1 + |x̄|`, in
    /// which a decaying distance counts as convergence.
    pub capture_radius: T,
    /// Required shrink factor of the distance envelope across the tail.
    pub decay_ratio: T,
    pub min_returns: usize,
}

impl<T: Scalar> Default for DetectOptions<T> {
    fn default() -> Self {
        Self {
            transient: T::lit(DEFAULT_TRANSIENT),
            eq_radius: T::lit(DEFAULT_EQ_RADIUS),
            period_rtol: T::lit(DEFAULT_PERIOD_RTOL),
            tail_fraction: T::lit(0.1),
            capture_radius: T::lit(1e-2),
            decay_ratio: T::lit(0.9),
            min_returns: 5,
        }
    }
}

fn max_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// Classifies the long-time behaviour of `traj`.
///
/// Convergence: the last `tail_fraction` of the span stays within
/// `eq_radius` of one of `equilibria`, or, for a linearly stable
/// equilibrium, stays within `capture_radius · (1 + |x̄|)` while the distance
/// envelope over the second half of the tail is at most `decay_ratio` times
/// that over the first half (slow but certain convergence). Periodicity:
/// upward crossings of the section `x_1 = (max + min)/2` (taken after the
/// transient) give at least `min_returns` consecutive return times agreeing
/// to `period_rtol`, and the states at those crossings repeat.
pub fn detect_attractor<T: Scalar>(traj: &Trajectory<T>, equilibria: &[Equilibrium<T>], opts: &DetectOptions<T>) -> AttractorReport<T> {
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let span = t1 - t0;
    let tail_start = t1 - opts.tail_fraction * span;
    let tail_mid = t1 - opts.tail_fraction * span / T::lit(2.0);
    let tail: Vec<usize> = (0..traj.len()).filter(|&k| traj.times[k] >= tail_start).collect();
    let d = traj.dim();

    for (index, eq) in equilibria.iter().enumerate() {
        let dist = |k: usize| max_dist(&traj.states[k], &eq.x_bar);
        let converged = |k: usize| dist(k) <= opts.eq_radius;
        let found = |radius: T| {
            let mut first = traj.len() - 1;
            while first > 0 && dist(first - 1) <= radius {
                first -= 1;
            }
            AttractorReport {
                kind: AttractorKind::ConvergedToEquilibrium { x_bar: eq.x_bar.clone(), index },
                transient_time: traj.times[first] - t0,
            }
        };
        if tail.iter().all(|&k| converged(k)) {
            return found(opts.eq_radius);
        }

        let report = spectrum_report(eq.p, d, None);
        if !(report.hyperbolic && report.stable_dim == d) {
            continue;
        }
        let scale = eq.x_bar.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let capture = opts.capture_radius * (T::one() + scale);
        let (mut early, mut late) = (T::zero(), T::zero());
        for &k in &tail {
            let v = dist(k);
            if traj.times[k] < tail_mid {
                early = early.max(v);
            } else {
                late = late.max(v);
            }
        }
        if early <= capture && late <= opts.decay_ratio * early {
            return found(capture);
        }
    }

    periodic_orbit(traj, opts).unwrap_or(AttractorReport { kind: AttractorKind::Undetermined, transient_time: span })
}

fn periodic_orbit<T: Scalar>(traj: &Trajectory<T>, opts: &DetectOptions<T>) -> Option<AttractorReport<T>> {
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let transient = if t1 - t0 >= T::lit(2.0) * opts.transient { opts.transient } else { (t1 - t0) / T::lit(2.0) };
    let start = traj.times.iter().position(|t| *t - t0 >= transient)?;
    let (lo, hi) = traj.states[start..]
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x[0]), hi.max(x[0])));
    let level = (lo + hi) / T::lit(2.0);
    if !(hi - lo > opts.eq_radius) {
        return None;
    }

    let crossings: Vec<T> = (start..traj.len() - 1)
        .filter(|&k| traj.states[k][0] < level && traj.states[k + 1][0] >= level)
        .map(|k| section_crossing(traj, k, level))
        .collect();
    if crossings.len() < opts.min_returns + 1 {
        return None;
    }
    let returns: Vec<T> = crossings.windows(2).map(|w| w[1] - w[0]).collect();

    // longest run of trailing return times that agree with their mean
    let mut best = 0;
    for len in 1..=returns.len() {
        let run = &returns[returns.len() - len..];
        let mean = run.iter().fold(T::zero(), |a, b| a + *b) / T::count(len);
        if run.iter().all(|r| (*r - mean).abs() <= opts.period_rtol * mean) {
            best = len;
        } else {
            break;
        }
    }
    if best < opts.min_returns {
        return None;
    }
    let run = &returns[returns.len() - best..];
    let period = run.iter().fold(T::zero(), |a, b| a + *b) / T::count(best);
    let first_crossing = crossings[crossings.len() - 1 - best];

    let window: Vec<&Vec<T>> = traj.times.iter().zip(&traj.states).filter(|(t, _)| **t >= first_crossing).map(|(_, x)| x).collect();
    let d = traj.dim();
    let amplitude: Vec<T> = (0..d)
        .map(|i| {
            let (lo, hi) = window.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x[i]), hi.max(x[i])));
            hi - lo
        })
        .collect();
    let max_amp = amplitude.iter().fold(T::zero(), |a, b| a.max(*b));
    let section_states: Vec<Vec<T>> = crossings[crossings.len() - 1 - best..].iter().map(|&c| traj.interpolate(c)).collect();
    let poincare_residual = section_states.windows(2).fold(T::zero(), |m, w| m.max(max_dist(&w[0], &w[1])));
    // a damped spiral also has regular return times; require the section
    // states to repeat
    if !(max_amp > opts.eq_radius) || poincare_residual > T::lit(10.0) * opts.period_rtol * max_amp {
        return None;
    }
    Some(AttractorReport {
        kind: AttractorKind::PeriodicOrbit { period, amplitude, poincare_residual, returns: best },
        transient_time: first_crossing - t0,
    })
}

/// Time in step `k` where the Hermite interpolant of `x_1` reaches `level`.
fn section_crossing<T: Scalar>(traj: &Trajectory<T>, k: usize, level: T) -> T {
    let (mut a, mut b) = (T::zero(), T::one());
    for _ in 0..60 {
        let m = (a + b) / T::lit(2.0);
        if traj.hermite(k, 0, m) < level {
            a = m;
        } else {
            b = m;
        }
    }
    let theta = (a + b) / T::lit(2.0);
    traj.times[k] + theta * (traj.times[k + 1] - traj.times[k])
}

/// End-to-end simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationOptions<T> {
    pub t_end: T,
    pub integrator: IntegratorOptions<T>,
    pub detect: DetectOptions<T>,
    /// Equilibrium solver tolerance.
    pub tol: T,
    /// Re-integrate once with doubled `t_end` when the first pass is
    /// inconclusive.
    pub allow_extension: bool,
}

impl<T: Scalar> Default for SimulationOptions<T> {
    fn default() -> Self {
        Self {
            t_end: T::lit(DEFAULT_T_END),
            integrator: IntegratorOptions::default(),
            detect: DetectOptions::default(),
            tol: T::lit(DEFAULT_TOL),
            allow_extension: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation<T> {
    pub trajectory: Trajectory<T>,
    pub report: AttractorReport<T>,
    /// The integration was extended to `2 t_end`.
    pub extended: bool,
}

/// Integrates from `x0` and classifies the outcome against the network's
/// equilibria. An `Undetermined` first pass is continued to `2 t_end` once.
pub fn simulate<T: Scalar>(net: &CyclicNetwork<T>, x0: &[T], opts: &SimulationOptions<T>) -> Result<Simulation<T>> {
    let equilibria = net.find_equilibria(opts.tol)?;
    simulate_against(net, x0, &equilibria, opts)
}

fn simulate_against<T: Scalar>(
    net: &CyclicNetwork<T>,
    x0: &[T],
    equilibria: &[Equilibrium<T>],
    opts: &SimulationOptions<T>,
) -> Result<Simulation<T>> {
    let mut trajectory = integrate_with(net, x0, opts.t_end, &opts.integrator)?;
    let mut report = detect_attractor(&trajectory, equilibria, &opts.detect);
    let mut extended = false;
    if opts.allow_extension && matches!(report.kind, AttractorKind::Undetermined) {
        let tail = integrate_with(net, trajectory.final_state(), opts.t_end, &opts.integrator)?;
        let offset = trajectory.t_end();
        let shifted = Trajectory { times: tail.times.iter().map(|t| *t + offset).collect(), ..tail };
        trajectory.append(shifted);
        report = detect_attractor(&trajectory, equilibria, &opts.detect);
        extended = true;
    }
    Ok(Simulation { trajectory, report, extended })
}

/// Outcome counts of a basin sampling run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinStats {
    pub equilibria: Vec<Vec<f64>>,
    /// Hits per equilibrium, in the order of `equilibria`.
    pub converged: Vec<usize>,
    pub periodic: usize,
    pub undetermined: usize,
    pub total: usize,
    /// Runs that needed the doubled horizon to resolve.
    pub extended: usize,
}

impl BasinStats {
    pub fn undetermined_fraction(&self) -> f64 {
        self.undetermined as f64 / self.total.max(1) as f64
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    out
}

/// `count` points of a Halton sequence in `[0, 1)^dim`, rotated by a
/// random shift drawn from `seed` (Cranley–Patterson).
pub fn quasi_random_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "at most {} dimensions supported", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (0..count)
        .map(|k| {
            (0..dim)
                .map(|j| {
                    let v = radical_inverse(k as u64 + 1, PRIMES[j]) + shift[j];
                    v - v.floor()
                })
                .collect()
        })
        .collect()
}

/// Integrates from `count` quasi-random points of the box `[low, high]` and
/// tallies where each run ends up. Deterministic for a fixed `seed`
/// regardless of the worker count.
pub fn sample_basins<T: Scalar>(
    net: &CyclicNetwork<T>,
    low: &[T],
    high: &[T],
    count: usize,
    seed: u64,
    opts: &SimulationOptions<T>,
) -> Result<BasinStats> {
    let d = net.dim();
    if low.len() != d || high.len() != d {
        return Err(Error::InvalidNetwork("sampling box must have one range per coordinate".into()));
    }
    if low.iter().zip(high).any(|(l, h)| !(*l >= T::zero() && h >= l && h.is_finite())) {
        return Err(Error::InvalidNetwork("sampling box must satisfy 0 <= low <= high < inf".into()));
    }
    if d > PRIMES.len() {
        return Err(Error::InvalidNetwork(format!("basin sampling supports at most {} dimensions", PRIMES.len())));
    }
    let equilibria = net.find_equilibria(opts.tol)?;
    let starts: Vec<Vec<T>> = quasi_random_points(d, count, seed)
        .into_iter()
        .map(|u| (0..d).map(|i| low[i] + (high[i] - low[i]) * T::lit(u[i])).collect())
        .collect();
    let outcomes = map_ordered(&starts, |x0| simulate_against(net, x0, &equilibria, opts).map(|s| (s.report, s.extended)));

    let mut stats = BasinStats {
        equilibria: equilibria.iter().map(|e| e.x_bar.iter().map(|v| v.as_f64()).collect()).collect(),
        converged: vec![0; equilibria.len()],
        periodic: 0,
        undetermined: 0,
        total: count,
        extended: 0,
    };
    for outcome in outcomes {
        let (report, extended) = outcome?;
        stats.extended += usize::from(extended);
        match report.kind {
            AttractorKind::ConvergedToEquilibrium { index, .. } => stats.converged[index] += 1,
            AttractorKind::PeriodicOrbit { .. } => stats.periodic += 1,
            AttractorKind::Undetermined => stats.undetermined += 1,
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regulation::RegulationFunction;

    type Net = CyclicNetwork<f64>;

    fn hill(lambda: f64, r: f64) -> RegulationFunction<f64> {
        RegulationFunction::hill(lambda, r).unwrap()
    }

    fn toggle(alpha: f64) -> Net {
        Net::uniform(2, hill(0.0, 2.0), alpha).unwrap()
    }

    fn repressilator(alpha: f64) -> Net {
        Net::uniform(3, hill(0.0, 4.0), alpha).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let net = Net::uniform(2, hill(0.0, 1.0), 1.0).unwrap();
        assert_eq!(vector_field(&net, &[0.0, 0.0]), vec![1.0, 1.0]);
        assert_eq!(vector_field(&repressilator(3.0), &[1.0, 1.0, 1.0]), vec![0.5, 0.5, 0.5]);
        for eq in toggle(3.0).find_equilibria(1e-12).unwrap() {
            assert!(vector_field(&toggle(3.0), &eq.x_bar).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn monostable_run_reaches_golden_ratio() {
        let net = Net::uniform(2, hill(0.0, 1.0), 1.0).unwrap();
        let traj = integrate(&net, &[0.0, 0.0], 30.0, 1e-10, 1e-12).unwrap();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert!(traj.final_state().iter().all(|v| (v - g).abs() < 1e-6));
        assert_eq!(traj.t_end(), 30.0);
    }

    #[test]
    fn repressilator_keeps_oscillating() {
        let traj = integrate(&repressilator(3.0), &[0.9, 1.3, 0.7], 200.0, 1e-8, 1e-10).unwrap();
        for i in 0..3 {
            let tail = traj.times.iter().zip(&traj.states).filter(|(t, _)| **t >= 150.0).map(|(_, x)| x[i]);
            let (lo, hi) = tail.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
            assert!(hi - lo > 0.5, "coordinate {i}: amplitude {}", hi - lo);
        }
    }

    #[test]
    fn repressilator_period_is_tolerance_independent() {
        let period = |rtol: f64| {
            let mut opts = SimulationOptions::default();
            opts.integrator = IntegratorOptions::new(rtol, rtol * 1e-2);
            let sim = simulate(&repressilator(3.0), &[0.9, 1.3, 0.7], &opts).unwrap();
            match sim.report.kind {
                AttractorKind::PeriodicOrbit { period, .. } => period,
                other => panic!("expected an orbit, got {other:?}"),
            }
        };
        let (a, b) = (period(1e-8), period(1e-10));
        assert!(((a - b) / b).abs() < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn stable_spiral_is_not_an_orbit() {
        let sim = simulate(&repressilator(1.5), &[0.1, 2.0, 0.5], &SimulationOptions::default()).unwrap();
        assert_eq!(sim.report.equilibrium_index(), Some(0), "{:?}", sim.report);
    }

    #[test]
    fn odd_two_dimensional_loop_converges() {
        let net = Net::new(vec![hill(0.0, 1.0), RegulationFunction::affine(1.0, 1.0).unwrap()], vec![1.0, 1.0]).unwrap();
        let sim = simulate(&net, &[5.0, 5.0], &SimulationOptions::default()).unwrap();
        assert_eq!(sim.report.equilibrium_index(), Some(0));
    }

    #[test]
    fn slow_stable_mode_still_counts_as_converged() {
        // six repressors with p = (x/(1+x))^6 ≈ 0.9: slowest rate ≈ 0.017
        let x = 56.5;
        let net = Net::uniform(6, hill(0.0, 1.0), x * (1.0 + x)).unwrap();
        let sim = simulate(&net, &[0.0; 6], &SimulationOptions::default()).unwrap();
        assert_eq!(sim.report.equilibrium_index(), Some(0), "{:?}", sim.report);
    }

    #[test]
    fn rejects_bad_initial_state() {
        let net = toggle(3.0);
        assert!(matches!(integrate(&net, &[-0.1, 1.0], 1.0, 1e-8, 1e-10), Err(Error::Domain { .. })));
        assert!(integrate(&net, &[1.0], 1.0, 1e-8, 1e-10).is_err());
    }

    #[test]
    fn toggle_from_high_x2_start() {
        let net = toggle(3.0);
        let eqs = net.find_equilibria(1e-12).unwrap();
        let sim = simulate(&net, &[0.1, 3.0], &SimulationOptions::default()).unwrap();
        let idx = sim.report.equilibrium_index().expect("converges");
        assert_eq!(idx, 2, "high x2 equilibrium is last when sorted by x_d");
        assert!(eqs[idx].p < 1.0);
    }

    #[test]
    fn start_at_equilibrium_has_no_transient() {
        let net = toggle(3.0);
        let eqs = net.find_equilibria(1e-12).unwrap();
        let traj = integrate(&net, &eqs[0].x_bar, 200.0, 1e-8, 1e-10).unwrap();
        let rep = detect_attractor(&traj, &eqs, &DetectOptions::default());
        assert_eq!(rep.equilibrium_index(), Some(0));
        assert_eq!(rep.transient_time, 0.0);
    }

    #[test]
    fn hermite_interpolation_tracks_solution() {
        // ẋ = -x + 2 with x(0) = 0 has x(t) = 2 (1 - e^{-t})
        let opts = IntegratorOptions::new(1e-10, 1e-12);
        let traj = integrate_rhs(|x: &[f64], out: &mut [f64]| out[0] = -x[0] + 2.0, &[0.0], 5.0, &opts).unwrap();
        for t in [0.013, 0.77, 1.9, 4.4] {
            let exact = 2.0 * (1.0 - (-t as f64).exp());
            assert!((traj.interpolate(t)[0] - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn fifth_order_convergence_on_linear_decay() {
        let exact = 2.0 * (1.0 - (-2.0f64).exp());
        let err = |h: f64| {
            let mut opts = IntegratorOptions::new(1e-8, 1e-10);
            opts.fixed_step = Some(h);
            let traj = integrate_rhs(|x: &[f64], out: &mut [f64]| out[0] = -x[0] + 2.0, &[0.0], 2.0, &opts).unwrap();
            (traj.final_state()[0] - exact).abs()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        let order = (e1 / e2).log2();
        assert!(order >= 4.0, "observed order {order}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let traj = integrate(&toggle(3.0), &[0.5, 0.6], 1.0, 1e-8, 1e-10).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2"));
        assert_eq!(lines.count(), traj.len());
        let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 0.5, 0.6]);
    }

    #[test]
    fn halton_points_are_deterministic_and_in_range() {
        let a = quasi_random_points(3, 50, 7);
        assert_eq!(a, quasi_random_points(3, 50, 7));
        assert_ne!(a, quasi_random_points(3, 50, 8));
        assert!(a.iter().flatten().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn monostable_basin_is_everything() {
        let stats = sample_basins(&toggle(1.0), &[0.0, 0.0], &[4.0, 4.0], 100, 3, &SimulationOptions::default()).unwrap();
        assert_eq!(stats.converged, vec![100]);
    }
}
