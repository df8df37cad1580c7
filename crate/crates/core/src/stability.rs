//! Jacobian spectra, basin dimensions and the network-level regime.
//!
//! The Jacobian of the loop at `x` has `-1` on the diagonal and the cyclic
//! entries `α_i f_i'(x_{i-1})`, so its characteristic polynomial is
//! `(-1)^d ((λ + 1)^d - p)` with `p = ∏ α_i f_i'(x_{i-1})`. The spectrum is
//! therefore the `d`-th roots of `p` shifted by `-1`, and everything about
//! local stability reduces to where `p` sits relative to a handful of
//! thresholds of the form `sec(θ)^d`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CyclicNetwork, Equilibrium};
use crate::scalar::Scalar;

/// Regime of a network, named after the branch of the classification that
/// applies to its production rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Even number of repressions, a single globally attracting equilibrium.
    EvenMonostableGAS,
    /// Even number of repressions, two stable equilibria separated by a saddle.
    EvenBistable,
    /// Bistable, and the saddle has a basin of codimension at least three,
    /// which forces periodic solutions to exist.
    EvenBistablePeriodicCandidate,
    /// Odd number of repressions, the unique equilibrium is stable.
    OddStable,
    /// Odd number of repressions, the unique equilibrium is unstable and
    /// almost every solution approaches a periodic orbit.
    OddUnstableOscillatory,
    /// Degenerate or non-hyperbolic case excluded from the classification.
    Boundary,
}

impl Branch {
    pub const ALL: [Branch; 6] = [
        Branch::EvenMonostableGAS,
        Branch::EvenBistable,
        Branch::EvenBistablePeriodicCandidate,
        Branch::OddStable,
        Branch::OddUnstableOscillatory,
        Branch::Boundary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::EvenMonostableGAS => "EvenMonostableGAS",
            Branch::EvenBistable => "EvenBistable",
            Branch::EvenBistablePeriodicCandidate => "EvenBistablePeriodicCandidate",
            Branch::OddStable => "OddStable",
            Branch::OddUnstableOscillatory => "OddUnstableOscillatory",
            Branch::Boundary => "Boundary",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Branch::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown branch name {s:?}")))
    }
}

/// Exact `(cos² θ)` for `θ = π num / den` when it is one of the rational
/// values `{1, 3/4, 1/2, 1/4, 0}`, else the floating point square.
fn cos_sq_pi<T: Scalar>(num: usize, den: usize) -> T {
    // reduce θ/π to q ∈ [0, 1/2] using |cos| symmetries, tracked as num/den
    let period = 2 * den;
    let mut n = num % period;
    if n > den {
        n = period - n;
    }
    if 2 * n > den {
        n = den - n;
    }
    // q = n / den ∈ [0, 1/2]
    let exact = match (12 * n) % den == 0 {
        true => match 12 * n / den {
            0 => Some(1.0),
            2 => Some(0.75),
            3 => Some(0.5),
            4 => Some(0.25),
            6 => Some(0.0),
            _ => None,
        },
        false => None,
    };
    match exact {
        Some(v) => T::lit(v),
        None => {
            let c = (T::PI() * T::count(n) / T::count(den)).cos();
            c * c
        }
    }
}

/// `cos(π num / den)` with exact values at multiples of π/6 and π/4.
fn cos_pi<T: Scalar>(num: usize, den: usize) -> T {
    let period = 2 * den;
    let mut n = num % period;
    if n > den {
        n = period - n;
    }
    let negative = 2 * n > den;
    let sq = cos_sq_pi::<T>(n, den);
    let c = if (12 * n) % den == 0 && matches!(12 * n / den, 0 | 2 | 3 | 4 | 6 | 8 | 9 | 10 | 12) {
        sq.sqrt()
    } else {
        let q = if negative { den - n } else { n };
        (T::PI() * T::count(q) / T::count(den)).cos()
    };
    if negative {
        -c
    } else {
        c
    }
}

/// `sin(π num / den)` for `num/den ∈ [0, 2)`.
fn sin_pi<T: Scalar>(num: usize, den: usize) -> T {
    // sin(πq) = cos(π(q - 1/2)) = cos(π (2num - den) / (2den))
    let n2 = 2 * num;
    let d2 = 2 * den;
    if n2 >= den {
        cos_pi(n2 - den, d2)
    } else {
        cos_pi(den - n2, d2)
    }
}

/// `sec(π num / den)^d` assuming the cosine is positive.
fn sec_pow<T: Scalar>(num: usize, den: usize, d: usize) -> T {
    let c2 = cos_sq_pi::<T>(num, den);
    let half = i32::try_from(d / 2).expect("dimension fits in i32");
    let even_part = c2.recip().powi(half);
    if d % 2 == 0 {
        even_part
    } else {
        even_part / c2.sqrt()
    }
}

/// Spectrum of the Jacobian at a point with loop gain `p`:
/// `p^{1/d} e^{2kπi/d} - 1` for `p > 0`, `|p|^{1/d} e^{(2k+1)πi/d} - 1` for
/// `p < 0`, and `-1` with multiplicity `d` for `p = 0`.
///
/// The list is closed under conjugation exactly: the second half is built by
/// conjugating the first.
pub fn spectrum<T: Scalar>(p: T, d: usize) -> Vec<Complex<T>> {
    let minus_one = Complex::new(-T::one(), T::zero());
    if d == 0 {
        return Vec::new();
    }
    if p == T::zero() {
        return vec![minus_one; d];
    }
    let radius = p.abs().powf(T::count(d).recip());
    // angle of root k is π (2k + offset) / d
    let offset = usize::from(p < T::zero());
    let root = |k: usize| -> Complex<T> {
        let num = 2 * k + offset;
        Complex::new(radius * cos_pi::<T>(num, d) - T::one(), radius * sin_pi::<T>(num, d))
    };
    let mut out: Vec<Complex<T>> = vec![minus_one; d];
    for k in 0..d {
        // index of the root at angle 2π minus this one
        let partner = if offset == 0 { (d - k) % d } else { d - 1 - k };
        if partner < k {
            out[k] = out[partner].conj();
        } else if partner == k {
            out[k] = Complex::new(root(k).re, T::zero());
        } else {
            out[k] = root(k);
        }
    }
    out
}

/// Dense Jacobian `M^α_x`: `-1` on the diagonal, `α_i f_i'(x_{i-1})` at
/// row `i`, column `i - 1` (cyclically).
pub fn jacobian<T: Scalar>(net: &CyclicNetwork<T>, x: &[T]) -> Result<DMatrix<T>> {
    let d = net.dim();
    if x.len() != d {
        return Err(Error::InvalidNetwork(format!("state has {} entries, expected {d}", x.len())));
    }
    let mut m = DMatrix::from_element(d, d, T::zero());
    for i in 0..d {
        m[(i, i)] = -T::one();
        let j = net.upstream(i);
        m[(i, j)] = m[(i, j)] + net.alpha()[i] * net.functions()[i].slope(x[j]);
    }
    Ok(m)
}

/// Sign census of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub n_negative: usize,
    pub n_positive: usize,
    pub n_zero: usize,
    pub hyperbolic: bool,
    /// Dimension of the stable manifold, i.e. the number of eigenvalues with
    /// negative real part.
    pub stable_dim: usize,
}

/// Default width of the "zero real part" band: `1e-9 (1 + |p|^{1/d})`.
pub fn default_eps<T: Scalar>(p: T, d: usize) -> T {
    T::lit(1e-9) * (T::one() + p.abs().powf(T::count(d).recip()))
}

/// Spectrum and sign census for a loop gain `p`.
pub fn spectrum_report<T: Scalar>(p: T, d: usize, eps: Option<T>) -> SpectrumReport<T> {
    let eps = eps.unwrap_or_else(|| default_eps(p, d));
    let eigenvalues = spectrum(p, d);
    let (mut n_negative, mut n_positive, mut n_zero) = (0, 0, 0);
    for ev in &eigenvalues {
        if ev.re.abs() <= eps {
            n_zero += 1;
        } else if ev.re < T::zero() {
            n_negative += 1;
        } else {
            n_positive += 1;
        }
    }
    SpectrumReport { eigenvalues, n_negative, n_positive, n_zero, hyperbolic: n_zero == 0, stable_dim: n_negative }
}

/// Spectrum report of an equilibrium.
pub fn classify_point<T: Scalar>(eq: &Equilibrium<T>, d: usize, eps: Option<T>) -> SpectrumReport<T> {
    spectrum_report(eq.p, d, eps)
}

/// Stability thresholds of dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub d: usize,
    /// `sec(π/d)^d`: `|p|` above which the equilibrium of an odd loop is
    /// unstable. Infinite for `d = 2`.
    pub t_odd: T,
    /// `sec(2π/d)^d` for `d ≥ 5`: `p` above which the saddle of an even loop
    /// loses at least two more stable directions.
    pub t_even: Option<T>,
    /// Exceptional gains above `t_even` where a conjugate pair crosses the
    /// imaginary axis.
    pub exceptional: Vec<T>,
}

impl<T: Scalar> Thresholds<T> {
    pub fn contains_exceptional(&self, p: T, rel: T) -> bool {
        self.exceptional.iter().any(|s| (p - *s).abs() <= rel * s.abs())
    }
}

/// Thresholds for dimension `d`.
///
/// The exceptional set is computed from the closed form
/// `{sec(2πk/d)^d : k = 2..j}` for `d ∈ [4j+1, 4j+4]` and cross-checked by
/// counting purely imaginary eigenvalues; a mismatch is an internal error.
pub fn thresholds<T: Scalar>(d: usize) -> Result<Thresholds<T>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let t_odd = if d == 2 { T::infinity() } else { sec_pow(1, d, d) };
    let t_even = (d >= 5).then(|| sec_pow(2, d, d));
    let exceptional = exceptional_closed_form::<T>(d);
    let counted = exceptional_by_counting::<T>(d);
    let agree = exceptional.len() == counted.len()
        && exceptional
            .iter()
            .zip(&counted)
            .all(|(a, b)| (*a - *b).abs() <= T::lit(1e-9) * a.abs());
    if !agree {
        return Err(Error::Internal(format!(
            "exceptional gains for d = {d} disagree: closed form {:?}, counted {:?}",
            exceptional.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
            counted.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
        )));
    }
    Ok(Thresholds { d, t_odd, t_even, exceptional })
}

fn exceptional_closed_form<T: Scalar>(d: usize) -> Vec<T> {
    if d <= 8 {
        return Vec::new();
    }
    let j = (d - 1) / 4;
    (2..=j)
        .filter(|&k| cos_pi::<T>(2 * k, d) > T::zero())
        .map(|k| sec_pow(2 * k, d, d))
        .collect()
}

/// Gains `p > sec(2π/d)^d` at which the spectrum has an eigenvalue on the
/// imaginary axis, found by scanning every root direction.
fn exceptional_by_counting<T: Scalar>(d: usize) -> Vec<T> {
    if d < 5 {
        return Vec::new();
    }
    let t_even: T = sec_pow(2, d, d);
    let mut out: Vec<T> = Vec::new();
    for m in 1..=d / 2 {
        let c = cos_pi::<T>(2 * m, d);
        if c <= T::zero() {
            continue;
        }
        let p = c.powi(i32::try_from(d).expect("dimension fits in i32")).recip();
        if p <= t_even * (T::one() + T::lit(1e-12)) {
            continue;
        }
        let report = spectrum_report(p, d, Some(T::lit(1e-9) * (T::one() + p.powf(T::count(d).recip()))));
        if report.n_zero > 0 {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite gains"));
    out
}

/// An equilibrium paired with its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedEquilibrium<T> {
    #[serde(flatten)]
    pub equilibrium: Equilibrium<T>,
    pub spectrum: SpectrumReport<T>,
}

/// Network-level classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub branch: Branch,
    pub d: usize,
    pub n: usize,
    #[serde(rename = "D")]
    pub d_value: T,
    pub equilibria: Vec<ClassifiedEquilibrium<T>>,
    pub thresholds: Thresholds<T>,
}

impl<T: Scalar> RegimeReport<T> {
    /// Gain of the equilibrium that decides the branch: the middle one when
    /// there are three, otherwise the first. Odd loops report `|p|`.
    pub fn decisive_p(&self) -> Option<T> {
        let eq = match self.equilibria.len() {
            0 => return None,
            3 => &self.equilibria[1],
            _ => &self.equilibria[0],
        };
        let p = eq.equilibrium.p;
        Some(if self.n % 2 == 1 { p.abs() } else { p })
    }
}

/// Finds the equilibria of `net` and decides which branch applies.
///
/// Even loops: one equilibrium with `p < 1` is `EvenMonostableGAS`; three
/// equilibria whose middle gain exceeds 1 are `EvenBistable`, upgraded to
/// `EvenBistablePeriodicCandidate` when `d ≥ 5` and the middle gain exceeds
/// `sec(2π/d)^d`. Odd loops compare `|p|` with `sec(π/d)^d`. Degenerate
/// roots and non-hyperbolic spectra give `Boundary`.
pub fn classify_network<T: Scalar>(net: &CyclicNetwork<T>, tol: T, eps: Option<T>) -> Result<RegimeReport<T>> {
    let d = net.dim();
    let n = net.decreasing_count();
    let thresholds = thresholds::<T>(d)?;
    let equilibria: Vec<ClassifiedEquilibrium<T>> = net
        .find_equilibria(tol)?
        .into_iter()
        .map(|eq| {
            let spectrum = classify_point(&eq, d, eps);
            ClassifiedEquilibrium { equilibrium: eq, spectrum }
        })
        .collect();

    let boundary = equilibria.iter().any(|e| e.equilibrium.degenerate || !e.spectrum.hyperbolic);
    let branch = if boundary {
        Branch::Boundary
    } else if n % 2 == 0 {
        even_branch(&equilibria, &thresholds)
    } else {
        match equilibria.as_slice() {
            [only] if d == 2 || only.equilibrium.p.abs() < thresholds.t_odd => Branch::OddStable,
            [only] if only.equilibrium.p.abs() > thresholds.t_odd => Branch::OddUnstableOscillatory,
            _ => Branch::Boundary,
        }
    };
    Ok(RegimeReport { branch, d, n, d_value: net.d_value(), equilibria, thresholds })
}

fn even_branch<T: Scalar>(eqs: &[ClassifiedEquilibrium<T>], th: &Thresholds<T>) -> Branch {
    match eqs {
        [only] if only.equilibrium.p < T::one() => Branch::EvenMonostableGAS,
        [low, mid, high] if low.equilibrium.p < T::one() && high.equilibrium.p < T::one() && mid.equilibrium.p > T::one() => {
            match th.t_even {
                Some(t_even) if mid.equilibrium.p > t_even => Branch::EvenBistablePeriodicCandidate,
                _ => Branch::EvenBistable,
            }
        }
        _ => Branch::Boundary,
    }
}
