use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::scalar::Scalar;

/// Outcome of any regression or calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<S> {
    /// Named parameter estimates.
    pub params: BTreeMap<String, S>,
    /// Residual sum of squares (see each fitting routine for its scaling).
    pub sse: S,
    /// Coefficient of determination.
    pub r2: S,
    pub iterations: usize,
    pub converged: bool,
}

impl<S: Scalar> FitResult<S> {
    pub fn param(&self, name: &str) -> Option<S> {
        self.params.get(name).copied()
    }
}

/// Ordinary least-squares straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<S> {
    pub slope: S,
    pub intercept: S,
    pub sse: S,
    pub r2: S,
}

fn mean<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |a, &b| a + b) / S::from_count(v.len())
}

/// `1 - sse / sst`, taken as 1 for a perfect fit of constant data.
fn r_squared<S: Scalar>(sse: S, sst: S) -> S {
    if sst > S::zero() {
        S::one() - sse / sst
    } else if sse == S::zero() {
        S::one()
    } else {
        S::neg_infinity()
    }
}

pub fn linear_fit<S: Scalar>(xs: &[S], ys: &[S]) -> Result<LinearFit<S>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Precondition("need at least two (x, y) pairs".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (sxx, sxy) = xs
        .iter()
        .zip(ys)
        .fold((S::zero(), S::zero()), |(sxx, sxy), (&x, &y)| {
            let dx = x - mx;
            (sxx + dx * dx, sxy + dx * (y - my))
        });
    if sxx == S::zero() {
        return Err(Error::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (sse, sst) = xs
        .iter()
        .zip(ys)
        .fold((S::zero(), S::zero()), |(sse, sst), (&x, &y)| {
            let r = y - (intercept + slope * x);
            (sse + r * r, sst + (y - my) * (y - my))
        });
    Ok(LinearFit {
        slope,
        intercept,
        sse,
        r2: r_squared(sse, sst),
    })
}

/// Fits `log10(y) = alpha * log10(x) + beta` by ordinary least squares.
///
/// `beta` carries the unit of `y`: fitting millinewtons gives a
/// millinewton prefactor.
pub fn loglog_fit<S: Scalar>(points: &[(S, S)]) -> Result<FitResult<S>> {
    if points.len() < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    for &(x, y) in points {
        for v in [x, y] {
            if !(v > S::zero()) {
                return Err(Error::NonPositiveValue(v.to_f64().unwrap_or(f64::NAN)));
            }
        }
    }
    let xs: Vec<S> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<S> = points.iter().map(|p| p.1.log10()).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(FitResult {
        params: BTreeMap::from([
            ("alpha".to_owned(), line.slope),
            ("beta".to_owned(), line.intercept),
        ]),
        sse: line.sse,
        r2: line.r2,
        iterations: 1,
        converged: true,
    })
}

/// Upper end of the time-constant search bracket, s.
const TAU_MAX: f64 = 100.0;
const TAU_REL_TOL: f64 = 1e-6;

/// Profile of the decay fit at one time constant: best amplitude and its SSE.
fn decay_profile<S: Scalar>(tail: &[S], dt: S, tau: S) -> (S, S) {
    let q = (-dt / tau).exp();
    let (mut e, mut sye, mut see) = (S::one(), S::zero(), S::zero());
    for &y in tail {
        sye = sye + y * e;
        see = see + e * e;
        e = e * q;
    }
    let amp = if see > S::zero() {
        sye / see
    } else {
        S::zero()
    };
    let mut e = S::one();
    let mut sse = S::zero();
    for &y in tail {
        let r = y - amp * e;
        sse = sse + r * r;
        e = e * q;
    }
    (amp, sse)
}

/// Sum of squared residuals of `amp * exp(-t / tau)` against a sampled tail.
pub fn decay_sse<S: Scalar>(tail: &[S], dt: S, tau: S) -> S {
    decay_profile(tail, dt, tau).1
}

/// Fits `A * exp(-t / tau)` to a decaying tail sampled every `dt`, with
/// `t = 0` at the first sample.
///
/// The amplitude is solved in closed form for each trial `tau`; `tau`
/// itself is found by golden-section search on `log(tau)` over
/// `[dt, 100 s]` to a relative tolerance of 1e-6.
pub fn cooling_fit<S: Scalar>(tail: &[S], dt: S) -> Result<FitResult<S>> {
    if tail.len() < 3 {
        return Err(Error::TooShort("need at least three tail samples".into()));
    }
    if !(dt > S::zero()) {
        return Err(Error::NonPositiveField("dt"));
    }
    let lo = dt.ln();
    let hi = S::lit(TAU_MAX).ln();
    let line = golden_section(
        |log_tau| decay_sse(tail, dt, log_tau.exp()),
        lo,
        hi,
        S::lit(TAU_REL_TOL),
        500,
    );
    let tau = line.x.exp();
    let (amp, sse) = decay_profile(tail, dt, tau);
    let edge = S::lit(10.0 * TAU_REL_TOL);
    if !(amp > S::zero()) {
        return Err(Error::NotDecaying(
            "fitted amplitude is not positive".into(),
        ));
    }
    if line.x - lo < edge || hi - line.x < edge {
        return Err(Error::NotDecaying(format!(
            "time constant {} s sits on the search bracket",
            tau.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let m = mean(tail);
    let sst = tail.iter().fold(S::zero(), |a, &y| a + (y - m) * (y - m));
    Ok(FitResult {
        params: BTreeMap::from([("tau".to_owned(), tau), ("amplitude".to_owned(), amp)]),
        sse,
        r2: r_squared(sse, sst),
        iterations: line.iterations,
        converged: line.converged,
    })
}
