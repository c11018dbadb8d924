//! Derivative-free minimisers used by the fitting routines.

use crate::scalar::Scalar;

/// Result of a one-dimensional golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin<S> {
    pub x: S,
    pub fx: S,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section<S, F>(f: F, mut lo: S, mut hi: S, tol: S, max_iter: usize) -> LineMin<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    LineMin {
        x,
        fx,
        iterations,
        converged: hi - lo <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions<S> {
    /// Maximum number of objective evaluations.
    pub max_evals: usize,
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tol: S,
    /// ... and the objective spread across the simplex is below this.
    pub f_tol: S,
    /// Initial simplex offset along each axis.
    pub initial_step: S,
}

impl<S: Scalar> Default for NelderMeadOptions<S> {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            x_tol: S::lit(1e-10),
            f_tol: S::lit(1e-18),
            initial_step: S::lit(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<S> {
    pub x: Vec<S>,
    pub fx: S,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex search with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
///
/// Non-finite objective values are treated as worse than any finite one.
pub fn nelder_mead<S, F>(mut f: F, x0: &[S], opts: &NelderMeadOptions<S>) -> NelderMeadResult<S>
where
    S: Scalar,
    F: FnMut(&[S]) -> S,
{
    let n = x0.len();
    let half = S::lit(0.5);
    let mut evals = 0usize;
    let mut eval = |x: &[S], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            S::infinity()
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<S>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = v[i] + opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<S> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut iterations = 0usize;
    let mut converged = false;
    loop {
        // order vertices best to worst; ties keep insertion order
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread_f = values[n] - values[0];
        let spread_x = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (*a - *b).abs()))
            .fold(S::zero(), S::max);
        if spread_x <= opts.x_tol && spread_f <= opts.f_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        iterations += 1;

        let centroid: Vec<S> = (0..n)
            .map(|j| {
                simplex[..n]
                    .iter()
                    .map(|v| v[j])
                    .fold(S::zero(), |a, b| a + b)
                    / S::from_count(n)
            })
            .collect();
        let worst = simplex[n].clone();
        let along = |t: S| -> Vec<S> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let xr = along(S::one());
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(S::lit(2.0));
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(half);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-half);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let shrunk: Vec<S> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(&x, &b)| b + half * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evals);
            simplex[i] = shrunk;
        }
    }

    NelderMeadResult {
        x: simplex[0].clone(),
        fx: values[0],
        evals,
        iterations,
        converged,
    }
}
