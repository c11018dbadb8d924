use crate::scalar::Scalar;

/// One classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
#[inline]
pub fn rk4_step<S, F>(t: S, y: S, h: S, f: F) -> S
where
    S: Scalar,
    F: Fn(S, S) -> S,
{
    let half = S::lit(0.5);
    let two = S::lit(2.0);
    let k1 = f(t, y);
    let k2 = f(t + half * h, y + half * h * k1);
    let k3 = f(t + half * h, y + half * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / S::lit(6.0) * (k1 + two * k2 + two * k3 + k4)
}
