//! Fixed-step classical fourth-order Runge–Kutta integration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;

/// One classical RK4 step of size `h` for `dx/dt = f(t, x)`.
///
/// `f` writes the derivative of `x` into its output slice. The step fails
/// with [`CoreError::NonFiniteState`] if any component of the result is NaN
/// or infinite, so callers can stop a diverging simulation cleanly.
pub fn rk4_step<F>(f: &mut F, x: &[f64], t: f64, h: f64) -> Result<Vec<f64>, CoreError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    f(t, x, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4);

    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !out[i].is_finite() {
            return Err(CoreError::NonFiniteState { t: t + h, index: i });
        }
    }
    Ok(out)
}
