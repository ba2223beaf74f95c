//! Dormand–Prince 5(4) integrator for small complex first-order systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Upper bound on |step|; `0` disables it.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 2_000_000,
            max_step: 0.0,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex64; N];

#[inline]
fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        let s = h * c;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
pub fn integrate<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: State<N>,
    x1: f64,
    opts: &OdeOptions,
) -> Result<State<N>>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = initial_step(span.abs(), opts) * dir;
    let mut steps = 0usize;
    loop {
        if (x1 - x) * dir <= 0.0 {
            return Ok(y);
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        if opts.max_step > 0.0 && h.abs() > opts.max_step {
            h = opts.max_step * dir;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration {
                x,
                reason: format!("step budget {} exhausted", opts.max_steps),
            });
        }
        let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(x + h, &y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / sc;
            err += r * r;
        }
        err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                x,
                reason: "non-finite error estimate".into(),
            });
        }
        if err <= 1.0 {
            x += h;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::Integration {
                    x,
                    reason: "step size underflow".into(),
                });
            }
        }
    }
}

fn initial_step(span: f64, opts: &OdeOptions) -> f64 {
    let h = (span * 1e-3).max(1e-6);
    if opts.max_step > 0.0 {
        h.min(opts.max_step)
    } else {
        h
    }
}

/// Integrate through the ordered `stops`, recording the state at each.
///
/// `stops` must be monotone in the direction of travel starting from `x0`.
pub fn integrate_through<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: State<N>,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<State<N>>>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let mut out = Vec::with_capacity(stops.len());
    let mut x = x0;
    let mut y = y0;
    for &s in stops {
        y = integrate(&mut f, x, y, s, opts)?;
        x = s;
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let opts = OdeOptions::default();
        let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let f = |_x: f64, y: &[Complex64; 2]| [y[1], -y[0]];
        let y = integrate(f, 0.0, y0, 2.0 * std::f64::consts::PI, &opts).unwrap();
        assert!((y[0] - 1.0).norm() < 1e-8);
        assert!(y[1].norm() < 1e-8);
    }

    #[test]
    fn backward_complex_exponential() {
        let opts = OdeOptions::default();
        let k = Complex64::new(2.0, 0.5);
        let f = move |_x: f64, y: &[Complex64; 1]| [Complex64::i() * k * y[0]];
        let y = integrate(f, 3.0, [Complex64::new(1.0, 0.0)], -1.0, &opts).unwrap();
        let exact = (Complex64::i() * k * -4.0).exp();
        assert!((y[0] - exact).norm() < 1e-8 * exact.norm().max(1.0));
    }
}
