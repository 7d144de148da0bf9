//! Stable antiderivative evaluation for the segment integrals
//! `∫_a^b t^{q-1} dt` and `∫_a^b t^{q-1} ln t dt` that every 1D pair
//! integral and every exact singular-coordinate integral reduces to.
//!
//! In log coordinates `X = ln t` these are `∫ e^{qX} dX` and `∫ X e^{qX} dX`;
//! both are evaluated from the left endpoint with `expm1`-style forms so that
//! thin segments (`b/a` close to 1) and small exponents lose no precision.

/// `∫_0^d e^{q u} du = expm1(q d)/q`, with the `q → 0` limit `d`.
fn exp_integral(q: f64, d: f64) -> f64 {
    let z = q * d;
    if z.abs() < 1e-12 {
        d * (1.0 + 0.5 * z)
    } else {
        (z.exp_m1()) / q
    }
}

/// `∫_0^d u e^{q u} du`, series for small `|q d|`, closed form otherwise.
fn ramp_exp_integral(q: f64, d: f64) -> f64 {
    let z = q * d;
    if z.abs() < 0.5 {
        // Σ_{k>=0} q^k d^{k+2} / ((k+2)·k!)
        let mut sum = 0.0;
        let mut factor = d * d; // d^{k+2}/k! accumulated
        let mut kfac = 1.0;
        for k in 0..14 {
            sum += factor / ((k as f64 + 2.0) * kfac);
            factor *= q * d;
            kfac *= k as f64 + 1.0;
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (q * q)
    }
}

/// `∫_a^b t^{q-1} dt` for `0 <= a < b`. Requires `q > 0` when `a == 0`.
pub fn power_integral(q: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b > a);
    if a == 0.0 {
        debug_assert!(q > 0.0, "power_integral diverges at 0 for q <= 0");
        return (q * b.ln()).exp() / q;
    }
    let la = a.ln();
    let d = (b / a).ln();
    (q * la).exp() * exp_integral(q, d)
}

/// `∫_a^b t^{q-1} ln t dt` for `0 <= a < b`. Requires `q > 0` when `a == 0`.
pub fn power_log_integral(q: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b > a);
    if a == 0.0 {
        debug_assert!(q > 0.0, "power_log_integral diverges at 0 for q <= 0");
        let zb = q * b.ln();
        return zb.exp() * (zb - 1.0) / (q * q);
    }
    let la = a.ln();
    let d = (b / a).ln();
    (q * la).exp() * (la * exp_integral(q, d) + ramp_exp_integral(q, d))
}
