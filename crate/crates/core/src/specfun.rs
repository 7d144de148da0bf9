//! Closed-form scalar functions: the normalization constant `C_{N,s}`, its
//! s-derivative, the auxiliary average `ψ_σ`, and logarithmic decay bounds.
//!
//! Gamma and digamma are evaluated locally (Lanczos approximation and
//! recurrence + asymptotic series); every argument arising from `N <= 3`,
//! `s ∈ (0,1)` lands in `[0.5, 5]` after at most two recurrence steps, where
//! both are accurate to better than 1e-12 relative.

use crate::error::{Error, Result};

/// Fractional order `s` constrained to the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidOrder(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Shifted order `s + sigma`, validated through the same constructor.
    pub fn shifted(self, sigma: f64) -> Result<Self> {
        Self::new(self.0 + sigma)
    }

    /// True when the order sits in the band where quadrature constants
    /// degrade (`s < 0.02` or `s > 0.98`).
    pub fn endpoint_band(self) -> bool {
        self.0 < 0.02 || self.0 > 0.98
    }
}

/// Spatial dimension tag, `N >= 1`. `N = 1` extends the usual `N >= 2` setting;
/// every implemented formula remains well-defined there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionTag(usize);

impl DimensionTag {
    pub fn new(n: usize) -> Result<Self> {
        if n >= 1 {
            Ok(Self(n))
        } else {
            Err(Error::InvalidDimension(n))
        }
    }

    pub fn value(self) -> usize {
        self.0
    }
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Log-gamma for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

// B_{2k}/(2k) for the digamma asymptotic series, k = 1..7.
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma `ψ₀(x) = d/dx ln Γ(x)` for `x > 0`.
///
/// Recurrence shifts the argument to `x >= 8`, then a 7-term asymptotic
/// expansion in `1/x²` applies.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires a positive argument, got {x}");
    let mut shift = 0.0;
    let mut xx = x;
    while xx < 8.0 {
        shift -= 1.0 / xx;
        xx += 1.0;
    }
    let mut result = shift + xx.ln() - 0.5 / xx;
    let inv_x2 = 1.0 / (xx * xx);
    let mut term = inv_x2;
    for c in DIGAMMA_ASYMP {
        result -= c * term;
        term *= inv_x2;
    }
    result
}

/// Normalization constant `C_{N,s} = s(1-s) π^{-N/2} 2^{2s} Γ((N+2s)/2) / Γ(2-s)`.
///
/// Lies in `(0, 4Γ(N/2+1)]` for all admissible arguments.
pub fn c_ns(n: DimensionTag, s: FractionalOrder) -> f64 {
    let nf = n.value() as f64;
    let s = s.value();
    let log_c = (2.0 * s) * std::f64::consts::LN_2 - 0.5 * nf * std::f64::consts::PI.ln()
        + ln_gamma(0.5 * (nf + 2.0 * s))
        - ln_gamma(2.0 - s);
    s * (1.0 - s) * log_c.exp()
}

/// Upper bound `4Γ(N/2 + 1)` for `C_{N,s}`.
pub fn c_ns_bound(n: DimensionTag) -> f64 {
    4.0 * gamma(0.5 * n.value() as f64 + 1.0)
}

/// Analytic s-derivative `∂_s C_{N,s}`, by logarithmic differentiation:
/// `C_{N,s} · [ (1-2s)/(s(1-s)) + 2 ln 2 + ψ₀((N+2s)/2) + ψ₀(2-s) ]`.
pub fn dc_ns(n: DimensionTag, s: FractionalOrder) -> f64 {
    let sv = s.value();
    let nf = n.value() as f64;
    let logderiv = (1.0 - 2.0 * sv) / (sv * (1.0 - sv))
        + 2.0 * std::f64::consts::LN_2
        + digamma(0.5 * (nf + 2.0 * sv))
        + digamma(2.0 - sv);
    c_ns(n, s) * logderiv
}

/// Auxiliary average `ψ_σ(r) = ∫₀¹ exp(-2tσ ln r) dt`.
///
/// Closed form `(r^{-2σ} - 1)/(-2σ ln r)` away from the removable singularity;
/// a 3-term Taylor expansion in `z = -2σ ln r` takes over when `|σ ln r| < 1e-6`.
/// Satisfies `r^{-2σ} - 1 = -2σ ψ_σ(r) ln r` exactly.
pub fn psi_sigma(r: f64, sigma: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "psi_sigma requires r > 0, got {r}"
        )));
    }
    let z = -2.0 * sigma * r.ln();
    if (0.5 * z).abs() < 1e-6 {
        Ok(1.0 + z * (0.5 + z / 6.0))
    } else {
        Ok(z.exp_m1() / z)
    }
}

/// Logarithmic decay bound of `|ln r|`: `(1/(e·eps0)) r^{∓eps0}` on the two
/// sides of the pivot.
#[derive(Debug, Clone, Copy)]
pub struct LogDecayBound {
    /// `|ln r|`.
    pub abs_log: f64,
    /// `(1/(e·eps0)) r^{-eps0}`, present when `r <= pivot`.
    pub below: Option<f64>,
    /// `(1/(e·eps0)) r^{eps0}`, present when `r >= pivot`.
    pub above: Option<f64>,
}

impl LogDecayBound {
    /// Tightest bound among the admissible branches.
    pub fn bound(&self) -> f64 {
        match (self.below, self.above) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("at least one branch is always admissible"),
        }
    }
}

/// `|ln r|` together with the decay bound(s). With pivot 1 both branches
/// dominate `|ln r|` on their side; at `r == pivot` both are returned.
pub fn log_decay_bound(r: f64, eps0: f64, pivot: f64) -> Result<LogDecayBound> {
    if !(r > 0.0 && eps0 > 0.0 && pivot > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log_decay_bound requires positive inputs, got r={r}, eps0={eps0}, pivot={pivot}"
        )));
    }
    let scale = 1.0 / (std::f64::consts::E * eps0);
    Ok(LogDecayBound {
        abs_log: r.ln().abs(),
        below: (r <= pivot).then(|| scale * r.powf(-eps0)),
        above: (r >= pivot).then(|| scale * r.powf(eps0)),
    })
}
