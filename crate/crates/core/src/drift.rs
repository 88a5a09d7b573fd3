//! Exact one-step drift of the centre distance `R` and line distance `D`.
//!
//! Conditionally on the past, the next step direction is uniform on the
//! allowed arc. Measured from the direction towards the centre (resp. the
//! foot of the perpendicular) that arc is `[a2, 2π − a1]`, so both expected
//! increments reduce to one-dimensional integrals:
//!
//! ```text
//! E[R'] = (2π − φ1 − φ2)⁻¹ ∫_{φ2}^{2π−φ1} ‖(R, 0) − (cos φ, sin φ)‖ dφ
//! E[D'] = (2π − ψ1 − ψ2)⁻¹ ∫_{ψ2}^{2π−ψ1} |D − cos ψ| dψ
//! ```
//!
//! This module evaluates them by adaptive quadrature, compares them with
//! their sine lower bounds, and derives the explicit constants of the
//! supermartingale argument built on them.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::QuadratureError;
use crate::quadrature::integrate;

/// Absolute tolerance on the drift integrals (before division by the arc).
const INTEGRAL_TOL: f64 = 1e-11;
/// Required accuracy of a reported drift value.
pub const MAX_QUADRATURE_ERROR: f64 = 1e-10;
/// Slack applied when comparing a drift with its lower bound.
pub const BOUND_SLACK: f64 = 1e-9;
/// Angle slack accepted on input before a tuple is declared inadmissible.
const ANGLE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftResult {
    /// Expected one-step increment.
    pub value: f64,
    /// Lower bound the increment must respect.
    pub bound: f64,
    pub satisfied: bool,
    pub quadrature_error: f64,
}

fn check_angles(a1: f64, a2: f64) -> Result<(f64, f64), QuadratureError> {
    let ok = |a: f64| a.is_finite() && (-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&a);
    if !ok(a1) || !ok(a2) || a1 + a2 > PI + ANGLE_SLACK {
        return Err(QuadratureError::Domain(format!(
            "angles ({a1}, {a2}) must lie in [0, π] with sum ≤ π"
        )));
    }
    Ok((a1.clamp(0.0, PI), a2.clamp(0.0, PI)))
}

fn sine_bound(a1: f64, a2: f64) -> f64 {
    (a1.sin() + a2.sin()) / TAU
}

/// Expected increment of the distance to the centre.
pub fn drift_r(r: f64, phi1: f64, phi2: f64) -> Result<DriftResult, QuadratureError> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(QuadratureError::Domain(format!("R = {r} must be finite and ≥ 0")));
    }
    let (phi1, phi2) = check_angles(phi1, phi2)?;
    let (a, b) = (phi2, TAU - phi1);
    let len = b - a;
    // ‖(R,0) − u‖ − R rewritten without cancellation, so the integrand is O(1) for any R
    let increment = |t: f64| {
        let (s, c) = t.sin_cos();
        (1.0 - 2.0 * r * c) / ((r - c).hypot(s) + r)
    };
    let q = integrate(increment, a, b, &[PI], INTEGRAL_TOL)?;
    let value = q.value / len;
    let bound = sine_bound(phi1, phi2);
    let quadrature_error = q.error / len;
    if quadrature_error > MAX_QUADRATURE_ERROR {
        return Err(QuadratureError::Failure {
            tol: MAX_QUADRATURE_ERROR,
            err: quadrature_error,
        });
    }
    Ok(DriftResult {
        value,
        bound,
        satisfied: value >= bound - BOUND_SLACK,
        quadrature_error,
    })
}

/// Expected increment of the distance to the diametral line.
///
/// The integrand `|D − cos ψ|` has kinks at `ψ = ±arccos D`; the interval
/// is split there.
pub fn drift_d(d: f64, psi1: f64, psi2: f64) -> Result<DriftResult, QuadratureError> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(QuadratureError::Domain(format!("D = {d} must be finite and ≥ 0")));
    }
    let (psi1, psi2) = check_angles(psi1, psi2)?;
    let (a, b) = (psi2, TAU - psi1);
    let len = b - a;
    let kinks: Vec<f64> = if d < 1.0 {
        let k = d.acos();
        vec![k, TAU - k]
    } else {
        Vec::new()
    };
    let increment = |t: f64| {
        let c = t.cos();
        if d >= 1.0 {
            -c
        } else {
            (d - c).abs() - d
        }
    };
    let q = integrate(increment, a, b, &kinks, INTEGRAL_TOL)?;
    let value = q.value / len;
    let quadrature_error = q.error / len;
    if quadrature_error > MAX_QUADRATURE_ERROR {
        return Err(QuadratureError::Failure {
            tol: MAX_QUADRATURE_ERROR,
            err: quadrature_error,
        });
    }
    let bound = sine_bound(psi1, psi2);
    Ok(DriftResult {
        value,
        bound,
        satisfied: value >= bound - BOUND_SLACK,
        quadrature_error,
    })
}

/// Joint drift `E[ΔR + ΔD]` against the constant `1/(4π²)`.
pub fn drift_sum(
    r: f64,
    d: f64,
    phi: (f64, f64),
    psi: (f64, f64),
) -> Result<(DriftResult, DriftResult, DriftResult), QuadratureError> {
    let dr = drift_r(r, phi.0, phi.1)?;
    let dd = drift_d(d, psi.0, psi.1)?;
    let value = dr.value + dd.value;
    let bound = c_ekg();
    let sum = DriftResult {
        value,
        bound,
        satisfied: value >= bound - BOUND_SLACK,
        quadrature_error: dr.quadrature_error + dd.quadrature_error,
    };
    Ok((dr, dd, sum))
}

/// Joint drift lower bound `(4π²)⁻¹`.
pub fn c_ekg() -> f64 {
    1.0 / (4.0 * PI * PI)
}

/// Radial drift a step must exceed to count as good, `1/(π√8)`.
pub fn good_threshold() -> f64 {
    1.0 / (PI * 8f64.sqrt())
}

/// Explicit constants of the drift / supermartingale / tail argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperConstants {
    pub beta: f64,
    pub gamma: f64,
    pub c_ekg: f64,
    pub c_boun: f64,
    pub c_alll: f64,
    pub c_ofer: f64,
    pub c_witri: f64,
    pub c_posi: f64,
}

/// One-step contraction factor bound `1 − c·c_ekg + (c·c_boun)² e^{c·c_boun}/2`,
/// returned as its negative logarithm (the decay rate for scale `c`).
pub fn decay_rate(c: f64, c_ekg: f64, c_boun: f64) -> f64 {
    let x = c * c_boun;
    -(-c * c_ekg + 0.5 * x * x * x.exp()).ln_1p()
}

fn taylor_factor(c: f64, c_ekg: f64, c_boun: f64) -> f64 {
    let x = c * c_boun;
    1.0 - c * c_ekg + 0.5 * x * x * x.exp()
}

/// Scale in `(0, 1e-3]` maximizing the decay rate: log-spaced scan, then
/// golden-section refinement between the neighbours of the best scan point.
fn best_scale(c_ekg: f64, c_boun: f64) -> f64 {
    let rate = |c: f64| decay_rate(c, c_ekg, c_boun);
    let (lo_exp, hi_exp, n) = (-12.0f64, -3.0f64, 901usize);
    let grid: Vec<f64> = (0..n)
        .map(|k| 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / (n - 1) as f64))
        .collect();
    let best = (0..n)
        .max_by(|&i, &j| rate(grid[i]).total_cmp(&rate(grid[j])))
        .expect("non-empty grid");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (rate(x1), rate(x2));
    for _ in 0..200 {
        if b - a <= 1e-16 * b {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = rate(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = rate(x1);
        }
    }
    0.5 * (a + b)
}

impl PaperConstants {
    /// Computes every constant from its defining formula.
    pub fn derive() -> Self {
        let beta = 1.0 + 4.0 * PI * 8f64.sqrt();
        let gamma = 1.0 / (2.0 * beta);
        let c_ekg = c_ekg();
        let c_boun = 1.0 + beta + 4.0;
        let c_alll = best_scale(c_ekg, c_boun);
        let c_ofer = decay_rate(c_alll, c_ekg, c_boun);
        let c_witri = c_alll * (1.0 + 2.0 * beta) / c_ofer;
        let c_posi = gamma * c_ofer / (c_witri + gamma);
        Self {
            beta,
            gamma,
            c_ekg,
            c_boun,
            c_alll,
            c_ofer,
            c_witri,
            c_posi,
        }
    }

    /// Process-wide copy of [`PaperConstants::derive`].
    pub fn shared() -> &'static PaperConstants {
        static CONSTANTS: std::sync::OnceLock<PaperConstants> = std::sync::OnceLock::new();
        CONSTANTS.get_or_init(PaperConstants::derive)
    }

    /// Bound on `E[M_{i,1}]` and hence the prefactor of the decay bound.
    pub fn elon_hat(&self) -> f64 {
        (self.c_alll * self.c_boun).exp()
    }

    /// Residual of every defining relation, by name. All should be ≤ 1e-12
    /// except `contraction_below_one`, which must be strictly negative.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let beta = 1.0 + 4.0 * PI * 8f64.sqrt();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        vec![
            ("beta", rel(self.beta, beta)),
            ("gamma", rel(self.gamma, 1.0 / (2.0 * beta))),
            ("beta_gamma_half", (self.beta * self.gamma - 0.5).abs()),
            ("c_ekg", rel(self.c_ekg, 1.0 / (4.0 * PI * PI))),
            ("c_boun", rel(self.c_boun, 5.0 + self.beta)),
            ("c_alll_positive", if self.c_alll > 0.0 { 0.0 } else { 1.0 }),
            (
                "contraction_below_one",
                taylor_factor(self.c_alll, self.c_ekg, self.c_boun) - 1.0,
            ),
            (
                "c_ofer",
                {
                    // factored form keeps the logarithm accurate near 1
                    let (c, k) = (self.c_alll, self.c_alll * self.c_boun);
                    let excess = c * (-self.c_ekg + 0.5 * c * self.c_boun * self.c_boun * k.exp());
                    rel(self.c_ofer, -excess.ln_1p())
                },
            ),
            (
                "c_witri",
                rel(self.c_witri, self.c_alll * (1.0 + 2.0 * self.beta) / self.c_ofer),
            ),
            (
                "c_posi",
                rel(self.c_posi, self.gamma * self.c_ofer / (self.c_witri + self.gamma)),
            ),
        ]
    }

    /// True when every relation holds to `tol` and the contraction is < 1.
    pub fn verify(&self, tol: f64) -> bool {
        self.residuals().iter().all(|&(name, r)| {
            if name == "contraction_below_one" {
                r < 0.0
            } else {
                r <= tol
            }
        })
    }

    /// Hex SHA-256 prefix of the 17-significant-digit rendering.
    pub fn digest(&self) -> String {
        let text = format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.beta,
            self.gamma,
            self.c_ekg,
            self.c_boun,
            self.c_alll,
            self.c_ofer,
            self.c_witri,
            self.c_posi
        );
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
