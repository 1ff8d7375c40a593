//! Reusable numerical kernels: adaptive complex quadrature on a nested
//! Gauss–Kronrod rule (with oscillation-aware initial panels and
//! endpoint-substitution helpers), principal-value integration by
//! singularity subtraction, bracketed and complex-Newton root finding,
//! Gauss–Legendre node generation, and log–log power-law fitting.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Controls for the adaptive quadrature routines.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Absolute tolerance on the value of the integral.
    pub abs_tol: f64,
    /// Cap on the total number of panels the adaptive subdivision may hold.
    pub max_panels: usize,
    /// Wavenumber of the fastest `e^{-iEt}`-like oscillation of the
    /// integrand, if any. When set, initial panels are no wider than
    /// `pi / (2 * scale)` so every oscillation is resolved before the error
    /// estimate is trusted.
    pub oscillation_scale: Option<f64>,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, max_panels: 20_000, oscillation_scale: None }
    }

    pub fn with_oscillation(mut self, scale: f64) -> Self {
        self.oscillation_scale = if scale > 0.0 { Some(scale) } else { None };
        self
    }

    pub fn with_tolerance(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::degenerate(format!(
                "quadrature tolerance must be positive and finite, got {}",
                self.abs_tol
            )));
        }
        if self.max_panels < 4 {
            return Err(Error::degenerate(format!(
                "quadrature panel cap must be at least 4, got {}",
                self.max_panels
            )));
        }
        if let Some(s) = self.oscillation_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::degenerate(format!(
                    "oscillation scale must be positive and finite, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of a least-squares power-law fit `y ~ exp(intercept) * t^slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln y` about the fitted line.
    pub residual_rms: f64,
}

// 15-point Kronrod abscissae on [-1, 1] (positive half, descending); the
// embedded 7-point Gauss nodes sit at the odd indices.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the center XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    integral: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Max-heap on error; ties broken by position so the refinement order is
    // fully deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
            .then(other.b.total_cmp(&self.b))
    }
}

/// Turns the raw Kronrod-minus-Gauss difference into a safe error estimate,
/// using the integral of |f| and of |f - mean| to guard against fluky
/// agreement of the two rules.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let min_floor = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > min_floor {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn eval_panel<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);

    let mut eval = |x: f64| -> Result<Complex64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::non_finite(format!("integrand at {x}")));
        }
        Ok(v)
    };

    let fc = eval(center)?;
    let mut fv_lo = [Complex64::default(); 7];
    let mut fv_hi = [Complex64::default(); 7];
    for idx in 0..7 {
        let dx = hlgth * XGK[idx];
        fv_lo[idx] = eval(center - dx)?;
        fv_hi[idx] = eval(center + dx)?;
    }

    let mut resg = WG[3] * fc;
    for j in 0..3 {
        let idx = 2 * j + 1;
        resg += WG[j] * (fv_lo[idx] + fv_hi[idx]);
    }

    let mut resk = WGK[7] * fc;
    let mut resabs = WGK[7] * fc.norm();
    for idx in 0..7 {
        resk += WGK[idx] * (fv_lo[idx] + fv_hi[idx]);
        resabs += WGK[idx] * (fv_lo[idx].norm() + fv_hi[idx].norm());
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).norm();
    for idx in 0..7 {
        resasc += WGK[idx] * ((fv_lo[idx] - reskh).norm() + (fv_hi[idx] - reskh).norm());
    }

    let dhlgth = hlgth.abs();
    let err = rescale_error((resk - resg).norm() * dhlgth, resabs * dhlgth, resasc * dhlgth);
    Ok(Panel { a, b, integral: resk * hlgth, error: err })
}

/// Adaptive quadrature of a complex-valued integrand over [a, b].
///
/// The interval is first chopped into panels narrow enough to resolve any
/// declared oscillation, then the worst panel (by nested-rule error
/// estimate) is bisected until the summed error estimate drops below
/// `spec.abs_tol`. The returned value is a deterministic left-to-right
/// re-summation of all panels.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::degenerate(format!("non-finite integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if a > b {
        return Err(Error::degenerate(format!("integration bounds out of order: [{a}, {b}]")));
    }

    let width = b - a;
    let mut initial = 1usize;
    if let Some(scale) = spec.oscillation_scale {
        let cap = std::f64::consts::FRAC_PI_2 / scale;
        if cap < width {
            initial = (width / cap).ceil() as usize;
        }
    }
    // Leave headroom for refinement even when the oscillation pre-split is
    // already large.
    initial = initial.clamp(1, spec.max_panels.max(8) - 2);

    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut total_err = 0.0;
    for k in 0..initial {
        let pa = a + width * (k as f64) / (initial as f64);
        let pb = if k + 1 == initial { b } else { a + width * ((k + 1) as f64) / (initial as f64) };
        let p = eval_panel(&mut f, pa, pb)?;
        total_err += p.error;
        heap.push(p);
    }

    while total_err > spec.abs_tol {
        if heap.len() + 1 > spec.max_panels {
            return Err(Error::NoConvergence {
                context: format!("adaptive quadrature on [{a}, {b}]"),
                residual: total_err,
                tolerance: spec.abs_tol,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // The worst panel is too narrow to split in floating point; the
            // remaining error cannot be reduced.
            return Err(Error::NoConvergence {
                context: format!(
                    "adaptive quadrature on [{a}, {b}] hit floating-point panel width at {mid}"
                ),
                residual: total_err,
                tolerance: spec.abs_tol,
            });
        }
        total_err -= worst.error;
        let left = eval_panel(&mut f, worst.a, mid)?;
        let right = eval_panel(&mut f, mid, worst.b)?;
        total_err += left.error + right.error;
        heap.push(left);
        heap.push(right);
    }

    // Deterministic orderly re-sum, independent of the heap's pop history.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut sum = Complex64::new(0.0, 0.0);
    for p in &panels {
        sum += p.integral;
    }
    Ok(sum)
}

/// Adaptive quadrature of a real integrand (thin wrapper over [`integrate`]).
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let value = integrate(|x| f(x).map(|v| Complex64::new(v, 0.0)), a, b, spec)?;
    Ok(value.re)
}

/// Quadrature with the variable change `E = a + s^2` (and mirrored at the
/// top end), which absorbs integrable endpoint singularities of the form
/// `(E - a)^beta` with half-integer `beta` into a smooth integrand.
///
/// The interval is split at its midpoint; each requested end is mapped to
/// its own `s`-coordinate piece, untransformed ends are integrated directly.
pub fn integrate_edge_transformed<F>(
    f: F,
    a: f64,
    b: f64,
    transform_a: bool,
    transform_b: bool,
    spec: &QuadratureSpec,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    spec.validate()?;
    if !(a < b) {
        return Err(Error::degenerate(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if !transform_a && !transform_b {
        return integrate(&f, a, b, spec);
    }
    let mid = 0.5 * (a + b);
    let half_spec = QuadratureSpec { abs_tol: 0.5 * spec.abs_tol, ..*spec };

    // Oscillations e^{-iEt} become e^{-i(a + s^2)t} in the transformed
    // coordinate; the local wavenumber is at most 2*s_max*t.
    let transformed_spec = |s_max: f64| -> QuadratureSpec {
        let mut ts = half_spec;
        if let Some(scale) = spec.oscillation_scale {
            ts.oscillation_scale = Some((2.0 * s_max * scale).max(f64::MIN_POSITIVE));
        }
        ts
    };

    let lower = if transform_a {
        let s_max = (mid - a).sqrt();
        integrate(|s| f(a + s * s).map(|v| v * 2.0 * s), 0.0, s_max, &transformed_spec(s_max))?
    } else {
        integrate(&f, a, mid, &half_spec)?
    };
    let upper = if transform_b {
        let s_max = (b - mid).sqrt();
        integrate(|s| f(b - s * s).map(|v| v * 2.0 * s), 0.0, s_max, &transformed_spec(s_max))?
    } else {
        integrate(&f, mid, b, &half_spec)?
    };
    Ok(lower + upper)
}

/// Cauchy principal value of `∫ f(E) / (x0 - E) dE` over [a, b] with
/// `a < x0 < b`, by the subtraction method:
///
/// `PV ∫ f(E)/(x0-E) dE = ∫ (f(E)-f(x0))/(x0-E) dE + f(x0) ln((x0-a)/(b-x0))`.
///
/// The regularized integral is split at `x0` so the quadrature rule (which
/// never samples interval endpoints) cannot land on the removable 0/0 point.
pub fn principal_value<F>(
    f: F,
    singularity: f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(a < singularity && singularity < b) {
        return Err(Error::degenerate(format!(
            "principal-value singularity {singularity} must lie strictly inside [{a}, {b}]"
        )));
    }
    let f_at = f(singularity)?;
    if !f_at.is_finite() {
        return Err(Error::non_finite(format!(
            "principal-value integrand at the singularity {singularity}"
        )));
    }
    let half_spec = QuadratureSpec { abs_tol: 0.5 * spec.abs_tol, ..*spec };
    let regular = |e: f64| -> Result<f64> {
        let v = f(e)?;
        Ok((v - f_at) / (singularity - e))
    };
    let left = integrate_real(regular, a, singularity, &half_spec)?;
    let right = integrate_real(regular, singularity, b, &half_spec)?;
    Ok(left + right + f_at * ((singularity - a) / (b - singularity)).ln())
}

/// Root of a continuous real function on a sign-changing bracket: bisection
/// down to `tol`, then a bracket-clamped Newton polish (finite-difference
/// derivative) that keeps whichever iterate has the smallest |f|.
pub fn find_root_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::degenerate(format!("root tolerance must be positive, got {tol}")));
    }
    if !(lo < hi) {
        return Err(Error::degenerate(format!("root bracket out of order: [{lo}, {hi}]")));
    }
    let mut check = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::non_finite(format!("root function at {x}")));
        }
        Ok(v)
    };
    let mut lo = lo;
    let mut hi = hi;
    let mut f_lo = check(lo)?;
    let f_hi = check(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }

    let mut best = lo;
    let mut best_abs = f_lo.abs();
    if f_hi.abs() < best_abs {
        best = hi;
        best_abs = f_hi.abs();
    }

    for _ in 0..256 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break; // bracket narrower than floating point resolves
        }
        let f_mid = check(mid)?;
        if f_mid.abs() < best_abs {
            best = mid;
            best_abs = f_mid.abs();
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish, clamped to the final bracket. A failed derivative
    // (non-finite probe, zero slope) simply ends the polish.
    let mut x = best;
    for _ in 0..12 {
        let fx = match check(x) {
            Ok(v) => v,
            Err(_) => break,
        };
        if fx.abs() < best_abs {
            best = x;
            best_abs = fx.abs();
        }
        let h = (hi - lo).min(1e-7 * x.abs().max(1.0));
        if h == 0.0 {
            break;
        }
        let (xp, xm) = (x + h, x - h);
        let (fp, fm) = match (check(xp), check(xm)) {
            (Ok(p), Ok(m)) => (p, m),
            _ => break,
        };
        let deriv = (fp - fm) / (2.0 * h);
        if deriv == 0.0 || !deriv.is_finite() {
            break;
        }
        let next = x - fx / deriv;
        if !next.is_finite() || next <= lo || next >= hi {
            break;
        }
        if (next - x).abs() < 1e-3 * tol {
            x = next;
            if let Ok(v) = check(x) {
                if v.abs() < best_abs {
                    best = x;
                }
            }
            break;
        }
        x = next;
    }
    Ok(best)
}

/// Newton iteration for a root of an analytic complex function, with the
/// derivative estimated by a central finite difference of step
/// `1e-6 * max(1, |z|)`. Converges when |f(z)| drops below `tol`.
pub fn find_root_complex<F>(mut f: F, seed: Complex64, tol: f64) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if !(tol > 0.0) {
        return Err(Error::degenerate(format!("root tolerance must be positive, got {tol}")));
    }
    let mut z = seed;
    let mut residual = f64::INFINITY;
    for _ in 0..100 {
        let fz = f(z)?;
        if !fz.is_finite() {
            return Err(Error::non_finite(format!("complex root function at {z}")));
        }
        residual = fz.norm();
        if residual < tol {
            return Ok(z);
        }
        let h = 1e-6 * z.norm().max(1.0);
        let fp = f(z + Complex64::new(h, 0.0))?;
        let fm = f(z - Complex64::new(h, 0.0))?;
        let deriv = (fp - fm) / (2.0 * h);
        if !deriv.is_finite() || deriv.norm() == 0.0 {
            return Err(Error::NoConvergence {
                context: format!("complex Newton stalled at {z} (flat derivative)"),
                residual,
                tolerance: tol,
            });
        }
        z -= fz / deriv;
        if !z.is_finite() {
            return Err(Error::non_finite("complex Newton iterate".to_string()));
        }
    }
    Err(Error::NoConvergence {
        context: format!("complex Newton from seed {seed}"),
        residual,
        tolerance: tol,
    })
}

/// Least-squares fit of `ln y` against `ln t`; the slope estimates the
/// power-law exponent of `y ~ t^slope`.
pub fn fit_power_law(ts: &[f64], ys: &[f64]) -> Result<FitResult> {
    if ts.len() != ys.len() {
        return Err(Error::degenerate(format!(
            "power-law fit needs matching lengths, got {} times and {} values",
            ts.len(),
            ys.len()
        )));
    }
    if ts.len() < 3 {
        return Err(Error::degenerate(format!(
            "power-law fit needs at least 3 points, got {}",
            ts.len()
        )));
    }
    let n = ts.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::degenerate(format!("power-law fit needs positive times, got {t}")));
        }
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::degenerate(format!("power-law fit needs positive values, got {y}")));
        }
        sx += t.ln();
        sy += y.ln();
    }
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        let dx = t.ln() - mx;
        let dy = y.ln() - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::degenerate(
            "power-law fit needs at least two distinct times".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        let r = y.ln() - (intercept + slope * t.ln());
        ss += r * r;
    }
    Ok(FitResult { slope, intercept, residual_rms: (ss / n).sqrt() })
}

/// Nodes and weights of the n-point Gauss–Legendre rule on (-1, 1), nodes
/// ascending. Computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess for the i-th largest node.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                // One clean-up pass after convergence keeps full precision.
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                dp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Center node of odd rules is exactly zero.
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_rule_is_exact_on_low_degree_polynomials() {
        // The 15-point rule integrates x^k exactly for k well beyond 3.
        let mut f = |x: f64| Ok(Complex64::new(3.0 * x * x + 2.0 * x + 1.0, 0.0));
        let p = eval_panel(&mut f, -1.0, 2.0).unwrap();
        // antiderivative x^3 + x^2 + x evaluated on [-1, 2]
        let exact = (8.0 + 4.0 + 2.0) - (-1.0 + 1.0 - 1.0);
        assert!((p.integral.re - exact).abs() < 1e-13);
        assert!(p.integral.im.abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_small_rules_match_known_values() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);

        let (x3, w3) = gauss_legendre(3);
        assert!((x3[1]).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-14);
        assert!((x3[2] - (3.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert!((w3[0] - 5.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_interval_length() {
        for n in [16, 101, 500] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n} weight sum {s}");
        }
    }
}
