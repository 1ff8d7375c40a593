//! Shared helpers for the integration tests.

/// J0(x) and J1(x) by Miller's downward recurrence with the
/// J0 + 2(J2 + J4 + …) = 1 normalization. Test-only reference, good to
/// ~1e-13 relative for |x| ≤ 100.
#[allow(dead_code)]
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    let ax = x.abs();
    let start = 2 * (ax.ceil() as usize + 26);
    let mut above = 0.0_f64; // J_{n+1}
    let mut cur = 1e-300_f64; // J_n, arbitrary seed at n = start
    let mut norm = 0.0_f64;
    let mut j1 = 0.0_f64;
    let mut n = start;
    while n >= 1 {
        let below = (2.0 * n as f64 / ax) * cur - above; // J_{n-1}
        if n % 2 == 0 {
            norm += 2.0 * cur;
        }
        if n == 1 {
            j1 = cur;
        }
        above = cur;
        cur = below;
        if cur.abs() > 1e250 {
            above /= 1e250;
            cur /= 1e250;
            norm /= 1e250;
            j1 /= 1e250;
        }
        n -= 1;
    }
    let j0 = cur;
    norm += j0;
    let mut j1 = j1 / norm;
    let mut j0 = j0 / norm;
    if x < 0.0 {
        j1 = -j1; // J1 is odd, J0 even
    }
    if !j0.is_finite() {
        j0 = f64::NAN;
    }
    (j0, j1)
}

#[allow(dead_code)]
pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual:.17e}, expected {expected:.17e} (tol {tol:.3e}, diff {:.3e})",
        (actual - expected).abs()
    );
}
