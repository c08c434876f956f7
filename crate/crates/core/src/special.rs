//! Log-space special functions shared by the Fock-space and half-line code.

pub use statrs::function::gamma::ln_gamma;

/// `ln(n!)` for `n = 0..len`, accumulated exactly as a running sum of logs.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Generalized Laguerre values `L_n^{(alpha)}(x)` for `n = 0..len` by the
/// three-term recurrence, returned as `(sign, ln|L|)` so that callers can fold
/// in large prefactors without overflow.
pub fn laguerre_log_sequence(len: usize, alpha: f64, x: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    // scaled recurrence: values are (prev, cur) * exp(shift)
    let mut shift = 0.0_f64;
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    out.push(split_log(cur, shift));
    for k in 0..len.saturating_sub(1) {
        let kf = k as f64;
        let next = if k == 0 {
            1.0 + alpha - x
        } else {
            ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0)
        };
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
            let s = mag.ln();
            cur /= mag;
            prev /= mag;
            shift += s;
        }
        out.push(split_log(cur, shift));
    }
    out
}

fn split_log(v: f64, shift: f64) -> (f64, f64) {
    if v == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (v.signum(), v.abs().ln() + shift)
    }
}

/// `sinh(x)/x` with the series branch near zero.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laguerre_direct(n: usize, alpha: f64, x: f64) -> f64 {
        // explicit sum: sum_k (-1)^k C(n+alpha, n-k) x^k / k!
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            let binom: f64 = (1..=n - k).map(|j| (alpha + (k + j) as f64) / j as f64).product();
            let term = binom * x.powi(k as i32) / fact;
            s += if k % 2 == 0 { term } else { -term };
        }
        s
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for &alpha in &[0.0, 1.0, 3.0, 7.5] {
            for &x in &[0.0, 0.3, 2.0, 5.5] {
                let seq = laguerre_log_sequence(12, alpha, x);
                for (n, &(sgn, ln)) in seq.iter().enumerate() {
                    let v = sgn * ln.exp();
                    let d = laguerre_direct(n, alpha, x);
                    assert!((v - d).abs() <= 1e-9 * d.abs().max(1.0), "n={n} a={alpha} x={x} {v} {d}");
                }
            }
        }
    }

    #[test]
    fn laguerre_large_argument_stays_finite() {
        let seq = laguerre_log_sequence(200, 5.0, 600.0);
        assert!(seq.iter().all(|(s, l)| s.is_finite() && (l.is_finite() || *s == 0.0)));
    }

    #[test]
    fn factorial_table() {
        let t = ln_factorials(200);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 0.0);
        assert!((t[5] - 120f64.ln()).abs() < 1e-14);
        assert!((t[180] - ln_gamma(181.0)).abs() < 1e-9);
    }
}
