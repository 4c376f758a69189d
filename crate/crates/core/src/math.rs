//! Small numeric helpers shared by the analytical modules.

use statrs::function::gamma::ln_gamma;

/// Largest `n` for which [`binomial`] uses exact integer arithmetic.
pub const EXACT_BINOMIAL_LIMIT: u64 = 60;

/// Binomial coefficient `C(n, k)` as `f64`; zero when `k > n`.
///
/// Exact for `n <= 60` (the running product stays integral in `u128`), log-gamma otherwise.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_LIMIT {
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        return c as f64;
    }
    let (n, k) = (n as f64, k as f64);
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
        .exp()
        .round()
}

/// `C(n, k)` with signed arguments; any negative argument or `k > n` yields zero.
pub fn binomial_signed(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        0.0
    } else {
        binomial(n as u64, k as u64)
    }
}

pub fn factorial(n: u64) -> f64 {
    (2..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `base^exp` for a non-negative integer exponent, with `0^0 = 1`.
#[inline]
pub fn powu(base: f64, exp: u64) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

/// Binomial probability mass `C(n, k) p^k (1-p)^(n-k)`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial(n, k) * powu(p, k) * powu(1.0 - p, n - k)
}

/// Elementary symmetric polynomial `e_r` of `values`.
///
/// Equals the sum over all strictly increasing index tuples of length `r` of the product of the
/// selected values; `e_0 = 1`.
pub fn elementary_symmetric(values: &[f64], r: usize) -> f64 {
    if r > values.len() {
        return 0.0;
    }
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    for (n, &v) in values.iter().enumerate() {
        for j in (1..=r.min(n + 1)).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[r]
}
