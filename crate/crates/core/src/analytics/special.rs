use super::AnalyticsError;

/// `B(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn beta_fn(x: f64, y: f64) -> Result<f64, AnalyticsError> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(AnalyticsError::Domain(format!("B({x}, {y}) needs positive arguments")));
    }
    // Γ overflows past 171.
    if x + y < 170.0 {
        Ok(libm::tgamma(x) * libm::tgamma(y) / libm::tgamma(x + y))
    } else {
        Ok((libm::lgamma(x) + libm::lgamma(y) - libm::lgamma(x + y)).exp())
    }
}

/// `C(a, b)`, zero outside `0 <= b <= a`.
pub fn binomial(a: i64, b: i64) -> f64 {
    if b < 0 || a < 0 || b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    (1..=b).fold(1.0, |acc, i| acc * (a - b + i) as f64 / i as f64)
}
