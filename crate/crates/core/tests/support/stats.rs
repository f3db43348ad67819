//! Independent chi-squared tail oracle.

/// erfc(z) for z >= 0 from the Maclaurin series of erf (small z) or a
/// Lentz continued fraction (large z).
pub fn erfc_oracle(z: f64) -> f64 {
    if z < 2.0 {
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -z * z / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        let tiny = 1e-300;
        let mut f = z;
        let mut c = z;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = z + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = z + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / std::f64::consts::PI.sqrt() / f
    }
}

/// Upper tail of chi-squared with one degree of freedom.
pub fn chi2_df1_oracle(x: f64) -> f64 {
    erfc_oracle((x / 2.0).sqrt())
}
