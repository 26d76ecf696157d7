use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::{Scalar, ScalarMode};

/// Exact interpolatory quadrature on `[0, t]` with equally spaced rational
/// nodes `s_j = j·t/m`, `j = 0..=m`.  The weights solve the moment
/// equations `Σ_j w_j s_j^p = t^{p+1}/(p+1)` for `p = 0..=m`, so the rule
/// integrates every polynomial of degree ≤ `m` exactly — which is all the
/// exact regime ever feeds it.
///
/// Returns `(node, weight)` pairs.  `t` may be any rational, including 0
/// and negatives.
pub fn exact_nodes_weights(degree_bound: u32, t: &Scalar) -> Result<Vec<(Scalar, Scalar)>> {
    assert_eq!(t.mode(), ScalarMode::Exact);
    let m = degree_bound.max(1) as usize;
    if t.is_zero() {
        // The integral over a degenerate interval vanishes; one node with
        // weight zero keeps callers uniform.
        return Ok(vec![(Scalar::zero(ScalarMode::Exact), Scalar::zero(ScalarMode::Exact))]);
    }
    let mode = ScalarMode::Exact;
    let nodes: Vec<Scalar> = (0..=m)
        .map(|j| t.mul(&Scalar::from_ratio(j as i64, m as i64, mode)))
        .collect();
    // Vandermonde system in the nodes: row p is (s_0^p, ..., s_m^p).
    let vrows: Vec<Vec<Scalar>> = (0..=m)
        .map(|p| nodes.iter().map(|s| s.pow_u32(p as u32)).collect())
        .collect();
    let rhs: Vec<Scalar> = (0..=m)
        .map(|p| {
            t.pow_u32(p as u32 + 1)
                .div(&Scalar::from_integer(p as i64 + 1, mode))
        })
        .collect();
    let weights = Mat::from_rows(vrows, mode).solve(&rhs)?;
    Ok(nodes.into_iter().zip(weights).collect())
}

/// 32-point Gauss–Legendre rule mapped from `[−1, 1]` to `[0, t]`,
/// as `(node, weight)` pairs of `f64`.
pub fn approx_nodes_weights(t: f64) -> Vec<(f64, f64)> {
    gauss_legendre(32)
        .into_iter()
        .map(|(u, w)| (0.5 * t * (u + 1.0), 0.5 * t * w))
        .collect()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
/// Newton iteration on the Legendre recurrence from the classical
/// Chebyshev-based initial guesses.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    // The cosine seeds start near +1 and walk to −1; flip to ascending.
    out.reverse();
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Lagrange differentiation weights at 0 for the integer nodes `0..=m`:
/// `Σ_j c_j f(j) = f'(0)` exactly for every polynomial `f` of degree ≤ m.
pub fn derivative_weights_at_zero(m: u32) -> Vec<Scalar> {
    let mode = ScalarMode::Exact;
    let m = m as i64;
    let mut out = Vec::with_capacity(m as usize + 1);
    // c_0 = L_0'(0) = Σ_{i≠0} 1/(0−i) = −H_m.
    let mut c0 = Scalar::zero(mode);
    for i in 1..=m {
        c0 = c0.sub(&Scalar::from_ratio(1, i, mode));
    }
    out.push(c0);
    // c_j = L_j'(0) = Π_{k≠0,j}(−k) / Π_{k≠j}(j−k) for j ≥ 1.
    for j in 1..=m {
        let mut num = Scalar::one(mode);
        let mut den = Scalar::one(mode);
        for k in 0..=m {
            if k == j {
                continue;
            }
            if k != 0 {
                num = num.scale_int(-k);
            }
            den = den.scale_int(j - k);
        }
        out.push(num.div(&den));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d, ScalarMode::Exact)
    }

    #[test]
    fn exact_rule_integrates_monomials() {
        // ∫₀^{3/2} s^p ds = (3/2)^{p+1}/(p+1) for p ≤ degree bound.
        let t = rat(3, 2);
        let rule = exact_nodes_weights(4, &t).unwrap();
        for p in 0..=4u32 {
            let mut acc = Scalar::zero(ScalarMode::Exact);
            for (s, w) in &rule {
                acc = acc.add(&w.mul(&s.pow_u32(p)));
            }
            let expect = t
                .pow_u32(p + 1)
                .div(&Scalar::from_integer(p as i64 + 1, ScalarMode::Exact));
            assert_eq!(acc, expect, "degree {p}");
        }
    }

    #[test]
    fn exact_rule_handles_negative_and_zero_intervals() {
        let t = rat(-2, 1);
        let rule = exact_nodes_weights(3, &t).unwrap();
        // ∫₀^{−2} s² ds = −8/3.
        let mut acc = Scalar::zero(ScalarMode::Exact);
        for (s, w) in &rule {
            acc = acc.add(&w.mul(&s.pow_u32(2)));
        }
        assert_eq!(acc, rat(-8, 3));
        let zero_rule = exact_nodes_weights(5, &Scalar::zero(ScalarMode::Exact)).unwrap();
        let total: f64 = zero_rule.iter().map(|(_, w)| w.to_f64()).sum();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn gauss_legendre_32_is_accurate() {
        // Exact for polynomials of degree ≤ 63.
        let rule = approx_nodes_weights(2.0);
        let integral: f64 = rule.iter().map(|(s, w)| w * s.powi(63)).sum();
        let expect = 2.0_f64.powi(64) / 64.0;
        assert!((integral / expect - 1.0).abs() < 1e-12);
        // And very close on a smooth transcendental.
        let integral_e: f64 = rule.iter().map(|(s, w)| w * s.exp()).sum();
        assert!((integral_e - (2.0_f64.exp() - 1.0)).abs() < 1e-12);
        // Weights sum to the interval length.
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_weights_differentiate_exactly() {
        // f(s) = 2s³ − s + 5 on nodes 0..=4: Σ c_j f(j) = f'(0) = −1.
        let c = derivative_weights_at_zero(4);
        let f = |s: i64| {
            Scalar::from_integer(2 * s * s * s - s + 5, ScalarMode::Exact)
        };
        let mut acc = Scalar::zero(ScalarMode::Exact);
        for (j, cj) in c.iter().enumerate() {
            acc = acc.add(&cj.mul(&f(j as i64)));
        }
        assert_eq!(acc, Scalar::from_integer(-1, ScalarMode::Exact));
    }
}
