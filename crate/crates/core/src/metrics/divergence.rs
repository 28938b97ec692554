use crate::density::DiscreteDensity;
use crate::error::{check_range, Error, Result};

fn check_support(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<()> {
    if p.same_support(q) {
        Ok(())
    } else {
        Err(Error::SupportMismatch)
    }
}

/// `½ Σ |p - q|`.
pub fn total_variation(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    check_support(p, q)?;
    let l1: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

/// `D_α(p‖q) = ln(Σ p^α q^{1-α}) / (α - 1)`. Zero-mass terms of `p` are
/// dropped; mass of `p` where `q` vanishes is an error.
pub fn renyi_divergence(p: &DiscreteDensity, q: &DiscreteDensity, alpha: f64) -> Result<f64> {
    check_support(p, q)?;
    check_range(
        "alpha",
        alpha,
        alpha > 0.0 && alpha != 1.0 && alpha.is_finite(),
        "positive and different from 1",
    )?;
    if p.weights() == q.weights() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, (&a, &b)) in p.weights().iter().zip(q.weights()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::AbsoluteContinuityViolation(i));
        }
        sum += a * (a / b).powf(alpha - 1.0);
    }
    Ok((sum.ln() / (alpha - 1.0)).max(0.0))
}

/// `κ(p‖q) = Σ p²/q = exp(D₂(p‖q))`, computed directly.
pub fn renyi_condition_number(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    check_support(p, q)?;
    let mut sum = 0.0;
    for (i, (&a, &b)) in p.weights().iter().zip(q.weights()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::AbsoluteContinuityViolation(i));
        }
        sum += a * (a / b);
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinRatio {
    /// `min_x p(x)/q(x)`.
    pub exact: f64,
    /// `1 / (1 + TV(p,q) / min_x p(x))`, never above `exact`.
    pub lemma_bound: f64,
}

/// Minimum likelihood ratio of `p` against `q` and its total-variation
/// lower bound. `p` must be strictly positive.
pub fn min_ratio_bound(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<MinRatio> {
    let tv = total_variation(p, q)?;
    if let Some(i) = p.weights().iter().position(|&w| w <= 0.0) {
        return Err(Error::ZeroMass(i));
    }
    let min_p = p.weights().iter().copied().fold(f64::INFINITY, f64::min);
    let exact = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| if *b > 0.0 { a / b } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    Ok(MinRatio {
        exact,
        lemma_bound: 1.0 / (1.0 + tv / min_p),
    })
}

/// Upper bound on `D_α(p‖q)` from total variation and
/// `β = min_x q(x)/p(x)`: `ln(1 + TV·(β^{1-α} - 1)/(1 - β)) / (α - 1)`.
pub fn sason_verdu_bound(p: &DiscreteDensity, q: &DiscreteDensity, alpha: f64) -> Result<f64> {
    let tv = total_variation(p, q)?;
    check_range(
        "alpha",
        alpha,
        alpha >= 0.0 && alpha != 1.0 && alpha.is_finite(),
        "in [0, 1) or (1, inf)",
    )?;
    if tv == 0.0 {
        return Ok(0.0);
    }
    let beta = p
        .weights()
        .iter()
        .zip(q.weights())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| b / a)
        .fold(f64::INFINITY, f64::min);
    if beta <= 0.0 && alpha > 1.0 {
        return Ok(f64::INFINITY);
    }
    // (β^{1-α} - 1)/(1 - β) → α - 1 as β → 1
    let factor = if (1.0 - beta).abs() < 1e-12 {
        alpha - 1.0
    } else {
        (beta.powf(1.0 - alpha) - 1.0) / (1.0 - beta)
    };
    Ok((1.0 + tv * factor).ln() / (alpha - 1.0))
}

/// Upper bound on `D₂(ν‖μ)` by chaining through `ν₁`:
/// `(3/2) D₄(ν‖ν₁) + D₃(ν₁‖μ)`, each term replaced by its
/// [`sason_verdu_bound`].
pub fn chained_renyi_bound(nu: &DiscreteDensity, nu1: &DiscreteDensity, mu: &DiscreteDensity) -> Result<f64> {
    check_support(nu, nu1)?;
    check_support(nu1, mu)?;
    for d in [nu, nu1, mu] {
        if let Some(i) = d.weights().iter().position(|&w| w <= 0.0) {
            return Err(Error::ZeroMass(i));
        }
    }
    Ok(1.5 * sason_verdu_bound(nu, nu1, 4.0)? + sason_verdu_bound(nu1, mu, 3.0)?)
}

/// Tail bound `P(‖p̂ - p‖₁ > t) ≤ exp(-(n/2)(t - √(k/n))²)` for the
/// empirical estimate of a `k`-point distribution from `n` samples.
pub fn l1_tail_bound(cardinality: usize, n: usize, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "n",
            value: 0.0,
            expected: "at least 1",
        });
    }
    let n = n as f64;
    let floor = (cardinality as f64 / n).sqrt();
    check_range("t", t, t >= floor * (1.0 - 1e-12), "at least sqrt(k/n)")?;
    let gap = (t - floor).max(0.0);
    Ok((-(n / 2.0) * gap * gap).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    fn dens(w: &[f64]) -> DiscreteDensity {
        let dim = match w.len() {
            2 => 1,
            4 => 2,
            8 => 3,
            16 => 4,
            _ => panic!("unsupported size"),
        };
        DiscreteDensity::over_domain(DomainSpec::boolean(dim).unwrap(), w.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        let p = dens(&[0.5, 0.5]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        assert_eq!(total_variation(&dens(&[1.0, 0.0]), &dens(&[0.0, 1.0])).unwrap(), 1.0);
        let tv = total_variation(&p, &dens(&[0.25, 0.75])).unwrap();
        assert!((tv - 0.25).abs() < 1e-15);
        assert!(matches!(
            total_variation(&p, &dens(&[0.25; 4])),
            Err(Error::SupportMismatch)
        ));
    }

    #[test]
    fn renyi_examples() {
        let p = dens(&[0.5, 0.5]);
        let q = dens(&[0.25, 0.75]);
        for alpha in [0.5, 2.0, 3.0, 10.0] {
            assert_eq!(renyi_divergence(&p, &p, alpha).unwrap(), 0.0);
        }
        let d2 = renyi_divergence(&p, &q, 2.0).unwrap();
        assert!((d2 - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((d2 - 0.28768).abs() < 1e-5);
        let mut point = vec![0.0; 8];
        point[3] = 1.0;
        let k = renyi_condition_number(&dens(&point), &dens(&[0.125; 8])).unwrap();
        assert!((k - 8.0).abs() < 1e-12);
        assert!((renyi_divergence(&dens(&point), &dens(&[0.125; 8]), 2.0).unwrap().exp() - k).abs() < 1e-12);
    }

    #[test]
    fn renyi_errors() {
        let p = dens(&[0.5, 0.5]);
        assert!(matches!(
            renyi_divergence(&p, &dens(&[1.0, 0.0]), 2.0),
            Err(Error::AbsoluteContinuityViolation(1))
        ));
        assert!(renyi_divergence(&p, &p, 1.0).is_err());
        assert!(renyi_divergence(&p, &p, 0.0).is_err());
        // zero mass of p is fine
        assert!(renyi_divergence(&dens(&[1.0, 0.0]), &p, 2.0).is_ok());
    }

    #[test]
    fn min_ratio_examples() {
        let p = dens(&[0.5, 0.5]);
        let same = min_ratio_bound(&p, &p).unwrap();
        assert_eq!((same.exact, same.lemma_bound), (1.0, 1.0));
        let r = min_ratio_bound(&p, &dens(&[0.25, 0.75])).unwrap();
        assert!((r.exact - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.lemma_bound - 2.0 / 3.0).abs() < 1e-15);
        let r = min_ratio_bound(&dens(&[0.9, 0.1]), &dens(&[0.5, 0.5])).unwrap();
        assert!((r.exact - 0.2).abs() < 1e-15);
        assert!((r.lemma_bound - 0.2).abs() < 1e-15);
        assert!(matches!(
            min_ratio_bound(&dens(&[1.0, 0.0]), &p),
            Err(Error::ZeroMass(1))
        ));
    }

    #[test]
    fn sason_verdu_dominates() {
        let p = dens(&[0.1, 0.2, 0.3, 0.4]);
        let q = dens(&[0.25, 0.25, 0.3, 0.2]);
        for alpha in [0.5, 2.0, 3.0, 4.0] {
            let direct = renyi_divergence(&p, &q, alpha).unwrap();
            let bound = sason_verdu_bound(&p, &q, alpha).unwrap();
            assert!(bound >= direct, "alpha {alpha}: {bound} < {direct}");
        }
    }

    #[test]
    fn chained_examples() {
        let p = dens(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(chained_renyi_bound(&p, &p, &p).unwrap(), 0.0);
        let q = dens(&[0.2, 0.2, 0.3, 0.3]);
        // ν₁ = μ: second term vanishes
        let b = chained_renyi_bound(&p, &q, &q).unwrap();
        assert!((b - 1.5 * sason_verdu_bound(&p, &q, 4.0).unwrap()).abs() < 1e-15);
        assert!(b >= renyi_divergence(&p, &q, 2.0).unwrap());
    }

    #[test]
    fn l1_tail_examples() {
        assert_eq!(l1_tail_bound(16, 10_000, 0.04).unwrap(), 1.0);
        let n = 10_000.0f64;
        let t = (2.0 * 4f64.ln() / n).sqrt() + (16.0 / n).sqrt();
        assert!((l1_tail_bound(16, 10_000, t).unwrap() - 0.25).abs() < 1e-12);
        assert!(l1_tail_bound(16, 10_000, 0.01).is_err());
    }
}
