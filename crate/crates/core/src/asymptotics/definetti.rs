use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-exchangeability defect `β(m, L) = 1 − m^{-L} m! / (m − L)!`
/// together with its bound `L(L − 1) / (2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityBound {
    pub m: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub beta: f64,
    pub bound: f64,
}

/// Computes β(m, L): the probability that `L` draws with replacement from
/// `m` items are not all distinct.
///
/// When `m^L` is exactly representable the ratio is formed from exact
/// integers with one rounding; otherwise it is accumulated in log space.
pub fn definetti_bound(m: u64, l: u64) -> Result<ExchangeabilityBound> {
    if l == 0 || l > m {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= L <= m, got m = {m}, L = {l}"
        )));
    }
    let exact = (|| {
        let mut pow: u64 = 1;
        let mut falling: u64 = 1;
        for i in 0..l {
            pow = pow.checked_mul(m)?;
            falling = falling.checked_mul(m - i)?;
        }
        (pow <= 1 << 53).then(|| (pow - falling) as f64 / pow as f64)
    })();
    let beta = exact.unwrap_or_else(|| {
        let log_ratio: f64 = (0..l).map(|i| (-(i as f64) / m as f64).ln_1p()).sum();
        -log_ratio.exp_m1()
    });
    Ok(ExchangeabilityBound {
        m,
        l,
        beta,
        bound: (l * (l - 1)) as f64 / (2 * m) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(definetti_bound(7, 1).unwrap().beta, 0.0);
        let b = definetti_bound(5, 2).unwrap();
        assert_eq!(b.beta, 0.2);
        assert_eq!(b.bound, 0.2);
        assert!((definetti_bound(3, 3).unwrap().beta - 7.0 / 9.0).abs() < 1e-15);
        assert!(definetti_bound(3, 4).is_err());
        assert!(definetti_bound(3, 0).is_err());
    }

    #[test]
    fn exact_and_log_routes_agree() {
        for (m, l) in [(10u64, 5u64), (40, 7), (60, 8)] {
            let b = definetti_bound(m, l).unwrap().beta;
            let log_ratio: f64 = (0..l).map(|i| (-(i as f64) / m as f64).ln_1p()).sum();
            assert!((b + log_ratio.exp_m1()).abs() < 1e-14);
        }
    }
}
