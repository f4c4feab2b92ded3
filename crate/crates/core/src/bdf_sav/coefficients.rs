use crate::error::{Error, Result};

/// Exact rational used while generating coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    fn new(num: i64, den: i64) -> Self {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn binomial(n: i64, r: i64) -> i64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Coefficients of the order-`k` backward difference formula in the form
///
/// ```text
/// Δt · ẋ_{n+1} ≈ H x_{n+1} − Σ_j w_j x_{n−j}
/// x^{ex}_{n+1} = Σ_j e_j x_{n−j}
/// ```
///
/// where `H` is the `k`-th harmonic number, `w_j = (−1)ʲ binom(k, j+1)/(j+1)`
/// and `e_j = (−1)ʲ binom(k, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfCoefficients {
    pub k: usize,
    pub harmonic: f64,
    pub history_weights: Vec<f64>,
    pub extrap_weights: Vec<f64>,
}

impl BdfCoefficients {
    pub fn new(k: usize) -> Result<Self> {
        if !(1..=5).contains(&k) {
            return Err(Error::UnsupportedOrder(k));
        }
        let ki = k as i64;
        let harmonic = (1..=ki).fold(Ratio::new(0, 1), |acc, j| acc.add(Ratio::new(1, j)));
        let mut history_weights = Vec::with_capacity(k);
        let mut extrap_weights = Vec::with_capacity(k);
        for j in 0..ki {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let b = binomial(ki, j + 1);
            history_weights.push(Ratio::new(sign * b, j + 1).to_f64());
            extrap_weights.push((sign * b) as f64);
        }
        Ok(Self {
            k,
            harmonic: harmonic.to_f64(),
            history_weights,
            extrap_weights,
        })
    }
}

pub fn bdf_coefficients(k: usize) -> Result<BdfCoefficients> {
    BdfCoefficients::new(k)
}

/// Exponent `β` of the scaling factor: the smallest integer with `2β > k + 1`,
/// and at least 2.
pub fn beta_parameter(k: usize) -> Result<u32> {
    if !(1..=5).contains(&k) {
        return Err(Error::UnsupportedOrder(k));
    }
    let k = k as u32;
    Ok(if k % 2 == 1 { 1 + (k + 1) / 2 } else { 1 + k / 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let c1 = BdfCoefficients::new(1).unwrap();
        assert_eq!(c1.harmonic, 1.0);
        assert_eq!(c1.history_weights, vec![1.0]);
        assert_eq!(c1.extrap_weights, vec![1.0]);

        let c2 = BdfCoefficients::new(2).unwrap();
        assert_eq!(c2.harmonic, 1.5);
        assert_eq!(c2.history_weights, vec![2.0, -0.5]);
        assert_eq!(c2.extrap_weights, vec![2.0, -1.0]);

        let c3 = BdfCoefficients::new(3).unwrap();
        assert_eq!(c3.harmonic, 11.0 / 6.0);
        assert_eq!(c3.history_weights, vec![3.0, -1.5, 1.0 / 3.0]);
        assert_eq!(c3.extrap_weights, vec![3.0, -3.0, 1.0]);
    }

    #[test]
    fn invariants_hold_for_all_orders() {
        for k in 1..=5 {
            let c = BdfCoefficients::new(k).unwrap();
            let h: f64 = (1..=k).map(|j| 1.0 / j as f64).sum();
            assert!((c.harmonic - h).abs() < 1e-15);
            let se: f64 = c.extrap_weights.iter().sum();
            assert!((se - 1.0).abs() < 1e-14);
            let sw: f64 = c.history_weights.iter().sum();
            assert!((c.harmonic - sw).abs() < 1e-14);
        }
    }

    #[test]
    fn order_out_of_range() {
        assert_eq!(BdfCoefficients::new(0), Err(Error::UnsupportedOrder(0)));
        assert_eq!(BdfCoefficients::new(6), Err(Error::UnsupportedOrder(6)));
        assert!(beta_parameter(6).is_err());
    }

    #[test]
    fn beta_values() {
        let betas: Vec<u32> = (1..=5).map(|k| beta_parameter(k).unwrap()).collect();
        assert_eq!(betas, vec![2, 2, 3, 3, 4]);
        for k in 1..=5 {
            assert!(2 * beta_parameter(k).unwrap() as usize > k + 1);
        }
    }
}
