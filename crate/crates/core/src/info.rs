//! Entropy and mutual information of finite distributions, in bits.
//!
//! Masses stay in the chain's scalar type through marginalisation and the
//! ratio `p(x,y) / (p(x) p(y))`; only the logarithm is taken in `f64`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Joint law of two finite random variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<S> {
    mass: BTreeMap<(String, String), S>,
}

impl<S: Scalar> JointDistribution<S> {
    pub fn new<I, X, Y>(cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (X, Y, S)>,
        X: Into<String>,
        Y: Into<String>,
    {
        let mut mass = BTreeMap::new();
        for (x, y, p) in cells {
            let key = (x.into(), y.into());
            if mass.contains_key(&key) {
                return Err(Error::InvalidDistribution(format!("duplicate cell {key:?}")));
            }
            mass.insert(key, p);
        }
        check_masses(mass.values())?;
        Ok(JointDistribution { mass })
    }

    pub fn cells(&self) -> &BTreeMap<(String, String), S> {
        &self.mass
    }

    pub fn get(&self, x: &str, y: &str) -> S {
        self.mass
            .get(&(x.to_string(), y.to_string()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn marginal_x(&self) -> BTreeMap<String, S> {
        marginal(self.mass.iter().map(|((x, _), p)| (x, p)))
    }

    pub fn marginal_y(&self) -> BTreeMap<String, S> {
        marginal(self.mass.iter().map(|((_, y), p)| (y, p)))
    }

    pub fn transpose(&self) -> Self {
        JointDistribution {
            mass: self.mass.iter().map(|((x, y), p)| ((y.clone(), x.clone()), p.clone())).collect(),
        }
    }

    /// Whether every cell equals the product of its marginals (exact in
    /// rational mode).
    pub fn is_product(&self) -> bool {
        let (px, py) = (self.marginal_x(), self.marginal_y());
        px.iter().all(|(x, a)| {
            py.iter()
                .all(|(y, b)| self.get(x, y).approx_eq(&(a.clone() * b.clone())))
        })
    }
}

fn marginal<'a, S: Scalar>(
    cells: impl Iterator<Item = (&'a String, &'a S)>,
) -> BTreeMap<String, S> {
    let mut out: BTreeMap<String, S> = BTreeMap::new();
    for (k, p) in cells {
        let slot = out.entry(k.clone()).or_insert_with(S::zero);
        *slot = slot.clone() + p.clone();
    }
    out
}

fn check_masses<'a, S: Scalar>(masses: impl Iterator<Item = &'a S>) -> Result<()> {
    let mut total = S::zero();
    for p in masses {
        if !p.is_finite_value() || p.is_negative_value() {
            return Err(Error::InvalidDistribution(format!("mass {}", p.to_text())));
        }
        total = total + p.clone();
    }
    if !total.is_unit_sum() {
        return Err(Error::InvalidDistribution(format!("total mass {}", total.to_text())));
    }
    Ok(())
}

/// `Σ p(x,y) log₂(p(x,y) / (p(x) p(y)))`, zero-mass cells contributing 0.
pub fn mutual_information<S: Scalar>(joint: &JointDistribution<S>) -> Result<f64> {
    check_masses(joint.mass.values())?;
    let (px, py) = (joint.marginal_x(), joint.marginal_y());
    let mut bits = 0.0;
    for ((x, y), p) in &joint.mass {
        if p.is_zero() {
            continue;
        }
        let denom = px[x].clone() * py[y].clone();
        if denom.is_zero() {
            return Err(Error::InvalidDistribution(format!(
                "positive mass at ({x}, {y}) with a zero marginal"
            )));
        }
        let ratio = p.clone() / denom;
        bits += p.to_f64() * ratio.to_f64().log2();
    }
    // Rounding can leave a tiny negative sum for independent variables.
    Ok(bits.max(0.0))
}

/// `−Σ p log₂ p` with `0 log₂ 0 = 0`.
pub fn entropy<S: Scalar>(marginal: &BTreeMap<String, S>) -> Result<f64> {
    check_masses(marginal.values())?;
    let bits: f64 = marginal
        .values()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let v = p.to_f64();
            -v * v.log2()
        })
        .sum();
    Ok(bits.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn entropy_examples() {
        let point = BTreeMap::from([("a".to_string(), r(1, 1))]);
        assert_eq!(entropy(&point).unwrap(), 0.0);
        let uniform: BTreeMap<String, Rational> = (0..8).map(|i| (i.to_string(), r(1, 8))).collect();
        assert!((entropy(&uniform).unwrap() - 3.0).abs() < 1e-12);
        let skew = BTreeMap::from([("a".to_string(), r(1, 4)), ("b".to_string(), r(3, 4))]);
        // 1/4·2 + 3/4·log₂(4/3)
        let expected = 0.5 + 0.75 * (4.0f64 / 3.0).log2();
        assert!((entropy(&skew).unwrap() - expected).abs() < 1e-12);
        assert!((entropy(&skew).unwrap() - 0.8113).abs() < 5e-5);
    }

    #[test]
    fn product_joint_has_no_information() {
        let px = [r(1, 3), r(2, 3)];
        let py = [r(1, 5), r(1, 5), r(3, 5)];
        let cells = px.iter().enumerate().flat_map(|(i, a)| {
            py.iter().enumerate().map(move |(j, b)| (i.to_string(), j.to_string(), a.clone() * b.clone()))
        });
        let j = JointDistribution::new(cells).unwrap();
        assert!(j.is_product());
        assert!(mutual_information(&j).unwrap().abs() < 1e-12);
    }

    #[test]
    fn perfectly_correlated_uniform() {
        for n in 1..=6i64 {
            let j = JointDistribution::new((0..n).map(|i| (i.to_string(), i.to_string(), r(1, n)))).unwrap();
            assert!((mutual_information(&j).unwrap() - (n as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(JointDistribution::new([("a", "b", r(1, 2))]).is_err());
        assert!(JointDistribution::new([("a", "b", r(3, 2)), ("a", "c", r(-1, 2))]).is_err());
        let float_ok = JointDistribution::new([("a", "b", 0.5), ("b", "a", 0.5 + 1e-12)]);
        assert!(float_ok.is_ok());
    }
}
