//! Dense linear solvers for the small systems produced by chain analysis.
//!
//! Rational systems are solved with fraction-free (Bareiss) elimination over
//! the integers after clearing row denominators, which keeps intermediate
//! entries bounded by determinants of minors. Float systems use Gaussian
//! elimination with partial pivoting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Solves `a · X = rhs` exactly. `a` is `n × n`, `rhs` is `n × k`; the
/// result is `n × k`.
pub fn solve_rational(a: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = a.len();
    if rhs.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::SingularSystem);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = rhs[0].len();
    let width = n + k;

    // Augmented integer matrix, one row per equation, denominators cleared.
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let lcm = row
                .iter()
                .chain(b.iter())
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .chain(b.iter())
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for col in 0..n {
        // Smallest nonzero magnitude keeps the integers short.
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by(|&x, &y| m[x][col].magnitude().cmp(m[y][col].magnitude()))
            .ok_or(Error::SingularSystem)?;
        m.swap(col, pivot);

        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..width {
                let v = &pivot_row[col] * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = m[col][col].clone();
    }

    let mut x = vec![vec![Rational::zero(); k]; n];
    for c in 0..k {
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(m[i][n + c].clone());
            for j in i + 1..n {
                if !m[i][j].is_zero() {
                    acc -= Rational::from_integer(m[i][j].clone()) * &x[j][c];
                }
            }
            x[i][c] = acc / Rational::from_integer(m[i][i].clone());
        }
    }
    Ok(x)
}

/// Solves `a · X = rhs` in floating point with partial pivoting.
pub fn solve_f64(mut a: Vec<Vec<f64>>, mut rhs: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    if rhs.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::SingularSystem);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = rhs[0].len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= 1e-14 * scale {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            for j in 0..k {
                rhs[row][j] -= factor * rhs[col][j];
            }
        }
    }

    let mut x = vec![vec![0.0; k]; n];
    for c in 0..k {
        for i in (0..n).rev() {
            let tail: f64 = (i + 1..n).map(|j| a[i][j] * x[j][c]).sum();
            x[i][c] = (rhs[i][c] - tail) / a[i][i];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    // Plain Gauss-Jordan over rationals, no pivot heuristics.
    fn gauss_jordan(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
        let n = a.len();
        let k = b[0].len();
        let mut m: Vec<Vec<Rational>> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x.iter().chain(y).cloned().collect())
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !m[r][c].is_zero())?;
            m.swap(c, p);
            let inv = Rational::one() / m[c][c].clone();
            for v in m[c].iter_mut() {
                *v = v.clone() * inv.clone();
            }
            for r in 0..n {
                if r != c && !m[r][c].is_zero() {
                    let f = m[r][c].clone();
                    for j in 0..n + k {
                        let s = m[c][j].clone() * f.clone();
                        m[r][j] -= s;
                    }
                }
            }
        }
        Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    #[test]
    fn solves_small_exact_system() {
        // h = 1 + 3/4 h  =>  (1/4) h = 1
        let x = solve_rational(&[vec![r(1, 4)]], &[vec![r(1, 1)]]).unwrap();
        assert_eq!(x, vec![vec![r(4, 1)]]);

        let a = vec![vec![r(2, 1), r(1, 3)], vec![r(-1, 2), r(1, 1)]];
        let b = vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]];
        let x = solve_rational(&a, &b).unwrap();
        assert_eq!(x, gauss_jordan(&a, &b).unwrap());
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
        let b = vec![vec![r(3, 1)], vec![r(5, 1)]];
        assert_eq!(solve_rational(&a, &b).unwrap(), vec![vec![r(5, 1)], vec![r(3, 1)]]);
        let af = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = solve_f64(af, vec![vec![3.0], vec![5.0]]).unwrap();
        assert_eq!(x, vec![vec![5.0], vec![3.0]]);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![r(1, 2), r(1, 2)], vec![r(1, 1), r(1, 1)]];
        let b = vec![vec![r(1, 1)], vec![r(1, 1)]];
        assert_eq!(solve_rational(&a, &b), Err(Error::SingularSystem));
        let af = vec![vec![0.5, 0.5], vec![1.0, 1.0]];
        assert_eq!(solve_f64(af, vec![vec![1.0], vec![1.0]]), Err(Error::SingularSystem));
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-9i64..=9, 1i64..=7).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn bareiss_matches_gauss_jordan(
            n in 1usize..=5,
            entries in proptest::collection::vec(small_rational(), 25),
            rhs in proptest::collection::vec(small_rational(), 10),
        ) {
            let a: Vec<Vec<Rational>> = (0..n).map(|i| entries[i * 5..i * 5 + n].to_vec()).collect();
            let b: Vec<Vec<Rational>> = (0..n).map(|i| rhs[i * 2..i * 2 + 2].to_vec()).collect();
            match gauss_jordan(&a, &b) {
                Some(expected) => prop_assert_eq!(solve_rational(&a, &b).unwrap(), expected),
                None => prop_assert_eq!(solve_rational(&a, &b), Err(Error::SingularSystem)),
            }
        }

        #[test]
        fn float_solver_tracks_exact(
            n in 1usize..=5,
            entries in proptest::collection::vec(small_rational(), 25),
            rhs in proptest::collection::vec(small_rational(), 5),
        ) {
            // Diagonally dominant, hence well conditioned.
            let a: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| {
                    let e = entries[i * 5 + j].clone();
                    if i == j { e.abs() + r(50, 1) } else { e }
                }).collect())
                .collect();
            let b: Vec<Vec<Rational>> = (0..n).map(|i| vec![rhs[i].clone()]).collect();
            let exact = solve_rational(&a, &b).unwrap();
            let to_f = |m: &Vec<Vec<Rational>>| -> Vec<Vec<f64>> {
                m.iter().map(|row| row.iter().map(crate::scalar::rational_to_f64).collect()).collect()
            };
            let approx = solve_f64(to_f(&a), to_f(&b)).unwrap();
            for (e, f) in to_f(&exact).iter().zip(&approx) {
                prop_assert!((e[0] - f[0]).abs() < 1e-12);
            }
        }
    }
}
