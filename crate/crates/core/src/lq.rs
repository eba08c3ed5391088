//! LQ factorization of the `n × (n-1)` matrix `H` by Householder reflections
//! applied from the right.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::precision::Real;

/// Returns `L` with `H = L·Q` for some orthogonal `Q`; `L` is lower
/// trapezoidal with a nonnegative diagonal.
pub fn lq_factor<R: Real>(h: &Matrix<R>) -> Result<Matrix<R>> {
    let mut l = h.clone();
    lq_in_place(&mut l)?;
    Ok(l)
}

pub fn lq_in_place<R: Real>(l: &mut Matrix<R>) -> Result<()> {
    let (rows, cols) = (l.rows(), l.cols());
    if rows < cols {
        return Err(Error::InvalidParameter(format!(
            "lq_factor needs rows >= cols, got {rows}x{cols}"
        )));
    }
    if cols == 0 {
        return Ok(());
    }
    let ctx = l[(0, 0)].ctx();
    let zero = R::from_i64(0, ctx);
    for j in 0..cols {
        let mut norm2 = zero.clone();
        for k in j..cols {
            norm2.add_mul(&l[(j, k)], &l[(j, k)]);
        }
        let norm = norm2.sqrt();
        if norm.is_zero() || !norm.is_finite() {
            return Err(Error::Exhausted(format!(
                "H is rank deficient at column {}",
                j + 1
            )));
        }
        // alpha = -sign(x_0)·||x|| avoids cancellation in v_0 = x_0 - alpha
        let alpha = if l[(j, j)].lt(&zero) {
            norm
        } else {
            norm.neg()
        };
        let mut v: Vec<R> = (j..cols).map(|k| l[(j, k)].clone()).collect();
        v[0] = v[0].sub(&alpha);
        let mut vnorm2 = zero.clone();
        for e in &v {
            vnorm2.add_mul(e, e);
        }
        if !vnorm2.is_zero() {
            let two_over = R::from_i64(2, ctx).div(&vnorm2);
            for i in j..rows {
                let mut dot = zero.clone();
                for (k, vk) in v.iter().enumerate() {
                    dot.add_mul(&l[(i, j + k)], vk);
                }
                let f = dot.mul(&two_over);
                for (k, vk) in v.iter().enumerate() {
                    l[(i, j + k)].sub_mul(&f, vk);
                }
            }
        }
        l[(j, j)] = alpha.clone();
        for k in j + 1..cols {
            l[(j, k)] = zero.clone();
        }
        if alpha.lt(&zero) {
            for i in j..rows {
                l[(i, j)] = l[(i, j)].neg();
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rug::Float;

    fn gram<R: Real>(m: &Matrix<R>) -> Matrix<R> {
        let ctx = m[(0, 0)].ctx();
        Matrix::from_fn(m.rows(), m.rows(), |i, k| {
            let mut acc = R::from_i64(0, ctx);
            for j in 0..m.cols() {
                acc.add_mul(&m[(i, j)], &m[(k, j)]);
            }
            acc
        })
    }

    #[test]
    fn lower_trapezoidal_input_is_fixed_point() {
        let h = Matrix::from_rows(vec![
            vec![2.0, 0.0, 0.0],
            vec![0.5, 1.5, 0.0],
            vec![-0.3, 0.2, 0.7],
            vec![0.1, -0.4, 0.25],
        ]);
        let l = lq_factor(&h).unwrap();
        for (a, b) in l.iter().zip(h.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn reconstructs_gram_matrix_at_full_precision() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let prec = 400;
        let h = Matrix::from_fn(4, 3, |_, _| Float::with_val(prec, rng.gen_range(-1.0..1.0)));
        let l = lq_factor(&h).unwrap();
        for i in 0..4 {
            for j in i + 1..3 {
                assert!(l[(i, j)].is_zero());
            }
        }
        for j in 0..3 {
            assert!(l[(j, j)] >= 0);
        }
        let (g1, g2) = (gram(&h), gram(&l));
        let tol = Float::with_val(prec, Float::parse("1e-110").unwrap());
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!(Float::with_val(prec, a - b).abs() < tol);
        }
    }

    #[test]
    fn negative_diagonal_is_flipped() {
        let h = Matrix::from_rows(vec![vec![-3.0, 0.0], vec![1.0, -2.0], vec![0.5, 0.5]]);
        let l = lq_factor(&h).unwrap();
        assert!((l[(0, 0)] - 3.0).abs() < 1e-15);
        assert!((l[(1, 1)] - 2.0).abs() < 1e-15);
        assert!((l[(1, 0)] + 1.0).abs() < 1e-15);
        let (g1, g2) = (gram(&h), gram(&l));
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        // second column is zero
        let h = Matrix::from_rows(vec![vec![1.0, 0.0], vec![3.0, 0.0], vec![2.0, 0.0]]);
        assert!(matches!(lq_factor(&h), Err(Error::Exhausted(_))));
    }
}
