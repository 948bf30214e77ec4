//! Symmetric eigensolvers: Householder tridiagonalization followed by
//! implicit-shift QL.
//!
//! The dense routines keep the working matrix in transposed storage
//! (`w[j * n + k]` holds `V[k][j]`) so every inner loop runs over
//! contiguous memory; eigenvectors come back as the rows of `w`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 50;

/// Largest matrix accepted by the dense path.
pub const DENSE_GUARD: usize = 4000;

/// Eigenvalues and (optionally) orthonormal eigenvectors, ascending.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Row `i` is the eigenvector of `values[i]`; empty if not requested.
    pub vectors: Vec<Vec<T>>,
}

/// Reduces the symmetric matrix held in full storage in `w` to tridiagonal
/// form. Returns `(diag, sub)` with `sub[i]` coupling rows
/// `i - 1` and `i` (`sub[0] = 0`). With `accumulate`, `w` ends holding the
/// orthogonal transform with its columns stored as rows.
fn householder<T: Scalar>(w: &mut [T], n: usize, accumulate: bool) -> (Vec<T>, Vec<T>) {
    let zero = T::zero();
    let mut d = vec![zero; n];
    let mut e = vec![zero; n];
    if n == 0 {
        return (d, e);
    }
    // v(k, j) lives at w[j * n + k]; the algorithm reads v(k, j) for k >= j.
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for dk in &d[..i] {
            scale = scale + dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = zero;
                w[i * n + j] = zero;
            }
        } else {
            for dk in &mut d[..i] {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                w[i * n + j] = f;
                let col = &w[j * n..j * n + i];
                g = e[j] + col[j] * f;
                for k in j + 1..i {
                    g = g + col[k] * d[k];
                    e[k] = e[k] + col[k] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] = col[k] - (f * e[k] + g * d[k]);
                }
                d[j] = col[i - 1];
                w[j * n + i] = zero;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for (i, di) in d.iter_mut().enumerate() {
            *di = w[i * n + i];
        }
        e[0] = zero;
        return (d, e);
    }

    for i in 0..n - 1 {
        w[i * n + (n - 1)] = w[i * n + i];
        w[i * n + i] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = w[(i + 1) * n + k] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + w[(i + 1) * n + k] * w[j * n + k];
                }
                for k in 0..=i {
                    w[j * n + k] = w[j * n + k] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            w[(i + 1) * n + k] = zero;
        }
    }
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
        w[j * n + (n - 1)] = zero;
    }
    w[(n - 1) * n + (n - 1)] = T::one();
    e[0] = zero;
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `e[i]` couples rows
/// `i - 1` and `i` on entry. If `z` is given (rows = basis vectors) it is
/// rotated along.
fn tql<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let zero = T::zero();
    let two = T::of(2.0);
    let eps = T::epsilon();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { iterations: iter - 1 });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for k in 0..n {
                            let t = zi1[k];
                            zi1[k] = s * zi[k] + c * t;
                            zi[k] = c * zi[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    Ok(())
}

fn sort_ascending<T: Scalar>(values: &mut [T]) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off.len() + 1 == diag.len()`), ascending.
pub fn tridiagonal_eigenvalues<T: Scalar>(diag: &[T], off: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "tridiagonal with {n} diagonal and {} off-diagonal entries",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = Vec::with_capacity(n);
    e.push(T::zero());
    e.extend_from_slice(off);
    tql(&mut d, &mut e, None)?;
    sort_ascending(&mut d);
    Ok(d)
}

/// Eigenvalues of a dense symmetric `n x n` matrix (row-major, full storage).
pub fn dense_eigenvalues<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>> {
    check_dense(a, n)?;
    let mut w = a.to_vec();
    let (mut d, mut e) = householder(&mut w, n, false);
    tql(&mut d, &mut e, None)?;
    sort_ascending(&mut d);
    Ok(d)
}

/// Eigenvalues and eigenvectors of a dense symmetric matrix.
pub fn dense_eigen<T: Scalar>(a: &[T], n: usize) -> Result<Eigen<T>> {
    check_dense(a, n)?;
    let mut w = a.to_vec();
    let (mut d, mut e) = householder(&mut w, n, true);
    tql(&mut d, &mut e, Some(&mut w))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    Ok(Eigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors: order.iter().map(|&i| w[i * n..(i + 1) * n].to_vec()).collect(),
    })
}

fn check_dense<T>(a: &[T], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {n}x{n} matrix",
            a.len()
        )));
    }
    if n > DENSE_GUARD {
        return Err(Error::SizeGuard {
            what: "dense eigensolve dimension",
            actual: n.to_string(),
            limit: DENSE_GUARD as u64,
        });
    }
    Ok(())
}

/// Outcome of comparing two spectra as multisets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumComparison<T> {
    pub max_deviation: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Sorts both lists and compares elementwise against
/// `rel * (1 + max |lambda|)`.
pub fn compare_spectra<T: Scalar>(a: &[T], b: &[T], rel: T) -> Result<SpectrumComparison<T>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "spectra of sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_ascending(&mut a);
    sort_ascending(&mut b);
    let scale = a.iter().chain(&b).fold(T::zero(), |m, x| m.max(x.abs()));
    let tolerance = rel * (T::one() + scale);
    let max_deviation = a.iter().zip(&b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    Ok(SpectrumComparison {
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, lambda: f64, v: &[f64]) -> f64 {
        (0..n)
            .map(|i| {
                let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                (av - lambda * v[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Characteristic polynomial of a small dense matrix by Laplace
    /// expansion, evaluated at `x`.
    fn char_poly(a: &[f64], n: usize, x: f64) -> f64 {
        fn det(m: Vec<Vec<f64>>) -> f64 {
            let n = m.len();
            if n == 1 {
                return m[0][0];
            }
            (0..n)
                .map(|c| {
                    let minor: Vec<Vec<f64>> = m[1..]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|(j, _)| *j != c)
                                .map(|(_, v)| *v)
                                .collect()
                        })
                        .collect();
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[0][c] * det(minor)
                })
                .sum()
        }
        let m = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] - if i == j { x } else { 0.0 }).collect())
            .collect();
        det(m)
    }

    #[test]
    fn star_with_tail_spectrum() {
        // Root - v - {c1, c2}: as a graph this is the star K_{1,3} centred at v.
        #[rustfmt::skip]
        let a = [
            0.0, 1.0, 0.0, 0.0,
            1.0, 0.0, 1.0, 1.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        ];
        let ev = dense_eigenvalues(&a, 4).unwrap();
        let s3 = 3f64.sqrt();
        let expect = [-s3, 0.0, 0.0, s3];
        for (x, y) in ev.iter().zip(expect) {
            assert!((x - y).abs() < 1e-10, "{ev:?}");
            // Independent check: each is a root of det(A - x I) = x^4 - 3x^2.
            assert!(char_poly(&a, 4, *x).abs() < 1e-9);
        }
    }

    #[test]
    fn free_jacobi_chebyshev() {
        for m in 1..=8usize {
            let ev = tridiagonal_eigenvalues(&vec![0.0; m], &vec![1.0; m - 1]).unwrap();
            let mut expect: Vec<f64> = (1..=m)
                .map(|l| 2.0 * (std::f64::consts::PI * l as f64 / (m as f64 + 1.0)).cos())
                .collect();
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Brute force: each value is a root of the characteristic polynomial.
            let mut dense = vec![0.0; m * m];
            for i in 0..m - 1 {
                dense[i * m + i + 1] = 1.0;
                dense[(i + 1) * m + i] = 1.0;
            }
            for (x, y) in ev.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-12);
                assert!(char_poly(&dense, m, *y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_by_one() {
        assert_eq!(dense_eigenvalues(&[3.5], 1).unwrap(), vec![3.5]);
        assert_eq!(tridiagonal_eigenvalues(&[-1.0], &[]).unwrap(), vec![-1.0]);
        assert!(dense_eigenvalues::<f64>(&[], 0).unwrap().is_empty());
    }

    #[test]
    fn random_dense_residuals_and_agreement() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for &n in &[2usize, 5, 17, 60] {
            let mut a = vec![0.0f64; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            let eig = dense_eigen(&a, n).unwrap();
            let vals = dense_eigenvalues(&a, n).unwrap();
            let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
                assert!(residual(&a, n, *lambda, v) <= 1e-9 * norm);
            }
            let cmp = compare_spectra(&eig.values, &vals, 1e-12).unwrap();
            assert!(cmp.pass, "{cmp:?}");
            // Trace is preserved.
            let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
            assert!((vals.iter().sum::<f64>() - tr).abs() < 1e-10);
        }
    }

    #[test]
    fn f32_path_works() {
        let ev = tridiagonal_eigenvalues(&[0.0f32; 3], &[1.0f32; 2]).unwrap();
        assert!((ev[2] - 2f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn guard_and_shape_errors() {
        assert!(matches!(
            dense_eigenvalues(&[1.0, 2.0], 2),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            tridiagonal_eigenvalues(&[1.0, 2.0], &[]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(compare_spectra(&[1.0], &[1.0, 2.0], 1e-9).is_err());
    }

    #[test]
    fn comparison_handles_degeneracy() {
        let a = [0.0, -1.0, 0.0, 1.0];
        let b = [1.0, 0.0, 0.0, -1.0 + 1e-12];
        assert!(compare_spectra(&a, &b, 1e-9).unwrap().pass);
        let c = [1.0, 0.0, 0.1, -1.0];
        assert!(!compare_spectra(&a, &c, 1e-9).unwrap().pass);
    }
}
