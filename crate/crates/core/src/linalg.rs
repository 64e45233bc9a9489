//! Dense n×n helpers for n ≤ 3 (row-major storage).

use crate::error::{Error, Result};

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn det(n: usize, a: &[f64]) -> f64 {
    assert_eq!(a.len(), n * n);
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => panic!("det only implemented for n <= 3"),
    }
}

pub fn inverse(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let d = det(n, a);
    if !d.is_finite() || d.abs() < 1e-14 {
        return Err(Error::SingularMap(d));
    }
    let inv = match n {
        1 => vec![1.0 / a[0]],
        2 => vec![a[3] / d, -a[1] / d, -a[2] / d, a[0] / d],
        3 => {
            let c = |i: usize, j: usize| a[i * 3 + j];
            let mut out = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    // cofactor of (j, i)
                    let (r0, r1) = match j {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let (c0, c1) = match i {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let minor = c(r0, c0) * c(r1, c1) - c(r0, c1) * c(r1, c0);
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    out[i * 3 + j] = sign * minor / d;
                }
            }
            out
        }
        _ => panic!("inverse only implemented for n <= 3"),
    };
    Ok(inv)
}

pub fn matvec(n: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rotation2(theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c, -s, s, c]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = [2.0, 1.0, 0.5, -1.0, 3.0, 0.2, 0.0, 0.4, 1.5];
        let inv = inverse(3, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert!(inverse(2, &[1.0, 2.0, 2.0, 4.0]).is_err());
        assert!((det(2, &rotation2(0.7)) - 1.0).abs() < 1e-15);
    }
}
