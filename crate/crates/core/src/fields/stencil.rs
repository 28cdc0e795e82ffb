//! One-dimensional difference stencils and their application along one axis
//! of a row-major tensor grid (`axis 0` varies fastest).

/// 1D difference operator on a single grid line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Central first difference inside, one-sided second-order at both ends.
    D1Central,
    /// Three-point second difference inside, one-sided second-order ends.
    D2Central,
    /// Summation-by-parts first difference: central inside, first-order
    /// one-sided at the ends. With trapezoid weights `W` it satisfies
    /// `W D + (W D)^T = diag(-1, 0, ..., 0, 1)`.
    Sbp,
    /// Plain matrix transpose of [`Stencil::Sbp`].
    SbpTranspose,
}

impl Stencil {
    pub fn apply(self, f: &[f64], h: f64, out: &mut [f64]) {
        let n = f.len();
        debug_assert!(n >= 4 && out.len() == n);
        match self {
            Stencil::D1Central => {
                let c = 0.5 / h;
                out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c;
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - f[i - 1]) * c;
                }
                out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c;
            }
            Stencil::D2Central => {
                let c = 1.0 / (h * h);
                out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * c;
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * c;
                }
                out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * c;
            }
            Stencil::Sbp => {
                let c = 0.5 / h;
                out[0] = (f[1] - f[0]) / h;
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - f[i - 1]) * c;
                }
                out[n - 1] = (f[n - 1] - f[n - 2]) / h;
            }
            Stencil::SbpTranspose => {
                // column j of G collects the rows that reference node j
                let c = 0.5 / h;
                out.iter_mut().for_each(|o| *o = 0.0);
                out[0] -= f[0] / h;
                out[1] += f[0] / h;
                for i in 1..n - 1 {
                    out[i + 1] += f[i] * c;
                    out[i - 1] -= f[i] * c;
                }
                out[n - 1] += f[n - 1] / h;
                out[n - 2] -= f[n - 1] / h;
            }
        }
    }
}

/// Apply `stencil` along `axis` of a field of the given `shape`.
pub fn apply_axis(values: &[f64], shape: &[usize], axis: usize, h: f64, stencil: Stencil) -> Vec<f64> {
    let n: usize = shape.iter().product();
    assert_eq!(values.len(), n, "field length does not match grid");
    let len = shape[axis];
    let stride: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; n];
    let mut line = vec![0.0; len];
    let mut res = vec![0.0; len];
    for o in 0..outer {
        for s in 0..stride {
            let base = s + o * stride * len;
            for (t, l) in line.iter_mut().enumerate() {
                *l = values[base + t * stride];
            }
            stencil.apply(&line, h, &mut res);
            for (t, r) in res.iter().enumerate() {
                out[base + t * stride] = *r;
            }
        }
    }
    out
}

/// Visit every grid line along `axis`: calls `f(base, stride)` where node `t`
/// of the line sits at `base + t * stride`.
pub fn for_each_line(shape: &[usize], axis: usize, mut f: impl FnMut(usize, usize)) {
    let len = shape[axis];
    let stride: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    for o in 0..outer {
        for s in 0..stride {
            f(s + o * stride * len, stride);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(stencil: Stencil, n: usize, h: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let mut out = vec![0.0; n];
                stencil.apply(&e, h, &mut out);
                out
            })
            .collect() // column-major: cols[j][i] = A[i][j]
    }

    #[test]
    fn sbp_transpose_is_matrix_transpose() {
        let (n, h) = (9, 0.125);
        let g = dense(Stencil::Sbp, n, h);
        let gt = dense(Stencil::SbpTranspose, n, h);
        for i in 0..n {
            for j in 0..n {
                assert!((g[j][i] - gt[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sbp_property_with_trapezoid_weights() {
        let (n, h) = (11, 0.1);
        let g = dense(Stencil::Sbp, n, h);
        let w = crate::fields::grid::trapezoid_weights(n, h);
        for i in 0..n {
            for j in 0..n {
                let q = w[i] * g[j][i] + w[j] * g[i][j];
                let b = if i == j && i == 0 {
                    -1.0
                } else if i == j && i == n - 1 {
                    1.0
                } else {
                    0.0
                };
                assert!((q - b).abs() < 1e-13, "({i},{j}) {q}");
            }
        }
    }
}
