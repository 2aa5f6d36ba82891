//! One-dimensional cubic Hermite and linear bases on an interval of length
//! `h`, parametrized by `s` in `[0, 1]`. Derivatives are with respect to the
//! physical coordinate.

/// Values, first and second derivatives of the four cubic Hermite functions
/// attached to `(v0, s0, v1, s1)`.
pub fn cubic(s: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        [1.0 - 3.0 * s2 + 2.0 * s3, h * (s - 2.0 * s2 + s3), 3.0 * s2 - 2.0 * s3, h * (s3 - s2)],
        [
            (6.0 * s2 - 6.0 * s) / h,
            1.0 - 4.0 * s + 3.0 * s2,
            (6.0 * s - 6.0 * s2) / h,
            3.0 * s2 - 2.0 * s,
        ],
        [
            (12.0 * s - 6.0) / (h * h),
            (6.0 * s - 4.0) / h,
            (6.0 - 12.0 * s) / (h * h),
            (6.0 * s - 2.0) / h,
        ],
    )
}

/// Values and derivatives of the two linear functions.
pub fn linear(s: f64, h: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0 - s, s], [-1.0 / h, 1.0 / h])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_cubics_exactly() {
        let (z0, h) = (0.3, 0.45);
        let f = |z: f64| 1.0 - 2.0 * z + 0.5 * z * z - 3.0 * z * z * z;
        let df = |z: f64| -2.0 + z - 9.0 * z * z;
        let ddf = |z: f64| 1.0 - 18.0 * z;
        let dofs = [f(z0), df(z0), f(z0 + h), df(z0 + h)];
        for s in [0.0, 0.2, 0.77, 1.0] {
            let (v, d, dd) = cubic(s, h);
            let z = z0 + s * h;
            let sum = |b: [f64; 4]| b.iter().zip(&dofs).map(|(x, y)| x * y).sum::<f64>();
            assert!((sum(v) - f(z)).abs() < 1e-14);
            assert!((sum(d) - df(z)).abs() < 1e-13);
            assert!((sum(dd) - ddf(z)).abs() < 1e-12);
        }
    }
}
