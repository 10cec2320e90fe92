//! Small least-squares helpers.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Line {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Line { slope, intercept, slope_stderr }
}

/// Least squares `y = b0 + b1 * x1 + b2 * x2`; returns coefficients and their standard errors.
pub fn regression2(x1: &[f64], x2: &[f64], y: &[f64]) -> ([f64; 3], [f64; 3]) {
    let n = y.len();
    assert!(x1.len() == n && x2.len() == n);
    // centre to keep the normal equations well conditioned
    let m = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (m1, m2, my) = (m(x1), m(x2), m(y));
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b, c) = (x1[i] - m1, x2[i] - m2, y[i] - my);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * c;
        s2y += b * c;
    }
    let det = s11 * s22 - s12 * s12;
    let b1 = (s22 * s1y - s12 * s2y) / det;
    let b2 = (s11 * s2y - s12 * s1y) / det;
    let b0 = my - b1 * m1 - b2 * m2;
    let rss: f64 = (0..n).map(|i| (y[i] - b0 - b1 * x1[i] - b2 * x2[i]).powi(2)).sum();
    let s2 = if n > 3 { rss / (n - 3) as f64 } else { f64::NAN };
    let se1 = (s2 * s22 / det).sqrt();
    let se2 = (s2 * s11 / det).sqrt();
    ([b0, b1, b2], [f64::NAN, se1, se2])
}
