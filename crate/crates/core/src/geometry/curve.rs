use crate::error::{Error, Result};

/// Which coordinate plays the role of the polynomial parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveAxis {
    /// `y = p(x)`
    X,
    /// `x = p(y)`
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveModel {
    pub degree: usize,
    /// Ascending powers of the parameter.
    pub coefficients: Vec<f64>,
    pub axis: CurveAxis,
    /// Root-mean-square residual of the dependent coordinate.
    pub rms_residual: f64,
}

impl CurveModel {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// The `(x, y)` point of the curve at parameter `t`.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        match self.axis {
            CurveAxis::X => (t, self.eval(t)),
            CurveAxis::Y => (self.eval(t), t),
        }
    }
}

fn distinct(v: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[piv][col].abs() <= 1e-12 * scale {
            return Err(Error::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Least-squares polynomial of `degree` (1 to 3) through `points`. The
/// parameter is the coordinate taking more distinct values; ties pick `x`.
///
/// The normal equations are assembled on the parameter centered and scaled
/// to `[-1, 1]` for conditioning, then the coefficients are expanded back to
/// the raw parameter.
pub fn fit_curve(points: &[(f64, f64)], degree: usize) -> Result<CurveModel> {
    if !(1..=3).contains(&degree) {
        return Err(Error::InvalidParameter(format!("curve degree must be 1..=3, got {degree}")));
    }
    if points.len() < degree + 1 {
        return Err(Error::Underdetermined {
            points: points.len(),
            degree,
        });
    }
    let xs = distinct(points.iter().map(|p| p.0));
    let ys = distinct(points.iter().map(|p| p.1));
    let axis = if ys > xs { CurveAxis::Y } else { CurveAxis::X };
    let (ts, vs): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|&(x, y)| match axis {
            CurveAxis::X => (x, y),
            CurveAxis::Y => (y, x),
        })
        .unzip();

    if distinct(ts.iter().copied()) < degree + 1 {
        return Err(Error::Singular);
    }

    let mean = ts.iter().sum::<f64>() / ts.len() as f64;
    let half = ts.iter().fold(0.0f64, |m, t| m.max((t - mean).abs()));
    let us: Vec<f64> = ts.iter().map(|t| (t - mean) / half).collect();

    let n = degree + 1;
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for (&u, &v) in us.iter().zip(&vs) {
        let mut pow = vec![1.0; n];
        for k in 1..n {
            pow[k] = pow[k - 1] * u;
        }
        for i in 0..n {
            for j in 0..n {
                ata[i][j] += pow[i] * pow[j];
            }
            atb[i] += pow[i] * v;
        }
    }
    let scaled = solve(ata, atb)?;

    let sse: f64 = us
        .iter()
        .zip(&vs)
        .map(|(&u, &v)| {
            let p = scaled.iter().rev().fold(0.0, |acc, &c| acc * u + c);
            (v - p) * (v - p)
        })
        .sum();
    let rms_residual = (sse / us.len() as f64).sqrt();

    // a_k ((t - m) / s)^k = a_k s^-k sum_j C(k, j) t^j (-m)^(k - j)
    let mut coefficients = vec![0.0; n];
    for (k, &a) in scaled.iter().enumerate() {
        let ak = a / half.powi(k as i32);
        for (j, c) in coefficients.iter_mut().enumerate().take(k + 1) {
            *c += ak * binomial(k, j) * (-mean).powi((k - j) as i32);
        }
    }

    Ok(CurveModel {
        degree,
        coefficients,
        axis,
        rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let c = fit_curve(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)], 1).unwrap();
        assert_eq!(c.axis, CurveAxis::X);
        assert!((c.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((c.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(c.rms_residual < 1e-12);
    }

    #[test]
    fn exact_parabola() {
        let c = fit_curve(&[(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0), (2.0, 4.0)], 2).unwrap();
        for (got, want) in c.coefficients.iter().zip([0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{:?}", c.coefficients);
        }
        assert!(c.rms_residual < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_curve(&[(0.0, 0.0), (1.0, 1.0)], 2),
            Err(Error::Underdetermined { points: 2, degree: 2 })
        ));
    }

    #[test]
    fn vertical_points_use_y_axis() {
        let c = fit_curve(&[(3.0, 0.0), (3.0, 1.0), (3.0, 2.0), (3.0, 5.0)], 1).unwrap();
        assert_eq!(c.axis, CurveAxis::Y);
        assert!((c.eval(10.0) - 3.0).abs() < 1e-12);
        assert_eq!(c.point_at(1.0), (3.0, 1.0));
    }

    #[test]
    fn repeated_parameter_is_singular() {
        let pts = [(1.0, 0.0), (1.0, 0.5), (2.0, 0.0), (2.0, 0.5)];
        assert!(matches!(fit_curve(&pts, 2), Err(Error::Singular)));
    }
}
