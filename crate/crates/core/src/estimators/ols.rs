/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n,
    })
}

/// Quadratic coefficient of `y = a + b·x + c·x²` and its standard error.
pub fn quadratic_term(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    // centred normal equations for (b, c) after removing the mean
    let u: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let mu2 = u.iter().map(|v| v * v).sum::<f64>() / nf;
    let v: Vec<f64> = u.iter().map(|x| x * x - mu2).collect();
    let my = ys.iter().sum::<f64>() / nf;
    let w: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let (mut suu, mut suv, mut svv, mut suw, mut svw, mut sww) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        suu += u[i] * u[i];
        suv += u[i] * v[i];
        svv += v[i] * v[i];
        suw += u[i] * w[i];
        svw += v[i] * w[i];
        sww += w[i] * w[i];
    }
    let det = suu * svv - suv * suv;
    if det.abs() <= f64::EPSILON * suu * svv {
        return None;
    }
    let b = (svv * suw - suv * svw) / det;
    let c = (suu * svw - suv * suw) / det;
    let sse = (sww - b * suw - c * svw).max(0.0);
    let se_c = (sse / (nf - 3.0) * suu / det).sqrt();
    Some((c, se_c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-7 && (f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_none());
        assert!(fit_line(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn quadratic_recovered() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 0.5 * x - 0.25 * x * x).collect();
        let (c, se) = quadratic_term(&xs, &ys).unwrap();
        assert!((c + 0.25).abs() < 1e-10 && se < 1e-6);
    }
}
