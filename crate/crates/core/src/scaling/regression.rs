//! Weighted least-squares line fits used by every log-log regression.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `y = slope * x + intercept`. Needs at least two distinct abscissae.
pub(crate) fn fit_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> Option<LineFit> {
    debug_assert!(xs.len() == ys.len() && xs.len() == ws.len());
    if xs.len() < 2 {
        return None;
    }
    let sw: f64 = ws.iter().sum();
    if !(sw > 0.0) {
        return None;
    }
    let mx = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let (dx, dy) = (x - mx, y - my);
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| {
            let r = y - (slope * x + intercept);
            w * r * r
        })
        .sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).max(0.0) } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [-3.0, -4.0, -5.0, -6.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.35 * x + 2.0).collect();
        let fit = fit_line(&xs, &ys, &[1.0; 4]).unwrap();
        assert!((fit.slope - 0.35).abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-13);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[2.0], &[1.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn weights_pull_towards_heavy_points() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 3.0];
        let light = fit_line(&xs, &ys, &[1.0, 1.0, 1.0]).unwrap();
        let heavy = fit_line(&xs, &ys, &[10.0, 10.0, 1.0]).unwrap();
        assert!(heavy.slope < light.slope);
    }
}
