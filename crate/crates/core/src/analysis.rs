//! Peak finding, half-maximum widths and Lorentzian fits on sampled curves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Indices of strict interior local maxima.
pub fn find_peaks(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1])
        .collect()
}

/// Index of the largest value.
pub fn argmax(y: &[f64]) -> Option<usize> {
    y.iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
}

/// Refines a sampled maximum by a parabola through the neighbours.
pub fn refine_peak(x: &[f64], y: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= x.len() {
        return x[k];
    }
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let d1 = (y1 - y0) / (x1 - x0);
    let d2 = (y2 - y1) / (x2 - x1);
    let curv = (d2 - d1) / (x2 - x0);
    if curv >= 0.0 {
        return x1;
    }
    // Vertex of the interpolating parabola.
    0.5 * (x0 + x1) - d1 / (2.0 * curv)
}

/// Full width at half of `y[k]`, from linearly interpolated crossings on both sides.
pub fn fwhm_at(x: &[f64], y: &[f64], k: usize) -> Option<f64> {
    let half = 0.5 * y[k];
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let mut left = None;
    for j in (0..k).rev() {
        if y[j] <= half {
            left = Some(cross(j, j + 1));
            break;
        }
    }
    let mut right = None;
    for j in k + 1..y.len() {
        if y[j] <= half {
            right = Some(cross(j - 1, j));
            break;
        }
    }
    Some(right? - left?)
}

/// `A / (1 + ((x − x₀)/w)²) + c₀ + c₂ (x − x₀)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub amplitude: f64,
    pub center: f64,
    pub hwhm: f64,
    pub background: f64,
    pub curvature: f64,
    /// Root-mean-square residual relative to `amplitude`.
    pub rel_rms: f64,
}

impl LorentzianFit {
    pub fn fwhm(&self) -> f64 {
        2.0 * self.hwhm
    }

    pub fn eval(&self, x: f64) -> f64 {
        model(&self.params(), x)
    }

    fn params(&self) -> [f64; 5] {
        [self.amplitude, self.center, self.hwhm, self.background, self.curvature]
    }
}

fn model(p: &[f64; 5], x: f64) -> f64 {
    let d = x - p[1];
    let z = d / p[2];
    p[0] / (1.0 + z * z) + p[3] + p[4] * d * d
}

fn gradient(p: &[f64; 5], x: f64) -> [f64; 5] {
    let d = x - p[1];
    let z = d / p[2];
    let q = 1.0 + z * z;
    let l = 1.0 / q;
    let dl_dz = -2.0 * z / (q * q);
    [
        l,
        p[0] * dl_dz * (-1.0 / p[2]) - 2.0 * p[4] * d,
        p[0] * dl_dz * (-z / p[2]),
        1.0,
        d * d,
    ]
}

/// Levenberg–Marquardt fit of a Lorentzian on a quadratic background.
pub fn fit_lorentzian(x: &[f64], y: &[f64], center: f64, hwhm: f64) -> Result<LorentzianFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 6 {
        return Err(Error::InvalidArgument("Lorentzian fit needs at least 6 points".into()));
    }
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [ymax - ymin, center, hwhm, ymin, 0.0];
    let cost = |p: &[f64; 5]| -> f64 { x.iter().zip(y).map(|(&xi, &yi)| (model(p, xi) - yi).powi(2)).sum() };
    let mut c = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jac = DMatrix::<f64>::zeros(x.len(), 5);
        let mut res = DVector::<f64>::zeros(x.len());
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            let g = gradient(&p, xi);
            for k in 0..5 {
                jac[(i, k)] = g[k];
            }
            res[i] = yi - model(&p, xi);
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let jtr = &jt * &res;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..5 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for k in 0..5 {
                trial[k] += step[k];
            }
            trial[2] = trial[2].abs();
            let ct = cost(&trial);
            if ct.is_finite() && ct < c {
                let rel = (c - ct) / c.max(1e-300);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-15 {
                    lambda = 1e12;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || lambda >= 1e12 {
            break;
        }
    }
    let rms = (c / x.len() as f64).sqrt();
    Ok(LorentzianFit {
        amplitude: p[0],
        center: p[1],
        hwhm: p[2].abs(),
        background: p[3],
        curvature: p[4],
        rel_rms: rms / p[0].abs().max(1e-300),
    })
}
