//! Adaptive Dormand–Prince 5(4) integrator on real state vectors.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 10_000_000,
        }
    }
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` and returns the state at every
    /// output time (non-decreasing, all `≥ t0`).
    pub fn solve<F>(&self, mut f: F, t0: f64, y0: &[f64], outputs: &[f64]) -> Vec<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        let mut h = 1e-3;
        let mut steps = 0;
        let mut out = Vec::with_capacity(outputs.len());
        f(t, &y, &mut k[0]);
        for &target in outputs {
            assert!(target >= t, "output times must be non-decreasing");
            while t < target {
                steps += 1;
                assert!(steps < self.max_steps, "step limit reached");
                let last = h >= target - t;
                let hh = if last { target - t } else { h };
                for s in 1..7 {
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += hh * A[s][j] * kj[i];
                        }
                        tmp[i] = acc;
                    }
                    f(t + C[s] * hh, &tmp, &mut k[s]);
                }
                // k[6] holds f at the fifth-order solution (FSAL).
                let mut err = 0.0f64;
                let mut ynew = vec![0.0; n];
                for i in 0..n {
                    let mut hi = y[i];
                    let mut e = 0.0;
                    for s in 0..7 {
                        hi += hh * B[s] * k[s][i];
                        e += hh * (B[s] - B_LOW[s]) * k[s][i];
                    }
                    ynew[i] = hi;
                    let sc = self.atol + self.rtol * y[i].abs().max(hi.abs());
                    err = err.max((e / sc).abs());
                }
                if err <= 1.0 {
                    t = if last { target } else { t + hh };
                    y = ynew;
                    k.swap(0, 6);
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !(last && err <= 1.0) {
                    h = hh * factor;
                }
            }
            out.push(y.clone());
        }
        out
    }
}
