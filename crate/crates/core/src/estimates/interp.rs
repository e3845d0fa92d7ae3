//! Off-grid evaluation of periodic fields: bicubic Hermite patches built from
//! nodal values and derivatives, and exact trigonometric sums.

use num_complex::Complex64;

use crate::spectral::{Field, Grid2D, Multiplier};

/// Value, gradient and Hessian `(xx, xy, yy)` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [f64; 3],
}

impl Jet {
    pub fn lerp(a: Jet, b: Jet, w: f64) -> Jet {
        let m = |x: f64, y: f64| (1.0 - w) * x + w * y;
        Jet {
            v: m(a.v, b.v),
            d: [m(a.d[0], b.d[0]), m(a.d[1], b.d[1])],
            h: [m(a.h[0], b.h[0]), m(a.h[1], b.h[1]), m(a.h[2], b.h[2])],
        }
    }
}

/// Periodic bicubic Hermite interpolant: `C¹` across cells and exact for
/// bicubic polynomials.
#[derive(Clone, Debug)]
pub(crate) struct Bicubic {
    n: usize,
    h: f64,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

/// Cubic Hermite basis on `[0, 1]`: value weights `(h00, h01)` and slope
/// weights `(h10, h11)`, with first and second derivatives.
fn basis(s: f64) -> [[f64; 4]; 3] {
    let (s2, s3) = (s * s, s * s * s);
    [
        [
            2.0 * s3 - 3.0 * s2 + 1.0,
            -2.0 * s3 + 3.0 * s2,
            s3 - 2.0 * s2 + s,
            s3 - s2,
        ],
        [
            6.0 * s2 - 6.0 * s,
            -6.0 * s2 + 6.0 * s,
            3.0 * s2 - 4.0 * s + 1.0,
            3.0 * s2 - 2.0 * s,
        ],
        [12.0 * s - 6.0, -12.0 * s + 6.0, 6.0 * s - 4.0, 6.0 * s - 2.0],
    ]
}

impl Bicubic {
    pub fn from_parts(grid: &Grid2D, f: Vec<f64>, fx: Vec<f64>, fy: Vec<f64>, fxy: Vec<f64>) -> Self {
        Self {
            n: grid.n(),
            h: grid.dx(),
            f,
            fx,
            fy,
            fxy,
        }
    }

    /// Nodal derivatives taken spectrally.
    pub fn from_field(u: &Field) -> Self {
        let g = *u.grid();
        let d = |m: &[Multiplier]| {
            let mut out = u.clone();
            for &mm in m {
                out = out.map_spectral(|idx| {
                    if g.is_nyquist(idx) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        mm.gain(&g, idx)
                    }
                });
            }
            out.physical().to_vec()
        };
        Self::from_parts(
            &g,
            u.physical().to_vec(),
            d(&[Multiplier::D1]),
            d(&[Multiplier::D2]),
            d(&[Multiplier::D1, Multiplier::D2]),
        )
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let n = self.n;
        let (gx, gy) = (x / self.h, y / self.h);
        let (fx0, fy0) = (gx.floor(), gy.floor());
        let (s, t) = (gx - fx0, gy - fy0);
        let j0 = (fx0 as i64).rem_euclid(n as i64) as usize;
        let i0 = (fy0 as i64).rem_euclid(n as i64) as usize;
        let (j1, i1) = ((j0 + 1) % n, (i0 + 1) % n);
        let bs = basis(s);
        let bt = basis(t);
        let h = self.h;
        let mut out = [0.0f64; 6];
        for (a, &j) in [j0, j1].iter().enumerate() {
            for (b, &i) in [i0, i1].iter().enumerate() {
                let idx = i * n + j;
                let c = [self.f[idx], h * self.fx[idx], h * self.fy[idx], h * h * self.fxy[idx]];
                // (x-weight index, y-weight index) for each nodal datum
                let w = [(a, b), (a + 2, b), (a, b + 2), (a + 2, b + 2)];
                for (ck, &(wx, wy)) in c.iter().zip(&w) {
                    out[0] += ck * bs[0][wx] * bt[0][wy];
                    out[1] += ck * bs[1][wx] * bt[0][wy];
                    out[2] += ck * bs[0][wx] * bt[1][wy];
                    out[3] += ck * bs[2][wx] * bt[0][wy];
                    out[4] += ck * bs[1][wx] * bt[1][wy];
                    out[5] += ck * bs[0][wx] * bt[2][wy];
                }
            }
        }
        Jet {
            v: out[0],
            d: [out[1] / h, out[2] / h],
            h: [out[3] / (h * h), out[4] / (h * h), out[5] / (h * h)],
        }
    }
}

/// Exact evaluation of the trigonometric polynomial behind a field, Nyquist
/// modes excluded.
pub(crate) struct TrigSum {
    k0: f64,
    max_mode: usize,
    /// `(m2, [(m1, coefficient)])` for rows with a non-zero entry.
    rows: Vec<(i64, Vec<(i64, Complex64)>)>,
}

impl TrigSum {
    pub fn new(u: &Field) -> Self {
        let g = *u.grid();
        let n = g.n();
        let mut rows = Vec::new();
        let mut max_mode = 0usize;
        for i in 0..n {
            let entries: Vec<(i64, Complex64)> = (0..n)
                .map(|j| i * n + j)
                .filter(|&idx| !g.is_nyquist(idx) && u.spectral()[idx] != Complex64::new(0.0, 0.0))
                .map(|idx| (g.mode(idx % n), u.spectral()[idx]))
                .collect();
            if !entries.is_empty() {
                for e in &entries {
                    max_mode = max_mode.max(e.0.unsigned_abs() as usize);
                }
                max_mode = max_mode.max(g.mode(i).unsigned_abs() as usize);
                rows.push((g.mode(i), entries));
            }
        }
        Self {
            k0: g.k0(),
            max_mode,
            rows,
        }
    }

    fn powers(&self, x: f64) -> Vec<Complex64> {
        let m = self.max_mode;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * m + 1];
        out[m] = Complex64::new(1.0, 0.0);
        for k in 1..=m {
            // direct evaluation keeps the phase error at rounding level
            let e = Complex64::from_polar(1.0, k as f64 * self.k0 * x);
            out[m + k] = e;
            out[m - k] = e.conj();
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let px = self.powers(x);
        let py = self.powers(y);
        let m = self.max_mode as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m2, entries) in &self.rows {
            let row: Complex64 = entries.iter().map(|(m1, c)| c * px[(m1 + m) as usize]).sum();
            acc += row * py[(m2 + m) as usize];
        }
        acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hermite_reproduces_nodes_and_smooth_fields() {
        let g = Grid2D::new(64, 2.0 * PI * 4.0).unwrap();
        let u = Field::from_fn(g, |x, y| (x / 4.0).sin() * (y / 2.0 + 0.3).cos()).unwrap();
        let b = Bicubic::from_field(&u);
        let (x, y) = g.point(5 * 64 + 7);
        assert!((b.jet(x, y).v - u.physical()[5 * 64 + 7]).abs() < 1e-13);
        let (x, y) = (3.17, 11.9);
        let j = b.jet(x, y);
        let exact = (x / 4.0).sin() * (y / 2.0 + 0.3).cos();
        let dx = (x / 4.0).cos() / 4.0 * (y / 2.0 + 0.3).cos();
        let dxy = -(x / 4.0).cos() / 4.0 * (y / 2.0 + 0.3).sin() / 2.0;
        assert!((j.v - exact).abs() < 1e-5);
        assert!((j.d[0] - dx).abs() < 1e-4);
        assert!((j.h[1] - dxy).abs() < 1e-2);
    }

    #[test]
    fn trig_sum_is_exact() {
        let g = Grid2D::new(32, 2.0 * PI * 4.0).unwrap();
        let u = Field::from_fn(g, |x, y| (x / 4.0 - y / 2.0).sin() + 0.5 * (3.0 * y / 4.0).cos()).unwrap();
        let t = TrigSum::new(&u);
        for (x, y) in [(0.1f64, 0.2f64), (13.3, -4.0), (25.0, 7.77)] {
            let exact = (x / 4.0 - y / 2.0).sin() + 0.5 * (3.0 * y / 4.0).cos();
            assert!((t.eval(x, y) - exact).abs() < 1e-12);
        }
    }
}
