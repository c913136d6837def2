//! Derivative-free optimizers: Nelder–Mead simplex descent, Brent's
//! one-dimensional minimizer and a multi-start global maximizer on the unit
//! square.

use rayon::prelude::*;

/// Outcome of a local minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Simplex descent settings.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Initial simplex edge length.
    pub step: f64,
    /// Stop once the simplex diameter falls below this.
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            step: 0.05,
            diameter_tol: 1e-6,
            max_evaluations: 20_000,
        }
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            let dist = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d = d.max(dist);
        }
    }
    d
}

impl NelderMead {
    /// Minimizes `f` starting from `x0` with standard coefficients
    /// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64], evaluations: &mut usize| {
            *evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
        for i in 0..dim {
            let mut p = x0.to_vec();
            p[i] += self.step;
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evaluations)).collect();

        loop {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if diameter(&simplex) < self.diameter_tol || evaluations >= self.max_evaluations {
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let reflected = along(1.0);
            let fr = eval(&reflected, &mut evaluations);
            if fr < values[0] {
                let expanded = along(2.0);
                let fe = eval(&expanded, &mut evaluations);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
                continue;
            }
            if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[dim] {
                let c = along(0.5);
                let v = eval(&c, &mut evaluations);
                (c, v)
            } else {
                let c = along(-0.5);
                let v = eval(&c, &mut evaluations);
                (c, v)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].clone();
            for i in 1..=dim {
                simplex[i] = simplex[i]
                    .iter()
                    .zip(&best)
                    .map(|(p, b)| b + 0.5 * (p - b))
                    .collect();
                values[i] = eval(&simplex[i], &mut evaluations);
            }
        }

        Minimum {
            x: simplex[0].clone(),
            value: values[0],
            evaluations,
        }
    }
}

/// Brent's method for a unimodal function on `[a, b]`. Returns
/// `(argmin, min, evaluations)`.
pub fn brent_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    const GOLDEN: f64 = 0.381_966_011_250_105_2;
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evaluations = 1;

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabolic step through x, w, v
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        evaluations += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, evaluations)
}

/// Result of [`maximize_unit_square`].
#[derive(Debug, Clone, Copy)]
pub struct SquareMax {
    pub u: (f64, f64),
    pub value: f64,
    pub evaluations: usize,
}

/// Settings for the multi-start maximizer.
#[derive(Debug, Clone, Copy)]
pub struct MultiStart {
    /// Coarse grid resolution per axis.
    pub coarse: usize,
    /// Number of best coarse cells used as simplex starts.
    pub restarts: usize,
    pub simplex: NelderMead,
}

impl Default for MultiStart {
    fn default() -> Self {
        MultiStart {
            coarse: 64,
            restarts: 8,
            simplex: NelderMead {
                step: 1.0 / 64.0,
                diameter_tol: 1e-6,
                max_evaluations: 4000,
            },
        }
    }
}

const EDGE: f64 = 1e-9;

fn clamp_unit(v: f64) -> f64 {
    v.clamp(EDGE, 1.0 - EDGE)
}

impl MultiStart {
    /// Maximizes `f` over the open unit square: a coarse midpoint grid picks
    /// the starting cells, then simplex descent polishes each of them. The
    /// result is deterministic; ties are broken by grid order.
    pub fn maximize<F>(&self, f: F) -> SquareMax
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let m = self.coarse.max(1);
        let cells: Vec<(f64, f64, f64)> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let u1 = (idx / m) as f64 / m as f64 + 0.5 / m as f64;
                let u2 = (idx % m) as f64 / m as f64 + 0.5 / m as f64;
                let v = f(u1, u2);
                (u1, u2, if v.is_nan() { f64::NEG_INFINITY } else { v })
            })
            .collect();
        let mut ranked: Vec<usize> = (0..cells.len()).collect();
        ranked.sort_by(|&a, &b| cells[b].2.total_cmp(&cells[a].2).then(a.cmp(&b)));

        let starts: Vec<(f64, f64, f64)> = ranked
            .iter()
            .take(self.restarts.max(1))
            .map(|&i| cells[i])
            .collect();
        let polished: Vec<(f64, f64, f64, usize)> = starts
            .par_iter()
            .map(|&(u1, u2, v0)| {
                let min = self.simplex.minimize(
                    |p| -f(clamp_unit(p[0]), clamp_unit(p[1])),
                    &[u1, u2],
                );
                let (a, b) = (clamp_unit(min.x[0]), clamp_unit(min.x[1]));
                let v = -min.value;
                if v >= v0 {
                    (a, b, v, min.evaluations)
                } else {
                    (u1, u2, v0, min.evaluations)
                }
            })
            .collect();

        let mut best = (starts[0].0, starts[0].1, starts[0].2);
        let mut evaluations = cells.len();
        for &(a, b, v, e) in &polished {
            evaluations += e;
            if v > best.2 {
                best = (a, b, v);
            }
        }
        SquareMax {
            u: (best.0, best.1),
            value: best.2,
            evaluations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let nm = NelderMead {
            step: 0.5,
            diameter_tol: 1e-10,
            max_evaluations: 50_000,
        };
        let m = nm.minimize(
            |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-6, "{:?}", m.x);
        assert!((m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn brent_quadratic_and_cosine() {
        let (x, fx, _) = brent_minimize(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 1.0).abs() < 1e-15);
        let (x, _, _) = brent_minimize(f64::cos, 2.0, 4.0, 1e-10, 200);
        assert!((x - std::f64::consts::PI).abs() < 1e-7);
    }

    #[test]
    fn multistart_finds_global_of_bimodal_surface() {
        // Two bumps; the narrower one at (0.8, 0.2) is higher.
        let f = |a: f64, b: f64| {
            (-((a - 0.3).powi(2) + (b - 0.7).powi(2)) / 0.02).exp()
                + 1.2 * (-((a - 0.8).powi(2) + (b - 0.2).powi(2)) / 0.002).exp()
        };
        let r = MultiStart::default().maximize(f);
        assert!((r.u.0 - 0.8).abs() < 1e-4 && (r.u.1 - 0.2).abs() < 1e-4, "{:?}", r);
        assert!((r.value - 1.2).abs() < 1e-8);
    }
}
