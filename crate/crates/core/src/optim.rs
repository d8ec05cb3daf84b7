//! Derivative-free simplex search and a quasi-Newton minimiser.
//!
//! Objectives signal infeasible points by returning a non-finite value; both
//! routines treat those as `+inf`.

/// Outcome of a minimisation.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Nelder-Mead simplex search with restarts.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Evaluation cap for each run (initial run and every restart).
    pub max_evals: usize,
    /// Relative tolerance on the spread of objective values across the simplex.
    pub tol: f64,
    /// Additional runs started from a perturbed copy of the incumbent.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 2000,
            tol: 1e-8,
            restarts: 2,
        }
    }
}

impl NelderMead {
    /// Minimise `f` from `x0`; `steps[i]` is the initial simplex edge along axis `i`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        assert_eq!(x0.len(), steps.len());
        let mut best = self.run(&mut f, x0, steps);
        let mut evaluations = best.evaluations;
        for r in 0..self.restarts {
            // Alternate the direction of the shift so restarts probe both sides.
            let sign = if r % 2 == 0 { 0.5 } else { -0.5 };
            let start: Vec<f64> = best
                .x
                .iter()
                .zip(steps)
                .enumerate()
                .map(|(i, (x, s))| {
                    if i % 2 == 0 {
                        x + sign * s
                    } else {
                        x - sign * s
                    }
                })
                .collect();
            let start = if sanitize(f(&start)).is_finite() {
                start
            } else {
                best.x.clone()
            };
            evaluations += 1;
            let run = self.run(&mut f, &start, steps);
            evaluations += run.evaluations;
            if run.value < best.value {
                best = run;
            }
        }
        best.evaluations = evaluations;
        best
    }

    fn run<F>(&self, f: &mut F, x0: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        const ALPHA: f64 = 1.0;
        const GAMMA: f64 = 2.0;
        const RHO: f64 = 0.5;
        const SIGMA: f64 = 0.5;

        let n = x0.len();
        if n == 0 {
            let v = sanitize(f(x0));
            return Minimum {
                x: Vec::new(),
                value: v,
                evaluations: 1,
                converged: true,
            };
        }
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += if steps[i] != 0.0 { steps[i] } else { 1e-3 };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();
        let mut evals = n + 1;
        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut xr = vec![0.0; n];
        let mut xe = vec![0.0; n];
        let mut xc = vec![0.0; n];
        let mut converged = false;

        while evals < self.max_evals {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[n];
            let second = order[n - 1];
            let (fb, fw) = (values[best], values[worst]);
            if fb.is_finite()
                && fw.is_finite()
                && (fw - fb).abs() <= self.tol * (fb.abs() + self.tol)
            {
                converged = true;
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &idx in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                    *c += x;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= n as f64);

            for j in 0..n {
                xr[j] = centroid[j] + ALPHA * (centroid[j] - simplex[worst][j]);
            }
            let fr = sanitize(f(&xr));
            evals += 1;

            if fr < fb {
                for j in 0..n {
                    xe[j] = centroid[j] + GAMMA * (xr[j] - centroid[j]);
                }
                let fe = sanitize(f(&xe));
                evals += 1;
                if fe < fr {
                    simplex[worst].copy_from_slice(&xe);
                    values[worst] = fe;
                } else {
                    simplex[worst].copy_from_slice(&xr);
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[worst].copy_from_slice(&xr);
                values[worst] = fr;
                continue;
            }
            // Contraction: outside when the reflection improved on the worst point.
            let outside = fr < fw;
            for j in 0..n {
                xc[j] = if outside {
                    centroid[j] + RHO * (xr[j] - centroid[j])
                } else {
                    centroid[j] + RHO * (simplex[worst][j] - centroid[j])
                };
            }
            let fc = sanitize(f(&xc));
            evals += 1;
            if (outside && fc <= fr) || (!outside && fc < fw) {
                simplex[worst].copy_from_slice(&xc);
                values[worst] = fc;
                continue;
            }
            // Shrink towards the best vertex.
            let anchor = simplex[best].clone();
            for &idx in &order[1..] {
                for j in 0..n {
                    simplex[idx][j] = anchor[j] + SIGMA * (simplex[idx][j] - anchor[j]);
                }
                values[idx] = sanitize(f(&simplex[idx]));
                evals += 1;
            }
        }

        let (best_idx, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("simplex is non-empty");
        Minimum {
            x: simplex[best_idx].clone(),
            value: values[best_idx],
            evaluations: evals,
            converged,
        }
    }
}

/// BFGS with central-difference gradients and Armijo backtracking.
#[derive(Debug, Clone, Copy)]
pub struct Bfgs {
    pub max_iter: usize,
    /// Relative tolerance on successive objective values.
    pub tol: f64,
    /// Finite-difference step.
    pub step: f64,
}

impl Default for Bfgs {
    fn default() -> Self {
        Bfgs {
            max_iter: 100,
            tol: 1e-8,
            step: 1e-4,
        }
    }
}

impl Bfgs {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            sanitize(f(x))
        };
        let mut x = x0.to_vec();
        let mut fx = eval(&x, &mut evals);
        if n == 0 || !fx.is_finite() {
            return Minimum {
                x,
                value: fx,
                evaluations: evals,
                converged: n == 0 && fx.is_finite(),
            };
        }

        let gradient = |x: &[f64], fx: f64, eval: &mut dyn FnMut(&[f64]) -> f64| {
            let mut g = vec![0.0; n];
            let mut probe = x.to_vec();
            for i in 0..n {
                let h = self.step;
                probe[i] = x[i] + h;
                let fp = eval(&probe);
                probe[i] = x[i] - h;
                let fm = eval(&probe);
                probe[i] = x[i];
                g[i] = match (fp.is_finite(), fm.is_finite()) {
                    (true, true) => (fp - fm) / (2.0 * h),
                    (true, false) => (fp - fx) / h,
                    (false, true) => (fx - fm) / h,
                    (false, false) => 0.0,
                };
            }
            g
        };

        let mut g = gradient(&x, fx, &mut |p| eval(p, &mut evals));
        let mut hinv = identity(n);
        let mut converged = false;
        let mut dir = vec![0.0; n];
        let mut trial = vec![0.0; n];

        for _ in 0..self.max_iter {
            for i in 0..n {
                dir[i] = -(0..n).map(|j| hinv[i][j] * g[j]).sum::<f64>();
            }
            let mut slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
            if slope >= 0.0 {
                hinv = identity(n);
                for i in 0..n {
                    dir[i] = -g[i];
                }
                slope = -g.iter().map(|v| v * v).sum::<f64>();
            }
            if slope == 0.0 {
                converged = true;
                break;
            }

            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                for i in 0..n {
                    trial[i] = x[i] + t * dir[i];
                }
                let ft = eval(&trial, &mut evals);
                if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                    accepted = Some(ft);
                    break;
                }
                t *= 0.5;
            }
            let Some(f_new) = accepted else {
                // No descent along this direction; a fresh steepest-descent step
                // is tried once before giving up.
                if hinv != identity(n) {
                    hinv = identity(n);
                    continue;
                }
                converged = true;
                break;
            };

            let s: Vec<f64> = dir.iter().map(|d| t * d).collect();
            let x_new = trial.clone();
            let g_new = gradient(&x_new, f_new, &mut |p| eval(p, &mut evals));
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();

            let delta = (fx - f_new).abs();
            x = x_new;
            g = g_new;
            let f_old = fx;
            fx = f_new;
            if delta <= self.tol * (f_old.abs() + self.tol) {
                converged = true;
                break;
            }

            if sy > 1e-12 {
                let hy: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| hinv[i][j] * y[j]).sum())
                    .collect();
                let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
                let rho = 1.0 / sy;
                for i in 0..n {
                    for j in 0..n {
                        hinv[i][j] +=
                            rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                    }
                }
            }
        }
        Minimum {
            x,
            value: fx,
            evaluations: evals,
            converged,
        }
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
