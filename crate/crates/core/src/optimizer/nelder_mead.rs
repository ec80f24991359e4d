//! Nelder–Mead simplex minimization with dimension-adaptive coefficients and
//! restart-on-collapse.

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    /// Converged once the spread of simplex values drops below this.
    pub f_tol: f64,
    /// Also require every vertex within this distance of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
    pub initial_step: f64,
    /// Restarts from the best vertex after convergence, until a restart
    /// improves by less than `f_tol` or this many have run.
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_evals: 200_000,
            initial_step: 1.0,
            max_restarts: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub restarts: usize,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    // Gao & Han's choice; reduces to the classic (1, 2, 1/2, 1/2) at n = 2.
    fn adaptive(n: usize) -> Self {
        let n = n as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 0.5 / n,
            shrink: 1.0 - 1.0 / n,
        }
    }
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return Minimum {
            x: vec![],
            f: v,
            evals,
            restarts: 0,
        };
    }

    let k = Coefficients::adaptive(n.max(2));
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    let mut restarts = 0;
    let mut step = opts.initial_step;

    loop {
        let before = best_f;
        let (x, fx) = run_simplex(&mut eval, &best_x, best_f, step, &k, opts, &mut evals);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if evals >= opts.max_evals || restarts >= opts.max_restarts || before - best_f < opts.f_tol
        {
            break;
        }
        restarts += 1;
        step = (step * 0.5).max(1e-3);
    }
    Minimum {
        x: best_x,
        f: best_f,
        evals,
        restarts,
    }
}

fn run_simplex<E: FnMut(&[f64], &mut usize) -> f64>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    step: f64,
    k: &Coefficients,
    opts: &NelderMeadOptions,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        vals.push(eval(&p, evals));
        pts.push(p);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    while *evals < opts.max_evals {
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = vals[worst] - vals[best];
        let extent = pts
            .iter()
            .flat_map(|p| p.iter().zip(&pts[best]).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && extent <= opts.x_tol {
            break;
        }
        if extent == 0.0 {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            centroid.iter_mut().zip(&pts[i]).for_each(|(c, x)| *c += x);
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let along = |t: f64, out: &mut Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&pts[worst]) {
                *o = c + t * (c - w);
            }
        };

        along(k.reflect, &mut trial);
        let fr = eval(&trial, evals);
        if fr < vals[best] {
            along(k.reflect * k.expand, &mut trial2);
            let fe = eval(&trial2, evals);
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        // contraction, outside or inside
        let (t, bound) = if fr < vals[worst] {
            (k.reflect * k.contract, fr)
        } else {
            (-k.contract, vals[worst])
        };
        along(t, &mut trial2);
        let fc = eval(&trial2, evals);
        if fc <= bound {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            for (x, a) in pts[i].iter_mut().zip(&anchor) {
                *x = a + k.shrink * (*x - a);
            }
            vals[i] = eval(&pts[i], evals);
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .expect("nonempty simplex");
    (pts.swap_remove(best), vals[best])
}
