//! Limited-memory BFGS with projection hooks, for minimization on an affine
//! constraint manifold: gradients are projected onto the tangent space and
//! iterates re-projected after every step, with Armijo backtracking so the
//! accepted objective values never increase.

pub(crate) struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// objective at each accepted step, starting with the initial value
    pub trace: Vec<f64>,
    #[allow(dead_code)]
    pub iters: usize,
    #[allow(dead_code)]
    pub converged: bool,
}

pub(crate) struct Workspace<'a> {
    /// value and raw gradient
    pub value_and_grad: &'a mut dyn FnMut(&[f64]) -> (f64, Vec<f64>),
    /// value only (cheaper; used inside the line search)
    pub value: &'a mut dyn FnMut(&[f64]) -> f64,
    /// project a gradient onto the feasible directions at x
    pub project_gradient: &'a dyn Fn(&[f64], &[f64]) -> Vec<f64>,
    /// snap a point back onto the constraint manifold
    pub project_point: &'a dyn Fn(Vec<f64>) -> Vec<f64>,
}

pub(crate) fn minimize(
    x0: Vec<f64>,
    ws: &mut Workspace,
    tol: f64,
    max_iters: usize,
    memory: usize,
    ls_max: usize,
) -> MinimizeOutcome {
    let mut x = (ws.project_point)(x0);
    let (mut f, mut g_raw) = (ws.value_and_grad)(&x);
    let mut g = (ws.project_gradient)(&x, &g_raw);
    let mut trace = vec![f];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iters = 0;
    let mut converged = inf_norm(&g) <= tol;

    while !converged && iters < max_iters {
        iters += 1;
        let mut d = two_loop(&g, &s_hist, &y_hist);
        for v in d.iter_mut() {
            *v = -*v;
        }
        if dot(&d, &g) >= 0.0 {
            // not a descent direction; restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            d = g.iter().map(|&v| -v).collect();
        }
        let slope = dot(&d, &g);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..ls_max {
            let cand: Vec<f64> = x.iter().zip(&d).map(|(&xi, &di)| xi + step * di).collect();
            let cand = (ws.project_point)(cand);
            let fc = (ws.value)(&cand);
            if fc <= f + 1e-4 * step * slope {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            break; // line search failed; return the best point so far
        };
        let (f_check, g_raw_new) = (ws.value_and_grad)(&x_new);
        let g_new = (ws.project_gradient)(&x_new, &g_raw_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }
        x = x_new;
        f = f_new.min(f_check);
        g_raw = g_raw_new;
        g = g_new;
        trace.push(f);
        converged = inf_norm(&g) <= tol;
    }
    let _ = g_raw;
    MinimizeOutcome {
        x,
        value: f,
        trace,
        iters,
        converged,
    }
}

fn two_loop(g: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q = g.to_vec();
    let k = s_hist.len();
    let mut alpha = vec![0.0; k];
    let mut rho = vec![0.0; k];
    for i in (0..k).rev() {
        rho[i] = 1.0 / dot(&y_hist[i], &s_hist[i]);
        alpha[i] = rho[i] * dot(&s_hist[i], &q);
        for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
            *qj -= alpha[i] * yj;
        }
    }
    if k > 0 {
        let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
        for qj in q.iter_mut() {
            *qj *= gamma;
        }
    }
    for i in 0..k {
        let beta = rho[i] * dot(&y_hist[i], &q);
        for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &v| m.max(v.abs()))
}
