//! Derivative-free minimization (Nelder-Mead simplex).
//!
//! Model likelihoods here are cheap, low dimensional (at most a dozen
//! parameters) and evaluated on smooth reparameterized spaces, which is the
//! setting where the simplex method is hard to beat for robustness.

/// Outcome of a simplex minimization.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration; non-increasing.
    pub trace: Vec<f64>,
}

/// Minimize `f` starting from `x0` with initial simplex step `step`.
///
/// Stops when the relative spread of the simplex values drops below
/// `rel_tol` or after `max_iter` iterations.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, rel_tol: f64, max_iter: usize) -> MinimizeResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0, "cannot minimize over zero parameters");
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut trace = Vec::with_capacity(max_iter);
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        iterations += 1;

        // Order the simplex by objective value.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = ordered;
        values = ordered_vals;

        let best = values[0];
        let worst = values[n];
        trace.push(best);
        if (worst - best).abs() <= rel_tol * (best.abs() + 1e-12) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in simplex.iter().take(n) {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }

        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
        };

        // Reflect.
        let reflected = lerp(&centroid, &simplex[n], -alpha);
        let fr = f(&reflected);
        if fr < values[0] {
            // Expand.
            let expanded = lerp(&centroid, &simplex[n], -alpha * gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }

        // Contract (outside if the reflected point improves on the worst).
        let contracted = if fr < values[n] {
            lerp(&centroid, &reflected, rho)
        } else {
            lerp(&centroid, &simplex[n], rho)
        };
        let fc = f(&contracted);
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }

        // Shrink toward the best vertex.
        for i in 1..=n {
            simplex[i] = lerp(&simplex[0], &simplex[i], sigma);
            values[i] = f(&simplex[i]);
        }
    }

    let mut best_i = 0;
    for i in 1..=n {
        if values[i] < values[best_i] {
            best_i = i;
        }
    }
    MinimizeResult {
        x: simplex[best_i].clone(),
        fx: values[best_i],
        iterations,
        converged,
        trace,
    }
}
