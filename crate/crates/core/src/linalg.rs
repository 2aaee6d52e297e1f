//! Small dense Krylov solver used by the embedding Newton iteration.

/// Outcome of a GMRES solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    /// Final residual relative to `|b|`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES for `A x = b` with right preconditioner `M ≈ A⁻¹`.
/// Starts from `x = 0`.
pub fn gmres<A, M>(
    apply: A,
    precondition: M,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<f64>, KrylovStats)
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, KrylovStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut total = 0;
    let mut r = b.to_vec();
    let mut rel = 1.0;
    while total < max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        let m = restart.min(max_iter - total);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z = precondition(&v[k]);
            let mut w = apply(&z);
            for i in 0..=k {
                h[i][k] = dot(&w, &v[i]);
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= h[i][k] * vj;
                }
            }
            h[k + 1][k] = norm(&w);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            let hk1 = h[k + 1][k];
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= tol || hk1 == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hk1).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut dx = vec![0.0; n];
        for (i, yi) in y.iter().enumerate() {
            for (d, vi) in dx.iter_mut().zip(&v[i]) {
                *d += yi * vi;
            }
        }
        let dz = precondition(&dx);
        for (xi, d) in x.iter_mut().zip(&dz) {
            *xi += d;
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        rel = norm(&r) / bnorm;
        if rel <= tol || k_used == 0 {
            break;
        }
    }
    (x, KrylovStats { iterations: total, relative_residual: rel })
}
