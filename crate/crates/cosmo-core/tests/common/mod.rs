//! Shared numeric helpers for integration tests: a floating-point
//! expanding-universe metric and a finite-difference Christoffel oracle
//! that is independent of the symbolic engine.

#![allow(dead_code)]

pub type MetricFn = dyn Fn([f64; 4]) -> [[f64; 4]; 4];

/// Expanding-universe metric with c = 1, curvature k, and scale factor
/// given by `scale`, evaluated at (t, r, theta, phi).
pub fn frw_metric_numeric(k: f64, scale: &dyn Fn(f64) -> f64, x: [f64; 4]) -> [[f64; 4]; 4] {
    let [t, r, theta, _] = x;
    let a = scale(t);
    let mut g = [[0.0; 4]; 4];
    g[0][0] = -1.0;
    g[1][1] = a * a / (1.0 - k * r * r);
    g[2][2] = a * a * r * r;
    g[3][3] = a * a * r * r * theta.sin().powi(2);
    g
}

fn invert4(m: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    // Gauss-Jordan with partial pivoting.
    let mut a = m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-12, "singular matrix");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = a[row][col];
            for j in 0..4 {
                a[row][j] -= f * a[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    inv
}

/// Connection coefficients Gamma[a][b][c] from central differences of the
/// metric, step h in every coordinate.
pub fn christoffel_fd(g: &MetricFn, x: [f64; 4], h: f64) -> [[[f64; 4]; 4]; 4] {
    let mut dg = [[[0.0; 4]; 4]; 4]; // dg[k][i][j] = d_k g_ij
    for k in 0..4 {
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        let gp = g(xp);
        let gm = g(xm);
        for i in 0..4 {
            for j in 0..4 {
                dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let ginv = invert4(g(x));
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[a][d] * (dg[b][d][c] + dg[c][b][d] - dg[d][b][c]);
                }
                gamma[a][b][c] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Relative-or-absolute closeness check used by the numeric oracles.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}
