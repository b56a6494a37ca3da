//! Exact inference for (nonzero-field) square-grid models by a row-by-row
//! transfer over the `2^H` states of one grid row, entirely in log domain.
//! The per-row transition factorizes over columns, so each row step costs
//! `O(H 2^H)`. Pairwise marginals across a row gap enumerate the `4^H`
//! joint states of the two rows, which caps the marginal computation at a
//! smaller grid side than the partition function.

use super::{ApproxError, GridModel};

/// Partition-function side limit (`2^H` state vectors).
pub const TRANSFER_LIMIT: usize = 20;
/// Marginal side limit (`4^H` joint enumeration per row gap).
pub const TRANSFER_MARGINAL_LIMIT: usize = 13;

#[derive(Debug, Clone)]
pub struct ExactGridResult {
    pub log_z: f64,
    /// `E[x_v x_w]` per grid edge, indexed like `GridModel::graph().edges()`
    pub edge_expectations: Vec<f64>,
    /// `E[x_v]` per vertex
    pub vertex_expectations: Vec<f64>,
}

fn spin(s: usize, c: usize) -> f64 {
    if s >> c & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log Z` only; works up to `H = 20`.
pub fn transfer_matrix_log_z(m: &GridModel) -> Result<f64, ApproxError> {
    if m.h > TRANSFER_LIMIT {
        return Err(ApproxError::TooLarge(m.h, TRANSFER_LIMIT));
    }
    let f = forward(m);
    let last = &f[m.h - 1];
    Ok(last.iter().fold(f64::NEG_INFINITY, |a, &b| logaddexp(a, b)))
}

/// `log Z` plus exact pairwise and singleton expectations; works up to
/// `H = 13`.
pub fn transfer_matrix_exact(m: &GridModel) -> Result<ExactGridResult, ApproxError> {
    if m.h > TRANSFER_MARGINAL_LIMIT {
        return Err(ApproxError::TooLarge(m.h, TRANSFER_MARGINAL_LIMIT));
    }
    let h = m.h;
    let states = 1usize << h;
    let f = forward(m);
    let b = backward(m);
    let log_z = f[h - 1]
        .iter()
        .fold(f64::NEG_INFINITY, |a, &v| logaddexp(a, v));

    let graph = m.graph();
    let mut edge_expectations = vec![0.0; graph.edge_count()];
    let mut vertex_expectations = vec![0.0; h * h];

    // row distributions handle vertices and horizontal edges
    for row in 0..h {
        for s in 0..states {
            let p = (f[row][s] + b[row][s] - log_z).exp();
            if p == 0.0 {
                continue;
            }
            for c in 0..h {
                vertex_expectations[row * h + c] += p * spin(s, c);
                if c + 1 < h {
                    let idx = graph
                        .edge_index(row * h + c, row * h + c + 1)
                        .expect("horizontal edge");
                    edge_expectations[idx] += p * spin(s, c) * spin(s, c + 1);
                }
            }
        }
    }
    // vertical edges need the joint over adjacent rows
    for row in 0..h.saturating_sub(1) {
        let mut acc = vec![0.0; h];
        for s in 0..states {
            if f[row][s] == f64::NEG_INFINITY {
                continue;
            }
            for t in 0..states {
                let mut vert = 0.0;
                for c in 0..h {
                    vert += m.vertical_j(row, c) * spin(s, c) * spin(t, c);
                }
                let logp = f[row][s] + vert + row_weight(m, row + 1, t) + b_next(&b, row, t) - log_z;
                let p = logp.exp();
                if p == 0.0 {
                    continue;
                }
                for c in 0..h {
                    acc[c] += p * spin(s, c) * spin(t, c);
                }
            }
        }
        for c in 0..h {
            let idx = graph
                .edge_index(row * h + c, (row + 1) * h + c)
                .expect("vertical edge");
            edge_expectations[idx] = acc[c];
        }
    }
    Ok(ExactGridResult {
        log_z,
        edge_expectations,
        vertex_expectations,
    })
}

fn b_next(b: &[Vec<f64>], row: usize, t: usize) -> f64 {
    b[row + 1][t]
}

/// `F[row][s] = log Σ` over rows `0..=row` with row `row` in state `s`,
/// including row `row`'s fields/horizontals and the vertical coupling to
/// row `row - 1`.
fn forward(m: &GridModel) -> Vec<Vec<f64>> {
    let h = m.h;
    let states = 1usize << h;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut cur: Vec<f64> = (0..states).map(|s| row_weight(m, 0, s)).collect();
    out.push(cur.clone());
    for row in 1..h {
        let jv: Vec<f64> = (0..h).map(|c| m.vertical_j(row - 1, c)).collect();
        vertical_sweep(&mut cur, &jv, h);
        for (s, v) in cur.iter_mut().enumerate() {
            *v += row_weight(m, row, s);
        }
        out.push(cur.clone());
    }
    out
}

/// `B[row][s] = log Σ` over rows `row+1..H` given row `row` in state `s`,
/// excluding row `row`'s own weight.
fn backward(m: &GridModel) -> Vec<Vec<f64>> {
    let h = m.h;
    let states = 1usize << h;
    let mut out = vec![vec![0.0; states]; h];
    let mut cur = vec![0.0; states];
    for row in (0..h - 1).rev() {
        for (t, v) in cur.iter_mut().enumerate() {
            *v += row_weight(m, row + 1, t);
        }
        let jv: Vec<f64> = (0..h).map(|c| m.vertical_j(row, c)).collect();
        vertical_sweep(&mut cur, &jv, h);
        out[row] = cur.clone();
    }
    out
}

/// Replaces `vec[s]` by `logsumexp over s' of Σ_c jv[c]·x_c·x'_c + vec[s']`,
/// one column at a time.
fn vertical_sweep(vec: &mut [f64], jv: &[f64], h: usize) {
    let states = vec.len();
    let mut scratch = vec![0.0f64; states];
    for c in 0..h {
        let bit = 1usize << c;
        let j = jv[c];
        for s in 0..states {
            let (lo, hi) = (s & !bit, s | bit);
            let x = spin(s, c);
            scratch[s] = logaddexp(vec[lo] + j * x * -1.0, vec[hi] + j * x * 1.0);
        }
        vec.copy_from_slice(&scratch);
    }
}

/// Fields and horizontal couplings of one row in state `s`.
fn row_weight(m: &GridModel, row: usize, s: usize) -> f64 {
    let h = m.h;
    let mut total = 0.0;
    for c in 0..h {
        total += m.field(row, c) * spin(s, c);
        if c + 1 < h {
            total += m.horizontal_j(row, c) * spin(s, c) * spin(s, c + 1);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{brute_force_log_z, brute_force_marginals, Condition};
    use rand::{RngExt, SeedableRng};
    use rand_pcg::Pcg64;

    fn random_grid(h: usize, seed: u64) -> GridModel {
        let mut r = Pcg64::seed_from_u64(seed);
        let fields = (0..h * h).map(|_| r.random_range(-0.5..0.5)).collect();
        let n_edges = 2 * h * (h - 1);
        let interactions = (0..n_edges).map(|_| r.random_range(-1.5..1.5)).collect();
        GridModel::new(h, fields, interactions).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn matches_brute_force_h2_h3() {
        for (h, seed) in [(2usize, 1u64), (2, 2), (3, 3), (3, 4)] {
            let gm = random_grid(h, seed);
            let ising = gm.to_ising();
            let exact = brute_force_log_z(&ising, &Condition::empty()).unwrap();
            let got = transfer_matrix_log_z(&gm).unwrap();
            close(got, exact, 1e-10 * exact.abs().max(1.0));

            let res = transfer_matrix_exact(&gm).unwrap();
            close(res.log_z, exact, 1e-10 * exact.abs().max(1.0));
            let bm = brute_force_marginals(&ising).unwrap();
            for (a, b) in res.edge_expectations.iter().zip(&bm.edge) {
                close(*a, *b, 1e-9);
            }
            for (a, b) in res.vertex_expectations.iter().zip(&bm.vertex) {
                close(*a, *b, 1e-9);
            }
        }
    }

    #[test]
    fn zero_field_grid_agrees_with_planar_engine() {
        let h = 6;
        let mut r = Pcg64::seed_from_u64(42);
        let n_edges = 2 * h * (h - 1);
        let gm = GridModel::new(
            h,
            vec![0.0; h * h],
            (0..n_edges).map(|_| r.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let exact = crate::planar::log_z_planar(&gm.to_ising_zero_field().unwrap()).unwrap();
        let got = transfer_matrix_log_z(&gm).unwrap();
        close(got, exact, 1e-8 * exact.abs().max(1.0));
    }

    #[test]
    fn too_large_rejected() {
        let gm = GridModel::new(21, vec![0.0; 441], vec![0.0; 2 * 21 * 20]).unwrap();
        assert!(matches!(
            transfer_matrix_log_z(&gm),
            Err(ApproxError::TooLarge(21, _))
        ));
        let gm = GridModel::new(14, vec![0.0; 196], vec![0.0; 2 * 14 * 13]).unwrap();
        assert!(matches!(
            transfer_matrix_exact(&gm),
            Err(ApproxError::TooLarge(14, _))
        ));
    }
}
