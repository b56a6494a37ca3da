//! Dense Pfaffian of a skew-symmetric matrix in sign + log-magnitude form,
//! via skew tridiagonalization with Gauss transforms and partial pivoting
//! (the Parlett–Reid style LTLᵀ route). O(n³), good to a few thousand rows.

/// Row-major dense skew-symmetric matrix.
pub(crate) struct SkewMatrix {
    pub n: usize,
    pub a: Vec<f64>,
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        SkewMatrix { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = -v;
    }

    fn swap_rows_cols(&mut self, p: usize, q: usize) {
        let n = self.n;
        for j in 0..n {
            self.a.swap(p * n + j, q * n + j);
        }
        for i in 0..n {
            self.a.swap(i * n + p, i * n + q);
        }
    }
}

/// Pfaffian as `(sign, log|Pf|)`. Sign `0` means the Pfaffian is exactly
/// zero (structurally singular); then the log-magnitude is `-inf`.
/// A 0×0 matrix has Pfaffian 1; odd dimension gives 0.
pub(crate) fn pfaffian_sign_logmag(m: &mut SkewMatrix) -> (i8, f64) {
    let n = m.n;
    if n == 0 {
        return (1, 0.0);
    }
    if n % 2 == 1 {
        return (0, f64::NEG_INFINITY);
    }
    let mut sign = 1i8;
    let mut logmag = 0.0f64;
    let mut tau = vec![0.0; n];
    let mut col = vec![0.0; n];
    for k in (0..n - 1).step_by(2) {
        // largest entry of row k to the right of k becomes the pivot
        let mut kp = k + 1;
        let mut best = m.get(k, k + 1).abs();
        for i in (k + 2)..n {
            let v = m.get(k, i).abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        if kp != k + 1 {
            m.swap_rows_cols(k + 1, kp);
            sign = -sign;
        }
        let pivot = m.get(k, k + 1);
        if pivot < 0.0 {
            sign = -sign;
        }
        logmag += pivot.abs().ln();
        if k + 2 < n {
            for j in (k + 2)..n {
                tau[j] = m.get(k, j) / pivot;
                col[j] = m.get(j, k + 1);
            }
            for i in (k + 2)..n {
                let ti = tau[i];
                let ci = col[i];
                if ti == 0.0 && ci == 0.0 {
                    continue;
                }
                let row = &mut m.a[i * n..(i + 1) * n];
                for j in (k + 2)..n {
                    row[j] += ti * col[j] - ci * tau[j];
                }
            }
        }
    }
    (sign, logmag)
}

/// Dense inverse by Gauss–Jordan with partial pivoting. Returns `None` when
/// the matrix is numerically singular.
pub(crate) fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let mut p = c;
        let mut best = work[c * n + c].abs();
        for r in (c + 1)..n {
            let v = work[r * n + c].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if p != c {
            for j in 0..n {
                work.swap(c * n + j, p * n + j);
                inv.swap(c * n + j, p * n + j);
            }
        }
        let d = work[c * n + c];
        for j in 0..n {
            work[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = work[r * n + c];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                work[r * n + j] -= f * work[c * n + j];
                inv[r * n + j] -= f * inv[c * n + j];
            }
        }
    }
    Some(inv)
}
