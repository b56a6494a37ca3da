//! Exhaustive-enumeration oracles: exact log-partition values, marginals and
//! samples for models small enough to enumerate.

use super::{Condition, IsingModel, ModelError, SpinConfiguration, ENUMERATION_LIMIT};
use rand::{Rng, RngExt};

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn check_size(m: &IsingModel) -> Result<(), ModelError> {
    let n = m.vertex_count();
    if n > ENUMERATION_LIMIT {
        return Err(ModelError::TooLarge(n, ENUMERATION_LIMIT));
    }
    Ok(())
}

/// Iterates over all configurations consistent with `s` as raw spin slices,
/// in Gray-code order so each step flips one spin and updates the log-weight
/// incrementally. The running value is resynchronized periodically to keep
/// float drift negligible.
pub(crate) fn for_each_consistent(
    m: &IsingModel,
    s: &Condition,
    mut f: impl FnMut(&[i8], f64),
) -> Result<(), ModelError> {
    check_size(m)?;
    s.validate_for(m)?;
    let n = m.vertex_count();
    let free: Vec<usize> = (0..n).filter(|&v| s.spin_of(v).is_none()).collect();
    let mut spins = vec![-1i8; n];
    for &(v, sp) in s.assignments() {
        spins[v] = sp;
    }
    // per-vertex incident (neighbor, J) lists for O(deg) flip updates
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in m.graph().edges().iter().enumerate() {
        let j = m.interactions()[i];
        incident[u].push((v, j));
        incident[v].push((u, j));
    }
    let fields = m.fields();

    let mut lw = m.log_weight_spins(&spins);
    f(&spins, lw);
    let total = 1usize << free.len();
    for step in 1..total {
        let v = free[step.trailing_zeros() as usize];
        // flipping x_v changes the weight by -2 x_v (μ_v + Σ J_vw x_w)
        let mut local = fields.map(|mu| mu[v]).unwrap_or(0.0);
        for &(w, j) in &incident[v] {
            local += j * spins[w] as f64;
        }
        lw -= 2.0 * spins[v] as f64 * local;
        spins[v] = -spins[v];
        if step % 4096 == 0 {
            lw = m.log_weight_spins(&spins);
        }
        f(&spins, lw);
    }
    Ok(())
}

/// `log Z_{|S}` by direct enumeration with streaming log-sum-exp.
pub fn brute_force_log_z(m: &IsingModel, s: &Condition) -> Result<f64, ModelError> {
    let mut lse = LogSumExp::new();
    for_each_consistent(m, s, |_, lw| lse.add(lw))?;
    Ok(lse.value())
}

/// An exact draw from `P(X | S)` by inverse-CDF over the enumerated
/// distribution.
pub fn brute_force_sample(
    m: &IsingModel,
    s: &Condition,
    rng: &mut impl Rng,
) -> Result<SpinConfiguration, ModelError> {
    let log_z = brute_force_log_z(m, s)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last: Option<Vec<i8>> = None;
    let mut chosen: Option<Vec<i8>> = None;
    for_each_consistent(m, s, |x, lw| {
        if chosen.is_none() {
            acc += (lw - log_z).exp();
            if acc >= u {
                chosen = Some(x.to_vec());
            }
        } else {
            return;
        }
        last = Some(x.to_vec());
    })?;
    // Float round-off can leave acc just below 1; fall back to the last one.
    let spins = chosen.or(last).expect("at least one consistent configuration");
    Ok(SpinConfiguration::new(spins))
}

/// Exact per-edge and per-vertex expectations.
#[derive(Debug, Clone)]
pub struct BruteMarginals {
    /// `E[x_v x_w]`, indexed like `graph.edges()`.
    pub edge: Vec<f64>,
    /// `E[x_v]` per vertex.
    pub vertex: Vec<f64>,
}

pub fn brute_force_marginals(m: &IsingModel) -> Result<BruteMarginals, ModelError> {
    check_size(m)?;
    let log_z = brute_force_log_z(m, &Condition::empty())?;
    let mut edge = vec![0.0; m.graph().edge_count()];
    let mut vertex = vec![0.0; m.vertex_count()];
    for_each_consistent(m, &Condition::empty(), |x, lw| {
        let p = (lw - log_z).exp();
        for (i, &(u, v)) in m.graph().edges().iter().enumerate() {
            edge[i] += p * (x[u] * x[v]) as f64;
        }
        for (v, &s) in x.iter().enumerate() {
            vertex[v] += p * s as f64;
        }
    })?;
    Ok(BruteMarginals { edge, vertex })
}
