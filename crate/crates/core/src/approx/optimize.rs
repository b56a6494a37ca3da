//! Minimization of the spanning-family upper bound.
//!
//! With member weights `ρ` on the simplex and member interactions `{J^(r)}`
//! constrained by `Σ_r ρ(r) Ĵ^(r) = J'` (zero-padded), every feasible point
//! gives `Σ_r ρ(r) log Z_r(J^(r)) ≥ log Z(G', 0, J')`. The inner problem
//! minimizes over `{J^(r)}` by projected L-BFGS — the gradient is
//! `ρ(r) M^(r)` with `M^(r)` the member's exact edge expectations — and the
//! outer problem descends on `ρ` through the reparameterization
//! `ρ = w / Σ w`, using `∂g/∂ρ(r) = log Z_r - (M^(r))ᵀ J^(r)` at the inner
//! minimum.

use super::family::SpanningFamily;
use super::lbfgs::{dot, inf_norm, minimize, MinimizeOutcome, Workspace};
use super::ApproxError;
use crate::decomp::{edge_marginals, infer_log_z_trusted, DecompError};
use crate::ising::IsingModel;
use crate::planar::PlanarError;

/// Extreme line-search candidates can saturate `tanh J` and collapse the
/// matching sum to a float zero; such points are treated as infinitely bad
/// and rejected rather than aborting the solve.
fn is_transient(e: &ApproxError) -> bool {
    matches!(
        e,
        ApproxError::Planar(PlanarError::NumericalFailure | PlanarError::SingularMatrix)
            | ApproxError::Decomp(DecompError::Planar(
                PlanarError::NumericalFailure | PlanarError::SingularMatrix
            ))
    )
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    /// inner projected-gradient infinity-norm target
    pub inner_tol: f64,
    /// outer gradient infinity-norm target
    pub outer_tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub line_search_steps: usize,
    pub memory: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            inner_tol: 1e-5,
            outer_tol: 1e-5,
            max_inner_iters: 120,
            max_outer_iters: 200,
            line_search_steps: 25,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UpperBoundResult {
    /// the bound h: the best feasible objective value reached
    pub bound: f64,
    pub rho: Vec<f64>,
    /// optimized member interactions, indexed like each member's edges
    pub member_j: Vec<Vec<f64>>,
    /// `Σ_r ρ(r) M̂^(r)` per target edge (zero-padded member expectations)
    pub blended_marginals: Vec<f64>,
    /// accepted-step objective values of each inner solve
    pub inner_traces: Vec<Vec<f64>>,
    pub outer_iters: usize,
    pub converged: bool,
    pub max_constraint_residual: f64,
}

/// Member `log Z` and its gradient in the member interactions.
fn member_log_z_and_marginals(
    fam: &SpanningFamily,
    r: usize,
    j: &[f64],
) -> Result<(f64, Vec<f64>), ApproxError> {
    let member = &fam.members[r];
    let model = IsingModel::zero_field(member.graph.clone(), j.to_vec())?;
    let cache = infer_log_z_trusted(&member.tree, &model)?;
    let marg = edge_marginals(&member.tree, &cache, &model)?;
    Ok((cache.log_z(), marg))
}

fn member_log_z(fam: &SpanningFamily, r: usize, j: &[f64]) -> Result<f64, ApproxError> {
    let member = &fam.members[r];
    let model = IsingModel::zero_field(member.graph.clone(), j.to_vec())?;
    Ok(infer_log_z_trusted(&member.tree, &model)?.log_z())
}

/// Flattened view of all member interactions, with a per-target-edge index
/// of the member slots that carry it.
struct Packing {
    offsets: Vec<usize>,
    total: usize,
    /// per target edge: (member, member-local edge index)
    cover_local: Vec<Vec<(usize, usize)>>,
}

impl Packing {
    fn new(fam: &SpanningFamily) -> Self {
        let mut offsets = Vec::with_capacity(fam.members.len());
        let mut total = 0;
        for m in &fam.members {
            offsets.push(total);
            total += m.graph.edge_count();
        }
        let mut cover_local = vec![Vec::new(); fam.target_graph.edge_count()];
        for (r, m) in fam.members.iter().enumerate() {
            for (local, &t) in m.edge_in_target.iter().enumerate() {
                cover_local[t].push((r, local));
            }
        }
        Packing {
            offsets,
            total,
            cover_local,
        }
    }

    fn member<'a>(&self, x: &'a [f64], fam: &SpanningFamily, r: usize) -> &'a [f64] {
        let start = self.offsets[r];
        &x[start..start + fam.members[r].graph.edge_count()]
    }
}

/// Minimal-norm restoration of `Σ_r ρ(r) Ĵ^(r) = J'`, edge by edge.
fn project_point(rho: &[f64], j_prime: &[f64], mut x: Vec<f64>, p: &Packing) -> Vec<f64> {
    for (e, slots) in p.cover_local.iter().enumerate() {
        let s: f64 = slots.iter().map(|&(r, _)| rho[r] * rho[r]).sum();
        if s == 0.0 {
            continue;
        }
        let acc: f64 = slots
            .iter()
            .map(|&(r, local)| rho[r] * x[p.offsets[r] + local])
            .sum();
        let res = acc - j_prime[e];
        if res != 0.0 {
            for &(r, local) in slots {
                x[p.offsets[r] + local] -= res * rho[r] / s;
            }
        }
    }
    x
}

/// Projects a gradient onto `Σ_r ρ(r) δJ^(r) = 0`.
fn project_gradient(rho: &[f64], g: &[f64], p: &Packing) -> Vec<f64> {
    let mut out = g.to_vec();
    for slots in &p.cover_local {
        let s: f64 = slots.iter().map(|&(r, _)| rho[r] * rho[r]).sum();
        if s == 0.0 {
            continue;
        }
        let acc: f64 = slots
            .iter()
            .map(|&(r, local)| rho[r] * g[p.offsets[r] + local])
            .sum();
        let lambda = acc / s;
        for &(r, local) in slots {
            out[p.offsets[r] + local] -= lambda * rho[r];
        }
    }
    out
}

fn constraint_residual(rho: &[f64], j_prime: &[f64], x: &[f64], p: &Packing) -> f64 {
    let mut worst = 0.0f64;
    for (e, slots) in p.cover_local.iter().enumerate() {
        let acc: f64 = slots
            .iter()
            .map(|&(r, local)| rho[r] * x[p.offsets[r] + local])
            .sum();
        worst = worst.max((acc - j_prime[e]).abs());
    }
    worst
}

/// Marginals `M^(r)` of every member at the point `x`.
fn all_marginals(
    fam: &SpanningFamily,
    x: &[f64],
    p: &Packing,
) -> Result<Vec<Vec<f64>>, ApproxError> {
    let mut margs = Vec::with_capacity(fam.members.len());
    for r in 0..fam.members.len() {
        let (_, m) = member_log_z_and_marginals(fam, r, p.member(x, fam, r))?;
        margs.push(m);
    }
    Ok(margs)
}

/// One inner minimization at fixed `ρ`.
fn inner_solve(
    fam: &SpanningFamily,
    rho: &[f64],
    j_prime: &[f64],
    x0: Vec<f64>,
    p: &Packing,
    opts: &OptimizeOptions,
) -> Result<MinimizeOutcome, ApproxError> {
    let failure: std::cell::RefCell<Option<ApproxError>> = std::cell::RefCell::new(None);
    let outcome = {
        let mut value_and_grad = |x: &[f64]| -> (f64, Vec<f64>) {
            let mut f = 0.0;
            let mut g = vec![0.0; p.total];
            for r in 0..fam.members.len() {
                match member_log_z_and_marginals(fam, r, p.member(x, fam, r)) {
                    Ok((lz, marg)) => {
                        f += rho[r] * lz;
                        for (i, &m) in marg.iter().enumerate() {
                            g[p.offsets[r] + i] = rho[r] * m;
                        }
                    }
                    Err(e) => {
                        if !is_transient(&e) {
                            failure.borrow_mut().get_or_insert(e);
                        }
                        return (f64::INFINITY, g);
                    }
                }
            }
            (f, g)
        };
        let mut value = |x: &[f64]| -> f64 {
            let mut f = 0.0;
            for r in 0..fam.members.len() {
                match member_log_z(fam, r, p.member(x, fam, r)) {
                    Ok(lz) => f += rho[r] * lz,
                    Err(e) => {
                        if !is_transient(&e) {
                            failure.borrow_mut().get_or_insert(e);
                        }
                        return f64::INFINITY;
                    }
                }
            }
            f
        };
        let pg = |_: &[f64], g: &[f64]| project_gradient(rho, g, p);
        let pp = |x: Vec<f64>| project_point(rho, j_prime, x, p);
        let mut ws = Workspace {
            value_and_grad: &mut value_and_grad,
            value: &mut value,
            project_gradient: &pg,
            project_point: &pp,
        };
        minimize(
            x0,
            &mut ws,
            opts.inner_tol,
            opts.max_inner_iters,
            opts.memory,
            opts.line_search_steps,
        )
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outcome)
}

/// Nested minimization of the Eq.-style upper bound. `j_prime` is indexed
/// like `family.target_graph.edges()`.
pub fn optimize_upper_bound(
    fam: &SpanningFamily,
    j_prime: &[f64],
    opts: &OptimizeOptions,
) -> Result<UpperBoundResult, ApproxError> {
    fam.check_coverage()?;
    assert_eq!(j_prime.len(), fam.target_graph.edge_count());
    let p = Packing::new(fam);
    let n_members = fam.members.len();

    // uniform weights; members start at J'/ (ρ-weighted coverage), which is
    // feasible by construction
    let mut theta = vec![0.0f64; n_members]; // w = exp(theta)
    let rho_of = |theta: &[f64]| -> Vec<f64> {
        let w: Vec<f64> = theta.iter().map(|&t| t.exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    };
    let mut rho = rho_of(&theta);
    let mut x = vec![0.0; p.total];
    for (e, slots) in p.cover_local.iter().enumerate() {
        let weight: f64 = slots.iter().map(|&(r, _)| rho[r]).sum();
        for &(r, local) in slots {
            x[p.offsets[r] + local] = j_prime[e] / weight;
        }
    }

    let mut inner_traces = Vec::new();
    let mut outcome = inner_solve(fam, &rho, j_prime, x.clone(), &p, opts)?;
    x = outcome.x.clone();
    let mut margs = all_marginals(fam, &x, &p)?;
    inner_traces.push(outcome.trace.clone());
    let mut best_value = outcome.value;
    let mut best_state = (rho.clone(), x.clone(), margs.clone());

    let mut outer_iters = 0;
    let mut converged = false;
    let mut outer_step = 1.0f64;
    while outer_iters < opts.max_outer_iters {
        outer_iters += 1;
        // ∂g/∂ρ(r) at the inner minimum, chained through ρ = w/Σw
        let mut dgdrho = vec![0.0; n_members];
        for r in 0..n_members {
            let j_r = p.member(&x, fam, r);
            dgdrho[r] = member_log_z(fam, r, j_r)? - dot(&margs[r], j_r);
        }
        let mean: f64 = rho.iter().zip(&dgdrho).map(|(a, b)| a * b).sum();
        let gtheta: Vec<f64> = (0..n_members)
            .map(|r| rho[r] * (dgdrho[r] - mean))
            .collect();
        if inf_norm(&gtheta) <= opts.outer_tol {
            converged = true;
            break;
        }
        // backtracking on theta, starting near the last accepted step; each
        // candidate costs a warm-started inner re-solve
        let mut step = (outer_step * 2.0).min(1.0);
        let mut improved = false;
        for _ in 0..opts.line_search_steps {
            let cand_theta: Vec<f64> = theta
                .iter()
                .zip(&gtheta)
                .map(|(&t, &g)| t - step * g)
                .collect();
            let cand_rho = rho_of(&cand_theta);
            let cand_out = inner_solve(fam, &cand_rho, j_prime, x.clone(), &p, opts)?;
            if cand_out.value <= outcome.value - 1e-4 * step * dot(&gtheta, &gtheta) {
                theta = cand_theta;
                rho = cand_rho;
                x = cand_out.x.clone();
                margs = all_marginals(fam, &x, &p)?;
                inner_traces.push(cand_out.trace.clone());
                outcome = cand_out;
                improved = true;
                outer_step = step;
                break;
            }
            step *= 0.5;
        }
        if outcome.value < best_value {
            best_value = outcome.value;
            best_state = (rho.clone(), x.clone(), margs.clone());
        }
        if !improved {
            converged = inf_norm(&gtheta) <= opts.outer_tol * 10.0;
            break;
        }
    }
    if outcome.value < best_value {
        best_value = outcome.value;
        best_state = (rho.clone(), x.clone(), margs.clone());
    }
    let (rho, x, margs) = best_state;

    let mut blended = vec![0.0; fam.target_graph.edge_count()];
    for r in 0..n_members {
        for (i, &t) in fam.members[r].edge_in_target.iter().enumerate() {
            blended[t] += rho[r] * margs[r][i];
        }
    }
    let member_j: Vec<Vec<f64>> = (0..n_members)
        .map(|r| p.member(&x, fam, r).to_vec())
        .collect();
    let residual = constraint_residual(&rho, j_prime, &x, &p);
    Ok(UpperBoundResult {
        bound: best_value,
        rho,
        member_j,
        blended_marginals: blended,
        inner_traces,
        outer_iters,
        converged,
        max_constraint_residual: residual,
    })
}

/// The marginal approximations read off an optimizer result.
#[derive(Debug, Clone)]
pub struct MarginalApproximation {
    /// `P(x_v x_w = 1)` per grid edge
    pub pairwise: Vec<f64>,
    /// `P(x_v = 1)` at the probe vertex, via its apex edge
    pub singleton_center: f64,
}

/// `P(x_v x_w = 1) = (1 + Σ_r ρ(r) M^(r)_e) / 2` for grid edges, and the
/// singleton at `center` through its apex edge.
pub fn approx_marginals(
    fam: &SpanningFamily,
    result: &UpperBoundResult,
    center: usize,
) -> MarginalApproximation {
    let h = fam.h;
    let apex = h * h;
    let grid = super::grid_graph(h);
    let pairwise = grid
        .edges()
        .iter()
        .map(|&(u, v)| {
            let t = fam.target_graph.edge_index(u, v).expect("grid edge in target");
            0.5 * result.blended_marginals[t] + 0.5
        })
        .collect();
    let e_a = fam
        .target_graph
        .edge_index(center, apex)
        .expect("apex edge at the probe vertex");
    MarginalApproximation {
        pairwise,
        singleton_center: 0.5 * result.blended_marginals[e_a] + 0.5,
    }
}
