//! Generic iterative LP engines: fractional packing, fractional covering,
//! and the multiplicative-weights-update meta-method. Problem-specific
//! oracles are supplied by the matching pipelines.
//!
//! Constraint families too large to enumerate are handled lazily: an
//! instance exposes its current maximum/minimum ratio and the active
//! constraint list instead of a full matrix. All exponentials run in
//! log-space with per-iteration normalization; the quantities compared by
//! (P1)/(P2)/(C1)/(C2) are scale-free.

use crate::error::{Error, Result};

/// log(sum(exp(v))) without overflow.
pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------
// Fractional packing (min lambda s.t. Ax <= lambda b, x in P)
// ---------------------------------------------------------------------

/// A constraint as seen by the engine: identifier, current ratio
/// r = A_i x / b_i, and b_i.
#[derive(Debug, Clone)]
pub struct ConstraintView<Id> {
    pub id: Id,
    pub ratio: f64,
    pub b: f64,
}

/// Engine parameters. `sigma` is tied to `kappa` by sigma = delta/(4 kappa
/// rho); `kappa` must be at least 4 ln(2 m / delta) / (lambda0 delta).
#[derive(Debug, Clone)]
pub struct PackParams {
    pub delta: f64,
    pub rho: f64,
    pub lambda0: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub iter_cap: usize,
}

impl PackParams {
    /// Standard parameterization with the smallest admissible kappa.
    pub fn standard(delta: f64, rho: f64, lambda0: f64, m: usize) -> Result<Self> {
        Self::with_kappa_scale(delta, rho, lambda0, m, 1.0)
    }

    /// Parameterization with kappa enlarged by `scale` over the standard
    /// minimum (the matching pipeline uses scale = 1/delta^2, turning the
    /// delta^-1 in kappa into delta^-3).
    pub fn with_kappa_scale(
        delta: f64,
        rho: f64,
        lambda0: f64,
        m: usize,
        scale: f64,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&delta) || delta == 0.0 {
            return Err(Error::Argument(format!("delta out of range: {delta}")));
        }
        if lambda0 <= 0.0 || rho <= 0.0 {
            return Err(Error::Argument("lambda0 and rho must be positive".into()));
        }
        let kappa_min = 4.0 / (lambda0 * delta) * (2.0 * m.max(2) as f64 / delta).ln();
        let kappa = kappa_min * scale.max(1.0);
        let sigma = delta / (4.0 * kappa * rho);
        let theory_iters = (kappa * rho / delta).ceil() as usize;
        Ok(PackParams {
            delta,
            rho,
            lambda0,
            kappa,
            sigma,
            iter_cap: theory_iters.saturating_mul(crate::config::ITER_CAP_FACTOR),
        })
    }
}

/// Problem plugged into [`pack_solve`].
pub trait PackingProblem {
    type Point: Clone;
    type CId: Clone;

    /// Active constraint family at x. Must contain every constraint
    /// carrying non-negligible dual mass (in particular all near-maximum
    /// ratios). Truncating low-ratio constraints is safe.
    fn active_constraints(&mut self, x: &Self::Point) -> Result<Vec<ConstraintView<Self::CId>>>;

    /// A_c(x') / b_c for an active constraint at an arbitrary point.
    fn eval_ratio(&self, id: &Self::CId, x: &Self::Point) -> f64;

    /// Oracle: given the active family with normalized dual weights
    /// (summing to 1), return x' in P approximately minimizing
    /// sum_c w_c * A_c(x') / b_c.
    fn oracle(
        &mut self,
        x: &Self::Point,
        weighted: &[(ConstraintView<Self::CId>, f64)],
    ) -> Result<Self::Point>;

    /// Membership check for the polytope-side constraints.
    fn in_polytope(&self, x: &Self::Point) -> bool;

    /// Convex blend (1 - sigma) x + sigma x'.
    fn blend(&self, x: &Self::Point, xt: &Self::Point, sigma: f64) -> Self::Point;

    /// Full-family ratio list for potential monitoring when enumerable;
    /// the engine falls back to the active family otherwise.
    fn monitor_ratios(&mut self, x: &Self::Point) -> Option<Vec<f64>> {
        let _ = x;
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackStatus {
    /// lambda dropped to (1 - delta) * lambda0.
    Improved,
    /// (P1) and (P2) hold: x is 6 delta-optimal.
    Converged,
    /// Iteration cap hit without either exit.
    BudgetExhausted,
}

/// Per-iteration record for convergence plots and invariant checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PackIter {
    pub iter: usize,
    pub lambda: f64,
    pub p1_residual: f64,
    pub p2_holds: bool,
    pub log_potential_before: f64,
    pub log_potential_after: f64,
    pub potential_bound_ok: bool,
    pub sigma_used: f64,
}

pub struct PackOutcome<P> {
    pub x: P,
    pub lambda: f64,
    pub status: PackStatus,
    pub transcript: Vec<PackIter>,
}

fn log_potential(ratios: &[f64], kappa: f64) -> f64 {
    let scaled: Vec<f64> = ratios.iter().map(|r| kappa * r).collect();
    log_sum_exp(&scaled)
}

/// Run the packing loop from `x0` (which must lie in P, with
/// lambda(x0) = params.lambda0). Stops when lambda improves by (1 - delta),
/// when (P1) and (P2) certify 6 delta-optimality, or at the iteration cap.
///
/// The step size is chosen by a line search over a geometric grid that
/// always contains the reference step sigma = delta/(4 kappa rho): the
/// chosen step minimizes the potential over the grid, so the Lemma 3
/// decrease bound for the reference step carries over.
pub fn pack_solve<P: PackingProblem>(
    problem: &mut P,
    x0: P::Point,
    params: &PackParams,
    iter_cap: usize,
) -> Result<PackOutcome<P::Point>> {
    let delta = params.delta;
    let kappa = params.kappa;
    let mut x = x0;
    let mut transcript = Vec::new();
    let cap = iter_cap.min(params.iter_cap).max(1);
    for iter in 0..cap {
        let active = problem.active_constraints(&x)?;
        if active.is_empty() {
            return Ok(PackOutcome {
                x,
                lambda: 0.0,
                status: PackStatus::Converged,
                transcript,
            });
        }
        let lambda = active
            .iter()
            .map(|c| c.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        if lambda <= (1.0 - delta) * params.lambda0 {
            return Ok(PackOutcome {
                x,
                lambda,
                status: PackStatus::Improved,
                transcript,
            });
        }
        // normalized dual weights w_c = softmax(kappa * r_c)
        let logs: Vec<f64> = active.iter().map(|c| kappa * c.ratio).collect();
        let lse = log_sum_exp(&logs);
        let weights: Vec<f64> = logs.iter().map(|l| (l - lse).exp()).collect();
        let q_x: f64 = active.iter().zip(&weights).map(|(c, w)| w * c.ratio).sum();
        // (P1): q_x >= (1 - delta) lambda, by construction of the weights
        let p1_residual = q_x - (1.0 - delta) * lambda;
        if p1_residual < -1e-9 * lambda.abs().max(1.0) {
            return Err(Error::Internal(format!(
                "(P1) violated at iteration {iter}: residual {p1_residual}"
            )));
        }
        let weighted: Vec<(ConstraintView<P::CId>, f64)> = active
            .iter()
            .cloned()
            .zip(weights.iter().copied())
            .collect();
        let xt = problem.oracle(&x, &weighted)?;
        if !problem.in_polytope(&xt) {
            return Err(Error::OracleContract(
                "oracle returned a point outside P".into(),
            ));
        }
        let q_xt: f64 = active
            .iter()
            .zip(&weights)
            .map(|(c, w)| w * problem.eval_ratio(&c.id, &xt))
            .sum();
        let p2 = q_x - q_xt <= delta * (q_x + lambda) + 1e-12;
        if p2 {
            transcript.push(PackIter {
                iter,
                lambda,
                p1_residual,
                p2_holds: true,
                log_potential_before: lse,
                log_potential_after: lse,
                potential_bound_ok: true,
                sigma_used: 0.0,
            });
            return Ok(PackOutcome {
                x,
                lambda,
                status: PackStatus::Converged,
                transcript,
            });
        }
        // potential over the monitored family (full when enumerable)
        let pot_before = match problem.monitor_ratios(&x) {
            Some(r) => log_potential(&r, kappa),
            None => log_potential(
                &active.iter().map(|c| c.ratio).collect::<Vec<_>>(),
                kappa,
            ),
        };
        let sigma_f = params.sigma;
        let mut best = (sigma_f, f64::INFINITY);
        let mut s = sigma_f;
        loop {
            let cand = problem.blend(&x, &xt, s);
            let phi = match problem.monitor_ratios(&cand) {
                Some(r) => log_potential(&r, kappa),
                None => log_potential(
                    &active
                        .iter()
                        .map(|c| problem.eval_ratio(&c.id, &cand))
                        .collect::<Vec<_>>(),
                    kappa,
                ),
            };
            if phi < best.1 {
                best = (s, phi);
            }
            if s >= 1.0 {
                break;
            }
            s = (s * 4.0).min(1.0);
        }
        let (sigma_used, log_phi_after) = best;
        x = problem.blend(&x, &xt, sigma_used);
        let bound = pot_before + (1.0 - kappa * sigma_f * delta * lambda).max(1e-300).ln();
        let potential_bound_ok = log_phi_after <= bound + 1e-9;
        transcript.push(PackIter {
            iter,
            lambda,
            p1_residual,
            p2_holds: false,
            log_potential_before: pot_before,
            log_potential_after: log_phi_after,
            potential_bound_ok,
            sigma_used,
        });
        if !potential_bound_ok {
            return Err(Error::Internal(format!(
                "potential decrease bound failed at iteration {iter}: {pot_before} -> {log_phi_after}, bound {bound}"
            )));
        }
    }
    let active = problem.active_constraints(&x)?;
    let lambda = active.iter().map(|c| c.ratio).fold(0.0f64, f64::max);
    Ok(PackOutcome {
        x,
        lambda,
        status: PackStatus::BudgetExhausted,
        transcript,
    })
}

// ---------------------------------------------------------------------
// Fractional covering (max lambda s.t. Ax >= lambda b, x in P)
// ---------------------------------------------------------------------

pub trait CoveringProblem {
    type Point: Clone;

    /// Ratios A_i x / b_i over the (proxy) constraint family at x.
    fn ratios(&mut self, x: &Self::Point) -> Result<Vec<f64>>;

    /// Oracle: given normalized dual weights aligned with the last
    /// `ratios` call, return x' in P approximately maximizing
    /// sum_i w_i A_i(x') / b_i, together with that weighted value at x'.
    fn oracle(&mut self, x: &Self::Point, weights: &[f64]) -> Result<(Self::Point, f64)>;

    fn blend(&self, x: &Self::Point, xt: &Self::Point, sigma: f64) -> Self::Point;

    /// Certification of a candidate: the true min ratio, when the problem
    /// can afford to compute it. Drives the early success exit.
    fn certify(&mut self, x: &Self::Point) -> Option<f64> {
        let _ = x;
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverStatus {
    /// (C1) and (C2) hold.
    Converged,
    /// A candidate certified at or above the target lambda.
    CertifiedFeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverIter {
    pub iter: usize,
    pub lambda: f64,
    pub c1_holds: bool,
    pub c2_holds: bool,
    pub certified: Option<f64>,
    pub sigma_used: f64,
}

pub struct CoverOutcome<P> {
    pub x: P,
    pub lambda: f64,
    /// Best certified min-ratio over the run, with its candidate.
    pub best_certified: Option<(f64, P)>,
    pub status: CoverStatus,
    pub transcript: Vec<CoverIter>,
}

#[derive(Debug, Clone)]
pub struct CoverParams {
    pub delta: f64,
    pub rho: f64,
    pub kappa: f64,
    pub sigma: f64,
    /// Early-success threshold for certified candidates (None disables).
    pub target_lambda: Option<f64>,
    pub iter_budget: usize,
    /// Disable early exits so pass counts are seed-independent.
    pub run_full_budget: bool,
}

impl CoverParams {
    pub fn new(delta: f64, rho: f64, lambda0: f64, m: usize, iter_budget: usize) -> Result<Self> {
        if !(0.0..0.5).contains(&delta) || delta == 0.0 {
            return Err(Error::Argument(format!("delta out of range: {delta}")));
        }
        let kappa = 4.0 / (lambda0.max(1e-9) * delta) * (2.0 * m.max(2) as f64 / delta).ln();
        let sigma = delta / (4.0 * kappa * rho);
        Ok(CoverParams {
            delta,
            rho,
            kappa,
            sigma,
            target_lambda: None,
            iter_budget,
            run_full_budget: false,
        })
    }
}

/// Covering loop: dual weights use the negative exponent
/// y_i = (1/b_i) exp(-kappa r_i); the oracle maximizes. Exits on (C1) and
/// (C2), on a certified candidate reaching the target, or on budget
/// exhaustion (returning the best certified candidate seen).
pub fn cover_solve<P: CoveringProblem>(
    problem: &mut P,
    x0: P::Point,
    params: &CoverParams,
) -> Result<CoverOutcome<P::Point>> {
    let delta = params.delta;
    let kappa = params.kappa;
    let mut x = x0;
    let mut transcript = Vec::new();
    let mut best_certified: Option<(f64, P::Point)> = None;
    fn consider<Pt: Clone>(cand: &Pt, lam: Option<f64>, best: &mut Option<(f64, Pt)>) {
        if let Some(l) = lam {
            let better = match best {
                None => true,
                Some((bl, _)) => l > *bl,
            };
            if better {
                *best = Some((l, cand.clone()));
            }
        }
    }
    let mut lambda = 0.0;
    for iter in 0..params.iter_budget.max(1) {
        let ratios = problem.ratios(&x)?;
        if ratios.is_empty() {
            return Ok(CoverOutcome {
                x,
                lambda: f64::INFINITY,
                best_certified,
                status: CoverStatus::Converged,
                transcript,
            });
        }
        lambda = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let cert = problem.certify(&x);
        consider(&x, cert, &mut best_certified);
        if !params.run_full_budget {
            if let (Some(target), Some((bl, _))) = (params.target_lambda, &best_certified) {
                if *bl >= target {
                    let (bl, bx) = best_certified.clone().unwrap();
                    return Ok(CoverOutcome {
                        x: bx,
                        lambda: bl,
                        best_certified,
                        status: CoverStatus::CertifiedFeasible,
                        transcript,
                    });
                }
            }
        }
        // normalized weights: softmax(-kappa r)
        let logs: Vec<f64> = ratios.iter().map(|r| -kappa * r).collect();
        let lse = log_sum_exp(&logs);
        let weights: Vec<f64> = logs.iter().map(|l| (l - lse).exp()).collect();
        let q_x: f64 = ratios.iter().zip(&weights).map(|(r, w)| w * r).sum();
        let c1 = q_x <= (1.0 + delta) * lambda + 1e-12;
        let (xt, q_xt) = problem.oracle(&x, &weights)?;
        let cert_t = problem.certify(&xt);
        consider(&xt, cert_t, &mut best_certified);
        let c2 = q_xt - q_x <= delta * (q_x + lambda) + 1e-12;
        transcript.push(CoverIter {
            iter,
            lambda,
            c1_holds: c1,
            c2_holds: c2,
            certified: cert,
            sigma_used: params.sigma,
        });
        if c1 && c2 && !params.run_full_budget {
            return Ok(CoverOutcome {
                x,
                lambda,
                best_certified,
                status: CoverStatus::Converged,
                transcript,
            });
        }
        // line search on the covering potential sum exp(-kappa r)
        let sigma_f = params.sigma;
        let mut best_step = (sigma_f, f64::INFINITY);
        let mut s = sigma_f;
        loop {
            let cand = problem.blend(&x, &xt, s);
            let r = problem.ratios(&cand)?;
            let phi = log_sum_exp(&r.iter().map(|v| -kappa * v).collect::<Vec<_>>());
            if phi < best_step.1 {
                best_step = (s, phi);
            }
            if s >= 1.0 {
                break;
            }
            s = (s * 4.0).min(1.0);
        }
        x = problem.blend(&x, &xt, best_step.0);
        if let Some(last) = transcript.last_mut() {
            last.sigma_used = best_step.0;
        }
    }
    let cert = problem.certify(&x);
    consider(&x, cert, &mut best_certified);
    Ok(CoverOutcome {
        x,
        lambda,
        best_certified,
        status: CoverStatus::BudgetExhausted,
        transcript,
    })
}

// ---------------------------------------------------------------------
// Multiplicative weights update meta-method
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MwuParams {
    pub n_constraints: usize,
    pub rho: f64,
    pub ell: f64,
    pub delta: f64,
    pub eps_step: f64,
    /// Theoretical horizon 2 rho ln(n) / (delta eps).
    pub t_theory: usize,
    /// Rounds actually budgeted for the run.
    pub t_budget: usize,
}

impl MwuParams {
    pub fn new(
        n_constraints: usize,
        rho: f64,
        ell: f64,
        delta: f64,
        t_budget: usize,
    ) -> Result<Self> {
        if ell > rho {
            return Err(Error::Argument(format!(
                "admissibility needs ell <= rho, got ell {ell} > rho {rho}"
            )));
        }
        if delta <= 0.0 {
            return Err(Error::Argument("delta must be positive".into()));
        }
        let eps_step = (delta / (4.0 * ell.max(1e-12))).min(0.5);
        let n = n_constraints.max(2) as f64;
        let t_theory = (2.0 * rho * n.ln() / (delta * eps_step)).ceil() as usize;
        Ok(MwuParams {
            n_constraints,
            rho,
            ell,
            delta,
            eps_step,
            t_theory,
            t_budget: t_budget.max(1),
        })
    }
}

/// One oracle answer: either a dual witness with its per-constraint
/// violations M(i, y^t) and objective value, or a failure that surfaces a
/// primal certificate.
pub enum MwuRound<W, C> {
    Witness {
        witness: W,
        violations: Vec<f64>,
        objective: f64,
        label: &'static str,
    },
    Failure(C),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MwuIter {
    pub round: usize,
    pub expected_violation: f64,
    pub objective: f64,
    pub label: &'static str,
}

pub enum MwuStatus<C> {
    Solved,
    PrimalCertificate(C),
}

pub struct MwuOutcome<W, C> {
    pub status: MwuStatus<C>,
    pub witnesses: Vec<W>,
    pub transcript: Vec<MwuIter>,
    /// Sum over rounds of M(i, y^t), per constraint.
    pub violation_sums: Vec<f64>,
    /// Sum over rounds of the expected violation M(D^t, y^t).
    pub expected_violation_sum: f64,
    pub rounds: usize,
    pub params: MwuParams,
}

impl<W, C> MwuOutcome<W, C> {
    /// Theorem-6 regret inequality on the transcript: for every constraint
    /// i, (1 - eps) sum_t M(i, y^t) <= slack + sum_t M(D^t, y^t), where
    /// slack = min(rho ln(n) / eps, delta * T_theory). The first form is
    /// the prefix-valid potential bound; the second is the printed one.
    pub fn regret_ok(&self) -> bool {
        if self.rounds == 0 {
            return true;
        }
        let p = &self.params;
        let n = p.n_constraints.max(2) as f64;
        let slack = (p.rho * n.ln() / p.eps_step).min(p.delta * p.t_theory as f64);
        self.violation_sums
            .iter()
            .all(|&s| (1.0 - p.eps_step) * s <= slack + self.expected_violation_sum + 1e-6)
    }
}

/// Run the MWU loop. The oracle sees the current normalized weights u_i
/// and the round index; admissibility of every witness is asserted.
/// `stop_early` is polled after each accepted witness; returning true ends
/// the run (the regret bound is valid at every prefix).
pub fn mwu_solve<W, C, O, S>(
    params: &MwuParams,
    mut oracle: O,
    mut stop_early: S,
) -> Result<MwuOutcome<W, C>>
where
    O: FnMut(&[f64], usize) -> Result<MwuRound<W, C>>,
    S: FnMut(usize) -> bool,
{
    let n = params.n_constraints;
    let mut log_u = vec![0.0f64; n];
    let mut witnesses = Vec::new();
    let mut transcript = Vec::new();
    let mut violation_sums = vec![0.0f64; n];
    let mut expected_violation_sum = 0.0;
    let up = (1.0 + params.eps_step).ln();
    let down = (1.0 - params.eps_step).ln();
    for round in 0..params.t_budget {
        let lse = log_sum_exp(&log_u);
        let u: Vec<f64> = log_u.iter().map(|l| (l - lse).exp()).collect();
        match oracle(&u, round)? {
            MwuRound::Failure(cert) => {
                transcript.push(MwuIter {
                    round,
                    expected_violation: 0.0,
                    objective: 0.0,
                    label: "failure",
                });
                return Ok(MwuOutcome {
                    status: MwuStatus::PrimalCertificate(cert),
                    witnesses,
                    transcript,
                    violation_sums,
                    expected_violation_sum,
                    rounds: round + 1,
                    params: params.clone(),
                });
            }
            MwuRound::Witness {
                witness,
                violations,
                objective,
                label,
            } => {
                if violations.len() != n {
                    return Err(Error::OracleContract(format!(
                        "violation vector has length {} != {}",
                        violations.len(),
                        n
                    )));
                }
                let tol = 1e-9 * params.rho.max(1.0);
                for (i, &m) in violations.iter().enumerate() {
                    if m < -params.ell - tol || m > params.rho + tol {
                        return Err(Error::OracleContract(format!(
                            "admissibility violated at round {round}: M({i}) = {m} outside [{}, {}]",
                            -params.ell, params.rho
                        )));
                    }
                }
                let expected: f64 = u.iter().zip(&violations).map(|(ui, mi)| ui * mi).sum();
                expected_violation_sum += expected;
                for (s, &m) in violation_sums.iter_mut().zip(&violations) {
                    *s += m;
                }
                for (lu, &m) in log_u.iter_mut().zip(&violations) {
                    if m >= 0.0 {
                        *lu += m / params.rho * up;
                    } else {
                        *lu += (-m) / params.rho * down;
                    }
                }
                transcript.push(MwuIter {
                    round,
                    expected_violation: expected,
                    objective,
                    label,
                });
                witnesses.push(witness);
                if stop_early(round) {
                    break;
                }
            }
        }
    }
    let rounds = transcript.len();
    Ok(MwuOutcome {
        status: MwuStatus::Solved,
        witnesses,
        transcript,
        violation_sums,
        expected_violation_sum,
        rounds,
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // min lambda s.t. A x <= lambda b over x in conv(vertices); the oracle
    // enumerates vertices.
    struct ToyPack {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        vertices: Vec<Vec<f64>>,
    }

    impl ToyPack {
        fn ratio(&self, row: usize, x: &[f64]) -> f64 {
            let ax: f64 = self.a[row].iter().zip(x).map(|(a, v)| a * v).sum();
            ax / self.b[row]
        }
    }

    impl PackingProblem for ToyPack {
        type Point = Vec<f64>;
        type CId = usize;

        fn active_constraints(&mut self, x: &Vec<f64>) -> Result<Vec<ConstraintView<usize>>> {
            Ok((0..self.a.len())
                .map(|i| ConstraintView {
                    id: i,
                    ratio: self.ratio(i, x),
                    b: self.b[i],
                })
                .collect())
        }

        fn eval_ratio(&self, id: &usize, x: &Vec<f64>) -> f64 {
            self.ratio(*id, x)
        }

        fn oracle(
            &mut self,
            _x: &Vec<f64>,
            weighted: &[(ConstraintView<usize>, f64)],
        ) -> Result<Vec<f64>> {
            let score = |x: &Vec<f64>| -> f64 {
                weighted.iter().map(|(c, w)| w * self.ratio(c.id, x)).sum()
            };
            Ok(self
                .vertices
                .iter()
                .min_by(|a, b| score(a).partial_cmp(&score(b)).unwrap())
                .unwrap()
                .clone())
        }

        fn in_polytope(&self, _x: &Vec<f64>) -> bool {
            true // convex hull of vertices; blends stay inside
        }

        fn blend(&self, x: &Vec<f64>, xt: &Vec<f64>, sigma: f64) -> Vec<f64> {
            x.iter()
                .zip(xt)
                .map(|(a, b)| (1.0 - sigma) * a + sigma * b)
                .collect()
        }
    }

    #[test]
    fn pack_single_point_polytope_converges() {
        // P = {x = 1}, single constraint x <= lambda
        let mut p = ToyPack {
            a: vec![vec![1.0]],
            b: vec![1.0],
            vertices: vec![vec![1.0]],
        };
        let params = PackParams::standard(0.05, 1.0, 1.0, 1).unwrap();
        let out = pack_solve(&mut p, vec![1.0], &params, 50).unwrap();
        assert_eq!(out.status, PackStatus::Converged);
        assert!((out.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pack_two_constraint_toy_near_optimal() {
        // P = conv{(1,0),(0,1),(0.5,0.5)}; constraints x1 + x2 <= 2 lambda
        // and x1 <= lambda. Vertex enumeration gives lambda* = 1/2 at (0,1).
        let delta = 0.05;
        let mut p = ToyPack {
            a: vec![vec![1.0, 1.0], vec![1.0, 0.0]],
            b: vec![2.0, 1.0],
            vertices: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
        };
        let lambda_opt = {
            let cands = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
            crate::exact::exact_lp_by_enumeration(
                &cands,
                |_| true,
                |x| ((x[0] + x[1]) / 2.0).max(x[0]),
                false,
            )
            .unwrap()
            .0
        };
        assert!((lambda_opt - 0.5).abs() < 1e-12);
        let params = PackParams::standard(delta, 1.0, 1.0, 2).unwrap();
        let out = pack_solve(&mut p, vec![1.0, 0.0], &params, 4000).unwrap();
        assert!(
            out.lambda <= (1.0 + 6.0 * delta) * lambda_opt + 1e-9,
            "lambda {} not within 6 delta of {}",
            out.lambda,
            lambda_opt
        );
        for it in &out.transcript {
            assert!(it.p1_residual >= -1e-9);
            assert!(it.potential_bound_ok);
        }
    }

    #[test]
    fn pack_stalling_oracle_decreases_potential() {
        // an oracle that echoes a fixed vertex: while (P2) fails the
        // potential must decrease geometrically (Lemma 3)
        struct Echo(ToyPack);
        impl PackingProblem for Echo {
            type Point = Vec<f64>;
            type CId = usize;
            fn active_constraints(&mut self, x: &Vec<f64>) -> Result<Vec<ConstraintView<usize>>> {
                self.0.active_constraints(x)
            }
            fn eval_ratio(&self, id: &usize, x: &Vec<f64>) -> f64 {
                self.0.eval_ratio(id, x)
            }
            fn oracle(
                &mut self,
                _x: &Vec<f64>,
                _w: &[(ConstraintView<usize>, f64)],
            ) -> Result<Vec<f64>> {
                Ok(vec![0.0, 1.0])
            }
            fn in_polytope(&self, x: &Vec<f64>) -> bool {
                self.0.in_polytope(x)
            }
            fn blend(&self, x: &Vec<f64>, xt: &Vec<f64>, sigma: f64) -> Vec<f64> {
                self.0.blend(x, xt, sigma)
            }
        }
        let mut p = Echo(ToyPack {
            a: vec![vec![1.0, 1.0], vec![1.0, 0.0]],
            b: vec![2.0, 1.0],
            vertices: vec![],
        });
        let params = PackParams::standard(0.05, 1.0, 1.0, 2).unwrap();
        let out = pack_solve(&mut p, vec![1.0, 0.0], &params, 30).unwrap();
        let mut saw_p2_failure = false;
        for it in &out.transcript {
            if !it.p2_holds {
                saw_p2_failure = true;
                assert!(it.potential_bound_ok, "iteration {} broke Lemma 3", it.iter);
                assert!(it.log_potential_after < it.log_potential_before);
            }
        }
        assert!(saw_p2_failure);
    }

    struct ToyCover {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        vertices: Vec<Vec<f64>>,
    }

    impl ToyCover {
        fn ratio(&self, row: usize, x: &[f64]) -> f64 {
            let ax: f64 = self.a[row].iter().zip(x).map(|(a, v)| a * v).sum();
            ax / self.b[row]
        }
    }

    impl CoveringProblem for ToyCover {
        type Point = Vec<f64>;

        fn ratios(&mut self, x: &Vec<f64>) -> Result<Vec<f64>> {
            Ok((0..self.a.len()).map(|i| self.ratio(i, x)).collect())
        }

        fn oracle(&mut self, _x: &Vec<f64>, weights: &[f64]) -> Result<(Vec<f64>, f64)> {
            let score = |x: &Vec<f64>| -> f64 {
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * self.ratio(i, x))
                    .sum()
            };
            let best = self
                .vertices
                .iter()
                .max_by(|a, b| score(a).partial_cmp(&score(b)).unwrap())
                .unwrap()
                .clone();
            let v = score(&best);
            Ok((best, v))
        }

        fn blend(&self, x: &Vec<f64>, xt: &Vec<f64>, sigma: f64) -> Vec<f64> {
            x.iter()
                .zip(xt)
                .map(|(a, b)| (1.0 - sigma) * a + sigma * b)
                .collect()
        }

        fn certify(&mut self, x: &Vec<f64>) -> Option<f64> {
            Some(
                (0..self.a.len())
                    .map(|i| self.ratio(i, x))
                    .fold(f64::INFINITY, f64::min),
            )
        }
    }

    #[test]
    fn cover_single_point_converges_immediately() {
        let mut p = ToyCover {
            a: vec![vec![1.0]],
            b: vec![1.0],
            vertices: vec![vec![1.0]],
        };
        let params = CoverParams::new(0.05, 1.0, 1.0, 1, 40).unwrap();
        let out = cover_solve(&mut p, vec![1.0], &params).unwrap();
        assert!(matches!(
            out.status,
            CoverStatus::Converged | CoverStatus::CertifiedFeasible
        ));
    }

    #[test]
    fn cover_three_constraint_toy() {
        // rows x1 >= lambda, x2 >= lambda, (x1 + x2)/1.2 >= lambda over
        // conv{(1,0),(0,1),(0.6,0.6)}: optimum lambda* = 0.6 at (0.6,0.6)
        let eps = 0.05;
        let mut p = ToyCover {
            a: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            b: vec![1.0, 1.0, 1.2],
            vertices: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6]],
        };
        let params = CoverParams::new(eps, 1.2, 0.5, 3, 4000).unwrap();
        let out = cover_solve(&mut p, vec![0.5, 0.5], &params).unwrap();
        let best = out
            .best_certified
            .as_ref()
            .map(|(l, _)| *l)
            .unwrap_or(out.lambda);
        assert!(
            best >= (1.0 - 3.0 * eps) * 0.6 - 1e-9,
            "lambda {best} below (1 - 3 eps) * 0.6"
        );
    }

    #[test]
    fn mwu_constant_feasible_witness() {
        // oracle always returns the same witness with M <= 0 everywhere:
        // the average equals it and final violations stay <= 0 <= 2 delta
        let params = MwuParams::new(3, 1.0, 1.0, 0.1, 200).unwrap();
        let out = mwu_solve(
            &params,
            |_u, _round| {
                Ok(MwuRound::<f64, ()>::Witness {
                    witness: 7.0,
                    violations: vec![-0.5, -0.2, 0.0],
                    objective: 1.0,
                    label: "const",
                })
            },
            |_| false,
        )
        .unwrap();
        assert!(matches!(out.status, MwuStatus::Solved));
        assert_eq!(out.witnesses.len(), out.rounds);
        assert!(out.witnesses.iter().all(|&w| w == 7.0));
        for &s in &out.violation_sums {
            assert!(s / out.rounds as f64 <= 2.0 * params.delta + 1e-9);
        }
        assert!(out.regret_ok());
    }

    #[test]
    fn mwu_alternating_witnesses_average_out() {
        // adversarial alternation: each witness violates the currently
        // lighter constraint by +1 and satisfies the other at -1; the
        // averaged violation must end below 2 delta by Theorem 6
        let delta = 0.1;
        let probe = MwuParams::new(2, 1.0, 1.0, delta, 1).unwrap();
        let params = MwuParams::new(2, 1.0, 1.0, delta, probe.t_theory).unwrap();
        let out = mwu_solve(
            &params,
            |u: &[f64], _round| {
                // violate the lighter constraint so the expected violation
                // stays nonpositive (the witness must be admissible)
                let m = if u[0] <= u[1] {
                    vec![1.0, -1.0]
                } else {
                    vec![-1.0, 1.0]
                };
                Ok(MwuRound::<usize, ()>::Witness {
                    witness: 0,
                    violations: m,
                    objective: 1.0,
                    label: "alt",
                })
            },
            |_| false,
        )
        .unwrap();
        assert!(out.regret_ok());
        for &s in &out.violation_sums {
            let avg = s / out.rounds as f64;
            assert!(avg <= 2.0 * delta + 1e-9, "avg violation {avg}");
        }
    }

    #[test]
    fn mwu_failure_first_round() {
        let params = MwuParams::new(2, 1.0, 1.0, 0.1, 50).unwrap();
        let out = mwu_solve(
            &params,
            |_u, _round| Ok(MwuRound::<usize, &'static str>::Failure("primal")),
            |_| false,
        )
        .unwrap();
        match out.status {
            MwuStatus::PrimalCertificate(c) => assert_eq!(c, "primal"),
            _ => panic!("expected failure status"),
        }
        assert_eq!(out.transcript.len(), 1);
    }

    #[test]
    fn mwu_rejects_inadmissible_witness() {
        let params = MwuParams::new(2, 1.0, 1.0, 0.1, 50).unwrap();
        let res = mwu_solve(
            &params,
            |_u, _round| {
                Ok(MwuRound::<usize, ()>::Witness {
                    witness: 0,
                    violations: vec![5.0, 0.0], // above rho = 1
                    objective: 1.0,
                    label: "bad",
                })
            },
            |_| false,
        );
        assert!(matches!(res, Err(Error::OracleContract(_))));
    }

    #[test]
    fn mwu_ell_greater_than_rho_rejected() {
        assert!(MwuParams::new(2, 1.0, 2.0, 0.1, 10).is_err());
    }
}
