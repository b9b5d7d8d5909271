//! Bounded-variable primal simplex with a dual-simplex reoptimization path.
//!
//! The engine works on an equality standard form `A x = b`, `l <= x <= u`
//! where every model row gets one slack column and, when the initial slack
//! basis is infeasible, an artificial column driven out by a phase-I solve.
//! Internally the engine always minimizes; callers flip signs for
//! maximization models.
//!
//! Cold solves run phase I (artificial costs) then phase II. Warm solves,
//! used by branch-and-bound after a bound change, restore a previous basis
//! and repair primal feasibility with bounded dual-simplex pivots before a
//! final primal cleanup; any numerical trouble falls back to a cold solve.
//! Pricing is Dantzig's rule; Bland's rule takes over after a stall of 50
//! pivots without objective progress and is switched off again once the
//! objective moves.

// Indexed loops are clearer for the dense kernel arithmetic below.
#![allow(clippy::needless_range_loop)]

use crate::model::{ConstraintSense, Model, ObjectiveSense};

const PIVOT_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
const DJ_TOL: f64 = 1e-9;
const STALL_LIMIT: u32 = 50;

/// Equality standard form of a model: structural columns first, then one
/// slack per row. Costs are stored for internal minimization.
pub(crate) struct StdForm {
    pub m: usize,
    pub n_struct: usize,
    /// struct + slack column count (artificials are engine-local).
    pub n: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Internal minimization costs (zero on slacks).
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
    pub maximize: bool,
    /// Scale used for feasibility thresholds.
    pub rhs_scale: f64,
}

impl StdForm {
    pub fn from_model(model: &Model) -> StdForm {
        let m = model.num_constraints();
        let n_struct = model.num_variables();
        let n = n_struct + m;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);

        for v in model.variables() {
            lower.push(v.lower);
            upper.push(v.upper);
        }

        let mut rhs = Vec::with_capacity(m);
        for (r, con) in model.constraints().iter().enumerate() {
            for &(var, coef) in &con.terms {
                if coef != 0.0 {
                    cols[var.index()].push((r, coef));
                }
            }
            // Slack column: a.x + s = rhs with s sign-restricted by the sense.
            cols[n_struct + r].push((r, 1.0));
            let (slo, shi) = match con.sense {
                ConstraintSense::Le => (0.0, f64::INFINITY),
                ConstraintSense::Eq => (0.0, 0.0),
                ConstraintSense::Ge => (f64::NEG_INFINITY, 0.0),
            };
            lower.push(slo);
            upper.push(shi);
            rhs.push(con.rhs);
        }

        let maximize = model.sense() == ObjectiveSense::Maximize;
        let mut cost = vec![0.0; n];
        for &(var, coef) in model.objective() {
            cost[var.index()] += if maximize { -coef } else { coef };
        }

        let rhs_scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        StdForm {
            m,
            n_struct,
            n,
            cols,
            lower,
            upper,
            cost,
            rhs,
            maximize,
            rhs_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Self-contained basis snapshot used to warm start child node solves. The
/// artificial columns alive at snapshot time are carried along because basis
/// indices may point at them.
#[derive(Clone)]
pub(crate) struct Snapshot {
    pub basis: Vec<usize>,
    pub state: Vec<VarState>,
    /// Artificial columns (each a single `(row, coef)` entry), fixed at zero.
    pub artificials: Vec<(usize, f64)>,
}

#[derive(Debug)]
pub(crate) enum LpTermination {
    Optimal {
        /// Internal (minimization) objective.
        objective: f64,
        /// Internal dual bound computed from the final multipliers.
        dual_objective: f64,
        /// Structural variable values, clamped into their bounds.
        x: Vec<f64>,
    },
    Infeasible {
        row: usize,
    },
    Unbounded {
        /// Improving ray restricted to structural variables.
        ray: Vec<(usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum EngineError {
    IterationLimit,
    Numerics(String),
}

enum PrimalEnd {
    Optimal,
    Unbounded { col: usize, sig: f64 },
}

enum DualEnd {
    Feasible,
    InfeasibleRow(usize),
    IterationLimit,
}

pub(crate) struct Engine<'a> {
    form: &'a StdForm,
    m: usize,
    /// Total columns including artificials.
    n: usize,
    n_real: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    feas_tol: f64,
    basis: Vec<usize>,
    state: Vec<VarState>,
    /// Dense basis inverse, row major, m x m.
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Bumped at the start of every solve; identifies the basis the engine is
    /// sitting on between solves.
    generation: u64,
    scratch_y: Vec<f64>,
    scratch_alpha: Vec<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(form: &'a StdForm, feas_tol: f64) -> Engine<'a> {
        let m = form.m;
        Engine {
            form,
            m,
            n: form.n,
            n_real: form.n,
            cols: form.cols.clone(),
            lower: form.lower.clone(),
            upper: form.upper.clone(),
            rhs: form.rhs.clone(),
            feas_tol,
            basis: Vec::new(),
            state: Vec::new(),
            binv: Vec::new(),
            xb: vec![0.0; m],
            generation: 0,
            scratch_y: vec![0.0; m],
            scratch_alpha: vec![0.0; m],
        }
    }

    /// Reset working bounds to the base form plus the given overrides.
    /// Artificial bounds (all fixed at zero) are untouched.
    pub fn apply_bounds(&mut self, overrides: &[(usize, f64, f64)]) {
        self.lower[..self.form.n].copy_from_slice(&self.form.lower);
        self.upper[..self.form.n].copy_from_slice(&self.form.upper);
        for &(j, lo, hi) in overrides {
            self.lower[j] = lo;
            self.upper[j] = hi;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            basis: self.basis.clone(),
            state: self.state.clone(),
            artificials: self.cols[self.n_real..self.n]
                .iter()
                .map(|c| c[0])
                .collect(),
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    fn feas_threshold(&self) -> f64 {
        self.feas_tol * self.form.rhs_scale
    }

    #[inline]
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic => unreachable!("basic variable has no nonbasic value"),
        }
    }

    fn preferred_state(&self, j: usize) -> VarState {
        if self.lower[j].is_finite() {
            VarState::AtLower
        } else if self.upper[j].is_finite() {
            VarState::AtUpper
        } else {
            VarState::Free
        }
    }

    /// Rebuild the dense basis inverse from the basis column set.
    fn refactor(&mut self) -> Result<(), EngineError> {
        let m = self.m;
        let w = 2 * m;
        // [B | I] reduced in place by Gauss-Jordan with partial pivoting.
        let mut mat = vec![0.0f64; m * w];
        for (slot, &j) in self.basis.iter().enumerate() {
            for &(row, coef) in &self.cols[j] {
                mat[row * w + slot] = coef;
            }
        }
        for r in 0..m {
            mat[r * w + m + r] = 1.0;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = mat[col * w + col].abs();
            for r in (col + 1)..m {
                let v = mat[r * w + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return Err(EngineError::Numerics("singular basis".to_string()));
            }
            if piv_row != col {
                let (lo, hi) = mat.split_at_mut(piv_row * w);
                lo[col * w..col * w + w].swap_with_slice(&mut hi[..w]);
            }
            let inv = 1.0 / mat[col * w + col];
            for c in 0..w {
                mat[col * w + c] *= inv;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = mat[r * w + col];
                if f != 0.0 {
                    for c in 0..w {
                        mat[r * w + c] -= f * mat[col * w + c];
                    }
                }
            }
        }
        self.binv.resize(m * m, 0.0);
        for r in 0..m {
            for c in 0..m {
                self.binv[r * m + c] = mat[r * w + m + c];
            }
        }
        Ok(())
    }

    /// Recompute basic values from scratch: xb = Binv (b - N x_N).
    fn compute_xb(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.n {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    r[row] -= coef * v;
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (rv, bv) in r.iter().zip(row.iter()) {
                acc += rv * bv;
            }
            self.xb[i] = acc;
        }
    }

    /// alpha = Binv * A_j, into scratch_alpha.
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        self.scratch_alpha.iter_mut().for_each(|v| *v = 0.0);
        for &(row, coef) in &self.cols[j] {
            for i in 0..m {
                self.scratch_alpha[i] += coef * self.binv[i * m + row];
            }
        }
    }

    /// y = c_B^T Binv, into scratch_y.
    fn btran_costs(&mut self, cost: &[f64]) {
        let m = self.m;
        self.scratch_y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yv, bv) in self.scratch_y.iter_mut().zip(row.iter()) {
                    *yv += cb * bv;
                }
            }
        }
    }

    #[inline]
    fn reduced_cost(&self, j: usize, cost: &[f64]) -> f64 {
        let mut d = cost[j];
        for &(row, coef) in &self.cols[j] {
            d -= self.scratch_y[row] * coef;
        }
        d
    }

    /// Rank-1 update of Binv for a pivot on `row`; scratch_alpha holds the
    /// entering column.
    fn update_binv(&mut self, row: usize) {
        let m = self.m;
        let inv = 1.0 / self.scratch_alpha[row];
        let prow_start = row * m;
        for c in 0..m {
            self.binv[prow_start + c] *= inv;
        }
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = self.scratch_alpha[i];
            if f != 0.0 {
                for c in 0..m {
                    self.binv[i * m + c] -= f * self.binv[prow_start + c];
                }
            }
        }
    }

    /// Build a fresh slack/artificial starting basis. Returns true when a
    /// phase-I solve is required.
    fn cold_start(&mut self) -> bool {
        let m = self.m;
        let n_real = self.form.n;
        self.n_real = n_real;
        self.cols.truncate(n_real);
        self.lower.truncate(n_real);
        self.upper.truncate(n_real);
        self.n = n_real;

        self.state = vec![VarState::AtLower; n_real];
        for j in 0..self.form.n_struct {
            self.state[j] = self.preferred_state(j);
        }

        let mut res = self.rhs.clone();
        for j in 0..self.form.n_struct {
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    res[row] -= coef * v;
                }
            }
        }

        self.basis = vec![usize::MAX; m];
        let mut diag = vec![1.0f64; m];
        let mut needs_phase1 = false;
        let tol = self.feas_threshold();
        for r in 0..m {
            let sl = self.form.n_struct + r;
            let (slo, shi) = (self.lower[sl], self.upper[sl]);
            if res[r] >= slo - tol && res[r] <= shi + tol {
                self.basis[r] = sl;
                self.state[sl] = VarState::Basic;
                self.xb[r] = res[r];
            } else {
                // Slack parks on its nearest bound; an artificial column
                // absorbs the remaining residual.
                let sval = res[r].clamp(slo, shi);
                self.state[sl] = if sval == slo {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let rem = res[r] - sval;
                let coef = if rem >= 0.0 { 1.0 } else { -1.0 };
                let art = self.n;
                self.cols.push(vec![(r, coef)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.state.push(VarState::Basic);
                self.n += 1;
                self.basis[r] = art;
                self.xb[r] = rem.abs();
                diag[r] = coef;
                needs_phase1 = true;
            }
        }

        self.binv.resize(m * m, 0.0);
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..m {
            self.binv[r * m + r] = 1.0 / diag[r];
        }
        needs_phase1
    }

    fn current_objective(&self, cost: &[f64]) -> f64 {
        let mut obj = 0.0;
        for j in 0..self.n {
            if self.state[j] == VarState::Basic {
                continue;
            }
            obj += cost[j] * self.nonbasic_value(j);
        }
        for (r, &j) in self.basis.iter().enumerate() {
            obj += cost[j] * self.xb[r];
        }
        obj
    }

    /// Primal simplex loop minimizing `cost`. Assumes a primal-feasible basis.
    fn primal(&mut self, cost: &[f64]) -> Result<PrimalEnd, EngineError> {
        let iter_cap = 50_000 + 200 * self.m as u64;
        let mut iters: u64 = 0;
        let mut stall: u32 = 0;
        let mut bland = false;
        let mut obj = self.current_objective(cost);

        loop {
            iters += 1;
            if iters > iter_cap {
                return Err(EngineError::IterationLimit);
            }
            self.btran_costs(cost);

            // Pricing: Dantzig by default, lowest improving index under Bland.
            let mut enter: Option<(usize, f64, f64)> = None; // (col, sig, score)
            for j in 0..self.n {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, cost);
                let cand = match st {
                    VarState::AtLower if d < -DJ_TOL => Some((1.0, -d)),
                    VarState::AtUpper if d > DJ_TOL => Some((-1.0, d)),
                    VarState::Free if d.abs() > DJ_TOL => {
                        Some((if d > 0.0 { -1.0 } else { 1.0 }, d.abs()))
                    }
                    _ => None,
                };
                let Some((sig, score)) = cand else { continue };
                if bland {
                    enter = Some((j, sig, score));
                    break;
                }
                if enter.as_ref().is_none_or(|&(_, _, best)| score > best) {
                    enter = Some((j, sig, score));
                }
            }
            let Some((q, sig, _)) = enter else {
                return Ok(PrimalEnd::Optimal);
            };

            self.ftran(q);

            // Ratio test over basic rows; ties prefer the larger pivot unless
            // Bland is active, in which case the lowest variable id wins.
            let mut t_best = f64::INFINITY;
            let mut leave: Option<(usize, VarState)> = None;
            for r in 0..self.m {
                let a = self.scratch_alpha[r];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -sig * a;
                let bj = self.basis[r];
                let (t_r, hit) = if delta > 0.0 {
                    if !self.upper[bj].is_finite() {
                        continue;
                    }
                    ((self.upper[bj] - self.xb[r]).max(0.0) / delta, VarState::AtUpper)
                } else {
                    if !self.lower[bj].is_finite() {
                        continue;
                    }
                    ((self.xb[r] - self.lower[bj]).max(0.0) / (-delta), VarState::AtLower)
                };
                let better = match leave {
                    None => t_r < t_best,
                    Some((lr, _)) => {
                        if t_r < t_best - TIE_TOL {
                            true
                        } else if t_r <= t_best + TIE_TOL {
                            if bland {
                                bj < self.basis[lr]
                            } else {
                                a.abs() > self.scratch_alpha[lr].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    t_best = t_best.min(t_r);
                    leave = Some((r, hit));
                }
            }

            let range = self.upper[q] - self.lower[q];
            if range.is_finite() && range < t_best {
                // Bound flip: the entering variable runs to its other bound.
                for r in 0..self.m {
                    let a = self.scratch_alpha[r];
                    if a != 0.0 {
                        self.xb[r] -= sig * a * range;
                    }
                }
                self.state[q] = match self.state[q] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    s => s,
                };
                let d = self.reduced_cost(q, cost);
                obj += d * sig * range;
                stall = 0;
                bland = false;
                continue;
            }

            let Some((rr, hit)) = leave else {
                return Ok(PrimalEnd::Unbounded { col: q, sig });
            };

            let t = t_best;
            let d_enter = self.reduced_cost(q, cost);
            let entering_value = self.nonbasic_value(q) + sig * t;
            for r in 0..self.m {
                let a = self.scratch_alpha[r];
                if a != 0.0 {
                    self.xb[r] -= sig * a * t;
                }
            }
            let lv = self.basis[rr];
            self.state[lv] = hit;
            self.update_binv(rr);
            self.basis[rr] = q;
            self.state[q] = VarState::Basic;
            self.xb[rr] = entering_value;

            let gain = d_enter * sig * t;
            obj += gain;
            if gain < -1e-12 * (1.0 + obj.abs()) {
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall >= STALL_LIMIT {
                    bland = true;
                }
            }
        }
    }

    /// Bounded dual-simplex loop: restore primal feasibility after bound
    /// changes. Ends feasible, with a provably infeasible row, or over the
    /// iteration cap (caller falls back to a cold solve).
    ///
    /// The ratio test is the long-step variant: candidates are processed in
    /// dual-ratio order and boxed columns whose full range cannot close the
    /// violation are bound-flipped, with the flips applied together with the
    /// final pivot so dual feasibility survives the iteration as a whole.
    fn dual_repair(&mut self, cost: &[f64]) -> Result<DualEnd, EngineError> {
        let iter_cap = 500 + 4 * self.m as u64;
        let mut iters: u64 = 0;
        let thresh = self.feas_threshold();

        loop {
            iters += 1;
            if iters > iter_cap {
                return Ok(DualEnd::IterationLimit);
            }

            // Most violated basic variable; first row wins ties.
            let mut rr = usize::MAX;
            let mut worst = thresh;
            let mut below = false;
            for r in 0..self.m {
                let bj = self.basis[r];
                let v_lo = self.lower[bj] - self.xb[r];
                let v_hi = self.xb[r] - self.upper[bj];
                let (v, is_below) = if v_lo >= v_hi { (v_lo, true) } else { (v_hi, false) };
                if v > worst {
                    worst = v;
                    rr = r;
                    below = is_below;
                }
            }
            if rr == usize::MAX {
                return Ok(DualEnd::Feasible);
            }

            let leaving = self.basis[rr];
            let target = if below {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };

            self.btran_costs(cost);
            let m = self.m;
            let rho_start = rr * m;

            // All columns able to move the violated basic toward its bound:
            // raising xb[rr] wants alpha<0 from below-movers (at lower/free)
            // or alpha>0 from above-movers; lowering is symmetric.
            let mut candidates: Vec<(f64, f64, usize)> = Vec::new(); // (|ratio|, alpha, col)
            for j in 0..self.n {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut a = 0.0;
                for &(row, coef) in &self.cols[j] {
                    a += self.binv[rho_start + row] * coef;
                }
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let ok = match st {
                    VarState::AtLower => {
                        if below {
                            a < 0.0
                        } else {
                            a > 0.0
                        }
                    }
                    VarState::AtUpper => {
                        if below {
                            a > 0.0
                        } else {
                            a < 0.0
                        }
                    }
                    VarState::Free => true,
                    VarState::Basic => false,
                };
                if !ok {
                    continue;
                }
                let d = self.reduced_cost(j, cost);
                candidates.push(((d / a).abs(), a, j));
            }
            if candidates.is_empty() {
                // Nothing can push this basic variable toward its bound even
                // at the box extremes: certificate of infeasibility.
                return Ok(DualEnd::InfeasibleRow(rr));
            }
            candidates.sort_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then(y.1.abs().total_cmp(&x.1.abs()))
                    .then(x.2.cmp(&y.2))
            });

            // Walk the ratios: flip boxed columns that saturate before the
            // violation closes, pivot on the first one that can finish it.
            let mut remaining = (target - self.xb[rr]).abs();
            let mut flips: Vec<usize> = Vec::new();
            let mut enter: Option<(usize, f64)> = None;
            for &(_, a, j) in &candidates {
                let range = self.upper[j] - self.lower[j];
                let capacity = if range.is_finite() {
                    range * a.abs()
                } else {
                    f64::INFINITY
                };
                if capacity + TIE_TOL < remaining {
                    flips.push(j);
                    remaining -= capacity;
                } else {
                    enter = Some((j, a));
                    break;
                }
            }
            let Some((q, alpha_rq)) = enter else {
                // Every eligible column saturates and the violation persists.
                return Ok(DualEnd::InfeasibleRow(rr));
            };

            for &j in &flips {
                let range = self.upper[j] - self.lower[j];
                let step = match self.state[j] {
                    VarState::AtLower => range,
                    VarState::AtUpper => -range,
                    _ => unreachable!("only boxed nonbasics flip"),
                };
                self.ftran(j);
                for r in 0..m {
                    let a = self.scratch_alpha[r];
                    if a != 0.0 {
                        self.xb[r] -= a * step;
                    }
                }
                self.state[j] = match self.state[j] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    s => s,
                };
            }

            let dx_q = (target - self.xb[rr]) / (-alpha_rq);
            self.ftran(q);
            let entering_value = self.nonbasic_value(q) + dx_q;
            for r in 0..m {
                let a = self.scratch_alpha[r];
                if a != 0.0 {
                    self.xb[r] -= a * dx_q;
                }
            }
            self.state[leaving] = if below {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            self.update_binv(rr);
            self.basis[rr] = q;
            self.state[q] = VarState::Basic;
            self.xb[rr] = entering_value;
        }
    }

    /// Drive basic artificials out of the basis after a successful phase I.
    fn expel_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if self.basis[r] < self.n_real {
                continue;
            }
            let rho_start = r * m;
            let mut pick: Option<usize> = None;
            for j in 0..self.n_real {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let mut a = 0.0;
                for &(row, coef) in &self.cols[j] {
                    a += self.binv[rho_start + row] * coef;
                }
                if a.abs() > 1e-7 {
                    pick = Some(j);
                    break;
                }
            }
            if let Some(j) = pick {
                // Zero-length pivot: the point x is unchanged, only the basis
                // bookkeeping rotates.
                self.ftran(j);
                let art = self.basis[r];
                let v = self.nonbasic_value(j);
                self.state[art] = VarState::AtLower;
                self.update_binv(r);
                self.basis[r] = j;
                self.state[j] = VarState::Basic;
                self.xb[r] = v;
            }
            // Otherwise the row is redundant over the real columns; the
            // artificial stays basic, pinned at zero by its fixed bounds.
        }
        for j in self.n_real..self.n {
            self.upper[j] = 0.0;
        }
    }

    /// Max primal-feasibility error of the current iterate.
    fn primal_error(&self) -> f64 {
        let mut x = vec![0.0f64; self.n];
        for j in 0..self.n {
            if self.state[j] != VarState::Basic {
                x[j] = self.nonbasic_value(j);
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[r];
        }
        let mut lhs = vec![0.0f64; self.m];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    lhs[row] += coef * v;
                }
            }
        }
        let mut err = 0.0f64;
        for r in 0..self.m {
            err = err.max((lhs[r] - self.rhs[r]).abs());
        }
        for (r, &j) in self.basis.iter().enumerate() {
            err = err.max(self.lower[j] - self.xb[r]);
            err = err.max(self.xb[r] - self.upper[j]);
        }
        err
    }

    /// Cold solve: fresh basis, phase I if needed, then phase II.
    pub fn cold_solve(&mut self) -> Result<LpTermination, EngineError> {
        self.generation += 1;
        let needs_phase1 = self.cold_start();
        if needs_phase1 {
            let mut phase1_cost = vec![0.0; self.n];
            for c in phase1_cost.iter_mut().skip(self.n_real) {
                *c = 1.0;
            }
            match self.primal(&phase1_cost)? {
                PrimalEnd::Optimal => {}
                PrimalEnd::Unbounded { .. } => {
                    return Err(EngineError::Numerics(
                        "phase I reported unbounded".to_string(),
                    ));
                }
            }
            let infeas = self.current_objective(&phase1_cost);
            if infeas > self.feas_threshold().max(1e-9) * 10.0 {
                // Farkas-style certificate: the row whose multiplier carries
                // the most weight in the infeasibility proof.
                self.btran_costs(&phase1_cost);
                let mut row = 0;
                let mut best = -1.0;
                for (r, &y) in self.scratch_y.iter().enumerate() {
                    if y.abs() > best {
                        best = y.abs();
                        row = r;
                    }
                }
                return Ok(LpTermination::Infeasible { row });
            }
            self.expel_artificials();
        }

        let cost = self.phase2_cost();
        self.finish_primal(&cost)
    }

    /// Move the engine from its current factorized basis to the snapshot's
    /// basis set by individual pivots (bases of nearby search-tree nodes
    /// differ in only a few columns, so this is far cheaper than a full
    /// refactorization). Falls back to Gauss-Jordan when a pivot degenerates.
    fn rebase(&mut self, snap: &Snapshot) -> Result<(), EngineError> {
        let same_layout = snap.artificials.len() == self.n - self.n_real
            && snap
                .artificials
                .iter()
                .enumerate()
                .all(|(i, art)| self.cols[self.n_real + i][0] == *art);
        // Restore the snapshot's artificial layout before its basis.
        self.cols.truncate(self.n_real);
        self.lower.truncate(self.n_real);
        self.upper.truncate(self.n_real);
        for &(row, coef) in &snap.artificials {
            self.cols.push(vec![(row, coef)]);
            self.lower.push(0.0);
            self.upper.push(0.0);
        }
        self.n = self.n_real + snap.artificials.len();
        if snap.state.len() != self.n {
            return Err(EngineError::Numerics("snapshot layout mismatch".into()));
        }

        let can_pivot = same_layout && self.basis.len() == self.m && !self.binv.is_empty();
        if can_pivot {
            let mut in_target = vec![false; self.n];
            for &j in &snap.basis {
                in_target[j] = true;
            }
            let mut in_current = vec![false; self.n];
            for &j in &self.basis {
                if j < self.n {
                    in_current[j] = true;
                }
            }
            let wanted: Vec<usize> = snap
                .basis
                .iter()
                .copied()
                .filter(|&j| !in_current[j])
                .collect();
            let mut free_slots: Vec<usize> = (0..self.m)
                .filter(|&r| self.basis[r] >= self.n || !in_target[self.basis[r]])
                .collect();
            let mut ok = true;
            'outer: for q in wanted {
                self.ftran(q);
                let mut pick: Option<(usize, usize)> = None; // (slot idx, row)
                for (si, &r) in free_slots.iter().enumerate() {
                    let a = self.scratch_alpha[r].abs();
                    let best = pick.map(|(_, br)| self.scratch_alpha[br].abs());
                    if a > 1e-7 && best.is_none_or(|b| a > b) {
                        pick = Some((si, r));
                    }
                }
                let Some((si, r)) = pick else {
                    ok = false;
                    break 'outer;
                };
                self.update_binv(r);
                self.basis[r] = q;
                free_slots.swap_remove(si);
            }
            if ok {
                self.state = snap.state.clone();
                return Ok(());
            }
        }
        // Degenerate or layout-changed path: rebuild from scratch.
        self.basis = snap.basis.clone();
        self.state = snap.state.clone();
        self.refactor()
    }

    /// Warm solve from a snapshot after bound changes. Returns `Ok(None)`
    /// when the snapshot cannot be used and the caller should cold solve.
    pub fn warm_solve(
        &mut self,
        snap: &Snapshot,
        already_loaded: bool,
    ) -> Result<Option<LpTermination>, EngineError> {
        self.generation += 1;
        if !already_loaded && self.rebase(snap).is_err() {
            return Ok(None);
        }
        // A nonbasic variable whose interval collapsed must sit on the fixed
        // bound.
        for j in 0..self.n {
            if self.state[j] != VarState::Basic && self.lower[j] == self.upper[j] {
                self.state[j] = VarState::AtLower;
            }
        }
        self.compute_xb();
        let cost = self.phase2_cost();
        match self.dual_repair(&cost)? {
            DualEnd::Feasible => {}
            DualEnd::InfeasibleRow(row) => {
                return Ok(Some(LpTermination::Infeasible { row }));
            }
            DualEnd::IterationLimit => return Ok(None),
        }
        self.finish_primal(&cost).map(Some)
    }

    fn phase2_cost(&self) -> Vec<f64> {
        let mut cost = vec![0.0; self.n];
        cost[..self.form.cost.len()].copy_from_slice(&self.form.cost);
        cost
    }

    fn finish_primal(&mut self, cost: &[f64]) -> Result<LpTermination, EngineError> {
        let mut resumes = 0u32;
        loop {
            match self.primal(cost)? {
                PrimalEnd::Unbounded { col, sig } => {
                    let mut ray = Vec::new();
                    if col < self.form.n_struct {
                        ray.push((col, sig));
                    }
                    for (r, &bj) in self.basis.iter().enumerate() {
                        if bj < self.form.n_struct {
                            let d = -sig * self.scratch_alpha[r];
                            if d.abs() > 1e-9 {
                                ray.push((bj, d));
                            }
                        }
                    }
                    ray.sort_by_key(|&(j, _)| j);
                    return Ok(LpTermination::Unbounded { ray });
                }
                PrimalEnd::Optimal => {
                    let err = self.primal_error();
                    if err > 10.0 * self.feas_threshold() && resumes < 3 {
                        // Accumulated update error: rebuild the inverse and
                        // repair before trusting the answer.
                        resumes += 1;
                        self.refactor()?;
                        self.compute_xb();
                        match self.dual_repair(cost)? {
                            DualEnd::Feasible => continue,
                            _ => {
                                return Err(EngineError::Numerics(format!(
                                    "could not repair drift of {err:.3e}"
                                )))
                            }
                        }
                    }
                    return Ok(self.package_optimal(cost));
                }
            }
        }
    }

    fn package_optimal(&mut self, cost: &[f64]) -> LpTermination {
        let n_struct = self.form.n_struct;
        let mut x = vec![0.0f64; n_struct];
        for j in 0..n_struct {
            if self.state[j] != VarState::Basic {
                x[j] = self.nonbasic_value(j);
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            if j < n_struct {
                x[j] = self.xb[r].clamp(self.lower[j], self.upper[j]);
            }
        }
        let objective: f64 = x
            .iter()
            .enumerate()
            .map(|(j, &v)| self.form.cost[j] * v)
            .sum();

        // Dual bound from the final multipliers: g = y.b plus each nonbasic
        // reduced cost times the bound it sits on.
        self.btran_costs(cost);
        let mut dual = 0.0;
        for (r, &b) in self.rhs.iter().enumerate() {
            dual += self.scratch_y[r] * b;
        }
        for j in 0..self.n {
            match self.state[j] {
                VarState::Basic | VarState::Free => continue,
                VarState::AtLower | VarState::AtUpper => {
                    let bound = self.nonbasic_value(j);
                    if bound != 0.0 {
                        dual += self.reduced_cost(j, cost) * bound;
                    }
                }
            }
        }

        LpTermination::Optimal {
            objective,
            dual_objective: dual,
            x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintSense, Model, ObjectiveSense};

    fn solve(model: &Model) -> LpTermination {
        let form = StdForm::from_model(model);
        let mut eng = Engine::new(&form, 1e-7);
        eng.cold_solve().expect("engine failure")
    }

    #[test]
    fn single_binding_constraint() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x1 = m.add_continuous(0.0, 1.0);
        let x2 = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x1, 1.0), (x2, 1.0)], ConstraintSense::Le, 1.0, "cap");
        m.set_objective(vec![(x1, 1.0), (x2, 1.0)]);
        match solve(&m) {
            LpTermination::Optimal { objective, .. } => {
                // Internal minimization of -x1-x2.
                assert!((objective - (-1.0)).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn simple_upper_bound() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 10.0);
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Le, 3.0, "ub");
        m.set_objective(vec![(x, 1.0)]);
        match solve(&m) {
            LpTermination::Optimal { objective, x, .. } => {
                assert!((objective + 3.0).abs() < 1e-9);
                assert!((x[0] - 3.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn equality_rows_use_phase1() {
        let mut m = Model::new(ObjectiveSense::Minimize);
        let x = m.add_continuous(0.0, 10.0);
        let y = m.add_continuous(0.0, 10.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], ConstraintSense::Eq, 4.0, "sum");
        m.add_constraint(vec![(x, 1.0), (y, -1.0)], ConstraintSense::Eq, 2.0, "diff");
        m.set_objective(vec![(x, 1.0), (y, 3.0)]);
        match solve(&m) {
            LpTermination::Optimal { objective, x, .. } => {
                assert!((x[0] - 3.0).abs() < 1e-7, "x={x:?}");
                assert!((x[1] - 1.0).abs() < 1e-7);
                assert!((objective - 6.0).abs() < 1e-7);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Ge, 2.0, "too_big");
        m.set_objective(vec![(x, 1.0)]);
        match solve(&m) {
            LpTermination::Infeasible { row } => assert_eq!(row, 0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded_with_ray() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, f64::INFINITY);
        m.set_objective(vec![(x, 1.0)]);
        match solve(&m) {
            LpTermination::Unbounded { ray } => {
                assert_eq!(ray.len(), 1);
                assert_eq!(ray[0].0, 0);
                assert!(ray[0].1 > 0.0);
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn ge_rows_have_negative_slack_bounds() {
        let mut m = Model::new(ObjectiveSense::Minimize);
        let x = m.add_continuous(0.0, 10.0);
        let y = m.add_continuous(0.0, 10.0);
        m.add_constraint(vec![(x, 2.0), (y, 1.0)], ConstraintSense::Ge, 4.0, "cover");
        m.set_objective(vec![(x, 1.0), (y, 1.0)]);
        match solve(&m) {
            LpTermination::Optimal { objective, .. } => {
                assert!((objective - 2.0).abs() < 1e-7);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn dual_bound_matches_primal_at_optimum() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 4.0);
        let y = m.add_continuous(0.0, 4.0);
        m.add_constraint(vec![(x, 1.0), (y, 2.0)], ConstraintSense::Le, 6.0, "c0");
        m.add_constraint(vec![(x, 3.0), (y, 1.0)], ConstraintSense::Le, 9.0, "c1");
        m.set_objective(vec![(x, 2.0), (y, 3.0)]);
        match solve(&m) {
            LpTermination::Optimal {
                objective,
                dual_objective,
                ..
            } => {
                assert!((objective - dual_objective).abs() < 1e-6);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn warm_solve_matches_cold_after_bound_fix() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        let b = m.add_binary();
        let c = m.add_binary();
        m.add_constraint(
            vec![(a, 2.0), (b, 3.0), (c, 4.0)],
            ConstraintSense::Le,
            5.0,
            "knap",
        );
        m.set_objective(vec![(a, 2.0), (b, 3.0), (c, 3.5)]);
        let form = StdForm::from_model(&m);
        let mut eng = Engine::new(&form, 1e-7);
        eng.apply_bounds(&[]);
        let root = eng.cold_solve().expect("root");
        let LpTermination::Optimal { .. } = root else {
            panic!("root not optimal")
        };
        let snap = eng.snapshot();
        let gen = eng.generation();

        eng.apply_bounds(&[(0, 1.0, 1.0)]);
        let warm = eng
            .warm_solve(&snap, gen == eng.generation())
            .expect("warm failure")
            .expect("warm should solve");
        let LpTermination::Optimal { objective: wobj, .. } = warm else {
            panic!("warm not optimal")
        };

        let mut eng2 = Engine::new(&form, 1e-7);
        eng2.apply_bounds(&[(0, 1.0, 1.0)]);
        let cold = eng2.cold_solve().expect("cold");
        let LpTermination::Optimal { objective: cobj, .. } = cold else {
            panic!("cold not optimal")
        };
        assert!((wobj - cobj).abs() < 1e-7, "warm {wobj} vs cold {cobj}");
    }
}
