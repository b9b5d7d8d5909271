//! Vertex-enumeration oracle for small box-bounded LPs.
//!
//! Every vertex of `{x : A x (<=|=|>=) b, l <= x <= u}` has n linearly
//! independent active constraints. The oracle enumerates every way to pick a
//! set of tight rows and a bound assignment for the remaining variables,
//! solves the resulting square system by Gaussian elimination, filters by
//! feasibility, and reports the best objective over surviving points.

use optree_mip::{ConstraintSense, Model, ObjectiveSense};

const FEAS_TOL: f64 = 1e-7;

/// Solve a dense square system; `None` when singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = 1.0 / a[col][col];
        for v in a[col][col..].iter_mut() {
            *v *= inv;
        }
        b[col] *= inv;
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                let (pivot_row, row) = if r < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                for (rv, pv) in row[col..].iter_mut().zip(pivot_row[col..].iter()) {
                    *rv -= f * pv;
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some(b)
}

fn row_value(model: &Model, row: usize, x: &[f64]) -> f64 {
    model.constraints()[row]
        .terms
        .iter()
        .map(|&(v, c)| c * x[v.index()])
        .sum()
}

fn feasible(model: &Model, x: &[f64]) -> bool {
    for v in model.variables() {
        let xv = x[v.id.index()];
        if xv < v.lower - FEAS_TOL || xv > v.upper + FEAS_TOL {
            return false;
        }
    }
    for (r, con) in model.constraints().iter().enumerate() {
        let lhs = row_value(model, r, x);
        let ok = match con.sense {
            ConstraintSense::Le => lhs <= con.rhs + FEAS_TOL,
            ConstraintSense::Eq => (lhs - con.rhs).abs() <= FEAS_TOL,
            ConstraintSense::Ge => lhs >= con.rhs - FEAS_TOL,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn subsets(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in subsets(&pool[i + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Best objective and a witness over all vertices; `None` when no feasible
/// vertex exists (for a bounded nonempty region there is always one).
pub fn best_vertex(model: &Model) -> Option<(f64, Vec<f64>)> {
    let n = model.num_variables();
    let m = model.num_constraints();
    let eq_rows: Vec<usize> = (0..m)
        .filter(|&r| model.constraints()[r].sense == ConstraintSense::Eq)
        .collect();
    let ineq_rows: Vec<usize> = (0..m)
        .filter(|&r| model.constraints()[r].sense != ConstraintSense::Eq)
        .collect();
    let maximize = model.sense() == ObjectiveSense::Maximize;
    let mut best: Option<(f64, Vec<f64>)> = None;

    // Tight rows = all equality rows plus a subset of the inequalities.
    let max_extra = n.saturating_sub(eq_rows.len().min(n));
    for extra in 0..=max_extra.min(ineq_rows.len()) {
        for combo in subsets(&ineq_rows, extra) {
            let mut tight: Vec<usize> = eq_rows.clone();
            tight.extend(&combo);
            let t = tight.len();
            if t > n {
                continue;
            }
            let free_count = t;
            // Choose which variables are determined by the tight rows.
            let all_vars: Vec<usize> = (0..n).collect();
            for free in subsets(&all_vars, free_count) {
                let fixed: Vec<usize> =
                    all_vars.iter().copied().filter(|v| !free.contains(v)).collect();
                // Each fixed variable sits at lower or upper.
                let patterns = 1usize << fixed.len();
                for pat in 0..patterns {
                    let mut x = vec![0.0f64; n];
                    let mut ok = true;
                    for (bit, &v) in fixed.iter().enumerate() {
                        let var = &model.variables()[v];
                        let at_upper = (pat >> bit) & 1 == 1;
                        let val = if at_upper { var.upper } else { var.lower };
                        if !val.is_finite() {
                            ok = false;
                            break;
                        }
                        x[v] = val;
                    }
                    if !ok {
                        continue;
                    }
                    if t > 0 {
                        let mut a = vec![vec![0.0f64; t]; t];
                        let mut rhs = vec![0.0f64; t];
                        for (ri, &row) in tight.iter().enumerate() {
                            let con = &model.constraints()[row];
                            rhs[ri] = con.rhs;
                            for &(v, c) in &con.terms {
                                if let Some(fi) = free.iter().position(|&f| f == v.index()) {
                                    a[ri][fi] += c;
                                } else {
                                    rhs[ri] -= c * x[v.index()];
                                }
                            }
                        }
                        match gauss_solve(a, rhs) {
                            Some(sol) => {
                                for (fi, &v) in free.iter().enumerate() {
                                    x[v] = sol[fi];
                                }
                            }
                            None => continue,
                        }
                    }
                    if !feasible(model, &x) {
                        continue;
                    }
                    let obj = model.objective_value(&x);
                    let better = match &best {
                        None => true,
                        Some((b, _)) => {
                            if maximize {
                                obj > *b + 1e-12
                            } else {
                                obj < *b - 1e-12
                            }
                        }
                    };
                    if better {
                        best = Some((obj, x));
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use optree_mip::{ConstraintSense, Model, ObjectiveSense};

    #[test]
    fn finds_the_binding_vertex() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 1.0);
        let y = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], ConstraintSense::Le, 1.0, "cap");
        m.set_objective(vec![(x, 1.0), (y, 1.0)]);
        let (obj, _) = best_vertex(&m).expect("feasible");
        assert!((obj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_infeasible_box() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 1.0);
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Ge, 3.0, "ge");
        m.set_objective(vec![(x, 1.0)]);
        assert!(best_vertex(&m).is_none());
    }

    #[test]
    fn handles_equality_rows() {
        let mut m = Model::new(ObjectiveSense::Minimize);
        let x = m.add_continuous(0.0, 5.0);
        let y = m.add_continuous(0.0, 5.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], ConstraintSense::Eq, 4.0, "sum");
        m.set_objective(vec![(x, 1.0), (y, 3.0)]);
        let (obj, x_best) = best_vertex(&m).expect("feasible");
        assert!((obj - 4.0).abs() < 1e-9, "x={x_best:?}");
    }
}
