//! Exhaustive-enumeration oracle for all-binary models.

use optree_mip::{ConstraintSense, Model, ObjectiveSense, VarKind};

/// Best objective over every feasible 0/1 assignment; `None` when no
/// assignment is feasible. Panics if the model has non-binary variables.
pub fn best_assignment(model: &Model) -> Option<(f64, Vec<f64>)> {
    let n = model.num_variables();
    assert!(
        model.variables().iter().all(|v| v.kind == VarKind::Binary),
        "oracle only enumerates all-binary models"
    );
    assert!(n <= 20, "enumeration limited to 20 binaries");
    let maximize = model.sense() == ObjectiveSense::Maximize;

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1u32 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        let mut ok = true;
        for v in model.variables() {
            let xv = x[v.id.index()];
            if xv < v.lower || xv > v.upper {
                ok = false;
                break;
            }
        }
        if ok {
            for con in model.constraints() {
                let lhs: f64 = con.terms.iter().map(|&(v, c)| c * x[v.index()]).sum();
                let sat = match con.sense {
                    ConstraintSense::Le => lhs <= con.rhs,
                    ConstraintSense::Eq => lhs == con.rhs,
                    ConstraintSense::Ge => lhs >= con.rhs,
                };
                if !sat {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let obj = model.objective_value(&x);
        let better = match &best {
            None => true,
            Some((b, _)) => {
                if maximize {
                    obj > *b
                } else {
                    obj < *b
                }
            }
        };
        if better {
            best = Some((obj, x));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use optree_mip::{ConstraintSense, Model, ObjectiveSense};

    #[test]
    fn knapsack_enumeration() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        let b = m.add_binary();
        m.add_constraint(vec![(a, 2.0), (b, 2.0)], ConstraintSense::Le, 2.0, "cap");
        m.set_objective(vec![(a, 3.0), (b, 2.0)]);
        let (obj, x) = best_assignment(&m).expect("feasible");
        assert_eq!(obj, 3.0);
        assert_eq!(x, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_equality() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        m.add_constraint(vec![(a, 1.0)], ConstraintSense::Eq, 0.5, "half");
        m.set_objective(vec![(a, 1.0)]);
        assert!(best_assignment(&m).is_none());
    }
}
