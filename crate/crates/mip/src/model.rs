//! Linear mixed-integer model representation.
//!
//! A [`Model`] is a plain list of bounded variables, linear constraints and a
//! linear objective. It is built once, validated, and then handed to a solver
//! or the LP writer; nothing mutates it afterwards.

use std::fmt;

/// Index of a decision variable inside a [`Model`].
///
/// Ids are dense: the first variable added gets id 0, the next id 1, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Variable domain kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// A bounded decision variable.
#[derive(Debug, Clone)]
pub struct Variable {
    pub id: VarId,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

/// Relation between the linear expression and the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSense::Le => write!(f, "<="),
            ConstraintSense::Eq => write!(f, "="),
            ConstraintSense::Ge => write!(f, ">="),
        }
    }
}

/// A single linear row `sum(coef * var) sense rhs`.
///
/// The `tag` is a free-form label used in diagnostics and as the row name in
/// LP file export.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(VarId, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
    pub tag: String,
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

/// A linear mixed-integer model.
#[derive(Debug, Clone)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(VarId, f64)>,
    sense: ObjectiveSense,
}

impl Model {
    pub fn new(sense: ObjectiveSense) -> Self {
        Model {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    /// Add a continuous variable with the given bounds; returns its id.
    pub fn add_continuous(&mut self, lower: f64, upper: f64) -> VarId {
        self.add_variable(lower, upper, VarKind::Continuous)
    }

    /// Add a binary variable (bounds `[0, 1]`); returns its id.
    pub fn add_binary(&mut self) -> VarId {
        self.add_variable(0.0, 1.0, VarKind::Binary)
    }

    pub fn add_variable(&mut self, lower: f64, upper: f64, kind: VarKind) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            id,
            lower,
            upper,
            kind,
        });
        id
    }

    pub fn add_constraint(
        &mut self,
        terms: Vec<(VarId, f64)>,
        sense: ConstraintSense,
        rhs: f64,
        tag: impl Into<String>,
    ) {
        self.constraints.push(LinearConstraint {
            terms,
            sense,
            rhs,
            tag: tag.into(),
        });
    }

    /// Replace the objective with the given sparse coefficient list.
    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.objective = terms;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Objective value of a full assignment (no feasibility check).
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(v, c)| c * values[v.index()])
            .sum()
    }

}

/// A structural problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// A constraint or the objective references a variable id that does not exist.
    UnknownVariable {
        location: String,
        var: VarId,
    },
    /// Variable lower bound exceeds its upper bound.
    EmptyBoundInterval {
        var: VarId,
        lower: f64,
        upper: f64,
    },
    /// Binary variable with bounds outside `[0, 1]`.
    BinaryBoundsOutOfRange {
        var: VarId,
        lower: f64,
        upper: f64,
    },
    /// The same variable appears twice among one constraint's terms.
    DuplicateTerm {
        constraint: usize,
        tag: String,
        var: VarId,
    },
    /// Non-finite coefficient, bound or right-hand side.
    NonFiniteNumber {
        location: String,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownVariable { location, var } => {
                write!(f, "{location}: unknown variable {var}")
            }
            Diagnostic::EmptyBoundInterval { var, lower, upper } => {
                write!(f, "variable {var}: empty bound interval [{lower}, {upper}]")
            }
            Diagnostic::BinaryBoundsOutOfRange { var, lower, upper } => {
                write!(
                    f,
                    "binary variable {var}: bounds [{lower}, {upper}] not within [0, 1]"
                )
            }
            Diagnostic::DuplicateTerm {
                constraint, tag, var
            } => {
                write!(
                    f,
                    "constraint #{constraint} '{tag}': duplicate term for variable {var}"
                )
            }
            Diagnostic::NonFiniteNumber { location } => {
                write!(f, "{location}: non-finite number")
            }
        }
    }
}

/// Check every model invariant; an empty result means the model is well formed.
pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = model.num_variables();

    for v in model.variables() {
        if v.lower.is_nan() || v.upper.is_nan() {
            out.push(Diagnostic::NonFiniteNumber {
                location: format!("variable {}", v.id),
            });
            continue;
        }
        if v.lower > v.upper {
            out.push(Diagnostic::EmptyBoundInterval {
                var: v.id,
                lower: v.lower,
                upper: v.upper,
            });
        }
        if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
            out.push(Diagnostic::BinaryBoundsOutOfRange {
                var: v.id,
                lower: v.lower,
                upper: v.upper,
            });
        }
    }

    for (ci, con) in model.constraints().iter().enumerate() {
        let location = format!("constraint #{ci} '{}'", con.tag);
        if !con.rhs.is_finite() {
            out.push(Diagnostic::NonFiniteNumber {
                location: location.clone(),
            });
        }
        let mut seen = vec![false; n];
        for &(var, coef) in &con.terms {
            if var.index() >= n {
                out.push(Diagnostic::UnknownVariable {
                    location: location.clone(),
                    var,
                });
                continue;
            }
            if !coef.is_finite() {
                out.push(Diagnostic::NonFiniteNumber {
                    location: format!("{location}, coefficient of {var}"),
                });
            }
            if seen[var.index()] {
                out.push(Diagnostic::DuplicateTerm {
                    constraint: ci,
                    tag: con.tag.clone(),
                    var,
                });
            }
            seen[var.index()] = true;
        }
    }

    for &(var, coef) in model.objective() {
        if var.index() >= n {
            out.push(Diagnostic::UnknownVariable {
                location: "objective".to_string(),
                var,
            });
        } else if !coef.is_finite() {
            out.push(Diagnostic::NonFiniteNumber {
                location: format!("objective, coefficient of {var}"),
            });
        }
    }

    out
}
