//! Big-M encoding of "if every condition literal holds, then `x = y`".
//!
//! With binary conditions `z_1..z_k` the pair
//!
//! ```text
//! x <= y + M * Σ (1 - z_j)
//! y <= x + M * Σ (1 - z_j)
//! ```
//!
//! forces `x = y` when all `z_j = 1` and relaxes both sides by `k'·M` when
//! `k'` of them are 0. A negated literal contributes `z_j` instead of
//! `1 - z_j`, which is how "e(t) = 0 implies ..." is written without an
//! auxiliary complement variable.

use thiserror::Error;

use super::model::{Family, LinExpr, LinearConstraint, Sense, VarId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: VarId,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: VarId) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Literal { var, negated: true }
    }
}

/// A side of the implied equality: a binary variable or a constant.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Var(VarId),
    Const(i64),
}

impl Operand {
    fn range(self) -> (i64, i64) {
        match self {
            Operand::Var(_) => (0, 1),
            Operand::Const(c) => (c, c),
        }
    }

    fn add_to(self, expr: &mut LinExpr, sign: i64) {
        match self {
            Operand::Var(v) => expr.add_term(v, sign),
            Operand::Const(c) => expr.constant += sign * c,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("big-M {m} is below the attainable gap {gap} for `{name}`")]
    MTooSmall { name: String, m: i64, gap: i64 },
}

/// Emits the two rows of the conditional equality `∧ z ⇒ x = y`.
pub fn encode_implication(
    name: &str,
    family: Family,
    conditions: &[Literal],
    x: Operand,
    y: Operand,
    big_m: i64,
) -> Result<[LinearConstraint; 2], EncodeError> {
    let (x_lo, x_hi) = x.range();
    let (y_lo, y_hi) = y.range();
    let gap = (x_hi - y_lo).max(y_hi - x_lo).max(0);
    if big_m < gap {
        return Err(EncodeError::MTooSmall {
            name: name.to_string(),
            m: big_m,
            gap,
        });
    }

    // M * Σ (1 - lit_j), written as an expression in the z variables.
    let mut slack = LinExpr::default();
    for lit in conditions {
        if lit.negated {
            slack.add_term(lit.var, big_m);
        } else {
            slack.constant += big_m;
            slack.add_term(lit.var, -big_m);
        }
    }

    let row = |lhs: Operand, rhs: Operand, suffix: &str| {
        // lhs - rhs - slack <= 0
        let mut e = LinExpr::default();
        lhs.add_to(&mut e, 1);
        rhs.add_to(&mut e, -1);
        for &(v, c) in &slack.terms {
            e.add_term(v, -c);
        }
        e.constant -= slack.constant;
        e.into_constraint(format!("{name}_{suffix}"), family, Sense::Le)
    };
    Ok([row(x, y, "a"), row(y, x, "b")])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feasible(rows: &[LinearConstraint; 2], values: &[bool]) -> bool {
        rows.iter().all(|r| r.is_satisfied(values))
    }

    #[test]
    fn forced_when_condition_holds() {
        // z = v0, x = v1, y = 0
        let rows = encode_implication(
            "t",
            Family::FlightAnchor,
            &[Literal::pos(VarId(0))],
            Operand::Var(VarId(1)),
            Operand::Const(0),
            1,
        )
        .unwrap();
        assert!(!feasible(&rows, &[true, true]));
        assert!(feasible(&rows, &[true, false]));
        assert!(feasible(&rows, &[false, true]));
    }

    #[test]
    fn slack_when_condition_fails() {
        // z=[0], any x,y with M=1
        let rows = encode_implication(
            "t",
            Family::Teleport,
            &[Literal::pos(VarId(0))],
            Operand::Var(VarId(1)),
            Operand::Var(VarId(2)),
            1,
        )
        .unwrap();
        for x in [false, true] {
            for y in [false, true] {
                assert!(feasible(&rows, &[false, x, y]));
            }
        }
        // z = [1, 1], x = y
        let rows = encode_implication(
            "t",
            Family::Teleport,
            &[Literal::pos(VarId(0)), Literal::pos(VarId(1))],
            Operand::Var(VarId(2)),
            Operand::Var(VarId(3)),
            1,
        )
        .unwrap();
        assert!(feasible(&rows, &[true, true, true, true]));
        assert!(feasible(&rows, &[true, true, false, false]));
        assert!(!feasible(&rows, &[true, true, true, false]));
    }

    #[test]
    fn m_below_gap_is_rejected() {
        let err = encode_implication(
            "t",
            Family::Budget,
            &[Literal::pos(VarId(0))],
            Operand::Var(VarId(1)),
            Operand::Const(3),
            2,
        )
        .unwrap_err();
        assert_eq!(
            err,
            EncodeError::MTooSmall {
                name: "t".into(),
                m: 2,
                gap: 3
            }
        );
    }

    #[test]
    fn negated_literal_row_shape() {
        // e=0 => u' = u  becomes  u' - u - e <= 0  and  u - u' - e <= 0
        let rows = encode_implication(
            "tele",
            Family::Teleport,
            &[Literal::neg(VarId(0))],
            Operand::Var(VarId(1)),
            Operand::Var(VarId(2)),
            1,
        )
        .unwrap();
        assert_eq!(
            rows[0].terms,
            vec![(VarId(1), 1), (VarId(2), -1), (VarId(0), -1)]
        );
        assert_eq!(rows[0].rhs, 0);
        assert_eq!(rows[0].sense, Sense::Le);
    }
}
