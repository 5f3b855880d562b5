//! The compiled 0-1 program: binary variables, integer-coefficient linear
//! rows and a linear objective to minimize.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Money;

use super::grid::TimeGrid;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// What a variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    /// `u_l(t)`
    Presence { location: usize, slot: usize },
    /// `m(t)`
    Asleep { slot: usize },
    /// `e(t)`
    Event { slot: usize },
    /// `f_j` for the flight at `option` (index into the inventory) on `leg`.
    Flight {
        leg: usize,
        option: usize,
        id: String,
        price: Money,
    },
    /// `h_j` for the hotel at `option` booked for every night of `stay`.
    Hotel {
        stay: usize,
        option: usize,
        id: String,
        nightly: Money,
        nights: u32,
    },
    /// Soft-window deviation indicator tied to a flight variable.
    Aux { of: VarId, penalty: Money },
}

impl VarRole {
    pub fn is_selection(&self) -> bool {
        matches!(self, VarRole::Flight { .. } | VarRole::Hotel { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            VarRole::Presence { .. } => "u",
            VarRole::Asleep { .. } => "m",
            VarRole::Event { .. } => "e",
            VarRole::Flight { .. } => "f",
            VarRole::Hotel { .. } => "h",
            VarRole::Aux { .. } => "aux",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint families, used for counting and for readable dumps.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// One location per slot.
    Location,
    /// Minimum sleep per night.
    Sleep,
    /// No location change without an event.
    Teleport,
    /// Events only at selected flights' departure/landing slots.
    Event,
    /// Flight anchors: origin, airborne, destination, events.
    FlightAnchor,
    /// Exactly one flight per leg.
    FlightLeg,
    /// Exactly one hotel per stay.
    HotelStay,
    /// Sleep only where a selected hotel covers the slot.
    HotelAllow,
    /// Sleeping at a hotel requires being in its city.
    HotelPresence,
    /// No sleeping aboard.
    AirSleep,
    Budget,
    SoftWindow,
}

impl Family {
    pub fn is_commonsense(self) -> bool {
        matches!(self, Family::Location | Family::Sleep)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[bool]) -> i64 {
        self.terms
            .iter()
            .map(|&(v, c)| if values[v.0] { c } else { 0 })
            .sum()
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => a <= self.rhs,
            Sense::Ge => a >= self.rhs,
            Sense::Eq => a == self.rhs,
        }
    }
}

/// A linear expression `Σ coeff·var + constant` used while building rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, i64)>,
    pub constant: i64,
}

impl LinExpr {
    pub fn add_term(&mut self, var: VarId, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.iter_mut().find(|(v, _)| *v == var) {
            Some((_, c)) => *c += coeff,
            None => self.terms.push((var, coeff)),
        }
    }

    /// `self sense 0` as a row with the constant moved to the right-hand side.
    pub fn into_constraint(
        mut self,
        name: String,
        family: Family,
        sense: Sense,
    ) -> LinearConstraint {
        self.terms.retain(|&(_, c)| c != 0);
        LinearConstraint {
            name,
            family,
            terms: self.terms,
            sense,
            rhs: -self.constant,
        }
    }
}

/// Indices that tie model columns back to the request and inventory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelLayout {
    pub grid: TimeGrid,
    /// City codes then `AIR`.
    pub locations: Vec<String>,
    /// `presence[l][t]`
    pub presence: Vec<Vec<VarId>>,
    pub asleep: Vec<VarId>,
    pub event: Vec<VarId>,
    /// Flight variables per leg.
    pub leg_flights: Vec<Vec<VarId>>,
    /// Hotel variables per stay.
    pub stay_hotels: Vec<Vec<VarId>>,
}

impl ModelLayout {
    pub fn air(&self) -> usize {
        self.locations.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    /// Dense coefficients, one per variable; minimized.
    pub objective: Vec<i64>,
    pub var_index: HashMap<String, VarId>,
    pub layout: ModelLayout,
}

impl MilpModel {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn objective_value(&self, values: &[bool]) -> i64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(&c, &x)| if x { c } else { 0 })
            .sum()
    }

    pub fn violated<'a>(
        &'a self,
        values: &'a [bool],
    ) -> impl Iterator<Item = &'a LinearConstraint> {
        self.constraints
            .iter()
            .filter(move |c| !c.is_satisfied(values))
    }

    pub fn count_family(&self, pred: impl Fn(Family) -> bool) -> usize {
        self.constraints.iter().filter(|c| pred(c.family)).count()
    }

    pub fn selection_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role.is_selection())
            .map(|(i, _)| VarId(i))
    }

    /// Plain-text LP dump: one `name: Σ coeff var sense rhs` row per line.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let fmt_terms = |terms: &mut dyn Iterator<Item = (VarId, i64)>| {
            let mut s = String::new();
            for (v, c) in terms {
                let _ = write!(s, " {:+} {}", c, self.variables[v.0].name);
            }
            if s.is_empty() {
                s.push_str(" 0");
            }
            s
        };
        let mut obj = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (VarId(i), c));
        let _ = writeln!(out, "minimize:{}", fmt_terms(&mut obj));
        let _ = writeln!(out, "subject to:");
        for c in &self.constraints {
            let mut terms = c.terms.iter().copied();
            let _ = writeln!(
                out,
                "{}:{} {} {}",
                c.name,
                fmt_terms(&mut terms),
                c.sense.symbol(),
                c.rhs
            );
        }
        let _ = writeln!(out, "binary:");
        for v in &self.variables {
            let _ = writeln!(out, " {}", v.name);
        }
        let _ = writeln!(out, "end");
        out
    }
}
