//! Depth-first branch and bound over binary variables with bound
//! propagation on linear rows.

use std::time::Instant;

use crate::milp::{MilpModel, Sense, VarId, VarRole};

use super::{BranchOrder, SolveStats, SolveStatus, SolverConfig};

const FREE: i8 = -1;

#[derive(Clone, Debug)]
struct Row {
    lo: i64,
    hi: i64,
    terms: Vec<(u32, i64)>,
    max_abs: i64,
}

/// Solver state for one model. Loading builds occurrence lists and runs
/// root propagation once; each solve starts from a copy of that state.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    rows: Vec<Row>,
    occ: Vec<Vec<(u32, i64)>>,
    obj: Vec<i64>,
    selection: Vec<bool>,
    /// Exactly-one groups with each member's positive cost, including the
    /// soft-window indicator that always equals it.
    groups: Vec<Vec<(u32, i64)>>,
    state: State,
    root_conflict: bool,
}

#[derive(Clone, Debug)]
struct State {
    value: Vec<i8>,
    min_act: Vec<i64>,
    max_act: Vec<i64>,
    trail: Vec<u32>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    fixed_obj: i64,
    neg_free: i64,
    propagations: u64,
}

impl LoadedModel {
    pub fn new(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let mut occ = vec![Vec::new(); n];
        let mut rows = Vec::with_capacity(model.constraints.len());
        for (r, c) in model.constraints.iter().enumerate() {
            let (lo, hi) = match c.sense {
                Sense::Le => (i64::MIN / 4, c.rhs),
                Sense::Ge => (c.rhs, i64::MAX / 4),
                Sense::Eq => (c.rhs, c.rhs),
            };
            let terms: Vec<(u32, i64)> = c.terms.iter().map(|&(v, a)| (v.0 as u32, a)).collect();
            for &(v, a) in &terms {
                occ[v as usize].push((r as u32, a));
            }
            let max_abs = terms.iter().map(|t| t.1.abs()).max().unwrap_or(0);
            rows.push(Row {
                lo,
                hi,
                terms,
                max_abs,
            });
        }
        let obj = model.objective.clone();
        let mut aux_cost = vec![0i64; n];
        for v in &model.variables {
            if let VarRole::Aux { of, .. } = v.role {
                let i = model.var_index[&v.name].0;
                aux_cost[of.0] += obj[i].max(0);
            }
        }
        let groups = model
            .layout
            .leg_flights
            .iter()
            .chain(&model.layout.stay_hotels)
            .map(|g| {
                g.iter()
                    .map(|v| (v.0 as u32, obj[v.0].max(0) + aux_cost[v.0]))
                    .collect()
            })
            .collect();
        let min_act = rows
            .iter()
            .map(|r| r.terms.iter().map(|t| t.1.min(0)).sum())
            .collect();
        let max_act = rows
            .iter()
            .map(|r| r.terms.iter().map(|t| t.1.max(0)).sum())
            .collect();
        let nrows = rows.len();
        let mut loaded = LoadedModel {
            selection: model
                .variables
                .iter()
                .map(|v| v.role.is_selection())
                .collect(),
            rows,
            occ,
            groups,
            state: State {
                value: vec![FREE; n],
                min_act,
                max_act,
                trail: Vec::new(),
                queue: (0..nrows as u32).collect(),
                queued: vec![true; nrows],
                fixed_obj: 0,
                neg_free: obj.iter().map(|c| (*c).min(0)).sum(),
                propagations: 0,
            },
            obj,
            root_conflict: false,
        };
        let mut st = loaded.state.clone();
        loaded.root_conflict = !loaded.propagate(&mut st);
        st.trail.clear();
        loaded.state = st;
        loaded
    }

    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    fn assign(&self, st: &mut State, v: u32, val: bool) {
        let vi = v as usize;
        debug_assert_eq!(st.value[vi], FREE);
        st.value[vi] = val as i8;
        st.trail.push(v);
        let c = self.obj[vi];
        st.neg_free -= c.min(0);
        if val {
            st.fixed_obj += c;
        }
        for &(r, a) in &self.occ[vi] {
            let r = r as usize;
            if val {
                st.min_act[r] += a.max(0);
                st.max_act[r] += a.min(0);
            } else {
                st.min_act[r] -= a.min(0);
                st.max_act[r] -= a.max(0);
            }
            if !st.queued[r] {
                st.queued[r] = true;
                st.queue.push(r as u32);
            }
        }
    }

    fn undo_to(&self, st: &mut State, len: usize) {
        while st.trail.len() > len {
            let v = st.trail.pop().expect("trail is longer than len") as usize;
            let val = st.value[v] == 1;
            st.value[v] = FREE;
            let c = self.obj[v];
            st.neg_free += c.min(0);
            if val {
                st.fixed_obj -= c;
            }
            for &(r, a) in &self.occ[v] {
                let r = r as usize;
                if val {
                    st.min_act[r] -= a.max(0);
                    st.max_act[r] -= a.min(0);
                } else {
                    st.min_act[r] += a.min(0);
                    st.max_act[r] += a.max(0);
                }
            }
        }
    }

    fn clear_queue(st: &mut State) {
        for r in st.queue.drain(..) {
            st.queued[r as usize] = false;
        }
    }

    /// Runs propagation to a fixpoint. Returns false on conflict.
    fn propagate(&self, st: &mut State) -> bool {
        while let Some(r) = st.queue.pop() {
            let ri = r as usize;
            st.queued[ri] = false;
            st.propagations += 1;
            let row = &self.rows[ri];
            let (mn, mx) = (st.min_act[ri], st.max_act[ri]);
            if mn > row.hi || mx < row.lo {
                Self::clear_queue(st);
                return false;
            }
            if mn + row.max_abs <= row.hi && mx - row.max_abs >= row.lo {
                continue;
            }
            for &(v, a) in &row.terms {
                if st.value[v as usize] != FREE {
                    continue;
                }
                let (mn, mx) = (st.min_act[ri], st.max_act[ri]);
                let one_ok = mn + a.max(0) <= row.hi && mx + a.min(0) >= row.lo;
                let zero_ok = mn - a.min(0) <= row.hi && mx - a.max(0) >= row.lo;
                match (one_ok, zero_ok) {
                    (true, true) => {}
                    (true, false) => self.assign(st, v, true),
                    (false, true) => self.assign(st, v, false),
                    (false, false) => {
                        Self::clear_queue(st);
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Admissible lower bound on the objective of any completion of the
    /// current partial assignment; `None` if some exactly-one group has no
    /// candidate left.
    fn bound(&self, st: &State) -> Option<i64> {
        let mut b = st.fixed_obj + st.neg_free;
        for g in &self.groups {
            if g.iter().any(|&(v, _)| st.value[v as usize] == 1) {
                continue;
            }
            let best = g
                .iter()
                .filter(|&&(v, _)| st.value[v as usize] == FREE)
                .map(|&(_, c)| c)
                .min()?;
            b += best;
        }
        Some(b)
    }

    /// Bound after fixing `fixes` and propagating, or `None` if that is
    /// already contradictory.
    pub fn bound_with_fixes(&self, fixes: &[(VarId, bool)]) -> Option<i64> {
        if self.root_conflict {
            return None;
        }
        let mut st = self.state.clone();
        for &(v, val) in fixes {
            match st.value[v.0] {
                FREE => {
                    self.assign(&mut st, v.0 as u32, val);
                    if !self.propagate(&mut st) {
                        return None;
                    }
                }
                x if (x == 1) != val => return None,
                _ => {}
            }
        }
        self.bound(&st)
    }

    pub fn solve(
        &self,
        config: &SolverConfig,
    ) -> (SolveStatus, Option<Vec<bool>>, Option<i64>, SolveStats) {
        let started = Instant::now();
        let mut stats = SolveStats::default();
        if self.root_conflict {
            stats.solve_ms = ms(started);
            return (SolveStatus::Infeasible, None, None, stats);
        }
        let mut st = self.state.clone();
        let order = self.branch_order(config.branch_order);
        let strict_ties = config.branch_order == BranchOrder::ObjectiveDescending;
        // Selection variables come first in `order`; once they are all fixed,
        // propagation fixes the aux indicators and the rest carry no cost.
        let num_selection = self.selection.iter().filter(|s| **s).count();

        let mut best: Option<(i64, Vec<bool>)> = None;
        // (order position, trail length before the branch, untried value)
        let mut stack: Vec<(usize, usize, Option<bool>)> = Vec::new();
        let mut pos = 0usize;
        let mut hit_limit = false;

        'search: loop {
            // Node: state is propagated and consistent.
            stats.nodes += 1;
            if stats.nodes % 512 == 0
                && started.elapsed().as_millis() as u64 >= config.time_limit_ms
            {
                hit_limit = true;
                break;
            }
            if config.node_limit.is_some_and(|l| stats.nodes > l) {
                hit_limit = true;
                break;
            }
            let prune = match (self.bound(&st), &best) {
                (None, _) => true,
                (Some(b), Some((inc, _))) => {
                    if strict_ties {
                        b > *inc
                    } else {
                        b >= *inc
                    }
                }
                (Some(_), None) => false,
            };
            if !prune {
                while pos < order.len() && st.value[order[pos].0 as usize] != FREE {
                    pos += 1;
                }
                if pos == order.len() {
                    let values: Vec<bool> = st.value.iter().map(|&x| x == 1).collect();
                    let obj = st.fixed_obj;
                    let better = match &best {
                        None => true,
                        Some((inc, inc_vals)) => {
                            obj < *inc || (obj == *inc && self.lex_less(&values, inc_vals))
                        }
                    };
                    if better {
                        best = Some((obj, values));
                    }
                    // Other completions of the same selections cost the same.
                    while stack.last().is_some_and(|f| f.0 >= num_selection) {
                        stack.pop();
                    }
                } else {
                    let (v, first) = order[pos];
                    stack.push((pos, st.trail.len(), Some(!first)));
                    self.assign(&mut st, v, first);
                    if self.propagate(&mut st) {
                        continue 'search;
                    }
                }
            }
            // Backtrack to the deepest branch with an untried value.
            loop {
                let Some(frame) = stack.last_mut() else {
                    break 'search;
                };
                let (p, len, pending) = *frame;
                self.undo_to(&mut st, len);
                pos = p;
                match pending {
                    Some(val) => {
                        frame.2 = None;
                        self.assign(&mut st, order[p].0, val);
                        if self.propagate(&mut st) {
                            continue 'search;
                        }
                    }
                    None => {
                        stack.pop();
                    }
                }
            }
        }
        stats.propagations = st.propagations;
        stats.solve_ms = ms(started);
        let status = match (&best, hit_limit) {
            (_, true) => SolveStatus::TimeLimit,
            (Some(_), false) => SolveStatus::Optimal,
            (None, false) => SolveStatus::Infeasible,
        };
        match best {
            Some((obj, vals)) => (status, Some(vals), Some(obj), stats),
            None => (status, None, None, stats),
        }
    }

    /// Compares selected selection variables as sorted index lists.
    fn lex_less(&self, a: &[bool], b: &[bool]) -> bool {
        for i in 0..a.len() {
            if !self.selection[i] || a[i] == b[i] {
                continue;
            }
            return a[i];
        }
        false
    }

    /// Variables in branching order with the value to try first.
    fn branch_order(&self, order: BranchOrder) -> Vec<(u32, bool)> {
        let n = self.num_vars() as u32;
        let mut sel: Vec<u32> = (0..n).filter(|&v| self.selection[v as usize]).collect();
        let first_sel = match order {
            BranchOrder::IndexAscending => true,
            BranchOrder::ObjectiveDescending => {
                sel.sort_by_key(|&v| (std::cmp::Reverse(self.obj[v as usize]), v));
                false
            }
        };
        let mut out: Vec<(u32, bool)> = sel.into_iter().map(|v| (v, first_sel)).collect();
        out.extend(
            (0..n)
                .filter(|&v| !self.selection[v as usize])
                .map(|v| (v, self.obj[v as usize] <= 0)),
        );
        out
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}
