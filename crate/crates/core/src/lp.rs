//! Self-contained dense linear-program solver.
//!
//! Solves `maximize c.x subject to A x <= b, l <= x <= u` with a two-phase
//! primal simplex on the full tableau. Variable bounds (including free and
//! one-sided variables) are handled implicitly rather than as rows, phase 1
//! introduces artificial columns only for rows violated at the initial point,
//! and rows/columns are equilibrated with power-of-two factors so scaling adds
//! no rounding error. Pricing is Dantzig's rule with a switch to Bland's rule
//! after a stall, which guarantees termination on degenerate problems while
//! keeping the pivot sequence deterministic.
//!
//! Problem sizes in this crate are small (hundreds of variables, a few
//! thousand rows), so a dense tableau is adequate and keeps the solver free
//! of dependencies.

use thiserror::Error;

/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Feasibility and optimality tolerance, absolute on the scaled problem.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Dantzig pricing switches to Bland's rule after this many pivots without
/// objective progress.
const STALL_LIMIT: usize = 200;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite {what} coefficient at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("variable {0} has lower bound above upper bound")]
    EmptyBound(usize),
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// `maximize objective . x` subject to `matrix x <= rhs` and
/// `var_lower <= x <= var_upper` (bounds may be infinite).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    matrix: Vec<f64>, // row-major, num_constraints x num_vars
    rhs: Vec<f64>,
    var_lower: Vec<f64>,
    var_upper: Vec<f64>,
}

impl LinearProgram {
    /// New program over `n` variables, initially free with a zero objective
    /// and no constraints.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            matrix: Vec::new(),
            rhs: Vec::new(),
            var_lower: vec![f64::NEG_INFINITY; num_vars],
            var_upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) {
        assert_eq!(objective.len(), self.num_vars());
        self.objective = objective;
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.var_lower[var] = lower;
        self.var_upper[var] = upper;
    }

    pub fn var_lower(&self) -> &[f64] {
        &self.var_lower
    }

    pub fn var_upper(&self) -> &[f64] {
        &self.var_upper
    }

    /// Append the constraint `row . x <= rhs`.
    pub fn add_constraint(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.num_vars());
        self.matrix.extend_from_slice(row);
        self.rhs.push(rhs);
    }

    pub fn constraint_row(&self, i: usize) -> &[f64] {
        let n = self.num_vars();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Largest violation of `A x <= b` and the variable bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.num_constraints() {
            let lhs: f64 = self
                .constraint_row(i)
                .iter()
                .zip(x)
                .map(|(a, v)| a * v)
                .sum();
            worst = worst.max(lhs - self.rhs[i]);
        }
        for j in 0..self.num_vars() {
            worst = worst.max(self.var_lower[j] - x[j]);
            worst = worst.max(x[j] - self.var_upper[j]);
        }
        worst
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let m = self.num_constraints();
        if self.matrix.len() != n * m {
            return Err(LpError::Dimension(format!(
                "matrix holds {} coefficients, expected {} ({} rows x {} vars)",
                self.matrix.len(),
                n * m,
                m,
                n
            )));
        }
        if let Some(i) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite {
                what: "objective",
                index: i,
            });
        }
        if let Some(i) = self.matrix.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite {
                what: "matrix",
                index: i,
            });
        }
        if let Some(i) = self.rhs.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite {
                what: "rhs",
                index: i,
            });
        }
        for j in 0..n {
            let (lo, up) = (self.var_lower[j], self.var_upper[j]);
            if lo.is_nan() || up.is_nan() {
                return Err(LpError::NonFinite {
                    what: "bound",
                    index: j,
                });
            }
            if lo > up {
                return Err(LpError::EmptyBound(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

/// Round to the nearest power of two, clamped away from zero; dividing by the
/// result is exact in floating point.
fn pow2_scale(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        return 1.0;
    }
    let e = v.log2().round().clamp(-60.0, 60.0);
    (e as i32).into_f64_exp2()
}

trait Exp2 {
    fn into_f64_exp2(self) -> f64;
}

impl Exp2 for i32 {
    fn into_f64_exp2(self) -> f64 {
        f64::from_bits(((1023 + self) as u64) << 52)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarStatus {
    Basic(usize), // row index
    AtLower,
    AtUpper,
    FreeAtZero,
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,  // rows x cols, row-major: current B^-1 [A | I | R]
    d1: Vec<f64>, // phase-1 reduced costs (minimize sum of artificials)
    d2: Vec<f64>, // phase-2 reduced costs (minimize -objective)
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    lo: Vec<f64>,
    up: Vec<f64>,
    art_start: usize, // columns >= art_start are artificial
    iterations: usize,
    pivot_buf: Vec<f64>,
}

enum Phase {
    One,
    Two,
}

enum StepOutcome {
    Moved,
    OptimalReached,
    Unbounded,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::Basic(r) => self.beta[r],
            VarStatus::AtLower => self.lo[j],
            VarStatus::AtUpper => self.up[j],
            VarStatus::FreeAtZero => 0.0,
        }
    }

    fn costs(&self, phase: &Phase) -> &[f64] {
        match phase {
            Phase::One => &self.d1,
            Phase::Two => &self.d2,
        }
    }

    /// Pick the entering column and its direction (+1 increasing, -1
    /// decreasing), or None at optimality.
    fn price(&self, phase: &Phase, bland: bool) -> Option<(usize, f64)> {
        let d = self.costs(phase);
        // artificials never (re-)enter
        let price_end = self.art_start;
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..price_end {
            if self.lo[j] == self.up[j] {
                continue; // pinned variable, can never move
            }
            let (dir, score) = match self.status[j] {
                VarStatus::Basic(_) => continue,
                VarStatus::AtLower => {
                    if d[j] < -FEASIBILITY_TOL {
                        (1.0, -d[j])
                    } else {
                        continue;
                    }
                }
                VarStatus::AtUpper => {
                    if d[j] > FEASIBILITY_TOL {
                        (-1.0, d[j])
                    } else {
                        continue;
                    }
                }
                VarStatus::FreeAtZero => {
                    if d[j] < -FEASIBILITY_TOL {
                        (1.0, -d[j])
                    } else if d[j] > FEASIBILITY_TOL {
                        (-1.0, d[j])
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Bounded-variable ratio test. Returns the step length, and the limiting
    /// row (None when the entering variable flips to its opposite bound).
    /// Ties break toward the lowest basic-variable index, which is what
    /// Bland's rule needs for its anti-cycling guarantee.
    fn ratio_test(&self, enter: usize, dir: f64) -> Option<(f64, Option<(usize, bool)>)> {
        let mut t = self.up[enter] - self.lo[enter]; // may be inf
        let mut arg: Option<(usize, bool)> = None; // (row, leaving_at_upper)
        let consider = |room: f64, r: usize, at_upper: bool, t: &mut f64,
                        arg: &mut Option<(usize, bool)>| {
            let better = room < *t
                || (room == *t
                    && arg.map_or(false, |(r0, _)| self.basis[r] < self.basis[r0]));
            if better {
                *t = room;
                *arg = Some((r, at_upper));
            }
        };
        for r in 0..self.rows {
            let y = self.a[r * self.cols + enter];
            let dy = dir * y;
            if dy > PIVOT_TOL {
                // basic value decreases toward its lower bound
                let lo_b = self.lo[self.basis[r]];
                if lo_b.is_finite() {
                    let room = ((self.beta[r] - lo_b) / dy).max(0.0);
                    consider(room, r, false, &mut t, &mut arg);
                }
            } else if dy < -PIVOT_TOL {
                // basic value increases toward its upper bound
                let up_b = self.up[self.basis[r]];
                if up_b.is_finite() {
                    let room = ((up_b - self.beta[r]) / -dy).max(0.0);
                    consider(room, r, true, &mut t, &mut arg);
                }
            }
        }
        if t.is_infinite() {
            None
        } else {
            Some((t, arg))
        }
    }

    fn apply_move(&mut self, enter: usize, dir: f64, t: f64, leave: Option<(usize, bool)>) {
        let entering_value = self.value(enter) + dir * t;
        // shift all basic values along the column
        if t != 0.0 {
            for r in 0..self.rows {
                let y = self.a[r * self.cols + enter];
                if y != 0.0 {
                    self.beta[r] -= dir * t * y;
                }
            }
        }
        match leave {
            None => {
                // bound flip, no basis change
                self.status[enter] = if dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
            }
            Some((r, leaving_at_upper)) => {
                let leaving = self.basis[r];
                self.status[leaving] = if leaving_at_upper {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                // snap the leaving variable onto its bound exactly
                self.beta[r] = entering_value;
                self.basis[r] = enter;
                self.status[enter] = VarStatus::Basic(r);
                self.pivot(r, enter);
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols;
        let piv = self.a[row * cols + col];
        debug_assert!(piv.abs() > PIVOT_TOL / 10.0, "tiny pivot {piv}");
        let inv = 1.0 / piv;
        {
            let r = &mut self.a[row * cols..(row + 1) * cols];
            for v in r.iter_mut() {
                *v *= inv;
            }
            r[col] = 1.0;
            self.pivot_buf.clear();
            self.pivot_buf.extend_from_slice(r);
        }
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.a[i * cols + col];
            if f != 0.0 {
                let r = &mut self.a[i * cols..(i + 1) * cols];
                for (v, p) in r.iter_mut().zip(&self.pivot_buf) {
                    *v -= f * p;
                }
                r[col] = 0.0;
            }
        }
        let f1 = self.d1[col];
        if f1 != 0.0 {
            for (v, p) in self.d1.iter_mut().zip(&self.pivot_buf) {
                *v -= f1 * p;
            }
            self.d1[col] = 0.0;
        }
        let f2 = self.d2[col];
        if f2 != 0.0 {
            for (v, p) in self.d2.iter_mut().zip(&self.pivot_buf) {
                *v -= f2 * p;
            }
            self.d2[col] = 0.0;
        }
        self.iterations += 1;
    }

    fn phase1_objective(&self) -> f64 {
        (self.art_start..self.cols)
            .map(|j| self.value(j))
            .sum::<f64>()
    }

    fn step(&mut self, phase: &Phase, bland: bool) -> Result<StepOutcome, LpError> {
        let Some((enter, dir)) = self.price(phase, bland) else {
            return Ok(StepOutcome::OptimalReached);
        };
        let Some((t, leave)) = self.ratio_test(enter, dir) else {
            return Ok(StepOutcome::Unbounded);
        };
        self.apply_move(enter, dir, t, leave);
        Ok(StepOutcome::Moved)
    }

    /// Run a phase to optimality with stall-triggered Bland switching.
    fn run(&mut self, phase: Phase, objective_probe: impl Fn(&Self) -> f64) -> Result<bool, LpError> {
        let max_iter = 2000 + 60 * (self.rows + self.cols);
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = objective_probe(self);
        loop {
            if self.iterations > max_iter {
                return Err(LpError::IterationLimit(self.iterations));
            }
            match self.step(&phase, bland)? {
                StepOutcome::OptimalReached => return Ok(true),
                StepOutcome::Unbounded => return Ok(false),
                StepOutcome::Moved => {
                    let obj = objective_probe(self);
                    if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                        last_obj = obj;
                        stall = 0;
                        bland = false;
                    } else {
                        stall += 1;
                        if stall > STALL_LIMIT {
                            bland = true;
                        }
                    }
                }
            }
        }
    }
}

/// Solve the program. Input is validated, the solved point is re-checked
/// against the constraints, and identical inputs always produce identical
/// outputs (fixed pivot order).
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_constraints();

    // power-of-two equilibration: exact to scale and to undo
    let mut row_scale = vec![1.0; m];
    for i in 0..m {
        let mx = lp
            .constraint_row(i)
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        row_scale[i] = pow2_scale(mx);
    }
    let mut col_scale = vec![1.0; n];
    for j in 0..n {
        let mut mx = 0.0_f64;
        for i in 0..m {
            mx = mx.max((lp.matrix[i * n + j] / row_scale[i]).abs());
        }
        col_scale[j] = pow2_scale(mx);
    }
    let obj_scale = pow2_scale(lp.objective.iter().fold(0.0_f64, |a, v| a.max(v.abs())));

    // scaled data: y_j = col_scale_j * x_j
    let mut scaled = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            scaled[i * n + j] = lp.matrix[i * n + j] / (row_scale[i] * col_scale[j]);
        }
    }
    let rhs: Vec<f64> = lp.rhs.iter().zip(&row_scale).map(|(b, r)| b / r).collect();
    let obj: Vec<f64> = lp
        .objective
        .iter()
        .zip(&col_scale)
        .map(|(c, s)| c / (s * obj_scale))
        .collect();
    let lo_s: Vec<f64> = lp
        .var_lower
        .iter()
        .zip(&col_scale)
        .map(|(l, s)| l * s)
        .collect();
    let up_s: Vec<f64> = lp
        .var_upper
        .iter()
        .zip(&col_scale)
        .map(|(u, s)| u * s)
        .collect();

    let solution = solve_scaled(&scaled, &rhs, &obj, &lo_s, &up_s, m, n)?;

    let mut x = vec![0.0; n];
    let status = solution.status;
    if matches!(status, LpStatus::Optimal | LpStatus::Unbounded) {
        for j in 0..n {
            x[j] = solution.x[j] / col_scale[j];
        }
    }
    let objective_value = match status {
        LpStatus::Optimal => lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum(),
        LpStatus::Unbounded => f64::INFINITY,
        LpStatus::Infeasible => f64::NAN,
    };
    if status == LpStatus::Optimal {
        // feasibility certificate on the scaled problem
        let mut worst = 0.0_f64;
        for i in 0..m {
            let lhs: f64 = (0..n).map(|j| scaled[i * n + j] * solution.x[j]).sum();
            worst = worst.max(lhs - rhs[i]);
        }
        for j in 0..n {
            worst = worst.max(lo_s[j] - solution.x[j]);
            worst = worst.max(solution.x[j] - up_s[j]);
        }
        if worst > 100.0 * FEASIBILITY_TOL {
            return Err(LpError::Internal(format!(
                "solution violates scaled constraints by {worst:.3e}"
            )));
        }
    }
    Ok(LpSolution {
        status,
        x,
        objective_value,
        iterations: solution.iterations,
    })
}

struct ScaledSolution {
    status: LpStatus,
    x: Vec<f64>,
    iterations: usize,
}

fn solve_scaled(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    lo: &[f64],
    up: &[f64],
    m: usize,
    n: usize,
) -> Result<ScaledSolution, LpError> {
    // initial nonbasic placement: finite lower, else finite upper, else free
    let mut status: Vec<VarStatus> = (0..n)
        .map(|j| {
            if lo[j].is_finite() {
                VarStatus::AtLower
            } else if up[j].is_finite() {
                VarStatus::AtUpper
            } else {
                VarStatus::FreeAtZero
            }
        })
        .collect();
    let init_val = |j: usize| -> f64 {
        match status[j] {
            VarStatus::AtLower => lo[j],
            VarStatus::AtUpper => up[j],
            _ => 0.0,
        }
    };

    // slack values at the initial point; negative ones need artificials
    let mut slack0 = vec![0.0; m];
    for i in 0..m {
        let dot: f64 = (0..n).map(|j| a[i * n + j] * init_val(j)).sum();
        slack0[i] = b[i] - dot;
    }
    let violated: Vec<usize> = (0..m).filter(|&i| slack0[i] < 0.0).collect();
    let n_art = violated.len();
    let art_start = n + m;
    let cols = n + m + n_art;

    let mut tab = vec![0.0; m * cols];
    let mut lo_all = Vec::with_capacity(cols);
    let mut up_all = Vec::with_capacity(cols);
    lo_all.extend_from_slice(lo);
    up_all.extend_from_slice(up);
    lo_all.extend(std::iter::repeat(0.0).take(m));
    up_all.extend(std::iter::repeat(f64::INFINITY).take(m));
    lo_all.extend(std::iter::repeat(0.0).take(n_art));
    up_all.extend(std::iter::repeat(f64::INFINITY).take(n_art));

    let mut basis = vec![0usize; m];
    let mut beta = vec![0.0; m];
    status.extend(std::iter::repeat(VarStatus::AtLower).take(m + n_art));

    let mut art_idx = 0usize;
    for i in 0..m {
        let flip = if slack0[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i * cols + j] = flip * a[i * n + j];
        }
        tab[i * cols + n + i] = flip; // slack coefficient
        if slack0[i] < 0.0 {
            let art_col = art_start + art_idx;
            tab[i * cols + art_col] = 1.0;
            basis[i] = art_col;
            beta[i] = -slack0[i];
            status[art_col] = VarStatus::Basic(i);
            status[n + i] = VarStatus::AtLower; // slack nonbasic at 0
            art_idx += 1;
        } else {
            basis[i] = n + i;
            beta[i] = slack0[i];
            status[n + i] = VarStatus::Basic(i);
        }
    }

    // phase-1 reduced costs: minimize sum of artificials
    let mut d1 = vec![0.0; cols];
    for j in 0..cols {
        if matches!(status[j], VarStatus::Basic(_)) {
            continue;
        }
        let mut z = 0.0;
        for i in 0..m {
            if basis[i] >= art_start {
                z += tab[i * cols + j];
            }
        }
        d1[j] = -z;
    }
    // phase-2 reduced costs: minimize -c (basis cost is zero initially)
    let mut d2 = vec![0.0; cols];
    for (j, cj) in c.iter().enumerate() {
        d2[j] = -cj;
    }

    let mut t = Tableau {
        rows: m,
        cols,
        a: tab,
        d1,
        d2,
        beta,
        basis,
        status,
        lo: lo_all,
        up: up_all,
        art_start,
        iterations: 0,
        pivot_buf: Vec::with_capacity(cols),
    };

    if n_art > 0 {
        let finished = t.run(Phase::One, |t| t.phase1_objective())?;
        if !finished {
            return Err(LpError::Internal(
                "phase 1 reported unbounded".to_string(),
            ));
        }
        if t.phase1_objective() > FEASIBILITY_TOL {
            return Ok(ScaledSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                iterations: t.iterations,
            });
        }
        // pin artificials at zero; drive basic ones out where possible
        for j in t.art_start..t.cols {
            t.up[j] = 0.0;
        }
        for r in 0..t.rows {
            if t.basis[r] >= t.art_start {
                let piv_col = (0..t.art_start)
                    .find(|&j| {
                        !matches!(t.status[j], VarStatus::Basic(_))
                            && t.a[r * t.cols + j].abs() > PIVOT_TOL
                    });
                if let Some(j) = piv_col {
                    let old = t.basis[r];
                    let val = t.value(j);
                    t.status[old] = VarStatus::AtLower;
                    t.basis[r] = j;
                    t.status[j] = VarStatus::Basic(r);
                    t.beta[r] = val; // degenerate: artificial was at 0
                    t.pivot(r, j);
                }
                // otherwise the row is redundant; the artificial stays basic
                // at zero with equal bounds and can never move off it
            }
        }
    }

    let finished = t.run(Phase::Two, |t| {
        // phase-2 objective: minimize -c.y
        (0..t.art_start).map(|j| -c.get(j).unwrap_or(&0.0) * t.value(j)).sum::<f64>()
    })?;
    let x: Vec<f64> = (0..n).map(|j| t.value(j)).collect();
    if !finished {
        return Ok(ScaledSolution {
            status: LpStatus::Unbounded,
            x,
            iterations: t.iterations,
        });
    }
    Ok(ScaledSolution {
        status: LpStatus::Optimal,
        x,
        iterations: t.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(obj: &[f64], rows: &[(&[f64], f64)], bounds: &[(f64, f64)]) -> LinearProgram {
        let mut lp = LinearProgram::new(obj.len());
        lp.set_objective(obj.to_vec());
        for (j, (l, u)) in bounds.iter().enumerate() {
            lp.set_bounds(j, *l, *u);
        }
        for (row, rhs) in rows {
            lp.add_constraint(row, *rhs);
        }
        lp
    }

    #[test]
    fn single_variable_cap() {
        // max x s.t. x <= 5, x >= 0
        let lp = simple(&[1.0], &[(&[1.0], 5.0)], &[(0.0, f64::INFINITY)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 5.0).abs() < 1e-9);
        assert!((s.objective_value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_face() {
        // max x + y s.t. x + y <= 1, x, y >= 0: objective 1 on the face
        let lp = simple(
            &[1.0, 1.0],
            &[(&[1.0, 1.0], 1.0)],
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
        );
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-9);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x <= -1 with x >= 0
        let lp = simple(&[1.0], &[(&[1.0], -1.0)], &[(0.0, f64::INFINITY)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // max x, x >= 0, only a lower-bounding constraint
        let lp = simple(&[1.0], &[(&[-1.0], 0.0)], &[(0.0, f64::INFINITY)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_negative_rhs() {
        // max -x - y s.t. -x <= -3, -y <= -4 (i.e. x >= 3, y >= 4), free vars
        let lp = simple(
            &[-1.0, -1.0],
            &[(&[-1.0, 0.0], -3.0), (&[0.0, -1.0], -4.0)],
            &[
                (f64::NEG_INFINITY, f64::INFINITY),
                (f64::NEG_INFINITY, f64::INFINITY),
            ],
        );
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-8);
        assert!((s.x[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn bounded_variable_optimum_at_upper() {
        // max 2x + y, x in [0, 2], y in [0, 3], x + y <= 4
        let lp = simple(&[2.0, 1.0], &[(&[1.0, 1.0], 4.0)], &[(0.0, 2.0), (0.0, 3.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.x[1] - 2.0).abs() < 1e-9);
        assert!((s.objective_value - 6.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nan_input() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![f64::NAN]);
        assert!(matches!(
            solve(&lp),
            Err(LpError::NonFinite { what: "objective", .. })
        ));
    }

    #[test]
    fn rejects_crossed_bounds() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 1.0, 0.0);
        assert!(matches!(solve(&lp), Err(LpError::EmptyBound(0))));
    }

    #[test]
    fn objective_scaling_invariance() {
        let base = simple(
            &[3.0, 5.0],
            &[(&[1.0, 2.0], 14.0), (&[3.0, -1.0], 0.0), (&[1.0, -1.0], 2.0)],
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
        );
        let s1 = solve(&base).unwrap();
        let mut scaled = base.clone();
        scaled.set_objective(vec![3.0 * 7.5, 5.0 * 7.5]);
        let s2 = solve(&scaled).unwrap();
        assert_eq!(s1.status, s2.status);
        assert!((s2.objective_value - 7.5 * s1.objective_value).abs() < 1e-9 * s2.objective_value.abs().max(1.0));
    }

    #[test]
    fn determinism() {
        let lp = simple(
            &[1.0, 2.0, -1.0],
            &[
                (&[1.0, 1.0, 1.0], 10.0),
                (&[2.0, -1.0, 0.5], 7.0),
                (&[-1.0, 3.0, 1.0], 12.0),
            ],
            &[(0.0, 8.0), (0.0, 8.0), (-2.0, 8.0)],
        );
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective_value, b.objective_value);
        assert_eq!(a.iterations, b.iterations);
    }

    // --- vertex-enumeration oracle for random small LPs ---

    /// Solve an n x n system by Gaussian elimination with partial pivoting.
    fn solve_square(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let (piv, mx) = (col..n)
                .map(|r| (r, m[r][col].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            if mx < 1e-10 {
                return None;
            }
            m.swap(col, piv);
            b.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / m[i][i]).collect())
    }

    /// Best objective over all feasible vertices (intersections of n
    /// constraint/bound hyperplanes). The generated LPs have finite boxes, so
    /// a feasible LP has an optimal vertex.
    fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        // all hyperplanes: constraint rows plus both bounds of each variable
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for i in 0..lp.num_constraints() {
            planes.push((lp.constraint_row(i).to_vec(), lp.rhs()[i]));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e.clone(), lp.var_upper()[j]));
            let mut e2 = vec![0.0; n];
            e2[j] = -1.0;
            planes.push((e2, -lp.var_lower()[j]));
        }
        let mut best: Option<f64> = None;
        let idx: Vec<usize> = (0..planes.len()).collect();
        let mut combo = vec![0usize; n];
        fn rec(
            idx: &[usize],
            k: usize,
            start: usize,
            combo: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize]),
        ) {
            if k == 0 {
                f(combo);
                return;
            }
            for i in start..=idx.len().saturating_sub(k) {
                let pos = combo.len() - k;
                combo[pos] = idx[i];
                rec(idx, k - 1, i + 1, combo, f);
            }
        }
        let mut visit = |chosen: &[usize]| {
            let m: Vec<Vec<f64>> = chosen.iter().map(|&i| planes[i].0.clone()).collect();
            let b: Vec<f64> = chosen.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = solve_square(m, b) {
                if lp.max_violation(&x) <= 1e-7 {
                    let obj: f64 = lp.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.max(obj)));
                }
            }
        };
        rec(&idx, n, 0, &mut combo, &mut visit);
        best
    }

    #[test]
    fn random_lps_match_vertex_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut optimal = 0;
        for case in 0..30 {
            let n = rng.gen_range(1..=4usize);
            let m = rng.gen_range(1..=6usize);
            let mut lp = LinearProgram::new(n);
            lp.set_objective((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect());
            for j in 0..n {
                let lo = rng.gen_range(-6.0..0.0);
                let up = lo + rng.gen_range(0.5..8.0);
                lp.set_bounds(j, lo, up);
            }
            for _ in 0..m {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                lp.add_constraint(&row, rng.gen_range(-4.0..6.0));
            }
            let sol = solve(&lp).unwrap();
            let oracle = vertex_oracle(&lp);
            match (sol.status, oracle) {
                (LpStatus::Optimal, Some(best)) => {
                    optimal += 1;
                    assert!(
                        (sol.objective_value - best).abs()
                            <= 1e-6 * (1.0 + best.abs()),
                        "case {case}: solver {} vs oracle {best}",
                        sol.objective_value
                    );
                }
                (LpStatus::Infeasible, None) => {}
                (st, or) => panic!("case {case}: solver {st:?} but oracle {or:?}"),
            }
        }
        assert!(optimal >= 10, "too few feasible cases ({optimal}) to be meaningful");
    }

    #[test]
    fn feasibility_certificate_on_random_solves() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5usize);
            let mut lp = LinearProgram::new(n);
            lp.set_objective((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect());
            for j in 0..n {
                lp.set_bounds(j, -10.0, 10.0);
            }
            for _ in 0..rng.gen_range(1..=6usize) {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                lp.add_constraint(&row, rng.gen_range(-1.0..3.0));
            }
            let sol = solve(&lp).unwrap();
            if sol.status == LpStatus::Optimal {
                assert!(lp.max_violation(&sol.x) <= 1e-6);
            }
        }
    }
}
