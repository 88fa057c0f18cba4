//! Shared oracle machinery for the integration suites: a brute-force
//! day-ahead optimum (bisection on the droop coefficient with
//! vertex-enumeration feasibility of the offset polytope) that never touches
//! the production LP path, plus a deterministic generator of small random
//! scheduling instances.
#![allow(dead_code)] // each test binary uses its own subset

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use bess_core::budgets::{FrParams, LoadScenarios, TimeGrid};
use bess_core::freq_stats::FrequencyEnvelope;
use bess_core::scheduler::{BessParams, ScheduleInputs};

/// Solve a small square system by Gaussian elimination with partial
/// pivoting; None when singular.
pub fn solve_square(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, mx) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if mx < 1e-11 {
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

/// Inequality rows `row . F <= rhs` of the offset polytope at a fixed droop
/// coefficient, built directly from the raw inputs.
pub fn offset_polytope(inputs: &ScheduleInputs, alpha: f64) -> Vec<(Vec<f64>, f64)> {
    let n = inputs.grid.slots();
    let dt = inputs.grid.dt_hours();
    let dfmax = inputs.fr.delta_f_max_hz;
    let mut rows = Vec::with_capacity(4 * n);
    let mut cum_up = 0.0;
    let mut cum_down = 0.0;
    for k in 0..n {
        cum_up += dt * inputs.scen.upper()[k];
        cum_down += dt * inputs.scen.lower()[k];
        let mut r = vec![0.0; n];
        for item in r.iter_mut().take(k + 1) {
            *item = dt;
        }
        rows.push((
            r.clone(),
            inputs.bess.e_max_kwh - inputs.e_init_kwh - cum_up - alpha * inputs.env.w_up()[k],
        ));
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        rows.push((
            neg,
            inputs.e_init_kwh - inputs.bess.e_min_kwh + cum_down + alpha * inputs.env.w_down()[k],
        ));
        let mut pu = vec![0.0; n];
        pu[k] = 1.0;
        rows.push((pu, inputs.bess.p_max_kw - inputs.scen.upper()[k] - dfmax * alpha));
        let mut pl = vec![0.0; n];
        pl[k] = -1.0;
        rows.push((pl, inputs.bess.p_max_kw + inputs.scen.lower()[k] - dfmax * alpha));
    }
    rows
}

/// Feasibility of the offset polytope by enumerating all intersections of
/// `n` constraint hyperplanes. The power rows box the polytope, so a
/// nonempty region always exposes a feasible vertex.
pub fn vertex_feasible(inputs: &ScheduleInputs, alpha: f64) -> bool {
    let n = inputs.grid.slots();
    let rows = offset_polytope(inputs, alpha);
    let tol = 1e-7;
    let feasible = |f: &[f64]| {
        rows.iter().all(|(r, b)| {
            r.iter().zip(f).map(|(a, v)| a * v).sum::<f64>() <= b + tol
        })
    };
    let mut combo = vec![0usize; n];
    fn rec(
        total: usize,
        k: usize,
        start: usize,
        combo: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == 0 {
            return f(combo);
        }
        for i in start..=total.saturating_sub(k) {
            let pos = combo.len() - k;
            combo[pos] = i;
            if rec(total, k - 1, i + 1, combo, f) {
                return true;
            }
        }
        false
    }
    let mut check = |chosen: &[usize]| -> bool {
        let m: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = chosen.iter().map(|&i| rows[i].1).collect();
        match solve_square(m, b) {
            Some(f) => feasible(&f),
            None => false,
        }
    };
    rec(rows.len(), n, 0, &mut combo, &mut check)
}

/// Upper bound on any feasible droop coefficient, from the per-slot power
/// rows alone.
pub fn alpha_power_cap(inputs: &ScheduleInputs) -> f64 {
    let dfmax = inputs.fr.delta_f_max_hz;
    (0..inputs.grid.slots())
        .map(|k| {
            (2.0 * inputs.bess.p_max_kw - (inputs.scen.upper()[k] - inputs.scen.lower()[k]))
                / (2.0 * dfmax)
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Brute-force day-ahead optimum: bisection on alpha with vertex-enumeration
/// feasibility. Returns None when even alpha = 0 is infeasible.
pub fn oracle_alpha_max(inputs: &ScheduleInputs) -> Option<f64> {
    if !vertex_feasible(inputs, 0.0) {
        return None;
    }
    let cap = alpha_power_cap(inputs);
    if cap <= 0.0 {
        return Some(0.0);
    }
    if vertex_feasible(inputs, cap) {
        return Some(cap);
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if vertex_feasible(inputs, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Random small scheduling instance (n <= 4 slots of one hour), guaranteed
/// feasible at alpha = 0 by construction screening.
pub fn random_small_inputs(rng: &mut ChaCha8Rng, max_slots: usize) -> ScheduleInputs {
    loop {
        let n = rng.gen_range(1..=max_slots);
        let grid = TimeGrid::new(n as f64, n).unwrap();
        let e_nom = rng.gen_range(80.0..160.0);
        let e_min = rng.gen_range(0.0..5.0);
        let e_max = e_nom - rng.gen_range(0.0..5.0);
        let p_max = rng.gen_range(30.0..80.0);
        let bess = BessParams::new(e_nom, p_max, e_min, e_max, 0.96).unwrap();
        let e_init = rng.gen_range(e_min + 20.0..e_max - 20.0);

        let hat: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let up: Vec<f64> = hat.iter().map(|v| v + rng.gen_range(0.0..6.0)).collect();
        let down: Vec<f64> = hat.iter().map(|v| v - rng.gen_range(0.0..6.0)).collect();
        let scen = LoadScenarios::new(hat, up, down, grid).unwrap();

        let mut mean = Vec::with_capacity(n);
        let mut spread = Vec::with_capacity(n);
        let (mut m, mut s) = (0.0, 0.0);
        for _ in 0..n {
            m += rng.gen_range(-0.05..0.05);
            s += rng.gen_range(0.005..0.1);
            mean.push(m);
            spread.push(s);
        }
        let w_up: Vec<f64> = mean.iter().zip(&spread).map(|(m, s)| m + s).collect();
        let w_down: Vec<f64> = mean.iter().zip(&spread).map(|(m, s)| m - s).collect();
        let std: Vec<f64> = spread.iter().map(|s| s / 1.96).collect();
        let env = FrequencyEnvelope::from_parts(w_up, w_down, mean, std, 1.96, grid).unwrap();

        let inputs = ScheduleInputs::new(bess, e_init, scen, env, FrParams::default()).unwrap();
        if vertex_feasible(&inputs, 0.0) {
            return inputs;
        }
    }
}
