//! Brute-force oracles shared by the integration tests and the acceptance
//! runner.
#![allow(dead_code)]

use fbpanel_core::identified::{build_feasibility_lp, ExogeneityMode};
use fbpanel_core::lp::{LinearProgram, Sense};
use fbpanel_core::model::normal_percentile_grid;
use fbpanel_core::{compute_q, FeedbackProcess, HeterogeneityDist, HeterogeneityGrid, Link, OutcomeVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

fn dense(lp: &LinearProgram, rows: &[usize], cols: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(rows.len(), cols.len());
    let mut b = DVector::zeros(rows.len());
    for (i, &r) in rows.iter().enumerate() {
        let row = &lp.rows()[r];
        b[i] = row.rhs;
        for &(j, v) in &row.coeffs {
            if let Some(c) = cols.iter().position(|&x| x == j) {
                a[(i, c)] = v;
            }
        }
    }
    (a, b)
}

/// All basic feasible solutions of `{x >= 0 : A x = b}`, found by trying
/// every set of linearly independent columns.
pub fn vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<DVector<f64>> {
    let (m, n) = a.shape();
    let scale = 1.0 + b.amax();
    let mut out = Vec::new();
    if b.amax() <= 1e-12 {
        out.push(DVector::zeros(n));
    }
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if cols.len() > m {
            continue;
        }
        let sub = DMatrix::from_fn(m, cols.len(), |i, c| a[(i, cols[c])]);
        let svd = sub.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-10 * smax.max(1e-300) {
            continue;
        }
        let z = svd.solve(b, 1e-12 * smax).expect("full column rank");
        if (&sub * &z - b).amax() > 1e-9 * scale || z.min() < -1e-10 {
            continue;
        }
        let mut x = DVector::zeros(n);
        for (c, &j) in cols.iter().enumerate() {
            x[j] = z[c].max(0.0);
        }
        out.push(x);
    }
    out
}

/// Status and optimum of a small program by vertex and extreme-ray
/// enumeration.
pub fn lp_oracle(lp: &LinearProgram) -> Oracle {
    let n = lp.n_vars();
    let rows: Vec<usize> = (0..lp.n_rows()).collect();
    let cols: Vec<usize> = (0..n).collect();
    let (a, b) = dense(lp, &rows, &cols);
    let verts = vertices(&a, &b);
    if verts.is_empty() {
        return Oracle::Infeasible;
    }
    let mut c = DVector::zeros(n);
    let sign = match lp.objective() {
        Some(o) => {
            for &(j, v) in &o.coeffs {
                c[j] = v;
            }
            if o.sense == Sense::Maximize { -1.0 } else { 1.0 }
        }
        None => return Oracle::Optimal(0.0),
    };
    c *= sign;
    // Extreme rays of the recession cone, normalized by 1'd = 1.
    let ray_a = a.clone().insert_row(a.nrows(), 1.0);
    let mut ray_b = DVector::zeros(a.nrows() + 1);
    ray_b[a.nrows()] = 1.0;
    if vertices(&ray_a, &ray_b).iter().any(|d| c.dot(d) < -1e-9) {
        return Oracle::Unbounded;
    }
    let best = verts.iter().map(|v| c.dot(v)).fold(f64::INFINITY, f64::min);
    Oracle::Optimal(sign * best)
}

pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..=4.min(n));
    let mut lp = LinearProgram::new(n);
    let feasible_by_construction = rng.random_bool(0.7);
    let x0: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.6) { rng.random_range(0.0..2.0) } else { 0.0 }).collect();
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.8) {
                coeffs.push((j, rng.random_range(-3.0..3.0)));
            }
        }
        let rhs = if feasible_by_construction {
            coeffs.iter().map(|&(j, v)| v * x0[j]).sum()
        } else {
            rng.random_range(-3.0..3.0)
        };
        lp.add_row(coeffs, rhs).unwrap();
    }
    if rng.random_bool(0.9) {
        let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
        let c = (0..n).map(|j| (j, rng.random_range(-2.0..2.0))).collect();
        lp.set_objective(sense, c).unwrap();
    }
    lp
}

/// Feasibility of a program whose rows split into independent blocks, by
/// enumerating vertices block by block.
pub fn block_feasible(lp: &LinearProgram) -> bool {
    let n = lp.n_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for row in lp.rows() {
        if let Some(&(first, _)) = row.coeffs.first() {
            for &(j, _) in &row.coeffs[1..] {
                let (ra, rb) = (find(&mut parent, first), find(&mut parent, j));
                parent[ra] = rb;
            }
        } else if row.rhs.abs() > 1e-12 {
            return false;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for j in 0..n {
        let r = find(&mut parent, j);
        groups.entry(r).or_default().push(j);
    }
    groups.values().all(|cols| {
        let rows: Vec<usize> = (0..lp.n_rows())
            .filter(|&i| lp.rows()[i].coeffs.first().is_some_and(|&(j, _)| cols.contains(&j)))
            .collect();
        let (a, b) = dense(lp, &rows, cols);
        !vertices(&a, &b).is_empty()
    })
}

/// Random two-period model with `K = 2`, interior heterogeneity and feedback.
pub fn random_small_model(rng: &mut ChaCha8Rng, link: Link) -> (f64, HeterogeneityGrid, OutcomeVector) {
    let theta = rng.random_range(-1.0..1.0);
    let grid = match link {
        Link::Exponential => HeterogeneityGrid::new(vec![1.2, 2.0]).unwrap(),
        _ => HeterogeneityGrid::new(vec![-0.6, 0.7]).unwrap(),
    };
    let w0 = rng.random_range(0.2..0.8);
    let w1 = rng.random_range(0.2..0.8);
    let pi = HeterogeneityDist::new(vec![w0, 1.0 - w0], vec![w1, 1.0 - w1]).unwrap();
    let feedback = FeedbackProcess::from_fn(2, 2, |_, _, _, _| rng.random_range(0.1..0.9)).unwrap();
    let q = compute_q(theta, link, &grid, &pi, &feedback, [0.5, 0.5]).unwrap();
    (theta, grid, q)
}

/// Brute-force membership of `theta_tilde` in the identified set.
pub fn psi_oracle(theta_tilde: f64, q: &OutcomeVector, link: Link, grid: &HeterogeneityGrid, mode: ExogeneityMode) -> bool {
    let lp = build_feasibility_lp(theta_tilde, q, link, grid, mode).unwrap();
    block_feasible(&lp)
}

pub fn default_grid(k: usize) -> HeterogeneityGrid {
    normal_percentile_grid(k).unwrap().0
}

/// Probability of every observable history, keyed by `(x1, outcomes,
/// covariates x_2..x_T)`, by walking all outcome and covariate paths
/// forward in time for each support point.
pub fn path_enumeration(
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    pi: &HeterogeneityDist,
    feedback: &FeedbackProcess,
) -> std::collections::HashMap<(u8, Vec<u8>, Vec<u8>), f64> {
    let periods = feedback.periods();
    let mut out = std::collections::HashMap::new();
    #[allow(clippy::too_many_arguments)]
    fn walk(
        t: usize,
        periods: usize,
        prob: f64,
        ys: &mut Vec<u8>,
        xs: &mut Vec<u8>,
        k: usize,
        theta: f64,
        link: Link,
        alpha: f64,
        feedback: &FeedbackProcess,
        out: &mut std::collections::HashMap<(u8, Vec<u8>, Vec<u8>), f64>,
    ) {
        if t > periods {
            *out.entry((xs[0], ys.clone(), xs[1..].to_vec())).or_insert(0.0) += prob;
            return;
        }
        let x_choices: Vec<(u8, f64)> = if t == 1 {
            vec![(xs[0], 1.0)]
        } else {
            let g = feedback.get(t, ys, xs, k);
            vec![(1, g), (0, 1.0 - g)]
        };
        for (x, px) in x_choices {
            if t > 1 {
                xs.push(x);
            }
            let f = link.evaluate(theta * x as f64 + alpha).unwrap();
            for (y, py) in [(1u8, f), (0u8, 1.0 - f)] {
                ys.push(y);
                walk(t + 1, periods, prob * px * py, ys, xs, k, theta, link, alpha, feedback, out);
                ys.pop();
            }
            if t > 1 {
                xs.pop();
            }
        }
    }
    for x1 in [0u8, 1] {
        for (k, &alpha) in grid.points().iter().enumerate() {
            let mut ys = Vec::new();
            let mut xs = vec![x1];
            walk(1, periods, pi.weights(x1)[k], &mut ys, &mut xs, k, theta, link, alpha, feedback, &mut out);
        }
    }
    out
}

/// Random interior model with `T <= 3`, `K <= 5`.
pub fn random_model(rng: &mut ChaCha8Rng) -> (f64, Link, HeterogeneityGrid, HeterogeneityDist, FeedbackProcess) {
    let periods = rng.random_range(2..=3);
    let k = rng.random_range(1..=5);
    let link = [Link::Logit, Link::Probit, Link::Exponential][rng.random_range(0..3)];
    let theta = rng.random_range(-1.5..1.5);
    let start = if link == Link::Exponential { 1.5 } else { rng.random_range(-2.0..0.0) };
    let points: Vec<f64> = (0..k).map(|i| start + 0.6 * i as f64 + rng.random_range(0.0..0.3)).collect();
    let grid = HeterogeneityGrid::new(points).unwrap();
    let mut draw = || {
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect::<Vec<_>>()
    };
    let (w0, w1) = (draw(), draw());
    let pi = HeterogeneityDist::new(w0, w1).unwrap();
    let feedback = FeedbackProcess::from_fn(periods, k, |_, _, _, _| rng.random_range(0.02..0.98)).unwrap();
    (theta, link, grid, pi, feedback)
}

/// Largest gap between `compute_q` and the path enumeration.
pub fn q_oracle_gap(rng: &mut ChaCha8Rng) -> f64 {
    let (theta, link, grid, pi, feedback) = random_model(rng);
    let q = compute_q(theta, link, &grid, &pi, &feedback, [0.5, 0.5]).unwrap();
    let paths = path_enumeration(theta, link, &grid, &pi, &feedback);
    assert_eq!(paths.len(), q.stacked().len());
    paths
        .iter()
        .map(|((x1, ys, xs), p)| (q.get(*x1, &fbpanel_core::History::new(ys, xs).unwrap()) - p).abs())
        .fold(0.0, f64::max)
}
