//! Quadrature rules: Gauss–Hermite for the standard Gaussian, Gauss–Legendre,
//! and a globally adaptive Gauss–Kronrod (7/15) integrator.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use super::Estimate;
use crate::{Error, Result};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Probabilists' Gauss–Hermite rule of the given order: `Σ w_i g(x_i) ≈ ∫ g dγ`,
/// weights summing to one. Rules are cached per order.
pub fn gauss_hermite(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(build_gauss_hermite(order));
    cache.lock().expect("rule cache poisoned").insert(order, rule.clone());
    rule
}

/// Orthonormal Hermite recurrence at `x`. Returns `(p_n, p_{n-1}, ln Σ_{j<n} p_j²)`,
/// with `p_n`/`p_{n-1}` sharing an arbitrary common scale.
fn hermite_orthonormal(x: f64, n: usize) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 0.0;
    let mut log_scale = 0.0;
    for j in 0..n {
        sum += cur * cur;
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            sum *= 1e-200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    (cur, prev, sum.ln() + log_scale)
}

fn build_gauss_hermite(order: usize) -> Rule {
    assert!(order >= 1, "Gauss-Hermite order must be positive");
    // Golub–Welsch for initial nodes, then Newton on the orthonormal polynomial.
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for j in 1..order {
        let b = (j as f64).sqrt();
        jacobi[(j - 1, j)] = b;
        jacobi[(j, j - 1)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sqrt_n = (order as f64).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (pn, pn1, _) = hermite_orthonormal(*x, order);
            let step = pn / (sqrt_n * pn1);
            *x -= step;
            if step.abs() < 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // Enforce exact symmetry.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let m = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -m;
        nodes[j] = m;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes.iter().map(|&x| (-hermite_orthonormal(x, order).2).exp()).collect();
    let total: f64 = super::pairwise_sum(&weights);
    for w in weights.iter_mut() {
        *w /= total;
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(build_gauss_legendre(order));
    cache.lock().expect("rule cache poisoned").insert(order, rule.clone());
    rule
}

fn build_gauss_legendre(order: usize) -> Rule {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod 7/15 on `[a, b]`.
///
/// The error of each panel is `|K15 - G7|`; the panel with the largest error
/// is bisected until the summed error falls below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_gk15<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::ToleranceExceeded {
                what: "adaptive Gauss-Kronrod",
                achieved: total_err,
                tolerance: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Interval { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to shed the drift of the running updates.
    let mut panels: Vec<Interval> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    Ok(Estimate { value: super::pairwise_sum(&values), error: super::pairwise_sum(&errors) })
}
