//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use genn::rng::Rng;

/// The thirteen Haralick statistics written out as direct double sums over `p`.
pub fn haralick_naive(levels: usize, p: &[f64]) -> [f64; 13] {
    let n = levels;
    let at = |i: usize, j: usize| p[i * n + j];
    let lg = |v: f64| if v > 0.0 { v.log2() } else { 0.0 };

    let px: Vec<f64> = (0..n).map(|i| (0..n).map(|j| at(i, j)).sum()).collect();
    let py: Vec<f64> = (0..n).map(|j| (0..n).map(|i| at(i, j)).sum()).collect();
    let mut psum = vec![0.0; 2 * n - 1];
    let mut pdiff = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            psum[i + j] += at(i, j);
            pdiff[(i as i64 - j as i64).unsigned_abs() as usize] += at(i, j);
        }
    }

    let mut energy = 0.0;
    let mut inertia = 0.0;
    let mut entropy = 0.0;
    let mut idm = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = at(i, j);
            let d = i as f64 - j as f64;
            energy += v * v;
            inertia += d * d * v;
            entropy -= v * lg(v);
            idm += v / (1.0 + d * d);
        }
    }

    let mx: f64 = (0..n).map(|i| i as f64 * px[i]).sum();
    let my: f64 = (0..n).map(|j| j as f64 * py[j]).sum();
    let sx = (0..n).map(|i| (i as f64 - mx).powi(2) * px[i]).sum::<f64>().sqrt();
    let sy = (0..n).map(|j| (j as f64 - my).powi(2) * py[j]).sum::<f64>().sqrt();
    let mut correlation = 0.0;
    if sx > 1e-7 && sy > 1e-7 {
        let mut ij = 0.0;
        for i in 0..n {
            for j in 0..n {
                ij += (i * j) as f64 * at(i, j);
            }
        }
        correlation = (ij - mx * my) / (sx * sy);
    }

    let sum_average: f64 = psum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_variance: f64 = psum.iter().enumerate().map(|(k, v)| (k as f64 - sum_average).powi(2) * v).sum();
    let sum_entropy: f64 = -psum.iter().map(|&v| v * lg(v)).sum::<f64>();
    let difference_average: f64 = pdiff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let difference_variance: f64 = pdiff
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - difference_average).powi(2) * v)
        .sum();
    let difference_entropy: f64 = -pdiff.iter().map(|&v| v * lg(v)).sum::<f64>();

    let hx: f64 = -px.iter().map(|&v| v * lg(v)).sum::<f64>();
    let hy: f64 = -py.iter().map(|&v| v * lg(v)).sum::<f64>();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            hxy1 -= at(i, j) * lg(px[i] * py[j]);
            hxy2 -= px[i] * py[j] * lg(px[i] * py[j]);
        }
    }
    let imc1 = if hx.max(hy) > 0.0 { (entropy - hxy1) / hx.max(hy) } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - entropy)).exp()).max(0.0).sqrt();

    [
        energy,
        correlation,
        inertia,
        entropy,
        idm,
        sum_average,
        sum_variance,
        sum_entropy,
        difference_average,
        difference_variance,
        difference_entropy,
        imc1,
        imc2,
    ]
}

/// Random normalized GLCM with a sprinkling of exact zeros.
pub fn random_glcm(rng: &mut Rng, levels: usize) -> Vec<f64> {
    let mut cells: Vec<f64> = (0..levels * levels)
        .map(|_| if rng.next_f64() < 0.3 { 0.0 } else { rng.next_f64() })
        .collect();
    if cells.iter().all(|&c| c == 0.0) {
        cells[0] = 1.0;
    }
    let total: f64 = cells.iter().sum();
    cells.iter_mut().for_each(|c| *c /= total);
    cells
}

/// Kappa from observed and chance agreement proportions.
pub fn kappa_naive(rows: &[Vec<u64>]) -> f64 {
    let k = rows.len();
    let n: f64 = rows.iter().flatten().map(|&c| c as f64).sum();
    let p_o: f64 = (0..k).map(|i| rows[i][i] as f64).sum::<f64>() / n;
    let mut p_e = 0.0;
    for i in 0..k {
        let row: f64 = rows[i].iter().map(|&c| c as f64).sum();
        let col: f64 = rows.iter().map(|r| r[i] as f64).sum();
        p_e += (row / n) * (col / n);
    }
    (p_o - p_e) / (1.0 - p_e)
}

pub const ATTRS: [&str; 8] = [
    "area",
    "perimeter",
    "width",
    "elongation",
    "compactness",
    "mean_intensity",
    "class_prob",
    "som_cell",
];

pub const OPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

/// Expression tree kept separate from the library's own AST.
#[derive(Debug, Clone)]
pub enum Tree {
    Leaf(usize, usize, f64),
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
    Not(Box<Tree>),
}

impl Tree {
    pub fn eval(&self, values: &[f64; 8]) -> bool {
        match self {
            Tree::Leaf(a, op, v) => {
                let x = values[*a];
                match OPS[*op] {
                    "<" => x < *v,
                    "<=" => x <= *v,
                    ">" => x > *v,
                    ">=" => x >= *v,
                    "==" => x == *v,
                    _ => x != *v,
                }
            }
            Tree::And(l, r) => l.eval(values) && r.eval(values),
            Tree::Or(l, r) => l.eval(values) || r.eval(values),
            Tree::Not(e) => !e.eval(values),
        }
    }

    /// Fully parenthesized source text.
    pub fn source(&self) -> String {
        match self {
            Tree::Leaf(a, op, v) => format!("{} {} {}", ATTRS[*a], OPS[*op], v),
            Tree::And(l, r) => format!("({} and {})", l.source(), r.source()),
            Tree::Or(l, r) => format!("({} or {})", l.source(), r.source()),
            Tree::Not(e) => format!("not ({})", e.source()),
        }
    }

    /// Source text relying on `not` > `and` > `or` precedence, with only the
    /// parentheses that precedence requires.
    pub fn minimal_source(&self) -> String {
        fn go(t: &Tree, ctx: u8) -> String {
            match t {
                Tree::Leaf(..) => t.source(),
                Tree::Not(e) => format!("not {}", go(e, 3)),
                Tree::And(l, r) => {
                    let s = format!("{} and {}", go(l, 2), go(r, 3));
                    if ctx > 2 {
                        format!("({s})")
                    } else {
                        s
                    }
                }
                Tree::Or(l, r) => {
                    let s = format!("{} or {}", go(l, 1), go(r, 2));
                    if ctx > 1 {
                        format!("({s})")
                    } else {
                        s
                    }
                }
            }
        }
        go(self, 0)
    }
}

/// Small grid of thresholds so equality comparisons are hit regularly.
const VALUES: [f64; 7] = [-1.0, 0.0, 0.5, 1.0, 2.5, 10.0, 100.0];

pub fn random_tree(rng: &mut Rng, depth: usize) -> Tree {
    if depth == 0 || rng.next_f64() < 0.3 {
        return Tree::Leaf(rng.below(8), rng.below(6), VALUES[rng.below(VALUES.len())]);
    }
    match rng.below(3) {
        0 => Tree::And(Box::new(random_tree(rng, depth - 1)), Box::new(random_tree(rng, depth - 1))),
        1 => Tree::Or(Box::new(random_tree(rng, depth - 1)), Box::new(random_tree(rng, depth - 1))),
        _ => Tree::Not(Box::new(random_tree(rng, depth - 1))),
    }
}

pub fn random_values(rng: &mut Rng) -> [f64; 8] {
    let mut v = [0.0; 8];
    for x in v.iter_mut() {
        *x = VALUES[rng.below(VALUES.len())];
    }
    v[7] = v[7].round();
    v
}

pub fn attribute_set(values: &[f64; 8]) -> genn::rules::AttributeSet {
    genn::rules::AttributeSet::from_pairs(ATTRS.iter().copied().zip(values.iter().copied())).unwrap()
}
