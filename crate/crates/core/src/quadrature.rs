//! Gauss-Legendre rules and composite integration helpers.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("rule size must be positive"));
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        GlRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with `panels` equal sub-intervals.
    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        let half = 0.5 * h;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + half * x);
            }
            total += s * half;
        }
        total
    }

    /// Tensor-product composite integral over `[a0,b0] × [a1,b1]`.
    pub fn composite_2d(
        &self,
        (a0, b0): (f64, f64),
        (a1, b1): (f64, f64),
        panels: usize,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> f64 {
        let (nodes0, w0) = self.expand(a0, b0, panels);
        let (nodes1, w1) = self.expand(a1, b1, panels);
        let mut total = 0.0;
        for (x, wx) in nodes0.iter().zip(&w0) {
            let mut row = 0.0;
            for (y, wy) in nodes1.iter().zip(&w1) {
                row += wy * f(*x, *y);
            }
            total += wx * row;
        }
        total
    }

    /// Nodes and weights of the composite rule on `[a, b]`.
    pub fn expand(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let half = 0.5 * h;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * x);
                ws.push(half * w);
            }
        }
        (xs, ws)
    }
}

/// Shared, lazily built rule of size `n`.
pub fn gl_rule(n: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(GlRule::new(n))).clone()
}
