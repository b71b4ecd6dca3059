//! Truncated multivariate Taylor series.
//!
//! A [`Taylor`] holds every coefficient of total degree ≤ `order` of a
//! smooth function of `nvars` variables around a base point. Arithmetic and
//! the elementary functions act on whole series, so one evaluation of a
//! formula yields all of its partial derivatives up to `order` at once. This
//! backs the high-order mixed (x, y) jets of the spray, where nested
//! single-direction duals would need one pass per index tuple.
//!
//! Monomials are stored in graded-lexicographic order, so the series of a
//! lower order is a prefix of the coefficient vector.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use super::Scalar;

/// Highest total degree a layout is ever built for.
pub const MAX_ORDER: usize = 6;

#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `sizes[d]` = number of monomials of degree ≤ d.
    sizes: Vec<usize>,
    /// Product pairs grouped by target monomial (CSR layout).
    mul_start: Vec<usize>,
    mul_pairs: Vec<(u32, u32)>,
    /// `deriv[v][t] = (source, factor)` for `∂/∂x_v`, targets of degree < order.
    deriv: Vec<Vec<(u32, f64)>>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut sizes = Vec::with_capacity(order + 1);
        for d in 0..=order {
            push_degree(nvars, d, &mut vec![0u8; nvars], 0, &mut exps);
            sizes.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut buckets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); exps.len()];
        for (i, ei) in exps.iter().enumerate() {
            let di = degree(ei);
            for (j, ej) in exps[..sizes[order - di]].iter().enumerate() {
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                buckets[index[&sum]].push((i as u32, j as u32));
            }
        }
        let mut mul_start = Vec::with_capacity(exps.len() + 1);
        let mut mul_pairs = Vec::new();
        for b in buckets {
            mul_start.push(mul_pairs.len());
            mul_pairs.extend(b);
        }
        mul_start.push(mul_pairs.len());

        let top = if order == 0 { 0 } else { sizes[order - 1] };
        let deriv = (0..nvars)
            .map(|v| {
                exps[..top]
                    .iter()
                    .map(|e| {
                        let mut src = e.clone();
                        src[v] += 1;
                        (index[&src] as u32, src[v] as f64)
                    })
                    .collect()
            })
            .collect();

        Layout {
            nvars,
            order,
            exps,
            index,
            sizes,
            mul_start,
            mul_pairs,
            deriv,
        }
    }

    /// Shared layout for `nvars` variables, covering at least `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        assert!(
            order <= MAX_ORDER,
            "Taylor order {order} exceeds {MAX_ORDER}"
        );
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(l) = guard.get(&nvars) {
            if l.order >= order {
                return l.clone();
            }
        }
        let built = Arc::new(Layout::build(nvars, order));
        guard.insert(nvars, built.clone());
        built
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn size(&self, order: usize) -> usize {
        self.sizes[order]
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn push_degree(nvars: usize, left: usize, cur: &mut Vec<u8>, pos: usize, out: &mut Vec<Vec<u8>>) {
    if pos == nvars - 1 {
        cur[pos] = left as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        push_degree(nvars, left - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

#[derive(Debug, Clone)]
pub struct Series {
    layout: Arc<Layout>,
    order: usize,
    coef: Vec<f64>,
}

/// A truncated Taylor series, or a bare constant that adapts to whatever
/// series it meets.
#[derive(Debug, Clone)]
pub enum Taylor {
    Const(f64),
    Poly(Series),
}

impl Taylor {
    /// The series of the coordinate function `x_var` around `base`.
    pub fn variable(layout: &Arc<Layout>, order: usize, var: usize, base: f64) -> Taylor {
        let mut coef = vec![0.0; layout.size(order)];
        coef[0] = base;
        if order > 0 {
            let mut e = vec![0u8; layout.nvars];
            e[var] = 1;
            coef[layout.index[&e]] = 1.0;
        }
        Taylor::Poly(Series {
            layout: layout.clone(),
            order,
            coef,
        })
    }

    /// Seeds `x_i = base_i + h_i` for every variable of a fresh layout.
    pub fn seed(base: &[f64], order: usize) -> Vec<Taylor> {
        let layout = Layout::get(base.len(), order);
        base.iter()
            .enumerate()
            .map(|(i, &b)| Taylor::variable(&layout, order, i, b))
            .collect()
    }

    /// Builds a series from a coefficient rule on exponent vectors.
    pub fn from_coefficients(
        layout: &Arc<Layout>,
        order: usize,
        f: impl Fn(&[u8]) -> f64,
    ) -> Taylor {
        let coef = (0..layout.size(order))
            .map(|k| f(&layout.exps[k]))
            .collect();
        Taylor::Poly(Series {
            layout: layout.clone(),
            order,
            coef,
        })
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            Taylor::Const(_) => None,
            Taylor::Poly(s) => Some(s.order),
        }
    }

    pub fn layout(&self) -> Option<&Arc<Layout>> {
        match self {
            Taylor::Const(_) => None,
            Taylor::Poly(s) => Some(&s.layout),
        }
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exps: &[u8]) -> f64 {
        match self {
            Taylor::Const(c) => {
                if exps.iter().all(|&e| e == 0) {
                    *c
                } else {
                    0.0
                }
            }
            Taylor::Poly(s) => match s.layout.index_of(exps) {
                Some(k) if k < s.coef.len() => s.coef[k],
                _ => 0.0,
            },
        }
    }

    /// Partial derivative `∂^|e| f / ∂x^e` at the base point.
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
        self.coefficient(exps) * fact
    }

    /// Partial derivative for a multi-index given as a list of variables.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        let n = match self {
            Taylor::Const(_) => vars.iter().copied().max().map_or(1, |m| m + 1),
            Taylor::Poly(s) => s.layout.nvars,
        };
        let mut e = vec![0u8; n];
        for &v in vars {
            e[v] += 1;
        }
        self.derivative(&e)
    }

    /// The series of `∂f/∂x_var`, one order lower.
    pub fn diff(&self, var: usize) -> Taylor {
        match self {
            Taylor::Const(_) => Taylor::Const(0.0),
            Taylor::Poly(s) => {
                if s.order == 0 {
                    return Taylor::Const(0.0);
                }
                let order = s.order - 1;
                let size = s.layout.size(order);
                let table = &s.layout.deriv[var][..size];
                let coef = table
                    .iter()
                    .map(|&(src, f)| s.coef[src as usize] * f)
                    .collect();
                Taylor::Poly(Series {
                    layout: s.layout.clone(),
                    order,
                    coef,
                })
            }
        }
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Taylor {
        match self {
            Taylor::Const(c) => Taylor::Const(*c),
            Taylor::Poly(s) => {
                let order = order.min(s.order);
                Taylor::Poly(Series {
                    layout: s.layout.clone(),
                    order,
                    coef: s.coef[..s.layout.size(order)].to_vec(),
                })
            }
        }
    }

    /// Re-expresses the series in a larger variable set, sending variable `v`
    /// to `map[v]` of `target`.
    pub fn embed(&self, target: &Arc<Layout>, map: &[usize]) -> Taylor {
        match self {
            Taylor::Const(c) => Taylor::Const(*c),
            Taylor::Poly(s) => {
                let mut coef = vec![0.0; target.size(s.order)];
                let mut e = vec![0u8; target.nvars];
                for (k, &c) in s.coef.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    e.iter_mut().for_each(|v| *v = 0);
                    for (v, &p) in s.layout.exps[k].iter().enumerate() {
                        e[map[v]] += p;
                    }
                    coef[target.index[&e]] = c;
                }
                Taylor::Poly(Series {
                    layout: target.clone(),
                    order: s.order,
                    coef,
                })
            }
        }
    }

    fn constant_term(&self) -> f64 {
        match self {
            Taylor::Const(c) => *c,
            Taylor::Poly(s) => s.coef[0],
        }
    }

    /// `sum_k c_k h^k` where `h = self - self(0)`, by Horner's scheme.
    fn compose(&self, coeffs: &[f64]) -> Taylor {
        match self {
            Taylor::Const(_) => Taylor::Const(coeffs[0]),
            Taylor::Poly(s) => {
                let mut h = s.clone();
                h.coef[0] = 0.0;
                let h = Taylor::Poly(h);
                let mut acc = Taylor::Const(coeffs[s.order.min(coeffs.len() - 1)]);
                for k in (0..s.order.min(coeffs.len() - 1)).rev() {
                    acc = (acc * h.clone()).offset(coeffs[k]);
                }
                match acc {
                    Taylor::Const(c) => {
                        let mut coef = vec![0.0; s.coef.len()];
                        coef[0] = c;
                        Taylor::Poly(Series {
                            layout: s.layout.clone(),
                            order: s.order,
                            coef,
                        })
                    }
                    poly => poly,
                }
            }
        }
    }

    fn needed_terms(&self) -> usize {
        self.order().unwrap_or(0) + 1
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn zip_series(a: &Series, b: &Series, f: impl Fn(f64, f64) -> f64) -> Series {
    let (long, order) = if a.layout.order >= b.layout.order {
        (&a.layout, a.order.min(b.order))
    } else {
        (&b.layout, a.order.min(b.order))
    };
    let size = long.size(order);
    let coef = a.coef[..size]
        .iter()
        .zip(&b.coef[..size])
        .map(|(&x, &y)| f(x, y))
        .collect();
    Series {
        layout: long.clone(),
        order,
        coef,
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        match (self, rhs) {
            (Taylor::Const(a), Taylor::Const(b)) => Taylor::Const(a + b),
            (Taylor::Const(a), Taylor::Poly(mut s)) | (Taylor::Poly(mut s), Taylor::Const(a)) => {
                s.coef[0] += a;
                Taylor::Poly(s)
            }
            (Taylor::Poly(a), Taylor::Poly(b)) => Taylor::Poly(zip_series(&a, &b, |x, y| x + y)),
        }
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self + (-rhs)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        match self {
            Taylor::Const(a) => Taylor::Const(-a),
            Taylor::Poly(mut s) => {
                s.coef.iter_mut().for_each(|c| *c = -*c);
                Taylor::Poly(s)
            }
        }
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        match (self, rhs) {
            (Taylor::Const(a), Taylor::Const(b)) => Taylor::Const(a * b),
            (Taylor::Const(a), Taylor::Poly(mut s)) | (Taylor::Poly(mut s), Taylor::Const(a)) => {
                s.coef.iter_mut().for_each(|c| *c *= a);
                Taylor::Poly(s)
            }
            (Taylor::Poly(a), Taylor::Poly(b)) => {
                let layout = if a.layout.order >= b.layout.order {
                    a.layout.clone()
                } else {
                    b.layout.clone()
                };
                let order = a.order.min(b.order);
                let size = layout.size(order);
                let mut coef = vec![0.0; size];
                let (ac, bc) = (&a.coef, &b.coef);
                for (k, out) in coef.iter_mut().enumerate() {
                    let pairs = &layout.mul_pairs[layout.mul_start[k]..layout.mul_start[k + 1]];
                    let mut acc = 0.0;
                    for &(i, j) in pairs {
                        acc += ac[i as usize] * bc[j as usize];
                    }
                    *out = acc;
                }
                Taylor::Poly(Series {
                    layout,
                    order,
                    coef,
                })
            }
        }
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        match rhs {
            Taylor::Const(b) => self * Taylor::Const(1.0 / b),
            poly => self * poly.recip(),
        }
    }
}

impl Scalar for Taylor {
    fn from_f64(v: f64) -> Self {
        Taylor::Const(v)
    }

    fn value(&self) -> f64 {
        self.constant_term()
    }

    fn is_plain(&self) -> bool {
        matches!(self, Taylor::Const(_))
    }

    fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    fn sin(self) -> Self {
        let a = self.constant_term();
        let (s, c) = a.sin_cos();
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<f64> = (0..self.needed_terms())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn cos(self) -> Self {
        let a = self.constant_term();
        let (s, c) = a.sin_cos();
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<f64> = (0..self.needed_terms())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn exp(self) -> Self {
        let e = self.constant_term().exp();
        let coeffs: Vec<f64> = (0..self.needed_terms()).map(|k| e / factorial(k)).collect();
        self.compose(&coeffs)
    }

    fn ln(self) -> Self {
        let a = self.constant_term();
        let coeffs: Vec<f64> = (0..self.needed_terms())
            .map(|k| {
                if k == 0 {
                    a.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * a.powi(k as i32))
                }
            })
            .collect();
        self.compose(&coeffs)
    }

    fn atan(self) -> Self {
        let a = self.constant_term();
        if self.is_plain() {
            return Taylor::Const(a.atan());
        }
        // atan(a + h) = atan(a) + atan(h / (1 + a² + a h)), and the inner
        // argument has no constant term, so its odd power series terminates.
        let mut h = self.clone();
        if let Taylor::Poly(s) = &mut h {
            s.coef[0] = 0.0;
        }
        let u = h.clone() / (h * Taylor::Const(a)).offset(1.0 + a * a);
        let terms = self.needed_terms();
        let coeffs: Vec<f64> = (0..terms)
            .map(|k| {
                if k % 2 == 0 {
                    0.0
                } else {
                    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    sign / k as f64
                }
            })
            .collect();
        u.compose(&coeffs).offset(a.atan())
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Taylor::Const(1.0);
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self;
        let mut acc: Option<Taylor> = None;
        let mut e = n as u32;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a * base.clone(),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.clone() * base;
        }
        acc.unwrap_or(Taylor::Const(1.0))
    }

    fn powf(self, p: f64) -> Self {
        let a = self.constant_term();
        let mut coeffs = Vec::with_capacity(self.needed_terms());
        let mut binom = 1.0;
        for k in 0..self.needed_terms() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            coeffs.push(binom * a.powf(p - k as f64));
        }
        self.compose(&coeffs)
    }

    fn recip(self) -> Self {
        let a = self.constant_term();
        let coeffs: Vec<f64> = (0..self.needed_terms())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / a.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&coeffs)
    }

    fn scale(self, k: f64) -> Self {
        self * Taylor::Const(k)
    }

    fn offset(self, k: f64) -> Self {
        self + Taylor::Const(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_is_graded_prefix() {
        let l = Layout::get(3, 4);
        assert_eq!(l.size(0), 1);
        assert_eq!(l.size(1), 4);
        assert_eq!(l.size(2), 10);
        assert_eq!(l.size(3), 20);
        assert_eq!(l.exponents(1), &[1, 0, 0]);
    }

    #[test]
    fn polynomial_partials() {
        // f = x^2 y at (1, 2)
        let x = Taylor::seed(&[1.0, 2.0], 3);
        let f = x[0].clone() * x[0].clone() * x[1].clone();
        assert_eq!(f.value(), 2.0);
        assert_eq!(f.partial(&[0]), 4.0);
        assert_eq!(f.partial(&[1]), 1.0);
        assert_eq!(f.partial(&[0, 0]), 4.0);
        assert_eq!(f.partial(&[0, 1]), 2.0);
        assert_eq!(f.partial(&[0, 0, 1]), 2.0);
        assert_eq!(f.partial(&[1, 1]), 0.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Taylor::seed(&[0.7], 5);
        let t = x[0].clone();
        let checks: Vec<(Taylor, Box<dyn Fn(usize) -> f64>)> = vec![
            (t.clone().exp(), Box::new(|_| 0.7f64.exp())),
            (
                t.clone().sin(),
                Box::new(|k| [0.7f64.sin(), 0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos()][k % 4]),
            ),
            (
                t.clone().recip(),
                Box::new(|k| {
                    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                    s * factorial(k) / 0.7f64.powi(k as i32 + 1)
                }),
            ),
        ];
        for (series, exact) in checks {
            for k in 0..=5 {
                let vars = vec![0; k];
                assert_relative_eq!(series.partial(&vars), exact(k), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn atan_and_ln_derivatives() {
        let x = Taylor::seed(&[0.4], 4);
        let a = x[0].clone().atan();
        // d/dx atan = 1/(1+x^2); d2 = -2x/(1+x^2)^2
        let d = 1.0 + 0.16;
        assert_relative_eq!(a.partial(&[0]), 1.0 / d, max_relative = 1e-14);
        assert_relative_eq!(a.partial(&[0, 0]), -0.8 / (d * d), max_relative = 1e-14);
        let l = x[0].clone().ln();
        assert_relative_eq!(
            l.partial(&[0, 0, 0]),
            2.0 / 0.4f64.powi(3),
            max_relative = 1e-13
        );
    }

    #[test]
    fn diff_lowers_order_and_matches_partials() {
        let x = Taylor::seed(&[0.3, -0.2], 4);
        let f = (x[0].clone() * x[1].clone()).exp() + x[1].clone().offset(2.0).powf(2.5);
        let g = f.diff(1);
        assert_eq!(g.order(), Some(3));
        assert_relative_eq!(
            g.partial(&[0, 0]),
            f.partial(&[1, 0, 0]),
            max_relative = 1e-13
        );
    }

    #[test]
    fn embed_places_variables() {
        let x = Taylor::seed(&[1.0], 3);
        let f = x[0].clone().powi(3);
        let wide = Layout::get(3, 3);
        let g = f.embed(&wide, &[2]);
        assert_eq!(g.partial(&[2, 2, 2]), 6.0);
        assert_eq!(g.partial(&[0]), 0.0);
    }
}
