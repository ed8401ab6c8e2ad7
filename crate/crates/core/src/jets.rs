//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a scalar function at a point,
//! up to a fixed total order.  Every derivative used anywhere in the crate
//! (Christoffel symbols, curvature, covariant derivatives of curvature)
//! comes out of this module; there is no symbolic differentiation and no
//! finite differencing on the main computation path.
//!
//! Coefficients are stored densely, indexed by multi-indices enumerated in
//! graded lexicographic order.  The enumeration is a prefix chain: the table
//! for order `m` is a prefix of the table for order `m+1`, so truncation is a
//! slice and partial derivatives land in the right slots without remapping.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Error;

/// Maximum supported jet order.  Two metric derivatives give the curvature,
/// two more give its second covariant derivative.
pub const MAX_ORDER: usize = 4;

pub(crate) struct IndexTable {
    pub pos: HashMap<Vec<u8>, usize>,
    /// (i, j, k): result[k] += a[i] * b[j].
    pub mul_plan: Vec<(u32, u32, u32)>,
    /// Per variable v, aligned with the order-1 table: (source slot, factor).
    pub diff_plan: Vec<Vec<(usize, f64)>>,
}

fn enumerate_indices(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    if nvars == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    fn rec(slots: usize, left: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        // lex descending in the leading variable
        for e in (0..=left).rev() {
            cur.push(e);
            rec(slots - 1, left - e, cur, out);
            cur.pop();
        }
    }
    for d in 0..=order as u8 {
        rec(nvars, d, &mut Vec::new(), &mut out);
    }
    out
}

impl IndexTable {
    fn build(nvars: usize, order: usize) -> IndexTable {
        let indices = enumerate_indices(nvars, order);
        let pos: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut mul_plan = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            let da: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in indices.iter().enumerate() {
                let db: usize = b.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = pos[&sum];
                mul_plan.push((i as u32, j as u32, k as u32));
            }
        }
        let mut diff_plan = Vec::new();
        if order > 0 {
            let sub_len = size_of(nvars, order - 1);
            for v in 0..nvars {
                let mut plan = Vec::with_capacity(sub_len);
                for beta in indices.iter().take(sub_len) {
                    let mut src = beta.clone();
                    src[v] += 1;
                    plan.push((pos[&src], (beta[v] + 1) as f64));
                }
                diff_plan.push(plan);
            }
        }
        IndexTable {
            pos,
            mul_plan,
            diff_plan,
        }
    }
}

static TABLES: Lazy<Mutex<HashMap<(usize, usize), Arc<IndexTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn table(nvars: usize, order: usize) -> Arc<IndexTable> {
    let mut map = TABLES.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((nvars, order))
        .or_insert_with(|| Arc::new(IndexTable::build(nvars, order)))
        .clone()
}

/// Number of multi-indices with |alpha| <= order in nvars variables.
pub fn size_of(nvars: usize, order: usize) -> usize {
    // C(nvars + order, order)
    let mut num = 1usize;
    let mut den = 1usize;
    for k in 1..=order {
        num *= nvars + k;
        den *= k;
    }
    num / den
}

/// Truncated Taylor expansion of a scalar at a point.
///
/// `coeffs[pos(alpha)]` is the Taylor coefficient; the alpha-th partial
/// derivative is `alpha! * coeffs[pos(alpha)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub order: usize,
    pub nvars: usize,
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(c: f64, nvars: usize, order: usize) -> Jet {
        let mut coeffs = vec![0.0; size_of(nvars, order)];
        coeffs[0] = c;
        Jet {
            order,
            nvars,
            coeffs,
        }
    }

    /// The coordinate function `x_v` expanded at `value`.
    pub fn variable(v: usize, value: f64, nvars: usize, order: usize) -> Jet {
        let mut j = Jet::constant(value, nvars, order);
        if order >= 1 {
            // slot of e_v in graded lex: degree-1 block is listed with the
            // leading variable descending, so e_0 comes last in that block.
            let tab = table(nvars, order);
            let mut e = vec![0u8; nvars];
            e[v] = 1;
            let p = tab.pos[&e];
            j.coeffs[p] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// True partial derivative for the multi-index `alpha` (alpha! * coeff).
    pub fn partial(&self, alpha: &[u8]) -> Result<f64, Error> {
        let deg: usize = alpha.iter().map(|&x| x as usize).sum();
        if deg > self.order || alpha.len() != self.nvars {
            return Err(Error::OrderExceeded {
                requested: deg,
                available: self.order,
            });
        }
        let tab = table(self.nvars, self.order);
        let mut fact = 1.0;
        for &a in alpha {
            for k in 2..=a as u64 {
                fact *= k as f64;
            }
        }
        Ok(fact * self.coeffs[tab.pos[alpha]])
    }

    /// Gradient (all first partials); requires order >= 1.
    pub fn gradient(&self) -> Vec<f64> {
        let tab = table(self.nvars, self.order);
        (0..self.nvars)
            .map(|v| {
                let mut e = vec![0u8; self.nvars];
                e[v] = 1;
                self.coeffs[tab.pos[&e]]
            })
            .collect()
    }

    /// Truncate to a lower (or equal) order.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order);
        Jet {
            order,
            nvars: self.nvars,
            coeffs: self.coeffs[..size_of(self.nvars, order)].to_vec(),
        }
    }

    /// The jet of the partial derivative d/dx_v, one order lower.
    pub fn diff(&self, v: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let tab = table(self.nvars, self.order);
        let plan = &tab.diff_plan[v];
        let coeffs = plan
            .iter()
            .map(|&(src, f)| f * self.coeffs[src])
            .collect();
        Jet {
            order: self.order - 1,
            nvars: self.nvars,
            coeffs,
        }
    }

    fn align(&self, other: &Jet) -> (Jet, Jet) {
        assert_eq!(self.nvars, other.nvars, "jet nvars mismatch");
        let order = self.order.min(other.order);
        (self.truncate(order), other.truncate(order))
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.align(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.align(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Jet {
        let mut a = self.clone();
        for x in a.coeffs.iter_mut() {
            *x = -*x;
        }
        a
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut a = self.clone();
        for x in a.coeffs.iter_mut() {
            *x *= s;
        }
        a
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = self.align(other);
        let tab = table(a.nvars, a.order);
        let mut coeffs = vec![0.0; a.coeffs.len()];
        for &(i, j, k) in &tab.mul_plan {
            coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet {
            order: a.order,
            nvars: a.nvars,
            coeffs,
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        assert_eq!(self.order, other.order);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += s * y;
        }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn recip(&self) -> Result<Jet, Error> {
        let c = self.value();
        if c == 0.0 {
            return Err(Error::DomainError {
                func: "1/x".into(),
                value: c,
            });
        }
        let mut series = Vec::with_capacity(self.order + 1);
        let mut p = 1.0 / c;
        for _ in 0..=self.order {
            series.push(p);
            p *= -1.0 / c;
        }
        Ok(self.horner(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, Error> {
        Ok(self.mul(&other.recip()?))
    }

    /// Evaluate a univariate Taylor series (coeffs of (x - x0)^k) on this jet.
    fn horner(&self, series: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(*series.last().unwrap(), self.nvars, self.order);
        for &c in series.iter().rev().skip(1) {
            acc = acc.mul(&delta);
            acc.coeffs[0] += c;
        }
        acc
    }

    /// Integer power, exact for any base sign.
    pub fn powi(&self, mut e: i64) -> Result<Jet, Error> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut acc = Jet::constant(1.0, self.nvars, self.order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Real power; requires a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet, Error> {
        let c = self.value();
        if c <= 0.0 {
            return Err(Error::DomainError {
                func: format!("x^{p}"),
                value: c,
            });
        }
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(binom * c.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.horner(&series))
    }

    /// Composition with a named elementary function.
    pub fn compose_elementary(&self, name: &str) -> Result<Jet, Error> {
        let c = self.value();
        let n = self.order;
        let series: Vec<f64> = match name {
            "exp" => {
                let e = c.exp();
                let mut fact = 1.0;
                (0..=n)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        e / fact
                    })
                    .collect()
            }
            "log" => {
                if c <= 0.0 {
                    return Err(Error::DomainError {
                        func: "log".into(),
                        value: c,
                    });
                }
                let mut s = vec![c.ln()];
                for k in 1..=n {
                    s.push(-(-1.0f64).powi(k as i32) / (k as f64 * c.powi(k as i32)));
                }
                s
            }
            "sqrt" => {
                if c < 0.0 {
                    return Err(Error::DomainError {
                        func: "sqrt".into(),
                        value: c,
                    });
                }
                if c == 0.0 && n >= 1 {
                    return Err(Error::DomainError {
                        func: "sqrt".into(),
                        value: c,
                    });
                }
                return self.powf(0.5).or_else(|_| {
                    // c == 0, order 0 only
                    Ok(Jet::constant(0.0, self.nvars, 0))
                });
            }
            "sin" => {
                let (s0, c0) = (c.sin(), c.cos());
                let cycle = [s0, c0, -s0, -c0];
                let mut fact = 1.0;
                (0..=n)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        cycle[k % 4] / fact
                    })
                    .collect()
            }
            "cos" => {
                let (s0, c0) = (c.sin(), c.cos());
                let cycle = [c0, -s0, -c0, s0];
                let mut fact = 1.0;
                (0..=n)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        cycle[k % 4] / fact
                    })
                    .collect()
            }
            "abs" => {
                if c == 0.0 {
                    if n == 0 {
                        return Ok(Jet::constant(0.0, self.nvars, 0));
                    }
                    return Err(Error::DomainError {
                        func: "abs".into(),
                        value: c,
                    });
                }
                let mut s = vec![0.0; n + 1];
                s[0] = c.abs();
                if n >= 1 {
                    s[1] = c.signum();
                }
                s
            }
            other => {
                return Err(Error::UnknownIdentifier {
                    name: other.to_string(),
                })
            }
        };
        Ok(self.horner(&series))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn table_sizes() {
        assert_eq!(size_of(2, 2), 6);
        assert_eq!(size_of(3, 4), 35);
        assert_eq!(enumerate_indices(3, 4).len(), 35);
    }

    #[test]
    fn prefix_property() {
        let big = enumerate_indices(3, 4);
        let small = enumerate_indices(3, 2);
        assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn product_rule() {
        // (1 + x)(1 - x) at x = 0 to order 2 -> 1, 0, -1
        let x = Jet::variable(0, 0.0, 1, 2);
        let one = Jet::constant(1.0, 1, 2);
        let p = one.add(&x).mul(&one.sub(&x));
        close(p.coeffs[0], 1.0);
        close(p.coeffs[1], 0.0);
        close(p.coeffs[2], -1.0);
    }

    #[test]
    fn exp_of_linear() {
        // exp(2s) at s = 0, order 2 -> Taylor coefficients (1, 2, 2)
        let s = Jet::variable(0, 0.0, 1, 2).scale(2.0);
        let e = s.compose_elementary("exp").unwrap();
        close(e.coeffs[0], 1.0);
        close(e.coeffs[1], 2.0);
        close(e.coeffs[2], 2.0);
        // true second derivative is 4
        close(e.partial(&[2]).unwrap(), 4.0);
    }

    #[test]
    fn mixed_partial() {
        let x = Jet::variable(0, 0.0, 2, 2);
        let y = Jet::variable(1, 0.0, 2, 2);
        let p = x.mul(&y);
        close(p.partial(&[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn square_partial() {
        let x = Jet::variable(0, 0.0, 1, 2);
        let p = x.mul(&x);
        close(p.partial(&[2]).unwrap(), 2.0);
    }

    #[test]
    fn recip_zero_errors() {
        let z = Jet::constant(0.0, 1, 2);
        assert!(z.recip().is_err());
    }

    #[test]
    fn order_exceeded() {
        let x = Jet::variable(0, 1.0, 1, 2);
        assert!(x.partial(&[3]).is_err());
    }

    #[test]
    fn diff_matches_partial() {
        let x = Jet::variable(0, 0.7, 2, 3);
        let y = Jet::variable(1, -0.3, 2, 3);
        let f = x.mul(&x).mul(&y).add(&y.compose_elementary("sin").unwrap());
        let fx = f.diff(0);
        close(fx.value(), f.partial(&[1, 0]).unwrap());
        close(fx.partial(&[1, 0]).unwrap(), f.partial(&[2, 0]).unwrap());
        close(fx.partial(&[0, 1]).unwrap(), f.partial(&[1, 1]).unwrap());
    }

    #[test]
    fn powi_negative_base() {
        let x = Jet::variable(0, -2.0, 1, 2);
        let p = x.powi(3).unwrap();
        close(p.value(), -8.0);
        close(p.partial(&[1]).unwrap(), 12.0);
        close(p.partial(&[2]).unwrap(), -12.0);
    }

    #[test]
    fn division_round_trip() {
        let x = Jet::variable(0, 1.3, 1, 4);
        let f = x.compose_elementary("exp").unwrap();
        let g = f.div(&x).unwrap().mul(&x);
        for (a, b) in f.coeffs.iter().zip(&g.coeffs) {
            close(*a, *b);
        }
    }
}
