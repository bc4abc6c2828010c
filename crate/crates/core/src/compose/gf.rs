//! Finite fields GF(q) for transversal designs.
//!
//! Elements are the integers `0..q`; for `q = p^m` the base-`p` digits of an element are
//! its polynomial coefficients, lowest degree first. Extension fields use log tables built
//! from a fixed primitive polynomial, so the element numbering never changes.

use crate::error::{Error, Result};

/// Monic primitive polynomials, coefficients lowest degree first, leading 1 included.
const PRIMITIVE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

/// `(p, m)` with `q = p^m`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut r = q;
    let mut m = 0;
    while r.is_multiple_of(p) {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p, m))
}

#[derive(Clone, Debug)]
pub struct Field {
    q: u32,
    p: u32,
    /// `exp[i] = g^i` for `i < q - 1`.
    exp: Vec<u32>,
    /// `log[a]` for `a != 0`.
    log: Vec<u32>,
}

impl Field {
    pub fn new(q: u32) -> Result<Field> {
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        let exp = if m == 1 {
            let g = (2..p).find(|&g| is_primitive_root(g, p)).unwrap_or(1);
            let mut e = Vec::with_capacity(q as usize - 1);
            let mut x = 1u64;
            for _ in 0..q - 1 {
                e.push(x as u32);
                x = x * g as u64 % p as u64;
            }
            e
        } else {
            let poly = PRIMITIVE
                .iter()
                .find(|(pp, mm, _)| *pp == p && *mm == m)
                .map(|(_, _, c)| *c)
                .ok_or_else(|| Error::Precondition(format!("no field table for GF({q})")))?;
            extension_powers(p, m, poly)
        };
        let mut log = vec![0u32; q as usize];
        for (i, &a) in exp.iter().enumerate() {
            log[a as usize] = i as u32;
        }
        Ok(Field { q, p, exp, log })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        self.exp[((self.log[a as usize] + self.log[b as usize]) % n) as usize]
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> u32 {
        self.exp.get(1).copied().unwrap_or(1)
    }
}

fn is_primitive_root(g: u32, p: u32) -> bool {
    let mut x = 1u64;
    for k in 1..p - 1 {
        x = x * g as u64 % p as u64;
        if x == 1 {
            return k == p - 1;
        }
    }
    true
}

/// Powers of `x` modulo `poly`, encoded as integers.
fn extension_powers(p: u32, m: u32, poly: &[u32]) -> Vec<u32> {
    let q = p.pow(m);
    let mut cur = vec![0u32; m as usize];
    cur[0] = 1;
    let mut out = Vec::with_capacity(q as usize - 1);
    for _ in 0..q - 1 {
        out.push(cur.iter().rev().fold(0, |acc, &c| acc * p + c));
        // Multiply by x and reduce with x^m = -(lower terms).
        let top = cur[m as usize - 1];
        for i in (1..m as usize).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        for i in 0..m as usize {
            cur[i] = (cur[i] + (p - poly[i] % p) * top) % p;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_field(q: u32) {
        let f = Field::new(q).unwrap();
        let mut seen = vec![false; q as usize];
        for &e in &f.exp {
            assert!(
                !std::mem::replace(&mut seen[e as usize], true),
                "GF({q}) generator repeats"
            );
        }
        for a in 0..q {
            assert_eq!(f.add(a, f.neg(a)), 0);
            assert_eq!(f.mul(a, 1), a);
            for b in 0..q {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in [0, 1, q - 1, q / 2] {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn fields_up_to_64() {
        for q in 2..=64 {
            if prime_power(q).is_some() {
                check_field(q);
            }
        }
    }

    #[test]
    fn non_prime_powers() {
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert!(matches!(Field::new(10), Err(Error::NotPrimePower(10))));
        assert_eq!(prime_power(49), Some((7, 2)));
    }
}
