//! Finite groups as dense Cayley tables.
//!
//! Elements are indices `0..order`. All products, inverses and the
//! identity are precomputed at construction so that every later
//! operation is a table lookup.

mod build;
mod genericity;
mod subset;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub(crate) use build::product_digits;
pub use build::{build_group, build_group_with_cap, GroupDescriptor, DEFAULT_ORDER_CAP};
pub use genericity::{genericity, Genericity, EXACT_GENERICITY_MAX_ORDER};
pub use subset::Subset;

/// Above this order associativity is spot-checked instead of proved.
pub const EXHAUSTIVE_CHECK_MAX_ORDER: usize = 4096;
const SPOT_CHECK_SAMPLES: usize = 100_000;

/// How a group was built. Catalog code uses this to find closed-form
/// representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    /// `Z/n`, element `k` is `k mod n`.
    Cyclic { n: usize },
    /// Dihedral group with `n` rotations; index `k + n*e` is `r^k s^e`.
    Dihedral { n: usize },
    /// Indices 0..8 are `1, -1, i, -i, j, -j, k, -k`.
    Quaternion8,
    /// A permutation group; `perms[x]` is the 0-based one-line image of element `x`.
    Permutation { degree: usize, perms: Vec<Vec<u8>>, symmetric: bool },
    /// Direct product; index is mixed-radix with the first factor varying fastest.
    Product { factors: Vec<Arc<FiniteGroup>> },
    /// Built from a raw table.
    Table,
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    identity: usize,
    label: String,
    structure: Structure,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.identity == other.identity && self.table == other.table
    }
}

impl FiniteGroup {
    /// Validates a Cayley table and derives identity and inverses from it.
    pub fn from_table(table: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        let order = table.len();
        if order == 0 || table.iter().any(|row| row.len() != order) {
            return Err(Error::BadDescriptor("cayley table must be square and nonempty".into()));
        }
        let flat: Vec<u32> = table.iter().flatten().map(|&x| x as u32).collect();
        Self::from_flat(order, flat, label.into(), Structure::Table)
    }

    pub(crate) fn from_flat(order: usize, table: Vec<u32>, label: String, structure: Structure) -> Result<Self> {
        if table.iter().any(|&x| x as usize >= order) {
            return Err(Error::BadDescriptor("table entry out of range".into()));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| table[e * order + x] as usize == x && table[x * order + e] as usize == x))
            .ok_or_else(|| Error::BadDescriptor("no two-sided identity".into()))?;
        let mut inverse = vec![0u32; order];
        for x in 0..order {
            let y = (0..order)
                .find(|&y| table[x * order + y] as usize == identity)
                .ok_or_else(|| Error::BadDescriptor(format!("element {x} has no inverse")))?;
            if table[y * order + x] as usize != identity {
                return Err(Error::BadDescriptor(format!("element {x} has no two-sided inverse")));
            }
            inverse[x] = y as u32;
        }
        let group = FiniteGroup { order, table, inverse, identity, label, structure };
        group.validate()?;
        Ok(group)
    }

    fn validate(&self) -> Result<()> {
        let n = self.order;
        let mut seen = vec![0usize; n];
        let mut stamp = 0usize;
        for x in 0..n {
            stamp += 1;
            for y in 0..n {
                let z = self.table[x * n + y] as usize;
                if seen[z] == stamp {
                    return Err(Error::BadDescriptor(format!("row {x} is not a permutation")));
                }
                seen[z] = stamp;
            }
        }
        for y in 0..n {
            stamp += 1;
            for x in 0..n {
                let z = self.table[x * n + y] as usize;
                if seen[z] == stamp {
                    return Err(Error::BadDescriptor(format!("column {y} is not a permutation")));
                }
                seen[z] = stamp;
            }
        }
        if n <= EXHAUSTIVE_CHECK_MAX_ORDER {
            // Light's test: associativity against a generating set implies it everywhere.
            let gens = self.generating_set();
            for x in 0..n {
                for y in 0..n {
                    let xy = self.mul(x, y);
                    for &s in &gens {
                        if self.mul(xy, s) != self.mul(x, self.mul(y, s)) {
                            return Err(Error::BadDescriptor(format!("not associative at ({x}, {y}, {s})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..SPOT_CHECK_SAMPLES {
                let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)) {
                    return Err(Error::BadDescriptor(format!("not associative at ({x}, {y}, {z})")));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.order + y] as usize
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x] as usize
    }

    /// `g x g^{-1}`
    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order;
        (0..n).all(|x| (x + 1..n).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn pow(&self, x: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, x))
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        self.elements().map(|x| self.element_order(x)).fold(1, lcm)
    }

    /// Subgroup generated by `gens`, as a membership mask.
    pub fn closure_mask(&self, gens: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.order];
        mask[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !mask[y] {
                    mask[y] = true;
                    queue.push_back(y);
                }
            }
        }
        mask
    }

    /// A generating set found greedily in index order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut mask = vec![false; self.order];
        mask[self.identity] = true;
        for x in self.elements() {
            if !mask[x] {
                gens.push(x);
                mask = self.closure_mask(&gens);
            }
        }
        gens
    }
}

pub fn group_exponent(group: &FiniteGroup) -> usize {
    group.exponent()
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_table_accepts_z3() {
        let t = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let g = FiniteGroup::from_table(t, "z3").unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 2);
        assert!(g.is_abelian());
    }

    #[test]
    fn from_table_rejects_latin_square_that_is_not_a_group() {
        // A loop of order 5 with identity 0 that is not associative.
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = FiniteGroup::from_table(t, "loop").unwrap_err();
        assert!(matches!(err, Error::BadDescriptor(_)), "{err}");
    }

    #[test]
    fn from_table_rejects_repeated_row_entries() {
        let t = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::from_table(t, "bad").is_err());
    }

    #[test]
    fn q8_exponent_matches_max_element_order() {
        let g = build_group(&GroupDescriptor::Quaternion8).unwrap();
        let max_order = g.elements().map(|x| g.element_order(x)).max().unwrap();
        assert_eq!(max_order, 4);
        assert_eq!(group_exponent(&g), 4);
    }

    #[test]
    fn cyclic_exponent_is_order() {
        let g = build_group(&GroupDescriptor::Cyclic { n: 8 }).unwrap();
        assert_eq!(g.exponent(), 8);
    }

    #[test]
    fn generating_set_generates() {
        let g = build_group(&GroupDescriptor::Symmetric { n: 4 }).unwrap();
        let gens = g.generating_set();
        assert!(g.closure_mask(&gens).iter().all(|&b| b));
    }
}
