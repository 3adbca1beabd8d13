use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiniteGroup, Structure};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER_CAP: usize = 10080;
const MAX_SYMMETRIC_DEGREE: usize = 7;

/// JSON group descriptor, e.g. `{"type":"cyclic","n":8}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupDescriptor {
    Cyclic {
        n: usize,
    },
    Product {
        factors: Vec<GroupDescriptor>,
    },
    Dihedral {
        n: usize,
    },
    Quaternion8,
    Symmetric {
        n: usize,
    },
    /// Generators in 1-based one-line image notation.
    PermGens {
        degree: usize,
        gens: Vec<Vec<usize>>,
    },
}

impl GroupDescriptor {
    pub fn label(&self) -> String {
        match self {
            GroupDescriptor::Cyclic { n } => format!("Z{n}"),
            GroupDescriptor::Product { factors } => factors.iter().map(|f| f.label()).collect::<Vec<_>>().join("x"),
            GroupDescriptor::Dihedral { n } => format!("D{n}"),
            GroupDescriptor::Quaternion8 => "Q8".into(),
            GroupDescriptor::Symmetric { n } => format!("S{n}"),
            GroupDescriptor::PermGens { degree, gens } => {
                let body = gens
                    .iter()
                    .map(|g| g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";");
                format!("Perm{degree}<{body}>")
            }
        }
    }
}

pub fn build_group(desc: &GroupDescriptor) -> Result<Arc<FiniteGroup>> {
    build_group_with_cap(desc, DEFAULT_ORDER_CAP)
}

pub fn build_group_with_cap(desc: &GroupDescriptor, cap: usize) -> Result<Arc<FiniteGroup>> {
    let label = desc.label();
    let group = match desc {
        GroupDescriptor::Cyclic { n } => {
            let n = *n;
            if n == 0 {
                return Err(Error::BadDescriptor("cyclic order must be positive".into()));
            }
            check_cap(n, cap)?;
            let table = (0..n).flat_map(|x| (0..n).map(move |y| ((x + y) % n) as u32)).collect();
            FiniteGroup::from_flat(n, table, label, Structure::Cyclic { n })?
        }
        GroupDescriptor::Dihedral { n } => {
            let n = *n;
            if n == 0 {
                return Err(Error::BadDescriptor("dihedral n must be positive".into()));
            }
            check_cap(2 * n, cap)?;
            let order = 2 * n;
            let mut table = vec![0u32; order * order];
            for x in 0..order {
                let (a, e) = (x % n, x / n);
                for y in 0..order {
                    let (b, f) = (y % n, y / n);
                    // r^a s^e r^b s^f = r^{a + (-1)^e b} s^{e+f}
                    let k = if e == 0 { (a + b) % n } else { (a + n - b) % n };
                    table[x * order + y] = (k + n * ((e + f) % 2)) as u32;
                }
            }
            FiniteGroup::from_flat(order, table, label, Structure::Dihedral { n })?
        }
        GroupDescriptor::Quaternion8 => {
            check_cap(8, cap)?;
            let mut table = vec![0u32; 64];
            for x in 0..8 {
                for y in 0..8 {
                    table[x * 8 + y] = quaternion_unit_mul(x, y) as u32;
                }
            }
            FiniteGroup::from_flat(8, table, label, Structure::Quaternion8)?
        }
        GroupDescriptor::Symmetric { n } => {
            let n = *n;
            if n == 0 || n > MAX_SYMMETRIC_DEGREE {
                return Err(Error::BadDescriptor(format!("symmetric degree must be in 1..={MAX_SYMMETRIC_DEGREE}")));
            }
            let mut gens = Vec::new();
            if n >= 2 {
                let mut swap: Vec<u8> = (0..n as u8).collect();
                swap.swap(0, 1);
                gens.push(swap);
                gens.push((0..n).map(|i| ((i + 1) % n) as u8).collect());
            }
            permutation_closure(n, &gens, cap, label, true)?
        }
        GroupDescriptor::PermGens { degree, gens } => {
            let degree = *degree;
            if degree == 0 || degree > u8::MAX as usize {
                return Err(Error::BadDescriptor("degree must be in 1..=255".into()));
            }
            let mut zero_based = Vec::with_capacity(gens.len());
            for g in gens {
                zero_based.push(parse_one_line(degree, g)?);
            }
            permutation_closure(degree, &zero_based, cap, label, false)?
        }
        GroupDescriptor::Product { factors } => {
            if factors.is_empty() {
                return Err(Error::BadDescriptor("product needs at least one factor".into()));
            }
            let built = factors.iter().map(|f| build_group_with_cap(f, cap)).collect::<Result<Vec<_>>>()?;
            let order = built.iter().try_fold(1usize, |acc, g| {
                acc.checked_mul(g.order()).filter(|&o| o <= cap).ok_or(Error::GroupTooLarge { cap })
            })?;
            direct_product(built, order, label)?
        }
    };
    Ok(Arc::new(group))
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        Err(Error::GroupTooLarge { cap })
    } else {
        Ok(())
    }
}

fn parse_one_line(degree: usize, images: &[usize]) -> Result<Vec<u8>> {
    if images.len() != degree {
        return Err(Error::BadDescriptor(format!("generator has {} images, expected {degree}", images.len())));
    }
    let mut seen = vec![false; degree];
    let mut out = Vec::with_capacity(degree);
    for &x in images {
        if x == 0 || x > degree || seen[x - 1] {
            return Err(Error::BadDescriptor(format!("{images:?} is not a permutation of 1..={degree}")));
        }
        seen[x - 1] = true;
        out.push((x - 1) as u8);
    }
    Ok(out)
}

/// `(a*b)(i) = a(b(i))`
fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    b.iter().map(|&i| a[i as usize]).collect()
}

fn permutation_closure(
    degree: usize,
    gens: &[Vec<u8>],
    cap: usize,
    label: String,
    symmetric: bool,
) -> Result<FiniteGroup> {
    let identity: Vec<u8> = (0..degree as u8).collect();
    let mut perms = vec![identity.clone()];
    let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(identity, 0)]);
    // parent[b] = (p, s) with b = p * gens[s]
    let mut parent: Vec<(usize, usize)> = vec![(0, 0)];
    let mut right: Vec<Vec<u32>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let mut row = Vec::with_capacity(gens.len());
        for (s, g) in gens.iter().enumerate() {
            let y = compose(&perms[x], g);
            let idx = match index.get(&y) {
                Some(&i) => i,
                None => {
                    let i = perms.len();
                    if i + 1 > cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    index.insert(y.clone(), i);
                    perms.push(y);
                    parent.push((x, s));
                    queue.push_back(i);
                    i
                }
            };
            row.push(idx as u32);
        }
        right.push(row);
    }
    let order = perms.len();
    let mut table = vec![0u32; order * order];
    for a in 0..order {
        table[a * order] = a as u32;
        // BFS discovery order guarantees parents come first.
        for b in 1..order {
            let (p, s) = parent[b];
            let ap = table[a * order + p] as usize;
            table[a * order + b] = right[ap][s];
        }
    }
    FiniteGroup::from_flat(order, table, label, Structure::Permutation { degree, perms, symmetric })
}

fn direct_product(factors: Vec<Arc<FiniteGroup>>, order: usize, label: String) -> Result<FiniteGroup> {
    let radices: Vec<usize> = factors.iter().map(|g| g.order()).collect();
    let decode = |mut x: usize| -> Vec<usize> {
        radices
            .iter()
            .map(|&r| {
                let d = x % r;
                x /= r;
                d
            })
            .collect()
    };
    let digits: Vec<Vec<usize>> = (0..order).map(decode).collect();
    let mut table = vec![0u32; order * order];
    for x in 0..order {
        for y in 0..order {
            let mut idx = 0;
            for k in (0..factors.len()).rev() {
                idx = idx * radices[k] + factors[k].mul(digits[x][k], digits[y][k]);
            }
            table[x * order + y] = idx as u32;
        }
    }
    FiniteGroup::from_flat(order, table, label, Structure::Product { factors })
}

/// Index encoding `2*u + sign` over units `1, i, j, k`.
fn quaternion_unit_mul(x: usize, y: usize) -> usize {
    let (ux, sx) = (x / 2, x % 2);
    let (uy, sy) = (y / 2, y % 2);
    // units: 0=1, 1=i, 2=j, 3=k
    let (u, neg) = match (ux, uy) {
        (0, u) | (u, 0) => (u, false),
        (a, b) if a == b => (0, true),
        (1, 2) => (3, false),
        (2, 3) => (1, false),
        (3, 1) => (2, false),
        (2, 1) => (3, true),
        (3, 2) => (1, true),
        (1, 3) => (2, true),
        _ => unreachable!(),
    };
    let sign = (sx + sy + neg as usize) % 2;
    2 * u + sign
}

/// Decodes a product element into per-factor indices.
pub(crate) fn product_digits(factors: &[Arc<FiniteGroup>], mut x: usize) -> Vec<usize> {
    factors
        .iter()
        .map(|g| {
            let d = x % g.order();
            x /= g.order();
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize) -> GroupDescriptor {
        GroupDescriptor::Cyclic { n }
    }

    #[test]
    fn cyclic_one_is_trivial() {
        let g = build_group(&cyc(1)).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.exponent(), 1);
    }

    #[test]
    fn cyclic_eight() {
        let g = build_group(&cyc(8)).unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(g.exponent(), 8);
        assert_eq!(g.mul(5, 6), 3);
    }

    #[test]
    fn a5_from_generators() {
        let d = GroupDescriptor::PermGens { degree: 5, gens: vec![vec![2, 3, 4, 5, 1], vec![2, 3, 1, 4, 5]] };
        let g = build_group(&d).unwrap();
        assert_eq!(g.order(), 60);
        assert!(!g.is_abelian());
    }

    #[test]
    fn symmetric_orders() {
        for (n, o) in [(1, 1), (2, 2), (3, 6), (4, 24), (5, 120)] {
            assert_eq!(build_group(&GroupDescriptor::Symmetric { n }).unwrap().order(), o);
        }
    }

    #[test]
    fn closure_respects_cap() {
        let d = GroupDescriptor::Symmetric { n: 6 };
        assert_eq!(build_group_with_cap(&d, 100).unwrap_err(), Error::GroupTooLarge { cap: 100 });
    }

    #[test]
    fn bad_descriptors() {
        assert!(matches!(build_group(&cyc(0)), Err(Error::BadDescriptor(_))));
        assert!(matches!(build_group(&GroupDescriptor::Symmetric { n: 8 }), Err(Error::BadDescriptor(_))));
        let d = GroupDescriptor::PermGens { degree: 3, gens: vec![vec![1, 1, 2]] };
        assert!(matches!(build_group(&d), Err(Error::BadDescriptor(_))));
        let d: std::result::Result<GroupDescriptor, _> = serde_json::from_str(r#"{"type":"cyclik","n":3}"#);
        assert!(d.is_err());
    }

    #[test]
    fn dihedral_relations() {
        let g = build_group(&GroupDescriptor::Dihedral { n: 4 }).unwrap();
        assert_eq!(g.order(), 8);
        let (r, s) = (1, 4);
        // s r s^{-1} = r^{-1}
        assert_eq!(g.conjugate(s, r), g.inv(r));
        assert_eq!(g.element_order(r), 4);
        assert_eq!(g.element_order(s), 2);
    }

    #[test]
    fn quaternion_relations() {
        let g = build_group(&GroupDescriptor::Quaternion8).unwrap();
        let (i, j, k, minus_one) = (2, 4, 6, 1);
        assert_eq!(g.mul(i, i), minus_one);
        assert_eq!(g.mul(i, j), k);
        assert_eq!(g.mul(j, i), 7);
        assert_eq!(g.mul(g.mul(i, j), k), minus_one);
    }

    #[test]
    fn product_of_cyclics() {
        let d = GroupDescriptor::Product { factors: vec![cyc(2), cyc(3)] };
        let g = build_group(&d).unwrap();
        assert_eq!(g.order(), 6);
        assert!(g.is_abelian());
        assert_eq!(g.exponent(), 6);
    }

    #[test]
    fn descriptor_json_forms() {
        let cases = [
            r#"{"type":"cyclic","n":8}"#,
            r#"{"type":"product","factors":[{"type":"cyclic","n":2},{"type":"cyclic","n":2}]}"#,
            r#"{"type":"dihedral","n":4}"#,
            r#"{"type":"quaternion8"}"#,
            r#"{"type":"symmetric","n":5}"#,
            r#"{"type":"perm_gens","degree":5,"gens":[[2,3,4,5,1],[2,3,1,4,5]]}"#,
        ];
        for c in cases {
            let d: GroupDescriptor = serde_json::from_str(c).unwrap();
            assert_eq!(serde_json::to_string(&d).unwrap(), c);
        }
    }
}
