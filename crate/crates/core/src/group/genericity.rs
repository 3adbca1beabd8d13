use serde::Serialize;

use super::Subset;
use crate::error::{Error, Result};

/// Largest order for which the minimum cover is searched exactly.
pub const EXACT_GENERICITY_MAX_ORDER: usize = 64;
const NODE_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Genericity {
    /// Number of left translates used.
    pub count: usize,
    /// `false` when `count` is only a greedy upper bound.
    pub exact: bool,
    /// Left multipliers `g` of the covering translates `gA`.
    pub translates: Vec<usize>,
}

/// Least `n <= cap` such that `n` left translates of `a` cover the group.
pub fn genericity(a: &Subset, cap: usize) -> Result<Option<Genericity>> {
    if a.is_empty() {
        return Err(Error::EmptySetNotGeneric);
    }
    let g = a.group();
    let order = g.order();
    let greedy = greedy_cover(a);
    let lower = order.div_ceil(a.len());
    if lower > cap {
        return Ok(None);
    }
    if order > EXACT_GENERICITY_MAX_ORDER {
        return Ok((greedy.len() <= cap).then_some(Genericity {
            count: greedy.len(),
            exact: greedy.len() == lower,
            translates: greedy,
        }));
    }

    let full: u64 = if order == 64 { u64::MAX } else { (1u64 << order) - 1 };
    // Distinct translates as bitmasks, remembering one multiplier for each.
    let mut translates: Vec<(u64, usize)> = Vec::new();
    for t in g.elements() {
        let bits = a.members().iter().fold(0u64, |acc, &x| acc | 1u64 << g.mul(t, x));
        if !translates.iter().any(|&(b, _)| b == bits) {
            translates.push((bits, t));
        }
    }
    let by_element: Vec<Vec<usize>> =
        (0..order).map(|x| (0..translates.len()).filter(|&i| translates[i].0 >> x & 1 == 1).collect()).collect();
    let base = translates.iter().position(|&(_, t)| t == g.identity()).expect("identity translate");

    let upper = greedy.len().min(cap);
    let mut search = CoverSearch { translates: &translates, by_element: &by_element, nodes: 0, chosen: Vec::new() };
    for k in lower..upper {
        search.chosen.clear();
        search.chosen.push(base);
        // Any cover can be left-translated so that it contains `a` itself.
        match search.run(full & !translates[base].0, k - 1) {
            Some(true) => {
                let ts = search.chosen.iter().map(|&i| translates[i].1).collect();
                return Ok(Some(Genericity { count: k, exact: true, translates: ts }));
            }
            Some(false) => {}
            None => {
                return Ok((greedy.len() <= cap).then_some(Genericity {
                    count: greedy.len(),
                    exact: false,
                    translates: greedy,
                }));
            }
        }
    }
    if greedy.len() <= cap {
        Ok(Some(Genericity { count: greedy.len(), exact: true, translates: greedy }))
    } else {
        Ok(None)
    }
}

struct CoverSearch<'a> {
    translates: &'a [(u64, usize)],
    by_element: &'a [Vec<usize>],
    nodes: usize,
    chosen: Vec<usize>,
}

impl CoverSearch<'_> {
    /// `None` when the node budget runs out.
    fn run(&mut self, uncovered: u64, left: usize) -> Option<bool> {
        if uncovered == 0 {
            return Some(true);
        }
        if left == 0 {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return None;
        }
        let best_gain = self.translates.iter().map(|&(b, _)| (b & uncovered).count_ones()).max().unwrap_or(0);
        if best_gain == 0 || uncovered.count_ones() > best_gain * left as u32 {
            return Some(false);
        }
        let x = uncovered.trailing_zeros() as usize;
        for &i in &self.by_element[x] {
            self.chosen.push(i);
            match self.run(uncovered & !self.translates[i].0, left - 1)? {
                true => return Some(true),
                false => {
                    self.chosen.pop();
                }
            }
        }
        Some(false)
    }
}

fn greedy_cover(a: &Subset) -> Vec<usize> {
    let g = a.group();
    let mut covered = vec![false; g.order()];
    let mut remaining = g.order();
    let mut out = Vec::new();
    while remaining > 0 {
        let (t, gain) = g
            .elements()
            .map(|t| (t, a.members().iter().filter(|&&x| !covered[g.mul(t, x)]).count()))
            .max_by(|p, q| p.1.cmp(&q.1).then(q.0.cmp(&p.0)))
            .expect("nonempty group");
        debug_assert!(gain > 0);
        for &x in a.members() {
            let y = g.mul(t, x);
            if !covered[y] {
                covered[y] = true;
                remaining -= 1;
            }
        }
        out.push(t);
    }
    out
}
