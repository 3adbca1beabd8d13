use std::fmt;
use std::sync::Arc;

use super::FiniteGroup;
use crate::error::{Error, Result};

/// A subset of a finite group, stored as sorted duplicate-free indices.
#[derive(Clone)]
pub struct Subset {
    group: Arc<FiniteGroup>,
    members: Vec<usize>,
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subset({}, {:?})", self.group.label(), self.members)
    }
}

impl PartialEq for Subset {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && same_group(&self.group, &other.group)
    }
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Subset {
    pub fn new(group: &Arc<FiniteGroup>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&x| x >= group.order()) {
            return Err(Error::InvalidParameter(format!(
                "element {bad} out of range for group of order {}",
                group.order()
            )));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Subset { group: group.clone(), members })
    }

    pub fn from_mask(group: &Arc<FiniteGroup>, mask: &[bool]) -> Self {
        debug_assert_eq!(mask.len(), group.order());
        let members = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        Subset { group: group.clone(), members }
    }

    pub fn whole(group: &Arc<FiniteGroup>) -> Self {
        Subset { group: group.clone(), members: group.elements().collect() }
    }

    pub fn empty(group: &Arc<FiniteGroup>) -> Self {
        Subset { group: group.clone(), members: Vec::new() }
    }

    pub fn identity(group: &Arc<FiniteGroup>) -> Self {
        Subset { group: group.clone(), members: vec![group.identity()] }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.group.order()];
        for &x in &self.members {
            m[x] = true;
        }
        m
    }

    /// Uniform counting measure `|A|/|G|`.
    pub fn density(&self) -> f64 {
        self.members.len() as f64 / self.group.order() as f64
    }

    pub fn is_whole(&self) -> bool {
        self.members.len() == self.group.order()
    }

    pub fn check_same_group(&self, other: &Subset) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    /// `AB = {ab : a in A, b in B}`
    pub fn product(&self, other: &Subset) -> Result<Subset> {
        self.check_same_group(other)?;
        let g = &self.group;
        let mut mask = vec![false; g.order()];
        for &a in &self.members {
            for &b in &other.members {
                mask[g.mul(a, b)] = true;
            }
        }
        Ok(Subset::from_mask(g, &mask))
    }

    /// `A^{-1}`
    pub fn inverse(&self) -> Subset {
        let g = &self.group;
        let mut members: Vec<usize> = self.members.iter().map(|&x| g.inv(x)).collect();
        members.sort_unstable();
        Subset { group: g.clone(), members }
    }

    /// `A^n` with `A^1 = A` and `A^{n+1} = A^n A`.
    pub fn power(&self, n: usize) -> Result<Subset> {
        if n == 0 {
            return Err(Error::InvalidParameter("set powers start at 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    /// `A A^{-1}`
    pub fn difference_set(&self) -> Subset {
        self.product(&self.inverse()).expect("same group")
    }

    pub fn left_translate(&self, g: usize) -> Subset {
        let grp = &self.group;
        let mut members: Vec<usize> = self.members.iter().map(|&x| grp.mul(g, x)).collect();
        members.sort_unstable();
        Subset { group: grp.clone(), members }
    }

    /// `g A g^{-1}`
    pub fn conjugate_by(&self, g: usize) -> Subset {
        let grp = &self.group;
        let mut members: Vec<usize> = self.members.iter().map(|&x| grp.conjugate(g, x)).collect();
        members.sort_unstable();
        Subset { group: grp.clone(), members }
    }

    pub fn union(&self, other: &Subset) -> Result<Subset> {
        self.check_same_group(other)?;
        let mut m = self.mask();
        for &x in &other.members {
            m[x] = true;
        }
        Ok(Subset::from_mask(&self.group, &m))
    }

    pub fn intersection(&self, other: &Subset) -> Result<Subset> {
        self.check_same_group(other)?;
        let m = other.mask();
        let members = self.members.iter().copied().filter(|&x| m[x]).collect();
        Ok(Subset { group: self.group.clone(), members })
    }

    /// `A \ B`
    pub fn minus(&self, other: &Subset) -> Result<Subset> {
        self.check_same_group(other)?;
        let m = other.mask();
        let members = self.members.iter().copied().filter(|&x| !m[x]).collect();
        Ok(Subset { group: self.group.clone(), members })
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        let m = other.mask();
        self.members.iter().all(|&x| m[x])
    }

    pub fn is_subgroup(&self) -> bool {
        let g = &self.group;
        if !self.contains(g.identity()) {
            return false;
        }
        let m = self.mask();
        self.members.iter().all(|&a| m[g.inv(a)] && self.members.iter().all(|&b| m[g.mul(a, b)]))
    }

    pub fn is_normal(&self) -> bool {
        self.is_subgroup() && self.group.elements().all(|g| self.conjugate_by(g) == *self)
    }

    pub fn subgroup_index(&self) -> Result<usize> {
        if !self.is_subgroup() {
            return Err(Error::NotASubgroup);
        }
        Ok(self.group.order() / self.members.len())
    }

    /// The subgroup as a group in its own right. Local index `i` is
    /// `members()[i]`.
    pub fn as_group(&self) -> Result<Arc<FiniteGroup>> {
        if !self.is_subgroup() {
            return Err(Error::NotASubgroup);
        }
        let g = &self.group;
        let mut local = vec![u32::MAX; g.order()];
        for (i, &x) in self.members.iter().enumerate() {
            local[x] = i as u32;
        }
        let table = self
            .members
            .iter()
            .flat_map(|&a| self.members.iter().map(move |&b| (a, b)))
            .map(|(a, b)| local[g.mul(a, b)])
            .collect();
        let label = format!("{}[{}]", g.label(), self.members.len());
        FiniteGroup::from_flat(self.members.len(), table, label, super::Structure::Table).map(Arc::new)
    }

    /// Some `g` with `gB ⊆ self`, scanning `g` in index order.
    pub fn find_left_translate_inside(&self, b: &Subset) -> Option<usize> {
        let mask = self.mask();
        let g = &self.group;
        g.elements().find(|&t| b.members.iter().all(|&x| mask[g.mul(t, x)]))
    }
}
