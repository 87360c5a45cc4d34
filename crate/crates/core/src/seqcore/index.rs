//! Infinite and finite subsets of ℕ = {1, 2, ...} with exact enumeration,
//! membership and rank.
//!
//! Every kind is driven by `count_le(j) = |S ∩ [1, j]|`; enumeration of
//! complements falls back to a search over that count.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexSet {
    /// `{c·m + d : m ≥ 1}` with `c ≥ 1` and `c + d ≥ 1`.
    ArithmeticProgression { c: u64, d: i64 },
    /// `{2^(i-1)·(2m - 1) : m ≥ 1}`, the integers with 2-adic valuation `i - 1`.
    DyadicRay { i: u32 },
    ExplicitFinite { indices: Vec<u64> },
    Complement { of: Box<IndexSet> },
    /// `{outer_(inner_m) : m ≥ 1}`: `inner` read through the enumeration of `outer`.
    Image {
        outer: Box<IndexSet>,
        inner: Box<IndexSet>,
    },
}

impl IndexSet {
    pub fn progression(c: u64, d: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidIndexSet("progression step must be positive".into()));
        }
        if (c as i128) + (d as i128) < 1 {
            return Err(Error::InvalidIndexSet(format!(
                "progression {c}·m{d:+} starts below 1"
            )));
        }
        Ok(IndexSet::ArithmeticProgression { c, d })
    }

    pub fn odds() -> Self {
        IndexSet::ArithmeticProgression { c: 2, d: -1 }
    }

    pub fn evens() -> Self {
        IndexSet::ArithmeticProgression { c: 2, d: 0 }
    }

    pub fn dyadic_ray(i: u32) -> Result<Self> {
        if !(1..=64).contains(&i) {
            return Err(Error::InvalidIndexSet(format!("dyadic ray index {i} out of 1..=64")));
        }
        Ok(IndexSet::DyadicRay { i })
    }

    pub fn finite(mut indices: Vec<u64>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidIndexSet("indices start at 1".into()));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(IndexSet::ExplicitFinite { indices })
    }

    pub fn all() -> Self {
        IndexSet::ArithmeticProgression { c: 1, d: 0 }
    }

    pub fn is_all(&self) -> bool {
        *self == IndexSet::all()
    }

    pub fn empty() -> Self {
        IndexSet::ExplicitFinite { indices: vec![] }
    }

    pub fn complement(of: IndexSet) -> Self {
        match of {
            IndexSet::Complement { of } => *of,
            s if s == IndexSet::odds() => IndexSet::evens(),
            s if s == IndexSet::evens() => IndexSet::odds(),
            IndexSet::ExplicitFinite { indices } if indices.is_empty() => IndexSet::all(),
            s if s.is_all() => IndexSet::empty(),
            s => IndexSet::Complement { of: Box::new(s) },
        }
    }

    pub fn image(outer: IndexSet, inner: IndexSet) -> Self {
        IndexSet::Image {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// `|S ∩ [1, j]|`.
    pub fn count_le(&self, j: u64) -> u64 {
        match self {
            IndexSet::ArithmeticProgression { c, d } => {
                let first = *c as i128 + *d as i128;
                if (j as i128) < first {
                    0
                } else {
                    ((j as i128 - *d as i128) / *c as i128) as u64
                }
            }
            IndexSet::DyadicRay { i } => {
                let shift = i - 1;
                if shift >= 64 {
                    return 0;
                }
                let q = j >> shift;
                q / 2 + q % 2
            }
            IndexSet::ExplicitFinite { indices } => indices.partition_point(|&x| x <= j) as u64,
            IndexSet::Complement { of } => j - of.count_le(j),
            IndexSet::Image { outer, inner } => inner.count_le(outer.count_le(j)),
        }
    }

    pub fn contains(&self, j: u64) -> bool {
        if j == 0 {
            return false;
        }
        match self {
            IndexSet::ArithmeticProgression { c, d } => {
                let diff = j as i128 - *d as i128;
                diff >= *c as i128 && diff % *c as i128 == 0
            }
            IndexSet::DyadicRay { i } => j.trailing_zeros() == i - 1,
            IndexSet::ExplicitFinite { indices } => indices.binary_search(&j).is_ok(),
            IndexSet::Complement { of } => !of.contains(j),
            IndexSet::Image { outer, inner } => {
                outer.rank(j).is_some_and(|t| inner.contains(t))
            }
        }
    }

    /// Position of `j` within the set (1-based), if `j` belongs to it.
    pub fn rank(&self, j: u64) -> Option<u64> {
        if !self.contains(j) {
            return None;
        }
        match self {
            IndexSet::Image { outer, inner } => inner.rank(outer.rank(j)?),
            _ => Some(self.count_le(j)),
        }
    }

    /// The `m`-th element (1-based), or `None` past the end or beyond u64.
    pub fn nth(&self, m: u64) -> Option<u64> {
        if m == 0 {
            return None;
        }
        match self {
            IndexSet::ArithmeticProgression { c, d } => {
                let v = (*c as i128).checked_mul(m as i128)? + *d as i128;
                u64::try_from(v).ok()
            }
            IndexSet::DyadicRay { i } => {
                let odd = m.checked_mul(2)?.checked_sub(1)?;
                let shift = i - 1;
                if shift >= 64 || odd.leading_zeros() < shift {
                    return None;
                }
                Some(odd << shift)
            }
            IndexSet::ExplicitFinite { indices } => indices.get(m as usize - 1).copied(),
            IndexSet::Image { outer, inner } => outer.nth(inner.nth(m)?),
            IndexSet::Complement { .. } => {
                if let Some(n) = self.cardinality() {
                    if m > n {
                        return None;
                    }
                }
                // Smallest j with count_le(j) >= m; j >= m always.
                let mut lo = m;
                let mut hi = m;
                while self.count_le(hi) < m {
                    lo = hi;
                    hi = hi.checked_mul(2)?;
                }
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.count_le(mid) >= m {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Some(lo)
            }
        }
    }

    /// `None` for infinite sets.
    pub fn cardinality(&self) -> Option<u64> {
        match self {
            IndexSet::ArithmeticProgression { .. } | IndexSet::DyadicRay { .. } => None,
            IndexSet::ExplicitFinite { indices } => Some(indices.len() as u64),
            IndexSet::Image { outer, inner } => match outer.cardinality() {
                Some(n) => Some(inner.count_le(n)),
                None => inner.cardinality(),
            },
            IndexSet::Complement { of } => of.complement_cardinality(),
        }
    }

    fn complement_cardinality(&self) -> Option<u64> {
        match self {
            IndexSet::ArithmeticProgression { c, d } => {
                if *c == 1 {
                    Some((*d).max(0) as u64)
                } else {
                    None
                }
            }
            IndexSet::DyadicRay { .. } | IndexSet::ExplicitFinite { .. } => None,
            IndexSet::Complement { of } => of.cardinality(),
            IndexSet::Image { outer, inner } => {
                let outer_gap = outer.complement_cardinality()?;
                let inner_gap = inner.complement_cardinality()?;
                Some(outer_gap + inner_gap)
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.cardinality().is_none()
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (1u64..).map_while(move |m| self.nth(m))
    }

    /// Bounds `lo ≤ s_m / m ≤ hi` valid for every `m ≥ 1`, where `s_m` is the
    /// `m`-th element. Always `lo ≥ 1`.
    pub fn ratio_bounds(&self) -> Option<(f64, f64)> {
        match self {
            IndexSet::ArithmeticProgression { c, d } => {
                let c = *c as f64;
                let first = c + *d as f64;
                Some((c.min(first).max(1.0), c.max(first)))
            }
            IndexSet::DyadicRay { i } => {
                let lo = 2f64.powi(*i as i32 - 1);
                Some((lo, 2.0 * lo))
            }
            IndexSet::Image { outer, inner } => {
                let (a, b) = outer.ratio_bounds()?;
                let (c, d) = inner.ratio_bounds()?;
                Some(((a * c).max(1.0), b * d))
            }
            IndexSet::ExplicitFinite { .. } | IndexSet::Complement { .. } => None,
        }
    }

    /// `Some(true)` when the sets are provably disjoint.
    pub fn disjoint_from(&self, other: &IndexSet) -> Option<bool> {
        match (self, other) {
            (
                IndexSet::ArithmeticProgression { c: c1, d: d1 },
                IndexSet::ArithmeticProgression { c: c2, d: d2 },
            ) if c1 == c2 => Some((d1 - d2).rem_euclid(*c1 as i64) != 0),
            (IndexSet::Complement { of }, s) | (s, IndexSet::Complement { of }) if **of == *s => {
                Some(true)
            }
            (IndexSet::DyadicRay { i }, IndexSet::DyadicRay { i: k }) => Some(i != k),
            (
                IndexSet::Image { outer: o1, inner: i1 },
                IndexSet::Image { outer: o2, inner: i2 },
            ) if o1 == o2 => i1.disjoint_from(i2),
            (IndexSet::Image { outer, .. }, s) | (s, IndexSet::Image { outer, .. })
                if outer.disjoint_from(s) == Some(true) =>
            {
                Some(true)
            }
            (IndexSet::ExplicitFinite { indices }, s) | (s, IndexSet::ExplicitFinite { indices }) => {
                Some(!indices.iter().any(|&j| s.contains(j)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            s if *s == IndexSet::odds() => write!(f, "odds"),
            s if *s == IndexSet::evens() => write!(f, "evens"),
            IndexSet::ArithmeticProgression { c, d } => write!(f, "{{{c}m{d:+}}}"),
            IndexSet::DyadicRay { i } => write!(f, "dyadic-ray({i})"),
            IndexSet::ExplicitFinite { indices } => write!(f, "{indices:?}"),
            IndexSet::Complement { of } => write!(f, "complement({of})"),
            IndexSet::Image { outer, inner } => write!(f, "{outer}∘{inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets() -> Vec<IndexSet> {
        vec![
            IndexSet::odds(),
            IndexSet::evens(),
            IndexSet::progression(3, 2).unwrap(),
            IndexSet::dyadic_ray(1).unwrap(),
            IndexSet::dyadic_ray(3).unwrap(),
            IndexSet::finite(vec![9, 2, 4]).unwrap(),
            IndexSet::complement(IndexSet::progression(3, 0).unwrap()),
            IndexSet::complement(IndexSet::finite(vec![1, 5]).unwrap()),
            IndexSet::image(IndexSet::evens(), IndexSet::dyadic_ray(2).unwrap()),
            IndexSet::image(
                IndexSet::complement(IndexSet::progression(3, 0).unwrap()),
                IndexSet::odds(),
            ),
        ]
    }

    #[test]
    fn rank_inverts_enumeration() {
        for s in sets() {
            for m in 1..200 {
                let Some(j) = s.nth(m) else { break };
                assert!(s.contains(j), "{s} should contain {j}");
                assert_eq!(s.rank(j), Some(m), "{s} rank of {j}");
            }
        }
    }

    #[test]
    fn enumeration_matches_membership_scan() {
        for s in sets() {
            let scanned: Vec<u64> = (1..=500).filter(|&j| s.contains(j)).collect();
            let listed: Vec<u64> = s.iter().take_while(|&j| j <= 500).collect();
            assert_eq!(scanned, listed, "{s}");
            for w in listed.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn known_elements() {
        let odds: Vec<u64> = IndexSet::odds().iter().take(4).collect();
        assert_eq!(odds, vec![1, 3, 5, 7]);
        let ray: Vec<u64> = IndexSet::dyadic_ray(2).unwrap().iter().take(3).collect();
        assert_eq!(ray, vec![2, 6, 10]);
        let comp = IndexSet::complement(IndexSet::progression(3, 0).unwrap());
        let c: Vec<u64> = comp.iter().take(5).collect();
        assert_eq!(c, vec![1, 2, 4, 5, 7]);
    }

    #[test]
    fn cardinalities() {
        assert_eq!(IndexSet::finite(vec![2, 4]).unwrap().cardinality(), Some(2));
        assert!(IndexSet::odds().is_infinite());
        let tail = IndexSet::progression(1, 3).unwrap();
        assert_eq!(IndexSet::complement(tail.clone()).cardinality(), Some(3));
        let c: Vec<u64> = IndexSet::complement(tail).iter().collect();
        assert_eq!(c, vec![1, 2, 3]);
        assert_eq!(IndexSet::empty().iter().count(), 0);
    }

    #[test]
    fn complements_of_parity_classes_normalize() {
        assert_eq!(IndexSet::complement(IndexSet::odds()), IndexSet::evens());
        assert_eq!(IndexSet::complement(IndexSet::evens()), IndexSet::odds());
    }

    #[test]
    fn overflow_is_reported_not_wrapped() {
        let ray = IndexSet::dyadic_ray(64).unwrap();
        assert_eq!(ray.nth(1), Some(1u64 << 63));
        assert_eq!(ray.nth(2), None);
        assert_eq!(IndexSet::odds().nth(u64::MAX), None);
    }

    #[test]
    fn ratio_bounds_hold() {
        for s in sets() {
            let Some((lo, hi)) = s.ratio_bounds() else { continue };
            for m in 1..1000 {
                let r = s.nth(m).unwrap() as f64 / m as f64;
                assert!(lo <= r && r <= hi, "{s}: {lo} <= {r} <= {hi}");
            }
        }
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(IndexSet::progression(0, 1).is_err());
        assert!(IndexSet::progression(2, -2).is_err());
        assert!(IndexSet::dyadic_ray(0).is_err());
        assert!(IndexSet::finite(vec![0, 1]).is_err());
    }
}
