//! File ownership roles from per-contributor commit counts.
//!
//! A contributor's proportion of a file is their commits to it divided by
//! all commits to it. Owners hold the highest proportion (ties give several
//! owners); majority contributors are the remaining contributors whose
//! proportion reaches `fraction` times the owner's.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::identity::IdentityKey;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Roles {
    pub owners: BTreeSet<IdentityKey>,
    pub majority: BTreeSet<IdentityKey>,
}

impl Roles {
    pub fn holds_role(&self, who: &IdentityKey, count_majority: bool) -> bool {
        self.owners.contains(who) || (count_majority && self.majority.contains(who))
    }
}

/// Owners and majority contributors for one file.
///
/// Works on counts rather than proportions: every proportion shares the
/// file's total as denominator, so comparing counts is exact.
pub fn compute_ownership(counts: &BTreeMap<IdentityKey, u64>, fraction: f64) -> Roles {
    let top = counts.values().copied().max().unwrap_or(0);
    if top == 0 {
        return Roles::default();
    }
    let cutoff = fraction * top as f64;
    let mut roles = Roles::default();
    for (who, &n) in counts {
        if n == top {
            roles.owners.insert(who.clone());
        } else if n >= 1 && n as f64 >= cutoff {
            roles.majority.insert(who.clone());
        }
    }
    roles
}

/// Each contributor's share of the file's commits.
pub fn proportions(counts: &BTreeMap<IdentityKey, u64>) -> BTreeMap<IdentityKey, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(who, &n)| {
            let p = if total == 0 { 0.0 } else { n as f64 / total as f64 };
            (who.clone(), p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> BTreeMap<IdentityKey, u64> {
        pairs.iter().map(|(k, n)| (IdentityKey::new(*k), *n)).collect()
    }

    fn set(keys: &[&str]) -> BTreeSet<IdentityKey> {
        keys.iter().map(|k| IdentityKey::new(*k)).collect()
    }

    #[test]
    fn sole_contributor_owns() {
        let roles = compute_ownership(&counts(&[("ann", 4)]), 0.5);
        assert_eq!(roles.owners, set(&["ann"]));
        assert!(roles.majority.is_empty());
    }

    #[test]
    fn fifty_fifty_tie_gives_two_owners() {
        let roles = compute_ownership(&counts(&[("ann", 3), ("bob", 3)]), 0.5);
        assert_eq!(roles.owners, set(&["ann", "bob"]));
        assert!(roles.majority.is_empty());
    }

    #[test]
    fn owner_at_twenty_percent_band() {
        // 100 commits: owner 20, then 19, 10 inside the band; 9 and 1 outside.
        let mut pairs: Vec<(String, u64)> = alloc::vec![
            ("owner".into(), 20),
            ("p19".into(), 19),
            ("p10".into(), 10),
            ("p09".into(), 9),
        ];
        for i in 0..42 {
            pairs.push((format!("one{i:02}"), 1));
        }
        let c: BTreeMap<IdentityKey, u64> =
            pairs.iter().map(|(k, n)| (IdentityKey::new(k.clone()), *n)).collect();
        assert_eq!(c.values().sum::<u64>(), 100);
        let roles = compute_ownership(&c, 0.5);
        assert_eq!(roles.owners, set(&["owner"]));
        assert_eq!(roles.majority, set(&["p10", "p19"]));
    }

    #[test]
    fn zero_fraction_makes_every_contributor_majority() {
        let roles = compute_ownership(&counts(&[("ann", 9), ("bob", 1), ("cy", 2)]), 0.0);
        assert_eq!(roles.majority, set(&["bob", "cy"]));
    }

    #[test]
    fn one_of_twenty_under_a_sixty_percent_owner_is_not_majority() {
        // x: 1/20 = 5% < 0.5 * 60% = 30%; y: 7/20 = 35% clears it.
        let roles = compute_ownership(&counts(&[("owner", 12), ("x", 1), ("y", 7)]), 0.5);
        assert!(!roles.holds_role(&IdentityKey::new("x"), true));
        assert!(roles.majority.contains(&IdentityKey::new("y")));
    }

    /// Brute force over proportions, independent of the count shortcut.
    fn brute(c: &BTreeMap<IdentityKey, u64>, fraction: f64) -> Roles {
        let total: u64 = c.values().sum();
        let props: Vec<(IdentityKey, f64)> =
            c.iter().map(|(k, &n)| (k.clone(), n as f64 / total as f64)).collect();
        let best = props.iter().map(|(_, p)| *p).fold(0.0, f64::max);
        let mut roles = Roles::default();
        for (k, p) in &props {
            if (*p - best).abs() < 1e-12 {
                roles.owners.insert(k.clone());
            } else if *p + 1e-12 >= fraction * best && c[k] >= 1 {
                roles.majority.insert(k.clone());
            }
        }
        roles
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn roles_match_brute_force_and_invariants(
            raw in proptest::collection::vec(1u64..40, 1..12),
            step in 0usize..5,
        ) {
            let fraction = [0.0, 0.25, 0.5, 0.75, 1.0][step];
            let c: BTreeMap<IdentityKey, u64> = raw
                .iter()
                .enumerate()
                .map(|(i, &n)| (IdentityKey::new(format!("c{i}")), n))
                .collect();
            let roles = compute_ownership(&c, fraction);
            prop_assert_eq!(&roles, &brute(&c, fraction));
            prop_assert!(roles.owners.intersection(&roles.majority).next().is_none());
            let props = proportions(&c);
            let sum: f64 = props.values().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            let owner_p = props[roles.owners.iter().next().unwrap()];
            for p in props.values() {
                prop_assert!(owner_p >= *p);
            }
        }
    }
}
