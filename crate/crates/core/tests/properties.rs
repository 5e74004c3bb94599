use paged_cuckoo::{
    binom, bucket_cells, hash_to_buckets, max_assignable, unrank_k_subset, BucketRef, CuckooTable,
    Instance, TableParams, Variant,
};
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Disjoint), Just(Variant::Overlap), Just(Variant::ChooseK)]
}

proptest! {
    #[test]
    fn unrank_gives_sorted_in_range_subsets(t in 1u64..5000, k in 1u64..6, frac in 0.0f64..1.0) {
        prop_assume!(k <= t);
        let count = binom(t, k).unwrap();
        let rank = ((count as f64 * frac) as u128).min(count - 1);
        let s = unrank_k_subset(t, k, rank).unwrap();
        prop_assert_eq!(s.len() as u64, k);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*s.last().unwrap() < t);
        // Lexicographic rank of s, counted directly.
        let mut back = 0u128;
        let mut prev = 0u64;
        for (i, &e) in s.iter().enumerate() {
            let r = k - i as u64;
            for c in prev..e {
                back += binom(t - c - 1, r - 1).unwrap();
            }
            prev = e + 1;
        }
        prop_assert_eq!(back, rank);
        prop_assert!(unrank_k_subset(t, k, count).is_err());
    }

    #[test]
    fn buckets_stay_inside_their_page(
        v in variant(), pages in 1usize..5, t in 2usize..12, k in 1usize..4, d in 2usize..4, key: u64, seed: u64
    ) {
        prop_assume!(k <= t && d * k > 2 && (v != Variant::Disjoint || t % k == 0));
        let p = TableParams::new(pages * t, t, k, d, v).unwrap();
        let buckets = hash_to_buckets(key, seed, &p);
        prop_assert_eq!(buckets.len(), d);
        for b in buckets {
            let cells = bucket_cells(&p, b).unwrap();
            prop_assert_eq!(cells.len(), k);
            let base = b.page as usize * t;
            prop_assert!(cells.iter().all(|&c| c >= base && c < base + t));
        }
        let past_end = BucketRef { page: pages as u64, rank: 0 };
        prop_assert!(bucket_cells(&p, past_end).is_err());
    }

    #[test]
    fn placement_invariant_survives_mixed_operations(
        v in variant(),
        seed: u64,
        ops in proptest::collection::vec((any::<bool>(), 0u64..64), 1..200),
    ) {
        let p = TableParams::new(32, 8, 2, 2, v).unwrap();
        let mut table = CuckooTable::new(p, seed);
        let mut present = std::collections::BTreeSet::new();
        for (insert, key) in ops {
            if insert {
                if present.contains(&key) {
                    continue;
                }
                if table.insert(key).placed {
                    present.insert(key);
                }
            } else {
                prop_assert_eq!(table.remove(key), present.remove(&key));
            }
            prop_assert!(table.check_placement());
            prop_assert_eq!(table.len(), present.len());
        }
        for key in &present {
            prop_assert!(table.lookup(*key));
        }
    }

    #[test]
    fn matching_is_monotone(
        n in 1usize..16,
        raw in proptest::collection::vec(proptest::collection::vec(0usize..16, 1..5), 1..20),
        extra in 0usize..16,
    ) {
        let items: Vec<Vec<usize>> = raw
            .into_iter()
            .map(|c| { let mut c: Vec<usize> = c.into_iter().map(|x| x % n).collect(); c.sort_unstable(); c.dedup(); c })
            .collect();
        let base = Instance::new(n, items.clone()).unwrap();
        let m0 = max_assignable(&base);
        prop_assert!(m0 <= n.min(items.len()));

        let mut more_items = items.clone();
        more_items.push(vec![extra % n]);
        prop_assert!(max_assignable(&Instance::new(n, more_items).unwrap()) >= m0);

        let mut wider = items;
        if !wider[0].contains(&(extra % n)) {
            wider[0].push(extra % n);
        }
        prop_assert!(max_assignable(&Instance::new(n, wider).unwrap()) >= m0);
    }
}
