#[path = "support/oracles.rs"]
mod oracles;

use hddcrp::links::{component_labels, DisjointSets, LinkState};
use proptest::prelude::*;

proptest! {
    #[test]
    fn union_find_matches_graph_search(n in 1usize..30, raw in prop::collection::vec((any::<usize>(), any::<usize>()), 0..40)) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let mut sets = DisjointSets::new(n);
        for &(a, b) in &edges {
            sets.union(a, b);
        }
        prop_assert!(oracles::same_partition(&sets.labels(), &oracles::components(n, &edges)));
    }

    #[test]
    fn only_active_table_links_join(links in prop::collection::vec((any::<usize>(), any::<usize>()), 1..20)) {
        let n = links.len();
        let customer: Vec<usize> = links.iter().enumerate().map(|(i, (a, _))| a % (i + 1)).collect();
        let table: Vec<usize> = links.iter().map(|(_, c)| c % n).collect();
        let state = LinkState { customer_links: customer.clone(), table_links: table.clone() };
        let mut edges: Vec<(usize, usize)> = customer.iter().enumerate().map(|(i, &a)| (i, a)).collect();
        edges.extend((0..n).filter(|&i| customer[i] == i).map(|i| (i, table[i])));
        prop_assert!(oracles::same_partition(&component_labels(&state), &oracles::components(n, &edges)));
    }
}
