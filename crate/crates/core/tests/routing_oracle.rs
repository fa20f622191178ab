//! Shortest routes against Floyd–Warshall on random small graphs.

mod support;

use arianna_core::pathgraph::{shortest_route, NoRoute, TravelDirection};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{floyd_warshall, oracle_route, oracle_weight, routing_deployment};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn matches_floyd_warshall(seed in any::<u64>(), enabled_only in any::<bool>()) {
        let d = routing_deployment(&mut ChaCha8Rng::seed_from_u64(seed));
        let ap = floyd_warshall(&d, enabled_only);
        for a in &d.nodes {
            for b in &d.nodes {
                let got = shortest_route(&d, a.id, b.id, enabled_only);
                let want = ap.dist[ap.index(a.id)][ap.index(b.id)];
                match (got, want) {
                    (Err(NoRoute), None) => {}
                    (Ok(route), Some(len)) => {
                        prop_assert_eq!(route.length_um, len);
                        let seq: Vec<_> = route.steps.iter().map(|s| s.edge).collect();
                        prop_assert_eq!(Some(seq), oracle_route(&d, &ap, a.id, b.id, enabled_only));
                        // The steps form a walk from a to b with consistent directions.
                        let mut at = a.id;
                        let mut sum = 0;
                        for s in &route.steps {
                            let e = d.edge(s.edge).unwrap();
                            prop_assert!(e.enabled || !enabled_only);
                            let (start, end) = match s.direction {
                                TravelDirection::Forward => (e.from, e.to),
                                TravelDirection::Backward => (e.to, e.from),
                            };
                            prop_assert_eq!(start, at);
                            at = end;
                            sum += oracle_weight(e);
                        }
                        prop_assert_eq!(at, b.id);
                        prop_assert_eq!(sum, len);
                    }
                    (got, want) => prop_assert!(false, "{:?} vs oracle {:?}", got, want),
                }
            }
        }
    }
}

#[test]
fn unknown_nodes_have_no_route() {
    let d = routing_deployment(&mut ChaCha8Rng::seed_from_u64(1));
    let ghost = arianna_core::pathgraph::NodeId(9999);
    assert_eq!(shortest_route(&d, ghost, d.nodes[0].id, false), Err(NoRoute));
    assert_eq!(shortest_route(&d, d.nodes[0].id, ghost, false), Err(NoRoute));
}
