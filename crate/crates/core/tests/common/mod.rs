use cccr::{parse_edge_list, Graph};
use proptest::prelude::*;

/// Random connected graph on up to `max_n` nodes: a random tree plus
/// random chords.
pub fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (Just(n), parents, prop::collection::vec(any::<bool>(), n * n))
        })
        .prop_map(|(n, parents, chords)| {
            let mut text = String::new();
            for (i, p) in parents.into_iter().enumerate() {
                text += &format!("v{} v{}\n", p, i + 1);
            }
            for u in 0..n {
                for v in u + 2..n {
                    if chords[u * n + v] {
                        text += &format!("v{u} v{v}\n");
                    }
                }
            }
            parse_edge_list(&text).unwrap()
        })
}
