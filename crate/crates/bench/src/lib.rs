//! Shared inputs for the benchmarks.

use std::sync::Arc;

use graphcov::rng::stream_rng;
use graphcov::{EdgeWeights, Graph};
use rand::Rng;

/// Square lattice with weights drawn uniformly from `[0.2, 2]`.
pub fn lattice_weights(side: usize, seed: u64) -> EdgeWeights {
    let graph = Arc::new(Graph::lattice(side).expect("side >= 2"));
    let mut rng = stream_rng(seed, 0);
    let values = (0..graph.edge_count()).map(|_| rng.random_range(0.2..2.0)).collect();
    EdgeWeights::from_edge_values(&graph, values).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_inputs_are_reproducible() {
        let a = lattice_weights(4, 1);
        assert_eq!(a.values(), lattice_weights(4, 1).values());
        assert_eq!(a.graph().edge_count(), 24);
    }
}
