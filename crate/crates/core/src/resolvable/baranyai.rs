//! Resolutions of the complete `r`-uniform hypergraph on `[h]`, `r | h`.
//!
//! Elements are inserted one at a time into `C(h-1, r-1)` classes of `h/r`
//! growing blocks. After `k` elements every block type `A ⊆ [k]` is held by
//! exactly `C(h-k, r-|A|)` blocks; inserting element `k+1` must pick one
//! block per class so that `C(h-k-1, r-|A|-1)` blocks of each type grow. The
//! proportional fractional choice meets those demands exactly, so an integral
//! max-flow on the class/type bipartite graph always saturates.

use std::collections::BTreeMap;

use super::flow::FlowNetwork;
use crate::combinatorics::binomial;
use crate::{Error, Result};

/// Round-robin 1-factorization of `K_h` (`h` even): `h - 1` perfect matchings.
pub(crate) fn round_robin(h: usize) -> Vec<Vec<Vec<usize>>> {
    debug_assert!(h >= 2 && h.is_multiple_of(2));
    let n = h - 1;
    (0..n)
        .map(|round| {
            let mut class = vec![vec![round + 1, h]];
            for i in 1..h / 2 {
                let a = (round + i) % n + 1;
                let b = (round + n - i) % n + 1;
                class.push(vec![a.min(b), a.max(b)]);
            }
            class
        })
        .collect()
}

/// Integral-flow Baranyai construction. Blocks come back unsorted.
pub(crate) fn flow_resolution(h: usize, r: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let num_classes = binomial(h - 1, r - 1) as usize;
    let per_class = h / r;
    let mut classes: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); per_class]; num_classes];

    for element in 1..=h {
        let processed = element - 1;

        // distinct block types currently present, with per-class multiplicity
        let mut types: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for class in &classes {
            for block in class {
                let next = types.len();
                types.entry(block.clone()).or_insert(next);
            }
        }

        let source = 0;
        let sink = 1;
        let class_node = |c: usize| 2 + c;
        let type_node = |t: usize| 2 + num_classes + t;
        let mut net = FlowNetwork::new(2 + num_classes + types.len());

        for c in 0..num_classes {
            net.add_edge(source, class_node(c), 1);
        }
        let mut choice_edges = Vec::with_capacity(num_classes);
        for (c, class) in classes.iter().enumerate() {
            let mut mult: BTreeMap<usize, u64> = BTreeMap::new();
            for block in class {
                *mult.entry(types[block]).or_default() += 1;
            }
            let edges: Vec<_> = mult
                .into_iter()
                .map(|(t, m)| (t, net.add_edge(class_node(c), type_node(t), m)))
                .collect();
            choice_edges.push(edges);
        }
        for (block, &t) in &types {
            let room = r - block.len();
            let demand = if room == 0 {
                0
            } else {
                binomial(h - processed - 1, room - 1)
            };
            net.add_edge(type_node(t), sink, demand);
        }

        let flow = net.max_flow(source, sink);
        if flow != num_classes as u64 {
            return Err(Error::Internal(format!(
                "Baranyai step for element {element} routed {flow} of {num_classes} units"
            )));
        }

        let type_of: Vec<&Vec<usize>> = {
            let mut v = vec![None; types.len()];
            for (block, &t) in &types {
                v[t] = Some(block);
            }
            v.into_iter().map(|b| b.expect("dense type ids")).collect()
        };
        for (class, edges) in classes.iter_mut().zip(&choice_edges) {
            let &(t, _) = edges
                .iter()
                .find(|(_, id)| net.flow(*id) == 1)
                .ok_or_else(|| Error::Internal("class received no unit of flow".into()))?;
            let target = type_of[t];
            let block = class
                .iter_mut()
                .find(|b| *b == target)
                .expect("class holds a block of the chosen type");
            block.push(element);
        }
    }
    Ok(classes)
}
