//! Vertex gadgets for the even-subgraph-to-perfect-matching expansion.
//!
//! A degree-`d` vertex is replaced by a small planar gadget with `d`
//! terminals, one per incident edge in rotation order. The defining
//! property: for a terminal subset `S` matched externally, the rest of the
//! gadget has exactly one perfect matching when `|S|` is even and none when
//! `|S|` is odd. Chaining pieces with weight-1 connector edges composes
//! parities, so a chain of triangles (odd pieces) with a "paw" (an even
//! piece) at the front covers every degree.
//!
//! All gadget-internal edges carry weight 1, so the matching generating
//! function of the expanded graph equals the even-subgraph polynomial
//! `Σ_{A even} Π_{e∈A} w_e` of the original.

/// Gadget for one vertex, in local vertex ids `0..vertex_count`.
pub(crate) struct Gadget {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    /// terminal vertex for each incident original edge, in rotation order
    pub terminals: Vec<usize>,
}

/// Builds the gadget for a vertex of degree `d >= 1`.
pub(crate) fn vertex_gadget(d: usize) -> Gadget {
    match d {
        0 => Gadget {
            vertex_count: 0,
            edges: Vec::new(),
            terminals: Vec::new(),
        },
        1 => Gadget {
            // pendant pair: terminal + mate
            vertex_count: 2,
            edges: vec![(0, 1)],
            terminals: vec![0],
        },
        2 => Gadget {
            // single edge, both ends terminals
            vertex_count: 2,
            edges: vec![(0, 1)],
            terminals: vec![0, 1],
        },
        3 => paw(),
        d if d % 2 == 0 => chain(&vec![Piece::Triangle; d - 2]),
        d => {
            let mut pieces = vec![Piece::Paw];
            pieces.extend(vec![Piece::Triangle; d - 3]);
            chain(&pieces)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Piece {
    /// 3 vertices, odd parity: slots are the triangle corners.
    Triangle,
    /// 4 vertices, even parity: hub 3 plus slots 0,1,2 with edge {1,2}.
    Paw,
}

fn paw() -> Gadget {
    Gadget {
        vertex_count: 4,
        edges: vec![(0, 3), (1, 3), (2, 3), (1, 2)],
        terminals: vec![0, 1, 2],
    }
}

/// Chains pieces left to right: the last slot of each piece is joined to the
/// first slot of the next by a connector edge; remaining slots become
/// terminals in order.
fn chain(pieces: &[Piece]) -> Gadget {
    let mut edges = Vec::new();
    let mut terminals = Vec::new();
    let mut base = 0usize;
    let mut prev_right: Option<usize> = None;
    let last = pieces.len() - 1;
    for (idx, &p) in pieces.iter().enumerate() {
        let (count, local_edges, slots): (usize, Vec<(usize, usize)>, Vec<usize>) = match p {
            Piece::Triangle => (3, vec![(0, 1), (1, 2), (0, 2)], vec![0, 1, 2]),
            Piece::Paw => (4, paw().edges, paw().terminals),
        };
        for (a, b) in local_edges {
            edges.push((base + a, base + b));
        }
        let slots: Vec<usize> = slots.into_iter().map(|s| base + s).collect();
        let mut free = slots.clone();
        if let Some(r) = prev_right {
            // consume the first slot as the left port
            let left = free.remove(0);
            edges.push((r, left));
        }
        if idx != last {
            // consume the last slot as the right port
            prev_right = Some(free.pop().expect("piece has a free slot"));
        }
        terminals.extend(free);
        base += count;
    }
    Gadget {
        vertex_count: base,
        edges,
        terminals,
    }
}
