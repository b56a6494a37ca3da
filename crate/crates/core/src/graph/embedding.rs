//! Combinatorial embeddings: a cyclic order of incident edges per vertex,
//! with the face structure derived from it.

use super::Graph;

/// A rotation system for a planar graph, plus its derived face list.
///
/// Faces are directed edge cycles under the traversal rule
/// `next(u, v) = (v, predecessor of u in rotation[v])`; each directed edge
/// lies on exactly one face. For a valid planar rotation system the Euler
/// relation `V - E + F = 1 + C` holds, where `C` is the number of connected
/// components and `F` counts the shared outer face once (see
/// [`PlanarEmbedding::face_count`]).
#[derive(Debug, Clone)]
pub struct PlanarEmbedding {
    rotation: Vec<Vec<usize>>,
    faces: Vec<Vec<(usize, usize)>>,
}

impl PlanarEmbedding {
    /// Derives faces from a rotation system. `rotation[v]` lists the
    /// neighbors of `v` in cyclic order.
    pub fn from_rotation(rotation: Vec<Vec<usize>>) -> Self {
        let faces = trace_faces(&rotation);
        PlanarEmbedding { rotation, faces }
    }

    pub fn rotation(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    /// Directed face cycles. An edgeless vertex contributes no cycle.
    pub fn faces(&self) -> &[Vec<(usize, usize)>] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    /// Face count for the Euler relation `V - E + F = 1 + C`: all traced
    /// cycles, all edgeless components, minus `C - 1` so the outer face
    /// shared by every component is counted once.
    pub fn face_count(&self) -> usize {
        let comps = rotation_components(&self.rotation);
        let edgeless = comps.iter().filter(|c| c.1).count();
        self.faces.len() + edgeless - (comps.len().saturating_sub(1))
    }

    /// Checks that the embedding is structurally consistent with `g` and
    /// satisfies the Euler relation. Used by tests and as a cheap
    /// post-condition after planarity testing.
    pub fn validate(&self, g: &Graph) -> Result<(), String> {
        if self.rotation.len() != g.vertex_count() {
            return Err("vertex count mismatch".into());
        }
        for v in 0..g.vertex_count() {
            let mut rot = self.rotation[v].clone();
            rot.sort_unstable();
            if rot != g.neighbors(v) {
                return Err(format!("rotation at vertex {v} does not match adjacency"));
            }
        }
        let total_len: usize = self.faces.iter().map(|f| f.len()).sum();
        if total_len != 2 * g.edge_count() {
            return Err(format!(
                "face lengths sum to {} but 2E = {}",
                total_len,
                2 * g.edge_count()
            ));
        }
        let comps = rotation_components(&self.rotation).len();
        let (v, e, f) = (g.vertex_count(), g.edge_count(), self.face_count());
        if v + f != 1 + comps + e {
            return Err(format!("Euler relation failed: V={v} E={e} F={f} C={comps}"));
        }
        Ok(())
    }
}

/// Traces all faces of a rotation system. The successor of directed edge
/// `(u, v)` is `(v, w)` where `w` precedes `u` in `rotation[v]`.
fn trace_faces(rotation: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let n = rotation.len();
    // position of u within rotation[v], for O(1) successor lookup
    let mut pos: Vec<std::collections::HashMap<usize, usize>> = vec![Default::default(); n];
    for (v, rot) in rotation.iter().enumerate() {
        for (i, &u) in rot.iter().enumerate() {
            pos[v].insert(u, i);
        }
    }
    let mut visited: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut faces = Vec::new();
    for v in 0..n {
        for &w in &rotation[v] {
            if visited.contains(&(v, w)) {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut b) = (v, w);
            loop {
                face.push((a, b));
                visited.insert((a, b));
                let i = pos[b][&a];
                let len = rotation[b].len();
                let next = rotation[b][(i + len - 1) % len];
                a = b;
                b = next;
                if (a, b) == (v, w) {
                    break;
                }
            }
            faces.push(face);
        }
    }
    faces
}

/// Connected components implied by the rotation lists; `true` marks an
/// edgeless component.
fn rotation_components(rotation: &[Vec<usize>]) -> Vec<(Vec<usize>, bool)> {
    let n = rotation.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in &rotation[v] {
                if !seen[w] {
                    seen[w] = true;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        let edgeless = members.len() == 1 && rotation[members[0]].is_empty();
        out.push((members, edgeless));
    }
    out
}
