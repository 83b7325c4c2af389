//! Directed square lattices: a torus or an open rectangular patch.
//!
//! Every edge points up or right. Vertices, edges and faces are numbered
//! row-major from the lower-left corner; horizontal edges come first.
//! The boundary of face `(x, y)` is listed counterclockwise from its lower-left
//! vertex: bottom (forward), right (forward), top (backward), left (backward).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Torus,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(Boundary::Torus),
            "open" => Ok(Boundary::Open),
            _ => input(format!("unknown boundary '{s}' (expected torus or open)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Vertex the edge points away from.
    pub tail: usize,
    /// Vertex the edge points toward.
    pub head: usize,
    pub horizontal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarEdge {
    pub edge: usize,
    pub outgoing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceEdge {
    pub edge: usize,
    /// Traversed along its orientation when walking counterclockwise.
    pub forward: bool,
}

/// Ways of measuring the boundary of an edge region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConvention {
    /// Vertices whose star has edges both inside and outside the region.
    CutVertices,
    /// Twice the cut-vertex count: the boundary measured in half-edge units.
    HalfEdges,
    /// Edges outside the region with exactly one endpoint touched by it.
    DanglingEdges,
}

#[derive(Clone, Debug)]
pub struct LatticeSpec {
    lx: usize,
    ly: usize,
    boundary: Boundary,
    vertex_coords: Vec<(usize, usize)>,
    edges: Vec<Edge>,
    stars: Vec<Vec<StarEdge>>,
    faces: Vec<[FaceEdge; 4]>,
    edge_faces: Vec<Vec<usize>>,
}

impl LatticeSpec {
    /// `lx × ly` plaquettes. A torus needs at least two in each direction so
    /// that no edge is a loop and no face repeats an edge.
    pub fn new(lx: usize, ly: usize, boundary: Boundary) -> Result<Self> {
        match boundary {
            Boundary::Torus if lx < 2 || ly < 2 => {
                return input(format!("a torus needs lx, ly >= 2 (got {lx}×{ly})"))
            }
            Boundary::Open if lx < 1 || ly < 1 => {
                return input(format!("an open patch needs lx, ly >= 1 (got {lx}×{ly})"))
            }
            _ => {}
        }
        if lx > 64 || ly > 64 {
            return input("lattice side longer than 64");
        }
        let (vx, vy) = match boundary {
            Boundary::Torus => (lx, ly),
            Boundary::Open => (lx + 1, ly + 1),
        };
        let vertex = |x: usize, y: usize| (y % vy) * vx + (x % vx);
        let vertex_coords = (0..vx * vy).map(|v| (v % vx, v / vx)).collect();

        // horizontal edges: x in 0..lx, y in 0..vy; vertical: x in 0..vx, y in 0..ly
        let nh = lx * vy;
        let h = |x: usize, y: usize| (y % vy) * lx + (x % lx);
        let v = |x: usize, y: usize| nh + (y % ly) * vx + (x % vx);
        let mut edges = Vec::with_capacity(nh + vx * ly);
        for y in 0..vy {
            for x in 0..lx {
                edges.push(Edge {
                    tail: vertex(x, y),
                    head: vertex(x + 1, y),
                    horizontal: true,
                });
            }
        }
        for y in 0..ly {
            for x in 0..vx {
                edges.push(Edge {
                    tail: vertex(x, y),
                    head: vertex(x, y + 1),
                    horizontal: false,
                });
            }
        }

        let mut stars = vec![Vec::new(); vx * vy];
        for (e, edge) in edges.iter().enumerate() {
            stars[edge.tail].push(StarEdge { edge: e, outgoing: true });
            stars[edge.head].push(StarEdge { edge: e, outgoing: false });
        }
        for star in &mut stars {
            star.sort_by_key(|s| s.edge);
        }

        let mut faces = Vec::with_capacity(lx * ly);
        let mut edge_faces = vec![Vec::new(); edges.len()];
        for y in 0..ly {
            for x in 0..lx {
                let f = faces.len();
                let boundary_edges = [
                    FaceEdge { edge: h(x, y), forward: true },
                    FaceEdge { edge: v(x + 1, y), forward: true },
                    FaceEdge { edge: h(x, y + 1), forward: false },
                    FaceEdge { edge: v(x, y), forward: false },
                ];
                for fe in &boundary_edges {
                    edge_faces[fe.edge].push(f);
                }
                faces.push(boundary_edges);
            }
        }
        Ok(LatticeSpec {
            lx,
            ly,
            boundary,
            vertex_coords,
            edges,
            stars,
            faces,
            edge_faces,
        })
    }

    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, Boundary::Torus)
    }

    pub fn open(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, Boundary::Open)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.stars.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn star(&self, v: usize) -> &[StarEdge] {
        &self.stars[v]
    }

    pub fn face(&self, f: usize) -> &[FaceEdge; 4] {
        &self.faces[f]
    }

    /// Faces whose boundary contains `e` (one or two).
    pub fn faces_of_edge(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    pub fn vertex_coords(&self, v: usize) -> (usize, usize) {
        self.vertex_coords[v]
    }

    pub fn vertex_at(&self, x: usize, y: usize) -> Option<usize> {
        let (vx, vy) = self.vertex_extent();
        match self.boundary {
            Boundary::Torus => Some((y % vy) * vx + (x % vx)),
            Boundary::Open => (x < vx && y < vy).then(|| y * vx + x),
        }
    }

    fn vertex_extent(&self) -> (usize, usize) {
        match self.boundary {
            Boundary::Torus => (self.lx, self.ly),
            Boundary::Open => (self.lx + 1, self.ly + 1),
        }
    }

    pub fn face_at(&self, x: usize, y: usize) -> Option<usize> {
        match self.boundary {
            Boundary::Torus => Some((y % self.ly) * self.lx + (x % self.lx)),
            Boundary::Open => (x < self.lx && y < self.ly).then(|| y * self.lx + x),
        }
    }

    /// Vertices on the boundary of face `f`, counterclockwise from lower-left.
    pub fn face_vertices(&self, f: usize) -> [usize; 4] {
        let [b, r, t, _] = self.faces[f];
        [
            self.edges[b.edge].tail,
            self.edges[r.edge].tail,
            self.edges[t.edge].head,
            self.edges[t.edge].tail,
        ]
    }

    pub fn star_edges(&self, v: usize) -> Vec<usize> {
        self.stars[v].iter().map(|s| s.edge).collect()
    }

    /// Sorted edge indices around face `f`.
    pub fn face_edges(&self, f: usize) -> Vec<usize> {
        let mut e: Vec<usize> = self.faces[f].iter().map(|fe| fe.edge).collect();
        e.sort_unstable();
        e
    }

    pub fn edge_touches(&self, e: usize, v: usize) -> bool {
        self.edges[e].tail == v || self.edges[e].head == v
    }

    pub fn face_has_edge(&self, f: usize, e: usize) -> bool {
        self.faces[f].iter().any(|fe| fe.edge == e)
    }

    /// Edge indices of a `width × height` block of faces with lower-left face
    /// `(x0, y0)`, including every edge on the faces' boundaries.
    pub fn closed_block(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Vec<usize>> {
        if width == 0 || height == 0 {
            return input("blocks need positive width and height");
        }
        if self.boundary == Boundary::Open && (x0 + width > self.lx || y0 + height > self.ly) {
            return input(format!("block {width}×{height} at ({x0},{y0}) leaves the patch"));
        }
        if self.boundary == Boundary::Torus && (width > self.lx || height > self.ly) {
            return input(format!("block {width}×{height} wraps the torus"));
        }
        let mut edges = Vec::new();
        for dy in 0..height {
            for dx in 0..width {
                let f = self.face_at(x0 + dx, y0 + dy).expect("checked above");
                edges.extend(self.faces[f].iter().map(|fe| fe.edge));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(edges)
    }

    /// Sorted vertices touched by the given edges.
    pub fn region_vertices(&self, region: &[usize]) -> Vec<usize> {
        let mut vs: Vec<usize> = region
            .iter()
            .flat_map(|&e| [self.edges[e].tail, self.edges[e].head])
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    fn membership(&self, region: &[usize]) -> Vec<bool> {
        let mut inside = vec![false; self.edges.len()];
        for &e in region {
            inside[e] = true;
        }
        inside
    }

    /// Vertices with star edges both in and out of the region.
    pub fn cut_vertices(&self, region: &[usize]) -> Vec<usize> {
        let inside = self.membership(region);
        (0..self.num_vertices())
            .filter(|&v| {
                let star = &self.stars[v];
                star.iter().any(|s| inside[s.edge]) && star.iter().any(|s| !inside[s.edge])
            })
            .collect()
    }

    pub fn boundary_size(&self, region: &[usize], convention: BoundaryConvention) -> usize {
        match convention {
            BoundaryConvention::CutVertices => self.cut_vertices(region).len(),
            BoundaryConvention::HalfEdges => 2 * self.cut_vertices(region).len(),
            BoundaryConvention::DanglingEdges => {
                let inside = self.membership(region);
                let mut touched = vec![false; self.num_vertices()];
                for v in self.region_vertices(region) {
                    touched[v] = true;
                }
                (0..self.edges.len())
                    .filter(|&e| {
                        !inside[e] && (touched[self.edges[e].tail] != touched[self.edges[e].head])
                    })
                    .count()
            }
        }
    }

    /// Number of boundary components: adjacent pairs (component of the
    /// region, component of its complement), with edges connected when they
    /// share a vertex.
    pub fn boundary_components(&self, region: &[usize]) -> usize {
        let inside = self.membership(region);
        let n = self.edges.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for star in &self.stars {
            for a in star {
                for b in star {
                    if a.edge < b.edge && inside[a.edge] == inside[b.edge] {
                        let (ra, rb) = (find(&mut parent, a.edge), find(&mut parent, b.edge));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
        let mut pairs = Vec::new();
        for star in &self.stars {
            for a in star.iter().filter(|s| inside[s.edge]) {
                for b in star.iter().filter(|s| !inside[s.edge]) {
                    pairs.push((find(&mut parent, a.edge), find(&mut parent, b.edge)));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs.len()
    }

    /// Graph distances from `sources` over the vertex graph.
    pub fn vertex_distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for s in &self.stars[v] {
                let edge = self.edges[s.edge];
                let w = if edge.tail == v { edge.head } else { edge.tail };
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Smallest vertex-graph distance between vertices touched by `a` and by `b`.
    pub fn region_distance(&self, a: &[usize], b: &[usize]) -> usize {
        let dist = self.vertex_distances(&self.region_vertices(a));
        self.region_vertices(b).iter().map(|&v| dist[v]).min().unwrap_or(usize::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        for (lx, ly) in [(2, 2), (3, 2), (4, 4), (5, 3)] {
            let l = LatticeSpec::torus(lx, ly).unwrap();
            assert_eq!(l.num_edges(), 2 * lx * ly);
            assert_eq!(l.num_vertices(), lx * ly);
            assert_eq!(l.num_faces(), lx * ly);
            for v in 0..l.num_vertices() {
                assert_eq!(l.star(v).len(), 4);
                assert_eq!(l.star(v).iter().filter(|s| s.outgoing).count(), 2);
            }
            for e in 0..l.num_edges() {
                assert_eq!(l.faces_of_edge(e).len(), 2);
                let stars = (0..l.num_vertices()).filter(|&v| l.star_edges(v).contains(&e)).count();
                assert_eq!(stars, 2);
            }
        }
        assert!(LatticeSpec::torus(1, 3).is_err());
    }

    #[test]
    fn open_counts() {
        let l = LatticeSpec::open(2, 1).unwrap();
        assert_eq!(l.num_vertices(), 6);
        assert_eq!(l.num_edges(), 7);
        assert_eq!(l.num_faces(), 2);
        let degrees: Vec<usize> = (0..6).map(|v| l.star(v).len()).collect();
        assert_eq!(degrees, vec![2, 3, 2, 2, 3, 2]);
    }

    #[test]
    fn orientation_points_up_or_right() {
        let l = LatticeSpec::open(3, 2).unwrap();
        for e in l.edges() {
            let (tx, ty) = l.vertex_coords(e.tail);
            let (hx, hy) = l.vertex_coords(e.head);
            if e.horizontal {
                assert_eq!((hx, hy), (tx + 1, ty));
            } else {
                assert_eq!((hx, hy), (tx, ty + 1));
            }
        }
    }

    #[test]
    fn face_walk_is_a_closed_loop() {
        for l in [LatticeSpec::torus(3, 2).unwrap(), LatticeSpec::open(2, 2).unwrap()] {
            for f in 0..l.num_faces() {
                let mut at = l.face_vertices(f)[0];
                for fe in l.face(f) {
                    let e = l.edge(fe.edge);
                    let (from, to) = if fe.forward { (e.tail, e.head) } else { (e.head, e.tail) };
                    assert_eq!(from, at);
                    at = to;
                }
                assert_eq!(at, l.face_vertices(f)[0]);
            }
        }
    }

    #[test]
    fn block_boundaries() {
        let l = LatticeSpec::torus(6, 6).unwrap();
        for (a, b) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let r = l.closed_block(1, 1, a, b).unwrap();
            assert_eq!(r.len(), a * (b + 1) + b * (a + 1));
            assert_eq!(l.boundary_size(&r, BoundaryConvention::CutVertices), 2 * (a + b));
            assert_eq!(l.boundary_size(&r, BoundaryConvention::HalfEdges), 4 * (a + b));
            assert_eq!(l.boundary_size(&r, BoundaryConvention::DanglingEdges), 2 * (a + b) + 4);
            assert_eq!(l.boundary_components(&r), 1);
        }
    }

    #[test]
    fn annulus_has_two_boundary_components() {
        let l = LatticeSpec::torus(5, 5).unwrap();
        let outer = l.closed_block(0, 0, 3, 3).unwrap();
        let inner = l.closed_block(1, 1, 1, 1).unwrap();
        let ring: Vec<usize> = outer.iter().copied().filter(|e| !inner.contains(e)).collect();
        assert_eq!(l.boundary_components(&ring), 2);
        assert_eq!(l.boundary_size(&ring, BoundaryConvention::CutVertices), 16);
        // two separated plaquettes
        let mut two = l.closed_block(0, 0, 1, 1).unwrap();
        two.extend(l.closed_block(2, 2, 1, 1).unwrap());
        two.sort_unstable();
        assert_eq!(l.boundary_components(&two), 2);
    }

    #[test]
    fn distances() {
        let l = LatticeSpec::torus(4, 4).unwrap();
        let a = vec![0]; // h(0,0)
        let far = l.closed_block(2, 2, 1, 1).unwrap();
        assert_eq!(l.region_distance(&a, &a), 0);
        assert!(l.region_distance(&a, &far) >= 1);
        let d = l.vertex_distances(&[0]);
        assert_eq!(d.iter().max(), Some(&4));
    }
}
