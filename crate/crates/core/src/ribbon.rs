//! Ribbon operators `F^{h,g}(ξ)` built from direct and dual triangles.
//!
//! A site is a pair (vertex, face) with the vertex on the face's boundary. A
//! ribbon starts at a site and takes steps:
//!
//! * **direct** along an edge of the current face, moving the vertex to the
//!   edge's other end. Its operator is `T^g = δ_{g,z}` when the edge points
//!   along the step and `δ_{g,z⁻¹}` otherwise.
//! * **dual** across an edge at the current vertex, moving to the other face
//!   of the edge. Its operator is `δ_{g,e} L^h`, where `L^h` acts on the edge
//!   like `A_v(h)`: `z ↦ hz` if the edge points away from the vertex, else
//!   `z ↦ zh⁻¹`.
//!
//! Triangles are glued with `F^{h,g}(τρ) = Σ_k F^{h,k}(τ) F^{k̄hk, k̄g}(ρ)`.
//! All triangles of a ribbon must share one handedness: direct steps
//! counterclockwise around their face together with dual steps clockwise
//! around their vertex, or the mirror image.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::group::{direct_product, FiniteGroup};
use crate::lattice::LatticeSpec;
use crate::operator::{LocalOperator, SparseMatrix, StateVector, C64, ONE};
use crate::qd::{plaquette_projector, vertex_projector};
use crate::report::{max_error, Check};

pub const DEFAULT_MAX_RIBBON_LENGTH: usize = 4;

/// Largest number of `(g₁, g₂, h₁, h₂)` tuples compared exhaustively.
pub const DEFAULT_TUPLE_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub vertex: usize,
    pub face: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleKind {
    Direct,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub kind: TriangleKind,
    pub edge: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ribbon {
    pub start: Site,
    pub steps: Vec<Step>,
}

#[derive(Clone, Copy, Debug)]
struct Triangle {
    kind: TriangleKind,
    edge: usize,
    /// Direct: the edge points along the step. Dual: the edge points away from the vertex.
    aligned: bool,
}

/// A ribbon checked against a lattice.
#[derive(Clone, Debug)]
pub struct ValidRibbon {
    triangles: Vec<Triangle>,
    sites: Vec<usize>,
    pub start: Site,
    pub end: Site,
}

impl ValidRibbon {
    /// Sorted edges the ribbon acts on.
    pub fn support(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn is_dual_only(&self) -> bool {
        self.triangles.iter().all(|t| t.kind == TriangleKind::Dual)
    }
}

/// Offset from vertex `v` to the centre of face `f`, as signs.
fn corner_offset(lat: &LatticeSpec, v: usize, f: usize) -> (i32, i32) {
    match lat.face_vertices(f).iter().position(|&w| w == v) {
        Some(0) => (1, 1),
        Some(1) => (-1, 1),
        Some(2) => (-1, -1),
        _ => (1, -1),
    }
}

impl Ribbon {
    pub fn validate(&self, lat: &LatticeSpec, max_len: usize) -> Result<ValidRibbon> {
        if self.steps.is_empty() || self.steps.len() > max_len {
            return input(format!("ribbon length must be between 1 and {max_len}"));
        }
        let Site { mut vertex, mut face } = self.start;
        if vertex >= lat.num_vertices() || face >= lat.num_faces() || !lat.face_vertices(face).contains(&vertex) {
            return input("ribbon start is not a site (vertex on the face's boundary)");
        }
        let mut triangles = Vec::new();
        let mut handedness = None;
        for (i, step) in self.steps.iter().enumerate() {
            let e = step.edge;
            if e >= lat.num_edges() || !lat.edge_touches(e, vertex) || !lat.face_has_edge(face, e) {
                return input(format!("step {i}: edge {e} is not at the current site ({vertex}, {face})"));
            }
            let edge = lat.edge(e);
            let (aligned, right_handed) = match step.kind {
                TriangleKind::Direct => {
                    let forward = lat.face(face).iter().find(|fe| fe.edge == e).expect("edge on face").forward;
                    let along = edge.tail == vertex;
                    vertex = if along { edge.head } else { edge.tail };
                    (along, along == forward)
                }
                TriangleKind::Dual => {
                    let next = lat
                        .faces_of_edge(e)
                        .iter()
                        .copied()
                        .find(|&f| f != face)
                        .ok_or_else(|| crate::Error::Input(format!("step {i}: edge {e} borders only one face")))?;
                    let (ax, ay) = corner_offset(lat, vertex, face);
                    let (bx, by) = corner_offset(lat, vertex, next);
                    face = next;
                    (edge.tail == vertex, ax * by - ay * bx < 0)
                }
            };
            match handedness {
                None => handedness = Some(right_handed),
                Some(h) if h != right_handed => {
                    return input(format!("step {i} turns the ribbon's handedness"));
                }
                _ => {}
            }
            triangles.push(Triangle {
                kind: step.kind,
                edge: e,
                aligned,
            });
        }
        let mut sites: Vec<usize> = triangles.iter().map(|t| t.edge).collect();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() != triangles.len() {
            return input("ribbon triangles must use distinct edges");
        }
        Ok(ValidRibbon {
            triangles,
            sites,
            start: self.start,
            end: Site { vertex, face },
        })
    }
}

fn triangle_operator(
    g: &FiniteGroup,
    ribbon: &ValidRibbon,
    t: &Triangle,
    h: usize,
    k: usize,
) -> Result<Option<LocalOperator>> {
    let dims = vec![g.order(); ribbon.sites.len()];
    let pos = ribbon.sites.binary_search(&t.edge).expect("edge in support");
    match t.kind {
        TriangleKind::Dual => {
            if k != g.identity() {
                return Ok(None);
            }
            let hinv = g.inv(h);
            LocalOperator::from_columns(ribbon.sites.clone(), dims, |d| {
                let mut image = d.to_vec();
                image[pos] = if t.aligned { g.mul(h, d[pos]) } else { g.mul(d[pos], hinv) };
                vec![(image, ONE)]
            })
            .map(Some)
        }
        TriangleKind::Direct => {
            let target = if t.aligned { k } else { g.inv(k) };
            LocalOperator::diagonal(ribbon.sites.clone(), dims, |d| {
                if d[pos] == target {
                    ONE
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .map(Some)
        }
    }
}

fn glue(g: &FiniteGroup, ribbon: &ValidRibbon, from: usize, h: usize, gg: usize) -> Result<LocalOperator> {
    let t = &ribbon.triangles[from];
    if from + 1 == ribbon.triangles.len() {
        return Ok(match triangle_operator(g, ribbon, t, h, gg)? {
            Some(op) => op,
            None => zero_operator(g, ribbon),
        });
    }
    let mut total = zero_operator(g, ribbon);
    for k in g.elements() {
        let Some(first) = triangle_operator(g, ribbon, t, h, k)? else {
            continue;
        };
        let kinv = g.inv(k);
        let rest = glue(g, ribbon, from + 1, g.mul(g.mul(kinv, h), k), g.mul(kinv, gg))?;
        total = total.add(&first.mul(&rest)?)?;
    }
    Ok(total)
}

fn zero_operator(g: &FiniteGroup, ribbon: &ValidRibbon) -> LocalOperator {
    let n = ribbon.sites.len();
    LocalOperator::new(
        ribbon.sites.clone(),
        vec![g.order(); n],
        SparseMatrix::zeros(g.order().pow(n as u32)),
    )
    .expect("consistent dimensions")
}

/// `F^{h,g}(ξ)` on the ribbon's edges, with flux label `h = g₁` and path label `g = g₂`.
pub fn ribbon_operator(g: &FiniteGroup, ribbon: &ValidRibbon, h: usize, gg: usize) -> Result<LocalOperator> {
    if h >= g.order() || gg >= g.order() {
        return input("ribbon labels out of range");
    }
    glue(g, ribbon, 0, h, gg)
}

/// Endpoint locality: `F` commutes with every `A_v`, `B_p` away from the ribbon's ends,
/// and `Σ_g F^{e,g} = 𝕀`.
pub fn ribbon_locality_check(
    lat: &LatticeSpec,
    g: &FiniteGroup,
    ribbon: &ValidRibbon,
    pair_cap: usize,
    tag: &str,
) -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut terms = Vec::new();
    for v in 0..lat.num_vertices() {
        if v != ribbon.start.vertex && v != ribbon.end.vertex {
            terms.push(vertex_projector(lat, g, v)?);
        }
    }
    for p in 0..lat.num_faces() {
        if p != ribbon.start.face && p != ribbon.end.face {
            terms.push(plaquette_projector(lat, g, p)?);
        }
    }
    let mut worst: f64 = 0.0;
    let (mut compared, mut skipped) = (0usize, 0usize);
    let mut partition = zero_operator(g, ribbon);
    for h in g.elements() {
        for gg in g.elements() {
            let f = ribbon_operator(g, ribbon, h, gg)?;
            if h == g.identity() {
                partition = partition.add(&f)?;
            }
            for t in terms.iter().filter(|t| t.supports_overlap(&f)) {
                let union = t.sites().iter().chain(f.sites()).collect::<std::collections::BTreeSet<_>>().len();
                if (g.order() as f64).powi(union as i32) > pair_cap as f64 {
                    skipped += 1;
                    continue;
                }
                worst = worst.max(f.commutator(t)?.matrix().max_abs());
                compared += 1;
            }
        }
    }
    let identity = LocalOperator::identity(ribbon.sites.clone(), vec![g.order(); ribbon.sites.len()])?;
    Ok(vec![
        Check::within(format!("ribbon_endpoint_locality[{tag}]"), worst, 1e-12)
            .with_detail(format!("{compared} pairs compared, {skipped} above the size cap"))
            .since(start),
        Check::within(format!("ribbon_partition_of_unity[{tag}]"), partition.max_abs_diff(&identity)?, 1e-12).since(start),
    ])
}

/// `F^{(g₁×h₁, g₂×h₂)}(ξ) = F^{(g₁,g₂)}(ξ) ⊗ₛ F^{(h₁,h₂)}(ξ)` over all tuples,
/// or over `budget` seeded samples when there are more.
pub fn ribbon_factorization_check(
    g: &FiniteGroup,
    h: &FiniteGroup,
    lat: &LatticeSpec,
    ribbon: &Ribbon,
    budget: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let start = Instant::now();
    let valid = ribbon.validate(lat, DEFAULT_MAX_RIBBON_LENGTH)?;
    let k = direct_product(g, h, usize::MAX)?;
    let (ng, nh) = (g.order(), h.order());
    let total = ng * ng * nh * nh;
    let tuples: Vec<(usize, usize, usize, usize)> = if total <= budget {
        (0..total)
            .map(|x| (x / (ng * nh * nh), (x / (nh * nh)) % ng, (x / nh) % nh, x % nh))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..budget)
            .map(|_| {
                (
                    rng.random_range(0..ng),
                    rng.random_range(0..ng),
                    rng.random_range(0..nh),
                    rng.random_range(0..nh),
                )
            })
            .collect()
    };
    let mut errors = Vec::with_capacity(tuples.len());
    for &(g1, g2, h1, h2) in &tuples {
        let direct = ribbon_operator(&k.group, &valid, k.pair_index(g1, h1), k.pair_index(g2, h2))?;
        let stacked = LocalOperator::stack(&ribbon_operator(g, &valid, g1, g2)?, &ribbon_operator(h, &valid, h1, h2)?)?;
        errors.push(direct.max_abs_diff(&stacked)?);
    }
    let tag = format!("{}x{}", g.name(), h.name());
    Ok(vec![Check::within(format!("ribbon_factorization[{tag}]"), max_error(errors), 0.0)
        .with_detail(format!(
            "{} of {total} tuples{}",
            tuples.len(),
            if total <= budget { "" } else { " (sampled)" }
        ))
        .since(start)])
}

/// Vertices and faces whose projector expectation drops below one in `state`.
pub fn violated_terms(lat: &LatticeSpec, g: &FiniteGroup, state: &StateVector) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut vertices = Vec::new();
    for v in 0..lat.num_vertices() {
        if vertex_projector(lat, g, v)?.expectation(state)?.re < 1.0 - 1e-9 {
            vertices.push(v);
        }
    }
    let mut faces = Vec::new();
    for p in 0..lat.num_faces() {
        if plaquette_projector(lat, g, p)?.expectation(state)?.re < 1.0 - 1e-9 {
            faces.push(p);
        }
    }
    Ok((vertices, faces))
}

/// Named ribbons of length at most three around face 0 of a torus with
/// `lx, ly ≥ 3`: straight, mirrored, bent and dual-only paths.
pub fn reference_ribbons(lat: &LatticeSpec) -> Result<Vec<(String, Ribbon)>> {
    if lat.boundary() != crate::lattice::Boundary::Torus || lat.lx() < 3 || lat.ly() < 3 {
        return input("reference ribbons need a torus of at least 3x3");
    }
    let (lx, ly) = (lat.lx(), lat.ly());
    let h = |x: usize, y: usize| y * lx + x;
    let v = |x: usize, y: usize| lx * ly + y * lx + x;
    let direct = |edge| Step { kind: TriangleKind::Direct, edge };
    let dual = |edge| Step { kind: TriangleKind::Dual, edge };
    let origin = Site { vertex: 0, face: 0 };
    let ribbons = vec![
        ("direct", origin, vec![direct(h(0, 0))]),
        ("dual", origin, vec![dual(h(0, 0))]),
        ("dual_pair", origin, vec![dual(h(0, 0)), dual(v(0, ly - 1))]),
        ("straight_2", origin, vec![direct(h(0, 0)), dual(v(1, 0))]),
        ("straight_3", origin, vec![direct(h(0, 0)), dual(v(1, 0)), direct(h(1, 0))]),
        (
            "mirrored_3",
            Site { vertex: lat.vertex_at(0, 1).expect("vertex"), face: 0 },
            vec![direct(h(0, 1)), dual(v(1, 0)), direct(h(1, 1))],
        ),
        ("bent_3", origin, vec![direct(h(0, 0)), direct(v(1, 0)), dual(h(0, 1))]),
    ];
    ribbons
        .into_iter()
        .map(|(name, start, steps)| {
            let r = Ribbon { start, steps };
            r.validate(lat, DEFAULT_MAX_RIBBON_LENGTH)?;
            Ok((name.to_string(), r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec, DEFAULT_GROUP_CAP};
    use crate::operator::DEFAULT_MAX_DIM;
    use crate::qd::ground_state;

    fn group(name: &str) -> FiniteGroup {
        build_group(&GroupSpec::named(name), DEFAULT_GROUP_CAP).unwrap()
    }

    fn h_edge(lat: &LatticeSpec, x: usize, y: usize) -> usize {
        y * lat.lx() + x
    }

    fn v_edge(lat: &LatticeSpec, x: usize, y: usize) -> usize {
        lat.lx() * lat.ly() + y * lat.lx() + x
    }

    fn step(kind: TriangleKind, edge: usize) -> Step {
        Step { kind, edge }
    }

    /// Direct steps along the bottom of a row of faces, dual steps between them.
    fn straight(lat: &LatticeSpec, len: usize) -> Ribbon {
        let mut steps = Vec::new();
        for x in 0..len {
            if x % 2 == 0 {
                steps.push(step(TriangleKind::Direct, h_edge(lat, x / 2, 0)));
            } else {
                steps.push(step(TriangleKind::Dual, v_edge(lat, x / 2 + 1, 0)));
            }
        }
        Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps,
        }
    }

    /// The mirror image: direct steps clockwise along the top of the faces.
    fn mirrored(lat: &LatticeSpec) -> Ribbon {
        Ribbon {
            start: Site { vertex: lat.vertex_at(0, 1).unwrap(), face: 0 },
            steps: vec![
                step(TriangleKind::Direct, h_edge(lat, 0, 1)),
                step(TriangleKind::Dual, v_edge(lat, 1, 0)),
                step(TriangleKind::Direct, h_edge(lat, 1, 1)),
            ],
        }
    }

    /// A ribbon that turns a corner: right along the bottom, then up.
    fn bent(lat: &LatticeSpec) -> Ribbon {
        Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps: vec![
                step(TriangleKind::Direct, h_edge(lat, 0, 0)),
                step(TriangleKind::Direct, v_edge(lat, 1, 0)),
                step(TriangleKind::Dual, h_edge(lat, 0, 1)),
                step(TriangleKind::Direct, v_edge(lat, 1, 1)),
            ],
        }
    }

    #[test]
    fn validation() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        assert!(straight(&lat, 4).validate(&lat, 4).is_ok());
        assert!(mirrored(&lat).validate(&lat, 4).is_ok());
        assert!(bent(&lat).validate(&lat, 4).is_ok());
        assert!(straight(&lat, 5).validate(&lat, 4).is_err());
        let bad = Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps: vec![step(TriangleKind::Direct, h_edge(&lat, 1, 1))],
        };
        assert!(bad.validate(&lat, 4).is_err());
        // a direct step clockwise around the face after a right-handed start
        let mixed = Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps: vec![
                step(TriangleKind::Direct, h_edge(&lat, 0, 0)),
                step(TriangleKind::Direct, h_edge(&lat, 0, 0)),
            ],
        };
        assert!(mixed.validate(&lat, 4).is_err());
    }

    #[test]
    fn locality_for_abelian_and_nonabelian_groups() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        for name in ["Z2", "Z3", "S3"] {
            let g = group(name);
            for (label, r) in [("straight", straight(&lat, 3)), ("mirrored", mirrored(&lat)), ("bent", bent(&lat))] {
                let valid = r.validate(&lat, 4).unwrap();
                let checks = ribbon_locality_check(&lat, &g, &valid, 300_000, label).unwrap();
                assert!(checks.iter().all(Check::passed), "{name} {label}: {checks:?}");
                assert!(checks[0].detail.as_deref().unwrap().ends_with(", 0 above the size cap"));
            }
        }
    }

    #[test]
    fn trivial_labels_give_identity_on_dual_ribbons() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        let r = Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps: vec![step(TriangleKind::Dual, v_edge(&lat, 0, 0))],
        }
        .validate(&lat, 4)
        .unwrap();
        let g = group("S3");
        let f = ribbon_operator(&g, &r, 0, 0).unwrap();
        let id = LocalOperator::identity(r.support().to_vec(), vec![6]).unwrap();
        assert_eq!(f.max_abs_diff(&id).unwrap(), 0.0);
    }

    #[test]
    fn z2_strings_create_excitation_pairs() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        let z2 = group("Z2");
        let omega = ground_state(&lat, &z2, DEFAULT_MAX_DIM).unwrap();

        // dual steps only: a σ^x string across two vertical edges, flipping the end faces
        let dual = Ribbon {
            start: Site { vertex: lat.vertex_at(1, 0).unwrap(), face: 0 },
            steps: vec![step(TriangleKind::Dual, v_edge(&lat, 1, 0))],
        }
        .validate(&lat, 4)
        .unwrap();
        let sx = ribbon_operator(&z2, &dual, 1, 0).unwrap();
        let (v, f) = violated_terms(&lat, &z2, &omega.apply(&sx).unwrap()).unwrap();
        assert_eq!((v.len(), f.len()), (0, 2));

        // direct steps only: the σ^z string Σ_g χ(g) F^{e,g} violates the two end vertices
        let direct = Ribbon {
            start: Site { vertex: 0, face: 0 },
            steps: vec![step(TriangleKind::Direct, h_edge(&lat, 0, 0)), step(TriangleKind::Direct, v_edge(&lat, 1, 0))],
        }
        .validate(&lat, 4)
        .unwrap();
        let sz = ribbon_operator(&z2, &direct, 0, 0)
            .unwrap()
            .sub(&ribbon_operator(&z2, &direct, 0, 1).unwrap())
            .unwrap();
        let (v, f) = violated_terms(&lat, &z2, &omega.apply(&sz).unwrap()).unwrap();
        assert_eq!((v.len(), f.len()), (2, 0));
        assert_eq!(v, {
            let mut e = vec![0, lat.vertex_at(1, 1).unwrap()];
            e.sort_unstable();
            e
        });
    }

    #[test]
    fn factorization() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        let r = straight(&lat, 2);
        let checks = ribbon_factorization_check(&group("Z2"), &group("Z2"), &lat, &r, 64, 1).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
        let checks = ribbon_factorization_check(&group("Z2"), &group("Z3"), &lat, &straight(&lat, 3), 20, 1).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
        assert!(checks[0].detail.as_deref().unwrap().contains("sampled"));
    }

    #[test]
    fn reference_ribbons_are_valid() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        let ribbons = reference_ribbons(&lat).unwrap();
        assert_eq!(ribbons.len(), 7);
        assert!(reference_ribbons(&LatticeSpec::torus(2, 2).unwrap()).is_err());
    }
}
