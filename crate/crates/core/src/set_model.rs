//! The symmetry-enriched toric code.
//!
//! Qubits sit on edges (`σ`) and on vertices (`τ`), numbered edges first, then
//! vertex `v` at `num_edges + v`. The terms are
//!
//! * `B̃_f = i^{−Σ_{e∈f} σ^x_e (τ^z_{∂₁e} − τ^z_{∂₀e})/2} · B_f`,
//! * `Q̃_v = (𝕀 + A_v)/2 · τ^x_v · i^{−τ^z_v Σ_{e∋v} f(e,v) σ^x_e / 2}`,
//!
//! with `∂₀e` the tail, `∂₁e` the head, and `f(e,v) = +1` when `e` leaves `v`.
//! In the mixed basis (σ^x eigenbasis on edges, τ^z eigenbasis on vertices)
//! every exponent is diagonal and every term maps a basis state to a multiple
//! of a single basis state, which makes exact orbit counting possible.
//!
//! On open patches only vertices with a full four-edge star carry a `Q̃_v`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::Instant;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::lattice::{Boundary, LatticeSpec};
use crate::operator::{HilbertSpace, LocalOperator, SparseMatrix, StateVector, C64, ONE, ZERO};
use crate::report::{max_error, Check};

/// Largest qubit count for dense states and exhaustive orbit counting.
pub const SET_DENSE_QUBITS: usize = 22;

/// Largest number of reference states tried when projecting onto the ground space.
const REFERENCE_ATTEMPTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Enriched,
    /// All phase exponents set to zero: plain toric code terms times `τ^x_v`.
    Decoupled,
}

#[derive(Clone, Debug)]
pub struct SetLattice {
    base: LatticeSpec,
}

impl SetLattice {
    pub fn new(base: LatticeSpec) -> Result<Self> {
        let n = base.num_edges() + base.num_vertices();
        if n > 64 {
            return input(format!("{n} qubits exceed the 64 supported by the SET model"));
        }
        Ok(SetLattice { base })
    }

    pub fn base(&self) -> &LatticeSpec {
        &self.base
    }

    pub fn num_edges(&self) -> usize {
        self.base.num_edges()
    }

    pub fn num_vertices(&self) -> usize {
        self.base.num_vertices()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_edges() + self.num_vertices()
    }

    pub fn vertex_qubit(&self, v: usize) -> usize {
        self.num_edges() + v
    }

    /// `+1` if `e` points away from `v`, `−1` if it points toward it, `0` otherwise.
    pub fn f_sign(&self, e: usize, v: usize) -> i32 {
        let edge = self.base.edge(e);
        if edge.tail == v {
            1
        } else if edge.head == v {
            -1
        } else {
            0
        }
    }

    /// Vertices carrying a `Q̃_v`: those with a complete star.
    pub fn term_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.base.star(v).len() == 4).collect()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.base.star(v).len() != 4).collect()
    }

    fn face_vertex_set(&self, f: usize) -> Vec<usize> {
        let mut vs = self.base.face_vertices(f).to_vec();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    fn plaquette_support(&self, f: usize) -> Vec<usize> {
        let mut s = self.base.face_edges(f);
        s.extend(self.face_vertex_set(f).into_iter().map(|v| self.vertex_qubit(v)));
        s
    }

    fn vertex_support(&self, v: usize) -> Vec<usize> {
        let mut s = self.base.star_edges(v);
        s.push(self.vertex_qubit(v));
        s
    }

    /// Twice the plaquette exponent, from ±1 eigenvalues of `σ^x` and `τ^z`.
    fn plaquette_exponent2(&self, f: usize, x: impl Fn(usize) -> i32, t: impl Fn(usize) -> i32) -> i32 {
        self.base
            .face_edges(f)
            .into_iter()
            .map(|e| {
                let edge = self.base.edge(e);
                x(e) * (t(edge.head) - t(edge.tail))
            })
            .sum()
    }

    /// Twice the vertex exponent.
    fn vertex_exponent2(&self, v: usize, x: impl Fn(usize) -> i32, t: impl Fn(usize) -> i32) -> i32 {
        t(v) * self.base.star_edges(v).into_iter().map(|e| self.f_sign(e, v) * x(e)).sum::<i32>()
    }
}

/// `i^{−k/2} = e^{−iπk/4}`, exact for even `k`.
pub fn quarter_turn(k: i32) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match k.rem_euclid(8) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(s, -s),
        2 => C64::new(0.0, -1.0),
        3 => C64::new(-s, -s),
        4 => C64::new(-1.0, 0.0),
        5 => C64::new(-s, s),
        6 => C64::new(0.0, 1.0),
        _ => C64::new(s, s),
    }
}

/// `H_E D H_E` on `sites`, where `D` is diagonal with entry `phase(values)` and
/// `values[k]` is the ±1 eigenvalue of `σ^x` (edge sites) or `τ^z` (vertex
/// sites) at `sites[k]`. Hadamards act on the edge sites only.
fn dressing(sites: &[usize], num_edges: usize, phase: impl Fn(&[i32]) -> C64) -> Result<LocalOperator> {
    let edge_pos: Vec<usize> = (0..sites.len()).filter(|&k| sites[k] < num_edges).collect();
    let m = edge_pos.len();
    let norm = 1.0 / (1u64 << m) as f64;
    LocalOperator::from_columns(sites.to_vec(), vec![2; sites.len()], |z| {
        let zmask = edge_pos.iter().enumerate().fold(0usize, |acc, (b, &k)| acc | (z[k] << b));
        let mut values: Vec<i32> = z.iter().map(|&d| 1 - 2 * d as i32).collect();
        let phases: Vec<C64> = (0..1usize << m)
            .map(|x| {
                for (b, &k) in edge_pos.iter().enumerate() {
                    values[k] = 1 - 2 * ((x >> b) & 1) as i32;
                }
                phase(&values)
            })
            .collect();
        (0..1usize << m)
            .filter_map(|zp| {
                let y = zmask ^ zp;
                let amp: C64 = phases
                    .iter()
                    .enumerate()
                    .map(|(x, &d)| if (x & y).count_ones() % 2 == 0 { d } else { -d })
                    .sum::<C64>()
                    * norm;
                (amp != ZERO).then(|| {
                    let mut row = z.to_vec();
                    for (b, &k) in edge_pos.iter().enumerate() {
                        row[k] = (zp >> b) & 1;
                    }
                    (row, amp)
                })
            })
            .collect()
    })
}

/// Reads the ±1 value of qubit `q` from the per-site values of `sites`.
fn site_value<'s>(sites: &'s [usize]) -> impl Fn(&[i32], usize) -> i32 + 's {
    move |values: &[i32], q: usize| values[sites.binary_search(&q).expect("qubit in support")]
}

/// `B_f = ⊗_{e∈f} σ^z_e`.
pub fn plaquette_z(lat: &SetLattice, f: usize) -> Result<LocalOperator> {
    if f >= lat.base.num_faces() {
        return input(format!("face {f} out of range"));
    }
    let edges = lat.base.face_edges(f);
    let n = edges.len();
    LocalOperator::diagonal(edges, vec![2; n], |z| {
        C64::new(if z.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    })
}

/// `(𝕀 + A_v)/2` with `A_v = ⊗_{e∋v} σ^x_e`.
pub fn star_projector(lat: &SetLattice, v: usize) -> Result<LocalOperator> {
    let edges = lat.base.star_edges(v);
    let n = edges.len();
    LocalOperator::from_columns(edges, vec![2; n], |z| {
        let flipped: Vec<usize> = z.iter().map(|d| 1 - d).collect();
        vec![(z.to_vec(), C64::new(0.5, 0.0)), (flipped, C64::new(0.5, 0.0))]
    })
}

fn tau_x(lat: &SetLattice, v: usize) -> Result<LocalOperator> {
    LocalOperator::from_columns(vec![lat.vertex_qubit(v)], vec![2], |z| vec![(vec![1 - z[0]], ONE)])
}

pub fn modified_plaquette(lat: &SetLattice, f: usize, coupling: Coupling) -> Result<LocalOperator> {
    let b = plaquette_z(lat, f)?;
    let sites = lat.plaquette_support(f);
    let value = site_value(&sites);
    let nv = lat.num_edges();
    let phase = dressing(&sites, nv, |vals| match coupling {
        Coupling::Decoupled => ONE,
        Coupling::Enriched => {
            quarter_turn(-lat.plaquette_exponent2(f, |e| value(vals, e), |w| value(vals, nv + w)))
        }
    })?;
    phase.mul(&b)
}

pub fn modified_vertex(lat: &SetLattice, v: usize, coupling: Coupling) -> Result<LocalOperator> {
    if v >= lat.num_vertices() {
        return input(format!("vertex {v} out of range"));
    }
    let sites = lat.vertex_support(v);
    let value = site_value(&sites);
    let nv = lat.num_edges();
    let phase = dressing(&sites, nv, |vals| match coupling {
        Coupling::Decoupled => ONE,
        Coupling::Enriched => quarter_turn(-lat.vertex_exponent2(v, |e| value(vals, e), |w| value(vals, nv + w))),
    })?;
    star_projector(lat, v)?.mul(&tau_x(lat, v)?.mul(&phase)?)
}

/// `U = ⊗ τ^x` over the vertex qubits in `op`'s support.
fn symmetry_on_support(lat: &SetLattice, op: &LocalOperator) -> Result<LocalOperator> {
    let sites = op.sites().to_vec();
    let n = sites.len();
    let ne = lat.num_edges();
    LocalOperator::from_columns(sites.clone(), vec![2; n], |z| {
        let row = z.iter().zip(&sites).map(|(&d, &q)| if q >= ne { 1 - d } else { d }).collect();
        vec![(row, ONE)]
    })
}

/// `max |U T U† − T|` for `U = ⊗_v τ^x_v`.
pub fn symmetry_error(lat: &SetLattice, op: &LocalOperator) -> Result<f64> {
    let u = symmetry_on_support(lat, op)?;
    u.mul(op)?.mul(&u)?.max_abs_diff(op)
}

#[derive(Clone, Debug, Serialize)]
pub struct SetTerm {
    pub label: String,
    #[serde(skip)]
    pub op: LocalOperator,
}

/// Every `B̃_f`, then `Q̃_v` for the term vertices.
pub fn set_terms(lat: &SetLattice, coupling: Coupling) -> Result<Vec<SetTerm>> {
    let mut terms = Vec::new();
    for f in 0..lat.base.num_faces() {
        terms.push(SetTerm {
            label: format!("B{f}"),
            op: modified_plaquette(lat, f, coupling)?,
        });
    }
    for v in lat.term_vertices() {
        terms.push(SetTerm {
            label: format!("Q{v}"),
            op: modified_vertex(lat, v, coupling)?,
        });
    }
    Ok(terms)
}

/// Largest commutator entry over overlapping pairs, with the worst pair.
pub fn commutation_check(lat: &SetLattice, coupling: Coupling, tag: &str) -> Result<Check> {
    let start = Instant::now();
    let terms = set_terms(lat, coupling)?;
    let pairs: Vec<(usize, usize)> = (0..terms.len())
        .flat_map(|i| (i + 1..terms.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| terms[i].op.supports_overlap(&terms[j].op))
        .collect();
    let errors = pairs
        .par_iter()
        .map(|&(i, j)| Ok((terms[i].op.commutator(&terms[j].op)?.matrix().max_abs(), i, j)))
        .collect::<Result<Vec<_>>>()?;
    let (worst, wi, wj) = errors.into_iter().fold((0.0, 0, 0), |acc, e| if e.0 > acc.0 { e } else { acc });
    let mut detail = format!("{} overlapping pairs of {} terms", pairs.len(), terms.len());
    if worst > 0.0 {
        detail.push_str(&format!(", largest at ({}, {})", terms[wi].label, terms[wj].label));
    }
    Ok(Check::within(format!("set_terms_commute[{tag}]"), worst, 1e-12)
        .with_detail(detail)
        .since(start))
}

pub fn symmetry_check(lat: &SetLattice, coupling: Coupling, tag: &str) -> Result<Check> {
    let start = Instant::now();
    let terms = set_terms(lat, coupling)?;
    let errors = terms
        .iter()
        .map(|t| symmetry_error(lat, &t.op))
        .collect::<Result<Vec<_>>>()?;
    let worst = max_error(errors);
    Ok(Check::within(format!("set_symmetry[{tag}]"), worst, 0.0)
        .with_detail(format!("U = prod tau^x conjugation on {} terms", terms.len()))
        .since(start))
}

/// Zero exponents give exactly `B_f` and `(𝕀 + A_v)/2 · τ^x_v`.
pub fn decoupled_limit_check(lat: &SetLattice, tag: &str) -> Result<Check> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for f in 0..lat.base.num_faces() {
        worst = worst.max(modified_plaquette(lat, f, Coupling::Decoupled)?.max_abs_diff(&plaquette_z(lat, f)?)?);
    }
    for v in lat.term_vertices() {
        let plain = star_projector(lat, v)?.mul(&tau_x(lat, v)?)?;
        worst = worst.max(modified_vertex(lat, v, Coupling::Decoupled)?.max_abs_diff(&plain)?);
    }
    Ok(Check::within(format!("set_decoupled_limit[{tag}]"), worst, 0.0).since(start))
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermSpectrum {
    pub kind: String,
    pub terms: usize,
    pub hermiticity_error: f64,
    /// Distinct eigenvalues of the local matrix, merged over all terms of this kind.
    pub eigenvalues: Vec<f64>,
    pub squared_eigenvalues: Vec<f64>,
}

fn distinct_eigenvalues(op: &LocalOperator) -> Vec<f64> {
    let m = op.matrix().to_dense();
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut vals: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().map(|v| (v * 1e9).round() / 1e9 + 0.0).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    vals
}

fn merge(into: &mut Vec<f64>, vals: Vec<f64>) {
    into.extend(vals);
    into.sort_by(f64::total_cmp);
    into.dedup();
}

/// Spectra of the terms and their squares, reported rather than assumed.
pub fn term_spectra(lat: &SetLattice, coupling: Coupling) -> Result<Vec<TermSpectrum>> {
    let terms = set_terms(lat, coupling)?;
    let mut out = Vec::new();
    for (kind, prefix) in [("plaquette", 'B'), ("vertex", 'Q')] {
        let mut s = TermSpectrum {
            kind: kind.into(),
            terms: 0,
            hermiticity_error: 0.0,
            eigenvalues: Vec::new(),
            squared_eigenvalues: Vec::new(),
        };
        for t in terms.iter().filter(|t| t.label.starts_with(prefix)) {
            s.terms += 1;
            s.hermiticity_error = s.hermiticity_error.max(t.op.hermiticity_error());
            merge(&mut s.eigenvalues, distinct_eigenvalues(&t.op));
            merge(&mut s.squared_eigenvalues, distinct_eigenvalues(&t.op.mul(&t.op)?));
        }
        out.push(s);
    }
    Ok(out)
}

/// Mixed-basis state as a sparse map from basis index (qubit 0 most significant) to amplitude.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixedState {
    pub num_qubits: usize,
    pub amplitudes: BTreeMap<u64, C64>,
}

impl MixedState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit(&self, q: usize) -> u64 {
        1u64 << (self.num_qubits - 1 - q)
    }

    /// The same state in the computational basis: Hadamards on every edge qubit.
    pub fn to_dense(&self, num_edges: usize) -> Result<StateVector> {
        if self.num_qubits > SET_DENSE_QUBITS {
            return Err(Error::CapExceeded {
                what: "dense SET state qubits",
                requested: self.num_qubits,
                cap: SET_DENSE_QUBITS,
            });
        }
        let mut amps = vec![ZERO; 1 << self.num_qubits];
        for (&b, &a) in &self.amplitudes {
            amps[b as usize] = a;
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for q in 0..num_edges {
            let bit = self.bit(q) as usize;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a, b) = (amps[i], amps[i | bit]);
                    amps[i] = (a + b) * s;
                    amps[i | bit] = (a - b) * s;
                }
            }
        }
        StateVector::new(HilbertSpace::uniform(self.num_qubits, 2, 1 << SET_DENSE_QUBITS)?, amps)
    }

    /// Apply an operator already written in the mixed basis.
    fn apply_local(&self, op: &LocalOperator) -> MixedState {
        let sites = op.sites();
        let adj = op.matrix().adjoint();
        let site_mask: u64 = sites.iter().fold(0, |m, &q| m | self.bit(q));
        let mut out: BTreeMap<u64, C64> = BTreeMap::new();
        for (&b, &amp) in &self.amplitudes {
            let col = sites.iter().fold(0usize, |acc, &q| (acc << 1) | usize::from(b & self.bit(q) != 0));
            let rest = b & !site_mask;
            for (row, v) in adj.row(col) {
                let bits = sites.iter().enumerate().fold(rest, |acc, (k, &q)| {
                    if (row >> (sites.len() - 1 - k)) & 1 == 1 {
                        acc | self.bit(q)
                    } else {
                        acc
                    }
                });
                *out.entry(bits).or_insert(ZERO) += v.conj() * amp;
            }
        }
        out.retain(|_, a| a.norm() > 1e-15);
        MixedState {
            num_qubits: self.num_qubits,
            amplitudes: out,
        }
    }

    fn distance(&self, other: &MixedState) -> f64 {
        let keys: std::collections::BTreeSet<&u64> = self.amplitudes.keys().chain(other.amplitudes.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let a = self.amplitudes.get(k).copied().unwrap_or(ZERO);
                let b = other.amplitudes.get(k).copied().unwrap_or(ZERO);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The action of one term on a mixed-basis state: `|b⟩ ↦ c|b'⟩`, or `None` when annihilated.
#[derive(Clone, Debug)]
enum Monomial {
    Plaquette(usize),
    Vertex(usize),
}

struct MonomialModel<'a> {
    lat: &'a SetLattice,
    coupling: Coupling,
    terms: Vec<Monomial>,
    n: usize,
}

impl<'a> MonomialModel<'a> {
    fn new(lat: &'a SetLattice, coupling: Coupling) -> Self {
        let mut terms: Vec<Monomial> = (0..lat.base.num_faces()).map(Monomial::Plaquette).collect();
        terms.extend(lat.term_vertices().into_iter().map(Monomial::Vertex));
        MonomialModel {
            lat,
            coupling,
            terms,
            n: lat.num_qubits(),
        }
    }

    fn bit(&self, q: usize) -> u64 {
        1u64 << (self.n - 1 - q)
    }

    fn value(&self, b: u64, q: usize) -> i32 {
        if b & self.bit(q) == 0 {
            1
        } else {
            -1
        }
    }

    fn star_even(&self, b: u64, v: usize) -> bool {
        self.lat.base.star_edges(v).into_iter().filter(|&e| b & self.bit(e) != 0).count() % 2 == 0
    }

    /// Basis states with `A_v = +1` at every term vertex.
    fn in_sector(&self, b: u64) -> bool {
        self.lat.term_vertices().into_iter().all(|v| self.star_even(b, v))
    }

    fn act(&self, term: &Monomial, b: u64) -> Option<(u64, C64)> {
        let ne = self.lat.num_edges();
        match *term {
            Monomial::Plaquette(f) => {
                let flipped = self.lat.base.face_edges(f).into_iter().fold(b, |acc, e| acc ^ self.bit(e));
                let phase = match self.coupling {
                    Coupling::Decoupled => ONE,
                    Coupling::Enriched => quarter_turn(-self.lat.plaquette_exponent2(
                        f,
                        |e| self.value(flipped, e),
                        |w| self.value(flipped, ne + w),
                    )),
                };
                Some((flipped, phase))
            }
            Monomial::Vertex(v) => {
                let phase = match self.coupling {
                    Coupling::Decoupled => ONE,
                    Coupling::Enriched => quarter_turn(-self.lat.vertex_exponent2(
                        v,
                        |e| self.value(b, e),
                        |w| self.value(b, ne + w),
                    )),
                };
                let flipped = b ^ self.bit(ne + v);
                self.star_even(flipped, v).then_some((flipped, phase))
            }
        }
    }

    /// The joint `+1` eigenvector supported on the orbit of `b0`, if the orbit admits one.
    fn orbit_vector(&self, b0: u64, visited: &mut HashMap<u64, C64>) -> Option<Vec<u64>> {
        let mut members = vec![b0];
        let mut queue = VecDeque::from([b0]);
        visited.insert(b0, ONE);
        let mut consistent = true;
        while let Some(b) = queue.pop_front() {
            let amp = visited[&b];
            for t in &self.terms {
                // T ψ = ψ requires ψ(b') = c ψ(b)
                let Some((next, c)) = self.act(t, b) else {
                    consistent = false;
                    continue;
                };
                let want = c * amp;
                match visited.get(&next) {
                    Some(&have) => consistent &= (have - want).norm() < 1e-9,
                    None => {
                        visited.insert(next, want);
                        members.push(next);
                        queue.push_back(next);
                    }
                }
            }
        }
        consistent.then_some(members)
    }
}

/// Dimension of the joint `+1` eigenspace of all terms, by exhaustive orbit counting.
pub fn joint_eigenspace_dim(lat: &SetLattice, coupling: Coupling) -> Result<u64> {
    let n = lat.num_qubits();
    if n > SET_DENSE_QUBITS {
        return Err(Error::CapExceeded {
            what: "qubits for orbit counting",
            requested: n,
            cap: SET_DENSE_QUBITS,
        });
    }
    let model = MonomialModel::new(lat, coupling);
    let mut seen = vec![false; 1 << n];
    let mut count = 0;
    let mut phases = HashMap::new();
    for b in 0..1u64 << n {
        if seen[b as usize] || !model.in_sector(b) {
            continue;
        }
        phases.clear();
        let ok = model.orbit_vector(b, &mut phases).is_some();
        for &m in phases.keys() {
            seen[m as usize] = true;
        }
        count += u64::from(ok);
    }
    Ok(count)
}

/// A joint `+1` eigenvector, built by projecting the mixed-basis reference
/// state `|+⟩^E ⊗ |0⟩^V` (or, if that is annihilated, the next basis state of
/// the `A_v = +1` sector) with every `(𝕀 + B̃_f)/2` and `(Q̃_v² + Q̃_v)/2`.
pub fn set_ground_state(lat: &SetLattice, coupling: Coupling) -> Result<MixedState> {
    let model = MonomialModel::new(lat, coupling);
    let n = lat.num_qubits();
    let candidates = (0..1u64 << n.min(63)).filter(|&b| model.in_sector(b)).take(REFERENCE_ATTEMPTS);
    for b0 in candidates {
        let mut state = MixedState {
            num_qubits: n,
            amplitudes: BTreeMap::from([(b0, ONE)]),
        };
        for t in &model.terms {
            let apply = |s: &MixedState| {
                let mut out: BTreeMap<u64, C64> = BTreeMap::new();
                for (&b, &a) in &s.amplitudes {
                    if let Some((next, c)) = model.act(t, b) {
                        *out.entry(next).or_insert(ZERO) += c * a;
                    }
                }
                MixedState {
                    num_qubits: n,
                    amplitudes: out,
                }
            };
            let once = apply(&state);
            let projected = match t {
                Monomial::Plaquette(_) => half_sum(&state, &once),
                Monomial::Vertex(_) => half_sum(&once, &apply(&once)),
            };
            state = projected;
        }
        let norm = state.norm();
        if norm > 1e-9 {
            for a in state.amplitudes.values_mut() {
                *a /= norm;
            }
            return Ok(state);
        }
    }
    Err(Error::CheckFailed(format!(
        "no joint +1 eigenvector found from {REFERENCE_ATTEMPTS} reference states"
    )))
}

/// `(a + b)/2`.
fn half_sum(a: &MixedState, b: &MixedState) -> MixedState {
    let mut out = a.amplitudes.clone();
    for (&k, &v) in &b.amplitudes {
        *out.entry(k).or_insert(ZERO) += v;
    }
    out.values_mut().for_each(|x| *x *= 0.5);
    out.retain(|_, x| x.norm() > 1e-15);
    MixedState {
        num_qubits: a.num_qubits,
        amplitudes: out,
    }
}

/// `⊗ H` on the edge qubits of `op`'s support, applied on both sides.
fn to_mixed_basis(lat: &SetLattice, op: &LocalOperator) -> Result<LocalOperator> {
    let sites = op.sites().to_vec();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ne = lat.num_edges();
    let mut h = SparseMatrix::identity(1);
    for &q in &sites {
        let local = if q < ne {
            SparseMatrix::from_triplets(
                2,
                vec![(0, 0, C64::new(s, 0.0)), (0, 1, C64::new(s, 0.0)), (1, 0, C64::new(s, 0.0)), (1, 1, C64::new(-s, 0.0))],
            )
        } else {
            SparseMatrix::identity(2)
        };
        h = h.kron(&local);
    }
    let h = LocalOperator::new(sites.clone(), vec![2; sites.len()], h)?;
    h.mul(op)?.mul(&h)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrustrationReport {
    /// `⟨ψ| Σ(𝕀 − B̃_f) + Σ(𝕀 − Q̃_v) |ψ⟩`.
    pub energy: f64,
    /// `max_T ‖Tψ − ψ‖`.
    pub residual: f64,
    pub dense: bool,
}

/// Evaluate the terms as local matrices on the state: densely in the
/// computational basis when small enough, otherwise sparsely in the mixed basis.
pub fn frustration(lat: &SetLattice, coupling: Coupling, state: &MixedState) -> Result<FrustrationReport> {
    let terms = set_terms(lat, coupling)?;
    let mut energy = 0.0;
    let mut residual: f64 = 0.0;
    let dense = lat.num_qubits() <= SET_DENSE_QUBITS;
    if dense {
        let psi = state.to_dense(lat.num_edges())?;
        for t in &terms {
            let image = t.op.apply(&psi.space, &psi.amplitudes)?;
            energy += 1.0 - crate::operator::inner(&psi.amplitudes, &image).re;
            let diff: f64 = image.iter().zip(&psi.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum();
            residual = residual.max(diff.sqrt());
        }
    } else {
        for t in &terms {
            let image = state.apply_local(&to_mixed_basis(lat, &t.op)?);
            let overlap: C64 = image
                .amplitudes
                .iter()
                .map(|(k, a)| state.amplitudes.get(k).copied().unwrap_or(ZERO).conj() * a)
                .sum();
            energy += 1.0 - overlap.re;
            residual = residual.max(image.distance(state));
        }
    }
    Ok(FrustrationReport { energy, residual, dense })
}

#[derive(Clone, Debug, Serialize)]
pub struct SetReport {
    pub lattice: String,
    pub coupling: Coupling,
    pub num_qubits: usize,
    pub plaquette_terms: usize,
    pub vertex_terms: Vec<usize>,
    /// Vertices with incomplete stars, which carry no `Q̃_v`.
    pub omitted_vertices: Vec<usize>,
    /// How many of those would break the `ℤ₂` symmetry if included.
    pub omitted_symmetry_violations: usize,
    pub spectra: Vec<TermSpectrum>,
    pub eigenspace_dim: Option<u64>,
    pub ground_state_support: usize,
    pub frustration: FrustrationReport,
}

/// Commutation, symmetry, decoupled limit and a frustration-free state.
pub fn set_check(lat: &SetLattice, coupling: Coupling, tag: &str) -> Result<(Vec<Check>, SetReport)> {
    let start = Instant::now();
    let mut checks = vec![
        commutation_check(lat, coupling, tag)?,
        symmetry_check(lat, coupling, tag)?,
        decoupled_limit_check(lat, tag)?,
    ];
    let spectra = term_spectra(lat, coupling)?;
    checks.push(
        Check::within(
            format!("set_terms_hermitian[{tag}]"),
            max_error(spectra.iter().map(|s| s.hermiticity_error)),
            1e-12,
        )
        .since(start),
    );
    let omitted = lat.boundary_vertices();
    let mut omitted_violations = 0;
    for &v in &omitted {
        if symmetry_error(lat, &modified_vertex(lat, v, coupling)?)? > 0.0 {
            omitted_violations += 1;
        }
    }
    let gs_start = Instant::now();
    let eigenspace_dim = match joint_eigenspace_dim(lat, coupling) {
        Ok(d) => Some(d),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let (frustration, support) = match set_ground_state(lat, coupling) {
        Ok(state) => (frustration(lat, coupling, &state)?, state.amplitudes.len()),
        Err(Error::CheckFailed(msg)) => {
            checks.push(Check::holds(format!("set_frustration_free[{tag}]"), false).with_detail(msg));
            (
                FrustrationReport {
                    energy: f64::NAN,
                    residual: f64::NAN,
                    dense: false,
                },
                0,
            )
        }
        Err(e) => return Err(e),
    };
    if support > 0 {
        checks.push(
            Check::within(format!("set_frustration_free[{tag}]"), frustration.energy.abs().max(frustration.residual), 1e-10)
                .with_detail(format!(
                    "energy {:e}, largest |T psi - psi| {:e}, {} mixed-basis amplitudes",
                    frustration.energy, frustration.residual, support
                ))
                .since(gs_start),
        );
    }
    if let Some(d) = eigenspace_dim {
        checks.push(
            Check::holds(format!("set_eigenspace_nonempty[{tag}]"), d > 0)
                .with_detail(format!("joint +1 eigenspace dimension {d}"))
                .since(gs_start),
        );
    }
    let boundary = match lat.base.boundary() {
        Boundary::Torus => "torus",
        Boundary::Open => "open",
    };
    let report = SetReport {
        lattice: format!("{boundary} {}x{}", lat.base.lx(), lat.base.ly()),
        coupling,
        num_qubits: lat.num_qubits(),
        plaquette_terms: lat.base.num_faces(),
        vertex_terms: lat.term_vertices(),
        omitted_vertices: omitted,
        omitted_symmetry_violations: omitted_violations,
        spectra,
        eigenspace_dim,
        ground_state_support: support,
        frustration,
    };
    Ok((checks, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{reduced_density_matrix, von_neumann_entropy};
    use crate::group::FiniteGroup;
    use crate::qd::ground_state;

    fn open(lx: usize, ly: usize) -> SetLattice {
        SetLattice::new(LatticeSpec::open(lx, ly).unwrap()).unwrap()
    }

    #[test]
    fn orientation_signs() {
        let lat = open(2, 2);
        for e in 0..lat.num_edges() {
            let edge = lat.base().edge(e);
            assert_eq!(lat.f_sign(e, edge.tail), 1);
            assert_eq!(lat.f_sign(e, edge.head), -1);
            let (tx, ty) = lat.base().vertex_coords(edge.tail);
            let (hx, hy) = lat.base().vertex_coords(edge.head);
            assert!((hx == tx + 1 && hy == ty) || (hx == tx && hy == ty + 1));
        }
        assert_eq!(lat.term_vertices(), vec![4]);
    }

    #[test]
    fn quarter_turns() {
        for k in -9..9 {
            let expected = C64::from_polar(1.0, -std::f64::consts::PI * k as f64 / 4.0);
            assert!((quarter_turn(k) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn plaquette_reduces_to_toric_code_on_aligned_vertices() {
        // with every τ^z = +1 the exponent vanishes
        let lat = open(2, 2);
        let bt = modified_plaquette(&lat, 0, Coupling::Enriched).unwrap();
        let b = plaquette_z(&lat, 0).unwrap().extend(bt.sites(), &vec![2; bt.sites().len()]).unwrap();
        let m = bt.matrix();
        let ne = lat.num_edges();
        let vertex_bits: Vec<usize> = (0..bt.sites().len()).filter(|&k| bt.sites()[k] >= ne).collect();
        let nsites = bt.sites().len();
        for c in 0..m.dim() {
            if vertex_bits.iter().any(|&k| (c >> (nsites - 1 - k)) & 1 == 1) {
                continue;
            }
            for r in 0..m.dim() {
                assert_eq!(m.get(r, c), b.matrix().get(r, c));
            }
        }
    }

    #[test]
    fn vertex_term_vanishes_on_violated_stars() {
        let lat = open(2, 2);
        let q = modified_vertex(&lat, 4, Coupling::Enriched).unwrap();
        let p = star_projector(&lat, 4).unwrap();
        let minus = LocalOperator::identity(p.sites().to_vec(), vec![2; 4]).unwrap().sub(&p).unwrap();
        assert!(q.mul(&minus).unwrap().matrix().max_abs() < 1e-15);
        assert!(minus.mul(&q).unwrap().matrix().max_abs() < 1e-15);
    }

    #[test]
    fn terms_commute_and_are_symmetric() {
        for lat in [open(2, 2), open(3, 2), SetLattice::new(LatticeSpec::torus(2, 2).unwrap()).unwrap()] {
            for coupling in [Coupling::Enriched, Coupling::Decoupled] {
                assert!(commutation_check(&lat, coupling, "t").unwrap().passed());
                assert!(symmetry_check(&lat, coupling, "t").unwrap().passed());
            }
            assert!(decoupled_limit_check(&lat, "t").unwrap().passed());
        }
    }

    #[test]
    fn spectra_are_reported() {
        let spectra = term_spectra(&open(2, 2), Coupling::Enriched).unwrap();
        assert_eq!(spectra[0].eigenvalues, vec![-1.0, 1.0]);
        assert_eq!(spectra[0].squared_eigenvalues, vec![1.0]);
        assert_eq!(spectra[1].eigenvalues, vec![-1.0, 0.0, 1.0]);
        assert!(spectra.iter().all(|s| s.hermiticity_error < 1e-15));
    }

    #[test]
    fn monomial_form_matches_the_local_matrices() {
        let lat = open(2, 2);
        let model = MonomialModel::new(&lat, Coupling::Enriched);
        let terms = set_terms(&lat, Coupling::Enriched).unwrap();
        for (t, m) in terms.iter().zip(&model.terms) {
            let rotated = to_mixed_basis(&lat, &t.op).unwrap();
            for b in [0u64, 0b1_0110_1101_0010_1101, 0x1F0F0, 0x0ABCD] {
                let b = b & ((1 << lat.num_qubits()) - 1);
                let state = MixedState {
                    num_qubits: lat.num_qubits(),
                    amplitudes: BTreeMap::from([(b, ONE)]),
                };
                let image = state.apply_local(&rotated);
                let expected = MixedState {
                    num_qubits: lat.num_qubits(),
                    amplitudes: model.act(m, b).map(|(k, c)| BTreeMap::from([(k, c)])).unwrap_or_default(),
                };
                assert!(image.distance(&expected) < 1e-12, "{} on {b:b}", t.label);
            }
        }
    }

    #[test]
    fn frustration_free_states() {
        for lat in [open(2, 2), open(3, 2), SetLattice::new(LatticeSpec::torus(2, 2).unwrap()).unwrap()] {
            let state = set_ground_state(&lat, Coupling::Enriched).unwrap();
            let r = frustration(&lat, Coupling::Enriched, &state).unwrap();
            assert!(r.energy.abs() < 1e-10 && r.residual < 1e-10, "{r:?}");
        }
    }

    /// Uniform over edge configurations with even parity on every face,
    /// `|+⟩` on term vertices and `|0⟩` on the other vertex qubits.
    fn decoupled_oracle(lat: &SetLattice) -> Vec<C64> {
        let (ne, nv) = (lat.num_edges(), lat.num_vertices());
        let terms = lat.term_vertices();
        let mut amps = vec![ZERO; 1 << (ne + nv)];
        for ze in 0..1usize << ne {
            let bit = |e: usize| (ze >> (ne - 1 - e)) & 1;
            if (0..lat.base().num_faces()).any(|f| lat.base().face_edges(f).iter().map(|&e| bit(e)).sum::<usize>() % 2 == 1) {
                continue;
            }
            for zv in 0..1usize << nv {
                let free = (0..nv).all(|v| terms.contains(&v) || (zv >> (nv - 1 - v)) & 1 == 0);
                if free {
                    amps[(ze << nv) | zv] = ONE;
                }
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter().map(|a| a / norm).collect()
    }

    #[test]
    fn decoupled_state_is_toric_code_times_symmetric_product() {
        for lat in [open(2, 2), SetLattice::new(LatticeSpec::torus(2, 2).unwrap()).unwrap()] {
            let psi = set_ground_state(&lat, Coupling::Decoupled).unwrap().to_dense(lat.num_edges()).unwrap();
            let oracle = decoupled_oracle(&lat);
            let overlap: C64 = oracle.iter().zip(&psi.amplitudes).map(|(o, a)| o.conj() * a).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-10, "{overlap}");
            // the vertex layer is an unentangled product state
            for v in 0..lat.num_vertices() {
                let rho = reduced_density_matrix(&psi, &[lat.vertex_qubit(v)], 4).unwrap();
                assert!(von_neumann_entropy(&rho) < 1e-10);
            }
        }
        // on the open patch the edge layer is the unique toric code ground state
        let lat = open(2, 2);
        let tc = ground_state(lat.base(), &FiniteGroup::cyclic(2), 1 << 20).unwrap();
        let oracle = decoupled_oracle(&lat);
        let nv = lat.num_vertices();
        let mut edge_part = vec![ZERO; tc.amplitudes.len()];
        for (i, a) in oracle.iter().enumerate() {
            edge_part[i >> nv] += a.norm_sqr();
        }
        let fidelity: f64 = edge_part.iter().zip(&tc.amplitudes).map(|(p, t)| (p.re * t.norm_sqr()).sqrt()).sum();
        assert!((fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigenspace_dimensions() {
        // decoupled torus: four toric code sectors times the unique τ^x = +1 state
        let torus = SetLattice::new(LatticeSpec::torus(2, 2).unwrap()).unwrap();
        assert_eq!(joint_eigenspace_dim(&torus, Coupling::Decoupled).unwrap(), 4);
        let d = joint_eigenspace_dim(&torus, Coupling::Enriched).unwrap();
        assert!(d >= 1);
        assert!(joint_eigenspace_dim(&open(2, 2), Coupling::Enriched).unwrap() >= 1);
        assert!(joint_eigenspace_dim(&open(3, 2), Coupling::Enriched).is_err());
    }
}
