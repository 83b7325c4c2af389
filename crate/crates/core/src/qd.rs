//! Quantum double models on directed square lattices.
//!
//! One `|G|`-dimensional site sits on every edge, with basis `|g⟩` labelled by
//! group elements. Conventions:
//!
//! * `A_v(j)` multiplies edges pointing out of `v` by `j` from the left and
//!   edges pointing into `v` by `j⁻¹` from the right.
//! * `B_p` projects onto trivial holonomy `z_bottom · z_right · z_top⁻¹ · z_left⁻¹`,
//!   walking counterclockwise from the lower-left vertex of `p`.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::group::{direct_product, FiniteGroup, ProductGroup};
use crate::lattice::LatticeSpec;
use crate::operator::{HilbertSpace, LocalOperator, SparseMatrix, StateVector, C64, ONE};
use crate::report::{max_error, Check};

/// Largest Hilbert dimension for which [`Hamiltonian::to_sparse`] materializes a matrix.
pub const MATERIALIZE_CAP: usize = 65_536;

/// Default largest local dimension of a pair of terms compared in commutation checks.
pub const PAIR_CHECK_CAP: usize = 50_000;

pub fn edge_space(lat: &LatticeSpec, g: &FiniteGroup, max_dim: usize) -> Result<HilbertSpace> {
    HilbertSpace::uniform(lat.num_edges(), g.order(), max_dim)
}

fn check_vertex(lat: &LatticeSpec, v: usize) -> Result<()> {
    if v >= lat.num_vertices() {
        return input(format!("vertex {v} out of range"));
    }
    Ok(())
}

pub fn vertex_unitary(lat: &LatticeSpec, g: &FiniteGroup, v: usize, j: usize) -> Result<LocalOperator> {
    check_vertex(lat, v)?;
    if j >= g.order() {
        return input(format!("element {j} out of range"));
    }
    let star = lat.star(v).to_vec();
    let sites = star.iter().map(|s| s.edge).collect();
    let jinv = g.inv(j);
    LocalOperator::from_columns(sites, vec![g.order(); star.len()], |d| {
        let image = star
            .iter()
            .zip(d)
            .map(|(s, &z)| if s.outgoing { g.mul(j, z) } else { g.mul(z, jinv) })
            .collect();
        vec![(image, ONE)]
    })
}

/// `A_v = (1/|G|) Σ_j A_v(j)`.
pub fn vertex_projector(lat: &LatticeSpec, g: &FiniteGroup, v: usize) -> Result<LocalOperator> {
    check_vertex(lat, v)?;
    let star = lat.star(v).to_vec();
    let sites = star.iter().map(|s| s.edge).collect();
    let w = C64::new(1.0 / g.order() as f64, 0.0);
    LocalOperator::from_columns(sites, vec![g.order(); star.len()], |d| {
        g.elements()
            .map(|j| {
                let jinv = g.inv(j);
                let image = star
                    .iter()
                    .zip(d)
                    .map(|(s, &z)| if s.outgoing { g.mul(j, z) } else { g.mul(z, jinv) })
                    .collect();
                (image, w)
            })
            .collect()
    })
}

/// Oriented product of the edge values around face `p`, given site digits in sorted-edge order.
pub fn holonomy(lat: &LatticeSpec, g: &FiniteGroup, p: usize, sites: &[usize], digits: &[usize]) -> usize {
    lat.face(p).iter().fold(g.identity(), |acc, fe| {
        let k = sites.binary_search(&fe.edge).expect("face edge in support");
        let z = if fe.forward { digits[k] } else { g.inv(digits[k]) };
        g.mul(acc, z)
    })
}

pub fn plaquette_projector(lat: &LatticeSpec, g: &FiniteGroup, p: usize) -> Result<LocalOperator> {
    if p >= lat.num_faces() {
        return input(format!("face {p} out of range"));
    }
    let sites = lat.face_edges(p);
    let dims = vec![g.order(); sites.len()];
    LocalOperator::diagonal(sites.clone(), dims, |d| {
        if holonomy(lat, g, p, &sites, d) == g.identity() {
            ONE
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `H = Σ_t (𝕀 − T_t)` for commuting projectors `T_t`, applied matrix-free.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub space: HilbertSpace,
    pub terms: Vec<LocalOperator>,
}

impl Hamiltonian {
    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let mut out: Vec<C64> = psi.iter().map(|a| a * self.terms.len() as f64).collect();
        for t in &self.terms {
            let tp = t.apply(&self.space, psi)?;
            out.iter_mut().zip(tp).for_each(|(o, x)| *o -= x);
        }
        Ok(out)
    }

    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        let h = self.apply(&state.amplitudes)?;
        Ok(crate::operator::inner(&state.amplitudes, &h).re)
    }

    /// The full matrix; refused above [`MATERIALIZE_CAP`].
    pub fn to_sparse(&self) -> Result<SparseMatrix> {
        let dim = self.space.dim();
        if dim > MATERIALIZE_CAP {
            return Err(Error::CapExceeded {
                what: "materialized Hamiltonian dimension",
                requested: dim,
                cap: MATERIALIZE_CAP,
            });
        }
        let all: Vec<usize> = (0..self.space.num_sites()).collect();
        let mut h = SparseMatrix::identity(dim).scale(C64::new(self.terms.len() as f64, 0.0));
        for t in &self.terms {
            h = h.sub(t.extend(&all, self.space.dims())?.matrix());
        }
        Ok(h)
    }

    /// Eigenvalues of the materialized Hamiltonian in ascending order (dense, so small systems only).
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        if self.space.dim() > 4096 {
            return Err(Error::CapExceeded {
                what: "dense diagonalization dimension",
                requested: self.space.dim(),
                cap: 4096,
            });
        }
        let dense: DMatrix<C64> = self.to_sparse()?.to_dense();
        let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        Ok(eig)
    }
}

/// Vertex projectors followed by plaquette projectors.
pub fn local_terms(lat: &LatticeSpec, g: &FiniteGroup) -> Result<Vec<LocalOperator>> {
    let mut terms = Vec::with_capacity(lat.num_vertices() + lat.num_faces());
    for v in 0..lat.num_vertices() {
        terms.push(vertex_projector(lat, g, v)?);
    }
    for p in 0..lat.num_faces() {
        terms.push(plaquette_projector(lat, g, p)?);
    }
    Ok(terms)
}

pub fn hamiltonian(lat: &LatticeSpec, g: &FiniteGroup, max_dim: usize) -> Result<Hamiltonian> {
    Ok(Hamiltonian {
        space: edge_space(lat, g, max_dim)?,
        terms: local_terms(lat, g)?,
    })
}

/// `Π_v A_v |e…e⟩`, normalized.
pub fn ground_state(lat: &LatticeSpec, g: &FiniteGroup, max_dim: usize) -> Result<StateVector> {
    let space = edge_space(lat, g, max_dim)?;
    let mut state = StateVector::basis(space, 0);
    for v in 0..lat.num_vertices() {
        state = state.apply(&vertex_projector(lat, g, v)?)?;
    }
    state
        .normalize()
        .map_err(|_| Error::Numerical("vertex projection annihilated the reference state".into()))?;
    Ok(state)
}

/// `⟨A_v⟩ = ⟨B_p⟩ = 1` and `H|Ω⟩ = 0`.
pub fn frustration_check(lat: &LatticeSpec, g: &FiniteGroup, state: &StateVector, tag: &str) -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut vertex_err = Vec::new();
    for v in 0..lat.num_vertices() {
        vertex_err.push((vertex_projector(lat, g, v)?.expectation(state)? - ONE).norm());
    }
    let mut face_err = Vec::new();
    for p in 0..lat.num_faces() {
        face_err.push((plaquette_projector(lat, g, p)?.expectation(state)? - ONE).norm());
    }
    let h = Hamiltonian {
        space: state.space.clone(),
        terms: local_terms(lat, g)?,
    };
    let residual = crate::operator::norm(&h.apply(&state.amplitudes)?);
    Ok(vec![
        Check::within(format!("vertex_expectation[{tag}]"), max_error(vertex_err), 1e-10).since(start),
        Check::within(format!("plaquette_expectation[{tag}]"), max_error(face_err), 1e-10).since(start),
        Check::within(format!("hamiltonian_annihilates[{tag}]"), residual, 1e-9).since(start),
    ])
}

/// Hermitian idempotent terms, and pairwise commutation of terms with
/// overlapping supports whose joint local dimension is at most `pair_cap`.
pub fn commutation_check(lat: &LatticeSpec, g: &FiniteGroup, pair_cap: usize, tag: &str) -> Result<Vec<Check>> {
    let start = Instant::now();
    let terms = local_terms(lat, g)?;
    let herm = max_error(terms.iter().map(LocalOperator::hermiticity_error));
    let idem = max_error(terms.iter().map(LocalOperator::idempotency_error));
    let mut worst: f64 = 0.0;
    let (mut compared, mut skipped) = (0usize, 0usize);
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i + 1..] {
            if !a.supports_overlap(b) {
                continue;
            }
            let mut union: Vec<usize> = a.sites().iter().chain(b.sites()).copied().collect();
            union.sort_unstable();
            union.dedup();
            let dim = (g.order() as f64).powi(union.len() as i32);
            if dim > pair_cap as f64 {
                skipped += 1;
                continue;
            }
            worst = worst.max(a.commutator(b)?.matrix().max_abs());
            compared += 1;
        }
    }
    Ok(vec![
        Check::within(format!("terms_hermitian[{tag}]"), herm, 1e-12).since(start),
        Check::within(format!("terms_idempotent[{tag}]"), idem, 1e-12).since(start),
        Check::within(format!("terms_commute[{tag}]"), worst, 1e-12)
            .with_detail(format!("{compared} overlapping pairs compared, {skipped} above the size cap"))
            .since(start),
    ])
}

/// `A^v_{G×H} = P(A^v_G ⊗ A^v_H)P⁻¹` and likewise for `B^p` and every `A_v(j × k)`,
/// where `P` interleaves the two layers edge by edge.
pub fn stack_operator_check(g: &FiniteGroup, h: &FiniteGroup, lat: &LatticeSpec, cap: usize) -> Result<Vec<Check>> {
    let start = Instant::now();
    let k = direct_product(g, h, cap)?;
    let tag = format!("{}x{}", g.name(), h.name());
    let mut vertex_err: f64 = 0.0;
    let mut unitary_err: f64 = 0.0;
    for v in 0..lat.num_vertices() {
        let stacked = LocalOperator::stack(&vertex_projector(lat, g, v)?, &vertex_projector(lat, h, v)?)?;
        vertex_err = vertex_err.max(vertex_projector(lat, &k.group, v)?.max_abs_diff(&stacked)?);
        for a in g.elements() {
            for b in h.elements() {
                let stacked = LocalOperator::stack(&vertex_unitary(lat, g, v, a)?, &vertex_unitary(lat, h, v, b)?)?;
                let direct = vertex_unitary(lat, &k.group, v, k.pair_index(a, b))?;
                unitary_err = unitary_err.max(direct.max_abs_diff(&stacked)?);
            }
        }
    }
    let mut face_err: f64 = 0.0;
    for p in 0..lat.num_faces() {
        let stacked = LocalOperator::stack(&plaquette_projector(lat, g, p)?, &plaquette_projector(lat, h, p)?)?;
        face_err = face_err.max(plaquette_projector(lat, &k.group, p)?.max_abs_diff(&stacked)?);
    }
    // the projectors carry 1/|K| versus (1/|G|)(1/|H|), equal up to one rounding
    Ok(vec![
        Check::within(format!("vertex_projector_stack[{tag}]"), vertex_err, 1e-15).since(start),
        Check::within(format!("vertex_unitary_stack[{tag}]"), unitary_err, 0.0).since(start),
        Check::within(format!("plaquette_projector_stack[{tag}]"), face_err, 0.0).since(start),
    ])
}

/// A random complex matrix on a few edges, used as a local observable.
fn random_observable(rng: &mut ChaCha8Rng, sites: &[usize], d: usize) -> Result<LocalOperator> {
    let dim = d.pow(sites.len() as u32);
    let mut triplets = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            triplets.push((r, c, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
        }
    }
    LocalOperator::new(sites.to_vec(), vec![d; sites.len()], SparseMatrix::from_triplets(dim, triplets))
}

#[derive(Clone, Debug)]
pub struct StackedStates {
    pub product: ProductGroup,
    pub left: StateVector,
    pub right: StateVector,
    pub direct: StateVector,
}

/// `|⟨Ω_{G×H}|P(Ω_G ⊗ Ω_H)⟩| = 1` and `ω_K(a ⊗ₛ b) = ω_G(a) ω_H(b)` on random local observables.
pub fn ground_state_stack_check(
    g: &FiniteGroup,
    h: &FiniteGroup,
    lat: &LatticeSpec,
    max_dim: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let start = Instant::now();
    let k = direct_product(g, h, usize::MAX)?;
    let tag = format!("{}x{}", g.name(), h.name());
    let left = ground_state(lat, g, max_dim)?;
    let right = ground_state(lat, h, max_dim)?;
    let direct = ground_state(lat, &k.group, max_dim)?;
    let stacked = StateVector::stack(&left, &right, max_dim)?;
    let overlap = direct.inner(&stacked).norm();
    let mut checks = vec![Check::within(format!("ground_state_overlap[{tag}]"), 1.0 - overlap, 1e-9)
        .with_detail(format!("|overlap| = {overlap:.15}"))
        .since(start)];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let first = rng.random_range(0..lat.num_edges());
        let mut sites = vec![first];
        if rng.random_bool(0.5) {
            let second = rng.random_range(0..lat.num_edges());
            if second != first {
                sites.push(second);
                sites.sort_unstable();
            }
        }
        let a = random_observable(&mut rng, &sites, g.order())?;
        let b = random_observable(&mut rng, &sites, h.order())?;
        let lhs = LocalOperator::stack(&a, &b)?.expectation(&direct)?;
        let rhs = a.expectation(&left)? * b.expectation(&right)?;
        worst = worst.max((lhs - rhs).norm());
    }
    checks.push(
        Check::within(format!("expectation_factorization[{tag}]"), worst, 1e-9)
            .with_detail(format!("{samples} random observables on one or two edges"))
            .since(start),
    );
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec, DEFAULT_GROUP_CAP};
    use crate::operator::DEFAULT_MAX_DIM;

    fn group(name: &str) -> FiniteGroup {
        build_group(&GroupSpec::named(name), DEFAULT_GROUP_CAP).unwrap()
    }

    fn pauli_string(sites: Vec<usize>, flip: bool) -> LocalOperator {
        let n = sites.len();
        if flip {
            LocalOperator::from_columns(sites, vec![2; n], |d| vec![(d.iter().map(|x| 1 - x).collect(), ONE)]).unwrap()
        } else {
            LocalOperator::diagonal(sites, vec![2; n], |d| {
                if d.iter().sum::<usize>() % 2 == 0 {
                    ONE
                } else {
                    -ONE
                }
            })
            .unwrap()
        }
    }

    #[test]
    fn z2_terms_are_toric_code_terms() {
        let lat = LatticeSpec::torus(3, 3).unwrap();
        let z2 = group("Z2");
        for v in 0..lat.num_vertices() {
            let x = pauli_string(lat.star_edges(v), true);
            assert_eq!(vertex_unitary(&lat, &z2, v, 1).unwrap().max_abs_diff(&x).unwrap(), 0.0);
            let id = LocalOperator::identity(lat.star_edges(v), vec![2; 4]).unwrap();
            let expected = id.add(&x).unwrap().scale(C64::new(0.5, 0.0));
            assert!(vertex_projector(&lat, &z2, v).unwrap().max_abs_diff(&expected).unwrap() < 1e-15);
        }
        for p in 0..lat.num_faces() {
            let z = pauli_string(lat.face_edges(p), false);
            let id = LocalOperator::identity(lat.face_edges(p), vec![2; 4]).unwrap();
            let expected = id.add(&z).unwrap().scale(C64::new(0.5, 0.0));
            assert_eq!(plaquette_projector(&lat, &z2, p).unwrap().max_abs_diff(&expected).unwrap(), 0.0);
        }
    }

    #[test]
    fn vertex_unitaries_represent_the_group() {
        let lat = LatticeSpec::torus(2, 2).unwrap();
        let s3 = group("S3");
        let v = 1;
        for j in s3.elements() {
            for k in s3.elements() {
                let prod = vertex_unitary(&lat, &s3, v, j).unwrap().mul(&vertex_unitary(&lat, &s3, v, k).unwrap()).unwrap();
                let direct = vertex_unitary(&lat, &s3, v, s3.mul(j, k)).unwrap();
                assert_eq!(prod.max_abs_diff(&direct).unwrap(), 0.0);
            }
        }
        let id = vertex_unitary(&lat, &s3, v, 0).unwrap();
        assert_eq!(id.max_abs_diff(&LocalOperator::identity(lat.star_edges(v), vec![6; 4]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn single_flipped_edge_breaks_flatness() {
        let lat = LatticeSpec::torus(2, 2).unwrap();
        let z2 = group("Z2");
        let b = plaquette_projector(&lat, &z2, 0).unwrap();
        let sites = b.sites().to_vec();
        for k in 0..4 {
            let mut d = [0; 4];
            d[k] = 1;
            let idx = d.iter().fold(0, |acc, x| acc * 2 + x);
            assert_eq!(b.matrix().get(idx, idx), C64::new(0.0, 0.0), "{sites:?}");
        }
        assert_eq!(b.matrix().get(0, 0), ONE);
    }

    #[test]
    fn toric_code_ground_space_is_fourfold() {
        let lat = LatticeSpec::torus(2, 2).unwrap();
        let h = hamiltonian(&lat, &group("Z2"), DEFAULT_MAX_DIM).unwrap();
        assert_eq!(h.space.dim(), 256);
        let eig = h.spectrum().unwrap();
        assert!(eig[0].abs() < 1e-10);
        assert_eq!(eig.iter().filter(|e| e.abs() < 1e-9).count(), 4);
        let trivial = hamiltonian(&lat, &group("trivial"), DEFAULT_MAX_DIM).unwrap();
        assert!(trivial.to_sparse().unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn z2_ground_state_is_uniform_over_closed_loops() {
        // oracle: enumerate all 2^8 configurations, keep those with trivial
        // holonomy on every face and in the same homology class as the empty one
        let lat = LatticeSpec::torus(2, 2).unwrap();
        let z2 = group("Z2");
        let psi = ground_state(&lat, &z2, DEFAULT_MAX_DIM).unwrap();
        let space = &psi.space;
        let mut support = 0;
        for i in 0..256 {
            let digits: Vec<usize> = (0..8).map(|s| space.digit(i, s)).collect();
            let flat = (0..lat.num_faces()).all(|p| {
                lat.face(p).iter().map(|fe| digits[fe.edge]).sum::<usize>() % 2 == 0
            });
            // Z-loop parities along the row h(0,0), h(1,0) and the column v(0,0), v(0,1)
            let wx = (digits[0] + digits[1]).is_multiple_of(2);
            let wy = (digits[4] + digits[6]).is_multiple_of(2);
            let expected = flat && wx && wy;
            if expected {
                support += 1;
                assert!((psi.amplitudes[i].norm() - 8f64.sqrt().recip()).abs() < 1e-12);
            } else {
                assert!(psi.amplitudes[i].norm() < 1e-12, "{digits:?}");
            }
        }
        assert_eq!(support, 8);
    }

    #[test]
    fn frustration_free_small_lattices() {
        for (name, lx, ly) in [("Z2", 2, 2), ("Z3", 2, 2), ("Z2", 3, 2), ("trivial", 2, 2)] {
            let lat = LatticeSpec::torus(lx, ly).unwrap();
            let g = group(name);
            let psi = ground_state(&lat, &g, DEFAULT_MAX_DIM).unwrap();
            let checks = frustration_check(&lat, &g, &psi, name).unwrap();
            assert!(checks.iter().all(Check::passed), "{checks:?}");
        }
        let lat = LatticeSpec::open(2, 1).unwrap();
        let g = group("S3");
        let psi = ground_state(&lat, &g, DEFAULT_MAX_DIM).unwrap();
        assert!(frustration_check(&lat, &g, &psi, "open").unwrap().iter().all(Check::passed));
    }

    #[test]
    fn terms_commute() {
        let lat = LatticeSpec::torus(2, 2).unwrap();
        for name in ["Z2", "Z3", "S3"] {
            let checks = commutation_check(&lat, &group(name), PAIR_CHECK_CAP, name).unwrap();
            assert!(checks.iter().all(Check::passed), "{checks:?}");
        }
    }

    #[test]
    fn stacking_identities() {
        let lat = LatticeSpec::torus(2, 2).unwrap();
        for (a, b) in [("Z2", "Z2"), ("trivial", "S3"), ("Z2", "Z3")] {
            let checks = stack_operator_check(&group(a), &group(b), &lat, 100).unwrap();
            assert!(checks.iter().all(Check::passed), "{checks:?}");
        }
        let checks = ground_state_stack_check(&group("Z2"), &group("Z2"), &lat, DEFAULT_MAX_DIM, 20, 1).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
        let checks = ground_state_stack_check(&group("trivial"), &group("Z3"), &lat, DEFAULT_MAX_DIM, 20, 1).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
    }
}
