//! Reduced density matrices, entropies and entropic identities of lattice states.
//!
//! Entropies are in nats. A region is a set of edges; the order in which its
//! sites are listed is the Kronecker order of its reduced density matrix.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::lattice::{BoundaryConvention, LatticeSpec};
use crate::operator::{StateVector, C64};
use crate::report::Check;
use crate::stabilizer::StabilizerState;

/// Largest reduced density matrix built densely.
pub const DENSE_REGION_CAP: usize = 4096;

/// Eigenvalues below this are treated as zero in `λ log λ`.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    #[serde(default)]
    pub label: String,
    pub edges: Vec<usize>,
}

impl Region {
    pub fn new(label: impl Into<String>, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Region {
            label: label.into(),
            edges,
        }
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        disjoint(&self.edges, &other.edges)
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(
            format!("{}{}", self.label, other.label),
            self.edges.iter().chain(&other.edges).copied().collect(),
        )
    }
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Hermitian, positive semidefinite and of unit trace within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        let tr = (self.trace() - C64::new(1.0, 0.0)).norm();
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if herm > tol || tr > tol || min < -tol {
            return Err(Error::Numerical(format!(
                "not a density matrix: hermiticity {herm:e}, trace error {tr:e}, min eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// Partial trace of `|ψ⟩⟨ψ|` onto `sites`, in the listed order.
pub fn reduced_density_matrix(state: &StateVector, sites: &[usize], cap: usize) -> Result<DensityMatrix> {
    let space = &state.space;
    let n = space.num_sites();
    if sites.iter().any(|&s| s >= n) || union(sites, &[]).len() != sites.len() {
        return input("region has repeated or out-of-range sites");
    }
    let dim_a = sites
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(space.site_dim(s)))
        .filter(|&d| d <= cap)
        .ok_or(Error::CapExceeded {
            what: "reduced density matrix dimension (use the stabilizer path for larger regions)",
            requested: sites.iter().fold(1usize, |acc, &s| acc.saturating_mul(space.site_dim(s))),
            cap,
        })?;
    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let dim_b = space.dim() / dim_a;
    let mut m = DMatrix::<C64>::zeros(dim_a, dim_b);
    for (i, &amp) in state.amplitudes.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let a = sites.iter().fold(0, |acc, &s| acc * space.site_dim(s) + space.digit(i, s));
        let b = rest.iter().fold(0, |acc, &s| acc * space.site_dim(s) + space.digit(i, s));
        m[(a, b)] = amp;
    }
    Ok(DensityMatrix {
        matrix: &m * m.adjoint(),
    })
}

/// `−Σ λ ln λ` over eigenvalues above [`EIGEN_FLOOR`].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > EIGEN_FLOOR)
        .map(|l| -l * l.ln())
        .sum();
    s.max(0.0)
}

/// `Tr ρ (ln ρ − ln σ)`, with logarithms taken on the supports.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return input("relative entropy of matrices of different size");
    }
    let log_on_support = |m: &DMatrix<C64>| -> DMatrix<C64> {
        let e = SymmetricEigen::new(m.clone());
        let logs = e.eigenvalues.map(|l| if l > EIGEN_FLOOR { C64::new(l.ln(), 0.0) } else { C64::new(0.0, 0.0) });
        &e.eigenvectors * DMatrix::from_diagonal(&logs) * e.eigenvectors.adjoint()
    };
    let diff = log_on_support(&rho.matrix) - log_on_support(&sigma.matrix);
    Ok((&rho.matrix * diff).trace().re)
}

/// Anything that can report the entropy of a set of edges.
pub trait EntropySource {
    fn num_sites(&self) -> usize;
    fn entropy(&self, region: &[usize]) -> Result<f64>;
}

/// A dense pure state. Entropies use whichever of the region and its
/// complement has the smaller reduced density matrix.
pub struct DenseState<'a> {
    pub state: &'a StateVector,
    pub cap: usize,
}

impl DenseState<'_> {
    fn side_dim(&self, sites: &[usize]) -> f64 {
        sites.iter().map(|&s| self.state.space.site_dim(s) as f64).product()
    }
}

impl EntropySource for DenseState<'_> {
    fn num_sites(&self) -> usize {
        self.state.space.num_sites()
    }

    fn entropy(&self, region: &[usize]) -> Result<f64> {
        let region = union(region, &[]);
        let complement: Vec<usize> = (0..self.num_sites()).filter(|s| region.binary_search(s).is_err()).collect();
        let side = if self.side_dim(&complement) < self.side_dim(&region) { complement } else { region };
        Ok(von_neumann_entropy(&reduced_density_matrix(self.state, &side, self.cap)?))
    }
}

impl EntropySource for StabilizerState {
    fn num_sites(&self) -> usize {
        self.num_qubits()
    }

    fn entropy(&self, region: &[usize]) -> Result<f64> {
        StabilizerState::entropy(self, &union(region, &[]))
    }
}

/// `I(A:C) = S_A + S_C − S_AC` for disjoint regions.
pub fn mutual_information(src: &dyn EntropySource, a: &[usize], c: &[usize]) -> Result<f64> {
    if !disjoint(a, c) {
        return input("mutual information needs disjoint regions");
    }
    Ok(src.entropy(a)? + src.entropy(c)? - src.entropy(&union(a, c))?)
}

/// `I(A:C)` together with the relative entropy `S(ρ_AC ‖ ρ_A ⊗ ρ_C)` computed independently.
pub fn mutual_information_dense(state: &StateVector, a: &[usize], c: &[usize], cap: usize) -> Result<(f64, f64)> {
    if !disjoint(a, c) {
        return input("mutual information needs disjoint regions");
    }
    let joint_sites: Vec<usize> = a.iter().chain(c).copied().collect();
    let ra = reduced_density_matrix(state, a, cap)?;
    let rc = reduced_density_matrix(state, c, cap)?;
    let rac = reduced_density_matrix(state, &joint_sites, cap)?;
    let i = von_neumann_entropy(&ra) + von_neumann_entropy(&rc) - von_neumann_entropy(&rac);
    Ok((i, relative_entropy(&rac, &ra.kron(&rc))?))
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionPoint {
    pub label: String,
    pub entropy: f64,
    pub boundary: usize,
    pub components: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TeeFit {
    pub convention: BoundaryConvention,
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_bits: f64,
    /// Largest `|S − (α|∂A| − γ n_A)|` over the regions.
    pub residual: f64,
    pub points: Vec<RegionPoint>,
}

/// Least-squares fit of `S(A) = α|∂A| − γ n_A`.
pub fn tee_fit(
    src: &dyn EntropySource,
    lat: &LatticeSpec,
    regions: &[Region],
    convention: BoundaryConvention,
) -> Result<TeeFit> {
    if regions.len() < 3 {
        return input("the area-law fit needs at least three regions");
    }
    let points = regions
        .iter()
        .map(|r| {
            Ok(RegionPoint {
                label: r.label.clone(),
                entropy: src.entropy(&r.edges)?,
                boundary: lat.boundary_size(&r.edges, convention),
                components: lat.boundary_components(&r.edges),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // normal equations for the columns (|∂A|, −n_A)
    let (mut sbb, mut sbn, mut snn, mut sbs, mut sns) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &points {
        let (b, n) = (p.boundary as f64, -(p.components as f64));
        sbb += b * b;
        sbn += b * n;
        snn += n * n;
        sbs += b * p.entropy;
        sns += n * p.entropy;
    }
    let det = sbb * snn - sbn * sbn;
    if det.abs() <= 1e-9 * (sbb * snn).max(1.0) {
        return input("degenerate fit: regions need distinct boundary-to-component ratios");
    }
    let alpha = (sbs * snn - sns * sbn) / det;
    let gamma = (sbb * sns - sbn * sbs) / det;
    let residual = points
        .iter()
        .map(|p| (p.entropy - (alpha * p.boundary as f64 - gamma * p.components as f64)).abs())
        .fold(0.0, f64::max);
    Ok(TeeFit {
        convention,
        alpha,
        gamma,
        gamma_bits: gamma / std::f64::consts::LN_2,
        residual,
        points,
    })
}

/// Why `(B, C)` is not an annulus around a disk, if it is not: the regions
/// must be non-empty and disjoint, and every edge at a vertex of `C` must lie
/// in `B ∪ C`.
pub fn annulus_geometry_error(lat: &LatticeSpec, b: &[usize], c: &[usize]) -> Option<String> {
    if b.is_empty() || c.is_empty() {
        return Some("annulus and disk must be non-empty".into());
    }
    if !disjoint(b, c) {
        return Some("annulus and disk overlap".into());
    }
    let bc = union(b, c);
    for v in lat.region_vertices(c) {
        if let Some(e) = lat.star_edges(v).into_iter().find(|e| bc.binary_search(e).is_err()) {
            return Some(format!("edge {e} at disk vertex {v} lies outside the annulus"));
        }
    }
    None
}

/// `S_BC + S_C − S_B`, which vanishes for fixed-point topological states.
pub fn axiom_a0(src: &dyn EntropySource, lat: &LatticeSpec, b: &[usize], c: &[usize]) -> Result<f64> {
    if let Some(why) = annulus_geometry_error(lat, b, c) {
        return input(why);
    }
    Ok(src.entropy(&union(b, c))? + src.entropy(c)? - src.entropy(b)?)
}

pub fn axiom_a0_check(src: &dyn EntropySource, lat: &LatticeSpec, b: &Region, c: &Region, tag: &str) -> Result<Check> {
    let start = Instant::now();
    let value = axiom_a0(src, lat, &b.edges, &c.edges)?;
    Ok(Check::within(format!("axiom_a0[{tag}]"), value.abs(), 1e-9)
        .with_detail(format!("S_BC + S_C - S_B = {value:e}"))
        .since(start))
}

/// Both sides of `S_A + S_B ≤ S_AC + S_BC` for pairwise-disjoint regions.
pub fn ssa_sides(src: &dyn EntropySource, a: &[usize], b: &[usize], c: &[usize]) -> Result<(f64, f64)> {
    if !disjoint(a, b) || !disjoint(a, c) || !disjoint(b, c) {
        return input("strong subadditivity needs pairwise-disjoint regions");
    }
    let lhs = src.entropy(a)? + src.entropy(b)?;
    let rhs = src.entropy(&union(a, c))? + src.entropy(&union(b, c))?;
    Ok((lhs, rhs))
}

/// `S_A + S_B ≤ S_AC + S_BC` on random pairwise-disjoint triples of up to `max_size` edges each.
pub fn ssa_random_check(
    src: &dyn EntropySource,
    count: usize,
    max_size: usize,
    seed: u64,
    tag: &str,
) -> Result<Check> {
    let start = Instant::now();
    let n = src.num_sites();
    if 3 * max_size > n || max_size == 0 {
        return input("region size too large for the number of sites");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut edges: Vec<usize> = (0..n).collect();
    for _ in 0..count {
        edges.shuffle(&mut rng);
        let sizes = [(); 3].map(|_| rng.random_range(1..=max_size));
        let a = &edges[..sizes[0]];
        let b = &edges[sizes[0]..sizes[0] + sizes[1]];
        let c = &edges[sizes[0] + sizes[1]..sizes[0] + sizes[1] + sizes[2]];
        let (lhs, rhs) = ssa_sides(src, &union(a, &[]), &union(b, &[]), &union(c, &[]))?;
        worst = worst.max(lhs - rhs);
    }
    Ok(Check::within(format!("strong_subadditivity[{tag}]"), worst.max(0.0), 1e-9)
        .with_detail(format!("{count} random triples, largest S_A + S_B - S_AC - S_BC = {worst:e}"))
        .since(start))
}

/// The chain `I(A:C) = (S_BC + S_C − S_B) + (S_A + S_B − S_BC − S_AC)`: with the
/// first bracket zero by Axiom A0 and the second non-positive by strong
/// subadditivity, `I(A:C)` vanishes.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroMutualInformation {
    pub a0: f64,
    pub ssa_term: f64,
    pub mutual_information: f64,
}

pub fn zero_mutual_information_chain(
    src: &dyn EntropySource,
    lat: &LatticeSpec,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<ZeroMutualInformation> {
    if !disjoint(a, &union(b, c)) {
        return input("A must be disjoint from the annulus and the disk");
    }
    let a0 = axiom_a0(src, lat, b, c)?;
    let (lhs, rhs) = ssa_sides(src, a, b, c)?;
    Ok(ZeroMutualInformation {
        a0,
        ssa_term: lhs - rhs,
        mutual_information: mutual_information(src, a, c)?,
    })
}

/// The closed `a × b` face blocks used for area-law fits.
pub fn block_regions(lat: &LatticeSpec, shapes: &[(usize, usize)]) -> Result<Vec<Region>> {
    shapes
        .iter()
        .map(|&(w, h)| Ok(Region::new(format!("{w}x{h}"), lat.closed_block(0, 0, w, h)?)))
        .collect()
}

/// The disk `C` (a closed `k × k` block) and the annulus `B` of width `w` around it.
pub fn annulus_around_block(lat: &LatticeSpec, x0: usize, y0: usize, k: usize, w: usize) -> Result<(Region, Region)> {
    let c = lat.closed_block(x0 + w, y0 + w, k, k)?;
    let bc = lat.closed_block(x0, y0, k + 2 * w, k + 2 * w)?;
    let b: Vec<usize> = bc.into_iter().filter(|e| c.binary_search(e).is_err()).collect();
    Ok((Region::new("B", b), Region::new("C", c)))
}
