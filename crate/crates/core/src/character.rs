//! Complex character tables via Burnside's class-sum method.
//!
//! The class-multiplication matrices commute, and their common eigenvectors
//! are the central characters `ω_χ(C) = |C| χ(g_C) / χ(1)`. A seeded random
//! real combination of the matrices separates the eigenvectors; each one is
//! then rescaled into an irreducible character using the first orthogonality
//! relation.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ConjugacyClass, FiniteGroup, ProductGroup};

/// Orthogonality tolerance for computed tables.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Maximum distance from an integer before a degree is rejected.
pub const INTEGRALITY_TOL: f64 = 1e-6;

const MAX_ATTEMPTS: u64 = 8;

#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub group_order: usize,
    pub classes: Vec<ConjugacyClass>,
    /// Class index of every element.
    #[serde(skip)]
    pub class_of: Vec<usize>,
    pub degrees: Vec<usize>,
    /// `characters[irrep][class]`
    pub characters: Vec<Vec<Complex64>>,
}

impl CharacterTable {
    pub fn num_irreps(&self) -> usize {
        self.characters.len()
    }

    /// Character of `irrep` at an arbitrary group element.
    #[inline]
    pub fn value(&self, irrep: usize, element: usize) -> Complex64 {
        self.characters[irrep][self.class_of[element]]
    }

    /// Largest deviation from the row relation `Σ_c |C| χ_i χ_j* = |G| δ_ij`.
    pub fn row_orthogonality_error(&self) -> f64 {
        let g = self.group_order as f64;
        let mut worst: f64 = 0.0;
        for (i, ci) in self.characters.iter().enumerate() {
            for (j, cj) in self.characters.iter().enumerate() {
                let s: Complex64 = self
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(c, class)| ci[c] * cj[c].conj() * class.size() as f64)
                    .sum();
                let target = if i == j { g } else { 0.0 };
                worst = worst.max((s - target).norm() / g);
            }
        }
        worst
    }

    /// Largest deviation from the column relation `Σ_i χ_i(c) χ_i(c')* = |G|/|C| δ_cc'`.
    pub fn column_orthogonality_error(&self) -> f64 {
        let g = self.group_order as f64;
        let mut worst: f64 = 0.0;
        for (c, class_c) in self.classes.iter().enumerate() {
            for d in 0..self.classes.len() {
                let s: Complex64 = self.characters.iter().map(|row| row[c] * row[d].conj()).sum();
                let target = if c == d { g / class_c.size() as f64 } else { 0.0 };
                worst = worst.max((s - target).norm() / g);
            }
        }
        worst
    }

    /// Verify every structural invariant of a character table.
    pub fn validate(&self) -> Result<()> {
        if self.num_irreps() != self.classes.len() {
            return Err(Error::CheckFailed(format!(
                "{} irreps but {} classes",
                self.num_irreps(),
                self.classes.len()
            )));
        }
        let sum_sq: usize = self.degrees.iter().map(|d| d * d).sum();
        if sum_sq != self.group_order {
            return Err(Error::CheckFailed(format!(
                "sum of squared degrees is {sum_sq}, group order {}",
                self.group_order
            )));
        }
        for (i, row) in self.characters.iter().enumerate() {
            let at_identity = row[0];
            if (at_identity - Complex64::new(self.degrees[i] as f64, 0.0)).norm() > ORTHOGONALITY_TOL {
                return Err(Error::CheckFailed(format!(
                    "irrep {i}: χ(e) = {at_identity} differs from degree {}",
                    self.degrees[i]
                )));
            }
            if row.iter().any(|v| v.norm() > self.degrees[i] as f64 + ORTHOGONALITY_TOL) {
                return Err(Error::CheckFailed(format!("irrep {i} has a value above its degree")));
            }
        }
        let row_err = self.row_orthogonality_error();
        let col_err = self.column_orthogonality_error();
        if row_err > ORTHOGONALITY_TOL || col_err > ORTHOGONALITY_TOL {
            return Err(Error::CheckFailed(format!(
                "orthogonality violated: rows {row_err:e}, columns {col_err:e}"
            )));
        }
        Ok(())
    }

    /// Match the rows of `other` (a table for the same group and class order)
    /// against the rows of `self`. Returns `perm` with `other.row(perm[i]) ≈ self.row(i)`.
    pub fn row_permutation_to(&self, other: &CharacterTable, tol: f64) -> Option<Vec<usize>> {
        if self.classes != other.classes || self.num_irreps() != other.num_irreps() {
            return None;
        }
        let mut used = vec![false; other.num_irreps()];
        let mut perm = Vec::with_capacity(self.num_irreps());
        for row in &self.characters {
            let j = (0..other.num_irreps()).find(|&j| {
                !used[j]
                    && row
                        .iter()
                        .zip(&other.characters[j])
                        .all(|(a, b)| (a - b).norm() <= tol)
            })?;
            used[j] = true;
            perm.push(j);
        }
        Some(perm)
    }
}

/// Character table of `g`, rows ordered by degree and then by character
/// values (descending), so the trivial character is always row `0`.
pub fn character_table(g: &FiniteGroup, seed: u64) -> Result<CharacterTable> {
    let classes = g.conjugacy_classes();
    let class_of = FiniteGroup::class_lookup(&classes, g.order());
    let r = classes.len();

    // structure constants c[i][j][k]: number of (x, y) ∈ C_i × C_j with xy = rep(C_k)
    let mut counts = vec![0usize; r * r * r];
    for x in g.elements() {
        for y in g.elements() {
            let k = class_of[g.mul(x, y)];
            counts[(class_of[x] * r + class_of[y]) * r + k] += 1;
        }
    }
    let structure = |i: usize, j: usize, k: usize| {
        (counts[(i * r + j) * r + k] / classes[k].size()) as f64
    };

    let mut last_err = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let coeffs: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
        // (M)_{ik} = Σ_j a_j c_ijk, acting on vectors indexed by class
        let m = DMatrix::from_fn(r, r, |i, k| (0..r).map(|j| coeffs[j] * structure(i, j, k)).sum());
        match central_characters(&m) {
            Ok(vectors) => {
                let table = assemble(g.order(), classes.clone(), class_of.clone(), vectors)?;
                table.validate()?;
                return Ok(table);
            }
            Err(e) => last_err = e,
        }
    }
    Err(Error::Numerical(format!(
        "could not separate the characters of {} after {MAX_ATTEMPTS} random combinations: {last_err}",
        g.name()
    )))
}

/// Eigenvectors of `m`, each normalized so that its identity-class entry is 1.
fn central_characters(m: &DMatrix<f64>) -> std::result::Result<Vec<Vec<Complex64>>, String> {
    let r = m.nrows();
    let eigenvalues: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    let scale = 1.0 + eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    for i in 0..r {
        for j in 0..i {
            if (eigenvalues[i] - eigenvalues[j]).norm() < 1e-6 * scale {
                return Err(format!(
                    "eigenvalues {} and {} are not separated",
                    eigenvalues[i], eigenvalues[j]
                ));
            }
        }
    }
    let mc: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
    let mut vectors = Vec::with_capacity(r);
    for lambda in eigenvalues {
        let shifted = &mc - DMatrix::from_diagonal_element(r, r, lambda);
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or("SVD did not return right singular vectors")?;
        let (idx, smallest) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or("empty SVD")?;
        if smallest > 1e-8 * scale {
            return Err(format!("eigenvector for {lambda} is ill-conditioned (σ_min = {smallest:e})"));
        }
        let v: Vec<Complex64> = v_t.row(idx).iter().map(|z| z.conj()).collect();
        if v[0].norm() < 1e-10 {
            return Err("central character vanishes on the identity class".into());
        }
        let pivot = v[0];
        vectors.push(v.into_iter().map(|z| z / pivot).collect());
    }
    Ok(vectors)
}

fn assemble(
    order: usize,
    classes: Vec<ConjugacyClass>,
    class_of: Vec<usize>,
    central: Vec<Vec<Complex64>>,
) -> Result<CharacterTable> {
    let mut rows = Vec::with_capacity(central.len());
    for w in central {
        let norm: f64 = w
            .iter()
            .zip(&classes)
            .map(|(z, c)| z.norm_sqr() / c.size() as f64)
            .sum();
        let degree = (order as f64 / norm).sqrt();
        let rounded = degree.round();
        if (degree - rounded).abs() > INTEGRALITY_TOL || rounded < 1.0 {
            return Err(Error::Numerical(format!("degree {degree} is not a positive integer")));
        }
        let chars: Vec<Complex64> = w
            .iter()
            .zip(&classes)
            .map(|(z, c)| z * rounded / c.size() as f64)
            .collect();
        rows.push((rounded as usize, chars));
    }
    sort_rows(&mut rows);
    let (degrees, characters) = rows.into_iter().unzip();
    Ok(CharacterTable {
        group_order: order,
        classes,
        class_of,
        degrees,
        characters,
    })
}

fn sort_rows(rows: &mut [(usize, Vec<Complex64>)]) {
    let key = |z: &Complex64| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64);
    rows.sort_by(|(da, a), (db, b)| {
        da.cmp(db).then_with(|| {
            let ka: Vec<_> = a.iter().map(key).collect();
            let kb: Vec<_> = b.iter().map(key).collect();
            kb.cmp(&ka)
        })
    });
}

/// Character table of `G × H` built from the factor tables: row `i·n_H + j`
/// is `χ_i ⊗ ψ_j`, evaluated on the classes of the product group.
pub fn tensor_character(
    t: &CharacterTable,
    u: &CharacterTable,
    product: &ProductGroup,
) -> Result<CharacterTable> {
    if t.group_order != product.left.order() || u.group_order != product.right.order() {
        return Err(Error::Input(
            "character tables do not match the factors of the product group".into(),
        ));
    }
    let classes = product.group.conjugacy_classes();
    let class_of = FiniteGroup::class_lookup(&classes, product.group.order());
    let mut degrees = Vec::new();
    let mut characters = Vec::new();
    for i in 0..t.num_irreps() {
        for j in 0..u.num_irreps() {
            degrees.push(t.degrees[i] * u.degrees[j]);
            characters.push(
                classes
                    .iter()
                    .map(|c| {
                        let (a, b) = product.split(c.representative);
                        t.value(i, a) * u.value(j, b)
                    })
                    .collect(),
            );
        }
    }
    Ok(CharacterTable {
        group_order: product.group.order(),
        classes,
        class_of,
        degrees,
        characters,
    })
}
