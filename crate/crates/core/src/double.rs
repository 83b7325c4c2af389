//! Irreducible representations of the quantum double `D(G)`.
//!
//! A label is a pair `(C, R)`: a conjugacy class `C` with representative `r`,
//! and an irrep `R` of the centralizer `N_r`. Its character on a commuting
//! pair `(g, h)` (flux `g`, charge measured by `h`) is
//! `[g ∈ C] · χ_R(q_g⁻¹ h q_g)` where `q_g r q_g⁻¹ = g`.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::character::{character_table, tensor_character, CharacterTable, INTEGRALITY_TOL, ORTHOGONALITY_TOL};
use crate::error::{input, Error, Result};
use crate::group::{direct_product, find_isomorphism, ConjugacyClass, FiniteGroup, ProductGroup, Subgroup};
use crate::report::Check;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnyonLabel {
    pub class_index: usize,
    pub irrep_index: usize,
}

/// Centralizer of a class representative, as a group with its character table.
#[derive(Clone, Debug)]
pub struct Centralizer {
    pub subgroup: Subgroup,
    pub group: FiniteGroup,
    pub table: CharacterTable,
}

#[derive(Clone, Debug)]
pub struct AnyonCatalog {
    group: FiniteGroup,
    classes: Vec<ConjugacyClass>,
    class_of: Vec<usize>,
    /// For every element `g`, the conjugator `q_g` with `q_g r q_g⁻¹ = g`.
    transversal: Vec<usize>,
    centralizers: Vec<Centralizer>,
    labels: Vec<AnyonLabel>,
    qdims: Vec<usize>,
}

/// Σ_c #irreps(N_c) labels, ordered by class then irrep; the vacuum is label 0.
pub fn anyon_catalog(g: &FiniteGroup, seed: u64) -> Result<AnyonCatalog> {
    let classes = g.conjugacy_classes();
    let class_of = FiniteGroup::class_lookup(&classes, g.order());
    let mut transversal = vec![usize::MAX; g.order()];
    for class in &classes {
        for q in g.elements() {
            let y = g.conjugate(q, class.representative);
            if transversal[y] == usize::MAX {
                transversal[y] = q;
            }
        }
    }
    let centralizers = classes
        .iter()
        .map(|class| {
            let subgroup = g.centralizer(class.representative)?;
            let group = subgroup.to_group(g, format!("N({})", class.representative))?;
            let table = character_table(&group, seed)?;
            Ok(Centralizer { subgroup, group, table })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(g.clone(), classes, class_of, transversal, centralizers))
}

fn assemble(
    group: FiniteGroup,
    classes: Vec<ConjugacyClass>,
    class_of: Vec<usize>,
    transversal: Vec<usize>,
    centralizers: Vec<Centralizer>,
) -> AnyonCatalog {
    let mut labels = Vec::new();
    let mut qdims = Vec::new();
    for (c, (class, cent)) in classes.iter().zip(&centralizers).enumerate() {
        for (r, &deg) in cent.table.degrees.iter().enumerate() {
            labels.push(AnyonLabel { class_index: c, irrep_index: r });
            qdims.push(class.size() * deg);
        }
    }
    AnyonCatalog {
        group,
        classes,
        class_of,
        transversal,
        centralizers,
        labels,
        qdims,
    }
}

pub fn sector_count(cat: &AnyonCatalog) -> usize {
    cat.labels.len()
}

impl AnyonCatalog {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    pub fn centralizer(&self, class_index: usize) -> &Centralizer {
        &self.centralizers[class_index]
    }

    pub fn labels(&self) -> &[AnyonLabel] {
        &self.labels
    }

    pub fn qdims(&self) -> &[usize] {
        &self.qdims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn irrep_degree(&self, label: usize) -> usize {
        let l = self.labels[label];
        self.centralizers[l.class_index].table.degrees[l.irrep_index]
    }

    /// `Σ_labels d²`, which must equal `|G|²`.
    pub fn total_dimension_squared(&self) -> usize {
        self.qdims.iter().map(|d| d * d).sum()
    }

    pub fn transversal(&self, g: usize) -> usize {
        self.transversal[g]
    }

    /// All commuting pairs `(g, h)`, lexicographically ordered.
    pub fn commuting_pairs(&self) -> Vec<(usize, usize)> {
        let g = &self.group;
        g.elements()
            .flat_map(|a| g.elements().filter(move |&b| g.commute(a, b)).map(move |b| (a, b)))
            .collect()
    }

    fn character_unchecked(&self, label: usize, g: usize, h: usize) -> Complex64 {
        let l = self.labels[label];
        if self.class_of[g] != l.class_index {
            return Complex64::new(0.0, 0.0);
        }
        let grp = &self.group;
        let q = self.transversal[g];
        let x = grp.mul(grp.mul(grp.inv(q), h), q);
        let cent = &self.centralizers[l.class_index];
        let local = cent.subgroup.local_index(x).expect("conjugated element lies in the centralizer");
        cent.table.value(l.irrep_index, local)
    }
}

/// `[g ∈ C] · χ_R(q_g⁻¹ h q_g)` for a commuting pair.
pub fn double_character(cat: &AnyonCatalog, label: usize, g: usize, h: usize) -> Result<Complex64> {
    let n = cat.group.order();
    if label >= cat.len() || g >= n || h >= n {
        return input("label or element out of range");
    }
    if !cat.group.commute(g, h) {
        return input(format!("elements {g} and {h} do not commute"));
    }
    Ok(cat.character_unchecked(label, g, h))
}

/// Fusion multiplicities `N^k_ij`, flat in `(i, j, k)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionTensor {
    n: usize,
    data: Vec<u32>,
}

impl FusionTensor {
    pub fn rank(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Non-zero entries as `(i, j, k, N)`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, u32)> {
        let n = self.n;
        (0..n * n * n)
            .filter(|&x| self.data[x] != 0)
            .map(|x| (x / (n * n), (x / n) % n, x % n, self.data[x]))
            .collect()
    }

    /// The label `j` with `N^0_ij = 1`, for each `i`, if unique.
    pub fn conjugates(&self) -> Option<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                let hits: Vec<usize> = (0..self.n).filter(|&j| self.get(i, j, 0) != 0).collect();
                (hits.len() == 1 && self.get(i, hits[0], 0) == 1).then(|| hits[0])
            })
            .collect()
    }

    /// First violated fusion-ring axiom, if any.
    pub fn violation(&self, qdims: &[usize]) -> Option<String> {
        let n = self.n;
        if qdims.len() != n {
            return Some("quantum dimension list has the wrong length".into());
        }
        for j in 0..n {
            for k in 0..n {
                if self.get(0, j, k) != u32::from(j == k) {
                    return Some(format!("unit law fails at ({j}, {k})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.get(i, j, k) != self.get(j, i, k) {
                        return Some(format!("not commutative at ({i}, {j}, {k})"));
                    }
                }
                let dim: usize = (0..n).map(|k| self.get(i, j, k) as usize * qdims[k]).sum();
                if dim != qdims[i] * qdims[j] {
                    return Some(format!("dimensions fail for {i} ⊗ {j}: {dim}"));
                }
            }
        }
        let violation = (0..n).into_par_iter().find_map_first(|i| {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let left: u64 = (0..n).map(|m| (self.get(i, j, m) * self.get(m, k, l)) as u64).sum();
                        let right: u64 = (0..n).map(|m| (self.get(j, k, m) * self.get(i, m, l)) as u64).sum();
                        if left != right {
                            return Some(format!("not associative at ({i}, {j}, {k}; {l})"));
                        }
                    }
                }
            }
            None
        });
        if violation.is_some() {
            return violation;
        }
        if self.conjugates().is_none() {
            return Some("some label has no unique conjugate".into());
        }
        None
    }
}

/// `N^k_ij = (1/|G|) Σ_{gh=hg} χ_{i⊗j}(g,h) χ_k(g,h)*`, with the coproduct
/// character `χ_{i⊗j}(g,h) = Σ_{g₁ ∈ N_h} χ_i(g₁,h) χ_j(g₁⁻¹g,h)`.
pub fn fusion_rules(cat: &AnyonCatalog) -> Result<FusionTensor> {
    let grp = &cat.group;
    let n = cat.len();
    let order = grp.order();
    let pairs = cat.commuting_pairs();
    let pair_index = {
        let mut idx = vec![usize::MAX; order * order];
        for (p, &(g, h)) in pairs.iter().enumerate() {
            idx[g * order + h] = p;
        }
        idx
    };
    let chars: Vec<Vec<Complex64>> = (0..n)
        .map(|l| pairs.iter().map(|&(g, h)| cat.character_unchecked(l, g, h)).collect())
        .collect();
    let centralizer_of: Vec<Vec<usize>> = grp
        .elements()
        .map(|h| grp.elements().filter(|&x| grp.commute(x, h)).collect())
        .collect();

    let rows: Vec<Result<Vec<u32>>> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let coproduct: Vec<Complex64> = pairs
                .iter()
                .map(|&(g, h)| {
                    centralizer_of[h]
                        .iter()
                        .map(|&g1| {
                            let g2 = grp.mul(grp.inv(g1), g);
                            chars[i][pair_index[g1 * order + h]] * chars[j][pair_index[g2 * order + h]]
                        })
                        .sum()
                })
                .collect();
            (0..n)
                .map(|k| {
                    let x: Complex64 = coproduct
                        .iter()
                        .zip(&chars[k])
                        .map(|(a, b)| a * b.conj())
                        .sum::<Complex64>()
                        / order as f64;
                    let r = x.re.round();
                    if (x.re - r).abs() > INTEGRALITY_TOL || x.im.abs() > INTEGRALITY_TOL || r < 0.0 {
                        return Err(Error::Numerical(format!(
                            "fusion multiplicity N[{i},{j},{k}] = {x} is not a non-negative integer"
                        )));
                    }
                    Ok(r as u32)
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * n * n);
    for row in rows {
        data.extend(row?);
    }
    let tensor = FusionTensor { n, data };
    if let Some(v) = tensor.violation(&cat.qdims) {
        return Err(Error::CheckFailed(format!("fusion rules of {}: {v}", grp.name())));
    }
    Ok(tensor)
}

/// A catalog for `G × H` assembled from the factors: classes `c × c′`,
/// centralizers `N_c × N_c′` and irreps `R ⊗ R′`.
#[derive(Clone, Debug)]
pub struct StackedCatalog {
    pub catalog: AnyonCatalog,
    /// Per stacked label, the pair of factor labels.
    pub pairs: Vec<(usize, usize)>,
}

impl StackedCatalog {
    /// Stacked label index of the factor-label pair `(i, i′)`.
    pub fn label_of(&self, i: usize, i2: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (i, i2))
    }
}

pub fn stack_catalogs(a: &AnyonCatalog, b: &AnyonCatalog, product: &ProductGroup) -> Result<StackedCatalog> {
    if a.group.order() != product.left.order() || b.group.order() != product.right.order() {
        return input("catalogs do not match the factors of the product group");
    }
    let k = &product.group;
    let mut classes = Vec::new();
    let mut centralizers = Vec::new();
    for (ca, cent_a) in a.classes.iter().zip(&a.centralizers) {
        for (cb, cent_b) in b.classes.iter().zip(&b.centralizers) {
            let mut members: Vec<usize> = ca
                .members
                .iter()
                .flat_map(|&x| cb.members.iter().map(move |&y| product.pair_index(x, y)))
                .collect();
            members.sort_unstable();
            classes.push(ConjugacyClass {
                representative: product.pair_index(ca.representative, cb.representative),
                members,
            });
            let local = direct_product(&cent_a.group, &cent_b.group, usize::MAX)?;
            let mut sub: Vec<usize> = cent_a
                .subgroup
                .members
                .iter()
                .flat_map(|&x| cent_b.subgroup.members.iter().map(move |&y| product.pair_index(x, y)))
                .collect();
            sub.sort_unstable();
            let table = tensor_character(&cent_a.table, &cent_b.table, &local)?;
            centralizers.push(Centralizer {
                subgroup: Subgroup {
                    parent_order: k.order(),
                    members: sub,
                },
                group: local.group,
                table,
            });
        }
    }
    let class_of = FiniteGroup::class_lookup(&classes, k.order());
    let transversal = k
        .elements()
        .map(|x| {
            let (g, h) = product.split(x);
            product.pair_index(a.transversal[g], b.transversal[h])
        })
        .collect();
    let catalog = assemble(k.clone(), classes, class_of, transversal, centralizers);

    // label (c, c′; r, r′) comes from factor labels (c, r) and (c′, r′)
    let label_index = |cat: &AnyonCatalog, class: usize, irrep: usize| {
        cat.labels
            .iter()
            .position(|l| l.class_index == class && l.irrep_index == irrep)
            .expect("label exists")
    };
    let nb_classes = b.classes.len();
    let pairs = catalog
        .labels
        .iter()
        .map(|l| {
            let (c, c2) = (l.class_index / nb_classes, l.class_index % nb_classes);
            let n2 = b.centralizers[c2].table.num_irreps();
            let (r, r2) = (l.irrep_index / n2, l.irrep_index % n2);
            (label_index(a, c, r), label_index(b, c2, r2))
        })
        .collect();
    Ok(StackedCatalog { catalog, pairs })
}

/// Match labels of `x` to labels of `y` by their `D(G)` characters, where
/// `iso` maps group elements of `x` to those of `y` (identity when `None`).
///
/// Classes are matched through their representatives; irreps of matching
/// centralizers by their character values; the match is then confirmed on
/// every commuting pair.
pub fn label_bijection(x: &AnyonCatalog, y: &AnyonCatalog, iso: Option<&[usize]>) -> Result<Vec<usize>> {
    let n = x.group.order();
    if y.group.order() != n || x.len() != y.len() {
        return Err(Error::CheckFailed(format!(
            "catalogs differ in size: {} vs {} labels",
            x.len(),
            y.len()
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    let phi = iso.unwrap_or(&identity);
    let mut map = vec![usize::MAX; x.len()];
    let mut used = vec![false; y.len()];
    for (lx, label) in x.labels.iter().enumerate() {
        let rep = x.classes[label.class_index].representative;
        let cy = y.class_of[phi[rep]];
        let members = &x.centralizers[label.class_index].subgroup.members;
        let matches = |ly: usize| {
            y.labels[ly].class_index == cy
                && members.iter().all(|&h| {
                    (x.character_unchecked(lx, rep, h) - y.character_unchecked(ly, phi[rep], phi[h])).norm()
                        < ORTHOGONALITY_TOL
                })
        };
        let found = (0..y.len())
            .find(|&ly| !used[ly] && matches(ly))
            .ok_or_else(|| Error::CheckFailed(format!("label {lx} of {} has no partner", x.group.name())))?;
        used[found] = true;
        map[lx] = found;
    }
    for (g, h) in x.commuting_pairs() {
        for (lx, &ly) in map.iter().enumerate() {
            let d = x.character_unchecked(lx, g, h) - y.character_unchecked(ly, phi[g], phi[h]);
            if d.norm() > ORTHOGONALITY_TOL {
                return Err(Error::CheckFailed(format!(
                    "labels {lx} and {ly} disagree at ({g}, {h})"
                )));
            }
        }
    }
    Ok(map)
}

#[derive(Clone, Debug, Serialize)]
pub struct BijectionEntry {
    pub left: usize,
    pub right: usize,
    pub product: usize,
    pub qdim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StackCountReport {
    pub left_group: String,
    pub right_group: String,
    pub left_count: usize,
    pub right_count: usize,
    pub product_count: usize,
    pub bijection: Vec<BijectionEntry>,
}

/// `|Δ_{G×H}| = |Δ_G| |Δ_H|` with the label bijection exhibited explicitly.
pub fn stack_count_check(g: &FiniteGroup, h: &FiniteGroup, cap: usize, seed: u64) -> Result<(Vec<Check>, StackCountReport)> {
    let start = Instant::now();
    let product = direct_product(g, h, cap)?;
    let a = anyon_catalog(g, seed)?;
    let b = anyon_catalog(h, seed)?;
    let direct = anyon_catalog(&product.group, seed)?;
    let stacked = stack_catalogs(&a, &b, &product)?;
    let tag = format!("{}x{}", g.name(), h.name());
    let mut checks = vec![Check::count(format!("sector_count[{tag}]"), direct.len(), a.len() * b.len()).since(start)];
    for cat in [&a, &b, &direct] {
        let n = cat.group.order();
        checks.push(Check::count(
            format!("total_dimension[{}]", cat.group.name()),
            cat.total_dimension_squared(),
            n * n,
        ));
    }

    // C_K = {c × c′} and N_{c×c′} = N_c × N_c′, compared as element sets
    let mut direct_classes: Vec<&Vec<usize>> = direct.classes.iter().map(|c| &c.members).collect();
    let mut stacked_classes: Vec<&Vec<usize>> = stacked.catalog.classes.iter().map(|c| &c.members).collect();
    direct_classes.sort();
    stacked_classes.sort();
    checks.push(Check::holds(format!("class_factorization[{tag}]"), direct_classes == stacked_classes));
    let centralizers_match = stacked.catalog.classes.iter().zip(&stacked.catalog.centralizers).all(|(c, cent)| {
        product
            .group
            .centralizer(c.representative)
            .map(|s| s.members == cent.subgroup.members)
            .unwrap_or(false)
    });
    checks.push(Check::holds(format!("centralizer_factorization[{tag}]"), centralizers_match));

    let mut report = StackCountReport {
        left_group: g.name().to_string(),
        right_group: h.name().to_string(),
        left_count: a.len(),
        right_count: b.len(),
        product_count: direct.len(),
        bijection: Vec::new(),
    };
    match label_bijection(&stacked.catalog, &direct, None) {
        Ok(map) => {
            let mut qdim_errors = 0;
            for (ls, &lk) in map.iter().enumerate() {
                let (i, j) = stacked.pairs[ls];
                if direct.qdims[lk] != a.qdims[i] * b.qdims[j] {
                    qdim_errors += 1;
                }
                report.bijection.push(BijectionEntry {
                    left: i,
                    right: j,
                    product: lk,
                    qdim: direct.qdims[lk],
                });
            }
            report.bijection.sort_by_key(|e| (e.left, e.right));
            checks.push(Check::holds(format!("label_bijection[{tag}]"), true));
            checks.push(Check::count(format!("qdim_multiplicativity[{tag}]"), qdim_errors, 0));
        }
        Err(e) => checks.push(Check::error(format!("label_bijection[{tag}]"), &e)),
    }
    Ok((checks.into_iter().map(|c| if c.elapsed_ms == 0 { c.since(start) } else { c }).collect(), report))
}

/// `N_{G×H} = N_G ⊗ N_H` under the label bijection, exactly.
pub fn fusion_factorization_check(g: &FiniteGroup, h: &FiniteGroup, cap: usize, seed: u64) -> Result<Vec<Check>> {
    let start = Instant::now();
    let product = direct_product(g, h, cap)?;
    let a = anyon_catalog(g, seed)?;
    let b = anyon_catalog(h, seed)?;
    let direct = anyon_catalog(&product.group, seed)?;
    let stacked = stack_catalogs(&a, &b, &product)?;
    let map = label_bijection(&stacked.catalog, &direct, None)?;
    let na = fusion_rules(&a)?;
    let nb = fusion_rules(&b)?;
    let nk = fusion_rules(&direct)?;
    let n = stacked.pairs.len();
    let mut mismatches = 0usize;
    for x in 0..n {
        let (i, i2) = stacked.pairs[x];
        for y in 0..n {
            let (j, j2) = stacked.pairs[y];
            for z in 0..n {
                let (k, k2) = stacked.pairs[z];
                if nk.get(map[x], map[y], map[z]) != na.get(i, j, k) * nb.get(i2, j2, k2) {
                    mismatches += 1;
                }
            }
        }
    }
    let tag = format!("{}x{}", g.name(), h.name());
    Ok(vec![Check::count(format!("fusion_factorization[{tag}]"), mismatches, 0)
        .with_detail(format!("{} entries compared", n * n * n))
        .since(start)])
}

/// Compare the fusion tensors of two isomorphic groups under the induced label bijection.
pub fn fusion_isomorphism_check(x: &FiniteGroup, y: &FiniteGroup, seed: u64) -> Result<Vec<Check>> {
    let start = Instant::now();
    let tag = format!("{}~{}", x.name(), y.name());
    let Some(iso) = find_isomorphism(x, y) else {
        return Ok(vec![Check::holds(format!("isomorphism[{tag}]"), false)]);
    };
    let cx = anyon_catalog(x, seed)?;
    let cy = anyon_catalog(y, seed)?;
    let map = label_bijection(&cx, &cy, Some(&iso))?;
    let nx = fusion_rules(&cx)?;
    let ny = fusion_rules(&cy)?;
    let n = cx.len();
    let mut mismatches = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if nx.get(i, j, k) != ny.get(map[i], map[j], map[k]) {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(vec![
        Check::count(format!("sector_count[{tag}]"), cx.len(), cy.len()),
        Check::count(format!("fusion_isomorphism[{tag}]"), mismatches, 0).since(start),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, GroupSpec, DEFAULT_GROUP_CAP};

    fn group(name: &str) -> FiniteGroup {
        build_group(&GroupSpec::named(name), DEFAULT_GROUP_CAP).unwrap()
    }

    fn catalog(name: &str) -> AnyonCatalog {
        anyon_catalog(&group(name), 42).unwrap()
    }

    #[test]
    fn counts_by_pair_enumeration() {
        // oracle: Σ over classes of the number of classes of the centralizer,
        // counted by brute-force conjugation inside the centralizer
        for name in ["trivial", "Z2", "Z3", "Z4", "S3", "D4", "Q8", "Z2xZ2"] {
            let g = group(name);
            let expected: usize = g
                .conjugacy_classes()
                .iter()
                .map(|c| {
                    let n: Vec<usize> = g.elements().filter(|&x| g.commute(x, c.representative)).collect();
                    let mut seen = vec![false; g.order()];
                    let mut count = 0;
                    for &x in &n {
                        if !seen[x] {
                            count += 1;
                            for &y in &n {
                                seen[g.conjugate(y, x)] = true;
                            }
                        }
                    }
                    count
                })
                .sum();
            let cat = anyon_catalog(&g, 42).unwrap();
            assert_eq!(sector_count(&cat), expected, "{name}");
            assert_eq!(cat.total_dimension_squared(), g.order() * g.order());
            assert_eq!(cat.qdims()[0], 1);
        }
        assert_eq!(sector_count(&catalog("S3")), 8);
        assert_eq!(sector_count(&catalog("D4")), 22);
        assert_eq!(sector_count(&catalog("Q8")), 22);
    }

    #[test]
    fn s3_quantum_dimensions() {
        let mut d = catalog("S3").qdims().to_vec();
        d.sort_unstable();
        assert_eq!(d, vec![1, 1, 2, 2, 2, 2, 3, 3]);
    }

    #[test]
    fn z2_double_characters() {
        let cat = catalog("Z2");
        // label 3 = (class {1}, sign irrep)
        assert_eq!(cat.labels()[3], AnyonLabel { class_index: 1, irrep_index: 1 });
        for g in 0..2 {
            let v = double_character(&cat, 3, g, 1).unwrap();
            let expected = if g == 1 { -1.0 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
        let s3 = catalog("S3");
        for l in 0..s3.len() {
            for g in s3.group().elements() {
                let v = double_character(&s3, l, g, 0).unwrap();
                let in_class = s3.classes()[s3.labels()[l].class_index].contains(g);
                let expected = if in_class { s3.irrep_degree(l) as f64 } else { 0.0 };
                assert!((v.re - expected).abs() < 1e-9 && v.im.abs() < 1e-9);
            }
        }
        // non-commuting input is rejected
        assert!(double_character(&s3, 0, 1, 2).is_err() || s3.group().commute(1, 2));
    }

    #[test]
    fn toric_code_fusion() {
        let cat = catalog("Z2");
        let n = fusion_rules(&cat).unwrap();
        // labels: 0 = 1, 1 = e (charge), 2 = m (flux), 3 = ε
        assert_eq!(n.get(1, 2, 3), 1);
        assert_eq!((0..4).map(|k| n.get(1, 2, k)).sum::<u32>(), 1);
        for i in 0..4 {
            assert_eq!(n.get(i, i, 0), 1);
        }
    }

    #[test]
    fn s3_fusion_dimensions() {
        let cat = catalog("S3");
        let n = fusion_rules(&cat).unwrap();
        let threes: Vec<usize> = (0..cat.len()).filter(|&l| cat.qdims()[l] == 3).collect();
        assert_eq!(threes.len(), 2);
        let total: usize = (0..cat.len())
            .map(|k| n.get(threes[0], threes[1], k) as usize * cat.qdims()[k])
            .sum();
        assert_eq!(total, 9);
    }

    #[test]
    fn stacked_catalogs() {
        let (z2, s3) = (group("Z2"), group("S3"));
        let p = direct_product(&z2, &s3, 100).unwrap();
        let s = stack_catalogs(&catalog("Z2"), &catalog("S3"), &p).unwrap();
        assert_eq!(s.catalog.len(), 32);
        assert_eq!(s.catalog.qdims().iter().max(), Some(&3));
        let t = group("trivial");
        let p = direct_product(&t, &s3, 100).unwrap();
        let s = stack_catalogs(&catalog("trivial"), &catalog("S3"), &p).unwrap();
        assert_eq!(s.catalog.qdims(), catalog("S3").qdims());
    }

    #[test]
    fn stack_counts() {
        for (a, b, expected) in [("Z2", "Z2", 16), ("Z2", "Z3", 36), ("S3", "Z2", 32)] {
            let (checks, report) = stack_count_check(&group(a), &group(b), 1000, 42).unwrap();
            assert!(checks.iter().all(Check::passed), "{checks:?}");
            assert_eq!(report.product_count, expected);
            assert_eq!(report.bijection.len(), expected);
        }
        assert_eq!(sector_count(&catalog("Z6")), 36);
    }

    #[test]
    fn fusion_factorizes() {
        for (a, b) in [("Z2", "Z2"), ("trivial", "S3"), ("Z2", "Z3")] {
            let checks = fusion_factorization_check(&group(a), &group(b), 1000, 42).unwrap();
            assert!(checks.iter().all(Check::passed), "{checks:?}");
        }
        let k = direct_product(&group("Z2"), &group("Z3"), 100).unwrap().group;
        let checks = fusion_isomorphism_check(&k, &group("Z6"), 42).unwrap();
        assert!(checks.iter().all(Check::passed), "{checks:?}");
    }
}
