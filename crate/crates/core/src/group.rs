//! Finite groups as explicit multiplication tables.
//!
//! Elements are the indices `0..order` and index `0` is always the identity.
//! Every later computation (classes, centralizers, characters, lattice
//! operators) reads products straight out of the table.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Largest group built from generators or tables unless the caller says otherwise.
pub const DEFAULT_GROUP_CAP: usize = 2000;

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order)
    }
}

/// How a group is requested on the command line or in JSON input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Name { name: String },
    Generators { generators: Vec<Vec<usize>> },
    Table { table: Vec<Vec<usize>> },
}

impl GroupSpec {
    pub fn named(name: impl Into<String>) -> Self {
        GroupSpec::Name { name: name.into() }
    }
}

/// Build a validated group from a spec, refusing anything larger than `cap`.
///
/// Names understood: `trivial`, `Zn`, `Sn`, `Dn` (dihedral of order `2n`),
/// `Q8`, and products written `AxB` (e.g. `Z2xS3`).
pub fn build_group(spec: &GroupSpec, cap: usize) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Name { name } => named_group(name, cap),
        GroupSpec::Generators { generators } => {
            FiniteGroup::from_permutations("generated", generators, cap)
        }
        GroupSpec::Table { table } => {
            if table.len() > cap {
                return Err(Error::CapExceeded {
                    what: "group table",
                    requested: table.len(),
                    cap,
                });
            }
            FiniteGroup::from_table("table", table)
        }
    }
}

fn named_group(name: &str, cap: usize) -> Result<FiniteGroup> {
    let trimmed = name.trim();
    if trimmed.contains(['x', '×']) && !trimmed.eq_ignore_ascii_case("trivial") {
        let mut parts = trimmed.split(['x', '×']).filter(|p| !p.is_empty());
        let first = parts
            .next()
            .ok_or_else(|| Error::Input(format!("empty product spec {name:?}")))?;
        let mut acc = named_group(first, cap)?;
        for part in parts {
            let rhs = named_group(part, cap)?;
            acc = direct_product(&acc, &rhs, cap)?.group;
        }
        return Ok(acc);
    }
    if trimmed.eq_ignore_ascii_case("trivial") || trimmed == "1" {
        return Ok(FiniteGroup::trivial());
    }
    if trimmed == "Q8" {
        return Ok(FiniteGroup::quaternion());
    }
    let (kind, digits) = trimmed.split_at(1);
    let n: usize = digits
        .parse()
        .map_err(|_| Error::Input(format!("unknown group name {name:?}")))?;
    if n == 0 {
        return input(format!("group {name:?} has no elements"));
    }
    let order = match kind {
        "Z" | "C" => n,
        "S" => (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k)).unwrap_or(usize::MAX),
        "D" => 2 * n,
        _ => return input(format!("unknown group name {name:?}")),
    };
    if order > cap {
        return Err(Error::CapExceeded {
            what: "group order",
            requested: order,
            cap,
        });
    }
    match kind {
        "Z" | "C" => Ok(FiniteGroup::cyclic(n)),
        "S" => FiniteGroup::symmetric(n, cap),
        _ => Ok(FiniteGroup::dihedral(n)),
    }
}

impl FiniteGroup {
    /// Validate an explicit multiplication table and relabel its identity to `0`.
    pub fn from_table(name: impl Into<String>, table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return input("empty multiplication table");
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return input(format!("row {i} has length {} but the table has {n} rows", row.len()));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return input(format!("row {i} contains out-of-range element {bad}"));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::Input("table has no two-sided identity".into()))?;
        // swap labels `identity` and `0`
        let relabel = |x: usize| {
            if x == identity {
                0
            } else if x == 0 {
                identity
            } else {
                x
            }
        };
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[relabel(a) * n + relabel(b)] = relabel(table[a][b]);
            }
        }
        let group = Self::from_flat(name.into(), n, mul)?;
        group.check_associative()?;
        Ok(group)
    }

    /// Close a set of permutations under composition.
    ///
    /// Composition is `(p * q)(i) = p[q[i]]`. Elements are numbered in
    /// breadth-first order starting from the identity permutation.
    pub fn from_permutations(
        name: impl Into<String>,
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<Self> {
        let degree = generators.first().map_or(0, Vec::len);
        for g in generators {
            if g.len() != degree {
                return input("generators act on different numbers of points");
            }
            let mut seen = vec![false; degree];
            for &p in g {
                if p >= degree || std::mem::replace(&mut seen[p], true) {
                    return input(format!("{g:?} is not a permutation"));
                }
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let p: Vec<usize> = (0..degree).map(|k| elements[i][g[k]]).collect();
                if !index.contains_key(&p) {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded {
                            what: "generator closure",
                            requested: elements.len() + 1,
                            cap,
                        });
                    }
                    index.insert(p.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(p);
                }
            }
        }
        let n = elements.len();
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let p: Vec<usize> = (0..degree).map(|k| elements[a][elements[b][k]]).collect();
                mul[a * n + b] = index[&p];
            }
        }
        Self::from_flat(name.into(), n, mul)
    }

    fn from_flat(name: String, order: usize, mul: Vec<usize>) -> Result<Self> {
        let n = order;
        for a in 0..n {
            if mul[a] != a || mul[a * n] != a {
                return input("index 0 is not a two-sided identity");
            }
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for b in 0..n {
                if std::mem::replace(&mut row_seen[mul[a * n + b]], true) {
                    return input(format!("row {a} is not a permutation (not a Latin square)"));
                }
                if std::mem::replace(&mut col_seen[mul[b * n + a]], true) {
                    return input(format!("column {a} is not a permutation (not a Latin square)"));
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| mul[a * n + b] == 0)
                .ok_or_else(|| Error::Input(format!("element {a} has no inverse")))?;
            if mul[b * n + a] != 0 {
                return input(format!("element {a} has only a one-sided inverse"));
            }
            inv[a] = b;
        }
        Ok(FiniteGroup {
            name,
            order,
            mul,
            inv,
        })
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul(a, b);
                for c in 0..n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return input(format!("table is not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Full structural validation: Latin square, identity, inverses, associativity.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::from_flat(self.name.clone(), self.order, self.mul.clone())?;
        if rebuilt.inv != self.inv {
            return input("stored inverse table is inconsistent");
        }
        self.check_associative()
    }

    pub fn trivial() -> Self {
        FiniteGroup {
            name: "trivial".into(),
            order: 1,
            mul: vec![0],
            inv: vec![0],
        }
    }

    /// Cyclic group `Z_n`; element `k` is the `k`-th power of the generator.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        let mul = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        let inv = (0..n).map(|k| (n - k) % n).collect();
        FiniteGroup {
            name: format!("Z{n}"),
            order: n,
            mul,
            inv,
        }
    }

    /// Dihedral group of order `2n`; element `b*n + k` is `r^k s^b`.
    pub fn dihedral(n: usize) -> Self {
        assert!(n > 0, "dihedral group of order 0");
        let order = 2 * n;
        let decode = |x: usize| (x % n, x / n);
        let mut mul = vec![0; order * order];
        for x in 0..order {
            let (a, b) = decode(x);
            for y in 0..order {
                let (c, d) = decode(y);
                // r^a s^b r^c s^d = r^(a ± c) s^(b + d)
                let k = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                mul[x * order + y] = ((b + d) % 2) * n + k;
            }
        }
        Self::from_flat(format!("D{n}"), order, mul).expect("dihedral table is a group")
    }

    /// Symmetric group on `n` points, generated by a transposition and an `n`-cycle.
    pub fn symmetric(n: usize, cap: usize) -> Result<Self> {
        let mut gens = Vec::new();
        if n >= 2 {
            let mut swap: Vec<usize> = (0..n).collect();
            swap.swap(0, 1);
            gens.push(swap);
            gens.push((0..n).map(|i| (i + 1) % n).collect());
        } else {
            gens.push((0..n).collect());
        }
        let mut g = Self::from_permutations(format!("S{n}"), &gens, cap)?;
        g.name = format!("S{n}");
        Ok(g)
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`; element `2u + s` is `(-1)^s` times unit `u`.
    pub fn quaternion() -> Self {
        // unit products: (sign, unit) for units 1, i, j, k
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let mut mul = vec![0; 64];
        for x in 0..8 {
            for y in 0..8 {
                let (s, u) = UNIT[x / 2][y / 2];
                let sign = (x % 2 + y % 2 + s) % 2;
                mul[x * 8 + y] = 2 * u + sign;
            }
        }
        Self::from_flat("Q8".into(), 8, mul).expect("quaternion table is a group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g x g⁻¹`
    #[inline]
    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.commute(a, b)))
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    /// Conjugacy classes sorted by representative; the representative is the
    /// smallest member, so class `0` is `{identity}`.
    pub fn conjugacy_classes(&self) -> Vec<ConjugacyClass> {
        let mut assigned = vec![false; self.order];
        let mut classes = Vec::new();
        for x in 0..self.order {
            if assigned[x] {
                continue;
            }
            let mut members: Vec<usize> = (0..self.order).map(|g| self.conjugate(g, x)).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                assigned[m] = true;
            }
            classes.push(ConjugacyClass {
                representative: x,
                members,
            });
        }
        classes
    }

    /// Class index of every element, for the classes returned by [`Self::conjugacy_classes`].
    pub fn class_lookup(classes: &[ConjugacyClass], order: usize) -> Vec<usize> {
        let mut lookup = vec![usize::MAX; order];
        for (c, class) in classes.iter().enumerate() {
            for &m in &class.members {
                lookup[m] = c;
            }
        }
        lookup
    }

    pub fn centralizer(&self, x: usize) -> Result<Subgroup> {
        if x >= self.order {
            return input(format!("element {x} is outside a group of order {}", self.order));
        }
        Ok(Subgroup {
            parent_order: self.order,
            members: (0..self.order).filter(|&y| self.commute(x, y)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub members: Vec<usize>,
}

impl ConjugacyClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

/// A subgroup given by its sorted member list inside a parent group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub parent_order: usize,
    pub members: Vec<usize>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, parent: &FiniteGroup) -> bool {
        self.contains(0)
            && self.members.iter().all(|&a| {
                self.contains(parent.inv(a))
                    && self.members.iter().all(|&b| self.contains(parent.mul(a, b)))
            })
    }

    /// The subgroup as a group in its own right. Local index `i` is
    /// `members[i]`; since members are sorted the identity stays at `0`.
    pub fn to_group(&self, parent: &FiniteGroup, name: impl Into<String>) -> Result<FiniteGroup> {
        let n = self.members.len();
        let mut local = HashMap::with_capacity(n);
        for (i, &m) in self.members.iter().enumerate() {
            local.insert(m, i);
        }
        let mut mul = vec![0; n * n];
        for (i, &a) in self.members.iter().enumerate() {
            for (j, &b) in self.members.iter().enumerate() {
                mul[i * n + j] = *local
                    .get(&parent.mul(a, b))
                    .ok_or_else(|| Error::Input("member list is not closed under multiplication".into()))?;
            }
        }
        FiniteGroup::from_flat(name.into(), n, mul)
    }

    /// Local index of a parent element, if it is a member.
    pub fn local_index(&self, x: usize) -> Option<usize> {
        self.members.binary_search(&x).ok()
    }
}

/// `K = G × H` with the pairing `(g, h) ↦ g·|H| + h`.
///
/// This pairing makes `|g × h⟩` the Kronecker product `|g⟩ ⊗ |h⟩`.
#[derive(Clone, Debug)]
pub struct ProductGroup {
    pub group: FiniteGroup,
    pub left: FiniteGroup,
    pub right: FiniteGroup,
}

impl ProductGroup {
    #[inline]
    pub fn pair_index(&self, g: usize, h: usize) -> usize {
        g * self.right.order() + h
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.right.order(), k % self.right.order())
    }
}

pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup, cap: usize) -> Result<ProductGroup> {
    let (ng, nh) = (g.order(), h.order());
    let n = ng * nh;
    if n > cap {
        return Err(Error::CapExceeded {
            what: "direct product order",
            requested: n,
            cap,
        });
    }
    let mut mul = vec![0; n * n];
    for x in 0..n {
        let (a, b) = (x / nh, x % nh);
        for y in 0..n {
            let (c, d) = (y / nh, y % nh);
            mul[x * n + y] = g.mul(a, c) * nh + h.mul(b, d);
        }
    }
    let inv = (0..n)
        .map(|x| g.inv(x / nh) * nh + h.inv(x % nh))
        .collect();
    Ok(ProductGroup {
        group: FiniteGroup {
            name: format!("{}x{}", g.name(), h.name()),
            order: n,
            mul,
            inv,
        },
        left: g.clone(),
        right: h.clone(),
    })
}

/// Brute-force search for an isomorphism `a → b`, returned as an image table.
///
/// Only meant for the tiny groups used in cross-checks: it tries every
/// assignment of images to a greedy generating set.
pub fn find_isomorphism(a: &FiniteGroup, b: &FiniteGroup) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let n = a.order();
    let mut gens = Vec::new();
    let mut span = closure(a, &gens);
    for x in 0..n {
        if !span[x] {
            gens.push(x);
            span = closure(a, &gens);
        }
    }
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let order = a.element_order(g);
            (0..n).filter(|&y| b.element_order(y) == order).collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let mut choice = vec![0usize; gens.len()];
    loop {
        let images: Vec<usize> = choice.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        if let Some(map) = extend_homomorphism(a, b, &gens, &images) {
            return Some(map);
        }
        // odometer over candidate tuples
        let mut k = 0;
        loop {
            if k == choice.len() {
                return None;
            }
            choice[k] += 1;
            if choice[k] < candidates[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn closure(g: &FiniteGroup, gens: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.order()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &s in gens {
            let y = g.mul(x, s);
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

fn extend_homomorphism(
    a: &FiniteGroup,
    b: &FiniteGroup,
    gens: &[usize],
    images: &[usize],
) -> Option<Vec<usize>> {
    let n = a.order();
    let mut map = vec![usize::MAX; n];
    map[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&s, &t) in gens.iter().zip(images) {
            let y = a.mul(x, s);
            let img = b.mul(map[x], t);
            if map[y] == usize::MAX {
                map[y] = img;
                queue.push_back(y);
            } else if map[y] != img {
                return None;
            }
        }
    }
    let mut hit = vec![false; n];
    for &m in &map {
        if m == usize::MAX || std::mem::replace(&mut hit[m], true) {
            return None;
        }
    }
    let hom = (0..n).all(|x| (0..n).all(|y| map[a.mul(x, y)] == b.mul(map[x], map[y])));
    hom.then_some(map)
}
