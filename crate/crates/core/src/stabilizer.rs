//! Pauli stabilizer states and their region entropies.
//!
//! For a pure stabilizer state on `n` qubits, `S_A = (rank(G|_A) − |A|) ln 2`,
//! where `G|_A` restricts every generator to the qubits of `A` and the rank is
//! taken over GF(2) in the symplectic `(x | z)` representation.

use crate::error::{input, Result};
use crate::lattice::{Boundary, LatticeSpec};

/// A Pauli operator (up to sign) as x and z bit masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pauli {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Pauli {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(64);
        Pauli {
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.x[q / 64] ^= 1 << (q % 64);
        }
        p
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.z[q / 64] ^= 1 << (q % 64);
        }
        p
    }

    pub fn commutes_with(&self, other: &Pauli) -> bool {
        let overlaps: u32 = self
            .x
            .iter()
            .zip(&other.z)
            .chain(self.z.iter().zip(&other.x))
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        overlaps.is_multiple_of(2)
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    generators: Vec<Pauli>,
}

/// Rank over GF(2) of bit rows.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, Vec::len) * 64;
    for bit in 0..width {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & m != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & m != 0 {
                row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

impl StabilizerState {
    /// Generators must commute pairwise and span a group of full rank `n`
    /// (redundant generators are allowed).
    pub fn new(n: usize, generators: Vec<Pauli>) -> Result<Self> {
        let words = n.div_ceil(64);
        if generators.iter().any(|g| g.x.len() != words || g.z.len() != words) {
            return input("generator width does not match the qubit count");
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return input(format!("generators {i} and {j} anticommute"));
                }
            }
        }
        let state = StabilizerState { n, generators };
        let rank = state.restricted_rank(&(0..n).collect::<Vec<_>>());
        if rank != n {
            return input(format!("generators have rank {rank}, need {n} for a pure state"));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Pauli] {
        &self.generators
    }

    fn restricted_rank(&self, region: &[usize]) -> usize {
        let rows = self
            .generators
            .iter()
            .map(|g| {
                let mut row = vec![0u64; (2 * region.len()).div_ceil(64).max(1)];
                for (k, &q) in region.iter().enumerate() {
                    let (w, m) = (q / 64, 1u64 << (q % 64));
                    if g.x[w] & m != 0 {
                        row[(2 * k) / 64] |= 1 << ((2 * k) % 64);
                    }
                    if g.z[w] & m != 0 {
                        row[(2 * k + 1) / 64] |= 1 << ((2 * k + 1) % 64);
                    }
                }
                row
            })
            .collect();
        gf2_rank(rows)
    }

    /// Entropy of `region` in nats.
    pub fn entropy(&self, region: &[usize]) -> Result<f64> {
        let mut r = region.to_vec();
        r.sort_unstable();
        r.dedup();
        if r.len() != region.len() || r.last().is_some_and(|&q| q >= self.n) {
            return input("region has repeated or out-of-range qubits");
        }
        let rank = self.restricted_rank(&r);
        Ok((rank - r.len()) as f64 * std::f64::consts::LN_2)
    }
}

/// The toric code state stabilized by every star `⊗σ^x` and plaquette `⊗σ^z`.
///
/// On a torus the two Z-type loops along the bottom row of horizontal edges
/// and the left column of vertical edges fix the logical sector; these are the
/// loops the projected all-`|0⟩` state satisfies.
pub fn toric_code(lat: &LatticeSpec) -> Result<StabilizerState> {
    let n = lat.num_edges();
    let mut gens: Vec<Pauli> = (0..lat.num_vertices()).map(|v| Pauli::x_on(n, &lat.star_edges(v))).collect();
    gens.extend((0..lat.num_faces()).map(|f| Pauli::z_on(n, &lat.face_edges(f))));
    if lat.boundary() == Boundary::Torus {
        let row: Vec<usize> = (0..lat.lx()).collect();
        let column: Vec<usize> = (0..lat.ly()).map(|y| lat.lx() * lat.ly() + y * lat.lx()).collect();
        gens.push(Pauli::z_on(n, &row));
        gens.push(Pauli::z_on(n, &column));
    }
    StabilizerState::new(n, gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn rank_basics() {
        assert_eq!(gf2_rank(vec![vec![0b011], vec![0b110], vec![0b101]]), 2);
        assert_eq!(gf2_rank(vec![vec![1], vec![2], vec![4]]), 3);
        assert_eq!(gf2_rank(vec![vec![0]]), 0);
    }

    #[test]
    fn bell_pair() {
        let s = StabilizerState::new(2, vec![Pauli::x_on(2, &[0, 1]), Pauli::z_on(2, &[0, 1])]).unwrap();
        assert!((s.entropy(&[0]).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(s.entropy(&[]).unwrap(), 0.0);
        assert_eq!(s.entropy(&[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(StabilizerState::new(1, vec![Pauli::x_on(1, &[0]), Pauli::z_on(1, &[0])]).is_err());
        assert!(StabilizerState::new(2, vec![Pauli::z_on(2, &[0])]).is_err());
    }

    #[test]
    fn toric_code_is_pure_and_locally_mixed() {
        for lat in [
            LatticeSpec::torus(2, 2).unwrap(),
            LatticeSpec::torus(4, 4).unwrap(),
            LatticeSpec::open(2, 3).unwrap(),
        ] {
            let s = toric_code(&lat).unwrap();
            assert!((s.entropy(&[0]).unwrap() - LN_2).abs() < 1e-15);
            let all: Vec<usize> = (0..lat.num_edges()).collect();
            assert_eq!(s.entropy(&all).unwrap(), 0.0);
        }
    }

    #[test]
    fn block_entropies_follow_the_area_law() {
        let lat = LatticeSpec::torus(6, 6).unwrap();
        let s = toric_code(&lat).unwrap();
        for (a, b) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)] {
            let r = lat.closed_block(1, 1, a, b).unwrap();
            let expected = (2 * (a + b) - 1) as f64 * LN_2;
            assert!((s.entropy(&r).unwrap() - expected).abs() < 1e-12, "{a}x{b}");
        }
    }
}
