//! Spin-1/2 chain: Hilbert space layout, XY Hamiltonian, collective Lindblad
//! operators and single-excitation basis states.
//!
//! Basis states are indexed by the binary string of spin values with site 1 as
//! the most significant bit; bit value 1 is an up spin.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Chain length and nearest-neighbour couplings `J_{i,i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    couplings: Vec<f64>,
}

impl ChainSpec {
    pub fn new(n_sites: usize, couplings: Vec<f64>) -> Result<Self> {
        if n_sites < 2 || couplings.len() + 1 != n_sites {
            return Err(Error::InvalidChain { n_sites, n_couplings: couplings.len() });
        }
        if let Some(&bad) = couplings.iter().find(|j| !j.is_finite()) {
            return Err(Error::InvalidParameter { name: "coupling", value: bad });
        }
        Ok(Self { n_sites, couplings })
    }

    /// Chain with the perfect-state-transfer layout.
    pub fn pst(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, pst_couplings(n_sites)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Collective system operator coupling the chain to the bath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LindbladKind {
    /// `Σ σ⁻`, dissipation.
    CollectiveLowering,
    /// `Σ σˣ`, spin-boson coupling.
    CollectiveSigmaX,
    /// `Σ σᶻ`, dephasing.
    CollectiveSigmaZ,
}

/// `J_{i,i+1} = −√(i(N−i))` for `i = 1..N−1`.
pub fn pst_couplings(n_sites: usize) -> Result<Vec<f64>> {
    if n_sites < 2 {
        return Err(Error::InvalidChain { n_sites, n_couplings: 0 });
    }
    Ok((1..n_sites).map(|i| -libm::sqrt((i * (n_sites - i)) as f64)).collect())
}

/// Bit mask of a 1-based site in a basis index.
#[inline]
pub(crate) fn site_mask(site: usize, n_sites: usize) -> usize {
    1 << (n_sites - site)
}

/// `H = Σ J_{i,i+1} (σˣσˣ + σʸσʸ)`, real in the computational basis.
pub fn build_xy_hamiltonian(spec: &ChainSpec) -> CMatrix {
    let n = spec.n_sites;
    let mut h = CMatrix::zeros(spec.dim());
    for state in 0..spec.dim() {
        for (bond, &j) in spec.couplings.iter().enumerate() {
            let pair = site_mask(bond + 1, n) | site_mask(bond + 2, n);
            let bits = state & pair;
            // σˣσˣ + σʸσʸ = 2(σ⁺σ⁻ + σ⁻σ⁺): hops an excitation across the bond.
            if bits != 0 && bits != pair {
                h[(state ^ pair, state)] += C64::new(2.0 * j, 0.0);
            }
        }
    }
    h
}

/// `Σ_i O_i` for the single-site operator selected by `kind`.
pub fn collective_lindblad(kind: LindbladKind, n_sites: usize) -> Result<CMatrix> {
    if n_sites < 2 {
        return Err(Error::InvalidChain { n_sites, n_couplings: 0 });
    }
    let dim = 1usize << n_sites;
    let mut l = CMatrix::zeros(dim);
    for state in 0..dim {
        for site in 1..=n_sites {
            let mask = site_mask(site, n_sites);
            let up = state & mask != 0;
            match kind {
                LindbladKind::CollectiveLowering if up => l[(state ^ mask, state)] += ONE,
                LindbladKind::CollectiveLowering => {}
                LindbladKind::CollectiveSigmaX => l[(state ^ mask, state)] += ONE,
                LindbladKind::CollectiveSigmaZ => {
                    l[(state, state)] += if up { -ONE } else { ONE };
                }
            }
        }
    }
    Ok(l)
}

/// Total `Σ σᶻ` with the same sign convention as [`LindbladKind::CollectiveSigmaZ`].
pub fn total_sigma_z(n_sites: usize) -> Result<CMatrix> {
    collective_lindblad(LindbladKind::CollectiveSigmaZ, n_sites)
}

/// Computational-basis vector with a single up spin at `index` (1-based).
pub fn basis_state(index: usize, n_sites: usize) -> Result<Vec<C64>> {
    let slot = basis_index(index, n_sites)?;
    let mut v = vec![ZERO; 1 << n_sites];
    v[slot] = ONE;
    Ok(v)
}

/// Position of [`basis_state`]'s nonzero entry.
pub fn basis_index(index: usize, n_sites: usize) -> Result<usize> {
    if index == 0 || index > n_sites {
        return Err(Error::InvalidSite { index, n_sites });
    }
    Ok(site_mask(index, n_sites))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pst_layout_values() {
        let j = pst_couplings(6).unwrap();
        let expected = [-2.23607, -2.82843, -3.0, -2.82843, -2.23607];
        for (a, b) in j.iter().zip(expected) {
            assert!((a - b).abs() < 1e-5);
        }
        assert_eq!(pst_couplings(2).unwrap(), vec![-1.0]);
        let j4 = pst_couplings(4).unwrap();
        assert!((j4[0] + 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(j4[1], -2.0);
        assert!((j4[2] + 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pst_rejects_short_chains() {
        assert!(matches!(pst_couplings(1), Err(Error::InvalidChain { .. })));
        assert!(matches!(pst_couplings(0), Err(Error::InvalidChain { .. })));
    }

    #[test]
    fn chain_spec_checks_length() {
        assert!(ChainSpec::new(3, vec![1.0]).is_err());
        assert!(ChainSpec::new(1, vec![]).is_err());
        assert!(ChainSpec::new(3, vec![1.0, f64::NAN]).is_err());
        assert_eq!(ChainSpec::new(3, vec![1.0, 2.0]).unwrap().dim(), 8);
    }

    #[test]
    fn two_site_hamiltonian() {
        let h = build_xy_hamiltonian(&ChainSpec::new(2, vec![0.7]).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0b01, 0b10) || (i, j) == (0b10, 0b01) { 1.4 } else { 0.0 };
                assert_eq!(h[(i, j)], C64::new(expected, 0.0), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn lowering_two_sites() {
        let l = collective_lindblad(LindbladKind::CollectiveLowering, 2).unwrap();
        // columns are inputs, rows outputs
        let column = |c: usize| -> Vec<C64> { (0..4).map(|r| l[(r, c)]).collect() };
        assert_eq!(column(0b00), vec![ZERO; 4]);
        assert_eq!(column(0b10), vec![ONE, ZERO, ZERO, ZERO]);
        assert_eq!(column(0b01), vec![ONE, ZERO, ZERO, ZERO]);
        assert_eq!(column(0b11), vec![ZERO, ONE, ONE, ZERO]);
    }

    #[test]
    fn sigma_x_is_lowering_plus_raising() {
        let l = collective_lindblad(LindbladKind::CollectiveLowering, 2).unwrap();
        let x = collective_lindblad(LindbladKind::CollectiveSigmaX, 2).unwrap();
        assert_eq!(x, &l + &l.adjoint());
    }

    #[test]
    fn sigma_z_diagonal_counts_spins() {
        for n in 2..=5 {
            let z = collective_lindblad(LindbladKind::CollectiveSigmaZ, n).unwrap();
            for s in 0..(1usize << n) {
                let ups = s.count_ones() as f64;
                assert_eq!(z[(s, s)], C64::new(n as f64 - 2.0 * ups, 0.0));
            }
            assert_eq!(z.hermitian_defect(), 0.0);
            let off: f64 = (0..1usize << n)
                .flat_map(|i| (0..1usize << n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| z[(i, j)].norm())
                .sum();
            assert_eq!(off, 0.0);
        }
    }

    #[test]
    fn basis_states() {
        let first = basis_state(1, 3).unwrap();
        assert_eq!(first[0b100], ONE);
        let last = basis_state(3, 3).unwrap();
        assert_eq!(last[0b001], ONE);
        for v in [first, last] {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert_eq!(norm, 1.0);
        }
        assert!(matches!(basis_state(0, 3), Err(Error::InvalidSite { .. })));
        assert!(matches!(basis_state(4, 3), Err(Error::InvalidSite { index: 4, n_sites: 3 })));
    }
}
