//! Regulator constants of integral G-lattices.
//!
//! For a relation Θ = Σ Hᵢ − Σ Hⱼ′ and a G-invariant nondegenerate pairing on
//! a lattice Γ, the regulator constant is
//!
//! ```text
//!   C_Θ(Γ) = ∏ᵢ det(⟨,⟩/|Hᵢ| on Γ^Hᵢ) / ∏ⱼ det(⟨,⟩/|Hⱼ′| on Γ^Hⱼ′)
//! ```
//!
//! with each determinant taken on a Z-basis of the fixed sublattice. All
//! arithmetic is exact.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{CosetSpace, GRelation, GroupTable, Subgroup};
use crate::linalg::{det_bareiss, det_rational, kernel_basis, IntMatrix};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// A Z-free module with a left G-action, stored as one integer matrix per
/// group element.
#[derive(Clone, Debug)]
pub struct IntegralLattice {
    rank: usize,
    action: Vec<IntMatrix>,
}

impl IntegralLattice {
    /// Extends generator matrices to the whole group and checks that the
    /// result is a homomorphism into GL_n(Z).
    pub fn from_generators(g: &GroupTable, gen_matrices: &[IntMatrix]) -> Result<Self> {
        if gen_matrices.len() != g.generators().len() {
            return Err(Error::invalid("one matrix per group generator is required"));
        }
        let rank = gen_matrices.first().map_or(0, IntMatrix::rows);
        if gen_matrices.iter().any(|m| m.rows() != rank || m.cols() != rank) {
            return Err(Error::invalid("action matrices must be square of equal size"));
        }
        for m in gen_matrices {
            if det_bareiss(m).abs() != BigInt::one() {
                return Err(Error::invalid("action matrix is not invertible over Z"));
            }
        }
        if g.order() == 1 {
            return Self::trivial_of_rank(g, rank);
        }
        let mut action: Vec<Option<IntMatrix>> = vec![None; g.order()];
        action[0] = Some(IntMatrix::identity(rank));
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            let ax = action[x].clone().expect("queued elements are assigned");
            for (&s, m) in g.generators().iter().zip(gen_matrices) {
                let y = g.mul(x, s);
                if action[y].is_none() {
                    action[y] = Some(ax.mul(m));
                    queue.push_back(y);
                }
            }
        }
        let action: Vec<IntMatrix> = action
            .into_iter()
            .map(|m| m.ok_or_else(|| Error::invalid("generators do not reach every element")))
            .collect::<Result<_>>()?;
        for x in 0..g.order() {
            for (&s, m) in g.generators().iter().zip(gen_matrices) {
                if action[g.mul(x, s)] != action[x].mul(m) {
                    return Err(Error::invalid(
                        "generator matrices violate the group presentation",
                    ));
                }
            }
        }
        Ok(IntegralLattice { rank, action })
    }

    fn trivial_of_rank(g: &GroupTable, rank: usize) -> Result<Self> {
        Ok(IntegralLattice {
            rank,
            action: vec![IntMatrix::identity(rank); g.order()],
        })
    }

    /// Z with trivial action.
    pub fn trivial(g: &GroupTable) -> Self {
        Self::trivial_of_rank(g, 1).expect("identity action is valid")
    }

    /// The permutation lattice Z[G/H].
    pub fn permutation(g: &GroupTable, h: &Subgroup) -> Self {
        let cosets = CosetSpace::new(g, h);
        let n = cosets.len();
        let action = (0..g.order())
            .map(|x| {
                let mut m = IntMatrix::zeros(n, n);
                for i in 0..n {
                    m.set(cosets.act(g, x, i), i, BigInt::one());
                }
                m
            })
            .collect();
        IntegralLattice { rank: n, action }
    }

    /// The regular lattice Z[G].
    pub fn regular(g: &GroupTable) -> Self {
        Self::permutation(g, &Subgroup::trivial())
    }

    /// Rank-one lattice where each generator acts by the given sign.
    pub fn one_dimensional(g: &GroupTable, signs: &[i64]) -> Result<Self> {
        let gens: Vec<IntMatrix> = signs.iter().map(|&s| IntMatrix::from_i64(&[vec![s]])).collect();
        Self::from_generators(g, &gens)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn group_order(&self) -> usize {
        self.action.len()
    }

    pub fn action(&self, x: usize) -> &IntMatrix {
        &self.action[x]
    }

    pub fn direct_sum(&self, other: &IntegralLattice) -> IntegralLattice {
        assert_eq!(self.group_order(), other.group_order(), "lattices over different groups");
        IntegralLattice {
            rank: self.rank + other.rank,
            action: self
                .action
                .iter()
                .zip(&other.action)
                .map(|(a, b)| a.direct_sum(b))
                .collect(),
        }
    }

    /// The same module in the basis given by the columns of `u`
    /// (`u_inv` must be its integer inverse): A ↦ u⁻¹ A u.
    pub fn change_basis(&self, u: &IntMatrix, u_inv: &IntMatrix) -> Result<IntegralLattice> {
        if !u.mul(u_inv).is_identity() {
            return Err(Error::invalid("basis change is not unimodular"));
        }
        Ok(IntegralLattice {
            rank: self.rank,
            action: self.action.iter().map(|a| u_inv.mul(a).mul(u)).collect(),
        })
    }
}

/// A symmetric, G-invariant, nondegenerate rational Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingMatrix {
    gram: RatMatrix,
}

impl PairingMatrix {
    pub fn new(lattice: &IntegralLattice, gram: RatMatrix) -> Result<Self> {
        let n = lattice.rank();
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("gram matrix has the wrong shape"));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::invalid("gram matrix is not symmetric"));
                }
            }
        }
        if det_rational(&gram).is_zero() {
            return Err(Error::DegeneratePairing("gram matrix is singular".into()));
        }
        for a in &lattice.action {
            let a = a.to_rational();
            if congruence(&a, &gram) != gram {
                return Err(Error::invalid("pairing is not G-invariant"));
            }
        }
        Ok(PairingMatrix { gram })
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn scale(&self, k: &BigRational) -> PairingMatrix {
        PairingMatrix {
            gram: self
                .gram
                .iter()
                .map(|r| r.iter().map(|x| x * k).collect())
                .collect(),
        }
    }
}

/// Xᵀ M X, skipping the zero entries of X (actions and fixed bases are
/// sparse).
fn congruence(x: &RatMatrix, m: &RatMatrix) -> RatMatrix {
    let rows = m.len();
    let cols = x.first().map_or(0, Vec::len);
    let nonzero: Vec<(usize, usize)> = (0..rows)
        .flat_map(|k| (0..cols).map(move |j| (k, j)))
        .filter(|&(k, j)| !x[k][j].is_zero())
        .collect();
    let mut mx = vec![vec![BigRational::zero(); cols]; rows];
    for &(k, j) in &nonzero {
        let xkj = &x[k][j];
        for i in 0..rows {
            if !m[i][k].is_zero() {
                mx[i][j] += if xkj.is_one() { m[i][k].clone() } else { &m[i][k] * xkj };
            }
        }
    }
    let mut out = vec![vec![BigRational::zero(); cols]; cols];
    for &(k, i) in &nonzero {
        let xki = &x[k][i];
        for j in 0..cols {
            if !mx[k][j].is_zero() {
                out[i][j] += if xki.is_one() { mx[k][j].clone() } else { xki * &mx[k][j] };
            }
        }
    }
    out
}

fn sum_over_group(lattice: &IntegralLattice, s: &RatMatrix) -> RatMatrix {
    let n = lattice.rank();
    let mut total = vec![vec![BigRational::zero(); n]; n];
    for a in &lattice.action {
        let t = congruence(&a.to_rational(), s);
        for (row, trow) in total.iter_mut().zip(t) {
            for (x, y) in row.iter_mut().zip(trow) {
                *x += y;
            }
        }
    }
    total
}

fn check_group(lattice: &IntegralLattice, g: &GroupTable) -> Result<()> {
    if lattice.group_order() != g.order() {
        return Err(Error::invalid("lattice and group have different orders"));
    }
    Ok(())
}

/// Σ_g A_gᵀ A_g.
pub fn invariant_pairing(lattice: &IntegralLattice, g: &GroupTable) -> Result<PairingMatrix> {
    check_group(lattice, g)?;
    let n = lattice.rank();
    let id: RatMatrix = IntMatrix::identity(n).to_rational();
    PairingMatrix::new(lattice, sum_over_group(lattice, &id))
}

/// gram + Σ_g A_gᵀ S A_g, with `s` symmetric.
pub fn perturbed_pairing(
    lattice: &IntegralLattice,
    base: &PairingMatrix,
    s: &IntMatrix,
) -> Result<PairingMatrix> {
    let extra = sum_over_group(lattice, &s.to_rational());
    let gram = base
        .gram
        .iter()
        .zip(extra)
        .map(|(r, e)| r.iter().zip(e).map(|(x, y)| x + y).collect())
        .collect();
    PairingMatrix::new(lattice, gram)
}

/// A random positive-definite invariant pairing: the averaged pairing plus
/// Σ A_gᵀ (BᵀB) A_g for a random small B, scaled by a random positive
/// rational.
pub fn random_invariant_pairing<R: Rng>(
    lattice: &IntegralLattice,
    g: &GroupTable,
    rng: &mut R,
) -> Result<PairingMatrix> {
    let base = invariant_pairing(lattice, g)?;
    let n = lattice.rank();
    let b = IntMatrix::from_rows(
        (0..n)
            .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect())
            .collect(),
        n,
    );
    let s = b.transpose().mul(&b);
    let scale = BigRational::new(rng.gen_range(1i64..=9).into(), rng.gen_range(1i64..=9).into());
    Ok(perturbed_pairing(lattice, &base, &s)?.scale(&scale))
}

/// Saturated basis of Γ^H, one integer column vector per entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedSublattice {
    pub basis: Vec<Vec<BigInt>>,
}

impl FixedSublattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors as the columns of a matrix.
    pub fn matrix(&self, ambient_rank: usize) -> IntMatrix {
        IntMatrix::from_rows(self.basis.clone(), ambient_rank).transpose()
    }

    /// Replaces the basis by its image under a unimodular change (rows of
    /// `u` give the new vectors as combinations of the old ones).
    pub fn rebased(&self, u: &IntMatrix) -> FixedSublattice {
        let dim = self.basis.first().map_or(0, Vec::len);
        let old = IntMatrix::from_rows(self.basis.clone(), dim);
        FixedSublattice {
            basis: u.mul(&old).to_rows(),
        }
    }
}

/// Γ^H as the saturated kernel of the stacked (A_h − I) over generators of H.
pub fn fixed_lattice(lattice: &IntegralLattice, g: &GroupTable, h: &Subgroup) -> FixedSublattice {
    let n = lattice.rank();
    let id = IntMatrix::identity(n);
    let mut stacked = IntMatrix::zeros(0, n);
    for x in h.generators(g) {
        stacked = stacked.vstack(&lattice.action(x).sub(&id));
    }
    FixedSublattice {
        basis: kernel_basis(&stacked),
    }
}

/// det((1/|H|)⟨,⟩) on the given basis of Γ^H.
pub fn fixed_determinant(
    pairing: &PairingMatrix,
    fixed: &FixedSublattice,
    h_order: usize,
) -> BigRational {
    let x = fixed.matrix(pairing.rank()).to_rational();
    let scale = BigRational::new(BigInt::one(), BigInt::from(h_order));
    let m: RatMatrix = congruence(&x, &pairing.gram)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v * &scale).collect())
        .collect();
    det_rational(&m)
}

/// C_Θ(Γ) computed on saturated fixed bases.
pub fn regulator_constant(
    g: &GroupTable,
    theta: &GRelation,
    lattice: &IntegralLattice,
    pairing: &PairingMatrix,
) -> Result<BigRational> {
    check_group(lattice, g)?;
    let bases: Vec<FixedSublattice> = theta
        .terms()
        .iter()
        .map(|t| fixed_lattice(lattice, g, &t.class.representative))
        .collect();
    regulator_constant_in_bases(theta, pairing, &bases)
}

/// C_Θ(Γ) with caller-supplied bases of the fixed sublattices, aligned with
/// `theta.terms()`.
pub fn regulator_constant_in_bases(
    theta: &GRelation,
    pairing: &PairingMatrix,
    bases: &[FixedSublattice],
) -> Result<BigRational> {
    if bases.len() != theta.terms().len() {
        return Err(Error::invalid("one fixed basis per relation term is required"));
    }
    let mut value = BigRational::one();
    for (term, fixed) in theta.terms().iter().zip(bases) {
        let det = fixed_determinant(pairing, fixed, term.class.order());
        if det.is_zero() {
            return Err(Error::DegeneratePairing(format!(
                "pairing vanishes on the fixed sublattice of {}",
                term.class.label
            )));
        }
        let k = term.coefficient.unsigned_abs() as i32;
        let factor = num_traits::pow::Pow::pow(&det, k);
        if term.coefficient > 0 {
            value *= factor;
        } else {
            value /= factor;
        }
    }
    Ok(value)
}

/// Z, every Z[G/H] over subgroup class representatives, and Z[G].
pub fn lattice_library(g: &GroupTable) -> Vec<(String, IntegralLattice)> {
    let mut lib = vec![("Z".to_string(), IntegralLattice::trivial(g))];
    for c in crate::groups::subgroup_classes(g) {
        lib.push((
            format!("Z[G/{}]", c.label),
            IntegralLattice::permutation(g, &c.representative),
        ));
    }
    lib.push(("Z[G]".to_string(), IntegralLattice::regular(g)));
    lib
}

/// C_Θ(Γ) under the standard invariant pairing followed by `count` random
/// invariant pairings drawn from a ChaCha8 stream seeded with `seed`.
pub fn sampled_regulator_constants(
    g: &GroupTable,
    theta: &GRelation,
    lattice: &IntegralLattice,
    count: usize,
    seed: u64,
) -> Result<Vec<BigRational>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![regulator_constant(g, theta, lattice, &invariant_pairing(lattice, g)?)?];
    for _ in 0..count {
        let pairing = random_invariant_pairing(lattice, g, &mut rng)?;
        out.push(regulator_constant(g, theta, lattice, &pairing)?);
    }
    Ok(out)
}

/// A random unimodular matrix with its inverse, as a product of elementary
/// operations.
pub fn random_unimodular<R: Rng>(n: usize, steps: usize, rng: &mut R) -> (IntMatrix, IntMatrix) {
    let mut u = IntMatrix::identity(n);
    let mut u_inv = IntMatrix::identity(n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            let neg = IntMatrix::from_i64(&[vec![-1]]);
            return (neg.clone(), neg);
        }
        return (u, u_inv);
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let k: i64 = rng.gen_range(-2..=2);
        // E = I + k e_ij, E⁻¹ = I − k e_ij
        let mut e = IntMatrix::identity(n);
        e.set(i, j, BigInt::from(k));
        let mut e_inv = IntMatrix::identity(n);
        e_inv.set(i, j, BigInt::from(-k));
        u = u.mul(&e);
        u_inv = e_inv.mul(&u_inv);
    }
    (u, u_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{dihedral_group, subgroup_classes};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn invariant_pairing_examples() {
        let g = dihedral_group(3).unwrap();
        let triv = invariant_pairing(&IntegralLattice::trivial(&g), &g).unwrap();
        assert_eq!(triv.gram(), &vec![vec![rat(6, 1)]]);
        let reg = invariant_pairing(&IntegralLattice::regular(&g), &g).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(reg.gram()[i][j], rat(if i == j { 6 } else { 0 }, 1));
            }
        }
        let zero = IntegralLattice::from_generators(
            &g,
            &[IntMatrix::zeros(0, 0), IntMatrix::zeros(0, 0)],
        )
        .unwrap();
        assert_eq!(invariant_pairing(&zero, &g).unwrap().rank(), 0);
    }

    #[test]
    fn fixed_lattice_examples() {
        let g = dihedral_group(3).unwrap();
        let c = subgroup_classes(&g);
        let reg = IntegralLattice::regular(&g);
        assert_eq!(fixed_lattice(&reg, &g, &Subgroup::trivial()).rank(), 6);
        assert_eq!(fixed_lattice(&reg, &g, &c[2].representative).rank(), 2);
        let perm = IntegralLattice::permutation(&g, &c[1].representative);
        let top = fixed_lattice(&perm, &g, &c[3].representative);
        assert_eq!(top.basis, vec![vec![BigInt::one(); 3]]);
    }

    #[test]
    fn presentation_is_enforced() {
        let g = dihedral_group(3).unwrap();
        // a acting by -1 violates a^3 = 1
        assert!(IntegralLattice::one_dimensional(&g, &[-1, 1]).is_err());
        assert!(IntegralLattice::one_dimensional(&g, &[1, -1]).is_ok());
        let not_unimodular = IntMatrix::from_i64(&[vec![2]]);
        assert!(IntegralLattice::from_generators(&g, &[not_unimodular.clone(), not_unimodular])
            .is_err());
    }

    #[test]
    fn trivial_lattice_gives_inverse_p() {
        for p in [3u64, 5, 7, 11] {
            let g = dihedral_group(p).unwrap();
            let theta = GRelation::dihedral(&g).unwrap();
            let l = IntegralLattice::trivial(&g);
            let pairing = invariant_pairing(&l, &g).unwrap();
            let c = regulator_constant(&g, &theta, &l, &pairing).unwrap();
            assert_eq!(c, rat(1, p as i64), "p = {p}");
        }
        let g = dihedral_group(3).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let l = IntegralLattice::trivial(&g);
        let l2 = l.direct_sum(&l);
        let pairing = invariant_pairing(&l2, &g).unwrap();
        assert_eq!(regulator_constant(&g, &theta, &l2, &pairing).unwrap(), rat(1, 9));
    }

    #[test]
    fn sign_lattice_and_independence() {
        let g = dihedral_group(5).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let sign = IntegralLattice::one_dimensional(&g, &[1, -1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = regulator_constant(&g, &theta, &sign, &invariant_pairing(&sign, &g).unwrap())
            .unwrap();
        for _ in 0..5 {
            let p = random_invariant_pairing(&sign, &g, &mut rng).unwrap();
            assert_eq!(regulator_constant(&g, &theta, &sign, &p).unwrap(), base);
        }
    }

    #[test]
    fn non_invariant_pairing_rejected() {
        let g = dihedral_group(3).unwrap();
        let l = IntegralLattice::permutation(&g, &subgroup_classes(&g)[1].representative);
        let mut gram = IntMatrix::identity(3).to_rational();
        gram[0][0] = rat(2, 1);
        assert!(PairingMatrix::new(&l, gram).is_err());
    }

    #[test]
    fn degenerate_pairing_rejected() {
        let g = dihedral_group(3).unwrap();
        let l = IntegralLattice::trivial(&g).direct_sum(&IntegralLattice::trivial(&g));
        let gram = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]];
        assert!(matches!(PairingMatrix::new(&l, gram), Err(Error::DegeneratePairing(_))));
    }

    #[test]
    fn basis_changes_do_not_matter() {
        let g = dihedral_group(3).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let l = IntegralLattice::regular(&g);
        let pairing = invariant_pairing(&l, &g).unwrap();
        let base = regulator_constant(&g, &theta, &l, &pairing).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bases: Vec<FixedSublattice> = theta
            .terms()
            .iter()
            .map(|t| {
                let f = fixed_lattice(&l, &g, &t.class.representative);
                let (u, _) = random_unimodular(f.rank(), 8, &mut rng);
                f.rebased(&u)
            })
            .collect();
        assert_eq!(regulator_constant_in_bases(&theta, &pairing, &bases).unwrap(), base);

        // the whole lattice in another basis
        let (u, u_inv) = random_unimodular(6, 10, &mut rng);
        let l2 = l.change_basis(&u, &u_inv).unwrap();
        let p2 = invariant_pairing(&l2, &g).unwrap();
        assert_eq!(regulator_constant(&g, &theta, &l2, &p2).unwrap(), base);
    }
}
