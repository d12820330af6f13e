//! Finite groups given by multiplication tables: dihedral groups, subgroup
//! classes, permutation characters, relations between permutation
//! representations, double cosets, and the integral isogeny witness attached
//! to a relation.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, smith, IntMatrix};

pub type Elem = usize;

/// A finite group on the element indices `0..order`, identity at index 0.
#[derive(Clone, Debug)]
pub struct GroupTable {
    order: usize,
    mul: Vec<Elem>,
    inv: Vec<Elem>,
    generators: Vec<Elem>,
    generator_labels: Vec<String>,
    dihedral_p: Option<u64>,
    classes: Vec<Vec<Elem>>,
    class_of: Vec<usize>,
}

impl GroupTable {
    /// Validates and wraps a multiplication table (`mul[a * order + b] = ab`).
    pub fn from_table(
        order: usize,
        mul: Vec<Elem>,
        generators: Vec<Elem>,
        generator_labels: Vec<String>,
    ) -> Result<Self> {
        if order == 0 || mul.len() != order * order {
            return Err(Error::InvalidGroup("table size does not match order".into()));
        }
        if mul.iter().any(|&x| x >= order) {
            return Err(Error::InvalidGroup("entry out of range".into()));
        }
        for a in 0..order {
            if mul[a] != a || mul[a * order] != a {
                return Err(Error::InvalidGroup("element 0 is not an identity".into()));
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = mul[a * order + b];
                for c in 0..order {
                    if mul[ab * order + c] != mul[a * order + mul[b * order + c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| mul[a * order + b] == 0) {
                Some(b) if mul[b * order + a] == 0 => inv[a] = b,
                _ => return Err(Error::InvalidGroup(format!("element {a} has no inverse"))),
            }
        }
        if generators.iter().any(|&g| g >= order) || generators.len() != generator_labels.len() {
            return Err(Error::InvalidGroup("bad generator list".into()));
        }
        let mut g = GroupTable {
            order,
            mul,
            inv,
            generators,
            generator_labels,
            dihedral_p: None,
            classes: Vec::new(),
            class_of: Vec::new(),
        };
        if Subgroup::generated(&g, &g.generators).order() != order {
            return Err(Error::InvalidGroup("generators do not generate the group".into()));
        }
        g.compute_classes();
        Ok(g)
    }

    fn compute_classes(&mut self) {
        let mut class_of = vec![usize::MAX; self.order];
        let mut classes = Vec::new();
        for g in 0..self.order {
            if class_of[g] != usize::MAX {
                continue;
            }
            let members: BTreeSet<Elem> = (0..self.order).map(|x| self.conjugate(g, x)).collect();
            for &m in &members {
                class_of[m] = classes.len();
            }
            classes.push(members.into_iter().collect());
        }
        self.classes = classes;
        self.class_of = class_of;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    pub fn identity(&self) -> Elem {
        0
    }

    /// x g x^-1
    pub fn conjugate(&self, g: Elem, x: Elem) -> Elem {
        self.mul(self.mul(x, g), self.inv(x))
    }

    pub fn pow(&self, g: Elem, k: usize) -> Elem {
        (0..k).fold(0, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: Elem) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn generator_labels(&self) -> &[String] {
        &self.generator_labels
    }

    /// The prime p when this table came from [`dihedral_group`].
    pub fn dihedral_parameter(&self) -> Option<u64> {
        self.dihedral_p
    }

    pub fn conjugacy_classes(&self) -> &[Vec<Elem>] {
        &self.classes
    }

    pub fn class_of(&self, g: Elem) -> usize {
        self.class_of[g]
    }

    pub fn centralizer_order(&self, g: Elem) -> usize {
        (0..self.order).filter(|&x| self.mul(x, g) == self.mul(g, x)).count()
    }

    /// Human-readable element name (`a^i b^j` for dihedral tables).
    pub fn element_name(&self, g: Elem) -> String {
        match self.dihedral_p {
            Some(p) => {
                let p = p as usize;
                let (i, j) = (g % p, g / p);
                match (i, j) {
                    (0, 0) => "1".into(),
                    (0, 1) => "b".into(),
                    (1, 0) => "a".into(),
                    (1, 1) => "ab".into(),
                    (i, 0) => format!("a^{i}"),
                    (i, _) => format!("a^{i}b"),
                }
            }
            None => format!("g{g}"),
        }
    }
}

/// The dihedral group of order 2p, presented as <a, b : a^p = b^2 = (ab)^2 = 1>.
///
/// Element `i + p*j` is `a^i b^j`; multiplication uses `b a = a^-1 b`.
pub fn dihedral_group(p: u64) -> Result<GroupTable> {
    if p < 3 || !is_prime(p) {
        return Err(Error::invalid(format!("dihedral parameter must be an odd prime, got {p}")));
    }
    let n = p as usize;
    let order = 2 * n;
    let mut mul = vec![0; order * order];
    for j in 0..2 {
        for i in 0..n {
            for l in 0..2 {
                for k in 0..n {
                    // a^i b^j a^k b^l = a^(i + (-1)^j k) b^(j + l)
                    let e = if j == 0 { (i + k) % n } else { (i + n - k) % n };
                    mul[(i + n * j) * order + (k + n * l)] = e + n * ((j + l) % 2);
                }
            }
        }
    }
    let mut g = GroupTable::from_table(order, mul, vec![1, n], vec!["a".into(), "b".into()])?;
    g.dihedral_p = Some(p);
    Ok(g)
}

/// The cyclic group of order n, generated by element 1.
pub fn cyclic_group(n: usize) -> Result<GroupTable> {
    if n == 0 {
        return Err(Error::invalid("cyclic group of order 0"));
    }
    let mul = (0..n * n).map(|k| (k / n + k % n) % n).collect();
    let (gens, labels) = if n == 1 {
        (vec![], vec![])
    } else {
        (vec![1], vec!["c".into()])
    };
    GroupTable::from_table(n, mul, gens, labels)
}

pub fn trivial_group() -> GroupTable {
    cyclic_group(1).expect("order 1 is valid")
}

/// A subgroup, stored as its sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    elements: Vec<Elem>,
}

impl Subgroup {
    pub fn generated(g: &GroupTable, gens: &[Elem]) -> Subgroup {
        let mut set: BTreeSet<Elem> = BTreeSet::from([0]);
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let y = g.mul(x, s);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Subgroup {
            elements: set.into_iter().collect(),
        }
    }

    pub fn trivial() -> Subgroup {
        Subgroup { elements: vec![0] }
    }

    pub fn whole(g: &GroupTable) -> Subgroup {
        Subgroup {
            elements: (0..g.order()).collect(),
        }
    }

    /// Validates closure under products and inverses.
    pub fn from_elements(g: &GroupTable, elements: &[Elem]) -> Result<Subgroup> {
        let set: BTreeSet<Elem> = elements.iter().copied().collect();
        if !set.contains(&0) || set.iter().any(|&x| x >= g.order()) {
            return Err(Error::invalid("subset lacks the identity or leaves the group"));
        }
        for &a in &set {
            if !set.contains(&g.inv(a)) {
                return Err(Error::invalid("subset not closed under inverses"));
            }
            for &b in &set {
                if !set.contains(&g.mul(a, b)) {
                    return Err(Error::invalid("subset not closed under products"));
                }
            }
        }
        Ok(Subgroup {
            elements: set.into_iter().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    /// x H x^-1
    pub fn conjugate(&self, g: &GroupTable, x: Elem) -> Subgroup {
        let mut elements: Vec<Elem> = self.elements.iter().map(|&h| g.conjugate(h, x)).collect();
        elements.sort_unstable();
        Subgroup { elements }
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        Subgroup {
            elements: self.elements.iter().copied().filter(|&x| other.contains(x)).collect(),
        }
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generators(&self, g: &GroupTable) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut span = Subgroup::trivial();
        for &x in &self.elements {
            if !span.contains(x) {
                gens.push(x);
                span = Subgroup::generated(g, &gens);
            }
        }
        gens
    }

    pub fn is_cyclic(&self, g: &GroupTable) -> bool {
        self.elements.iter().any(|&x| g.element_order(x) == self.order())
    }

    /// Whether `self` is normal in `ambient` (which must contain it).
    pub fn is_normal_in(&self, g: &GroupTable, ambient: &Subgroup) -> bool {
        self.is_subgroup_of(ambient)
            && ambient.elements.iter().all(|&x| self.conjugate(g, x) == *self)
    }
}

/// Left cosets xH of a subgroup, with the left action of G on them.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    reps: Vec<Elem>,
    id_of: Vec<usize>,
}

impl CosetSpace {
    pub fn new(g: &GroupTable, h: &Subgroup) -> CosetSpace {
        let mut id_of = vec![usize::MAX; g.order()];
        let mut reps = Vec::new();
        for x in 0..g.order() {
            if id_of[x] != usize::MAX {
                continue;
            }
            for &s in h.elements() {
                id_of[g.mul(x, s)] = reps.len();
            }
            reps.push(x);
        }
        CosetSpace { reps, id_of }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, i: usize) -> Elem {
        self.reps[i]
    }

    pub fn coset_of(&self, x: Elem) -> usize {
        self.id_of[x]
    }

    /// Index of the coset g·(x_i H).
    pub fn act(&self, g: &GroupTable, elem: Elem, i: usize) -> usize {
        self.id_of[g.mul(elem, self.reps[i])]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupClass {
    pub representative: Subgroup,
    pub class_size: usize,
    pub label: String,
}

impl SubgroupClass {
    pub fn order(&self) -> usize {
        self.representative.order()
    }

    pub fn conjugates(&self, g: &GroupTable) -> Vec<Subgroup> {
        let set: BTreeSet<Subgroup> = (0..g.order())
            .map(|x| self.representative.conjugate(g, x))
            .collect();
        set.into_iter().collect()
    }
}

/// Every subgroup generated by at most two elements, deduplicated.
///
/// This reaches every subgroup of a dihedral group; for general groups it is
/// complete only when every subgroup is 2-generated.
pub fn all_subgroups(g: &GroupTable) -> Vec<Subgroup> {
    let mut all = BTreeSet::new();
    for a in 0..g.order() {
        for b in a..g.order() {
            all.insert(Subgroup::generated(g, &[a, b]));
        }
    }
    let mut v: Vec<Subgroup> = all.into_iter().collect();
    v.sort_by(|x, y| x.order().cmp(&y.order()).then_with(|| x.cmp(y)));
    v
}

/// Conjugacy classes of subgroups, ordered by subgroup order.
///
/// Dihedral tables of parameter p come back as exactly `[1, C2, Cp, G]`.
pub fn subgroup_classes(g: &GroupTable) -> Vec<SubgroupClass> {
    let subs = all_subgroups(g);
    let mut seen: BTreeSet<Subgroup> = BTreeSet::new();
    let mut reps: Vec<(Subgroup, usize)> = Vec::new();
    for h in subs {
        if seen.contains(&h) {
            continue;
        }
        let conj: BTreeSet<Subgroup> = (0..g.order()).map(|x| h.conjugate(g, x)).collect();
        let size = conj.len();
        seen.extend(conj);
        reps.push((h, size));
    }

    let mut by_order: BTreeMap<usize, usize> = BTreeMap::new();
    for (h, _) in &reps {
        *by_order.entry(h.order()).or_default() += 1;
    }
    let mut seen_order: BTreeMap<usize, usize> = BTreeMap::new();
    reps.into_iter()
        .map(|(h, class_size)| {
            let n = h.order();
            let label = if n == 1 {
                "1".to_string()
            } else if n == g.order() {
                "G".to_string()
            } else if g.dihedral_parameter() == Some(n as u64) {
                "Cp".to_string()
            } else {
                let base = if h.is_cyclic(g) {
                    format!("C{n}")
                } else {
                    format!("H{n}")
                };
                let k = seen_order.entry(n).or_default();
                *k += 1;
                if by_order[&n] > 1 {
                    format!("{base}.{k}")
                } else {
                    base
                }
            };
            SubgroupClass {
                representative: h,
                class_size,
                label,
            }
        })
        .collect()
}

/// Values of a class function, indexed by the group's conjugacy classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFunction {
    pub values: Vec<i64>,
}

impl ClassFunction {
    pub fn at(&self, g: &GroupTable, x: Elem) -> i64 {
        self.values[g.class_of(x)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

/// Character of C[G/H]: the number of cosets xH fixed by each element.
pub fn permutation_character(g: &GroupTable, h: &Subgroup) -> ClassFunction {
    let cosets = CosetSpace::new(g, h);
    let values = g
        .conjugacy_classes()
        .iter()
        .map(|class| {
            let x = class[0];
            (0..cosets.len()).filter(|&i| cosets.act(g, x, i) == i).count() as i64
        })
        .collect();
    ClassFunction { values }
}

/// Second route to the permutation character: |C_G(x)| |x^G ∩ H| / |H|.
pub fn permutation_character_by_centralizer(g: &GroupTable, h: &Subgroup) -> ClassFunction {
    let values = g
        .conjugacy_classes()
        .iter()
        .map(|class| {
            let hits = class.iter().filter(|&&y| h.contains(y)).count();
            (g.centralizer_order(class[0]) * hits / h.order()) as i64
        })
        .collect();
    ClassFunction { values }
}

/// Whether the signed sum of permutation characters vanishes.
pub fn is_relation(g: &GroupTable, terms: &[(Subgroup, i64)]) -> bool {
    let mut total = vec![0i64; g.conjugacy_classes().len()];
    for (h, c) in terms {
        let chi = permutation_character(g, h);
        for (t, v) in total.iter_mut().zip(&chi.values) {
            *t += c * v;
        }
    }
    total.iter().all(|&v| v == 0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationTerm {
    pub class: SubgroupClass,
    pub coefficient: i64,
}

/// A verified relation between permutation representations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GRelation {
    terms: Vec<RelationTerm>,
}

impl GRelation {
    /// Builds a relation, dropping zero coefficients and merging repeated
    /// classes. Fails unless the characters cancel.
    pub fn new(g: &GroupTable, terms: Vec<RelationTerm>) -> Result<GRelation> {
        let mut merged: Vec<RelationTerm> = Vec::new();
        for t in terms {
            match merged
                .iter_mut()
                .find(|m| m.class.representative == t.class.representative)
            {
                Some(m) => m.coefficient += t.coefficient,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != 0);
        let pairs: Vec<(Subgroup, i64)> = merged
            .iter()
            .map(|t| (t.class.representative.clone(), t.coefficient))
            .collect();
        if !is_relation(g, &pairs) {
            return Err(Error::NotARelation);
        }
        Ok(GRelation { terms: merged })
    }

    /// `1 - 2 C2 - Cp + 2 G` for a dihedral table.
    pub fn dihedral(g: &GroupTable) -> Result<GRelation> {
        if g.dihedral_parameter().is_none() {
            return Err(Error::invalid("dihedral relation needs a dihedral table"));
        }
        let classes = subgroup_classes(g);
        let coeffs = [1, -2, -1, 2];
        let terms = classes
            .into_iter()
            .zip(coeffs)
            .map(|(class, coefficient)| RelationTerm { class, coefficient })
            .collect();
        GRelation::new(g, terms)
    }

    /// Relation with the given coefficients against `classes`.
    pub fn from_coefficients(
        g: &GroupTable,
        classes: &[SubgroupClass],
        coeffs: &[i64],
    ) -> Result<GRelation> {
        if classes.len() != coeffs.len() {
            return Err(Error::invalid("coefficient vector length mismatch"));
        }
        let terms = classes
            .iter()
            .zip(coeffs)
            .map(|(class, &coefficient)| RelationTerm {
                class: class.clone(),
                coefficient,
            })
            .collect();
        GRelation::new(g, terms)
    }

    pub fn terms(&self) -> &[RelationTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficients aligned with `classes` (zero where absent).
    pub fn coefficient_vector(&self, classes: &[SubgroupClass]) -> Vec<i64> {
        classes
            .iter()
            .map(|c| {
                self.terms
                    .iter()
                    .find(|t| t.class.representative == c.representative)
                    .map_or(0, |t| t.coefficient)
            })
            .collect()
    }

    /// Subgroups of the positive part, repeated by multiplicity.
    pub fn positive_part(&self) -> Vec<Subgroup> {
        self.expand(|c| c > 0)
    }

    /// Subgroups of the negative part, repeated by multiplicity.
    pub fn negative_part(&self) -> Vec<Subgroup> {
        self.expand(|c| c < 0)
    }

    fn expand(&self, keep: impl Fn(i64) -> bool) -> Vec<Subgroup> {
        self.terms
            .iter()
            .filter(|t| keep(t.coefficient))
            .flat_map(|t| {
                std::iter::repeat_n(
                    t.class.representative.clone(),
                    t.coefficient.unsigned_abs() as usize,
                )
            })
            .collect()
    }

    /// Sum of two relations on the same group.
    pub fn add(&self, g: &GroupTable, other: &GRelation) -> Result<GRelation> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        GRelation::new(g, terms)
    }

    pub fn scale(&self, k: i64) -> GRelation {
        GRelation {
            terms: self
                .terms
                .iter()
                .filter(|_| k != 0)
                .map(|t| RelationTerm {
                    class: t.class.clone(),
                    coefficient: t.coefficient * k,
                })
                .collect(),
        }
    }
}

/// Basis of all relations: the integer kernel of the matrix of permutation
/// character values, one vector per relation, each with a positive leading
/// coefficient.
pub fn all_relations(g: &GroupTable) -> Vec<GRelation> {
    let classes = subgroup_classes(g);
    let chars: Vec<ClassFunction> = classes
        .iter()
        .map(|c| permutation_character(g, &c.representative))
        .collect();
    let n_elem_classes = g.conjugacy_classes().len();
    let rows: Vec<Vec<BigInt>> = (0..n_elem_classes)
        .map(|k| chars.iter().map(|chi| BigInt::from(chi.values[k])).collect())
        .collect();
    let m = IntMatrix::from_rows(rows, classes.len());
    kernel_basis(&m)
        .into_iter()
        .map(|mut v| {
            if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x < &BigInt::zero()) {
                v.iter_mut().for_each(|x| *x = -&*x);
            }
            let coeffs: Vec<i64> = v
                .iter()
                .map(|x| i64::try_from(x).expect("relation coefficient fits in i64"))
                .collect();
            GRelation::from_coefficients(g, &classes, &coeffs)
                .expect("kernel vectors are relations")
        })
        .collect()
}

/// #(D\G/H), counted as the number of D-orbits on the cosets G/H.
pub fn double_coset_count(g: &GroupTable, d: &Subgroup, h: &Subgroup) -> usize {
    let cosets = CosetSpace::new(g, h);
    let mut seen = vec![false; cosets.len()];
    let mut orbits = 0;
    for i in 0..cosets.len() {
        if seen[i] {
            continue;
        }
        orbits += 1;
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(j) = stack.pop() {
            for &x in d.elements() {
                let k = cosets.act(g, x, j);
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
    }
    orbits
}

/// Representatives (smallest element) of the double cosets `left g right`.
pub fn double_coset_reps(g: &GroupTable, left: &Subgroup, right: &Subgroup) -> Vec<Elem> {
    let mut seen = vec![false; g.order()];
    let mut reps = Vec::new();
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        reps.push(x);
        for &l in left.elements() {
            for &r in right.elements() {
                seen[g.mul(g.mul(l, x), r)] = true;
            }
        }
    }
    reps
}

/// A G-equivariant injection between the permutation lattices of a relation,
/// together with its cokernel data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsogenyWitness {
    /// Matrix of f: rows index the target cosets, columns the source cosets.
    pub matrix: IntMatrix,
    /// |coker f|.
    pub degree: BigInt,
    pub invariant_factors: Vec<BigInt>,
    pub coefficient_bound: i64,
    pub attempts: u32,
    pub seed: u64,
}

/// Limits for the seeded search over Hom_G coefficients.
#[derive(Clone, Copy, Debug)]
pub struct IsogenySearch {
    pub initial_bound: i64,
    pub max_bound: i64,
    pub attempts_per_bound: u32,
}

impl Default for IsogenySearch {
    fn default() -> Self {
        IsogenySearch {
            initial_bound: 3,
            max_bound: 48,
            attempts_per_bound: 32,
        }
    }
}

/// Basis of Hom_G(Z[G/H], Z[G/K]) as matrices (rows: G/K, cols: G/H), one
/// per double coset H y K.
pub fn hom_basis(g: &GroupTable, h: &Subgroup, k: &Subgroup) -> Vec<IntMatrix> {
    let src = CosetSpace::new(g, h);
    let tgt = CosetSpace::new(g, k);
    double_coset_reps(g, h, k)
        .into_iter()
        .map(|y| {
            // cosets y'K inside H y K
            let inside: BTreeSet<usize> =
                h.elements().iter().map(|&s| tgt.coset_of(g.mul(s, y))).collect();
            let mut m = IntMatrix::zeros(tgt.len(), src.len());
            for col in 0..src.len() {
                let x = src.rep(col);
                for &t in &inside {
                    let row = tgt.act(g, x, t);
                    m.set(row, col, BigInt::one());
                }
            }
            m
        })
        .collect()
}

/// Permutation matrix of `elem` acting on a direct sum of coset spaces.
pub fn block_permutation_matrix(g: &GroupTable, blocks: &[CosetSpace], elem: Elem) -> IntMatrix {
    let n: usize = blocks.iter().map(CosetSpace::len).sum();
    let mut m = IntMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.len() {
            m.set(off + b.act(g, elem, i), off + i, BigInt::one());
        }
        off += b.len();
    }
    m
}

/// Whether `f` intertwines the permutation actions on the two block sums.
pub fn is_equivariant(
    g: &GroupTable,
    source: &[Subgroup],
    target: &[Subgroup],
    f: &IntMatrix,
) -> bool {
    let src: Vec<CosetSpace> = source.iter().map(|h| CosetSpace::new(g, h)).collect();
    let tgt: Vec<CosetSpace> = target.iter().map(|h| CosetSpace::new(g, h)).collect();
    g.generators().iter().all(|&x| {
        let ps = block_permutation_matrix(g, &src, x);
        let pt = block_permutation_matrix(g, &tgt, x);
        pt.mul(f) == f.mul(&ps)
    })
}

/// Cokernel order of an explicit integer matrix, `None` if singular.
pub fn isogeny_degree_of(f: &IntMatrix) -> Option<BigInt> {
    crate::linalg::cokernel_order(f)
}

/// Finds a G-injection from the positive to the negative permutation lattice
/// of `theta` by a seeded search over double-coset coefficients and returns
/// the order of its cokernel.
pub fn relation_isogeny_degree(
    g: &GroupTable,
    theta: &GRelation,
    seed: u64,
    search: IsogenySearch,
) -> Result<IsogenyWitness> {
    let source = theta.positive_part();
    let target = theta.negative_part();
    if source.is_empty() || target.is_empty() {
        return Err(Error::invalid("relation needs nonempty positive and negative parts"));
    }
    let dim_src: usize = source.iter().map(|h| g.order() / h.order()).sum();
    let dim_tgt: usize = target.iter().map(|h| g.order() / h.order()).sum();
    if dim_src != dim_tgt {
        return Err(Error::NotARelation);
    }
    let src_off: Vec<usize> = offsets(g, &source);
    let tgt_off: Vec<usize> = offsets(g, &target);
    // (target block, source block, basis matrix)
    let mut basis: Vec<(usize, usize, IntMatrix)> = Vec::new();
    for (ti, k) in target.iter().enumerate() {
        for (si, h) in source.iter().enumerate() {
            for m in hom_basis(g, h, k) {
                basis.push((ti, si, m));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = search.initial_bound.max(1);
    let mut attempts = 0u32;
    while bound <= search.max_bound {
        for _ in 0..search.attempts_per_bound {
            attempts += 1;
            let mut f = IntMatrix::zeros(dim_tgt, dim_src);
            for (ti, si, m) in &basis {
                let c: i64 = rng.gen_range(-bound..=bound);
                if c == 0 {
                    continue;
                }
                let c = BigInt::from(c);
                for r in 0..m.rows() {
                    for col in 0..m.cols() {
                        let v = m.get(r, col);
                        if !v.is_zero() {
                            let (rr, cc) = (tgt_off[*ti] + r, src_off[*si] + col);
                            let cur = f.get(rr, cc) + v * &c;
                            f.set(rr, cc, cur);
                        }
                    }
                }
            }
            let s = smith(&f);
            if s.diag.iter().any(Zero::is_zero) {
                continue;
            }
            let degree: BigInt = s.diag.iter().product();
            return Ok(IsogenyWitness {
                matrix: f,
                degree,
                invariant_factors: s.diag,
                coefficient_bound: bound,
                attempts,
                seed,
            });
        }
        bound *= 2;
    }
    Err(Error::SearchExhausted(format!(
        "no injective G-map found with coefficients up to {}",
        search.max_bound
    )))
}

fn offsets(g: &GroupTable, blocks: &[Subgroup]) -> Vec<usize> {
    let mut off = Vec::with_capacity(blocks.len());
    let mut acc = 0;
    for h in blocks {
        off.push(acc);
        acc += g.order() / h.order();
    }
    off
}
