//! Which shares can be handed out before the secret exists, and the
//! entanglement-assisted code that does it.
//!
//! A set `J` is advance shareable when `f(S)` shortened on `J` has dimension
//! `dim f(S) - 2|J|`. A cheaper sufficient test is `|J| < d_min(f(S)^⊥)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, Modulus};
use crate::pauli::{commutation_matrix, PauliOperator, StabilizerCode};
use crate::shares::ShareSet;
use crate::symplectic::{EnumerationBudget, SymplecticVector};

fn check_shares(code: &StabilizerCode, j: &ShareSet) -> Result<()> {
    if j.n() != code.n() {
        return Err(Error::DimensionMismatch(format!(
            "share set over {} shares applied to a code on {}",
            j.n(),
            code.n()
        )));
    }
    Ok(())
}

/// Exact test: `dim f(S)` shortened on `J` equals `dim f(S) - 2|J|`.
pub fn is_advance_shareable(code: &StabilizerCode, j: &ShareSet) -> Result<bool> {
    check_shares(code, j)?;
    let r = code.num_generators();
    if 2 * j.len() > r {
        return Ok(false);
    }
    let short = code.stabilizer_space().shorten(j)?;
    Ok(short.dim() == r - 2 * j.len())
}

/// `d_min(f(S)^⊥)`, the threshold of the sufficient test.
pub fn dual_min_weight(code: &StabilizerCode, budget: EnumerationBudget) -> Result<usize> {
    code.normalizer_space().min_symplectic_weight(budget)
}

/// Sufficient test `|J| < d_min(f(S)^⊥)`. A `true` implies the exact test
/// passes; `false` says nothing.
pub fn is_advance_shareable_sufficient(
    code: &StabilizerCode,
    j: &ShareSet,
    budget: EnumerationBudget,
) -> Result<bool> {
    check_shares(code, j)?;
    Ok(j.len() < dual_min_weight(code, budget)?)
}

/// A check matrix row-equivalent to the input, arranged so that for the
/// `i`-th share `j_i` of `J`:
///
/// * row `i` has `mu[i]` at the x-column of `j_i` and zero on every other
///   column owned by `J`;
/// * row `c + i` has `-1` at the z-column of `j_i` and zero on every other
///   column owned by `J`;
/// * rows from `2c` on vanish on all columns owned by `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub shares: ShareSet,
    pub check: FpMatrix,
    pub mu: Vec<u8>,
}

impl NormalForm {
    pub fn c(&self) -> usize {
        self.shares.len()
    }

    /// Checks every structural property against `original`.
    pub fn verify(&self, original: &FpMatrix) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let p = self.check.modulus();
        let n = self.check.cols() / 2;
        let c = self.c();
        if !self.check.same_row_space(original) || self.check.rows() != original.rows() {
            return fail("normal form changed the row space".into());
        }
        let owned = self.shares.owned_columns();
        for r in 0..self.check.rows() {
            for (slot, &col) in owned.iter().enumerate() {
                let expected = if r < c && slot == r {
                    self.mu[r]
                } else if r >= c && r < 2 * c && slot == c + (r - c) {
                    p.neg(1)
                } else {
                    0
                };
                if self.check.get(r, col) != expected {
                    return fail(format!(
                        "row {} has {} at column {}, expected {}",
                        r + 1,
                        self.check.get(r, col),
                        col,
                        expected
                    ));
                }
            }
        }
        for (i, &mu) in self.mu.iter().enumerate() {
            if mu == 0 {
                return fail(format!("pivot {} is zero", i + 1));
            }
            let formula = mu_from_rows(p, self.check.row(i), self.check.row(c + i), n, owned[i]);
            if formula != mu {
                return fail(format!(
                    "pivot {} is {} but the commutation formula gives {}",
                    i + 1,
                    mu,
                    formula
                ));
            }
        }
        Ok(())
    }
}

/// `sum_{q != skip} x[q] z'[q] - x'[q] z[q]` for rows `(x|z)` and `(x'|z')`.
fn mu_from_rows(p: Modulus, a: &[u8], b: &[u8], n: usize, skip: usize) -> u8 {
    let mut acc = 0u8;
    for q in (0..n).filter(|&q| q != skip) {
        acc = p.add(acc, p.mul(a[q], b[n + q]));
        acc = p.sub(acc, p.mul(b[q], a[n + q]));
    }
    acc
}

/// Gauss-Jordan elimination on the columns owned by `J`, x-columns first.
/// Z-pivots are scaled to `-1`; X-pivots keep whatever value elimination
/// leaves, which is then checked against the commutation formula.
pub fn normal_form(code: &StabilizerCode, j: &ShareSet) -> Result<NormalForm> {
    check_shares(code, j)?;
    let mut h = code.check_matrix().clone();
    let p = h.modulus();
    let c = j.len();
    let owned = j.owned_columns();
    if 2 * c > h.rows() {
        return Err(Error::NotAdvanceShareable(format!(
            "{} shares need {} generators, the code has {}",
            c,
            2 * c,
            h.rows()
        )));
    }
    for (slot, &col) in owned.iter().enumerate() {
        let Some(pivot) = (slot..h.rows()).find(|&r| h.get(r, col) != 0) else {
            return Err(Error::NotAdvanceShareable(format!(
                "no pivot for column {} of {}",
                col, j
            )));
        };
        h.swap_rows(slot, pivot);
        let inv = p.inv(h.get(slot, col)).expect("nonzero");
        if slot >= c {
            h.scale_row(slot, p.mul(inv, p.neg(1)));
        }
        let lead = h.get(slot, col);
        let lead_inv = p.inv(lead).expect("nonzero");
        for r in 0..h.rows() {
            if r != slot {
                let f = p.mul(h.get(r, col), lead_inv);
                h.sub_row_multiple(r, slot, f);
            }
        }
    }
    let mu = (0..c).map(|i| h.get(i, owned[i])).collect();
    let form = NormalForm {
        shares: j.clone(),
        check: h,
        mu,
    };
    form.verify(code.check_matrix())?;
    Ok(form)
}

/// `[[n, k, d; c]]_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EaqeccParameters {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub c: usize,
    pub p: u8,
}

impl fmt::Display for EaqeccParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d {
            Some(d) => write!(f, "[[{},{},{};{}]]_{}", self.n, self.k, d, self.c, self.p),
            None => write!(f, "[[{},{},?;{}]]_{}", self.n, self.k, self.c, self.p),
        }
    }
}

/// The entanglement-assisted code held by the shares outside `J`.
///
/// Register positions are ranks within the complement of `J`: position 0 is
/// the smallest share index not in `J`. The encoder works on that register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EaqeccPlan {
    pub normal_form: NormalForm,
    pub n: usize,
    pub k: usize,
    /// Shares outside `J`, ascending (1-based).
    pub complement: Vec<usize>,
    /// Share holding the partner of the `i`-th advance share.
    pub pair_shares: Vec<usize>,
    /// Shares that start in `|0⟩`.
    pub ancilla_shares: Vec<usize>,
    /// Shares that start holding the secret.
    pub secret_shares: Vec<usize>,
    /// Normal form rows restricted to the complement.
    pub source: Vec<PauliOperator>,
    /// Sparse generators on the complement with the same commutation pattern.
    pub target: Vec<PauliOperator>,
    pub parameters: EaqeccParameters,
}

impl EaqeccPlan {
    pub fn modulus(&self) -> Modulus {
        self.normal_form.check.modulus()
    }

    pub fn shares(&self) -> &ShareSet {
        &self.normal_form.shares
    }

    pub fn c(&self) -> usize {
        self.normal_form.c()
    }

    /// Number of qudits the encoder acts on.
    pub fn register_len(&self) -> usize {
        self.complement.len()
    }

    /// Register position of a share outside `J`.
    pub fn register_index(&self, share: usize) -> Option<usize> {
        self.complement.binary_search(&share).ok()
    }

    /// The target generators extended to all `n` shares: on `j_i` they carry
    /// the same `X^{mu_i}` and `Z^{-1}` as the normal form rows.
    pub fn target_full(&self) -> Vec<PauliOperator> {
        let p = self.modulus();
        let n = self.n;
        let c = self.c();
        let js = self.shares().indices();
        self.target
            .iter()
            .enumerate()
            .map(|(r, t)| {
                let mut x = vec![0i64; n];
                let mut z = vec![0i64; n];
                for (pos, &share) in self.complement.iter().enumerate() {
                    x[share - 1] = t.x_part()[pos] as i64;
                    z[share - 1] = t.z_part()[pos] as i64;
                }
                if r < c {
                    x[js[r] - 1] = self.normal_form.mu[r] as i64;
                } else if r < 2 * c {
                    z[js[r - c] - 1] = -1;
                }
                PauliOperator::new(p, 0, &x, &z).expect("consistent lengths")
            })
            .collect()
    }
}

/// Builds the plan for an advance shareable `J`.
pub fn construct_eaqecc(
    code: &StabilizerCode,
    j: &ShareSet,
    budget: EnumerationBudget,
) -> Result<EaqeccPlan> {
    if !is_advance_shareable(code, j)? {
        return Err(Error::NotAdvanceShareable(format!(
            "{} fails the shortening test",
            j
        )));
    }
    let form = normal_form(code, j)?;
    let p = code.modulus();
    let n = code.n();
    let k = code.k();
    let c = j.len();
    let r = code.num_generators();
    let complement: Vec<usize> = j.complement().indices().to_vec();
    let m = complement.len();

    let pair_shares = complement[..c].to_vec();
    let ancilla_shares = complement[c..r - c].to_vec();
    let secret_shares = complement[r - c..].to_vec();

    let keep: Vec<usize> = complement
        .iter()
        .map(|s| s - 1)
        .chain(complement.iter().map(|s| s - 1 + n))
        .collect();
    let restricted = form.check.select_columns(&keep);
    let source: Vec<PauliOperator> = (0..r)
        .map(|row| {
            let v =
                SymplecticVector::from_coords(m, restricted.row_vector(row)).expect("2m columns");
            PauliOperator::from_vector(v, 0)
        })
        .collect();

    let mut target = Vec::with_capacity(r);
    for i in 0..c {
        target.push(PauliOperator::single(p, m, i, form.mu[i] as i64, 0));
    }
    for i in 0..c {
        target.push(PauliOperator::single(p, m, i, 0, 1));
    }
    for (slot, _) in ancilla_shares.iter().enumerate() {
        target.push(PauliOperator::single(p, m, c + slot, 0, 1));
    }

    let gram_source = commutation_matrix(&source)?;
    let gram_target = commutation_matrix(&target)?;
    for a in 0..r {
        for b in 0..r {
            if gram_source[a][b] != gram_target[a][b] {
                return Err(Error::Invariant(format!(
                    "commutation patterns differ at generators {} and {}",
                    a + 1,
                    b + 1
                )));
            }
        }
    }

    let d = if k == 0 {
        None
    } else {
        Some(code.code_distance(budget)?)
    };
    Ok(EaqeccPlan {
        normal_form: form,
        n,
        k,
        complement,
        pair_shares,
        ancilla_shares,
        secret_shares,
        source,
        target,
        parameters: EaqeccParameters {
            n: m,
            k,
            d,
            c,
            p: p.get(),
        },
    })
}

/// One advance shareable set with the tests that certify it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareableSet {
    pub shares: ShareSet,
    pub exact: bool,
    /// `None` when `d_min(f(S)^⊥)` exceeds the enumeration budget.
    pub sufficient: Option<bool>,
}

/// Every nonempty advance shareable `J` with `|J| <= max_size`, ordered by
/// size and then lexicographically.
pub fn enumerate_advance_shareable(
    code: &StabilizerCode,
    max_size: usize,
    budget: EnumerationBudget,
) -> Result<Vec<ShareableSet>> {
    let threshold = match dual_min_weight(code, budget) {
        Ok(d) => Some(d),
        Err(Error::EnumerationLimit { .. }) => None,
        Err(e) => return Err(e),
    };
    let cap = max_size.min(code.num_generators() / 2);
    let mut out = Vec::new();
    for j in ShareSet::subsets_up_to(code.n(), cap) {
        if j.is_empty() || !is_advance_shareable(code, &j)? {
            continue;
        }
        out.push(ShareableSet {
            sufficient: threshold.map(|d| j.len() < d),
            shares: j,
            exact: true,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(p: u32) -> Modulus {
        Modulus::new(p).unwrap()
    }

    fn code(p: u32, n: usize, rows: &[Vec<u8>]) -> StabilizerCode {
        let h = FpMatrix::from_rows(m(p), 2 * n, rows).unwrap();
        StabilizerCode::validate(h, n).unwrap()
    }

    fn xxxx_zzzz() -> StabilizerCode {
        code(
            2,
            4,
            &[vec![1, 1, 1, 1, 0, 0, 0, 0], vec![0, 0, 0, 0, 1, 1, 1, 1]],
        )
    }

    fn five_qubit() -> StabilizerCode {
        code(
            2,
            5,
            &[
                vec![1, 0, 0, 1, 0, 0, 1, 1, 0, 0],
                vec![0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
                vec![1, 0, 1, 0, 0, 0, 0, 0, 1, 1],
                vec![0, 1, 0, 1, 0, 1, 0, 0, 0, 1],
            ],
        )
    }

    fn set(n: usize, idx: &[usize]) -> ShareSet {
        ShareSet::new(n, idx.iter().copied()).unwrap()
    }

    const B: EnumerationBudget = EnumerationBudget::DEFAULT;

    #[test]
    fn exact_test_examples() {
        let s = xxxx_zzzz();
        assert!(is_advance_shareable(&s, &set(4, &[4])).unwrap());
        assert!(is_advance_shareable(&s, &ShareSet::empty(4)).unwrap());
        assert!(!is_advance_shareable(&s, &set(4, &[1, 2])).unwrap());
        assert!(is_advance_shareable(&five_qubit(), &ShareSet::empty(5)).unwrap());
    }

    #[test]
    fn sufficient_test_examples() {
        let s = xxxx_zzzz();
        assert!(is_advance_shareable_sufficient(&s, &set(4, &[4]), B).unwrap());
        assert!(!is_advance_shareable_sufficient(&s, &set(4, &[2, 3]), B).unwrap());
        assert!(is_advance_shareable_sufficient(&five_qubit(), &set(5, &[1, 4]), B).unwrap());
    }

    #[test]
    fn normal_form_xxxx_zzzz() {
        let nf = normal_form(&xxxx_zzzz(), &set(4, &[4])).unwrap();
        assert_eq!(nf.mu, vec![1]);
        assert_eq!(nf.check.get(1, 7), 1);
        assert_eq!(nf.check.row(0), &[1, 1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn normal_form_empty_is_input() {
        let s = five_qubit();
        let nf = normal_form(&s, &ShareSet::empty(5)).unwrap();
        assert!(nf.mu.is_empty());
        assert!(nf.check.same_row_space(s.check_matrix()));
    }

    #[test]
    fn normal_form_rejects_unshareable() {
        assert!(matches!(
            normal_form(&xxxx_zzzz(), &set(4, &[1, 2])),
            Err(Error::NotAdvanceShareable(_))
        ));
    }

    #[test]
    fn plan_xxxx_zzzz() {
        let plan = construct_eaqecc(&xxxx_zzzz(), &set(4, &[4]), B).unwrap();
        let p = m(2);
        let xxx = PauliOperator::new(p, 0, &[1, 1, 1], &[0, 0, 0]).unwrap();
        let zzz = PauliOperator::new(p, 0, &[0, 0, 0], &[1, 1, 1]).unwrap();
        assert_eq!(plan.source, vec![xxx, zzz]);
        assert_eq!(plan.target[0], PauliOperator::single(p, 3, 0, 1, 0));
        assert_eq!(plan.target[1], PauliOperator::single(p, 3, 0, 0, 1));
        assert_eq!(plan.parameters.to_string(), "[[3,2,2;1]]_2");
        assert_eq!(plan.pair_shares, vec![1]);
        assert!(plan.ancilla_shares.is_empty());
        assert_eq!(plan.secret_shares, vec![2, 3]);
    }

    #[test]
    fn plan_without_advance_shares() {
        let s = five_qubit();
        let plan = construct_eaqecc(&s, &ShareSet::empty(5), B).unwrap();
        assert_eq!(plan.c(), 0);
        assert_eq!(plan.ancilla_shares, vec![1, 2, 3, 4]);
        assert_eq!(plan.secret_shares, vec![5]);
        assert_eq!(plan.parameters.to_string(), "[[5,1,3;0]]_2");
    }

    #[test]
    fn full_target_commutes_and_matches_on_j() {
        for (s, j) in [(xxxx_zzzz(), set(4, &[4])), (five_qubit(), set(5, &[2, 5]))] {
            let plan = construct_eaqecc(&s, &j, B).unwrap();
            let full = plan.target_full();
            let gram = commutation_matrix(&full).unwrap();
            assert!(gram.iter().flatten().all(|&e| e == 0));
            let n = s.n();
            for (r, op) in full.iter().enumerate() {
                for &share in j.indices() {
                    let q = share - 1;
                    assert_eq!(op.x_part()[q], plan.normal_form.check.get(r, q));
                    assert_eq!(op.z_part()[q], plan.normal_form.check.get(r, n + q));
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let one = enumerate_advance_shareable(&xxxx_zzzz(), 1, B).unwrap();
        assert_eq!(one.len(), 4);
        assert!(one.iter().all(|s| s.exact && s.sufficient == Some(true)));
        assert_eq!(
            enumerate_advance_shareable(&xxxx_zzzz(), 2, B)
                .unwrap()
                .len(),
            4
        );
        let five = enumerate_advance_shareable(&five_qubit(), 2, B).unwrap();
        assert_eq!(five.len(), 15);
        assert_eq!(five[0].shares.indices(), &[1]);
        assert_eq!(five[5].shares.indices(), &[1, 2]);
        assert!(five.iter().all(|s| s.sufficient == Some(true)));
    }

    #[test]
    fn qutrit_plan_has_matching_gram() {
        let s = code(3, 3, &[vec![1, 1, 1, 0, 0, 0], vec![0, 0, 0, 1, 1, 1]]);
        for share in 1..=3 {
            let plan = construct_eaqecc(&s, &set(3, &[share]), B).unwrap();
            assert_eq!(
                commutation_matrix(&plan.source).unwrap(),
                commutation_matrix(&plan.target).unwrap()
            );
        }
    }

    /// Shareability from first principles: a check matrix in normal form exists
    /// iff the J-owned columns of some (hence every) check matrix have rank
    /// 2|J|. Here we look for the pivots by brute force over the row space.
    fn shareable_by_search(s: &StabilizerCode, j: &ShareSet) -> bool {
        let space = s.stabilizer_space();
        let owned = j.owned_columns();
        // each required unit pattern on the owned columns must be reachable
        let mut reachable = vec![false; owned.len()];
        space
            .for_each_nonzero_codeword(B, |w| {
                let nz: Vec<usize> = (0..owned.len()).filter(|&t| w[owned[t]] != 0).collect();
                if nz.len() == 1 {
                    reachable[nz[0]] = true;
                }
                true
            })
            .unwrap();
        reachable.iter().all(|&r| r)
    }

    #[test]
    fn exact_test_matches_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let (p, n) = if rng.random_bool(0.5) { (2, 4) } else { (3, 3) };
            let r = rng.random_range(0..=n);
            let s = StabilizerCode::random(m(p), n, r, &mut rng);
            for j in ShareSet::all_subsets(n) {
                assert_eq!(
                    is_advance_shareable(&s, &j).unwrap(),
                    shareable_by_search(&s, &j),
                    "{:?} {}",
                    s.check_matrix(),
                    j
                );
            }
        }
    }

    proptest! {
        #[test]
        fn equivalence_and_soundness(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), n in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.random_range(0..=n);
            let s = StabilizerCode::random(m(p), n, r, &mut rng);
            for j in ShareSet::all_subsets(n) {
                let exact = is_advance_shareable(&s, &j).unwrap();
                let nf = normal_form(&s, &j);
                prop_assert_eq!(exact, nf.is_ok());
                if is_advance_shareable_sufficient(&s, &j, B).unwrap() {
                    prop_assert!(exact);
                }
                if exact {
                    let plan = construct_eaqecc(&s, &j, B).unwrap();
                    prop_assert_eq!(plan.source.len(), r);
                    let short = s.stabilizer_space().shorten(&j).unwrap();
                    prop_assert_eq!(short.dim(), r - 2 * j.len());
                }
            }
        }
    }
}
