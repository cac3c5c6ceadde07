//! Dense state vectors and the advance sharing protocol run on them.
//!
//! The global register holds share `i` at qudit `i - 1`, followed by any
//! reference qudits kept outside the scheme. Qudit 0 is the most significant
//! digit of a basis index.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::advance::{construct_eaqecc, EaqeccPlan};
use crate::clifford::{synthesize_on, CliffordCircuit, Gate, Synthesis};
use crate::dense::{omega_pow, zeta_pow, DenseMatrix};
use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, FpVector, Modulus};
use crate::pauli::{PauliOperator, StabilizerCode};
use crate::scalar::Real;
use crate::shares::ShareSet;
use crate::symplectic::EnumerationBudget;

/// Default cap on the number of amplitudes in a state vector.
pub const DEFAULT_STATE_BUDGET: usize = 4096;

const NORM_FLOOR: f64 = 1e-12;

fn check_budget(modulus: Modulus, m: usize, budget: usize) -> Result<usize> {
    let dim = (modulus.as_usize() as u128).pow(m as u32);
    if dim > budget as u128 {
        return Err(Error::DenseBudget {
            required: dim,
            budget: budget as u128,
        });
    }
    Ok(dim as usize)
}

#[inline]
fn digit(idx: usize, d: usize, total: usize, q: usize) -> usize {
    (idx / d.pow((total - 1 - q) as u32)) % d
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// A pure state of `m` qudits of dimension `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState<T> {
    modulus: Modulus,
    m: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> QuditState<T> {
    /// `|0…0⟩`.
    pub fn zero(modulus: Modulus, m: usize, budget: usize) -> Result<Self> {
        let dim = check_budget(modulus, m, budget)?;
        let mut amps = vec![czero(); dim];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(QuditState { modulus, m, amps })
    }

    /// A computational basis state.
    pub fn basis(modulus: Modulus, digits: &[u8]) -> Self {
        let d = modulus.as_usize();
        let m = digits.len();
        let idx = digits.iter().fold(0, |acc, &x| acc * d + (x as usize % d));
        let mut amps = vec![czero(); d.pow(m as u32)];
        amps[idx] = Complex::new(T::one(), T::zero());
        QuditState { modulus, m, amps }
    }

    /// Wraps amplitudes whose norm is 1 within `1e-10`.
    pub fn from_amplitudes(modulus: Modulus, m: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != modulus.as_usize().pow(m as u32) {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {} qudits of dimension {}",
                amps.len(),
                m,
                modulus
            )));
        }
        let state = QuditState { modulus, m, amps };
        let norm = state.norm().to_f64().unwrap_or(f64::NAN);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Normalized complex Gaussian vector.
    pub fn random<R: Rng + ?Sized>(modulus: Modulus, m: usize, rng: &mut R) -> Self {
        let dim = modulus.as_usize().pow(m as u32);
        let mut amps: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        let norm = amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        for a in amps.iter_mut() {
            *a = *a / norm;
        }
        QuditState { modulus, m, amps }
    }

    /// `p^{-k/2} Σ_s |s⟩|s⟩` on `2k` qudits.
    pub fn maximally_entangled(modulus: Modulus, k: usize) -> Self {
        let d = modulus.as_usize();
        let half = d.pow(k as u32);
        let s = T::one() / T::lit(half as f64).sqrt();
        let mut amps = vec![czero(); half * half];
        for i in 0..half {
            amps[i * half + i] = Complex::new(s, T::zero());
        }
        QuditState {
            modulus,
            m: 2 * k,
            amps,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn tensor(&self, other: &QuditState<T>) -> QuditState<T> {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        QuditState {
            modulus: self.modulus,
            m: self.m + other.m,
            amps,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuditState<T>) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuditState<T>) -> T {
        self.inner(other).norm_sqr()
    }

    /// Applies `circuit` with its qudit `q` acting on qudit `map[q]`.
    pub fn apply_circuit(&mut self, circuit: &CliffordCircuit, map: &[usize]) {
        circuit.apply(&mut self.amps, self.m, map);
    }

    /// Applies `op` with its qudit `q` acting on qudit `positions[q]`.
    pub fn apply_pauli(&mut self, op: &PauliOperator, positions: &[usize]) {
        self.amps = self.pauli_image(op, positions);
    }

    fn pauli_image(&self, op: &PauliOperator, positions: &[usize]) -> Vec<Complex<T>> {
        assert_eq!(op.n(), positions.len(), "operator and positions disagree");
        let d = self.modulus.as_usize();
        let p = self.modulus.get();
        let mut out = vec![czero(); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a.re == T::zero() && a.im == T::zero() {
                continue;
            }
            // X(a)Z(b)|j⟩ = ω^{b·j} |j + a⟩
            let mut phase = op.phase() as i64;
            let mut target = idx;
            for (q, &pos) in positions.iter().enumerate() {
                let j = digit(idx, d, self.m, pos);
                phase += op.z_part()[q] as i64 * j as i64;
                let stride = d.pow((self.m - 1 - pos) as u32);
                let shifted = (j + op.x_part()[q] as usize) % d;
                target = target - j * stride + shifted * stride;
            }
            out[target] = out[target] + a * omega_pow::<T>(p, phase);
        }
        out
    }

    /// `⟨ψ|op|ψ⟩`.
    pub fn expectation(&self, op: &PauliOperator, positions: &[usize]) -> Complex<T> {
        let image = self.pauli_image(op, positions);
        self.amps
            .iter()
            .zip(&image)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// `Tr_{rest} |ψ⟩⟨ψ|` on the listed qudits, in the order given.
    pub fn reduced(&self, keep: &[usize]) -> DensityOperator<T> {
        let d = self.modulus.as_usize();
        let rest: Vec<usize> = (0..self.m).filter(|q| !keep.contains(q)).collect();
        let dk = d.pow(keep.len() as u32);
        let dr = d.pow(rest.len() as u32);
        let mut mat = vec![czero::<T>(); dk * dr];
        for (idx, &a) in self.amps.iter().enumerate() {
            let row = keep
                .iter()
                .fold(0, |acc, &q| acc * d + digit(idx, d, self.m, q));
            let col = rest
                .iter()
                .fold(0, |acc, &q| acc * d + digit(idx, d, self.m, q));
            mat[row * dr + col] = a;
        }
        let rho = DenseMatrix::from_fn(dk, dk, |r, c| {
            (0..dr).fold(czero(), |acc, t| {
                acc + mat[r * dr + t] * mat[c * dr + t].conj()
            })
        });
        DensityOperator {
            modulus: self.modulus,
            qudits: keep.to_vec(),
            matrix: rho,
        }
    }

    /// Von Neumann entropy of the listed qudits in units of `log p`, taken
    /// from whichever side of the cut is smaller.
    pub fn entropy_of(&self, subsystem: &[usize]) -> Result<f64> {
        let other: Vec<usize> = (0..self.m).filter(|q| !subsystem.contains(q)).collect();
        let side = if other.len() < subsystem.len() {
            other
        } else {
            subsystem.to_vec()
        };
        if side.is_empty() {
            return Ok(0.0);
        }
        self.reduced(&side).entropy()
    }

    /// Samples the computational basis on `positions`, then resets them to `|0⟩`.
    fn measure_and_reset<R: Rng + ?Sized>(
        &mut self,
        positions: &[usize],
        rng: &mut R,
    ) -> Result<()> {
        if positions.is_empty() {
            return Ok(());
        }
        let d = self.modulus.as_usize();
        let label = |idx: usize| {
            positions
                .iter()
                .fold(0, |acc, &q| acc * d + digit(idx, d, self.m, q))
        };
        let mut probs = vec![0f64; d.pow(positions.len() as u32)];
        for (idx, a) in self.amps.iter().enumerate() {
            probs[label(idx)] += a.norm_sqr().to_f64().unwrap_or(0.0);
        }
        let outcome = sample_index(&probs, rng);
        let weight = probs[outcome];
        if weight < NORM_FLOOR {
            return Err(Error::Numerical(
                "erasure branch has vanishing weight".into(),
            ));
        }
        let scale = T::lit(1.0 / weight.sqrt());
        let mut out = vec![czero(); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if label(idx) != outcome {
                continue;
            }
            let mut target = idx;
            for &q in positions {
                target -= digit(idx, d, self.m, q) * d.pow((self.m - 1 - q) as u32);
            }
            out[target] = a * scale;
        }
        self.amps = out;
        Ok(())
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u: f64 = rng.random::<f64>() * total;
    for (i, &w) in probs.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // rounding: fall back to the last outcome with any weight
    probs.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// `(|00⟩ + |11⟩ + …) / √p`.
pub fn make_epr<T: Real>(modulus: Modulus) -> QuditState<T> {
    QuditState::maximally_entangled(modulus, 1)
}

/// Reduced state on a list of qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T> {
    pub modulus: Modulus,
    pub qudits: Vec<usize>,
    pub matrix: DenseMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let dim = self.matrix.rows();
        let m = DMatrix::from_fn(dim, dim, |r, c| {
            let v = self.matrix.get(r, c);
            nalgebra::Complex::new(v.re.to_f64().unwrap_or(0.0), v.im.to_f64().unwrap_or(0.0))
        });
        m.symmetric_eigenvalues().iter().copied().collect()
    }

    /// `-Σ λ log_p λ`.
    pub fn entropy(&self) -> Result<f64> {
        if !self.matrix.is_hermitian(T::lit(1e-10)) {
            return Err(Error::Numerical("reduced state is not Hermitian".into()));
        }
        let ln_p = (self.modulus.get() as f64).ln();
        Ok(self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > 1e-14)
            .map(|l| -l * l.ln() / ln_p)
            .sum())
    }
}

/// Whether the erasure of `erased` can be undone: every element of
/// `f(S)^⊥` supported on `erased` already lies in `f(S)`.
pub fn erasure_correctable(code: &StabilizerCode, erased: &ShareSet) -> Result<bool> {
    let kept = erased.complement();
    let normalizer = code.normalizer_space().shorten(&kept)?;
    let stabilizer = code.stabilizer_space().shorten(&kept)?;
    Ok(normalizer.dim() == stabilizer.dim())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccessLabel {
    Qualified,
    Forbidden,
    Intermediate,
}

impl AccessLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessLabel::Qualified => "qualified",
            AccessLabel::Forbidden => "forbidden",
            AccessLabel::Intermediate => "intermediate",
        }
    }

    /// Label implied by `I(R:A)` for a `k`-qudit secret, within `tol`.
    pub fn from_mutual_information(info: f64, k: usize, tol: f64) -> AccessLabel {
        if (info - 2.0 * k as f64).abs() <= tol {
            AccessLabel::Qualified
        } else if info.abs() <= tol {
            AccessLabel::Forbidden
        } else {
            AccessLabel::Intermediate
        }
    }
}

impl fmt::Display for AccessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Qualified when losing the rest is correctable, forbidden when losing
/// `shares` themselves is, intermediate otherwise.
pub fn classify_access(code: &StabilizerCode, shares: &ShareSet) -> Result<AccessLabel> {
    if erasure_correctable(code, &shares.complement())? {
        Ok(AccessLabel::Qualified)
    } else if erasure_correctable(code, shares)? {
        Ok(AccessLabel::Forbidden)
    } else {
        Ok(AccessLabel::Intermediate)
    }
}

/// Output of the encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedState<T> {
    /// `n` shares followed by `reference` qudits.
    pub state: QuditState<T>,
    /// Eigenvalue exponents: generator `i` acts as `ω^{syndromes[i]}`.
    pub syndromes: Vec<u8>,
    pub reference: usize,
}

/// What the decoder saw and did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeRecord {
    pub erased: ShareSet,
    pub measured: Vec<u8>,
    /// Supported on `erased`.
    pub correction: PauliOperator,
}

/// A decoded and unencoded secret.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery<T> {
    pub record: DecodeRecord,
    /// The recovered secret (plus reference), renormalized.
    pub state: QuditState<T>,
    /// Squared norm of the projection onto `|0⟩` outside the secret.
    pub weight: T,
    /// `|⟨original|recovered⟩|²` before renormalization.
    pub fidelity: T,
}

/// One protocol run on a qualified set.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub qualified: ShareSet,
    pub record: DecodeRecord,
    pub fidelity: f64,
}

/// One row of an access table.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessRow {
    pub shares: ShareSet,
    pub label: AccessLabel,
    pub mutual_information: Option<f64>,
}

/// Everything that happened during a protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolTranscript {
    pub advance_shares: ShareSet,
    pub syndromes: Vec<u8>,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
}

/// A stabilizer code with a chosen advance shareable set, its plan and its
/// encoding circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdvanceScheme {
    code: StabilizerCode,
    plan: EaqeccPlan,
    synthesis: Synthesis,
    pairing: CliffordCircuit,
}

impl AdvanceScheme {
    pub fn new(code: StabilizerCode, j: &ShareSet, budget: EnumerationBudget) -> Result<Self> {
        let plan = construct_eaqecc(&code, j, budget)?;
        let synthesis = synthesize_on(
            code.modulus(),
            plan.register_len(),
            &plan.source,
            &plan.target,
        )?;
        let mut pairing = CliffordCircuit::new(code.modulus(), code.n());
        for (&share, &partner) in j.indices().iter().zip(&plan.pair_shares) {
            pairing.push(Gate::Fourier(partner - 1))?;
            pairing.push(Gate::Sum(partner - 1, share - 1))?;
        }
        Ok(AdvanceScheme {
            code,
            plan,
            synthesis,
            pairing,
        })
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn plan(&self) -> &EaqeccPlan {
        &self.plan
    }

    pub fn synthesis(&self) -> &Synthesis {
        &self.synthesis
    }

    fn register_map(&self) -> Vec<usize> {
        self.plan.complement.iter().map(|s| s - 1).collect()
    }

    fn all_positions(&self) -> Vec<usize> {
        (0..self.code.n()).collect()
    }

    /// Observable with eigenvalues `ω^s` for generator `i`: the check row
    /// itself, times `i` for qubit rows that square to `-1`.
    fn observable_phase(&self, op: &PauliOperator) -> i64 {
        if self.code.modulus().get() == 2 {
            op.x_part()
                .iter()
                .zip(op.z_part())
                .map(|(&a, &b)| (a * b) as i64)
                .sum::<i64>()
                % 2
        } else {
            0
        }
    }

    fn observable_expectation<T: Real>(
        &self,
        state: &QuditState<T>,
        op: &PauliOperator,
    ) -> Complex<T> {
        let p = self.code.modulus().get();
        state.expectation(op, &self.all_positions()) * zeta_pow::<T>(p, self.observable_phase(op))
    }

    /// The advance shares are distributed as halves of maximally entangled
    /// pairs, then the secret (first `k` qudits of `secret`, the rest being a
    /// reference) is encoded on the other shares.
    pub fn encode<T: Real>(
        &self,
        secret: &QuditState<T>,
        budget: usize,
    ) -> Result<EncodedState<T>> {
        let p = self.code.modulus();
        let n = self.code.n();
        let k = self.code.k();
        if secret.modulus() != p || secret.m() < k {
            return Err(Error::DimensionMismatch(format!(
                "secret of {} qudits mod {} for a code with k = {} mod {}",
                secret.m(),
                secret.modulus(),
                k,
                p
            )));
        }
        let reference = secret.m() - k;
        let total = n + reference;
        let dim = check_budget(p, total, budget)?;
        let d = p.as_usize();

        let mut amps = vec![czero::<T>(); dim];
        for (s, &a) in secret.amplitudes().iter().enumerate() {
            let mut idx = 0usize;
            let mut digits = vec![0usize; total];
            for (t, &share) in self.plan.secret_shares.iter().enumerate() {
                digits[share - 1] = digit(s, d, secret.m(), t);
            }
            for r in 0..reference {
                digits[n + r] = digit(s, d, secret.m(), k + r);
            }
            for &v in &digits {
                idx = idx * d + v;
            }
            amps[idx] = a;
        }
        let mut state = QuditState {
            modulus: p,
            m: total,
            amps,
        };
        state.apply_circuit(&self.pairing, &self.all_positions());
        state.apply_circuit(&self.synthesis.circuit.inverse(), &self.register_map());

        let mut syndromes = Vec::with_capacity(self.code.num_generators());
        for g in self.code.generators() {
            let e = self.observable_expectation(&state, &g);
            let s = nearest_root(p, e).ok_or_else(|| {
                Error::Invariant(format!("encoded state is not an eigenstate of {g}"))
            })?;
            syndromes.push(s);
        }
        Ok(EncodedState {
            state,
            syndromes,
            reference,
        })
    }

    /// Loses `erased` (measured and reset to `|0⟩`), measures every
    /// generator, and applies a correction supported on `erased`.
    pub fn erase_and_decode<T: Real, R: Rng + ?Sized>(
        &self,
        encoded: &EncodedState<T>,
        erased: &ShareSet,
        rng: &mut R,
    ) -> Result<(QuditState<T>, DecodeRecord)> {
        if !erasure_correctable(&self.code, erased)? {
            return Err(Error::UncorrectableErasure(erased.indices().to_vec()));
        }
        let p = self.code.modulus();
        let n = self.code.n();
        let positions: Vec<usize> = erased.positions().collect();
        let mut state = encoded.state.clone();
        state.measure_and_reset(&positions, rng)?;

        let mut measured = Vec::with_capacity(self.code.num_generators());
        for g in self.code.generators() {
            measured.push(self.measure_generator(&mut state, &g, rng)?);
        }

        // <f(G_i), (u|v)>_s = measured_i - recorded_i with (u|v) on `erased`
        let check = self.code.check_matrix();
        let mut system = FpMatrix::zeros(p, 0, 2 * positions.len());
        let mut rhs = Vec::new();
        for (i, (&m_i, &s_i)) in measured.iter().zip(&encoded.syndromes).enumerate() {
            let row = check.row(i);
            let mut eq: Vec<u8> = positions.iter().map(|&q| p.neg(row[n + q])).collect();
            eq.extend(positions.iter().map(|&q| row[q]));
            system.push_row(&eq);
            rhs.push(m_i as i64 - s_i as i64);
        }
        let mut x = vec![0i64; n];
        let mut z = vec![0i64; n];
        if !positions.is_empty() {
            let sol = system
                .solve(&FpVector::from_ints(p, &rhs))?
                .ok_or_else(|| Error::UncorrectableErasure(erased.indices().to_vec()))?;
            for (t, &q) in positions.iter().enumerate() {
                x[q] = sol.as_slice()[t] as i64;
                z[q] = sol.as_slice()[positions.len() + t] as i64;
            }
        } else if measured != encoded.syndromes {
            return Err(Error::Invariant(
                "syndrome changed without an erasure".into(),
            ));
        }
        let correction = PauliOperator::new(p, 0, &x, &z)?;
        state.apply_pauli(&correction, &self.all_positions());
        for (g, &s) in self.code.generators().iter().zip(&encoded.syndromes) {
            let e = self.observable_expectation(&state, g);
            if nearest_root(p, e) != Some(s) {
                return Err(Error::Invariant(format!(
                    "correction missed the eigenspace of {g}"
                )));
            }
        }
        Ok((
            state,
            DecodeRecord {
                erased: erased.clone(),
                measured,
                correction,
            },
        ))
    }

    /// Projective measurement of generator `g`; returns the outcome exponent.
    fn measure_generator<T: Real, R: Rng + ?Sized>(
        &self,
        state: &mut QuditState<T>,
        g: &PauliOperator,
        rng: &mut R,
    ) -> Result<u8> {
        let p = self.code.modulus();
        let d = p.as_usize();
        let kappa = self.observable_phase(g);
        let all = self.all_positions();
        // O^r |ψ⟩ for r = 0..p-1
        let mut powers = Vec::with_capacity(d);
        for r in 0..d {
            let op = g.pow(r as u32);
            let mut img = state.clone();
            img.apply_pauli(&op, &all);
            let phase = zeta_pow::<T>(p.get(), kappa * r as i64);
            powers.push(img.amps.into_iter().map(|a| a * phase).collect::<Vec<_>>());
        }
        let inv_p = T::lit(1.0 / d as f64);
        let branches: Vec<Vec<Complex<T>>> = (0..d)
            .map(|s| {
                let mut v = vec![czero::<T>(); state.amps.len()];
                for (r, img) in powers.iter().enumerate() {
                    let w = omega_pow::<T>(p.get(), -((r * s) as i64)) * inv_p;
                    for (vi, &a) in v.iter_mut().zip(img) {
                        *vi = *vi + a * w;
                    }
                }
                v
            })
            .collect();
        let probs: Vec<f64> = branches
            .iter()
            .map(|v| {
                v.iter()
                    .map(|a| a.norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
                    .to_f64()
                    .unwrap_or(0.0)
            })
            .collect();
        let s = sample_index(&probs, rng);
        if probs[s] < NORM_FLOOR {
            return Err(Error::Numerical(
                "syndrome projection has vanishing weight".into(),
            ));
        }
        let scale = T::lit(1.0 / probs[s].sqrt());
        state.amps = branches[s].iter().map(|&a| a * scale).collect();
        Ok(s as u8)
    }

    /// Decodes with every share outside `qualified` lost, undoes the
    /// encoding, and compares the secret register with `original`.
    pub fn reconstruct<T: Real, R: Rng + ?Sized>(
        &self,
        encoded: &EncodedState<T>,
        qualified: &ShareSet,
        original: &QuditState<T>,
        rng: &mut R,
    ) -> Result<Recovery<T>> {
        let (mut state, record) = self.erase_and_decode(encoded, &qualified.complement(), rng)?;
        state.apply_circuit(&self.synthesis.circuit, &self.register_map());
        state.apply_circuit(&self.pairing.inverse(), &self.all_positions());

        let p = self.code.modulus();
        let d = p.as_usize();
        let n = self.code.n();
        let k = self.code.k();
        let out_m = k + encoded.reference;
        let mut out = vec![czero::<T>(); d.pow(out_m as u32)];
        for (idx, &a) in state.amps.iter().enumerate() {
            let clean = (0..n)
                .filter(|q| !self.plan.secret_shares.contains(&(q + 1)))
                .all(|q| digit(idx, d, state.m, q) == 0);
            if !clean {
                continue;
            }
            let mut o = 0;
            for &share in &self.plan.secret_shares {
                o = o * d + digit(idx, d, state.m, share - 1);
            }
            for r in 0..encoded.reference {
                o = o * d + digit(idx, d, state.m, n + r);
            }
            out[o] = a;
        }
        let projected = QuditState {
            modulus: p,
            m: out_m,
            amps: out,
        };
        let weight = projected.norm() * projected.norm();
        let fidelity = original.fidelity(&projected);
        let mut renorm = projected;
        if weight.to_f64().unwrap_or(0.0) > NORM_FLOOR {
            let s = T::one() / weight.sqrt();
            for a in renorm.amps.iter_mut() {
                *a = *a * s;
            }
        }
        Ok(Recovery {
            record,
            state: renorm,
            weight,
            fidelity,
        })
    }

    /// Encodes half of a maximally entangled pair with a `k`-qudit reference.
    pub fn encode_with_reference<T: Real>(&self, budget: usize) -> Result<EncodedState<T>> {
        let secret = QuditState::maximally_entangled(self.code.modulus(), self.code.k());
        self.encode(&secret, budget)
    }

    /// `I(R:A)` in units of `log p` for an encoding made by
    /// [`encode_with_reference`](Self::encode_with_reference).
    pub fn mutual_information<T: Real>(
        encoded: &EncodedState<T>,
        shares: &ShareSet,
    ) -> Result<f64> {
        let n = shares.n();
        let r: Vec<usize> = (n..n + encoded.reference).collect();
        let a: Vec<usize> = shares.positions().collect();
        let ra: Vec<usize> = a.iter().chain(&r).copied().collect();
        let s = &encoded.state;
        Ok(s.entropy_of(&r)? + s.entropy_of(&a)? - s.entropy_of(&ra)?)
    }

    /// Algebraic labels for every subset of shares, with `I(R:A)` when
    /// `entropic` is set.
    pub fn access_table(&self, entropic: bool, budget: usize) -> Result<Vec<AccessRow>> {
        let encoded = if entropic {
            Some(self.encode_with_reference::<f64>(budget)?)
        } else {
            None
        };
        ShareSet::all_subsets(self.code.n())
            .into_iter()
            .map(|a| {
                let label = classify_access(&self.code, &a)?;
                let mutual_information = match &encoded {
                    Some(e) => Some(Self::mutual_information(e, &a)?),
                    None => None,
                };
                Ok(AccessRow {
                    shares: a,
                    label,
                    mutual_information,
                })
            })
            .collect()
    }

    /// Runs `trials` random secrets through every qualified set.
    pub fn run_trials<R: Rng + ?Sized>(
        &self,
        trials: usize,
        budget: usize,
        seed: u64,
        rng: &mut R,
    ) -> Result<ProtocolTranscript> {
        let p = self.code.modulus();
        let k = self.code.k();
        let mut records = Vec::new();
        let mut syndromes = Vec::new();
        if trials > 0 {
            let qualified: Vec<ShareSet> = ShareSet::all_subsets(self.code.n())
                .into_iter()
                .filter(|a| matches!(classify_access(&self.code, a), Ok(AccessLabel::Qualified)))
                .collect();
            for a in &qualified {
                for _ in 0..trials {
                    let secret = QuditState::<f64>::random(p, k, rng);
                    let encoded = self.encode(&secret, budget)?;
                    syndromes = encoded.syndromes.clone();
                    let rec = self.reconstruct(&encoded, a, &secret, rng)?;
                    records.push(TrialRecord {
                        qualified: a.clone(),
                        record: rec.record,
                        fidelity: rec.fidelity,
                    });
                }
            }
        }
        Ok(ProtocolTranscript {
            advance_shares: self.plan.shares().clone(),
            syndromes,
            seed,
            trials: records,
        })
    }
}

/// The `s` with `value ≈ ω^s` within `1e-9`.
fn nearest_root<T: Real>(p: Modulus, value: Complex<T>) -> Option<u8> {
    (0..p.get()).find(|&s| {
        (value - omega_pow::<T>(p.get(), s as i64))
            .norm()
            .to_f64()
            .unwrap_or(1.0)
            <= 1e-9
    })
}
