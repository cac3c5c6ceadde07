//! Clifford circuits over qudits: elementary gates, symbolic conjugation of
//! Pauli operators, dense realization, and synthesis of a circuit that maps
//! one list of generators onto another.
//!
//! Phases produced by conjugation are tracked in powers of `ζ = exp(πi/p)`.
//! For odd `p` they are always even, i.e. powers of `ω = ζ²`; for `p = 2`
//! the phase gate gives `S X S† = i X Z`, which needs the finer unit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::dense::{omega_pow, zeta_pow, DenseMatrix};
use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, FpVector, Modulus};
use crate::pauli::{commutation_matrix, PauliOperator};
use crate::scalar::Real;
use crate::symplectic::{raw_product, SymplecticVector};

/// Default cap on the dimension `p^m` of dense unitaries.
pub const DEFAULT_UNITARY_BUDGET: usize = 1 << 12;

/// Elementary gates. Qudit indices are 0-based within the circuit register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    /// `|j⟩ ↦ p^{-1/2} Σ_k ω^{jk} |k⟩`
    Fourier(usize),
    /// `diag ω^{γ j(j-1)/2}` for odd `p`, `diag(1, i)` for `p = 2`.
    Phase(usize, u8),
    /// `|j⟩ ↦ |γ j⟩`, `γ ≠ 0`
    Multiply(usize, u8),
    /// `|a, b⟩ ↦ |a, a + b⟩` with control first.
    Sum(usize, usize),
    PauliX(usize, u8),
    PauliZ(usize, u8),
}

impl Gate {
    fn qudits(&self) -> Vec<usize> {
        match *self {
            Gate::Sum(c, t) => vec![c, t],
            Gate::Fourier(q)
            | Gate::Phase(q, _)
            | Gate::Multiply(q, _)
            | Gate::PauliX(q, _)
            | Gate::PauliZ(q, _) => vec![q],
        }
    }

    fn check(&self, modulus: Modulus, m: usize) -> Result<()> {
        let p = modulus.get();
        let bad = |msg: String| Err(Error::InvalidGate(msg));
        for q in self.qudits() {
            if q >= m {
                return bad(format!("{self}: qudit {q} outside a register of {m}"));
            }
        }
        match *self {
            Gate::Sum(c, t) if c == t => bad(format!("{self}: control equals target")),
            Gate::Multiply(_, g) if g == 0 || g >= p => {
                bad(format!("{self}: multiplier must be a unit mod {p}"))
            }
            Gate::Phase(_, g) if g == 0 || g >= p => {
                bad(format!("{self}: phase parameter must lie in 1..{p}"))
            }
            Gate::PauliX(_, a) | Gate::PauliZ(_, a) if a >= p => {
                bad(format!("{self}: exponent must lie in 0..{p}"))
            }
            _ => Ok(()),
        }
    }

    /// Gates whose product is the inverse of this one.
    fn inverse(&self, modulus: Modulus) -> Vec<Gate> {
        let p = modulus.get();
        match *self {
            Gate::Fourier(q) => vec![Gate::Fourier(q); 3],
            Gate::Phase(q, g) if p == 2 => vec![Gate::Phase(q, g); 3],
            Gate::Phase(q, g) => vec![Gate::Phase(q, modulus.neg(g))],
            Gate::Multiply(q, g) => vec![Gate::Multiply(q, modulus.inv(g).expect("unit"))],
            Gate::Sum(c, t) => vec![Gate::Sum(c, t); p as usize - 1],
            Gate::PauliX(q, a) => vec![Gate::PauliX(q, modulus.neg(a))],
            Gate::PauliZ(q, b) => vec![Gate::PauliZ(q, modulus.neg(b))],
        }
    }

    /// Single-qudit matrix, or `None` for `Sum`.
    fn local_matrix<T: Real>(&self, modulus: Modulus) -> Option<DenseMatrix<T>> {
        let p = modulus.get();
        let d = p as usize;
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let m = match *self {
            Gate::Fourier(_) => {
                let s = T::one() / T::lit(d as f64).sqrt();
                DenseMatrix::from_fn(d, d, |k, j| omega_pow::<T>(p, (j * k) as i64) * s)
            }
            Gate::Phase(_, g) => DenseMatrix::from_fn(d, d, |r, c| {
                if r == c {
                    zeta_pow(p, phase_gate_exponent(p, g, r as i64))
                } else {
                    zero
                }
            }),
            Gate::Multiply(_, g) => {
                DenseMatrix::from_fn(
                    d,
                    d,
                    |r, c| if r == (g as usize * c) % d { one } else { zero },
                )
            }
            Gate::PauliX(_, a) => {
                DenseMatrix::from_fn(
                    d,
                    d,
                    |r, c| if r == (c + a as usize) % d { one } else { zero },
                )
            }
            Gate::PauliZ(_, b) => DenseMatrix::from_fn(d, d, |r, c| {
                if r == c {
                    omega_pow(p, (b as usize * c) as i64)
                } else {
                    zero
                }
            }),
            Gate::Sum(..) => return None,
        };
        Some(m)
    }
}

/// Diagonal entry of the phase gate at `|j⟩`, in powers of `ζ`.
fn phase_gate_exponent(p: u8, gamma: u8, j: i64) -> i64 {
    if p == 2 {
        j
    } else {
        gamma as i64 * j * (j - 1)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Fourier(q) => write!(f, "F {q}"),
            Gate::Phase(q, g) => write!(f, "P {q} {g}"),
            Gate::Multiply(q, g) => write!(f, "MUL {q} {g}"),
            Gate::Sum(c, t) => write!(f, "SUM {c} {t}"),
            Gate::PauliX(q, a) => write!(f, "X {q} {a}"),
            Gate::PauliZ(q, b) => write!(f, "Z {q} {b}"),
        }
    }
}

/// `ζ^phase X(x) Z(z)` with the phase counted mod `2p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasedPauli {
    pub zeta_phase: u8,
    pub vector: SymplecticVector,
}

impl PhasedPauli {
    pub fn from_pauli(op: &PauliOperator) -> Self {
        PhasedPauli {
            zeta_phase: 2 * op.phase(),
            vector: op.to_vector().clone(),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.vector.modulus()
    }

    /// The same operator as a canonical Pauli, when the phase is a power of `ω`.
    pub fn to_pauli(&self) -> Option<PauliOperator> {
        self.zeta_phase
            .is_multiple_of(2)
            .then(|| PauliOperator::from_vector(self.vector.clone(), (self.zeta_phase / 2) as i64))
    }

    pub fn to_dense<T: Real>(&self) -> DenseMatrix<T> {
        let p = self.modulus().get();
        PauliOperator::from_vector(self.vector.clone(), 0)
            .to_dense::<T>()
            .scale(zeta_pow(p, self.zeta_phase as i64))
    }
}

/// Ordered gate list on `m` qudits; the first gate acts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    modulus: Modulus,
    m: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(modulus: Modulus, m: usize) -> Self {
        CliffordCircuit {
            modulus,
            m,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(modulus: Modulus, m: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(modulus, m);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.modulus, self.m)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn inverse(&self) -> CliffordCircuit {
        let gates = self
            .gates
            .iter()
            .rev()
            .flat_map(|g| g.inverse(self.modulus))
            .collect();
        CliffordCircuit {
            modulus: self.modulus,
            m: self.m,
            gates,
        }
    }

    /// `U P U†` where `U` is this circuit.
    pub fn conjugate(&self, op: &PhasedPauli) -> Result<PhasedPauli> {
        if op.vector.n() != self.m || op.modulus() != self.modulus {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} qudits mod {} against a circuit on {} mod {}",
                op.vector.n(),
                op.modulus(),
                self.m,
                self.modulus
            )));
        }
        let p = self.modulus;
        let m = self.m;
        let two_p = 2 * p.get() as i64;
        let mut x: Vec<i64> = op.vector.x_part().iter().map(|&v| v as i64).collect();
        let mut z: Vec<i64> = op.vector.z_part().iter().map(|&v| v as i64).collect();
        let mut phase = op.zeta_phase as i64;
        let r = |v: i64| p.reduce(v) as i64;
        for gate in &self.gates {
            match *gate {
                Gate::Fourier(q) => {
                    phase -= 2 * x[q] * z[q];
                    let (nx, nz) = (r(-z[q]), x[q]);
                    x[q] = nx;
                    z[q] = nz;
                }
                Gate::Phase(q, g) => {
                    phase += if p.get() == 2 {
                        x[q]
                    } else {
                        g as i64 * x[q] * (x[q] - 1)
                    };
                    z[q] = r(z[q] + g as i64 * x[q]);
                }
                Gate::Multiply(q, g) => {
                    let inv = p.inv(g).expect("unit") as i64;
                    x[q] = r(x[q] * g as i64);
                    z[q] = r(z[q] * inv);
                }
                Gate::Sum(c, t) => {
                    x[t] = r(x[t] + x[c]);
                    z[c] = r(z[c] - z[t]);
                }
                Gate::PauliX(q, a) => phase -= 2 * a as i64 * z[q],
                Gate::PauliZ(q, b) => phase += 2 * b as i64 * x[q],
            }
            phase = phase.rem_euclid(two_p);
        }
        let vector = SymplecticVector::new(
            FpVector::from_ints(p, &x[..m]),
            FpVector::from_ints(p, &z[..m]),
        )?;
        Ok(PhasedPauli {
            zeta_phase: phase as u8,
            vector,
        })
    }

    /// Symbolic conjugation of a canonical Pauli.
    pub fn conjugate_pauli(&self, op: &PauliOperator) -> Result<PhasedPauli> {
        self.conjugate(&PhasedPauli::from_pauli(op))
    }

    /// The induced linear map on `F_p^{2m}`, as a matrix acting on columns.
    pub fn symplectic_map(&self) -> SymplecticMap {
        let p = self.modulus;
        let m = self.m;
        let mut matrix = FpMatrix::zeros(p, 2 * m, 2 * m);
        for col in 0..2 * m {
            let mut coords = vec![0u8; 2 * m];
            coords[col] = 1;
            let v = SymplecticVector::from_coords(m, FpVector::from_residues(p, coords).unwrap())
                .expect("2m coordinates");
            let image = self
                .conjugate(&PhasedPauli {
                    zeta_phase: 0,
                    vector: v,
                })
                .expect("matching shape");
            for (row, &val) in image.vector.as_slice().iter().enumerate() {
                matrix.set(row, col, val);
            }
        }
        SymplecticMap { m, matrix }
    }

    /// Applies the circuit to a state vector of `total` qudits, with circuit
    /// qudit `q` acting on state qudit `map[q]` (qudit 0 most significant).
    pub fn apply<T: Real>(&self, amps: &mut [Complex<T>], total: usize, map: &[usize]) {
        assert_eq!(map.len(), self.m, "register map has the wrong length");
        let d = self.modulus.as_usize();
        assert_eq!(
            amps.len(),
            d.pow(total as u32),
            "state has the wrong length"
        );
        let stride = |q: usize| d.pow((total - 1 - map[q]) as u32);
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); amps.len()];
        for gate in &self.gates {
            if let Gate::Sum(c, t) = *gate {
                let (sc, st) = (stride(c), stride(t));
                for (idx, slot) in scratch.iter_mut().enumerate() {
                    // new[.., a, b, ..] = old[.., a, b - a, ..]
                    let a = (idx / sc) % d;
                    let b = (idx / st) % d;
                    let src = idx - b * st + ((b + d - a) % d) * st;
                    *slot = amps[src];
                }
                amps.copy_from_slice(&scratch);
                continue;
            }
            let local = gate
                .local_matrix::<T>(self.modulus)
                .expect("single-qudit gate");
            let s = stride(gate.qudits()[0]);
            for base in 0..amps.len() {
                if (base / s) % d != 0 {
                    continue;
                }
                let input: Vec<Complex<T>> = (0..d).map(|j| amps[base + j * s]).collect();
                for r in 0..d {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (j, &v) in input.iter().enumerate() {
                        acc = acc + local.get(r, j) * v;
                    }
                    amps[base + r * s] = acc;
                }
            }
        }
    }

    /// Dense unitary of dimension `p^m`; refuses above `budget`.
    pub fn to_unitary<T: Real>(&self, budget: usize) -> Result<DenseMatrix<T>> {
        let dim = (self.modulus.as_usize() as u128).pow(self.m as u32);
        if dim > budget as u128 {
            return Err(Error::DenseBudget {
                required: dim,
                budget: budget as u128,
            });
        }
        let dim = dim as usize;
        let map: Vec<usize> = (0..self.m).collect();
        let mut columns = Vec::with_capacity(dim);
        for col in 0..dim {
            let mut v = vec![Complex::new(T::zero(), T::zero()); dim];
            v[col] = Complex::new(T::one(), T::zero());
            self.apply(&mut v, self.m, &map);
            columns.push(v);
        }
        Ok(DenseMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p={} m={}", self.modulus, self.m)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for CliffordCircuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut circuit: Option<CliffordCircuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let Some(c) = circuit.as_mut() else {
                let (mut p, mut m) = (None, None);
                for w in &words {
                    match w.split_once('=') {
                        Some(("p", v)) => p = v.parse::<u32>().ok(),
                        Some(("m", v)) => m = v.parse::<usize>().ok(),
                        _ => return Err(err(format!("unexpected header field `{w}`"))),
                    }
                }
                let (Some(p), Some(m)) = (p, m) else {
                    return Err(err("header must read `p=<prime> m=<count>`".into()));
                };
                let modulus = Modulus::new(p).map_err(|e| err(e.to_string()))?;
                circuit = Some(CliffordCircuit::new(modulus, m));
                continue;
            };
            let nums: Vec<u64> = words[1..]
                .iter()
                .map(|w| {
                    w.parse::<u64>()
                        .map_err(|_| err(format!("not a number: `{w}`")))
                })
                .collect::<Result<_>>()?;
            let arity = |k: usize| {
                if nums.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("`{}` takes {} arguments", words[0], k)))
                }
            };
            let small = |v: u64| u8::try_from(v).map_err(|_| err(format!("{v} is too large")));
            let gate = match words[0] {
                "F" => {
                    arity(1)?;
                    Gate::Fourier(nums[0] as usize)
                }
                "P" => {
                    arity(2)?;
                    Gate::Phase(nums[0] as usize, small(nums[1])?)
                }
                "MUL" => {
                    arity(2)?;
                    Gate::Multiply(nums[0] as usize, small(nums[1])?)
                }
                "SUM" => {
                    arity(2)?;
                    Gate::Sum(nums[0] as usize, nums[1] as usize)
                }
                "X" => {
                    arity(2)?;
                    Gate::PauliX(nums[0] as usize, small(nums[1])?)
                }
                "Z" => {
                    arity(2)?;
                    Gate::PauliZ(nums[0] as usize, small(nums[1])?)
                }
                other => return Err(err(format!("unknown gate `{other}`"))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            message: "missing header".into(),
        })
    }
}

/// Linear map on `F_p^{2m}` acting on column vectors `(x|z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticMap {
    pub m: usize,
    pub matrix: FpMatrix,
}

impl SymplecticMap {
    /// `Mᵀ Ω M = Ω`, checked on all pairs of basis images.
    pub fn is_symplectic(&self) -> bool {
        let p = self.matrix.modulus();
        let cols = self.matrix.transpose();
        (0..2 * self.m).all(|a| {
            (0..2 * self.m).all(|b| {
                let expected = match (a < self.m, b < self.m) {
                    (true, false) if b - self.m == a => 1,
                    (false, true) if a - self.m == b => p.neg(1),
                    _ => 0,
                };
                raw_product(p, cols.row(a), cols.row(b), self.m) == expected
            })
        })
    }

    pub fn apply(&self, v: &[u8]) -> Vec<u8> {
        let col = FpVector::from_residues(self.matrix.modulus(), v.to_vec()).expect("residues");
        self.matrix.mul_vec(&col).expect("2m entries").into_inner()
    }
}

/// A circuit with `U g_i U† = ζ^{t_i} b_i` for source `g` and target `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synthesis {
    pub circuit: CliffordCircuit,
    /// `t_i` in powers of `ζ = exp(πi/p)`; zero unless `p = 2` and the
    /// operators differ in whether they square to `-1`.
    pub zeta_phases: Vec<u8>,
}

/// Finds a Clifford `U` with `U source_i U† ∝ target_i`, the constants being
/// as close to 1 as the squares of the operators allow.
pub fn synthesize(source: &[PauliOperator], target: &[PauliOperator]) -> Result<Synthesis> {
    if source.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source generators against {} targets",
            source.len(),
            target.len()
        )));
    }
    let Some(first) = source.first().or(target.first()) else {
        return Err(Error::DimensionMismatch(
            "cannot infer the register from empty lists".into(),
        ));
    };
    synthesize_on(first.modulus(), first.n(), source, target)
}

/// As [`synthesize`], with the register given explicitly so that empty
/// lists are allowed.
pub fn synthesize_on(
    modulus: Modulus,
    m: usize,
    source: &[PauliOperator],
    target: &[PauliOperator],
) -> Result<Synthesis> {
    if source.len() != target.len() || source.len() > 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "{} source and {} target generators on {} qudits",
            source.len(),
            target.len(),
            m
        )));
    }
    for op in source.iter().chain(target) {
        if op.n() != m || op.modulus() != modulus {
            return Err(Error::DimensionMismatch(format!(
                "generator {op} does not live on {m} qudits mod {modulus}"
            )));
        }
    }
    let gs = commutation_matrix(source)?;
    let gt = commutation_matrix(target)?;
    for a in 0..source.len() {
        for b in 0..source.len() {
            if gs[a][b] != gt[a][b] {
                return Err(Error::GramMismatch(a + 1, b + 1));
            }
        }
    }
    let rows = |ops: &[PauliOperator]| {
        let vs: Vec<Vec<u8>> = ops
            .iter()
            .map(|o| o.to_vector().as_slice().to_vec())
            .collect();
        FpMatrix::from_rows(modulus, 2 * m, &vs).expect("2m columns")
    };
    if rows(source).rank() < source.len() || rows(target).rank() < target.len() {
        return Err(Error::DependentGenerators);
    }

    let src: Vec<Vec<u8>> = source
        .iter()
        .map(|o| o.to_vector().as_slice().to_vec())
        .collect();
    let tgt: Vec<Vec<u8>> = target
        .iter()
        .map(|o| o.to_vector().as_slice().to_vec())
        .collect();
    let (b1, b2) = matched_symplectic_bases(modulus, m, src, tgt)?;

    // S with S·u_k = w_k; reduce A = S^{-1} = B1ᵀ (B2ᵀ)^{-1} to the identity.
    let b2t_inv = b2
        .transpose()
        .inverse()
        .ok_or_else(|| Error::Invariant("completed basis is singular".into()))?;
    let mut a = b1.transpose().mul(&b2t_inv)?;
    let mut circuit = CliffordCircuit::new(modulus, m);
    reduce_to_identity(&mut a, m, &mut circuit)?;

    // Pauli fixup: cancel the even part of every phase.
    let mut images = Vec::with_capacity(source.len());
    for op in source {
        images.push(circuit.conjugate_pauli(op)?);
    }
    let p = modulus;
    let mut constraints = FpMatrix::zeros(p, 0, 2 * m);
    let mut rhs = Vec::with_capacity(source.len());
    for (img, t) in images.iter().zip(target) {
        if img.vector != *t.to_vector() {
            return Err(Error::Invariant(format!(
                "circuit sends a generator to {} instead of {}",
                img.vector,
                t.to_vector()
            )));
        }
        // with Q = X(u)Z(v): Q b Q† = ω^{-<(u|v), f(b)>_s} b
        let (bx, bz) = (t.x_part(), t.z_part());
        let row: Vec<u8> = bz
            .iter()
            .copied()
            .chain(bx.iter().map(|&v| p.neg(v)))
            .collect();
        constraints.push_row(&row);
        let phase = img.zeta_phase as i64 - 2 * t.phase() as i64;
        rhs.push(p.reduce(phase.div_euclid(2)) as i64);
    }
    if !source.is_empty() {
        let b = FpVector::from_ints(p, &rhs);
        let uv = constraints
            .solve(&b)?
            .ok_or_else(|| Error::Invariant("phase fixup has no solution".into()))?;
        for q in 0..m {
            let u = uv.as_slice()[q];
            if u != 0 {
                circuit.push(Gate::PauliX(q, u))?;
            }
        }
        for q in 0..m {
            let v = uv.as_slice()[m + q];
            if v != 0 {
                circuit.push(Gate::PauliZ(q, v))?;
            }
        }
    }

    let mut zeta_phases = Vec::with_capacity(source.len());
    for (op, t) in source.iter().zip(target) {
        let img = circuit.conjugate_pauli(op)?;
        let rel = (img.zeta_phase as i64 - 2 * t.phase() as i64).rem_euclid(2 * p.get() as i64);
        zeta_phases.push(rel as u8);
    }
    Ok(Synthesis {
        circuit,
        zeta_phases,
    })
}

/// Largest Frobenius deviation `‖U g_i U† − ζ^{t_i} b_i‖` over all pairs.
pub fn conjugation_residual<T: Real>(
    synthesis: &Synthesis,
    source: &[PauliOperator],
    target: &[PauliOperator],
    budget: usize,
) -> Result<T> {
    let u = synthesis.circuit.to_unitary::<T>(budget)?;
    let ud = u.adjoint();
    let p = synthesis.circuit.modulus().get();
    let mut worst = T::zero();
    for ((g, b), &t) in source.iter().zip(target).zip(&synthesis.zeta_phases) {
        let lhs = u.mul(&g.to_dense()).mul(&ud);
        let rhs = b.to_dense::<T>().scale(zeta_pow(p, t as i64));
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

fn product(p: Modulus, u: &[u8], v: &[u8], m: usize) -> u8 {
    raw_product(p, u, v, m)
}

fn axpy(p: Modulus, y: &mut [u8], a: u8, x: &[u8]) {
    if a == 0 {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = p.add(*yi, p.mul(a, xi));
    }
}

/// Hyperbolic pairs and isotropic leftovers of a symplectic Gram-Schmidt.
struct Decomposition {
    pairs: Vec<(Vec<u8>, Vec<u8>)>,
    isotropic: Vec<Vec<u8>>,
}

/// Symplectic Gram-Schmidt run on two lists in lockstep. Every choice is made
/// from products in the first list; equal commutation patterns make the same
/// choices valid for the second.
fn gram_schmidt_pair(
    p: Modulus,
    m: usize,
    first: Vec<Vec<u8>>,
    second: Vec<Vec<u8>>,
) -> (Decomposition, Decomposition) {
    let mut rest: Vec<(Vec<u8>, Vec<u8>)> = first.into_iter().zip(second).collect();
    let mut d1 = Decomposition {
        pairs: Vec::new(),
        isotropic: Vec::new(),
    };
    let mut d2 = Decomposition {
        pairs: Vec::new(),
        isotropic: Vec::new(),
    };
    loop {
        let found = (0..rest.len()).find_map(|a| {
            (a + 1..rest.len())
                .find(|&b| product(p, &rest[a].0, &rest[b].0, m) != 0)
                .map(|b| (a, b))
        });
        let Some((a, b)) = found else { break };
        let (f1, f2) = rest.remove(b);
        let (e1, e2) = rest.remove(a);
        let s = p.inv(product(p, &e1, &f1, m)).expect("nonzero");
        let scale = |v: &[u8]| v.iter().map(|&x| p.mul(x, s)).collect::<Vec<u8>>();
        let (f1, f2) = (scale(&f1), scale(&f2));
        for (c1, c2) in rest.iter_mut() {
            // c ← c − <c,f> e + <c,e> f
            let cf = product(p, c1, &f1, m);
            let ce = product(p, c1, &e1, m);
            axpy(p, c1, p.neg(cf), &e1);
            axpy(p, c1, ce, &f1);
            axpy(p, c2, p.neg(cf), &e2);
            axpy(p, c2, ce, &f2);
        }
        d1.pairs.push((e1, f1));
        d2.pairs.push((e2, f2));
    }
    for (c1, c2) in rest {
        d1.isotropic.push(c1);
        d2.isotropic.push(c2);
    }
    (d1, d2)
}

/// Completes a decomposition to a full symplectic basis of `F_p^{2m}`,
/// returned as rows `e_1..e_m, f_1..f_m`.
fn complete_basis(p: Modulus, m: usize, d: Decomposition) -> Result<FpMatrix> {
    let mut es: Vec<Vec<u8>> = Vec::new();
    let mut fs: Vec<Vec<u8>> = Vec::new();
    for (e, f) in d.pairs {
        es.push(e);
        fs.push(f);
    }
    // constraint row for <v, w>_s as a linear form in v
    let form = |w: &[u8]| -> Vec<u8> {
        let (wx, wz) = w.split_at(m);
        wz.iter()
            .copied()
            .chain(wx.iter().map(|&v| p.neg(v)))
            .collect()
    };
    let s = d.isotropic.len();
    let mut partners: Vec<Vec<u8>> = Vec::with_capacity(s);
    for j in 0..s {
        let mut a = FpMatrix::zeros(p, 0, 2 * m);
        let mut b = Vec::new();
        for w in es.iter().chain(&fs) {
            a.push_row(&form(w));
            b.push(0);
        }
        for (l, h) in d.isotropic.iter().enumerate() {
            // <h_l, v> = δ_{jl}, i.e. <v, h_l> = -δ_{jl}
            a.push_row(&form(h));
            b.push(if l == j { -1 } else { 0 });
        }
        let v = a
            .solve(&FpVector::from_ints(p, &b))?
            .ok_or_else(|| Error::Invariant("no symplectic partner".into()))?;
        let mut v = v.into_inner();
        for l in 0..j {
            let c = product(p, &v, &partners[l], m);
            axpy(p, &mut v, p.neg(c), &d.isotropic[l]);
        }
        partners.push(v);
    }
    for (h, v) in d.isotropic.into_iter().zip(partners) {
        es.push(h);
        fs.push(v);
    }
    // the rest of the space: the symplectic complement of what we have
    if es.len() < m {
        let mut a = FpMatrix::zeros(p, 0, 2 * m);
        for w in es.iter().chain(&fs) {
            a.push_row(&form(w));
        }
        let complement: Vec<Vec<u8>> = a
            .kernel()
            .row_vectors()
            .into_iter()
            .map(|v| v.into_inner())
            .collect();
        let (extra, _) = gram_schmidt_pair(p, m, complement.clone(), complement);
        if !extra.isotropic.is_empty() {
            return Err(Error::Invariant(
                "symplectic complement is degenerate".into(),
            ));
        }
        for (e, f) in extra.pairs {
            es.push(e);
            fs.push(f);
        }
    }
    if es.len() != m {
        return Err(Error::Invariant(
            "basis completion has the wrong size".into(),
        ));
    }
    let rows: Vec<Vec<u8>> = es.into_iter().chain(fs).collect();
    FpMatrix::from_rows(p, 2 * m, &rows)
}

fn matched_symplectic_bases(
    p: Modulus,
    m: usize,
    source: Vec<Vec<u8>>,
    target: Vec<Vec<u8>>,
) -> Result<(FpMatrix, FpMatrix)> {
    let (d1, d2) = gram_schmidt_pair(p, m, source, target);
    Ok((complete_basis(p, m, d1)?, complete_basis(p, m, d2)?))
}

/// Applies `gate` to every column of `a` and records it.
fn emit(a: &mut FpMatrix, m: usize, circuit: &mut CliffordCircuit, gate: Gate) -> Result<()> {
    let p = a.modulus();
    let one = CliffordCircuit::from_gates(p, m, vec![gate])?;
    for col in 0..a.cols() {
        let coords: Vec<u8> = (0..2 * m).map(|r| a.get(r, col)).collect();
        let v = SymplecticVector::from_coords(m, FpVector::from_residues(p, coords)?)?;
        let img = one.conjugate(&PhasedPauli {
            zeta_phase: 0,
            vector: v,
        })?;
        for (r, &val) in img.vector.as_slice().iter().enumerate() {
            a.set(r, col, val);
        }
    }
    circuit.push(gate)
}

/// Left-multiplies the symplectic matrix `a` by gate actions until it is the
/// identity, appending each gate to `circuit`.
fn reduce_to_identity(a: &mut FpMatrix, m: usize, circuit: &mut CliffordCircuit) -> Result<()> {
    let p = a.modulus();
    let x = |a: &FpMatrix, col: usize, q: usize| a.get(q, col);
    let z = |a: &FpMatrix, col: usize, q: usize| a.get(m + q, col);
    for i in 0..m {
        let (cx, cz) = (i, m + i);
        // column i → e_{x_i}
        for q in i..m {
            if x(a, cx, q) == 0 && z(a, cx, q) != 0 {
                emit(a, m, circuit, Gate::Fourier(q))?;
            }
        }
        for q in i..m {
            let (xv, zv) = (x(a, cx, q), z(a, cx, q));
            if xv != 0 && zv != 0 {
                let g = p.mul(p.neg(zv), p.inv(xv).expect("nonzero"));
                emit(a, m, circuit, Gate::Phase(q, g))?;
            }
        }
        if x(a, cx, i) == 0 {
            let q = (i + 1..m)
                .find(|&q| x(a, cx, q) != 0)
                .ok_or_else(|| Error::Invariant("column vanished during reduction".into()))?;
            emit(a, m, circuit, Gate::Sum(q, i))?;
        }
        for q in i + 1..m {
            let xq = x(a, cx, q);
            if xq != 0 {
                let k = p.mul(p.neg(xq), p.inv(x(a, cx, i)).expect("nonzero"));
                for _ in 0..k {
                    emit(a, m, circuit, Gate::Sum(i, q))?;
                }
            }
        }
        let xi = x(a, cx, i);
        if xi != 1 {
            emit(
                a,
                m,
                circuit,
                Gate::Multiply(i, p.inv(xi).expect("nonzero")),
            )?;
        }

        // column m+i → e_{z_i}, keeping e_{x_i} fixed
        for q in i + 1..m {
            let (xv, zv) = (x(a, cz, q), z(a, cz, q));
            if xv != 0 {
                if zv != 0 {
                    let g = p.mul(p.neg(zv), p.inv(xv).expect("nonzero"));
                    emit(a, m, circuit, Gate::Phase(q, g))?;
                }
                emit(a, m, circuit, Gate::Fourier(q))?;
            }
        }
        if z(a, cz, i) != 1 {
            return Err(Error::Invariant("reduced matrix is not symplectic".into()));
        }
        for q in i + 1..m {
            for _ in 0..z(a, cz, q) {
                emit(a, m, circuit, Gate::Sum(q, i))?;
            }
        }
        let shear = x(a, cz, i);
        if shear != 0 {
            emit(a, m, circuit, Gate::Fourier(i))?;
            emit(a, m, circuit, Gate::Phase(i, shear))?;
            emit(a, m, circuit, Gate::Fourier(i))?;
            emit(a, m, circuit, Gate::Multiply(i, p.neg(1)))?;
        }
    }
    if *a != FpMatrix::identity(p, 2 * m) {
        return Err(Error::Invariant(
            "symplectic reduction did not finish".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(p: u32) -> Modulus {
        Modulus::new(p).unwrap()
    }

    fn pauli(p: u32, x: &[i64], z: &[i64]) -> PauliOperator {
        PauliOperator::new(m(p), 0, x, z).unwrap()
    }

    const BUDGET: usize = DEFAULT_UNITARY_BUDGET;

    #[test]
    fn empty_circuit_is_identity() {
        let c = CliffordCircuit::new(m(3), 2);
        let u = c.to_unitary::<f64>(BUDGET).unwrap();
        assert!(u.distance(&DenseMatrix::identity(9)) < 1e-12);
        let op = pauli(3, &[1, 2], &[0, 1]);
        assert_eq!(c.conjugate_pauli(&op).unwrap().to_pauli().unwrap(), op);
    }

    #[test]
    fn qubit_fourier_is_hadamard() {
        let c = CliffordCircuit::from_gates(m(2), 1, vec![Gate::Fourier(0)]).unwrap();
        let u = c.to_unitary::<f64>(BUDGET).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let h = DenseMatrix::from_fn(2, 2, |r, c| {
            Complex::new(if r == 1 && c == 1 { -s } else { s }, 0.0)
        });
        assert!(u.distance(&h) < 1e-12);
        let x = pauli(2, &[1], &[0]);
        let img = c.conjugate_pauli(&x).unwrap().to_pauli().unwrap();
        assert_eq!(img, pauli(2, &[0], &[1]));
    }

    #[test]
    fn qubit_sum_is_cnot() {
        let c = CliffordCircuit::from_gates(m(2), 2, vec![Gate::Sum(0, 1)]).unwrap();
        let u = c.to_unitary::<f64>(BUDGET).unwrap();
        let perm = [0usize, 1, 3, 2];
        let cnot = DenseMatrix::from_fn(4, 4, |r, c| {
            Complex::new(if perm[c] == r { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(u.distance(&cnot) < 1e-12);
        let xi = pauli(2, &[1, 0], &[0, 0]);
        let img = c.conjugate_pauli(&xi).unwrap().to_pauli().unwrap();
        assert_eq!(img, pauli(2, &[1, 1], &[0, 0]));
    }

    #[test]
    fn qubit_phase_gate_gives_i() {
        let c = CliffordCircuit::from_gates(m(2), 1, vec![Gate::Phase(0, 1)]).unwrap();
        let img = c.conjugate_pauli(&pauli(2, &[1], &[0])).unwrap();
        assert_eq!(img.zeta_phase, 1);
        assert_eq!(img.vector.as_slice(), &[1, 1]);
    }

    #[test]
    fn qutrit_fourier_sends_x_to_z() {
        let source = [pauli(3, &[1], &[0])];
        let target = [pauli(3, &[0], &[1])];
        let c = CliffordCircuit::from_gates(m(3), 1, vec![Gate::Fourier(0)]).unwrap();
        let syn = Synthesis {
            circuit: c,
            zeta_phases: vec![0],
        };
        assert!(conjugation_residual::<f64>(&syn, &source, &target, BUDGET).unwrap() < 1e-12);
        let found = synthesize(&source, &target).unwrap();
        assert!(conjugation_residual::<f64>(&found, &source, &target, BUDGET).unwrap() < 1e-10);
    }

    #[test]
    fn synthesis_of_identical_lists() {
        let g = vec![
            pauli(2, &[1, 1, 1], &[0, 0, 0]),
            pauli(2, &[0, 0, 0], &[1, 1, 1]),
        ];
        let syn = synthesize(&g, &g).unwrap();
        assert_eq!(syn.zeta_phases, vec![0, 0]);
        assert!(conjugation_residual::<f64>(&syn, &g, &g, BUDGET).unwrap() < 1e-10);
    }

    #[test]
    fn synthesis_of_the_three_qubit_pair() {
        let g = vec![
            pauli(2, &[1, 1, 1], &[0, 0, 0]),
            pauli(2, &[0, 0, 0], &[1, 1, 1]),
        ];
        let b = vec![
            pauli(2, &[1, 0, 0], &[0, 0, 0]),
            pauli(2, &[0, 0, 0], &[1, 0, 0]),
        ];
        let syn = synthesize(&g, &b).unwrap();
        assert!(conjugation_residual::<f64>(&syn, &g, &b, BUDGET).unwrap() < 1e-10);
        assert!(syn
            .circuit
            .to_unitary::<f64>(BUDGET)
            .unwrap()
            .is_unitary(1e-10));
    }

    #[test]
    fn qubit_square_mismatch_leaves_odd_phase() {
        // XZ squares to -1, X to +1: no unitary can map one exactly onto the other
        let g = vec![pauli(2, &[1], &[1])];
        let b = vec![pauli(2, &[1], &[0])];
        let syn = synthesize(&g, &b).unwrap();
        assert_eq!(syn.zeta_phases[0] % 2, 1);
        assert!(conjugation_residual::<f64>(&syn, &g, &b, BUDGET).unwrap() < 1e-10);
    }

    #[test]
    fn synthesis_rejects_bad_inputs() {
        let x = pauli(3, &[1, 0], &[0, 0]);
        let z = pauli(3, &[0, 0], &[1, 0]);
        let z2 = pauli(3, &[0, 0], &[0, 1]);
        assert_eq!(
            synthesize(&[x.clone(), z.clone()], &[x.clone(), z2.clone()]),
            Err(Error::GramMismatch(1, 2))
        );
        let x2 = x.pow(2);
        assert_eq!(
            synthesize(&[x.clone(), x2.clone()], &[z.clone(), z.pow(2)]),
            Err(Error::DependentGenerators)
        );
    }

    #[test]
    fn text_round_trip() {
        let c = CliffordCircuit::from_gates(
            m(5),
            3,
            vec![
                Gate::Fourier(0),
                Gate::Phase(1, 3),
                Gate::Multiply(2, 4),
                Gate::Sum(0, 2),
                Gate::PauliX(1, 2),
                Gate::PauliZ(0, 1),
            ],
        )
        .unwrap();
        let text = c.to_string();
        assert_eq!(text.parse::<CliffordCircuit>().unwrap(), c);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let err = "p=3 m=2\n# fine\nSUM 0 0\n"
            .parse::<CliffordCircuit>()
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = "p=4 m=2\n".parse::<CliffordCircuit>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = "p=3 m=2\nH 0\n".parse::<CliffordCircuit>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn budget_is_enforced() {
        let c = CliffordCircuit::new(m(7), 5);
        assert!(matches!(
            c.to_unitary::<f64>(BUDGET),
            Err(Error::DenseBudget { .. })
        ));
    }

    fn arb_gate(p: u8, n: usize) -> impl Strategy<Value = Gate> {
        let q = 0..n;
        prop_oneof![
            q.clone().prop_map(Gate::Fourier),
            (q.clone(), 1..p).prop_map(move |(q, g)| Gate::Phase(q, if p == 2 { 1 } else { g })),
            (q.clone(), 1..p).prop_map(|(q, g)| Gate::Multiply(q, g)),
            (q.clone(), 1..n.max(2)).prop_map(move |(c, s)| Gate::Sum(c, (c + s) % n.max(2))),
            (q.clone(), 0..p).prop_map(|(q, a)| Gate::PauliX(q, a)),
            (q, 0..p).prop_map(|(q, b)| Gate::PauliZ(q, b)),
        ]
    }

    fn arb_circuit() -> impl Strategy<Value = (CliffordCircuit, PauliOperator)> {
        let shapes = vec![(2u8, 2usize), (2, 3), (3, 2), (3, 3), (5, 2)];
        prop::sample::select(shapes).prop_flat_map(|(p, n)| {
            let modulus = m(p as u32);
            (
                prop::collection::vec(arb_gate(p, n), 0..12),
                0..p as i64,
                prop::collection::vec(0..p as i64, 2 * n),
            )
                .prop_map(move |(gates, t, v)| {
                    let c = CliffordCircuit::from_gates(modulus, n, gates).unwrap();
                    let op = PauliOperator::new(modulus, t, &v[..n], &v[n..]).unwrap();
                    (c, op)
                })
        })
    }

    fn arb_generators() -> impl Strategy<Value = (Vec<PauliOperator>, Vec<PauliOperator>)> {
        // target = random circuit applied to a random independent source list,
        // with the phases dropped
        (arb_circuit(), any::<u64>()).prop_filter_map("dependent", |((c, _), seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = c.modulus();
            let n = c.m();
            let r = rng.random_range(1..=2 * n);
            let mut src = Vec::new();
            let mut rows = FpMatrix::zeros(p, 0, 2 * n);
            for _ in 0..4 * n {
                let v: Vec<i64> = (0..2 * n)
                    .map(|_| rng.random_range(0..p.get() as i64))
                    .collect();
                let op = PauliOperator::new(p, 0, &v[..n], &v[n..]).unwrap();
                let mut trial = rows.clone();
                trial.push_row(op.to_vector().as_slice());
                if trial.rank() > rows.rank() && src.len() < r {
                    rows = trial;
                    src.push(op);
                }
            }
            let tgt: Vec<PauliOperator> = src
                .iter()
                .map(|g| PauliOperator::from_vector(c.conjugate_pauli(g).unwrap().vector, 0))
                .collect();
            (!src.is_empty()).then_some((src, tgt))
        })
    }

    proptest! {
        #[test]
        fn symbolic_matches_dense((c, op) in arb_circuit()) {
            let u = c.to_unitary::<f64>(BUDGET).unwrap();
            let lhs = u.mul(&op.to_dense()).mul(&u.adjoint());
            let img = c.conjugate_pauli(&op).unwrap();
            prop_assert!(lhs.distance(&img.to_dense()) < 1e-9);
        }

        #[test]
        fn circuits_are_unitary_and_invertible((c, op) in arb_circuit()) {
            let u = c.to_unitary::<f64>(BUDGET).unwrap();
            prop_assert!(u.is_unitary(1e-10));
            let back = c.inverse().to_unitary::<f64>(BUDGET).unwrap();
            prop_assert!(back.mul(&u).distance(&DenseMatrix::identity(u.rows())) < 1e-9);
            let there = c.conjugate_pauli(&op).unwrap();
            let again = c.inverse().conjugate(&there).unwrap();
            prop_assert_eq!(again, PhasedPauli::from_pauli(&op));
        }

        #[test]
        fn induced_map_is_symplectic((c, _op) in arb_circuit()) {
            prop_assert!(c.symplectic_map().is_symplectic());
        }

        #[test]
        fn synthesis_meets_the_contract((src, tgt) in arb_generators()) {
            let syn = synthesize(&src, &tgt).unwrap();
            let p = src[0].modulus().get();
            if p != 2 {
                prop_assert!(syn.zeta_phases.iter().all(|&t| t == 0));
            } else {
                prop_assert!(syn.zeta_phases.iter().all(|&t| t <= 1));
            }
            prop_assert!(conjugation_residual::<f64>(&syn, &src, &tgt, BUDGET).unwrap() < 1e-9);
            let map = syn.circuit.symplectic_map();
            for (g, b) in src.iter().zip(&tgt) {
                prop_assert_eq!(map.apply(g.to_vector().as_slice()), b.to_vector().as_slice().to_vec());
            }
        }
    }
}
