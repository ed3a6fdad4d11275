//! The fixed-spin sector `|S, m> ⊗ φ_n` with a hard photon cutoff, plus the
//! elementary spin and boson operators acting on it.
//!
//! Basis order is lexicographic: `m` descending from `S`, then `n` ascending.
//! Index `k * (n_max + 1) + n` holds `m = S - k`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Result, RwaError};

pub type C64 = Complex64;

/// A half-integer stored as twice its value, so `5/2` is `HalfInt(5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInt(2 * v)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Nearest half-integer to `v`, rejecting values more than `1e-9` away.
    pub fn from_f64(v: f64) -> Result<Self> {
        let twice = (2.0 * v).round();
        if !v.is_finite() || (2.0 * v - twice).abs() > 1e-9 || twice.abs() > f64::from(i32::MAX) {
            return Err(RwaError::invalid(format!("{v} is not a half-integer")));
        }
        Ok(HalfInt(twice as i32))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = RwaError;

    /// Accepts `5/2`, `2.5` or `3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num
                .trim()
                .parse()
                .map_err(|_| RwaError::invalid(format!("bad half-integer `{s}`")))?;
            return match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt::from_int(num)),
                _ => Err(RwaError::invalid(format!("`{s}` must have denominator 1 or 2"))),
            };
        }
        let v: f64 = s
            .parse()
            .map_err(|_| RwaError::invalid(format!("bad half-integer `{s}`")))?;
        HalfInt::from_f64(v)
    }
}

/// Direction of a collective ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Raise,
    Lower,
}

impl Ladder {
    pub fn flipped(self) -> Self {
        match self {
            Ladder::Raise => Ladder::Lower,
            Ladder::Lower => Ladder::Raise,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Ladder::Raise => '+',
            Ladder::Lower => '-',
        }
    }
}

/// Shape of a sector: total spin `S` and photon cutoff `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorDims {
    twice_spin: u32,
    n_max: usize,
}

impl SectorDims {
    pub fn new(twice_spin: u32, n_max: usize) -> Result<Self> {
        if twice_spin == 0 {
            return Err(RwaError::invalid("spin must be at least 1/2"));
        }
        Ok(SectorDims { twice_spin, n_max })
    }

    pub fn with_spin(spin: HalfInt, n_max: usize) -> Result<Self> {
        if spin.twice() < 1 {
            return Err(RwaError::invalid(format!("spin must be at least 1/2, got {spin}")));
        }
        SectorDims::new(spin.twice() as u32, n_max)
    }

    /// Same spin, different cutoff.
    pub fn with_n_max(self, n_max: usize) -> Self {
        SectorDims { n_max, ..self }
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_spin
    }

    pub fn spin(&self) -> HalfInt {
        HalfInt::from_twice(self.twice_spin as i32)
    }

    pub fn spin_value(&self) -> f64 {
        f64::from(self.twice_spin) / 2.0
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn spin_dim(&self) -> usize {
        self.twice_spin as usize + 1
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock_dim()
    }

    pub fn index_of(&self, m: HalfInt, n: usize) -> Option<usize> {
        let s2 = self.twice_spin as i32;
        let m2 = m.twice();
        if m2.abs() > s2 || (s2 - m2) % 2 != 0 || n > self.n_max {
            return None;
        }
        let k = ((s2 - m2) / 2) as usize;
        Some(k * self.fock_dim() + n)
    }

    /// Inverse of [`SectorDims::index_of`].
    pub fn labels(&self, idx: usize) -> (HalfInt, usize) {
        assert!(
            idx < self.dim(),
            "index {idx} outside sector of dimension {}",
            self.dim()
        );
        let k = idx / self.fock_dim();
        let n = idx % self.fock_dim();
        (HalfInt::from_twice(self.twice_spin as i32 - 2 * k as i32), n)
    }

    /// One `idx,m_twice,n` line per basis index.
    pub fn describe(&self) -> String {
        let mut out = String::with_capacity(self.dim() * 12);
        out.push_str("idx,m_twice,n\n");
        for idx in 0..self.dim() {
            let (m, n) = self.labels(idx);
            out.push_str(&format!("{idx},{},{n}\n", m.twice()));
        }
        out
    }

    pub(crate) fn check_same(&self, other: &SectorDims) -> Result<()> {
        if self != other {
            return Err(RwaError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Amplitudes over a sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: SectorDims,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn zeros(dims: SectorDims) -> Self {
        StateVector {
            dims,
            amplitudes: DVector::zeros(dims.dim()),
        }
    }

    pub fn from_amplitudes(dims: SectorDims, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != dims.dim() {
            return Err(RwaError::DimensionMismatch {
                expected: dims.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { dims, amplitudes })
    }

    /// The product state `|S, m> ⊗ φ_n`.
    pub fn basis(dims: SectorDims, m: HalfInt, n: usize) -> Result<Self> {
        let idx = dims
            .index_of(m, n)
            .ok_or_else(|| RwaError::invalid(format!("(m={m}, n={n}) is not in the sector")))?;
        let mut v = StateVector::zeros(dims);
        v.amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// `|S, -S> ⊗ φ_0`.
    pub fn vacuum(dims: SectorDims) -> Self {
        let m = HalfInt::from_twice(-(dims.twice_spin() as i32));
        StateVector::basis(dims, m, 0).expect("lowest weight state is always in the sector")
    }

    pub fn dims(&self) -> SectorDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, m: HalfInt, n: usize) -> Option<C64> {
        self.dims.index_of(m, n).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(RwaError::invalid("cannot normalize a zero or non-finite state"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        StateVector {
            dims: self.dims,
            amplitudes: &self.amplitudes * c,
        }
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.dims.check_same(&other.dims)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        Ok(StateVector {
            dims: self.dims,
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.dims.check_same(&other.dims)?;
        Ok((&self.amplitudes - &other.amplitudes).norm())
    }

    /// Largest photon number carrying a nonzero amplitude.
    pub fn max_photon(&self) -> Option<usize> {
        (0..self.dims.dim())
            .filter(|&i| self.amplitudes[i] != C64::new(0.0, 0.0))
            .map(|i| self.dims.labels(i).1)
            .max()
    }

    /// Copy into a sector with the same spin and a cutoff that still holds
    /// every nonzero amplitude.
    pub fn embed(&self, target: SectorDims) -> Result<Self> {
        if target.twice_spin() != self.dims.twice_spin() {
            return Err(RwaError::invalid(
                "cannot embed a state into a sector of different spin",
            ));
        }
        if let Some(top) = self.max_photon() {
            if top > target.n_max() {
                return Err(RwaError::CutoffTooSmall {
                    n_max: target.n_max(),
                    required: top,
                });
            }
        }
        let mut out = StateVector::zeros(target);
        for i in 0..self.dims.dim() {
            let (m, n) = self.dims.labels(i);
            if let Some(j) = target.index_of(m, n) {
                out.amplitudes[j] = self.amplitudes[i];
            }
        }
        Ok(out)
    }
}

/// Dense complex matrix over a sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dims: SectorDims,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(dims: SectorDims, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != dims.dim() || entries.ncols() != dims.dim() {
            return Err(RwaError::DimensionMismatch {
                expected: dims.dim(),
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(OperatorMatrix { dims, entries })
    }

    pub fn zeros(dims: SectorDims) -> Self {
        OperatorMatrix {
            dims,
            entries: DMatrix::zeros(dims.dim(), dims.dim()),
        }
    }

    pub fn identity(dims: SectorDims) -> Self {
        OperatorMatrix {
            dims,
            entries: DMatrix::identity(dims.dim(), dims.dim()),
        }
    }

    /// `spin ⊗ fock` for real factor matrices of sizes `2S+1` and `n_max+1`.
    pub(crate) fn from_factors(dims: SectorDims, spin: &DMatrix<f64>, fock: &DMatrix<f64>) -> Self {
        debug_assert_eq!(spin.nrows(), dims.spin_dim());
        debug_assert_eq!(fock.nrows(), dims.fock_dim());
        let real = spin.kronecker(fock);
        OperatorMatrix {
            dims,
            entries: real.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn dims(&self) -> SectorDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.dims.check_same(&psi.dims)?;
        Ok(StateVector {
            dims: self.dims,
            amplitudes: &self.entries * &psi.amplitudes,
        })
    }

    pub(crate) fn apply_unchecked(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.entries * v
    }

    pub fn product(&self, other: &OperatorMatrix) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        Ok(OperatorMatrix {
            dims: self.dims,
            entries: &self.entries * &other.entries,
        })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        Ok(OperatorMatrix {
            dims: self.dims,
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
        })
    }

    pub fn plus(&self, other: &OperatorMatrix) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        Ok(OperatorMatrix {
            dims: self.dims,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn minus(&self, other: &OperatorMatrix) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        Ok(OperatorMatrix {
            dims: self.dims,
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        OperatorMatrix {
            dims: self.dims,
            entries: &self.entries * C64::new(c, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            dims: self.dims,
            entries: self.entries.adjoint(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// `max |H − H†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    /// Nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    out.push((i, j, z));
                }
            }
        }
        out
    }
}

/// `C±_{S,m} = sqrt((S ∓ m)(S ± m + 1))`, zero past the end of the ladder.
pub fn ladder_coefficient(s: HalfInt, m: HalfInt, sign: Ladder) -> Result<f64> {
    let (s2, m2) = (s.twice(), m.twice());
    if s2 < 0 {
        return Err(RwaError::invalid(format!("negative spin {s}")));
    }
    if m2.abs() > s2 {
        return Err(RwaError::invalid(format!("|m| = |{m}| exceeds S = {s}")));
    }
    if (s2 - m2) % 2 != 0 {
        return Err(RwaError::invalid(format!(
            "m = {m} and S = {s} differ by a non-integer"
        )));
    }
    let (s, m) = (s.value(), m.value());
    let v = match sign {
        Ladder::Raise => (s - m) * (s + m + 1.0),
        Ladder::Lower => (s + m) * (s - m + 1.0),
    };
    Ok(v.max(0.0).sqrt())
}

/// `S_z` and `S_+` on the `2S+1` dimensional spin factor.
pub(crate) fn spin_factors(twice_spin: u32) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = twice_spin as usize + 1;
    let s = HalfInt::from_twice(twice_spin as i32);
    let mut sz = DMatrix::zeros(d, d);
    let mut sp = DMatrix::zeros(d, d);
    for k in 0..d {
        let m = HalfInt::from_twice(twice_spin as i32 - 2 * k as i32);
        sz[(k, k)] = m.value();
        // S+ |m> lands on |m+1>, one slot earlier in descending order.
        if k > 0 {
            sp[(k - 1, k)] = ladder_coefficient(s, m, Ladder::Raise).expect("m is in range");
        }
    }
    (sz, sp)
}

/// Truncated `a` and `n̂` on the `n_max+1` dimensional Fock factor.
pub(crate) fn fock_factors(n_max: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = n_max + 1;
    let mut a = DMatrix::zeros(d, d);
    let mut n = DMatrix::zeros(d, d);
    for k in 0..d {
        n[(k, k)] = k as f64;
        if k > 0 {
            a[(k - 1, k)] = (k as f64).sqrt();
        }
    }
    (a, n)
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sz: OperatorMatrix,
    pub splus: OperatorMatrix,
    pub sminus: OperatorMatrix,
    pub ssq: OperatorMatrix,
}

impl SpinOperators {
    pub fn ladder(&self, sign: Ladder) -> &OperatorMatrix {
        match sign {
            Ladder::Raise => &self.splus,
            Ladder::Lower => &self.sminus,
        }
    }
}

pub fn build_spin_operators(dims: SectorDims) -> SpinOperators {
    let (sz, sp) = spin_factors(dims.twice_spin());
    let id_f = DMatrix::identity(dims.fock_dim(), dims.fock_dim());
    let s = dims.spin_value();
    SpinOperators {
        sz: OperatorMatrix::from_factors(dims, &sz, &id_f),
        splus: OperatorMatrix::from_factors(dims, &sp, &id_f),
        sminus: OperatorMatrix::from_factors(dims, &sp.transpose(), &id_f),
        ssq: OperatorMatrix::identity(dims).scaled(s * (s + 1.0)),
    }
}

#[derive(Debug, Clone)]
pub struct BosonOperators {
    pub a: OperatorMatrix,
    pub adag: OperatorMatrix,
    pub nhat: OperatorMatrix,
}

/// Truncated ladder operators; `a†` drops the `n_max → n_max+1` transition.
pub fn build_boson_operators(dims: SectorDims) -> BosonOperators {
    let (a, n) = fock_factors(dims.n_max());
    let id_s = DMatrix::identity(dims.spin_dim(), dims.spin_dim());
    BosonOperators {
        a: OperatorMatrix::from_factors(dims, &id_s, &a),
        adag: OperatorMatrix::from_factors(dims, &id_s, &a.transpose()),
        nhat: OperatorMatrix::from_factors(dims, &id_s, &n),
    }
}
