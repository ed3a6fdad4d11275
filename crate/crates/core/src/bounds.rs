//! Error bounds for the rotating-wave approximation and the state
//! functionals they are built from.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::dynamics::RwaDynamics;
use crate::eigenstate::TCEigenstate;
use crate::hamiltonian::ModelParams;
use crate::sector::{build_spin_operators, HalfInt, Ladder, OperatorMatrix, SectorDims, StateVector, C64};
use crate::{Result, RwaError};

/// Spin operators of one sector, reused across functional evaluations.
#[derive(Debug, Clone)]
pub struct Functionals {
    dims: SectorDims,
    sz: OperatorMatrix,
    splus: OperatorMatrix,
    sminus: OperatorMatrix,
    ssq: f64,
}

impl Functionals {
    pub fn new(dims: SectorDims) -> Self {
        let ops = build_spin_operators(dims);
        let s = dims.spin_value();
        Functionals {
            dims,
            sz: ops.sz,
            splus: ops.splus,
            sminus: ops.sminus,
            ssq: s * (s + 1.0),
        }
    }

    pub fn dims(&self) -> SectorDims {
        self.dims
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.dims() != self.dims {
            return Err(RwaError::DimensionMismatch {
                expected: self.dims.dim(),
                found: psi.dims().dim(),
            });
        }
        Ok(())
    }

    fn ladder(&self, sign: Ladder) -> &OperatorMatrix {
        match sign {
            Ladder::Raise => &self.splus,
            Ladder::Lower => &self.sminus,
        }
    }

    /// Apply the operators right to left.
    fn chain(&self, ops: &[Ladder], psi: &DVector<C64>) -> DVector<C64> {
        ops.iter()
            .rev()
            .fold(psi.clone(), |v, &op| self.ladder(op).apply_unchecked(&v))
    }

    /// `‖(n̂ + shift)^power ψ‖`.
    pub fn photon_norm(&self, psi: &StateVector, shift: f64, power: i32) -> f64 {
        let fock = self.dims.fock_dim();
        psi.amplitudes()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let n = (i % fock) as f64;
                z.norm_sqr() * (n + shift).powi(2 * power)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn f_c(&self, psi: &StateVector, sign: Ladder) -> Result<f64> {
        self.check(psi)?;
        let v = psi.amplitudes();
        let sz2 = self.sz.apply_unchecked(&self.sz.apply_unchecked(v));
        let transverse = (v * C64::new(self.ssq, 0.0) - sz2).norm();
        let double = self.chain(&[sign, sign], v).norm();
        Ok((2.0 * transverse + 2.0 * double).sqrt() * self.photon_norm(psi, 2.0, 1).sqrt())
    }

    /// `min± f_C±` and the sign that attains it (`Raise` on ties).
    pub fn f_c_min(&self, psi: &StateVector) -> Result<(f64, Ladder)> {
        let up = self.f_c(psi, Ladder::Raise)?;
        let down = self.f_c(psi, Ladder::Lower)?;
        Ok(if down < up {
            (down, Ladder::Lower)
        } else {
            (up, Ladder::Raise)
        })
    }

    pub fn f_l(&self, psi: &StateVector) -> Result<f64> {
        use Ladder::{Lower as L, Raise as R};
        self.check(psi)?;
        let v = psi.amplitudes();
        let spin: f64 = [[R, L, R, L], [L, R, L, R], [R, R, L, L], [L, L, R, R]]
            .iter()
            .map(|ops| self.chain(ops, v).norm().sqrt())
            .sum();
        Ok(spin * self.photon_norm(psi, 4.0, 2).sqrt())
    }

    pub fn f_d(&self, psi: &StateVector) -> Result<f64> {
        use Ladder::{Lower as L, Raise as R};
        self.check(psi)?;
        let v = psi.amplitudes();
        let spin = self.chain(&[R, L], v).norm().sqrt() + self.chain(&[L, R], v).norm().sqrt();
        Ok(spin * self.photon_norm(psi, 1.0, 1).sqrt())
    }
}

pub fn f_c(psi: &StateVector, sign: Ladder) -> Result<f64> {
    Functionals::new(psi.dims()).f_c(psi, sign)
}

pub fn f_l(psi: &StateVector) -> Result<f64> {
    Functionals::new(psi.dims()).f_l(psi)
}

pub fn f_d(psi: &StateVector) -> Result<f64> {
    Functionals::new(psi.dims()).f_d(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundVariant {
    General,
    Intermediate,
    WorstCase,
    AnalyticClosedForm,
    Scaling,
    DickeFock,
    LinearCombination,
    OffResonant,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 8] = [
        BoundVariant::General,
        BoundVariant::Intermediate,
        BoundVariant::WorstCase,
        BoundVariant::AnalyticClosedForm,
        BoundVariant::Scaling,
        BoundVariant::DickeFock,
        BoundVariant::LinearCombination,
        BoundVariant::OffResonant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::General => "general",
            BoundVariant::Intermediate => "intermediate",
            BoundVariant::WorstCase => "worst",
            BoundVariant::AnalyticClosedForm => "analytic",
            BoundVariant::Scaling => "scaling",
            BoundVariant::DickeFock => "dickefock",
            BoundVariant::LinearCombination => "lincomb",
            BoundVariant::OffResonant => "offres",
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundVariant {
    type Err = RwaError;

    fn from_str(s: &str) -> Result<Self> {
        BoundVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| RwaError::invalid(format!("unknown bound variant `{s}`")))
    }
}

/// One evaluated bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub variant: BoundVariant,
    /// The `|sin ωt|` term.
    pub first_term: f64,
    /// The term linear in `|t|`.
    pub second_term: f64,
    /// Detuning term, zero at resonance.
    pub extra_term: f64,
    pub total: f64,
    pub exact_error: Option<f64>,
    /// Sign chosen by the `min±` in the first term, where one was taken.
    pub sign: Option<Ladder>,
    /// Relative change under step halving, for quadrature-based bounds.
    pub quadrature_error: Option<f64>,
    pub params: ModelParams,
    pub spin: HalfInt,
    pub excitations: Option<u32>,
    pub t: f64,
}

impl BoundReport {
    fn new(
        variant: BoundVariant,
        terms: (f64, f64, f64),
        params: &ModelParams,
        spin: HalfInt,
        excitations: Option<u32>,
        t: f64,
    ) -> Self {
        let (first_term, second_term, extra_term) = terms;
        BoundReport {
            variant,
            first_term,
            second_term,
            extra_term,
            total: first_term + second_term + extra_term,
            exact_error: None,
            sign: None,
            quadrature_error: None,
            params: *params,
            spin,
            excitations,
            t,
        }
    }

    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact_error = Some(exact);
        self
    }

    /// `total / exact`, when an exact error is attached and nonzero.
    pub fn ratio(&self) -> Option<f64> {
        self.exact_error.filter(|&e| e > 0.0).map(|e| self.total / e)
    }

    /// `exact ≤ total + slack`; vacuously true without an exact value.
    pub fn holds(&self, slack: f64) -> bool {
        self.exact_error.is_none_or(|e| e <= self.total + slack)
    }
}

fn sin_factor(params: &ModelParams, t: f64) -> f64 {
    (params.lambda / params.omega) * (params.omega * t).sin().abs()
}

fn linear_factor(params: &ModelParams, t: f64) -> f64 {
    3.0 * t.abs() * params.lambda * params.lambda / params.omega
}

fn require_resonant(params: &ModelParams, what: &str) -> Result<()> {
    if params.is_resonant() {
        Ok(())
    } else {
        Err(RwaError::invalid(format!(
            "{what} assumes zero detuning; use the off-resonant bound for delta = {}",
            params.delta
        )))
    }
}

fn general_terms(eig: &TCEigenstate, params: &ModelParams, t: f64) -> Result<(f64, f64, Ladder)> {
    let f = Functionals::new(eig.dims());
    let (fc, sign) = f.f_c_min(&eig.state)?;
    let fl = f.f_l(&eig.state)?;
    Ok((sin_factor(params, t) * fc, linear_factor(params, t) * fl, sign))
}

/// `(λ/ω)|sin ωt| min± f_C±(ψ) + 3|t|(λ²/ω) f_L(ψ)` for an eigenstate.
pub fn general_bound(eig: &TCEigenstate, params: &ModelParams, t: f64) -> Result<BoundReport> {
    require_resonant(params, "the general bound")?;
    let (first, second, sign) = general_terms(eig, params, t)?;
    let mut r = BoundReport::new(
        BoundVariant::General,
        (first, second, 0.0),
        params,
        eig.spin(),
        Some(eig.excitations()),
        t,
    );
    r.sign = Some(sign);
    Ok(r)
}

/// General bound plus `|t|(λ/ω)(|Δ|/2) f_d(ψ)` for a resonant eigenstate
/// evolved under detuned Hamiltonians.
pub fn off_resonant_bound(eig: &TCEigenstate, params: &ModelParams, t: f64) -> Result<BoundReport> {
    let (first, second, sign) = general_terms(eig, params, t)?;
    let fd = Functionals::new(eig.dims()).f_d(&eig.state)?;
    let extra = t.abs() * (params.lambda / params.omega) * (params.delta.abs() / 2.0) * fd;
    let mut r = BoundReport::new(
        BoundVariant::OffResonant,
        (first, second, extra),
        params,
        eig.spin(),
        Some(eig.excitations()),
        t,
    );
    r.sign = Some(sign);
    Ok(r)
}

fn simpson(values: &[f64], width: f64) -> f64 {
    let n = values.len() - 1;
    let h = width / n as f64;
    let inner: f64 = values[1..n]
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n])
}

pub const QUADRATURE_TOL: f64 = 1e-6;

/// Bound for an arbitrary state: the first term is evaluated on `U₂(t)ψ` and
/// the second integrates `f_L(U₂(s)ψ)` over `[0, t]` with composite Simpson
/// on `quad_steps` and `2·quad_steps` panels.
pub fn intermediate_bound(psi: &StateVector, params: &ModelParams, t: f64, quad_steps: usize) -> Result<BoundReport> {
    require_resonant(params, "the intermediate bound")?;
    if quad_steps < 2 || !quad_steps.is_multiple_of(2) {
        return Err(RwaError::invalid("quad_steps must be even and at least 2"));
    }
    let dims = psi.dims();
    let f = Functionals::new(dims);
    let dynamics = RwaDynamics::new(dims, *params)?;
    let (fc, sign) = f.f_c_min(&dynamics.rotating_frame(t, psi)?)?;
    let first = sin_factor(params, t) * fc;

    let fine_steps = 2 * quad_steps;
    let nodes: Vec<f64> = (0..=fine_steps)
        .map(|k| {
            let s = t * k as f64 / fine_steps as f64;
            f.f_l(&dynamics.rotating_frame(s, psi)?)
        })
        .collect::<Result<_>>()?;
    let coarse: Vec<f64> = nodes.iter().step_by(2).copied().collect();
    let fine_integral = simpson(&nodes, t.abs());
    let coarse_integral = simpson(&coarse, t.abs());
    let change = if fine_integral == 0.0 {
        0.0
    } else {
        (fine_integral - coarse_integral).abs() / fine_integral.abs()
    };
    if change > QUADRATURE_TOL {
        return Err(RwaError::QuadratureNonConvergence {
            relative_change: change,
        });
    }
    let second = 3.0 * params.lambda * params.lambda / params.omega * fine_integral;
    let mut r = BoundReport::new(
        BoundVariant::Intermediate,
        (first, second, 0.0),
        params,
        dims.spin(),
        None,
        t,
    );
    r.sign = Some(sign);
    r.quadrature_error = Some(change);
    Ok(r)
}

/// Spin-independent bound using only photon moments and `N ≥ 2S`.
pub fn worst_case_bound(psi: &StateVector, params: &ModelParams, t: f64, n_spins: u32) -> Result<BoundReport> {
    let dims = psi.dims();
    if n_spins < dims.twice_spin() {
        return Err(RwaError::invalid(format!(
            "N = {n_spins} spins cannot carry total spin {}",
            dims.spin()
        )));
    }
    let f = Functionals::new(dims);
    let n = f64::from(n_spins);
    let first = sin_factor(params, t) * (n * n + n).sqrt() * f.photon_norm(psi, n + 2.0, 1).sqrt();
    let second = linear_factor(params, t) * n * n * f.photon_norm(psi, n + 4.0, 2).sqrt();
    Ok(BoundReport::new(
        BoundVariant::WorstCase,
        (first, second, 0.0),
        params,
        dims.spin(),
        None,
        t,
    ))
}

/// Closed-form upper estimates of `f_C±` and `f_L` on any eigenstate with
/// labels `(S, M)`.
pub fn analytic_fc_fl(spin: HalfInt, excitations: u32) -> (f64, f64) {
    let s = spin.value();
    let m = f64::from(excitations);

    let photon = (2.0 * s + 1.0) * (3.0 * m * m - 6.0 * m * (s - 2.0) + 4.0 * s * s - 11.0 * s + 12.0);
    let a = s * (8.0 * s.powi(4) + 20.0 * s.powi(3) + 10.0 * s * s - 5.0 * s - 3.0);
    let b = s * (16.0 * s.powi(4) + 40.0 * s.powi(3) + 30.0 * s * s + 5.0 * s - 1.0);
    let fc = 2f64.sqrt() / 45f64.powf(0.25)
        * photon.powf(0.25)
        * (2f64.sqrt() * a.max(0.0).sqrt() + b.max(0.0).sqrt()).sqrt();

    let p1 = 16.0 * s.powi(9)
        + 72.0 * s.powi(8)
        + 144.0 * s.powi(7)
        + 168.0 * s.powi(6)
        + 126.0 * s.powi(5)
        + 63.0 * s.powi(4)
        + 26.0 * s.powi(3)
        + 12.0 * s * s
        + 3.0 * s;
    // vanishes at S = 1/2, where rounding can push it just below zero
    let p2 = 32.0 * s.powi(9)
        + 144.0 * s.powi(8)
        + 240.0 * s.powi(7)
        + 168.0 * s.powi(6)
        + 42.0 * s.powi(5)
        + 21.0 * s.powi(4)
        + 10.0 * s.powi(3)
        - 18.0 * s * s
        - 9.0 * s;
    let p3 = 15.0 * m.powi(4) - 60.0 * m.powi(3) * (s - 4.0)
        + 1682.0 * s * s
        + 30.0 * m * m * (4.0 * s * s - 23.0 * s + 48.0)
        - 60.0 * m * (2.0 * s.powi(3) - 15.0 * s * s + 44.0 * s - 64.0)
        + 48.0 * s.powi(4)
        - 444.0 * s.powi(3)
        - 3361.0 * s
        + 3840.0;
    let fl = 2.0 / 4725f64.powf(0.25)
        * (2.0 * p1.powf(0.25) + 2f64.powf(0.75) * p2.max(0.0).powf(0.25))
        * (2.0 * s + 1.0).powf(0.25)
        * p3.max(0.0).powf(0.25);
    (fc, fl)
}

/// The general bound with `f_C±`, `f_L` replaced by their closed forms.
pub fn analytic_bound(spin: HalfInt, excitations: u32, params: &ModelParams, t: f64) -> Result<BoundReport> {
    require_resonant(params, "the closed-form bound")?;
    let (fc, fl) = analytic_fc_fl(spin, excitations);
    Ok(BoundReport::new(
        BoundVariant::AnalyticClosedForm,
        (sin_factor(params, t) * fc, linear_factor(params, t) * fl, 0.0),
        params,
        spin,
        Some(excitations),
        t,
    ))
}

fn scaling_terms(spin: HalfInt, excitations: f64, params: &ModelParams, t: f64) -> (f64, f64) {
    let s1 = spin.value() + 1.0;
    let m2 = excitations + 2.0;
    (
        2.0 * sin_factor(params, t) * s1 * s1 * m2.sqrt(),
        6.0 * linear_factor(params, t) * s1.powf(3.5) * m2,
    )
}

/// `2(λ/ω)|sin ωt|(S+1)²√(M+2) + 18(λ²/ω)|t|(S+1)^{7/2}(M+2)`.
pub fn scaling_bound(spin: HalfInt, excitations: u32, params: &ModelParams, t: f64) -> Result<BoundReport> {
    require_resonant(params, "the scaling bound")?;
    let (a, b) = scaling_terms(spin, f64::from(excitations), params, t);
    Ok(BoundReport::new(
        BoundVariant::Scaling,
        (a, b, 0.0),
        params,
        spin,
        Some(excitations),
        t,
    ))
}

/// Scaling bound for a normalized superposition of `terms` eigenstates whose
/// labels do not exceed `(S, M)`, multiplied by the number of terms.
pub fn linear_combination_bound(
    spin: HalfInt,
    excitations: u32,
    terms: usize,
    params: &ModelParams,
    t: f64,
) -> Result<BoundReport> {
    require_resonant(params, "the linear-combination bound")?;
    if terms == 0 {
        return Err(RwaError::invalid("a linear combination needs at least one term"));
    }
    let (a, b) = scaling_terms(spin, f64::from(excitations), params, t);
    let k = terms as f64;
    Ok(BoundReport::new(
        BoundVariant::LinearCombination,
        (k * a, k * b, 0.0),
        params,
        spin,
        Some(excitations),
        t,
    ))
}

/// Bound for the product state `|S, m⟩ ⊗ φ_n`, which spreads over
/// `K = min(2S, S+n+m) + 1` eigenstates with `M = S + n + m`.
pub fn dicke_fock_bound(spin: HalfInt, m: HalfInt, n: u32, params: &ModelParams, t: f64) -> Result<BoundReport> {
    if spin.twice() < 1 || m.twice().abs() > spin.twice() || (spin.twice() - m.twice()) % 2 != 0 {
        return Err(RwaError::invalid(format!("m = {m} is not a projection of S = {spin}")));
    }
    let excitations = ((spin.twice() + m.twice()) / 2) as u32 + n;
    let k = (spin.twice() as u32).min(excitations) as usize + 1;
    let mut r = linear_combination_bound(spin, excitations, k, params, t)?;
    r.variant = BoundVariant::DickeFock;
    Ok(r)
}
