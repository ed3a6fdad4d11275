//! Tavis–Cummings eigenstates from Bethe roots.
//!
//! For roots `e_1..e_M` the (unnormalized) state is
//!
//! ```text
//! Π_i (e_i a† − S₊) |S,−S⟩⊗φ_0 = Σ_n c_n |S, M−n−S⟩⊗φ_n
//! c_n = (−1)^{M−n} sqrt(n! (M−n)! (2S)! / (2S−M+n)!) · σ_n(e)
//! ```
//!
//! with `σ_n` the elementary symmetric polynomial and `n` running from
//! `max(0, M−2S)` to `M`.

use crate::bethe::{solve_default, BetheRoots};
use crate::hamiltonian::{build_excitation_number, build_tavis_cummings, ModelParams};
use crate::sector::{build_boson_operators, build_spin_operators, HalfInt, SectorDims, StateVector, C64};
use crate::{Result, RwaError};

/// Largest `M + 2S` for which coefficients are evaluated.
pub const FACTORIAL_LIMIT: u32 = 60;

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const EXCITATION_TOL: f64 = 1e-10;

/// All elementary symmetric polynomials `σ_0..σ_M` of `roots`, built by
/// multiplying in one linear factor at a time.
pub fn elementary_symmetric_all(roots: &[C64]) -> Vec<C64> {
    let mut sigma = vec![C64::new(0.0, 0.0); roots.len() + 1];
    sigma[0] = C64::new(1.0, 0.0);
    for (k, z) in roots.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = sigma[j - 1];
            sigma[j] += prev * z;
        }
    }
    sigma
}

pub fn elementary_symmetric(roots: &[C64], n: usize) -> Result<C64> {
    if n > roots.len() {
        return Err(RwaError::invalid(format!(
            "elementary symmetric degree {n} exceeds root count {}",
            roots.len()
        )));
    }
    Ok(elementary_symmetric_all(roots)[n])
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| f64::from(j).ln()).sum()
}

fn factorial_exact(k: u32) -> f64 {
    (1..=u64::from(k)).product::<u64>() as f64
}

/// `sqrt(n! (M−n)! (2S)! / (2S−M+n)!)`.
fn ladder_weight(twice_s: u32, excitations: u32, n: u32) -> f64 {
    let args = [n, excitations - n, twice_s, twice_s + n - excitations];
    if args.iter().all(|&k| k < 20) {
        let [a, b, c, d] = args.map(factorial_exact);
        (a * b * c / d).sqrt()
    } else {
        let [a, b, c, d] = args.map(ln_factorial);
        (0.5 * (a + b + c - d)).exp()
    }
}

/// The `c_n` of the expansion as `(n, c_n)` pairs, `n` ascending.
pub fn coefficients(spin: HalfInt, excitations: u32, roots: &[C64]) -> Result<Vec<(u32, C64)>> {
    if spin.twice() < 1 {
        return Err(RwaError::invalid(format!("spin must be at least 1/2, got {spin}")));
    }
    if roots.len() != excitations as usize {
        return Err(RwaError::invalid(format!(
            "{} roots given for M = {excitations}",
            roots.len()
        )));
    }
    let twice_s = spin.twice() as u32;
    let total = excitations + twice_s;
    if total > FACTORIAL_LIMIT {
        return Err(RwaError::OutOfRange {
            value: total,
            limit: FACTORIAL_LIMIT,
        });
    }
    let sigma = elementary_symmetric_all(roots);
    let lower = excitations.saturating_sub(twice_s);
    Ok((lower..=excitations)
        .map(|n| {
            let sign = if (excitations - n).is_multiple_of(2) { 1.0 } else { -1.0 };
            let c = sigma[n as usize] * (sign * ladder_weight(twice_s, excitations, n));
            (n, c)
        })
        .collect())
}

/// Cutoff used when none is given: `2(M + 2S)`.
pub fn default_cutoff(spin: HalfInt, excitations: u32) -> usize {
    2 * (excitations as usize + spin.twice().max(0) as usize)
}

fn check_sector(spin: HalfInt, excitations: u32, dims: SectorDims) -> Result<()> {
    if dims.spin() != spin {
        return Err(RwaError::invalid(format!(
            "sector has spin {} but the roots belong to S = {spin}",
            dims.spin()
        )));
    }
    if dims.n_max() < excitations as usize {
        return Err(RwaError::CutoffTooSmall {
            n_max: dims.n_max(),
            required: excitations as usize,
        });
    }
    Ok(())
}

/// A certified eigenstate of the resonant Tavis–Cummings Hamiltonian.
#[derive(Debug, Clone)]
pub struct TCEigenstate {
    pub roots: BetheRoots,
    /// Unnormalized `(n, c_n)`.
    pub coefficients: Vec<(u32, C64)>,
    pub energy: f64,
    /// Normalized.
    pub state: StateVector,
    pub eigen_residual: f64,
    pub excitation_residual: f64,
}

impl TCEigenstate {
    pub fn spin(&self) -> HalfInt {
        self.roots.spin
    }

    pub fn excitations(&self) -> u32 {
        self.roots.excitations
    }

    pub fn dims(&self) -> SectorDims {
        self.state.dims()
    }

    /// Coefficients divided by the state norm.
    pub fn normalized_coefficients(&self) -> Vec<(u32, C64)> {
        let norm = coefficient_norm(&self.coefficients);
        self.coefficients.iter().map(|&(n, c)| (n, c / norm)).collect()
    }
}

fn coefficient_norm(coeffs: &[(u32, C64)]) -> f64 {
    coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Assemble and certify the eigenstate for `roots`. The detuning in `params`
/// is ignored; the state belongs to the resonant Hamiltonian.
pub fn build_eigenstate(roots: &BetheRoots, dims: SectorDims, params: &ModelParams) -> Result<TCEigenstate> {
    let (spin, m) = (roots.spin, roots.excitations);
    check_sector(spin, m, dims)?;
    let sum: C64 = roots.roots.iter().sum();
    if sum.im.abs() >= 1e-9 {
        return Err(RwaError::NonRealEnergy { imag: sum.im });
    }
    let coeffs = coefficients(spin, m, &roots.roots)?;
    let norm = coefficient_norm(&coeffs);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(RwaError::ResidualTooLarge {
            residual: f64::INFINITY,
            tolerance: RESIDUAL_TOL,
        });
    }

    let mut state = StateVector::zeros(dims);
    for &(n, c) in &coeffs {
        let m_twice = 2 * (m as i32 - n as i32) - spin.twice();
        let idx = dims
            .index_of(HalfInt::from_twice(m_twice), n as usize)
            .expect("coefficient labels lie inside the sector");
        state.amplitudes_mut()[idx] = c / norm;
    }
    let direct = state.norm();
    if (direct - 1.0).abs() > 1e-10 {
        return Err(RwaError::ResidualTooLarge {
            residual: (direct - 1.0).abs(),
            tolerance: 1e-10,
        });
    }

    let resonant = params.resonant();
    let energy = resonant.omega * (f64::from(m) - spin.value()) - resonant.lambda * sum.re;
    let h = build_tavis_cummings(dims, &resonant);
    let h_psi = h.apply(&state)?;
    let eigen_residual = h_psi.distance(&state.scaled(C64::new(energy, 0.0)))?;
    if eigen_residual.is_nan() || eigen_residual >= RESIDUAL_TOL {
        return Err(RwaError::ResidualTooLarge {
            residual: eigen_residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    let m_hat = build_excitation_number(dims).apply(&state)?;
    let excitation_residual = m_hat.distance(&state.scaled(C64::new(f64::from(m) - spin.value(), 0.0)))?;
    if excitation_residual.is_nan() || excitation_residual >= EXCITATION_TOL {
        return Err(RwaError::ResidualTooLarge {
            residual: excitation_residual,
            tolerance: EXCITATION_TOL,
        });
    }

    Ok(TCEigenstate {
        roots: roots.clone(),
        coefficients: coeffs,
        energy,
        state,
        eigen_residual,
        excitation_residual,
    })
}

/// Apply the factors `(e_i a† − S₊)` to the vacuum one at a time.
/// Unnormalized; independent of [`coefficients`].
pub fn build_eigenstate_oracle(spin: HalfInt, roots: &[C64], dims: SectorDims) -> Result<StateVector> {
    check_sector(spin, roots.len() as u32, dims)?;
    let s = build_spin_operators(dims);
    let b = build_boson_operators(dims);
    let mut v = StateVector::vacuum(dims);
    for e in roots {
        let raised = s.splus.apply(&v)?;
        let created = b.adag.apply(&v)?.scaled(*e);
        v = created.add(&raised.scaled(C64::new(-1.0, 0.0)))?;
    }
    Ok(v)
}

/// Solve from the standard guess and build at cutoff `n_max` (default
/// `2(M + 2S)`).
pub fn certified_eigenstate(
    spin: HalfInt,
    excitations: u32,
    params: &ModelParams,
    n_max: Option<usize>,
) -> Result<TCEigenstate> {
    let roots = solve_default(spin, excitations)?;
    let dims = SectorDims::with_spin(spin, n_max.unwrap_or_else(|| default_cutoff(spin, excitations)))?;
    build_eigenstate(&roots, dims, params)
}
