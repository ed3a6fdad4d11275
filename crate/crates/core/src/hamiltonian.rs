//! Free, Dicke and Tavis–Cummings Hamiltonians on a sector.

use nalgebra::DMatrix;

use crate::sector::{fock_factors, spin_factors, OperatorMatrix, SectorDims};
use crate::{Result, RwaError};

/// Field frequency `omega`, coupling `lambda` and spin detuning
/// `delta = omega_0 − omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(omega: f64, lambda: f64) -> Result<Self> {
        ModelParams::detuned(omega, lambda, 0.0)
    }

    pub fn detuned(omega: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(RwaError::invalid(format!("omega must be positive, got {omega}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(RwaError::invalid(format!("lambda must be non-negative, got {lambda}")));
        }
        if !delta.is_finite() {
            return Err(RwaError::invalid("delta must be finite"));
        }
        Ok(ModelParams { omega, lambda, delta })
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        ModelParams::detuned(self.omega, self.lambda, delta)
    }

    pub fn resonant(self) -> Self {
        ModelParams { delta: 0.0, ..self }
    }

    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }
}

/// Which Hamiltonian to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Free,
    Dicke,
    TavisCummings,
}

impl std::str::FromStr for Model {
    type Err = RwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h0" => Ok(Model::Free),
            "dicke" => Ok(Model::Dicke),
            "tc" => Ok(Model::TavisCummings),
            other => Err(RwaError::invalid(format!(
                "unknown model `{other}` (expected dicke, tc or h0)"
            ))),
        }
    }
}

pub fn build(model: Model, dims: SectorDims, params: &ModelParams) -> OperatorMatrix {
    match model {
        Model::Free => build_h0(dims, params),
        Model::Dicke => build_dicke(dims, params),
        Model::TavisCummings => build_tavis_cummings(dims, params),
    }
}

/// `(omega + delta) S_z ⊗ 1 + omega 1 ⊗ n̂` as a real matrix. At resonance
/// the entry is `omega (m + n)`, so states of equal excitation carry
/// bit-identical energies.
fn diagonal_part(dims: SectorDims, spin_freq: f64, field_freq: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(dims.dim(), dims.dim());
    for idx in 0..dims.dim() {
        let (m, n) = dims.labels(idx);
        d[(idx, idx)] = if spin_freq == field_freq {
            field_freq * (m.value() + n as f64)
        } else {
            spin_freq * m.value() + field_freq * n as f64
        };
    }
    d
}

fn to_operator(dims: SectorDims, m: DMatrix<f64>) -> OperatorMatrix {
    OperatorMatrix::new(dims, m.map(|x| num_complex::Complex64::new(x, 0.0))).expect("assembled with sector dimensions")
}

/// `H_0 = ω S_z + ω n̂`. Detuning is ignored: the free part always rotates
/// at the field frequency.
pub fn build_h0(dims: SectorDims, params: &ModelParams) -> OperatorMatrix {
    to_operator(dims, diagonal_part(dims, params.omega, params.omega))
}

/// `(ω+Δ) S_z + ω n̂ + λ (S₊ + S₋)(a + a†)`.
pub fn build_dicke(dims: SectorDims, params: &ModelParams) -> OperatorMatrix {
    let (_, sp) = spin_factors(dims.twice_spin());
    let (a, _) = fock_factors(dims.n_max());
    let sx2 = &sp + sp.transpose();
    let q = &a + a.transpose();
    let coupling = sx2.kronecker(&q) * params.lambda;
    to_operator(
        dims,
        diagonal_part(dims, params.omega + params.delta, params.omega) + coupling,
    )
}

/// `(ω+Δ) S_z + ω n̂ + λ (S₊ a + S₋ a†)`.
pub fn build_tavis_cummings(dims: SectorDims, params: &ModelParams) -> OperatorMatrix {
    let (_, sp) = spin_factors(dims.twice_spin());
    let (a, _) = fock_factors(dims.n_max());
    let rotating = sp.kronecker(&a) + sp.transpose().kronecker(&a.transpose());
    to_operator(
        dims,
        diagonal_part(dims, params.omega + params.delta, params.omega) + rotating * params.lambda,
    )
}

/// Excitation number `M̂ = S_z + n̂`; Tavis–Cummings eigenstates built from
/// `M` raising factors have eigenvalue `M − S`.
pub fn build_excitation_number(dims: SectorDims) -> OperatorMatrix {
    to_operator(dims, diagonal_part(dims, 1.0, 1.0))
}

/// `λ(S₊ a† + S₋ a)`, the part dropped by the rotating-wave approximation.
pub fn build_counter_rotating(dims: SectorDims, lambda: f64) -> OperatorMatrix {
    let (_, sp) = spin_factors(dims.twice_spin());
    let (a, _) = fock_factors(dims.n_max());
    to_operator(
        dims,
        (sp.kronecker(&a.transpose()) + sp.transpose().kronecker(&a)) * lambda,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::{HalfInt, StateVector, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dims(twice: u32, n_max: usize) -> SectorDims {
        SectorDims::new(twice, n_max).unwrap()
    }

    fn re_diag(op: &OperatorMatrix) -> Vec<f64> {
        op.diagonal().iter().map(|z| z.re).collect()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -0.1).is_err());
        assert!(ModelParams::detuned(1.0, 0.1, f64::NAN).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn h0_examples() {
        let p = ModelParams::new(1.0, 0.0).unwrap();
        assert_eq!(re_diag(&build_h0(dims(1, 0), &p)), vec![0.5, -0.5]);
        let p = ModelParams::new(2.0, 0.7).unwrap();
        let h = build_h0(dims(2, 1), &p);
        assert_eq!(re_diag(&h), vec![2.0, 4.0, 0.0, 2.0, -2.0, 0.0]);
        assert_eq!(h.nonzeros().len(), 4);
    }

    #[test]
    fn zero_coupling_reduces_to_h0() {
        let d = dims(3, 4);
        let p = ModelParams::new(1.3, 0.0).unwrap();
        assert_eq!(build_dicke(d, &p), build_h0(d, &p));
        assert_eq!(build_tavis_cummings(d, &p), build_h0(d, &p));
    }

    #[test]
    fn spin_half_dicke_blocks() {
        let d = dims(1, 1);
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let h = build_dicke(d, &p);
        let up = HalfInt::from_twice(1);
        let dn = HalfInt::from_twice(-1);
        let at = |m1, n1, m2, n2| h.entries()[(d.index_of(m1, n1).unwrap(), d.index_of(m2, n2).unwrap())];
        assert_eq!(at(dn, 0, up, 1), C64::new(0.3, 0.0));
        assert_eq!(at(up, 0, dn, 1), C64::new(0.3, 0.0));
        assert_eq!(at(up, 1, dn, 0), C64::new(0.3, 0.0));
        assert_eq!(at(dn, 1, up, 0), C64::new(0.3, 0.0));
        assert_eq!(at(up, 0, up, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn spin_half_tc_single_coupling() {
        let d = dims(1, 1);
        let lambda = 0.45;
        let p = ModelParams::new(1.0, lambda).unwrap();
        let h = build_tavis_cummings(d, &p);
        let up = HalfInt::from_twice(1);
        let dn = HalfInt::from_twice(-1);
        let i = d.index_of(dn, 1).unwrap();
        let j = d.index_of(up, 0).unwrap();
        let off: Vec<_> = h.nonzeros().into_iter().filter(|(r, c, _)| r != c).collect();
        assert_eq!(off.len(), 2);
        assert_eq!(h.entries()[(i, j)], C64::new(lambda, 0.0));
        assert_eq!(h.entries()[(j, i)], C64::new(lambda, 0.0));
    }

    #[test]
    fn tc_commutes_with_h0_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = dims(4, 8);
        for _ in 0..5 {
            let p = ModelParams::detuned(rng.gen_range(0.5..5.0), rng.gen_range(0.0..2.0), 0.0).unwrap();
            let c = build_tavis_cummings(d, &p).commutator(&build_h0(d, &p)).unwrap();
            assert_eq!(c.max_abs(), 0.0);
        }
    }

    #[test]
    fn excitation_number_commutes_with_tc() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let d = dims(rng.gen_range(1..7), rng.gen_range(0..9));
            let p = ModelParams::detuned(1.0, rng.gen_range(0.0..2.0), rng.gen_range(-0.5..0.5)).unwrap();
            let c = build_excitation_number(d)
                .commutator(&build_tavis_cummings(d, &p))
                .unwrap();
            assert_eq!(c.max_abs(), 0.0);
        }
    }

    #[test]
    fn excitation_number_eigenvalues() {
        let d = dims(1, 2);
        let mh = build_excitation_number(d);
        let vac = StateVector::vacuum(d);
        assert_eq!(mh.apply(&vac).unwrap(), vac.scaled(C64::new(-0.5, 0.0)));
        let up0 = StateVector::basis(d, HalfInt::from_twice(1), 0).unwrap();
        assert_eq!(mh.apply(&up0).unwrap(), up0.scaled(C64::new(0.5, 0.0)));
    }

    #[test]
    fn hermitian_for_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let d = dims(rng.gen_range(1..8), rng.gen_range(0..10));
            let p = ModelParams::detuned(
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(-1.0..1.0),
            )
            .unwrap();
            assert!(build_dicke(d, &p).hermiticity_defect() < 1e-13);
            assert!(build_tavis_cummings(d, &p).hermiticity_defect() < 1e-13);
        }
    }

    #[test]
    fn dicke_breaks_h0_conservation() {
        let d = dims(2, 4);
        let p = ModelParams::new(1.7, 0.4).unwrap();
        let h0 = build_h0(d, &p);
        let c = build_dicke(d, &p).commutator(&h0).unwrap();
        // only the counter-rotating block survives: [V_cr, H0] = -2ω V_cr entrywise
        let v_cr = build_counter_rotating(d, p.lambda);
        let expect = v_cr.commutator(&h0).unwrap();
        assert!(c.minus(&expect).unwrap().max_abs() < 1e-12);
        assert!((c.max_abs() - 2.0 * p.omega * v_cr.max_abs()).abs() < 1e-12);
        assert!(c.max_abs() > 0.0);
    }

    #[test]
    fn detuning_shifts_spin_frequency_only() {
        let d = dims(2, 1);
        let p = ModelParams::detuned(2.0, 0.0, 0.5).unwrap();
        assert_eq!(re_diag(&build_dicke(d, &p)), vec![2.5, 4.5, 0.0, 2.0, -2.5, -0.5]);
    }
}
