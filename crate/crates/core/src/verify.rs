//! Seeded property suites run by `rwa verify`.
//!
//! Every check records how many assertions it made, how many failed and the
//! smallest margin `limit − value` it saw (negative means a failure).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::Functionals;
use crate::dynamics::{integrated_action_norm, RwaDynamics, SpectralDecomposition};
use crate::eigenstate::{build_eigenstate_oracle, certified_eigenstate};
use crate::hamiltonian::{build_excitation_number, build_h0, build_tavis_cummings, ModelParams};
use crate::sector::{
    build_boson_operators, build_spin_operators, HalfInt, OperatorMatrix, SectorDims, StateVector, C64,
};
use crate::{Result, RwaError};

pub const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Unitarity,
    Lemmas,
    Eigenstates,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Unitarity, Suite::Lemmas, Suite::Eigenstates];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Unitarity => "unitarity",
            Suite::Lemmas => "lemmas",
            Suite::Eigenstates => "eigenstates",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl FromStr for Suite {
    type Err = RwaError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            RwaError::invalid(format!(
                "unknown suite `{s}` (algebra, unitarity, lemmas, eigenstates, all)"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub assertions: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

impl Check {
    fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            assertions: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
        }
    }

    /// Assert `value ≤ limit`.
    fn at_most(&mut self, value: f64, limit: f64) {
        self.assertions += 1;
        let margin = limit - value;
        if margin.is_nan() || margin < 0.0 {
            self.failures += 1;
        }
        if margin.is_nan() {
            self.worst_margin = f64::NEG_INFINITY;
        } else {
            self.worst_margin = self.worst_margin.min(margin);
        }
    }

    fn ok(&mut self, result: Result<()>) {
        if result.is_err() {
            self.assertions += 1;
            self.failures += 1;
            self.worst_margin = f64::NEG_INFINITY;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn assertions(&self) -> usize {
        self.checks.iter().map(|c| c.assertions).sum()
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {} assertions, {} failures",
            self.suite.name(),
            self.assertions(),
            self.failures()
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<28} {:>6} assertions  {:>3} failures  worst margin {:e}",
                c.name, c.assertions, c.failures, c.worst_margin
            )?;
        }
        Ok(())
    }
}

fn random_state(dims: SectorDims, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = DVector::from_fn(dims.dim(), |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    StateVector::from_amplitudes(dims, amps)
        .and_then(|v| v.normalized())
        .expect("random state is nonzero")
}

fn random_dims(rng: &mut ChaCha8Rng, max_twice: u32, max_n: usize) -> SectorDims {
    SectorDims::new(rng.gen_range(1..=max_twice), rng.gen_range(0..=max_n)).expect("positive spin")
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(rng.gen_range(0.5..5.0), rng.gen_range(0.0..2.0)).expect("valid ranges")
}

fn expectation(op: &OperatorMatrix, psi: &StateVector) -> Result<f64> {
    Ok(psi.inner(&op.apply(psi)?)?.re)
}

fn algebra(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut ladder = Check::new("spin ladder algebra");
    let mut herm = Check::new("hermiticity");
    let mut commute = Check::new("[H_TC, H0] and [M, H_TC]");
    let mut index = Check::new("index bijection");
    for _ in 0..20 {
        let d = random_dims(rng, 10, 8);
        let s = build_spin_operators(d);
        let b = build_boson_operators(d);
        let e1 = s.sz.commutator(&s.splus)?.minus(&s.splus)?.max_abs();
        let e2 = s.sz.commutator(&s.sminus)?.plus(&s.sminus)?.max_abs();
        let e3 = s.splus.commutator(&s.sminus)?.minus(&s.sz.scaled(2.0))?.max_abs();
        for e in [e1, e2, e3] {
            ladder.at_most(e, 1e-12);
        }
        for op in [&s.sz, &s.ssq, &b.nhat] {
            herm.at_most(op.hermiticity_defect(), 1e-13);
        }
        herm.at_most(s.splus.adjoint().minus(&s.sminus)?.max_abs(), 0.0);
        herm.at_most(b.a.adjoint().minus(&b.adag)?.max_abs(), 0.0);
        let p = random_params(rng);
        let tc = build_tavis_cummings(d, &p);
        commute.at_most(tc.commutator(&build_h0(d, &p))?.max_abs(), 0.0);
        commute.at_most(build_excitation_number(d).commutator(&tc)?.max_abs(), 0.0);
        let misses = (0..d.dim())
            .filter(|&i| {
                let (m, n) = d.labels(i);
                d.index_of(m, n) != Some(i)
            })
            .count();
        index.at_most(misses as f64, 0.0);
    }
    Ok(vec![ladder, herm, commute, index])
}

fn unitarity(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut random = Check::new("random Hermitian");
    let mut models = Check::new("Dicke and TC");
    for k in 0..100 {
        let d = random_dims(rng, 6, 8);
        let psi = random_state(d, rng);
        let t = rng.gen_range(-20.0..20.0);
        if k % 2 == 0 {
            let n = d.dim();
            let a = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let h = OperatorMatrix::new(d, (&a + a.adjoint()) * C64::new(0.5, 0.0))?;
            let out = SpectralDecomposition::new(&h)?.propagate(t, &psi)?;
            random.at_most((out.norm() - 1.0).abs(), 1e-11);
        } else {
            let p = random_params(rng).with_delta(rng.gen_range(-0.5..0.5))?;
            let dy = RwaDynamics::new(d, p)?;
            models.at_most((dy.evolve_tc(t, &psi)?.norm() - 1.0).abs(), 1e-11);
            models.at_most((dy.evolve_dicke(t, &psi)?.norm() - 1.0).abs(), 1e-11);
        }
    }
    Ok(vec![random, models])
}

fn lemmas(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    // Bosonic monomials against sqrt((n+1)...(n+k)).
    let mut monomial = Check::new("bosonic monomial estimate");
    let d = SectorDims::new(2, 12)?;
    let b = build_boson_operators(d);
    for _ in 0..200 {
        let k = rng.gen_range(1..=4usize);
        let mut v = StateVector::zeros(d);
        for i in 0..d.dim() {
            if d.labels(i).1 + k <= d.n_max() {
                v.amplitudes_mut()[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut w = v.clone();
        for _ in 0..k {
            w = if rng.gen_bool(0.5) {
                b.a.apply(&w)?
            } else {
                b.adag.apply(&w)?
            };
        }
        let mut weighted = v.clone();
        for i in 0..d.dim() {
            let n = d.labels(i).1 as f64;
            let f: f64 = (1..=k).map(|j| n + j as f64).product();
            weighted.amplitudes_mut()[i] *= f.sqrt();
        }
        monomial.at_most(w.norm(), weighted.norm() + 1e-10);
    }

    // Photon number growth in the rotating frame is at most N = 2S.
    let mut photon = Check::new("photon growth under U2");
    for _ in 0..100 {
        let d = random_dims(rng, 6, 10);
        let p = random_params(rng);
        let psi = random_state(d, rng);
        let t = rng.gen_range(0.0..20.0) / p.omega;
        let nhat = build_boson_operators(d).nhat;
        let moved = RwaDynamics::new(d, p)?.rotating_frame(t, &psi)?;
        let lhs = expectation(&nhat, &moved)?;
        let rhs = expectation(&nhat, &psi)? + f64::from(d.twice_spin());
        photon.at_most(lhs, rhs + 1e-9);
    }

    // H0 is conserved by the TC flow, and e^{-itH_TC} commutes with H0.
    let mut energy = Check::new("H0 conservation");
    let mut commutator = Check::new("[exp(-itH_TC), H0]");
    for _ in 0..30 {
        let d = random_dims(rng, 6, 8);
        let p = random_params(rng);
        let psi = random_state(d, rng);
        let h0 = build_h0(d, &p);
        let dy = RwaDynamics::new(d, p)?;
        for scale in [0.1, 1.0, 10.0] {
            let t = scale / p.omega;
            let evolved = dy.evolve_tc(t, &psi)?;
            let drift = (expectation(&h0, &evolved)? - expectation(&h0, &psi)?).abs();
            energy.at_most(drift, 1e-9 * p.omega);
            let a = dy.evolve_tc(t, &h0.apply(&psi)?)?;
            let b = h0.apply(&evolved)?;
            commutator.at_most(a.distance(&b)?, 1e-9);
        }
    }

    // Integrated action on the rotated eigenstate against the first bound term.
    let mut action = Check::new("integrated action");
    for twice in 1..=5 {
        for m in 0..=4 {
            let p = ModelParams::new(rng.gen_range(1.0..100.0), rng.gen_range(0.05..1.0))?;
            let e = certified_eigenstate(HalfInt::from_twice(twice), m, &p, None)?;
            let f = Functionals::new(e.dims());
            let (fc, _) = f.f_c_min(&e.state)?;
            let dy = RwaDynamics::new(e.dims(), p)?;
            for _ in 0..5 {
                let t = rng.gen_range(0.0..10.0) / p.omega;
                let rotated = dy.rotating_frame(t, &e.state)?;
                let lhs = integrated_action_norm(e.dims(), &p, t, &rotated)?;
                let rhs = p.lambda / p.omega * (p.omega * t).sin().abs() * fc;
                action.at_most(lhs, rhs + 1e-10);
            }
        }
    }
    Ok(vec![monomial, photon, energy, commutator, action])
}

fn eigenstates() -> Result<Vec<Check>> {
    let mut residual = Check::new("eigen-residual");
    let mut excitation = Check::new("excitation number");
    let mut oracle = Check::new("formula vs operator product");
    let p = ModelParams::new(1.0, 1.0)?;
    for twice in 1..=10 {
        for m in 0..=6 {
            let spin = HalfInt::from_twice(twice);
            match certified_eigenstate(spin, m, &p, None) {
                Ok(e) => {
                    residual.at_most(e.eigen_residual, 1e-8);
                    excitation.at_most(e.excitation_residual, 1e-10);
                    let direct = build_eigenstate_oracle(spin, &e.roots.roots, e.dims())?;
                    let norm: f64 = e.coefficients.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
                    let rel = e.state.scaled(C64::new(norm, 0.0)).distance(&direct)? / direct.norm();
                    oracle.at_most(rel, 1e-10);
                }
                Err(err) => residual.ok(Err(err)),
            }
        }
    }
    Ok(vec![residual, excitation, oracle])
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let checks = match suite {
        Suite::Algebra => algebra(&mut rng)?,
        Suite::Unitarity => unitarity(&mut rng)?,
        Suite::Lemmas => lemmas(&mut rng)?,
        Suite::Eigenstates => eigenstates()?,
    };
    Ok(SuiteReport { suite, checks })
}
