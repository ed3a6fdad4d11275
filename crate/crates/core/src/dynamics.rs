//! Spectral propagation and the exact rotating-wave error.
//!
//! Hamiltonians are split into the connected components of their sparsity
//! graph before diagonalization: Tavis–Cummings falls apart into excitation
//! blocks and Dicke into two parity blocks. Real blocks go through the real
//! symmetric eigensolver.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::hamiltonian::{build_counter_rotating, build_dicke, build_h0, build_tavis_cummings, ModelParams};
use crate::par::{self, Execution};
use crate::sector::{build_boson_operators, build_spin_operators, OperatorMatrix, SectorDims, StateVector, C64};
use crate::{Result, RwaError};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Vectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: Vectors,
}

impl Block {
    fn evolve(&self, t: f64, amplitudes: &mut DVector<C64>) {
        let k = self.indices.len();
        let local = DVector::from_iterator(k, self.indices.iter().map(|&i| amplitudes[i]));
        let phase = |j: usize| C64::from_polar(1.0, -t * self.values[j]);
        let out = match &self.vectors {
            Vectors::Real(v) => {
                let re = v.tr_mul(&local.map(|z| z.re));
                let im = v.tr_mul(&local.map(|z| z.im));
                let mut x = DVector::from_fn(k, |j, _| C64::new(re[j], im[j]) * phase(j));
                let xr = v * x.map(|z| z.re);
                let xi = v * x.map(|z| z.im);
                x = DVector::from_fn(k, |j, _| C64::new(xr[j], xi[j]));
                x
            }
            Vectors::Complex(v) => {
                let mut x = v.ad_mul(&local);
                for j in 0..k {
                    x[j] *= phase(j);
                }
                v * x
            }
        };
        for (j, &i) in self.indices.iter().enumerate() {
            amplitudes[i] = out[j];
        }
    }
}

/// Eigen-decomposition `H = V Λ V†` stored block by block.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dims: SectorDims,
    blocks: Vec<Block>,
}

fn components(h: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            let z = h[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

fn decompose_block(h: &DMatrix<C64>, indices: Vec<usize>) -> Block {
    let k = indices.len();
    let real = indices.iter().all(|&i| indices.iter().all(|&j| h[(i, j)].im == 0.0));
    if real {
        let sub = DMatrix::from_fn(k, k, |a, b| h[(indices[a], indices[b])].re);
        let eig = sub.symmetric_eigen();
        Block {
            indices,
            values: eig.eigenvalues,
            vectors: Vectors::Real(eig.eigenvectors),
        }
    } else {
        let sub = DMatrix::from_fn(k, k, |a, b| h[(indices[a], indices[b])]);
        let eig = sub.symmetric_eigen();
        Block {
            indices,
            values: eig.eigenvalues,
            vectors: Vectors::Complex(eig.eigenvectors),
        }
    }
}

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(RwaError::NotHermitian { defect });
    }
    Ok(())
}

impl SpectralDecomposition {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        SpectralDecomposition::with_execution(h, Execution::Parallel)
    }

    pub fn with_execution(h: &OperatorMatrix, exec: Execution) -> Result<Self> {
        check_hermitian(h)?;
        Ok(SpectralDecomposition::decompose_hermitian(h, exec))
    }

    fn decompose_hermitian(h: &OperatorMatrix, exec: Execution) -> Self {
        let entries = h.entries();
        let blocks = par::map(components(entries), exec, |g| decompose_block(entries, g));
        SpectralDecomposition { dims: h.dims(), blocks }
    }

    pub fn dims(&self) -> SectorDims {
        self.dims
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Eigenvalues in the column order of [`SpectralDecomposition::eigenvectors`].
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect()
    }

    /// The full unitary `V` as a dense matrix.
    pub fn eigenvectors(&self) -> DMatrix<C64> {
        let n = self.dims.dim();
        let mut v = DMatrix::zeros(n, n);
        let mut col = 0;
        for b in &self.blocks {
            for j in 0..b.indices.len() {
                for (a, &row) in b.indices.iter().enumerate() {
                    v[(row, col)] = match &b.vectors {
                        Vectors::Real(m) => C64::new(m[(a, j)], 0.0),
                        Vectors::Complex(m) => m[(a, j)],
                    };
                }
                col += 1;
            }
        }
        v
    }

    /// `V e^{−itΛ} V† ψ`.
    pub fn propagate(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.dims() != self.dims {
            return Err(RwaError::DimensionMismatch {
                expected: self.dims.dim(),
                found: psi.dims().dim(),
            });
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let mut amps = psi.amplitudes().clone();
        for b in &self.blocks {
            b.evolve(t, &mut amps);
        }
        StateVector::from_amplitudes(self.dims, amps)
    }
}

/// Decompose `h` and apply `e^{−itH}` to `psi`.
pub fn spectral_propagate(h: &OperatorMatrix, t: f64, psi: &StateVector) -> Result<StateVector> {
    SpectralDecomposition::new(h)?.propagate(t, psi)
}

fn matrix_key(h: &OperatorMatrix) -> u64 {
    let mut hasher = DefaultHasher::new();
    h.dims().hash(&mut hasher);
    for z in h.entries().iter() {
        z.re.to_bits().hash(&mut hasher);
        z.im.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

type Slot = Arc<OnceLock<Arc<SpectralDecomposition>>>;

/// Decompositions shared between sweep points, keyed by a hash of the matrix.
#[derive(Debug, Default)]
pub struct SpectralCache {
    slots: Mutex<HashMap<u64, Slot>>,
}

impl SpectralCache {
    pub fn new() -> Self {
        SpectralCache::default()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Threads asking for the same matrix wait for a single decomposition.
    /// Callers already inside a parallel region should pass
    /// `Execution::Serial`, so that a waiting worker never picks up the
    /// initializer's own work.
    pub fn get_or_insert(&self, h: &OperatorMatrix, exec: Execution) -> Result<Arc<SpectralDecomposition>> {
        let slot = {
            let mut map = self.slots.lock().expect("cache lock");
            map.entry(matrix_key(h)).or_default().clone()
        };
        if let Some(d) = slot.get() {
            return Ok(d.clone());
        }
        check_hermitian(h)?;
        Ok(slot
            .get_or_init(|| Arc::new(SpectralDecomposition::decompose_hermitian(h, exec)))
            .clone())
    }
}

/// Both propagators of one parameter point.
#[derive(Debug, Clone)]
pub struct RwaDynamics {
    dims: SectorDims,
    params: ModelParams,
    tc: Arc<SpectralDecomposition>,
    dicke: Arc<SpectralDecomposition>,
}

impl RwaDynamics {
    pub fn new(dims: SectorDims, params: ModelParams) -> Result<Self> {
        RwaDynamics::with_cache(dims, params, None, Execution::Parallel)
    }

    pub fn with_cache(
        dims: SectorDims,
        params: ModelParams,
        cache: Option<&SpectralCache>,
        exec: Execution,
    ) -> Result<Self> {
        let decompose = |h: OperatorMatrix| match cache {
            Some(c) => c.get_or_insert(&h, exec),
            None => SpectralDecomposition::with_execution(&h, exec).map(Arc::new),
        };
        let tc = decompose(build_tavis_cummings(dims, &params))?;
        let dicke = decompose(build_dicke(dims, &params))?;
        Ok(RwaDynamics {
            dims,
            params,
            tc,
            dicke,
        })
    }

    pub fn dims(&self) -> SectorDims {
        self.dims
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn evolve_tc(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        self.tc.propagate(t, psi)
    }

    pub fn evolve_dicke(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        self.dicke.propagate(t, psi)
    }

    /// `U₂(t)ψ = e^{itH₀} e^{−itH_TC} ψ`.
    pub fn rotating_frame(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        let evolved = self.tc.propagate(t, psi)?;
        Ok(free_evolution(&evolved, &self.params, -t))
    }

    /// `‖(e^{−itH_TC} − e^{−itH_D})ψ‖`.
    pub fn exact_error(&self, t: f64, psi: &StateVector) -> Result<f64> {
        let a = self.tc.propagate(t, psi)?;
        let b = self.dicke.propagate(t, psi)?;
        a.distance(&b)
    }
}

/// `e^{−itH₀}ψ`, applied as diagonal phases.
pub fn free_evolution(psi: &StateVector, params: &ModelParams, t: f64) -> StateVector {
    let dims = psi.dims();
    let h0 = build_h0(dims, params).diagonal();
    let amps = DVector::from_fn(dims.dim(), |i, _| {
        psi.amplitudes()[i] * C64::from_polar(1.0, -t * h0[i].re)
    });
    StateVector::from_amplitudes(dims, amps).expect("same dimension")
}

pub fn exact_rwa_error(dims: SectorDims, params: &ModelParams, t: f64, psi: &StateVector) -> Result<f64> {
    if t == 0.0 || params.lambda == 0.0 {
        return Ok(0.0);
    }
    RwaDynamics::new(dims, *params)?.exact_error(t, psi)
}

/// Relative change of the exact error when the cutoff is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub error: f64,
    pub error_doubled: f64,
    pub ratio: f64,
}

impl TruncationReport {
    pub const FLAG_THRESHOLD: f64 = 1e-3;

    pub fn flagged(&self) -> bool {
        self.ratio > Self::FLAG_THRESHOLD
    }
}

pub fn truncation_report(
    dims: SectorDims,
    params: &ModelParams,
    t: f64,
    psi: &StateVector,
    cache: Option<&SpectralCache>,
    exec: Execution,
) -> Result<TruncationReport> {
    let error = RwaDynamics::with_cache(dims, *params, cache, exec)?.exact_error(t, psi)?;
    let big = dims.with_n_max(2 * dims.n_max().max(1));
    let error_doubled = RwaDynamics::with_cache(big, *params, cache, exec)?.exact_error(t, &psi.embed(big)?)?;
    let ratio = (error - error_doubled).abs() / error_doubled.max(1e-14);
    Ok(TruncationReport {
        error,
        error_doubled,
        ratio,
    })
}

/// `|err(n_max) − err(2 n_max)| / max(err(2 n_max), 1e−14)`.
pub fn truncation_check(dims: SectorDims, params: &ModelParams, t: f64, psi: &StateVector) -> Result<f64> {
    if params.lambda == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    Ok(truncation_report(dims, params, t, psi, None, Execution::Parallel)?.ratio)
}

/// `‖(λ/ω) sin(ωt) (e^{iωt} S₊a† + e^{−iωt} S₋a) ψ‖`.
pub fn integrated_action_norm(dims: SectorDims, params: &ModelParams, t: f64, psi: &StateVector) -> Result<f64> {
    let s = build_spin_operators(dims);
    let b = build_boson_operators(dims);
    let wt = params.omega * t;
    let up = s.splus.product(&b.adag)?.apply(psi)?.scaled(C64::from_polar(1.0, wt));
    let down = s.sminus.product(&b.a)?.apply(psi)?.scaled(C64::from_polar(1.0, -wt));
    Ok((params.lambda / params.omega) * wt.sin().abs() * up.add(&down)?.norm())
}

/// The counter-rotating coupling, exposed for checks that need it directly.
pub fn counter_rotating(dims: SectorDims, params: &ModelParams) -> OperatorMatrix {
    build_counter_rotating(dims, params.lambda)
}

/// Fixed-step RK4 integration of `dψ/dt = −iHψ`. Fails with `NormDrift`
/// when the norm moves by more than `1e−6`.
pub fn ode_oracle(h: &OperatorMatrix, t: f64, psi: &StateVector, steps: usize) -> Result<StateVector> {
    if steps == 0 {
        return Err(RwaError::invalid("ODE oracle needs at least one step"));
    }
    if h.dims() != psi.dims() {
        return Err(RwaError::DimensionMismatch {
            expected: h.dim(),
            found: psi.dims().dim(),
        });
    }
    let dt = t / steps as f64;
    let minus_i = C64::new(0.0, -1.0);
    let f = |v: &DVector<C64>| h.apply_unchecked(v) * minus_i;
    let mut y = psi.amplitudes().clone();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&(&y + &k1 * C64::new(dt / 2.0, 0.0)));
        let k3 = f(&(&y + &k2 * C64::new(dt / 2.0, 0.0)));
        let k4 = f(&(&y + &k3 * C64::new(dt, 0.0)));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    }
    let drift = (y.norm() - psi.norm()).abs();
    if drift > 1e-6 {
        return Err(RwaError::NormDrift { drift });
    }
    StateVector::from_amplitudes(psi.dims(), y)
}
