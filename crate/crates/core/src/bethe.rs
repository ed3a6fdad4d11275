//! Resonant Tavis–Cummings Bethe equations
//!
//! ```text
//! F_n(e) = 2S/e_n − e_n − Σ_{j≠n} 2/(e_n − e_j) = 0,   n = 1..M
//! ```
//!
//! solved by damped Newton iteration with an analytic Jacobian.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sector::{HalfInt, C64};
use crate::{Result, RwaError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetheConfig {
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Initial step factor; halved while the residual does not decrease.
    pub damping: f64,
    pub min_damping: f64,
    pub collision_tol: f64,
}

impl Default for BetheConfig {
    fn default() -> Self {
        BetheConfig {
            tol_residual: 1e-12,
            max_iter: 200,
            damping: 1.0,
            min_damping: 2f64.powi(-20),
            collision_tol: 1e-9,
        }
    }
}

impl BetheConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol_residual > 0.0
            && self.max_iter >= 1
            && self.damping > 0.0
            && self.damping <= 1.0
            && self.min_damping > 0.0
            && self.collision_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RwaError::invalid(format!("bad Bethe configuration {self:?}")))
        }
    }
}

/// A certified solution of the Bethe equations.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots {
    pub spin: HalfInt,
    pub excitations: u32,
    pub roots: Vec<C64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl BetheRoots {
    pub fn sum(&self) -> C64 {
        self.roots.iter().sum()
    }

    pub fn conjugated(&self) -> Vec<C64> {
        self.roots.iter().map(|z| z.conj()).collect()
    }
}

/// `(a + i b, a + 2 i b, …, a + M i b)` with `a = √(2S)/2`, `b = √(2S)/M`.
pub fn initial_guess(spin: HalfInt, excitations: u32) -> Vec<C64> {
    if excitations == 0 {
        return Vec::new();
    }
    let root = (2.0 * spin.value()).sqrt();
    let a = root / 2.0;
    let b = root / f64::from(excitations);
    (1..=excitations).map(|k| C64::new(a, f64::from(k) * b)).collect()
}

fn check_poles(roots: &[C64], collision_tol: f64) -> Result<()> {
    for (i, z) in roots.iter().enumerate() {
        if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(RwaError::ZeroRoot { index: i });
        }
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d <= collision_tol {
                return Err(RwaError::RootCollision {
                    first: i,
                    second: j,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

fn residual_unchecked(roots: &[C64], spin: f64) -> Vec<C64> {
    let two_s = C64::new(2.0 * spin, 0.0);
    (0..roots.len())
        .map(|n| {
            let en = roots[n];
            let mut f = two_s / en - en;
            for (j, ej) in roots.iter().enumerate() {
                if j != n {
                    f -= C64::new(2.0, 0.0) / (en - ej);
                }
            }
            f
        })
        .collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Component-wise Bethe residual. Rejects zero or colliding roots.
pub fn bethe_residual(roots: &[C64], spin: HalfInt) -> Result<Vec<C64>> {
    check_poles(roots, BetheConfig::default().collision_tol)?;
    Ok(residual_unchecked(roots, spin.value()))
}

fn jacobian(roots: &[C64], spin: f64) -> DMatrix<C64> {
    let m = roots.len();
    let two = C64::new(2.0, 0.0);
    DMatrix::from_fn(m, m, |n, j| {
        if n == j {
            let en = roots[n];
            let mut d = -C64::new(2.0 * spin, 0.0) / (en * en) - C64::new(1.0, 0.0);
            for (k, ek) in roots.iter().enumerate() {
                if k != n {
                    let diff = en - ek;
                    d += two / (diff * diff);
                }
            }
            d
        } else {
            let diff = roots[n] - roots[j];
            -two / (diff * diff)
        }
    })
}

/// Sort key that treats real parts within `1e-9` as equal, then orders by
/// imaginary part.
fn canonical_order(a: &C64, b: &C64) -> Ordering {
    let qa = (a.re * 1e9).round() as i64;
    let qb = (b.re * 1e9).round() as i64;
    qa.cmp(&qb).then(a.im.total_cmp(&b.im))
}

pub fn sort_roots(roots: &mut [C64]) {
    roots.sort_by(canonical_order);
}

/// Damped Newton from `guess`. The result is the fixed point reached from
/// that starting point, re-certified through [`bethe_residual`].
pub fn solve_bethe(spin: HalfInt, excitations: u32, guess: &[C64], config: &BetheConfig) -> Result<BetheRoots> {
    config.validate()?;
    if spin.twice() < 1 {
        return Err(RwaError::invalid(format!("spin must be at least 1/2, got {spin}")));
    }
    if guess.len() != excitations as usize {
        return Err(RwaError::invalid(format!(
            "guess has {} entries but M = {excitations}",
            guess.len()
        )));
    }
    if excitations == 0 {
        return Ok(BetheRoots {
            spin,
            excitations,
            roots: Vec::new(),
            residual_norm: 0.0,
            iterations: 0,
        });
    }
    let s = spin.value();
    let mut roots = guess.to_vec();
    check_poles(&roots, config.collision_tol)?;
    let mut f = residual_unchecked(&roots, s);
    let mut res = norm(&f);
    let mut iterations = 0;

    while res >= config.tol_residual {
        if iterations >= config.max_iter {
            return Err(RwaError::NonConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|z| -z));
        let step = jacobian(&roots, s)
            .lu()
            .solve(&rhs)
            .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(RwaError::SingularJacobian { iteration: iterations })?;

        let mut scale = config.damping;
        let mut accepted = None;
        let mut fallback = None;
        loop {
            let trial: Vec<C64> = roots.iter().zip(step.iter()).map(|(z, dz)| z + dz * scale).collect();
            if let Err(e) = check_poles(&trial, config.collision_tol) {
                fallback.get_or_insert(Err(e));
            } else {
                let tf = residual_unchecked(&trial, s);
                let tr = norm(&tf);
                if tr < res {
                    accepted = Some((trial, tf, tr));
                    break;
                }
                if matches!(fallback, None | Some(Err(_))) {
                    fallback = Some(Ok((trial, tf, tr)));
                }
            }
            scale *= 0.5;
            if scale < config.min_damping {
                break;
            }
        }
        // No decrease at any step size: take the smallest pole-free step and
        // let the iteration budget decide.
        let (r, tf, tr) = match accepted {
            Some(x) => x,
            None => match fallback {
                Some(Ok(x)) => x,
                Some(Err(e)) => return Err(e),
                None => return Err(RwaError::SingularJacobian { iteration: iterations }),
            },
        };
        roots = r;
        f = tf;
        res = tr;
    }

    sort_roots(&mut roots);
    // Independent re-check of the sorted roots.
    let certified = norm(&bethe_residual(&roots, spin)?);
    if certified >= config.tol_residual {
        return Err(RwaError::NonConvergence {
            iterations,
            residual: certified,
        });
    }
    let sum: C64 = roots.iter().sum();
    if sum.im.abs() >= 1e-9 {
        return Err(RwaError::NonRealEnergy { imag: sum.im });
    }
    Ok(BetheRoots {
        spin,
        excitations,
        roots,
        residual_norm: certified,
        iterations,
    })
}

/// Solve from the standard initial guess.
pub fn solve_default(spin: HalfInt, excitations: u32) -> Result<BetheRoots> {
    solve_bethe(
        spin,
        excitations,
        &initial_guess(spin, excitations),
        &BetheConfig::default(),
    )
}

/// Number of independent eigenstates at fixed `(S, M)`: `min(2S, M) + 1`.
pub fn branch_count(spin: HalfInt, excitations: u32) -> usize {
    (spin.twice() as u32).min(excitations) as usize + 1
}

fn same_multiset(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter()
        .all(|x| match (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() < tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
}

const POLE_MARGIN: f64 = 1e-6;

/// Best-effort enumeration of distinct solutions for `M ≤ 2`, by restarting
/// Newton from random perturbations of the standard guess. Stops once
/// `min(2S, M) + 1` solutions are found or `attempts` are used.
pub fn enumerate_branches(spin: HalfInt, excitations: u32, attempts: usize, seed: u64) -> Result<Vec<BetheRoots>> {
    if excitations > 2 {
        return Err(RwaError::invalid("branch enumeration is only supported for M <= 2"));
    }
    let target = branch_count(spin, excitations);
    let config = BetheConfig::default();
    let base = initial_guess(spin, excitations);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<BetheRoots> = Vec::new();
    if let Ok(r) = solve_bethe(spin, excitations, &base, &config) {
        if check_poles(&r.roots, POLE_MARGIN).is_ok() {
            found.push(r);
        }
    }
    let spread = 2.0 * (2.0 * spin.value()).sqrt().max(1.0);
    for _ in 0..attempts {
        if found.len() >= target {
            break;
        }
        let guess: Vec<C64> = base
            .iter()
            .map(|z| z + C64::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread)))
            .collect();
        if let Ok(r) = solve_bethe(spin, excitations, &guess, &config) {
            // Newton can creep towards a pole pair e_i ≈ −e_j ≈ 0 where the
            // residual also vanishes; such limits are not eigenstates.
            if check_poles(&r.roots, POLE_MARGIN).is_err() {
                continue;
            }
            if !found.iter().any(|f| same_multiset(&f.roots, &r.roots, 1e-7)) {
                found.push(r);
            }
        }
    }
    found.sort_by(|a, b| {
        a.roots
            .iter()
            .zip(b.roots.iter())
            .map(|(x, y)| canonical_order(x, y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn guess_examples() {
        assert_eq!(initial_guess(h(1), 1), vec![C64::new(0.5, 1.0)]);
        let g = initial_guess(h(4), 2);
        assert!((g[0] - C64::new(1.0, 1.0)).norm() < 1e-15);
        assert!((g[1] - C64::new(1.0, 2.0)).norm() < 1e-15);
        assert!(initial_guess(h(3), 0).is_empty());
    }

    #[test]
    fn residual_closed_forms() {
        let zero = |v: Vec<C64>| v.iter().all(|z| z.norm() < 1e-15);
        assert!(zero(bethe_residual(&[C64::new(1.0, 0.0)], h(1)).unwrap()));
        assert!(zero(bethe_residual(&[C64::new(-1.0, 0.0)], h(1)).unwrap()));
        assert!(zero(bethe_residual(&[C64::new(2.0, 0.0)], h(4)).unwrap()));
    }

    #[test]
    fn residual_rejects_poles() {
        assert!(matches!(
            bethe_residual(&[C64::new(0.0, 0.0)], h(1)),
            Err(RwaError::ZeroRoot { index: 0 })
        ));
        let z = C64::new(1.0, 1.0);
        assert!(matches!(
            bethe_residual(&[z, z], h(2)),
            Err(RwaError::RootCollision { .. })
        ));
    }

    #[test]
    fn single_excitation_is_sqrt_two_s() {
        for twice in [1, 2, 4, 10] {
            let r = solve_default(h(twice), 1).unwrap();
            let want = (f64::from(twice)).sqrt();
            assert!(
                (r.roots[0] - C64::new(want, 0.0)).norm() < 1e-12,
                "S={}/2: {:?}",
                twice,
                r.roots
            );
            assert!(r.residual_norm < 1e-12);
        }
    }

    #[test]
    fn zero_excitations() {
        let r = solve_default(h(3), 0).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.residual_norm, 0.0);
    }

    #[test]
    fn guess_length_checked() {
        assert!(solve_bethe(h(2), 2, &[C64::new(1.0, 1.0)], &BetheConfig::default()).is_err());
    }

    #[test]
    fn conjugate_solutions() {
        for twice in 1..=10 {
            for m in 1..=6 {
                let r = solve_default(h(twice), m).unwrap();
                let res = norm(&bethe_residual(&r.conjugated(), h(twice)).unwrap());
                assert!(res < 1e-12, "S={twice}/2 M={m}: {res:e}");
                assert!(r.sum().im.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let cfg = BetheConfig {
            max_iter: 1,
            ..BetheConfig::default()
        };
        let g = initial_guess(h(10), 5);
        assert!(matches!(
            solve_bethe(h(10), 5, &g, &cfg),
            Err(RwaError::NonConvergence { .. })
        ));
    }

    #[test]
    fn roots_are_sorted() {
        let r = solve_default(h(6), 4).unwrap();
        let mut sorted = r.roots.clone();
        sort_roots(&mut sorted);
        assert_eq!(sorted, r.roots);
    }

    #[test]
    fn enumerate_small_branches() {
        for twice in 1..=4 {
            for m in 1..=2 {
                let found = enumerate_branches(h(twice), m, 256, 11).unwrap();
                assert_eq!(found.len(), branch_count(h(twice), m), "S={twice}/2 M={m}");
            }
        }
        assert!(enumerate_branches(h(2), 3, 10, 1).is_err());
    }
}
