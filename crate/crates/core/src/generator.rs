//! Time-local generators `L(t)` of the driven and undriven qubit as 4x4
//! superoperators on the column-stacked density matrix.
//!
//! Driven generators live in the dressed basis `{|psi_+>, |psi_->}` and take
//! the dimensionless time `T = lambda t`; the undriven generator lives in the
//! bare basis `{|e>, |g>}` and takes physical time.
//!
//! The nonsecular part is assembled term by term from the six operator
//! pairs listed in [`nonsecular_term_list`]. Any mis-pairing of a prefactor
//! there shows up as a failed `p = 0` comparison against the single-channel
//! generator.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{self, c, sandwich, C64, Op2, Op4};
use crate::params::{ModelParams, UndrivenParams};
use crate::rates::{lorentzian_rate, nondriven_rate, rate_sample};

/// A superoperator in the column-stacking convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator(pub Op4);

impl Superoperator {
    pub fn zero() -> Self {
        Self(Op4::zeros())
    }

    pub fn identity() -> Self {
        Self(Op4::identity())
    }

    pub fn matrix(&self) -> &Op4 {
        &self.0
    }

    pub fn apply(&self, rho: &Op2) -> Op2 {
        ops::unvec(&(self.0 * ops::vec(rho)))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, x: f64) -> Self {
        Self(self.0 * c(x))
    }
}

impl Add for Superoperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for Superoperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for Superoperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl std::iter::Sum for Superoperator {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::zero(), Add::add)
    }
}

/// `gamma (A rho A^dag - {A^dag A, rho}/2)`; linear in `gamma` of either sign.
pub fn dissipator(a: &Op2, gamma: f64) -> Superoperator {
    let ad = a.adjoint();
    let ada = ad * a;
    let id = ops::identity();
    let m = sandwich(a, &ad) - (sandwich(&ada, &id) + sandwich(&id, &ada)) * c(0.5);
    Superoperator(m * c(gamma))
}

/// `-i [H, rho]`.
pub fn hamiltonian_part(h: &Op2) -> Result<Superoperator> {
    let defect = ops::hermiticity_defect(h);
    if defect > 1e-12 * h.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let id = ops::identity();
    Ok(Superoperator((sandwich(h, &id) - sandwich(&id, h)) * (-ops::I)))
}

/// Dressed-qubit Hamiltonian `(p/2) sigma_z` in units of `lambda`.
pub fn dressed_hamiltonian(params: &ModelParams) -> Op2 {
    ops::sigma_z() * c(0.5 * params.p())
}

/// Which generator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Secular,
    FullNonsecular,
    SimplifiedNonsecular,
    Undriven,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Secular => "secular",
            Model::FullNonsecular => "full-nonsecular",
            Model::SimplifiedNonsecular => "simplified-nonsecular",
            Model::Undriven => "undriven",
        })
    }
}

/// A generator family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Secular(ModelParams),
    FullNonsecular(ModelParams),
    SimplifiedNonsecular(ModelParams),
    Undriven(UndrivenParams),
}

impl GeneratorSpec {
    pub fn model(&self) -> Model {
        match self {
            GeneratorSpec::Secular(_) => Model::Secular,
            GeneratorSpec::FullNonsecular(_) => Model::FullNonsecular,
            GeneratorSpec::SimplifiedNonsecular(_) => Model::SimplifiedNonsecular,
            GeneratorSpec::Undriven(_) => Model::Undriven,
        }
    }

    pub fn driven_params(&self) -> Option<&ModelParams> {
        match self {
            GeneratorSpec::Secular(p) | GeneratorSpec::FullNonsecular(p) | GeneratorSpec::SimplifiedNonsecular(p) => {
                Some(p)
            }
            GeneratorSpec::Undriven(_) => None,
        }
    }

    /// Conversion factor from dimensionless `T` to the native time of this
    /// spec (`1` for driven models, `1/lambda` for the undriven model).
    pub fn time_unit(&self) -> f64 {
        match self {
            GeneratorSpec::Undriven(u) => 1.0 / u.width,
            _ => 1.0,
        }
    }

    /// `L(t)` in the native time of the spec.
    pub fn at(&self, t: f64) -> Result<Superoperator> {
        match self {
            GeneratorSpec::Secular(p) => secular_generator(t, p),
            GeneratorSpec::FullNonsecular(p) => full_generator(t, p),
            GeneratorSpec::SimplifiedNonsecular(p) => simplified_nonsecular_generator(t, p),
            GeneratorSpec::Undriven(u) => undriven_generator(t, u),
        }
    }
}

/// Secular dissipator `C+^2 L[s-, g+] + C-^2 L[s+, g-] + C0^2 L[sz, g0]`.
/// Note the pairing: `gamma_+` drives `sigma_-` and `gamma_-` drives `sigma_+`.
pub fn secular_dissipator(t: f64, params: &ModelParams) -> Result<Superoperator> {
    let r = rate_sample(t, params.s(), params.p(), params.alpha)?;
    let k = params.coeffs;
    Ok(dissipator(&ops::sigma_minus(), k.plus * k.plus * r.gamma.plus)
        + dissipator(&ops::sigma_plus(), k.minus * k.minus * r.gamma.minus)
        + dissipator(&ops::sigma_z(), k.zero * k.zero * r.gamma.zero))
}

pub fn secular_generator(t: f64, params: &ModelParams) -> Result<Superoperator> {
    Ok(hamiltonian_part(&dressed_hamiltonian(params))? + secular_dissipator(t, params)?)
}

/// One nonsecular contribution `G (X rho Y - Y X rho)` plus its Hermitian
/// conjugate `G* (Y^dag rho X^dag - rho X^dag Y^dag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonsecularTerm {
    pub prefactor: C64,
    pub x: Op2,
    pub y: Op2,
}

impl NonsecularTerm {
    pub fn superoperator(&self) -> Superoperator {
        let id = ops::identity();
        let (x, y) = (self.x, self.y);
        let (xd, yd) = (x.adjoint(), y.adjoint());
        let forward = sandwich(&x, &y) - sandwich(&(y * x), &id);
        let conjugate = sandwich(&yd, &xd) - sandwich(&id, &(xd * yd));
        Superoperator(forward * self.prefactor + conjugate * self.prefactor.conj())
    }
}

/// Complex rate `Gamma = gamma/2 - i lambda`.
fn complex_rate(gamma: f64, lamb: f64) -> C64 {
    C64::new(0.5 * gamma, -lamb)
}

/// The six nonsecular terms with their complex prefactors at time `t`.
pub fn nonsecular_term_list(t: f64, params: &ModelParams) -> Result<[NonsecularTerm; 6]> {
    let r = rate_sample(t, params.s(), params.p(), params.alpha)?;
    let k = params.coeffs;
    let g_minus = complex_rate(r.gamma.minus, r.lamb.minus);
    let g_plus = complex_rate(r.gamma.plus, r.lamb.plus);
    let g_zero = complex_rate(r.gamma.zero, r.lamb.zero);
    let (sp, sm, sz) = (ops::sigma_plus(), ops::sigma_minus(), ops::sigma_z());
    let term = |g: C64, coeff: f64, x: Op2, y: Op2| NonsecularTerm { prefactor: g * coeff, x, y };
    Ok([
        term(g_minus, k.minus * k.zero, sp, sz),
        term(g_minus, k.plus * k.minus, sp, sp),
        term(g_plus, k.plus * k.zero, sm, sz),
        term(g_plus, k.plus * k.minus, sm, sm),
        term(g_zero, k.minus * k.zero, sz, sm),
        term(g_zero, k.plus * k.zero, sz, sp),
    ])
}

pub fn assemble_nonsecular(terms: &[NonsecularTerm]) -> Superoperator {
    terms.iter().map(NonsecularTerm::superoperator).sum()
}

/// Nonsecular dissipator including its Hermitian conjugate.
pub fn nonsecular_terms(t: f64, params: &ModelParams) -> Result<Superoperator> {
    Ok(assemble_nonsecular(&nonsecular_term_list(t, params)?))
}

/// Hamiltonian plus secular and nonsecular dissipators.
pub fn full_generator(t: f64, params: &ModelParams) -> Result<Superoperator> {
    Ok(secular_generator(t, params)? + nonsecular_terms(t, params)?)
}

/// Single-channel jump operator `C- s+ + C+ s- + C0 sz`.
pub fn simplified_jump_operator(params: &ModelParams) -> Op2 {
    let k = params.coeffs;
    ops::sigma_plus() * c(k.minus) + ops::sigma_minus() * c(k.plus) + ops::sigma_z() * c(k.zero)
}

/// Coherent correction `lambda C0 (C+ - C-) (s- + s+)`.
pub fn lamb_correction(lamb: f64, params: &ModelParams) -> Op2 {
    let k = params.coeffs;
    ops::sigma_x() * c(lamb * k.zero * (k.plus - k.minus))
}

/// Single-channel generator for `p << 1`, using the common rate at `q = s`.
pub fn simplified_nonsecular_generator(t: f64, params: &ModelParams) -> Result<Superoperator> {
    let (gamma, lamb) = lorentzian_rate(t, params.s(), params.alpha)?;
    let h = dressed_hamiltonian(params) + lamb_correction(lamb, params);
    Ok(hamiltonian_part(&h)? + dissipator(&simplified_jump_operator(params), gamma))
}

/// `gamma(t) L[sigma_-]` in the bare basis, physical time.
pub fn undriven_generator(t: f64, params: &UndrivenParams) -> Result<Superoperator> {
    let gamma = nondriven_rate(t, params.alpha, params.width)?;
    Ok(dissipator(&ops::sigma_minus(), gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{sigma_minus, sigma_z, ONE, ZERO};

    fn excited() -> Op2 {
        Op2::new(ONE, ZERO, ZERO, ZERO)
    }

    fn ground() -> Op2 {
        Op2::new(ZERO, ZERO, ZERO, ONE)
    }

    #[test]
    fn decay_from_excited_state() {
        let d = dissipator(&sigma_minus(), 1.0).apply(&excited());
        assert!((d - (ground() - excited())).norm() < 1e-15);
    }

    #[test]
    fn dephasing_damps_coherence_at_twice_the_rate() {
        let g0 = 0.3;
        let rho = Op2::new(c(0.6), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.4));
        let d = dissipator(&sigma_z(), g0).apply(&rho);
        assert!(d[(0, 0)].norm() < 1e-15 && d[(1, 1)].norm() < 1e-15);
        assert!((d[(0, 1)] + rho[(0, 1)] * (2.0 * g0)).norm() < 1e-15);
    }

    #[test]
    fn zero_rate_zero_superoperator() {
        assert_eq!(dissipator(&sigma_minus(), 0.0).frobenius(), 0.0);
        assert_eq!(hamiltonian_part(&Op2::zeros()).unwrap().frobenius(), 0.0);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        assert!(matches!(hamiltonian_part(&sigma_minus()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn commuting_state_is_stationary() {
        let h = sigma_z() * c(0.7);
        let rho = Op2::new(c(0.8), ZERO, ZERO, c(0.2));
        assert!(hamiltonian_part(&h).unwrap().apply(&rho).norm() < 1e-15);
    }

    #[test]
    fn rates_vanish_at_origin() {
        let p = ModelParams::dimensionless(1.0, 2.0, 0.3, 1.0, 0.5).unwrap();
        let h = hamiltonian_part(&dressed_hamiltonian(&p)).unwrap();
        assert_eq!(secular_generator(0.0, &p).unwrap(), h);
        assert!((simplified_nonsecular_generator(0.0, &p).unwrap() - h).frobenius() < 1e-15);
        assert_eq!(nonsecular_terms(0.0, &p).unwrap().frobenius(), 0.0);
    }

    #[test]
    fn no_drive_no_nonsecular_terms() {
        // Omega = 0 with Delta > 0 gives C0 = 0 and C- = 0
        let p = ModelParams::dimensionless(0.5, 1.0, 1.0, 0.0, 0.5).unwrap();
        for t in [0.1, 1.0, 4.0] {
            assert!(nonsecular_terms(t, &p).unwrap().frobenius() < 1e-15);
        }
    }

    #[test]
    fn jump_operator_normalized() {
        for (d, o) in [(0.0, 1.0), (3.0, 4.0), (-2.0, 0.1), (10.0, 0.5)] {
            let p = ModelParams::dimensionless(1.0, 0.0, d, o, 0.3).unwrap();
            let a = simplified_jump_operator(&p);
            assert!((ops::trace(&(a.adjoint() * a)).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lamb_correction_is_sigma_x() {
        let p = ModelParams::dimensionless(1.0, 0.0, 3.0, 4.0, 0.3).unwrap();
        let h = lamb_correction(-0.2, &p);
        assert!((h - ops::sigma_x() * c(-0.2 * p.coeffs.zero)).norm() < 1e-15);
    }

    #[test]
    fn resonant_secular_fixed_point_is_maximally_mixed_for_s0() {
        let p = ModelParams::dimensionless(0.0, 3.0, 0.0, 1.0, 0.5).unwrap();
        let mixed = ops::identity() * c(0.5);
        for t in [0.5, 2.0, 10.0] {
            let r = rate_sample(t, 0.0, 3.0, 0.5).unwrap();
            assert!((r.gamma.plus - r.gamma.minus).abs() < 1e-15);
            assert!(secular_generator(t, &p).unwrap().apply(&mixed).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_p_full_equals_simplified() {
        let p = ModelParams::dimensionless(4.2, 0.0, 0.7, 1.3, 0.8).unwrap();
        for k in 0..40 {
            let t = 0.25 * k as f64;
            let diff = full_generator(t, &p).unwrap() - simplified_nonsecular_generator(t, &p).unwrap();
            assert!(diff.frobenius() < 1e-12, "t={t}: {}", diff.frobenius());
        }
    }
}
