//! Energy functionals, the weak-BC sesquilinear form, explicit coercivity
//! constants, parameter selection and the 𝒱-norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ClosedFormField, Point, SourceField, C64, I};
use crate::geometry::{Domain, Quadratures};

/// Wavenumber, regularisation weights, Morawetz and Young parameters and the
/// geometric constants of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub k: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub nu: usize,
}

/// Open interval of admissible `α` for dimension `ν`.
pub fn admissible_alpha(nu: usize) -> Result<(f64, f64)> {
    match nu {
        1 | 2 => Ok((0.5, f64::INFINITY)),
        3 => Ok((0.5, 1.5)),
        _ => Err(Error::NoAdmissibleAlpha(nu)),
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(1..=3).contains(&self.nu) {
            return bad(format!("nu must be 1, 2 or 3 (got {})", self.nu));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("k must be positive (got {})", self.k));
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            return bad("gamma1 and gamma2 must be non-negative".into());
        }
        let (lo, hi) = admissible_alpha(self.nu)?;
        if !(self.alpha > lo && self.alpha < hi) {
            return bad(format!(
                "alpha = {} outside the admissible interval ({lo}, {hi})",
                self.alpha
            ));
        }
        if !(self.eps1 > 0.0 && self.eps2 > 0.0 && self.eps3 > 0.0) {
            return bad("eps1, eps2, eps3 must be positive".into());
        }
        if !(self.l0 > 0.0 && self.l0 <= self.l && self.l.is_finite()) {
            return bad(format!("need 0 < L0 <= L (got L0 = {}, L = {})", self.l0, self.l));
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite".into());
        }
        Ok(())
    }

    /// Bulk Young parameter of the weak-BC bound, fixed by the displayed mass
    /// coefficient.
    pub fn eps4(&self) -> f64 {
        (self.alpha - 0.5) * self.nu as f64 / 2.0
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }
}

/// Coefficients of the lower bound `F ≥ Σ cᵢ·termᵢ`, already divided by `ν`.
/// `bimp` is absent for the strongly imposed boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCoefficients {
    pub residual: f64,
    pub grad: f64,
    pub mass: f64,
    pub bgrad: f64,
    pub bmass: f64,
    pub bimp: Option<f64>,
}

impl CoercivityCoefficients {
    pub fn is_coercive(&self) -> bool {
        self.residual > 0.0
            && self.grad > 0.0
            && self.mass > 0.0
            && self.bgrad > 0.0
            && self.bmass > 0.0
            && self.bimp.is_none_or(|c| c > 0.0)
    }

    /// Multiply every coefficient by `s` (for instance `ν`).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            residual: self.residual * s,
            grad: self.grad * s,
            mass: self.mass * s,
            bgrad: self.bgrad * s,
            bmass: self.bmass * s,
            bimp: self.bimp.map(|c| c * s),
        }
    }

    /// Largest `θ` with `Σ cᵢ·termᵢ ≥ θ‖v‖²_{𝒱,L}`.
    pub fn theta(&self, l: f64) -> f64 {
        let mut t = self
            .grad
            .min(self.mass)
            .min(self.residual / (l * l))
            .min(self.bmass / l)
            .min(self.bgrad / l);
        if let Some(c) = self.bimp {
            t = t.min(c / l);
        }
        t
    }

    /// `Σ cᵢ·termᵢ`.
    pub fn lower_bound(&self, t: &SeminormTerms) -> f64 {
        self.residual * t.residual
            + self.grad * t.grad
            + self.mass * t.mass
            + self.bgrad * t.bgrad
            + self.bmass * t.bmass
            + self.bimp.map_or(0.0, |c| c * t.bimp)
    }
}

fn residual_coefficient(p: &EnergyParams, gamma: f64) -> f64 {
    let nu = p.nu as f64;
    let a = p.alpha;
    nu * gamma - a * a * p.l * p.l / p.eps1 - 2.0 * p.beta * p.beta / ((a - 0.5) * nu)
}

/// Bound for the energy with the impedance condition imposed strongly;
/// `γ₁` plays the role of `γ`. With `ε₂ = L₀/2` the boundary-mass term is
/// `2β - αL - 2αL²/L₀`.
pub fn coercivity_coefficients_strong(p: &EnergyParams) -> Result<CoercivityCoefficients> {
    p.validate()?;
    let nu = p.nu as f64;
    let a = p.alpha;
    Ok(CoercivityCoefficients {
        residual: residual_coefficient(p, p.gamma1) / nu,
        grad: (nu / 2.0 - a * (nu - 2.0) - p.eps1) / nu,
        mass: 0.5 * (a - 0.5),
        bgrad: (a * p.l0 - a * p.eps2) / nu,
        bmass: (2.0 * p.beta - a * p.l - a * p.l * p.l / p.eps2) / nu,
        bimp: None,
    })
}

/// Bound for the weak-BC energy `F_γ`.
pub fn coercivity_coefficients_weak(p: &EnergyParams) -> Result<CoercivityCoefficients> {
    p.validate()?;
    let nu = p.nu as f64;
    let a = p.alpha;
    let l2 = p.l * p.l;
    Ok(CoercivityCoefficients {
        residual: residual_coefficient(p, p.gamma1) / nu,
        grad: (nu / 2.0 - a * (nu - 2.0) - p.eps1) / nu,
        mass: 0.5 * (a - 0.5),
        bgrad: (a * p.l0 - a * l2 * p.eps3 - a * p.eps2) / nu,
        bmass: (2.0 * p.beta - a * p.l - a * l2 / p.eps2) / nu,
        bimp: Some((nu * p.gamma2 - a / p.eps3) / nu),
    })
}

/// Smallest weights making the residual and impedance coefficients vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaThresholds {
    pub gamma0: f64,
    pub gamma1_0: f64,
    pub gamma2_0: f64,
}

pub fn gamma_thresholds(p: &EnergyParams) -> Result<GammaThresholds> {
    p.validate()?;
    let nu = p.nu as f64;
    let g = (residual_coefficient(p, 0.0) / -nu).max(0.0);
    Ok(GammaThresholds {
        gamma0: g,
        gamma1_0: g,
        gamma2_0: p.alpha / (p.eps3 * nu),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterStrategy {
    /// Square/cube constants for `ν = 2, 3`, falling back to [`Self::Rule`]
    /// when they do not certify the given geometry; the rule for `ν = 1`.
    Recommended,
    /// `α = 1` and margins of `0.1L` on `β`, `0.5L²/ν` on `γ₁`, `0.5L/ν` on `γ₂`.
    Rule,
}

/// Parameter pack for a domain with diameter `L` and star-shape constant `L₀`.
pub fn select_parameters(
    nu: usize,
    k: f64,
    l: f64,
    l0: f64,
    strategy: ParameterStrategy,
) -> Result<EnergyParams> {
    admissible_alpha(nu)?;
    let eps1 = if nu == 2 { 0.5 } else { 0.25 };
    let base = EnergyParams {
        k,
        gamma1: 0.0,
        gamma2: 0.0,
        alpha: 1.0,
        beta: 0.0,
        eps1,
        eps2: l0 / 4.0,
        eps3: l0 / (4.0 * l * l),
        l,
        l0,
        nu,
    };
    if strategy == ParameterStrategy::Recommended && nu >= 2 {
        let (beta, g1, g2) = if nu == 2 { (6.2, 39.5, 5.7) } else { (7.5, 26.5, 5.0) };
        let p = EnergyParams {
            beta: beta * l,
            gamma1: g1 * l * l,
            gamma2: g2 * l,
            ..base
        };
        if coercivity_coefficients_weak(&p)?.is_coercive() {
            return Ok(p);
        }
    }
    let nuf = nu as f64;
    let a = base.alpha;
    let beta = (a * l + a * l * l / base.eps2) / 2.0 + 0.1 * l;
    let p = EnergyParams {
        beta,
        gamma1: (a * a * l * l / eps1 + 2.0 * beta * beta / ((a - 0.5) * nuf) + 0.5 * l * l) / nuf,
        gamma2: (a / base.eps3 + 0.5 * l) / nuf,
        ..base
    };
    p.validate()?;
    Ok(p)
}

/// Convenience: recommended pack for a domain.
pub fn default_params(domain: &Domain, k: f64) -> Result<EnergyParams> {
    select_parameters(
        domain.dim(),
        k,
        domain.diameter(),
        domain.star_shape_constant()?,
        ParameterStrategy::Recommended,
    )
}

/// The six squared seminorms that make up the 𝒱-norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeminormTerms {
    /// `‖∇v‖²`
    pub grad: f64,
    /// `k²‖v‖²`
    pub mass: f64,
    /// `‖ℒv‖²`
    pub residual: f64,
    /// `k²‖v‖²_∂Ω`
    pub bmass: f64,
    /// `‖∇v‖²_∂Ω`
    pub bgrad: f64,
    /// `‖∂ₙv - ikv‖²_∂Ω`
    pub bimp: f64,
}

impl SeminormTerms {
    pub fn v_norm_sqr(&self) -> f64 {
        self.grad + self.mass + self.residual + self.bmass + self.bgrad + self.bimp
    }

    /// Squared rescaled norm with weights `(1, 1, L², L, L, L)`.
    pub fn v_norm_sqr_rescaled(&self, l: f64) -> f64 {
        self.grad + self.mass + l * l * self.residual + l * (self.bmass + self.bgrad + self.bimp)
    }
}

pub fn seminorm_terms(u: &dyn ClosedFormField, k: f64, q: &Quadratures) -> SeminormTerms {
    let k2 = k * k;
    let [grad, mass, residual] = q.interior.integrate(|x| {
        let j = u.jet(x);
        [j.grad_norm_sqr(), k2 * j.value.norm_sqr(), j.helmholtz(k).norm_sqr()]
    });
    let [bmass, bgrad, bimp] = q.boundary.integrate(|x, n| {
        let j = u.jet(x);
        [
            k2 * j.value.norm_sqr(),
            j.grad_norm_sqr(),
            j.impedance_residual(n, k).norm_sqr(),
        ]
    });
    SeminormTerms {
        grad,
        mass,
        residual,
        bmass,
        bgrad,
        bimp,
    }
}

/// `‖v‖_𝒱`, or `‖v‖_{𝒱,L}` when `rescale` carries the diameter.
pub fn v_norm(u: &dyn ClosedFormField, k: f64, q: &Quadratures, rescale: Option<f64>) -> f64 {
    let t = seminorm_terms(u, k, q);
    match rescale {
        Some(l) => t.v_norm_sqr_rescaled(l),
        None => t.v_norm_sqr(),
    }
    .sqrt()
}

/// `𝓔_P(v) = ∫ ½(|∇v|² - k²|v|²) - Re∫ f v̄`.
pub fn physical_energy(
    u: &dyn ClosedFormField,
    f: &dyn SourceField,
    k: f64,
    q: &Quadratures,
) -> f64 {
    let [e] = q.interior.integrate(|x| {
        let j = u.jet(x);
        [0.5 * (j.grad_norm_sqr() - k * k * j.value.norm_sqr()) - (f.value(x) * j.value.conj()).re]
    });
    e
}

/// `𝓔_γ(v) = 𝓔_P(v) + γ₁‖ℒv - f‖²`.
pub fn regularised_energy(
    u: &dyn ClosedFormField,
    f: &dyn SourceField,
    p: &EnergyParams,
    q: &Quadratures,
) -> f64 {
    let k = p.k;
    let [e] = q.interior.integrate(|x| {
        let j = u.jet(x);
        let fx = f.value(x);
        [0.5 * (j.grad_norm_sqr() - k * k * j.value.norm_sqr()) - (fx * j.value.conj()).re
            + p.gamma1 * (j.helmholtz(k) - fx).norm_sqr()]
    });
    e
}

/// `F_γ(v) = 𝓔_{γ₁}(v) + γ₂‖∂ₙv - ikv‖²_∂Ω`.
pub fn weak_bc_energy(
    u: &dyn ClosedFormField,
    f: &dyn SourceField,
    p: &EnergyParams,
    q: &Quadratures,
) -> f64 {
    let [b] = q
        .boundary
        .integrate(|x, n| [u.jet(x).impedance_residual(n, p.k).norm_sqr()]);
    regularised_energy(u, f, p, q) + p.gamma2 * b
}

/// `𝒜_WBC(u, v)`: linear in `u`, antilinear in `v`.
pub fn form_awbc(
    u: &dyn ClosedFormField,
    v: &dyn ClosedFormField,
    p: &EnergyParams,
    q: &Quadratures,
) -> C64 {
    let k = p.k;
    let [re, im] = q.interior.integrate(|x| {
        let a = u.jet(x);
        let b = v.jet(x);
        let g: C64 = (0..3).map(|i| a.grad[i] * b.grad[i].conj()).sum();
        let t = g - k * k * a.value * b.value.conj()
            + 2.0 * p.gamma1 * a.helmholtz(k) * b.helmholtz(k).conj();
        [t.re, t.im]
    });
    let [bre, bim] = q.boundary.integrate(|x, n| {
        let t = 2.0
            * p.gamma2
            * u.jet(x).impedance_residual(n, k)
            * v.jet(x).impedance_residual(n, k).conj();
        [t.re, t.im]
    });
    C64::new(re + bre, im + bim)
}

/// `ℓ(v) = ∫ f·conj(v + 2γ₁ℒv)`.
pub fn load_functional(
    f: &dyn SourceField,
    v: &dyn ClosedFormField,
    p: &EnergyParams,
    q: &Quadratures,
) -> C64 {
    let [re, im] = q.interior.integrate(|x| {
        let j = v.jet(x);
        let t = f.value(x) * (j.value + 2.0 * p.gamma1 * j.helmholtz(p.k)).conj();
        [t.re, t.im]
    });
    C64::new(re, im)
}

/// Exact split of `νF_γ(v)|_{f=0}` into the coercivity lower bound, six
/// non-negative Young/geometry slacks and the impedance cross term
/// `-2Re∮ ikβ v̄ (∂ₙv - ikv)`, which has no sign and no counterpart in the
/// bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackDecomposition {
    /// `ν F_γ(v)` with `f = 0`.
    pub nu_energy: f64,
    /// `ν Σ cᵢ·termᵢ`.
    pub bound: f64,
    /// Interior Rellich cross term, trace geometry (two), boundary Young
    /// steps in `ε₃` and `ε₂`, and the interior Morawetz Young step.
    pub slacks: [f64; 6],
    pub impedance_cross: f64,
}

impl SlackDecomposition {
    /// `νF - bound - Σ slacks - cross`; zero up to quadrature error.
    pub fn defect(&self) -> f64 {
        self.nu_energy - self.bound - self.slacks.iter().sum::<f64>() - self.impedance_cross
    }
}

pub fn slack_decomposition(
    u: &dyn ClosedFormField,
    p: &EnergyParams,
    domain: &Domain,
    q: &Quadratures,
) -> Result<SlackDecomposition> {
    let c = coercivity_coefficients_weak(p)?;
    let nu = p.nu as f64;
    let k = p.k;
    let k2 = k * k;
    let a = p.alpha;
    let l = p.l;
    let eps4 = p.eps4();
    let origin = *domain.origin();
    let y_of = |x: &Point| -> Point { [x[0] - origin[0], x[1] - origin[1], x[2] - origin[2]] };
    let dot = |y: &Point, g: &[C64; 3]| g[0] * y[0] + g[1] * y[1] + g[2] * y[2];
    let [s1, s6] = q.interior.integrate(|x| {
        let j = u.jet(x);
        let lu = j.helmholtz(k);
        let y = y_of(x);
        let s1 = p.eps1 * j.grad_norm_sqr() + a * a * l * l / p.eps1 * lu.norm_sqr()
            - 2.0 * a * (dot(&y, &j.grad) * lu.conj()).re;
        let s6 = eps4 * k2 * j.value.norm_sqr() + p.beta * p.beta / eps4 * lu.norm_sqr()
            - 2.0 * (I * k * p.beta * j.value.conj() * lu).re;
        [s1, s6]
    });
    let [s2, s3, s4, s5, m] = q.boundary.integrate(|x, n| {
        let j = u.jet(x);
        let y = y_of(x);
        let yn = y[0] * n[0] + y[1] * n[1] + y[2] * n[2];
        let g2 = j.grad_norm_sqr();
        let u2 = j.value.norm_sqr();
        let r = j.impedance_residual(n, k);
        let ydu_bar = dot(&y, &j.grad).conj();
        let s2 = a * g2 * (yn - p.l0);
        let s3 = a * k2 * u2 * (l - yn);
        let s4 = a * l * l * p.eps3 * g2 + a / p.eps3 * r.norm_sqr() - 2.0 * a * (ydu_bar * r).re;
        let s5 = a * p.eps2 * g2 + a * l * l / p.eps2 * k2 * u2
            - 2.0 * a * (ydu_bar * I * k * j.value).re;
        let m = -2.0 * (I * k * p.beta * j.value.conj() * r).re;
        [s2, s3, s4, s5, m]
    });
    let terms = seminorm_terms(u, k, q);
    Ok(SlackDecomposition {
        nu_energy: nu * weak_bc_energy(u, &crate::field::Zero, p, q),
        bound: nu * c.lower_bound(&terms),
        slacks: [s1, s2, s3, s4, s5, s6],
        impedance_cross: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, GaussianBump, PlaneWave, Polynomial, Zero};
    use approx::assert_relative_eq;

    fn square_pack() -> EnergyParams {
        let d = Domain::unit_square();
        default_params(&d, 1.0).unwrap()
    }

    #[test]
    fn square_default_coefficients() {
        let p = square_pack();
        let l = p.l;
        let c = coercivity_coefficients_weak(&p).unwrap().scaled(2.0);
        let s2 = 2f64.sqrt();
        assert_relative_eq!(c.residual, 0.12 * l * l, max_relative = 1e-12);
        assert_relative_eq!(c.grad, 0.5, max_relative = 1e-12);
        assert_relative_eq!(c.mass, 0.5, max_relative = 1e-12);
        assert_relative_eq!(c.bgrad, l / (4.0 * s2), max_relative = 1e-12);
        assert_relative_eq!(c.bmass, (12.4 - (1.0 + 8.0 * s2)) * l, max_relative = 1e-12);
        assert_relative_eq!(c.bimp.unwrap(), (11.4 - 8.0 * s2) * l, max_relative = 1e-12);
    }

    #[test]
    fn cube_default_coefficients() {
        let p = default_params(&Domain::unit_cube(), 1.0).unwrap();
        let l = p.l;
        let c = coercivity_coefficients_weak(&p).unwrap().scaled(3.0);
        let s3 = 3f64.sqrt();
        assert_relative_eq!(c.residual, 0.5 * l * l, max_relative = 1e-12);
        assert_relative_eq!(c.grad, 0.25, max_relative = 1e-12);
        assert_relative_eq!(c.mass, 0.75, max_relative = 1e-12);
        assert_relative_eq!(c.bgrad, l / (4.0 * s3), max_relative = 1e-12);
        assert_relative_eq!(c.bmass, (15.0 - (1.0 + 8.0 * s3)) * l, max_relative = 1e-12);
        assert_relative_eq!(c.bimp.unwrap(), (15.0 - 8.0 * s3) * l, max_relative = 1e-12);
    }

    #[test]
    fn strong_coefficients_recover_both_eps2_choices() {
        let mut p = square_pack();
        p.eps2 = p.l0 / 2.0;
        let c = coercivity_coefficients_strong(&p).unwrap().scaled(2.0);
        assert_relative_eq!(c.bgrad, p.l0 / 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.bmass, 2.0 * p.beta - p.l - 2.0 * p.l * p.l / p.l0, max_relative = 1e-12);
        assert!(c.bimp.is_none());
        p.eps2 = p.l0 / 4.0;
        let c = coercivity_coefficients_strong(&p).unwrap().scaled(2.0);
        assert_relative_eq!(c.bmass, 2.0 * p.beta - p.l - 4.0 * p.l * p.l / p.l0, max_relative = 1e-12);
        assert_relative_eq!(c.grad, 0.5);
        assert_relative_eq!(c.mass, 0.5);
    }

    #[test]
    fn selected_packs_are_coercive() {
        for d in [Domain::unit_interval(), Domain::unit_square(), Domain::unit_cube()] {
            let p = default_params(&d, 5.0).unwrap();
            assert!(coercivity_coefficients_weak(&p).unwrap().is_coercive(), "{p:?}");
        }
        let p = select_parameters(2, 1.0, 2f64.sqrt(), 0.5, ParameterStrategy::Recommended).unwrap();
        assert_relative_eq!(p.gamma1, 79.0, max_relative = 1e-14);
        let p = select_parameters(1, 1.0, 1.0, 0.5, ParameterStrategy::Recommended).unwrap();
        assert_relative_eq!(p.beta, 4.6, max_relative = 1e-14);
        assert!(p.beta > p.alpha * p.l / 2.0 + 2.0 * p.alpha * p.l * p.l / p.l0);
        // an elongated rectangle needs the rule
        let d = Domain::new(&[(0.0, 4.0), (0.0, 0.5)]).unwrap();
        let p = default_params(&d, 1.0).unwrap();
        assert!(coercivity_coefficients_weak(&p).unwrap().is_coercive());
    }

    #[test]
    fn alpha_constraints() {
        assert_eq!(admissible_alpha(3).unwrap(), (0.5, 1.5));
        assert!(admissible_alpha(4).is_err());
        let mut p = square_pack();
        p.alpha = 0.5;
        assert!(matches!(coercivity_coefficients_weak(&p), Err(Error::InvalidParams(_))));
        let mut p = default_params(&Domain::unit_cube(), 1.0).unwrap();
        p.alpha = 1.6;
        assert!(p.validate().is_err());
    }

    #[test]
    fn thresholds_zero_the_coefficients() {
        let mut p = square_pack();
        let t = gamma_thresholds(&p).unwrap();
        p.gamma1 = t.gamma1_0;
        p.gamma2 = t.gamma2_0;
        let c = coercivity_coefficients_weak(&p).unwrap();
        assert!(c.residual.abs() < 1e-12);
        assert!(c.bimp.unwrap().abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let d = Domain::unit_square();
        let q = Quadratures::new(&d, 6);
        let one = Constant::real(1.0);
        assert_eq!(physical_energy(&Zero, &one, 3.0, &q), 0.0);
        assert_relative_eq!(physical_energy(&one, &one, 1.0, &q), -1.5, max_relative = 1e-13);
        let wave = PlaneWave::new(4.0, [0.6, 0.8, 0.0]);
        assert!(physical_energy(&wave, &Zero, 4.0, &Quadratures::new(&d, 20)).abs() < 1e-12);
        let mut p = square_pack();
        p.gamma1 = 2.0;
        assert_relative_eq!(regularised_energy(&Zero, &one, &p, &q), 2.0, max_relative = 1e-13);
        p.gamma1 = 1.0;
        assert_relative_eq!(regularised_energy(&one, &Zero, &p, &q), 0.5, max_relative = 1e-13);
        p.gamma2 = 1.0;
        let w = PlaneWave::new(1.0, [1.0, 0.0, 0.0]);
        let q20 = Quadratures::new(&d, 20);
        let f = weak_bc_energy(&w, &Zero, &p, &q20);
        let e = regularised_energy(&w, &Zero, &p, &q20);
        assert_relative_eq!(f - e, 6.0, max_relative = 1e-12);
    }

    #[test]
    fn norm_examples() {
        let d = Domain::unit_square();
        let q = Quadratures::new(&d, 4);
        let one = Constant::real(1.0);
        assert_relative_eq!(v_norm(&one, 1.0, &q, None).powi(2), 10.0, max_relative = 1e-13);
        let l = 2f64.sqrt();
        assert_relative_eq!(
            v_norm(&one, 1.0, &q, Some(l)).powi(2),
            1.0 + 2.0 + l * 4.0 + l * 4.0,
            max_relative = 1e-13
        );
        assert_eq!(v_norm(&Zero, 1.0, &q, None), 0.0);
    }

    fn sample_fields() -> Vec<Box<dyn ClosedFormField + Send>> {
        vec![
            Box::new(GaussianBump::new(2, [0.3, 0.6, 0.0], 0.08, 1.0)),
            Box::new(PlaneWave::new(3.0, [0.6, -0.8, 0.0])),
            Box::new(Polynomial::new(vec![
                (C64::new(1.0, 0.3), [2, 1, 0]),
                (C64::new(0.0, -1.0), [0, 3, 0]),
            ])),
        ]
    }

    #[test]
    fn form_is_hermitian_and_matches_energy() {
        let d = Domain::unit_square();
        let q = Quadratures::new(&d, 16);
        let p = default_params(&d, 3.0).unwrap();
        let fs = sample_fields();
        for a in &fs {
            let aa = form_awbc(a.as_ref(), a.as_ref(), &p, &q);
            assert!(aa.im.abs() < 1e-12 * aa.re.abs());
            let e = weak_bc_energy(a.as_ref(), &Zero, &p, &q);
            assert_relative_eq!(0.5 * aa.re, e, max_relative = 1e-12);
            for b in &fs {
                let ab = form_awbc(a.as_ref(), b.as_ref(), &p, &q);
                let ba = form_awbc(b.as_ref(), a.as_ref(), &p, &q);
                assert!((ab - ba.conj()).norm() < 1e-12 * ab.norm().max(1.0));
            }
        }
    }

    #[test]
    fn slack_decomposition_is_exact() {
        let d = Domain::unit_square();
        let q = Quadratures::new(&d, 20);
        let p = default_params(&d, 3.0).unwrap();
        for u in sample_fields() {
            let s = slack_decomposition(u.as_ref(), &p, &d, &q).unwrap();
            assert!(s.defect().abs() < 1e-10 * s.nu_energy.abs(), "{s:?}");
            for v in s.slacks {
                assert!(v >= -1e-10 * s.nu_energy.abs());
            }
        }
    }
}
