use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{SymbolPoly, Var};
use crate::scalar::{Scalar, ScalarMode};

/// Canonical Poisson bracket on phase-space polynomials:
///
/// `{a, b} = Σᵢ ∂a/∂pᵢ · ∂b/∂xᵢ − ∂a/∂xᵢ · ∂b/∂pᵢ`
///
/// so that `{p_i, x^j} = δ_i^j`.
pub fn poisson_bracket(a: &SymbolPoly, b: &SymbolPoly) -> Result<SymbolPoly> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.mode() != b.mode() {
        return Err(Error::ModeMismatch);
    }
    let mut acc = SymbolPoly::zero(a.dim(), a.mode());
    for axis in 0..a.dim() {
        let term1 = a
            .diff(Var::Fiber, axis)?
            .checked_mul(&b.diff(Var::Base, axis)?)?;
        let term2 = a
            .diff(Var::Base, axis)?
            .checked_mul(&b.diff(Var::Fiber, axis)?)?;
        acc = acc.checked_add(&term1)?.checked_sub(&term2)?;
    }
    Ok(acc)
}

/// The degree derivation: acts as multiplication by `i − 1` on the
/// fiber-degree-`i` homogeneous component, i.e. `(Σᵢ pᵢ ∂/∂pᵢ − 1)`.
pub fn deg_derivation(s: &SymbolPoly) -> Result<SymbolPoly> {
    let mut acc = s.neg();
    for axis in 0..s.dim() {
        let p = SymbolPoly::variable(s.dim(), s.mode(), Var::Fiber, axis)?;
        acc = acc.checked_add(&p.checked_mul(&s.diff(Var::Fiber, axis)?)?)?;
    }
    Ok(acc)
}

/// A closed polynomial one-form `ω = Σᵢ ωᵢ(x) dxᵢ` on the base.
/// Components are base-only polynomials and satisfy `∂ᵢωⱼ = ∂ⱼωᵢ`;
/// on this chart closed means exact, and a potential can be recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedOneForm {
    dim: usize,
    mode: ScalarMode,
    components: Vec<SymbolPoly>,
}

impl ClosedOneForm {
    pub fn new(components: Vec<SymbolPoly>) -> Result<ClosedOneForm> {
        let dim = components.len();
        for (i, w) in components.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: w.dim(),
                });
            }
            w.expect_base_only(&format!("one-form component w{}", i + 1))?;
        }
        let mode = components
            .first()
            .map(|w| w.mode())
            .unwrap_or(ScalarMode::Exact);
        for w in &components {
            if w.mode() != mode {
                return Err(Error::ModeMismatch);
            }
        }
        // Closedness: ∂ωⱼ/∂xᵢ = ∂ωᵢ/∂xⱼ for all i < j.  In approximate
        // mode the check is still exact coefficient equality: inputs come
        // from parsing or exact construction, not from rounding.
        for i in 0..dim {
            for j in (i + 1)..dim {
                let dji = components[j].diff(Var::Base, i)?;
                let dij = components[i].diff(Var::Base, j)?;
                if !dji.approx_eq(&dij, 1e-9) {
                    return Err(Error::NotClosed { i, j });
                }
            }
        }
        Ok(ClosedOneForm {
            dim,
            mode,
            components,
        })
    }

    pub fn zero(dim: usize, mode: ScalarMode) -> ClosedOneForm {
        ClosedOneForm {
            dim,
            mode,
            components: vec![SymbolPoly::zero(dim, mode); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn components(&self) -> &[SymbolPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|w| w.is_zero())
    }

    pub fn checked_add(&self, other: &ClosedOneForm) -> Result<ClosedOneForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClosedOneForm {
            dim: self.dim,
            mode: self.mode,
            components,
        })
    }

    pub fn checked_sub(&self, other: &ClosedOneForm) -> Result<ClosedOneForm> {
        self.checked_add(&other.scale(&Scalar::from_integer(-1, other.mode)))
    }

    pub fn scale(&self, c: &Scalar) -> ClosedOneForm {
        ClosedOneForm {
            dim: self.dim,
            mode: self.mode,
            components: self.components.iter().map(|w| w.scale(c)).collect(),
        }
    }

    /// Pairing `ω(X) = Σᵢ ωᵢ · Xⁱ` with a vector field given by its
    /// component polynomials.
    pub fn pair(&self, x_components: &[SymbolPoly]) -> Result<SymbolPoly> {
        if x_components.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: x_components.len(),
            });
        }
        let mut acc = SymbolPoly::zero(self.dim, self.mode);
        for (w, xc) in self.components.iter().zip(x_components) {
            acc = acc.checked_add(&w.checked_mul(xc)?)?;
        }
        Ok(acc)
    }

    /// The vertical lift acting on a phase-space polynomial:
    /// `ω^v(s) = Σᵢ ωᵢ(x) · ∂s/∂pᵢ`.  For ω = dh this is `{s, h}`.
    pub fn vertical_lift_apply(&self, s: &SymbolPoly) -> Result<SymbolPoly> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: s.dim(),
            });
        }
        let mut acc = SymbolPoly::zero(self.dim, self.mode);
        for (axis, w) in self.components.iter().enumerate() {
            acc = acc.checked_add(&w.checked_mul(&s.diff(Var::Fiber, axis)?)?)?;
        }
        Ok(acc)
    }

    /// The potential `h` with `dh = ω` and `h(0) = 0`, by radial
    /// integration: a monomial `c·x^β` of `ωᵢ` contributes
    /// `c·x^{β+eᵢ} / (|β| + 1)`.
    pub fn potential(&self) -> Result<SymbolPoly> {
        let mut h = SymbolPoly::zero(self.dim, self.mode);
        for (axis, w) in self.components.iter().enumerate() {
            for ((beta, _), c) in w.terms() {
                let mut raised = beta.clone();
                raised.0[axis] += 1;
                let denom = Scalar::from_integer((beta.weight() + 1) as i64, self.mode);
                h.insert_add(
                    raised,
                    crate::poly::MultiIndex::zero(self.dim),
                    c.div(&denom),
                );
            }
        }
        Ok(h)
    }

    /// Pullback along a polynomial map `y = φ(x)` given by coordinate
    /// images: `(φ*ω)ᵢ = Σⱼ ωⱼ(φ(x)) · ∂φʲ/∂xᵢ`.
    pub fn pullback(&self, images: &[SymbolPoly]) -> Result<ClosedOneForm> {
        if images.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: images.len(),
            });
        }
        let fiber_ids: Vec<SymbolPoly> = (0..self.dim)
            .map(|i| SymbolPoly::variable(self.dim, self.mode, Var::Fiber, i))
            .collect::<Result<Vec<_>>>()?;
        let mut components = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut acc = SymbolPoly::zero(self.dim, self.mode);
            for (j, w) in self.components.iter().enumerate() {
                let w_at_phi = w.substitute(images, &fiber_ids)?;
                let jac = images[j].diff(Var::Base, i)?;
                acc = acc.checked_add(&w_at_phi.checked_mul(&jac)?)?;
            }
            components.push(acc);
        }
        // The pullback of a closed form along a polynomial map is closed,
        // but routing through the constructor keeps the invariant audited.
        ClosedOneForm::new(components)
    }
}

/// Canonical text form: component-major, every monomial of `wᵢ` printed in
/// scalar-polynomial syntax with its `dxᵢ` factor last, terms joined by
/// ` + `; the zero form prints `0`.
impl fmt::Display for ClosedOneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, w) in self.components.iter().enumerate() {
            for ((b, _), c) in w.terms() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{c}")?;
                for (axis, &e) in b.0.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => write!(f, " * x{}", axis + 1)?,
                        _ => write!(f, " * x{}^{}", axis + 1, e)?,
                    }
                }
                write!(f, " * dx{}", i + 1)?;
            }
        }
        Ok(())
    }
}

/// A divergence operator on vector fields, induced by the volume density
/// `e^{g}·|dx|` with polynomial weight `g`:
///
/// `div(X) = Σᵢ ∂ᵢXⁱ + Σᵢ Xⁱ·∂ᵢg`.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    weight: SymbolPoly,
}

impl Divergence {
    pub fn new(weight: SymbolPoly) -> Result<Divergence> {
        weight.expect_base_only("divergence weight")?;
        Ok(Divergence { weight })
    }

    /// The divergence of the standard volume `|dx|` (weight 0).
    pub fn standard(dim: usize, mode: ScalarMode) -> Divergence {
        Divergence {
            weight: SymbolPoly::zero(dim, mode),
        }
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    pub fn mode(&self) -> ScalarMode {
        self.weight.mode()
    }

    pub fn weight(&self) -> &SymbolPoly {
        &self.weight
    }

    /// `div(X)` from the component polynomials of `X`.
    pub fn apply(&self, x_components: &[SymbolPoly]) -> Result<SymbolPoly> {
        if x_components.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: x_components.len(),
            });
        }
        let mut acc = SymbolPoly::zero(self.dim(), self.mode());
        for (axis, comp) in x_components.iter().enumerate() {
            comp.expect_base_only("vector-field component")?;
            acc = acc.checked_add(&comp.diff(Var::Base, axis)?)?;
            acc = acc.checked_add(&comp.checked_mul(&self.weight.diff(Var::Base, axis)?)?)?;
        }
        Ok(acc)
    }
}

/// The exterior differential of a base polynomial, as a closed one-form.
pub fn exact_differential(h: &SymbolPoly) -> Result<ClosedOneForm> {
    h.expect_base_only("differential of a base function")?;
    let components = (0..h.dim())
        .map(|i| h.diff(Var::Base, i))
        .collect::<Result<Vec<_>>>()?;
    ClosedOneForm::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, axis: usize) -> SymbolPoly {
        SymbolPoly::variable(dim, ScalarMode::Exact, Var::Base, axis).unwrap()
    }

    fn p(dim: usize, axis: usize) -> SymbolPoly {
        SymbolPoly::variable(dim, ScalarMode::Exact, Var::Fiber, axis).unwrap()
    }

    #[test]
    fn bracket_of_momentum_and_position() {
        let one = SymbolPoly::one(2, ScalarMode::Exact);
        assert_eq!(poisson_bracket(&p(2, 0), &x(2, 0)).unwrap(), one);
        assert!(poisson_bracket(&p(2, 0), &x(2, 1)).unwrap().is_zero());
        assert!(poisson_bracket(&x(2, 0), &x(2, 1)).unwrap().is_zero());
        assert!(poisson_bracket(&p(2, 0), &p(2, 1)).unwrap().is_zero());
    }

    #[test]
    fn bracket_antisymmetry_and_fixed_example() {
        // {x1 p1², x1 p1} = x1 p1².
        let a = x(1, 0).checked_mul(&p(1, 0).pow_u32(2)).unwrap();
        let b = x(1, 0).checked_mul(&p(1, 0)).unwrap();
        assert_eq!(poisson_bracket(&a, &b).unwrap(), a);
        assert!(poisson_bracket(&a, &a).unwrap().is_zero());
        let ab = poisson_bracket(&a, &b).unwrap();
        let ba = poisson_bracket(&b, &a).unwrap();
        assert!(ab.checked_add(&ba).unwrap().is_zero());
    }

    #[test]
    fn bracket_jacobi_on_fixed_triple() {
        let a = x(2, 0).checked_mul(&p(2, 1).pow_u32(2)).unwrap();
        let b = x(2, 1)
            .pow_u32(2)
            .checked_mul(&p(2, 0))
            .unwrap()
            .checked_add(&p(2, 1))
            .unwrap();
        let c = x(2, 0).checked_mul(&x(2, 1)).unwrap();
        let t1 = poisson_bracket(&a, &poisson_bracket(&b, &c).unwrap()).unwrap();
        let t2 = poisson_bracket(&b, &poisson_bracket(&c, &a).unwrap()).unwrap();
        let t3 = poisson_bracket(&c, &poisson_bracket(&a, &b).unwrap()).unwrap();
        let total = t1.checked_add(&t2).unwrap().checked_add(&t3).unwrap();
        assert!(total.is_zero());
    }

    #[test]
    fn deg_acts_by_fiber_degree_minus_one() {
        // Deg(x1) = −x1, Deg(p1) = 0, Deg(p1²) = p1², Deg(x1 p1³) = 2 x1 p1³.
        assert_eq!(deg_derivation(&x(1, 0)).unwrap(), x(1, 0).neg());
        assert!(deg_derivation(&p(1, 0)).unwrap().is_zero());
        assert_eq!(deg_derivation(&p(1, 0).pow_u32(2)).unwrap(), p(1, 0).pow_u32(2));
        let s = x(1, 0).checked_mul(&p(1, 0).pow_u32(3)).unwrap();
        assert_eq!(
            deg_derivation(&s).unwrap(),
            s.scale(&Scalar::from_integer(2, ScalarMode::Exact))
        );
    }

    #[test]
    fn closedness_is_validated() {
        // ω = x2 dx1 is not closed.
        let bad = ClosedOneForm::new(vec![x(2, 1), SymbolPoly::zero(2, ScalarMode::Exact)]);
        assert_eq!(bad.unwrap_err(), Error::NotClosed { i: 0, j: 1 });
        // ω = x2 dx1 + x1 dx2 is closed.
        assert!(ClosedOneForm::new(vec![x(2, 1), x(2, 0)]).is_ok());
        // Fiber variables are rejected.
        let bad2 = ClosedOneForm::new(vec![p(1, 0)]);
        assert!(matches!(bad2, Err(Error::BaseOnlyExpected { .. })));
    }

    #[test]
    fn potential_recovers_h() {
        // ω = x2 dx1 + x1 dx2 has potential x1·x2.
        let w = ClosedOneForm::new(vec![x(2, 1), x(2, 0)]).unwrap();
        let h = w.potential().unwrap();
        assert_eq!(h, x(2, 0).checked_mul(&x(2, 1)).unwrap());
        // d(potential) round-trips.
        assert_eq!(exact_differential(&h).unwrap(), w);
        // Higher degree: h = x1³x2² + 3x1.
        let h2 = x(2, 0)
            .pow_u32(3)
            .checked_mul(&x(2, 1).pow_u32(2))
            .unwrap()
            .checked_add(&x(2, 0).scale(&Scalar::from_integer(3, ScalarMode::Exact)))
            .unwrap();
        let w2 = exact_differential(&h2).unwrap();
        assert_eq!(w2.potential().unwrap(), h2);
    }

    #[test]
    fn vertical_lift_is_bracket_with_potential() {
        let w = ClosedOneForm::new(vec![x(2, 1), x(2, 0)]).unwrap();
        let h = w.potential().unwrap();
        let s = x(2, 0)
            .checked_mul(&p(2, 0).pow_u32(2))
            .unwrap()
            .checked_add(&p(2, 1))
            .unwrap();
        let lifted = w.vertical_lift_apply(&s).unwrap();
        let bracket = poisson_bracket(&s, &h).unwrap();
        assert_eq!(lifted, bracket);
    }

    #[test]
    fn pullback_along_linear_map() {
        // φ(x) = (x1 + x2, x2); φ*(dx1) = dx1 + dx2.
        let dx1 = ClosedOneForm::new(vec![
            SymbolPoly::one(2, ScalarMode::Exact),
            SymbolPoly::zero(2, ScalarMode::Exact),
        ])
        .unwrap();
        let images = vec![x(2, 0).checked_add(&x(2, 1)).unwrap(), x(2, 1)];
        let pulled = dx1.pullback(&images).unwrap();
        assert_eq!(pulled.components()[0], SymbolPoly::one(2, ScalarMode::Exact));
        assert_eq!(pulled.components()[1], SymbolPoly::one(2, ScalarMode::Exact));
    }

    #[test]
    fn pairing_with_vector_components() {
        let w = ClosedOneForm::new(vec![x(2, 1), x(2, 0)]).unwrap();
        // X = ∂1 has components (1, 0): ω(X) = x2.
        let val = w
            .pair(&[SymbolPoly::one(2, ScalarMode::Exact), SymbolPoly::zero(2, ScalarMode::Exact)])
            .unwrap();
        assert_eq!(val, x(2, 1));
    }

    #[test]
    fn divergence_with_and_without_weight() {
        // Standard volume: div(x1²∂1 + x1x2∂2) = 2x1 + x1 = 3x1.
        let comps = vec![x(2, 0).pow_u32(2), x(2, 0).checked_mul(&x(2, 1)).unwrap()];
        let std_div = Divergence::standard(2, ScalarMode::Exact);
        assert_eq!(
            std_div.apply(&comps).unwrap(),
            x(2, 0).scale(&Scalar::from_integer(3, ScalarMode::Exact))
        );
        // Weight g = x1x2 adds X(g) = x1²·x2 + x1x2·x1 = 2x1²x2.
        let weighted = Divergence::new(x(2, 0).checked_mul(&x(2, 1)).unwrap()).unwrap();
        let expect = x(2, 0)
            .scale(&Scalar::from_integer(3, ScalarMode::Exact))
            .checked_add(
                &x(2, 0)
                    .pow_u32(2)
                    .checked_mul(&x(2, 1))
                    .unwrap()
                    .scale(&Scalar::from_integer(2, ScalarMode::Exact)),
            )
            .unwrap();
        assert_eq!(weighted.apply(&comps).unwrap(), expect);
    }

    #[test]
    fn divergence_bracket_identity() {
        // div[X, X'] = X(div X') − X'(div X) for the weighted divergence.
        use crate::weyl::WeylOp;
        let div = Divergence::new(x(2, 0).pow_u32(2)).unwrap();
        let zero = SymbolPoly::zero(2, ScalarMode::Exact);
        let xc = vec![x(2, 0).checked_mul(&x(2, 1)).unwrap(), x(2, 1).pow_u32(2)];
        let yc = vec![x(2, 1), x(2, 0).pow_u32(2)];
        let x_op = WeylOp::first_order(&xc, &zero).unwrap();
        let y_op = WeylOp::first_order(&yc, &zero).unwrap();
        let (bc, bf) = x_op.commutator(&y_op).unwrap().split_first_order().unwrap();
        assert!(bf.is_zero());
        let lhs = div.apply(&bc).unwrap();
        let rhs = x_op
            .apply(&div.apply(&yc).unwrap())
            .unwrap()
            .checked_sub(&y_op.apply(&div.apply(&xc).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
