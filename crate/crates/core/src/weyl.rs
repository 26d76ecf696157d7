use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, SymbolPoly, Var};
use crate::scalar::{binomial, falling, Scalar, ScalarMode};

/// A linear differential operator with polynomial coefficients, kept in
/// normal order: a sparse sum of monomials `c · x^β ∘ ∂^α` with every
/// coordinate factor to the left of every derivative factor.
///
/// The term map shares the polynomial container's canonical ordering, so
/// the representation (and its text form) is unique per operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylOp {
    dim: usize,
    mode: ScalarMode,
    terms: BTreeMap<(MultiIndex, MultiIndex), Scalar>,
}

impl WeylOp {
    pub fn zero(dim: usize, mode: ScalarMode) -> WeylOp {
        WeylOp {
            dim,
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize, mode: ScalarMode) -> WeylOp {
        WeylOp::monomial(dim, MultiIndex::zero(dim), MultiIndex::zero(dim), Scalar::one(mode))
    }

    pub fn monomial(dim: usize, base: MultiIndex, deriv: MultiIndex, c: Scalar) -> WeylOp {
        assert_eq!(base.dim(), dim);
        assert_eq!(deriv.dim(), dim);
        let mode = c.mode();
        let mut op = WeylOp::zero(dim, mode);
        op.insert_add(base, deriv, c);
        op
    }

    /// The multiplication operator by a base polynomial.
    pub fn from_multiplication(h: &SymbolPoly) -> Result<WeylOp> {
        h.expect_base_only("multiplication operator")?;
        let mut op = WeylOp::zero(h.dim(), h.mode());
        for ((b, _), c) in h.terms() {
            op.insert_add(b.clone(), MultiIndex::zero(h.dim()), c.clone());
        }
        Ok(op)
    }

    /// The coordinate derivative `∂/∂x{axis+1}`.
    pub fn partial(dim: usize, mode: ScalarMode, axis: usize) -> Result<WeylOp> {
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        Ok(WeylOp::monomial(
            dim,
            MultiIndex::zero(dim),
            MultiIndex::unit(dim, axis),
            Scalar::one(mode),
        ))
    }

    /// A first-order operator `Σᵢ Xⁱ(x) ∂ᵢ + f(x)` from vector-field
    /// components and a function part.
    pub fn first_order(components: &[SymbolPoly], f: &SymbolPoly) -> Result<WeylOp> {
        let dim = f.dim();
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: components.len(),
            });
        }
        let mut op = WeylOp::from_multiplication(f)?;
        for (axis, comp) in components.iter().enumerate() {
            comp.expect_base_only("vector-field component")?;
            if comp.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: comp.dim(),
                });
            }
            if comp.mode() != f.mode() {
                return Err(Error::ModeMismatch);
            }
            for ((b, _), c) in comp.terms() {
                op.insert_add(b.clone(), MultiIndex::unit(dim, axis), c.clone());
            }
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, base: &MultiIndex, deriv: &MultiIndex) -> Scalar {
        self.terms
            .get(&(base.clone(), deriv.clone()))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    fn insert_add(&mut self, base: MultiIndex, deriv: MultiIndex, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let key = (base, deriv);
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn check_compatible(&self, other: &WeylOp) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.mode != other.mode {
            return Err(Error::ModeMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &WeylOp) -> Result<WeylOp> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for ((b, a), c) in &other.terms {
            out.insert_add(b.clone(), a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &WeylOp) -> Result<WeylOp> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for ((b, a), c) in &other.terms {
            out.insert_add(b.clone(), a.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> WeylOp {
        assert_eq!(c.mode(), self.mode, "scalar mode mixed in scale");
        let mut out = WeylOp::zero(self.dim, self.mode);
        if c.is_zero() {
            return out;
        }
        for ((b, a), v) in &self.terms {
            out.insert_add(b.clone(), a.clone(), v.mul(c));
        }
        out
    }

    pub fn neg(&self) -> WeylOp {
        self.scale(&Scalar::from_integer(-1, self.mode))
    }

    /// Operator composition.  On monomials the derivative block of the left
    /// factor exchanges past the coordinate block of the right factor:
    ///
    /// `(x^β₁∂^α₁)(x^β₂∂^α₂) = Σ_{γ ≤ min(α₁,β₂)} C(α₁,γ)·(β₂)_γ · x^{β₁+β₂−γ} ∂^{α₁+α₂−γ}`
    ///
    /// with `C` the product of componentwise binomials and `(·)_γ` the
    /// product of componentwise falling factorials.
    pub fn compose(&self, other: &WeylOp) -> Result<WeylOp> {
        self.check_compatible(other)?;
        let mut out = WeylOp::zero(self.dim, self.mode);
        for ((b1, a1), c1) in &self.terms {
            for ((b2, a2), c2) in &other.terms {
                let cap = a1.min(b2);
                for gamma in cap.sub_indices() {
                    let mut coeff = c1.mul(c2);
                    for axis in 0..self.dim {
                        let g = gamma.0[axis];
                        if g == 0 {
                            continue;
                        }
                        coeff = coeff
                            .mul(&binomial(a1.0[axis], g, self.mode))
                            .mul(&falling(b2.0[axis], g, self.mode));
                    }
                    let base = b1.add(b2).checked_sub(&gamma).expect("gamma <= b2");
                    let deriv = a1.add(a2).checked_sub(&gamma).expect("gamma <= a1");
                    out.insert_add(base, deriv, coeff);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &WeylOp) -> Result<WeylOp> {
        self.compose(other)?.checked_sub(&other.compose(self)?)
    }

    /// Filtration order: the largest total derivative weight, or `None`
    /// for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, a)| a.weight()).max()
    }

    /// The order-`i` symbol: derivative monomials of total weight exactly
    /// `i` transcribed to fiber monomials.  Errors on the zero operator and
    /// when `i` lies below the operator order (the symbol of that order is
    /// not defined there); `i` above the order yields 0.
    pub fn symbol_of_order(&self, i: u32) -> Result<SymbolPoly> {
        let order = self.order().ok_or(Error::ZeroOperator)?;
        if i < order {
            return Err(Error::OrderBelowDegree {
                requested: i,
                degree: order,
            });
        }
        let mut s = SymbolPoly::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            if a.weight() == i {
                s.insert_add(b.clone(), a.clone(), c.clone());
            }
        }
        Ok(s)
    }

    /// The principal symbol σ(D) = σ_{order(D)}(D).
    pub fn principal_symbol(&self) -> Result<SymbolPoly> {
        self.symbol_of_order(self.order().ok_or(Error::ZeroOperator)?)
    }

    /// The full (total) symbol: every normally ordered term `c·x^β∂^α`
    /// transcribed to `c·x^β p^α`.
    pub fn total_symbol(&self) -> SymbolPoly {
        let mut s = SymbolPoly::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            s.insert_add(b.clone(), a.clone(), c.clone());
        }
        s
    }

    /// Standard-ordering quantization: `c·x^β p^δ ↦ c·x^β ∘ ∂^δ`.
    /// Left inverse of [`WeylOp::total_symbol`] by construction.
    pub fn quantize_standard(s: &SymbolPoly) -> WeylOp {
        let mut op = WeylOp::zero(s.dim(), s.mode());
        for ((b, d), c) in s.terms() {
            op.insert_add(b.clone(), d.clone(), c.clone());
        }
        op
    }

    /// Apply the operator to a base polynomial.
    pub fn apply(&self, f: &SymbolPoly) -> Result<SymbolPoly> {
        f.expect_base_only("operator argument")?;
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: f.dim(),
            });
        }
        if f.mode() != self.mode {
            return Err(Error::ModeMismatch);
        }
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            let mut g = f.clone();
            for axis in 0..self.dim {
                for _ in 0..a.0[axis] {
                    g = g.diff(Var::Base, axis)?;
                }
            }
            let xb = SymbolPoly::monomial(self.dim, b.clone(), MultiIndex::zero(self.dim), c.clone());
            out = out.checked_add(&xb.checked_mul(&g)?)?;
        }
        Ok(out)
    }

    /// The formal adjoint with respect to the standard volume:
    /// `(x^β∂^α)* = (−1)^{|α|} ∂^α ∘ x^β`, extended additively and
    /// re-expanded to normal order.
    pub fn adjoint(&self) -> WeylOp {
        let mut out = WeylOp::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            let sign = if a.weight() % 2 == 0 { 1 } else { -1 };
            let da = WeylOp::monomial(
                self.dim,
                MultiIndex::zero(self.dim),
                a.clone(),
                c.scale_int(sign),
            );
            let xb = WeylOp::monomial(
                self.dim,
                b.clone(),
                MultiIndex::zero(self.dim),
                Scalar::one(self.mode),
            );
            let prod = da.compose(&xb).expect("adjoint factors share dim/mode");
            out = out.checked_add(&prod).expect("adjoint sum shares dim/mode");
        }
        out
    }

    /// The involution `D ↦ −D*`.  It fixes vector-field-plus-divergence
    /// combinations, squares to the identity, and reverses products up to
    /// sign: `(−*)(D∘Δ) = −(−*)(Δ)∘(−*)(D)`.
    pub fn conjugation(&self) -> WeylOp {
        self.adjoint().neg()
    }

    /// The terms of derivative weight zero, i.e. the multiplication part,
    /// as a base polynomial.
    pub fn multiplication_part(&self) -> SymbolPoly {
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            if a.is_zero() {
                out.insert_add(b.clone(), MultiIndex::zero(self.dim), c.clone());
            }
        }
        out
    }

    /// Split a first-order operator `X + f` into vector-field components
    /// and function part.  Errors if any term has derivative weight ≥ 2.
    pub fn split_first_order(&self) -> Result<(Vec<SymbolPoly>, SymbolPoly)> {
        if self.order().unwrap_or(0) > 1 {
            return Err(Error::NotAVectorField {
                context: format!(
                    "operator has order {}",
                    self.order().unwrap_or(0)
                ),
            });
        }
        let mut components = vec![SymbolPoly::zero(self.dim, self.mode); self.dim];
        let mut f = SymbolPoly::zero(self.dim, self.mode);
        for ((b, a), c) in &self.terms {
            if a.is_zero() {
                f.insert_add(b.clone(), MultiIndex::zero(self.dim), c.clone());
            } else {
                let axis = a.0.iter().position(|&e| e == 1).expect("weight-1 index");
                components[axis].insert_add(b.clone(), MultiIndex::zero(self.dim), c.clone());
            }
        }
        Ok((components, f))
    }

    /// Copy with every coefficient converted to `f64`.
    pub fn to_approx(&self) -> WeylOp {
        let mut out = WeylOp::zero(self.dim, ScalarMode::Approx);
        for ((b, a), c) in &self.terms {
            out.insert_add(b.clone(), a.clone(), Scalar::Approx(c.to_f64()));
        }
        out
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs_f64())
            .fold(0.0_f64, f64::max)
    }

    /// Exact equality in exact mode, coefficient-wise closeness in
    /// approximate mode.
    pub fn approx_eq(&self, other: &WeylOp, tol: f64) -> bool {
        if self.dim != other.dim || self.mode != other.mode {
            return false;
        }
        match self.mode {
            ScalarMode::Exact => self == other,
            ScalarMode::Approx => match self.checked_sub(other) {
                Ok(diff) => diff.max_coeff_abs() <= tol,
                Err(_) => false,
            },
        }
    }
}

/// Canonical text form mirrors the polynomial form with derivative factors
/// printed `d1..dn` after the coordinate factors; in normal order the `*`
/// separators read correctly as operator composition.
impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((b, a), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &e) in b.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " * x{}", i + 1)?,
                    _ => write!(f, " * x{}^{}", i + 1, e)?,
                }
            }
            for (i, &e) in a.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " * d{}", i + 1)?,
                    _ => write!(f, " * d{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Var;

    fn m() -> ScalarMode {
        ScalarMode::Exact
    }

    fn int(n: i64) -> Scalar {
        Scalar::from_integer(n, m())
    }

    fn x_op(dim: usize, axis: usize) -> WeylOp {
        WeylOp::monomial(dim, MultiIndex::unit(dim, axis), MultiIndex::zero(dim), int(1))
    }

    fn d_op(dim: usize, axis: usize) -> WeylOp {
        WeylOp::partial(dim, m(), axis).unwrap()
    }

    #[test]
    fn exchange_rule_basics() {
        // ∂1 ∘ x1 = x1∂1 + 1.
        let left = d_op(1, 0).compose(&x_op(1, 0)).unwrap();
        let expect = x_op(1, 0)
            .compose(&d_op(1, 0))
            .unwrap()
            .checked_add(&WeylOp::identity(1, m()))
            .unwrap();
        assert_eq!(left, expect);
        // [x1∂1, ∂1] = −∂1.
        let xd = x_op(1, 0).compose(&d_op(1, 0)).unwrap();
        assert_eq!(xd.commutator(&d_op(1, 0)).unwrap(), d_op(1, 0).neg());
        // [∂1, x1] = 1.
        assert_eq!(
            d_op(1, 0).commutator(&x_op(1, 0)).unwrap(),
            WeylOp::identity(1, m())
        );
    }

    #[test]
    fn exchange_rule_higher_order() {
        // ∂² ∘ x² = x²∂² + 4x∂ + 2.
        let d2 = WeylOp::monomial(1, MultiIndex::zero(1), MultiIndex(vec![2]), int(1));
        let x2 = WeylOp::monomial(1, MultiIndex(vec![2]), MultiIndex::zero(1), int(1));
        let prod = d2.compose(&x2).unwrap();
        let mut expect = WeylOp::monomial(1, MultiIndex(vec![2]), MultiIndex(vec![2]), int(1));
        expect = expect
            .checked_add(&WeylOp::monomial(1, MultiIndex(vec![1]), MultiIndex(vec![1]), int(4)))
            .unwrap();
        expect = expect
            .checked_add(&WeylOp::monomial(1, MultiIndex::zero(1), MultiIndex::zero(1), int(2)))
            .unwrap();
        assert_eq!(prod, expect);
    }

    #[test]
    fn composition_is_associative() {
        let a = x_op(2, 0)
            .compose(&d_op(2, 1))
            .unwrap()
            .checked_add(&d_op(2, 0))
            .unwrap();
        let b = x_op(2, 1)
            .compose(&x_op(2, 1))
            .unwrap()
            .compose(&d_op(2, 0))
            .unwrap()
            .checked_add(&WeylOp::identity(2, m()))
            .unwrap();
        let c = d_op(2, 0).compose(&d_op(2, 1)).unwrap();
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn composition_matches_application() {
        // (D1 ∘ D2)(f) = D1(D2(f)) for sample operators and f = x1³x2.
        let d1 = x_op(2, 0).compose(&d_op(2, 0)).unwrap();
        let d2 = d_op(2, 0).compose(&d_op(2, 1)).unwrap();
        let f = SymbolPoly::variable(2, m(), Var::Base, 0)
            .unwrap()
            .pow_u32(3)
            .checked_mul(&SymbolPoly::variable(2, m(), Var::Base, 1).unwrap())
            .unwrap();
        let lhs = d1.compose(&d2).unwrap().apply(&f).unwrap();
        let rhs = d1.apply(&d2.apply(&f).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn symbols_of_each_order() {
        // D = x1∂1² + ∂2 + 5.
        let d = WeylOp::monomial(2, MultiIndex::unit(2, 0), MultiIndex(vec![2, 0]), int(1))
            .checked_add(&d_op(2, 1))
            .unwrap()
            .checked_add(&WeylOp::identity(2, m()).scale(&int(5)))
            .unwrap();
        assert_eq!(d.order(), Some(2));
        let s2 = d.symbol_of_order(2).unwrap();
        let x1 = SymbolPoly::variable(2, m(), Var::Base, 0).unwrap();
        let p1 = SymbolPoly::variable(2, m(), Var::Fiber, 0).unwrap();
        assert_eq!(s2, x1.checked_mul(&p1.pow_u32(2)).unwrap());
        // Orders above the operator order give zero.
        assert!(d.symbol_of_order(3).unwrap().is_zero());
        // Orders below are rejected.
        assert_eq!(
            d.symbol_of_order(1),
            Err(Error::OrderBelowDegree {
                requested: 1,
                degree: 2
            })
        );
        assert_eq!(
            WeylOp::zero(2, m()).symbol_of_order(0),
            Err(Error::ZeroOperator)
        );
    }

    #[test]
    fn principal_symbol_is_multiplicative() {
        let d1 = x_op(1, 0).compose(&d_op(1, 0)).unwrap(); // order 1
        let d2 = d_op(1, 0).compose(&d_op(1, 0)).unwrap(); // order 2
        let lhs = d1
            .principal_symbol()
            .unwrap()
            .checked_mul(&d2.principal_symbol().unwrap())
            .unwrap();
        let rhs = d1.compose(&d2).unwrap().symbol_of_order(3).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutator_symbol_is_poisson_bracket() {
        use crate::symbol::poisson_bracket;
        // D1 = x1²∂1 (order 1), D2 = x1∂1² (order 2):
        // {σ(D1), σ(D2)} = σ₂([D1, D2]).
        let d1 = WeylOp::monomial(1, MultiIndex(vec![2]), MultiIndex(vec![1]), int(1));
        let d2 = WeylOp::monomial(1, MultiIndex(vec![1]), MultiIndex(vec![2]), int(1));
        let lhs = poisson_bracket(&d1.principal_symbol().unwrap(), &d2.principal_symbol().unwrap())
            .unwrap();
        let rhs = d1.commutator(&d2).unwrap().symbol_of_order(2).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn quantize_total_symbol_round_trip() {
        let d = x_op(2, 0)
            .compose(&d_op(2, 1))
            .unwrap()
            .checked_add(&d_op(2, 0).compose(&d_op(2, 0)).unwrap())
            .unwrap()
            .checked_add(&WeylOp::identity(2, m()).scale(&int(-3)))
            .unwrap();
        assert_eq!(WeylOp::quantize_standard(&d.total_symbol()), d);
    }

    #[test]
    fn apply_differentiates() {
        // (x1∂1)(x1²) = 2x1².
        let xd = x_op(1, 0).compose(&d_op(1, 0)).unwrap();
        let f = SymbolPoly::variable(1, m(), Var::Base, 0).unwrap().pow_u32(2);
        assert_eq!(xd.apply(&f).unwrap(), f.scale(&int(2)));
        // Fiber variables in the argument are rejected.
        let bad = SymbolPoly::variable(1, m(), Var::Fiber, 0).unwrap();
        assert!(matches!(
            xd.apply(&bad),
            Err(Error::BaseOnlyExpected { .. })
        ));
    }

    #[test]
    fn conjugation_fixed_points_and_signs() {
        // −* fixes ∂1, negates x1 and 1.
        assert_eq!(d_op(1, 0).conjugation(), d_op(1, 0));
        assert_eq!(x_op(1, 0).conjugation(), x_op(1, 0).neg());
        assert_eq!(
            WeylOp::identity(1, m()).conjugation(),
            WeylOp::identity(1, m()).neg()
        );
        // On a vector field: (−*)(X) = X + div X.  X = x1²∂1, div X = 2x1.
        let xf = WeylOp::monomial(1, MultiIndex(vec![2]), MultiIndex(vec![1]), int(1));
        let expect = xf
            .checked_add(&WeylOp::monomial(1, MultiIndex(vec![1]), MultiIndex::zero(1), int(2)))
            .unwrap();
        assert_eq!(xf.conjugation(), expect);
    }

    #[test]
    fn conjugation_is_involutive_and_antimultiplicative() {
        let d = x_op(1, 0)
            .compose(&d_op(1, 0))
            .unwrap()
            .compose(&d_op(1, 0))
            .unwrap()
            .checked_add(&x_op(1, 0))
            .unwrap();
        let e = d_op(1, 0)
            .compose(&d_op(1, 0))
            .unwrap()
            .checked_add(&WeylOp::identity(1, m()))
            .unwrap();
        assert_eq!(d.conjugation().conjugation(), d);
        // (−*)(D∘E) = −(−*)(E)∘(−*)(D).
        let lhs = d.compose(&e).unwrap().conjugation();
        let rhs = e.conjugation().compose(&d.conjugation()).unwrap().neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn first_order_split_round_trip() {
        let x1 = SymbolPoly::variable(2, m(), Var::Base, 0).unwrap();
        let comps = vec![x1.pow_u32(2), SymbolPoly::one(2, m())];
        let f = x1.scale(&int(3));
        let op = WeylOp::first_order(&comps, &f).unwrap();
        let (comps2, f2) = op.split_first_order().unwrap();
        assert_eq!(comps, comps2);
        assert_eq!(f, f2);
        // A second-order operator refuses to split.
        let d2 = d_op(2, 0).compose(&d_op(2, 0)).unwrap();
        assert!(matches!(
            d2.split_first_order(),
            Err(Error::NotAVectorField { .. })
        ));
    }

    #[test]
    fn display_normal_order() {
        let d = x_op(2, 0)
            .compose(&d_op(2, 1))
            .unwrap()
            .checked_add(&d_op(2, 0).compose(&d_op(2, 0)).unwrap().scale(&int(-1)))
            .unwrap();
        assert_eq!(d.to_string(), "-1 * d1^2 + 1 * x1 * d2");
    }
}
