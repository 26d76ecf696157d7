//! The three classified derivation families.
//!
//! - On first-order operators `X + f`: `C(X+f) = [Y, X+f] + κf + λ·div X + ω(X)`
//!   for a polynomial vector field `Y`, constants `κ, λ`, a closed one-form
//!   `ω`, and a fixed divergence.
//! - On phase-space polynomials: `C(S) = {P, S} + κ·Deg(S) + ω^v(S)`,
//!   with `P` normalized to vanish on the zero section (the base part of a
//!   raw `P` is gauged into `ω`).
//! - On the full operator algebra: `C(D) = [P, D] + [D, h]` with `dh = ω`,
//!   `P` normalized so that `P(1) = 0` (its multiplication part is gauged
//!   into `ω`).

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{SymbolPoly, Var};
use crate::scalar::{Scalar, ScalarMode};
use crate::symbol::{
    deg_derivation, exact_differential, poisson_bracket, ClosedOneForm, Divergence,
};
use crate::weyl::WeylOp;

/// Derivation of the algebra of first-order operators.
#[derive(Debug, Clone, PartialEq)]
pub struct D1Derivation {
    y: Vec<SymbolPoly>,
    kappa: Scalar,
    lambda: Scalar,
    omega: ClosedOneForm,
    div: Divergence,
}

impl D1Derivation {
    pub fn new(
        y: Vec<SymbolPoly>,
        kappa: Scalar,
        lambda: Scalar,
        omega: ClosedOneForm,
        div: Divergence,
    ) -> Result<D1Derivation> {
        let dim = div.dim();
        let mode = div.mode();
        if y.len() != dim || omega.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: if y.len() != dim { y.len() } else { omega.dim() },
            });
        }
        for comp in &y {
            comp.expect_base_only("vector-field component")?;
            if comp.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: comp.dim(),
                });
            }
            if comp.mode() != mode {
                return Err(Error::ModeMismatch);
            }
        }
        if kappa.mode() != mode || lambda.mode() != mode || omega.mode() != mode {
            return Err(Error::ModeMismatch);
        }
        Ok(D1Derivation {
            y,
            kappa,
            lambda,
            omega,
            div,
        })
    }

    pub fn dim(&self) -> usize {
        self.div.dim()
    }

    pub fn mode(&self) -> ScalarMode {
        self.div.mode()
    }

    pub fn y_components(&self) -> &[SymbolPoly] {
        &self.y
    }

    pub fn kappa(&self) -> &Scalar {
        &self.kappa
    }

    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn omega(&self) -> &ClosedOneForm {
        &self.omega
    }

    pub fn div(&self) -> &Divergence {
        &self.div
    }

    pub fn y_operator(&self) -> WeylOp {
        let zero = SymbolPoly::zero(self.dim(), self.mode());
        WeylOp::first_order(&self.y, &zero).expect("validated components")
    }

    /// Apply to a first-order operator `X + f`.
    pub fn apply(&self, op: &WeylOp) -> Result<WeylOp> {
        let (xc, f) = op.split_first_order()?;
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: op.dim(),
            });
        }
        if op.mode() != self.mode() {
            return Err(Error::ModeMismatch);
        }
        // [Y, X + f] is again first-order; the operator commutator computes
        // both the geometric bracket and the Y(f) part at once.
        let bracket = self.y_operator().commutator(op)?;
        let extra = f
            .scale(&self.kappa)
            .checked_add(&self.div.apply(&xc)?.scale(&self.lambda))?
            .checked_add(&self.omega.pair(&xc)?)?;
        bracket.checked_add(&WeylOp::from_multiplication(&extra)?)
    }
}

impl fmt::Display for D1Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d1-derivation {{ Y: [")?;
        for (i, comp) in self.y.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{comp}")?;
        }
        write!(
            f,
            "], kappa: {}, lambda: {}, omega: {}, weight: {} }}",
            self.kappa,
            self.lambda,
            self.omega,
            self.div.weight()
        )
    }
}

/// The raw action `{p, s} + κ·Deg(s) + ω^v(s)` without normalization.
/// Exposed so gauge equivalence `(p + h, ω) ~ (p, ω − dh)` can be checked
/// against the normalizing constructor.
pub fn s_action(
    p: &SymbolPoly,
    kappa: &Scalar,
    omega: &ClosedOneForm,
    s: &SymbolPoly,
) -> Result<SymbolPoly> {
    poisson_bracket(p, s)?
        .checked_add(&deg_derivation(s)?.scale(kappa))?
        .checked_add(&omega.vertical_lift_apply(s)?)
}

/// Derivation of the symbol algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct SDerivation {
    p: SymbolPoly,
    kappa: Scalar,
    omega: ClosedOneForm,
}

impl SDerivation {
    /// Build from possibly un-normalized data: the base part `h₀` of `p`
    /// acts as `−(dh₀)^v`, so it is moved into the one-form
    /// (`ω ← ω − dh₀`), leaving `p` zero on the zero section.
    pub fn new(p: SymbolPoly, kappa: Scalar, omega: ClosedOneForm) -> Result<SDerivation> {
        let dim = p.dim();
        if omega.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: omega.dim(),
            });
        }
        if p.mode() != omega.mode() || kappa.mode() != p.mode() {
            return Err(Error::ModeMismatch);
        }
        let h0 = p.fiber_homogeneous_part(0);
        let p_norm = p.checked_sub(&h0)?;
        let omega_norm = omega.checked_sub(&exact_differential(&h0)?)?;
        Ok(SDerivation {
            p: p_norm,
            kappa,
            omega: omega_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn mode(&self) -> ScalarMode {
        self.p.mode()
    }

    pub fn p(&self) -> &SymbolPoly {
        &self.p
    }

    pub fn kappa(&self) -> &Scalar {
        &self.kappa
    }

    pub fn omega(&self) -> &ClosedOneForm {
        &self.omega
    }

    pub fn apply(&self, s: &SymbolPoly) -> Result<SymbolPoly> {
        s_action(&self.p, &self.kappa, &self.omega, s)
    }
}

impl fmt::Display for SDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s-derivation {{ P: {}, kappa: {}, omega: {} }}",
            self.p, self.kappa, self.omega
        )
    }
}

/// The raw action `[p, d] + [d, h]` with `dh = ω`, without normalization.
pub fn d_action(p: &WeylOp, omega: &ClosedOneForm, d: &WeylOp) -> Result<WeylOp> {
    let h = omega.potential()?;
    p.commutator(d)?
        .checked_add(&d.commutator(&WeylOp::from_multiplication(&h)?)?)
}

/// Derivation of the full operator algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct DDerivation {
    p: WeylOp,
    omega: ClosedOneForm,
    potential: SymbolPoly,
}

impl DDerivation {
    /// Build from possibly un-normalized data: the multiplication part `m`
    /// of `p` acts as `[·, −m]`-correction, so it is moved into the
    /// one-form (`ω ← ω − dm`), leaving `p(1) = 0`.  Constant terms of `p`
    /// are central and vanish outright.
    pub fn new(p: WeylOp, omega: ClosedOneForm) -> Result<DDerivation> {
        let dim = p.dim();
        if omega.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: omega.dim(),
            });
        }
        if p.mode() != omega.mode() {
            return Err(Error::ModeMismatch);
        }
        let m = p.multiplication_part();
        let p_norm = p.checked_sub(&WeylOp::from_multiplication(&m)?)?;
        let omega_norm = omega.checked_sub(&exact_differential(&m)?)?;
        let potential = omega_norm.potential()?;
        Ok(DDerivation {
            p: p_norm,
            omega: omega_norm,
            potential,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn mode(&self) -> ScalarMode {
        self.p.mode()
    }

    pub fn p(&self) -> &WeylOp {
        &self.p
    }

    pub fn omega(&self) -> &ClosedOneForm {
        &self.omega
    }

    /// A potential of the (normalized) one-form.
    pub fn omega_potential(&self) -> &SymbolPoly {
        &self.potential
    }

    pub fn apply(&self, d: &WeylOp) -> Result<WeylOp> {
        self.p
            .commutator(d)?
            .checked_add(&d.commutator(&WeylOp::from_multiplication(&self.potential)?)?)
    }

    /// The derivation respects the operator filtration exactly when the
    /// (normalized) `p` is first-order, i.e. a vector field.
    pub fn respects_filtration(&self) -> bool {
        self.p.order().unwrap_or(0) <= 1
    }
}

impl fmt::Display for DDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d-derivation {{ P: {}, omega: {} }}",
            self.p, self.omega
        )
    }
}

/// The classical derivation induced on the associated graded algebra by a
/// filtration-respecting operator derivation: on a fiber-homogeneous `s`
/// of degree `i`, quantize, apply, and take the order-`i` symbol.
///
/// Errors with [`Error::FiltrationViolated`] when the derivation raises
/// operator order (normalized `p` of order ≥ 2), since the induced graded
/// map is not defined there.
pub fn induced_classical(c: &DDerivation, s: &SymbolPoly) -> Result<SymbolPoly> {
    if !c.respects_filtration() {
        return Err(Error::FiltrationViolated {
            context: format!(
                "P has order {}, so the image of an order-i operator has order i + {}",
                c.p.order().unwrap_or(0),
                c.p.order().unwrap_or(0) - 1
            ),
        });
    }
    if s.is_zero() {
        return Ok(SymbolPoly::zero(s.dim(), s.mode()));
    }
    let i = s.fiber_degree().expect("nonzero polynomial");
    if !s.is_fiber_homogeneous(i) {
        return Err(Error::NotFiberHomogeneous {
            context: "induced classical derivation takes one graded piece at a time".to_string(),
        });
    }
    let image = c.apply(&WeylOp::quantize_standard(s))?;
    if image.is_zero() {
        return Ok(SymbolPoly::zero(s.dim(), s.mode()));
    }
    image.symbol_of_order(i)
}

/// Recover the parameters of a first-order-algebra derivation from its
/// action, given the divergence it was built against.  The probes are the
/// constants, the coordinates, and the fields `∂ᵢ` and `x¹∂₁`.
pub fn read_off_d1<F>(c: F, div: &Divergence) -> Result<D1Derivation>
where
    F: Fn(&WeylOp) -> Result<WeylOp>,
{
    let dim = div.dim();
    let mode = div.mode();
    // κ = C(1).
    let kappa = c(&WeylOp::identity(dim, mode))?
        .multiplication_part()
        .as_constant("C(1)")?;
    // Yⁱ = C(xⁱ) − κ·xⁱ.
    let mut y = Vec::with_capacity(dim);
    for i in 0..dim {
        let xi = SymbolPoly::variable(dim, mode, Var::Base, i)?;
        let ci = c(&WeylOp::from_multiplication(&xi)?)?;
        y.push(
            ci.multiplication_part()
                .checked_sub(&xi.scale(&kappa))?,
        );
    }
    let zero = SymbolPoly::zero(dim, mode);
    let y_op = WeylOp::first_order(&y, &zero)?;
    // R(X) = multiplication part of C(X) − [Y, X] = λ·div X + ω(X).
    let residual = |x_op: &WeylOp| -> Result<SymbolPoly> {
        Ok(c(x_op)?
            .checked_sub(&y_op.commutator(x_op)?)?
            .multiplication_part())
    };
    let d1_op = WeylOp::partial(dim, mode, 0)?;
    let x1 = SymbolPoly::variable(dim, mode, Var::Base, 0)?;
    let x1d1_op = WeylOp::first_order(
        &{
            let mut comps = vec![zero.clone(); dim];
            comps[0] = x1.clone();
            comps
        },
        &zero,
    )?;
    // λ = R(x¹∂₁) − x¹·R(∂₁): the div-weight and ω contributions cancel.
    let r_d1 = residual(&d1_op)?;
    let r_x1d1 = residual(&x1d1_op)?;
    let lambda = r_x1d1
        .checked_sub(&x1.checked_mul(&r_d1)?)?
        .as_constant("R(x1·d1) − x1·R(d1)")?;
    // ωᵢ = R(∂ᵢ) − λ·∂ᵢg.
    let mut omega_comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let r = residual(&WeylOp::partial(dim, mode, i)?)?;
        omega_comps.push(
            r.checked_sub(&div.weight().diff(Var::Base, i)?.scale(&lambda))?,
        );
    }
    D1Derivation::new(y, kappa, lambda, ClosedOneForm::new(omega_comps)?, div.clone())
}

/// Recover the parameters of a symbol-algebra derivation from its action.
/// Probes: 1 gives κ, the coordinates give the fiber gradient of `P`
/// (integrated back radially along the fibers), the fiber coordinates
/// give ω.
pub fn read_off_s<F>(c: F, dim: usize, mode: ScalarMode) -> Result<SDerivation>
where
    F: Fn(&SymbolPoly) -> Result<SymbolPoly>,
{
    // κ = −C(1).
    let kappa = c(&SymbolPoly::one(dim, mode))?
        .as_constant("C(1)")?
        .neg();
    // ∂P/∂pᵢ = C(xⁱ) + κ·xⁱ; a monomial c·x^β p^δ of the gradient
    // contributes c·x^β p^{δ+eᵢ} / (|δ|+1) to P.
    let mut p = SymbolPoly::zero(dim, mode);
    for i in 0..dim {
        let xi = SymbolPoly::variable(dim, mode, Var::Base, i)?;
        let gi = c(&xi)?.checked_add(&xi.scale(&kappa))?;
        for ((beta, delta), coeff) in gi.terms() {
            let mut raised = delta.clone();
            raised.0[i] += 1;
            let denom = Scalar::from_integer((delta.weight() + 1) as i64, mode);
            p.insert_add(beta.clone(), raised, coeff.div(&denom));
        }
    }
    // ωᵢ = C(pᵢ) − {P, pᵢ}.
    let mut omega_comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let pi = SymbolPoly::variable(dim, mode, Var::Fiber, i)?;
        omega_comps.push(c(&pi)?.checked_sub(&poisson_bracket(&p, &pi)?)?);
    }
    SDerivation::new(p, kappa, ClosedOneForm::new(omega_comps)?)
}

/// Recover the parameters of an operator-algebra derivation from its
/// action.  Probes: the coordinate multiplications give `[P, xⁱ]`, from
/// which `P` is rebuilt by the fiberwise Euler trick; the `∂ᵢ` then
/// expose ω.
pub fn read_off_d<F>(c: F, dim: usize, mode: ScalarMode) -> Result<DDerivation>
where
    F: Fn(&WeylOp) -> Result<WeylOp>,
{
    // A term a·x^β∂^γ of P appears in [P, xⁱ] as a·γᵢ·x^β∂^{γ−eᵢ};
    // accumulating b/(|μ|+1) at (β, μ+eᵢ) over all i resums to P.
    let mut p = WeylOp::zero(dim, mode);
    for i in 0..dim {
        let xi = SymbolPoly::variable(dim, mode, Var::Base, i)?;
        let ai = c(&WeylOp::from_multiplication(&xi)?)?;
        let mut accum = SymbolPoly::zero(dim, mode);
        for ((beta, mu), b) in ai.terms() {
            let mut raised = mu.clone();
            raised.0[i] += 1;
            let denom = Scalar::from_integer((mu.weight() + 1) as i64, mode);
            accum.insert_add(beta.clone(), raised, b.div(&denom));
        }
        p = p.checked_add(&WeylOp::quantize_standard(&accum))?;
    }
    // ωᵢ = C(∂ᵢ) − [P, ∂ᵢ], a multiplication operator.
    let mut omega_comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let di = WeylOp::partial(dim, mode, i)?;
        omega_comps.push(
            c(&di)?
                .checked_sub(&p.commutator(&di)?)?
                .multiplication_part(),
        );
    }
    DDerivation::new(p, ClosedOneForm::new(omega_comps)?)
}
