//! Affine flows on the base, weighted Jacobians, and the automorphisms of
//! the three algebras together with the one-parameter groups integrating
//! the classified derivations.
//!
//! Orientation convention: the `one_param_group_*` constructors store the
//! time-`(−t)` flow of the generating field as the descriptor's base map.
//! Every `apply` below is pullback-shaped (it routes points or functions
//! through `phi⁻¹`), so the backward base family is exactly what makes the
//! resulting action move forward: `d/dt|₀ Φ_t = C`.  All the cocycle
//! identities (`Ω_{t+s}`, `K`, `Λ`, the group laws) hold verbatim with
//! `φ_t` read as the stored family.

use std::fmt;

use crate::derivation::{D1Derivation, DDerivation, SDerivation};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::{MultiIndex, SymbolPoly, Var};
use crate::quadrature::{approx_nodes_weights, exact_nodes_weights};
use crate::scalar::{Scalar, ScalarMode};
use crate::symbol::{ClosedOneForm, Divergence};
use crate::weyl::WeylOp;

/// An affine map `x ↦ A·x + b` of the base chart.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: Mat,
    offset: Vec<Scalar>,
}

impl AffineMap {
    pub fn new(matrix: Mat, offset: Vec<Scalar>) -> Result<AffineMap> {
        if matrix.rows() != matrix.cols() || matrix.rows() != offset.len() {
            return Err(Error::DimensionMismatch {
                left: matrix.rows(),
                right: offset.len(),
            });
        }
        for v in &offset {
            if v.mode() != matrix.mode() {
                return Err(Error::ModeMismatch);
            }
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn identity(dim: usize, mode: ScalarMode) -> AffineMap {
        AffineMap {
            matrix: Mat::identity(dim, mode),
            offset: vec![Scalar::zero(mode); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn mode(&self) -> ScalarMode {
        self.matrix.mode()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn offset(&self) -> &[Scalar] {
        &self.offset
    }

    pub fn apply_point(&self, x: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.matrix.mul_vec(x);
        for (o, b) in out.iter_mut().zip(&self.offset) {
            *o = o.add(b);
        }
        out
    }

    /// Coordinate images as degree-one base polynomials.
    pub fn images(&self) -> Vec<SymbolPoly> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let mut p = SymbolPoly::constant(dim, self.offset[i].clone());
                for j in 0..dim {
                    let a = self.matrix.get(i, j);
                    if !a.is_zero() {
                        p.insert_add(
                            MultiIndex::unit(dim, j),
                            MultiIndex::zero(dim),
                            a.clone(),
                        );
                    }
                }
                p
            })
            .collect()
    }

    /// `self ∘ other` as point maps.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let matrix = self.matrix.mul(&other.matrix);
        let mut offset = self.matrix.mul_vec(&other.offset);
        for (o, b) in offset.iter_mut().zip(&self.offset) {
            *o = o.add(b);
        }
        AffineMap { matrix, offset }
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self.matrix.inverse()?;
        let offset = inv
            .mul_vec(&self.offset)
            .into_iter()
            .map(|v| v.neg())
            .collect();
        Ok(AffineMap {
            matrix: inv,
            offset,
        })
    }

    /// `f ∘ self` for a base polynomial `f`.
    pub fn compose_function(&self, f: &SymbolPoly) -> Result<SymbolPoly> {
        f.expect_base_only("composition with an affine map")?;
        let fiber_ids: Vec<SymbolPoly> = (0..self.dim())
            .map(|i| SymbolPoly::variable(self.dim(), self.mode(), Var::Fiber, i))
            .collect::<Result<Vec<_>>>()?;
        f.substitute(&self.images(), &fiber_ids)
    }

    pub fn is_identity(&self) -> bool {
        self == &AffineMap::identity(self.dim(), self.mode())
    }

    pub fn approx_eq(&self, other: &AffineMap, tol: f64) -> bool {
        if self.dim() != other.dim() || self.mode() != other.mode() {
            return false;
        }
        match self.mode() {
            ScalarMode::Exact => self == other,
            ScalarMode::Approx => {
                let m_ok = (0..self.dim()).all(|i| {
                    (0..self.dim()).all(|j| {
                        (self.matrix.get(i, j).to_f64() - other.matrix.get(i, j).to_f64()).abs()
                            <= tol
                    })
                });
                m_ok
                    && self
                        .offset
                        .iter()
                        .zip(&other.offset)
                        .all(|(a, b)| (a.to_f64() - b.to_f64()).abs() <= tol)
            }
        }
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.matrix.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "] + [")?;
        for (i, b) in self.offset.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// An affine vector field `Y = Σᵢ (A·x + b)ᵢ ∂ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    matrix: Mat,
    offset: Vec<Scalar>,
}

impl FlowField {
    /// Build from vector-field component polynomials; errors with
    /// [`Error::NotAffine`] when any component has base degree above one
    /// (such fields may fail to be complete, and their flows leave the
    /// affine class this crate computes in).
    pub fn from_components(components: &[SymbolPoly]) -> Result<FlowField> {
        let dim = components.len();
        let mode = components
            .first()
            .map(|c| c.mode())
            .unwrap_or(ScalarMode::Exact);
        let mut matrix = Mat::zero(dim, dim, mode);
        let mut offset = vec![Scalar::zero(mode); dim];
        for (i, comp) in components.iter().enumerate() {
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
            for ((beta, _), c) in comp.terms() {
                match beta.weight() {
                    0 => offset[i] = c.clone(),
                    1 => {
                        let j = beta.0.iter().position(|&e| e == 1).expect("weight 1");
                        matrix.set(i, j, c.clone());
                    }
                    _ => {
                        return Err(Error::NotAffine {
                            context: format!(
                                "component {} has degree {}",
                                i + 1,
                                beta.weight()
                            ),
                        })
                    }
                }
            }
        }
        Ok(FlowField { matrix, offset })
    }

    /// Extract an affine vector field from a first-order operator with no
    /// function part.
    pub fn from_operator(op: &WeylOp) -> Result<FlowField> {
        let (comps, f) = op.split_first_order()?;
        if !f.is_zero() {
            return Err(Error::NotAVectorField {
                context: "operator has a nonzero multiplication part".to_string(),
            });
        }
        FlowField::from_components(&comps)
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn mode(&self) -> ScalarMode {
        self.matrix.mode()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn components(&self) -> Vec<SymbolPoly> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let mut p = SymbolPoly::constant(dim, self.offset[i].clone());
                for j in 0..dim {
                    let a = self.matrix.get(i, j);
                    if !a.is_zero() {
                        p.insert_add(MultiIndex::unit(dim, j), MultiIndex::zero(dim), a.clone());
                    }
                }
                p
            })
            .collect()
    }

    /// The time-`t` flow `Exp(tY)`, computed from the exponential of the
    /// augmented matrix `[[A, b], [0, 0]]`.
    ///
    /// Exact mode requires `A` nilpotent (the flow is then polynomial in
    /// `t`); any eigenvalue contribution is transcendental and only the
    /// approximate regime can evaluate it.
    pub fn flow_at(&self, t: &Scalar) -> Result<AffineMap> {
        if t.mode() != self.mode() {
            return Err(Error::ModeMismatch);
        }
        let n = self.dim();
        let mode = self.mode();
        let mut aug = Mat::zero(n + 1, n + 1, mode);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.matrix.get(i, j).clone());
            }
            aug.set(i, n, self.offset[i].clone());
        }
        let exp = match mode {
            ScalarMode::Exact => {
                if !self.matrix.is_nilpotent() {
                    return Err(Error::ExactnessUnavailable {
                        reason: "the flow of a field with a non-nilpotent linear part is \
                                 transcendental in t"
                            .to_string(),
                    });
                }
                aug.exp_nilpotent(t)?
            }
            ScalarMode::Approx => aug.exp_approx(t.to_f64()),
        };
        let mut matrix = Mat::zero(n, n, mode);
        let mut offset = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                matrix.set(i, j, exp.get(i, j).clone());
            }
            offset.push(exp.get(i, n).clone());
        }
        AffineMap::new(matrix, offset)
    }

    pub fn trace(&self) -> Scalar {
        self.matrix.trace()
    }
}

impl fmt::Display for FlowField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, comp) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{comp}")?;
        }
        write!(f, "]")
    }
}

/// The Jacobian of an affine map with respect to a weighted volume
/// `e^{g}|dx|`, stored multiplicatively as `scale · e^{exponent}` with a
/// constant scale `det A` and polynomial exponent `g∘φ − g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub scale: Scalar,
    pub exponent: SymbolPoly,
}

pub fn jacobian(phi: &AffineMap, div: &Divergence) -> Result<Jacobian> {
    if phi.dim() != div.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.dim(),
            right: div.dim(),
        });
    }
    if phi.mode() != div.mode() {
        return Err(Error::ModeMismatch);
    }
    let exponent = phi
        .compose_function(div.weight())?
        .checked_sub(div.weight())?;
    Ok(Jacobian {
        scale: phi.matrix().det(),
        exponent,
    })
}

impl fmt::Display for Jacobian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "jacobian {{ scale: {}, exponent: {} }}",
            self.scale, self.exponent
        )
    }
}

/// The additive potential `Div(Exp(tY)) = g∘φ_t − g + t·tr A` of the flow's
/// Jacobian (its exponential is the Jacobian relative to `e^g|dx|`; the
/// `t·tr A` term accounts for `det e^{tA}` and vanishes for nilpotent `A`).
pub fn div_of_flow(field: &FlowField, t: &Scalar, div: &Divergence) -> Result<SymbolPoly> {
    let phi = field.flow_at(t)?;
    let dim = field.dim();
    phi.compose_function(div.weight())?
        .checked_sub(div.weight())?
        .checked_add(&SymbolPoly::constant(dim, t.mul(&field.trace())))
}

/// Pushforward of a polynomial vector field along an affine diffeomorphism:
/// `(φ_*X)(f) = (X(f∘φ))∘φ⁻¹`, i.e. componentwise
/// `(φ_*X)ʲ = Σᵢ A_{ji}·(Xⁱ∘φ⁻¹)`.
pub fn pushforward_vector(phi: &AffineMap, components: &[SymbolPoly]) -> Result<Vec<SymbolPoly>> {
    if components.len() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.dim(),
            right: components.len(),
        });
    }
    let inv = phi.inverse()?;
    let mut out = Vec::with_capacity(phi.dim());
    for j in 0..phi.dim() {
        let mut acc = SymbolPoly::zero(phi.dim(), phi.mode());
        for (i, comp) in components.iter().enumerate() {
            let a = phi.matrix().get(j, i);
            if a.is_zero() {
                continue;
            }
            acc = acc.checked_add(&inv.compose_function(comp)?.scale(a))?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Pushforward `φ_*(D) = φ∘D∘φ⁻¹` of an operator along an affine
/// diffeomorphism (`φ` acting on functions as `f ↦ f∘φ⁻¹`).  It is the
/// algebra automorphism with `φ_*(x^β) = (φ⁻¹y)^β` on multiplications and
/// `φ_*(∂ᵢ) = Σⱼ A_{ji} ∂ⱼ`.
pub fn pushforward_operator(phi: &AffineMap, d: &WeylOp) -> Result<WeylOp> {
    if d.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: phi.dim(),
            right: d.dim(),
        });
    }
    if d.mode() != phi.mode() {
        return Err(Error::ModeMismatch);
    }
    let dim = phi.dim();
    let mode = phi.mode();
    let inv_images = phi.inverse()?.images();
    // Images of the ∂ᵢ generators.
    let mut dbar = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut acc = WeylOp::zero(dim, mode);
        for j in 0..dim {
            let a = phi.matrix().get(j, i);
            if !a.is_zero() {
                acc = acc.checked_add(&WeylOp::partial(dim, mode, j)?.scale(a))?;
            }
        }
        dbar.push(acc);
    }
    let mut out = WeylOp::zero(dim, mode);
    for ((beta, alpha), c) in d.terms() {
        let mut mult = SymbolPoly::constant(dim, c.clone());
        for i in 0..dim {
            for _ in 0..beta.0[i] {
                mult = mult.checked_mul(&inv_images[i])?;
            }
        }
        let mut term = WeylOp::from_multiplication(&mult)?;
        for i in 0..dim {
            for _ in 0..alpha.0[i] {
                term = term.compose(&dbar[i])?;
            }
        }
        out = out.checked_add(&term)?;
    }
    Ok(out)
}

/// A fiberwise-affine transformation of the phase space:
/// `(x, ξ) ↦ (φ(x), B·ξ + w(x))` with polynomial `w`.  The building block
/// of the symbol-algebra automorphisms; closed under composition.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAffine {
    base: AffineMap,
    fiber_matrix: Mat,
    fiber_offset: Vec<SymbolPoly>,
}

impl PhaseAffine {
    pub fn identity(dim: usize, mode: ScalarMode) -> PhaseAffine {
        PhaseAffine {
            base: AffineMap::identity(dim, mode),
            fiber_matrix: Mat::identity(dim, mode),
            fiber_offset: vec![SymbolPoly::zero(dim, mode); dim],
        }
    }

    /// The canonical lift of `φ⁻¹` to the phase space:
    /// `(x, ξ) ↦ (φ⁻¹(x), Aᵀξ)` where `A` is the matrix of `φ`.
    pub fn lift_of_inverse(phi: &AffineMap) -> Result<PhaseAffine> {
        Ok(PhaseAffine {
            base: phi.inverse()?,
            fiber_matrix: phi.matrix().transpose(),
            fiber_offset: vec![SymbolPoly::zero(phi.dim(), phi.mode()); phi.dim()],
        })
    }

    /// Fiber scaling `h_K : (x, ξ) ↦ (x, K·ξ)`.
    pub fn fiber_scale(dim: usize, k: &Scalar) -> PhaseAffine {
        PhaseAffine {
            base: AffineMap::identity(dim, k.mode()),
            fiber_matrix: Mat::identity(dim, k.mode()).scale(k),
            fiber_offset: vec![SymbolPoly::zero(dim, k.mode()); dim],
        }
    }

    /// Fiber translation `𝒯_Ω : (x, ξ) ↦ (x, ξ + Ω(x))`.
    pub fn fiber_translate(omega: &ClosedOneForm) -> PhaseAffine {
        PhaseAffine {
            base: AffineMap::identity(omega.dim(), omega.mode()),
            fiber_matrix: Mat::identity(omega.dim(), omega.mode()),
            fiber_offset: omega.components().to_vec(),
        }
    }

    /// `self ∘ other` as point maps of the phase space.
    pub fn compose(&self, other: &PhaseAffine) -> Result<PhaseAffine> {
        let base = self.base.compose(&other.base);
        let fiber_matrix = self.fiber_matrix.mul(&other.fiber_matrix);
        let dim = self.base.dim();
        // w(x) = B_self · w_other(x) + w_self(φ_other(x)).
        let mut fiber_offset = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut acc = other.base.compose_function(&self.fiber_offset[i])?;
            for j in 0..dim {
                let b = self.fiber_matrix.get(i, j);
                if !b.is_zero() {
                    acc = acc.checked_add(&other.fiber_offset[j].scale(b))?;
                }
            }
            fiber_offset.push(acc);
        }
        Ok(PhaseAffine {
            base,
            fiber_matrix,
            fiber_offset,
        })
    }

    /// `s ∘ self` — substitute the transformation into a phase-space
    /// polynomial.
    pub fn apply(&self, s: &SymbolPoly) -> Result<SymbolPoly> {
        let dim = self.base.dim();
        let mode = self.base.mode();
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: s.dim(),
            });
        }
        let base_images = self.base.images();
        let mut fiber_images = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut img = self.fiber_offset[i].clone();
            for j in 0..dim {
                let b = self.fiber_matrix.get(i, j);
                if !b.is_zero() {
                    img = img
                        .checked_add(&SymbolPoly::variable(dim, mode, Var::Fiber, j)?.scale(b))?;
                }
            }
            fiber_images.push(img);
        }
        s.substitute(&base_images, &fiber_images)
    }
}

fn scalar_close(a: &Scalar, b: &Scalar, tol: f64) -> bool {
    (a.to_f64() - b.to_f64()).abs() <= tol
}

fn forms_close(a: &ClosedOneForm, b: &ClosedOneForm, tol: f64) -> bool {
    a.components()
        .iter()
        .zip(b.components())
        .all(|(x, y)| x.approx_eq(y, tol))
}

/// Automorphism of the first-order operator algebra:
/// `Φ(X + f) = φ_*X + (K·f + Λ·div X + Ω(X)) ∘ φ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct D1Automorphism {
    phi: AffineMap,
    k: Scalar,
    lambda: Scalar,
    omega: ClosedOneForm,
    div: Divergence,
}

impl D1Automorphism {
    pub fn new(
        phi: AffineMap,
        k: Scalar,
        lambda: Scalar,
        omega: ClosedOneForm,
        div: Divergence,
    ) -> Result<D1Automorphism> {
        let dim = div.dim();
        let mode = div.mode();
        if phi.dim() != dim || omega.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: if phi.dim() != dim { phi.dim() } else { omega.dim() },
            });
        }
        if phi.mode() != mode || k.mode() != mode || lambda.mode() != mode || omega.mode() != mode
        {
            return Err(Error::ModeMismatch);
        }
        if k.is_zero() {
            return Err(Error::SingularMatrix);
        }
        phi.inverse()?;
        Ok(D1Automorphism {
            phi,
            k,
            lambda,
            omega,
            div,
        })
    }

    pub fn phi(&self) -> &AffineMap {
        &self.phi
    }

    pub fn k(&self) -> &Scalar {
        &self.k
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

    pub fn apply(&self, op: &WeylOp) -> Result<WeylOp> {
        let (xc, f) = op.split_first_order()?;
        let pushed = pushforward_vector(&self.phi, &xc)?;
        let fun = f
            .scale(&self.k)
            .checked_add(&self.div.apply(&xc)?.scale(&self.lambda))?
            .checked_add(&self.omega.pair(&xc)?)?;
        let inv = self.phi.inverse()?;
        let fun_moved = inv.compose_function(&fun)?;
        WeylOp::first_order(&pushed, &fun_moved)
    }

    /// `self ∘ other` as automorphisms.
    pub fn after(&self, other: &D1Automorphism) -> Result<D1Automorphism> {
        let phi = self.phi.compose(&other.phi);
        let k = self.k.mul(&other.k);
        let lambda = self.lambda.add(&self.k.mul(&other.lambda));
        // Ω = K_self·Ω_other + φ_other^*Ω_self + Λ_self·d(Div φ_other),
        // where d(Div φ) = d(g∘φ − g) stays polynomial for affine φ.
        let div_exp = other
            .phi
            .compose_function(self.div.weight())?
            .checked_sub(self.div.weight())?;
        let d_div = crate::symbol::exact_differential(&div_exp)?;
        let omega = other
            .omega
            .scale(&self.k)
            .checked_add(&other.omega_pullback_onto(&self.omega)?)?
            .checked_add(&d_div.scale(&self.lambda))?;
        D1Automorphism::new(phi, k, lambda, omega, self.div.clone())
    }

    fn omega_pullback_onto(&self, omega: &ClosedOneForm) -> Result<ClosedOneForm> {
        omega.pullback(&self.phi.images())
    }

    pub fn approx_eq(&self, other: &D1Automorphism, tol: f64) -> bool {
        self.phi.approx_eq(&other.phi, tol)
            && scalar_close(&self.k, &other.k, tol)
            && scalar_close(&self.lambda, &other.lambda, tol)
            && forms_close(&self.omega, &other.omega, tol)
            && self.div.weight().approx_eq(other.div.weight(), tol)
    }
}

impl fmt::Display for D1Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "aut-d1 {{ phi: {}, K: {}, Lambda: {}, Omega: {}, weight: {} }}",
            self.phi,
            self.k,
            self.lambda,
            self.omega,
            self.div.weight()
        )
    }
}

/// Automorphism of the symbol algebra:
/// `Φ(S) = K⁻¹ · S(φ⁻¹(x), K·Aᵀξ + Ω(φ⁻¹(x)))` — the point passes through
/// the lift of `φ⁻¹`, then the fiber scaling `h_K`, then the fiber
/// translation `𝒯_Ω`, and the value is scaled by `K⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SAutomorphism {
    phi: AffineMap,
    k: Scalar,
    omega: ClosedOneForm,
}

impl SAutomorphism {
    pub fn new(phi: AffineMap, k: Scalar, omega: ClosedOneForm) -> Result<SAutomorphism> {
        if phi.dim() != omega.dim() {
            return Err(Error::DimensionMismatch {
                left: phi.dim(),
                right: omega.dim(),
            });
        }
        if phi.mode() != omega.mode() || k.mode() != phi.mode() {
            return Err(Error::ModeMismatch);
        }
        if k.is_zero() {
            return Err(Error::SingularMatrix);
        }
        phi.inverse()?;
        Ok(SAutomorphism { phi, k, omega })
    }

    pub fn phi(&self) -> &AffineMap {
        &self.phi
    }

    pub fn k(&self) -> &Scalar {
        &self.k
    }

    pub fn omega(&self) -> &ClosedOneForm {
        &self.omega
    }

    /// The whole transformation as a phase-space point map
    /// `𝒯_Ω ∘ h_K ∘ lift(φ⁻¹)` (the value scaling `K⁻¹` is applied
    /// separately in [`SAutomorphism::apply`]).
    pub fn phase_map(&self) -> Result<PhaseAffine> {
        PhaseAffine::fiber_translate(&self.omega)
            .compose(&PhaseAffine::fiber_scale(self.phi.dim(), &self.k))?
            .compose(&PhaseAffine::lift_of_inverse(&self.phi)?)
    }

    pub fn apply(&self, s: &SymbolPoly) -> Result<SymbolPoly> {
        if s.mode() != self.phi.mode() {
            return Err(Error::ModeMismatch);
        }
        let moved = self.phase_map()?.apply(s)?;
        Ok(moved.scale(&Scalar::one(self.k.mode()).div(&self.k)))
    }

    /// `self ∘ other` as automorphisms.
    pub fn after(&self, other: &SAutomorphism) -> Result<SAutomorphism> {
        let phi = self.phi.compose(&other.phi);
        let k = self.k.mul(&other.k);
        // Ω = Ω_other + K_other·φ_other^*Ω_self.
        let omega = other.omega.checked_add(
            &self
                .omega
                .pullback(&other.phi.images())?
                .scale(&other.k),
        )?;
        SAutomorphism::new(phi, k, omega)
    }

    pub fn approx_eq(&self, other: &SAutomorphism, tol: f64) -> bool {
        self.phi.approx_eq(&other.phi, tol)
            && scalar_close(&self.k, &other.k, tol)
            && forms_close(&self.omega, &other.omega, tol)
    }
}

impl fmt::Display for SAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "aut-s {{ phi: {}, K: {}, Omega: {} }}",
            self.phi, self.k, self.omega
        )
    }
}

/// Automorphism of the full operator algebra:
/// `Φ(D) = φ_*( 𝒞^a ( e^{Ω̄}(D) ) )` with `e^{Ω̄}(D) = Σ_k ad^k(D)/k!`,
/// `ad(D) = [D, h]`, `dh = Ω`, and `𝒞 = −*` applied when the `conj` flag
/// is set.
#[derive(Debug, Clone, PartialEq)]
pub struct DAutomorphism {
    phi: AffineMap,
    omega: ClosedOneForm,
    conj: bool,
}

impl DAutomorphism {
    pub fn new(phi: AffineMap, omega: ClosedOneForm, conj: bool) -> Result<DAutomorphism> {
        if phi.dim() != omega.dim() {
            return Err(Error::DimensionMismatch {
                left: phi.dim(),
                right: omega.dim(),
            });
        }
        if phi.mode() != omega.mode() {
            return Err(Error::ModeMismatch);
        }
        phi.inverse()?;
        Ok(DAutomorphism { phi, omega, conj })
    }

    pub fn phi(&self) -> &AffineMap {
        &self.phi
    }

    pub fn omega(&self) -> &ClosedOneForm {
        &self.omega
    }

    pub fn conj(&self) -> bool {
        self.conj
    }

    /// `e^{Ω̄}(d)`: the (finite) exponential of `d ↦ [d, h]`; each step
    /// drops the operator order, so the series ends by itself.
    pub fn exp_omega_bar(omega: &ClosedOneForm, d: &WeylOp) -> Result<WeylOp> {
        let h = WeylOp::from_multiplication(&omega.potential()?)?;
        let mut acc = d.clone();
        let mut term = d.clone();
        let mut k: i64 = 0;
        while !term.is_zero() {
            k += 1;
            term = term
                .commutator(&h)?
                .scale(&Scalar::from_ratio(1, k, d.mode()));
            if term.is_zero() {
                break;
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, d: &WeylOp) -> Result<WeylOp> {
        if d.mode() != self.phi.mode() {
            return Err(Error::ModeMismatch);
        }
        let mut out = DAutomorphism::exp_omega_bar(&self.omega, d)?;
        if self.conj {
            out = out.conjugation();
        }
        pushforward_operator(&self.phi, &out)
    }

    /// `self ∘ other` as automorphisms.
    pub fn after(&self, other: &DAutomorphism) -> Result<DAutomorphism> {
        let phi = self.phi.compose(&other.phi);
        // Ω = Ω_other + (−1)^{conj_other} φ_other^*Ω_self: pulling the
        // exponential factor of `self` past φ_* replaces its form by the
        // pullback, and past 𝒞 flips its sign.
        let mut pulled = self.omega.pullback(&other.phi.images())?;
        if other.conj {
            pulled = pulled.scale(&Scalar::from_integer(-1, self.phi.mode()));
        }
        let omega = other.omega.checked_add(&pulled)?;
        DAutomorphism::new(phi, omega, self.conj ^ other.conj)
    }

    pub fn approx_eq(&self, other: &DAutomorphism, tol: f64) -> bool {
        self.conj == other.conj
            && self.phi.approx_eq(&other.phi, tol)
            && forms_close(&self.omega, &other.omega, tol)
    }
}

impl fmt::Display for DAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "aut-d {{ phi: {}, Omega: {}, conj: {} }}",
            self.phi, self.omega, self.conj
        )
    }
}

/// Integrate a one-form-valued function of `s` over `[0, t]`: exactly via
/// an interpolatory rule when the integrand is polynomial in `s` of degree
/// ≤ `degree_bound`, by 32-point Gauss–Legendre in approximate mode.
fn integrate_form<F>(
    integrand: F,
    t: &Scalar,
    degree_bound: u32,
    dim: usize,
    mode: ScalarMode,
) -> Result<ClosedOneForm>
where
    F: Fn(&Scalar) -> Result<Vec<SymbolPoly>>,
{
    let mut acc = vec![SymbolPoly::zero(dim, mode); dim];
    let rule: Vec<(Scalar, Scalar)> = match mode {
        ScalarMode::Exact => exact_nodes_weights(degree_bound, t)?,
        ScalarMode::Approx => approx_nodes_weights(t.to_f64())
            .into_iter()
            .map(|(s, w)| (Scalar::Approx(s), Scalar::Approx(w)))
            .collect(),
    };
    for (node, weight) in &rule {
        if weight.is_zero() {
            continue;
        }
        let value = integrand(node)?;
        for (a, v) in acc.iter_mut().zip(&value) {
            *a = a.checked_add(&v.scale(weight))?;
        }
    }
    ClosedOneForm::new(acc)
}

/// Coarse degree-in-`s` bound for the cocycle integrands: flow entries are
/// polynomial of degree ≤ dim in `s`, so a base polynomial of degree `d`
/// composed with the flow has `s`-degree ≤ `d·dim`, and one more flow
/// factor enters through the pullback matrix.
fn integrand_degree_bound(dim: usize, data_degree: u32) -> u32 {
    let n = dim as u32;
    (data_degree + 2) * (n + 1) + 2
}

fn max_form_degree(omega: &ClosedOneForm) -> u32 {
    omega
        .components()
        .iter()
        .filter_map(|c| c.base_degree())
        .max()
        .unwrap_or(0)
}

/// The one-parameter group integrating a first-order-algebra derivation,
/// evaluated at time `t`:
///
/// - base map: the time-`(−t)` flow of `Y` (see the module notes),
/// - `K_t = e^{κt}`, `Λ_t = λ·(e^{κt}−1)/κ` (`λt` when `κ = 0`),
/// - `Ω_t = ∫₀ᵗ e^{κ(t−s)} (φ_s^*ω + λ·d(Div φ_s)) ds` over the stored
///   family `φ_s`.
///
/// Errors: [`Error::NotAffine`] when `Y` is polynomial but not affine;
/// [`Error::ExactnessUnavailable`] in exact mode when the data is not
/// nilpotent/κ ≠ 0.
pub fn one_param_group_d1(c: &D1Derivation, t: &Scalar) -> Result<D1Automorphism> {
    if t.mode() != c.mode() {
        return Err(Error::ModeMismatch);
    }
    let dim = c.dim();
    let mode = c.mode();
    let field = FlowField::from_components(c.y_components())?;
    let k = c.kappa().mul(t).exp()?;
    let lambda_t = if c.kappa().is_zero() {
        c.lambda().mul(t)
    } else {
        let ekt = c.kappa().mul(t).exp()?;
        c.lambda()
            .mul(&ekt.sub(&Scalar::one(mode)))
            .div(c.kappa())
    };
    let phi = field.flow_at(&t.neg())?;
    let g_deg = c.div().weight().base_degree().unwrap_or(0);
    let bound = integrand_degree_bound(dim, max_form_degree(c.omega()).max(g_deg));
    let kappa = c.kappa().clone();
    let lambda = c.lambda().clone();
    let omega0 = c.omega().clone();
    let div = c.div().clone();
    let t_own = t.clone();
    let omega = integrate_form(
        |s| {
            let psi = field.flow_at(&s.neg())?;
            let pulled = omega0.pullback(&psi.images())?;
            let div_exp = psi
                .compose_function(div.weight())?
                .checked_sub(div.weight())?;
            let d_div = crate::symbol::exact_differential(&div_exp)?;
            let mut val = pulled.checked_add(&d_div.scale(&lambda))?;
            if !kappa.is_zero() {
                let factor = kappa.mul(&t_own.sub(s)).exp()?;
                val = val.scale(&factor);
            }
            Ok(val.components().to_vec())
        },
        t,
        bound,
        dim,
        mode,
    )?;
    D1Automorphism::new(phi, k, lambda_t, omega, c.div().clone())
}

/// The one-parameter group integrating a symbol-algebra derivation at time
/// `t`: requires `P` fiber-linear ([`Error::NotIntegrable`] otherwise) with
/// an affine base projection ([`Error::NotAffine`]); stores the
/// time-`(−t)` flow, `K_t = e^{κt}`, and `Ω_t = ∫₀ᵗ e^{κs} φ_s^*ω ds`.
pub fn one_param_group_s(c: &SDerivation, t: &Scalar) -> Result<SAutomorphism> {
    if t.mode() != c.mode() {
        return Err(Error::ModeMismatch);
    }
    let dim = c.dim();
    let mode = c.mode();
    if !c.p().is_fiber_homogeneous(1) {
        return Err(Error::NotIntegrable {
            reason: "P is not fiber-linear, so the derivation moves points outside any \
                     fiberwise-affine family"
                .to_string(),
        });
    }
    let comps: Vec<SymbolPoly> = (0..dim)
        .map(|i| c.p().diff(Var::Fiber, i))
        .collect::<Result<Vec<_>>>()?;
    let field = FlowField::from_components(&comps)?;
    let k = c.kappa().mul(t).exp()?;
    let phi = field.flow_at(&t.neg())?;
    let bound = integrand_degree_bound(dim, max_form_degree(c.omega()));
    let kappa = c.kappa().clone();
    let omega0 = c.omega().clone();
    let omega = integrate_form(
        |s| {
            let psi = field.flow_at(&s.neg())?;
            let mut val = omega0.pullback(&psi.images())?;
            if !kappa.is_zero() {
                val = val.scale(&kappa.mul(s).exp()?);
            }
            Ok(val.components().to_vec())
        },
        t,
        bound,
        dim,
        mode,
    )?;
    SAutomorphism::new(phi, k, omega)
}

/// The one-parameter group integrating an operator-algebra derivation at
/// time `t`: requires the (normalized) `P` to be a vector field
/// ([`Error::NotIntegrable`] otherwise, since higher-order `P` moves
/// operators out of every finite-order family) with affine components
/// ([`Error::NotAffine`]); stores the time-`(−t)` flow and
/// `Ω_t = ∫₀ᵗ φ_s^*ω ds`, with the conjugation flag off.
pub fn one_param_group_d(c: &DDerivation, t: &Scalar) -> Result<DAutomorphism> {
    if t.mode() != c.mode() {
        return Err(Error::ModeMismatch);
    }
    let dim = c.dim();
    let mode = c.mode();
    if c.p().order().unwrap_or(0) > 1 {
        return Err(Error::NotIntegrable {
            reason: "P has order at least two, so repeated application raises operator order \
                     without bound"
                .to_string(),
        });
    }
    let field = FlowField::from_operator(c.p())?;
    let phi = field.flow_at(&t.neg())?;
    let bound = integrand_degree_bound(dim, max_form_degree(c.omega()));
    let omega0 = c.omega().clone();
    let omega = integrate_form(
        |s| {
            let psi = field.flow_at(&s.neg())?;
            Ok(omega0.pullback(&psi.images())?.components().to_vec())
        },
        t,
        bound,
        dim,
        mode,
    )?;
    DAutomorphism::new(phi, omega, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{D1Derivation, DDerivation, SDerivation};
    use crate::symbol::exact_differential;

    fn m() -> ScalarMode {
        ScalarMode::Exact
    }

    fn int(n: i64) -> Scalar {
        Scalar::from_integer(n, m())
    }

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d, m())
    }

    fn x(dim: usize, axis: usize) -> SymbolPoly {
        SymbolPoly::variable(dim, m(), Var::Base, axis).unwrap()
    }

    fn p_var(dim: usize, axis: usize) -> SymbolPoly {
        SymbolPoly::variable(dim, m(), Var::Fiber, axis).unwrap()
    }

    #[test]
    fn flow_of_shear_and_translation() {
        // Y = x2∂1: Exp(tY)(x) = (x1 + t·x2, x2).
        let field =
            FlowField::from_components(&[x(2, 1), SymbolPoly::zero(2, m())]).unwrap();
        let phi = field.flow_at(&rat(3, 2)).unwrap();
        let pt = phi.apply_point(&[int(1), int(2)]);
        assert_eq!(pt, vec![int(4), int(2)]);
        // Pure translation: Y = ∂1.
        let tr = FlowField::from_components(&[SymbolPoly::one(2, m()), SymbolPoly::zero(2, m())])
            .unwrap();
        let phi2 = tr.flow_at(&int(5)).unwrap();
        assert_eq!(phi2.apply_point(&[int(0), int(0)]), vec![int(5), int(0)]);
    }

    #[test]
    fn flow_group_law_and_exactness_guard() {
        let field =
            FlowField::from_components(&[x(2, 1), SymbolPoly::zero(2, m())]).unwrap();
        let a = field.flow_at(&rat(1, 3)).unwrap();
        let b = field.flow_at(&rat(2, 3)).unwrap();
        assert_eq!(a.compose(&b), field.flow_at(&int(1)).unwrap());
        // Non-nilpotent linear part refuses exact evaluation...
        let scaling = FlowField::from_components(&[x(1, 0)]).unwrap();
        assert!(matches!(
            scaling.flow_at(&int(1)),
            Err(Error::ExactnessUnavailable { .. })
        ));
        // ...but flows in approximate mode.
        let scaling_f =
            FlowField::from_components(&[x(1, 0).to_approx()]).unwrap();
        let phi = scaling_f.flow_at(&Scalar::Approx(1.0)).unwrap();
        assert!((phi.matrix().get(0, 0).to_f64() - 1.0_f64.exp()).abs() < 1e-12);
        // Quadratic components are not affine.
        assert!(matches!(
            FlowField::from_components(&[x(1, 0).pow_u32(2)]),
            Err(Error::NotAffine { .. })
        ));
    }

    #[test]
    fn jacobian_record_and_composition_rule() {
        let dim = 1;
        let div = Divergence::new(x(dim, 0).pow_u32(2)).unwrap();
        // φ(x) = 2x + 1, ζ(x) = x + 3.
        let phi = AffineMap::new(
            Mat::from_rows(vec![vec![int(2)]], m()),
            vec![int(1)],
        )
        .unwrap();
        let zeta = AffineMap::new(
            Mat::from_rows(vec![vec![int(1)]], m()),
            vec![int(3)],
        )
        .unwrap();
        let j_phi = jacobian(&phi, &div).unwrap();
        assert_eq!(j_phi.scale, int(2));
        // exponent = (2x+1)² − x².
        let expect = phi
            .compose_function(div.weight())
            .unwrap()
            .checked_sub(div.weight())
            .unwrap();
        assert_eq!(j_phi.exponent, expect);
        // J(φ∘ζ) = ζ*(J(φ)) · J(ζ): scales multiply, exponents add after
        // moving J(φ)'s exponent through ζ.
        let j_comp = jacobian(&phi.compose(&zeta), &div).unwrap();
        let j_zeta = jacobian(&zeta, &div).unwrap();
        assert_eq!(j_comp.scale, j_phi.scale.mul(&j_zeta.scale));
        let moved = zeta.compose_function(&j_phi.exponent).unwrap();
        assert_eq!(
            j_comp.exponent,
            moved.checked_add(&j_zeta.exponent).unwrap()
        );
    }

    #[test]
    fn div_of_flow_identities() {
        // Weighted divergence, nilpotent field.
        let div = Divergence::new(
            x(2, 0)
                .pow_u32(2)
                .checked_mul(&x(2, 1))
                .unwrap(),
        )
        .unwrap();
        let field =
            FlowField::from_components(&[x(2, 1), SymbolPoly::one(2, m())]).unwrap();
        // Additivity: Div(φ_{v+s}) = Div(φ_v)∘φ_s + Div(φ_s).
        let v = rat(1, 2);
        let s = rat(1, 3);
        let lhs = div_of_flow(&field, &v.add(&s), &div).unwrap();
        let phi_s = field.flow_at(&s).unwrap();
        let rhs = phi_s
            .compose_function(&div_of_flow(&field, &v, &div).unwrap())
            .unwrap()
            .checked_add(&div_of_flow(&field, &s, &div).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        // Integral form: Div(Exp(tY)) = ∫₀ᵗ (div Y)∘Exp(sY) ds.
        let t = rat(2, 1);
        let divy = div.apply(&field.components()).unwrap();
        let bound = integrand_degree_bound(2, 3);
        let rule = exact_nodes_weights(bound, &t).unwrap();
        let mut integral = SymbolPoly::zero(2, m());
        for (node, w) in &rule {
            let val = field
                .flow_at(node)
                .unwrap()
                .compose_function(&divy)
                .unwrap();
            integral = integral.checked_add(&val.scale(w)).unwrap();
        }
        assert_eq!(div_of_flow(&field, &t, &div).unwrap(), integral);
    }

    #[test]
    fn pushforward_vector_and_prop5a() {
        // φ(x) = 2x fixes X = x∂ and doubles ∂.
        let phi = AffineMap::new(Mat::from_rows(vec![vec![int(2)]], m()), vec![int(0)]).unwrap();
        assert_eq!(pushforward_vector(&phi, &[x(1, 0)]).unwrap(), vec![x(1, 0)]);
        assert_eq!(
            pushforward_vector(&phi, &[SymbolPoly::one(1, m())]).unwrap(),
            vec![SymbolPoly::one(1, m()).scale(&int(2))]
        );
        // φ*(div φ_*X) = div X + X(Div φ) for a flow map φ.
        let div = Divergence::new(x(1, 0).pow_u32(3)).unwrap();
        let field = FlowField::from_components(&[SymbolPoly::one(1, m())]).unwrap();
        let s0 = rat(1, 2);
        let fl = field.flow_at(&s0).unwrap();
        let xc = vec![x(1, 0).pow_u32(2)];
        let pushed = pushforward_vector(&fl, &xc).unwrap();
        let lhs = fl
            .compose_function(&div.apply(&pushed).unwrap())
            .unwrap();
        let x_op = WeylOp::first_order(&xc, &SymbolPoly::zero(1, m())).unwrap();
        let rhs = div
            .apply(&xc)
            .unwrap()
            .checked_add(&x_op.apply(&div_of_flow(&field, &s0, &div).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_operator_is_multiplicative() {
        let phi = AffineMap::new(
            Mat::from_rows(vec![vec![int(1), int(2)], vec![int(0), int(1)]], m()),
            vec![int(3), int(0)],
        )
        .unwrap();
        let d1 = WeylOp::quantize_standard(
            &x(2, 0)
                .checked_mul(&p_var(2, 0).pow_u32(2))
                .unwrap()
                .checked_add(&p_var(2, 1))
                .unwrap(),
        );
        let d2 = WeylOp::quantize_standard(
            &x(2, 1)
                .checked_mul(&p_var(2, 0))
                .unwrap()
                .checked_add(&x(2, 0))
                .unwrap(),
        );
        let lhs = pushforward_operator(&phi, &d1.compose(&d2).unwrap()).unwrap();
        let rhs = pushforward_operator(&phi, &d1)
            .unwrap()
            .compose(&pushforward_operator(&phi, &d2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        // And consistent with the vector-field pushforward on first-order
        // operators.
        let xc = vec![x(2, 1).pow_u32(2), x(2, 0)];
        let op = WeylOp::first_order(&xc, &SymbolPoly::zero(2, m())).unwrap();
        let (pc, pf) = pushforward_operator(&phi, &op)
            .unwrap()
            .split_first_order()
            .unwrap();
        assert!(pf.is_zero());
        assert_eq!(pc, pushforward_vector(&phi, &xc).unwrap());
    }

    #[test]
    fn phase_map_structural_relations() {
        let dim = 2;
        let omega = exact_differential(&x(dim, 0).pow_u32(2).checked_mul(&x(dim, 1)).unwrap())
            .unwrap();
        let k = rat(3, 1);
        let phi = AffineMap::new(
            Mat::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]], m()),
            vec![int(2), int(0)],
        )
        .unwrap();
        // 𝒯_Ω ∘ h_K = h_K ∘ 𝒯_{K⁻¹Ω}.
        let lhs = PhaseAffine::fiber_translate(&omega)
            .compose(&PhaseAffine::fiber_scale(dim, &k))
            .unwrap();
        let rhs = PhaseAffine::fiber_scale(dim, &k)
            .compose(&PhaseAffine::fiber_translate(
                &omega.scale(&Scalar::one(m()).div(&k)),
            ))
            .unwrap();
        assert_eq!(lhs, rhs);
        // lift(φ⁻¹) ∘ 𝒯_Ω = 𝒯_{φ^*Ω} ∘ lift(φ⁻¹).
        let lift = PhaseAffine::lift_of_inverse(&phi).unwrap();
        let lhs2 = lift.compose(&PhaseAffine::fiber_translate(&omega)).unwrap();
        let pulled = omega.pullback(&phi.images()).unwrap();
        let rhs2 = PhaseAffine::fiber_translate(&pulled).compose(&lift).unwrap();
        assert_eq!(lhs2, rhs2);
        // h_K commutes with the lift.
        let lhs3 = PhaseAffine::fiber_scale(dim, &k).compose(&lift).unwrap();
        let rhs3 = lift.compose(&PhaseAffine::fiber_scale(dim, &k)).unwrap();
        assert_eq!(lhs3, rhs3);
    }

    #[test]
    fn s_automorphism_scaling_and_translation_examples() {
        let dim = 1;
        // Pure fiber scaling acts by K^{i−1} on fiber degree i.
        let u3 = SAutomorphism::new(
            AffineMap::identity(dim, m()),
            int(3),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        let s2 = p_var(dim, 0).pow_u32(2);
        assert_eq!(u3.apply(&s2).unwrap(), s2.scale(&int(3)));
        let s0 = x(dim, 0);
        assert_eq!(
            u3.apply(&s0).unwrap(),
            s0.scale(&rat(1, 3))
        );
        // Pure fiber translation: Φ(S) = S(x, ξ + Ω(x)).
        let omega = exact_differential(&x(dim, 0).pow_u32(2)).unwrap();
        let tr = SAutomorphism::new(AffineMap::identity(dim, m()), int(1), omega).unwrap();
        let moved = tr.apply(&p_var(dim, 0).pow_u32(2)).unwrap();
        let shifted = p_var(dim, 0)
            .checked_add(&x(dim, 0).scale(&int(2)))
            .unwrap()
            .pow_u32(2);
        assert_eq!(moved, shifted);
    }

    #[test]
    fn one_param_group_s_moves_forward() {
        // The orientation pin: C = {p1, ·} = ∂/∂x1 must integrate to
        // Φ_t(S) = S(x + t, ξ), not S(x − t, ξ).
        let dim = 1;
        let c = SDerivation::new(p_var(dim, 0), int(0), ClosedOneForm::zero(dim, m())).unwrap();
        let aut = one_param_group_s(&c, &int(1)).unwrap();
        let s = x(dim, 0).pow_u32(2);
        let image = aut.apply(&s).unwrap();
        let expect = x(dim, 0)
            .checked_add(&SymbolPoly::one(dim, m()))
            .unwrap()
            .pow_u32(2);
        assert_eq!(image, expect);
        // And the stored base map is the backward flow.
        assert_eq!(aut.phi().offset()[0], int(-1));
    }

    #[test]
    fn one_param_group_s_with_pure_translation_part() {
        // P = 0, ω ≠ 0: Φ_t(S) = S(x, ξ + t·ω(x)).
        let dim = 2;
        let omega = exact_differential(&x(dim, 0).checked_mul(&x(dim, 1)).unwrap()).unwrap();
        let c = SDerivation::new(
            SymbolPoly::zero(dim, m()),
            int(0),
            omega.clone(),
        )
        .unwrap();
        let t = rat(3, 1);
        let aut = one_param_group_s(&c, &t).unwrap();
        assert!(aut.phi().is_identity());
        assert_eq!(aut.omega(), &omega.scale(&t));
        // Non-fiber-linear P does not integrate.
        let bad = SDerivation::new(
            p_var(dim, 0).pow_u32(2),
            int(0),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        assert!(matches!(
            one_param_group_s(&bad, &int(1)),
            Err(Error::NotIntegrable { .. })
        ));
        // Fiber-linear with non-affine base part is a different failure.
        let nonaffine = SDerivation::new(
            x(dim, 0)
                .pow_u32(2)
                .checked_mul(&p_var(dim, 0))
                .unwrap(),
            int(0),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        assert!(matches!(
            one_param_group_s(&nonaffine, &int(1)),
            Err(Error::NotAffine { .. })
        ));
    }

    #[test]
    fn one_param_group_s_group_law() {
        let dim = 2;
        // P = x2·p1 (nilpotent base part), ω = d(x1x2), κ = 0.
        let p = x(dim, 1).checked_mul(&p_var(dim, 0)).unwrap();
        let omega = exact_differential(&x(dim, 0).checked_mul(&x(dim, 1)).unwrap()).unwrap();
        let c = SDerivation::new(p, int(0), omega).unwrap();
        let t = rat(1, 2);
        let s = rat(1, 3);
        let phi_t = one_param_group_s(&c, &t).unwrap();
        let phi_s = one_param_group_s(&c, &s).unwrap();
        let combined = phi_t.after(&phi_s).unwrap();
        let direct = one_param_group_s(&c, &t.add(&s)).unwrap();
        assert_eq!(combined, direct);
        // Inverse at −t.
        let inv = one_param_group_s(&c, &t.neg()).unwrap();
        let round = inv.after(&phi_t).unwrap();
        assert!(round.phi().is_identity());
        assert!(round.omega().is_zero());
        // Applying the group at t then s agrees with t+s on a sample.
        let sample = x(dim, 0)
            .checked_mul(&p_var(dim, 1).pow_u32(2))
            .unwrap();
        let via_two = phi_t
            .apply(&phi_s.apply(&sample).unwrap())
            .unwrap();
        assert_eq!(via_two, direct.apply(&sample).unwrap());
    }

    #[test]
    fn d_automorphism_exponential_example() {
        // Ω = d(x1): e^{Ω̄}(∂1²) = (∂1 + 1)².
        let dim = 1;
        let omega = exact_differential(&x(dim, 0)).unwrap();
        let aut = DAutomorphism::new(AffineMap::identity(dim, m()), omega, false).unwrap();
        let d2 = WeylOp::quantize_standard(&p_var(dim, 0).pow_u32(2));
        let image = aut.apply(&d2).unwrap();
        let d1 = WeylOp::quantize_standard(&p_var(dim, 0));
        let expect = d2
            .checked_add(&d1.scale(&int(2)))
            .unwrap()
            .checked_add(&WeylOp::identity(dim, m()))
            .unwrap();
        assert_eq!(image, expect);
        // With the conjugation flag: Φ(∂1) = 𝒞(∂1) = ∂1, Φ(x1) = −x1.
        let cj = DAutomorphism::new(
            AffineMap::identity(dim, m()),
            ClosedOneForm::zero(dim, m()),
            true,
        )
        .unwrap();
        assert_eq!(cj.apply(&d1).unwrap(), d1);
        let x_op = WeylOp::from_multiplication(&x(dim, 0)).unwrap();
        assert_eq!(cj.apply(&x_op).unwrap(), x_op.neg());
    }

    #[test]
    fn one_param_group_d_group_law_and_guards() {
        let dim = 2;
        // P = x2∂1 (vector field with nilpotent matrix), ω = d(x1²x2).
        let p = WeylOp::first_order(
            &[x(dim, 1), SymbolPoly::zero(dim, m())],
            &SymbolPoly::zero(dim, m()),
        )
        .unwrap();
        let omega = exact_differential(
            &x(dim, 0)
                .pow_u32(2)
                .checked_mul(&x(dim, 1))
                .unwrap(),
        )
        .unwrap();
        let c = DDerivation::new(p, omega).unwrap();
        let t = rat(1, 2);
        let s = rat(2, 3);
        let phi_t = one_param_group_d(&c, &t).unwrap();
        let phi_s = one_param_group_d(&c, &s).unwrap();
        assert_eq!(
            phi_t.after(&phi_s).unwrap(),
            one_param_group_d(&c, &t.add(&s)).unwrap()
        );
        let sample = WeylOp::quantize_standard(
            &x(dim, 0)
                .checked_mul(&p_var(dim, 0).pow_u32(2))
                .unwrap()
                .checked_add(&p_var(dim, 1))
                .unwrap(),
        );
        let via_two = phi_t.apply(&phi_s.apply(&sample).unwrap()).unwrap();
        assert_eq!(
            via_two,
            one_param_group_d(&c, &t.add(&s)).unwrap().apply(&sample).unwrap()
        );
        // Order-two P does not integrate.
        let bad = DDerivation::new(
            WeylOp::quantize_standard(&p_var(dim, 0).pow_u32(2)),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        assert!(matches!(
            one_param_group_d(&bad, &t),
            Err(Error::NotIntegrable { .. })
        ));
    }

    #[test]
    fn one_param_group_d1_group_law_and_translation() {
        let dim = 2;
        let omega = exact_differential(&x(dim, 0).checked_mul(&x(dim, 1)).unwrap()).unwrap();
        let div = Divergence::new(x(dim, 0).checked_mul(&x(dim, 1)).unwrap()).unwrap();
        let c = D1Derivation::new(
            vec![x(dim, 1), SymbolPoly::one(dim, m())],
            int(0),
            rat(1, 2),
            omega,
            div,
        )
        .unwrap();
        let t = rat(1, 2);
        let s = rat(1, 4);
        let phi_t = one_param_group_d1(&c, &t).unwrap();
        let phi_s = one_param_group_d1(&c, &s).unwrap();
        assert_eq!(
            phi_t.after(&phi_s).unwrap(),
            one_param_group_d1(&c, &t.add(&s)).unwrap()
        );
        let sample = WeylOp::first_order(
            &[x(dim, 0).checked_mul(&x(dim, 1)).unwrap(), x(dim, 1).pow_u32(2)],
            &x(dim, 0),
        )
        .unwrap();
        let via_two = phi_t.apply(&phi_s.apply(&sample).unwrap()).unwrap();
        assert_eq!(
            via_two,
            one_param_group_d1(&c, &t.add(&s))
                .unwrap()
                .apply(&sample)
                .unwrap()
        );
        // The pure-Y group moves functions forward along Y.
        let c_y = D1Derivation::new(
            vec![SymbolPoly::one(dim, m()), SymbolPoly::zero(dim, m())],
            int(0),
            int(0),
            ClosedOneForm::zero(dim, m()),
            Divergence::standard(dim, m()),
        )
        .unwrap();
        let g = one_param_group_d1(&c_y, &int(1)).unwrap();
        let f_elem = WeylOp::from_multiplication(&x(dim, 0)).unwrap();
        let image = g.apply(&f_elem).unwrap();
        // f = x1 ↦ f∘φ⁻¹ where the action shifts forward: x1 + 1.
        let expect = WeylOp::from_multiplication(
            &x(dim, 0).checked_add(&SymbolPoly::one(dim, m())).unwrap(),
        )
        .unwrap();
        assert_eq!(image, expect);
    }

    #[test]
    fn exact_kappa_requires_zero() {
        let dim = 1;
        let c = SDerivation::new(
            SymbolPoly::zero(dim, m()),
            int(1),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        assert!(matches!(
            one_param_group_s(&c, &int(1)),
            Err(Error::ExactnessUnavailable { .. })
        ));
        // In approximate mode the same data integrates: K_t = e^{κt}.
        let ca = SDerivation::new(
            SymbolPoly::zero(dim, ScalarMode::Approx),
            Scalar::Approx(1.0),
            ClosedOneForm::zero(dim, ScalarMode::Approx),
        )
        .unwrap();
        let aut = one_param_group_s(&ca, &Scalar::Approx(2.0)).unwrap();
        assert!((aut.k().to_f64() - 2.0_f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn display_of_descriptors() {
        let dim = 1;
        let aut = SAutomorphism::new(
            AffineMap::identity(dim, m()),
            int(2),
            ClosedOneForm::zero(dim, m()),
        )
        .unwrap();
        assert_eq!(aut.to_string(), "aut-s { phi: [[1]] + [0], K: 2, Omega: 0 }");
    }
}
