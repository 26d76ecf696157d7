use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarMode};

/// Exponent vector over one variable group.  `Ord` derives to lexicographic
/// order on the underlying vector, which is the canonical term order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> MultiIndex {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> MultiIndex {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total weight |α| = Σ αᵢ.
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise difference; `None` if any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            v.push(a - b);
        }
        Some(MultiIndex(v))
    }

    pub fn min(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    /// All multi-indices γ with γᵢ ≤ selfᵢ for every i (the exchange range
    /// of the composition rule), in lexicographic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        for (axis, &cap) in self.0.iter().enumerate() {
            if cap == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (cap as usize + 1));
            for base in &out {
                for e in 0..=cap {
                    let mut v = base.0.clone();
                    v[axis] = e;
                    next.push(MultiIndex(v));
                }
            }
            out = next;
        }
        out
    }
}

/// Which variable group an operation addresses: base coordinates `x1..xn`
/// or fiber coordinates `p1..pn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Base,
    Fiber,
}

/// A polynomial on the phase space: finitely many terms
/// `c · x^β · p^δ`, stored sparsely with exact-zero coefficients dropped.
///
/// The same container also backs plain base polynomials (every fiber
/// exponent zero) and, in the operator module, normally ordered
/// differential operators (fiber index read as a derivative multi-index).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoly {
    dim: usize,
    mode: ScalarMode,
    terms: BTreeMap<(MultiIndex, MultiIndex), Scalar>,
}

impl SymbolPoly {
    pub fn zero(dim: usize, mode: ScalarMode) -> SymbolPoly {
        SymbolPoly {
            dim,
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Scalar) -> SymbolPoly {
        let mode = c.mode();
        let mut p = SymbolPoly::zero(dim, mode);
        p.insert_add(MultiIndex::zero(dim), MultiIndex::zero(dim), c);
        p
    }

    pub fn one(dim: usize, mode: ScalarMode) -> SymbolPoly {
        SymbolPoly::constant(dim, Scalar::one(mode))
    }

    pub fn monomial(dim: usize, base: MultiIndex, fiber: MultiIndex, c: Scalar) -> SymbolPoly {
        assert_eq!(base.dim(), dim);
        assert_eq!(fiber.dim(), dim);
        let mode = c.mode();
        let mut p = SymbolPoly::zero(dim, mode);
        p.insert_add(base, fiber, c);
        p
    }

    /// The coordinate polynomial `x{axis+1}` or `p{axis+1}`.
    pub fn variable(dim: usize, mode: ScalarMode, var: Var, axis: usize) -> Result<SymbolPoly> {
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let (base, fiber) = match var {
            Var::Base => (MultiIndex::unit(dim, axis), MultiIndex::zero(dim)),
            Var::Fiber => (MultiIndex::zero(dim), MultiIndex::unit(dim, axis)),
        };
        Ok(SymbolPoly::monomial(dim, base, fiber, Scalar::one(mode)))
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

    pub fn coefficient(&self, base: &MultiIndex, fiber: &MultiIndex) -> Scalar {
        self.terms
            .get(&(base.clone(), fiber.clone()))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    pub(crate) fn insert_add(&mut self, base: MultiIndex, fiber: MultiIndex, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let key = (base, fiber);
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

    fn check_compatible(&self, other: &SymbolPoly) -> Result<()> {
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

    pub fn checked_add(&self, other: &SymbolPoly) -> Result<SymbolPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for ((b, f), c) in &other.terms {
            out.insert_add(b.clone(), f.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SymbolPoly) -> Result<SymbolPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for ((b, f), c) in &other.terms {
            out.insert_add(b.clone(), f.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &SymbolPoly) -> Result<SymbolPoly> {
        self.check_compatible(other)?;
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b1, f1), c1) in &self.terms {
            for ((b2, f2), c2) in &other.terms {
                out.insert_add(b1.add(b2), f1.add(f2), c1.mul(c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> SymbolPoly {
        assert_eq!(c.mode(), self.mode, "scalar mode mixed in scale");
        if c.is_zero() {
            return SymbolPoly::zero(self.dim, self.mode);
        }
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, f), v) in &self.terms {
            out.insert_add(b.clone(), f.clone(), v.mul(c));
        }
        out
    }

    pub fn neg(&self) -> SymbolPoly {
        self.scale(&Scalar::from_integer(-1, self.mode))
    }

    pub fn pow_u32(&self, e: u32) -> SymbolPoly {
        let mut acc = SymbolPoly::one(self.dim, self.mode);
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("pow operands share dim/mode");
        }
        acc
    }

    /// Partial derivative with respect to `x{axis+1}` or `p{axis+1}`.
    pub fn diff(&self, var: Var, axis: usize) -> Result<SymbolPoly> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, f), c) in &self.terms {
            let (active, passive) = match var {
                Var::Base => (b, f),
                Var::Fiber => (f, b),
            };
            let e = active.0[axis];
            if e == 0 {
                continue;
            }
            let mut lowered = active.clone();
            lowered.0[axis] = e - 1;
            let coeff = c.scale_int(e as i64);
            match var {
                Var::Base => out.insert_add(lowered, passive.clone(), coeff),
                Var::Fiber => out.insert_add(passive.clone(), lowered, coeff),
            }
        }
        Ok(out)
    }

    /// Highest total fiber degree among terms; `None` for the zero polynomial.
    pub fn fiber_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(_, f)| f.weight()).max()
    }

    /// Highest total base degree among terms; `None` for the zero polynomial.
    pub fn base_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(b, _)| b.weight()).max()
    }

    /// The sub-sum of terms whose total fiber degree is exactly `d`.
    pub fn fiber_homogeneous_part(&self, d: u32) -> SymbolPoly {
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, f), c) in &self.terms {
            if f.weight() == d {
                out.insert_add(b.clone(), f.clone(), c.clone());
            }
        }
        out
    }

    pub fn is_fiber_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|(_, f)| f.weight() == d)
    }

    /// True when no term involves a fiber variable.
    pub fn is_base_only(&self) -> bool {
        self.terms.keys().all(|(_, f)| f.is_zero())
    }

    pub fn expect_base_only(&self, context: &str) -> Result<()> {
        if self.is_base_only() {
            Ok(())
        } else {
            Err(Error::BaseOnlyExpected {
                context: context.to_string(),
            })
        }
    }

    /// The coefficient of the constant monomial.
    pub fn constant_coefficient(&self) -> Scalar {
        self.coefficient(&MultiIndex::zero(self.dim), &MultiIndex::zero(self.dim))
    }

    /// The whole polynomial as a scalar, if it is constant.
    pub fn as_constant(&self, context: &str) -> Result<Scalar> {
        if self
            .terms
            .keys()
            .all(|(b, f)| b.is_zero() && f.is_zero())
        {
            Ok(self.constant_coefficient())
        } else {
            Err(Error::ConstantExpected {
                context: context.to_string(),
            })
        }
    }

    /// Simultaneous substitution `xᵢ ↦ base_images[i]`, `pᵢ ↦ fiber_images[i]`.
    /// Every image must share this polynomial's dimension and mode.
    pub fn substitute(
        &self,
        base_images: &[SymbolPoly],
        fiber_images: &[SymbolPoly],
    ) -> Result<SymbolPoly> {
        if base_images.len() != self.dim || fiber_images.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: base_images.len().max(fiber_images.len()),
            });
        }
        for img in base_images.iter().chain(fiber_images) {
            self.check_compatible(img)?;
        }
        // Cache powers of each image so repeated exponents cost one multiply.
        let mut base_pows: Vec<Vec<SymbolPoly>> = (0..self.dim)
            .map(|i| vec![SymbolPoly::one(self.dim, self.mode), base_images[i].clone()])
            .collect();
        let mut fiber_pows: Vec<Vec<SymbolPoly>> = (0..self.dim)
            .map(|i| vec![SymbolPoly::one(self.dim, self.mode), fiber_images[i].clone()])
            .collect();
        let mut out = SymbolPoly::zero(self.dim, self.mode);
        for ((b, f), c) in &self.terms {
            let mut term = SymbolPoly::constant(self.dim, c.clone());
            for axis in 0..self.dim {
                let eb = b.0[axis] as usize;
                while base_pows[axis].len() <= eb {
                    let next = base_pows[axis]
                        .last()
                        .unwrap()
                        .checked_mul(&base_images[axis])?;
                    base_pows[axis].push(next);
                }
                if eb > 0 {
                    term = term.checked_mul(&base_pows[axis][eb])?;
                }
                let ef = f.0[axis] as usize;
                while fiber_pows[axis].len() <= ef {
                    let next = fiber_pows[axis]
                        .last()
                        .unwrap()
                        .checked_mul(&fiber_images[axis])?;
                    fiber_pows[axis].push(next);
                }
                if ef > 0 {
                    term = term.checked_mul(&fiber_pows[axis][ef])?;
                }
            }
            out = out.checked_add(&term)?;
        }
        Ok(out)
    }

    /// Numeric evaluation at a point `(x, p)`.
    pub fn eval(&self, base_vals: &[Scalar], fiber_vals: &[Scalar]) -> Result<Scalar> {
        if base_vals.len() != self.dim || fiber_vals.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: base_vals.len().max(fiber_vals.len()),
            });
        }
        for v in base_vals.iter().chain(fiber_vals) {
            if v.mode() != self.mode {
                return Err(Error::ModeMismatch);
            }
        }
        let mut acc = Scalar::zero(self.mode);
        for ((b, f), c) in &self.terms {
            let mut term = c.clone();
            for axis in 0..self.dim {
                if b.0[axis] > 0 {
                    term = term.mul(&base_vals[axis].pow_u32(b.0[axis]));
                }
                if f.0[axis] > 0 {
                    term = term.mul(&fiber_vals[axis].pow_u32(f.0[axis]));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Copy with every coefficient converted to `f64`.
    pub fn to_approx(&self) -> SymbolPoly {
        let mut out = SymbolPoly::zero(self.dim, ScalarMode::Approx);
        for ((b, f), c) in &self.terms {
            out.insert_add(b.clone(), f.clone(), Scalar::Approx(c.to_f64()));
        }
        out
    }

    /// Largest coefficient magnitude, for tolerance normalization.
    pub fn max_coeff_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs_f64())
            .fold(0.0_f64, f64::max)
    }

    /// Exact equality in exact mode; coefficient-wise closeness within
    /// `tol` in approximate mode.
    pub fn approx_eq(&self, other: &SymbolPoly, tol: f64) -> bool {
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

    fn write_monomial(
        f: &mut fmt::Formatter<'_>,
        c: &Scalar,
        base: &MultiIndex,
        fiber: &MultiIndex,
    ) -> fmt::Result {
        write!(f, "{c}")?;
        for (i, &e) in base.0.iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, " * x{}", i + 1)?,
                _ => write!(f, " * x{}^{}", i + 1, e)?,
            }
        }
        for (i, &e) in fiber.0.iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, " * p{}", i + 1)?,
                _ => write!(f, " * p{}^{}", i + 1, e)?,
            }
        }
        Ok(())
    }
}

/// Canonical text form: terms in the canonical (lexicographic, base-then-
/// fiber) order joined by ` + `, each as `c * x1^a1 * ... * p1^b1 * ...`
/// with unit exponents and zero-exponent factors omitted and the
/// coefficient always printed.  The zero polynomial prints `0`.
impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((b, fi), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            SymbolPoly::write_monomial(f, c, b, fi)?;
        }
        Ok(())
    }
}
