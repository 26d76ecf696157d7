//! Seeded random generation of symbols, operators, forms, and derivations
//! for the property-checking harness.  Coefficients are small nonzero
//! integers so exact arithmetic stays fast and printable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::derivation::{D1Derivation, DDerivation, SDerivation};
use crate::error::Result;
use crate::linalg::Mat;
use crate::poly::{MultiIndex, SymbolPoly, Var};
use crate::scalar::{Scalar, ScalarMode};
use crate::symbol::{exact_differential, ClosedOneForm, Divergence};
use crate::weyl::WeylOp;

pub struct Sampler {
    rng: ChaCha8Rng,
    dim: usize,
    mode: ScalarMode,
}

impl Sampler {
    pub fn new(seed: u64, dim: usize, mode: ScalarMode) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
            mode,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    /// A nonzero integer coefficient in `[−3, 3]`.
    pub fn coeff(&mut self) -> Scalar {
        loop {
            let n: i64 = self.rng.gen_range(-3..=3);
            if n != 0 {
                return Scalar::from_integer(n, self.mode);
            }
        }
    }

    /// An integer in `[−3, 3]`, possibly zero.
    pub fn small_int(&mut self) -> Scalar {
        Scalar::from_integer(self.rng.gen_range(-3..=3), self.mode)
    }

    /// A uniform index below `upper`.
    pub fn pick(&mut self, upper: usize) -> usize {
        self.rng.gen_range(0..upper)
    }

    fn multi_index(&mut self, max_weight: u32) -> MultiIndex {
        let mut idx = MultiIndex::zero(self.dim);
        if max_weight == 0 {
            return idx;
        }
        let w = self.rng.gen_range(0..=max_weight);
        for _ in 0..w {
            let axis = self.rng.gen_range(0..self.dim);
            idx.0[axis] += 1;
        }
        idx
    }

    /// A random polynomial symbol with monomials of base degree ≤
    /// `max_base` and fiber degree ≤ `max_fiber`.
    pub fn symbol(&mut self, max_base: u32, max_fiber: u32, terms: usize) -> SymbolPoly {
        let mut p = SymbolPoly::zero(self.dim, self.mode);
        for _ in 0..terms {
            let beta = self.multi_index(max_base);
            let delta = self.multi_index(max_fiber);
            let c = self.coeff();
            p.insert_add(beta, delta, c);
        }
        p
    }

    /// A random base-only polynomial.
    pub fn base_poly(&mut self, max_deg: u32, terms: usize) -> SymbolPoly {
        self.symbol(max_deg, 0, terms)
    }

    /// A random operator with the given bounds on coefficient degree and
    /// order.
    pub fn operator(&mut self, max_base: u32, max_order: u32, terms: usize) -> WeylOp {
        WeylOp::quantize_standard(&self.symbol(max_base, max_order, terms))
    }

    /// Vector-field components (base-only polynomials, one per axis).
    pub fn vector_field(&mut self, max_deg: u32, terms: usize) -> Vec<SymbolPoly> {
        (0..self.dim).map(|_| self.base_poly(max_deg, terms)).collect()
    }

    /// A random first-order operator `X + f`.
    pub fn first_order(&mut self, max_deg: u32, terms: usize) -> Result<WeylOp> {
        let comps = self.vector_field(max_deg, terms);
        let f = self.base_poly(max_deg, terms);
        WeylOp::first_order(&comps, &f)
    }

    /// A random exact (hence closed) one-form `dh`.
    pub fn closed_one_form(&mut self, max_deg: u32, terms: usize) -> Result<ClosedOneForm> {
        exact_differential(&self.base_poly(max_deg + 1, terms))
    }

    /// A random weighted divergence `div(X) = Σ∂ᵢXⁱ + ΣXⁱ∂ᵢg`.
    pub fn divergence(&mut self, max_deg: u32, terms: usize) -> Result<Divergence> {
        Divergence::new(self.base_poly(max_deg, terms))
    }

    /// A unimodular integer matrix: a short product of elementary shears,
    /// so it is exactly invertible in both modes.
    pub fn unimodular(&mut self) -> Mat {
        let mut u = Mat::identity(self.dim, self.mode);
        if self.dim < 2 {
            return u;
        }
        for _ in 0..4 {
            let i = self.rng.gen_range(0..self.dim);
            let mut j = self.rng.gen_range(0..self.dim);
            while j == i {
                j = self.rng.gen_range(0..self.dim);
            }
            let mut shear = Mat::identity(self.dim, self.mode);
            shear.set(i, j, Scalar::from_integer(self.rng.gen_range(-2..=2), self.mode));
            u = u.mul(&shear);
        }
        u
    }

    /// A nilpotent matrix: strictly upper-triangular entries conjugated by
    /// a unimodular matrix.
    pub fn nilpotent_matrix(&mut self) -> Result<Mat> {
        let mut n = Mat::zero(self.dim, self.dim, self.mode);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                n.set(i, j, self.small_int());
            }
        }
        let u = self.unimodular();
        Ok(u.mul(&n).mul(&u.inverse()?))
    }

    /// An invertible affine map with unimodular linear part.
    pub fn affine_map(&mut self) -> Result<crate::flow::AffineMap> {
        let u = self.unimodular();
        let offset = (0..self.dim).map(|_| self.small_int()).collect();
        crate::flow::AffineMap::new(u, offset)
    }

    /// Components of an affine vector field with nilpotent linear part
    /// (so its flow is polynomial and exact mode can integrate it).
    pub fn nilpotent_affine_field(&mut self) -> Result<Vec<SymbolPoly>> {
        let a = self.nilpotent_matrix()?;
        let mut comps = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut p = SymbolPoly::constant(self.dim, self.small_int());
            for j in 0..self.dim {
                let c = a.get(i, j);
                if !c.is_zero() {
                    p.insert_add(
                        MultiIndex::unit(self.dim, j),
                        MultiIndex::zero(self.dim),
                        c.clone(),
                    );
                }
            }
            comps.push(p);
        }
        Ok(comps)
    }

    /// A random derivation of the first-order algebra (arbitrary
    /// polynomial `Y`; not necessarily integrable).
    pub fn d1_derivation(&mut self, max_deg: u32, terms: usize) -> Result<D1Derivation> {
        let y = self.vector_field(max_deg, terms);
        let omega = self.closed_one_form(max_deg, terms)?;
        let div = self.divergence(max_deg, terms)?;
        D1Derivation::new(y, self.small_int(), self.small_int(), omega, div)
    }

    /// A first-order-algebra derivation whose one-parameter group exists in
    /// exact arithmetic: affine nilpotent `Y` and `κ = 0`.
    pub fn d1_derivation_integrable(
        &mut self,
        max_deg: u32,
        terms: usize,
        div: Divergence,
    ) -> Result<D1Derivation> {
        let y = self.nilpotent_affine_field()?;
        let omega = self.closed_one_form(max_deg, terms)?;
        D1Derivation::new(y, Scalar::zero(self.mode), self.small_int(), omega, div)
    }

    /// A random symbol-algebra derivation (arbitrary `P`).
    pub fn s_derivation(&mut self, max_deg: u32, terms: usize) -> Result<SDerivation> {
        let p = self.symbol(max_deg, max_deg, terms);
        let omega = self.closed_one_form(max_deg, terms)?;
        SDerivation::new(p, self.small_int(), omega)
    }

    /// A symbol-algebra derivation with fiber-linear `P = Σ(Ax+b)ᵢ ξᵢ`,
    /// nilpotent `A`, and `κ = 0`, so exact integration applies.
    pub fn s_derivation_integrable(&mut self, max_deg: u32, terms: usize) -> Result<SDerivation> {
        let comps = self.nilpotent_affine_field()?;
        let mut p = SymbolPoly::zero(self.dim, self.mode);
        for (i, comp) in comps.iter().enumerate() {
            let xi = SymbolPoly::variable(self.dim, self.mode, Var::Fiber, i)?;
            p = p.checked_add(&comp.checked_mul(&xi)?)?;
        }
        let omega = self.closed_one_form(max_deg, terms)?;
        SDerivation::new(p, Scalar::zero(self.mode), omega)
    }

    /// A random operator-algebra derivation (arbitrary `P` of bounded
    /// order).
    pub fn d_derivation(&mut self, max_deg: u32, max_order: u32, terms: usize) -> Result<DDerivation> {
        let p = self.operator(max_deg, max_order, terms);
        let omega = self.closed_one_form(max_deg, terms)?;
        DDerivation::new(p, omega)
    }

    /// An operator-algebra derivation with `P` a nilpotent affine vector
    /// field, so exact integration applies.
    pub fn d_derivation_integrable(&mut self, max_deg: u32, terms: usize) -> Result<DDerivation> {
        let comps = self.nilpotent_affine_field()?;
        let p = WeylOp::first_order(&comps, &SymbolPoly::zero(self.dim, self.mode))?;
        let omega = self.closed_one_form(max_deg, terms)?;
        DDerivation::new(p, omega)
    }
}
