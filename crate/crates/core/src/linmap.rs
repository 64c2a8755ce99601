//! Linearized polynomials `L(x) = Σ c_i x^(2^i)` over GF(2^n).
//!
//! These are exactly the GF(2)-linear self-maps of the field. Each one has a
//! coefficient form (this type) and a matrix form ([`BitMatrix`] whose column `j`
//! is `L(x^j)`); conversions go both ways, the reverse direction through the
//! trace-dual basis.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix};
use crate::gf2n::{parse_hex, FieldContext, FieldElement};

#[derive(Clone)]
pub struct LinearizedPoly {
    ctx: Arc<FieldContext>,
    coeffs: Vec<FieldElement>,
}

impl PartialEq for LinearizedPoly {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.coeffs == other.coeffs
    }
}

impl Eq for LinearizedPoly {}

impl fmt::Debug for LinearizedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearizedPoly[{}]({})", self.ctx.spec_string(), self)
    }
}

/// Comma-separated lowercase hex coefficients `c0,c1,...`.
impl fmt::Display for LinearizedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{c:#x}")).collect();
        f.write_str(&parts.join(","))
    }
}

pub(crate) fn same_field(a: &FieldContext, b: &FieldContext) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Argument(format!("field mismatch: {} vs {}", a.spec_string(), b.spec_string())))
    }
}

impl LinearizedPoly {
    pub fn new(ctx: Arc<FieldContext>, coeffs: Vec<FieldElement>) -> Result<Self> {
        if coeffs.len() != ctx.n() as usize {
            return Err(Error::Argument(format!("expected {} coefficients, got {}", ctx.n(), coeffs.len())));
        }
        for &c in &coeffs {
            ctx.check(c)?;
        }
        Ok(LinearizedPoly { ctx, coeffs })
    }

    pub fn zero(ctx: Arc<FieldContext>) -> Self {
        let n = ctx.n() as usize;
        LinearizedPoly { ctx, coeffs: vec![0; n] }
    }

    pub fn identity(ctx: Arc<FieldContext>) -> Self {
        Self::monomial(ctx, 0, 1)
    }

    /// `c · x^(2^i)`.
    pub fn monomial(ctx: Arc<FieldContext>, i: u32, c: FieldElement) -> Self {
        let mut l = Self::zero(ctx);
        let n = l.n();
        l.coeffs[(i % n) as usize] = c;
        l
    }

    /// Parses the comma-separated hex form; the number of entries must be `n`.
    pub fn parse(ctx: Arc<FieldContext>, text: &str) -> Result<Self> {
        let coeffs = text.split(',').map(parse_hex).collect::<Result<Vec<_>>>()?;
        if coeffs.len() != ctx.n() as usize {
            return Err(Error::Parse(format!(
                "expected {} comma-separated coefficients, got {}",
                ctx.n(),
                coeffs.len()
            )));
        }
        Self::new(ctx, coeffs).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn random<R: Rng + ?Sized>(ctx: Arc<FieldContext>, rng: &mut R) -> Self {
        let q = ctx.order();
        let coeffs = (0..ctx.n()).map(|_| rng.gen_range(0..q)).collect();
        LinearizedPoly { ctx, coeffs }
    }

    /// Recovers coefficients from a matrix whose column `j` is `L(x^j)`:
    /// `c_k = Σ_j L(x^j) θ_j^(2^k)` with `θ` the trace-dual basis.
    pub fn from_matrix(ctx: Arc<FieldContext>, m: &BitMatrix) -> Result<Self> {
        let n = ctx.n() as usize;
        if m.rows() != n || m.ncols() != n {
            return Err(Error::Argument(format!("expected a {n}x{n} matrix")));
        }
        let coeffs = (0..n as u32)
            .map(|k| {
                ctx.dual_basis().iter().enumerate().fold(0, |acc, (j, &t)| acc ^ ctx.mul(m.column(j), ctx.pow2k(t, k)))
            })
            .collect();
        Ok(LinearizedPoly { ctx, coeffs })
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn n(&self) -> u32 {
        self.ctx.n()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `Σ c_i x^(2^i)`, evaluated term by term.
    pub fn eval(&self, x: FieldElement) -> FieldElement {
        let f = &*self.ctx;
        let mut acc = 0;
        let mut frob = x;
        for &c in &self.coeffs {
            acc ^= f.mul(c, frob);
            frob = f.square(frob);
        }
        acc
    }

    /// Column `j` is `L(x^j)`.
    pub fn matrix(&self) -> BitMatrix {
        let n = self.n() as usize;
        BitMatrix::from_columns(n, (0..n).map(|j| self.eval(1 << j)).collect()).expect("n <= 16")
    }

    /// The adjoint `L*` with respect to `<x, y> = Tr(xy)`: the coefficient at
    /// index `(n - i) mod n` is `c_i^(2^(n-i))`.
    pub fn adjoint(&self) -> LinearizedPoly {
        let n = self.n();
        let mut coeffs = vec![0; n as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let j = (n - i as u32) % n;
            coeffs[j as usize] = self.ctx.pow2k(c, j);
        }
        LinearizedPoly { ctx: self.ctx.clone(), coeffs }
    }

    pub fn kernel(&self) -> Subspace {
        Subspace::from_vectors(self.ctx.clone(), &self.matrix().kernel_basis())
    }

    /// Kernel by scanning every element; kept as an oracle for [`kernel`](Self::kernel).
    pub fn kernel_exhaustive(&self) -> Vec<FieldElement> {
        self.ctx.elements().filter(|&x| self.eval(x) == 0).collect()
    }

    pub fn image(&self) -> Subspace {
        Subspace::from_vectors(self.ctx.clone(), self.matrix().columns())
    }

    pub fn rank(&self) -> usize {
        self.matrix().rank()
    }

    pub fn is_bijective(&self) -> bool {
        self.rank() == self.n() as usize
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearizedPoly) -> Result<LinearizedPoly> {
        same_field(&self.ctx, &other.ctx)?;
        let f = &*self.ctx;
        let n = self.n();
        let mut coeffs = vec![0; n as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, &d) in other.coeffs.iter().enumerate() {
                let k = (i + j) % n as usize;
                coeffs[k] ^= f.mul(c, f.pow2k(d, i as u32));
            }
        }
        Ok(LinearizedPoly { ctx: self.ctx.clone(), coeffs })
    }

    pub fn add(&self, other: &LinearizedPoly) -> Result<LinearizedPoly> {
        same_field(&self.ctx, &other.ctx)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a ^ b).collect();
        Ok(LinearizedPoly { ctx: self.ctx.clone(), coeffs })
    }

    /// Image of a subspace; the dimension may drop.
    pub fn apply_to_subspace(&self, s: &Subspace) -> Result<Subspace> {
        same_field(&self.ctx, &s.ctx)?;
        let images: Vec<u32> = s.basis.iter().map(|&v| self.eval(v)).collect();
        Ok(Subspace::from_vectors(self.ctx.clone(), &images))
    }

    /// Finds a bijective `A` with `target = A ∘ self`, which exists exactly when
    /// both maps have the same kernel.
    pub fn factor_through(&self, target: &LinearizedPoly) -> Result<Option<LinearizedPoly>> {
        same_field(&self.ctx, &target.ctx)?;
        let n = self.n() as usize;
        let (m, mt) = (self.matrix(), target.matrix());
        let mut sources = Vec::new();
        let mut images = Vec::new();
        for j in 0..n {
            let w = m.column(j);
            let mut trial = sources.clone();
            trial.push(w);
            if gf2::rank(&trial) == trial.len() {
                sources = trial;
                images.push(mt.column(j));
            }
        }
        if gf2::rank(&images) != images.len() {
            return Ok(None);
        }
        extend_to_basis(&mut sources, n);
        extend_to_basis(&mut images, n);
        let w = BitMatrix::from_columns(n, sources)?;
        let u = BitMatrix::from_columns(n, images)?;
        let a = u.mul(&w.inverse().expect("extended to a basis"))?;
        if a.mul(&m)? != mt {
            return Ok(None);
        }
        LinearizedPoly::from_matrix(self.ctx.clone(), &a).map(Some)
    }
}

fn extend_to_basis(vectors: &mut Vec<u32>, n: usize) {
    for j in 0..n {
        if vectors.len() == n {
            break;
        }
        let mut trial = vectors.clone();
        trial.push(1 << j);
        if gf2::rank(&trial) == trial.len() {
            *vectors = trial;
        }
    }
}

/// Adjoint computed from the matrix form: `L*(y) = Σ_i Tr(L(x^i) y) θ_i`.
///
/// Independent of the coefficient formula in [`LinearizedPoly::adjoint`].
pub fn adjoint_matrix(ctx: &FieldContext, m: &BitMatrix) -> BitMatrix {
    let n = ctx.n() as usize;
    let cols =
        (0..n)
            .map(|k| {
                (0..n).fold(0, |acc, i| {
                    if ctx.trace(ctx.mul(m.column(i), 1 << k)) == 1 {
                        acc ^ ctx.dual_basis()[i]
                    } else {
                        acc
                    }
                })
            })
            .collect();
    BitMatrix::from_columns(n, cols).expect("n <= 16")
}

/// A GF(2)-subspace of the field, held in reduced row echelon form.
#[derive(Clone)]
pub struct Subspace {
    ctx: Arc<FieldContext>,
    basis: Vec<FieldElement>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.basis == other.basis
    }
}

impl Eq for Subspace {}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {}, basis {:x?})", self.dim(), self.basis)
    }
}

impl Subspace {
    pub fn from_vectors(ctx: Arc<FieldContext>, vectors: &[FieldElement]) -> Self {
        Subspace { ctx, basis: gf2::rref(vectors) }
    }

    pub fn zero(ctx: Arc<FieldContext>) -> Self {
        Subspace { ctx, basis: Vec::new() }
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    /// Canonical (reduced echelon) basis.
    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> usize {
        1 << self.dim()
    }

    /// All `2^dim` elements, sorted.
    pub fn elements(&self) -> Vec<FieldElement> {
        let mut e = gf2::span(&self.basis);
        e.sort_unstable();
        e
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        let mut v = x;
        for &b in &self.basis {
            if v >> gf2::top_bit(b) & 1 == 1 {
                v ^= b;
            }
        }
        v == 0
    }

    pub fn intersection_is_trivial(&self, other: &Subspace) -> bool {
        let mut all = self.basis.clone();
        all.extend_from_slice(&other.basis);
        gf2::rank(&all) == self.dim() + other.dim()
    }

    /// Returns `(a, k)` with `self = a · GF(2^k)` if the subspace is a scaled
    /// subfield. Every nonzero element is tried as the scale `a`.
    pub fn is_subfield_translate(&self) -> Option<(FieldElement, u32)> {
        let k = self.dim() as u32;
        if k == 0 || !self.ctx.n().is_multiple_of(k) {
            return None;
        }
        let f = &*self.ctx;
        let sub = f.subfield_elements(k).ok()?;
        let mut member = vec![false; f.order() as usize];
        for &x in &sub {
            member[x as usize] = true;
        }
        let elems = self.elements();
        elems[1..].iter().copied().find_map(|s| {
            let si = f.inv0(s);
            elems.iter().all(|&x| member[f.mul(si, x) as usize]).then_some((s, k))
        })
    }
}
