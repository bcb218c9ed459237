//! Concrete group elements and their byte codecs.
//!
//! Every group handle fixes one [`ElementKind`]; elements are stored in a
//! flat arena as fixed-stride byte strings and all group operations work
//! directly on those slices. Permutations store their image array; matrix
//! kinds store row-major entry values; the semilinear kind appends a
//! Frobenius exponent byte.
//!
//! Projective matrices are canonicalized so the first nonzero entry in
//! row-major order is 1; two projective elements are equal iff their
//! canonical byte strings are equal.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{mat_mul_raw, Field, Matrix};

pub const MAX_POINTS: usize = 32;

/// Codec descriptor for the elements of one group realization.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Permutations of {0, .., n-1}; payload is the image array.
    Perm { n: usize },
    /// Invertible matrices, exact equality (no scalar identification).
    Linear { field: &'static Field, dim: usize },
    /// Matrices modulo scalars, stored in canonical projective form.
    Projective { field: &'static Field, dim: usize },
    /// Pairs (matrix modulo scalars, Frobenius power), composing as
    /// (A, e)(B, f) = (A sigma^e(B), e + f).
    Semilinear { field: &'static Field, dim: usize },
}

impl fmt::Debug for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKind::Perm { n } => write!(f, "perm({n})"),
            ElementKind::Linear { field, dim } => write!(f, "mat({dim},{:?})", field),
            ElementKind::Projective { field, dim } => write!(f, "proj({dim},{:?})", field),
            ElementKind::Semilinear { field, dim } => write!(f, "semi({dim},{:?})", field),
        }
    }
}

impl ElementKind {
    pub fn perm(n: usize) -> Result<ElementKind> {
        if n == 0 || n > MAX_POINTS {
            return Err(Error::InvalidInput(format!(
                "permutation degree {n} outside 1..={MAX_POINTS}"
            )));
        }
        Ok(ElementKind::Perm { n })
    }

    /// Byte stride of one element in the arena.
    pub fn stride(&self) -> usize {
        match *self {
            ElementKind::Perm { n } => n,
            ElementKind::Linear { dim, .. } | ElementKind::Projective { dim, .. } => dim * dim,
            ElementKind::Semilinear { dim, .. } => dim * dim + 1,
        }
    }

    pub fn identity(&self) -> Vec<u8> {
        match *self {
            ElementKind::Perm { n } => (0..n as u8).collect(),
            ElementKind::Linear { field, dim } | ElementKind::Projective { field, dim } => {
                Matrix::identity(field, dim).data
            }
            ElementKind::Semilinear { field, dim } => {
                let mut v = Matrix::identity(field, dim).data;
                v.push(0);
                v
            }
        }
    }

    /// out = a * b. For permutations (a*b)(i) = a(b(i)).
    pub fn mul(&self, a: &[u8], b: &[u8], out: &mut [u8]) {
        match *self {
            ElementKind::Perm { n } => {
                for i in 0..n {
                    out[i] = a[b[i] as usize];
                }
            }
            ElementKind::Linear { field, dim } => {
                mat_mul_raw(field, dim, a, b, out);
            }
            ElementKind::Projective { field, dim } => {
                mat_mul_raw(field, dim, a, b, out);
                canon_proj(field, out);
            }
            ElementKind::Semilinear { field, dim } => {
                let e = a[dim * dim] as u32;
                let mut bf = [0u8; 144];
                let bf = &mut bf[..dim * dim];
                for (i, &v) in b[..dim * dim].iter().enumerate() {
                    bf[i] = field.frob(e, v);
                }
                mat_mul_raw(field, dim, &a[..dim * dim], bf, &mut out[..dim * dim]);
                canon_proj(field, &mut out[..dim * dim]);
                out[dim * dim] = ((e + b[dim * dim] as u32) % field.k) as u8;
            }
        }
    }

    pub fn inv(&self, a: &[u8], out: &mut [u8]) {
        match *self {
            ElementKind::Perm { n } => {
                for i in 0..n {
                    out[a[i] as usize] = i as u8;
                }
            }
            ElementKind::Linear { field, dim } => {
                let m = Matrix { field, dim, data: a.to_vec() };
                let inv = m.inverse().expect("group element must be invertible");
                out.copy_from_slice(&inv.data);
            }
            ElementKind::Projective { field, dim } => {
                let m = Matrix { field, dim, data: a.to_vec() };
                let inv = m.inverse().expect("group element must be invertible");
                out.copy_from_slice(&inv.data);
                canon_proj(field, out);
            }
            ElementKind::Semilinear { field, dim } => {
                // (A, e)^-1 = (sigma^-e(A^-1), -e)
                let m = Matrix { field, dim, data: a[..dim * dim].to_vec() };
                let inv = m.inverse().expect("group element must be invertible");
                let e = a[dim * dim] as u32;
                let me = (field.k - e % field.k) % field.k;
                for (i, &v) in inv.data.iter().enumerate() {
                    out[i] = field.frob(me, v);
                }
                canon_proj(field, &mut out[..dim * dim]);
                out[dim * dim] = me as u8;
            }
        }
    }

    /// Canonicalizes in place; projective kinds scale the leading entry to 1.
    /// Canonical forms are fixed points of this map.
    pub fn canon(&self, a: &mut [u8]) {
        match *self {
            ElementKind::Perm { .. } | ElementKind::Linear { .. } => {}
            ElementKind::Projective { field, .. } => canon_proj(field, a),
            ElementKind::Semilinear { field, dim } => canon_proj(field, &mut a[..dim * dim]),
        }
    }

    pub fn is_identity(&self, a: &[u8]) -> bool {
        match *self {
            ElementKind::Perm { n } => (0..n).all(|i| a[i] == i as u8),
            ElementKind::Linear { field, dim } | ElementKind::Projective { field, dim } => {
                let _ = field;
                a.iter().enumerate().all(|(i, &v)| v == if i / dim == i % dim { 1 } else { 0 })
            }
            ElementKind::Semilinear { dim, .. } => {
                a[dim * dim] == 0
                    && a[..dim * dim]
                        .iter()
                        .enumerate()
                        .all(|(i, &v)| v == if i / dim == i % dim { 1 } else { 0 })
            }
        }
    }

    pub fn validate(&self, a: &[u8]) -> Result<()> {
        if a.len() != self.stride() {
            return Err(Error::InvalidInput(format!(
                "element payload of {} bytes, kind needs {}",
                a.len(),
                self.stride()
            )));
        }
        match *self {
            ElementKind::Perm { n } => {
                let mut seen = [false; MAX_POINTS];
                for &v in a {
                    if v as usize >= n || seen[v as usize] {
                        return Err(Error::InvalidInput("not a bijection".into()));
                    }
                    seen[v as usize] = true;
                }
            }
            ElementKind::Linear { field, dim }
            | ElementKind::Projective { field, dim }
            | ElementKind::Semilinear { field, dim } => {
                if a[..dim * dim].iter().any(|&v| v as u32 >= field.q) {
                    return Err(Error::InvalidInput("entry outside field".into()));
                }
                let m = Matrix { field, dim, data: a[..dim * dim].to_vec() };
                if m.det() == 0 {
                    return Err(Error::InvalidInput("singular matrix".into()));
                }
                if let ElementKind::Semilinear { .. } = *self {
                    if a[dim * dim] as u32 >= field.k {
                        return Err(Error::InvalidInput("frobenius power out of range".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

fn canon_proj(field: &Field, a: &mut [u8]) {
    if let Some(&lead) = a.iter().find(|&&v| v != 0) {
        if lead != 1 {
            let c = field.inv(lead);
            for v in a.iter_mut() {
                *v = field.mul(*v, c);
            }
        }
    }
}

/// An owned element together with its codec; the API-boundary type.
#[derive(Clone, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    pub data: Vec<u8>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ElementKind::Perm { .. } => write!(f, "perm{:?}", self.data),
            _ => write!(f, "{:?}:{:?}", self.kind, self.data),
        }
    }
}

impl Element {
    pub fn new(kind: ElementKind, mut data: Vec<u8>) -> Result<Element> {
        kind.canon(&mut data);
        kind.validate(&data)?;
        Ok(Element { kind, data })
    }

    pub fn identity(kind: ElementKind) -> Element {
        Element { kind, data: kind.identity() }
    }

    /// Permutation from an image array.
    pub fn perm(images: Vec<u8>) -> Result<Element> {
        let kind = ElementKind::perm(images.len())?;
        Element::new(kind, images)
    }

    /// Permutation of {0..n-1} from disjoint-cycle notation.
    pub fn perm_from_cycles(n: usize, cycles: &[&[u8]]) -> Result<Element> {
        let mut images: Vec<u8> = (0..n as u8).collect();
        for cyc in cycles {
            for i in 0..cyc.len() {
                let from = cyc[i] as usize;
                if from >= n {
                    return Err(Error::InvalidInput("cycle point out of range".into()));
                }
                images[from] = cyc[(i + 1) % cyc.len()];
            }
        }
        Element::perm(images)
    }

    pub fn linear(m: Matrix) -> Element {
        Element {
            kind: ElementKind::Linear { field: m.field, dim: m.dim },
            data: m.data,
        }
    }

    pub fn projective(mut m: Matrix) -> Element {
        m.canonicalize_projective();
        Element {
            kind: ElementKind::Projective { field: m.field, dim: m.dim },
            data: m.data,
        }
    }

    pub fn semilinear(mut m: Matrix, frob: u32) -> Element {
        m.canonicalize_projective();
        let field = m.field;
        let dim = m.dim;
        let mut data = m.data;
        data.push((frob % field.k) as u8);
        Element { kind: ElementKind::Semilinear { field, dim }, data }
    }

    pub fn mul(&self, rhs: &Element) -> Element {
        assert!(self.kind == rhs.kind, "elements of different kinds");
        let mut out = vec![0u8; self.kind.stride()];
        self.kind.mul(&self.data, &rhs.data, &mut out);
        Element { kind: self.kind, data: out }
    }

    pub fn inv(&self) -> Element {
        let mut out = vec![0u8; self.kind.stride()];
        self.kind.inv(&self.data, &mut out);
        Element { kind: self.kind, data: out }
    }

    pub fn is_identity(&self) -> bool {
        self.kind.is_identity(&self.data)
    }

    /// Matrix payload, if this is a matrix-like element.
    pub fn matrix(&self) -> Option<Matrix> {
        match self.kind {
            ElementKind::Linear { field, dim }
            | ElementKind::Projective { field, dim }
            | ElementKind::Semilinear { field, dim } => Some(Matrix {
                field,
                dim,
                data: self.data[..dim * dim].to_vec(),
            }),
            ElementKind::Perm { .. } => None,
        }
    }

    /// JSON-friendly rendering: permutation images or matrix rows.
    pub fn describe(&self) -> ElementRepr {
        match self.kind {
            ElementKind::Perm { .. } => ElementRepr::Perm { images: self.data.clone() },
            ElementKind::Linear { field, dim } | ElementKind::Projective { field, dim } => {
                ElementRepr::Matrix {
                    field: field.spec_string(),
                    rows: self
                        .data
                        .chunks(dim)
                        .map(|r| r.to_vec())
                        .collect(),
                    frob: 0,
                }
            }
            ElementKind::Semilinear { field, dim } => ElementRepr::Matrix {
                field: field.spec_string(),
                rows: self.data[..dim * dim].chunks(dim).map(|r| r.to_vec()).collect(),
                frob: self.data[dim * dim] as u32,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum ElementRepr {
    Perm { images: Vec<u8> },
    Matrix { field: String, rows: Vec<Vec<u8>>, frob: u32 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_compose_and_invert() {
        let a = Element::perm_from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap();
        let b = a.inv();
        assert!(a.mul(&b).is_identity());
        // (a*b)(i) = a(b(i))
        let c = Element::perm_from_cycles(5, &[&[0, 1]]).unwrap();
        let ac = a.mul(&c);
        assert_eq!(ac.data[0], a.data[1]);
    }

    #[test]
    fn projective_canonical_form_is_fixed_point() {
        let f = Field::get(5, 1).unwrap();
        let m = Matrix::new(f, 2, vec![2, 3, 1, 4]).unwrap();
        let e = Element::projective(m.clone());
        let mut again = e.data.clone();
        e.kind.canon(&mut again);
        assert_eq!(again, e.data);
        // scalar multiples collapse
        let e2 = Element::projective(m.scale(3));
        assert_eq!(e, e2);
    }

    #[test]
    fn semilinear_composition_law() {
        // (A, 1)(B, 1) = (A sigma(B), 0) over GF(9)
        let f = Field::get(3, 2).unwrap();
        let g = f.generator;
        let a = Matrix::new(f, 2, vec![1, g, 0, 1]).unwrap();
        let b = Matrix::new(f, 2, vec![1, 0, g, 1]).unwrap();
        let ea = Element::semilinear(a.clone(), 1);
        let eb = Element::semilinear(b.clone(), 1);
        let prod = ea.mul(&eb);
        assert_eq!(prod.data[4], 0);
        let expect = {
            let mut m = a.mul(&b.frobenius(1));
            m.canonicalize_projective();
            m
        };
        assert_eq!(&prod.data[..4], &expect.data[..]);
        // inverse round-trip
        assert!(ea.mul(&ea.inv()).is_identity());
    }

    #[test]
    fn validation_rejects_garbage() {
        assert!(Element::perm(vec![0, 0, 1]).is_err());
        let f = Field::get(3, 1).unwrap();
        let singular = Matrix::new(f, 2, vec![1, 2, 2, 1]).unwrap();
        assert!(Element::new(
            ElementKind::Linear { field: f, dim: 2 },
            singular.data.clone()
        )
        .is_err());
    }
}
