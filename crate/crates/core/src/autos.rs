//! Automorphisms in closed form: conjugation composed with an entrywise
//! Frobenius power and an optional transpose-inverse. The induced map on a
//! matrix group is x -> g^-1 ((x^{sigma^e})^{-T if graph}) g; on a
//! permutation group only the conjugation part is meaningful.
//!
//! AutoSpecs compose in closed form (flags add mod the relevant orders), so
//! no automorphism-group enumeration is ever needed to combine them.

use serde::Serialize;

use crate::element::{Element, ElementKind, ElementRepr};
use crate::error::{Error, Result};
use crate::gf::Matrix;

#[derive(Clone, PartialEq, Eq)]
pub struct AutoSpec {
    /// Conjugating element. For matrix groups this may lie in a larger
    /// linear group than the target (a similarity, say); for permutation
    /// groups it is a permutation of the same degree.
    pub conj: Element,
    /// Entrywise Frobenius power.
    pub frob: u32,
    /// Transpose-inverse flag.
    pub graph: bool,
}

impl std::fmt::Debug for AutoSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Auto(g={:?}, frob={}, graph={})", self.conj, self.frob, self.graph)
    }
}

impl AutoSpec {
    pub fn inner(conj: Element) -> AutoSpec {
        AutoSpec { conj, frob: 0, graph: false }
    }

    pub fn identity(kind: ElementKind) -> AutoSpec {
        AutoSpec { conj: Element::identity(kind), frob: 0, graph: false }
    }

    pub fn is_trivial_form(&self) -> bool {
        self.frob == 0 && !self.graph && self.conj.is_identity()
    }

    fn conj_matrix(&self) -> Option<Matrix> {
        self.conj.matrix()
    }

    /// Applies the map to one element payload of the given kind.
    pub fn apply(&self, kind: ElementKind, input: &[u8], out: &mut [u8]) -> Result<()> {
        match kind {
            ElementKind::Perm { n } => {
                if self.frob != 0 || self.graph {
                    return Err(Error::BadAutomorphism(
                        "frobenius/graph flags are meaningless on permutation groups".into(),
                    ));
                }
                let g = &self.conj.data;
                if g.len() != n {
                    return Err(Error::BadAutomorphism("conjugator degree mismatch".into()));
                }
                // x^g = g^-1 x g : (x^g)(i) = g^-1(x(g(i)))
                let mut ginv = [0u8; 32];
                for i in 0..n {
                    ginv[g[i] as usize] = i as u8;
                }
                for i in 0..n {
                    out[i] = ginv[input[g[i] as usize] as usize];
                }
                Ok(())
            }
            ElementKind::Linear { field, dim } | ElementKind::Projective { field, dim } => {
                let g = self
                    .conj_matrix()
                    .ok_or_else(|| Error::BadAutomorphism("conjugator is not a matrix".into()))?;
                if g.dim != dim || !std::ptr::eq(g.field, field) {
                    return Err(Error::BadAutomorphism("conjugator shape mismatch".into()));
                }
                let x = Matrix { field, dim, data: input[..dim * dim].to_vec() };
                let mut y = x.frobenius(self.frob);
                if self.graph {
                    y = y
                        .transpose()
                        .inverse()
                        .ok_or_else(|| Error::BadAutomorphism("singular input".into()))?;
                }
                let ginv = g
                    .inverse()
                    .ok_or_else(|| Error::BadAutomorphism("singular conjugator".into()))?;
                let res = ginv.mul(&y).mul(&g);
                out[..dim * dim].copy_from_slice(&res.data);
                kind.canon(out);
                Ok(())
            }
            ElementKind::Semilinear { field, dim } => {
                // Only conjugation by a semilinear element is supported here;
                // field/graph twists are already elements of this world.
                if self.frob != 0 || self.graph {
                    return Err(Error::BadAutomorphism(
                        "twist flags on a semilinear group must be realized as elements".into(),
                    ));
                }
                if self.conj.kind != kind {
                    return Err(Error::BadAutomorphism("conjugator kind mismatch".into()));
                }
                let _ = (field, dim);
                let stride = kind.stride();
                let mut ginv = vec![0u8; stride];
                kind.inv(&self.conj.data, &mut ginv);
                let mut tmp = vec![0u8; stride];
                kind.mul(&ginv, input, &mut tmp);
                kind.mul(&tmp, &self.conj.data, out);
                Ok(())
            }
        }
    }

    pub fn apply_element(&self, el: &Element) -> Result<Element> {
        let mut out = vec![0u8; el.kind.stride()];
        self.apply(el.kind, &el.data, &mut out)?;
        Ok(Element { kind: el.kind, data: out })
    }

    /// Composition: (self . other)(x) = self(other(x)).
    ///
    /// In closed form the conjugator of the composite is
    /// theta^t1(sigma^e1(g2)) * g1 and the flags add.
    pub fn compose(&self, other: &AutoSpec) -> Result<AutoSpec> {
        match (self.conj.kind, other.conj.kind) {
            (ElementKind::Perm { .. }, ElementKind::Perm { .. }) => {
                Ok(AutoSpec::inner(other.conj.mul(&self.conj)))
            }
            (ElementKind::Semilinear { .. }, ElementKind::Semilinear { .. }) => {
                Ok(AutoSpec::inner(other.conj.mul(&self.conj)))
            }
            _ => {
                let g1 = self
                    .conj_matrix()
                    .ok_or_else(|| Error::BadAutomorphism("conjugator is not a matrix".into()))?;
                let g2 = other
                    .conj_matrix()
                    .ok_or_else(|| Error::BadAutomorphism("conjugator is not a matrix".into()))?;
                if !std::ptr::eq(g1.field, g2.field) || g1.dim != g2.dim {
                    return Err(Error::BadAutomorphism("conjugator shape mismatch".into()));
                }
                let field = g1.field;
                let mut moved = g2.frobenius(self.frob);
                if self.graph {
                    moved = moved
                        .transpose()
                        .inverse()
                        .ok_or_else(|| Error::BadAutomorphism("singular conjugator".into()))?;
                }
                let conj = moved.mul(&g1);
                Ok(AutoSpec {
                    conj: Element::linear(conj),
                    frob: (self.frob + other.frob) % field.k,
                    graph: self.graph != other.graph,
                })
            }
        }
    }

    /// Closed-form inverse: conjugator theta^t(sigma^{-e}(g^-1)), flags kept
    /// (graph is an involution) with the Frobenius power negated.
    pub fn inverse(&self) -> Result<AutoSpec> {
        match self.conj.kind {
            ElementKind::Perm { .. } | ElementKind::Semilinear { .. } => {
                Ok(AutoSpec::inner(self.conj.inv()))
            }
            _ => {
                let g = self
                    .conj_matrix()
                    .ok_or_else(|| Error::BadAutomorphism("conjugator is not a matrix".into()))?;
                let field = g.field;
                let ginv = g
                    .inverse()
                    .ok_or_else(|| Error::BadAutomorphism("singular conjugator".into()))?;
                let me = (field.k - self.frob % field.k) % field.k;
                let mut moved = ginv.frobenius(me);
                if self.graph {
                    moved = moved
                        .transpose()
                        .inverse()
                        .ok_or_else(|| Error::BadAutomorphism("singular conjugator".into()))?;
                }
                Ok(AutoSpec { conj: Element::linear(moved), frob: me, graph: self.graph })
            }
        }
    }

    pub fn describe(&self) -> AutoRepr {
        AutoRepr {
            g: self.conj.describe(),
            frob: self.frob,
            graph: if self.graph { 1 } else { 0 },
        }
    }
}

/// Serialized form: {"g": element, "frob": e, "graph": 0|1}.
#[derive(Clone, Debug, Serialize)]
pub struct AutoRepr {
    pub g: ElementRepr,
    pub frob: u32,
    pub graph: u8,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    #[test]
    fn compose_matches_pointwise_application() {
        let f = Field::get(3, 2).unwrap();
        let kind = ElementKind::Projective { field: f, dim: 2 };
        let g1 = Matrix::new(f, 2, vec![1, 1, 0, 1]).unwrap();
        let g2 = Matrix::new(f, 2, vec![f.generator, 0, 0, 1]).unwrap();
        let a1 = AutoSpec { conj: Element::linear(g1), frob: 1, graph: true };
        let a2 = AutoSpec { conj: Element::linear(g2), frob: 1, graph: false };
        let comp = a1.compose(&a2).unwrap();

        let x = Element::projective(Matrix::new(f, 2, vec![1, 2, 1, 1]).unwrap());
        let via_comp = comp.apply_element(&x).unwrap();
        let via_steps = a1.apply_element(&a2.apply_element(&x).unwrap()).unwrap();
        assert_eq!(via_comp, via_steps);
    }

    #[test]
    fn inverse_undoes_the_map() {
        let f = Field::get(2, 2).unwrap();
        let kind = ElementKind::Projective { field: f, dim: 3 };
        let _ = kind;
        let g = Matrix::new(f, 3, vec![1, 1, 0, 0, 1, 0, 0, 0, 1]).unwrap();
        let a = AutoSpec { conj: Element::linear(g), frob: 1, graph: true };
        let ainv = a.inverse().unwrap();
        let x = Element::projective(Matrix::new(f, 3, vec![1, 0, 1, 0, 1, 1, 1, 0, 0]).unwrap());
        let round = ainv.apply_element(&a.apply_element(&x).unwrap()).unwrap();
        assert_eq!(round, x);
    }

    #[test]
    fn perm_conjugation_action() {
        let g = Element::perm_from_cycles(4, &[&[0, 1]]).unwrap();
        let a = AutoSpec::inner(g);
        let x = Element::perm_from_cycles(4, &[&[0, 2, 3]]).unwrap();
        let y = a.apply_element(&x).unwrap();
        // x^g computed directly
        let gi = a.conj.inv();
        let expect = gi.mul(&x).mul(&a.conj);
        assert_eq!(y, expect);
    }
}
