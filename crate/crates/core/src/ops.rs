//! Algebraic operators on tensor fields: the Kulkarni-Nomizu product, the
//! derivation `A . T` induced by a (0,4) curvature-like tensor, and the
//! Tachibana operator `Q(B, T)` induced by a symmetric (0,2) tensor.
//!
//! Sign conventions (fixed once, used everywhere):
//!
//! * `(E ^ F)_abcd = E_ad F_bc - E_ac F_bd + E_bc F_ad - E_bd F_ac`
//! * `(A . T)_{a1..ak ab} = -g^{rs} [ A_{ab a1 s} T_{r a2..ak} + ...
//!   + A_{ab ak s} T_{a1..a(k-1) r} ]`, i.e. minus the sum of `T` with each
//!   slot hit by the endomorphism `A(X, Y)` determined by
//!   `A(X, Y, Z, W) = g(A(X,Y)Z, W)`.
//! * `Q(B, T)_{a1..ak ab} = sum_i [ B_{a a_i} T_{..b@i..} - B_{b a_i} T_{..a@i..} ]`,
//!   i.e. minus the action of the metric endomorphism `X wedge_B Y` with
//!   `(X wedge_B Y)Z = B(Y, Z)X - B(X, Z)Y` on each slot of `T`.
//!
//! Both operator outputs carry the two endomorphism arguments as the *last*
//! two indices and are antisymmetric in them.

use crate::expr::Expr;
use crate::tensor::TensorField;

/// Kulkarni-Nomizu product of two symmetric (0,2) tensor fields.
pub fn kulkarni_nomizu(e: &TensorField, f: &TensorField) -> TensorField {
    assert_eq!(e.rank, 2, "Kulkarni-Nomizu factors must be (0,2) tensors");
    assert_eq!(f.rank, 2, "Kulkarni-Nomizu factors must be (0,2) tensors");
    assert_eq!(e.n, f.n);
    let term = |w: &TensorField, v: &TensorField, i: usize, j: usize, k: usize, l: usize| {
        w.get(&[i, j]).mul(v.get(&[k, l]))
    };
    TensorField::from_fn(e.n, 4, |idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        term(e, f, a, d, b, c)
            .sub(&term(e, f, a, c, b, d))
            .add(&term(f, e, a, d, b, c))
            .sub(&term(f, e, a, c, b, d))
    })
}

/// The derivation `A . T` of a (0,4) curvature-like tensor `A` acting on a
/// (0,k) tensor `T`; `ginv` is the inverse metric. Output rank is k + 2.
pub fn curvature_action(ginv: &[Vec<Expr>], a: &TensorField, t: &TensorField) -> TensorField {
    assert_eq!(a.rank, 4, "the acting tensor must be (0,4)");
    assert_eq!(a.n, t.n);
    let n = t.n;
    let k = t.rank;
    TensorField::from_fn(n, k + 2, |idx| {
        let (slots, endo) = idx.split_at(k);
        let (x, y) = (endo[0], endo[1]);
        let mut acc = Expr::zero();
        for i in 0..k {
            let mut hit = slots.to_vec();
            for r in 0..n {
                for s in 0..n {
                    let gi = &ginv[r][s];
                    if gi.is_zero() {
                        continue;
                    }
                    hit[i] = r;
                    let aval = a.get(&[x, y, slots[i], s]);
                    acc = acc.add(&gi.mul(aval).mul(t.get(&hit)));
                }
            }
            hit[i] = slots[i];
        }
        acc.neg()
    })
}

/// The Tachibana operator `Q(B, T)` of a symmetric (0,2) tensor `B` acting on
/// a (0,k) tensor `T`. Output rank is k + 2.
pub fn q_operator(b: &TensorField, t: &TensorField) -> TensorField {
    assert_eq!(b.rank, 2, "the acting tensor must be (0,2)");
    assert_eq!(b.n, t.n);
    let n = t.n;
    let k = t.rank;
    TensorField::from_fn(n, k + 2, |idx| {
        let (slots, endo) = idx.split_at(k);
        let (x, y) = (endo[0], endo[1]);
        let mut acc = Expr::zero();
        for i in 0..k {
            let mut hit = slots.to_vec();
            hit[i] = y;
            let plus = b.get(&[x, slots[i]]).mul(t.get(&hit));
            hit[i] = x;
            let minus = b.get(&[y, slots[i]]).mul(t.get(&hit));
            acc = acc.add(&plus.sub(&minus));
        }
        acc
    })
}
