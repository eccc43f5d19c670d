//! R-matrix factory: full R(x) and its inverse, the four blocks R^(ε1,ε2)(x)
//! and their inverses, R̃(x), the dressing factors with a dual leg, and the
//! finite values at x = 1. Plus the Yang–Baxter, inverse and A4-type checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residual::{max_all, Residual};
use crate::scalar_field::{inverse, FieldCtx, Scalar};
use crate::tensor_alg::{epsilon, signed_indices, theta, LegSpace, SparseOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn eps(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
    pub fn from_eps(e: i32) -> Sign {
        if e > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
    pub fn all() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RKind {
    Full,
    FullInv,
    Block(Sign, Sign),
    BlockInv(Sign, Sign),
    Tilde,
    TildeInv,
    /// (R̂^(+,+)_{0,j*})⁻¹ on V₊ ⊗ V₊*
    DressPlusLeft,
    /// R̂^(+,−)_{0,j} on V₊ ⊗ V₋
    DressPlusRight,
    /// (R̂^(−,+)_{0,j*})⁻¹ on V₋ ⊗ V₊*
    DressMinusLeft,
    /// R̂^(−,−)_{0,j} on V₋ ⊗ V₋
    DressMinusRight,
    /// (R^(+,+))⁻¹ with both legs dual, used when reordering B-operators
    ExchangePPDual,
    /// (R̂^(+,+)_{0,j*}(1))⁻¹ = Σ E^i_k ⊗ F^k_i
    SpecialPP1,
    /// R^(+,−)(1)
    SpecialPM1,
    /// R^(−,−)(1) = Σ E^{−i}_{−k} ⊗ E^{−k}_{−i}
    SpecialMM1,
    Ppp,
    Qpm,
    /// Inverse of R^(+,−) as written when proving the mixed relation
    A3MixedInv,
}

/// A concrete R-matrix with its provenance.
#[derive(Clone, Debug)]
pub struct RBlock<S> {
    pub kind: RKind,
    pub x: Option<S>,
    pub op: SparseOp<S>,
}

/// Evaluation point of a dressing factor: a generic ratio, or exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg<S> {
    Ratio(S),
    One,
}

type Term<S> = (S, [(i32, i32); 2]);

fn materialize<S: Scalar>(legs: [LegSpace; 2], terms: Vec<Term<S>>) -> Result<SparseOp<S>> {
    let mut op = SparseOp::zero(legs.to_vec());
    for (c, u) in terms {
        op.add_term(c, &u)?;
    }
    Ok(op)
}

fn qe<S: Scalar>(ctx: &FieldCtx<S>, m: i32) -> S {
    ctx.qpow(m)
}

fn sgn<S: Scalar>(v: S, s: i32) -> S {
    if s > 0 {
        v
    } else {
        -v
    }
}

fn alpha_recip<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<S> {
    ctx.alpha(x)?
        .inv()
        .ok_or_else(|| Error::AlphaZero(format!("α({}) = 0", x.render())))
}

fn full_terms<S: Scalar>(ctx: &FieldCtx<S>, x: &S, inv: bool) -> Result<Vec<Term<S>>> {
    let n = ctx.n() as i32;
    let idx = signed_indices(ctx.n());
    let xi = inverse(x)?;
    let one = S::one();
    let mut t: Vec<Term<S>> = Vec::new();
    for &i in &idx {
        for &k in &idx {
            if i != k && i != -k {
                t.push((one.clone(), [(i, i), (k, k)]));
            }
        }
    }
    let (same, cross) = if inv {
        (ctx.f(&xi)?, ctx.f(&(x.clone() * qe(ctx, -n - 1)))?)
    } else {
        (ctx.f(x)?, ctx.f(&(xi.clone() * qe(ctx, -n - 1)))?)
    };
    for &i in &idx {
        t.push((same.clone(), [(i, i), (i, i)]));
        t.push((cross.clone(), [(i, i), (-i, -i)]));
    }
    let (sw_lo, sw_hi, cr_lo, cr_hi) = if inv {
        (
            -ctx.g(x)?,
            ctx.g(&xi)?,
            ctx.g(&(x.clone() * qe(ctx, -n - 1)))?,
            -ctx.g(&(xi.clone() * qe(ctx, n + 1)))?,
        )
    } else {
        (
            ctx.g(x)?,
            -ctx.g(&xi)?,
            -ctx.g(&(x.clone() * qe(ctx, n + 1)))?,
            ctx.g(&(xi.clone() * qe(ctx, -n - 1)))?,
        )
    };
    for &i in &idx {
        for &k in &idx {
            let ee = epsilon(i) * epsilon(k);
            // the q power is q^{k−i} in R and q^{i−k} in R⁻¹
            let p = if inv { i - k } else { k - i };
            if k < i {
                t.push((sw_lo.clone(), [(i, k), (k, i)]));
                t.push((sgn(cr_lo.clone() * qe(ctx, p), ee), [(i, k), (-i, -k)]));
            } else if i < k {
                t.push((sw_hi.clone(), [(i, k), (k, i)]));
                t.push((sgn(cr_hi.clone() * qe(ctx, p), ee), [(i, k), (-i, -k)]));
            }
        }
    }
    let a = if inv {
        alpha_recip(ctx, &xi)?
    } else {
        alpha_recip(ctx, x)?
    };
    Ok(t.into_iter().map(|(c, u)| (c * a.clone(), u)).collect())
}

fn perturb<S: Scalar>(ctx: &FieldCtx<S>, op: &mut SparseOp<S>) -> Result<()> {
    if let Some(d) = ctx.perturbation() {
        op.add_term(d.clone(), &[(1, 1), (1, 1)])?;
    }
    Ok(())
}

pub fn build_full_r<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    let l = LegSpace::full(ctx.n());
    let mut op = materialize([l, l], full_terms(ctx, x, false)?)?;
    perturb(ctx, &mut op)?;
    Ok(RBlock {
        kind: RKind::Full,
        x: Some(x.clone()),
        op,
    })
}

pub fn build_full_r_inv<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    let l = LegSpace::full(ctx.n());
    Ok(RBlock {
        kind: RKind::FullInv,
        x: Some(x.clone()),
        op: materialize([l, l], full_terms(ctx, x, true)?)?,
    })
}

/// Terms of R^(ε1,ε2)(x) or its inverse, with indices carrying their signs.
fn block_terms<S: Scalar>(
    ctx: &FieldCtx<S>,
    e1: Sign,
    e2: Sign,
    x: &S,
    inv: bool,
) -> Result<Vec<Term<S>>> {
    let n = ctx.n() as i32;
    let xi = inverse(x)?;
    let q = ctx.q().clone();
    let qi = ctx.qpow(-1);
    let one = S::one();
    let pos: Vec<i32> = (1..=n).collect();
    let mut t: Vec<Term<S>> = Vec::new();
    match (e1, e2) {
        (Sign::Plus, Sign::Plus) | (Sign::Minus, Sign::Minus) => {
            let s = e1.eps();
            let pre = if inv {
                ctx.f_recip(&xi)?
            } else {
                ctx.f_recip(x)?
            };
            let (gx, gxi) = (ctx.g(x)?, ctx.g(&xi)?);
            // coefficient of the swap E^i_k ⊗ E^k_i: "low" when k < i in the
            // plus block (i < k in the minus block)
            let (low, high) = if inv {
                (-gx * pre.clone(), gxi * pre.clone())
            } else {
                (gx * pre.clone(), -gxi * pre.clone())
            };
            for &i in &pos {
                for &k in &pos {
                    if i != k {
                        t.push((pre.clone(), [(s * i, s * i), (s * k, s * k)]));
                    }
                }
                t.push((one.clone(), [(s * i, s * i), (s * i, s * i)]));
                for &k in &pos {
                    if i == k {
                        continue;
                    }
                    let c = if (s > 0 && k < i) || (s < 0 && i < k) {
                        low.clone()
                    } else {
                        high.clone()
                    };
                    t.push((c, [(s * i, s * k), (s * k, s * i)]));
                }
            }
        }
        (Sign::Plus, Sign::Minus) => {
            let (diag, low, high, p_sign) = if inv {
                (
                    ctx.f(&(x.clone() * qe(ctx, -n - 1)))?,
                    ctx.g(&(x.clone() * qe(ctx, -n - 1)))?,
                    -ctx.g(&(xi.clone() * qe(ctx, n + 1)))?,
                    1,
                )
            } else {
                (
                    ctx.f(&(xi.clone() * q.clone()))?,
                    -ctx.g(&(x.clone() * qi.clone()))?,
                    ctx.g(&(xi.clone() * q.clone()))?,
                    -1,
                )
            };
            for &i in &pos {
                for &k in &pos {
                    if i != k {
                        t.push((one.clone(), [(i, i), (-k, -k)]));
                    }
                }
                t.push((diag.clone(), [(i, i), (-i, -i)]));
                for &k in &pos {
                    let p = qe(ctx, p_sign * (i - k));
                    if k < i {
                        t.push((low.clone() * p, [(i, k), (-i, -k)]));
                    } else if i < k {
                        t.push((high.clone() * p, [(i, k), (-i, -k)]));
                    }
                }
            }
        }
        (Sign::Minus, Sign::Plus) => {
            // family E^{−i}_{−k} ⊗ E^i_k; "lt" is the i < k coefficient
            let (diag, lt, gt, p_sign) = if inv {
                (
                    ctx.f(&(x.clone() * q.clone()))?,
                    ctx.g(&(x.clone() * q.clone()))?,
                    -ctx.g(&(xi.clone() * qi.clone()))?,
                    -1,
                )
            } else {
                (
                    ctx.f(&(xi.clone() * qe(ctx, -n - 1)))?,
                    -ctx.g(&(x.clone() * qe(ctx, n + 1)))?,
                    ctx.g(&(xi.clone() * qe(ctx, -n - 1)))?,
                    1,
                )
            };
            for &i in &pos {
                for &k in &pos {
                    if i != k {
                        t.push((one.clone(), [(-i, -i), (k, k)]));
                    }
                }
                t.push((diag.clone(), [(-i, -i), (i, i)]));
                for &k in &pos {
                    let p = qe(ctx, p_sign * (i - k));
                    if i < k {
                        t.push((lt.clone() * p, [(-i, -k), (i, k)]));
                    } else if k < i {
                        t.push((gt.clone() * p, [(-i, -k), (i, k)]));
                    }
                }
            }
        }
    }
    Ok(t)
}

fn half_legs(n: usize, e1: Sign, e2: Sign) -> [LegSpace; 2] {
    [LegSpace::half(n, e1.eps()), LegSpace::half(n, e2.eps())]
}

pub fn build_block_r<S: Scalar>(ctx: &FieldCtx<S>, e1: Sign, e2: Sign, x: &S) -> Result<RBlock<S>> {
    let mut op = materialize(
        half_legs(ctx.n(), e1, e2),
        block_terms(ctx, e1, e2, x, false)?,
    )?;
    if (e1, e2) == (Sign::Plus, Sign::Plus) {
        perturb(ctx, &mut op)?;
    }
    Ok(RBlock {
        kind: RKind::Block(e1, e2),
        x: Some(x.clone()),
        op,
    })
}

pub fn build_block_r_inv<S: Scalar>(
    ctx: &FieldCtx<S>,
    e1: Sign,
    e2: Sign,
    x: &S,
) -> Result<RBlock<S>> {
    Ok(RBlock {
        kind: RKind::BlockInv(e1, e2),
        x: Some(x.clone()),
        op: materialize(
            half_legs(ctx.n(), e1, e2),
            block_terms(ctx, e1, e2, x, true)?,
        )?,
    })
}

fn tilde<S: Scalar>(ctx: &FieldCtx<S>, x: &S, inv: bool) -> Result<SparseOp<S>> {
    let l = LegSpace::full(ctx.n());
    let mut acc = SparseOp::zero(vec![l, l]);
    for e1 in Sign::all() {
        for e2 in Sign::all() {
            let b = if inv {
                build_block_r_inv(ctx, e1, e2, x)?
            } else {
                build_block_r(ctx, e1, e2, x)?
            };
            let lifted = b.op.relabel_leg(0, l)?.relabel_leg(1, l)?;
            acc = acc.add(&lifted)?;
        }
    }
    Ok(acc)
}

pub fn build_tilde_r<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    Ok(RBlock {
        kind: RKind::Tilde,
        x: Some(x.clone()),
        op: tilde(ctx, x, false)?,
    })
}

pub fn build_tilde_r_inv<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    Ok(RBlock {
        kind: RKind::TildeInv,
        x: Some(x.clone()),
        op: tilde(ctx, x, true)?,
    })
}

/// (R^(+,−)(x))⁻¹ in the form written out for the mixed relation.
pub fn build_a3_mixed_inv<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    let n = ctx.n() as i32;
    let y = x.clone() * qe(ctx, -n - 1);
    let z = inverse(x)? * qe(ctx, n + 1);
    let mut op = SparseOp::zero(half_legs(ctx.n(), Sign::Plus, Sign::Minus).to_vec());
    for i in 1..=n {
        for k in 1..=n {
            if i != k {
                op.add_term(S::one(), &[(i, i), (-k, -k)])?;
            }
        }
        op.add_term(ctx.f(&y)?, &[(i, i), (-i, -i)])?;
    }
    for i in 1..=n {
        for k in 1..i {
            op.add_term(ctx.g(&y)? * qe(ctx, i - k), &[(i, k), (-i, -k)])?;
        }
        for k in i + 1..=n {
            op.add_term(-ctx.g(&z)? * qe(ctx, i - k), &[(i, k), (-i, -k)])?;
        }
    }
    Ok(RBlock {
        kind: RKind::A3MixedInv,
        x: Some(x.clone()),
        op,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dressing {
    PlusLeft,
    PlusRight,
    MinusLeft,
    MinusRight,
}

impl Dressing {
    pub fn left(s: Sign) -> Self {
        match s {
            Sign::Plus => Dressing::PlusLeft,
            Sign::Minus => Dressing::MinusLeft,
        }
    }
    pub fn right(s: Sign) -> Self {
        match s {
            Sign::Plus => Dressing::PlusRight,
            Sign::Minus => Dressing::MinusRight,
        }
    }
}

/// The four §5 dressing factors. Left factors carry the dual leg V₊* in
/// position 1; a dual leg is the partial transpose of the primal block.
pub fn build_dressing_factor<S: Scalar>(
    ctx: &FieldCtx<S>,
    which: Dressing,
    arg: &Arg<S>,
) -> Result<RBlock<S>> {
    let n = ctx.n();
    let (kind, legs, terms) = match (which, arg) {
        (Dressing::PlusLeft, Arg::Ratio(x)) => (
            RKind::DressPlusLeft,
            [LegSpace::plus(n), LegSpace::plus_dual(n)],
            block_terms(ctx, Sign::Plus, Sign::Plus, x, true)?,
        ),
        (Dressing::PlusLeft, Arg::One) => {
            let mut sv = special_pp1(ctx)?;
            sv.x = None;
            return Ok(sv);
        }
        (Dressing::MinusLeft, a) => {
            let x = match a {
                Arg::Ratio(x) => x.clone(),
                Arg::One => S::one(),
            };
            (
                RKind::DressMinusLeft,
                [LegSpace::minus(n), LegSpace::plus_dual(n)],
                block_terms(ctx, Sign::Minus, Sign::Plus, &x, true)?,
            )
        }
        (Dressing::PlusRight, Arg::Ratio(x)) => (
            RKind::DressPlusRight,
            [LegSpace::plus(n), LegSpace::minus(n)],
            block_terms(ctx, Sign::Plus, Sign::Minus, x, false)?,
        ),
        (Dressing::PlusRight, Arg::One) => return special_pm1(ctx),
        (Dressing::MinusRight, Arg::Ratio(x)) => (
            RKind::DressMinusRight,
            [LegSpace::minus(n), LegSpace::minus(n)],
            block_terms(ctx, Sign::Minus, Sign::Minus, x, false)?,
        ),
        (Dressing::MinusRight, Arg::One) => return special_mm1(ctx),
    };
    let x = match arg {
        Arg::Ratio(x) => Some(x.clone()),
        Arg::One => Some(S::one()),
    };
    Ok(RBlock {
        kind,
        x,
        op: materialize(legs, terms)?,
    })
}

/// (R^(+,+)(x))⁻¹ with both legs dual.
pub fn build_exchange_pp_dual<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<RBlock<S>> {
    let n = ctx.n();
    Ok(RBlock {
        kind: RKind::ExchangePPDual,
        x: Some(x.clone()),
        op: materialize(
            [LegSpace::plus_dual(n), LegSpace::plus_dual(n)],
            block_terms(ctx, Sign::Plus, Sign::Plus, x, true)?,
        )?,
    })
}

fn swap_op<S: Scalar>(legs: [LegSpace; 2], s: i32, n: usize) -> Result<SparseOp<S>> {
    let mut op = SparseOp::zero(legs.to_vec());
    for i in 1..=n as i32 {
        for k in 1..=n as i32 {
            op.add_term(S::one(), &[(s * i, s * k), (s * k, s * i)])?;
        }
    }
    Ok(op)
}

pub fn special_ppp<S: Scalar>(ctx: &FieldCtx<S>) -> Result<RBlock<S>> {
    let n = ctx.n();
    Ok(RBlock {
        kind: RKind::Ppp,
        x: None,
        op: swap_op([LegSpace::plus(n), LegSpace::plus(n)], 1, n)?,
    })
}

pub fn special_pp1<S: Scalar>(ctx: &FieldCtx<S>) -> Result<RBlock<S>> {
    let n = ctx.n();
    Ok(RBlock {
        kind: RKind::SpecialPP1,
        x: None,
        op: swap_op([LegSpace::plus(n), LegSpace::plus_dual(n)], 1, n)?,
    })
}

pub fn special_mm1<S: Scalar>(ctx: &FieldCtx<S>) -> Result<RBlock<S>> {
    let n = ctx.n();
    Ok(RBlock {
        kind: RKind::SpecialMM1,
        x: None,
        op: swap_op([LegSpace::minus(n), LegSpace::minus(n)], -1, n)?,
    })
}

pub fn special_qpm<S: Scalar>(ctx: &FieldCtx<S>) -> Result<RBlock<S>> {
    let n = ctx.n() as i32;
    let mut op = SparseOp::zero(half_legs(ctx.n(), Sign::Plus, Sign::Minus).to_vec());
    for i in 1..=n {
        for k in 1..=n {
            op.add_term(qe(ctx, i + k), &[(i, k), (-i, -k)])?;
        }
    }
    Ok(RBlock {
        kind: RKind::Qpm,
        x: None,
        op,
    })
}

pub fn special_pm1<S: Scalar>(ctx: &FieldCtx<S>) -> Result<RBlock<S>> {
    let n = ctx.n() as i32;
    let q = ctx.q().clone();
    let mut op = SparseOp::zero(half_legs(ctx.n(), Sign::Plus, Sign::Minus).to_vec());
    for i in 1..=n {
        for k in 1..=n {
            if i != k {
                op.add_term(S::one(), &[(i, i), (-k, -k)])?;
            }
        }
        op.add_term(q.clone() + ctx.qpow(-1), &[(i, i), (-i, -i)])?;
        for k in 1..=n {
            if k < i {
                op.add_term(qe(ctx, k - i - 1), &[(i, k), (-i, -k)])?;
            } else if i < k {
                op.add_term(qe(ctx, k - i + 1), &[(i, k), (-i, -k)])?;
            }
        }
    }
    Ok(RBlock {
        kind: RKind::SpecialPM1,
        x: None,
        op,
    })
}

pub struct SpecialValues<S> {
    pub ppp: RBlock<S>,
    pub qpm: RBlock<S>,
    pub pp1: RBlock<S>,
    pub pm1: RBlock<S>,
    pub mm1: RBlock<S>,
}

pub fn special_values<S: Scalar>(ctx: &FieldCtx<S>) -> Result<SpecialValues<S>> {
    Ok(SpecialValues {
        ppp: special_ppp(ctx)?,
        qpm: special_qpm(ctx)?,
        pp1: special_pp1(ctx)?,
        pm1: special_pm1(ctx)?,
        mm1: special_mm1(ctx)?,
    })
}

// ---------------------------------------------------------------------------
// closed-form coefficients of the dressing factors

fn delta(a: i32, b: i32) -> bool {
    a == b
}

fn th<S: Scalar>(m: i32) -> S {
    S::from_i64(theta(m) as i64)
}

fn ind<S: Scalar>(b: bool) -> S {
    if b {
        S::one()
    } else {
        S::zero()
    }
}

/// R̂^{r,a}_{s,b}: coefficient of E^s_r ⊗ F^b_a in (R̂^(+,+)_{0,j*})⁻¹. All indices positive.
pub fn a8_pp<S: Scalar>(
    ctx: &FieldCtx<S>,
    arg: &Arg<S>,
    r: i32,
    a: i32,
    s: i32,
    b: i32,
) -> Result<S> {
    let x = match arg {
        Arg::One => return Ok(ind(delta(r, b) && delta(a, s))),
        Arg::Ratio(x) => x,
    };
    let xi = inverse(x)?;
    let fxi = ctx.f(&xi)?;
    let mut v = S::zero();
    if delta(r, s) && delta(a, b) {
        v = v + if r == a { fxi.clone() } else { S::one() };
    }
    if delta(r, b) && delta(a, s) {
        v = v + ctx.g(&xi)? * th(r - s) - ctx.g(x)? * th(s - r);
    }
    let inv = fxi
        .inv()
        .ok_or_else(|| Error::FZero(format!("f({}) = 0", xi.render())))?;
    Ok(v * inv)
}

/// R̂^{p,−c}_{q,−d}: coefficient of E^q_p ⊗ E^{−d}_{−c} in R̂^(+,−)_{0,j}.
pub fn a8_pm<S: Scalar>(
    ctx: &FieldCtx<S>,
    arg: &Arg<S>,
    p: i32,
    c: i32,
    q: i32,
    d: i32,
) -> Result<S> {
    let x = match arg {
        Arg::One => S::one(),
        Arg::Ratio(x) => x.clone(),
    };
    let xi = inverse(&x)?;
    let qq = ctx.q().clone();
    let mut v = S::zero();
    if delta(p, q) && delta(c, d) {
        v = v + if p == c {
            ctx.f(&(xi.clone() * qq.clone()))?
        } else {
            S::one()
        };
    }
    if delta(p, c) && delta(q, d) {
        let t = ctx.g(&(xi * qq.clone()))? * th(p - q) - ctx.g(&(x * ctx.qpow(-1)))? * th(q - p);
        v = v + t * ctx.qpow(p - q);
    }
    Ok(v)
}

/// R̂^{−r,a}_{−s,b}: coefficient of E^{−s}_{−r} ⊗ F^b_a in (R̂^(−,+)_{0,j*})⁻¹.
pub fn a8_mp<S: Scalar>(
    ctx: &FieldCtx<S>,
    arg: &Arg<S>,
    r: i32,
    a: i32,
    s: i32,
    b: i32,
) -> Result<S> {
    let x = match arg {
        Arg::One => S::one(),
        Arg::Ratio(x) => x.clone(),
    };
    let xi = inverse(&x)?;
    let qq = ctx.q().clone();
    let mut v = S::zero();
    if delta(r, s) && delta(a, b) {
        v = v + if r == a {
            ctx.f(&(x.clone() * qq.clone()))?
        } else {
            S::one()
        };
    }
    if delta(r, a) && delta(s, b) {
        let t = ctx.g(&(x * qq))? * th(r - s) - ctx.g(&(xi * ctx.qpow(-1)))? * th(s - r);
        v = v + t * ctx.qpow(r - s);
    }
    Ok(v)
}

/// R̂^{−p,−c}_{−q,−d}: coefficient of E^{−q}_{−p} ⊗ E^{−d}_{−c} in R̂^(−,−)_{0,j}.
pub fn a8_mm<S: Scalar>(
    ctx: &FieldCtx<S>,
    arg: &Arg<S>,
    p: i32,
    c: i32,
    q: i32,
    d: i32,
) -> Result<S> {
    let x = match arg {
        Arg::One => return Ok(ind(delta(p, d) && delta(c, q))),
        Arg::Ratio(x) => x,
    };
    let xi = inverse(x)?;
    let fx = ctx.f(x)?;
    let mut v = S::zero();
    if delta(p, q) && delta(c, d) {
        v = v + if p == c { fx.clone() } else { S::one() };
    }
    if delta(p, d) && delta(c, q) {
        v = v + ctx.g(x)? * th(p - q) - ctx.g(&xi)? * th(q - p);
    }
    let inv = fx
        .inv()
        .ok_or_else(|| Error::FZero(format!("f({}) = 0", x.render())))?;
    Ok(v * inv)
}

/// Max residual between a dressing factor and its closed-form coefficients,
/// over every index combination.
pub fn verify_dressing_closed_forms<S: Scalar>(
    ctx: &FieldCtx<S>,
    arg: &Arg<S>,
) -> Result<Residual> {
    let n = ctx.n() as i32;
    let mut out = Vec::new();
    for which in [
        Dressing::PlusLeft,
        Dressing::PlusRight,
        Dressing::MinusLeft,
        Dressing::MinusRight,
    ] {
        let op = build_dressing_factor(ctx, which, arg)?.op;
        let mut closed = SparseOp::zero(op.legs().to_vec());
        for a1 in 1..=n {
            for a2 in 1..=n {
                for a3 in 1..=n {
                    for a4 in 1..=n {
                        let (c, units) = match which {
                            Dressing::PlusLeft => {
                                (a8_pp(ctx, arg, a1, a2, a3, a4)?, [(a3, a1), (a4, a2)])
                            }
                            Dressing::PlusRight => {
                                (a8_pm(ctx, arg, a1, a2, a3, a4)?, [(a3, a1), (-a4, -a2)])
                            }
                            Dressing::MinusLeft => {
                                (a8_mp(ctx, arg, a1, a2, a3, a4)?, [(-a3, -a1), (a4, a2)])
                            }
                            Dressing::MinusRight => {
                                (a8_mm(ctx, arg, a1, a2, a3, a4)?, [(-a3, -a1), (-a4, -a2)])
                            }
                        };
                        closed.add_term(c, &units)?;
                    }
                }
            }
        }
        out.push(Residual::of_ops(&op, &closed)?);
    }
    Ok(max_all(S::BACKEND, out))
}

// ---------------------------------------------------------------------------
// verifiers

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum YbeFamily {
    Full,
    Tilde,
    Block(Sign, Sign, Sign),
    /// R₁₂(x) R̂_{2,3*}(y) R̂_{1,3*}(xy) = R̂_{1,3*}(xy) R̂_{2,3*}(y) R₁₂(x)
    DualA,
    /// R̂_{1,3*}(xy) R̂_{1,2*}(x) R̂_{2*,3*}(y) = R̂_{2*,3*}(y) R̂_{1,2*}(x) R̂_{1,3*}(xy)
    DualB,
    /// all three legs dual
    DualC,
}

impl YbeFamily {
    pub fn all() -> Vec<YbeFamily> {
        let mut v = vec![YbeFamily::Full, YbeFamily::Tilde];
        for a in Sign::all() {
            for b in Sign::all() {
                for c in Sign::all() {
                    v.push(YbeFamily::Block(a, b, c));
                }
            }
        }
        v.extend([YbeFamily::DualA, YbeFamily::DualB, YbeFamily::DualC]);
        v
    }

    pub fn label(&self) -> String {
        match self {
            YbeFamily::Full => "full".into(),
            YbeFamily::Tilde => "tilde".into(),
            YbeFamily::Block(a, b, c) => {
                format!("block({},{},{})", a.symbol(), b.symbol(), c.symbol())
            }
            YbeFamily::DualA => "dual-a".into(),
            YbeFamily::DualB => "dual-b".into(),
            YbeFamily::DualC => "dual-c".into(),
        }
    }
}

fn on3<S: Scalar>(op: &SparseOp<S>, legs: &[LegSpace], at: [usize; 2]) -> Result<SparseOp<S>> {
    op.embed(legs, &at)
}

/// R^(+,+) with the chosen legs made dual (partial transposes).
fn pp_dual<S: Scalar>(ctx: &FieldCtx<S>, x: &S, first_dual: bool) -> Result<SparseOp<S>> {
    let n = ctx.n();
    let mut terms = block_terms(ctx, Sign::Plus, Sign::Plus, x, false)?;
    if let Some(d) = ctx.perturbation() {
        terms.push((d.clone(), [(1, 1), (1, 1)]));
    }
    let l0 = if first_dual {
        LegSpace::plus_dual(n)
    } else {
        LegSpace::plus(n)
    };
    materialize([l0, LegSpace::plus_dual(n)], terms)
}

pub fn verify_ybe<S: Scalar>(
    ctx: &FieldCtx<S>,
    family: YbeFamily,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let xy = x.clone() * y.clone();
    let n = ctx.n();
    let (lhs, rhs) = match family {
        YbeFamily::Full | YbeFamily::Tilde | YbeFamily::Block(..) => {
            let (r12, r13, r23, legs) = match family {
                YbeFamily::Full => {
                    let l = LegSpace::full(n);
                    (
                        build_full_r(ctx, x)?.op,
                        build_full_r(ctx, &xy)?.op,
                        build_full_r(ctx, y)?.op,
                        vec![l, l, l],
                    )
                }
                YbeFamily::Tilde => {
                    let l = LegSpace::full(n);
                    (
                        build_tilde_r(ctx, x)?.op,
                        build_tilde_r(ctx, &xy)?.op,
                        build_tilde_r(ctx, y)?.op,
                        vec![l, l, l],
                    )
                }
                YbeFamily::Block(a, b, c) => (
                    build_block_r(ctx, a, b, x)?.op,
                    build_block_r(ctx, a, c, &xy)?.op,
                    build_block_r(ctx, b, c, y)?.op,
                    vec![
                        LegSpace::half(n, a.eps()),
                        LegSpace::half(n, b.eps()),
                        LegSpace::half(n, c.eps()),
                    ],
                ),
                _ => unreachable!(),
            };
            let a12 = on3(&r12, &legs, [0, 1])?;
            let a13 = on3(&r13, &legs, [0, 2])?;
            let a23 = on3(&r23, &legs, [1, 2])?;
            (a12.mul(&a13)?.mul(&a23)?, a23.mul(&a13)?.mul(&a12)?)
        }
        YbeFamily::DualA => {
            let legs = vec![LegSpace::plus(n), LegSpace::plus(n), LegSpace::plus_dual(n)];
            let r12 = on3(
                &build_block_r(ctx, Sign::Plus, Sign::Plus, x)?.op,
                &legs,
                [0, 1],
            )?;
            let r23 = on3(&pp_dual(ctx, y, false)?, &legs, [1, 2])?;
            let r13 = on3(&pp_dual(ctx, &xy, false)?, &legs, [0, 2])?;
            (r12.mul(&r23)?.mul(&r13)?, r13.mul(&r23)?.mul(&r12)?)
        }
        YbeFamily::DualB => {
            let legs = vec![
                LegSpace::plus(n),
                LegSpace::plus_dual(n),
                LegSpace::plus_dual(n),
            ];
            let r13 = on3(&pp_dual(ctx, &xy, false)?, &legs, [0, 2])?;
            let r12 = on3(&pp_dual(ctx, x, false)?, &legs, [0, 1])?;
            let r23 = on3(&pp_dual(ctx, y, true)?, &legs, [1, 2])?;
            (r13.mul(&r12)?.mul(&r23)?, r23.mul(&r12)?.mul(&r13)?)
        }
        YbeFamily::DualC => {
            let l = LegSpace::plus_dual(n);
            let legs = vec![l, l, l];
            let r12 = on3(&pp_dual(ctx, x, true)?, &legs, [0, 1])?;
            let r13 = on3(&pp_dual(ctx, &xy, true)?, &legs, [0, 2])?;
            let r23 = on3(&pp_dual(ctx, y, true)?, &legs, [1, 2])?;
            (r12.mul(&r13)?.mul(&r23)?, r23.mul(&r13)?.mul(&r12)?)
        }
    };
    Residual::of_ops(&lhs, &rhs)
}

/// Named residuals for every inverse pair at x.
pub fn verify_inverses<S: Scalar>(ctx: &FieldCtx<S>, x: &S) -> Result<Vec<(String, Residual)>> {
    let mut out = Vec::new();
    let both = |a: &SparseOp<S>, b: &SparseOp<S>| -> Result<Residual> {
        let id = SparseOp::identity(a.legs().to_vec());
        Ok(Residual::of_ops(&a.mul(b)?, &id)?.max(Residual::of_ops(&b.mul(a)?, &id)?))
    };
    out.push((
        "full".to_string(),
        both(&build_full_r(ctx, x)?.op, &build_full_r_inv(ctx, x)?.op)?,
    ));
    for e1 in Sign::all() {
        for e2 in Sign::all() {
            out.push((
                format!("block({},{})", e1.symbol(), e2.symbol()),
                both(
                    &build_block_r(ctx, e1, e2, x)?.op,
                    &build_block_r_inv(ctx, e1, e2, x)?.op,
                )?,
            ));
        }
    }
    out.push((
        "tilde".to_string(),
        both(&build_tilde_r(ctx, x)?.op, &build_tilde_r_inv(ctx, x)?.op)?,
    ));
    out.push((
        "a3-mixed".to_string(),
        both(
            &build_block_r(ctx, Sign::Plus, Sign::Minus, x)?.op,
            &build_a3_mixed_inv(ctx, x)?.op,
        )?,
    ));
    Ok(out)
}

/// c(x,u) = q^{−n−1}(z − z⁻¹)/(zq^{−n−1} − z⁻¹q^{n+1}) with z = xu⁻¹.
pub fn a4_coefficient<S: Scalar>(ctx: &FieldCtx<S>, x: &S, u: &S) -> Result<S> {
    let n = ctx.n() as i32;
    let z = x.clone() * inverse(u)?;
    let zi = inverse(&z)?;
    let num = ctx.qpow(-n - 1) * (z.clone() - zi.clone());
    let den = z * ctx.qpow(-n - 1) - zi * ctx.qpow(n + 1);
    num.checked_div(&den)
        .ok_or_else(|| Error::PoleError("c(x,u) denominator vanishes".into()))
}

/// (I⊗I + c(x,u)Q^(+,−)) R^(+,−)(xu⁻¹) against the displayed R^(+,−)(1).
pub fn verify_a4_pq_identity<S: Scalar>(ctx: &FieldCtx<S>, x: &S, u: &S) -> Result<Residual> {
    let c = a4_coefficient(ctx, x, u)?;
    let qpm = special_qpm(ctx)?.op;
    let id = SparseOp::identity(qpm.legs().to_vec());
    let z = x.clone() * inverse(u)?;
    let r = if z == S::one() {
        special_pm1(ctx)?.op
    } else {
        build_block_r(ctx, Sign::Plus, Sign::Minus, &z)?.op
    };
    let lhs = id.add(&qpm.scale(&c))?.mul(&r)?;
    Residual::of_ops(&lhs, &special_pm1(ctx)?.op)
}

/// Index-pattern audit: counts entries outside the displayed families
/// (diagonal E^i_i⊗E^k_k, swap E^i_k⊗E^k_i, cross E^i_k⊗E^{−i}_{−k}).
pub fn pattern_violations<S: Scalar>(block: &RBlock<S>) -> Result<usize> {
    use crate::tensor_alg::decode;
    let legs = block.op.legs();
    if legs.len() != 2 {
        return Err(Error::LegMismatch("pattern audit expects two legs".into()));
    }
    let (allow_swap, allow_cross) = match block.kind {
        RKind::Full | RKind::FullInv | RKind::Tilde | RKind::TildeInv => (true, true),
        RKind::Block(a, b) | RKind::BlockInv(a, b) => (a == b, a != b),
        RKind::Ppp | RKind::SpecialPP1 | RKind::SpecialMM1 | RKind::ExchangePPDual => (true, false),
        RKind::DressPlusLeft | RKind::DressMinusRight => (true, false),
        _ => (false, true),
    };
    let mut bad = 0;
    for (&(r, c), _) in block.op.entries() {
        let (rows, cols) = (decode(legs, r), decode(legs, c));
        // back to (upper, lower) per leg
        let unit = |j: usize| {
            if legs[j].is_dual() {
                (rows[j], cols[j])
            } else {
                (cols[j], rows[j])
            }
        };
        let ((u1, l1), (u2, l2)) = (unit(0), unit(1));
        let diag = u1 == l1 && u2 == l2;
        let swap = u1 == l2 && l1 == u2;
        let cross = u2 == -u1 && l2 == -l1;
        if !(diag || (allow_swap && swap) || (allow_cross && cross)) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Structural entry count of R(x) at generic x.
pub fn full_r_nnz(n: usize) -> usize {
    4 * n * n + 4 * n * (2 * n - 1) - 2 * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_field::{rational, Rational};

    fn ctx(n: usize) -> FieldCtx<Rational> {
        FieldCtx::new(n, rational(5, 3), 1).unwrap()
    }

    #[test]
    fn full_r_n1_entries() {
        let c = ctx(1);
        let x = rational(7, 2);
        let r = build_full_r(&c, &x).unwrap().op;
        let a = c.alpha(&x).unwrap();
        let e11 = r.coeff(&[(1, 1), (1, 1)]).unwrap();
        assert_eq!(e11, c.f(&x).unwrap() / a.clone());
        let e1m1 = r.coeff(&[(1, 1), (-1, -1)]).unwrap();
        let arg = rational(2, 7) * c.qpow(-2);
        assert_eq!(e1m1, c.f(&arg).unwrap() / a);
    }

    #[test]
    fn full_r_inverse_n1_entry() {
        let c = ctx(1);
        let x = rational(7, 2);
        let r = build_full_r_inv(&c, &x).unwrap().op;
        let xi = rational(2, 7);
        assert_eq!(
            r.coeff(&[(1, 1), (1, 1)]).unwrap(),
            c.f(&xi).unwrap() / c.alpha(&xi).unwrap()
        );
    }

    #[test]
    fn full_r_structure() {
        for n in 1..=3 {
            let c = ctx(n);
            let r = build_full_r(&c, &rational(7, 4)).unwrap();
            assert_eq!(r.op.nnz(), full_r_nnz(n));
            assert_eq!(pattern_violations(&r).unwrap(), 0);
        }
        assert_eq!([1, 2, 3].map(full_r_nnz), [6, 36, 90]);
    }

    #[test]
    fn full_r_inverse_at_fixed_point() {
        let c = ctx(2);
        let x = rational(3, 2);
        let r = build_full_r(&c, &x).unwrap().op;
        let ri = build_full_r_inv(&c, &x).unwrap().op;
        assert!(r.mul(&ri).unwrap().is_identity());
        assert!(ri.mul(&r).unwrap().is_identity());
    }

    #[test]
    fn alpha_zero_is_reported() {
        let c = ctx(1);
        let x = c.qpow(-1);
        assert!(matches!(build_full_r(&c, &x), Err(Error::AlphaZero(_))));
    }

    #[test]
    fn block_diagonal_coefficients() {
        let c = ctx(2);
        let x = rational(9, 4);
        let q = c.q().clone();
        let pm = build_block_r(&c, Sign::Plus, Sign::Minus, &x).unwrap().op;
        let xi = rational(4, 9);
        assert_eq!(
            pm.coeff(&[(2, 2), (-2, -2)]).unwrap(),
            c.f(&(xi * q.clone())).unwrap()
        );
        let mpi = build_block_r_inv(&c, Sign::Minus, Sign::Plus, &x)
            .unwrap()
            .op;
        assert_eq!(
            mpi.coeff(&[(-1, -1), (1, 1)]).unwrap(),
            c.f(&(x * q)).unwrap()
        );
    }

    #[test]
    fn block_products_are_half_identities() {
        let c = ctx(2);
        let x = rational(7, 3);
        for e1 in Sign::all() {
            for e2 in Sign::all() {
                let b = build_block_r(&c, e1, e2, &x).unwrap().op;
                let bi = build_block_r_inv(&c, e1, e2, &x).unwrap().op;
                assert!(b.mul(&bi).unwrap().is_identity(), "{e1:?}{e2:?}");
            }
        }
    }

    #[test]
    fn tilde_restricts_to_blocks() {
        let c = ctx(2);
        let x = rational(7, 4);
        let t = build_tilde_r(&c, &x).unwrap().op;
        let pp = t
            .restrict_leg(0, LegSpace::plus(2))
            .unwrap()
            .restrict_leg(1, LegSpace::plus(2))
            .unwrap();
        assert_eq!(
            pp,
            build_block_r(&c, Sign::Plus, Sign::Plus, &x).unwrap().op
        );
        let ti = build_tilde_r_inv(&c, &x).unwrap().op;
        assert!(t.mul(&ti).unwrap().is_identity());
    }

    #[test]
    fn special_values_displays() {
        let c = ctx(2);
        let sv = special_values(&c).unwrap();
        assert!(sv.ppp.op.mul(&sv.ppp.op).unwrap().is_identity());
        let q = c.q().clone();
        assert_eq!(
            sv.pm1.op.coeff(&[(1, 1), (-1, -1)]).unwrap(),
            q.clone() + c.qpow(-1)
        );
        assert_eq!(sv.qpm.op.coeff(&[(1, 2), (-1, -2)]).unwrap(), c.qpow(3));
        // generic R^(+,−) at 1 has no pole and matches the display
        let generic = build_block_r(&c, Sign::Plus, Sign::Minus, &rational(1, 1))
            .unwrap()
            .op;
        assert_eq!(generic, sv.pm1.op);
    }

    #[test]
    fn block_pp_tends_to_swap_near_one() {
        // the swap limit is approached as x → 1
        let c: FieldCtx<num_complex::Complex64> =
            FieldCtx::new(2, num_complex::Complex64::new(0.7, 0.3), 0).unwrap();
        let x = num_complex::Complex64::new(1.0 + 1e-9, 0.0);
        let b = build_block_r(&c, Sign::Plus, Sign::Plus, &x).unwrap().op;
        let p = special_ppp(&c).unwrap().op;
        assert!(Residual::of_ops(&b, &p).unwrap().absolute < 1e-6);
    }

    #[test]
    fn a8_spec_examples() {
        let c = ctx(2);
        let x = Arg::Ratio(rational(11, 5));
        for s in 1..=2 {
            for b in 1..=2 {
                let expect = if s == 1 && b == 1 {
                    rational(1, 1)
                } else {
                    rational(0, 1)
                };
                assert_eq!(a8_pp(&c, &x, 1, 1, s, b).unwrap(), expect);
            }
        }
        for p in 1..=2 {
            for cc in 1..=2 {
                let expect = if p == 2 && cc == 1 {
                    rational(1, 1)
                } else {
                    rational(0, 1)
                };
                assert_eq!(a8_pm(&c, &x, p, cc, 2, 1).unwrap(), expect);
            }
        }
    }

    #[test]
    fn a8_minus_one_example_holds_for_rank_one() {
        let c = ctx(1);
        let xv = rational(11, 5);
        let x = Arg::Ratio(xv.clone());
        let fxq = c.f(&(xv * c.q().clone())).unwrap();
        assert_eq!(a8_mp(&c, &x, 1, 1, 1, 1).unwrap(), fxq);
        // at rank two the closed form also has a swap entry at s = b = 2
        let c2 = ctx(2);
        let v = a8_mp(&c2, &x, 1, 1, 2, 2).unwrap();
        let xi = rational(5, 11);
        let expect = -c2.g(&(xi * c2.qpow(-1))).unwrap() * c2.qpow(-1);
        assert_eq!(v, expect);
    }

    #[test]
    fn dressing_factors_match_closed_forms() {
        for n in 1..=3 {
            let c = ctx(n);
            let r = verify_dressing_closed_forms(&c, &Arg::Ratio(rational(13, 6))).unwrap();
            assert!(r.exact_zero, "n={n}: {}", r.value);
            let r = verify_dressing_closed_forms(&c, &Arg::One).unwrap();
            assert!(r.exact_zero, "n={n} at one: {}", r.value);
        }
    }

    #[test]
    fn pattern_audit_of_all_builders() {
        let c = ctx(2);
        let x = rational(5, 7);
        let mut blocks = vec![
            build_full_r(&c, &x).unwrap(),
            build_full_r_inv(&c, &x).unwrap(),
            build_tilde_r(&c, &x).unwrap(),
            build_tilde_r_inv(&c, &x).unwrap(),
            build_a3_mixed_inv(&c, &x).unwrap(),
        ];
        for a in Sign::all() {
            for b in Sign::all() {
                blocks.push(build_block_r(&c, a, b, &x).unwrap());
                blocks.push(build_block_r_inv(&c, a, b, &x).unwrap());
            }
        }
        for d in [
            Dressing::PlusLeft,
            Dressing::PlusRight,
            Dressing::MinusLeft,
            Dressing::MinusRight,
        ] {
            blocks.push(build_dressing_factor(&c, d, &Arg::Ratio(x.clone())).unwrap());
        }
        for b in &blocks {
            assert_eq!(pattern_violations(b).unwrap(), 0, "{:?}", b.kind);
        }
    }

    #[test]
    fn ybe_and_inverses_hold() {
        let c = ctx(2);
        let (x, y) = (rational(7, 3), rational(-4, 5));
        for fam in YbeFamily::all() {
            let r = verify_ybe(&c, fam, &x, &y).unwrap();
            assert!(r.exact_zero, "{}", fam.label());
        }
        for (name, r) in verify_inverses(&c, &x).unwrap() {
            assert!(r.exact_zero, "{name}");
        }
    }

    #[test]
    fn perturbation_breaks_ybe_and_inverse() {
        let c = ctx(2).with_perturbation(rational(1, 1000));
        let (x, y) = (rational(7, 3), rational(-4, 5));
        assert!(!verify_ybe(&c, YbeFamily::Full, &x, &y).unwrap().exact_zero);
        assert!(
            !verify_ybe(
                &c,
                YbeFamily::Block(Sign::Plus, Sign::Plus, Sign::Plus),
                &x,
                &y
            )
            .unwrap()
            .exact_zero
        );
        let inv = verify_inverses(&c, &x).unwrap();
        assert!(!inv[0].1.exact_zero);
    }

    #[test]
    fn a4_identity() {
        for n in 1..=3 {
            let c = ctx(n);
            let r = verify_a4_pq_identity(&c, &rational(9, 7), &rational(-2, 3)).unwrap();
            assert!(r.exact_zero, "n={n}");
        }
        let c = ctx(2);
        let u = rational(3, 7);
        assert_eq!(a4_coefficient(&c, &u, &u).unwrap(), rational(0, 1));
        assert!(verify_a4_pq_identity(&c, &u, &u).unwrap().exact_zero);
    }
}
