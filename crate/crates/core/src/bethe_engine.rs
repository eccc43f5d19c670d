//! Bethe vectors, dressed operators T̂^(±), B-operator exchange and the
//! checks of Lemma 3, Proposition 2 and Theorems 1–3.
//!
//! Φ lives on the legs [V₊* × M, V₋ × M, sites]. The component on dual leg j
//! with index i_j and minus leg j with index −k_j is paired with
//! T^{i_j}_{−k_j}(u_j), and u_M acts first.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain_rep::{reduce_span, ChainRep, Monodromy, W0Basis};
use crate::error::{Error, Result};
use crate::residual::{max_all, Residual};
use crate::rmatrices::{
    a8_mm, a8_mp, a8_pm, a8_pp, build_block_r, build_dressing_factor, build_exchange_pp_dual, Arg,
    Dressing, Sign,
};
use crate::scalar_field::{inverse, FieldCtx, Scalar};
use crate::tensor_alg::{decode, encode, total_dim, LegSpace, SparseOp, SparseVec};

#[derive(Clone, Debug)]
pub struct BetheParams<S> {
    pub rep: ChainRep<S>,
    pub us: Vec<S>,
}

impl<S: Scalar> BetheParams<S> {
    pub fn new(rep: ChainRep<S>, us: Vec<S>) -> Result<Self> {
        for (a, ua) in us.iter().enumerate() {
            if ua.is_zero() {
                return Err(Error::ConfigError(format!("u{} is zero", a + 1)));
            }
            if us[a + 1..].iter().any(|ub| ub == ua) {
                return Err(Error::ConfigError(
                    "spectral parameters must be distinct".into(),
                ));
            }
        }
        Ok(BetheParams { rep, us })
    }

    pub fn m(&self) -> usize {
        self.us.len()
    }
    pub fn n(&self) -> usize {
        self.rep.n()
    }
    pub fn ctx(&self) -> &FieldCtx<S> {
        self.rep.ctx()
    }

    /// [V₊* × M, V₋ × M]
    pub fn head_legs(&self) -> Vec<LegSpace> {
        let n = self.n();
        let mut v = vec![LegSpace::plus_dual(n); self.m()];
        v.extend(vec![LegSpace::minus(n); self.m()]);
        v
    }

    /// [V₊* × M, V₋ × M, sites]
    pub fn phi_legs(&self) -> Vec<LegSpace> {
        let mut v = self.head_legs();
        v.extend(self.rep.spec.site_legs());
        v
    }

    /// Ω̂ = (f¹)^{⊗M} ⊗ (e₋₁)^{⊗M} ⊗ ω
    pub fn nested_vacuum_vec(&self) -> Result<SparseVec<S>> {
        let m = self.m();
        let mut idx = vec![1; m];
        idx.extend(vec![-1; m]);
        let head = SparseVec::basis(self.head_legs(), &idx)?;
        Ok(head.tensor(&self.rep.vacuum))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// F(x⁻¹;ū) = ∏ f(x⁻¹u_k)
    XInvTimesU,
    /// F(x;ū⁻¹) = ∏ f(xu_k⁻¹)
    XTimesUInv,
}

pub fn f_product<S: Scalar>(ctx: &FieldCtx<S>, x: &S, us: &[S], o: Orientation) -> Result<S> {
    let xi = inverse(x)?;
    let mut acc = S::one();
    for (k, u) in us.iter().enumerate() {
        let arg = match o {
            Orientation::XInvTimesU => xi.clone() * u.clone(),
            Orientation::XTimesUInv => x.clone() * inverse(u)?,
        };
        acc = acc
            * ctx
                .f(&arg)
                .map_err(|e| e.with_context(&format!("factor u{}", k + 1)))?;
    }
    Ok(acc)
}

fn arg_for<S: Scalar>(x: &S, u: &S) -> Result<Arg<S>> {
    if x == u {
        Ok(Arg::One)
    } else {
        Ok(Arg::Ratio(x.clone() * inverse(u)?))
    }
}

/// T̂^(ε)(x;ū): entries keyed by signed (row, column) indices, each an
/// operator on the Φ legs.
#[derive(Clone, Debug)]
pub struct DressedOp<S> {
    pub eps: Sign,
    pub x: S,
    legs: Vec<LegSpace>,
    entries: BTreeMap<(i32, i32), SparseOp<S>>,
}

impl<S: Scalar> DressedOp<S> {
    pub fn entry(&self, i: i32, k: i32) -> &SparseOp<S> {
        &self.entries[&(i, k)]
    }
    pub fn legs(&self) -> &[LegSpace] {
        &self.legs
    }
    pub fn entries(&self) -> impl Iterator<Item = (&(i32, i32), &SparseOp<S>)> {
        self.entries.iter()
    }

    /// Ĥ^(ε)(x;ū) = Σ_i T̂^{εi}_{εi}(x;ū)
    pub fn hat_trace(&self) -> Result<SparseOp<S>> {
        let mut acc = SparseOp::zero(self.legs.clone());
        for (&(i, k), e) in &self.entries {
            if i == k {
                acc = acc.add(e)?;
            }
        }
        Ok(acc)
    }

    /// The whole operator on [V_ε, Φ legs].
    pub fn aux_op(&self) -> Result<SparseOp<S>> {
        let n = self.legs.first().map(|l| l.n);
        let n = match n {
            Some(n) => n,
            None => return Err(Error::LegMismatch("dressed operator without legs".into())),
        };
        let aux = LegSpace::half(n, self.eps.eps());
        let mut acc = SparseOp::zero({
            let mut l = vec![aux];
            l.extend(self.legs.iter().copied());
            l
        });
        for (&(i, k), e) in &self.entries {
            acc = acc.add(&SparseOp::matrix_unit(aux, i, k)?.tensor(e))?;
        }
        Ok(acc)
    }
}

/// One-leg operator Σ_{a,b} coeff(a,b)·unit(a,b) on `leg`.
fn one_leg<S: Scalar>(
    leg: LegSpace,
    n: i32,
    mut coeff: impl FnMut(i32, i32) -> Result<S>,
    unit: impl Fn(i32, i32) -> (i32, i32),
) -> Result<SparseOp<S>> {
    let mut op = SparseOp::zero(vec![leg]);
    for a in 1..=n {
        for b in 1..=n {
            let c = coeff(a, b)?;
            if !c.is_zero() {
                op.add_term(c, &[unit(a, b)])?;
            }
        }
    }
    Ok(op)
}

fn add_into<S: Scalar>(
    map: &mut BTreeMap<i32, SparseOp<S>>,
    key: i32,
    op: SparseOp<S>,
) -> Result<()> {
    match map.remove(&key) {
        Some(prev) => {
            map.insert(key, prev.add(&op)?);
        }
        None => {
            map.insert(key, op);
        }
    }
    Ok(())
}

/// Entrywise construction from the closed-form dressing coefficients.
pub fn build_dressed_with<S: Scalar>(
    params: &BetheParams<S>,
    eps: Sign,
    t: &Monodromy<S>,
) -> Result<DressedOp<S>> {
    let ctx = params.ctx();
    let n = params.n() as i32;
    let m = params.m();
    let x = &t.x;
    let e = eps.eps();
    let args: Vec<Arg<S>> = params
        .us
        .iter()
        .map(|u| arg_for(x, u))
        .collect::<Result<_>>()?;
    let dual = LegSpace::plus_dual(params.n());
    let minus = LegSpace::minus(params.n());
    // left[j][(r, s)]: factor j sliced at auxiliary (row r, column s), positive labels
    let mut left_slices = Vec::with_capacity(m);
    let mut right_slices = Vec::with_capacity(m);
    for arg in &args {
        let mut ls = BTreeMap::new();
        let mut rs = BTreeMap::new();
        for r in 1..=n {
            for s in 1..=n {
                // F^b_a on the dual leg
                let l = one_leg(
                    dual,
                    n,
                    |a, b| match eps {
                        Sign::Plus => a8_pp(ctx, arg, r, a, s, b),
                        Sign::Minus => a8_mp(ctx, arg, r, a, s, b),
                    },
                    |a, b| (b, a),
                )?;
                ls.insert((r, s), l);
                // E^{−d}_{−c} on the minus leg; r is the row p_j, s the column p_{j−1}
                let c = one_leg(
                    minus,
                    n,
                    |c, d| match eps {
                        Sign::Plus => a8_pm(ctx, arg, r, c, s, d),
                        Sign::Minus => a8_mm(ctx, arg, r, c, s, d),
                    },
                    |c, d| (-d, -c),
                )?;
                rs.insert((r, s), c);
            }
        }
        left_slices.push(ls);
        right_slices.push(rs);
    }
    let chain = |start: i32,
                 slices: &Vec<BTreeMap<(i32, i32), SparseOp<S>>>,
                 left: bool|
     -> Result<BTreeMap<i32, SparseOp<S>>> {
        let mut cur: BTreeMap<i32, SparseOp<S>> = BTreeMap::new();
        cur.insert(start, SparseOp::identity(vec![]));
        for sl in slices {
            let mut next = BTreeMap::new();
            for (&prev, op) in &cur {
                for nxt in 1..=n {
                    let key = if left { (prev, nxt) } else { (nxt, prev) };
                    let piece = &sl[&key];
                    if piece.is_zero() {
                        continue;
                    }
                    add_into(&mut next, nxt, op.tensor(piece))?;
                }
            }
            cur = next;
        }
        Ok(cur)
    };
    let legs = params.phi_legs();
    let mut entries = BTreeMap::new();
    let rights: Vec<BTreeMap<i32, SparseOp<S>>> = (1..=n)
        .map(|k| chain(k, &right_slices, false))
        .collect::<Result<_>>()?;
    for i in 1..=n {
        let left = chain(i, &left_slices, true)?;
        for k in 1..=n {
            let right = &rights[(k - 1) as usize];
            let mut acc = SparseOp::zero(legs.clone());
            for (&s, lop) in &left {
                for (&p, rop) in right {
                    let g = t.entry(e * s, e * p);
                    if g.is_zero() {
                        continue;
                    }
                    acc = acc.add(&lop.tensor(rop).tensor(g))?;
                }
            }
            entries.insert((e * i, e * k), acc);
        }
    }
    Ok(DressedOp {
        eps,
        x: x.clone(),
        legs,
        entries,
    })
}

pub fn build_dressed<S: Scalar>(params: &BetheParams<S>, eps: Sign, x: &S) -> Result<DressedOp<S>> {
    build_dressed_with(params, eps, &params.rep.monodromy(x)?)
}

/// Product route: left dressing factors, T^(ε)₀(x), right factors, then the
/// auxiliary leg sliced. Used to cross-check the entrywise route.
pub fn build_dressed_product<S: Scalar>(
    params: &BetheParams<S>,
    eps: Sign,
    x: &S,
) -> Result<DressedOp<S>> {
    let ctx = params.ctx();
    let n = params.n();
    let m = params.m();
    let aux = LegSpace::half(n, eps.eps());
    let phi = params.phi_legs();
    let mut legs = vec![aux];
    legs.extend(phi.iter().copied());
    let mut op = SparseOp::identity(legs.clone());
    for (j, u) in params.us.iter().enumerate() {
        let a = build_dressing_factor(ctx, Dressing::left(eps), &arg_for(x, u)?)?;
        op = op.mul(&a.op.embed(&legs, &[0, 1 + j])?)?;
    }
    let t = params.rep.monodromy(x)?.half(eps)?;
    let mut pos = vec![0];
    pos.extend(1 + 2 * m..legs.len());
    op = op.mul(&t.embed(&legs, &pos)?)?;
    for j in (0..m).rev() {
        let c = build_dressing_factor(ctx, Dressing::right(eps), &arg_for(x, &params.us[j])?)?;
        op = op.mul(&c.op.embed(&legs, &[0, 1 + m + j])?)?;
    }
    let e = eps.eps();
    let mut entries = BTreeMap::new();
    for i in 1..=n as i32 {
        for k in 1..=n as i32 {
            entries.insert((e * i, e * k), op.slice_leg(0, e * i, e * k)?);
        }
    }
    Ok(DressedOp {
        eps,
        x: x.clone(),
        legs: phi,
        entries,
    })
}

/// ⟨B, Φ⟩ with the B-operators in `order` (outermost first); `monos[leg]`
/// is the monodromy evaluated at the parameter attached to that leg pair.
pub fn contract_b<S: Scalar>(
    monos: &[&Monodromy<S>],
    order: &[usize],
    phi: &SparseVec<S>,
) -> Result<SparseVec<S>> {
    let m = monos.len();
    let legs = phi.legs();
    if legs.len() < 2 * m || order.len() != m {
        return Err(Error::LegMismatch("contract_b: leg count".into()));
    }
    let head_legs = &legs[..2 * m];
    let site_legs = legs[2 * m..].to_vec();
    let d = total_dim(&site_legs);
    let mut groups: BTreeMap<Vec<i32>, SparseVec<S>> = BTreeMap::new();
    for (&key, v) in phi.entries() {
        let head = decode(head_legs, key / d);
        groups
            .entry(head)
            .or_insert_with(|| SparseVec::zero(site_legs.clone()))
            .insert_key(key % d, v.clone());
    }
    for &leg in order.iter().rev() {
        let mut next: BTreeMap<Vec<i32>, SparseVec<S>> = BTreeMap::new();
        for (mut head, w) in groups {
            let (i, mk) = (head[leg], head[m + leg]);
            head[leg] = 0;
            head[m + leg] = 0;
            let w2 = monos[leg].entry(i, mk).apply(&w)?;
            if w2.is_zero() {
                continue;
            }
            match next.get_mut(&head) {
                Some(acc) => *acc = acc.add(&w2)?,
                None => {
                    next.insert(head, w2);
                }
            }
        }
        groups = next;
    }
    let mut out = SparseVec::zero(site_legs);
    for (_, w) in groups {
        out = out.add(&w)?;
    }
    Ok(out)
}

/// 𝔙(ū) = ⟨B₁…M(ū), Φ⟩
pub fn build_b_vector<S: Scalar>(
    params: &BetheParams<S>,
    phi: &SparseVec<S>,
) -> Result<SparseVec<S>> {
    let monos: Vec<Monodromy<S>> = params
        .us
        .iter()
        .map(|u| params.rep.monodromy(u))
        .collect::<Result<_>>()?;
    let refs: Vec<&Monodromy<S>> = monos.iter().collect();
    let order: Vec<usize> = (0..params.m()).collect();
    contract_b(&refs, &order, phi)
}

fn replaced_order(m: usize, k: usize) -> Vec<usize> {
    let mut order = vec![k - 1];
    order.extend((0..m).filter(|&j| j + 1 != k));
    order
}

/// ⟨B_{k;1…M}(y;ū_k), Φ⟩: leg pair k carries y and acts outermost.
pub fn build_b_vector_replaced<S: Scalar>(
    params: &BetheParams<S>,
    k: usize,
    y: &S,
    phi: &SparseVec<S>,
) -> Result<SparseVec<S>> {
    let monos: Vec<Monodromy<S>> = params
        .us
        .iter()
        .enumerate()
        .map(|(j, u)| params.rep.monodromy(if j + 1 == k { y } else { u }))
        .collect::<Result<_>>()?;
    let refs: Vec<&Monodromy<S>> = monos.iter().collect();
    contract_b(&refs, &replaced_order(params.m(), k), phi)
}

/// Monodromies at ū and at one extra point x, with the exchange products,
/// reused across many contractions.
pub struct BCache<'a, S> {
    params: &'a BetheParams<S>,
    monos: Vec<Monodromy<S>>,
    at_x: Monodromy<S>,
    exchange: Vec<(SparseOp<S>, SparseOp<S>)>,
}

impl<'a, S: Scalar> BCache<'a, S> {
    pub fn new(params: &'a BetheParams<S>, x: &S) -> Result<Self> {
        Ok(BCache {
            params,
            monos: params
                .us
                .iter()
                .map(|u| params.rep.monodromy(u))
                .collect::<Result<_>>()?,
            at_x: params.rep.monodromy(x)?,
            exchange: (1..=params.m())
                .map(|k| build_exchange_chain(params, k))
                .collect::<Result<_>>()?,
        })
    }

    pub fn at_x(&self) -> &Monodromy<S> {
        &self.at_x
    }

    pub fn b(&self, phi: &SparseVec<S>) -> Result<SparseVec<S>> {
        let refs: Vec<&Monodromy<S>> = self.monos.iter().collect();
        let order: Vec<usize> = (0..self.monos.len()).collect();
        contract_b(&refs, &order, phi)
    }

    /// Same as `build_b_vector_replaced` with y = x.
    pub fn b_replaced(&self, k: usize, phi: &SparseVec<S>) -> Result<SparseVec<S>> {
        let refs: Vec<&Monodromy<S>> = self
            .monos
            .iter()
            .enumerate()
            .map(|(j, t)| if j + 1 == k { &self.at_x } else { t })
            .collect();
        contract_b(&refs, &replaced_order(self.monos.len(), k), phi)
    }

    /// Same as `apply_exchange`.
    pub fn exchange(&self, k: usize, phi: &SparseVec<S>) -> Result<SparseVec<S>> {
        let m = self.monos.len();
        let (pp, mm) = &self.exchange[k - 1];
        let minus_pos: Vec<usize> = (m..2 * m).collect();
        let dual_pos: Vec<usize> = (0..m).collect();
        pp.apply_on(&mm.apply_on(phi, &minus_pos)?, &dual_pos)
    }

    pub fn params(&self) -> &BetheParams<S> {
        self.params
    }
}

/// ((R̂^(+,+)_{1*…k*})⁻¹ on [V₊*]^M, R̂^(−,−)_{1…k} on [V₋]^M); k is 1-based.
pub fn build_exchange_chain<S: Scalar>(
    params: &BetheParams<S>,
    k: usize,
) -> Result<(SparseOp<S>, SparseOp<S>)> {
    let n = params.n();
    let m = params.m();
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange(format!(
            "exchange position {k} of {m}"
        )));
    }
    let dl = vec![LegSpace::plus_dual(n); m];
    let ml = vec![LegSpace::minus(n); m];
    let mut pp = SparseOp::identity(dl.clone());
    let mut mm = SparseOp::identity(ml.clone());
    let uk = inverse(&params.us[k - 1])?;
    for j in 1..k {
        let ratio = params.us[j - 1].clone() * uk.clone();
        let a = build_exchange_pp_dual(params.ctx(), &ratio)?.op;
        pp = pp.mul(&a.embed(&dl, &[j - 1, k - 1])?)?;
        let b = build_block_r(params.ctx(), Sign::Minus, Sign::Minus, &ratio)?.op;
        mm = mm.mul(&b.embed(&ml, &[j - 1, k - 1])?)?;
    }
    Ok((pp, mm))
}

/// Applies the exchange product to Φ.
pub fn apply_exchange<S: Scalar>(
    params: &BetheParams<S>,
    k: usize,
    phi: &SparseVec<S>,
) -> Result<SparseVec<S>> {
    let m = params.m();
    let (pp, mm) = build_exchange_chain(params, k)?;
    let minus_pos: Vec<usize> = (m..2 * m).collect();
    let dual_pos: Vec<usize> = (0..m).collect();
    let v = mm.apply_on(phi, &minus_pos)?;
    pp.apply_on(&v, &dual_pos)
}

/// Transformed Φ such that rebuilding with u_k moved to the front gives the same vector.
pub fn reorder_b<S: Scalar>(
    params: &BetheParams<S>,
    phi: &SparseVec<S>,
    k: usize,
) -> Result<SparseVec<S>> {
    apply_exchange(params, k, phi)
}

/// Weights μ_{±k} and eigenvalues for Φ = Ω̂.
#[derive(Clone, Debug)]
pub struct EigPackage<'a, S> {
    pub params: &'a BetheParams<S>,
}

impl<'a, S: Scalar> EigPackage<'a, S> {
    pub fn new(params: &'a BetheParams<S>) -> Self {
        EigPackage { params }
    }

    /// λ_i(x) as the product over sites of the vacuum diagonal R-coefficient.
    pub fn lambda(&self, i: i32, x: &S) -> Result<S> {
        let rep = &self.params.rep;
        let ctx = rep.ctx();
        let n = ctx.n() as i32;
        let m = rep.vacuum_index;
        let mut acc = S::one();
        for w in &rep.spec.inhom {
            let z = x.clone() * inverse(w)?;
            let a = ctx.alpha(&z)?;
            let num = if i == m {
                ctx.f(&z)?
            } else if i == -m {
                ctx.f(&(inverse(&z)? * ctx.qpow(-n - 1)))?
            } else {
                S::one()
            };
            let c = num
                .checked_div(&a)
                .ok_or_else(|| Error::AlphaZero(format!("α({}) = 0", z.render())))?;
            acc = acc * c;
        }
        Ok(acc)
    }

    pub fn mu(&self, i: i32, x: &S) -> Result<S> {
        let ctx = self.params.ctx();
        let q = ctx.q().clone();
        let qi = ctx.qpow(-1);
        let us = &self.params.us;
        let lam = self.lambda(i, x)?;
        let f = match i {
            1 => f_product(
                ctx,
                &(inverse(&q)? * x.clone()),
                us,
                Orientation::XInvTimesU,
            )?,
            -1 => f_product(ctx, &(x.clone() * q), us, Orientation::XTimesUInv)?,
            i if i > 1 => f_product(ctx, &(x.clone() * qi), us, Orientation::XTimesUInv)?,
            _ => f_product(ctx, &(x.clone() * q), us, Orientation::XInvTimesU)?,
        };
        Ok(lam * f)
    }

    pub fn ehat(&self, eps: Sign, x: &S) -> Result<S> {
        let mut acc = S::zero();
        for i in 1..=self.params.n() as i32 {
            acc = acc + self.mu(eps.eps() * i, x)?;
        }
        Ok(acc)
    }

    /// E(x;ū) = Ê⁺(x)F(x⁻¹;ū) + Ê⁻(x)F(x;ū⁻¹)
    pub fn energy(&self, x: &S) -> Result<S> {
        let ctx = self.params.ctx();
        let us = &self.params.us;
        Ok(
            self.ehat(Sign::Plus, x)? * f_product(ctx, x, us, Orientation::XInvTimesU)?
                + self.ehat(Sign::Minus, x)? * f_product(ctx, x, us, Orientation::XTimesUInv)?,
        )
    }

    /// Ê⁺(u_k)F(u_k⁻¹;ū_k) − Ê⁻(u_k)F(u_k;ū_k⁻¹), one per k.
    pub fn bethe_residuals(&self) -> Result<Vec<S>> {
        let us = &self.params.us;
        (0..us.len())
            .map(|k| {
                let (a, b) = self.bethe_sides(k)?;
                Ok(a - b)
            })
            .collect()
    }

    /// The two sides of the k-th (0-based) Bethe equation.
    pub fn bethe_sides(&self, k: usize) -> Result<(S, S)> {
        let ctx = self.params.ctx();
        let us = &self.params.us;
        let uk = &us[k];
        let rest: Vec<S> = us
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, u)| u.clone())
            .collect();
        let a = self.ehat(Sign::Plus, uk)? * f_product(ctx, uk, &rest, Orientation::XInvTimesU)?;
        let b = self.ehat(Sign::Minus, uk)? * f_product(ctx, uk, &rest, Orientation::XTimesUInv)?;
        Ok((a, b))
    }
}

pub fn verify_dressed_routes<S: Scalar>(
    params: &BetheParams<S>,
    eps: Sign,
    x: &S,
) -> Result<Residual> {
    let a = build_dressed(params, eps, x)?;
    let b = build_dressed_product(params, eps, x)?;
    let mut out = Vec::new();
    for (key, e) in a.entries() {
        out.push(Residual::of_ops(e, b.entry(key.0, key.1))?);
    }
    Ok(max_all(S::BACKEND, out))
}

/// Theorem 3 on Ω̂: triangularity plus the μ table.
pub fn verify_theorem3<S: Scalar>(params: &BetheParams<S>, x: &S) -> Result<Residual> {
    let omega = params.nested_vacuum_vec()?;
    let t = params.rep.monodromy(x)?;
    let eig = EigPackage::new(params);
    let n = params.n() as i32;
    let zero = SparseVec::zero(omega.legs().to_vec());
    let mut out = Vec::new();
    for eps in Sign::all() {
        let d = build_dressed_with(params, eps, &t)?;
        let e = eps.eps();
        for i in 1..=n {
            for k in 1..=n {
                let v = d.entry(e * i, e * k).apply(&omega)?;
                let annihilated = (e > 0 && i < k) || (e < 0 && i > k);
                if annihilated {
                    out.push(Residual::of_vecs(&v, &zero)?);
                } else if i == k {
                    let mu = eig.mu(e * i, x)?;
                    out.push(Residual::of_vecs(&v, &omega.scale(&mu))?);
                }
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// Prefactor of the wanted term in the minus-sign single-B relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma3Variant {
    /// f(xu⁻¹)
    XOverU,
    /// f(x⁻¹u)
    UOverX,
}

/// Product in the minus-sign unwanted-term coefficient −g(xu_k⁻¹)∏_{j≠k} f(·).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prop2Variant {
    /// ∏ f(u_k u_j⁻¹)
    UkOverUj,
    /// ∏ f(u_j u_k⁻¹)
    UjOverUk,
}

/// Lemma 3 as an operator identity on W, for all r, s and all auxiliary entries.
pub fn verify_lemma3<S: Scalar>(
    rep: &ChainRep<S>,
    x: &S,
    u: &S,
    variant: Lemma3Variant,
) -> Result<Residual> {
    let params = BetheParams::new(rep.clone(), vec![u.clone()])?;
    let cache = BCache::new(&params, x)?;
    let ctx = rep.ctx();
    let n = rep.n() as i32;
    let tx = cache.at_x();
    let tu = &cache.monos[0];
    let xu = x.clone() * inverse(u)?;
    let ux = inverse(&xu)?;
    let site_legs = rep.spec.site_legs();
    let d = total_dim(&site_legs);
    let mut out = Vec::new();
    for eps in Sign::all() {
        let dx = build_dressed_with(&params, eps, tx)?;
        let du = build_dressed_with(&params, eps, tu)?;
        let (c1, c2) = match eps {
            Sign::Plus => (ctx.f(&ux)?, ctx.g(&xu)?),
            Sign::Minus => {
                let c1 = match variant {
                    Lemma3Variant::XOverU => ctx.f(&xu)?,
                    Lemma3Variant::UOverX => ctx.f(&ux)?,
                };
                (c1, -ctx.g(&xu)?)
            }
        };
        let e = eps.eps();
        for r in 1..=n {
            for s in 1..=n {
                let head = SparseVec::basis(params.head_legs(), &[r, -s])?;
                for w in 0..d {
                    let wv = SparseVec::basis_key(site_legs.clone(), w);
                    let col = head.tensor(&wv);
                    for a in 1..=n {
                        for ap in 1..=n {
                            let lhs = tx
                                .entry(e * a, e * ap)
                                .apply(&tu.entry(r, -s).apply(&wv)?)?;
                            let t1 = cache.b(&dx.entry(e * a, e * ap).apply(&col)?)?;
                            let t2 = cache.b_replaced(1, &du.entry(e * a, e * ap).apply(&col)?)?;
                            let rhs = t1.scale(&c1).add(&t2.scale(&c2))?;
                            out.push(Residual::of_vecs(&lhs, &rhs)?);
                        }
                    }
                }
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// Candidate readings of the two disputed minus-sign coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop2Variants {
    pub wanted: Lemma3Variant,
    pub unwanted: Prop2Variant,
}

impl Prop2Variants {
    pub const ADOPTED: Prop2Variants = Prop2Variants {
        wanted: Lemma3Variant::XOverU,
        unwanted: Prop2Variant::UkOverUj,
    };
}

/// Right-hand side of Proposition 2 for auxiliary entry (εa, εa′).
fn prop2_rhs<S: Scalar>(
    cache: &BCache<S>,
    phi: &SparseVec<S>,
    (dx, du): (&DressedOp<S>, &[DressedOp<S>]),
    (a, ap): (i32, i32),
    variants: Prop2Variants,
) -> Result<SparseVec<S>> {
    let params = cache.params();
    let ctx = params.ctx();
    let us = &params.us;
    let x = &dx.x;
    let eps = dx.eps;
    let e = eps.eps();
    let pref = match (eps, variants.wanted) {
        (Sign::Plus, _) | (Sign::Minus, Lemma3Variant::UOverX) => {
            f_product(ctx, x, us, Orientation::XInvTimesU)?
        }
        (Sign::Minus, Lemma3Variant::XOverU) => f_product(ctx, x, us, Orientation::XTimesUInv)?,
    };
    let mut rhs = cache.b(&dx.entry(e * a, e * ap).apply(phi)?)?.scale(&pref);
    for k in 1..=params.m() {
        let uk = &us[k - 1];
        let rest: Vec<S> = us
            .iter()
            .enumerate()
            .filter(|(j, _)| j + 1 != k)
            .map(|(_, u)| u.clone())
            .collect();
        let g = ctx.g(&(x.clone() * inverse(uk)?))?;
        let coef = match eps {
            Sign::Plus => g * f_product(ctx, uk, &rest, Orientation::XInvTimesU)?,
            Sign::Minus => {
                let p = match variants.unwanted {
                    Prop2Variant::UkOverUj => f_product(ctx, uk, &rest, Orientation::XTimesUInv)?,
                    Prop2Variant::UjOverUk => f_product(ctx, uk, &rest, Orientation::XInvTimesU)?,
                };
                -g * p
            }
        };
        let y = cache.exchange(k, &du[k - 1].entry(e * a, e * ap).apply(phi)?)?;
        rhs = rhs.add(&cache.b_replaced(k, &y)?.scale(&coef))?;
    }
    Ok(rhs)
}

/// Proposition 2 against the direct T^(ε)₀(x)𝔙(ū); returns one residual per sign.
pub fn verify_prop2<S: Scalar>(
    params: &BetheParams<S>,
    phi: &SparseVec<S>,
    x: &S,
    variants: Prop2Variants,
) -> Result<[Residual; 2]> {
    let n = params.n() as i32;
    let cache = BCache::new(params, x)?;
    let tx = cache.at_x();
    let v = cache.b(phi)?;
    let mut res = Vec::new();
    for eps in Sign::all() {
        let dx = build_dressed_with(params, eps, tx)?;
        let du: Vec<DressedOp<S>> = cache
            .monos
            .iter()
            .map(|t| build_dressed_with(params, eps, t))
            .collect::<Result<_>>()?;
        let e = eps.eps();
        let mut out = Vec::new();
        for a in 1..=n {
            for ap in 1..=n {
                let lhs = tx.entry(e * a, e * ap).apply(&v)?;
                let rhs = prop2_rhs(&cache, phi, (&dx, &du), (a, ap), variants)?;
                out.push(Residual::of_vecs(&lhs, &rhs)?);
            }
        }
        res.push(max_all(S::BACKEND, out));
    }
    Ok([res[0].clone(), res[1].clone()])
}

/// ‖𝔙‖ for Φ, used to flag vacuous configurations.
pub fn b_vector_norm<S: Scalar>(params: &BetheParams<S>, phi: &SparseVec<S>) -> Result<f64> {
    Ok(build_b_vector(params, phi)?.norm())
}

/// Spanning set of the Theorem 2 domain: every head basis vector times W₀.
pub fn descendant_span<S: Scalar>(
    params: &BetheParams<S>,
    basis: &W0Basis<S>,
) -> Result<Vec<SparseVec<S>>> {
    let head_legs = params.head_legs();
    let mut out = Vec::new();
    for h in 0..total_dim(&head_legs) {
        let head = SparseVec::basis_key(head_legs.clone(), h);
        for w in &basis.vectors {
            out.push(head.tensor(w));
        }
    }
    Ok(out)
}

/// R^(ε,ε′)(xy⁻¹)T̂^(ε)₀(x)T̂^(ε′)₀′(y) = T̂^(ε′)₀′(y)T̂^(ε)₀(x)R^(ε,ε′)(xy⁻¹)
/// on V_ε ⊗ V_ε′ ⊗ (heads ⊗ W₀).
pub fn verify_theorem2<S: Scalar>(
    params: &BetheParams<S>,
    basis: &W0Basis<S>,
    e1: Sign,
    e2: Sign,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let n = params.n();
    let h1 = LegSpace::half(n, e1.eps());
    let h2 = LegSpace::half(n, e2.eps());
    let phi = params.phi_legs();
    let mut legs = vec![h1, h2];
    legs.extend(phi.iter().copied());
    let rest: Vec<usize> = (2..legs.len()).collect();
    let mut p1 = vec![0];
    p1.extend(&rest);
    let mut p2 = vec![1];
    p2.extend(&rest);
    let a = build_dressed(params, e1, x)?.aux_op()?.embed(&legs, &p1)?;
    let b = build_dressed(params, e2, y)?.aux_op()?.embed(&legs, &p2)?;
    let r = build_block_r(params.ctx(), e1, e2, &(x.clone() * inverse(y)?))?
        .op
        .embed(&legs, &[0, 1])?;
    let span = descendant_span(params, basis)?;
    let mut out = Vec::new();
    for i in h1.indices() {
        for k in h2.indices() {
            let head = SparseVec::basis(vec![h1, h2], &[i, k])?;
            for v in &span {
                let w = head.tensor(v);
                let lhs = r.apply(&a.apply(&b.apply(&w)?)?)?;
                let rhs = b.apply(&a.apply(&r.apply(&w)?)?)?;
                out.push(Residual::of_vecs(&lhs, &rhs)?);
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// [Ĥ^(ε)(x), Ĥ^(ε′)(y)] on heads ⊗ W₀ for all four sign pairs.
pub fn verify_hat_traces_commute<S: Scalar>(
    params: &BetheParams<S>,
    basis: &W0Basis<S>,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let hx: Vec<SparseOp<S>> = Sign::all()
        .iter()
        .map(|&e| build_dressed(params, e, x)?.hat_trace())
        .collect::<Result<_>>()?;
    let hy: Vec<SparseOp<S>> = Sign::all()
        .iter()
        .map(|&e| build_dressed(params, e, y)?.hat_trace())
        .collect::<Result<_>>()?;
    let span = descendant_span(params, basis)?;
    let mut out = Vec::new();
    for a in &hx {
        for b in &hy {
            for v in &span {
                let l = a.apply(&b.apply(v)?)?;
                let r = b.apply(&a.apply(v)?)?;
                out.push(Residual::of_vecs(&l, &r)?);
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// Exact form of Theorem 1 at arbitrary ū: H(x)𝔙 equals E𝔙 plus the M
/// unwanted terms g(xu_k⁻¹)·(BP-1 residual)·⟨B_{k;}(x;ū_k), exchange_k Ω̂⟩.
pub fn verify_theorem1_decomposition<S: Scalar>(
    params: &BetheParams<S>,
    x: &S,
) -> Result<Residual> {
    let ctx = params.ctx();
    let cache = BCache::new(params, x)?;
    let omega = params.nested_vacuum_vec()?;
    let v = cache.b(&omega)?;
    let h = cache.at_x().transfer()?;
    let eig = EigPackage::new(params);
    let lhs = h.apply(&v)?;
    let mut rhs = v.scale(&eig.energy(x)?);
    let bp = eig.bethe_residuals()?;
    for k in 1..=params.m() {
        let g = ctx.g(&(x.clone() * inverse(&params.us[k - 1])?))?;
        let term = cache.b_replaced(k, &cache.exchange(k, &omega)?)?;
        rhs = rhs.add(&term.scale(&(g * bp[k - 1].clone())))?;
    }
    Residual::of_vecs(&lhs, &rhs)
}

/// End-to-end eigenvector check at the given ū: max over x of
/// ‖H(x)𝔙 − E(x)𝔙‖/‖𝔙‖.
pub fn verify_theorem1<S: Scalar>(params: &BetheParams<S>, xs: &[S]) -> Result<(f64, Vec<S>)> {
    let omega = params.nested_vacuum_vec()?;
    let v = build_b_vector(params, &omega)?;
    let norm = v.norm();
    if v.is_zero() || norm == 0.0 {
        return Err(Error::ZeroBetheVector);
    }
    let eig = EigPackage::new(params);
    let mut worst = 0.0f64;
    let mut energies = Vec::new();
    for x in xs {
        let h = params.rep.monodromy(x)?.transfer()?;
        let e = eig.energy(x)?;
        let d = h.apply(&v)?.sub(&v.scale(&e))?;
        worst = worst.max(d.norm() / norm);
        energies.push(e);
    }
    Ok((worst, energies))
}

// ---------------------------------------------------------------------------
// root solver (float backend)

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverCfg {
    pub max_iter: usize,
    pub tolerance: f64,
    pub max_seeds: usize,
    pub max_roots: usize,
}

impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg {
            max_iter: 100,
            tolerance: 1e-12,
            max_seeds: 400,
            max_roots: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSet {
    pub us: Vec<Complex64>,
    /// max |A/B − 1| over the Bethe equations
    pub ratio_residual: f64,
    pub b_vector_norm: f64,
}

type C = Complex64;

fn ratio_residuals(rep: &ChainRep<C>, us: &[C]) -> Result<Vec<C>> {
    let params = BetheParams::new(rep.clone(), us.to_vec())?;
    let eig = EigPackage::new(&params);
    (0..us.len())
        .map(|k| {
            let (a, b) = eig.bethe_sides(k)?;
            a.checked_div(&b)
                .map(|r| r - C::new(1.0, 0.0))
                .ok_or_else(|| Error::PoleError("Bethe ratio denominator vanishes".into()))
        })
        .collect()
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn newton(rep: &ChainRep<C>, start: Vec<C>, cfg: &SolverCfg) -> Option<Vec<C>> {
    let m = start.len();
    let mut us = start;
    for _ in 0..cfg.max_iter {
        let r = ratio_residuals(rep, &us).ok()?;
        if max_norm(&r) < cfg.tolerance {
            return Some(us);
        }
        let mut jac = DMatrix::<C>::zeros(m, m);
        for j in 0..m {
            let h = 1e-7 * us[j].norm().max(1.0);
            let mut shifted = us.clone();
            shifted[j] += C::new(h, 0.0);
            let r2 = ratio_residuals(rep, &shifted).ok()?;
            for i in 0..m {
                jac[(i, j)] = (r2[i] - r[i]) / h;
            }
        }
        let step = jac.lu().solve(&DVector::from_vec(r.clone()))?;
        // backtrack: A/B flattens out at infinity, so full steps can run away
        let current = max_norm(&r);
        let mut t = 1.0;
        loop {
            let trial: Vec<C> = (0..m).map(|j| us[j] - step[j] * t).collect();
            let ok = trial
                .iter()
                .all(|u| u.re.is_finite() && u.im.is_finite() && u.norm() < 1e8);
            if ok {
                if let Ok(r2) = ratio_residuals(rep, &trial) {
                    if max_norm(&r2) < current {
                        us = trial;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
    }
    let r = ratio_residuals(rep, &us).ok()?;
    (max_norm(&r) < cfg.tolerance).then_some(us)
}

/// Whether A_k ≡ B_k identically (checked at random points), in which case
/// roots are not isolated.
fn degenerate(rep: &ChainRep<C>, m: usize, rng: &mut ChaCha8Rng) -> bool {
    let mut hits = 0;
    for _ in 0..5 {
        let us: Vec<C> = (0..m)
            .map(|_| C::new(rng.gen_range(0.4..2.5), rng.gen_range(-2.0..2.0)))
            .collect();
        if let Ok(r) = ratio_residuals(rep, &us) {
            if max_norm(&r) < 1e-10 {
                hits += 1;
            }
        }
    }
    hits == 5
}

fn seeds(rep: &ChainRep<C>, m: usize, count: usize) -> Vec<Vec<C>> {
    let q = *rep.ctx().q();
    let ws: Vec<C> = if rep.spec.inhom.is_empty() {
        vec![C::new(1.0, 0.0)]
    } else {
        rep.spec.inhom.clone()
    };
    let mut singles = Vec::new();
    for w in &ws {
        for p in -2i32..=2 {
            for j in 0..8 {
                let phase = C::from_polar(1.0, std::f64::consts::PI * (2 * j + 1) as f64 / 8.0);
                singles.push(w * q.powi(p) * phase);
            }
        }
    }
    let mut out = Vec::new();
    if m == 1 {
        out = singles.into_iter().map(|s| vec![s]).collect();
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rep.ctx().seed() ^ 0x0b_e7_4e);
        while out.len() < count {
            let pick: Vec<C> = (0..m)
                .map(|_| singles[rng.gen_range(0..singles.len())])
                .collect();
            out.push(pick);
        }
    }
    out.truncate(count);
    out
}

fn same_set(a: &[C], b: &[C]) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        for (j, y) in b.iter().enumerate() {
            if !used[j] && (x - y).norm() < 1e-8 * x.norm().max(1.0) {
                used[j] = true;
                return true;
            }
        }
        false
    })
}

/// Solves (BP-1) for Φ = Ω̂ by Newton iteration from shifted inhomogeneities.
/// Root sets with 𝔙 = 0, coincident entries or entries at inhomogeneities are
/// discarded.
pub fn solve_bethe_roots(rep: &ChainRep<C>, m: usize, cfg: &SolverCfg) -> Result<Vec<RootSet>> {
    if m == 0 {
        return Ok(vec![RootSet {
            us: vec![],
            ratio_residual: 0.0,
            b_vector_norm: 1.0,
        }]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rep.ctx().seed());
    if degenerate(rep, m, &mut rng) {
        return Err(Error::NoRootFound(
            "degenerate family: the Bethe equations hold identically".into(),
        ));
    }
    let mut found: Vec<RootSet> = Vec::new();
    let mut zero_vectors = 0;
    for start in seeds(rep, m, cfg.max_seeds) {
        if found.len() >= cfg.max_roots {
            break;
        }
        let us = match newton(rep, start, cfg) {
            Some(us) => us,
            None => continue,
        };
        let distinct = (0..m).all(|a| (a + 1..m).all(|b| (us[a] - us[b]).norm() > 1e-6));
        let off_sites = us
            .iter()
            .all(|u| rep.spec.inhom.iter().all(|w| (u - w).norm() > 1e-6));
        if !distinct || !off_sites || found.iter().any(|r| same_set(&r.us, &us)) {
            continue;
        }
        let params = BetheParams::new(rep.clone(), us.clone())?;
        let omega = params.nested_vacuum_vec()?;
        let v = match build_b_vector(&params, &omega) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let scale: f64 = us
            .iter()
            .map(|u| rep.monodromy(u).map(|t| t.full.max_abs()).unwrap_or(1.0))
            .product::<f64>()
            .max(1.0);
        if v.norm() <= 1e-9 * scale {
            zero_vectors += 1;
            continue;
        }
        let r = ratio_residuals(rep, &us)?;
        found.push(RootSet {
            us,
            ratio_residual: max_norm(&r),
            b_vector_norm: v.norm(),
        });
    }
    if found.is_empty() {
        return Err(Error::NoRootFound(format!(
            "no admissible root set (rejected {zero_vectors} with vanishing Bethe vector)"
        )));
    }
    Ok(found)
}

/// Roots u² of the n = 1 single-root equation λ₁(u) = λ₋₁(u) from the
/// companion matrix of its polynomial form in t = u²; independent of the
/// Newton solver. Only used for L ≥ 1.
pub fn companion_roots_n1(q: C, ws: &[C]) -> Vec<C> {
    // ∏(tq² − w²)∏(w² − tq⁴) − q^{2L}∏(w² − tq²)∏(t − w²)
    let mul = |a: &[C], b: &[C]| -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let q2 = q * q;
    let q4 = q2 * q2;
    let mut p1 = vec![C::new(1.0, 0.0)];
    let mut p2 = vec![C::new(1.0, 0.0)];
    for w in ws {
        let w2 = w * w;
        p1 = mul(&p1, &[-w2, q2]);
        p1 = mul(&p1, &[w2, -q4]);
        p2 = mul(&p2, &[w2, -q2]);
        p2 = mul(&p2, &[-w2, C::new(1.0, 0.0)]);
    }
    let ql = q2.powi(ws.len() as i32);
    let mut poly: Vec<C> = p1.iter().zip(&p2).map(|(a, b)| a - ql * b).collect();
    while poly.len() > 1 && poly.last().is_some_and(|c| c.norm() < 1e-14) {
        poly.pop();
    }
    let deg = poly.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = poly[deg];
    let mut comp = DMatrix::<C>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly[i] / lead;
    }
    comp.eigenvalues()
        .map(|e| e.iter().copied().collect())
        .unwrap_or_else(|| {
            comp.schur()
                .eigenvalues()
                .map(|e| e.iter().copied().collect())
                .unwrap_or_default()
        })
}

/// Random Φ with small rational (or float) components, for Proposition 2.
pub fn random_phi<S: Scalar>(
    params: &BetheParams<S>,
    rng: &mut ChaCha8Rng,
    density: f64,
) -> SparseVec<S> {
    let legs = params.phi_legs();
    let mut v = SparseVec::zero(legs.clone());
    for k in 0..total_dim(&legs) {
        if rng.gen_bool(density) {
            let p = rng.gen_range(-9i64..=9);
            let r = rng.gen_range(1i64..=9);
            v.insert_key(k, S::from_ratio(p, r));
        }
    }
    if v.is_zero() {
        v.insert_key(0, S::one());
    }
    v
}

/// Independent subset of heads ⊗ W₀ (for reporting the domain size).
pub fn descendant_dim<S: Scalar>(params: &BetheParams<S>, basis: &W0Basis<S>) -> Result<usize> {
    Ok(reduce_span(descendant_span(params, basis)?).len())
}

/// Key of Ω̂ inside the Φ space.
pub fn nested_vacuum_key<S: Scalar>(params: &BetheParams<S>) -> Result<u64> {
    let m = params.m();
    let mut idx = vec![1; m];
    idx.extend(vec![-1; m]);
    idx.extend(vec![params.rep.vacuum_index; params.rep.spec.len()]);
    encode(&params.phi_legs(), &idx)
}

/// (R̂^(+,+)_{1*…k*})⁻¹ is invertible: its product with the forward factors is the identity.
pub fn verify_exchange_invertible<S: Scalar>(
    params: &BetheParams<S>,
    k: usize,
) -> Result<Residual> {
    let (pp, _) = build_exchange_chain(params, k)?;
    let n = params.n();
    let m = params.m();
    let dl = vec![LegSpace::plus_dual(n); m];
    let mut fwd = SparseOp::identity(dl.clone());
    let uk = inverse(&params.us[k - 1])?;
    for j in (1..k).rev() {
        let ratio = params.us[j - 1].clone() * uk.clone();
        // forward factor: R^(+,+) with both legs transposed
        let r = build_block_r(params.ctx(), Sign::Plus, Sign::Plus, &ratio)?.op;
        let mut fwd_factor = SparseOp::zero(vec![LegSpace::plus_dual(n); 2]);
        for (&(row, col), v) in r.entries() {
            fwd_factor.insert_key(col, row, v.clone());
        }
        fwd = fwd.mul(&fwd_factor.embed(&dl, &[j - 1, k - 1])?)?;
    }
    Residual::of_ops(&fwd.mul(&pp)?, &SparseOp::identity(dl))
}
