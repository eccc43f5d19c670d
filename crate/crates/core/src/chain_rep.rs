//! Inhomogeneous fundamental chains as representations of the RTT algebra.
//!
//! The monodromy is T₀(x) = R₀₁(x/w₁)⋯R₀L(x/w_L) on the auxiliary leg 0 and
//! L site legs; T^i_k(x) is the (row i, column k) block of the auxiliary leg.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::residual::{max_all, Residual};
use crate::rmatrices::{build_block_r, build_full_r, Sign};
use crate::scalar_field::{
    inverse, sample_points_with, Constraint, FieldCtx, Scalar, DEFAULT_BOUND,
};
use crate::tensor_alg::{epsilon, signed_indices, theta, total_dim, LegSpace, SparseOp, SparseVec};

#[derive(Clone, Debug)]
pub struct ChainSpec<S> {
    pub ctx: FieldCtx<S>,
    pub inhom: Vec<S>,
}

impl<S: Scalar> ChainSpec<S> {
    pub fn new(ctx: FieldCtx<S>, inhom: Vec<S>) -> Result<Self> {
        for (a, wa) in inhom.iter().enumerate() {
            if wa.is_zero() {
                return Err(Error::ConfigError(format!(
                    "inhomogeneity w{} is zero",
                    a + 1
                )));
            }
            for wb in &inhom[a + 1..] {
                if wa == wb {
                    return Err(Error::ConfigError(
                        "inhomogeneities must be distinct".into(),
                    ));
                }
            }
        }
        Ok(ChainSpec { ctx, inhom })
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }
    pub fn len(&self) -> usize {
        self.inhom.len()
    }
    pub fn is_empty(&self) -> bool {
        self.inhom.is_empty()
    }
    pub fn site_legs(&self) -> Vec<LegSpace> {
        vec![LegSpace::full(self.n()); self.len()]
    }
    pub fn state_dim(&self) -> u64 {
        total_dim(&self.site_legs())
    }

    /// Avoidance constraints for spectral parameters evaluated on this chain.
    pub fn avoid(&self) -> Vec<Constraint<S>> {
        let max = 2 * self.n() as i32 + 4;
        vec![
            Constraint::QShifts { max },
            Constraint::RatioShifts {
                points: self.inhom.clone(),
                max,
            },
            Constraint::PairwiseGeneric { max },
        ]
    }
}

/// All entries T^i_k(x) of the monodromy at one spectral parameter.
#[derive(Clone, Debug)]
pub struct Monodromy<S> {
    pub x: S,
    pub full: SparseOp<S>,
    entries: BTreeMap<(i32, i32), SparseOp<S>>,
    site_legs: Vec<LegSpace>,
}

impl<S: Scalar> Monodromy<S> {
    pub fn build(spec: &ChainSpec<S>, x: &S) -> Result<Self> {
        let n = spec.n();
        let aux = LegSpace::full(n);
        let site_legs = spec.site_legs();
        let mut legs = vec![aux];
        legs.extend(site_legs.iter().copied());
        let mut t = SparseOp::identity(legs.clone());
        for (l, w) in spec.inhom.iter().enumerate() {
            let ratio = x.clone() * inverse(w)?;
            let r = build_full_r(&spec.ctx, &ratio)
                .map_err(|e| e.with_context(&format!("site {}", l + 1)))?;
            t = t.mul(&r.op.embed(&legs, &[0, l + 1])?)?;
        }
        // split by auxiliary (row, column)
        let inner = total_dim(&site_legs);
        let mut entries: BTreeMap<(i32, i32), SparseOp<S>> = BTreeMap::new();
        for &i in &signed_indices(n) {
            for &k in &signed_indices(n) {
                entries.insert((i, k), SparseOp::zero(site_legs.clone()));
            }
        }
        for (&(r, c), v) in t.entries() {
            let (ar, ac) = (r / inner, c / inner);
            let key = (aux.index_at(ar as usize), aux.index_at(ac as usize));
            entries.get_mut(&key).expect("all keys present").insert_key(
                r % inner,
                c % inner,
                v.clone(),
            );
        }
        Ok(Monodromy {
            x: x.clone(),
            full: t,
            entries,
            site_legs,
        })
    }

    pub fn entry(&self, i: i32, k: i32) -> &SparseOp<S> {
        &self.entries[&(i, k)]
    }

    pub fn site_legs(&self) -> &[LegSpace] {
        &self.site_legs
    }

    /// T^(ε)(x) as an operator on [V_ε, sites].
    pub fn half(&self, eps: Sign) -> Result<SparseOp<S>> {
        let n = self.full.legs()[0].n;
        self.full.restrict_leg(0, LegSpace::half(n, eps.eps()))
    }

    /// H(x) = Σ_i T^i_i(x)
    pub fn transfer(&self) -> Result<SparseOp<S>> {
        self.full.partial_trace(0)
    }

    /// H̃^(ε)(x) = Σ_{i>0} T^{εi}_{εi}(x)
    pub fn half_trace(&self, eps: Sign) -> Result<SparseOp<S>> {
        let n = self.full.legs()[0].n as i32;
        let mut acc = SparseOp::zero(self.site_legs.clone());
        for i in 1..=n {
            let e = eps.eps() * i;
            acc = acc.add(self.entry(e, e))?;
        }
        Ok(acc)
    }
}

/// A chain with its vacuum.
#[derive(Clone, Debug)]
pub struct ChainRep<S> {
    pub spec: ChainSpec<S>,
    /// index m with ω = e_m^{⊗L}
    pub vacuum_index: i32,
    pub vacuum: SparseVec<S>,
}

fn product_vector<S: Scalar>(spec: &ChainSpec<S>, m: i32) -> Result<SparseVec<S>> {
    SparseVec::basis(spec.site_legs(), &vec![m; spec.len()])
}

fn negligible<S: Scalar>(v: &SparseVec<S>, scale: f64) -> bool {
    v.values().all(|x| x.is_negligible(scale))
}

/// Scalar c with v = c·w, if any.
fn proportional<S: Scalar>(v: &SparseVec<S>, w: &SparseVec<S>) -> Option<S> {
    let (&key, pivot) = w.entries().next()?;
    let c = v.get_key(key).checked_div(pivot)?;
    let rest = v.sub(&w.scale(&c)).ok()?;
    let scale = v.max_abs().max(1.0);
    if negligible(&rest, scale) {
        Some(c)
    } else {
        None
    }
}

impl<S: Scalar> ChainRep<S> {
    /// Searches the product vectors e_m^{⊗L} for a vacuum. Sample points are
    /// drawn from the context seed.
    pub fn find_vacuum(spec: ChainSpec<S>) -> Result<Self> {
        let n = spec.n();
        if spec.is_empty() {
            let vacuum = SparseVec::scalar(S::one());
            return Ok(ChainRep {
                spec,
                vacuum_index: n as i32,
                vacuum,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.ctx.seed() ^ 0x5_eed0_f7ac);
        let xs = sample_points_with(&spec.ctx, &mut rng, 3, &spec.avoid(), DEFAULT_BOUND)?;
        let monos: Vec<Monodromy<S>> = xs
            .iter()
            .map(|x| Monodromy::build(&spec, x))
            .collect::<Result<_>>()?;
        let idx = signed_indices(n);
        'cand: for &m in &idx {
            let v = product_vector(&spec, m)?;
            for t in &monos {
                for &i in &idx {
                    for &k in &idx {
                        let w = t.entry(i, k).apply(&v)?;
                        if i < k && !negligible(&w, 1.0) {
                            continue 'cand;
                        }
                        if i == k && proportional(&w, &v).is_none() {
                            continue 'cand;
                        }
                    }
                }
            }
            return Ok(ChainRep {
                spec,
                vacuum_index: m,
                vacuum: v,
            });
        }
        Err(Error::NoVacuumFound)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }
    pub fn ctx(&self) -> &FieldCtx<S> {
        &self.spec.ctx
    }
    pub fn monodromy(&self, x: &S) -> Result<Monodromy<S>> {
        Monodromy::build(&self.spec, x)
    }
    pub fn vacuum_key(&self) -> u64 {
        self.vacuum.entries().next().map(|(k, _)| *k).unwrap_or(0)
    }

    /// λ_i(x) for every signed i, checking T^i_i(x)ω ∝ ω.
    pub fn weights_from(&self, t: &Monodromy<S>) -> Result<BTreeMap<i32, S>> {
        let mut out = BTreeMap::new();
        for &i in &signed_indices(self.n()) {
            let w = t.entry(i, i).apply(&self.vacuum)?;
            let c = proportional(&w, &self.vacuum)
                .ok_or_else(|| Error::NotAnEigenvector(format!("T^{i}_{i} on the vacuum")))?;
            out.insert(i, c);
        }
        Ok(out)
    }

    pub fn weights(&self, x: &S) -> Result<BTreeMap<i32, S>> {
        self.weights_from(&self.monodromy(x)?)
    }

    /// λ_i(x) alone, read off the vacuum diagonal entry.
    pub fn lambda(&self, t: &Monodromy<S>, i: i32) -> S {
        let k = self.vacuum_key();
        t.entry(i, i).get_key(k, k)
    }

    /// Spanning set of 𝒲₀: words A⁺…A⁻…ω of total length ≤ depth in the
    /// generators T^{±i}_{±k}(a), i,k > 0, reduced to an independent set.
    pub fn build_w0(&self, depth: usize, params: &[S]) -> Result<W0Basis<S>> {
        let n = self.n() as i32;
        let monos: Vec<Monodromy<S>> = params
            .iter()
            .map(|a| self.monodromy(a))
            .collect::<Result<_>>()?;
        let gens = |s: i32| -> Vec<&SparseOp<S>> {
            let mut g = Vec::new();
            for t in &monos {
                for i in 1..=n {
                    for k in 1..=n {
                        g.push(t.entry(s * i, s * k));
                    }
                }
            }
            g
        };
        let (gp, gm) = (gens(1), gens(-1));
        // minus words first, tracking their length
        let mut layers: Vec<Vec<SparseVec<S>>> = vec![vec![self.vacuum.clone()]];
        for d in 1..=depth {
            let mut next = Vec::new();
            for v in &layers[d - 1] {
                for g in &gm {
                    let w = g.apply(v)?;
                    if !w.is_zero() {
                        next.push(w);
                    }
                }
            }
            layers.push(reduce_span(next));
        }
        let mut all = Vec::new();
        for (d, layer) in layers.iter().enumerate() {
            let mut cur = layer.clone();
            all.extend(cur.iter().cloned());
            for _ in d..depth {
                let mut next = Vec::new();
                for v in &cur {
                    for g in &gp {
                        let w = g.apply(v)?;
                        if !w.is_zero() {
                            next.push(w);
                        }
                    }
                }
                cur = reduce_span(next);
                all.extend(cur.iter().cloned());
            }
        }
        Ok(W0Basis {
            vectors: reduce_span(all),
            depth,
        })
    }

    /// Default W₀ spanning set: depth 2 at two sample parameters.
    pub fn default_w0(&self, depth: usize) -> Result<W0Basis<S>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.ctx().seed() ^ 0x00_77_0b_a5);
        let params =
            sample_points_with(self.ctx(), &mut rng, 2, &self.spec.avoid(), DEFAULT_BOUND)?;
        self.build_w0(depth, &params)
    }
}

#[derive(Clone, Debug)]
pub struct W0Basis<S> {
    pub vectors: Vec<SparseVec<S>>,
    pub depth: usize,
}

/// Row-echelon reduction to an independent subset of the span.
pub fn reduce_span<S: Scalar>(vecs: Vec<SparseVec<S>>) -> Vec<SparseVec<S>> {
    let scale = vecs.iter().map(|v| v.max_abs()).fold(1.0, f64::max);
    let mut basis: Vec<(u64, SparseVec<S>)> = Vec::new();
    for mut v in vecs {
        for (p, b) in &basis {
            let c = v.get_key(*p);
            if !c.is_zero() {
                v = v.sub(&b.scale(&c)).expect("same legs");
            }
        }
        let mut best: Option<(u64, S)> = None;
        for (&k, x) in v.entries() {
            if x.is_negligible(scale) {
                continue;
            }
            if best
                .as_ref()
                .is_none_or(|(_, b)| x.magnitude() > b.magnitude())
            {
                best = Some((k, x.clone()));
            }
        }
        if let Some((k, pivot)) = best {
            let inv = pivot.inv().expect("nonzero pivot");
            basis.push((k, v.scale(&inv)));
        }
    }
    basis.into_iter().map(|(_, v)| v).collect()
}

pub fn rtt_residual<S: Scalar>(rep: &ChainRep<S>, x: &S, y: &S) -> Result<Residual> {
    let n = rep.n();
    let aux = LegSpace::full(n);
    let mut legs = vec![aux, aux];
    legs.extend(rep.spec.site_legs());
    let sites: Vec<usize> = (2..legs.len()).collect();
    let tx = rep.monodromy(x)?.full;
    let ty = rep.monodromy(y)?.full;
    let mut p1 = vec![0];
    p1.extend(&sites);
    let mut p2 = vec![1];
    p2.extend(&sites);
    let t1 = tx.embed(&legs, &p1)?;
    let t2 = ty.embed(&legs, &p2)?;
    let r = build_full_r(rep.ctx(), &(x.clone() * inverse(y)?))?
        .op
        .embed(&legs, &[0, 1])?;
    Residual::of_ops(&r.mul(&t1)?.mul(&t2)?, &t2.mul(&t1)?.mul(&r)?)
}

/// Applies `ops` right to left.
fn apply_chain<S: Scalar>(ops: &[&SparseOp<S>], v: &SparseVec<S>) -> Result<SparseVec<S>> {
    let mut w = v.clone();
    for op in ops.iter().rev() {
        w = op.apply(&w)?;
    }
    Ok(w)
}

/// max over i,k > 0 and v in the basis of ‖T^{−i}_k(x)v‖.
pub fn verify_lemma1<S: Scalar>(rep: &ChainRep<S>, basis: &W0Basis<S>, x: &S) -> Result<Residual> {
    let t = rep.monodromy(x)?;
    let n = rep.n() as i32;
    let mut out = Vec::new();
    for i in 1..=n {
        for k in 1..=n {
            for v in &basis.vectors {
                let w = t.entry(-i, k).apply(v)?;
                out.push(Residual::of_vecs(&w, &SparseVec::zero(w.legs().to_vec()))?);
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// R^(ε1,ε2)(x/y)T₁^(ε1)(x)T₂^(ε2)(y) − T₂^(ε2)(y)T₁^(ε1)(x)R^(ε1,ε2)(x/y) on
/// (V_ε1 ⊗ V_ε2) ⊗ span(basis).
pub fn verify_mixed_rtt<S: Scalar>(
    rep: &ChainRep<S>,
    basis: &W0Basis<S>,
    e1: Sign,
    e2: Sign,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let n = rep.n();
    let h1 = LegSpace::half(n, e1.eps());
    let h2 = LegSpace::half(n, e2.eps());
    let mut legs = vec![h1, h2];
    legs.extend(rep.spec.site_legs());
    let sites: Vec<usize> = (2..legs.len()).collect();
    let mut p1 = vec![0];
    p1.extend(&sites);
    let mut p2 = vec![1];
    p2.extend(&sites);
    let t1 = rep.monodromy(x)?.half(e1)?.embed(&legs, &p1)?;
    let t2 = rep.monodromy(y)?.half(e2)?.embed(&legs, &p2)?;
    let r = build_block_r(rep.ctx(), e1, e2, &(x.clone() * inverse(y)?))?
        .op
        .embed(&legs, &[0, 1])?;
    let mut out = Vec::new();
    for a in h1.indices() {
        for b in h2.indices() {
            let head = SparseVec::basis(vec![h1, h2], &[a, b])?;
            for w in &basis.vectors {
                let v = head.tensor(w);
                let lhs = apply_chain(&[&r, &t1, &t2], &v)?;
                let rhs = apply_chain(&[&t2, &t1, &r], &v)?;
                out.push(Residual::of_vecs(&lhs, &rhs)?);
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A1Variant {
    Rtt1,
    Rtt2,
}

fn dlt(a: i32, b: i32) -> bool {
    a == b
}

/// Componentwise commutation relation for one index quadruple, with both
/// monodromies precomputed.
pub fn a1_residual<S: Scalar>(
    ctx: &FieldCtx<S>,
    tx: &Monodromy<S>,
    ty: &Monodromy<S>,
    variant: A1Variant,
    (i, k, r, s): (i32, i32, i32, i32),
) -> Result<Residual> {
    let n = ctx.n() as i32;
    let (x, y) = (&tx.x, &ty.x);
    let xy = x.clone() * inverse(y)?;
    let yx = inverse(&xy)?;
    let t = |m: &Monodromy<S>, a, b| m.entry(a, b).clone();
    let prod = |a: SparseOp<S>, b: SparseOp<S>| a.mul(&b);
    let one = S::one();
    let th = |m: i32| S::from_i64(theta(m) as i64);
    let ee = |a: i32, b: i32| S::from_i64((epsilon(a) * epsilon(b)) as i64);
    let qn = |m: i32| ctx.qpow(m);
    let f = |z: &S| ctx.f(z);
    let g = |z: &S| ctx.g(z);
    let idx = signed_indices(ctx.n());
    let diag_factor = |same: bool, opp: bool, fa: &S, fb: &S| -> S {
        let mut c = one.clone();
        if same {
            c = c + fa.clone() - one.clone();
        }
        if opp {
            c = c + fb.clone() - one.clone();
        }
        c
    };
    let (lhs, rhs) = match variant {
        A1Variant::Rtt1 => {
            let fa = f(&xy)?;
            let fb = f(&(yx.clone() * qn(-n - 1)))?;
            let mut l = prod(t(tx, i, k), t(ty, r, s))?.scale(&diag_factor(
                dlt(i, r),
                dlt(i, -r),
                &fa,
                &fb,
            ));
            if i != r {
                let c = g(&xy)? * th(r - i) - g(&yx)? * th(i - r);
                l = l.add(&prod(t(tx, r, k), t(ty, i, s))?.scale(&c))?;
            }
            if i == -r {
                for &p in &idx {
                    let c = if p > i {
                        -g(&(xy.clone() * qn(n + 1)))? * qn(i - p) * ee(i, p)
                    } else if p < i {
                        g(&(yx.clone() * qn(-n - 1)))? * qn(i - p) * ee(i, p)
                    } else {
                        continue;
                    };
                    l = l.add(&prod(t(tx, p, k), t(ty, -p, s))?.scale(&c))?;
                }
            }
            let mut rr = prod(t(ty, r, s), t(tx, i, k))?.scale(&diag_factor(
                dlt(k, s),
                dlt(k, -s),
                &fa,
                &fb,
            ));
            if k != s {
                let c = g(&xy)? * th(k - s) - g(&yx)? * th(s - k);
                rr = rr.add(&prod(t(ty, r, k), t(tx, i, s))?.scale(&c))?;
            }
            if k == -s {
                for &p in &idx {
                    let c = if p < k {
                        -g(&(xy.clone() * qn(n + 1)))? * qn(p - k) * ee(k, p)
                    } else if p > k {
                        g(&(yx.clone() * qn(-n - 1)))? * qn(p - k) * ee(k, p)
                    } else {
                        continue;
                    };
                    rr = rr.add(&prod(t(ty, r, -p), t(tx, i, p))?.scale(&c))?;
                }
            }
            (l, rr)
        }
        A1Variant::Rtt2 => {
            let fa = f(&yx)?;
            let fb = f(&(xy.clone() * qn(-n - 1)))?;
            let mut l = prod(t(tx, i, k), t(ty, r, s))?.scale(&diag_factor(
                dlt(k, s),
                dlt(k, -s),
                &fa,
                &fb,
            ));
            if k != s {
                let c = -g(&xy)? * th(k - s) + g(&yx)? * th(s - k);
                l = l.add(&prod(t(tx, i, s), t(ty, r, k))?.scale(&c))?;
            }
            if k == -s {
                for &p in &idx {
                    let c = if p < k {
                        g(&(xy.clone() * qn(-n - 1)))? * qn(k - p) * ee(k, p)
                    } else if p > k {
                        -g(&(yx.clone() * qn(n + 1)))? * qn(k - p) * ee(k, p)
                    } else {
                        continue;
                    };
                    l = l.add(&prod(t(tx, i, p), t(ty, r, -p))?.scale(&c))?;
                }
            }
            let mut rr = prod(t(ty, r, s), t(tx, i, k))?.scale(&diag_factor(
                dlt(i, r),
                dlt(i, -r),
                &fa,
                &fb,
            ));
            if i != r {
                let c = -g(&xy)? * th(r - i) + g(&yx)? * th(i - r);
                rr = rr.add(&prod(t(ty, i, s), t(tx, r, k))?.scale(&c))?;
            }
            if i == -r {
                for &p in &idx {
                    let c = if p > i {
                        g(&(xy.clone() * qn(-n - 1)))? * qn(p - i) * ee(i, p)
                    } else if p < i {
                        -g(&(yx.clone() * qn(n + 1)))? * qn(p - i) * ee(i, p)
                    } else {
                        continue;
                    };
                    rr = rr.add(&prod(t(ty, -p, s), t(tx, p, k))?.scale(&c))?;
                }
            }
            (l, rr)
        }
    };
    Residual::of_ops(&lhs, &rhs)
}

pub fn verify_a1_commutation<S: Scalar>(
    rep: &ChainRep<S>,
    variant: A1Variant,
    indices: (i32, i32, i32, i32),
    x: &S,
    y: &S,
) -> Result<Residual> {
    let (tx, ty) = (rep.monodromy(x)?, rep.monodromy(y)?);
    a1_residual(rep.ctx(), &tx, &ty, variant, indices)
}

/// Max over all index quadruples.
pub fn verify_a1_all<S: Scalar>(
    rep: &ChainRep<S>,
    variant: A1Variant,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let (tx, ty) = (rep.monodromy(x)?, rep.monodromy(y)?);
    let idx = signed_indices(rep.n());
    let mut out = Vec::new();
    for &i in &idx {
        for &k in &idx {
            for &r in &idx {
                for &s in &idx {
                    out.push(a1_residual(rep.ctx(), &tx, &ty, variant, (i, k, r, s))?);
                }
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

/// [H(x), H(y)] on the whole chain.
pub fn verify_transfer_commute<S: Scalar>(rep: &ChainRep<S>, x: &S, y: &S) -> Result<Residual> {
    let hx = rep.monodromy(x)?.transfer()?;
    let hy = rep.monodromy(y)?.transfer()?;
    Residual::of_ops(&hx.mul(&hy)?, &hy.mul(&hx)?)
}

/// [H̃^(ε)(x), H̃^(ε′)(y)] on the W₀ spanning set, all four sign pairs.
pub fn verify_half_traces_commute<S: Scalar>(
    rep: &ChainRep<S>,
    basis: &W0Basis<S>,
    x: &S,
    y: &S,
) -> Result<Residual> {
    let (tx, ty) = (rep.monodromy(x)?, rep.monodromy(y)?);
    let mut out = Vec::new();
    for e in Sign::all() {
        for ep in Sign::all() {
            let a = tx.half_trace(e)?;
            let b = ty.half_trace(ep)?;
            for v in &basis.vectors {
                let l = apply_chain(&[&a, &b], v)?;
                let r = apply_chain(&[&b, &a], v)?;
                out.push(Residual::of_vecs(&l, &r)?);
            }
        }
    }
    Ok(max_all(S::BACKEND, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmatrices::build_full_r;
    use crate::scalar_field::{rational, Rational};

    fn rep(n: usize, ws: &[(i64, i64)]) -> ChainRep<Rational> {
        let ctx = FieldCtx::new(n, rational(5, 3), 3).unwrap();
        let spec = ChainSpec::new(ctx, ws.iter().map(|&(p, r)| rational(p, r)).collect()).unwrap();
        ChainRep::find_vacuum(spec).unwrap()
    }

    #[test]
    fn empty_chain() {
        let r = rep(2, &[]);
        assert_eq!(r.vacuum_index, 2);
        let t = r.monodromy(&rational(7, 2)).unwrap();
        for i in signed_indices(2) {
            for k in signed_indices(2) {
                let e = t.entry(i, k);
                assert_eq!(
                    e.get_key(0, 0),
                    if i == k {
                        rational(1, 1)
                    } else {
                        rational(0, 1)
                    }
                );
            }
        }
        let h = t.transfer().unwrap();
        assert_eq!(h.get_key(0, 0), rational(4, 1));
        assert!(r
            .weights(&rational(7, 2))
            .unwrap()
            .values()
            .all(|v| *v == rational(1, 1)));
    }

    #[test]
    fn vacuum_search_is_unique_for_one_site() {
        let ctx = FieldCtx::new(1, rational(5, 3), 3).unwrap();
        let spec = ChainSpec::new(ctx, vec![rational(1, 1)]).unwrap();
        let r = ChainRep::find_vacuum(spec.clone()).unwrap();
        // the other candidate is rejected
        let x = rational(9, 4);
        let t = r.monodromy(&x).unwrap();
        let other = product_vector(&spec, -r.vacuum_index).unwrap();
        let lowered = t.entry(-1, 1).apply(&other).unwrap();
        assert!(!lowered.is_zero());
        assert_eq!(r.vacuum_index, 1);
    }

    #[test]
    fn single_site_weights_are_r_diagonals() {
        let r = rep(1, &[(3, 2)]);
        let x = rational(11, 5);
        let w = r.weights(&x).unwrap();
        let ratio = x.clone() / rational(3, 2);
        let rm = build_full_r(r.ctx(), &ratio).unwrap().op;
        let m = r.vacuum_index;
        for i in [-1, 1] {
            assert_eq!(w[&i], rm.coeff(&[(i, i), (m, m)]).unwrap());
        }
    }

    #[test]
    fn weights_multiply_over_sites() {
        let x = rational(11, 5);
        let two = rep(2, &[(3, 2), (-4, 7)]).weights(&x).unwrap();
        let a = rep(2, &[(3, 2)]).weights(&x).unwrap();
        let b = rep(2, &[(-4, 7)]).weights(&x).unwrap();
        for i in signed_indices(2) {
            assert_eq!(two[&i], a[&i].clone() * b[&i].clone());
        }
    }

    #[test]
    fn rtt_and_transfer_commute() {
        let r = rep(1, &[(3, 2), (-4, 7)]);
        let (x, y) = (rational(11, 5), rational(-2, 9));
        assert!(rtt_residual(&r, &x, &y).unwrap().exact_zero);
        assert!(verify_transfer_commute(&r, &x, &y).unwrap().exact_zero);
    }

    #[test]
    fn w0_depth_zero_and_one() {
        let r = rep(1, &[(3, 2)]);
        let b0 = r.build_w0(0, &[rational(7, 3)]).unwrap();
        assert_eq!(b0.vectors.len(), 1);
        let b1 = r.build_w0(1, &[rational(7, 3)]).unwrap();
        // T^1_1 ω and T^{-1}_{-1} ω are both ∝ ω on one site
        assert_eq!(b1.vectors.len(), 1);
    }

    #[test]
    fn lemma1_lemma2_and_a1() {
        for n in 1..=2 {
            let r = rep(n, &[(3, 2)]);
            let basis = r.default_w0(2).unwrap();
            let (x, y) = (rational(11, 5), rational(-2, 9));
            assert!(verify_lemma1(&r, &basis, &x).unwrap().exact_zero);
            for e1 in Sign::all() {
                for e2 in Sign::all() {
                    let res = verify_mixed_rtt(&r, &basis, e1, e2, &x, &y).unwrap();
                    assert!(res.exact_zero, "n={n} {e1:?}{e2:?}");
                }
            }
            for v in [A1Variant::Rtt1, A1Variant::Rtt2] {
                assert!(
                    verify_a1_all(&r, v, &x, &y).unwrap().exact_zero,
                    "n={n} {v:?}"
                );
            }
            assert!(
                verify_half_traces_commute(&r, &basis, &x, &y)
                    .unwrap()
                    .exact_zero
            );
        }
    }

    #[test]
    fn a1_spot_indices() {
        let r = rep(1, &[(3, 2)]);
        let (x, y) = (rational(11, 5), rational(-2, 9));
        assert!(
            verify_a1_commutation(&r, A1Variant::Rtt1, (1, 1, 1, 1), &x, &y)
                .unwrap()
                .exact_zero
        );
        assert!(
            verify_a1_commutation(&r, A1Variant::Rtt2, (1, -1, -1, 1), &x, &y)
                .unwrap()
                .exact_zero
        );
    }

    #[test]
    fn reduce_span_drops_dependent_vectors() {
        let l = vec![LegSpace::full(1)];
        let a = SparseVec::basis(l.clone(), &[1]).unwrap();
        let b = SparseVec::basis(l, &[-1]).unwrap();
        let c = a.add(&b.scale(&rational(3, 1))).unwrap();
        let out = reduce_span(vec![a, c, b]);
        assert_eq!(out.len(), 2);
    }
}
