//! Sparse operators and vectors over ordered lists of legs.
//!
//! A leg is one of V (indices ±1..±n), V₊ (1..n), V₋ (−1..−n) or the duals
//! V₊*, V₋*. Multi-indices are packed row-major into a `u64` (first leg most
//! significant) and entries live in ordered maps so every traversal, and so
//! every floating-point sum, happens in a fixed order.
//!
//! On a primal leg E^k_i has its 1 at (row i, column k), so
//! E^k_i E^s_r = δ^k_r E^s_i. On a dual leg F^r_s sits at (row r, column s),
//! i.e. F^r_s f^a = δ_{s,a} f^r.

use std::collections::BTreeMap;
use std::ops::Bound;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar_field::Scalar;

pub fn epsilon(i: i32) -> i32 {
    if i > 0 {
        1
    } else {
        -1
    }
}

pub fn theta(m: i32) -> i32 {
    if m > 0 {
        1
    } else {
        0
    }
}

/// −n, …, −1, 1, …, n in the signed order used by all "k < i" sums.
pub fn signed_indices(n: usize) -> Vec<i32> {
    let n = n as i32;
    (-n..=-1).chain(1..=n).collect()
}

/// Validated nonzero index in {−n..−1, 1..n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedIndex(i32);

impl SignedIndex {
    pub fn new(value: i32, n: usize) -> Result<Self> {
        if value == 0 || value.unsigned_abs() as usize > n {
            return Err(Error::IndexOutOfRange(format!("{value} not in ±1..±{n}")));
        }
        Ok(SignedIndex(value))
    }
    pub fn value(self) -> i32 {
        self.0
    }
    pub fn epsilon(self) -> i32 {
        epsilon(self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LegKind {
    VFull,
    VPlus,
    VMinus,
    VPlusDual,
    VMinusDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LegSpace {
    pub kind: LegKind,
    pub n: usize,
}

impl LegSpace {
    pub fn full(n: usize) -> Self {
        LegSpace {
            kind: LegKind::VFull,
            n,
        }
    }
    pub fn plus(n: usize) -> Self {
        LegSpace {
            kind: LegKind::VPlus,
            n,
        }
    }
    pub fn minus(n: usize) -> Self {
        LegSpace {
            kind: LegKind::VMinus,
            n,
        }
    }
    pub fn plus_dual(n: usize) -> Self {
        LegSpace {
            kind: LegKind::VPlusDual,
            n,
        }
    }
    pub fn minus_dual(n: usize) -> Self {
        LegSpace {
            kind: LegKind::VMinusDual,
            n,
        }
    }
    /// V₊ for ε = +1, V₋ for ε = −1.
    pub fn half(n: usize, eps: i32) -> Self {
        if eps > 0 {
            Self::plus(n)
        } else {
            Self::minus(n)
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            LegKind::VFull => 2 * self.n,
            _ => self.n,
        }
    }

    pub fn is_dual(&self) -> bool {
        matches!(self.kind, LegKind::VPlusDual | LegKind::VMinusDual)
    }

    /// The space a dual leg contracts against (and vice versa).
    pub fn partner(&self) -> Option<LegSpace> {
        let kind = match self.kind {
            LegKind::VPlus => LegKind::VPlusDual,
            LegKind::VPlusDual => LegKind::VPlus,
            LegKind::VMinus => LegKind::VMinusDual,
            LegKind::VMinusDual => LegKind::VMinus,
            LegKind::VFull => return None,
        };
        Some(LegSpace { kind, n: self.n })
    }

    pub fn contains(&self, i: i32) -> bool {
        let n = self.n as i32;
        match self.kind {
            LegKind::VFull => i != 0 && i.abs() <= n,
            LegKind::VPlus | LegKind::VPlusDual => (1..=n).contains(&i),
            LegKind::VMinus | LegKind::VMinusDual => (-n..=-1).contains(&i),
        }
    }

    pub fn position(&self, i: i32) -> Result<usize> {
        if !self.contains(i) {
            return Err(Error::IndexOutOfRange(format!("index {i} on {:?}", self)));
        }
        let n = self.n as i32;
        let p = match self.kind {
            LegKind::VFull => {
                if i < 0 {
                    i + n
                } else {
                    i + n - 1
                }
            }
            LegKind::VPlus | LegKind::VPlusDual => i - 1,
            LegKind::VMinus | LegKind::VMinusDual => i + n,
        };
        Ok(p as usize)
    }

    pub fn index_at(&self, p: usize) -> i32 {
        let n = self.n as i32;
        let p = p as i32;
        match self.kind {
            LegKind::VFull => {
                if p < n {
                    p - n
                } else {
                    p - n + 1
                }
            }
            LegKind::VPlus | LegKind::VPlusDual => p + 1,
            LegKind::VMinus | LegKind::VMinusDual => p - n,
        }
    }

    pub fn indices(&self) -> Vec<i32> {
        (0..self.dim()).map(|p| self.index_at(p)).collect()
    }
}

/// Row-major strides; the last leg varies fastest.
pub fn strides(legs: &[LegSpace]) -> Vec<u64> {
    let mut s = vec![1u64; legs.len()];
    for k in (0..legs.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * legs[k + 1].dim() as u64;
    }
    s
}

pub fn total_dim(legs: &[LegSpace]) -> u64 {
    legs.iter().map(|l| l.dim() as u64).product()
}

pub fn encode(legs: &[LegSpace], idx: &[i32]) -> Result<u64> {
    if idx.len() != legs.len() {
        return Err(Error::LegMismatch(format!(
            "{} indices for {} legs",
            idx.len(),
            legs.len()
        )));
    }
    let st = strides(legs);
    let mut key = 0;
    for ((leg, &i), s) in legs.iter().zip(idx).zip(st) {
        key += leg.position(i)? as u64 * s;
    }
    Ok(key)
}

pub fn decode(legs: &[LegSpace], key: u64) -> Vec<i32> {
    digits(legs, key)
        .into_iter()
        .zip(legs)
        .map(|(d, l)| l.index_at(d))
        .collect()
}

/// Positional digits of a packed key.
pub fn digits(legs: &[LegSpace], mut key: u64) -> Vec<usize> {
    let mut out = vec![0; legs.len()];
    for k in (0..legs.len()).rev() {
        let d = legs[k].dim() as u64;
        out[k] = (key % d) as usize;
        key /= d;
    }
    out
}

fn check_legs(a: &[LegSpace], b: &[LegSpace], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::LegMismatch(format!("{what}: {:?} vs {:?}", a, b)));
    }
    Ok(())
}

fn insert_add<K: Ord, S: Scalar>(map: &mut BTreeMap<K, S>, key: K, v: S) {
    if v.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(v);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let t = std::mem::replace(e.get_mut(), S::zero()) + v;
            if t.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = t;
            }
        }
    }
}

/// Maps each key over `from` legs to the sub-key contributed at `positions` of `to`.
struct Scatter {
    from_strides: Vec<u64>,
    from_dims: Vec<u64>,
    to_strides: Vec<u64>,
}

impl Scatter {
    fn new(from: &[LegSpace], to: &[LegSpace], positions: &[usize]) -> Self {
        let ts = strides(to);
        Scatter {
            from_strides: strides(from),
            from_dims: from.iter().map(|l| l.dim() as u64).collect(),
            to_strides: positions.iter().map(|&p| ts[p]).collect(),
        }
    }
    fn map(&self, key: u64) -> u64 {
        let mut out = 0;
        for k in 0..self.from_strides.len() {
            let d = (key / self.from_strides[k]) % self.from_dims[k];
            out += d * self.to_strides[k];
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp<S> {
    legs: Vec<LegSpace>,
    entries: BTreeMap<(u64, u64), S>,
}

impl<S: Scalar> SparseOp<S> {
    pub fn zero(legs: Vec<LegSpace>) -> Self {
        SparseOp {
            legs,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(legs: Vec<LegSpace>) -> Self {
        let d = total_dim(&legs);
        let entries = (0..d).map(|k| ((k, k), S::one())).collect();
        SparseOp { legs, entries }
    }

    /// Single-leg unit with a 1 at (row i, column k); on a primal leg this is E^k_i.
    pub fn matrix_unit(leg: LegSpace, i: i32, k: i32) -> Result<Self> {
        let r = leg.position(i)? as u64;
        let c = leg.position(k)? as u64;
        let mut op = Self::zero(vec![leg]);
        op.entries.insert((r, c), S::one());
        Ok(op)
    }

    pub fn legs(&self) -> &[LegSpace] {
        &self.legs
    }
    pub fn dim(&self) -> u64 {
        total_dim(&self.legs)
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn entries(&self) -> impl Iterator<Item = (&(u64, u64), &S)> {
        self.entries.iter()
    }

    pub fn insert_key(&mut self, row: u64, col: u64, v: S) {
        insert_add(&mut self.entries, (row, col), v);
    }

    pub fn get_key(&self, row: u64, col: u64) -> S {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn get(&self, rows: &[i32], cols: &[i32]) -> Result<S> {
        Ok(self.get_key(encode(&self.legs, rows)?, encode(&self.legs, cols)?))
    }

    fn unit_position(&self, units: &[(i32, i32)]) -> Result<(Vec<i32>, Vec<i32>)> {
        if units.len() != self.legs.len() {
            return Err(Error::LegMismatch(format!(
                "{} units for {} legs",
                units.len(),
                self.legs.len()
            )));
        }
        let mut rows = Vec::with_capacity(units.len());
        let mut cols = Vec::with_capacity(units.len());
        for (leg, &(upper, lower)) in self.legs.iter().zip(units) {
            if leg.is_dual() {
                rows.push(upper);
                cols.push(lower);
            } else {
                rows.push(lower);
                cols.push(upper);
            }
        }
        Ok((rows, cols))
    }

    /// Adds `c`·(unit₁ ⊗ unit₂ ⊗ …) where each `(upper, lower)` is read as
    /// E^{upper}_{lower} on a primal leg and F^{upper}_{lower} on a dual leg.
    pub fn add_term(&mut self, c: S, units: &[(i32, i32)]) -> Result<()> {
        let (rows, cols) = self.unit_position(units)?;
        let r = encode(&self.legs, &rows)?;
        let k = encode(&self.legs, &cols)?;
        self.insert_key(r, k, c);
        Ok(())
    }

    /// Coefficient of the unit tensor named as in `add_term`.
    pub fn coeff(&self, units: &[(i32, i32)]) -> Result<S> {
        let (rows, cols) = self.unit_position(units)?;
        self.get(&rows, &cols)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.legs.clone());
        for (k, v) in &self.entries {
            insert_add(&mut out.entries, *k, v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_legs(&self.legs, &other.legs, "add")?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            insert_add(&mut out.entries, *k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_legs(&self.legs, &other.legs, "sub")?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            insert_add(&mut out.entries, *k, -v.clone());
        }
        Ok(out)
    }

    /// Ordinary product self·other on identical legs.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_legs(&self.legs, &other.legs, "mul")?;
        let mut rows: BTreeMap<(u64, u64), S> = BTreeMap::new();
        for (&(r, m), a) in &self.entries {
            let range = other
                .entries
                .range((Bound::Included((m, 0)), Bound::Included((m, u64::MAX))));
            for (&(_, c), b) in range {
                match rows.get_mut(&(r, c)) {
                    Some(acc) => acc.mul_add_assign(a, b),
                    None => {
                        rows.insert((r, c), a.clone() * b.clone());
                    }
                }
            }
        }
        rows.retain(|_, v| !v.is_zero());
        Ok(SparseOp {
            legs: self.legs.clone(),
            entries: rows,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let d = other.dim();
        let mut legs = self.legs.clone();
        legs.extend_from_slice(&other.legs);
        let mut entries = BTreeMap::new();
        for (&(r1, c1), a) in &self.entries {
            for (&(r2, c2), b) in &other.entries {
                entries.insert((r1 * d + r2, c1 * d + c2), a.clone() * b.clone());
            }
        }
        SparseOp { legs, entries }
    }

    /// Lifts self onto `target`, placing its legs at `positions` and acting
    /// as the identity on the remaining legs.
    pub fn embed(&self, target: &[LegSpace], positions: &[usize]) -> Result<Self> {
        if positions.len() != self.legs.len() {
            return Err(Error::LegMismatch("embed: position count".into()));
        }
        for (leg, &p) in self.legs.iter().zip(positions) {
            if target.get(p) != Some(leg) {
                return Err(Error::LegMismatch(format!(
                    "embed: leg {:?} does not match target position {p}",
                    leg
                )));
            }
        }
        let rest: Vec<usize> = (0..target.len())
            .filter(|p| !positions.contains(p))
            .collect();
        let rest_legs: Vec<LegSpace> = rest.iter().map(|&p| target[p]).collect();
        let own = Scatter::new(&self.legs, target, positions);
        let other = Scatter::new(&rest_legs, target, &rest);
        let rest_keys: Vec<u64> = (0..total_dim(&rest_legs)).map(|k| other.map(k)).collect();
        let mut entries = BTreeMap::new();
        for (&(r, c), v) in &self.entries {
            let (rr, cc) = (own.map(r), own.map(c));
            for &e in &rest_keys {
                entries.insert((rr + e, cc + e), v.clone());
            }
        }
        Ok(SparseOp {
            legs: target.to_vec(),
            entries,
        })
    }

    /// Composition self∘other where `align` pairs (self leg, other leg) that
    /// coincide. Result legs are self's legs followed by other's unaligned legs.
    pub fn compose(&self, other: &Self, align: &[(usize, usize)]) -> Result<Self> {
        let mut legs = self.legs.clone();
        let mut pos_b = vec![usize::MAX; other.legs.len()];
        for &(a, b) in align {
            if self.legs.get(a).is_none() || other.legs.get(b) != self.legs.get(a) {
                return Err(Error::LegMismatch(format!("compose: legs {a} and {b}")));
            }
            pos_b[b] = a;
        }
        for (b, p) in pos_b.iter_mut().enumerate() {
            if *p == usize::MAX {
                *p = legs.len();
                legs.push(other.legs[b]);
            }
        }
        let pos_a: Vec<usize> = (0..self.legs.len()).collect();
        let ea = self.embed(&legs, &pos_a)?;
        let eb = other.embed(&legs, &pos_b)?;
        ea.mul(&eb)
    }

    pub fn apply(&self, v: &SparseVec<S>) -> Result<SparseVec<S>> {
        check_legs(&self.legs, &v.legs, "apply")?;
        let mut out: SparseVec<S> = SparseVec::zero(self.legs.clone());
        for (&(r, c), a) in &self.entries {
            if let Some(b) = v.entries.get(&c) {
                match out.entries.get_mut(&r) {
                    Some(acc) => acc.mul_add_assign(a, b),
                    None => {
                        out.entries.insert(r, a.clone() * b.clone());
                    }
                }
            }
        }
        out.entries.retain(|_, x| !x.is_zero());
        Ok(out)
    }

    /// Applies self to the legs of `v` at `positions` (identity elsewhere)
    /// without materializing the embedded operator.
    pub fn apply_on(&self, v: &SparseVec<S>, positions: &[usize]) -> Result<SparseVec<S>> {
        if positions.len() != self.legs.len() {
            return Err(Error::LegMismatch("apply_on: position count".into()));
        }
        for (leg, &p) in self.legs.iter().zip(positions) {
            if v.legs.get(p) != Some(leg) {
                return Err(Error::LegMismatch(format!("apply_on: position {p}")));
            }
        }
        let sc = Scatter::new(&self.legs, &v.legs, positions);
        let vs = strides(&v.legs);
        let mut by_col: BTreeMap<u64, Vec<(u64, &S)>> = BTreeMap::new();
        for (&(r, c), a) in &self.entries {
            by_col.entry(sc.map(c)).or_default().push((sc.map(r), a));
        }
        let mut out: SparseVec<S> = SparseVec::zero(v.legs.clone());
        for (&key, b) in &v.entries {
            let mut sub = 0;
            for &p in positions {
                let d = (key / vs[p]) % v.legs[p].dim() as u64;
                sub += d * vs[p];
            }
            if let Some(col) = by_col.get(&sub) {
                let base = key - sub;
                for &(r, a) in col {
                    let k = base + r;
                    match out.entries.get_mut(&k) {
                        Some(acc) => acc.mul_add_assign(a, b),
                        None => {
                            out.entries.insert(k, a.clone() * b.clone());
                        }
                    }
                }
            }
        }
        out.entries.retain(|_, x| !x.is_zero());
        Ok(out)
    }

    pub fn partial_trace(&self, leg: usize) -> Result<Self> {
        if leg >= self.legs.len() {
            return Err(Error::IndexOutOfRange(format!("leg {leg}")));
        }
        if self.legs[leg].is_dual() {
            return Err(Error::LegMismatch("trace over a dual leg".into()));
        }
        let st = strides(&self.legs);
        let d = self.legs[leg].dim() as u64;
        let mut legs = self.legs.clone();
        legs.remove(leg);
        let mut out = Self::zero(legs);
        for (&(r, c), v) in &self.entries {
            let (dr, dc) = ((r / st[leg]) % d, (c / st[leg]) % d);
            if dr == dc {
                let strip = |k: u64| (k / (st[leg] * d)) * st[leg] + k % st[leg];
                out.insert_key(strip(r), strip(c), v.clone());
            }
        }
        Ok(out)
    }

    /// Entry (row index i, column index k) of leg `leg`, as an operator on the other legs.
    pub fn slice_leg(&self, leg: usize, i: i32, k: i32) -> Result<Self> {
        if leg >= self.legs.len() {
            return Err(Error::IndexOutOfRange(format!("leg {leg}")));
        }
        let pi = self.legs[leg].position(i)? as u64;
        let pk = self.legs[leg].position(k)? as u64;
        let st = strides(&self.legs);
        let d = self.legs[leg].dim() as u64;
        let mut legs = self.legs.clone();
        legs.remove(leg);
        let mut out = Self::zero(legs);
        for (&(r, c), v) in &self.entries {
            if (r / st[leg]) % d == pi && (c / st[leg]) % d == pk {
                let strip = |x: u64| (x / (st[leg] * d)) * st[leg] + x % st[leg];
                out.entries.insert((strip(r), strip(c)), v.clone());
            }
        }
        Ok(out)
    }

    /// Reinterprets leg `pos` as `to`, keeping signed index values. Entries
    /// whose index is not representable on `to` are an error.
    pub fn relabel_leg(&self, pos: usize, to: LegSpace) -> Result<Self> {
        let mut legs = self.legs.clone();
        let from = legs[pos];
        legs[pos] = to;
        let map = |k: u64| -> Result<u64> {
            let idx = decode(&self.legs, k);
            if !to.contains(idx[pos]) {
                return Err(Error::IndexOutOfRange(format!(
                    "index {} of {:?} not on {:?}",
                    idx[pos], from, to
                )));
            }
            encode(&legs, &idx)
        };
        let mut entries = BTreeMap::new();
        for (&(r, c), v) in &self.entries {
            entries.insert((map(r)?, map(c)?), v.clone());
        }
        Ok(SparseOp { legs, entries })
    }

    /// Keeps only entries whose row and column indices on `pos` lie in `keep`.
    pub fn restrict_leg(&self, pos: usize, keep: LegSpace) -> Result<Self> {
        let mut filtered = Self::zero(self.legs.clone());
        for (&(r, c), v) in &self.entries {
            let (ri, ci) = (decode(&self.legs, r)[pos], decode(&self.legs, c)[pos]);
            if keep.contains(ri) && keep.contains(ci) {
                filtered.entries.insert((r, c), v.clone());
            }
        }
        filtered.relabel_leg(pos, keep)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn is_identity(&self) -> bool {
        self.entries.len() as u64 == self.dim()
            && self
                .entries
                .iter()
                .all(|(&(r, c), v)| r == c && *v == S::one())
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dim();
        if d > 1 << 14 {
            return Err(Error::DimensionTooLarge(d as usize));
        }
        let d = d as usize;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (&(r, c), v) in &self.entries {
            m[(r as usize, c as usize)] = v.to_c64();
        }
        Ok(m)
    }

    pub fn values(&self) -> impl Iterator<Item = &S> {
        self.entries.values()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec<S> {
    legs: Vec<LegSpace>,
    entries: BTreeMap<u64, S>,
}

impl<S: Scalar> SparseVec<S> {
    pub fn zero(legs: Vec<LegSpace>) -> Self {
        SparseVec {
            legs,
            entries: BTreeMap::new(),
        }
    }

    /// A scalar as a vector on zero legs.
    pub fn scalar(v: S) -> Self {
        let mut out = Self::zero(Vec::new());
        insert_add(&mut out.entries, 0, v);
        out
    }

    pub fn basis(legs: Vec<LegSpace>, idx: &[i32]) -> Result<Self> {
        let k = encode(&legs, idx)?;
        let mut out = Self::zero(legs);
        out.entries.insert(k, S::one());
        Ok(out)
    }

    pub fn basis_key(legs: Vec<LegSpace>, key: u64) -> Self {
        let mut out = Self::zero(legs);
        out.entries.insert(key, S::one());
        out
    }

    pub fn legs(&self) -> &[LegSpace] {
        &self.legs
    }
    pub fn dim(&self) -> u64 {
        total_dim(&self.legs)
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn entries(&self) -> impl Iterator<Item = (&u64, &S)> {
        self.entries.iter()
    }
    pub fn values(&self) -> impl Iterator<Item = &S> {
        self.entries.values()
    }

    pub fn insert_key(&mut self, key: u64, v: S) {
        insert_add(&mut self.entries, key, v);
    }

    pub fn get_key(&self, key: u64) -> S {
        self.entries.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn get(&self, idx: &[i32]) -> Result<S> {
        Ok(self.get_key(encode(&self.legs, idx)?))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.legs.clone());
        for (k, v) in &self.entries {
            insert_add(&mut out.entries, *k, v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_legs(&self.legs, &other.legs, "add")?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            insert_add(&mut out.entries, *k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_legs(&self.legs, &other.legs, "sub")?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            insert_add(&mut out.entries, *k, -v.clone());
        }
        Ok(out)
    }

    pub fn add_scaled(&mut self, other: &Self, c: &S) -> Result<()> {
        check_legs(&self.legs, &other.legs, "add_scaled")?;
        for (k, v) in &other.entries {
            insert_add(&mut self.entries, *k, v.clone() * c.clone());
        }
        Ok(())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let d = other.dim();
        let mut legs = self.legs.clone();
        legs.extend_from_slice(&other.legs);
        let mut entries = BTreeMap::new();
        for (&k1, a) in &self.entries {
            for (&k2, b) in &other.entries {
                entries.insert(k1 * d + k2, a.clone() * b.clone());
            }
        }
        SparseVec { legs, entries }
    }

    /// New leg order: leg `perm[j]` of self becomes leg j of the result.
    pub fn permute_legs(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.legs.len() {
            return Err(Error::LegMismatch("permute: arity".into()));
        }
        let legs: Vec<LegSpace> = perm.iter().map(|&p| self.legs[p]).collect();
        let st_new = strides(&legs);
        let mut entries = BTreeMap::new();
        for (&k, v) in &self.entries {
            let d = digits(&self.legs, k);
            let nk: u64 = perm
                .iter()
                .zip(&st_new)
                .map(|(&p, s)| d[p] as u64 * s)
                .sum();
            entries.insert(nk, v.clone());
        }
        Ok(SparseVec { legs, entries })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .values()
            .map(|v| {
                let m = v.magnitude();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// The single entry of a zero-leg vector.
    pub fn as_scalar(&self) -> Option<S> {
        if self.legs.is_empty() {
            Some(self.get_key(0))
        } else {
            None
        }
    }
}

/// Contracts bra leg `i` with ket leg `j` for every `(i, j)` in `matches`.
/// Each pair must be a dual/primal partner pair. Surviving bra legs come
/// first, then surviving ket legs.
pub fn pair<S: Scalar>(
    bra: &SparseVec<S>,
    ket: &SparseVec<S>,
    matches: &[(usize, usize)],
) -> Result<SparseVec<S>> {
    for &(i, j) in matches {
        let (a, b) = match (bra.legs.get(i), ket.legs.get(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::LegMismatch(format!("pair: ({i},{j}) out of range"))),
        };
        if a.partner() != Some(*b) {
            return Err(Error::LegMismatch(format!("pair: {:?} with {:?}", a, b)));
        }
    }
    let bra_rest: Vec<usize> = (0..bra.legs.len())
        .filter(|i| !matches.iter().any(|m| m.0 == *i))
        .collect();
    let ket_rest: Vec<usize> = (0..ket.legs.len())
        .filter(|j| !matches.iter().any(|m| m.1 == *j))
        .collect();
    let mut legs: Vec<LegSpace> = bra_rest.iter().map(|&i| bra.legs[i]).collect();
    legs.extend(ket_rest.iter().map(|&j| ket.legs[j]));
    let st = strides(&legs);
    let nb = bra_rest.len();
    // group ket entries by their matched index values
    let mut ket_by: BTreeMap<Vec<i32>, Vec<(u64, &S)>> = BTreeMap::new();
    for (&k, v) in &ket.entries {
        let idx = decode(&ket.legs, k);
        let d = digits(&ket.legs, k);
        let m: Vec<i32> = matches.iter().map(|&(_, j)| idx[j]).collect();
        let rest: u64 = ket_rest
            .iter()
            .enumerate()
            .map(|(t, &j)| d[j] as u64 * st[nb + t])
            .sum();
        ket_by.entry(m).or_default().push((rest, v));
    }
    let mut out = SparseVec::zero(legs);
    for (&k, a) in &bra.entries {
        let idx = decode(&bra.legs, k);
        let d = digits(&bra.legs, k);
        let m: Vec<i32> = matches.iter().map(|&(i, _)| idx[i]).collect();
        if let Some(list) = ket_by.get(&m) {
            let head: u64 = bra_rest
                .iter()
                .enumerate()
                .map(|(t, &i)| d[i] as u64 * st[t])
                .sum();
            for &(rest, b) in list {
                out.insert_key(head + rest, a.clone() * b.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_field::{rational, Rational};
    use proptest::prelude::*;

    type Op = SparseOp<Rational>;
    type Vector = SparseVec<Rational>;

    #[test]
    fn matrix_unit_composition_law() {
        let leg = LegSpace::plus(2);
        let e = |i, k| Op::matrix_unit(leg, i, k).unwrap();
        assert_eq!(e(1, 1).mul(&e(1, 1)).unwrap(), e(1, 1));
        // E^2_1 ∘ E^1_2 = E^1_1 (row 1 col 2 times row 2 col 1)
        assert_eq!(e(1, 2).mul(&e(2, 1)).unwrap(), e(1, 1));
        assert!(e(1, 2).mul(&e(1, 2)).unwrap().is_zero());
        assert!(Op::matrix_unit(leg, -1, 1).is_err());
        assert!(Op::matrix_unit(LegSpace::minus(2), 1, -1).is_err());
    }

    #[test]
    fn add_term_reads_primal_and_dual_units() {
        let mut op = Op::zero(vec![LegSpace::plus(2), LegSpace::plus_dual(2)]);
        op.add_term(rational(1, 1), &[(1, 2), (1, 2)]).unwrap();
        // E^1_2 has row 2 col 1; F^1_2 has row 1 col 2
        assert_eq!(op.get(&[2, 1], &[1, 2]).unwrap(), rational(1, 1));
        assert_eq!(op.coeff(&[(1, 2), (1, 2)]).unwrap(), rational(1, 1));
    }

    #[test]
    fn tensor_laws() {
        let leg = LegSpace::full(2);
        let id = Op::identity(vec![leg]);
        assert!(id.tensor(&id).is_identity());
        let a = Op::matrix_unit(leg, 1, 1).unwrap();
        let b = Op::matrix_unit(leg, 2, 2).unwrap();
        let ab = a.tensor(&b);
        let v = Vector::basis(vec![leg, leg], &[1, 2]).unwrap();
        assert_eq!(ab.apply(&v).unwrap(), v);
        let mut c = Op::zero(vec![leg]);
        c.add_term(rational(2, 1), &[(1, -1)]).unwrap();
        c.add_term(rational(3, 1), &[(2, 2)]).unwrap();
        assert_eq!(c.tensor(&c).nnz(), c.nnz() * c.nnz());
    }

    fn swap(n: usize) -> Op {
        let leg = LegSpace::plus(n);
        let mut p = Op::zero(vec![leg, leg]);
        for i in 1..=n as i32 {
            for k in 1..=n as i32 {
                p.add_term(rational(1, 1), &[(i, k), (k, i)]).unwrap();
            }
        }
        p
    }

    #[test]
    fn compose_laws() {
        let p = swap(3);
        assert!(p.compose(&p, &[(0, 0), (1, 1)]).unwrap().is_identity());
        let id = Op::identity(p.legs().to_vec());
        assert_eq!(p.compose(&id, &[(0, 0), (1, 1)]).unwrap(), p);
        let leg = LegSpace::plus(2);
        let a = Op::matrix_unit(leg, 1, 2)
            .unwrap()
            .embed(&[leg, leg], &[0])
            .unwrap();
        let b = Op::matrix_unit(leg, 2, 1)
            .unwrap()
            .embed(&[leg, leg], &[1])
            .unwrap();
        assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        let bad = Op::identity(vec![LegSpace::minus(2)]);
        assert!(p.compose(&bad, &[(0, 0)]).is_err());
    }

    #[test]
    fn compose_appends_unaligned_legs() {
        let l = LegSpace::full(1);
        let a = Op::matrix_unit(l, 1, -1).unwrap();
        let b = Op::matrix_unit(l, -1, 1)
            .unwrap()
            .tensor(&Op::identity(vec![l]));
        let c = a.compose(&b, &[(0, 0)]).unwrap();
        assert_eq!(c.legs().len(), 2);
        let expect = Op::matrix_unit(l, 1, 1)
            .unwrap()
            .tensor(&Op::identity(vec![l]));
        assert_eq!(c, expect);
    }

    #[test]
    fn partial_trace_laws() {
        let leg = LegSpace::full(2);
        let id = Op::identity(vec![leg, LegSpace::plus(2)]);
        let t = id.partial_trace(0).unwrap();
        assert_eq!(
            t,
            Op::identity(vec![LegSpace::plus(2)]).scale(&rational(4, 1))
        );
        let e = Op::matrix_unit(leg, -1, 2).unwrap();
        assert!(e.partial_trace(0).unwrap().is_zero());
        let e = Op::matrix_unit(leg, 2, 2).unwrap();
        assert_eq!(e.partial_trace(0).unwrap().get_key(0, 0), rational(1, 1));
        assert!(Op::identity(vec![LegSpace::plus_dual(1)])
            .partial_trace(0)
            .is_err());
    }

    #[test]
    fn pairing_basics() {
        let n = 2;
        let f = Vector::basis(vec![LegSpace::plus_dual(n)], &[1]).unwrap();
        for i in 1..=2 {
            let e = Vector::basis(vec![LegSpace::plus(n)], &[i]).unwrap();
            let s = pair(&f, &e, &[(0, 0)]).unwrap().as_scalar().unwrap();
            assert_eq!(
                s,
                if i == 1 {
                    rational(1, 1)
                } else {
                    rational(0, 1)
                }
            );
        }
        let bra =
            Vector::basis(vec![LegSpace::plus_dual(n), LegSpace::minus(n)], &[1, -1]).unwrap();
        let ket =
            Vector::basis(vec![LegSpace::plus(n), LegSpace::minus_dual(n)], &[1, -1]).unwrap();
        let s = pair(&bra, &ket, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(s.as_scalar().unwrap(), rational(1, 1));
        assert!(pair(&bra, &ket, &[(0, 1)]).is_err());
    }

    #[test]
    fn slice_and_relabel() {
        let l = LegSpace::full(2);
        let mut op = Op::zero(vec![l, l]);
        op.add_term(rational(5, 1), &[(2, 1), (-1, -2)]).unwrap();
        let s = op.slice_leg(0, 1, 2).unwrap();
        assert_eq!(s.coeff(&[(-1, -2)]).unwrap(), rational(5, 1));
        let r = op.restrict_leg(0, LegSpace::plus(2)).unwrap();
        assert_eq!(r.coeff(&[(2, 1), (-1, -2)]).unwrap(), rational(5, 1));
        assert!(op.relabel_leg(1, LegSpace::plus(2)).is_err());
    }

    #[test]
    fn apply_on_matches_embed() {
        let legs = vec![LegSpace::full(1), LegSpace::plus(2), LegSpace::full(1)];
        let mut op = Op::zero(vec![LegSpace::full(1), LegSpace::full(1)]);
        op.add_term(rational(2, 3), &[(1, -1), (-1, 1)]).unwrap();
        op.add_term(rational(-1, 1), &[(1, 1), (-1, -1)]).unwrap();
        let mut v = Vector::zero(legs.clone());
        for k in 0..total_dim(&legs) {
            v.insert_key(k, rational(k as i64 + 1, 7));
        }
        let a = op.apply_on(&v, &[0, 2]).unwrap();
        let b = op.embed(&legs, &[0, 2]).unwrap().apply(&v).unwrap();
        assert_eq!(a, b);
    }

    fn random_op(n: usize, seed: Vec<(u8, u8, i8)>) -> Op {
        let leg = LegSpace::full(n);
        let legs = vec![leg, LegSpace::plus(n)];
        let d = total_dim(&legs);
        let mut op = Op::zero(legs);
        for (r, c, v) in seed {
            op.insert_key(r as u64 % d, c as u64 % d, rational(v as i64, 3));
        }
        op
    }

    proptest! {
        #[test]
        fn composition_is_associative(
            a in prop::collection::vec(any::<(u8, u8, i8)>(), 0..12),
            b in prop::collection::vec(any::<(u8, u8, i8)>(), 0..12),
            c in prop::collection::vec(any::<(u8, u8, i8)>(), 0..12),
        ) {
            let (a, b, c) = (random_op(2, a), random_op(2, b), random_op(2, c));
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn pairing_is_natural_under_tensoring(
            bra in prop::collection::vec(-5i64..5, 2),
            ket in prop::collection::vec(-5i64..5, 6),
            extra in prop::collection::vec(-5i64..5, 2),
        ) {
            let n = 2;
            let mut b = Vector::zero(vec![LegSpace::plus_dual(n)]);
            for (k, v) in bra.iter().enumerate() { b.insert_key(k as u64, rational(*v, 1)); }
            let mut k = Vector::zero(vec![LegSpace::plus(n), LegSpace::full(1)]);
            for (i, v) in ket.iter().take(4).enumerate() { k.insert_key(i as u64, rational(*v, 1)); }
            let mut x = Vector::zero(vec![LegSpace::minus(n)]);
            for (i, v) in extra.iter().enumerate() { x.insert_key(i as u64, rational(*v, 1)); }
            let lhs = pair(&b, &k.tensor(&x), &[(0, 0)]).unwrap();
            let rhs = pair(&b, &k, &[(0, 0)]).unwrap().tensor(&x);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pairing_is_bilinear(
            a in prop::collection::vec(-5i64..5, 2),
            b in prop::collection::vec(-5i64..5, 2),
            c in prop::collection::vec(-5i64..5, 2),
            s in -5i64..5,
        ) {
            let n = 2;
            let mk = |vals: &Vec<i64>, leg: LegSpace| {
                let mut v = Vector::zero(vec![leg]);
                for (k, x) in vals.iter().enumerate() { v.insert_key(k as u64, rational(*x, 1)); }
                v
            };
            let bra = mk(&a, LegSpace::plus_dual(n));
            let kb = mk(&b, LegSpace::plus(n));
            let kc = mk(&c, LegSpace::plus(n));
            let s = rational(s, 1);
            let comb = kb.scale(&s).add(&kc).unwrap();
            let lhs = pair(&bra, &comb, &[(0, 0)]).unwrap().as_scalar().unwrap();
            let rhs = s * pair(&bra, &kb, &[(0, 0)]).unwrap().as_scalar().unwrap()
                + pair(&bra, &kc, &[(0, 0)]).unwrap().as_scalar().unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
