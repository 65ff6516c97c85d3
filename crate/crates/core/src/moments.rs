//! Exact limiting moments.
//!
//! * `A_l`: cycle weights from `A_1 = s`, `A_2 = 1`,
//!   `A_{l+1} = -sum_{i=1}^{l} A_i A_{l+1-i}`.
//! * `m^S_k`: conference-domain moment, a polynomial in `p` whose `p^t`
//!   coefficient sums `prod_j A_{l_j}` over the non-crossing partitions of
//!   `[k]` with `t` blocks, `l_j` running over the partition's cycle lengths.
//! * `m_k`: frame moment, the binomial transform of the `m^S_j` after
//!   substituting `s = (1 - x) / (2 sqrt(x))`.
//!
//! `sqrt(x)` is carried as an indeterminate `w` with the rewrite `w^2 -> x`,
//! so the claim that odd powers of `w` cancel is checked exactly rather than
//! observed numerically.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cactus::{cycle_decompose, CycleDecomposition};
use crate::ncpart::{catalan, enumerate_ncp_with_blocks, NonCrossingPartition, NCP_K_MAX};
use crate::poly::{render_rational, QPoly, SPoly};

/// Largest moment order computed symbolically.
pub const MOMENT_K_MAX: usize = 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MomentError {
    #[error("order {k} exceeds K_max = {max}")]
    ResourceLimit { k: usize, max: usize },
    #[error("odd power of sqrt(x) survived in the p^{p} coefficient of m_{k}")]
    OddPowerSurvived { k: usize, p: usize },
    #[error("internal consistency violated: {0}")]
    Internal(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed moment polynomial: {0}")]
    Parse(String),
}

fn a_table() -> &'static Mutex<Vec<SPoly>> {
    static TABLE: OnceLock<Mutex<Vec<SPoly>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![SPoly::var(), SPoly::one()]))
}

/// Cycle weight `A_l` for `1 <= l <= 20`.
///
/// # Panics
/// If `l == 0` or `l` exceeds the enumeration limit.
pub fn a_poly(l: usize) -> SPoly {
    assert!((1..=NCP_K_MAX).contains(&l), "A_l is defined for 1 <= l <= {NCP_K_MAX}, got {l}");
    let mut table = a_table().lock().expect("A table poisoned");
    while table.len() < l {
        let next = table.len() + 1;
        let a = a_recurrence(&table, next);
        table.push(a);
    }
    table[l - 1].clone()
}

/// `A_next = -sum_{i=1}^{next-1} A_i A_{next-i}`, with `known[i - 1] = A_i`.
pub fn a_recurrence(known: &[SPoly], next: usize) -> SPoly {
    let mut acc = SPoly::zero();
    for i in 1..next {
        acc += &(&known[i - 1] * &known[next - i - 1]);
    }
    -acc
}

/// Product of `A_l` over a cycle-length multiset.
pub fn weight_of(decomposition: &CycleDecomposition) -> SPoly {
    decomposition.lengths().iter().fold(SPoly::one(), |acc, &l| &acc * &a_poly(l))
}

/// Limit of `V_n(pi)` as `n -> infinity`.
pub fn v_limit(pi: &NonCrossingPartition) -> SPoly {
    weight_of(&cycle_decompose(pi))
}

/// `m^S_k` as a map from the exponent of `p` to its coefficient in `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPolyS {
    k: usize,
    terms: BTreeMap<usize, SPoly>,
}

/// `m_k` as a map from the exponent of `p` to its coefficient in `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPolyX {
    k: usize,
    terms: BTreeMap<usize, QPoly>,
}

impl MomentPolyS {
    pub fn new(k: usize, terms: BTreeMap<usize, SPoly>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self { k, terms }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<usize, SPoly> {
        &self.terms
    }

    pub fn coeff(&self, t: usize) -> SPoly {
        self.terms.get(&t).cloned().unwrap_or_else(SPoly::zero)
    }

    pub fn eval(&self, s: f64, p: f64) -> f64 {
        self.terms.iter().map(|(&t, c)| c.eval_f64(s) * p.powi(t as i32)).sum()
    }

    /// Descending powers of `p`, e.g. `(4s^2-1)p^4 + (-8s^2+2)p^3 + 6s^2 p^2 + s^4 p`.
    pub fn to_text(&self) -> String {
        let parts = self.terms.iter().rev().map(|(&t, c)| {
            let q = QPoly::from_spoly(c);
            s_term(t, &q, "s", false)
        });
        join_signed(parts.collect())
    }

    pub fn to_latex(&self) -> String {
        let parts = self.terms.iter().rev().map(|(&t, c)| s_term(t, &QPoly::from_spoly(c), "s", true));
        join_signed(parts.collect())
    }

    pub fn to_json(&self) -> MomentJson {
        MomentJson::build(self.k, "s", self.terms.iter().map(|(&t, c)| (t, QPoly::from_spoly(c))))
    }

    pub fn from_json(json: &MomentJson) -> Result<Self, MomentError> {
        json.expect_var("s")?;
        let mut terms = BTreeMap::new();
        for (t, q) in json.parse_terms()? {
            let ints = q
                .coeffs()
                .iter()
                .map(|c| {
                    if c.is_integer() {
                        Ok(c.to_integer())
                    } else {
                        Err(MomentError::Parse(format!("non-integer coefficient {c} in s-domain moment")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            terms.insert(t, SPoly::new(ints));
        }
        Ok(Self::new(json.k, terms))
    }
}

impl MomentPolyX {
    pub fn new(k: usize, terms: BTreeMap<usize, QPoly>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self { k, terms }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<usize, QPoly> {
        &self.terms
    }

    pub fn coeff(&self, t: usize) -> QPoly {
        self.terms.get(&t).cloned().unwrap_or_else(QPoly::zero)
    }

    /// The polynomial in `x` obtained at `p = 1`.
    pub fn at_p_one(&self) -> QPoly {
        self.terms.values().fold(QPoly::zero(), |acc, c| &acc + c)
    }

    /// Ascending powers of `p` with the `x` part trailing, e.g. `p + p^2 x`.
    pub fn to_text(&self) -> String {
        join_signed(self.terms.iter().map(|(&t, c)| x_term(t, c, false)).collect())
    }

    pub fn to_latex(&self) -> String {
        join_signed(self.terms.iter().map(|(&t, c)| x_term(t, c, true)).collect())
    }

    pub fn to_json(&self) -> MomentJson {
        MomentJson::build(self.k, "x", self.terms.iter().map(|(&t, c)| (t, c.clone())))
    }

    pub fn from_json(json: &MomentJson) -> Result<Self, MomentError> {
        json.expect_var("x")?;
        Ok(Self::new(json.k, json.parse_terms()?.into_iter().collect()))
    }
}

impl fmt::Display for MomentPolyS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for MomentPolyX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// One rendered term plus whether it carries a leading minus sign.
struct Term {
    negative: bool,
    body: String,
}

fn join_signed(terms: Vec<Term>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, term) in terms.into_iter().enumerate() {
        match (i, term.negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&term.body);
    }
    out
}

fn p_power(t: usize, latex: bool) -> String {
    match (t, latex) {
        (0, _) => String::new(),
        (1, _) => "p".to_string(),
        (_, false) => format!("p^{t}"),
        (_, true) => format!("p^{{{t}}}"),
    }
}

fn render_poly(c: &QPoly, var: &str, latex: bool) -> String {
    let terms = c.terms().rev().map(|(d, c)| (d, c.clone()));
    crate::poly::render(terms, var, latex)
}

/// Coefficient-first layout used for `m^S_k`: `6s^2 p^2`, `(-2s)p^3`, `p^4`.
fn s_term(t: usize, c: &QPoly, var: &str, latex: bool) -> Term {
    let pp = p_power(t, latex);
    let body = match c.as_monomial() {
        _ if t == 0 => render_poly(c, var, latex),
        Some((coef, 0)) if coef.is_one() => pp,
        Some((coef, deg)) if coef.is_positive() => {
            let mono = render_poly(&QPoly::monomial(coef, deg), var, latex);
            if deg == 0 {
                format!("{mono}{pp}")
            } else {
                format!("{mono} {pp}")
            }
        }
        _ => format!("({}){pp}", render_poly(c, var, latex)),
    };
    Term { negative: false, body }
}

/// `p`-first layout used for `m_k`: `p^2 x`, `3p^2 x^2`, `p^3 (x^2-x)`.
fn x_term(t: usize, c: &QPoly, latex: bool) -> Term {
    if t == 0 {
        return Term { negative: false, body: render_poly(c, "x", latex) };
    }
    let pp = p_power(t, latex);
    match c.as_monomial() {
        Some((coef, deg)) => {
            let negative = coef.is_negative();
            let mag = coef.abs();
            let factor = if mag.is_one() { String::new() } else { render_rational(&mag, latex) };
            let xpart = match (deg, latex) {
                (0, _) => String::new(),
                (1, _) => " x".to_string(),
                (_, false) => format!(" x^{deg}"),
                (_, true) => format!(" x^{{{deg}}}"),
            };
            Term { negative, body: format!("{factor}{pp}{xpart}") }
        }
        None => Term { negative: false, body: format!("{pp} ({})", render_poly(c, "x", latex)) },
    }
}

/// JSON form: `{"k":4,"var":"s","terms":[{"p":4,"coeffs":{"2":"4","0":"-1"}}]}`.
///
/// Terms are listed by descending power of `p`; `coeffs` maps the power of the
/// coefficient variable to an exact rational written `num/den` (or `num`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentJson {
    pub k: usize,
    pub var: String,
    pub terms: Vec<MomentJsonTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentJsonTerm {
    pub p: usize,
    pub coeffs: BTreeMap<String, String>,
}

impl MomentJson {
    fn build(k: usize, var: &str, terms: impl DoubleEndedIterator<Item = (usize, QPoly)>) -> Self {
        let terms = terms
            .rev()
            .map(|(p, c)| MomentJsonTerm {
                p,
                coeffs: c.terms().map(|(d, c)| (d.to_string(), c.to_string())).collect(),
            })
            .collect();
        Self { k, var: var.to_string(), terms }
    }

    fn expect_var(&self, var: &str) -> Result<(), MomentError> {
        if self.var == var {
            Ok(())
        } else {
            Err(MomentError::Parse(format!("expected variable {var}, found {}", self.var)))
        }
    }

    fn parse_terms(&self) -> Result<Vec<(usize, QPoly)>, MomentError> {
        self.terms
            .iter()
            .map(|term| {
                let mut dense: Vec<BigRational> = Vec::new();
                for (deg, value) in &term.coeffs {
                    let deg: usize = deg.parse().map_err(|_| MomentError::Parse(format!("bad exponent {deg:?}")))?;
                    let value: BigRational =
                        value.parse().map_err(|_| MomentError::Parse(format!("bad rational {value:?}")))?;
                    if dense.len() <= deg {
                        dense.resize(deg + 1, BigRational::zero());
                    }
                    dense[deg] = value;
                }
                Ok((term.p, QPoly::new(dense)))
            })
            .collect()
    }
}

fn check_order(k: usize) -> Result<(), MomentError> {
    if k > MOMENT_K_MAX {
        Err(MomentError::ResourceLimit { k, max: MOMENT_K_MAX })
    } else {
        Ok(())
    }
}

fn s_memo() -> &'static Mutex<HashMap<usize, MomentPolyS>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, MomentPolyS>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn x_memo() -> &'static Mutex<HashMap<usize, MomentPolyX>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, MomentPolyX>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficient of `p^t` in `m^S_k`: cycle-length multisets are tallied
/// first, then each distinct multiset is weighted once.
fn block_sum(k: usize, t: usize) -> SPoly {
    let mut tally: HashMap<CycleDecomposition, u64> = HashMap::new();
    for pi in enumerate_ncp_with_blocks(k, t).expect("k checked against K_max") {
        *tally.entry(cycle_decompose(&pi)).or_insert(0) += 1;
    }
    let mut entries: Vec<_> = tally.into_iter().collect();
    entries.sort();
    entries.iter().fold(SPoly::zero(), |acc, (d, count)| &acc + &weight_of(d).scale(&BigInt::from(*count)))
}

/// `m^S_k`, with `m^S_0 = 1`.
pub fn moment_s(k: usize) -> Result<MomentPolyS, MomentError> {
    check_order(k)?;
    if let Some(hit) = s_memo().lock().expect("memo poisoned").get(&k) {
        return Ok(hit.clone());
    }
    let terms: BTreeMap<usize, SPoly> = if k == 0 {
        BTreeMap::from([(0, SPoly::one())])
    } else {
        // fill the A table before fanning out
        a_poly(k);
        (1..=k).into_par_iter().map(|t| (t, block_sum(k, t))).collect()
    };
    let result = MomentPolyS::new(k, terms);
    s_memo().lock().expect("memo poisoned").entry(k).or_insert_with(|| result.clone());
    Ok(result)
}

/// Polynomial in `x` plus `w` times a polynomial in `x`, with `w^2 = x`.
#[derive(Clone, Debug, Default)]
struct RootPoly {
    even: QPoly,
    odd: QPoly,
}

impl RootPoly {
    fn add_assign_scaled_w_power(&mut self, base: &QPoly, w_exp: usize) {
        let shifted = base * &QPoly::monomial(BigRational::one(), w_exp / 2);
        if w_exp.is_multiple_of(2) {
            self.even += &shifted;
        } else {
            self.odd += &shifted;
        }
    }
}

fn binomial(n: usize, r: usize) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// `m_k`, with `m_0 = 1`.
pub fn moment_frame(k: usize) -> Result<MomentPolyX, MomentError> {
    check_order(k)?;
    if let Some(hit) = x_memo().lock().expect("memo poisoned").get(&k) {
        return Ok(hit.clone());
    }
    if k == 0 {
        return Ok(MomentPolyX::new(0, BTreeMap::from([(0, QPoly::one())])));
    }
    // (x + 1) / 2 and (1 - x) / 2
    let mean = QPoly::new(vec![half(), half()]);
    let spread = QPoly::new(vec![half(), -half()]);

    let mut acc: BTreeMap<usize, RootPoly> = BTreeMap::new();
    acc.entry(1).or_default().even += &mean.pow(k as u32);

    for j in 1..=k {
        let ms = moment_s(j)?;
        let outer = mean.pow((k - j) as u32).scale(&BigRational::from_integer(binomial(k, j)));
        for (&t, coeff) in ms.terms() {
            let slot = acc.entry(t).or_default();
            for (i, c) in coeff.terms() {
                // c s^i w^j = c ((1 - x) / 2)^i w^(j - i)
                let w_exp = j
                    .checked_sub(i)
                    .ok_or_else(|| MomentError::Internal(format!("s-degree {i} exceeds order {j} in m^S_{j}")))?;
                let base = &spread.pow(i as u32).scale(&BigRational::from_integer(c.clone())) * &outer;
                slot.add_assign_scaled_w_power(&base, w_exp);
            }
        }
    }

    let mut terms = BTreeMap::new();
    for (t, root) in acc {
        if !root.odd.is_zero() {
            return Err(MomentError::OddPowerSurvived { k, p: t });
        }
        terms.insert(t, root.even);
    }
    let result = MomentPolyX::new(k, terms);
    x_memo().lock().expect("memo poisoned").entry(k).or_insert_with(|| result.clone());
    Ok(result)
}

fn check_domain(gamma: f64, p: f64) -> Result<(), MomentError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(MomentError::Domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(MomentError::Domain(format!("p = {p} must lie in [0, 1]")));
    }
    Ok(())
}

/// Evaluates `m_k` at aspect ratio `gamma` (so `x = 1/gamma - 1`) and selection probability `p`.
pub fn eval_moment(poly: &MomentPolyX, gamma: f64, p: f64) -> Result<f64, MomentError> {
    check_domain(gamma, p)?;
    let x = 1.0 / gamma - 1.0;
    Ok(poly.terms().iter().map(|(&t, c)| c.eval_f64(x) * p.powi(t as i32)).sum())
}

/// Exact counterpart of [`eval_moment`] for rational `gamma` and `p`.
pub fn eval_moment_exact(poly: &MomentPolyX, gamma: &BigRational, p: &BigRational) -> Result<BigRational, MomentError> {
    let one = BigRational::one();
    if !(gamma.is_positive() && *gamma < one) {
        return Err(MomentError::Domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if p.is_negative() || *p > one {
        return Err(MomentError::Domain(format!("p = {p} must lie in [0, 1]")));
    }
    let x = gamma.recip() - one;
    let mut total = BigRational::zero();
    for (&t, c) in poly.terms() {
        let mut pt = BigRational::one();
        for _ in 0..t {
            pt *= p;
        }
        total += c.eval_rational(&x) * pt;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KestenMcKayRow {
    pub l: usize,
    pub at_zero: BigInt,
    pub expected: BigInt,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KestenMcKayReport {
    pub rows: Vec<KestenMcKayRow>,
}

impl KestenMcKayReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks `A_l(0)` against `0` for odd `l` and `(-1)^(j-1) C_(j-1)` for `l = 2j`.
pub fn kesten_mckay_check(k_max: usize) -> Result<KestenMcKayReport, MomentError> {
    if k_max > NCP_K_MAX {
        return Err(MomentError::ResourceLimit { k: k_max, max: NCP_K_MAX });
    }
    let rows = (1..=k_max)
        .map(|l| {
            let at_zero = a_poly(l).constant_term();
            let expected = if l % 2 == 1 {
                BigInt::zero()
            } else {
                let j = l / 2;
                let c = BigInt::from(catalan(j - 1));
                if j % 2 == 1 {
                    c
                } else {
                    -c
                }
            };
            let pass = at_zero == expected;
            KestenMcKayRow { l, at_zero, expected, pass }
        })
        .collect();
    Ok(KestenMcKayReport { rows })
}
