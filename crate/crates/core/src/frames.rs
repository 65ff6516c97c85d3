//! Harmonic equiangular tight frames and the generalized conference matrix.
//!
//! A frame is an `m x n` complex matrix whose columns are the frame vectors.
//! For an ETF with `x = n/m - 1` the matrix
//! `S = sqrt((n-1)/x) (F'F - I/(2 gamma))` has constant diagonal
//! `sqrt(n-1) s`, unimodular conjugate-symmetric off-diagonal entries, and
//! `S^2 = (n-1)(x+1)^2/(4x) I`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Absolute tolerance shared by every frame and conference-matrix check.
pub const TOLERANCE: f64 = 1e-8;

/// Largest modulus accepted by the exhaustive difference-set search.
pub const SEARCH_N_MAX: u64 = 40;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("modulus {n} exceeds the exhaustive search bound {max}")]
    ResourceLimit { n: u64, max: u64 },
    #[error("aspect ratio m/n = {m}/{n} must lie strictly between 0 and 1")]
    AspectRatio { m: usize, n: usize },
    #[error("construction failed: {property} violated (worst deviation {deviation:.3e})")]
    ConstructionFailed { property: String, deviation: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

/// An `m`-subset of `Z_n`, sorted, with its nominal `lambda`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DifferenceSet {
    modulus: u64,
    elements: Vec<u64>,
    lambda: u64,
}

impl DifferenceSet {
    /// Accepts the residues only if every nonzero difference occurs equally often.
    pub fn new(modulus: u64, elements: Vec<u64>) -> Result<Self, FrameError> {
        let set = Self::unchecked(modulus, elements)?;
        match set.difference_multiplicity() {
            Some(lambda) if lambda == set.lambda => Ok(set),
            _ => Err(FrameError::InvalidParameter(format!("{:?} is not a difference set mod {modulus}", set.elements))),
        }
    }

    /// Distinct residues below `modulus`; the difference property is not checked.
    pub fn unchecked(modulus: u64, mut elements: Vec<u64>) -> Result<Self, FrameError> {
        if modulus < 2 {
            return Err(FrameError::InvalidParameter(format!("modulus {modulus} < 2")));
        }
        if let Some(bad) = elements.iter().find(|&&e| e >= modulus) {
            return Err(FrameError::InvalidParameter(format!("residue {bad} not below modulus {modulus}")));
        }
        elements.sort_unstable();
        let before = elements.len();
        elements.dedup();
        if elements.len() != before {
            return Err(FrameError::InvalidParameter("repeated residue".into()));
        }
        if elements.is_empty() {
            return Err(FrameError::InvalidParameter("empty residue set".into()));
        }
        let m = elements.len() as u64;
        let lambda = m * (m - 1) / (modulus - 1);
        Ok(Self { modulus, elements, lambda })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// `(n, m, lambda)`.
    pub fn params(&self) -> (u64, u64, u64) {
        (self.modulus, self.elements.len() as u64, self.lambda)
    }

    /// Common count of every nonzero difference, if the counts agree.
    pub fn difference_multiplicity(&self) -> Option<u64> {
        let n = self.modulus;
        let mut counts = vec![0u64; n as usize];
        for &a in &self.elements {
            for &b in &self.elements {
                if a != b {
                    counts[((a + n - b) % n) as usize] += 1;
                }
            }
        }
        let first = counts[1];
        counts[1..].iter().all(|&c| c == first).then_some(first)
    }

    pub fn is_difference_set(&self) -> bool {
        self.difference_multiplicity().is_some()
    }

    /// Lexicographically smallest translate.
    pub fn canonical(&self) -> Self {
        let n = self.modulus;
        let best = self
            .elements
            .iter()
            .map(|&shift| {
                let mut t: Vec<u64> = self.elements.iter().map(|&e| (e + n - shift) % n).collect();
                t.sort_unstable();
                t
            })
            .min()
            .expect("nonempty");
        Self { modulus: n, elements: best, lambda: self.lambda }
    }

    /// Parses `n=7; D=1,2,4` or `{"n":7,"elements":[1,2,4]}` without checking the difference property.
    pub fn parse(text: &str) -> Result<Self, FrameError> {
        let text = text.trim();
        if text.starts_with('{') {
            #[derive(Deserialize)]
            struct Raw {
                n: u64,
                elements: Vec<u64>,
            }
            let raw: Raw = serde_json::from_str(text).map_err(|e| FrameError::Parse(e.to_string()))?;
            return Self::unchecked(raw.n, raw.elements);
        }
        let mut modulus = None;
        let mut elements = None;
        for field in text.split(';').map(str::trim).filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| FrameError::Parse(format!("expected key=value, found {field:?}")))?;
            match key.trim() {
                "n" => modulus = Some(value.trim().parse::<u64>().map_err(|e| FrameError::Parse(e.to_string()))?),
                "D" | "d" => {
                    let parsed = value
                        .split(',')
                        .map(|v| v.trim().parse::<u64>().map_err(|e| FrameError::Parse(format!("{v:?}: {e}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    elements = Some(parsed);
                }
                other => return Err(FrameError::Parse(format!("unknown key {other:?}"))),
            }
        }
        match (modulus, elements) {
            (Some(n), Some(d)) => Self::unchecked(n, d),
            _ => Err(FrameError::Parse("need both n= and D=".into())),
        }
    }
}

impl FromStr for DifferenceSet {
    type Err = FrameError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.elements.iter().map(u64::to_string).collect();
        write!(f, "n={}; D={}", self.modulus, d.join(","))
    }
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Nonzero quadratic residues mod a prime `q = 3 (mod 4)`: a `(q, (q-1)/2, (q-3)/4)` difference set.
pub fn qr_difference_set(q: u64) -> Result<DifferenceSet, FrameError> {
    if !is_prime(q) || q % 4 != 3 {
        return Err(FrameError::InvalidParameter(format!("{q} is not a prime congruent to 3 mod 4")));
    }
    let residues: BTreeSet<u64> = (1..q).map(|a| a * a % q).collect();
    DifferenceSet::new(q, residues.into_iter().collect())
}

/// Every `(n, m, lambda)` difference set up to translation, as canonical representatives.
pub fn search_difference_sets(n: u64, m: u64) -> Result<Vec<DifferenceSet>, FrameError> {
    if n > SEARCH_N_MAX {
        return Err(FrameError::ResourceLimit { n, max: SEARCH_N_MAX });
    }
    if !(1 < m && m < n) {
        return Err(FrameError::InvalidParameter(format!("need 1 < m < n, got m = {m}, n = {n}")));
    }
    if !(m * (m - 1)).is_multiple_of(n - 1) {
        return Ok(Vec::new());
    }
    let lambda = m * (m - 1) / (n - 1);
    if m == n - 1 {
        return Ok(vec![DifferenceSet { modulus: n, elements: (0..m).collect(), lambda }]);
    }
    if 2 * m > n {
        let complements = search_difference_sets(n, n - m)?
            .into_iter()
            .map(|set| {
                let rest = (0..n).filter(|e| !set.elements.contains(e)).collect();
                DifferenceSet { modulus: n, elements: rest, lambda }.canonical()
            })
            .collect::<BTreeSet<_>>();
        return Ok(complements.into_iter().collect());
    }

    let factors: Vec<u64> = (2..n.min(COMPRESSION_Q_MAX + 1)).filter(|&q| n.is_multiple_of(q)).collect();
    let mut lift_caps = vec![None];
    for &q in &factors {
        let found = compressions(n, m, lambda, q);
        if found.is_empty() {
            return Ok(Vec::new());
        }
        if q == *factors.last().expect("nonempty") {
            lift_caps = found.into_iter().map(Some).collect();
        }
    }

    let mut found = BTreeSet::new();
    for caps in lift_caps {
        let q = caps.as_ref().map_or(1, |c: &Vec<u64>| c.len() as u64);
        let mut search = Search {
            n,
            m,
            lambda,
            q,
            caps: caps.unwrap_or_else(|| vec![m]),
            class_counts: vec![0; q as usize],
            counts: vec![0; n as usize],
            chosen: Vec::new(),
            found: BTreeSet::new(),
        };
        // difference 1 occurs, so the minimal translate starts 0, 1
        if search.push(0) && search.push(1) {
            search.extend(2);
        }
        found.append(&mut search.found);
    }
    Ok(found.into_iter().collect())
}

/// Largest modulus used for compressions; beyond it enumeration outweighs the pruning.
const COMPRESSION_Q_MAX: u64 = 13;

/// Residue counts of a difference set modulo a factor `q` of `n`, every rotation included.
///
/// Each count lies in `0..=n/q`, they sum to `m`, and their periodic
/// autocorrelation is `m + lambda (n/q - 1)` at shift 0 and `lambda n/q` elsewhere.
fn compressions(n: u64, m: u64, lambda: u64, q: u64) -> BTreeSet<Vec<u64>> {
    fn fill(
        c: &mut Vec<u64>,
        q: u64,
        h: u64,
        sum: u64,
        squares: u64,
        want: (u64, u64, u64),
        out: &mut BTreeSet<Vec<u64>>,
    ) {
        let (m, energy, off) = want;
        if c.len() as u64 == q {
            let paf = |d: u64| (0..q).map(|i| c[i as usize] * c[((i + d) % q) as usize]).sum::<u64>();
            if sum == m && squares == energy && (1..q).all(|d| paf(d) == off) {
                for r in 0..q as usize {
                    let mut rotated = c.clone();
                    rotated.rotate_left(r);
                    out.insert(rotated);
                }
            }
            return;
        }
        let slots_left = q - c.len() as u64 - 1;
        for v in 0..=h {
            if sum + v > m || squares + v * v > energy || sum + v + slots_left * h < m {
                continue;
            }
            c.push(v);
            fill(c, q, h, sum + v, squares + v * v, want, out);
            c.pop();
        }
    }
    let h = n / q;
    let mut out = BTreeSet::new();
    fill(&mut Vec::with_capacity(q as usize), q, h, 0, 0, (m, m + lambda * (h - 1), lambda * h), &mut out);
    out
}

/// Backtracking over increasing elements starting `0, 1`, with at most
/// `caps[c]` elements in residue class `c` modulo `q`.
struct Search {
    n: u64,
    m: u64,
    lambda: u64,
    q: u64,
    caps: Vec<u64>,
    class_counts: Vec<u64>,
    counts: Vec<u64>,
    chosen: Vec<u64>,
    found: BTreeSet<DifferenceSet>,
}

impl Search {
    fn extend(&mut self, from: u64) {
        if self.chosen.len() as u64 == self.m {
            let set = DifferenceSet { modulus: self.n, elements: self.chosen.clone(), lambda: self.lambda };
            self.found.insert(set.canonical());
            return;
        }
        let needed = self.m - self.chosen.len() as u64;
        let mut e = from;
        while e + needed <= self.n {
            if self.push(e) {
                if self.deficits_reachable() && self.classes_fillable(e + 1) && self.could_be_minimal() {
                    self.extend(e + 1);
                }
                self.pop();
            }
            e += 1;
        }
    }

    /// Each further element adds at most two occurrences of any difference.
    fn deficits_reachable(&self) -> bool {
        let budget = 2 * (self.m - self.chosen.len() as u64);
        self.counts[1..].iter().all(|&c| c + budget >= self.lambda)
    }

    /// Every residue class still has room for its missing elements in `from..n`.
    fn classes_fillable(&self, from: u64) -> bool {
        (0..self.q).all(|c| {
            let room = (from..self.n).filter(|e| e % self.q == c).count() as u64;
            self.class_counts[c as usize] + room >= self.caps[c as usize]
        })
    }

    /// False once some rotation of the chosen gaps is already smaller than
    /// the gaps from 0, so no completion is the minimal translate.
    fn could_be_minimal(&self) -> bool {
        let gaps: Vec<u64> = self.chosen.windows(2).map(|w| w[1] - w[0]).collect();
        (1..gaps.len()).all(|j| {
            let tail = &gaps[j..];
            tail.iter().zip(&gaps).find(|(a, b)| a != b).is_none_or(|(a, b)| a > b)
        })
    }

    fn diffs(&self, e: u64) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.chosen.iter().flat_map(move |&a| [((e + n - a) % n) as usize, ((a + n - e) % n) as usize])
    }

    /// Adds `e` unless a class cap or a difference count would be exceeded.
    fn push(&mut self, e: u64) -> bool {
        let class = (e % self.q) as usize;
        if self.class_counts[class] == self.caps[class] {
            return false;
        }
        let ds: Vec<usize> = self.diffs(e).collect();
        for &d in &ds {
            self.counts[d] += 1;
        }
        if ds.iter().any(|&d| self.counts[d] > self.lambda) {
            for &d in &ds {
                self.counts[d] -= 1;
            }
            return false;
        }
        self.class_counts[class] += 1;
        self.chosen.push(e);
        true
    }

    fn pop(&mut self) {
        let e = self.chosen.pop().expect("pop after push");
        self.class_counts[(e % self.q) as usize] -= 1;
        let ds: Vec<usize> = self.diffs(e).collect();
        for d in ds {
            self.counts[d] -= 1;
        }
    }
}

/// One validated property: worst-case absolute deviation against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub property: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(property: &str, deviation: f64) -> Self {
        Self { property: property.to_string(), deviation, tolerance: TOLERANCE, pass: deviation <= TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, property: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.property == property)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.subject)?;
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            writeln!(f, "  {:<34} {:>12.3e}  (tol {:.0e})  {verdict}", c.property, c.deviation, c.tolerance)?;
        }
        Ok(())
    }
}

pub const UNIT_NORM: &str = "unit norm";
pub const TIGHTNESS: &str = "tightness";
pub const EQUIANGULARITY: &str = "equiangularity";
pub const CONSTANT_DIAGONAL: &str = "(i) constant diagonal";
pub const HERMITIAN_UNIMODULAR: &str = "(ii) conjugate-symmetric unimodular";
pub const SQUARE_OFF_DIAGONAL: &str = "(iii) S^2 off-diagonal";
pub const SQUARE_DIAGONAL: &str = "(iii) S^2 diagonal";

/// Frame vectors as the columns of an `m x n` complex matrix, `m < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    entries: DMatrix<C64>,
    construction: String,
}

impl Frame {
    /// Wraps a matrix without checking the ETF properties.
    pub fn new_unchecked(entries: DMatrix<C64>, construction: impl Into<String>) -> Result<Self, FrameError> {
        let (m, n) = entries.shape();
        if m == 0 || m >= n {
            return Err(FrameError::AspectRatio { m, n });
        }
        Ok(Self { entries, construction: construction.into() })
    }

    /// Wraps a matrix and rejects it unless it is an ETF within tolerance.
    pub fn new(entries: DMatrix<C64>, construction: impl Into<String>) -> Result<Self, FrameError> {
        let frame = Self::new_unchecked(entries, construction)?;
        match validate_etf(&frame).first_failure() {
            None => Ok(frame),
            Some(c) => Err(FrameError::ConstructionFailed { property: c.property.clone(), deviation: c.deviation }),
        }
    }

    /// Harmonic frame `f_j = (omega^(j d))_{d in D} / sqrt(m)` without validation.
    pub fn harmonic_unchecked(set: &DifferenceSet) -> Result<Self, FrameError> {
        let n = set.modulus();
        let m = set.elements().len();
        let scale = 1.0 / (m as f64).sqrt();
        let entries = DMatrix::from_fn(m, n as usize, |row, col| {
            let phase = (col as u64 * set.elements()[row]) % n;
            C64::from_polar(scale, 2.0 * PI * phase as f64 / n as f64)
        });
        Self::new_unchecked(entries, format!("harmonic({set})"))
    }

    /// Factors an `n x n` Gram matrix of rank `m` as `F'F` using its top `m` eigenpairs.
    pub fn from_gram(gram: &DMatrix<C64>, m: usize, construction: impl Into<String>) -> Result<Self, FrameError> {
        let (rows, cols) = gram.shape();
        if rows != cols {
            return Err(FrameError::InvalidParameter(format!("Gram matrix is {rows}x{cols}")));
        }
        if m == 0 || m >= rows {
            return Err(FrameError::AspectRatio { m, n: rows });
        }
        let eig = gram.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..rows).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let entries = DMatrix::from_fn(m, rows, |r, c| {
            let idx = order[r];
            let root = eig.eigenvalues[idx].max(0.0).sqrt();
            eig.eigenvectors[(c, idx)].conj() * root
        });
        Self::new_unchecked(entries, construction)
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn construction(&self) -> &str {
        &self.construction
    }

    /// Number of frame vectors.
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    pub fn x(&self) -> f64 {
        self.n() as f64 / self.m() as f64 - 1.0
    }

    /// Welch bound `x / (n - 1)`.
    pub fn welch(&self) -> f64 {
        self.x() / (self.n() as f64 - 1.0)
    }

    /// `F'F`.
    pub fn gram(&self) -> DMatrix<C64> {
        self.entries.adjoint() * &self.entries
    }

    pub fn to_json(&self) -> FrameJson {
        FrameJson {
            kind: FrameJsonKind::Frame,
            m: self.m(),
            n: self.n(),
            construction: Some(self.construction.clone()),
            entries: row_major(&self.entries),
        }
    }

    /// Imports either a frame or a Gram matrix.
    pub fn from_json(json: &FrameJson) -> Result<Self, FrameError> {
        let construction = json.construction.clone().unwrap_or_else(|| "imported".into());
        match json.kind {
            FrameJsonKind::Frame => Self::new_unchecked(from_row_major(json.m, json.n, &json.entries)?, construction),
            FrameJsonKind::Gram => {
                let gram = from_row_major(json.n, json.n, &json.entries)?;
                Self::from_gram(&gram, json.m, construction)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameJsonKind {
    Frame,
    Gram,
}

/// File form of a frame (`m x n` entries) or of its Gram matrix (`n x n`),
/// row-major with each complex entry as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    pub kind: FrameJsonKind,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    pub entries: Vec<[f64; 2]>,
}

fn row_major(matrix: &DMatrix<C64>) -> Vec<[f64; 2]> {
    let (rows, cols) = matrix.shape();
    (0..rows).flat_map(|r| (0..cols).map(move |c| [matrix[(r, c)].re, matrix[(r, c)].im])).collect()
}

fn from_row_major(rows: usize, cols: usize, entries: &[[f64; 2]]) -> Result<DMatrix<C64>, FrameError> {
    if entries.len() != rows * cols {
        return Err(FrameError::Parse(format!("expected {} entries, found {}", rows * cols, entries.len())));
    }
    if entries.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FrameError::Parse("non-finite entry".into()));
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let [re, im] = entries[r * cols + c];
        C64::new(re, im)
    }))
}

/// Validated harmonic ETF for a difference set.
pub fn harmonic_etf(set: &DifferenceSet) -> Result<Frame, FrameError> {
    let frame = Frame::harmonic_unchecked(set)?;
    Frame::new(frame.entries, frame.construction)
}

/// Unit norm, tightness and equiangularity deviations.
pub fn validate_etf(frame: &Frame) -> ValidationReport {
    let (m, n) = (frame.m(), frame.n());
    let f = frame.entries();

    let unit = f.column_iter().map(|col| (col.norm() - 1.0).abs()).fold(0.0, f64::max);

    let ratio = n as f64 / m as f64;
    let synthesis = f * f.adjoint();
    let mut tight: f64 = 0.0;
    for r in 0..m {
        for c in 0..m {
            let target = if r == c { ratio } else { 0.0 };
            tight = tight.max((synthesis[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }

    let gram = frame.gram();
    let welch = frame.welch();
    let mut equi: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                equi = equi.max((gram[(i, j)].norm_sqr() - welch).abs());
            }
        }
    }

    ValidationReport {
        subject: format!("frame {} (n={n}, m={m})", frame.construction()),
        checks: vec![Check::new(UNIT_NORM, unit), Check::new(TIGHTNESS, tight), Check::new(EQUIANGULARITY, equi)],
    }
}

/// The generalized conference matrix of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ConferenceMatrix {
    entries: DMatrix<C64>,
    s: f64,
    x: f64,
    source: String,
}

impl ConferenceMatrix {
    /// Wraps a matrix with the frame parameter `x` without validation.
    pub fn new_unchecked(entries: DMatrix<C64>, x: f64, source: impl Into<String>) -> Result<Self, FrameError> {
        if entries.nrows() != entries.ncols() {
            return Err(FrameError::InvalidParameter("conference matrix must be square".into()));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(FrameError::InvalidParameter(format!("x = {x} must be positive")));
        }
        Ok(Self { entries, s: s_of_x(x), x, source: source.into() })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `s = (1 - x) / (2 sqrt(x))`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Inverts the construction: `F'F = sqrt(x/(n-1)) S + (x+1)/2 I`.
    pub fn gram(&self) -> DMatrix<C64> {
        let n = self.n();
        let scale = (self.x / (n as f64 - 1.0)).sqrt();
        let shift = (self.x + 1.0) / 2.0;
        self.entries.map(|v| v * scale) + DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0)
    }

    /// Target value of every diagonal entry of `S^2`.
    pub fn square_diagonal(&self) -> f64 {
        let n = self.n() as f64;
        (n - 1.0) * (self.x + 1.0).powi(2) / (4.0 * self.x)
    }
}

pub fn s_of_x(x: f64) -> f64 {
    (1.0 - x) / (2.0 * x.sqrt())
}

/// `S = sqrt((n-1)/x) (F'F - I/(2 gamma))`, rejected unless properties (i)-(iii) hold.
pub fn build_conference(frame: &Frame) -> Result<ConferenceMatrix, FrameError> {
    let conf = build_conference_unchecked(frame)?;
    match validate_conference(&conf).first_failure() {
        None => Ok(conf),
        Some(c) => Err(FrameError::ConstructionFailed { property: c.property.clone(), deviation: c.deviation }),
    }
}

pub fn build_conference_unchecked(frame: &Frame) -> Result<ConferenceMatrix, FrameError> {
    let n = frame.n();
    let x = frame.x();
    let scale = ((n as f64 - 1.0) / x).sqrt();
    let shift = 1.0 / (2.0 * frame.gamma());
    let shifted = frame.gram() - DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
    ConferenceMatrix::new_unchecked(shifted.map(|v| v * scale), x, frame.construction())
}

pub fn validate_conference(conf: &ConferenceMatrix) -> ValidationReport {
    let n = conf.n();
    let s = conf.entries();
    let diag_target = C64::new((n as f64 - 1.0).sqrt() * conf.s(), 0.0);

    let mut diag: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for i in 0..n {
        diag = diag.max((s[(i, i)] - diag_target).norm());
        for j in 0..n {
            if i != j {
                herm = herm.max((s[(i, j)] - s[(j, i)].conj()).norm()).max((s[(i, j)].norm() - 1.0).abs());
            }
        }
    }

    let square = s * s;
    let sq_target = conf.square_diagonal();
    let mut off: f64 = 0.0;
    let mut on: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                on = on.max((square[(i, j)] - C64::new(sq_target, 0.0)).norm());
            } else {
                off = off.max(square[(i, j)].norm());
            }
        }
    }

    ValidationReport {
        subject: format!("conference matrix of {} (n={n}, s={:.6})", conf.source(), conf.s()),
        checks: vec![
            Check::new(CONSTANT_DIAGONAL, diag),
            Check::new(HERMITIAN_UNIMODULAR, herm),
            Check::new(SQUARE_OFF_DIAGONAL, off),
            Check::new(SQUARE_DIAGONAL, on),
        ],
    }
}
