//! Truncated bivariate complex power series and holomorphic maps `C² → C²`.
//!
//! A [`PowerSeriesMap2`] stores the Taylor coefficients of both components
//! up to a fixed total degree. Polynomial maps are represented exactly, and
//! every operation (evaluation, composition, Jacobians) is term-wise.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TRUNC_DEGREE: u32 = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Exponent pair `(α₁, α₂)` of the monomial `z₁^α₁ z₂^α₂`.
///
/// Ordered graded-lexicographically: first by total degree, then by `α₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub a1: u32,
    pub a2: u32,
}

impl MultiIndex {
    pub const fn new(a1: u32, a2: u32) -> Self {
        Self { a1, a2 }
    }

    pub const fn degree(self) -> u32 {
        self.a1 + self.a2
    }

    /// All indices of total degree at most `max_degree`, in canonical order.
    pub fn up_to(max_degree: u32) -> impl Iterator<Item = MultiIndex> {
        (0..=max_degree).flat_map(|d| (0..=d).map(move |a1| MultiIndex::new(a1, d - a1)))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.a1).cmp(&(other.degree(), other.a1))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<(u32, u32)> for MultiIndex {
    fn from((a1, a2): (u32, u32)) -> Self {
        Self::new(a1, a2)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

/// Which output coordinate of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    First,
    Second,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::First => 0,
            Component::Second => 1,
        }
    }

    /// `1 → First`, `2 → Second`.
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1 => Some(Component::First),
            2 => Some(Component::Second),
            _ => None,
        }
    }
}

/// A point `(z₁, z₂)` of `C²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { z1: ZERO, z2: ZERO };

    pub const fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inside_ball(&self) -> bool {
        self.norm() < 1.0
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.z1 * c, self.z2 * c)
    }

    /// Hermitian product `⟨self, other⟩ = self₁·conj(other₁) + self₂·conj(other₂)`.
    pub fn inner(&self, other: &Point2) -> Complex64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (*self - *other).norm()
    }

    /// Real coordinates `(Re z₁, Im z₁, Re z₂, Im z₂)`.
    pub fn to_reals(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn from_reals(r: [f64; 4]) -> Self {
        Self::new(Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3]))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.z1 + rhs.z1, self.z2 + rhs.z2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.z1 - rhs.z1, self.z2 - rhs.z2)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.z1, self.z2)
    }
}

impl Serialize for Point2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.z1.re, self.z1.im], [self.z2.re, self.z2.im]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [[a, b], [c, e]] = <[[f64; 2]; 2]>::deserialize(d)?;
        Ok(Point2::new(Complex64::new(a, b), Complex64::new(c, e)))
    }
}

/// 2×2 complex matrix, row-major: `m[i][j] = ∂f_i/∂z_j`.
pub type Matrix2 = [[Complex64; 2]; 2];

pub fn mat_det(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Solves `m · w = v`, or `None` when `m` is singular.
pub fn mat_solve(m: &Matrix2, v: &Point2) -> Option<Point2> {
    let det = mat_det(m);
    let scale = m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    if det.norm() <= f64::EPSILON * scale * scale || !det.is_finite() {
        return None;
    }
    let w1 = (m[1][1] * v.z1 - m[0][1] * v.z2) / det;
    let w2 = (m[0][0] * v.z2 - m[1][0] * v.z1) / det;
    Some(Point2::new(w1, w2))
}

type Coeffs = BTreeMap<MultiIndex, Complex64>;

/// Holomorphic map `B² → C²` given by two truncated power series.
///
/// Coefficients above `trunc_degree` are absent and read as zero. Exact zero
/// coefficients are never stored, so structural equality is coefficient
/// equality.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesMap2 {
    trunc_degree: u32,
    components: [Coeffs; 2],
}

impl PowerSeriesMap2 {
    pub fn zero(trunc_degree: u32) -> Result<Self> {
        if trunc_degree < 1 {
            return Err(Error::InvalidDegree(trunc_degree, 1));
        }
        Ok(Self {
            trunc_degree,
            components: [Coeffs::new(), Coeffs::new()],
        })
    }

    pub fn identity(trunc_degree: u32) -> Result<Self> {
        Self::from_terms(trunc_degree, [((1, 0).into(), ONE)], [((0, 1).into(), ONE)])
    }

    /// Builds a map from explicit coefficient lists. Repeated indices add up.
    pub fn from_terms<I, J>(trunc_degree: u32, first: I, second: J) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
        J: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut out = Self::zero(trunc_degree)?;
        for (slot, terms) in [
            (0, first.into_iter().collect::<Vec<_>>()),
            (1, second.into_iter().collect()),
        ] {
            for (idx, c) in terms {
                if idx.degree() > trunc_degree {
                    return Err(Error::IndexAboveTruncation(idx.a1, idx.a2, trunc_degree));
                }
                if !c.is_finite() {
                    return Err(Error::NonFinite(idx.a1, idx.a2));
                }
                *out.components[slot].entry(idx).or_insert(ZERO) += c;
            }
        }
        out.prune();
        Ok(out)
    }

    /// The shear `(z₁ + a·z₂², z₂)`.
    pub fn shear_family(a: Complex64, trunc_degree: u32) -> Result<Self> {
        if trunc_degree < 2 {
            return Err(Error::InvalidDegree(trunc_degree, 2));
        }
        Self::from_terms(
            trunc_degree,
            [((1, 0).into(), ONE), ((0, 2).into(), a)],
            [((0, 1).into(), ONE)],
        )
    }

    fn prune(&mut self) {
        for comp in &mut self.components {
            comp.retain(|_, c| *c != ZERO);
        }
    }

    pub fn trunc_degree(&self) -> u32 {
        self.trunc_degree
    }

    pub fn coefficient(&self, component: Component, idx: impl Into<MultiIndex>) -> Complex64 {
        self.components[component.index()]
            .get(&idx.into())
            .copied()
            .unwrap_or(ZERO)
    }

    /// Nonzero terms of one component in canonical order.
    pub fn terms(&self, component: Component) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.components[component.index()].iter().map(|(k, v)| (*k, *v))
    }

    /// Number of stored (nonzero) coefficients over both components.
    pub fn nnz(&self) -> usize {
        self.components.iter().map(BTreeMap::len).sum()
    }

    /// Largest total degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> u32 {
        self.components
            .iter()
            .filter_map(|c| c.keys().map(|k| k.degree()).max())
            .max()
            .unwrap_or(0)
    }

    /// Same coefficients at another truncation degree (higher terms dropped).
    pub fn with_trunc_degree(&self, trunc_degree: u32) -> Result<Self> {
        let mut out = Self::zero(trunc_degree)?;
        for (dst, src) in out.components.iter_mut().zip(&self.components) {
            dst.extend(src.iter().filter(|(k, _)| k.degree() <= trunc_degree));
        }
        Ok(out)
    }

    /// Returns a copy with one coefficient replaced.
    pub fn with_coefficient(&self, component: Component, idx: impl Into<MultiIndex>, value: Complex64) -> Result<Self> {
        let idx = idx.into();
        if idx.degree() > self.trunc_degree {
            return Err(Error::IndexAboveTruncation(idx.a1, idx.a2, self.trunc_degree));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(idx.a1, idx.a2));
        }
        let mut out = self.clone();
        let comp = &mut out.components[component.index()];
        if value == ZERO {
            comp.remove(&idx);
        } else {
            comp.insert(idx, value);
        }
        Ok(out)
    }

    pub fn has_zero_constant_term(&self) -> bool {
        self.coefficient(Component::First, (0, 0)) == ZERO && self.coefficient(Component::Second, (0, 0)) == ZERO
    }

    /// The differential at the origin.
    pub fn linear_part(&self) -> Matrix2 {
        [
            [
                self.coefficient(Component::First, (1, 0)),
                self.coefficient(Component::First, (0, 1)),
            ],
            [
                self.coefficient(Component::Second, (1, 0)),
                self.coefficient(Component::Second, (0, 1)),
            ],
        ]
    }

    /// Membership in the class of maps fixing 0 with diagonal invertible
    /// differential. Off-diagonal and constant coefficients must be at most
    /// `tol` in modulus; diagonal ones must exceed it.
    pub fn is_diagonal_invertible(&self, tol: f64) -> bool {
        let lin = self.linear_part();
        self.coefficient(Component::First, (0, 0)).norm() <= tol
            && self.coefficient(Component::Second, (0, 0)).norm() <= tol
            && lin[0][1].norm() <= tol
            && lin[1][0].norm() <= tol
            && lin[0][0].norm() > tol
            && lin[1][1].norm() > tol
    }

    /// Whether `f(0) = 0` and `df₀ = c·id` to within `tol`.
    pub fn is_normalized_to(&self, c: Complex64, tol: f64) -> bool {
        let lin = self.linear_part();
        self.coefficient(Component::First, (0, 0)).norm() <= tol
            && self.coefficient(Component::Second, (0, 0)).norm() <= tol
            && (lin[0][0] - c).norm() <= tol
            && (lin[1][1] - c).norm() <= tol
            && lin[0][1].norm() <= tol
            && lin[1][0].norm() <= tol
    }

    pub fn eval(&self, z: Point2) -> Point2 {
        let d = self.effective_degree() as usize;
        let (p1, p2) = (powers(z.z1, d), powers(z.z2, d));
        let eval_comp = |comp: &Coeffs| {
            comp.iter()
                .fold(ZERO, |acc, (k, c)| acc + c * p1[k.a1 as usize] * p2[k.a2 as usize])
        };
        Point2::new(eval_comp(&self.components[0]), eval_comp(&self.components[1]))
    }

    /// Exact term-wise Jacobian `∂f_i/∂z_j` at `z`.
    pub fn jacobian_at(&self, z: Point2) -> Matrix2 {
        let d = self.effective_degree() as usize;
        let (p1, p2) = (powers(z.z1, d), powers(z.z2, d));
        let mut m = [[ZERO; 2]; 2];
        for (row, comp) in m.iter_mut().zip(&self.components) {
            for (k, c) in comp {
                let (a1, a2) = (k.a1 as usize, k.a2 as usize);
                if a1 > 0 {
                    row[0] += c * (a1 as f64) * p1[a1 - 1] * p2[a2];
                }
                if a2 > 0 {
                    row[1] += c * (a2 as f64) * p1[a1] * p2[a2 - 1];
                }
            }
        }
        m
    }

    /// Taylor coefficients of `self ∘ inner`, truncated to the smaller of the
    /// two truncation degrees.
    ///
    /// Both maps must fix the origin; then every dropped term has degree
    /// above the truncation and the result is exact up to it.
    pub fn compose(&self, inner: &PowerSeriesMap2) -> Result<PowerSeriesMap2> {
        if !self.has_zero_constant_term() || !inner.has_zero_constant_term() {
            return Err(Error::NonzeroConstantTerm);
        }
        let d = self.trunc_degree.min(inner.trunc_degree);
        let g1 = Dense::from_coeffs(&inner.components[0], d);
        let g2 = Dense::from_coeffs(&inner.components[1], d);
        let mut out = Self::zero(d)?;
        for (slot, comp) in self.components.iter().enumerate() {
            let result = Dense::horner_substitute(comp, &g1, &g2, d);
            out.components[slot] = result.into_coeffs();
        }
        out.prune();
        Ok(out)
    }

    /// Largest coefficient modulus of `self − other` over both components.
    pub fn max_coeff_diff(&self, other: &PowerSeriesMap2) -> f64 {
        let mut worst = 0.0f64;
        for slot in 0..2 {
            let (a, b) = (&self.components[slot], &other.components[slot]);
            for k in a.keys().chain(b.keys()) {
                let da = a.get(k).copied().unwrap_or(ZERO);
                let db = b.get(k).copied().unwrap_or(ZERO);
                worst = worst.max((da - db).norm());
            }
        }
        worst
    }

    pub fn scale(&self, c: Complex64) -> PowerSeriesMap2 {
        let mut out = self.clone();
        for comp in &mut out.components {
            for v in comp.values_mut() {
                *v *= c;
            }
        }
        out.prune();
        out
    }

    pub fn to_file(&self) -> SeriesFile {
        let records = |comp: &Coeffs| {
            comp.iter()
                .map(|(k, c)| CoefficientRecord {
                    a1: k.a1,
                    a2: k.a2,
                    re: c.re,
                    im: c.im,
                })
                .collect()
        };
        SeriesFile {
            trunc_degree: self.trunc_degree,
            component1: records(&self.components[0]),
            component2: records(&self.components[1]),
        }
    }

    pub fn from_file(file: &SeriesFile) -> Result<Self> {
        let terms = |recs: &[CoefficientRecord]| {
            recs.iter()
                .map(|r| (MultiIndex::new(r.a1, r.a2), Complex64::new(r.re, r.im)))
                .collect::<Vec<_>>()
        };
        Self::from_terms(file.trunc_degree, terms(&file.component1), terms(&file.component2))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("series serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SeriesFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }
}

impl Serialize for PowerSeriesMap2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PowerSeriesMap2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SeriesFile::deserialize(d)?;
        Self::from_file(&file).map_err(serde::de::Error::custom)
    }
}

fn min_degree(a: &PowerSeriesMap2, b: &PowerSeriesMap2) -> u32 {
    a.trunc_degree.min(b.trunc_degree)
}

impl Add for &PowerSeriesMap2 {
    type Output = PowerSeriesMap2;
    /// Sum truncated to the smaller degree.
    fn add(self, rhs: &PowerSeriesMap2) -> PowerSeriesMap2 {
        let d = min_degree(self, rhs);
        let mut out = self.with_trunc_degree(d).expect("degree already valid");
        for (dst, src) in out.components.iter_mut().zip(&rhs.components) {
            for (k, c) in src.iter().filter(|(k, _)| k.degree() <= d) {
                *dst.entry(*k).or_insert(ZERO) += c;
            }
        }
        out.prune();
        out
    }
}

impl Sub for &PowerSeriesMap2 {
    type Output = PowerSeriesMap2;
    fn sub(self, rhs: &PowerSeriesMap2) -> PowerSeriesMap2 {
        self + &rhs.scale(-ONE)
    }
}

impl Mul<&PowerSeriesMap2> for Complex64 {
    type Output = PowerSeriesMap2;
    fn mul(self, rhs: &PowerSeriesMap2) -> PowerSeriesMap2 {
        rhs.scale(self)
    }
}

/// One coefficient in the series file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub a1: u32,
    pub a2: u32,
    pub re: f64,
    pub im: f64,
}

/// On-disk representation of a [`PowerSeriesMap2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub trunc_degree: u32,
    pub component1: Vec<CoefficientRecord>,
    pub component2: Vec<CoefficientRecord>,
}

fn powers(z: Complex64, d: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(d + 1);
    let mut acc = ONE;
    for _ in 0..=d {
        p.push(acc);
        acc *= z;
    }
    p
}

/// Dense bivariate polynomial truncated at total degree `d`.
#[derive(Clone)]
struct Dense {
    d: usize,
    c: Vec<Complex64>,
}

impl Dense {
    fn zero(d: u32) -> Self {
        let d = d as usize;
        Self {
            d,
            c: vec![ZERO; (d + 1) * (d + 1)],
        }
    }

    fn at(&self, a1: usize, a2: usize) -> Complex64 {
        self.c[a1 * (self.d + 1) + a2]
    }

    fn at_mut(&mut self, a1: usize, a2: usize) -> &mut Complex64 {
        &mut self.c[a1 * (self.d + 1) + a2]
    }

    fn from_coeffs(coeffs: &Coeffs, d: u32) -> Self {
        let mut out = Self::zero(d);
        for (k, c) in coeffs.iter().filter(|(k, _)| k.degree() <= d) {
            *out.at_mut(k.a1 as usize, k.a2 as usize) = *c;
        }
        out
    }

    fn into_coeffs(self) -> Coeffs {
        let mut out = Coeffs::new();
        for a1 in 0..=self.d {
            for a2 in 0..=(self.d - a1) {
                let c = self.at(a1, a2);
                if c != ZERO {
                    out.insert(MultiIndex::new(a1 as u32, a2 as u32), c);
                }
            }
        }
        out
    }

    /// `self · other`, dropping terms of total degree above `d`.
    fn mul_trunc(&self, other: &Dense) -> Dense {
        let d = self.d;
        let mut out = Dense::zero(d as u32);
        for a1 in 0..=d {
            for a2 in 0..=(d - a1) {
                let x = self.at(a1, a2);
                if x == ZERO {
                    continue;
                }
                let rem = d - a1 - a2;
                for b1 in 0..=rem {
                    for b2 in 0..=(rem - b1) {
                        let y = other.at(b1, b2);
                        if y != ZERO {
                            *out.at_mut(a1 + b1, a2 + b2) += x * y;
                        }
                    }
                }
            }
        }
        out
    }

    fn add_constant(&mut self, c: Complex64) {
        *self.at_mut(0, 0) += c;
    }

    /// Substitutes `(g1, g2)` into `Σ c_α u^α₁ v^α₂` by nested Horner
    /// evaluation: outer in `u`, inner in `v`.
    fn horner_substitute(h: &Coeffs, g1: &Dense, g2: &Dense, d: u32) -> Dense {
        let du = d as usize;
        // rows[a1][a2] = coefficient of u^a1 v^a2
        let mut rows = vec![vec![ZERO; du + 1]; du + 1];
        for (k, c) in h.iter().filter(|(k, _)| k.degree() <= d) {
            rows[k.a1 as usize][k.a2 as usize] = *c;
        }
        let inner = |row: &[Complex64]| {
            let top = row.iter().rposition(|c| *c != ZERO);
            let mut acc = Dense::zero(d);
            if let Some(top) = top {
                acc.add_constant(row[top]);
                for c in row[..top].iter().rev() {
                    acc = acc.mul_trunc(g2);
                    acc.add_constant(*c);
                }
            }
            acc
        };
        let top = rows.iter().rposition(|row| row.iter().any(|c| *c != ZERO));
        let mut acc = Dense::zero(d);
        if let Some(top) = top {
            acc = inner(&rows[top]);
            for row in rows[..top].iter().rev() {
                acc = acc.mul_trunc(g1);
                let p = inner(row);
                for (a, b) in acc.c.iter_mut().zip(p.c) {
                    *a += b;
                }
            }
        }
        acc
    }
}
