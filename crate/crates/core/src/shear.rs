//! The shearing operator and the group of quadratic shears
//! `z ↦ (λz₁ + Az₂², μz₂)`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::{Component, MultiIndex, Point2, PowerSeriesMap2};

/// Tolerance for off-diagonal linear coefficients of numerically recovered
/// maps (ODE limits). Constructed inputs use exact zero checks.
pub const RECOVERED_TOLERANCE: f64 = 1e-12;

/// The map `z ↦ (λz₁ + Az₂², μz₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearMap {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub a: Complex64,
}

impl ShearMap {
    pub const IDENTITY: ShearMap = ShearMap {
        lambda: Complex64::new(1.0, 0.0),
        mu: Complex64::new(1.0, 0.0),
        a: Complex64::new(0.0, 0.0),
    };

    pub fn new(lambda: Complex64, mu: Complex64, a: Complex64) -> Result<Self> {
        if lambda == Complex64::new(0.0, 0.0) || mu == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularShear);
        }
        Ok(Self { lambda, mu, a })
    }

    /// Unipotent shear `(z₁ + a z₂², z₂)`.
    pub fn unipotent(a: Complex64) -> Self {
        Self { a, ..Self::IDENTITY }
    }

    pub fn apply(&self, z: Point2) -> Point2 {
        Point2::new(self.lambda * z.z1 + self.a * z.z2 * z.z2, self.mu * z.z2)
    }

    /// Largest per-field modulus difference.
    pub fn max_diff(&self, other: &ShearMap) -> f64 {
        [
            (self.lambda - other.lambda).norm(),
            (self.mu - other.mu).norm(),
            (self.a - other.a).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Reads off `(λ, μ, A)` from a map whose linear part is diagonal and
/// invertible; all other coefficients are discarded.
pub fn shear_of(h: &PowerSeriesMap2) -> Result<ShearMap> {
    shear_of_with_tolerance(h, 0.0)
}

/// [`shear_of`] for numerically obtained maps: off-diagonal linear and
/// constant coefficients up to `tol` in modulus are accepted as zero.
pub fn shear_of_with_tolerance(h: &PowerSeriesMap2, tol: f64) -> Result<ShearMap> {
    if !h.is_diagonal_invertible(tol) {
        return Err(Error::NotDiagonalInvertible);
    }
    let lin = h.linear_part();
    Ok(ShearMap {
        lambda: lin[0][0],
        mu: lin[1][1],
        a: if h.trunc_degree() >= 2 {
            h.coefficient(Component::First, (0, 2))
        } else {
            Complex64::new(0.0, 0.0)
        },
    })
}

/// Exact polynomial embedding of a shear.
pub fn shear_to_series(s: &ShearMap, trunc_degree: u32) -> Result<PowerSeriesMap2> {
    if trunc_degree < 2 {
        return Err(Error::InvalidDegree(trunc_degree, 2));
    }
    PowerSeriesMap2::from_terms(
        trunc_degree,
        [(MultiIndex::new(1, 0), s.lambda), (MultiIndex::new(0, 2), s.a)],
        [(MultiIndex::new(0, 1), s.mu)],
    )
}

/// `s ∘ r`, again a shear: `(λ_s λ_r, μ_s μ_r, λ_s A_r + A_s μ_r²)`.
pub fn shear_compose(s: &ShearMap, r: &ShearMap) -> ShearMap {
    ShearMap {
        lambda: s.lambda * r.lambda,
        mu: s.mu * r.mu,
        a: s.lambda * r.a + s.a * r.mu * r.mu,
    }
}

pub fn shear_inverse(s: &ShearMap) -> Result<ShearMap> {
    let zero = Complex64::new(0.0, 0.0);
    if s.lambda == zero || s.mu == zero {
        return Err(Error::SingularShear);
    }
    Ok(ShearMap {
        lambda: s.lambda.inv(),
        mu: s.mu.inv(),
        a: -s.a / (s.lambda * s.mu * s.mu),
    })
}

#[derive(Serialize, Deserialize)]
struct ShearRecord {
    lambda: [f64; 2],
    mu: [f64; 2],
    #[serde(rename = "A")]
    a: [f64; 2],
}

impl Serialize for ShearMap {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ShearRecord {
            lambda: [self.lambda.re, self.lambda.im],
            mu: [self.mu.re, self.mu.im],
            a: [self.a.re, self.a.im],
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ShearMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ShearRecord::deserialize(d)?;
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        ShearMap::new(c(r.lambda), c(r.mu), c(r.a)).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const SHARP: f64 = 2.598_076_211_353_316;

    #[test]
    fn phi_is_its_own_shearing() {
        let phi = PowerSeriesMap2::shear_family(c(SHARP, 0.0), 8).unwrap();
        assert_eq!(shear_of(&phi).unwrap(), ShearMap::unipotent(c(SHARP, 0.0)));
    }

    #[test]
    fn shearing_discards_other_terms() {
        let one = c(1.0, 0.0);
        let h = PowerSeriesMap2::from_terms(
            4,
            [
                ((1, 0).into(), one),
                ((2, 0).into(), one),
                ((1, 1).into(), one),
                ((0, 3).into(), one),
            ],
            [((0, 1).into(), one), ((2, 0).into(), one)],
        )
        .unwrap();
        assert_eq!(shear_of(&h).unwrap(), ShearMap::IDENTITY);

        let h = PowerSeriesMap2::from_terms(
            4,
            [
                ((1, 0).into(), -one),
                ((0, 2).into(), c(0.0, 5.0)),
                ((1, 1).into(), c(9.0, 0.0)),
            ],
            [((0, 1).into(), -one), ((0, 2).into(), one)],
        )
        .unwrap();
        assert_eq!(shear_of(&h).unwrap(), ShearMap::new(-one, -one, c(0.0, 5.0)).unwrap());
    }

    #[test]
    fn shearing_rejects_non_diagonal() {
        let one = c(1.0, 0.0);
        let h = PowerSeriesMap2::from_terms(3, [((1, 0).into(), one), ((0, 1).into(), one)], [((0, 1).into(), one)])
            .unwrap();
        assert_eq!(shear_of(&h), Err(Error::NotDiagonalInvertible));
        let singular = PowerSeriesMap2::from_terms(3, [((1, 0).into(), one)], [((0, 2).into(), one)]).unwrap();
        assert_eq!(shear_of(&singular), Err(Error::NotDiagonalInvertible));
        // tiny off-diagonal noise passes only with a tolerance
        let noisy = PowerSeriesMap2::identity(3)
            .unwrap()
            .with_coefficient(Component::Second, (1, 0), c(1e-14, 0.0))
            .unwrap();
        assert!(shear_of(&noisy).is_err());
        assert_eq!(
            shear_of_with_tolerance(&noisy, RECOVERED_TOLERANCE).unwrap(),
            ShearMap::IDENTITY
        );
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(
            shear_to_series(&ShearMap::IDENTITY, 5).unwrap(),
            PowerSeriesMap2::identity(5).unwrap()
        );
        assert_eq!(
            shear_to_series(&ShearMap::unipotent(c(SHARP, 0.0)), 8).unwrap(),
            PowerSeriesMap2::shear_family(c(SHARP, 0.0), 8).unwrap()
        );
        let e = 0.7f64.exp();
        let chain = ShearMap::new(c(e, 0.0), c(e, 0.0), c(e * SHARP, 0.0)).unwrap();
        let series = shear_to_series(&chain, 4).unwrap();
        let expected = PowerSeriesMap2::shear_family(c(SHARP, 0.0), 4)
            .unwrap()
            .scale(c(e, 0.0));
        assert_eq!(series, expected);
        assert_eq!(series.nnz(), 3);
        assert_eq!(shear_to_series(&chain, 1), Err(Error::InvalidDegree(1, 2)));
    }

    #[test]
    fn composition_examples() {
        let one = c(1.0, 0.0);
        assert_eq!(
            shear_compose(&ShearMap::unipotent(c(0.5, 0.0)), &ShearMap::unipotent(c(1.25, -1.0))),
            ShearMap::unipotent(c(1.75, -1.0))
        );
        let s = ShearMap::new(c(2.0, 0.0), c(3.0, 0.0), one).unwrap();
        assert_eq!(shear_compose(&s, &ShearMap::IDENTITY), s);
        let s = ShearMap::new(one, c(2.0, 0.0), one).unwrap();
        let r = ShearMap::new(c(3.0, 0.0), one, c(4.0, 0.0)).unwrap();
        assert_eq!(
            shear_compose(&s, &r),
            ShearMap::new(c(3.0, 0.0), c(2.0, 0.0), c(5.0, 0.0)).unwrap()
        );
    }

    #[test]
    fn composition_matches_pointwise_application() {
        let s = ShearMap::new(c(1.0, 0.5), c(0.3, -2.0), c(-1.0, 4.0)).unwrap();
        let r = ShearMap::new(c(-0.2, 1.1), c(0.9, 0.1), c(2.0, 0.0)).unwrap();
        let z = Point2::new(c(0.3, -0.2), c(0.1, 0.6));
        let lhs = shear_compose(&s, &r).apply(z);
        let rhs = s.apply(r.apply(z));
        assert!(lhs.dist(&rhs) < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        let a = c(0.4, -1.3);
        assert_eq!(shear_inverse(&ShearMap::unipotent(a)).unwrap(), ShearMap::unipotent(-a));
        assert_eq!(shear_inverse(&ShearMap::IDENTITY).unwrap(), ShearMap::IDENTITY);
        let e = c(std::f64::consts::E, 0.0);
        let s = ShearMap::new(e, e, e * SHARP).unwrap();
        let inv = shear_inverse(&s).unwrap();
        let expected = ShearMap::new(e.inv(), e.inv(), -SHARP * e.inv() * e.inv()).unwrap();
        assert!(inv.max_diff(&expected) < 1e-15);
        assert!(shear_compose(&s, &inv).max_diff(&ShearMap::IDENTITY) < 1e-14);
        assert!(shear_compose(&inv, &s).max_diff(&ShearMap::IDENTITY) < 1e-14);
        let singular = ShearMap {
            lambda: c(0.0, 0.0),
            ..ShearMap::IDENTITY
        };
        assert_eq!(shear_inverse(&singular), Err(Error::SingularShear));
    }

    #[test]
    fn json_record() {
        let s = ShearMap::new(c(1.0, 0.0), c(2.0, -1.0), c(0.5, 0.25)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"lambda":[1.0,0.0],"mu":[2.0,-1.0],"A":[0.5,0.25]}"#);
        assert_eq!(serde_json::from_str::<ShearMap>(&text).unwrap(), s);
        assert!(serde_json::from_str::<ShearMap>(r#"{"lambda":[0,0],"mu":[1,0],"A":[0,0]}"#).is_err());
    }
}
