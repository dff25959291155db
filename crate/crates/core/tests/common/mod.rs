#![allow(dead_code)]

use loewner_core::{MultiIndex, Point2, PowerSeriesMap2};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn unit_disk<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

pub fn point_in_ball<R: Rng>(rng: &mut R, max_norm: f64) -> Point2 {
    loop {
        let p = Point2::from_reals(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        if p.norm() < 1.0 {
            return p.scale(c(max_norm, 0.0));
        }
    }
}

/// Random polynomial map with zero constant term; terms of degree
/// `min_deg..=max_deg`, linear part overwritten by `linear` when given.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    trunc: u32,
    max_deg: u32,
    linear: Option<[[Complex64; 2]; 2]>,
) -> PowerSeriesMap2 {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for idx in MultiIndex::up_to(max_deg.min(trunc)).filter(|k| k.degree() >= 1) {
        if idx.degree() == 1 && linear.is_some() {
            continue;
        }
        first.push((idx, unit_disk(rng)));
        second.push((idx, unit_disk(rng)));
    }
    if let Some(m) = linear {
        first.push((MultiIndex::new(1, 0), m[0][0]));
        first.push((MultiIndex::new(0, 1), m[0][1]));
        second.push((MultiIndex::new(1, 0), m[1][0]));
        second.push((MultiIndex::new(0, 1), m[1][1]));
    }
    PowerSeriesMap2::from_terms(trunc, first, second).unwrap()
}

/// Random element of the diagonal-invertible class.
pub fn random_hd<R: Rng>(rng: &mut R, trunc: u32, max_deg: u32) -> PowerSeriesMap2 {
    let nonzero = |rng: &mut R| loop {
        let v = unit_disk(rng) * 2.0;
        if v.norm() > 0.2 {
            return v;
        }
    };
    let zero = c(0.0, 0.0);
    let lam = nonzero(rng);
    let mu = nonzero(rng);
    random_poly(rng, trunc, max_deg, Some([[lam, zero], [zero, mu]]))
}

/// Random field `−id + higher order terms`.
pub fn random_normal_field<R: Rng>(rng: &mut R, trunc: u32, max_deg: u32) -> PowerSeriesMap2 {
    let zero = c(0.0, 0.0);
    let m1 = c(-1.0, 0.0);
    random_poly(rng, trunc, max_deg, Some([[m1, zero], [zero, m1]]))
}
