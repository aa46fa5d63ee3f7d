use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("scale domain is degenerate")]
pub struct DegenerateDomain;

/// Affine map from a data domain onto a range. Unclamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl LinearScale {
    pub fn new(domain: (f64, f64), range: (f64, f64)) -> Result<Self, DegenerateDomain> {
        if domain.0 == domain.1 || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(DegenerateDomain);
        }
        Ok(LinearScale {
            d0: domain.0,
            d1: domain.1,
            r0: range.0,
            r1: range.1,
        })
    }

    /// Like [`LinearScale::new`], but a single-valued domain maps to the middle of the range.
    pub fn or_midpoint(domain: (f64, f64), range: (f64, f64)) -> Self {
        Self::new(domain, range).unwrap_or(LinearScale {
            d0: domain.0 - 1.0,
            d1: domain.0 + 1.0,
            r0: range.0,
            r1: range.1,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.d0, self.d1)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r0, self.r1)
    }

    pub fn scale(&self, x: f64) -> f64 {
        self.r0 + (x - self.d0) * (self.r1 - self.r0) / (self.d1 - self.d0)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.d0 + (y - self.r0) * (self.d1 - self.d0) / (self.r1 - self.r0)
    }
}

pub fn linear_scale(domain: (f64, f64), range: (f64, f64)) -> Result<LinearScale, DegenerateDomain> {
    LinearScale::new(domain, range)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub offset: f64,
    pub width: f64,
}

/// Equal-width padded bands for ordered categories.
#[derive(Debug, Clone, PartialEq)]
pub struct BandScale {
    categories: Vec<String>,
    step: f64,
    padding: f64,
}

impl BandScale {
    pub fn new(categories: Vec<String>, range_width: f64, padding: f64) -> Result<Self, DegenerateDomain> {
        if categories.is_empty() || !(0.0..1.0).contains(&padding) {
            return Err(DegenerateDomain);
        }
        Ok(BandScale {
            step: range_width / categories.len() as f64,
            categories,
            padding,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn band_width(&self) -> f64 {
        self.step * (1.0 - self.padding)
    }

    pub fn band_at(&self, i: usize) -> Band {
        Band {
            offset: i as f64 * self.step + self.step * self.padding / 2.0,
            width: self.band_width(),
        }
    }

    pub fn band(&self, category: &str) -> Option<Band> {
        self.categories
            .iter()
            .position(|c| c == category)
            .map(|i| self.band_at(i))
    }

    pub fn bands(&self) -> impl Iterator<Item = (&str, Band)> + '_ {
        self.categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), self.band_at(i)))
    }
}

pub fn band_scale(categories: Vec<String>, range_width: f64, padding: f64) -> Result<BandScale, DegenerateDomain> {
    BandScale::new(categories, range_width, padding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_examples() {
        let s = linear_scale((0.0, 10.0), (0.0, 1.0)).unwrap();
        assert_eq!(s.scale(5.0), 0.5);
        let inv = linear_scale((0.0, 100.0), (1.0, 0.0)).unwrap();
        assert_eq!(inv.scale(25.0), 0.75);
        assert!((s.invert(s.scale(7.3)) - 7.3).abs() < 1e-12);
        assert_eq!(linear_scale((3.0, 3.0), (0.0, 1.0)), Err(DegenerateDomain));
    }

    #[test]
    fn band_examples() {
        let one = band_scale(vec!["a".into()], 1.0, 0.0).unwrap();
        assert_eq!(one.band_at(0), Band { offset: 0.0, width: 1.0 });

        // step = 1/3, width = step * 0.9, offset_1 = step + step * 0.05
        let three = band_scale(vec!["a".into(), "b".into(), "c".into()], 1.0, 0.1).unwrap();
        assert!((three.step() - 0.333_333_333_333_333_3).abs() < 1e-15);
        assert!((three.band_width() - 0.3).abs() < 1e-15);
        assert!((three.band("b").unwrap().offset - 0.35).abs() < 1e-15);
        assert_eq!(band_scale(vec![], 1.0, 0.1).unwrap_err(), DegenerateDomain);
    }

    proptest! {
        #[test]
        fn linear_round_trip(d0 in -1e6f64..1e6, span in 1.0f64..1e6, x in -2.0f64..3.0, r0 in -5.0f64..5.0, r1 in -5.0f64..5.0) {
            prop_assume!((r1 - r0).abs() > 1e-3);
            let d1 = d0 + span;
            let s = LinearScale::new((d0, d1), (r0, r1)).unwrap();
            let v = d0 + x * span;
            prop_assert!((s.invert(s.scale(v)) - v).abs() <= 1e-9 * span);
        }

        #[test]
        fn bands_are_disjoint_and_fit(n in 1usize..40, p in 0.0f64..0.99, w in 0.1f64..10.0) {
            let cats: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let b = BandScale::new(cats, w, p).unwrap();
            for i in 1..n {
                let (prev, cur) = (b.band_at(i - 1), b.band_at(i));
                prop_assert!(prev.offset + prev.width <= cur.offset + 1e-12);
            }
            let last = b.band_at(n - 1);
            prop_assert!(b.band_at(0).offset >= 0.0);
            prop_assert!(last.offset + last.width <= w + 1e-12);
        }
    }
}
