use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight calibration parameters: four GR4J parameters and four of the
/// degree-day snow module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gr4jParams {
    /// Production store capacity (mm).
    pub x1: f64,
    /// Groundwater exchange coefficient (mm/day).
    pub x2: f64,
    /// Routing store capacity (mm).
    pub x3: f64,
    /// Unit hydrograph time base (days).
    pub x4: f64,
    /// Threshold temperature (°C).
    pub tt: f64,
    /// Degree-day factor (mm/°C/day).
    pub cfmax: f64,
    /// Refreezing factor.
    pub cfr: f64,
    /// Water holding capacity of the snowpack.
    pub cwh: f64,
}

/// Recommended ranges in field order: x1, x2, x3, x4, tt, cfmax, cfr, cwh.
pub const PARAM_RANGES: [(&str, f64, f64); 8] = [
    ("x1", 0.0, 1000.0),
    ("x2", -5.0, 5.0),
    ("x3", 0.0, 300.0),
    ("x4", 0.5, 5.0),
    ("tt", -3.0, 3.0),
    ("cfmax", 0.0, 20.0),
    ("cfr", 0.0, 1.0),
    ("cwh", 0.0, 0.8),
];

impl Gr4jParams {
    /// Best grid point reported for the first MOPEX site (ID 2365500).
    pub fn site1() -> Self {
        Gr4jParams {
            x1: 571.0,
            x2: -0.03,
            x3: 48.0,
            x4: 2.0,
            tt: -0.20,
            cfmax: 4.41,
            cfr: 0.36,
            cwh: 0.23,
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.x1, self.x2, self.x3, self.x4, self.tt, self.cfmax, self.cfr, self.cwh]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        Gr4jParams {
            x1: v[0],
            x2: v[1],
            x3: v[2],
            x4: v[3],
            tt: v[4],
            cfmax: v[5],
            cfr: v[6],
            cwh: v[7],
        }
    }

    /// Maps a point of the unit cube linearly onto the parameter box.
    pub fn from_unit(u: [f64; 8]) -> Self {
        let mut v = [0.0; 8];
        for (i, (_, lo, hi)) in PARAM_RANGES.iter().enumerate() {
            v[i] = lo + u[i] * (hi - lo);
        }
        Self::from_array(v)
    }

    /// Rejects values outside the recommended ranges, and empty stores.
    pub fn validate(&self) -> Result<()> {
        for (v, (name, lo, hi)) in self.to_array().iter().zip(PARAM_RANGES) {
            if !(v >= &lo && v <= &hi) {
                return Err(Error::ParameterRange {
                    name,
                    value: *v,
                    low: lo,
                    high: hi,
                });
            }
        }
        if self.x1 <= 0.0 || self.x3 <= 0.0 {
            return Err(Error::Config("x1 and x3 must be strictly positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site1_in_range() {
        assert!(Gr4jParams::site1().validate().is_ok());
    }

    #[test]
    fn out_of_range_rejected() {
        let p = Gr4jParams {
            x4: 6.0,
            ..Gr4jParams::site1()
        };
        assert!(matches!(p.validate(), Err(Error::ParameterRange { name: "x4", .. })));
        let p = Gr4jParams {
            x1: 0.0,
            ..Gr4jParams::site1()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn unit_cube_corners() {
        let lo = Gr4jParams::from_unit([0.0; 8]);
        let hi = Gr4jParams::from_unit([1.0; 8]);
        assert_eq!(lo.x2, -5.0);
        assert_eq!(hi.cwh, 0.8);
        assert_eq!(Gr4jParams::from_array(hi.to_array()), hi);
    }
}
