//! Parametric demand and supply-propensity curves.
//!
//! Demand is quoted as a quantity of listings at a given nightly price,
//! with an inverse price schedule and a closed-form gross-benefit integral
//! (area under inverse demand). Supply propensity gives the fraction of
//! tenants willing to host at a given price.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("price must be nonnegative, got {0}")]
    NegativePrice(f64),
    #[error("quantity must be nonnegative, got {0}")]
    NegativeQuantity(f64),
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "gross benefit diverges for elasticity {0}; constant-elasticity demand \
         requires elasticity < -1 for the benefit integral to converge"
    )]
    DivergentIntegral(f64),
}

/// Demand for listings, `D(p)`.
///
/// The linear form is truncated at zero in both price and quantity. The
/// constant-elasticity form has an unbounded choke price; `price(0)` returns
/// positive infinity as a sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandCurve {
    /// `D(p) = max(0, (intercept - p) / slope)`
    Linear { intercept: f64, slope: f64 },
    /// `D(p) = scale * p^elasticity`
    ConstantElasticity { scale: f64, elasticity: f64 },
}

impl DemandCurve {
    pub fn linear(intercept: f64, slope: f64) -> Result<Self, CurveError> {
        let curve = DemandCurve::Linear { intercept, slope };
        curve.validate()?;
        Ok(curve)
    }

    pub fn constant_elasticity(scale: f64, elasticity: f64) -> Result<Self, CurveError> {
        let curve = DemandCurve::ConstantElasticity { scale, elasticity };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        match *self {
            DemandCurve::Linear { intercept, slope } => {
                if !(intercept > 0.0) || !intercept.is_finite() {
                    return Err(CurveError::InvalidParameter(format!(
                        "demand intercept must be positive and finite, got {intercept}"
                    )));
                }
                if !(slope > 0.0) || !slope.is_finite() {
                    return Err(CurveError::InvalidParameter(format!(
                        "demand slope must be positive and finite, got {slope}"
                    )));
                }
            }
            DemandCurve::ConstantElasticity { scale, elasticity } => {
                if !(scale > 0.0) || !scale.is_finite() {
                    return Err(CurveError::InvalidParameter(format!(
                        "demand scale must be positive and finite, got {scale}"
                    )));
                }
                if !(elasticity < 0.0) || !elasticity.is_finite() {
                    return Err(CurveError::InvalidParameter(format!(
                        "demand elasticity must be negative and finite, got {elasticity}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Quantity demanded at price `p`.
    pub fn quantity(&self, p: f64) -> Result<f64, CurveError> {
        if p < 0.0 || p.is_nan() {
            return Err(CurveError::NegativePrice(p));
        }
        Ok(match *self {
            DemandCurve::Linear { intercept, slope } => ((intercept - p) / slope).max(0.0),
            DemandCurve::ConstantElasticity { scale, elasticity } => scale * p.powf(elasticity),
        })
    }

    /// Inverse demand `P(q)`, the price clearing quantity `q`.
    ///
    /// For constant-elasticity demand, `price(0)` is positive infinity.
    pub fn price(&self, q: f64) -> Result<f64, CurveError> {
        if q < 0.0 || q.is_nan() {
            return Err(CurveError::NegativeQuantity(q));
        }
        Ok(match *self {
            DemandCurve::Linear { intercept, slope } => (intercept - slope * q).max(0.0),
            DemandCurve::ConstantElasticity { scale, elasticity } => {
                if q == 0.0 {
                    f64::INFINITY
                } else {
                    (q / scale).powf(1.0 / elasticity)
                }
            }
        })
    }

    /// `P(0)`: the price above which no listing is demanded.
    pub fn choke_price(&self) -> f64 {
        match *self {
            DemandCurve::Linear { intercept, .. } => intercept,
            DemandCurve::ConstantElasticity { .. } => f64::INFINITY,
        }
    }

    /// Gross social benefit of `quantity` listings: the integral of inverse
    /// demand from 0 to `quantity`, in closed form per family.
    pub fn gross_benefit(&self, quantity: f64) -> Result<f64, CurveError> {
        if quantity < 0.0 || quantity.is_nan() {
            return Err(CurveError::NegativeQuantity(quantity));
        }
        match *self {
            DemandCurve::Linear { intercept, slope } => {
                // P(q) = 0 past the choke quantity, so the integral is flat there.
                let q = quantity.min(intercept / slope);
                Ok(intercept * q - 0.5 * slope * q * q)
            }
            DemandCurve::ConstantElasticity { scale, elasticity } => {
                if elasticity >= -1.0 {
                    return Err(CurveError::DivergentIntegral(elasticity));
                }
                let r = 1.0 + 1.0 / elasticity;
                Ok(scale.powf(-1.0 / elasticity) * quantity.powf(r) / r)
            }
        }
    }

    /// Whether [`DemandCurve::gross_benefit`] is defined for this curve.
    pub fn supports_gross_benefit(&self) -> bool {
        match *self {
            DemandCurve::Linear { .. } => true,
            DemandCurve::ConstantElasticity { elasticity, .. } => elasticity < -1.0,
        }
    }
}

/// Fraction of tenants willing to host at price `p`, `f(p) ∈ [0, 1]`.
///
/// The clamped linear ramp is flat outside `[p_min, p_max]`; equilibria of
/// interest lie on the ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplyPropensity {
    /// Linear ramp from 0 at `p_min` to 1 at `p_max`.
    Linear { p_min: f64, p_max: f64 },
    /// `f(p) = 1 / (1 + exp(-steepness * (p - midpoint)))`
    Logistic { midpoint: f64, steepness: f64 },
}

impl SupplyPropensity {
    pub fn linear(p_min: f64, p_max: f64) -> Result<Self, CurveError> {
        let f = SupplyPropensity::Linear { p_min, p_max };
        f.validate()?;
        Ok(f)
    }

    pub fn logistic(midpoint: f64, steepness: f64) -> Result<Self, CurveError> {
        let f = SupplyPropensity::Logistic { midpoint, steepness };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        match *self {
            SupplyPropensity::Linear { p_min, p_max } => {
                if !p_min.is_finite() || p_min < 0.0 {
                    return Err(CurveError::InvalidParameter(format!(
                        "supply p_min must be finite and nonnegative, got {p_min}"
                    )));
                }
                if !p_max.is_finite() || !(p_min < p_max) {
                    return Err(CurveError::InvalidParameter(format!(
                        "supply ramp requires p_min < p_max, got [{p_min}, {p_max}]"
                    )));
                }
            }
            SupplyPropensity::Logistic { midpoint, steepness } => {
                if !midpoint.is_finite() || midpoint < 0.0 {
                    return Err(CurveError::InvalidParameter(format!(
                        "supply midpoint must be finite and nonnegative, got {midpoint}"
                    )));
                }
                if !(steepness > 0.0) || !steepness.is_finite() {
                    return Err(CurveError::InvalidParameter(format!(
                        "supply steepness must be positive and finite, got {steepness}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Willing-to-host fraction at price `p`.
    pub fn fraction(&self, p: f64) -> Result<f64, CurveError> {
        if p < 0.0 || p.is_nan() {
            return Err(CurveError::NegativePrice(p));
        }
        Ok(match *self {
            SupplyPropensity::Linear { p_min, p_max } => {
                ((p - p_min) / (p_max - p_min)).clamp(0.0, 1.0)
            }
            SupplyPropensity::Logistic { midpoint, steepness } => {
                1.0 / (1.0 + (-steepness * (p - midpoint)).exp())
            }
        })
    }

    /// Reservation price at population quantile `u ∈ (0, 1)`: the price at
    /// which a fraction `u` of tenants is willing to host. Clamped at zero,
    /// since prices below zero never occur.
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match *self {
            SupplyPropensity::Linear { p_min, p_max } => p_min + u * (p_max - p_min),
            SupplyPropensity::Logistic { midpoint, steepness } => {
                (midpoint + (u / (1.0 - u)).ln() / steepness).max(0.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_demand_quantity() {
        let d = DemandCurve::linear(2.0, 0.04).unwrap();
        assert_eq!(d.quantity(2.0).unwrap(), 0.0);
        assert_relative_eq!(d.quantity(1.0).unwrap(), 25.0);
        // truncation past the intercept
        assert_eq!(d.quantity(3.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_elasticity_quantity() {
        let d = DemandCurve::constant_elasticity(50.0, -1.0).unwrap();
        assert_relative_eq!(d.quantity(2.0).unwrap(), 25.0);
    }

    #[test]
    fn negative_price_rejected() {
        let d = DemandCurve::linear(2.0, 0.04).unwrap();
        assert!(matches!(d.quantity(-0.5), Err(CurveError::NegativePrice(_))));
        let f = SupplyPropensity::linear(0.0, 1.25).unwrap();
        assert!(matches!(f.fraction(-1.0), Err(CurveError::NegativePrice(_))));
    }

    #[test]
    fn linear_inverse_demand() {
        let d = DemandCurve::linear(2.0, 0.04).unwrap();
        assert_relative_eq!(d.price(25.0).unwrap(), 1.0);
        assert_eq!(d.price(0.0).unwrap(), 2.0);
        assert_eq!(d.price(100.0).unwrap(), 0.0);
        assert!(matches!(d.price(-1.0), Err(CurveError::NegativeQuantity(_))));
    }

    #[test]
    fn constant_elasticity_inverse_at_zero_is_infinite() {
        let d = DemandCurve::constant_elasticity(50.0, -2.0).unwrap();
        assert_eq!(d.price(0.0).unwrap(), f64::INFINITY);
        assert_relative_eq!(d.price(d.quantity(3.0).unwrap()).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn supply_fraction_clamps() {
        let f = SupplyPropensity::linear(0.0, 1.25).unwrap();
        assert_eq!(f.fraction(0.0).unwrap(), 0.0);
        assert_eq!(f.fraction(2.0).unwrap(), 1.0);
        assert_relative_eq!(f.fraction(0.625).unwrap(), 0.5);
    }

    #[test]
    fn logistic_supply_in_unit_interval() {
        let f = SupplyPropensity::logistic(1.0, 4.0).unwrap();
        for p in [0.0, 0.5, 1.0, 2.0, 10.0] {
            let v = f.fraction(p).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
        assert_relative_eq!(f.fraction(1.0).unwrap(), 0.5);
    }

    #[test]
    fn gross_benefit_linear_closed_form() {
        let d = DemandCurve::linear(2.0, 0.04).unwrap();
        assert_eq!(d.gross_benefit(0.0).unwrap(), 0.0);
        assert_relative_eq!(d.gross_benefit(25.0).unwrap(), 37.5);
        assert_relative_eq!(d.gross_benefit(50.0).unwrap(), 50.0);
        // flat past the choke quantity
        assert_relative_eq!(d.gross_benefit(80.0).unwrap(), 50.0);
    }

    #[test]
    fn gross_benefit_divergent_configuration() {
        let d = DemandCurve::constant_elasticity(50.0, -0.5).unwrap();
        assert!(matches!(d.gross_benefit(10.0), Err(CurveError::DivergentIntegral(_))));
        assert!(!d.supports_gross_benefit());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DemandCurve::linear(2.0, -0.04).is_err());
        assert!(DemandCurve::linear(-1.0, 0.04).is_err());
        assert!(DemandCurve::constant_elasticity(50.0, 0.5).is_err());
        assert!(SupplyPropensity::linear(1.0, 0.5).is_err());
        assert!(SupplyPropensity::logistic(1.0, 0.0).is_err());
    }

    #[test]
    fn quantile_inverts_fraction() {
        let f = SupplyPropensity::linear(0.25, 1.25).unwrap();
        for u in [0.1, 0.5, 0.9] {
            let p = f.quantile(u);
            assert_relative_eq!(f.fraction(p).unwrap(), u, epsilon = 1e-12);
        }
        let g = SupplyPropensity::logistic(1.0, 3.0).unwrap();
        for u in [0.2, 0.5, 0.8] {
            let p = g.quantile(u);
            assert_relative_eq!(g.fraction(p).unwrap(), u, epsilon = 1e-12);
        }
    }
}
