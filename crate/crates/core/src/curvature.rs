//! Extended-real arithmetic and validated curvature splittings.
//!
//! A splitting `F = f1 - f2` is described by four curvature bounds: `f1` has
//! lower curvature `mu1` and upper curvature `L1`, `f2` has `mu2` and `L2`.
//! Upper curvatures may be `+inf` (nonsmooth function). Only `+inf` is
//! representable; quantities that would be `-inf` are reported through tagged
//! variants instead.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number or `+inf`. Never NaN, never `-inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Wraps `x`, rejecting NaN and `-inf`.
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() || x == f64::NEG_INFINITY {
            Err(Error::NonFinite("extended real must be a number or +inf"))
        } else {
            Ok(ExtReal(x))
        }
    }

    /// Wraps a finite value. Panics on NaN or infinities.
    pub fn finite(x: f64) -> Self {
        assert!(x.is_finite(), "ExtReal::finite called with {x}");
        ExtReal(x)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    /// Raw value; `f64::INFINITY` for `+inf`.
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn finite_value(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// Total reciprocal: `inv(0) = +inf`, `inv(+inf) = 0`.
    pub fn inv(self) -> ExtReal {
        if self.0 == 0.0 {
            ExtReal::INFINITY
        } else if self.is_infinite() {
            ExtReal::ZERO
        } else {
            ExtReal(1.0 / self.0)
        }
    }

    /// `self - x` for finite `x`; `inf - x = inf`.
    pub fn sub(self, x: f64) -> ExtReal {
        debug_assert!(x.is_finite());
        if self.is_infinite() {
            self
        } else {
            ExtReal(self.0 - x)
        }
    }

    /// Extended-real sum; `+inf` absorbs.
    pub fn add(self, other: ExtReal) -> ExtReal {
        if self.is_infinite() || other.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal(self.0 + other.0)
        }
    }

    pub fn gt(self, x: f64) -> bool {
        self.0 > x
    }

    pub fn ge(self, x: f64) -> bool {
        self.0 >= x
    }
}

/// Reciprocal of a plain real with `inv(0) = +inf`.
pub fn inv(x: f64) -> ExtReal {
    ExtReal(x).inv()
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN or `-inf`.
    fn from(x: f64) -> Self {
        ExtReal::new(x).expect("ExtReal from NaN or -inf")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Ok(ExtReal::INFINITY),
            t => {
                let x: f64 = t
                    .parse()
                    .map_err(|_| Error::NonFinite("could not parse extended real"))?;
                ExtReal::new(x)
            }
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(x) => ExtReal::new(x).map_err(serde::de::Error::custom),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Validated curvature parameters of a splitting `F = f1 - f2` with
/// `f1 in F(mu1, L1)` and `f2 in F(mu2, L2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSplitting")]
pub struct Splitting {
    mu1: f64,
    #[serde(rename = "l1")]
    big_l1: ExtReal,
    mu2: f64,
    #[serde(rename = "l2")]
    big_l2: ExtReal,
}

#[derive(Deserialize)]
struct RawSplitting {
    mu1: f64,
    l1: ExtReal,
    mu2: f64,
    l2: ExtReal,
}

impl TryFrom<RawSplitting> for Splitting {
    type Error = Error;

    fn try_from(r: RawSplitting) -> Result<Self> {
        Splitting::lenient(r.mu1, r.l1, r.mu2, r.l2)
    }
}

/// Validates a splitting, including the decrease condition
/// `mu1 + mu2 > 0` or `mu1 = mu2 = 0`.
///
/// A [`Error::NoDecreaseGuarantee`] is warning-grade: callers exploring
/// bad splittings can use [`Splitting::lenient`] instead.
pub fn validate_splitting(mu1: f64, l1: ExtReal, mu2: f64, l2: ExtReal) -> Result<Splitting> {
    let s = Splitting::lenient(mu1, l1, mu2, l2)?;
    if !s.decrease_condition() {
        return Err(Error::NoDecreaseGuarantee(mu1 + mu2));
    }
    Ok(s)
}

impl Splitting {
    /// Checks only the structural constraints `mu1 >= 0`, `mu1 < L1`,
    /// `mu2 < L2`; the decrease condition is left to the caller.
    pub fn lenient(mu1: f64, l1: ExtReal, mu2: f64, l2: ExtReal) -> Result<Self> {
        if !mu1.is_finite() {
            return Err(Error::NonFinite("mu1"));
        }
        if !mu2.is_finite() {
            return Err(Error::NonFinite("mu2"));
        }
        if mu1 < 0.0 {
            return Err(Error::NegativeMu1(mu1));
        }
        if !l1.gt(mu1) {
            return Err(Error::CurvatureOrder(format!("mu1 = {mu1} >= L1 = {l1}")));
        }
        if !l2.gt(mu2) {
            return Err(Error::CurvatureOrder(format!("mu2 = {mu2} >= L2 = {l2}")));
        }
        Ok(Splitting {
            mu1,
            big_l1: l1,
            mu2,
            big_l2: l2,
        })
    }

    /// Shorthand for finite upper curvatures; validates strictly.
    pub fn finite(mu1: f64, l1: f64, mu2: f64, l2: f64) -> Result<Self> {
        validate_splitting(mu1, ExtReal::new(l1)?, mu2, ExtReal::new(l2)?)
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn l1(&self) -> ExtReal {
        self.big_l1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn l2(&self) -> ExtReal {
        self.big_l2
    }

    /// `mu1 + mu2 > 0`, or the degenerate convex case `mu1 = mu2 = 0`.
    pub fn decrease_condition(&self) -> bool {
        self.mu1 + self.mu2 > 0.0 || (self.mu1 == 0.0 && self.mu2 == 0.0)
    }

    /// Both upper curvatures infinite: no smooth term.
    pub fn both_nonsmooth(&self) -> bool {
        self.big_l1.is_infinite() && self.big_l2.is_infinite()
    }

    /// Swaps the roles of `f1` and `f2`.
    pub fn swapped(&self) -> Result<Splitting> {
        Splitting::lenient(self.mu2, self.big_l2, self.mu1, self.big_l1)
    }

    /// Subtracts `lambda/2 |x|^2` from both terms; `inf - lambda = inf`.
    /// The result is validated strictly.
    pub fn shifted(&self, lambda: f64) -> Result<Splitting> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite("lambda"));
        }
        validate_splitting(
            self.mu1 - lambda,
            self.big_l1.sub(lambda),
            self.mu2 - lambda,
            self.big_l2.sub(lambda),
        )
    }

    pub fn objective_curvatures(&self) -> ObjectiveCurvatures {
        objective_curvatures(self)
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(mu1={}, L1={}, mu2={}, L2={})",
            self.mu1, self.big_l1, self.mu2, self.big_l2
        )
    }
}

/// Lower curvature of the objective, `mu1 - L2`, which is unbounded below
/// when `L2 = inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerCurvature {
    Finite(f64),
    UnboundedBelow,
}

impl fmt::Display for LowerCurvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerCurvature::Finite(x) => write!(f, "{x}"),
            LowerCurvature::UnboundedBelow => f.write_str("-inf"),
        }
    }
}

/// Curvature class of `F = f1 - f2`: `F in F(mu1 - L2, L1 - mu2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveCurvatures {
    pub mu_f: LowerCurvature,
    pub l_f: ExtReal,
    pub nonconvex: bool,
    pub nonconcave: bool,
}

pub fn objective_curvatures(s: &Splitting) -> ObjectiveCurvatures {
    let mu_f = match s.l2().finite_value() {
        Some(l2) => LowerCurvature::Finite(s.mu1() - l2),
        None => LowerCurvature::UnboundedBelow,
    };
    ObjectiveCurvatures {
        mu_f,
        l_f: s.l1().sub(s.mu2()),
        nonconvex: s.l2().gt(s.mu1()),
        nonconcave: s.l1().gt(s.mu2()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inf() -> ExtReal {
        ExtReal::INFINITY
    }

    #[test]
    fn inv_is_total() {
        assert_eq!(ExtReal::INFINITY.inv(), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO.inv(), ExtReal::INFINITY);
        assert_eq!(ExtReal::finite(4.0).inv(), ExtReal::finite(0.25));
        assert_eq!(ExtReal::finite(-2.0).inv(), ExtReal::finite(-0.5));
    }

    #[test]
    fn ordering_puts_infinity_last() {
        let mut v = vec![inf(), ExtReal::finite(3.0), ExtReal::finite(-1.0)];
        v.sort();
        assert_eq!(v, vec![ExtReal::finite(-1.0), ExtReal::finite(3.0), inf()]);
        assert!(ExtReal::finite(1e300) < inf());
    }

    #[test]
    fn rejects_nan_and_negative_infinity() {
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!(ExtReal::new(f64::NEG_INFINITY).is_err());
        assert!("nope".parse::<ExtReal>().is_err());
        assert_eq!("inf".parse::<ExtReal>().unwrap(), inf());
        assert_eq!("2.5".parse::<ExtReal>().unwrap(), ExtReal::finite(2.5));
    }

    #[test]
    fn table_row_is_valid() {
        let s = Splitting::finite(1.0, 2.0, 0.5, 1.5).unwrap();
        assert!(s.decrease_condition());
    }

    #[test]
    fn degenerate_convex_case_is_valid() {
        let s = Splitting::finite(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(s.decrease_condition());
    }

    #[test]
    fn bad_decomposition_warns() {
        let err = Splitting::finite(1.0, 2.0, -1.5, 1.5).unwrap_err();
        assert_eq!(err, Error::NoDecreaseGuarantee(-0.5));
        // exploratory use
        let s = Splitting::lenient(1.0, ExtReal::finite(2.0), -1.5, ExtReal::finite(1.5)).unwrap();
        assert!(!s.decrease_condition());
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            Splitting::finite(2.0, 2.0, 0.0, 1.0),
            Err(Error::CurvatureOrder(_))
        ));
        assert!(matches!(
            Splitting::finite(1.0, 2.0, 1.0, 1.0),
            Err(Error::CurvatureOrder(_))
        ));
        assert_eq!(
            Splitting::finite(-0.1, 2.0, 1.0, 2.0),
            Err(Error::NegativeMu1(-0.1))
        );
        // mu1 = 0 with mu2 > 0 is accepted
        assert!(Splitting::finite(0.0, 2.0, 0.5, 2.0).is_ok());
    }

    #[test]
    fn objective_curvatures_examples() {
        let c = Splitting::finite(1.5, 2.0, 1.0, 2.5).unwrap().objective_curvatures();
        assert_eq!(c.mu_f, LowerCurvature::Finite(-1.0));
        assert_eq!(c.l_f, ExtReal::finite(1.0));
        assert!(c.nonconvex && c.nonconcave);

        let c = Splitting::finite(0.0, 1.0, 0.0, 1.0).unwrap().objective_curvatures();
        assert_eq!(c.mu_f, LowerCurvature::Finite(-1.0));
        assert_eq!(c.l_f, ExtReal::finite(1.0));

        let s = validate_splitting(1.0, inf(), 0.0, ExtReal::finite(1.0)).unwrap();
        let c = s.objective_curvatures();
        assert_eq!(c.mu_f, LowerCurvature::Finite(0.0));
        assert_eq!(c.l_f, inf());
        assert!(!c.nonconvex);

        let s = validate_splitting(1.0, ExtReal::finite(3.0), 0.5, inf()).unwrap();
        assert_eq!(s.objective_curvatures().mu_f, LowerCurvature::UnboundedBelow);
    }

    #[test]
    fn shift_keeps_infinity() {
        let s = validate_splitting(1.0, inf(), 0.5, ExtReal::finite(2.0)).unwrap();
        let t = s.shifted(0.25).unwrap();
        assert_eq!(t.l1(), inf());
        assert_eq!(t.mu1(), 0.75);
        assert_eq!(t.l2(), ExtReal::finite(1.75));
    }

    #[test]
    fn json_round_trip_uses_inf_literal() {
        let s = validate_splitting(1.0, inf(), 0.0, ExtReal::finite(1.0)).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"mu1":1.0,"l1":"inf","mu2":0.0,"l2":1.0}"#);
        let back: Splitting = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Splitting>(r#"{"mu1":1,"l1":0.5,"mu2":0,"l2":1}"#).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn ext() -> impl Strategy<Value = ExtReal> {
            prop_oneof![
                Just(ExtReal::INFINITY),
                Just(ExtReal::ZERO),
                (1e-6f64..1e6).prop_map(ExtReal::finite),
            ]
        }

        proptest! {
            #[test]
            fn inv_is_an_involution(x in ext()) {
                let back = x.inv().inv();
                if x.is_finite() && x.value() != 0.0 {
                    prop_assert!((back.value() - x.value()).abs() <= 1e-12 * x.value().abs());
                } else {
                    prop_assert_eq!(back, x);
                }
            }

            #[test]
            fn objective_curvatures_are_ordered(
                mu1 in 0.0f64..5.0, d1 in 1e-3f64..5.0, mu2 in -5.0f64..5.0, d2 in 1e-3f64..5.0
            ) {
                let s = Splitting::lenient(mu1, ExtReal::finite(mu1 + d1), mu2, ExtReal::finite(mu2 + d2)).unwrap();
                let c = s.objective_curvatures();
                match c.mu_f {
                    LowerCurvature::Finite(m) => prop_assert!(ExtReal::finite(m) < c.l_f),
                    LowerCurvature::UnboundedBelow => unreachable!(),
                }
            }
        }
    }
}
