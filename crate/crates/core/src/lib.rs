//! Exact and numerical computation of the genus-g Mumford form for
//! quadratic differentials on Schottky-uniformized curves.

pub mod differentials;
pub mod error;
pub mod io;
pub mod poly;
pub mod presentation;
pub mod products;
pub mod mumford;
pub mod numeric;
pub mod rational;
pub mod series;
pub mod word;

pub use differentials::{DifferentialForm, EichlerMatrix, PoleDatum, ZetaCocycle};
pub use error::{Error, Result};
pub use poly::{Int, IntegerPolynomial, Monomial};
pub use presentation::{HomPoint, SeriesMatrix, SymbolicPresentation};
pub use products::{ProductKind, ProductSpec};
pub use mumford::{LeadingTermReport, MumfordExpansion, Provenance};
pub use numeric::{ComparisonReport, NumericSchottkyGroup, QuadratureSpec};
pub use rational::RationalCoefficient;
pub use series::{PrimitivityReport, RingRef, SeriesRing, YExp, YSeries};
pub use word::{GroupWord, PrimitiveClass};
