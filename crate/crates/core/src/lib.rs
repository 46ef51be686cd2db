//! # cubature5
//!
//! Fifth-degree cubature formulas with few points.
//!
//! Two families of rules are built from Mysovskikh's degree-5 formula on the
//! unit sphere surface:
//!
//! * symmetric product measures on the cube `[-1, 1]^n`, with at most
//!   `n² + 5n + 3` points ([`constructor::build_product_rule`]);
//! * spherically symmetric measures (Gaussian weight, unit ball, spherical
//!   shell, `exp(-|x|)` weight, or user-supplied radial moments), with
//!   `n² + 3n + 3` points, dropping to the Möller lower bound `n² + n + 1`
//!   at `n = 7` ([`constructor::build_spherical_rule`]).
//!
//! Every rule can be checked against closed-form moments
//! ([`moments::MomentOracle`]) and an independent tensor-product Gauss oracle
//! ([`verify::brute_force_integral`]).
//!
//! ```
//! use cubature5::{constructor, moments::{MeasureSpec, MomentOracle}, verify};
//!
//! let measure = MeasureSpec::gaussian(7).unwrap();
//! let rule = constructor::build_spherical_rule(&measure).unwrap();
//! assert_eq!(rule.len(), 57);
//! assert!(rule.attains_moller_bound);
//!
//! let oracle = MomentOracle::new(&measure);
//! let report = verify::exactness_sweep(&rule, &oracle, 5, 1e-10).unwrap();
//! assert!(report.pass);
//! ```

pub mod bounds;
pub mod cli;
pub mod constructor;
pub mod error;
pub mod moments;
pub mod multi_index;
pub mod polyparse;
pub mod special;
pub mod sphere_rule;
pub mod verify;

pub use constructor::CubatureRule;
pub use error::Error;
pub use moments::{MeasureSpec, MomentOracle};
pub use polyparse::Polynomial;
pub use sphere_rule::SphereRule;
