use thiserror::Error;

use crate::bounds::BoundsError;
use crate::constructor::{ConstructionError, RuleFileError};
use crate::moments::MomentError;
use crate::polyparse::ParseError;
use crate::sphere_rule::SphereRuleError;
use crate::verify::VerifyError;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error(transparent)]
    Sphere(#[from] SphereRuleError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    RuleFile(#[from] RuleFileError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
