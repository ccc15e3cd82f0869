use thiserror::Error;

use crate::discrim::Outcome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("{name} = {value} is out of range: {expected}")]
    Domain { name: &'static str, value: f64, expected: &'static str },
    #[error("POVM element for outcome {0} has rank 2; the dilation needs rank-one elements")]
    DilationRank(Outcome),
    #[error("conditional error is undefined: the measurement never gives a conclusive outcome")]
    AllInconclusive,
}

impl Error {
    /// True for violations of a numerical contract (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain { .. })
    }
}

pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { name, value, expected })
    }
}
