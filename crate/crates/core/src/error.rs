// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model parameter is invalid (for example `alpha <= 2`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An improper integral does not converge.
    #[error("divergent integral: {0}")]
    Divergent(String),
    /// The distribution cannot be sampled (formal or invalid tail).
    #[error("sampling unsupported: {0}")]
    UnsupportedSampling(String),
    /// The requested instance exceeds the memory or enumeration budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
