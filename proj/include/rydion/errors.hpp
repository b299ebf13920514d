#pragma once

#include <stdexcept>

namespace rydion {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A secular-frequency radicand went non-positive: the polarizability pulled
// the trap past its confinement boundary.
struct UnconfinedTrap : Error {
  using Error::Error;
};

// Target frequencies cannot be produced by any physical gradient set.
struct InconsistentFrequencies : Error {
  using Error::Error;
};

// Joint phonon enumeration exceeded its term cap; coarsen tail_mass.
struct TruncationOverflow : Error {
  using Error::Error;
};

// Sideband order s requested with n + s < 0.
struct InvalidSideband : Error {
  using Error::Error;
};

// No optimizer start satisfied the convergence criterion.
struct NonConvergence : Error {
  using Error::Error;
};

// Two parameter basins fit equally well; the result would be arbitrary.
struct AmbiguousFit : Error {
  using Error::Error;
};

// Bad or missing user-facing configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Figure emission asked for inputs that do not exist.
struct MissingInput : Error {
  using Error::Error;
};

}  // namespace rydion
