#pragma once

#include <stdexcept>
#include <string>

namespace shapemean {

// Data-level problems (bad input curves, files, groupings). CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures (singular systems, broken invariants). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegeneratePolygon : DataError {
  using DataError::DataError;
};
struct TooFewPoints : DataError {
  using DataError::DataError;
};
struct DuplicateId : DataError {
  using DataError::DataError;
};
struct ParseError : DataError {
  using DataError::DataError;
};
struct EmptyGroup : DataError {
  using DataError::DataError;
};
struct OutOfDomain : DataError {
  using DataError::DataError;
};
struct InvalidOrder : DataError {
  using DataError::DataError;
};

struct NotNormalized : NumericError {
  using NumericError::NumericError;
};
struct SingularDesign : NumericError {
  using NumericError::NumericError;
};
struct NotHermitian : NumericError {
  using NumericError::NumericError;
};
struct NotSPD : NumericError {
  using NumericError::NumericError;
};
struct RankDeficiency : NumericError {
  using NumericError::NumericError;
};
struct ZeroPosterior : NumericError {
  using NumericError::NumericError;
};

}  // namespace shapemean
