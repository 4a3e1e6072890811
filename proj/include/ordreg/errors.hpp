#pragma once

#include <stdexcept>
#include <string>

namespace ordreg {

// Error classes map onto the CLI exit-code contract:
// 2 = configuration, 3 = data, 4 = numeric.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a cumulative-probability fit needs class probabilities outside
// the feasible region (non-monotone cumulative probabilities). `observation`
// is the offending data row, or -1 when the failure is not tied to one row.
struct InfeasibleError : NumericError {
  explicit InfeasibleError(const std::string& msg, long obs = -1)
      : NumericError(msg), observation(obs) {}
  long observation;
};

}  // namespace ordreg
