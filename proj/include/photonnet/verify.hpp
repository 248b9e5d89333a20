#pragma once
#include <string>
#include <vector>

#include "photonnet/oracle.hpp"

namespace photonnet {

struct CrossValidationReport {
  int cases = 0;
  int failures = 0;
  double max_error = 0.0;
  std::vector<std::string> messages; // one line per failed case
};

/// Random end-to-end comparison of the contraction engine against the
/// dense occupation-basis oracle: random few-photon states, a random
/// scatter channel, random diodes; checks norms, channel images and the
/// full outcome table to 1e-8.
CrossValidationReport runOracleCrossValidation(std::uint64_t seed, int cases);

} // namespace photonnet
