#pragma once

#include <string>

#include "ldgd/model.hpp"

namespace ldgd {

struct GradcheckInstance {
  std::uint64_t seed = 0;
  LatentKind kind = LatentKind::free_form;
  Index n = 0, d = 0, k = 0, q = 0, m_reg = 0, m_cls = 0;
  int samples = 1;
  GradientCheckReport report;
};

/// Random tiny model (N <= 8, M <= 3, Q <= 3, D <= 3, K <= 2) with perturbed
/// parameters; compares the ELBO gradient against central differences.
/// A non-empty fault_block scales and shifts that block's analytic gradient
/// before the comparison.
GradcheckInstance run_gradcheck(std::uint64_t seed, const std::string& fault_block = "",
                                const GradientCheckOptions& options = {});

}  // namespace ldgd
