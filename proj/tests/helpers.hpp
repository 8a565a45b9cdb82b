#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "ldgd/numerics.hpp"
#include "oracles.hpp"

namespace testing {

inline std::filesystem::path scratch(const std::string& name) {
  std::filesystem::path dir(LDGD_TEST_TMP);
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline double max_abs(const ldgd::Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace testing
