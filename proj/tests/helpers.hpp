#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "model.hpp"

namespace testing {

inline pfront::ProblemInstance cubic_instance(double theta, double a = 1.0, double L = 1.0,
                                              double gamma = 0.05, double delta = 0.05) {
  auto r = pfront::make_cubic([theta](double) { return theta; }, gamma, delta, 0.0, 1.0, true);
  return pfront::make_instance(pfront::constant_coefficient(a), r, L);
}

inline pfront::ProblemInstance cosine_cubic(double theta, double L) {
  auto r = pfront::make_cubic([theta](double) { return theta; }, 0.05, 0.05, 0.0, 1.0, true);
  return pfront::make_instance(pfront::cosine_coefficient(2.0, 1.0), r, L);
}

// Closed-form front of u(1-u)(u-theta) with a = 1.
inline double exact_front(double xi) { return 1.0 / (1.0 + std::exp(xi / std::sqrt(2.0))); }

inline std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pfront_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace testing
