#pragma once

#include <array>
#include <string>

#include "heston/config.hpp"

namespace heston::testing {

// The five admissible benchmark sets (all satisfy Feller).
struct PinnedSet {
  const char* name;
  double sigma, kappa, theta, rho, r, q, T;
};

inline constexpr std::array<PinnedSet, 5> kPinned{{
    {"set1", 0.3, 2.0, 0.04, -0.7, 0.03, 0.00, 1.00},
    {"set2", 0.2, 1.5, 0.06, -0.5, 0.02, 0.01, 0.50},
    {"set3", 0.4, 3.0, 0.09, -0.3, 0.05, 0.02, 1.00},
    {"set4", 0.25, 2.5, 0.05, 0.2, 0.01, 0.03, 2.00},
    {"set5", 0.5, 4.0, 0.10, -0.6, 0.04, 0.00, 0.75},
}};

inline ModelParams model_of(const PinnedSet& s) {
  ModelParams p;
  p.sigma = s.sigma;
  p.kappa = s.kappa;
  p.theta = s.theta;
  p.rho = s.rho;
  p.r = s.r;
  p.q = s.q;
  return p;
}

inline std::string config_path(const std::string& name) { return std::string(HESTON_CONFIG_DIR) + "/" + name; }

inline RunConfig pinned_config(const std::string& name) { return load_config(config_path(name + ".cfg")); }

}  // namespace heston::testing
