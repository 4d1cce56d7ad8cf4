#pragma once

// The two-dimensional example system shared by several test files.

#include <cmath>
#include <memory>

#include "impulsive/config.hpp"
#include "impulsive/system.hpp"

namespace impulsive::test {

inline const QuasilinearImpulsiveSystem& example_system() {
  static const QuasilinearImpulsiveSystem sys = build_system(example_config());
  return sys;
}

inline SystemConstants published_constants() {
  SystemConstants c;
  c.M_f = 0.4473;
  c.M_h = 0.4803;
  c.L_f = 0.2;
  c.L_h = 0.05;
  c.M_sigma = std::sqrt(84.25);
  c.N = 4.9625;
  c.lambda = 2.5;
  return c;
}

inline QuasilinearImpulsiveSystem example_with_constant_forcing(const Vector& value) {
  return example_system().with_perturbation(
      std::make_shared<VectorSequence>(VectorSequence::constant(value, 1000)));
}

}  // namespace impulsive::test
