#pragma once

// Regression lock for the L = 40 landscape sensitivities: values produced by
// the per-pair oracle (q_single) at first build and frozen. Indices are
// 0-based; rows are grouped by alpha.

#include <vector>

#include "mcsense/matrix_core.hpp"

namespace mcsense::testing {

struct FrozenQ {
  double alpha;
  Index i, j;
  double expected;
};

inline const std::vector<FrozenQ>& frozen_hilly_q40() {
  static const std::vector<FrozenQ> table = {
      // clang-format off
      {0.95, 29, 9, 3.825448705038277e-06},
      {0.95, 19, 9, 0.01842984492303679},
      {0.95, 9, 10, 0.21903703428207977},
      {1.0, 29, 9, 0.0001828619179318753},
      {1.0, 19, 9, 0.14186215381697542},
      {1.0, 9, 29, 0.00018286191793187473},
      {1.0, 19, 20, 0.29894741071141273},
      {1.0, 20, 19, 0.25582042327154014},
      {1.0, 0, 1, 0.33016614360996677},
      {1.0, 39, 19, 0.10639661536272693},
      {1.0, 4, 34, 0.004412773875507609},
      {1.0, 14, 24, 0.004412773875507848},
      // clang-format on
  };
  return table;
}

}  // namespace mcsense::testing
