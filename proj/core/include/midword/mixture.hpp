#pragma once

#include <vector>

namespace midword {

/// Settings shared by the EM fits (universal GMM and Riemannian GMM).
struct EmOptions {
  int max_iter = 200;
  /// Stop when (ll_new - ll_old) < rel_tol * |ll_old|.
  double rel_tol = 1e-5;
  /// Variances are floored at this fraction of the data variance.
  double variance_floor_ratio = 1e-6;
  /// 0 selects the hardware concurrency; results do not depend on it.
  unsigned workers = 0;
};

/// Total data log-likelihood recorded after every E-step.
struct EmTrace {
  std::vector<double> log_likelihood;
  bool converged = false;
};

}  // namespace midword
