#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gradflow {

/// (α_k φ^{n+1} - Σ_j history[j] φ^{n-j}) / Δt for the time derivative and
/// φ̂^{n+1} = Σ_j extrap[j] φ^{n-j} for the explicit extrapolant.
struct BdfTableau {
  int k = 1;
  double alpha = 1.0;
  std::vector<double> history;
  std::vector<double> extrap;
};

inline BdfTableau bdf_tableau(int k) {
  switch (k) {
    case 1: return {1, 1.0, {1.0}, {1.0}};
    case 2: return {2, 1.5, {2.0, -0.5}, {2.0, -1.0}};
    case 3: return {3, 11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0}, {3.0, -3.0, 1.0}};
    case 4: return {4, 25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -0.25}, {4.0, -6.0, 4.0, -1.0}};
    default: throw std::invalid_argument("bdf_tableau: order " + std::to_string(k) + " not in 1..4");
  }
}

}  // namespace gradflow
