#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bethekit/classify.hpp"
#include "bethekit/model.hpp"
#include "bethekit/polysolve.hpp"

namespace bethekit {

/// Number of (k_1..k_N) with 0 <= k_i <= 2 l_i and sum k_i = k: the
/// coefficient of x^k in prod_i (1 + x + ... + x^{2 l_i}).
inline std::uint64_t weight_subspace_dim(const SpinList& spins, int k) {
  if (k < 0 || k > spins.total_two_ell()) return 0;
  std::vector<std::uint64_t> poly{1};
  for (int cap : spins.values()) {
    std::vector<std::uint64_t> next(poly.size() + static_cast<std::size_t>(cap), 0);
    // Convolution with a run of ones, as a sliding window sum.
    std::uint64_t window = 0;
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (j < poly.size()) window += poly[j];
      if (j >= static_cast<std::size_t>(cap) + 1 && j - cap - 1 < poly.size()) window -= poly[j - cap - 1];
      next[j] = window;
    }
    poly = std::move(next);
  }
  return poly[static_cast<std::size_t>(k)];
}

/// Highest-weight vectors with S_z = sum l_i - k; zero once S_z < 0.
inline std::uint64_t singular_vector_count(const SpinList& spins, int k) {
  if (k < 0 || 2 * k > spins.total_two_ell()) return 0;
  return weight_subspace_dim(spins, k) - weight_subspace_dim(spins, k - 1);
}

/// q^n = 1 for some 1 <= n <= max_order, within tol.
inline bool is_near_root_of_unity(Complex q, int max_order = 24, double tol = 1e-6) {
  Complex p{1.0};
  for (int n = 1; n <= max_order; ++n) {
    p *= q;
    if (near(p, 1.0, tol)) return true;
  }
  return false;
}

struct CountReport {
  std::uint64_t expected = 0;
  std::uint64_t found_admissible_offdiagonal = 0;
  std::uint64_t found_total = 0;
  bool match = false;
  /// "weight_subspace_dim" or "singular_vector_count".
  std::string basis;
  /// The expectation is a conjecture here (homogeneous chain or periodic XXZ),
  /// so a mismatch is a finding rather than a failure.
  bool conjectural = false;
  bool root_of_unity = false;
  /// False for XXZ twists q^{2 mu} = q^{2j}, j a nonzero integer with
  /// |j| <= sum l_i + k, where roots can escape to 0 or infinity.
  bool generic_twist = true;
};

inline bool is_generic_twist(const ModelSpec& spec, const Sector& sector, double tol = kDefaultTol) {
  if (!spec.is_xxz()) return true;
  const int reach = (spec.spins().total_two_ell() + 1) / 2 + sector.k();
  for (int j = -reach; j <= reach; ++j)
    if (j != 0 && near(spec.twist(), spec.q_power(2.0 * j), tol)) return false;
  return true;
}

inline CountReport completeness_report(const ModelSpec& spec, const Sector& sector, const SolveOutcome& outcome,
                                       const std::vector<Classification>& classifications,
                                       double twist_tol = kDefaultTol) {
  CountReport r;
  const bool periodic = spec.is_periodic(twist_tol);
  if (spec.is_xxx() && periodic) {
    r.expected = singular_vector_count(spec.spins(), sector.k());
    r.basis = "singular_vector_count";
  } else {
    r.expected = weight_subspace_dim(spec.spins(), sector.k());
    r.basis = "weight_subspace_dim";
  }
  r.conjectural = (spec.is_xxz() && periodic) || (spec.sites() > 1 && spec.is_homogeneous());
  r.root_of_unity = spec.is_xxz() && is_near_root_of_unity(spec.q());
  r.generic_twist = is_generic_twist(spec, sector, twist_tol);
  r.found_total = outcome.solutions.size();
  for (const auto& c : classifications)
    if (c.admissible && c.offdiagonal) ++r.found_admissible_offdiagonal;
  r.match = r.expected == r.found_admissible_offdiagonal;
  return r;
}

}  // namespace bethekit
