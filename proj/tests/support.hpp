#pragma once

// Random instance generators shared by the unit tests and the acceptance
// runner.

#include <cstdint>
#include <random>
#include <vector>

#include "bethekit/classify.hpp"
#include "bethekit/model.hpp"
#include "bethekit/polysolve.hpp"

namespace bethekit::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Complex random_complex(Rng& rng, double scale = 1.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline std::vector<int> random_two_ell(Rng& rng, int n, int max_two_ell) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int& x : v) x = uniform_int(rng, 1, max_two_ell);
  return v;
}

/// Twist exponent whose e^mu stays away from 1 (and from the unit-modulus
/// values where the leading coefficients cancel).
inline Complex generic_xxx_mu(Rng& rng) {
  return {uniform(rng, 0.3, 1.2) * (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0), uniform(rng, -kPi, kPi)};
}

inline ModelSpec random_xxx(Rng& rng, const std::vector<int>& two_ell, bool periodic = false) {
  std::vector<Complex> z(two_ell.size());
  for (auto& x : z) x = random_complex(rng, 1.0);
  return ModelSpec::xxx(SpinList(two_ell), z, periodic ? Complex{0.0} : generic_xxx_mu(rng));
}

/// Real anisotropy in [0.3, 1.3]; inhomogeneities with modulus in [0.5, 2];
/// complex twist exponent, kept away from integer values of Re mu.
inline ModelSpec random_xxz(Rng& rng, const std::vector<int>& two_ell) {
  const double gamma = uniform(rng, 0.3, 1.3);
  std::vector<Complex> z(two_ell.size());
  for (auto& x : z) x = std::polar(uniform(rng, 0.5, 2.0), uniform(rng, -kPi, kPi));
  const Complex mu{uniform(rng, 0.15, 0.85) + uniform_int(rng, -1, 0), uniform(rng, -0.6, 0.6)};
  return ModelSpec::xxz(SpinList(two_ell), z, mu, gamma);
}

/// XXZ instance whose twist makes the integer-exponent relation with this m
/// applicable: q^{2 mu} = q^{2(m - S_z)}.
inline ModelSpec random_xxz_applicable(Rng& rng, const std::vector<int>& two_ell, int k, int m) {
  const ModelSpec base = random_xxz(rng, two_ell);
  const Sector sector(SpinList(two_ell), k);
  return ModelSpec::xxz(SpinList(two_ell), std::vector<Complex>(base.z().begin(), base.z().end()),
                        static_cast<double>(m) - sector.sz(), base.gamma());
}

inline bool admissible_offdiagonal(const ModelSpec& spec, const RootSet& roots, double tol = kDefaultDedupTol) {
  return is_admissible(spec, roots.roots(), tol) && is_offdiagonal(roots.roots(), tol);
}

struct SolutionSample {
  ModelSpec spec;
  Sector sector;
  RootSet roots;
};

/// Admissible offdiagonal solutions of random instances (N <= 3,
/// 2 l_i <= 2, k in {1, 2}), until `count` have been collected.
inline std::vector<SolutionSample> random_good_solutions(Rng& rng, Family family, std::size_t count) {
  std::vector<SolutionSample> out;
  while (out.size() < count) {
    const auto two_ell = random_two_ell(rng, uniform_int(rng, 1, 3), 2);
    const auto spec = family == Family::xxx ? random_xxx(rng, two_ell) : random_xxz(rng, two_ell);
    const Sector sector(spec.spins(), uniform_int(rng, 1, 2));
    for (const auto& roots : solve(spec, sector).solutions) {
      if (out.size() < count && admissible_offdiagonal(spec, roots)) out.push_back({spec, sector, roots});
    }
  }
  return out;
}

}  // namespace bethekit::testing
