#include <numeric>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "bethekit/completeness.hpp"
#include "bethekit/polysolve.hpp"
#include "support.hpp"

using namespace bethekit;
using namespace bethekit::testing;

namespace {

/// Coefficients of prod_i (a_i t - b_i), expanded directly.
std::vector<Complex> expand(const std::vector<std::pair<Complex, Complex>>& factors) {
  std::vector<Complex> c{1.0};
  for (const auto& [a, b] : factors) {
    std::vector<Complex> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += a * c[j];
      next[j] -= b * c[j];
    }
    c = next;
  }
  return c;
}

/// Roots of the spin-1/2 XXX single-particle equation
/// prod (t - z_i + 1/2) = e^mu prod (t - z_i - 1/2), as companion-matrix
/// eigenvalues.
std::vector<Complex> companion_roots(const std::vector<Complex>& z, Complex w) {
  std::vector<std::pair<Complex, Complex>> lhs, rhs;
  for (Complex zi : z) {
    lhs.emplace_back(1.0, zi - 0.5);
    rhs.emplace_back(1.0, zi + 0.5);
  }
  const auto a = expand(lhs);
  const auto b = expand(rhs);
  std::vector<Complex> c(a.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = a[j] - w * b[j];
  const Eigen::Index n = static_cast<Eigen::Index>(c.size()) - 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) m(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) m(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

ModelSpec six_vertex_n2(double gamma = 0.6180339887498949) {
  return ModelSpec::xxz(SpinList({1, 1}), {1.0, 1.0}, 0.0, gamma);
}

std::vector<RootSet> good_solutions(const ModelSpec& spec, const std::vector<RootSet>& all) {
  std::vector<RootSet> out;
  for (const auto& s : all)
    if (admissible_offdiagonal(spec, s)) out.push_back(s);
  return out;
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.effective_max_starts(), 2000);
  cfg.expected_count = 3;
  EXPECT_EQ(cfg.effective_max_starts(), 600);
  cfg.newton_tol = 1e-6;
  cfg.dedup_tol = 1e-8;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(SolveK1, SpinHalfAntiperiodic) {
  const auto spec = ModelSpec::xxx(SpinList({1}), {0.0}, Complex(0, kPi));
  const auto sols = solve_k1(spec, Sector(spec.spins(), 1));
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_LT(std::abs(sols[0][0]), 1e-12);
}

TEST(SolveK1, SingleSiteClosedForm) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex z = random_complex(rng);
    const auto spec = ModelSpec::xxx(SpinList({1}), {z}, generic_xxx_mu(rng));
    const Complex w = spec.twist();
    const auto sols = solve_k1(spec, Sector(spec.spins(), 1));
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_LT(std::abs(sols[0][0] - (z + (1.0 + w) / (2.0 * (w - 1.0)))), 1e-11);
  }
}

TEST(SolveK1, PeriodicTwoSiteMidpoint) {
  const Complex z1{0.3, -0.2}, z2{-1.1, 0.7};
  const auto spec = ModelSpec::xxx(SpinList({1, 1}), {z1, z2}, 0.0);
  const auto sols = solve_k1(spec, Sector(spec.spins(), 1));
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_LT(std::abs(sols[0][0] - 0.5 * (z1 + z2)), 1e-11);
}

TEST(SolveK1, SixVertexTwoSites) {
  const auto spec = six_vertex_n2();
  const auto sols = solve_k1(spec, Sector(spec.spins(), 1));
  ASSERT_EQ(sols.size(), 2u);
  EXPECT_LT(std::abs(sols[0][0] + 1.0), 1e-12);
  EXPECT_LT(std::abs(sols[1][0] - 1.0), 1e-12);
}

TEST(SolveK1, MatchesCompanionMatrix) {
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = uniform_int(rng, 1, 4);
    const auto spec = random_xxx(rng, std::vector<int>(static_cast<std::size_t>(n), 1));
    const auto sols = solve_k1(spec, Sector(spec.spins(), 1));
    std::vector<Complex> found;
    for (const auto& s : sols) found.push_back(s[0]);
    const auto expected = companion_roots(std::vector<Complex>(spec.z().begin(), spec.z().end()), spec.twist());
    EXPECT_TRUE(approx_equal(RootSet(found), RootSet(expected), 1e-10)) << "trial " << trial;
  }
}

TEST(SolveK1, DegenerateEquationThrows) {
  // q^2 = -1 and spin 1: (q^2 t - z) and (t - q^2 z) are proportional with
  // ratio q^2, which equals the twist at mu = 1.
  const auto spec = ModelSpec::xxz(SpinList({2}), {1.0}, 1.0, kPi / 2);
  EXPECT_THROW(solve_k1(spec, Sector(spec.spins(), 1)), DegenerateSystem);
  const auto out = solve(spec, Sector(spec.spins(), 1));
  EXPECT_TRUE(out.degenerate);
  EXPECT_TRUE(out.solutions.empty());
  EXPECT_FALSE(out.note.empty());
}

TEST(SolveK1, WrongSectorIsInvalid) {
  const auto spec = six_vertex_n2();
  EXPECT_THROW(solve_k1(spec, Sector(spec.spins(), 2)), InvalidInput);
  EXPECT_THROW(solve_k2(spec, Sector(spec.spins(), 1)), InvalidInput);
}

TEST(SolveK2, TwoSiteGenericHasOneGoodSolution) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = random_xxx(rng, {1, 1});
    const auto sols = solve_k2(spec, Sector(spec.spins(), 2));
    EXPECT_EQ(good_solutions(spec, sols).size(), weight_subspace_dim(spec.spins(), 2));
    EXPECT_EQ(weight_subspace_dim(spec.spins(), 2), 1u);
  }
}

TEST(SolveK2, AgreesWithMultistart) {
  Rng rng(12);
  for (int trial = 0; trial < 8; ++trial) {
    const bool xxz = trial % 2 == 1;
    const auto two_ell = random_two_ell(rng, uniform_int(rng, 1, 3), 2);
    const auto spec = xxz ? random_xxz(rng, two_ell) : random_xxx(rng, two_ell);
    const Sector sector(spec.spins(), 2);
    const auto exact = solve_k2(spec, sector);
    SolverConfig cfg;
    cfg.max_starts = 3000;
    const auto multi = solve_multistart(spec, sector, cfg).solutions;
    ASSERT_EQ(exact.size(), multi.size()) << "trial " << trial;
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_TRUE(approx_equal(exact[i], multi[i], 1e-7));
  }
}

TEST(Solve, EmptySector) {
  const auto spec = six_vertex_n2();
  const auto out = solve(spec, Sector(spec.spins(), 0));
  ASSERT_EQ(out.solutions.size(), 1u);
  EXPECT_TRUE(out.solutions[0].empty());
}

TEST(Solve, ExpectedCountFlagsUnderFound) {
  const auto spec = six_vertex_n2();
  SolverConfig cfg;
  cfg.expected_count = 2;
  const auto ok = solve(spec, Sector(spec.spins(), 1), cfg);
  EXPECT_EQ(ok.solutions.size(), 2u);
  EXPECT_FALSE(ok.under_found);
  cfg.expected_count = 3;
  EXPECT_TRUE(solve(spec, Sector(spec.spins(), 1), cfg).under_found);
}

TEST(Solve, OutputsAreConvergedDistinctAndDeterministic) {
  Rng rng(30);
  for (int trial = 0; trial < 6; ++trial) {
    const auto two_ell = random_two_ell(rng, 3, 2);
    const auto spec = trial % 2 ? random_xxz(rng, two_ell) : random_xxx(rng, two_ell);
    const Sector sector(spec.spins(), 1 + trial % 3);
    SolverConfig cfg;
    cfg.expected_count = static_cast<int>(weight_subspace_dim(spec.spins(), sector.k()));
    const auto a = solve(spec, sector, cfg);
    const auto b = solve(spec, sector, cfg);
    ASSERT_EQ(a.solutions.size(), b.solutions.size());
    for (std::size_t i = 0; i < a.solutions.size(); ++i) {
      EXPECT_EQ(a.solutions[i].values(), b.solutions[i].values());
      EXPECT_LE(normalized_residual(spec, sector, a.solutions[i]), cfg.newton_tol);
      for (std::size_t j = i + 1; j < a.solutions.size(); ++j)
        EXPECT_FALSE(approx_equal(a.solutions[i], a.solutions[j], cfg.dedup_tol));
    }
    EXPECT_EQ(a.starts_used, b.starts_used);
  }
}

TEST(Solve, GenericCountsMatchWeightDimension) {
  Rng rng(42);
  int instances = 0;
  while (instances < 20) {
    const int n = uniform_int(rng, 1, 3);
    const auto two_ell = random_two_ell(rng, n, 2);
    if (std::accumulate(two_ell.begin(), two_ell.end(), 0) > 4) continue;
    const auto spec = instances % 2 ? random_xxz(rng, two_ell) : random_xxx(rng, two_ell);
    const Sector sector(spec.spins(), uniform_int(rng, 0, 2));
    const auto out = solve(spec, sector);
    EXPECT_EQ(good_solutions(spec, out.solutions).size(), weight_subspace_dim(spec.spins(), sector.k()));
    ++instances;
  }
}

TEST(Solve, MultistartFindsAllForThreeParticles) {
  Rng rng(77);
  for (int trial = 0; trial < 2; ++trial) {
    const auto spec = trial ? random_xxz(rng, {1, 1, 2}) : random_xxx(rng, {1, 1, 2});
    const Sector sector(spec.spins(), 3);
    SolverConfig cfg;
    cfg.expected_count = static_cast<int>(weight_subspace_dim(spec.spins(), 3));
    const auto out = solve(spec, sector, cfg);
    EXPECT_FALSE(out.under_found);
    EXPECT_EQ(good_solutions(spec, out.solutions).size(), 3u);
  }
}

TEST(Solve, MultistartAcrossRandomThreeSiteChains) {
  // Diagonal solutions are singular attractors of the cleared system; the
  // deflated descent has to get past them within a modest start budget.
  Rng rng(5);
  int complete = 0, total = 0;
  for (int trial = 0; trial < 16; ++trial) {
    const auto spec = trial % 2 ? random_xxz(rng, {1, 1, 1}) : random_xxx(rng, {1, 1, 1});
    const Sector sector(spec.spins(), 3);
    SolverConfig cfg;
    cfg.expected_count = 1;
    cfg.max_starts = 1000;
    const auto out = solve(spec, sector, cfg);
    ++total;
    complete += out.under_found ? 0 : 1;
  }
  EXPECT_EQ(complete, total);
}

TEST(Solve, HighMultiplicitySolutionIsSnappedToExactPoint) {
  // Homogeneous chain: the inadmissible solution (q z, z / q) has high
  // multiplicity and Newton alone leaves a cloud of nearby candidates.
  const auto spec = ModelSpec::xxz(SpinList({1, 1, 1, 1}), {1.0, 1.0, 1.0, 1.0}, 0.0, 0.6180339887498949);
  const auto out = solve(spec, Sector(spec.spins(), 2));
  const Complex q = spec.q();
  int hits = 0;
  for (const auto& s : out.solutions) {
    for (const auto& other : out.solutions)
      if (&s != &other) {
        EXPECT_FALSE(approx_equal(s, other, 1e-3));
      }
    if (approx_equal(s, RootSet(std::vector<Complex>{q, 1.0 / q}), 1e-12)) ++hits;
  }
  EXPECT_EQ(hits, 1);
}
