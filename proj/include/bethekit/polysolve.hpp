#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bethekit/classify.hpp"
#include "bethekit/error.hpp"
#include "bethekit/model.hpp"
#include "bethekit/polynomial.hpp"

namespace bethekit {

struct SolverConfig {
  int newton_max_iter = 100;
  double newton_tol = 1e-11;
  double dedup_tol = kDefaultDedupTol;
  /// Unset means 200 * (expected_count or 10).
  std::optional<int> max_starts;
  std::uint64_t rng_seed = 42;
  std::optional<int> expected_count;

  int effective_max_starts() const { return max_starts.value_or(200 * expected_count.value_or(10)); }

  void validate() const {
    if (newton_max_iter < 1) throw InvalidInput("solver.newton_max_iter must be positive");
    if (!(newton_tol > 0.0)) throw InvalidInput("solver.newton_tol must be positive");
    if (!(dedup_tol > 0.0)) throw InvalidInput("solver.dedup_tol must be positive");
    if (!(newton_tol < dedup_tol)) throw InvalidInput("solver.newton_tol must be smaller than solver.dedup_tol");
    if (max_starts && *max_starts < 0) throw InvalidInput("solver.max_starts must be nonnegative");
    if (expected_count && *expected_count < 0) throw InvalidInput("solver.expected_count must be nonnegative");
  }
};

struct SolveOutcome {
  std::vector<RootSet> solutions;
  int starts_used = 0;
  bool under_found = false;
  double residual_max = 0.0;
  /// Set when the exact route hit a degenerate system.
  bool degenerate = false;
  std::string note;
};

struct NewtonResult {
  std::vector<Complex> roots;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

namespace detail {

inline bool all_finite(std::span<const Complex> t) {
  return std::all_of(t.begin(), t.end(), [](Complex x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

}  // namespace detail

/// Damped Newton on the cleared system: the step is halved (up to 20 times)
/// until the residual norm decreases. Two extra full steps are taken after
/// reaching tolerance when they keep improving the residual. Rapidities
/// flagged in `frozen` stay fixed and their equations are left out of the
/// step; convergence is still judged on the full system.
inline NewtonResult newton_polish(const ModelSpec& spec, std::vector<Complex> t, const SolverConfig& cfg,
                                  const std::vector<bool>& frozen = {}) {
  NewtonResult out;
  std::vector<std::size_t> free;
  for (std::size_t a = 0; a < t.size(); ++a)
    if (frozen.empty() || !frozen[a]) free.push_back(a);
  // Residuals over their monomial scales, so the merit does not grow with
  // |t| and far roots stay reachable.
  auto merit = [&](std::span<const Complex> x) {
    std::vector<Complex> r;
    std::vector<double> s;
    detail::residual_raw(spec, x, r, s);
    double n = 0.0;
    for (std::size_t a : free) n += std::norm(r[a]) / (s[a] * s[a]);
    return std::sqrt(n);
  };
  double norm = merit(t);
  int extra = 0;
  for (int it = 0; it < cfg.newton_max_iter && !free.empty() && detail::all_finite(t); ++it) {
    const double normalized = detail::normalized_residual_raw(spec, t);
    if (normalized <= cfg.newton_tol) {
      if (extra++ >= 2) break;
    }
    if (norm == 0.0) break;
    std::vector<Complex> r;
    std::vector<double> s;
    detail::residual_raw(spec, t, r, s);
    const detail::Matrix full = detail::jacobian_raw(spec, t);
    detail::Matrix jac(free.size(), free.size());
    std::vector<Complex> step(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
      step[i] = -r[free[i]];
      for (std::size_t j = 0; j < free.size(); ++j) jac(i, j) = full(free[i], free[j]);
    }
    if (!detail::solve_linear(std::move(jac), step)) break;
    double lambda = 1.0;
    bool accepted = false;
    std::vector<Complex> trial = t;
    for (int h = 0; h <= 20; ++h) {
      for (std::size_t i = 0; i < free.size(); ++i) trial[free[i]] = t[free[i]] + lambda * step[i];
      const double trial_norm = merit(trial);
      if (std::isfinite(trial_norm) && trial_norm < norm) {
        accepted = true;
        norm = trial_norm;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    t = trial;
  }
  out.residual = t.empty() ? 0.0
                 : detail::all_finite(t) ? detail::normalized_residual_raw(spec, t)
                                         : std::numeric_limits<double>::infinity();
  out.converged = out.residual <= cfg.newton_tol;
  out.roots = std::move(t);
  return out;
}

namespace detail {

/// Damped Newton on the deflated system E_a / prod_{b != a} (t_a - t_b).
/// Diagonal solutions are singular zeros of the cleared system with wide
/// basins; after deflation they are no longer zeros, while offdiagonal ones
/// are kept. Returns the last iterate, to be polished on the cleared system.
inline std::vector<Complex> deflated_descent(const ModelSpec& spec, std::vector<Complex> t, const SolverConfig& cfg) {
  const std::size_t k = t.size();
  auto evaluate = [&](std::span<const Complex> x, std::vector<Complex>& g, double& merit) {
    std::vector<double> scale;
    residual_raw(spec, x, g, scale);
    merit = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      Complex w{1.0};
      double wscale = 1.0;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        w *= x[a] - x[b];
        wscale *= std::max({1.0, std::abs(x[a]), std::abs(x[b])});
      }
      if (w == Complex{}) return false;
      g[a] /= w;
      merit += std::norm(g[a]) * (wscale * wscale) / (scale[a] * scale[a]);
    }
    merit = std::sqrt(merit);
    return std::isfinite(merit);
  };
  std::vector<Complex> g;
  double norm = 0.0;
  if (!evaluate(t, g, norm)) return t;
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    if (normalized_residual_raw(spec, t) <= cfg.newton_tol) break;
    std::vector<Complex> r;
    std::vector<double> scale;
    residual_raw(spec, t, r, scale);
    const Matrix raw = jacobian_raw(spec, t);
    Matrix jac(k, k);
    std::vector<Complex> step(k);
    for (std::size_t a = 0; a < k; ++a) {
      Complex w{1.0}, self{};
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        w *= t[a] - t[b];
        self += 1.0 / (t[a] - t[b]);
      }
      for (std::size_t c = 0; c < k; ++c) {
        const Complex dlog = c == a ? self : -1.0 / (t[a] - t[c]);
        jac(a, c) = raw(a, c) / w - g[a] * dlog;
      }
      step[a] = -g[a];
    }
    if (!solve_linear(std::move(jac), step)) break;
    double lambda = 1.0;
    bool accepted = false;
    std::vector<Complex> trial(k), trial_g;
    for (int h = 0; h <= 20; ++h) {
      for (std::size_t a = 0; a < k; ++a) trial[a] = t[a] + lambda * step[a];
      double trial_norm = 0.0;
      if (all_finite(trial) && evaluate(trial, trial_g, trial_norm) && trial_norm < norm) {
        accepted = true;
        norm = trial_norm;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    t = trial;
    g = std::move(trial_g);
  }
  return t;
}

/// Relative radius within which a converged rapidity is tried at a nearby
/// exact special value. Multiple solutions sitting on special values are
/// only resolved to about newton_tol^(1/multiplicity) by Newton.
inline constexpr double kSnapRadius = 1e-2;

/// Moves rapidities onto nearby special values (the points z +- l, their XXZ
/// counterparts, 0 for XXZ, or a unit / q^{+-2} shift of an already snapped
/// rapidity), re-polishes the others with those held fixed, and keeps the
/// result only if the full system is solved to newton_tol. Returns t
/// unchanged otherwise.
inline std::vector<Complex> snap_special(const ModelSpec& spec, const std::vector<Complex>& t, const SolverConfig& cfg) {
  std::vector<Complex> special = plus_points(spec);
  const auto minus = minus_points(spec);
  special.insert(special.end(), minus.begin(), minus.end());
  if (spec.is_xxz()) special.push_back(0.0);
  auto close = [](Complex x, Complex p) { return std::abs(x - p) <= kSnapRadius * std::max(1.0, std::abs(p)); };

  std::vector<Complex> s = t;
  std::vector<bool> fixed(t.size(), false);
  bool any = false;
  for (std::size_t a = 0; a < t.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    for (Complex p : special) {
      if (close(t[a], p) && std::abs(t[a] - p) < best) {
        best = std::abs(t[a] - p);
        s[a] = p;
        fixed[a] = any = true;
      }
    }
  }
  if (!any) return t;
  const Complex q2 = spec.q_power(2.0);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t a = 0; a < t.size(); ++a) {
      if (fixed[a]) continue;
      for (std::size_t b = 0; b < t.size() && !fixed[a]; ++b) {
        if (!fixed[b]) continue;
        const std::vector<Complex> shifted = spec.is_xxx() ? std::vector<Complex>{s[b], s[b] + 1.0, s[b] - 1.0}
                                                           : std::vector<Complex>{s[b], q2 * s[b], s[b] / q2};
        for (Complex p : shifted) {
          if (close(t[a], p)) {
            s[a] = p;
            fixed[a] = grew = true;
            break;
          }
        }
      }
    }
  }
  const auto polished = newton_polish(spec, s, cfg, fixed);
  if (polished.converged && polished.residual <= normalized_residual_raw(spec, t)) return polished.roots;
  return t;
}

inline bool lexicographic_less(const RootSet& a, const RootSet& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
}

/// Accumulates converged candidates, dropping duplicates up to permutation.
class SolutionPool {
 public:
  explicit SolutionPool(double dedup_tol) : tol_(dedup_tol) {}

  /// Returns true if the candidate was new.
  bool add(const std::vector<Complex>& roots) {
    RootSet rs(roots, tol_);
    for (const auto& s : solutions_)
      if (approx_equal(s, rs, tol_)) return false;
    solutions_.push_back(std::move(rs));
    return true;
  }

  const std::vector<RootSet>& solutions() const noexcept { return solutions_; }

  std::vector<RootSet> take_sorted() {
    std::sort(solutions_.begin(), solutions_.end(), lexicographic_less);
    return std::move(solutions_);
  }

 private:
  double tol_;
  std::vector<RootSet> solutions_;
};

/// Typical modulus of rapidities, used to scale interpolation circles.
inline double root_scale(const ModelSpec& spec) {
  double max_z = 0.0;
  for (Complex z : spec.z()) max_z = std::max(max_z, std::abs(z));
  if (spec.is_xxx()) return max_z + 0.5 * spec.spins().max_two_ell() + 1.0;
  double min_z = std::numeric_limits<double>::infinity();
  for (Complex z : spec.z()) min_z = std::min(min_z, std::abs(z));
  return std::sqrt(min_z * max_z);
}

/// Coefficients (in y) of one cleared k = 2 equation E(x, y), where x is the
/// rapidity the equation belongs to and y the other one: E = U(x) + V(x) y.
struct PairEquation {
  Polynomial u;
  Polynomial v;
};

inline PairEquation pair_equation(const ModelSpec& spec) {
  std::vector<std::pair<Complex, Complex>> lhs, rhs;
  for (std::size_t i = 0; i < spec.sites(); ++i) {
    if (spec.is_xxx()) {
      const double ell = spec.spins().ell(i);
      lhs.emplace_back(1.0, spec.z(i) - ell);
      rhs.emplace_back(1.0, spec.z(i) + ell);
    } else {
      const Complex qe = spec.q_power(spec.spins().two_ell(i));
      lhs.emplace_back(qe, spec.z(i));
      rhs.emplace_back(1.0, qe * spec.z(i));
    }
  }
  const Polynomial a = Polynomial::from_linear_factors(lhs);
  const Polynomial b = Polynomial::from_linear_factors(rhs);
  const Complex w = spec.twist();
  const Polynomial x{0.0, 1.0};
  if (spec.is_xxx()) {
    // A(x)(x - y - 1) - w B(x)(x - y + 1)
    return {a * (x - Polynomial::constant(1.0)) - w * b * (x + Polynomial::constant(1.0)),
            w * b - a};
  }
  // A(x)(x - q^2 y) - w B(x)(q^2 x - y)
  const Complex q2 = spec.q_power(2.0);
  return {a * x - (w * q2) * b * x, w * b - q2 * a};
}

inline Complex sylvester_determinant(std::span<const Complex> f, std::span<const Complex> g) {
  const std::size_t m = f.size() - 1;
  const std::size_t n = g.size() - 1;
  const std::size_t size = m + n;
  if (size == 0) return 1.0;
  Matrix s(size, size);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j <= m; ++j) s(r, r + j) = f[m - j];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j <= n; ++j) s(n + r, r + j) = g[n - j];
  return determinant(std::move(s));
}

inline double hadamard_bound(std::span<const Complex> f, std::span<const Complex> g) {
  double nf = 0.0, ng = 0.0;
  for (Complex c : f) nf += std::norm(c);
  for (Complex c : g) ng += std::norm(c);
  const double m = static_cast<double>(f.size() - 1);
  const double n = static_cast<double>(g.size() - 1);
  return std::pow(std::sqrt(nf), n) * std::pow(std::sqrt(ng), m);
}

}  // namespace detail

/// All solutions for k = 1: roots of the univariate equation, Newton-polished.
inline std::vector<RootSet> solve_k1(const ModelSpec& spec, const Sector& sector, const SolverConfig& cfg = {}) {
  check_sector(spec, sector);
  if (sector.k() != 1) throw InvalidInput("solve_k1 requires k = 1");
  const Polynomial raw = single_particle_polynomial(spec);
  const Polynomial poly = raw.trimmed(1e-13);
  double ref = 1.0;
  for (std::size_t i = 0; i < spec.sites(); ++i) ref *= detail::root_scale(spec) + std::abs(spec.z(i)) + 1.0;
  if (poly.is_zero() || raw.max_abs_coefficient() <= 1e-13 * ref)
    throw DegenerateSystem("the single-particle equation vanishes identically; perturb the twist or inhomogeneities");
  detail::SolutionPool pool(cfg.dedup_tol);
  for (Complex r : polynomial_roots(poly)) {
    const auto polished = newton_polish(spec, {r}, cfg);
    if (polished.converged) pool.add(detail::snap_special(spec, polished.roots, cfg));
  }
  return pool.take_sorted();
}

/// All solutions for k = 2, by eliminating t2 with the Sylvester resultant.
/// The resultant in t1 is recovered by evaluation on a circle and discrete
/// Fourier interpolation. Diagonal and inadmissible solutions are kept.
inline std::vector<RootSet> solve_k2(const ModelSpec& spec, const Sector& sector, const SolverConfig& cfg = {}) {
  check_sector(spec, sector);
  if (sector.k() != 2) throw InvalidInput("solve_k2 requires k = 2");
  cfg.validate();

  const auto eq = detail::pair_equation(spec);
  const double coeff_cut = 1e-13 * std::max(eq.u.max_abs_coefficient(), eq.v.max_abs_coefficient());
  // eq1 = U(t1) + V(t1) t2 ; eq2 = U(t2) + V(t2) t1 = sum_j (U_j + V_j t1) t2^j.
  const int m = eq.v.max_abs_coefficient() > coeff_cut ? 1 : 0;
  int n = -1;
  for (int j = std::max(eq.u.degree(), eq.v.degree()); j >= 0; --j) {
    if (std::abs(eq.u.coefficient(j)) > coeff_cut || std::abs(eq.v.coefficient(j)) > coeff_cut) {
      n = j;
      break;
    }
  }
  if (n < 0 || m + n == 0) throw DegenerateSystem("pair equations vanish identically; perturb the parameters");
  const int e1 = std::max(eq.u.degree(), eq.v.degree());
  bool g_has_t1 = false;
  for (int j = 0; j <= n; ++j) g_has_t1 = g_has_t1 || std::abs(eq.v.coefficient(j)) > coeff_cut;
  const int degree_bound = n * e1 + m * (g_has_t1 ? 1 : 0);

  auto f_coeffs = [&](Complex t1) {
    std::vector<Complex> f{eq.u(t1)};
    if (m == 1) f.push_back(eq.v(t1));
    return f;
  };
  auto g_coeffs = [&](Complex t1) {
    std::vector<Complex> g(static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j) g[j] = eq.u.coefficient(j) + eq.v.coefficient(j) * t1;
    return g;
  };

  const double rho = detail::root_scale(spec);
  const int samples = degree_bound + 1;
  std::vector<Complex> values(static_cast<std::size_t>(samples));
  double max_value = 0.0, max_bound = 0.0;
  for (int j = 0; j < samples; ++j) {
    const Complex t1 = std::polar(rho, kTwoPi * j / samples);
    const auto f = f_coeffs(t1);
    const auto g = g_coeffs(t1);
    values[j] = detail::sylvester_determinant(f, g);
    max_value = std::max(max_value, std::abs(values[j]));
    max_bound = std::max(max_bound, detail::hadamard_bound(f, g));
  }
  if (max_value <= 1e-12 * max_bound)
    throw DegenerateSystem("resultant vanishes identically (non-generic data); perturb the parameters");

  std::vector<Complex> scaled(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Complex acc{};
    for (int j = 0; j < samples; ++j) acc += values[j] * std::polar(1.0, -kTwoPi * static_cast<double>(i * j % samples) / samples);
    scaled[i] = acc / static_cast<double>(samples);
  }
  const Polynomial scaled_resultant = Polynomial(scaled).trimmed(1e-11);
  std::vector<Complex> coeffs = scaled_resultant.coefficients();
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] /= std::pow(rho, static_cast<double>(i));
  const Polynomial resultant(coeffs);

  detail::SolutionPool pool(cfg.dedup_tol);
  for (Complex t1 : polynomial_roots(resultant)) {
    std::vector<Complex> candidates;
    for (const auto& c : {f_coeffs(t1), g_coeffs(t1)}) {
      const auto roots = polynomial_roots(Polynomial(c).trimmed(1e-12));
      candidates.insert(candidates.end(), roots.begin(), roots.end());
    }
    for (Complex t2 : candidates) {
      const auto polished = newton_polish(spec, {t1, t2}, cfg);
      if (polished.converged) pool.add(detail::snap_special(spec, polished.roots, cfg));
    }
  }
  return pool.take_sorted();
}

/// Damped Newton from cfg.max_starts pseudo-random starts (deterministic in
/// rng_seed). Stops once expected_count admissible offdiagonal solutions are
/// known.
inline SolveOutcome solve_multistart(const ModelSpec& spec, const Sector& sector, const SolverConfig& cfg = {}) {
  check_sector(spec, sector);
  cfg.validate();
  SolveOutcome out;
  const std::size_t k = static_cast<std::size_t>(sector.k());
  if (k == 0) {
    out.solutions.emplace_back();
    out.under_found = cfg.expected_count && *cfg.expected_count > 1;
    return out;
  }

  double max_z = 0.0, min_z = std::numeric_limits<double>::infinity();
  for (Complex z : spec.z()) {
    max_z = std::max(max_z, std::abs(z));
    min_z = std::min(min_z, std::abs(z));
  }
  // Twists close to a degenerate value push roots far out (or towards 0 for
  // XXZ). Single-particle roots measure how far; the sign flip covers pairs
  // of coinciding rapidities. An XXZ rapidity escaping to infinity sees the
  // twist times q^2 for each finite other rapidity and q^-2 for each one
  // near 0.
  double k1_max = 0.0, k1_min = std::numeric_limits<double>::infinity();
  std::vector<Complex> k1_roots;
  const int shifts = spec.is_xxz() ? static_cast<int>(k) - 1 : 0;
  for (int j = -shifts; j <= shifts; ++j) {
    for (double sign : {1.0, -1.0}) {
      const Complex factor = sign * spec.q_power(2.0 * j);
      for (Complex r : polynomial_roots(single_particle_polynomial(spec, factor).trimmed(1e-13))) {
        if (std::abs(r) == 0.0) continue;
        k1_roots.push_back(r);
        k1_max = std::max(k1_max, std::abs(r));
        k1_min = std::min(k1_min, std::abs(r));
      }
    }
  }
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() -> Complex {
    const double angle = kTwoPi * unit(rng);
    if (spec.is_xxx()) {
      const double radius = std::max(2.0 * (max_z + 0.5 * spec.spins().max_two_ell() + 1.0), 2.0 * k1_max);
      return std::polar(radius * std::sqrt(unit(rng)), angle);
    }
    const double qa = std::abs(spec.q());
    const double stretch = std::pow(std::max(qa, 1.0 / qa), spec.spins().max_two_ell());
    const double lo = std::log(std::min(min_z / (2.0 * stretch), 0.25 * k1_min));
    const double hi = std::log(std::max(2.0 * max_z * stretch, 4.0 * k1_max));
    return std::polar(std::exp(lo + (hi - lo) * unit(rng)), angle);
  };

  detail::SolutionPool pool(cfg.dedup_tol);
  int good = 0;
  const int starts = cfg.effective_max_starts();
  for (int s = 0; s < starts; ++s) {
    if (cfg.expected_count && good >= *cfg.expected_count) break;
    std::vector<Complex> start(k);
    if (k >= 2 && s % 4 == 3) {
      // Clustered start, so that solutions with coinciding rapidities have
      // a fair chance.
      const Complex centre = draw();
      const double jitter = 0.05 * std::max(1.0, std::abs(centre));
      for (auto& x : start) x = centre + std::polar(jitter * unit(rng), kTwoPi * unit(rng));
    } else if (s % 4 == 1 && !k1_roots.empty()) {
      // Seeded start: some rapidities near single-particle roots, where
      // escaping rapidities of the full system tend to sit.
      for (auto& x : start) {
        if (unit(rng) < 0.5) {
          const Complex r = k1_roots[static_cast<std::size_t>(unit(rng) * k1_roots.size()) % k1_roots.size()];
          x = r * (1.0 + std::polar(0.1 * unit(rng), kTwoPi * unit(rng)));
        } else {
          x = draw();
        }
      }
    } else {
      for (auto& x : start) x = draw();
    }
    ++out.starts_used;
    // Plain starts go through the deflated system first; clustered starts
    // are meant to reach diagonal solutions and skip it.
    if (s % 4 != 3) start = detail::deflated_descent(spec, std::move(start), cfg);
    const auto polished = newton_polish(spec, std::move(start), cfg);
    if (!polished.converged) continue;
    if (pool.add(detail::snap_special(spec, polished.roots, cfg))) {
      const auto& added = pool.solutions().back();
      if (is_admissible(spec, added.roots(), cfg.dedup_tol) && is_offdiagonal(added.roots(), cfg.dedup_tol)) ++good;
    }
  }
  out.solutions = pool.take_sorted();
  for (const auto& s : out.solutions) out.residual_max = std::max(out.residual_max, detail::normalized_residual_raw(spec, s.roots()));
  out.under_found = cfg.expected_count && good < *cfg.expected_count;
  return out;
}

/// Finds all solutions: exact routines for k <= 2, multistart Newton beyond.
/// Never throws on non-convergence; see SolveOutcome::under_found.
inline SolveOutcome solve(const ModelSpec& spec, const Sector& sector, const SolverConfig& cfg = {}) {
  check_sector(spec, sector);
  cfg.validate();
  if (sector.k() >= 3) return solve_multistart(spec, sector, cfg);

  SolveOutcome out;
  if (sector.k() == 0) {
    out.solutions.emplace_back();
  } else {
    try {
      out.solutions = sector.k() == 1 ? solve_k1(spec, sector, cfg) : solve_k2(spec, sector, cfg);
    } catch (const DegenerateSystem& e) {
      if (sector.k() == 1) {
        out.degenerate = true;
        out.note = e.what();
        out.under_found = cfg.expected_count.has_value() && *cfg.expected_count > 0;
        return out;
      }
      out = solve_multistart(spec, sector, cfg);
      out.degenerate = true;
      out.note = std::string(e.what()) + "; fell back to multistart Newton";
      return out;
    }
  }
  int good = 0;
  for (const auto& s : out.solutions) {
    out.residual_max = std::max(out.residual_max, detail::normalized_residual_raw(spec, s.roots()));
    if (is_admissible(spec, s.roots(), cfg.dedup_tol) && is_offdiagonal(s.roots(), cfg.dedup_tol)) ++good;
  }
  out.under_found = cfg.expected_count && good < *cfg.expected_count;
  return out;
}

}  // namespace bethekit
