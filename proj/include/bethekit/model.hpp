#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bethekit/error.hpp"
#include "bethekit/numeric.hpp"
#include "bethekit/polynomial.hpp"
#include "bethekit/rootset.hpp"

namespace bethekit {

enum class Family { xxx, xxz };

inline const char* to_string(Family f) { return f == Family::xxx ? "xxx" : "xxz"; }

/// Site spins, stored as the integers 2*ell so half-integers stay exact.
class SpinList {
 public:
  SpinList() = default;
  explicit SpinList(std::vector<int> two_ell) : two_ell_(std::move(two_ell)) {
    if (two_ell_.empty()) throw InvalidInput("spin list must contain at least one site");
    for (int v : two_ell_)
      if (v < 1) throw InvalidInput("every site spin must be positive (2*ell >= 1), got " + std::to_string(v));
  }

  std::size_t size() const noexcept { return two_ell_.size(); }
  int two_ell(std::size_t i) const { return two_ell_[i]; }
  double ell(std::size_t i) const { return 0.5 * two_ell_[i]; }
  const std::vector<int>& values() const noexcept { return two_ell_; }
  int total_two_ell() const { return std::accumulate(two_ell_.begin(), two_ell_.end(), 0); }
  int max_two_ell() const { return *std::max_element(two_ell_.begin(), two_ell_.end()); }

  friend bool operator==(const SpinList&, const SpinList&) = default;

 private:
  std::vector<int> two_ell_;
};

/// The physical model. The twist is kept as the exponent mu; e^mu (XXX) or
/// q^{2 mu} = e^{2 i gamma mu} (XXZ) is derived on demand.
class ModelSpec {
 public:
  static ModelSpec xxx(SpinList spins, std::vector<Complex> z, Complex mu) {
    return ModelSpec(Family::xxx, std::move(spins), std::move(z), mu, Complex{});
  }

  static ModelSpec xxz(SpinList spins, std::vector<Complex> z, Complex mu, Complex gamma) {
    return ModelSpec(Family::xxz, std::move(spins), std::move(z), mu, gamma);
  }

  Family family() const noexcept { return family_; }
  bool is_xxx() const noexcept { return family_ == Family::xxx; }
  bool is_xxz() const noexcept { return family_ == Family::xxz; }
  const SpinList& spins() const noexcept { return spins_; }
  std::size_t sites() const noexcept { return spins_.size(); }
  std::span<const Complex> z() const noexcept { return z_; }
  Complex z(std::size_t i) const { return z_[i]; }
  Complex mu() const noexcept { return mu_; }
  Complex gamma() const noexcept { return gamma_; }

  /// q = e^{i gamma}.
  Complex q() const { return std::exp(kI * gamma_); }
  /// q^x = e^{i gamma x}.
  Complex q_power(double x) const { return std::exp(kI * gamma_ * x); }

  /// e^mu for XXX, q^{2 mu} for XXZ.
  Complex twist() const { return family_ == Family::xxx ? std::exp(mu_) : std::exp(2.0 * kI * gamma_ * mu_); }

  bool is_periodic(double tol = kDefaultTol) const { return near(twist(), 1.0, tol); }

  bool is_homogeneous(double tol = kDefaultTol) const {
    for (std::size_t i = 1; i < sites(); ++i)
      if (spins_.two_ell(i) != spins_.two_ell(0) || !near(z_[i], z_[0], tol)) return false;
    return true;
  }

 private:
  ModelSpec(Family family, SpinList spins, std::vector<Complex> z, Complex mu, Complex gamma)
      : family_(family), spins_(std::move(spins)), z_(std::move(z)), mu_(mu), gamma_(gamma) {
    if (spins_.size() == 0) throw InvalidInput("spin list must contain at least one site");
    if (z_.size() != spins_.size())
      throw InvalidInput("expected " + std::to_string(spins_.size()) + " inhomogeneities, got " +
                         std::to_string(z_.size()));
    if (family_ == Family::xxz) {
      if (near(q() * q(), 1.0, kDefaultTol)) throw InvalidInput("XXZ model requires q^2 != 1");
      for (std::size_t i = 0; i < z_.size(); ++i)
        if (near_zero(z_[i], kDefaultTol)) throw InvalidInput("XXZ model requires z_i != 0 (site " + std::to_string(i) + ")");
    }
  }

  Family family_;
  SpinList spins_;
  std::vector<Complex> z_;
  Complex mu_;
  Complex gamma_;
};

/// Particle number k and magnetization, 2 S_z = sum(2 ell_i) - 2k.
class Sector {
 public:
  Sector(const SpinList& spins, int k) : k_(k), two_sz_(spins.total_two_ell() - 2 * k) {
    if (k < 0) throw InvalidInput("particle number must be nonnegative");
  }

  int k() const noexcept { return k_; }
  int two_sz() const noexcept { return two_sz_; }
  double sz() const noexcept { return 0.5 * two_sz_; }

  friend bool operator==(const Sector&, const Sector&) = default;

 private:
  int k_;
  int two_sz_;
};

inline void check_sector(const ModelSpec& spec, const Sector& sector) {
  if (sector.two_sz() != spec.spins().total_two_ell() - 2 * sector.k())
    throw InvalidInput("sector magnetization does not match the spin list");
}

inline void check_roots(const Sector& sector, std::size_t count) {
  if (count != static_cast<std::size_t>(sector.k()))
    throw InvalidInput("expected " + std::to_string(sector.k()) + " rapidities, got " + std::to_string(count));
}

/// Points z_i + ell_i (XXX) or q^{2 ell_i} z_i (XXZ).
inline std::vector<Complex> plus_points(const ModelSpec& spec) {
  std::vector<Complex> p(spec.sites());
  for (std::size_t i = 0; i < spec.sites(); ++i)
    p[i] = spec.is_xxx() ? spec.z(i) + spec.spins().ell(i) : spec.q_power(spec.spins().two_ell(i)) * spec.z(i);
  return p;
}

/// Points z_i - ell_i (XXX) or q^{-2 ell_i} z_i (XXZ).
inline std::vector<Complex> minus_points(const ModelSpec& spec) {
  std::vector<Complex> p(spec.sites());
  for (std::size_t i = 0; i < spec.sites(); ++i)
    p[i] = spec.is_xxx() ? spec.z(i) - spec.spins().ell(i) : spec.q_power(-spec.spins().two_ell(i)) * spec.z(i);
  return p;
}

namespace detail {

/// One linear factor of a cleared Bethe equation, with its partial
/// derivatives and the size of its largest monomial.
struct LinearFactor {
  Complex value;
  Complex d_self;
  int other = -1;
  Complex d_other;
  double magnitude = 0.0;
};

struct EquationTerms {
  std::vector<LinearFactor> lhs;
  std::vector<LinearFactor> rhs;
};

/// Factors of equation a:
///   XXX: prod_i (t_a - z_i + l_i) prod_b (t_a - t_b - 1) = e^mu prod_i (t_a - z_i - l_i) prod_b (t_a - t_b + 1)
///   XXZ: prod_i (q^{2l_i} t_a - z_i) prod_b (t_a - q^2 t_b) = q^{2mu} prod_i (t_a - q^{2l_i} z_i) prod_b (q^2 t_a - t_b)
inline EquationTerms equation_terms(const ModelSpec& spec, std::span<const Complex> t, std::size_t a) {
  EquationTerms eq;
  const Complex ta = t[a];
  const double abs_ta = std::abs(ta);
  eq.lhs.reserve(spec.sites() + t.size());
  eq.rhs.reserve(spec.sites() + t.size());
  if (spec.is_xxx()) {
    for (std::size_t i = 0; i < spec.sites(); ++i) {
      const double ell = spec.spins().ell(i);
      const double mag = abs_ta + std::abs(spec.z(i)) + ell;
      eq.lhs.push_back({ta - spec.z(i) + ell, 1.0, -1, {}, mag});
      eq.rhs.push_back({ta - spec.z(i) - ell, 1.0, -1, {}, mag});
    }
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (b == a) continue;
      const double mag = abs_ta + std::abs(t[b]) + 1.0;
      eq.lhs.push_back({ta - t[b] - 1.0, 1.0, static_cast<int>(b), -1.0, mag});
      eq.rhs.push_back({ta - t[b] + 1.0, 1.0, static_cast<int>(b), -1.0, mag});
    }
  } else {
    const Complex q2 = spec.q_power(2.0);
    const double abs_q2 = std::abs(q2);
    for (std::size_t i = 0; i < spec.sites(); ++i) {
      const Complex qe = spec.q_power(spec.spins().two_ell(i));
      const double abs_qe = std::abs(qe);
      const double abs_z = std::abs(spec.z(i));
      eq.lhs.push_back({qe * ta - spec.z(i), qe, -1, {}, abs_qe * abs_ta + abs_z});
      eq.rhs.push_back({ta - qe * spec.z(i), 1.0, -1, {}, abs_ta + abs_qe * abs_z});
    }
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (b == a) continue;
      const double abs_tb = std::abs(t[b]);
      eq.lhs.push_back({ta - q2 * t[b], 1.0, static_cast<int>(b), -q2, abs_ta + abs_q2 * abs_tb});
      eq.rhs.push_back({q2 * ta - t[b], q2, static_cast<int>(b), -1.0, abs_q2 * abs_ta + abs_tb});
    }
  }
  return eq;
}

inline Complex product(const std::vector<LinearFactor>& f) {
  Complex p{1.0};
  for (const auto& x : f) p *= x.value;
  return p;
}

inline double magnitude(const std::vector<LinearFactor>& f) {
  double m = 1.0;
  for (const auto& x : f) m *= x.magnitude;
  return m;
}

/// Adds d/dt_c of prod(f) * weight into row[c] for every c, using
/// leave-one-out products (robust to vanishing factors).
inline void accumulate_gradient(const std::vector<LinearFactor>& f, std::size_t self, Complex weight,
                                std::vector<Complex>& row) {
  const std::size_t n = f.size();
  std::vector<Complex> prefix(n + 1, Complex{1.0});
  std::vector<Complex> suffix(n + 1, Complex{1.0});
  for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] * f[j].value;
  for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * f[j].value;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex others = prefix[j] * suffix[j + 1] * weight;
    row[self] += f[j].d_self * others;
    if (f[j].other >= 0) row[static_cast<std::size_t>(f[j].other)] += f[j].d_other * others;
  }
}

/// Cleared residuals and their monomial scales for an unordered list of
/// rapidities.
inline void residual_raw(const ModelSpec& spec, std::span<const Complex> t, std::vector<Complex>& residual,
                         std::vector<double>& scale) {
  const Complex w = spec.twist();
  const double abs_w = std::abs(w);
  residual.assign(t.size(), Complex{});
  scale.assign(t.size(), 0.0);
  for (std::size_t a = 0; a < t.size(); ++a) {
    const auto eq = equation_terms(spec, t, a);
    residual[a] = product(eq.lhs) - w * product(eq.rhs);
    scale[a] = std::max(magnitude(eq.lhs), abs_w * magnitude(eq.rhs));
  }
}

inline double normalized_residual_raw(const ModelSpec& spec, std::span<const Complex> t) {
  std::vector<Complex> r;
  std::vector<double> s;
  residual_raw(spec, t, r, s);
  double worst = 0.0;
  for (std::size_t a = 0; a < t.size(); ++a) {
    const double v = std::abs(r[a]) / s[a];
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, v);
  }
  return worst;
}

/// Jacobian of the cleared residuals with respect to t.
inline Matrix jacobian_raw(const ModelSpec& spec, std::span<const Complex> t) {
  const std::size_t k = t.size();
  const Complex w = spec.twist();
  Matrix jac(k, k);
  std::vector<Complex> row(k);
  for (std::size_t a = 0; a < k; ++a) {
    std::fill(row.begin(), row.end(), Complex{});
    const auto eq = equation_terms(spec, t, a);
    accumulate_gradient(eq.lhs, a, 1.0, row);
    accumulate_gradient(eq.rhs, a, -w, row);
    for (std::size_t c = 0; c < k; ++c) jac(a, c) = row[c];
  }
  return jac;
}

}  // namespace detail

/// Cleared polynomial residuals LHS_a - RHS_a. All zero iff roots solve the
/// Bethe system.
inline std::vector<Complex> bethe_residual(const ModelSpec& spec, const Sector& sector, const RootSet& roots) {
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  std::vector<Complex> r;
  std::vector<double> s;
  detail::residual_raw(spec, roots.roots(), r, s);
  return r;
}

/// max_a |LHS_a - RHS_a| / (largest monomial magnitude of equation a).
/// This is the statistic thresholds are applied to.
inline double normalized_residual(const ModelSpec& spec, const Sector& sector, const RootSet& roots) {
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  return detail::normalized_residual_raw(spec, roots.roots());
}

/// Residuals of the rational form
///   XXX: prod_i (t_a - z_i + l_i)/(t_a - z_i - l_i) - e^mu prod_b (t_a - t_b + 1)/(t_a - t_b - 1)
///   XXZ: prod_i (q^{2l_i} t_a - z_i)/(t_a - q^{2l_i} z_i) - q^{2mu} prod_b (q^2 t_a - t_b)/(t_a - q^2 t_b)
/// Throws PoleError naming the pair whose denominator vanishes.
inline std::vector<Complex> rational_form_residual(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                                                   double tol = kDefaultTol) {
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  const std::span<const Complex> t = roots.roots();
  const Complex w = spec.twist();
  const Complex q2 = spec.q_power(2.0);
  std::vector<Complex> out(t.size());
  for (std::size_t a = 0; a < t.size(); ++a) {
    Complex site_ratio{1.0};
    for (std::size_t i = 0; i < spec.sites(); ++i) {
      Complex num, den, den_ref;
      if (spec.is_xxx()) {
        const double ell = spec.spins().ell(i);
        num = t[a] - spec.z(i) + ell;
        den = t[a] - spec.z(i) - ell;
        den_ref = spec.z(i) + ell;
      } else {
        const Complex qe = spec.q_power(spec.spins().two_ell(i));
        num = qe * t[a] - spec.z(i);
        den = t[a] - qe * spec.z(i);
        den_ref = qe * spec.z(i);
      }
      if (near(t[a], den_ref, tol))
        throw PoleError("rational form has a pole: root " + std::to_string(a) + " sits on site " + std::to_string(i),
                        static_cast<int>(a), static_cast<int>(i));
      site_ratio *= num / den;
    }
    Complex pair_ratio{1.0};
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (b == a) continue;
      Complex num, den, den_ref;
      if (spec.is_xxx()) {
        num = t[a] - t[b] + 1.0;
        den = t[a] - t[b] - 1.0;
        den_ref = t[b] + 1.0;
      } else {
        num = q2 * t[a] - t[b];
        den = t[a] - q2 * t[b];
        den_ref = q2 * t[b];
      }
      if (near(t[a], den_ref, tol))
        throw PoleError("rational form has a pole: roots " + std::to_string(a) + " and " + std::to_string(b),
                        static_cast<int>(a), static_cast<int>(b));
      pair_ratio *= num / den;
    }
    out[a] = site_ratio - w * pair_ratio;
  }
  return out;
}

/// P(u) = prod_i prod_{r<2l_i} (u - z_i - l_i + r) for XXX,
/// Q(u) = prod_i prod_{r<2l_i} (u - q^{2(l_i - r)} z_i) for XXZ.
inline Polynomial drinfeld_polynomial(const ModelSpec& spec) {
  std::vector<Complex> roots;
  roots.reserve(static_cast<std::size_t>(spec.spins().total_two_ell()));
  for (std::size_t i = 0; i < spec.sites(); ++i) {
    const int two_ell = spec.spins().two_ell(i);
    for (int r = 0; r < two_ell; ++r) {
      if (spec.is_xxx())
        roots.push_back(spec.z(i) + spec.spins().ell(i) - static_cast<double>(r));
      else
        roots.push_back(spec.q_power(two_ell - 2.0 * r) * spec.z(i));
    }
  }
  return Polynomial::from_roots(roots);
}

/// [r]_q = (q^r - q^{-r}) / (q - q^{-1}).
inline Complex q_number(int r, Complex q, double tol = kDefaultTol) {
  if (near(q, 1.0, tol) || near(q, -1.0, tol)) throw InvalidInput("q-number is undefined at q = +-1");
  const double x = static_cast<double>(r);
  const Complex qr = std::pow(q, x);
  return (qr - 1.0 / qr) / (q - 1.0 / q);
}

/// The k = 1 equation as a univariate polynomial in t (degree <= N), for
/// the model's twist multiplied by twist_factor.
inline Polynomial single_particle_polynomial(const ModelSpec& spec, Complex twist_factor = 1.0) {
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
  return Polynomial::from_linear_factors(lhs) - (twist_factor * spec.twist()) * Polynomial::from_linear_factors(rhs);
}

}  // namespace bethekit
