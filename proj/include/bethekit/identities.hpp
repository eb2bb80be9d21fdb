#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bethekit/error.hpp"
#include "bethekit/model.hpp"
#include "bethekit/polynomial.hpp"

namespace bethekit {

/// Evaluation point of F or G. shift_n records alpha = mu + 2 pi i n (XXX)
/// or alpha = mu + pi n / gamma (XXZ). branch_angle is the direction of the
/// cut of u^beta (XXZ only); unset or colliding directions are replaced by
/// the bisector of the widest admissible gap.
struct IdentityQuery {
  Complex alpha;
  int shift_n = 0;
  std::optional<double> branch_angle;
};

inline IdentityQuery xxx_query(const ModelSpec& spec, int n) {
  return {spec.mu() + kTwoPi * kI * static_cast<double>(n), n, std::nullopt};
}

inline IdentityQuery xxz_query(const ModelSpec& spec, int n, std::optional<double> branch_angle = std::nullopt) {
  return {spec.mu() + kPi * static_cast<double>(n) / spec.gamma(), n, branch_angle};
}

/// Twist-compatible query for the model's family.
inline IdentityQuery shift_query(const ModelSpec& spec, int n) {
  return spec.is_xxx() ? xxx_query(spec, n) : xxz_query(spec, n);
}

struct IdentityValue {
  Complex value;
  /// Largest single residue magnitude (1 when there are no residues).
  double scale = 1.0;
  /// |value| / scale; the pass/fail statistic.
  double normalized = 0.0;
  /// Cut direction actually used (XXZ only).
  std::optional<double> branch_angle;
};

namespace detail {

/// Poles of the integrand, interleaved: [t_0, s(t_0), t_1, s(t_1), ...] with
/// s(t) = t + 1 (XXX) or q^2 t (XXZ).
inline std::vector<Complex> integrand_poles(const ModelSpec& spec, std::span<const Complex> t) {
  std::vector<Complex> poles;
  poles.reserve(2 * t.size());
  const Complex q2 = spec.q_power(2.0);
  for (Complex x : t) {
    poles.push_back(x);
    poles.push_back(spec.is_xxx() ? x + 1.0 : q2 * x);
  }
  return poles;
}

inline void check_simple_poles(std::span<const Complex> poles, double tol) {
  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j)
      if (near(poles[i], poles[j], tol))
        throw PoleError("integrand poles " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide (inadmissible or diagonal root set)",
                        static_cast<int>(i / 2), static_cast<int>(j / 2));
}

/// Residues of weight(u) / prod_l (u - p_l) at each simple pole p_j.
template <class Weight>
std::vector<Complex> simple_pole_residues(std::span<const Complex> poles, Weight&& weight) {
  std::vector<Complex> res(poles.size());
  for (std::size_t j = 0; j < poles.size(); ++j) {
    Complex den{1.0};
    for (std::size_t l = 0; l < poles.size(); ++l)
      if (l != j) den *= poles[j] - poles[l];
    res[j] = weight(poles[j]) / den;
  }
  return res;
}

inline IdentityValue summarize(std::span<const Complex> residues) {
  IdentityValue v;
  v.value = pairwise_sum(residues);
  double scale = 0.0;
  for (Complex r : residues) scale = std::max(scale, std::abs(r));
  v.scale = scale > 0.0 ? scale : 1.0;
  v.normalized = std::abs(v.value) / v.scale;
  return v;
}

/// Angular arcs swept from arg(t_a) by 2 Re(gamma): the cut must avoid them
/// so that log(q^2 t_a) - log(t_a) = 2 i gamma on the chosen branch.
struct Arc {
  double start;
  double length;
};

inline std::vector<Arc> pole_arcs(const ModelSpec& spec, std::span<const Complex> t) {
  const double sweep = 2.0 * spec.gamma().real();
  if (std::abs(sweep) >= kTwoPi)
    throw BranchPlacementError("|2 Re gamma| >= 2 pi: no branch keeps t and q^2 t on one sheet");
  std::vector<Arc> arcs;
  for (Complex x : t) {
    const double a = std::arg(x);
    arcs.push_back(sweep >= 0 ? Arc{wrap_angle(a), sweep} : Arc{wrap_angle(a + sweep), -sweep});
  }
  return arcs;
}

inline bool arc_contains(const Arc& arc, double angle, double margin) {
  const double rel = wrap_angle(angle - arc.start + margin);
  return rel <= arc.length + 2.0 * margin;
}

inline constexpr double kBranchMargin = 1e-9;

}  // namespace detail

/// True iff a cut along `angle` leaves every pair (t_a, q^2 t_a) on one sheet.
inline bool branch_angle_is_valid(const ModelSpec& spec, const RootSet& roots, double angle) {
  for (const auto& arc : detail::pole_arcs(spec, roots.roots()))
    if (detail::arc_contains(arc, angle, detail::kBranchMargin)) return false;
  return true;
}

/// `preferred` when valid, else the bisector of the widest gap between arcs.
inline double choose_branch_angle(const ModelSpec& spec, const RootSet& roots,
                                  std::optional<double> preferred = std::nullopt) {
  const auto arcs = detail::pole_arcs(spec, roots.roots());
  if (preferred && branch_angle_is_valid(spec, roots, *preferred)) return wrap_angle(*preferred);
  if (arcs.empty()) return preferred ? wrap_angle(*preferred) : kPi;
  std::vector<double> ends;
  for (const auto& arc : arcs) {
    ends.push_back(arc.start);
    ends.push_back(wrap_angle(arc.start + arc.length));
  }
  std::sort(ends.begin(), ends.end());
  double best_gap = -1.0, best_angle = 0.0;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const double lo = ends[i];
    const double hi = i + 1 < ends.size() ? ends[i + 1] : ends[0] + kTwoPi;
    const double mid = wrap_angle(0.5 * (lo + hi));
    if (hi - lo > best_gap && branch_angle_is_valid(spec, roots, mid)) {
      best_gap = hi - lo;
      best_angle = mid;
    }
  }
  if (best_gap < 0.0) throw BranchPlacementError("every cut direction separates some pole pair (t_a, q^2 t_a)");
  return best_angle;
}

namespace detail {

/// log u on the sheet whose cut runs along `cut`: arg in (cut, cut + 2 pi).
inline Complex branch_log(Complex u, double cut) {
  return {std::log(std::abs(u)), cut + wrap_angle(std::arg(u) - cut)};
}

struct Residues {
  std::vector<Complex> values;
  std::optional<double> branch_angle;
};

inline Residues identity_residues(const ModelSpec& spec, const Sector& sector, const IdentityQuery& query,
                                  const RootSet& roots, double tol) {
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  const auto poles = integrand_poles(spec, roots.roots());
  Residues out;
  if (spec.is_xxx()) {
    check_simple_poles(poles, tol);
    const Polynomial p = drinfeld_polynomial(spec);
    out.values = simple_pole_residues(poles, [&](Complex u) { return std::exp(-query.alpha * u) * p(u); });
    return out;
  }
  for (std::size_t a = 0; a < roots.size(); ++a)
    if (near_zero(roots[a], tol))
      throw PoleError("root " + std::to_string(a) + " sits at the branch point 0", static_cast<int>(a),
                      static_cast<int>(a));
  check_simple_poles(poles, tol);
  const double cut = choose_branch_angle(spec, roots, query.branch_angle);
  const Complex beta = query.alpha + sector.sz() + 1.0;
  const Polynomial q = drinfeld_polynomial(spec);
  out.values = simple_pole_residues(poles, [&](Complex u) { return std::exp(-beta * branch_log(u, cut)) * q(u); });
  out.branch_angle = cut;
  return out;
}

}  // namespace detail

/// F(alpha) as the residue sum over t_a and t_a + 1 of
/// e^{-alpha u} P(u) / prod_a (u - t_a)(u - t_a - 1).
inline IdentityValue eval_F(const ModelSpec& spec, const Sector& sector, const IdentityQuery& query,
                            const RootSet& roots, double tol = kDefaultTol) {
  if (!spec.is_xxx()) throw InvalidInput("eval_F requires an XXX model");
  return detail::summarize(detail::identity_residues(spec, sector, query, roots, tol).values);
}

/// G(alpha) as the residue sum over t_a and q^2 t_a of
/// u^{-alpha - S_z - 1} Q(u) / prod_a (u - t_a)(u - q^2 t_a).
inline IdentityValue eval_G(const ModelSpec& spec, const Sector& sector, const IdentityQuery& query,
                            const RootSet& roots, double tol = kDefaultTol) {
  if (!spec.is_xxz()) throw InvalidInput("eval_G requires an XXZ model");
  auto res = detail::identity_residues(spec, sector, query, roots, tol);
  auto v = detail::summarize(res.values);
  v.branch_angle = res.branch_angle;
  return v;
}

/// The two residues attached to root a (0-based) at alpha = mu.
inline std::pair<Complex, Complex> residue_pair(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                                                std::size_t a, double tol = kDefaultTol) {
  if (a >= roots.size()) throw InvalidInput("residue_pair: root index out of range");
  const auto res = detail::identity_residues(spec, sector, shift_query(spec, 0), roots, tol).values;
  return {res[2 * a], res[2 * a + 1]};
}

/// Largest residue magnitude at alpha = mu; the scale residue-pair sums are
/// normalized by.
inline double residue_scale(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                            double tol = kDefaultTol) {
  return detail::summarize(detail::identity_residues(spec, sector, shift_query(spec, 0), roots, tol).values).scale;
}

/// Trapezoidal rule for (1/2 pi i) * contour integral of the F integrand over
/// the circle around the pole centroid with radius 2 * (max pole distance) + 1.
inline Complex eval_F_quadrature(const ModelSpec& spec, const Sector& sector, const IdentityQuery& query,
                                 const RootSet& roots, int nodes, double tol = kDefaultTol) {
  if (!spec.is_xxx()) throw InvalidInput("eval_F_quadrature requires an XXX model");
  if (nodes < 1) throw InvalidInput("quadrature needs at least one node");
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  const auto poles = detail::integrand_poles(spec, roots.roots());
  detail::check_simple_poles(poles, tol);
  Complex centre{};
  for (Complex p : poles) centre += p;
  if (!poles.empty()) centre /= static_cast<double>(poles.size());
  double spread = 0.0;
  for (Complex p : poles) spread = std::max(spread, std::abs(p - centre));
  const double radius = 2.0 * spread + 1.0;
  const Polynomial p = drinfeld_polynomial(spec);
  std::vector<Complex> terms(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    const Complex offset = std::polar(radius, kTwoPi * j / nodes);
    const Complex u = centre + offset;
    Complex den{1.0};
    for (Complex pole : poles) den *= u - pole;
    terms[j] = std::exp(-query.alpha * u) * p(u) / den * offset;
  }
  return pairwise_sum(terms) / static_cast<double>(nodes);
}

namespace detail {

/// (1/2 pi i) times the integral of f over |u| = r, trapezoidal rule.
template <class F>
Complex circle_integral(F&& f, double r, int nodes) {
  std::vector<Complex> terms(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    const Complex u = std::polar(r, kTwoPi * j / nodes);
    terms[j] = f(u) * u;
  }
  return pairwise_sum(terms) / static_cast<double>(nodes);
}

}  // namespace detail

/// G at integer exponent: (1/2 pi i)[outer circle - inner circle] of
/// u^{-m-1} Q(u) / prod_a (u - t_a)(u - q^2 t_a). Matches eval_G at
/// alpha = m - S_z.
inline Complex eval_G_quadrature_integer(const ModelSpec& spec, const Sector& sector, int m, const RootSet& roots,
                                         int nodes, double tol = kDefaultTol) {
  if (!spec.is_xxz()) throw InvalidInput("eval_G_quadrature_integer requires an XXZ model");
  if (nodes < 1) throw InvalidInput("quadrature needs at least one node");
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  const auto poles = detail::integrand_poles(spec, roots.roots());
  for (std::size_t a = 0; a < roots.size(); ++a)
    if (near_zero(roots[a], tol))
      throw PoleError("root " + std::to_string(a) + " sits at 0", static_cast<int>(a), static_cast<int>(a));
  detail::check_simple_poles(poles, tol);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Complex p : poles) {
    lo = std::min(lo, std::abs(p));
    hi = std::max(hi, std::abs(p));
  }
  const double inner = poles.empty() ? 0.5 : 0.5 * lo;
  const double outer = poles.empty() ? 2.0 : 2.0 * hi;
  const Polynomial q = drinfeld_polynomial(spec);
  auto integrand = [&](Complex u) {
    Complex den{1.0};
    for (Complex pole : poles) den *= u - pole;
    return std::pow(u, static_cast<double>(-m - 1)) * q(u) / den;
  };
  return detail::circle_integral(integrand, outer, nodes) - detail::circle_integral(integrand, inner, nodes);
}

/// Residues at 0 and at infinity of u^{-m-1} Q(u) / prod_a (u - t_a)(u - q^2 t_a),
/// from Laurent coefficients (no quadrature).
struct BoundaryResidues {
  Complex at_zero;
  Complex at_infinity;
  Complex sum() const { return at_zero + at_infinity; }
};

inline BoundaryResidues tz_boundary_residues(const ModelSpec& spec, const Sector& sector, int m,
                                             const RootSet& roots, double tol = kDefaultTol) {
  if (!spec.is_xxz()) throw InvalidInput("sum rule requires an XXZ model");
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  for (std::size_t a = 0; a < roots.size(); ++a)
    if (near_zero(roots[a], tol)) throw InvalidInput("sum rule requires nonzero rapidities");
  const Polynomial q = drinfeld_polynomial(spec);
  const auto poles = detail::integrand_poles(spec, roots.roots());
  const Polynomial den = Polynomial::from_roots(poles);
  BoundaryResidues r;
  if (m >= 0) r.at_zero = series_at_zero(q, den, m + 1)[static_cast<std::size_t>(m)];
  r.at_infinity = -laurent_at_infinity(q, den, m);
  return r;
}

/// Defect (Res_0 + Res_inf) of the algebraic relation obtained when
/// q^{2 mu} = q^{2(m - S_z)}. Zero iff the sum rule holds.
inline Complex sum_rule_tz(const ModelSpec& spec, const Sector& sector, int m, const RootSet& roots,
                           double tol = kDefaultTol) {
  if (!spec.is_xxz()) throw InvalidInput("sum rule requires an XXZ model");
  const Complex expected = spec.q_power(2.0 * (m - sector.sz()));
  if (!near(spec.twist(), expected, tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "sum rule m = " << m << " does not apply: q^{2 mu} = " << spec.twist() << " but q^{2(m - S_z)} = " << expected;
    throw ApplicabilityError(msg.str());
  }
  return tz_boundary_residues(spec, sector, m, roots, tol).sum();
}

/// Explicit S_z = 0 forms of the sum rule:
///   m =  0: prod t_a^2 - prod z_i^{2 l_i}
///   m = -1: [2]_q sum t_a - sum [2 l_i]_q z_i
///   m =  1: [2]_q sum 1/t_a - sum [2 l_i]_q / z_i
inline Complex sz_zero_sum_rule(const ModelSpec& spec, const Sector& sector, int m, const RootSet& roots) {
  if (!spec.is_xxz()) throw InvalidInput("sum rule requires an XXZ model");
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  if (sector.two_sz() != 0) throw ApplicabilityError("explicit sum rules need S_z = 0");
  const Complex q = spec.q();
  switch (m) {
    case 0: {
      Complex lhs{1.0}, rhs{1.0};
      for (Complex t : roots) lhs *= t * t;
      for (std::size_t i = 0; i < spec.sites(); ++i) rhs *= std::pow(spec.z(i), static_cast<double>(spec.spins().two_ell(i)));
      return lhs - rhs;
    }
    case -1:
    case 1: {
      Complex lhs{}, rhs{};
      for (Complex t : roots) lhs += m < 0 ? t : 1.0 / t;
      lhs *= q_number(2, q);
      for (std::size_t i = 0; i < spec.sites(); ++i)
        rhs += q_number(spec.spins().two_ell(i), q) * (m < 0 ? spec.z(i) : 1.0 / spec.z(i));
      return lhs - rhs;
    }
    default:
      throw ApplicabilityError("explicit sum rules exist for m in {-1, 0, 1}");
  }
}

/// Periodic XXX relation from F(0) = 0. For k = sum l_i returns
/// sum t_a - sum l_i z_i; otherwise the residue at infinity of
/// P(u) / prod_a (u - t_a)(u - t_a - 1).
inline Complex xxx_periodic_relation(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                                     double tol = kDefaultTol) {
  if (!spec.is_xxx()) throw InvalidInput("periodic relation requires an XXX model");
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  if (!spec.is_periodic(tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "periodic relation needs e^mu = 1, got " << spec.twist();
    throw ApplicabilityError(msg.str());
  }
  if (sector.two_sz() == 0) {
    Complex lhs{}, rhs{};
    for (Complex t : roots) lhs += t;
    for (std::size_t i = 0; i < spec.sites(); ++i) rhs += spec.spins().ell(i) * spec.z(i);
    return lhs - rhs;
  }
  const auto poles = detail::integrand_poles(spec, roots.roots());
  return -laurent_at_infinity(drinfeld_polynomial(spec), Polynomial::from_roots(poles), -1);
}

}  // namespace bethekit
