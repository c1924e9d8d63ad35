#pragma once

#include "md53c/catalog.hpp"
#include "md53c/lie_core.hpp"
#include "md53c/sampling.hpp"

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace md53c {

/// A linear functional F = alpha X1* + beta X2* + gamma X3* + delta X4* + sigma X5*.
struct Cov5 {
  double alpha = 0, beta = 0, gamma = 0, delta = 0, sigma = 0;

  Vec5 vec() const { return Vec5(alpha, beta, gamma, delta, sigma); }
  static Cov5 from(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

  double operator[](int k) const { return vec()(k); }

  /// gamma + i delta, the complex coordinate used for family 8.
  std::complex<double> w() const { return {gamma, delta}; }

  friend bool operator==(const Cov5&, const Cov5&) = default;
};

/// Coordinates with smaller magnitude are routed into the exact-zero branches.
inline constexpr double kZeroGuard = 1e-12;

inline bool is_zero(double v) { return std::abs(v) < kZeroGuard; }

/// True when (gamma, delta, sigma) has a coordinate outside the zero guard.
inline bool has_derived_part(const Cov5& f) {
  return !is_zero(f.gamma) || !is_zero(f.delta) || !is_zero(f.sigma);
}

inline nlohmann::json to_json(const Cov5& f) {
  return nlohmann::json::array({f.alpha, f.beta, f.gamma, f.delta, f.sigma});
}

struct KirillovForm {
  Mat form;  // B(i,j) = <F, [X_i, X_j]>
  int dim = 0;
};

inline KirillovForm kirillov_form_rank(const StructureConstants& sc, const Cov5& f,
                                       double tol = 1e-9) {
  const Vec5 fv = f.vec();
  KirillovForm out{Mat::Zero(kDim, kDim), 0};
  for (int i = 1; i <= kDim; ++i)
    for (int j = 1; j <= kDim; ++j) {
      double v = 0.0;
      for (int k = 1; k <= kDim; ++k) v += fv(k - 1) * sc(i, j, k);
      out.form(i - 1, j - 1) = v;
    }
  out.dim = numeric_rank(out.form, tol);
  return out;
}

struct FlowStep {
  int direction = 1;  // basis index 1..5
  double time = 0.0;
};
using FlowWord = std::vector<FlowStep>;

/// Applies F -> F o exp(-t ad_{X_i}) for each step of the word, in order.
inline Cov5 coadjoint_flow(const StructureConstants& sc, const Cov5& f, const FlowWord& word) {
  Vec5 v = f.vec();
  for (const auto& step : word) {
    const Mat g = mat_exp(ad_matrix(sc, step.direction), -step.time);
    v = g.transpose() * v;
  }
  return Cov5::from(v);
}

/// Closed-form parametrization (y, a) -> point of the orbit through `base`.
/// eval(base.beta, 0) returns base. A zero-dimensional orbit has a constant chart.
class OrbitChart {
 public:
  OrbitChart(FamilySpec family, Cov5 base)
      : family_(std::move(family)), base_(base), dim_(has_derived_part(base) ? 2 : 0) {
    validate(family_);
    if (family_.family == Family::F8 && !is_f8_reference(family_)) sc_ = build_algebra(family_);
  }

  const FamilySpec& family() const { return family_; }
  const Cov5& base() const { return base_; }
  int dim() const { return dim_; }

  Cov5 eval(double y, double a) const {
    if (dim_ == 0) return base_;
    const auto [al, be, ga, de, si] = base_;
    const double e = std::exp(a);
    // (1 - e^{l a}) / l, continued by its limit -a at l = 0.
    const auto drift = [a](double l) { return l == 0.0 ? -a : -std::expm1(l * a) / l; };
    switch (family_.family) {
      case Family::F1: {
        const double l1 = *family_.lambda1, l2 = *family_.lambda2;
        return {al + drift(l1) * ga, y, std::exp(l1 * a) * ga, std::exp(l2 * a) * de, e * si};
      }
      case Family::F2: {
        const double l = *family_.lambda;
        return {al + drift(1.0) * ga, y, e * ga, e * de, std::exp(l * a) * si};
      }
      case Family::F3: {
        const double l = *family_.lambda;
        return {al + drift(l) * ga, y, std::exp(l * a) * ga, e * de, e * si};
      }
      case Family::F4:
        return {al + drift(1.0) * ga, y, e * ga, e * de, e * si};
      case Family::F5: {
        const double l = *family_.lambda;
        return {al + drift(l) * ga, y, std::exp(l * a) * ga, e * de, a * e * de + e * si};
      }
      case Family::F6: {
        const double l = *family_.lambda;
        return {al + drift(1.0) * ga, y, e * ga, a * e * ga + e * de, std::exp(l * a) * si};
      }
      case Family::F7:
        return {al + drift(1.0) * ga, y, e * ga, a * e * ga + e * de,
                0.5 * a * a * e * ga + a * e * de + e * si};
      case Family::F8: {
        const double l = *family_.lambda, phi = *family_.phi;
        const std::complex<double> w =
            base_.w() * std::exp(a * std::exp(std::complex<double>(0.0, -phi)));
        double x = 0.0;
        if (is_f8_reference(family_)) {
          const double half = std::sin(0.5 * a);
          x = al - std::sin(a) * ga - 2.0 * half * half * de;
        } else {
          // No closed first coordinate is printed for general (lambda, phi);
          // take it from the flow along X2.
          x = coadjoint_flow(*sc_, base_, {{2, -a}}).alpha;
        }
        return {x, y, w.real(), w.imag(), std::exp(l * a) * si};
      }
    }
    return base_;
  }

 private:
  FamilySpec family_;
  Cov5 base_;
  int dim_;
  std::optional<StructureConstants> sc_;
};

inline OrbitChart orbit_chart(const FamilySpec& spec, const Cov5& f) { return OrbitChart(spec, f); }

namespace detail {

/// Scale for relative comparison: the largest non-beta magnitude, floored at 1.
inline double leaf_scale(const Cov5& p, const Cov5& q) {
  double s = 1.0;
  for (int k : {0, 2, 3, 4}) s = std::max({s, std::abs(p[k]), std::abs(q[k])});
  return s;
}

/// Agreement of every coordinate except beta (which is free along a leaf).
inline bool agree_off_beta(const Cov5& p, const Cov5& q, double tol) {
  const double scale = leaf_scale(p, q);
  for (int k : {0, 2, 3, 4})
    if (!(std::abs(p[k] - q[k]) <= tol * scale)) return false;
  return true;
}

inline bool agree_all(const Cov5& p, const Cov5& q, double tol) {
  const double scale = std::max(leaf_scale(p, q), std::max(std::abs(p.beta), std::abs(q.beta)));
  for (int k = 0; k < kDim; ++k)
    if (!(std::abs(p[k] - q[k]) <= tol * scale)) return false;
  return true;
}

/// Exponential rate of derived coordinate k (0 = gamma, 1 = delta, 2 = sigma)
/// along the orbit through p, when that coordinate is a pure exponential at p.
/// Coordinates fed by a Jordan chain are pure only when their chain
/// predecessors vanish.
inline std::optional<double> pure_rate(const FamilySpec& s, int k, const Cov5& p) {
  switch (s.family) {
    case Family::F1:
      return std::array{*s.lambda1, *s.lambda2, 1.0}[k];
    case Family::F2:
      return std::array{1.0, 1.0, *s.lambda}[k];
    case Family::F3:
      return std::array{*s.lambda, 1.0, 1.0}[k];
    case Family::F4:
      return 1.0;
    case Family::F5:
      if (k == 0) return *s.lambda;
      if (k == 1 || is_zero(p.delta)) return 1.0;
      return std::nullopt;
    case Family::F6:
      if (k == 0) return 1.0;
      if (k == 2) return *s.lambda;
      if (is_zero(p.gamma)) return 1.0;
      return std::nullopt;
    case Family::F7:
      if (k == 0) return 1.0;
      if (k == 1 && is_zero(p.gamma)) return 1.0;
      if (k == 2 && is_zero(p.gamma) && is_zero(p.delta)) return 1.0;
      return std::nullopt;
    case Family::F8:
      return std::nullopt;
  }
  return std::nullopt;
}

/// Bracketed root search over the leaf parameter: scans for sign changes of
/// the residual in each coordinate, refines each with TOMS 748 and accepts the
/// first root whose chart point matches q.
inline bool solve_leaf_parameter(const OrbitChart& chart, const Cov5& q, double tol) {
  const Cov5& p = chart.base();
  std::array<int, 4> coords{0, 2, 3, 4};
  std::sort(coords.begin(), coords.end(),
            [&](int i, int j) { return std::abs(p[i]) > std::abs(p[j]); });
  constexpr double lo = -40.0, hi = 40.0;
  constexpr int steps = 1600;
  for (int k : coords) {
    const auto residual = [&](double a) { return chart.eval(q.beta, a)[k] - q[k]; };
    double a_prev = lo;
    double r_prev = residual(lo);
    for (int i = 1; i <= steps; ++i) {
      const double a = lo + (hi - lo) * i / steps;
      const double r = residual(a);
      if (!std::isfinite(r) || !std::isfinite(r_prev)) {
        a_prev = a;
        r_prev = r;
        continue;
      }
      std::optional<double> root;
      if (r_prev == 0.0) {
        root = a_prev;
      } else if ((r_prev < 0.0) != (r < 0.0)) {
        std::uintmax_t iters = 100;
        const auto [left, right] = boost::math::tools::toms748_solve(
            residual, a_prev, a, r_prev, r, boost::math::tools::eps_tolerance<double>(52), iters);
        root = 0.5 * (left + right);
      }
      if (root && agree_off_beta(chart.eval(q.beta, *root), q, tol)) return true;
      a_prev = a;
      r_prev = r;
    }
  }
  return false;
}

inline bool same_sign_nonzero(double p, double q) {
  return !is_zero(q) && ((p > 0.0) == (q > 0.0));
}

}  // namespace detail

/// Whether q lies on the coadjoint orbit through p, up to relative tolerance.
inline bool same_leaf(const FamilySpec& spec, const Cov5& p, const Cov5& q, double tol = 1e-8) {
  const OrbitChart chart(spec, p);
  if (chart.dim() == 0) return detail::agree_all(p, q, tol);
  if (!has_derived_part(q)) return false;

  constexpr double guard = 1e-9;
  const auto verify = [&](double a) {
    return std::isfinite(a) && detail::agree_off_beta(chart.eval(q.beta, a), q, tol);
  };

  if (spec.family == Family::F8) {
    const double lambda = *spec.lambda, phi = *spec.phi;
    if (std::abs(p.sigma) > guard) {
      if (!detail::same_sign_nonzero(p.sigma, q.sigma)) return false;
      return verify(std::log(q.sigma / p.sigma) / lambda);
    }
    if (std::abs(p.w()) > guard) {
      if (std::abs(q.w()) == 0.0) return false;
      const double c = std::cos(phi);
      if (std::abs(c) > 1e-12) return verify(std::log(std::abs(q.w()) / std::abs(p.w())) / c);
      return verify((std::arg(p.w()) - std::arg(q.w())) / std::sin(phi));
    }
    return detail::solve_leaf_parameter(chart, q, tol);
  }

  int best = -1;
  double best_rate = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double pk = p[k + 2];
    if (!(std::abs(pk) > guard)) continue;
    const auto rate = detail::pure_rate(spec, k, p);
    if (!rate || *rate == 0.0) continue;
    if (best < 0 || std::abs(pk) > std::abs(p[best + 2])) {
      best = k;
      best_rate = *rate;
    }
  }
  if (best >= 0) {
    const double pk = p[best + 2], qk = q[best + 2];
    if (!detail::same_sign_nonzero(pk, qk)) return false;
    return verify(std::log(qk / pk) / best_rate);
  }
  return detail::solve_leaf_parameter(chart, q, tol);
}

struct MdFailure {
  Cov5 f;
  int expected = 0;
  int got = 0;
};

struct MdReport {
  FamilySpec family;
  int samples = 0;
  int dim0 = 0;
  int dim2 = 0;
  std::vector<MdFailure> failures;
  std::uint64_t seed = 0;
  double tol = 0.0;

  bool ok() const { return failures.empty(); }
};

/// Samples n functionals and checks the orbit-dimension dichotomy: rank of the
/// Kirillov form is 0 or 2, and 2 exactly when (gamma, delta, sigma) != 0.
/// Odd-indexed samples zero out a subset of {beta, gamma, delta, sigma}
/// chosen from the index, so every branch is exercised.
inline MdReport md_property_check(const FamilySpec& spec, int n, std::uint64_t seed,
                                  double tol = 1e-9) {
  if (n < 1) throw std::invalid_argument("md_property_check: n must be at least 1");
  const StructureConstants sc = build_algebra(spec);
  MdReport report{spec, n, 0, 0, {}, seed, tol};
  for (int i = 0; i < n; ++i) {
    SampleStream rng(seed, 0x6d64, static_cast<std::uint64_t>(i));
    Cov5 f{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3),
           rng.uniform(-3, 3)};
    if (i % 2 == 1) {
      const int mask = (i / 2) % 16;
      if (mask & 1) f.gamma = 0.0;
      if (mask & 2) f.delta = 0.0;
      if (mask & 4) f.sigma = 0.0;
      if (mask & 8) f.beta = 0.0;
    }
    const int got = kirillov_form_rank(sc, f, tol).dim;
    const int expected = has_derived_part(f) ? 2 : 0;
    if (got == 0) ++report.dim0;
    if (got == 2) ++report.dim2;
    if (got != expected) report.failures.push_back({f, expected, got});
  }
  return report;
}

inline nlohmann::json to_json(const MdReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"F", to_json(f.f)}, {"expected", f.expected}, {"got", f.got}});
  return {{"schema", 1},
          {"check", "md_property"},
          {"family", to_string(r.family.family)},
          {"params", params_json(r.family)},
          {"samples", r.samples},
          {"dim0", r.dim0},
          {"dim2", r.dim2},
          {"failures", failures},
          {"seed", r.seed},
          {"tol", r.tol}};
}

}  // namespace md53c
