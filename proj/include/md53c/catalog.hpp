#pragma once

#include "md53c/errors.hpp"
#include "md53c/lie_core.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace md53c {

enum class Family { F1 = 1, F2, F3, F4, F5, F6, F7, F8 };

inline std::string to_string(Family f) { return "F" + std::to_string(static_cast<int>(f)); }

inline Family family_from_string(const std::string& s) {
  if (s.size() == 2 && s[0] == 'F' && s[1] >= '1' && s[1] <= '8')
    return static_cast<Family>(s[1] - '0');
  throw std::invalid_argument("unknown family '" + s + "' (expected F1..F8)");
}

/// One member of the classification list: a family tag plus its parameters.
/// Parameters that a family does not use stay empty.
struct FamilySpec {
  Family family = Family::F4;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> lambda;
  std::optional<double> phi;  // radians

  static FamilySpec f1(double l1, double l2) { return {Family::F1, l1, l2, {}, {}}; }
  static FamilySpec f2(double l) { return {Family::F2, {}, {}, l, {}}; }
  static FamilySpec f3(double l) { return {Family::F3, {}, {}, l, {}}; }
  static FamilySpec f4() { return {Family::F4, {}, {}, {}, {}}; }
  static FamilySpec f5(double l) { return {Family::F5, {}, {}, l, {}}; }
  static FamilySpec f6(double l) { return {Family::F6, {}, {}, l, {}}; }
  static FamilySpec f7() { return {Family::F7, {}, {}, {}, {}}; }
  static FamilySpec f8(double l, double p) { return {Family::F8, {}, {}, l, p}; }

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

/// Representative of the second topological type.
inline FamilySpec f8_reference() { return FamilySpec::f8(1.0, std::numbers::pi / 2); }

inline bool is_f8_reference(const FamilySpec& s) {
  return s.family == Family::F8 && s.lambda == 1.0 && s.phi == std::numbers::pi / 2;
}

inline std::string describe(const FamilySpec& s) {
  std::string out = to_string(s.family);
  std::vector<std::string> parts;
  if (s.lambda1) parts.push_back("lambda1=" + format_double(*s.lambda1));
  if (s.lambda2) parts.push_back("lambda2=" + format_double(*s.lambda2));
  if (s.lambda) parts.push_back("lambda=" + format_double(*s.lambda));
  if (s.phi) parts.push_back("phi=" + format_double(*s.phi));
  if (!parts.empty()) {
    out += "(";
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    out += ")";
  }
  return out;
}

namespace detail {

inline double require(const std::optional<double>& v, const char* name, const FamilySpec& s) {
  if (!v) throw InvalidParams(to_string(s.family) + ": missing parameter " + name);
  if (!std::isfinite(*v)) throw InvalidParams(to_string(s.family) + ": non-finite " + name);
  return *v;
}

inline void forbid(const std::optional<double>& v, const char* name, const FamilySpec& s) {
  if (v) throw InvalidParams(to_string(s.family) + ": parameter " + name + " does not apply");
}

}  // namespace detail

/// Throws InvalidParams unless s satisfies its family's constraints.
inline void validate(const FamilySpec& s) {
  using detail::forbid;
  using detail::require;
  const auto fail = [&](const std::string& why) { throw InvalidParams(describe(s) + ": " + why); };
  switch (s.family) {
    case Family::F1: {
      const double l1 = require(s.lambda1, "lambda1", s);
      const double l2 = require(s.lambda2, "lambda2", s);
      forbid(s.lambda, "lambda", s);
      forbid(s.phi, "phi", s);
      if (l1 == 0.0 || l1 == 1.0) fail("lambda1 must avoid {0, 1}");
      if (l2 == 0.0 || l2 == 1.0) fail("lambda2 must avoid {0, 1}");
      if (l1 == l2) fail("lambda1 and lambda2 must differ");
      return;
    }
    case Family::F2:
    case Family::F6: {
      const double l = require(s.lambda, "lambda", s);
      forbid(s.lambda1, "lambda1", s);
      forbid(s.lambda2, "lambda2", s);
      forbid(s.phi, "phi", s);
      if (l == 0.0 || l == 1.0) fail("lambda must avoid {0, 1}");
      return;
    }
    case Family::F3:
    case Family::F5: {
      const double l = require(s.lambda, "lambda", s);
      forbid(s.lambda1, "lambda1", s);
      forbid(s.lambda2, "lambda2", s);
      forbid(s.phi, "phi", s);
      if (l == 1.0) fail("lambda must differ from 1");
      return;
    }
    case Family::F4:
    case Family::F7:
      forbid(s.lambda1, "lambda1", s);
      forbid(s.lambda2, "lambda2", s);
      forbid(s.lambda, "lambda", s);
      forbid(s.phi, "phi", s);
      return;
    case Family::F8: {
      const double l = require(s.lambda, "lambda", s);
      const double p = require(s.phi, "phi", s);
      forbid(s.lambda1, "lambda1", s);
      forbid(s.lambda2, "lambda2", s);
      if (l == 0.0) fail("lambda must be nonzero");
      if (!(p > 0.0 && p < std::numbers::pi)) fail("phi must lie in the open interval (0, pi)");
      return;
    }
  }
  throw InvalidParams("unknown family tag");
}

/// The printed 3x3 matrix of ad_{X2} restricted to span{X3, X4, X5}.
inline Eigen::Matrix3d ad_x2_block(const FamilySpec& s) {
  validate(s);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  switch (s.family) {
    case Family::F1:
      m.diagonal() << *s.lambda1, *s.lambda2, 1.0;
      break;
    case Family::F2:
      m.diagonal() << 1.0, 1.0, *s.lambda;
      break;
    case Family::F3:
      m.diagonal() << *s.lambda, 1.0, 1.0;
      break;
    case Family::F4:
      m.setIdentity();
      break;
    case Family::F5:
      m << *s.lambda, 0, 0,
           0, 1, 1,
           0, 0, 1;
      break;
    case Family::F6:
      m << 1, 1, 0,
           0, 1, 0,
           0, 0, *s.lambda;
      break;
    case Family::F7:
      m << 1, 1, 0,
           0, 1, 1,
           0, 0, 1;
      break;
    case Family::F8: {
      const double c = std::cos(*s.phi), sn = std::sin(*s.phi);
      m << c, -sn, 0,
           sn, c, 0,
           0, 0, *s.lambda;
      break;
    }
  }
  return m;
}

/// Structure constants with [X1,X2] = X3, ad_{X1} = 0 on the derived ideal and
/// ad_{X2} acting on X3..X5 by the family's matrix.
inline StructureConstants build_algebra(const FamilySpec& s) {
  const Eigen::Matrix3d block = ad_x2_block(s);
  StructureConstants sc;
  sc.set(1, 2, 3, 1.0);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      if (block(k, j) != 0.0) sc.set(2, j + 3, k + 3, block(k, j));
  return sc;
}

/// Parameter values swept by the verification batches. Values that violate a
/// family's constraints are dropped when the grid is expanded.
struct GridSpec {
  std::vector<std::pair<double, double>> f1;
  std::vector<double> f2;
  std::vector<double> f3;
  bool f4 = true;
  std::vector<double> f5;
  std::vector<double> f6;
  bool f7 = true;
  std::vector<double> f8_lambda;
  std::vector<double> f8_phi;

  static GridSpec defaults() {
    constexpr double pi = std::numbers::pi;
    GridSpec g;
    g.f1 = {{-2.0, 3.0}, {0.5, 2.0}, {-0.5, -3.0}};
    g.f2 = {-2.0, -0.5, 0.5, 2.0, 3.0};
    g.f3 = {-2.0, -0.5, 0.0, 0.5, 2.0, 3.0};
    g.f5 = g.f3;
    g.f6 = g.f2;
    g.f8_lambda = {-1.0, 1.0, 2.0};
    g.f8_phi = {pi / 6, pi / 2, 3 * pi / 4};
    return g;
  }

  bool empty() const {
    return f1.empty() && f2.empty() && f3.empty() && !f4 && f5.empty() && f6.empty() && !f7 &&
           (f8_lambda.empty() || f8_phi.empty());
  }
};

inline std::vector<FamilySpec> list_catalog(const GridSpec& grid = GridSpec::defaults()) {
  if (grid.empty()) throw std::invalid_argument("list_catalog: grid is empty");
  std::vector<FamilySpec> out;
  const auto keep = [&out](const FamilySpec& s) {
    try {
      validate(s);
      out.push_back(s);
    } catch (const InvalidParams&) {
    }
  };
  for (auto [l1, l2] : grid.f1) keep(FamilySpec::f1(l1, l2));
  for (double l : grid.f2) keep(FamilySpec::f2(l));
  for (double l : grid.f3) keep(FamilySpec::f3(l));
  if (grid.f4) keep(FamilySpec::f4());
  for (double l : grid.f5) keep(FamilySpec::f5(l));
  for (double l : grid.f6) keep(FamilySpec::f6(l));
  if (grid.f7) keep(FamilySpec::f7());
  for (double l : grid.f8_lambda)
    for (double p : grid.f8_phi) keep(FamilySpec::f8(l, p));
  return out;
}

/// Numerical Jordan-type fingerprint of ad_{X2} on the derived ideal: the
/// eigenvalue multiset, the geometric multiplicity of each distinct
/// eigenvalue, and the eigenvalue carried by X3 = [X1, X2] when X3 is an
/// eigenvector. The X3 entry separates pairs such as diag(1,1,l) and
/// diag(l,1,1) whose plain Jordan forms agree.
struct JordanSignature {
  std::vector<std::pair<double, double>> eigenvalues;  // (re, im), rounded, sorted
  std::vector<int> geometric_multiplicity;              // per distinct eigenvalue
  std::optional<double> x3_eigenvalue;

  friend bool operator==(const JordanSignature&, const JordanSignature&) = default;
};

inline JordanSignature jordan_signature(const FamilySpec& s) {
  const Eigen::Matrix3d m = ad_x2_block(s);
  const auto round9 = [](double v) { return std::round(v * 1e9) / 1e9 + 0.0; };

  JordanSignature sig;
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
  for (int i = 0; i < 3; ++i)
    sig.eigenvalues.emplace_back(round9(es.eigenvalues()(i).real()),
                                 round9(es.eigenvalues()(i).imag()));
  std::sort(sig.eigenvalues.begin(), sig.eigenvalues.end());

  auto distinct = sig.eigenvalues;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (auto [re, im] : distinct) {
    const Eigen::Matrix3cd shifted =
        m.cast<std::complex<double>>() - std::complex<double>(re, im) * Eigen::Matrix3cd::Identity();
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(shifted);
    int rank = 0;
    for (int i = 0; i < 3; ++i)
      if (svd.singularValues()(i) > 1e-9) ++rank;
    sig.geometric_multiplicity.push_back(3 - rank);
  }

  const Eigen::Vector3d image = m.col(0);
  if (std::abs(image(1)) < 1e-12 && std::abs(image(2)) < 1e-12) sig.x3_eigenvalue = round9(image(0));
  return sig;
}

inline nlohmann::json to_json(const FamilySpec& s) {
  nlohmann::json j;
  j["family"] = to_string(s.family);
  if (s.lambda1) j["lambda1"] = *s.lambda1;
  if (s.lambda2) j["lambda2"] = *s.lambda2;
  if (s.lambda) j["lambda"] = *s.lambda;
  if (s.phi) j["phi"] = *s.phi;
  return j;
}

/// Parameters only, without the family tag.
inline nlohmann::json params_json(const FamilySpec& s) {
  nlohmann::json j = to_json(s);
  j.erase("family");
  return j;
}

inline FamilySpec family_spec_from_json(const nlohmann::json& j) {
  FamilySpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  if (j.contains("lambda1")) s.lambda1 = j["lambda1"].get<double>();
  if (j.contains("lambda2")) s.lambda2 = j["lambda2"].get<double>();
  if (j.contains("lambda")) s.lambda = j["lambda"].get<double>();
  if (j.contains("phi")) s.phi = j["phi"].get<double>();
  validate(s);
  return s;
}

}  // namespace md53c
