#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace md53c {

inline constexpr int kDim = 5;

/// Coordinates of an element of the Lie algebra in the basis X1..X5.
using Vec5 = Eigen::Matrix<double, kDim, 1>;

/// Small dense square matrix (n <= 5), stack allocated.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kDim, kDim>;

/// Basis vector X_i, with i in 1..5.
inline Vec5 basis_vector(int i) {
  if (i < 1 || i > kDim) throw std::out_of_range("basis index must be in 1..5");
  Vec5 e = Vec5::Zero();
  e(i - 1) = 1.0;
  return e;
}

/// Structure constants c[i][j][k] of a 5-dimensional real Lie algebra,
/// meaning [X_i, X_j] = sum_k c[i][j][k] X_k (indices 1-based).
///
/// Only pairs i < j are ever written; the i > j half is the reflection, so
/// antisymmetry holds for every instance by construction.
class StructureConstants {
 public:
  StructureConstants() { c_.fill(0.0); }

  /// Sets the X_k coefficient of [X_i, X_j]. Passing i > j stores the
  /// negated value on the reflected pair; i == j is rejected.
  void set(int i, int j, int k, double value) {
    check(i);
    check(j);
    check(k);
    if (i == j) throw std::invalid_argument("[X_i, X_i] is identically zero");
    if (i > j) {
      std::swap(i, j);
      value = -value;
    }
    at(i, j, k) = value;
    at(j, i, k) = -value;
  }

  /// Sets all five coefficients of [X_i, X_j].
  void set_bracket(int i, int j, const Vec5& value) {
    for (int k = 1; k <= kDim; ++k) set(i, j, k, value(k - 1));
  }

  double operator()(int i, int j, int k) const {
    check(i);
    check(j);
    check(k);
    return c_[offset(i, j, k)];
  }

  friend bool operator==(const StructureConstants&, const StructureConstants&) = default;

 private:
  static void check(int i) {
    if (i < 1 || i > kDim) throw std::out_of_range("basis index must be in 1..5");
  }
  static std::size_t offset(int i, int j, int k) {
    return static_cast<std::size_t>(((i - 1) * kDim + (j - 1)) * kDim + (k - 1));
  }
  double& at(int i, int j, int k) { return c_[offset(i, j, k)]; }

  std::array<double, kDim * kDim * kDim> c_;
};

/// Lie bracket sum_ij u_i v_j [X_i, X_j].
inline Vec5 bracket(const StructureConstants& sc, const Vec5& u, const Vec5& v) {
  Vec5 out = Vec5::Zero();
  for (int i = 1; i <= kDim; ++i) {
    if (u(i - 1) == 0.0) continue;
    for (int j = 1; j <= kDim; ++j) {
      const double w = u(i - 1) * v(j - 1);
      if (w == 0.0) continue;
      for (int k = 1; k <= kDim; ++k) out(k - 1) += w * sc(i, j, k);
    }
  }
  return out;
}

/// Matrix of ad_{X_i}: column j holds the coordinates of [X_i, X_j].
inline Mat ad_matrix(const StructureConstants& sc, int i) {
  if (i < 1 || i > kDim) throw std::out_of_range("ad_matrix: index must be in 1..5");
  Mat m = Mat::Zero(kDim, kDim);
  for (int j = 1; j <= kDim; ++j)
    for (int k = 1; k <= kDim; ++k) m(k - 1, j - 1) = sc(i, j, k);
  return m;
}

/// Largest absolute coefficient of the Jacobiator over all basis triples.
inline double jacobi_defect(const StructureConstants& sc) {
  double worst = 0.0;
  for (int i = 1; i <= kDim; ++i) {
    const Vec5 xi = basis_vector(i);
    for (int j = 1; j <= kDim; ++j) {
      const Vec5 xj = basis_vector(j);
      for (int k = 1; k <= kDim; ++k) {
        const Vec5 xk = basis_vector(k);
        const Vec5 jac = bracket(sc, xi, bracket(sc, xj, xk)) +
                         bracket(sc, xj, bracket(sc, xk, xi)) +
                         bracket(sc, xk, bracket(sc, xi, xj));
        worst = std::max(worst, jac.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

/// Number of singular values above tol * max(1, largest singular value).
inline int numeric_rank(const Mat& m, double tol = 1e-9) {
  if (!(tol > 0.0)) throw std::invalid_argument("numeric_rank: tol must be positive");
  if (m.size() == 0) return 0;
  const Eigen::MatrixXd dense = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return rank;
}

struct DerivedSubalgebra {
  int dimension = 0;
  std::vector<Vec5> basis;  // orthonormal
  bool commutative = true;
};

/// Span of all basis brackets [X_i, X_j], with a commutativity flag for it.
inline DerivedSubalgebra derived_subalgebra(const StructureConstants& sc, double tol = 1e-9) {
  Eigen::Matrix<double, kDim, 10> gens;
  int col = 0;
  for (int i = 1; i <= kDim; ++i)
    for (int j = i + 1; j <= kDim; ++j)
      gens.col(col++) = bracket(sc, basis_vector(i), basis_vector(j));

  DerivedSubalgebra out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(gens), Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s(0));
  for (Eigen::Index r = 0; r < s.size(); ++r)
    if (s(r) > cutoff) out.basis.push_back(svd.matrixU().col(r));
  out.dimension = static_cast<int>(out.basis.size());

  const double scale = std::max(1.0, gens.cwiseAbs().maxCoeff());
  for (const auto& u : out.basis)
    for (const auto& v : out.basis)
      if (bracket(sc, u, v).cwiseAbs().maxCoeff() > 1e-12 * scale * scale) out.commutative = false;
  return out;
}

/// exp(t * m) by scaling and squaring with a fixed-order Taylor series.
///
/// The scaled matrix has infinity norm below 1/2, where 20 Taylor terms leave a
/// truncation error under 2^-20/20! ~ 4e-25.
inline Mat mat_exp(const Mat& m, double t) {
  const auto n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("mat_exp: matrix must be square");
  Mat a = t * m;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);

  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// Text serialization: one "i j k value" record per line for every nonzero
// coefficient with i < j. Lines starting with '#' and blank lines are skipped.

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

inline void write_structure_constants(std::ostream& os, const StructureConstants& sc) {
  for (int i = 1; i <= kDim; ++i)
    for (int j = i + 1; j <= kDim; ++j)
      for (int k = 1; k <= kDim; ++k)
        if (const double v = sc(i, j, k); v != 0.0)
          os << i << ' ' << j << ' ' << k << ' ' << format_double(v) << '\n';
}

inline std::string to_text(const StructureConstants& sc) {
  std::ostringstream os;
  write_structure_constants(os, sc);
  return os.str();
}

inline StructureConstants read_structure_constants(std::istream& is) {
  StructureConstants sc;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    int i = 0, j = 0, k = 0;
    std::string value_text, extra;
    if (!(fields >> i >> j >> k >> value_text) || (fields >> extra))
      throw std::runtime_error("structure constants: malformed record on line " +
                               std::to_string(lineno));
    if (!(i < j)) {
      throw std::runtime_error("structure constants: record on line " + std::to_string(lineno) +
                               " must have i < j");
    }
    double value = 0.0;
    const char* begin = value_text.data();
    const char* end = begin + value_text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
      throw std::runtime_error("structure constants: bad value on line " + std::to_string(lineno));
    sc.set(i, j, k, value);
  }
  return sc;
}

inline StructureConstants from_text(const std::string& text) {
  std::istringstream is(text);
  return read_structure_constants(is);
}

}  // namespace md53c
