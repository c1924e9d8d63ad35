#pragma once

#include "md53c/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include <algorithm>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace md53c {

using BigInt = boost::multiprecision::cpp_int;

inline nlohmann::json to_json(const BigInt& v) {
  if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max())
    return v.convert_to<long long>();
  return v.str();
}

// ---------------------------------------------------------------------------
// Integer matrices

class ZMat {
 public:
  ZMat() = default;
  ZMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("ZMat: negative dimension");
  }
  ZMat(std::initializer_list<std::initializer_list<long long>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != cols_) throw std::invalid_argument("ZMat: ragged rows");
      for (long long v : r) a_.emplace_back(v);
    }
  }

  static ZMat identity(int n) {
    ZMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  /// Column vector with the given entries.
  static ZMat column(std::initializer_list<long long> v) {
    ZMat m(static_cast<int>(v.size()), 1);
    int i = 0;
    for (long long x : v) m(i++, 0) = x;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  BigInt& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const BigInt& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const BigInt& v) { return v == 0; });
  }

  ZMat transpose() const {
    ZMat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void swap_rows(int i, int j) {
    for (int k = 0; k < cols_; ++k) std::swap((*this)(i, k), (*this)(j, k));
  }
  void swap_cols(int i, int j) {
    for (int k = 0; k < rows_; ++k) std::swap((*this)(k, i), (*this)(k, j));
  }
  /// row_i += f * row_j
  void add_row(int i, int j, const BigInt& f) {
    for (int k = 0; k < cols_; ++k) (*this)(i, k) += f * (*this)(j, k);
  }
  /// col_i += f * col_j
  void add_col(int i, int j, const BigInt& f) {
    for (int k = 0; k < rows_; ++k) (*this)(k, i) += f * (*this)(k, j);
  }
  void negate_row(int i) {
    for (int k = 0; k < cols_; ++k) (*this)(i, k) = -(*this)(i, k);
  }

  friend ZMat operator*(const ZMat& a, const ZMat& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("ZMat: dimension mismatch in product");
    ZMat c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend bool operator==(const ZMat&, const ZMat&) = default;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<BigInt> a_;
};

/// Exact determinant by fraction-free (Bareiss) elimination.
inline BigInt determinant(const ZMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix is not square");
  const int n = m.rows();
  if (n == 0) return 1;
  ZMat a = m;
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      int p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

inline nlohmann::json to_json(const ZMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(to_json(m(i, j)));
    rows.push_back(r);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
}

struct SmithForm {
  ZMat D, U, V;  // D = U * m * V

  /// Nonzero diagonal entries d1 | d2 | ... (all positive).
  std::vector<BigInt> invariant_factors() const {
    std::vector<BigInt> out;
    for (int i = 0; i < std::min(D.rows(), D.cols()); ++i)
      if (D(i, i) != 0) out.push_back(D(i, i));
    return out;
  }
  int rank() const { return static_cast<int>(invariant_factors().size()); }
};

/// Smith normal form with unimodular transforms.
inline SmithForm smith_normal_form(const ZMat& m) {
  const int r = m.rows(), c = m.cols();
  SmithForm s{m, ZMat::identity(r), ZMat::identity(c)};
  ZMat& A = s.D;
  using boost::multiprecision::abs;
  for (int t = 0; t < std::min(r, c); ++t) {
    // Pivot: smallest nonzero magnitude in the remaining block.
    int pi = -1, pj = -1;
    for (int i = t; i < r; ++i)
      for (int j = t; j < c; ++j)
        if (A(i, j) != 0 && (pi < 0 || abs(A(i, j)) < abs(A(pi, pj)))) pi = i, pj = j;
    if (pi < 0) break;
    A.swap_rows(t, pi);
    s.U.swap_rows(t, pi);
    A.swap_cols(t, pj);
    s.V.swap_cols(t, pj);

    for (;;) {
      bool again = false;
      for (int i = t + 1; i < r; ++i) {
        if (A(i, t) == 0) continue;
        const BigInt q = A(i, t) / A(t, t);
        A.add_row(i, t, -q);
        s.U.add_row(i, t, -q);
        if (A(i, t) != 0) {
          A.swap_rows(t, i);
          s.U.swap_rows(t, i);
          again = true;
        }
      }
      for (int j = t + 1; j < c; ++j) {
        if (A(t, j) == 0) continue;
        const BigInt q = A(t, j) / A(t, t);
        A.add_col(j, t, -q);
        s.V.add_col(j, t, -q);
        if (A(t, j) != 0) {
          A.swap_cols(t, j);
          s.V.swap_cols(t, j);
          again = true;
        }
      }
      if (again) continue;
      // Row and column cleared; enforce divisibility of the rest by the pivot.
      int bad = -1;
      for (int i = t + 1; i < r && bad < 0; ++i)
        for (int j = t + 1; j < c; ++j)
          if (A(i, j) % A(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      A.add_row(t, bad, 1);
      s.U.add_row(t, bad, 1);
    }
    if (A(t, t) < 0) {
      A.negate_row(t);
      s.U.negate_row(t);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Finitely generated abelian groups

/// Z^free + Z/d1 + ... + Z/dk with d1 | d2 | ... | dk, each di >= 2.
struct AbGroup {
  int free = 0;
  std::vector<BigInt> torsion;

  static AbGroup zero() { return {}; }
  static AbGroup Z(int n = 1) { return {n, {}}; }

  /// Canonical form of a direct sum of cyclic groups; order 0 means Z.
  static AbGroup from_cyclic(const std::vector<BigInt>& orders) {
    const int n = static_cast<int>(orders.size());
    ZMat d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = orders[i];
    AbGroup g;
    const auto s = smith_normal_form(d);
    for (int i = 0; i < n; ++i) {
      if (s.D(i, i) == 0) ++g.free;
      else if (s.D(i, i) > 1) g.torsion.push_back(s.D(i, i));
    }
    return g;
  }

  bool is_free() const { return torsion.empty(); }
  bool is_trivial() const { return free == 0 && torsion.empty(); }

  friend bool operator==(const AbGroup&, const AbGroup&) = default;
};

inline AbGroup direct_sum(const AbGroup& a, const AbGroup& b) {
  std::vector<BigInt> orders(static_cast<std::size_t>(a.free + b.free), BigInt(0));
  orders.insert(orders.end(), a.torsion.begin(), a.torsion.end());
  orders.insert(orders.end(), b.torsion.begin(), b.torsion.end());
  return AbGroup::from_cyclic(orders);
}

inline std::string to_string(const AbGroup& g) {
  if (g.is_trivial()) return "0";
  std::vector<std::string> parts;
  if (g.free == 1) parts.push_back("Z");
  if (g.free > 1) parts.push_back("Z^" + std::to_string(g.free));
  for (const auto& d : g.torsion) parts.push_back("Z/" + d.str());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " + " : "") + parts[i];
  return out;
}

inline nlohmann::json to_json(const AbGroup& g) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& d : g.torsion) t.push_back(to_json(d));
  return {{"free", g.free}, {"torsion", t}};
}

struct KerCoker {
  AbGroup ker;
  AbGroup coker;
};

/// Kernel and cokernel of m viewed as a map Z^cols -> Z^rows.
inline KerCoker hom_kernel_cokernel(const ZMat& m) {
  const auto s = smith_normal_form(m);
  const auto f = s.invariant_factors();
  const int r = static_cast<int>(f.size());
  KerCoker out{AbGroup::Z(m.cols() - r), AbGroup::Z(m.rows() - r)};
  for (const auto& d : f)
    if (d > 1) out.coker.torsion.push_back(d);
  return out;
}

/// Rank over Q.
inline int rational_rank(const ZMat& m) { return smith_normal_form(m).rank(); }

// ---------------------------------------------------------------------------
// Spaces and their K-groups

struct KGroups {
  AbGroup k0;
  AbGroup k1;
  friend bool operator==(const KGroups&, const KGroups&) = default;
};

inline nlohmann::json to_json(const KGroups& k) { return {{"K0", to_json(k.k0)}, {"K1", to_json(k.k1)}}; }

inline std::string to_string(const KGroups& k) { return "(" + to_string(k.k0) + ", " + to_string(k.k1) + ")"; }

/// One suspension: K_j(C0(X x R)) = K_{j+1}(C0(X)).
inline KGroups shift(const KGroups& k, int n) {
  return (n % 2 == 0) ? k : KGroups{k.k1, k.k0};
}

class SpaceExpr {
 public:
  enum class Kind { Point, Euclid, Sphere, Punctured, HalfLine, Product, DisjointUnion };

  static SpaceExpr point() { return SpaceExpr(Kind::Point, 0); }
  static SpaceExpr euclid(int n) { return SpaceExpr(Kind::Euclid, positive(n)); }
  static SpaceExpr sphere(int n) { return SpaceExpr(Kind::Sphere, positive(n)); }
  static SpaceExpr punctured(int n) { return SpaceExpr(Kind::Punctured, positive(n)); }
  static SpaceExpr half_line() { return SpaceExpr(Kind::HalfLine, 1); }
  static SpaceExpr product(SpaceExpr a, SpaceExpr b) { return SpaceExpr(Kind::Product, std::move(a), std::move(b)); }
  static SpaceExpr disjoint_union(SpaceExpr a, SpaceExpr b) {
    return SpaceExpr(Kind::DisjointUnion, std::move(a), std::move(b));
  }

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  const SpaceExpr& left() const { return *l_; }
  const SpaceExpr& right() const { return *r_; }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Point: return "pt";
      case Kind::Euclid: return n_ == 1 ? "R" : "R^" + std::to_string(n_);
      case Kind::Sphere: return "S^" + std::to_string(n_);
      case Kind::Punctured: return (n_ == 1 ? std::string("R") : "R^" + std::to_string(n_)) + "\\{0}";
      case Kind::HalfLine: return "R+";
      case Kind::Product: return wrap(*l_) + " x " + wrap(*r_);
      case Kind::DisjointUnion: return wrap(*l_) + " u " + wrap(*r_);
    }
    return "?";
  }

 private:
  friend KGroups space_k_groups(const SpaceExpr&);

  SpaceExpr(Kind k, int n) : kind_(k), n_(n) {}
  SpaceExpr(Kind k, SpaceExpr a, SpaceExpr b)
      : kind_(k), l_(std::make_shared<const SpaceExpr>(std::move(a))),
        r_(std::make_shared<const SpaceExpr>(std::move(b))) {}

  /// S^0 appears only as the sphere factor of R \ {0}.
  static SpaceExpr sphere_any(int n) { return SpaceExpr(Kind::Sphere, n); }

  static int positive(int n) {
    if (n < 1) throw std::invalid_argument("SpaceExpr: dimension must be at least 1");
    return n;
  }
  static std::string wrap(const SpaceExpr& e) {
    const bool compound = e.kind_ == Kind::Product || e.kind_ == Kind::DisjointUnion;
    return compound ? "(" + e.to_string() + ")" : e.to_string();
  }

  Kind kind_;
  int n_ = 0;
  std::shared_ptr<const SpaceExpr> l_, r_;
};

namespace detail {

/// Euclidean dimension when the expression is R^k or R+, for the Bott shift.
inline std::optional<int> euclid_dim(const SpaceExpr& e) {
  if (e.kind() == SpaceExpr::Kind::Euclid) return e.n();
  if (e.kind() == SpaceExpr::Kind::HalfLine) return 1;
  return std::nullopt;
}

}  // namespace detail

/// K-groups of C0(X) (C(X) for spheres, as unital algebras).
inline KGroups space_k_groups(const SpaceExpr& x) {
  using K = SpaceExpr::Kind;
  switch (x.kind()) {
    case K::Point: return {AbGroup::Z(), AbGroup::zero()};
    case K::Euclid:
    case K::HalfLine: return shift(space_k_groups(SpaceExpr::point()), *detail::euclid_dim(x));
    case K::Sphere:
      return x.n() % 2 == 0 ? KGroups{AbGroup::Z(2), AbGroup::zero()} : KGroups{AbGroup::Z(), AbGroup::Z()};
    case K::Punctured:
      return space_k_groups(SpaceExpr::product(SpaceExpr::sphere_any(x.n() - 1), SpaceExpr::euclid(1)));
    case K::DisjointUnion: {
      const auto a = space_k_groups(x.left()), b = space_k_groups(x.right());
      return {direct_sum(a.k0, b.k0), direct_sum(a.k1, b.k1)};
    }
    case K::Product: {
      if (const auto k = detail::euclid_dim(x.right())) return shift(space_k_groups(x.left()), *k);
      if (const auto k = detail::euclid_dim(x.left())) return shift(space_k_groups(x.right()), *k);
      const auto a = space_k_groups(x.left()), b = space_k_groups(x.right());
      if (!a.k0.is_free() || !a.k1.is_free() || !b.k0.is_free() || !b.k1.is_free())
        throw UnsupportedExpr("Kunneth formula with torsion is not supported: " + x.to_string());
      return {AbGroup::Z(a.k0.free * b.k0.free + a.k1.free * b.k1.free),
              AbGroup::Z(a.k0.free * b.k1.free + a.k1.free * b.k0.free)};
    }
  }
  throw UnsupportedExpr("unknown space expression");
}

// ---------------------------------------------------------------------------
// Six-term exact sequence

/// Corner groups of 0 -> J -> A -> B -> 0 with the connecting maps
/// delta0: K0(B) -> K1(J) and delta1: K1(B) -> K0(J).
struct SixTermInput {
  KGroups J;
  KGroups B;
  ZMat delta0;
  ZMat delta1;
};

/// Exactness data at one node: the incoming and outgoing maps compose to zero
/// and their rational ranks add up to the rank of the node.
struct ExactnessEntry {
  std::string node;
  bool composition_zero = false;
  int rank_in = 0;
  int rank_out = 0;
  int rank_node = 0;
  bool exact() const { return composition_zero && rank_in + rank_out == rank_node; }
};

struct SixTermSolution {
  KGroups middle;
  std::vector<ExactnessEntry> certificate;
  bool exact() const {
    return std::all_of(certificate.begin(), certificate.end(), [](const auto& e) { return e.exact(); });
  }
};

namespace detail {

/// A group presented on generators with orders (0 for Z), so maps into it are
/// integer matrices read modulo the orders.
struct Presented {
  std::vector<BigInt> orders;
  int size() const { return static_cast<int>(orders.size()); }
  int free_rank() const {
    return static_cast<int>(std::count(orders.begin(), orders.end(), BigInt(0)));
  }
};

inline Presented free_presented(int n) { return {std::vector<BigInt>(static_cast<std::size_t>(n), BigInt(0))}; }

/// Cokernel of m on generators: the rows of U that survive the Smith form,
/// giving the projection Z^rows -> coker.
inline std::pair<Presented, ZMat> cokernel_projection(const ZMat& m) {
  const auto s = smith_normal_form(m);
  const int diag = std::min(m.rows(), m.cols());
  Presented p;
  std::vector<int> rows;
  for (int i = 0; i < m.rows(); ++i) {
    const BigInt d = i < diag ? s.D(i, i) : BigInt(0);
    if (d == 1) continue;
    p.orders.push_back(d);
    rows.push_back(i);
  }
  ZMat proj(static_cast<int>(rows.size()), m.rows());
  for (int k = 0; k < static_cast<int>(rows.size()); ++k)
    for (int j = 0; j < m.rows(); ++j) proj(k, j) = s.U(rows[k], j);
  return {p, proj};
}

/// Basis of ker m as the columns of V past the rank.
inline ZMat kernel_basis(const ZMat& m) {
  const auto s = smith_normal_form(m);
  const int r = s.rank();
  ZMat k(m.cols(), m.cols() - r);
  for (int i = 0; i < m.cols(); ++i)
    for (int j = r; j < m.cols(); ++j) k(i, j - r) = s.V(i, j);
  return k;
}

inline bool zero_modulo(const ZMat& m, const Presented& target) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      const BigInt& d = target.orders[i];
      if (d == 0 ? m(i, j) != 0 : m(i, j) % d != 0) return false;
    }
  return true;
}

/// Rank over Q of a map between presented groups: torsion generators drop out.
inline int map_rank(const ZMat& m, const Presented& source, const Presented& target) {
  std::vector<int> ri, ci;
  for (int i = 0; i < target.size(); ++i)
    if (target.orders[i] == 0) ri.push_back(i);
  for (int j = 0; j < source.size(); ++j)
    if (source.orders[j] == 0) ci.push_back(j);
  ZMat sub(static_cast<int>(ri.size()), static_cast<int>(ci.size()));
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ci.size(); ++j) sub(static_cast<int>(i), static_cast<int>(j)) = m(ri[i], ci[j]);
  return rational_rank(sub);
}

/// [a | b] stacked vertically.
inline ZMat vstack(const ZMat& a, const ZMat& b) {
  ZMat out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) out(a.rows() + i, j) = b(i, j);
  return out;
}

}  // namespace detail

/// K0(A) = coker delta1 + ker delta0, K1(A) = coker delta0 + ker delta1; the
/// middle extensions split because kernels of maps between free groups are
/// free. The certificate builds the six maps explicitly and checks each node.
/// With `known_middle`, a different result throws InconsistentInput.
inline SixTermSolution six_term_solve(const SixTermInput& in, const std::optional<KGroups>& known_middle = {}) {
  for (const auto* g : {&in.J.k0, &in.J.k1, &in.B.k0, &in.B.k1})
    if (!g->is_free()) throw UnsupportedExpr("six_term_solve: corner groups must be free");
  const int j0 = in.J.k0.free, j1 = in.J.k1.free, b0 = in.B.k0.free, b1 = in.B.k1.free;
  if (in.delta0.rows() != j1 || in.delta0.cols() != b0)
    throw InconsistentInput("delta0 must be a " + std::to_string(j1) + "x" + std::to_string(b0) + " matrix");
  if (in.delta1.rows() != j0 || in.delta1.cols() != b1)
    throw InconsistentInput("delta1 must be a " + std::to_string(j0) + "x" + std::to_string(b1) + " matrix");

  const auto kc0 = hom_kernel_cokernel(in.delta0), kc1 = hom_kernel_cokernel(in.delta1);
  SixTermSolution sol;
  sol.middle = {direct_sum(kc1.coker, kc0.ker), direct_sum(kc0.coker, kc1.ker)};

  // Explicit maps on the presentations A0 = coker d1 + ker d0, A1 = coker d0 + ker d1.
  using detail::Presented;
  const auto [c1, p1] = detail::cokernel_projection(in.delta1);
  const auto [c0, p0] = detail::cokernel_projection(in.delta0);
  const ZMat k0 = detail::kernel_basis(in.delta0), k1 = detail::kernel_basis(in.delta1);
  Presented A0 = c1, A1 = c0;
  A0.orders.insert(A0.orders.end(), static_cast<std::size_t>(k0.cols()), BigInt(0));
  A1.orders.insert(A1.orders.end(), static_cast<std::size_t>(k1.cols()), BigInt(0));
  const Presented J0 = detail::free_presented(j0), J1 = detail::free_presented(j1);
  const Presented B0 = detail::free_presented(b0), B1 = detail::free_presented(b1);

  const ZMat i0 = detail::vstack(p1, ZMat(k0.cols(), j0));         // K0(J) -> K0(A)
  ZMat mu0(b0, A0.size());                                          // K0(A) -> K0(B)
  for (int i = 0; i < b0; ++i)
    for (int j = 0; j < k0.cols(); ++j) mu0(i, c1.size() + j) = k0(i, j);
  const ZMat i1 = detail::vstack(p0, ZMat(k1.cols(), j1));         // K1(J) -> K1(A)
  ZMat mu1(b1, A1.size());                                          // K1(A) -> K1(B)
  for (int i = 0; i < b1; ++i)
    for (int j = 0; j < k1.cols(); ++j) mu1(i, c0.size() + j) = k1(i, j);

  const auto node = [](std::string name, const ZMat& f, const Presented& fs, const ZMat& g, const Presented& gt,
                       const Presented& n) {
    return ExactnessEntry{std::move(name), detail::zero_modulo(g * f, gt), detail::map_rank(f, fs, n),
                          detail::map_rank(g, n, gt), n.free_rank()};
  };
  sol.certificate = {
      node("K0(J)", in.delta1, B1, i0, A0, J0), node("K0(A)", i0, J0, mu0, B0, A0),
      node("K0(B)", mu0, A0, in.delta0, J1, B0), node("K1(J)", in.delta0, B0, i1, A1, J1),
      node("K1(A)", i1, J1, mu1, B1, A1),       node("K1(B)", mu1, A1, in.delta1, J0, B1),
  };
  if (!sol.exact()) throw InconsistentInput("six_term_solve: exactness certificate failed");
  if (known_middle && *known_middle != sol.middle)
    throw InconsistentInput("connecting maps give middle groups " + to_string(sol.middle) +
                            " but the middle algebra has " + to_string(*known_middle));
  return sol;
}

inline nlohmann::json to_json(const ExactnessEntry& e) {
  return {{"node", e.node},         {"composition_zero", e.composition_zero}, {"rank_in", e.rank_in},
          {"rank_out", e.rank_out}, {"rank_node", e.rank_node},               {"exact", e.exact()}};
}

// ---------------------------------------------------------------------------
// C*-algebra descriptors

class CStarDescriptor {
 public:
  enum class Kind { StableFunctions, Functions, CrossedByRn, ExtensionClass };

  static CStarDescriptor stable_functions(SpaceExpr x) { return CStarDescriptor(Kind::StableFunctions, std::move(x)); }
  static CStarDescriptor functions(SpaceExpr x) { return CStarDescriptor(Kind::Functions, std::move(x)); }
  static CStarDescriptor crossed_by_rn(CStarDescriptor inner, int n) {
    if (n < 1) throw std::invalid_argument("crossed_by_rn: n must be at least 1");
    if (inner.crossed_depth() >= 2) throw UnsupportedExpr("crossed products nested deeper than 2");
    CStarDescriptor d(Kind::CrossedByRn, inner.space_);
    d.inner_ = std::make_shared<const CStarDescriptor>(std::move(inner));
    d.n_ = n;
    return d;
  }
  static CStarDescriptor extension_class(CStarDescriptor J, CStarDescriptor B, ZMat delta0, ZMat delta1) {
    CStarDescriptor d(Kind::ExtensionClass, J.space_);
    d.ext_j_ = std::make_shared<const CStarDescriptor>(std::move(J));
    d.inner_ = std::make_shared<const CStarDescriptor>(std::move(B));
    d.delta0_ = std::move(delta0);
    d.delta1_ = std::move(delta1);
    return d;
  }

  Kind kind() const { return kind_; }
  const SpaceExpr& space() const { return space_; }
  const CStarDescriptor& inner() const { return *inner_; }
  int n() const { return n_; }

  int crossed_depth() const {
    if (kind_ == Kind::CrossedByRn) return 1 + inner_->crossed_depth();
    if (kind_ == Kind::ExtensionClass) return std::max(ext_j_->crossed_depth(), inner_->crossed_depth());
    return 0;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::StableFunctions: return "C0(" + space_.to_string() + ") (x) K";
      case Kind::Functions: return "C0(" + space_.to_string() + ")";
      case Kind::CrossedByRn:
        return "(" + inner_->to_string() + ") x| R" + (n_ == 1 ? "" : "^" + std::to_string(n_));
      case Kind::ExtensionClass: return "Ext(" + inner_->to_string() + ", " + ext_j_->to_string() + ")";
    }
    return "?";
  }

  /// Stabilization leaves K-theory unchanged; crossed products by R^n shift
  /// the degree by n (Thom-Connes); an extension is solved by six_term_solve.
  KGroups k_groups() const;

 private:

  CStarDescriptor(Kind k, SpaceExpr x) : kind_(k), space_(std::move(x)) {}

  Kind kind_;
  SpaceExpr space_;
  std::shared_ptr<const CStarDescriptor> inner_;
  int n_ = 0;
  std::shared_ptr<const CStarDescriptor> ext_j_;  // J of an extension; inner_ holds B
  ZMat delta0_, delta1_;
};

inline KGroups CStarDescriptor::k_groups() const {
  switch (kind_) {
    case Kind::StableFunctions:
    case Kind::Functions: return space_k_groups(space_);
    case Kind::CrossedByRn: return shift(inner_->k_groups(), n_);
    case Kind::ExtensionClass:
      return six_term_solve(SixTermInput{ext_j_->k_groups(), inner_->k_groups(), delta0_, delta1_}).middle;
  }
  throw UnsupportedExpr("unknown descriptor");
}

inline KGroups descriptor_k_groups(const CStarDescriptor& d) { return d.k_groups(); }

// ---------------------------------------------------------------------------
// Index invariant

struct ConsistencyFact {
  std::string fact;
  bool holds = false;
};

struct ExtReport {
  std::string ext_group;    // e.g. Hom(Z, Z^2)
  AbGroup ext_as_group;     // free of rank b0*j1 + b1*j0
  ZMat delta0, delta1;
  ZMat delta0_normal_form;  // representative of the basis-change orbit
  ZMat delta1_normal_form;
  std::vector<ConsistencyFact> consistency;
};

namespace detail {

inline std::string hom_text(const AbGroup& a, const AbGroup& b) {
  return "Hom(" + to_string(a) + ", " + to_string(b) + ")";
}

}  // namespace detail

/// Ext(B, J) = Hom(K0(B), K1(J)) + Hom(K1(B), K0(J)) for free K-groups, the
/// class (delta0, delta1), its orbit under GL changes of basis (Smith form),
/// and the constraints exactness places on it. With `known_middle`, any
/// violated constraint throws InconsistentInput.
inline ExtReport index_invariant(const CStarDescriptor& J, const CStarDescriptor& B, const ZMat& delta0,
                                 const ZMat& delta1, const std::optional<KGroups>& known_middle = {}) {
  const KGroups kj = J.k_groups(), kb = B.k_groups();
  for (const auto* g : {&kj.k0, &kj.k1, &kb.k0, &kb.k1})
    if (!g->is_free()) throw UnsupportedExpr("index_invariant: Ext decomposition needs free K-groups");
  const auto sol = six_term_solve({kj, kb, delta0, delta1});

  ExtReport r;
  std::vector<std::string> parts;
  if (kb.k0.free * kj.k1.free > 0) parts.push_back(detail::hom_text(kb.k0, kj.k1));
  if (kb.k1.free * kj.k0.free > 0) parts.push_back(detail::hom_text(kb.k1, kj.k0));
  for (std::size_t i = 0; i < parts.size(); ++i) r.ext_group += (i ? " + " : "") + parts[i];
  if (parts.empty()) r.ext_group = "0";
  r.ext_as_group = AbGroup::Z(kb.k0.free * kj.k1.free + kb.k1.free * kj.k0.free);
  r.delta0 = delta0;
  r.delta1 = delta1;
  r.delta0_normal_form = smith_normal_form(delta0).D;
  r.delta1_normal_form = smith_normal_form(delta1).D;

  const auto kc0 = hom_kernel_cokernel(delta0);
  r.consistency = {
      {"delta0 injective", kc0.ker.is_trivial()},
      {"delta0 image primitive", kc0.coker.is_free()},
      {"delta1 zero", delta1.is_zero()},
  };
  if (known_middle) {
    const bool match = sol.middle == *known_middle;
    r.consistency.push_back({"middle K-groups match " + to_string(*known_middle), match});
    if (!match)
      throw InconsistentInput("connecting maps give middle groups " + to_string(sol.middle) +
                              " but the middle algebra has " + to_string(*known_middle));
  }
  return r;
}

/// Whether two classes lie in one orbit of GL(K(B)) x GL(K(J)).
inline bool gl_equivalent(const ZMat& a, const ZMat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && smith_normal_form(a).D == smith_normal_form(b).D;
}

inline nlohmann::json to_json(const ExtReport& r) {
  nlohmann::json facts = nlohmann::json::array();
  for (const auto& f : r.consistency) facts.push_back({{"fact", f.fact}, {"holds", f.holds}});
  return {{"ext_group", r.ext_group},
          {"ext_as_group", to_json(r.ext_as_group)},
          {"ext_class", {{"delta0", to_json(r.delta0)}, {"delta1", to_json(r.delta1)}}},
          {"gl_normal_form", {{"delta0", to_json(r.delta0_normal_form)}, {"delta1", to_json(r.delta1_normal_form)}}},
          {"consistency", facts}};
}

// ---------------------------------------------------------------------------
// The extension of the type-F2 Connes algebra

struct Scenario {
  std::string name;
  CStarDescriptor J;
  CStarDescriptor B;
  ZMat delta0;
  ZMat delta1;
  CStarDescriptor thom_connes_middle;  // C0(V) x| R^2
  bool enforce_middle = false;
};

inline CStarDescriptor thom_connes_middle() {
  using S = SpaceExpr;
  return CStarDescriptor::crossed_by_rn(CStarDescriptor::functions(S::product(S::euclid(2), S::punctured(3))), 2);
}

/// J = C0(U) x| R^2 with U = R^2 x R^2 x (R \ {0}); B = C0(W) x| R^2 with
/// W = R^2 x (R^2 \ {0}); the middle algebra is C0(V) x| R^2.
inline Scenario paper_scenario(ZMat delta0 = ZMat::column({1, 1})) {
  using S = SpaceExpr;
  using D = CStarDescriptor;
  return {"paper",
          D::crossed_by_rn(D::functions(S::product(S::euclid(2), S::product(S::euclid(2), S::punctured(1)))), 2),
          D::crossed_by_rn(D::functions(S::product(S::euclid(2), S::punctured(2))), 2),
          std::move(delta0),
          ZMat(0, 1),
          thom_connes_middle(),
          true};
}

/// J = C0(R^3 u R^3) (x) K and B = C0(R x R+) (x) K from the fibrations over
/// the leaf spaces.
inline Scenario fibration_scenario(ZMat delta0 = ZMat::column({1, 1})) {
  using S = SpaceExpr;
  using D = CStarDescriptor;
  return {"fibration",
          D::stable_functions(S::disjoint_union(S::euclid(3), S::euclid(3))),
          D::stable_functions(S::product(S::euclid(1), S::half_line())),
          std::move(delta0),
          ZMat(0, 0),
          thom_connes_middle(),
          false};
}

struct ScenarioReport {
  std::string scenario;
  KGroups J, B;
  std::string J_text, B_text;
  SixTermSolution solution;
  ExtReport ext;
  KGroups thom_connes;
  bool middle_matches_thom_connes = false;
};

inline ScenarioReport analyze(const Scenario& s) {
  ScenarioReport r;
  r.scenario = s.name;
  r.J = s.J.k_groups();
  r.B = s.B.k_groups();
  r.J_text = s.J.to_string();
  r.B_text = s.B.to_string();
  r.thom_connes = s.thom_connes_middle.k_groups();
  const std::optional<KGroups> known = s.enforce_middle ? std::optional(r.thom_connes) : std::nullopt;
  r.solution = six_term_solve({r.J, r.B, s.delta0, s.delta1}, known);
  r.ext = index_invariant(s.J, s.B, s.delta0, s.delta1, known);
  r.middle_matches_thom_connes = r.solution.middle == r.thom_connes;
  return r;
}

inline nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json cert = nlohmann::json::array();
  for (const auto& e : r.solution.certificate) cert.push_back(to_json(e));
  nlohmann::json consistency = to_json(r.ext)["consistency"];
  consistency.push_back({{"fact", "middle agrees with C0(V) x| R^2 " + to_string(r.thom_connes)},
                         {"holds", r.middle_matches_thom_connes}});
  return {{"schema", 1},
          {"scenario", r.scenario},
          {"algebras", {{"J", r.J_text}, {"B", r.B_text}}},
          {"corners", {{"K0(J)", to_json(r.J.k0)}, {"K1(J)", to_json(r.J.k1)}, {"K0(B)", to_json(r.B.k0)},
                       {"K1(B)", to_json(r.B.k1)}}},
          {"delta0", to_json(r.ext.delta0)},
          {"delta1", to_json(r.ext.delta1)},
          {"middle", to_json(r.solution.middle)},
          {"thom_connes_middle", to_json(r.thom_connes)},
          {"ext_group", r.ext.ext_group},
          {"ext_class", to_json(r.ext)["ext_class"]},
          {"gl_normal_form", to_json(r.ext)["gl_normal_form"]},
          {"certificate", cert},
          {"consistency", consistency}};
}

/// Six-term diagram as a 2 x 3 grid with arrows.
inline std::string render_six_term(const ScenarioReport& r) {
  const std::string a = "K0(J) = " + to_string(r.J.k0), b = "K0(A) = " + to_string(r.solution.middle.k0),
                    c = "K0(B) = " + to_string(r.B.k0);
  const std::string d = "K1(J) = " + to_string(r.J.k1), e = "K1(A) = " + to_string(r.solution.middle.k1),
                    f = "K1(B) = " + to_string(r.B.k1);
  std::size_t w = 0;
  for (const auto* s : {&a, &b, &c, &d, &e, &f}) w = std::max(w, s->size());
  const auto cell = [w](const std::string& s) { return s + std::string(w - s.size(), ' '); };
  const std::size_t right = 2 * w + 10;
  std::ostringstream os;
  os << cell(a) << " --> " << cell(b) << " --> " << c << "\n";
  os << "^" << std::string(right - 1, ' ') << "| delta0\n";
  os << "| delta1" << std::string(right - 8, ' ') << "v\n";
  os << cell(f) << " <-- " << cell(e) << " <-- " << d << "\n";
  return os.str();
}

}  // namespace md53c
