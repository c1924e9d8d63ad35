#include "md53c/ktheory.hpp"
#include "md53c/sampling.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace md53c;
using S = SpaceExpr;
using D = CStarDescriptor;

namespace {

using namespace md53c::oracle;

KGroups kg(int f0, int f1) { return {AbGroup::Z(f0), AbGroup::Z(f1)}; }

}  // namespace

TEST(Smith, Examples) {
  EXPECT_EQ(smith_normal_form(ZMat::column({1, 1})).D, ZMat::column({1, 0}));
  EXPECT_EQ(smith_normal_form(ZMat{{2, 4}, {6, 8}}).D, (ZMat{{2, 0}, {0, 4}}));
  EXPECT_EQ(smith_normal_form(ZMat(2, 3)).D, ZMat(2, 3));
  EXPECT_EQ(smith_normal_form(ZMat(0, 1)).D, ZMat(0, 1));
}

TEST(Smith, MatchesMinorGcdOracle) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    SampleStream rng(1729, 0x736e66, i);
    const ZMat m = random_zmat(rng);
    const auto s = smith_normal_form(m);
    EXPECT_EQ(s.U * m * s.V, s.D);
    EXPECT_EQ(abs(determinant(s.U)), 1);
    EXPECT_EQ(abs(determinant(s.V)), 1);
    EXPECT_EQ(abs(cofactor_det(s.U)), 1);
    for (int r = 0; r < s.D.rows(); ++r)
      for (int c = 0; c < s.D.cols(); ++c)
        if (r != c) EXPECT_EQ(s.D(r, c), 0);
    const auto f = s.invariant_factors();
    for (std::size_t k = 0; k + 1 < f.size(); ++k) EXPECT_EQ(f[k + 1] % f[k], 0);
    EXPECT_EQ(f, minor_gcd_factors(m));
  }
}

TEST(Smith, LargeEntriesStayExact) {
  ZMat m{{1000000007, 0}, {0, 998244353}};
  m(0, 0) *= BigInt("1000000000000000000000");
  const auto s = smith_normal_form(m);
  EXPECT_EQ(s.U * m * s.V, s.D);
  EXPECT_EQ(s.D(0, 0), 1);
  EXPECT_EQ(s.D(1, 1), m(0, 0) * 998244353);
}

TEST(Determinant, AgreesWithCofactors) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    SampleStream rng(3, 9, i);
    const int n = 1 + static_cast<int>(rng.below(4));
    ZMat m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = static_cast<long long>(rng.below(19)) - 9;
    EXPECT_EQ(determinant(m), cofactor_det(m));
  }
}

TEST(KerCoker, Examples) {
  const auto a = hom_kernel_cokernel(ZMat::column({1, 1}));
  EXPECT_EQ(a.ker, AbGroup::zero());
  EXPECT_EQ(a.coker, AbGroup::Z());
  const auto b = hom_kernel_cokernel(ZMat(0, 1));
  EXPECT_EQ(b.ker, AbGroup::Z());
  EXPECT_EQ(b.coker, AbGroup::zero());
  const auto c = hom_kernel_cokernel(ZMat{{2, 0}, {0, 3}});
  EXPECT_EQ(c.ker, AbGroup::zero());
  EXPECT_EQ(c.coker, (AbGroup{0, {6}}));
  EXPECT_EQ(to_string(hom_kernel_cokernel(ZMat::column({2, 2})).coker), "Z + Z/2");
}

TEST(AbGroup, CanonicalForm) {
  EXPECT_EQ(AbGroup::from_cyclic({2, 3}), (AbGroup{0, {6}}));
  EXPECT_EQ(AbGroup::from_cyclic({4, 6, 0, 1}), (AbGroup{1, {2, 12}}));
  EXPECT_EQ(direct_sum(AbGroup::Z(2), AbGroup::zero()), AbGroup::Z(2));
  EXPECT_EQ(to_json(AbGroup{1, {2}}).dump(), R"({"free":1,"torsion":[2]})");
}

TEST(SpaceK, PaperFixtures) {
  EXPECT_EQ(space_k_groups(S::punctured(3)), kg(0, 2));
  EXPECT_EQ(space_k_groups(S::product(S::euclid(2), S::punctured(1))), kg(0, 2));
  EXPECT_EQ(space_k_groups(S::punctured(2)), kg(1, 1));
  EXPECT_EQ(space_k_groups(S::product(S::euclid(1), S::sphere(2))), kg(0, 2));
  EXPECT_EQ(space_k_groups(S::point()), kg(1, 0));
  EXPECT_EQ(space_k_groups(S::half_line()), kg(0, 1));
  EXPECT_THROW(S::euclid(0), std::invalid_argument);
}

TEST(SpaceK, BottPeriodicityAndAdditivity) {
  const std::vector<S> samples = {S::point(), S::euclid(1), S::euclid(3), S::sphere(1), S::sphere(2),
                                  S::punctured(1), S::punctured(2), S::punctured(4), S::half_line(),
                                  S::product(S::sphere(1), S::sphere(2)),
                                  S::disjoint_union(S::sphere(3), S::euclid(2)),
                                  S::product(S::punctured(2), S::disjoint_union(S::point(), S::sphere(1)))};
  for (const auto& x : samples) {
    const auto k = space_k_groups(x);
    EXPECT_EQ(space_k_groups(S::product(x, S::euclid(2))), k) << x.to_string();
    EXPECT_EQ(space_k_groups(S::product(S::euclid(1), x)), shift(k, 1)) << x.to_string();
    for (const auto& y : samples) {
      const auto u = space_k_groups(S::disjoint_union(x, y)), ky = space_k_groups(y);
      EXPECT_EQ(u.k0.free, k.k0.free + ky.k0.free);
      EXPECT_EQ(u.k1.free, k.k1.free + ky.k1.free);
    }
  }
  for (int n = 2; n <= 4; ++n)
    EXPECT_EQ(space_k_groups(S::punctured(n)), space_k_groups(S::product(S::sphere(n - 1), S::euclid(1))));
  // n = 1: R \ {0} is two copies of R.
  EXPECT_EQ(space_k_groups(S::punctured(1)), space_k_groups(S::disjoint_union(S::euclid(1), S::euclid(1))));
}

TEST(SpaceK, KunnethOfSpheres) {
  // S^1 x S^1: (Z^2, Z^2); S^2 x S^2: (Z^4, 0).
  EXPECT_EQ(space_k_groups(S::product(S::sphere(1), S::sphere(1))), kg(2, 2));
  EXPECT_EQ(space_k_groups(S::product(S::sphere(2), S::sphere(2))), kg(4, 0));
}

TEST(Descriptors, Examples) {
  EXPECT_EQ(descriptor_k_groups(D::stable_functions(S::product(S::euclid(1), S::sphere(2)))), kg(0, 2));
  EXPECT_EQ(descriptor_k_groups(thom_connes_middle()), kg(0, 2));
  EXPECT_EQ(descriptor_k_groups(D::stable_functions(S::disjoint_union(S::euclid(3), S::euclid(3)))), kg(0, 2));
  const auto once = D::crossed_by_rn(D::functions(S::euclid(1)), 1);
  EXPECT_EQ(descriptor_k_groups(once), kg(1, 0));
  EXPECT_THROW(D::crossed_by_rn(D::crossed_by_rn(once, 1), 1), UnsupportedExpr);
  const auto ext = D::extension_class(D::stable_functions(S::disjoint_union(S::euclid(3), S::euclid(3))),
                                      D::stable_functions(S::product(S::euclid(1), S::half_line())),
                                      ZMat::column({1, 1}), ZMat(0, 0));
  EXPECT_EQ(descriptor_k_groups(ext), kg(0, 1));
}

TEST(SixTerm, Examples) {
  const auto paper = six_term_solve({kg(0, 2), kg(1, 1), ZMat::column({1, 1}), ZMat(0, 1)});
  EXPECT_EQ(paper.middle, kg(0, 2));
  EXPECT_TRUE(paper.exact());
  const auto fib = six_term_solve({kg(0, 2), kg(1, 0), ZMat::column({1, 1}), ZMat(0, 0)});
  EXPECT_EQ(fib.middle, kg(0, 1));
  EXPECT_EQ(six_term_solve({kg(0, 0), kg(0, 0), ZMat(0, 0), ZMat(0, 0)}).middle, kg(0, 0));
  EXPECT_THROW(six_term_solve({kg(0, 2), kg(1, 1), ZMat::column({1, 1, 1}), ZMat(0, 1)}), InconsistentInput);
  EXPECT_THROW(six_term_solve({kg(0, 2), kg(1, 1), ZMat::column({1, 0}), ZMat(0, 1)}, kg(1, 1)),
               InconsistentInput);
  EXPECT_THROW(six_term_solve({{AbGroup{0, {2}}, AbGroup::zero()}, kg(0, 0), ZMat(0, 0), ZMat(0, 0)}),
               UnsupportedExpr);
}

// Independent exactness check by Euler characteristic: for an exact cyclic
// sequence the alternating sum of ranks is zero, and each middle rank is fixed
// by the ranks of the connecting maps.
TEST(SixTerm, RandomInputsSatisfyRankArithmetic) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    SampleStream rng(11, 12, i);
    const int j0 = static_cast<int>(rng.below(4)), j1 = static_cast<int>(rng.below(4));
    const int b0 = static_cast<int>(rng.below(4)), b1 = static_cast<int>(rng.below(4));
    ZMat d0(j1, b0), d1(j0, b1);
    for (int r = 0; r < j1; ++r)
      for (int c = 0; c < b0; ++c) d0(r, c) = static_cast<long long>(rng.below(7)) - 3;
    for (int r = 0; r < j0; ++r)
      for (int c = 0; c < b1; ++c) d1(r, c) = static_cast<long long>(rng.below(7)) - 3;
    const auto sol = six_term_solve({kg(j0, j1), kg(b0, b1), d0, d1});
    EXPECT_TRUE(sol.exact());
    const int r0 = rational_rank(d0), r1 = rational_rank(d1);
    EXPECT_EQ(sol.middle.k0.free, (j0 - r1) + (b0 - r0));
    EXPECT_EQ(sol.middle.k1.free, (j1 - r0) + (b1 - r1));
    EXPECT_EQ(j0 - sol.middle.k0.free + b0 - j1 + sol.middle.k1.free - b1, 0);
    ZMat torsion_check = d0;
    EXPECT_EQ(sol.middle.k1.torsion, hom_kernel_cokernel(torsion_check).coker.torsion);
  }
}

TEST(IndexInvariant, PaperData) {
  const auto s = paper_scenario();
  const auto r = index_invariant(s.J, s.B, s.delta0, s.delta1, s.thom_connes_middle.k_groups());
  EXPECT_EQ(r.ext_group, "Hom(Z, Z^2)");
  EXPECT_EQ(r.ext_as_group, AbGroup::Z(2));
  EXPECT_EQ(r.delta0, ZMat::column({1, 1}));
  EXPECT_EQ(r.delta1, ZMat(0, 1));
  for (const auto& f : r.consistency) EXPECT_TRUE(f.holds) << f.fact;
}

TEST(IndexInvariant, NonPrimitiveRejectedAndBasisChange) {
  const auto s = paper_scenario();
  const auto middle = s.thom_connes_middle.k_groups();
  EXPECT_THROW(index_invariant(s.J, s.B, ZMat::column({2, 2}), s.delta1, middle), InconsistentInput);
  const auto r = index_invariant(s.J, s.B, ZMat::column({1, 0}), s.delta1, middle);
  EXPECT_TRUE(gl_equivalent(ZMat::column({1, 0}), ZMat::column({1, 1})));
  EXPECT_FALSE(gl_equivalent(ZMat::column({2, 2}), ZMat::column({1, 1})));
  EXPECT_EQ(r.delta0_normal_form, smith_normal_form(ZMat::column({1, 1})).D);
  // Without the known middle the non-primitive class is reported, not rejected.
  const auto loose = index_invariant(s.J, s.B, ZMat::column({2, 2}), s.delta1);
  EXPECT_FALSE(loose.consistency[1].holds);
}

TEST(Scenarios, AgreeOnK0AndExtDifferOnK1) {
  const auto p = analyze(paper_scenario());
  const auto f = analyze(fibration_scenario());
  EXPECT_EQ(p.J, kg(0, 2));
  EXPECT_EQ(p.B, kg(1, 1));
  EXPECT_EQ(f.B, kg(1, 0));
  EXPECT_EQ(p.solution.middle, kg(0, 2));
  EXPECT_EQ(f.solution.middle, kg(0, 1));
  EXPECT_EQ(p.solution.middle.k0, f.solution.middle.k0);
  EXPECT_EQ(p.ext.ext_group, f.ext.ext_group);
  EXPECT_EQ(p.ext.delta0, f.ext.delta0);
  EXPECT_TRUE(p.middle_matches_thom_connes);
  EXPECT_FALSE(f.middle_matches_thom_connes);
  EXPECT_THROW(analyze(paper_scenario(ZMat::column({2, 2}))), InconsistentInput);
  EXPECT_EQ(to_json(p).dump(), to_json(analyze(paper_scenario())).dump());
}

TEST(Scenarios, DiagramText) {
  const std::string text = render_six_term(analyze(paper_scenario()));
  EXPECT_NE(text.find("Z^2"), std::string::npos);
  EXPECT_NE(text.find("delta0"), std::string::npos);
}
