#include "md53c/foliation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace md53c;

namespace {

constexpr double pi = std::numbers::pi;

void expect_cov_near(const Cov5& got, const Cov5& want, double tol) {
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(got[k], want[k], tol) << "coordinate " << k;
}

Cov5 random_point(SampleStream& rng) {
  return {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3),
          rng.uniform(-3, 3)};
}

double invariant_distance(const LeafInvariant& a, const LeafInvariant& b) {
  if (a.index() != b.index()) return 1.0;
  if (const auto* x = std::get_if<InvF1>(&a)) {
    const auto& y = std::get<InvF1>(b);
    double d = std::abs(x->c - y.c);
    for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(x->u[k] - y.u[k]));
    return d;
  }
  if (const auto* x = std::get_if<InvF2U>(&a)) {
    const auto& y = std::get<InvF2U>(b);
    return x->eps != y.eps ? 1.0 : std::max(std::abs(x->c - y.c), std::abs(x->w - y.w));
  }
  const auto& x = std::get<InvF2W>(a);
  const auto& y = std::get<InvF2W>(b);
  return std::max(std::abs(x.c - y.c), std::abs(x.r - y.r));
}

}  // namespace

TEST(InV, Examples) {
  EXPECT_TRUE(in_V({0, 0, 0, 0, 1}));
  EXPECT_FALSE(in_V({0, 5, 0, 0, 0}));
  EXPECT_FALSE(in_V({0, 0, 0, 0, 0}));
}

TEST(LeafInvariant, Examples) {
  const auto f1 = std::get<InvF1>(leaf_invariant(FoliationType::F1, {1, 0, 1, 0, 0}));
  EXPECT_EQ(f1.c, 2.0);
  EXPECT_EQ(f1.u, (std::array<double, 3>{1, 0, 0}));

  const auto a = leaf_invariant(FoliationType::F2, {0, 0, 1, 0, 1});
  const auto b = leaf_invariant(FoliationType::F2, {0, 3, -1, 0, std::exp(pi)});
  EXPECT_TRUE(same_invariant(a, b, 1e-12));
  const auto u = std::get<InvF2U>(a);
  EXPECT_EQ(u.c, 0.0);
  EXPECT_EQ(u.w, std::complex<double>(1.0, 0.0));
  EXPECT_EQ(u.eps, 1);

  const auto w = std::get<InvF2W>(leaf_invariant(FoliationType::F2, {0, 0, 0, 2, 0}));
  EXPECT_EQ(w.c, -2.0);
  EXPECT_EQ(w.r, 2.0);

  EXPECT_THROW(leaf_invariant(FoliationType::F1, {1, 2, 0, 0, 0}), DomainError);
}

TEST(LeafInvariant, ConstantAlongCharts) {
  for (auto type : {FoliationType::F1, FoliationType::F2}) {
    const auto spec = type == FoliationType::F1 ? FamilySpec::f4() : f8_reference();
    for (std::uint64_t i = 0; i < 1000; ++i) {
      SampleStream rng(3, 1, i);
      Cov5 base = random_point(rng);
      if (rng.below(4) == 0) base.sigma = 0;
      const auto chart = orbit_chart(spec, base);
      const auto p = chart.eval(rng.uniform(-3, 3), rng.uniform(-2, 2));
      const auto q = chart.eval(rng.uniform(-3, 3), rng.uniform(-2, 2));
      EXPECT_TRUE(same_invariant(leaf_invariant(type, p), leaf_invariant(type, q), 1e-8));
    }
  }
}

TEST(LeafInvariant, DistinctInvariantsMeanDistinctLeaves) {
  for (auto type : {FoliationType::F1, FoliationType::F2}) {
    const auto spec = type == FoliationType::F1 ? FamilySpec::f4() : f8_reference();
    int compared = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      SampleStream rng(5, 2, i);
      Cov5 p = random_point(rng), q = random_point(rng);
      if (rng.below(3) == 0) p.sigma = q.sigma = 0;
      if (invariant_distance(leaf_invariant(type, p), leaf_invariant(type, q)) < 1e-4) continue;
      ++compared;
      EXPECT_FALSE(same_leaf(spec, p, q));
    }
    EXPECT_GT(compared, 900);
  }
}

TEST(LambdaZeroInvariant, CompleteOnFamily3) {
  const auto f3 = FamilySpec::f3(0);
  for (std::uint64_t i = 0; i < 500; ++i) {
    SampleStream rng(7, 3, i);
    Cov5 base = random_point(rng);
    if (rng.below(4) == 0) base.delta = base.sigma = 0;
    const auto chart = orbit_chart(f3, base);
    const Cov5 p = chart.eval(rng.uniform(-3, 3), rng.uniform(-2, 2));
    const Cov5 q = chart.eval(rng.uniform(-3, 3), rng.uniform(-2, 2));
    EXPECT_TRUE(same_invariant(lambda_zero_invariant(p), lambda_zero_invariant(q), 1e-8));
    const Cov5 r = random_point(rng);
    EXPECT_EQ(same_leaf(f3, p, r), same_invariant(lambda_zero_invariant(p), lambda_zero_invariant(r), 1e-8));
  }
}

TEST(Rho, Examples) {
  const Cov5 p{0.3, -1, 2, 0.5, 1.5};
  EXPECT_EQ(rho_apply(0, 0, p), p);
  expect_cov_near(rho_apply(3, pi, {0, 0, 1, 0, 1}), {0, 3, -1, 0, std::exp(pi)}, 1e-14);
}

TEST(Rho, ActionAxioms) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    SampleStream rng(9, 4, i);
    const Cov5 p = random_point(rng);
    const double r1 = rng.uniform(-3, 3), a1 = rng.uniform(-3, 3);
    const double r2 = rng.uniform(-3, 3), a2 = rng.uniform(-3, 3);
    expect_cov_near(rho_apply(r1, a1, rho_apply(r2, a2, p)), rho_apply(r1 + r2, a1 + a2, p),
                    1e-12 * std::max(1.0, std::exp(a1 + a2) * 3));
  }
  const Cov5 p{0.1, 0.2, 0.3, 0.4, 0.5};
  expect_cov_near(rho_apply(1, pi / 2, rho_apply(2, pi / 2, p)), rho_apply(3, pi, p), 1e-12 * 25);
}

TEST(Rho, OrbitsAreReferenceLeaves) {
  const auto spec = f8_reference();
  for (std::uint64_t i = 0; i < 200; ++i) {
    SampleStream rng(11, 5, i);
    Cov5 p = random_point(rng);
    const double y = rng.uniform(-3, 3), a = rng.uniform(-3, 3);
    Cov5 viaRho = rho_apply(y - p.beta, a, p);
    expect_cov_near(orbit_chart(spec, p).eval(y, a), viaRho, 1e-12 * std::max(1.0, std::exp(a) * 3));
  }
}

TEST(HMaps, PrintedExamples) {
  expect_cov_near(hmap::h1(2, 3, {1, 0, 4, 8, 2}), {4, 0, 2, 2, 2}, 1e-15);
  const Cov5 p{0.7, -1.2, 0, 0, 2.5};
  EXPECT_EQ(hmap::h7(p), p);
  EXPECT_EQ(hmap::h8(1, pi / 2, p), p);
  // Branch boundaries: t = z ln|z| routes to the t~ = 0 branch.
  const double z = 2.0;
  const Cov5 on{0, 0, z, z * std::log(z), 1.0};
  const Cov5 img = hmap::h7(on);
  EXPECT_EQ(img.delta, 0.0);
  EXPECT_DOUBLE_EQ(img.sigma, 1.0 - 0.5 * z * std::log(z) * std::log(z));
  expect_cov_near(hmap::h7_inv(img), on, 1e-14);
}

TEST(HMaps, LambdaZeroAndDomain) {
  EXPECT_THROW(hmap::h3(0.0, {1, 0, 1, 0, 0}), UnsupportedMap);
  EXPECT_THROW(equivalence_map(FamilySpec::f3(0)), UnsupportedMap);
  EXPECT_THROW(equivalence_map(FamilySpec::f5(0)), UnsupportedMap);
  const auto m = equivalence_map(FamilySpec::f1(2, 3));
  EXPECT_THROW(apply_equivalence(m, {1, 2, 0, 0, 0}, Direction::Forward), DomainError);
}

TEST(HMaps, RoundTripAwayFromBranches) {
  for (const auto& spec : list_catalog()) {
    const bool lambda_zero = (spec.family == Family::F3 || spec.family == Family::F5) && *spec.lambda == 0;
    const auto map = lambda_zero ? printed_map(spec.family == Family::F5 ? spec : FamilySpec::f4())
                                 : equivalence_map(spec);
    for (std::uint64_t i = 0; i < 300; ++i) {
      SampleStream rng(13, 6, i);
      Cov5 p{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.signed_magnitude(1e-3, 3),
             rng.signed_magnitude(1e-3, 3), rng.signed_magnitude(1e-3, 3)};
      if (spec.family == Family::F8) {
        const auto w = std::polar(rng.uniform(1e-3, 3), rng.uniform(-1, 1) * (pi * std::sin(*spec.phi) - 1e-3));
        p.gamma = w.real();
        p.delta = w.imag();
      }
      const Cov5 back = apply_equivalence(map, apply_equivalence(map, p, Direction::Forward), Direction::Inverse);
      double scale = 1;
      for (int k = 0; k < 5; ++k) scale = std::max(scale, std::abs(p[k]));
      expect_cov_near(back, p, 1e-9 * scale);
    }
  }
}

TEST(HMaps, H8IsNotInjectiveBelowRightAngle) {
  // Preimages of one w~ differ by the rotation of (0, 2 pi) in (ln r, theta).
  const double phi = pi / 6;
  const auto a = std::polar(1.0, -pi / 2);
  const auto b = std::polar(std::exp(-2 * pi * std::cos(phi)), -pi / 2 + 2 * pi * std::sin(phi));
  const Cov5 ia = hmap::h8(2, phi, {0, 0, a.real(), a.imag(), 1});
  const Cov5 ib = hmap::h8(2, phi, {0, 0, b.real(), b.imag(), 1});
  EXPECT_NEAR(ia.gamma, ib.gamma, 1e-12);
  EXPECT_NEAR(ia.delta, ib.delta, 1e-12);
  EXPECT_GT(std::abs(a - b), 0.9);
}

TEST(HMaps, H5LandsOnFamily3Leaves) {
  const auto f5 = FamilySpec::f5(2), f3 = FamilySpec::f3(2);
  const auto chart = orbit_chart(f5, {0.5, 0, 1.0, 0.8, -0.4});
  const Cov5 p = hmap::h5(chart.eval(0, 0.3)), q = hmap::h5(chart.eval(1, -0.7));
  EXPECT_TRUE(same_leaf(f3, p, q));
  EXPECT_FALSE(same_leaf(FamilySpec::f4(), p, q));
  EXPECT_TRUE(same_leaf(FamilySpec::f4(), hmap::h3(2, p), hmap::h3(2, q)));
}

TEST(HMaps, InducedLeafMapIsInjective) {
  for (const auto& spec : {FamilySpec::f1(-0.5, -3), FamilySpec::f7(), FamilySpec::f8(2, pi / 6)}) {
    const auto map = equivalence_map(spec);
    const auto type = foliation_type(spec);
    std::vector<Cov5> src;
    std::vector<LeafInvariant> img;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      SampleStream rng(17, 7, i);
      Cov5 p = random_point(rng);
      if (spec.family == Family::F8) {
        const auto w = std::polar(rng.uniform(0.05, 3), rng.uniform(-1, 1) * (pi * std::sin(*spec.phi) - 1e-3));
        p.gamma = w.real();
        p.delta = w.imag();
      }
      src.push_back(p);
      img.push_back(leaf_invariant(type, map.forward(p)));
    }
    for (std::size_t i = 0; i < src.size(); ++i)
      for (std::size_t j = i + 1; j < src.size(); ++j)
        if (same_invariant(img[i], img[j], 1e-9)) EXPECT_TRUE(same_leaf(spec, src[i], src[j])) << describe(spec);
  }
}

TEST(VerifyClassification, SpecExamples) {
  for (const auto& spec : {FamilySpec::f1(2, 3), FamilySpec::f8(2, pi / 6), FamilySpec::f4()}) {
    const auto r = verify_classification(spec, 1000, 1729);
    EXPECT_TRUE(r.ok()) << describe(spec) << " " << to_json(r).dump();
    EXPECT_EQ(r.positive, 1000);
    EXPECT_EQ(r.negative, 1000);
    EXPECT_EQ(r.roundtrip, 1000);
    EXPECT_TRUE(r.discrepancies.empty());
  }
}

TEST(VerifyClassification, WholeGridSmallSample) {
  for (const auto& spec : list_catalog()) {
    const auto r = verify_classification(spec, 150, 42);
    EXPECT_TRUE(r.ok()) << describe(spec) << " " << to_json(r).dump();
    EXPECT_EQ(r.discrepancies.size(), spec.family == Family::F5 ? 1u : 0u) << describe(spec);
  }
}

TEST(VerifyClassification, LambdaZeroUsesInvariants) {
  const auto r3 = verify_classification(FamilySpec::f3(0), 300, 5);
  EXPECT_EQ(r3.method, "lambda_zero_invariant");
  EXPECT_EQ(r3.roundtrip, 0);
  EXPECT_TRUE(r3.ok());
  const auto r5 = verify_classification(FamilySpec::f5(0), 300, 5);
  EXPECT_EQ(r5.method, "h5 then lambda_zero_invariant");
  EXPECT_EQ(r5.roundtrip, 300);
  EXPECT_TRUE(r5.ok());
}

TEST(FibrationCheck, BothTypes) {
  const auto f1 = fibration_check(FoliationType::F1, 1000, 1729);
  EXPECT_TRUE(f1.ok()) << to_json(f1).dump();
  EXPECT_EQ(f1.positive, 1000);
  EXPECT_EQ(f1.negative, 1000);
  EXPECT_TRUE(f1.discrepancies.empty());

  const auto f2 = fibration_check(FoliationType::F2, 1000, 1729);
  EXPECT_TRUE(f2.ok()) << to_json(f2).dump();
  EXPECT_EQ(f2.positive, 1000);
  EXPECT_EQ(f2.negative, 1000);
  EXPECT_EQ(f2.discrepancies.size(), 1u);
}

TEST(FibrationCheck, PrintedUSubmersionVariesAlongLeaf) {
  const Cov5 p{0, 0, 1, 0, 1};
  const Cov5 q = rho_apply(0, 1.0, p);
  EXPECT_FALSE(same_value(printed_p_u(p), printed_p_u(q), 1e-8));
  EXPECT_TRUE(same_value(corrected_p_u(p), corrected_p_u(q), 1e-12));
}

TEST(FibrationCheck, ReportJsonIsDeterministic) {
  EXPECT_EQ(to_json(fibration_check(FoliationType::F2, 200, 3)).dump(),
            to_json(fibration_check(FoliationType::F2, 200, 3)).dump());
}
