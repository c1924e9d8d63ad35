#pragma once

#include "md53c/catalog.hpp"
#include "md53c/coadjoint.hpp"
#include "md53c/foliation.hpp"
#include "md53c/ktheory.hpp"

#include <json.hpp>

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace md53c {

enum class Command { Catalog, VerifyMd, Orbit, Classify, KTheory, VerifyClaims };
enum class Format { Json, Text };

inline Command command_from_string(const std::string& s) {
  static const std::map<std::string, Command> table = {
      {"catalog", Command::Catalog},   {"verify-md", Command::VerifyMd}, {"orbit", Command::Orbit},
      {"classify", Command::Classify}, {"ktheory", Command::KTheory},    {"verify-claims", Command::VerifyClaims}};
  const auto it = table.find(s);
  if (it == table.end()) throw std::invalid_argument("unknown command: " + s);
  return it->second;
}

struct RunConfig {
  std::uint64_t seed = 1729;
  std::optional<int> samples;  // default 1000 per check, 10000 for MD checks
  double tol_rank = 1e-9;
  double tol_leaf = 1e-8;
  double tol_map = 1e-6;       // same-leaf tolerance for images under equivalence maps
  Format format = Format::Json;

  // orbit
  std::optional<std::string> family;
  std::optional<double> lambda1, lambda2, lambda, phi;
  std::optional<std::string> point;
  std::optional<double> y;  // defaults to the point's beta
  double a = 0.0;
  std::optional<std::string> word;

  // ktheory
  std::string scenario = "both";

  int samples_or(int fallback) const { return samples.value_or(fallback); }

  void validate() const {
    if (samples && *samples < 1) throw std::invalid_argument("samples must be at least 1");
    if (!(tol_rank > 0) || !(tol_leaf > 0) || !(tol_map > 0))
      throw std::invalid_argument("tolerances must be positive");
    if (scenario != "paper" && scenario != "fibration" && scenario != "both")
      throw std::invalid_argument("scenario must be paper, fibration or both");
  }
};

/// Roundtrip tolerance for the equivalence maps.
inline constexpr double kRoundTripTol = 1e-9;

struct RunResult {
  nlohmann::json report;
  std::string text;
  int exit_code = 0;
};

// ---------------------------------------------------------------------------
// Parsing helpers

inline std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    const auto* b = item.data();
    const auto* e = b + item.size();
    while (b < e && *b == ' ') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw std::invalid_argument("not a real number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// "a,b,c,d,e" -> Cov5.
inline Cov5 parse_point(const std::string& s) {
  const auto v = parse_reals(s);
  if (v.size() != 5) throw std::invalid_argument("point needs 5 comma-separated reals");
  return {v[0], v[1], v[2], v[3], v[4]};
}

/// "2:0.5,1:-1" -> [(2, 0.5), (1, -1)].
inline FlowWord parse_word(const std::string& s) {
  FlowWord w;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("flow step must be index:time, got '" + item + "'");
    const auto idx = parse_reals(item.substr(0, colon));
    const auto t = parse_reals(item.substr(colon + 1));
    const int i = static_cast<int>(idx.at(0));
    if (idx.at(0) != i || i < 1 || i > kDim) throw std::invalid_argument("flow direction must be 1..5");
    w.push_back({i, t.at(0)});
  }
  return w;
}

inline FamilySpec family_from_config(const RunConfig& c) {
  if (!c.family) throw std::invalid_argument("--family is required");
  FamilySpec s{family_from_string(*c.family), c.lambda1, c.lambda2, c.lambda, c.phi};
  validate(s);
  return s;
}

/// Number of entries in every "failures" array of a report tree.
inline std::size_t count_failures(const nlohmann::json& j) {
  std::size_t n = 0;
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "failures" && it->is_array()) n += it->size();
      else n += count_failures(*it);
    }
  } else if (j.is_array()) {
    for (const auto& e : j) n += count_failures(e);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Checks shared by the commands

inline nlohmann::json catalog_report(const GridSpec& grid = GridSpec::defaults()) {
  nlohmann::json entries = nlohmann::json::array(), failures = nlohmann::json::array();
  for (const auto& spec : list_catalog(grid)) {
    const auto sc = build_algebra(spec);
    const Mat block = ad_matrix(sc, 2).block(2, 2, 3, 3);
    const Eigen::Matrix3d printed = ad_x2_block(spec);
    const double defect = jacobi_defect(sc);
    const auto derived = derived_subalgebra(sc);
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({block(i, 0), block(i, 1), block(i, 2)});
    const bool matches = (block - Mat(printed)).cwiseAbs().maxCoeff() == 0.0;
    entries.push_back({{"family", to_string(spec.family)},
                       {"params", params_json(spec)},
                       {"description", describe(spec)},
                       {"ad_x2_block", rows},
                       {"jacobi_defect", defect},
                       {"derived_dimension", derived.dimension},
                       {"derived_commutative", derived.commutative}});
    if (defect > 1e-12 || derived.dimension != 3 || !derived.commutative || !matches)
      failures.push_back({{"family", describe(spec)}, {"jacobi_defect", defect},
                          {"derived_dimension", derived.dimension}, {"printed_block", matches}});
  }
  return {{"schema", 1},
          {"check", "catalog"},
          {"families", {"F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8"}},
          {"count", entries.size()},
          {"entries", entries},
          {"failures", failures}};
}

/// Points reached by random flow words stay on the leaf of the base point.
inline nlohmann::json orbit_formula_report(const FamilySpec& spec, int n, std::uint64_t seed, double tol) {
  const auto sc = build_algebra(spec);
  nlohmann::json failures = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    SampleStream rng(seed, 0x6f72, static_cast<std::uint64_t>(i));
    Cov5 f{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto mask = rng.below(8);
    if (mask & 1) f.gamma = 0;
    if (mask & 2) f.delta = 0;
    if (mask & 4) f.sigma = 0;
    FlowWord word;
    const auto len = rng.below(7);
    for (std::uint64_t k = 0; k < len; ++k)
      word.push_back({1 + static_cast<int>(rng.below(5)), rng.uniform(-1.5, 1.5)});
    const Cov5 g = coadjoint_flow(sc, f, word);
    if (!same_leaf(spec, f, g, tol)) failures.push_back({{"F", to_json(f)}, {"flowed", to_json(g)}});
  }
  return {{"schema", 1},   {"check", "orbit_formula"}, {"family", to_string(spec.family)},
          {"params", params_json(spec)}, {"samples", n}, {"seed", seed},
          {"tol", tol},    {"failures", failures}};
}

inline nlohmann::json verify_md_report(const RunConfig& c) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& spec : list_catalog())
    reports.push_back(to_json(md_property_check(spec, c.samples_or(10000), c.seed, c.tol_rank)));
  return {{"schema", 1}, {"check", "verify-md"}, {"seed", c.seed}, {"reports", reports}};
}

inline nlohmann::json classify_report(const RunConfig& c) {
  const int n = c.samples_or(1000);
  nlohmann::json types = nlohmann::json::array(), checks = nlohmann::json::array();
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& spec : list_catalog()) {
    members[to_string(foliation_type(spec))].push_back(describe(spec));
    if (spec.family == Family::F4) continue;
    checks.push_back(to_json(verify_classification(spec, n, c.seed, c.tol_map, kRoundTripTol)));
  }
  for (const auto& [type, fams] : members)
    types.push_back({{"type", type},
                     {"representative", describe(type == "F1" ? FamilySpec::f4() : f8_reference())},
                     {"families", fams}});
  nlohmann::json fib = nlohmann::json::array();
  for (auto t : {FoliationType::F1, FoliationType::F2})
    fib.push_back(to_json(fibration_check(t, n, c.seed, c.tol_leaf)));
  return {{"schema", 1},       {"check", "classify"}, {"seed", c.seed}, {"type_count", types.size()},
          {"types", types},    {"classifications", checks}, {"fibrations", fib}};
}

inline nlohmann::json ktheory_report(const RunConfig& c) {
  using S = SpaceExpr;
  nlohmann::json fixtures = nlohmann::json::array();
  const std::vector<std::pair<std::string, S>> spaces = {
      {"I = C0(R^2 x (R \\ {0}))", S::product(S::euclid(2), S::punctured(1))},
      {"A = C0(R^2 \\ {0})", S::punctured(2)},
      {"C0(R^3 \\ {0})", S::punctured(3)},
      {"C*(F1) = C0(R x S^2) (x) K", S::product(S::euclid(1), S::sphere(2))},
  };
  for (const auto& [name, x] : spaces) {
    const auto k = space_k_groups(x);
    fixtures.push_back({{"name", name}, {"space", x.to_string()}, {"K0", to_json(k.k0)}, {"K1", to_json(k.k1)}});
  }
  nlohmann::json scenarios = nlohmann::json::array();
  std::vector<ScenarioReport> solved;
  if (c.scenario != "fibration") solved.push_back(analyze(paper_scenario()));
  if (c.scenario != "paper") solved.push_back(analyze(fibration_scenario()));
  for (const auto& r : solved) scenarios.push_back(to_json(r));
  nlohmann::json out = {{"schema", 1}, {"check", "ktheory"}, {"fixtures", fixtures}, {"scenarios", scenarios}};
  if (solved.size() == 2)
    out["ambiguity"] = {
        {"flagged", solved[0].solution.middle != solved[1].solution.middle},
        {"K0_agree", solved[0].solution.middle.k0 == solved[1].solution.middle.k0},
        {"ext_class_agree", solved[0].ext.delta0 == solved[1].ext.delta0 && solved[0].ext.ext_group == solved[1].ext.ext_group},
        {"K1_middle", {{"paper", to_string(solved[0].solution.middle.k1)},
                       {"fibration", to_string(solved[1].solution.middle.k1)}}},
        {"note", "K1(B) is 0 when B = C0(R x R+) (x) K and Z when B = C0(W) x| R^2; the Ext class is the same "
                 "because K0(J) = 0, but K1 of the middle algebra differs"}};
  return out;
}

inline nlohmann::json orbit_report(const RunConfig& c) {
  const FamilySpec spec = family_from_config(c);
  if (!c.point) throw std::invalid_argument("--point is required");
  const Cov5 f = parse_point(*c.point);
  const auto sc = build_algebra(spec);
  const auto chart = orbit_chart(spec, f);
  const double y = c.y.value_or(f.beta);
  const Cov5 at = chart.eval(y, c.a);
  nlohmann::json out = {{"schema", 1},
                        {"check", "orbit"},
                        {"family", to_string(spec.family)},
                        {"params", params_json(spec)},
                        {"point", to_json(f)},
                        {"kirillov_dim", kirillov_form_rank(sc, f, c.tol_rank).dim},
                        {"chart", {{"y", y}, {"a", c.a}, {"value", to_json(at)}}}};
  nlohmann::json failures = nlohmann::json::array();
  if (!same_leaf(spec, f, at, c.tol_leaf)) failures.push_back({{"kind", "chart"}, {"value", to_json(at)}});
  if (c.word) {
    const FlowWord w = parse_word(*c.word);
    const Cov5 g = coadjoint_flow(sc, f, w);
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : w) steps.push_back({s.direction, s.time});
    const bool on = same_leaf(spec, f, g, c.tol_leaf);
    out["flow"] = {{"word", steps}, {"value", to_json(g)}, {"same_leaf", on}};
    if (!on) failures.push_back({{"kind", "flow"}, {"value", to_json(g)}});
  }
  if (in_V(f) && (spec.family == Family::F4 || is_f8_reference(spec)))
    out["leaf_invariant"] = to_json(leaf_invariant(foliation_type(spec), f));
  out["failures"] = failures;
  return out;
}

// ---------------------------------------------------------------------------
// Claims

struct Claim {
  std::string id;
  std::string paper_location;
  std::string status;  // verified | discrepancy | out_of_scope
  std::string details;
};

inline nlohmann::json to_json(const Claim& c) {
  return {{"id", c.id}, {"paper_location", c.paper_location}, {"status", c.status}, {"details", c.details}};
}

namespace detail {

inline std::string status_of(bool ok) { return ok ? "verified" : "discrepancy"; }

inline std::string fmt_complex(std::complex<double> z) {
  const auto clean = [](double v) { return is_zero(v) ? 0.0 : v; };
  const double re = clean(z.real()), im = clean(z.imag());
  return format_double(re) + (im < 0 ? " - " : " + ") + format_double(std::abs(im)) + "i";
}

inline std::string fmt_point(const Cov5& p) {
  std::ostringstream os;
  os << "(" << format_double(p.alpha) << ", " << format_double(p.beta) << ", " << format_double(p.gamma) << ", "
     << format_double(p.delta) << ", " << format_double(p.sigma) << ")";
  return os.str();
}

/// Printed two-dimensional-orbit conditions against the Kirillov rank.
struct ConditionScan {
  int samples = 0;
  int disagreements = 0;
  std::optional<Cov5> example;
};

inline ConditionScan scan_condition(const std::vector<FamilySpec>& specs, int n, std::uint64_t seed,
                                    double tol, bool (*printed)(const Cov5&)) {
  ConditionScan out;
  for (const auto& spec : specs) {
    const auto sc = build_algebra(spec);
    for (int i = 0; i < n; ++i) {
      SampleStream rng(seed, 0x636f, static_cast<std::uint64_t>(i));
      Cov5 f{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const auto mask = rng.below(16);
      if (mask & 1) f.beta = 0;
      if (mask & 2) f.gamma = 0;
      if (mask & 4) f.delta = 0;
      if (mask & 8) f.sigma = 0;
      ++out.samples;
      if ((kirillov_form_rank(sc, f, tol).dim == 2) != printed(f)) {
        ++out.disagreements;
        if (!out.example) out.example = f;
      }
    }
  }
  return out;
}

}  // namespace detail

inline RunResult run(Command cmd, const RunConfig& c);

inline nlohmann::json verify_claims_report(const RunConfig& c) {
  const int n = c.samples_or(1000);
  const int n_md = c.samples_or(10000);
  std::vector<Claim> claims;

  // Algebras.
  const auto catalog = catalog_report();
  claims.push_back({"md53c-families", "classification of MD(5,3C) algebras, the eight ad_{X2} matrices",
                    detail::status_of(catalog["failures"].empty()),
                    std::to_string(catalog["count"].get<int>()) +
                        " grid entries: brackets satisfy Jacobi to 1e-12, derived ideal is 3-dimensional and "
                        "commutative, ad_{X2} on the ideal equals the printed matrix"});

  // Orbits.
  const auto md = verify_md_report({c.seed, n_md, c.tol_rank});
  claims.push_back({"md-dichotomy", "definition of MD-groups and the orbit description",
                    detail::status_of(count_failures(md) == 0),
                    "Kirillov rank is 0 or 2 on " + std::to_string(n_md) +
                        " functionals per grid entry, and 2 exactly when (gamma, delta, sigma) != 0"});

  std::vector<FamilySpec> first_seven, eighth;
  for (const auto& s : list_catalog()) (s.family == Family::F8 ? eighth : first_seven).push_back(s);
  const auto printed_17 = [](const Cov5& f) {
    return f.beta * f.beta + f.gamma * f.gamma + f.delta * f.delta + f.sigma * f.sigma != 0.0;
  };
  const auto scan17 = detail::scan_condition(first_seven, 200, c.seed, c.tol_rank, +printed_17);
  claims.push_back(
      {"orbit-condition-families-1-7", "orbit description for families 1-7, two-dimensional case",
       scan17.disagreements ? "discrepancy" : "verified",
       "printed condition beta^2+gamma^2+delta^2+sigma^2 != 0 disagrees with the Kirillov rank on " +
           std::to_string(scan17.disagreements) + " of " + std::to_string(scan17.samples) + " samples" +
           (scan17.example ? ", e.g. F = " + detail::fmt_point(*scan17.example) + " has rank 0" : std::string()) +
           "; the rank gives (gamma, delta, sigma) != 0, which is what C0(V) = C0(R^2 x (R^3 \\ {0})) needs"});

  const auto printed_8 = [](const Cov5& f) { return f.beta * f.beta + f.gamma * f.gamma != 0.0 && f.sigma != 0.0; };
  const auto scan8 = detail::scan_condition(eighth, 200, c.seed, c.tol_rank, +printed_8);
  const FamilySpec ref = f8_reference();
  const Cov5 base{0, 0, 1, 0, 1};
  const Cov5 shifted{1, 0, 1, 0, 1};
  const bool x_free = same_leaf(ref, base, shifted, c.tol_leaf);
  claims.push_back(
      {"orbit-family-8", "orbit description for family 8, two-dimensional case",
       (scan8.disagreements || !x_free) ? "discrepancy" : "verified",
       "printed condition beta^2+gamma^2 != 0 != sigma disagrees with the Kirillov rank on " +
           std::to_string(scan8.disagreements) + " of " + std::to_string(scan8.samples) + " samples" +
           (scan8.example ? ", e.g. F = " + detail::fmt_point(*scan8.example) : std::string()) +
           "; the printed set leaves the first coordinate free, but " + detail::fmt_point(shifted) +
           (x_free ? " is" : " is not") + " on the orbit through " + detail::fmt_point(base) +
           ", whose first coordinate follows x - sin(a) gamma - (1 - cos a) delta"});

  nlohmann::json orbit_reports = nlohmann::json::array();
  for (const auto& s : list_catalog()) orbit_reports.push_back(orbit_formula_report(s, n, c.seed, 1e-8));
  claims.push_back({"orbit-charts", "orbit description, closed-form parametrizations",
                    detail::status_of(count_failures(orbit_reports) == 0),
                    "points reached by random flow words of up to 6 steps lie on the chart leaf of the base "
                    "point (tolerance 1e-8, " + std::to_string(n) + " per grid entry)"});
  claims.push_back({"measurable-foliation", "leaf-partition statement and its measure-theoretic content",
                    "out_of_scope",
                    "the partition of V into 2-dimensional orbits is exercised through same_leaf; measurability "
                    "of the foliation is not checked"});

  // Classification.
  RunConfig cc = c;
  cc.samples = n;
  const auto classify = classify_report(cc);
  std::map<std::string, bool> map_ok;
  std::vector<Discrepancy> map_disc;
  for (const auto& r : classify["classifications"]) {
    const std::string method = r["method"];
    const bool ok = r["failures"].empty();
    const std::string key = method.rfind("h5", 0) == 0 || method == "h3*h5" ? "h5" : method;
    map_ok.try_emplace(key, true);
    map_ok[key] = map_ok[key] && ok;
    for (const auto& d : r["discrepancies"])
      if (map_disc.empty()) map_disc.push_back({d["claim"], d["paper_location"], d["observed"]});
  }
  for (const std::string h : {"h1", "h2", "h3", "h6", "h7"})
    claims.push_back({"leaf-map-" + h, "topological classification proof, map " + h,
                      detail::status_of(map_ok.count(h) && map_ok[h]),
                      h + " carries same-leaf pairs to same-leaf pairs of family 4 and different leaves to "
                          "different leaves (tolerance " + format_double(c.tol_map) + "); inverse round-trips to 1e-9"});
  claims.push_back({"lambda-zero-half-planes", "topological classification proof, family 3 at lambda = 0",
                    detail::status_of(map_ok.count("lambda_zero_invariant") && map_ok["lambda_zero_invariant"]),
                    "no map is printed; the leaves are compared through the invariant (gamma, x + z ln|(t, s)|, "
                    "direction of (t, s)), which is constant on leaves and separates them"});
  {
    const bool composite_ok = map_ok.count("h5") && map_ok["h5"];
    const bool printed_fails = !map_disc.empty();
    claims.push_back({"leaf-map-h5", "topological classification proof, map h5",
                      printed_fails ? "discrepancy" : detail::status_of(composite_ok),
                      printed_fails ? map_disc.front().observed + (composite_ok ? " (composite verified on the grid)" : "")
                                    : "h5 carries leaves onto family 4 leaves"});
  }
  claims.push_back({"leaf-map-h8", "topological classification proof, map h8",
                    detail::status_of(map_ok.count("h8") && map_ok["h8"]),
                    "h8 carries leaves of family 8 onto leaves of family 8 at (1, pi/2) for pairs whose angle "
                    "stays 1e-3 away from the branch cut; inverse round-trips to 1e-9 on the sector |theta| < pi sin(phi)"});
  {
    const double phi = std::numbers::pi / 6;
    const auto wa = std::polar(1.0, -std::numbers::pi / 2);
    const auto wb = std::polar(std::exp(-2 * std::numbers::pi * std::cos(phi)),
                               -std::numbers::pi / 2 + 2 * std::numbers::pi * std::sin(phi));
    const Cov5 ia = hmap::h8(2, phi, {0, 0, wa.real(), wa.imag(), 1});
    const Cov5 ib = hmap::h8(2, phi, {0, 0, wb.real(), wb.imag(), 1});
    claims.push_back({"h8-homeomorphism", "topological classification proof, map h8", "out_of_scope",
                      "only leafwise behaviour is checked; with the principal argument the printed map is not "
                      "injective for sin(phi) < 1: at (lambda, phi) = (2, pi/6) the points with z + it = " +
                          detail::fmt_complex(wa) + " and " + detail::fmt_complex(wb) + " both map to w~ = " +
                          detail::fmt_complex(ia.w()) + " (difference " +
                          format_double(std::abs(ia.w() - ib.w())) + ")"});
  }
  claims.push_back({"two-types", "topological classification theorem",
                    detail::status_of(classify["type_count"] == 2 && count_failures(classify) == 0),
                    "grid families split into two classes, {F1..F7} equivalent to F4 and the family 8 grid "
                    "equivalent to F8(1, pi/2); that the two classes differ is not checked"});

  const auto& fibs = classify["fibrations"];
  claims.push_back({"fibration-type-f1", "topological classification theorem, type F1 is a fibration",
                    detail::status_of(fibs[0]["failures"].empty()),
                    "(x + z, (z, t, s)/|(z, t, s)|) is a complete leaf invariant of family 4 and agrees with "
                    "the spherical submersion p; leaf space R x S^2"});
  claims.push_back({"rho-action", "topological classification theorem, type F2 given by an action of R^2",
                    detail::status_of(fibs[1]["failures"].empty()),
                    "rho-orbits coincide with the leaves of family 8 at (1, pi/2); every chart point is "
                    "reached by an (r, a) recovered from the coordinates"});
  {
    const auto& d = fibs[1]["discrepancies"];
    claims.push_back({"submersion-p-on-U", "extension for the type-F2 foliation, submersion p on U",
                      d.empty() ? "verified" : "discrepancy",
                      d.empty() ? "printed p is constant on leaves"
                                : d[0]["observed"].get<std::string>()});
  }
  claims.push_back({"submersion-q-on-W", "extension for the type-F2 foliation, submersion q on W",
                    detail::status_of(fibs[1]["failures"].empty()),
                    "q = (x - r sin theta, r) takes equal values exactly on same-leaf pairs with s = 0"});

  // K-theory.
  RunConfig kc = c;
  kc.scenario = "both";
  const auto kt = ktheory_report(kc);
  const auto& fx = kt["fixtures"];
  const auto free_pair = [](const nlohmann::json& e, int k0, int k1) {
    return e["K0"]["free"] == k0 && e["K1"]["free"] == k1 && e["K0"]["torsion"].empty() && e["K1"]["torsion"].empty();
  };
  claims.push_back({"k-groups-of-pieces", "K-groups of I, A and C0(R^3 \\ {0})",
                    detail::status_of(free_pair(fx[0], 0, 2) && free_pair(fx[1], 1, 1) && free_pair(fx[2], 0, 2)),
                    "K(I) = (0, Z^2), K(A) = (Z, Z), K(C0(R^3 \\ {0})) = (0, Z^2) from Bott periodicity"});
  claims.push_back({"connes-algebra-type-f1", "Connes algebra of type-F1 foliations",
                    detail::status_of(free_pair(fx[3], 0, 2)), "C0(R x S^2) (x) K has K-groups (0, Z^2)"});
  const auto& paper = kt["scenarios"][0];
  bool consistent = true;
  for (const auto& f : paper["consistency"]) consistent = consistent && f["holds"].get<bool>();
  bool rejects_non_primitive = false;
  try {
    analyze(paper_scenario(ZMat::column({2, 2})));
  } catch (const InconsistentInput&) {
    rejects_non_primitive = true;
  }
  claims.push_back({"index-invariant", "index invariant of the type-F2 Connes algebra",
                    detail::status_of(consistent && rejects_non_primitive && paper["ext_group"] == "Hom(Z, Z^2)" &&
                                      paper["delta0"]["entries"] == nlohmann::json({{1}, {1}})),
                    "Ext(B, J) = " + paper["ext_group"].get<std::string>() +
                        ", class (delta0, delta1) = ((1, 1)^t, 0); exactness forces delta0 primitive, and (2, 2)^t " +
                        (rejects_non_primitive ? "is" : "is not") + " rejected"});
  claims.push_back({"delta0-source", "value of delta0 taken from an external result", "out_of_scope",
                    "delta0 = (1, 1)^t is used as given and only checked for consistency with exactness"});
  const auto& amb = kt["ambiguity"];
  claims.push_back({"k1-of-B", "extension theorem for C*(F2) and the final identified diagram",
                    amb["flagged"].get<bool>() ? "discrepancy" : "verified",
                    "B = C0(R x R+) (x) K gives K1(B) = 0 and middle K1 = " +
                        amb["K1_middle"]["fibration"].get<std::string>() +
                        ", while the diagram with K1(B) = Z (via C0(W) x| R^2) gives middle K1 = " +
                        amb["K1_middle"]["paper"].get<std::string>() +
                        "; K0 of the middle and the Ext class agree in both readings"});

  nlohmann::json cl = nlohmann::json::array();
  int discrepancies = 0;
  for (const auto& claim : claims) {
    cl.push_back(to_json(claim));
    if (claim.status == "discrepancy") ++discrepancies;
  }
  return {{"schema", 1},
          {"check", "verify-claims"},
          {"seed", c.seed},
          {"claims", cl},
          {"discrepancy_count", discrepancies},
          {"reports",
           {{"catalog", catalog}, {"verify_md", md}, {"orbit_formulas", orbit_reports}, {"classify", classify},
            {"ktheory", kt}}}};
}

// ---------------------------------------------------------------------------
// Text rendering

namespace detail {

inline std::string text_failures(const nlohmann::json& j) {
  return "failures: " + std::to_string(count_failures(j)) + "\n";
}

inline std::string render_text(Command cmd, const nlohmann::json& j) {
  std::ostringstream os;
  switch (cmd) {
    case Command::Catalog:
      for (const auto& e : j["entries"])
        os << e["description"].get<std::string>() << "  jacobi=" << e["jacobi_defect"].get<double>()
           << "  derived=" << e["derived_dimension"].get<int>()
           << (e["derived_commutative"].get<bool>() ? " commutative" : " noncommutative") << "\n";
      os << j["count"].get<int>() << " entries\n";
      break;
    case Command::VerifyMd:
      for (const auto& r : j["reports"])
        os << r["family"].get<std::string>() << " " << r["params"].dump() << "  samples=" << r["samples"].get<int>()
           << " dim0=" << r["dim0"].get<int>() << " dim2=" << r["dim2"].get<int>()
           << " failures=" << r["failures"].size() << "\n";
      break;
    case Command::Orbit:
      os << "point " << j["point"].dump() << "  kirillov dim " << j["kirillov_dim"].get<int>() << "\n";
      os << "chart(y=" << j["chart"]["y"].get<double>() << ", a=" << j["chart"]["a"].get<double>()
         << ") = " << j["chart"]["value"].dump() << "\n";
      if (j.contains("flow"))
        os << "flow " << j["flow"]["word"].dump() << " = " << j["flow"]["value"].dump()
           << (j["flow"]["same_leaf"].get<bool>() ? "  (same leaf)" : "  (OFF LEAF)") << "\n";
      if (j.contains("leaf_invariant")) os << "leaf invariant " << j["leaf_invariant"].dump() << "\n";
      break;
    case Command::Classify:
      for (const auto& t : j["types"]) {
        os << "type " << t["type"].get<std::string>() << " (" << t["representative"].get<std::string>() << "):";
        for (const auto& f : t["families"]) os << " " << f.get<std::string>();
        os << "\n";
      }
      for (const auto& r : j["classifications"])
        os << r["source"].get<std::string>() << " -> " << r["target"].get<std::string>() << " via "
           << r["method"].get<std::string>() << ": positive " << r["positive"].get<int>() << ", negative "
           << r["negative"].get<int>() << ", roundtrip " << r["roundtrip"].get<int>() << ", failures "
           << r["failures"].size() << ", discrepancies " << r["discrepancies"].size() << "\n";
      for (const auto& r : j["fibrations"])
        os << "fibration " << r["source"].get<std::string>() << ": positive " << r["positive"].get<int>()
           << ", negative " << r["negative"].get<int>() << ", failures " << r["failures"].size()
           << ", discrepancies " << r["discrepancies"].size() << "\n";
      break;
    case Command::KTheory:
      for (const auto& f : j["fixtures"])
        os << f["name"].get<std::string>() << ": K0 free " << f["K0"]["free"].get<int>() << ", K1 free "
           << f["K1"]["free"].get<int>() << "\n";
      for (const auto& s : j["scenarios"]) {
        os << "\nscenario " << s["scenario"].get<std::string>() << "\n";
        os << "  J = " << s["algebras"]["J"].get<std::string>() << "\n  B = " << s["algebras"]["B"].get<std::string>()
           << "\n";
        os << s["diagram"].get<std::string>();
        os << "  Ext(B, J) = " << s["ext_group"].get<std::string>() << "\n";
        for (const auto& f : s["consistency"])
          os << "  [" << (f["holds"].get<bool>() ? "x" : " ") << "] " << f["fact"].get<std::string>() << "\n";
      }
      if (j.contains("ambiguity") && j["ambiguity"]["flagged"].get<bool>())
        os << "\nambiguity: " << j["ambiguity"]["note"].get<std::string>() << "\n";
      break;
    case Command::VerifyClaims:
      for (const auto& c : j["claims"])
        os << "[" << c["status"].get<std::string>() << "] " << c["id"].get<std::string>() << ": "
           << c["details"].get<std::string>() << "\n";
      os << "discrepancies: " << j["discrepancy_count"].get<int>() << "\n";
      break;
  }
  os << text_failures(j);
  return os.str();
}

}  // namespace detail

/// Runs a command. Exit code 0 iff every failures array in the report is empty.
inline RunResult run(Command cmd, const RunConfig& c) {
  c.validate();
  RunResult r;
  switch (cmd) {
    case Command::Catalog: r.report = catalog_report(); break;
    case Command::VerifyMd: r.report = verify_md_report(c); break;
    case Command::Orbit: r.report = orbit_report(c); break;
    case Command::Classify: r.report = classify_report(c); break;
    case Command::KTheory: {
      r.report = ktheory_report(c);
      std::vector<ScenarioReport> solved;
      if (c.scenario != "fibration") solved.push_back(analyze(paper_scenario()));
      if (c.scenario != "paper") solved.push_back(analyze(fibration_scenario()));
      for (std::size_t i = 0; i < solved.size(); ++i)
        r.report["scenarios"][i]["diagram"] = render_six_term(solved[i]);
      break;
    }
    case Command::VerifyClaims: r.report = verify_claims_report(c); break;
  }
  r.exit_code = count_failures(r.report) == 0 ? 0 : 1;
  r.text = c.format == Format::Json ? r.report.dump(2) + "\n" : detail::render_text(cmd, r.report);
  return r;
}

}  // namespace md53c
