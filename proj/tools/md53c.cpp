#include "md53c/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  using namespace md53c;
  CLI::App app{"Coadjoint orbits, foliations and K-theory of MD(5,3C) groups"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  int samples = 0;
  std::string output, format = "json";
  app.add_option("--seed", cfg.seed, "sampling seed")->envname("MD53C_SEED");
  app.add_option("--samples", samples, "samples per check (default 1000, 10000 for MD checks)")
      ->envname("MD53C_SAMPLES");
  app.add_option("--tol-rank", cfg.tol_rank, "Kirillov rank tolerance")->envname("MD53C_TOL_RANK");
  app.add_option("--tol-leaf", cfg.tol_leaf, "same-leaf tolerance")->envname("MD53C_TOL_LEAF");
  app.add_option("--tol-map", cfg.tol_map, "same-leaf tolerance for mapped pairs")->envname("MD53C_TOL_MAP");
  app.add_option("--output,-o", output, "write the report here instead of stdout")->envname("MD53C_OUTPUT");
  app.add_option("--format", format, "json or text")
      ->check(CLI::IsMember({"json", "text"}))
      ->envname("MD53C_FORMAT");

  app.add_subcommand("catalog", "list the eight families over the parameter grid");
  app.add_subcommand("verify-md", "check the MD dichotomy of Kirillov ranks on the grid");
  auto* orbit = app.add_subcommand("orbit", "evaluate the orbit chart and a flow word at a point");
  std::string family, point, word;
  double l1 = 0, l2 = 0, l = 0, phi = 0, y = 0;
  orbit->add_option("--family", family, "F1..F8")->required()->envname("MD53C_FAMILY");
  auto* o_l1 = orbit->add_option("--lambda1", l1)->envname("MD53C_LAMBDA1");
  auto* o_l2 = orbit->add_option("--lambda2", l2)->envname("MD53C_LAMBDA2");
  auto* o_l = orbit->add_option("--lambda", l)->envname("MD53C_LAMBDA");
  auto* o_phi = orbit->add_option("--phi", phi, "radians")->envname("MD53C_PHI");
  orbit->add_option("--point", point, "a,b,c,d,e")->required()->envname("MD53C_POINT");
  auto* o_y = orbit->add_option("--y", y, "chart coordinate y (default: beta of the point)")->envname("MD53C_Y");
  orbit->add_option("--a", cfg.a, "chart coordinate a")->envname("MD53C_A");
  auto* o_word = orbit->add_option("--word", word, "flow word, e.g. 2:0.5,1:-1")->envname("MD53C_WORD");
  app.add_subcommand("classify", "check the h-maps and the two fibration types");
  auto* kt = app.add_subcommand("ktheory", "six-term sequences and the index invariant");
  kt->add_option("--scenario", cfg.scenario, "paper, fibration or both")
      ->check(CLI::IsMember({"paper", "fibration", "both"}))
      ->envname("MD53C_SCENARIO");
  app.add_subcommand("verify-claims", "run every check and summarise the claims");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.count("--samples")) cfg.samples = samples;
    cfg.format = format == "text" ? Format::Text : Format::Json;
    if (orbit->parsed()) {
      cfg.family = family;
      cfg.point = point;
      if (o_l1->count()) cfg.lambda1 = l1;
      if (o_l2->count()) cfg.lambda2 = l2;
      if (o_l->count()) cfg.lambda = l;
      if (o_phi->count()) cfg.phi = phi;
      if (o_word->count()) cfg.word = word;
      if (o_y->count()) cfg.y = y;
    }
    const Command cmd = command_from_string(app.get_subcommands().front()->get_name());
    const RunResult r = run(cmd, cfg);
    if (output.empty()) {
      std::cout << r.text;
    } else {
      std::ofstream out(output, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + output);
      out << r.text;
    }
    if (r.exit_code != 0) std::cerr << "md53c: " << count_failures(r.report) << " check failures\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "md53c: " << e.what() << "\n";
    return 2;
  }
}
