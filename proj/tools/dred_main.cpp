#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dred/commands.hpp"

namespace {

struct Common {
  std::string path;
  int samples = 20;
  std::uint64_t seed = 0xd5eed;
  std::string emit;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("problem", c.path, "problem file")->required();
  cmd->add_option("--samples", c.samples,
                  "sample count for the numeric verification half");
  cmd->add_option("--seed", c.seed, "seed for the numeric verification rng");
  cmd->add_option("--emit", c.emit,
                  "append a machine-readable dump of the key expressions")
      ->check(CLI::IsMember({"canonical"}));
}

dred::CommandOptions options_of(const Common& c) {
  dred::CommandOptions o;
  o.check.samples = c.samples;
  o.check.seed = c.seed;
  o.check.max_attempts = std::max(400, 4 * c.samples);
  o.emit = c.emit == "canonical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conservation-law reduction engine for PDE systems"};
  app.require_subcommand(1);

  Common cd, ca, cr, cp, cv;
  std::string assoc_gen, assoc_combo, reduce_gen, reduce_combo, strategy;
  int change_stage = 0;
  std::vector<std::string> combos;

  CLI::App* div = app.add_subcommand(
      "check-div", "verify that the flux is a conservation law of the system");
  add_common(div, cd);

  CLI::App* assoc = app.add_subcommand(
      "check-assoc", "test which symmetries are associated with the flux");
  add_common(assoc, ca);
  assoc->add_option("--gen", assoc_gen, "one declared generator");
  assoc->add_option("--combo", assoc_combo,
                    "a linear combination, e.g. \"X1 + c1*X2\"");

  CLI::App* red =
      app.add_subcommand("reduce", "perform one reduction step along --gen "
                                   "or --combo");
  add_common(red, cr);
  red->add_option("--gen", reduce_gen, "one declared generator");
  red->add_option("--combo", reduce_combo, "a linear combination");
  red->add_option("--change", change_stage,
                  "apply the problem file's change for this stage");

  CLI::App* pipe = app.add_subcommand(
      "pipeline", "reduce stage by stage until a first integral remains");
  add_common(pipe, cp);
  pipe->add_option("--strategy", strategy, "first | exhaustive | combo");
  pipe->add_option("--combo", combos,
                   "combination for the next stage; repeat per stage");

  CLI::App* ver = app.add_subcommand(
      "verify", "re-run every verifiable claim of the problem file");
  add_common(ver, cv);

  CLI11_PARSE(app, argc, argv);

  try {
    bool ok = false;
    if (div->parsed()) {
      dred::Problem p = dred::load_problem(cd.path);
      ok = dred::cmd_check_div(p, options_of(cd), std::cout);
    } else if (assoc->parsed()) {
      dred::Problem p = dred::load_problem(ca.path);
      ok = dred::cmd_check_assoc(p, assoc_gen, assoc_combo, options_of(ca),
                                 std::cout);
    } else if (red->parsed()) {
      dred::Problem p = dred::load_problem(cr.path);
      ok = dred::cmd_reduce(p, reduce_gen, reduce_combo, change_stage,
                            options_of(cr), std::cout);
    } else if (pipe->parsed()) {
      dred::Problem p = dred::load_problem(cp.path);
      ok = dred::cmd_pipeline(p, strategy, combos, options_of(cp), std::cout);
    } else if (ver->parsed()) {
      dred::Problem p = dred::load_problem(cv.path);
      ok = dred::cmd_verify(p, options_of(cv), std::cout);
    }
    return ok ? 0 : 1;
  } catch (const dred::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
