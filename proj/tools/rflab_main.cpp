#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rflab/errors.hpp"
#include "rflab/scenario.hpp"

namespace {

int run(rflab::ScenarioConfig cfg, bool strict) {
  const rflab::Report report = rflab::run_scenario(cfg);
  const std::vector<std::string> written =
      rflab::emit_tables(report, cfg.out_dir);

  std::printf("scenario %s [%s]  (%.1f ms, version %s)\n", cfg.name.c_str(),
              cfg.command.c_str(), report.timing_ms, report.version.c_str());
  bool all_pass = true;
  for (const rflab::CheckItem& c : report.checks) {
    all_pass = all_pass && c.pass;
    std::printf("  [%s] %-24s value=%-13.6g threshold=%-13.6g %s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.threshold,
                c.note.c_str());
  }
  for (const std::string& path : written) {
    std::printf("  wrote %s\n", path.c_str());
  }
  return (strict && !all_pass) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Collocation laboratory for boundary singularities of regional and "
      "full fractional Laplacians on intervals and balls"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  int levels = 0;
  bool force_csv = false, no_csv = false;
  bool force_json = false, no_json = false;
  bool seedless = false;
  bool strict = false;

  app.add_option("--config", config_path,
                 "scenario config (JSON); the file's own command runs when no "
                 "subcommand is given");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"assemble-check", "assemble the operator and verify its structure"},
      {"phi", "exterior-mass profile and its boundary exponent"},
      {"solve", "one linear or semilinear Dirichlet solve"},
      {"blowup", "increasing-boundary-level limit driver"},
      {"rates", "boundary-rate fits and the sandwich verdict"},
      {"ko", "tail classifiers for power nonlinearities"},
      {"green-check", "discrete Green-function bound under refinement"},
      {"barrier-check", "barrier bound and super-solution certificates"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "scenario config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--levels", levels,
                    "run exactly this many boundary levels");
    sub->add_flag("--csv", force_csv, "force CSV output on");
    sub->add_flag("--no-csv", no_csv, "suppress CSV output");
    sub->add_flag("--json", force_json, "force the JSON report on");
    sub->add_flag("--no-json", no_json, "suppress the JSON report");
    sub->add_flag("--seedless", seedless,
                  "reserved; runs are deterministic unconditionally");
    sub->add_flag("--strict", strict, "exit 1 when any check fails");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_path.empty()) {
      std::printf("%s\n", app.help().c_str());
      return 0;
    }
    rflab::ScenarioConfig cfg = rflab::load_config_file(config_path);
    const auto subs = app.get_subcommands();
    if (!subs.empty()) {
      cfg.command = subs.front()->get_name();
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (levels > 0) {
      cfg.n_cap = cfg.n0 * std::pow(cfg.level_factor, levels - 1);
    }
    if (force_csv) cfg.write_csv = true;
    if (no_csv) cfg.write_csv = false;
    if (force_json) cfg.write_json = true;
    if (no_json) cfg.write_json = false;
    return run(std::move(cfg), strict);
  } catch (const rflab::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const rflab::NonconvergenceError& e) {
    std::fprintf(stderr, "nonconvergence: %s (last residual %.3e)\n", e.what(),
                 e.residual());
    return 3;
  } catch (const rflab::InvariantBreachError& e) {
    std::fprintf(stderr, "invariant breach: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
