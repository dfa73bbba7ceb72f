#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "config.hpp"
#include "eqloop/errors.hpp"
#include "studies.hpp"

extern char** environ;

namespace {

constexpr int kExitTolerance = 2;
constexpr int kExitConfig = 3;

struct Options {
  std::string config, out = "results", seed;
  int threads = 0;
  bool dump_plot = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "flat key = value study file");
  app->add_option("--seed", o.seed, "base seed (u64)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--dump-plot", o.dump_plot, "print the normalized plot program and exit");
}

int report(const eqloop::tools::StudyResult& r, const Options& o) {
  eqloop::tools::write_outputs(r, o.out);
  std::cout << r.summary().dump(2) << "\n";
  return r.pass() ? 0 : kExitTolerance;
}

int run(const std::string& kind, const Options& o) {
  using eqloop::tools::StudyConfig;
  StudyConfig cfg = o.config.empty() ? StudyConfig{} : StudyConfig::load(o.config);
  if (!kind.empty()) {
    if (cfg.has("kind") && cfg.kind() != kind)
      throw eqloop::ConfigError("config kind '" + cfg.kind() + "' does not match subcommand '" + kind + "'");
    cfg.set("kind", kind);
  }
  cfg.apply_environment(environ);
  if (!o.seed.empty()) cfg.set("seed", o.seed);
  if (o.threads > 0) cfg.set("threads", std::to_string(o.threads));
  cfg.validate();
  if (o.dump_plot) {
    std::cout << eqloop::tools::plot_program(cfg);
    return 0;
  }
  return report(eqloop::tools::run_study(cfg), o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant loop-space calculus studies"};
  app.require_subcommand(1);
  Options opt;
  std::string suite;

  auto* run_cmd = app.add_subcommand("run", "run the study described by --config");
  add_common(run_cmd, opt);
  std::vector<std::pair<std::string, CLI::App*>> kinds;
  for (const auto& k : eqloop::tools::study_kinds()) {
    auto* sub = app.add_subcommand(k, "run a " + k + " study");
    add_common(sub, opt);
    kinds.emplace_back(k, sub);
  }
  auto* verify = app.add_subcommand("verify", "run a property suite: algebra, geometry or stochastic");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_option("--seed", opt.seed, "base seed (u64)");
  verify->add_option("--out", opt.out, "output directory");
  verify->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*verify) {
      if (suite.empty()) throw eqloop::ConfigError("verify: empty suite name");
      const std::uint64_t seed = opt.seed.empty() ? 1 : std::stoull(opt.seed);
      return report(eqloop::tools::verify_suite(suite, seed, std::max(1, opt.threads)), opt);
    }
    if (*run_cmd) return run("", opt);
    for (const auto& [k, sub] : kinds)
      if (*sub) return run(k, opt);
  } catch (const eqloop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
