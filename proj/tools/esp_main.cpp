// esp: scenario-driven experiment runner for over-the-air EM signal processing.
//
// Usage: esp <scenario-kind> --config <path> [--seed-override N]
//            [--workers K] [--out DIR]

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "esp/scenario.hpp"
#include "esp/version.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kNonConvergence = 4,
  kIo = 5,
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air electromagnetic signal processing experiment runner"};
  app.set_version_flag("--version", std::string("esp ") + esp::kVersion +
                                        " (config schema " +
                                        std::to_string(esp::kSchemaVersion) + ")");
  app.require_subcommand(0, 1);

  struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out;
  };

  std::vector<std::pair<CLI::App*, std::shared_ptr<Args>>> commands;
  for (const std::string& kind : esp::scenario::scenario_kinds()) {
    auto args = std::make_shared<Args>();
    CLI::App* sub = app.add_subcommand(kind, "run a " + kind + " scenario");
    sub->add_option("--config", args->config, "scenario config file (JSON, comments allowed)")
        ->required();
    sub->add_option("--seed-override", args->seed, "replace the config seed list");
    sub->add_option("--workers", args->workers, "concurrent campaign trials")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", args->out, "output directory (default: the config's output key)");
    commands.emplace_back(sub, args);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, args] : commands) {
    if (!sub->parsed()) continue;
    try {
      esp::scenario::RunOverrides overrides;
      overrides.seed = args->seed;
      overrides.workers = args->workers;
      const auto results = esp::scenario::run_scenario(args->config, overrides);
      if (results.kind != sub->get_name()) {
        std::fprintf(stderr, "error: config kind '%s' does not match subcommand '%s'\n",
                     results.kind.c_str(), sub->get_name().c_str());
        return kValidation;
      }
      const std::filesystem::path out_dir =
          args->out.empty() ? esp::scenario::declared_output(results) : args->out;
      esp::scenario::emit_results(results, esp::scenario::EmitFormat::structured, out_dir);
      esp::scenario::emit_results(results, esp::scenario::EmitFormat::tabular, out_dir);
      if (!results.converged) {
        std::fprintf(stderr, "warning: run did not fully converge; results flagged partial\n");
        return kNonConvergence;
      }
      return kOk;
    } catch (const esp::scenario::ParseError& e) {
      std::fprintf(stderr, "parse error at line %d, column %d: %s\n", e.line, e.column,
                   e.what());
      return kParse;
    } catch (const esp::scenario::ValidationError& e) {
      std::fprintf(stderr, "validation error (%s): %s\n", e.field.c_str(), e.what());
      return kValidation;
    } catch (const esp::scenario::ConvergenceError& e) {
      std::fprintf(stderr, "non-convergence: %s\n", e.what());
      return kNonConvergence;
    } catch (const esp::scenario::IoError& e) {
      std::fprintf(stderr, "i/o error: %s\n", e.what());
      return kIo;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "validation error: %s\n", e.what());
      return kValidation;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kUsage;
    }
  }

  std::fprintf(stderr, "%s\n", app.help().c_str());
  return kUsage;
}
