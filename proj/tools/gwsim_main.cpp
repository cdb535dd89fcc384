// gwsim: scenario-driven front end for the branching-process library.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gwsim/cli/experiment.hpp"
#include "gwsim/cli/scenario.hpp"
#include "gwsim/errors.hpp"
#include "json.hpp"

namespace {

int report_error(const std::string& kind, const std::string& message, std::optional<std::size_t> trial = {}) {
  nlohmann::ordered_json rec;
  rec["error"] = kind;
  rec["message"] = message;
  if (trial) rec["trial"] = *trial;
  std::cerr << rec.dump() << '\n';
  return gwsim::cli::exit_code_for(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson process simulator and criterion checker"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Scenario config (JSON)")->required();
    sub->add_option("--out", out_path, "Output path (default: config output.path or stdout)");
    sub->add_option("--threads", threads, "Worker threads; never changes results")->check(CLI::Range(1u, 1024u));
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* run = app.add_subcommand("run", "Run the scenario and write its report");
  auto* compare = app.add_subcommand("compare", "Analytic criterion against the empirical extinction fraction");
  add_common(run);
  add_common(compare);

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = gwsim::cli::load_scenario(config_path);
    if (threads > 0) cfg.threads = threads;
    if (!format.empty())
      cfg.output.format = format == "json" ? gwsim::cli::OutputFormat::Json : gwsim::cli::OutputFormat::Csv;
    if (!out_path.empty()) cfg.output.path = out_path;

    const std::string report =
        run->parsed() ? gwsim::cli::run_experiment(cfg) : gwsim::cli::compare_experiment(cfg);
    if (cfg.output.path.empty()) {
      std::cout << report;
    } else {
      std::ofstream out(cfg.output.path, std::ios::binary);
      if (!out) throw gwsim::ConfigError("cannot write '" + cfg.output.path + "'");
      out << report;
    }
  } catch (const gwsim::BatchAborted& e) {
    return report_error(e.cause_kind(), e.what(), e.trial());
  } catch (const gwsim::Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error("Error", e.what());
  }
  return gwsim::cli::kExitOk;
}
