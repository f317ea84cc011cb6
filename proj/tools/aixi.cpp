// Command-line scenario runner.
//
//   aixi run --config scenarios/heavenhell.cfg [--out DIR] [--seed N] [--strict]
//   aixi verify
//   aixi enumerate --l-max 8 [--hex]
//   aixi disasm 0a4

#include <CLI11.hpp>

#include <iostream>

#include "aixi/aixi.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_capacity = 2;
constexpr int exit_bound_failure = 3;

int report_validation(const aixi::validation_error& e) {
  std::cerr << "invalid input:\n";
  for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
  return exit_validation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact expectimax agents, program mixtures and best-vote selection"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (advisory; runs are single-threaded)");

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool strict = false;
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* seed_option = run->add_option("--seed", seed, "Seed (overrides the config)");
  run->add_flag("--strict", strict, "Exit with status 3 when a bound check fails");

  auto* verify = app.add_subcommand("verify", "Re-check the core invariants");
  std::size_t verify_l = 10;
  verify->add_option("--l-max", verify_l, "Program length bound for the code-set checks");

  auto* enumerate = app.add_subcommand("enumerate", "List every program up to a length bound");
  std::size_t l_max = 8;
  enumerate->add_option("--l-max", l_max, "Length bound in bits")->check(CLI::Range(1, 16));

  auto* disasm = app.add_subcommand("disasm", "Disassemble a hex-encoded program");
  std::string hex;
  disasm->add_option("code", hex, "Hex code")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = aixi::cli::load_config(config_path);
      if (seed_option->count() > 0) {
        cfg.seed = seed;
        cfg.entries["seed"] = std::to_string(seed);
      }
      if (!out_dir.empty()) cfg.output = out_dir;
      auto artifacts = aixi::cli::run_scenario(cfg);
      aixi::cli::write_artifacts(artifacts, cfg.output);
      std::cout << aixi::cli::emit_report(artifacts).summary;
      std::cout << "artifacts written to " << cfg.output << '\n';
      if (strict && !aixi::cli::all_bounds_hold(artifacts)) return exit_bound_failure;
      return exit_ok;
    }
    if (verify->parsed()) {
      bool all = true;
      for (const auto& c : aixi::cli::run_verification(verify_l)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << '\n';
        all = all && c.passed;
      }
      return all ? exit_ok : exit_bound_failure;
    }
    if (enumerate->parsed()) {
      std::cout << "hex,bits,length,weight\n";
      for (const auto& p : aixi::vm::enumerate_programs(l_max))
        std::cout << p.hex() << ',' << p.bits() << ',' << p.length_bits() << ','
                  << aixi::format_rational(aixi::dyadic_weight(p.length_bits())) << '\n';
      return exit_ok;
    }
    if (disasm->parsed()) {
      auto p = aixi::vm::decode_hex(hex);
      if (!p) throw aixi::validation_error({"'" + hex + "' does not decode to a program"});
      std::cout << aixi::vm::disassemble(*p);
      return exit_ok;
    }
  } catch (const aixi::validation_error& e) {
    return report_validation(e);
  } catch (const aixi::capacity_error& e) {
    std::cerr << "capacity exceeded: " << e.what() << '\n';
    return exit_capacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  }
  return exit_ok;
}
