// Copyright 2026 The qalloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// alloc: map a quantum circuit onto a hardware graph by annealing the
// allocation QUBO.
//
//   alloc run           end-to-end allocation with penalty escalation
//   alloc compare-forms run several coefficient forms and tabulate them
//   alloc export-qubo   write the coefficient file for external solvers
//
// Exit codes: 0 success, 2 input error, 3 penalty escalation exhausted.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qalloc/qalloc.hpp"

namespace {

struct FormSpec {
  std::vector<std::string> specs;
};

qalloc::CoefficientForm parse_form_spec(const std::string& spec) {
  qalloc::CoefficientForm form;
  std::string head = spec;
  std::vector<std::string> flags;
  std::size_t pos;
  while ((pos = head.rfind(':')) != std::string::npos) {
    flags.push_back(head.substr(pos + 1));
    head.erase(pos);
  }
  try {
    form.distance_exponent = std::stoi(head);
  } catch (const std::exception&) {
    throw qalloc::ConfigError("bad form spec '" + spec +
                              "' (expected EXP[:noerr][:nolin])");
  }
  for (const auto& flag : flags) {
    if (flag == "noerr")
      form.include_error = false;
    else if (flag == "nolin")
      form.linear_enabled = false;
    else
      throw qalloc::ConfigError("unknown form flag ':" + flag + "' in '" +
                                spec + "'");
  }
  return form;
}

std::string form_label(const qalloc::CoefficientForm& form) {
  std::string label = "d^" + std::to_string(form.distance_exponent);
  if (!form.include_error) label += " noerr";
  if (!form.linear_enabled) label += " nolin";
  return label;
}

void add_shared_options(CLI::App* cmd, qalloc::RunConfig& config) {
  cmd->add_option("--circuit", config.circuit_path, "OpenQASM 2.0 circuit file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--device", config.device_path, "device JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--reads", config.num_reads,
                  "anneals per batch (default 1000, or 100 when the device "
                  "has more than 16 qubits)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sweeps", config.num_sweeps, "sweeps per anneal")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", config.seed, "random seed")->capture_default_str();
  cmd->add_option("--beta-hot", config.beta_hot,
                  "initial inverse temperature (0 = derive from the problem)");
  cmd->add_option("--beta-cold", config.beta_cold,
                  "final inverse temperature (0 = derive from the problem)");
  cmd->add_option("--threads", config.num_threads,
                  "worker threads for reads (0 = hardware concurrency)");
  const std::map<std::string, qalloc::SwapMode> swap_modes{
      {"roundtrip", qalloc::SwapMode::round_trip},
      {"oneway", qalloc::SwapMode::one_way}};
  cmd->add_option("--swap-mode", config.swap_mode,
                  "SWAP accounting: roundtrip (swap back afterwards) or oneway")
      ->transform(CLI::CheckedTransformer(swap_modes, CLI::ignore_case))
      ->default_str("roundtrip");
}

void add_form_options(CLI::App* cmd, qalloc::RunConfig& config) {
  cmd->add_option("--dist-exp", config.form.distance_exponent,
                  "distance exponent of the quadratic coefficients")
      ->capture_default_str()
      ->check(CLI::Range(1, 8));
  cmd->add_flag("--error-term,!--no-error-term", config.form.include_error,
                "include the -ln(success probability) factor");
  cmd->add_flag("--linear-term,!--no-linear-term", config.form.linear_enabled,
                "include the single-qubit linear term");
}

void add_penalty_options(CLI::App* cmd, qalloc::RunConfig& config) {
  cmd->add_option("--max-penalty-mult", config.penalty_multiplier_max,
                  "penalty escalation cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gamma-mult", config.gamma_multiplier,
                  "count-penalty strength as a fraction of phi (0 disables)")
      ->capture_default_str();
  cmd->add_flag("--filter-invalid", config.filter_invalid,
                "drop invalid reads instead of escalating penalties "
                "(recorded in run_meta.json)");
}

int run_command(const qalloc::RunConfig& config) {
  const auto instance = qalloc::load_instance(config);
  std::printf("circuit %s: %d logical qubits, %lld single-qubit gates, %lld "
              "two-qubit gates\n",
              instance.circuit.name.c_str(), instance.circuit.n_c,
              static_cast<long long>(instance.circuit.num_single_qubit_gates()),
              static_cast<long long>(instance.circuit.num_two_qubit_gates()));
  std::printf("device %s: %d qubits, %zu edges\n",
              instance.device.name.c_str(), instance.device.n_p,
              instance.device.edges.size());

  const auto result = qalloc::allocate_with_escalation(config, instance);

  std::printf("reads: %d (multiplier %d, phi = theta = %.6g)\n",
              result.reads_requested, result.final_penalty_multiplier,
              result.penalties_used.phi);
  if (result.reads_filtered > 0)
    std::printf("filtered %d invalid reads\n", result.reads_filtered);
  std::printf("best by %s: energy %.6g, naive swaps %lld, success %.3e "
              "(log10 %.3f)\n",
              to_string(config.selection_metric), result.best.energy,
              static_cast<long long>(result.best.naive_swaps),
              result.best.success_probability,
              result.best.log10_success_probability);
  std::printf("mapping:");
  for (int j : result.best.allocation.mapping) std::printf(" %d", j);
  std::printf("\n");
  std::printf("timings: build %.2fs, anneal %.2fs, analyze %.2fs\n",
              result.timings.build_seconds, result.timings.anneal_seconds,
              result.timings.analyze_seconds);

  if (!config.output_dir.empty()) {
    qalloc::export_run(result, config, config.output_dir);
    std::printf("wrote %s/{best_allocation.json,samples.csv,heatmap.csv,"
                "histogram.csv,run_meta.json}\n",
                config.output_dir.c_str());
  }
  return 0;
}

int compare_forms_command(const qalloc::RunConfig& shared,
                          const std::vector<std::string>& form_specs,
                          const std::string& out_path) {
  if (form_specs.size() < 2)
    throw qalloc::ConfigError("compare-forms needs at least two --form specs");
  std::vector<qalloc::RunConfig> configs;
  for (const auto& spec : form_specs) {
    qalloc::RunConfig config = shared;
    config.form = parse_form_spec(spec);
    configs.push_back(config);
  }
  const auto instance = qalloc::load_instance(configs.front());
  const auto comparison = qalloc::compare_forms(configs, instance);

  std::printf("%-14s %12s %14s %14s %8s\n", "form", "mean swaps",
              "top-1% swaps", "mean success", "valid");
  for (const auto& summary : comparison.summaries)
    std::printf("%-14s %12.3f %14.3f %14.4e %8zu\n",
                form_label(summary.form).c_str(), summary.mean_swaps_all,
                summary.mean_swaps_top1pct, summary.mean_success,
                summary.valid_samples);

  std::printf("\npairwise percentage differences "
              "(negative favours the second form):\n");
  std::printf("%-30s %12s %14s %12s %12s\n", "pair", "swaps[sym]",
              "top1%[sym]", "swaps[base]", "top1%[base]");
  for (const auto& diff : comparison.differences) {
    const std::string pair =
        form_label(comparison.summaries[diff.first].form) + " vs " +
        form_label(comparison.summaries[diff.second].form);
    std::printf("%-30s %12.3f %14.3f %12.3f %12.3f\n", pair.c_str(),
                diff.swaps_all_pct, diff.swaps_top1pct_pct,
                diff.baseline_swaps_all_pct, diff.baseline_swaps_top1pct_pct);
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw qalloc::Error("cannot write " + out_path);
    out << "form,mean_swaps,top1pct_swaps,mean_success,valid_samples\n";
    for (const auto& summary : comparison.summaries)
      out << form_label(summary.form) << ',' << summary.mean_swaps_all << ','
          << summary.mean_swaps_top1pct << ',' << summary.mean_success << ','
          << summary.valid_samples << '\n';
    std::printf("\nwrote %s\n", out_path.c_str());
  }
  return 0;
}

int export_qubo_command(const qalloc::RunConfig& config, int penalty_mult,
                        const std::string& out_path) {
  const auto instance = qalloc::load_instance(config);
  const auto base = qalloc::build_base_coefficients(
      instance.summary, instance.device, instance.distances,
      instance.fidelities, config.form);
  std::string text;
  if (penalty_mult > 0) {
    qalloc::PenaltyConfig penalties;
    penalties.phi = penalty_mult * qalloc::base_penalty_magnitude(base);
    penalties.theta = penalties.phi;
    penalties.gamma = config.gamma_multiplier * penalties.phi;
    text = qalloc::export_qubo(qalloc::apply_penalties(base, penalties));
  } else {
    text = qalloc::export_qubo(base);
  }
  if (out_path.empty() || out_path == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw qalloc::Error("cannot write " + out_path);
    out << text;
    std::printf("wrote %s (%d variables, %zu quadratic terms)\n",
                out_path.c_str(),
                instance.summary.n_c() * instance.device.n_p,
                base.num_quadratic_terms());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qubit allocation by QUBO annealing"};
  app.set_config("--config", "", "TOML config file; command-line flags win");
  app.require_subcommand(1);

  qalloc::RunConfig run_config;
  CLI::App* run = app.add_subcommand("run", "allocate a circuit end to end");
  run->configurable();
  run->fallthrough();
  add_shared_options(run, run_config);
  add_form_options(run, run_config);
  add_penalty_options(run, run_config);
  const std::map<std::string, qalloc::RankMetric> metrics{
      {"energy", qalloc::RankMetric::energy},
      {"swaps", qalloc::RankMetric::naive_swaps},
      {"success", qalloc::RankMetric::success_probability}};
  run->add_option("--metric", run_config.selection_metric,
                  "selection metric for the reported best allocation")
      ->transform(CLI::CheckedTransformer(metrics, CLI::ignore_case))
      ->default_str("swaps");
  run->add_option("--out", run_config.output_dir,
                  "output directory for the run artifacts");

  qalloc::RunConfig cmp_config;
  std::vector<std::string> form_specs;
  std::string cmp_out;
  CLI::App* cmp = app.add_subcommand(
      "compare-forms", "run several coefficient forms on one instance");
  cmp->configurable();
  cmp->fallthrough();
  add_shared_options(cmp, cmp_config);
  add_penalty_options(cmp, cmp_config);
  cmp->add_option("--form", form_specs,
                  "coefficient form spec EXP[:noerr][:nolin]; repeatable")
      ->required()
      ->expected(-2);
  cmp->add_option("--out", cmp_out, "also write the summary table as CSV");

  qalloc::RunConfig exp_config;
  int exp_penalty_mult = 1;
  std::string exp_out;
  CLI::App* exp = app.add_subcommand(
      "export-qubo", "write the QUBO coefficient file for external solvers");
  exp->configurable();
  exp->fallthrough();
  add_shared_options(exp, exp_config);
  add_form_options(exp, exp_config);
  exp->add_option("--penalty-mult", exp_penalty_mult,
                  "penalty multiplier (0 exports the base coefficients only)")
      ->capture_default_str();
  exp->add_option("--gamma-mult", exp_config.gamma_multiplier,
                  "count-penalty strength as a fraction of phi")
      ->capture_default_str();
  exp->add_option("--out", exp_out, "output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return run_command(run_config);
    if (cmp->parsed())
      return compare_forms_command(cmp_config, form_specs, cmp_out);
    return export_qubo_command(exp_config, exp_penalty_mult, exp_out);
  } catch (const qalloc::EscalationError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  } catch (const qalloc::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
