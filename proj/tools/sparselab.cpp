// Command-line front end: sparselab <subcommand> [flags]
//
// Exit codes: 0 all requested checks pass, 1 a check failed, 2 usage or
// input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sparselab/experiment.hpp"

using nlohmann::json;
using namespace sparselab;

namespace {

json parse_loose(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '[' || text.front() == '"')) return json::parse(text);
  if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text.front())) || text.front() == '-')) {
    try {
      return json::parse(text);
    } catch (const json::exception&) {
    }
  }
  return text;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  return json::parse(in);
}

// --system accepts inline JSON, a JSON file, or a kind name completed by
// --n, --k and --pattern.
json resolve_system(const json& args) {
  if (!args.contains("system_text")) throw std::invalid_argument("missing --system");
  const auto text = args.at("system_text").get<std::string>();
  if (!text.empty() && text.front() == '{') return json::parse(text);
  if (std::filesystem::exists(text)) return read_json_file(text);
  json d = {{"kind", text}};
  if (!args.contains("n")) throw std::invalid_argument("--system " + text + " needs --n");
  d["n"] = args.at("n");
  if (args.contains("k")) d["k"] = args.at("k");
  if (args.contains("pattern")) d["pattern"] = args.at("pattern");
  if (args.contains("r_dim")) d["r"] = args.at("r_dim");
  return d;
}

unsigned default_threads() {
  if (const char* env = std::getenv("LAB_THREADS")) {
    try {
      return static_cast<unsigned>(std::max(1, std::stoi(env)));
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

template <class T>
void flag(CLI::App* app, json& args, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option_function<T>(name, [&args, key](const T& v) { args[key] = v; }, help);
}

void loose_flag(CLI::App* app, json& args, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(name, [&args, key](const std::string& v) { args[key] = parse_loose(v); },
                                        help);
}

void common_flags(CLI::App* app, json& args) {
  flag<std::string>(app, args, "--system", "system_text", "system: inline JSON, JSON file, or kind name");
  flag<std::int64_t>(app, args, "--n", "n", "ground set parameter n");
  flag<int>(app, args, "--k", "k", "tuple length");
  flag<int>(app, args, "--dim", "r_dim", "grid dimension or polynomial power");
  loose_flag(app, args, "--pattern", "pattern", "pattern: K3, K4, C4, fano or JSON");
  flag<double>(app, args, "--p", "p", "sampling probability");
  flag<std::uint64_t>(app, args, "--seed", "seed", "master seed");
  flag<unsigned>(app, args, "--threads", "threads", "worker threads (default LAB_THREADS or 1)");
  flag<std::uint64_t>(app, args, "--budget", "budget", "search or evaluation budget");
  flag<std::string>(app, args, "--out", "out", "output path (default stdout)");
  flag<std::string>(app, args, "--format", "format", "csv or json");
}

void emit(const json& args, const std::string& text) {
  if (args.contains("out")) {
    std::ofstream f(args.at("out").get<std::string>());
    if (!f) throw std::invalid_argument("cannot write '" + args.at("out").get<std::string>() + "'");
    f << text;
  } else {
    std::cout << text;
  }
}

int run_sweep_command(json args) {
  SweepConfig cfg;
  if (args.contains("config")) cfg = SweepConfig::from_json(read_json_file(args.at("config").get<std::string>()));
  if (args.contains("system_text")) cfg.system = SystemDescriptor::from_json(resolve_system(args));
  if (args.contains("c_grid")) cfg.c_grid = parse_grid(args.at("c_grid").get<std::string>());
  if (args.contains("trials")) cfg.trials = args.at("trials");
  if (args.contains("seed")) cfg.seed = args.at("seed");
  if (args.contains("budget")) cfg.budget = args.at("budget");
  if (args.contains("target")) cfg.target = args.at("target");
  if (args.contains("delta")) cfg.delta = args.at("delta");
  if (args.contains("r")) cfg.colours = args.at("r");
  if (args.value("timing", false)) cfg.timing = true;
  cfg.threads = args.contains("threads") ? args.at("threads").get<unsigned>() : default_threads();
  const auto result = run_sweep(cfg);
  const auto format = args.value("format", std::string("csv"));
  if (format == "json") {
    emit(args, sweep_json(result).dump(2) + "\n");
  } else if (format == "csv") {
    std::ostringstream csv;
    write_csv(csv, result);
    emit(args, csv.str());
    std::string summary_path = args.value("summary", std::string());
    if (summary_path.empty() && args.contains("out")) summary_path = args.at("out").get<std::string>() + ".summary.json";
    if (!summary_path.empty()) {
      std::ofstream f(summary_path);
      f << result.summary.dump(2) << "\n";
    }
  } else {
    throw std::invalid_argument("unknown format '" + format + "'");
  }
  return 0;
}

int run_check_command(const std::string& target, json args) {
  if (args.contains("system_text")) args["system"] = resolve_system(args);
  if (!args.contains("threads")) args["threads"] = default_threads();
  const auto r = run_check(target, args);
  emit(args, r.report.dump(2) + "\n");
  return r.pass ? 0 : 1;
}

int report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse random sets laboratory"};
  app.require_subcommand(1);
  json args = json::object();

  auto* vs = app.add_subcommand("verify-system", "homogeneity, two degrees of freedom, pair profile");
  common_flags(vs, args);
  flag<std::size_t>(vs, args, "--sample", "sample", "probes for sampled checks");
  vs->add_flag_function("--require-two-dof", [&args](std::int64_t) { args["require_two_dof"] = true; },
                        "fail unless two coordinates determine each tuple");

  auto* props = app.add_subcommand("properties", "Properties 0-3 on a sampled ensemble");
  common_flags(props, args);
  flag<std::size_t>(props, args, "--m", "m", "ensemble size");
  flag<double>(props, args, "--eta", "eta", "property 1 threshold");
  flag<double>(props, args, "--lambda", "lambda", "property 3 threshold");
  flag<int>(props, args, "--d", "d", "property 3 product length");
  flag<double>(props, args, "--tolerance", "tolerance", "property 0 tolerance");
  flag<double>(props, args, "--sup-bound", "sup_bound", "property 2 bound");
  flag<std::uint64_t>(props, args, "--samples", "samples", "property 3 sampled products");
  flag<std::uint64_t>(props, args, "--tuple-budget", "tuple_budget", "property 1 tuple budget (0 = all)");
  flag<std::uint64_t>(props, args, "--mc-samples", "mc_samples", "Monte Carlo fiber samples (0 = exact)");

  auto* conds = app.add_subcommand("conditions", "Conditions 1 and 2 over fresh draws");
  common_flags(conds, args);
  flag<std::size_t>(conds, args, "--trials", "trials", "draws");
  flag<double>(conds, args, "--alpha", "alpha", "condition 2 constant");
  flag<std::size_t>(conds, args, "--sample-x", "sample_x", "points x for condition 2");
  flag<std::uint64_t>(conds, args, "--mc-samples", "mc_samples", "Monte Carlo fiber samples (0 = exact)");

  auto* sweep = app.add_subcommand("sweep", "threshold sweep over a C grid");
  common_flags(sweep, args);
  flag<std::string>(sweep, args, "--config", "config", "JSON config file; flags override it");
  flag<std::string>(sweep, args, "--c-grid", "c_grid", "comma-separated multipliers of |X|^-alpha");
  flag<std::size_t>(sweep, args, "--trials", "trials", "trials per grid point");
  flag<std::string>(sweep, args, "--target", "target", "count, density or colouring");
  flag<double>(sweep, args, "--delta", "delta", "density target threshold");
  flag<int>(sweep, args, "--r", "r", "colours for the colouring target");
  flag<std::string>(sweep, args, "--summary", "summary", "summary JSON path");
  sweep->add_flag_function("--timing", [&args](std::int64_t) { args["timing"] = true; }, "record wall time");

  auto* dense = app.add_subcommand("dense-model", "dense model and counting-lemma check");
  common_flags(dense, args);
  flag<std::size_t>(dense, args, "--m", "m", "ensemble size");
  flag<std::size_t>(dense, args, "--family-size", "family_size", "anti-uniform family size");
  flag<double>(dense, args, "--epsilon", "epsilon", "scaling (1+epsilon)^-1");
  flag<std::uint64_t>(dense, args, "--mc-samples", "mc_samples", "Monte Carlo samples (0 = exact)");

  auto* oracle = app.add_subcommand("oracle", "exact oracles and tail bounds");
  common_flags(oracle, args);
  flag<std::string>(oracle, args, "--name", "name",
                    "pattern-stats, extremal, supersaturation, ramsey, varnavides, free-subset, colouring, tail-bound");
  loose_flag(oracle, args, "--host", "host", "host graph: K5, C5 or JSON");
  flag<int>(oracle, args, "--r", "r", "colours");
  flag<double>(oracle, args, "--rho", "rho", "density for varnavides");
  flag<std::string>(oracle, args, "--mode", "mode", "exhaustive or heuristic");
  flag<std::string>(oracle, args, "--kind", "kind", "tail bound kind");
  loose_flag(oracle, args, "--params", "params", "tail bound parameters as JSON");
  loose_flag(oracle, args, "--expect", "expect", "expected value; mismatch exits 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sweep) return run_sweep_command(args);
    if (*vs) return run_check_command("system", args);
    if (*props) return run_check_command("properties", args);
    if (*conds) return run_check_command("conditions", args);
    if (*dense) return run_check_command("dense-model", args);
    if (*oracle) {
      // oracles that take --n directly do not describe a system
      if (args.contains("system_text")) args["system"] = resolve_system(args);
      args.erase("system_text");
      return run_check_command("oracle", args);
    }
  } catch (const GuardExceeded& e) {
    return report_error("guard_exceeded", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("invalid_argument", e.what());
  } catch (const std::out_of_range& e) {
    return report_error("out_of_range", e.what());
  } catch (const json::exception& e) {
    return report_error("bad_json", e.what());
  } catch (const std::exception& e) {
    return report_error("error", e.what());
  }
  return 2;
}
