#include "sparselab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sparselab/conv.hpp"
#include "sparselab/oracles.hpp"
#include "sparselab/parallel.hpp"
#include "sparselab/sample.hpp"
#include "sparselab/transfer.hpp"
#include "sparselab/verify.hpp"

namespace sparselab {

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  if (j.contains("system")) c.system = SystemDescriptor::from_json(j.at("system"));
  c.target = j.value("target", c.target);
  c.delta = j.value("delta", c.delta);
  c.colours = j.value("colours", c.colours);
  c.c_grid = j.value("c_grid", c.c_grid);
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.budget = j.value("budget", c.budget);
  c.threads = j.value("threads", c.threads);
  c.timing = j.value("timing", c.timing);
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  return {{"system", system.to_json()}, {"target", target}, {"delta", delta},   {"colours", colours},
          {"c_grid", c_grid},           {"trials", trials}, {"seed", seed},     {"budget", budget},
          {"threads", threads},         {"timing", timing}};
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t c_index, std::size_t trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(c_index), static_cast<std::uint64_t>(trial)});
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentRecord run_trial(const SequenceSystem& sys, const SweepConfig& cfg, double alpha, std::size_t ci,
                           std::size_t trial) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.c_index = ci;
  rec.c = cfg.c_grid[ci];
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, ci, trial);
  const auto& ground = sys.ground();
  rec.p = std::min(1.0, rec.c * std::pow(static_cast<double>(ground.size()), -alpha));
  const auto u = sample_subset(ground, rec.p, rec.seed);
  rec.stats.push_back({"u_size", static_cast<double>(u.size()), std::nullopt});
  if (cfg.target == "count") {
    const auto mu = make_measure(ground, u, MeasureMode::associated, rec.p);
    const double normalized = count_functional(sys, mu).value;
    const double configs =
        std::round(normalized * static_cast<double>(sys.total_size()) * std::pow(rec.p, sys.k()));
    rec.success = normalized >= 0.5 && normalized <= 2.0;
    rec.stats.push_back({"configurations", configs, std::nullopt});
    rec.stats.push_back({"normalized_count", normalized, rec.success});
  } else if (cfg.target == "density") {
    const auto r = adversary_free_subset(sys, u, cfg.budget, rec.seed);
    rec.success = r.density < cfg.delta;
    rec.stats.push_back({"configurations", static_cast<double>(r.configurations), std::nullopt});
    rec.stats.push_back({"adversary_density", r.density, rec.success});
  } else {
    const auto r = adversary_colouring(sys, u, cfg.colours, cfg.budget, rec.seed);
    rec.success = r.monochromatic > 0;
    rec.stats.push_back({"mono_count", static_cast<double>(r.monochromatic), rec.success});
  }
  if (cfg.timing) {
    rec.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

}  // namespace

std::pair<double, double> bootstrap_interval(const std::vector<bool>& outcomes, std::uint64_t seed,
                                             std::size_t resamples, double level) {
  if (outcomes.empty()) throw std::invalid_argument("bootstrap needs at least one outcome");
  Rng rng(seed);
  std::vector<double> freq(resamples);
  const std::size_t n = outcomes.size();
  for (auto& f : freq) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += outcomes[uniform_below(rng, n)];
    f = static_cast<double>(hits) / static_cast<double>(n);
  }
  std::sort(freq.begin(), freq.end());
  const double tail = (1.0 - level) / 2.0;
  const auto lo = static_cast<std::size_t>(std::floor(tail * (resamples - 1)));
  const auto hi = static_cast<std::size_t>(std::ceil((1.0 - tail) * (resamples - 1)));
  return {freq[lo], freq[hi]};
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.target != "count" && config.target != "density" && config.target != "colouring") {
    throw std::invalid_argument("unknown sweep target '" + config.target + "'");
  }
  for (double c : config.c_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("C grid values must be positive");
  }
  const auto sys = SequenceSystem::build(config.system);
  SweepResult out;
  out.config = config;
  out.system = sys.kind_name();
  out.n = sys.ground().size();
  out.alpha = sys.critical_exponent();
  const std::size_t tasks = config.c_grid.size() * config.trials;
  out.records.resize(tasks);
  parallel_for(
      tasks, config.threads,
      [&](std::size_t i) { out.records[i] = run_trial(sys, config, out.alpha, i / config.trials, i % config.trials); },
      1);

  nlohmann::json points = nlohmann::json::array();
  for (std::size_t ci = 0; ci < config.c_grid.size(); ++ci) {
    std::vector<bool> outcomes;
    double stat_sum = 0.0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const auto& r = out.records[ci * config.trials + t];
      outcomes.push_back(r.success);
      stat_sum += r.stats.back().value;
    }
    const double p = std::min(1.0, config.c_grid[ci] * std::pow(static_cast<double>(out.n), -out.alpha));
    nlohmann::json point = {{"C", config.c_grid[ci]}, {"p", p}, {"trials", config.trials}};
    if (outcomes.empty()) {
      point["successes"] = 0;
      point["frequency"] = nullptr;
      point["ci"] = nullptr;
      point["mean_stat"] = nullptr;
    } else {
      const auto hits = std::count(outcomes.begin(), outcomes.end(), true);
      const auto [lo, hi] = bootstrap_interval(outcomes, derive_seed(config.seed, {0xB007u, ci}));
      point["successes"] = hits;
      point["frequency"] = static_cast<double>(hits) / static_cast<double>(outcomes.size());
      point["ci"] = {lo, hi};
      point["mean_stat"] = stat_sum / static_cast<double>(outcomes.size());
    }
    points.push_back(point);
  }
  out.summary = {{"config", config.to_json()},
                 {"system", out.system},
                 {"n", out.n},
                 {"alpha_s", out.alpha},
                 {"target", config.target},
                 {"points", points}};
  return out;
}

void write_csv(std::ostream& out, const SweepResult& result) {
  out << "system,n,alpha_s,C,p,trial,seed,stat_name,stat_value,pass,millis\n";
  for (const auto& r : result.records) {
    for (const auto& s : r.stats) {
      out << result.system << ',' << result.n << ',' << num(result.alpha) << ',' << num(r.c) << ',' << num(r.p)
          << ',' << r.trial << ',' << r.seed << ',' << s.name << ',' << num(s.value) << ','
          << (s.pass ? (*s.pass ? "true" : "false") : "") << ',' << num(r.millis) << '\n';
    }
  }
}

nlohmann::json sweep_json(const SweepResult& result) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : result.records) {
    nlohmann::json stats = nlohmann::json::object();
    for (const auto& s : r.stats) stats[s.name] = s.value;
    recs.push_back({{"C", r.c},
                    {"p", r.p},
                    {"trial", r.trial},
                    {"seed", r.seed},
                    {"stats", stats},
                    {"success", r.success},
                    {"millis", r.millis}});
  }
  return {{"summary", result.summary}, {"records", recs}};
}

// --- checks ------------------------------------------------------------------

namespace {

SequenceSystem system_arg(const nlohmann::json& args) {
  if (!args.contains("system")) throw std::invalid_argument("missing 'system'");
  return SequenceSystem::build(SystemDescriptor::from_json(args.at("system")));
}

ConvMode conv_arg(const nlohmann::json& args) {
  ConvMode mode;
  const auto mc = args.value("mc_samples", std::uint64_t{0});
  if (mc > 0) mode = ConvMode::monte_carlo(mc, args.value("seed", std::uint64_t{1}));
  mode.threads = args.value("threads", 1u);
  return mode;
}

CheckResult check_system(const nlohmann::json& args) {
  const auto sys = system_arg(args);
  const auto sample = args.value("sample", std::size_t{10000});
  const auto seed = args.value("seed", std::uint64_t{1});
  const auto homog = verify_homogeneity(sys, sample, seed);
  TwoDofMode tm;
  tm.exhaustive = sys.total_size() <= args.value("exhaustive_limit", std::uint64_t{100000});
  tm.samples = sample;
  tm.seed = seed;
  const auto two = verify_two_dof(sys, tm);
  const auto prof = pair_profile(sys, args.value("profile_sample", std::size_t{256}), seed);
  CheckResult r;
  r.pass = homog.homogeneous && (!args.value("require_two_dof", false) || two.two_dof);
  r.report = {{"system", sys.descriptor().to_json()},
              {"ground_size", sys.ground().size()},
              {"total_size", sys.total_size()},
              {"homogeneity", homog.to_json()},
              {"two_dof", two.to_json()},
              {"pair_profile", prof.to_json()},
              {"critical_exponent", sys.critical_exponent()}};
  if (const auto f = sys.uniform_fiber_size()) r.report["fiber_size"] = *f;
  return r;
}

CheckResult check_properties_target(const nlohmann::json& args) {
  const auto sys = system_arg(args);
  const double p = args.at("p").get<double>();
  const auto m = args.value("m", static_cast<std::size_t>(sys.k()));
  const auto seed = args.value("seed", std::uint64_t{1});
  const auto ens = sample_ensemble(sys.ground(), p, m, seed);
  PropertyParams pp;
  pp.eta = args.value("eta", pp.eta);
  pp.lambda = args.value("lambda", pp.lambda);
  pp.d = args.value("d", pp.d);
  pp.tolerance = args.value("tolerance", pp.tolerance);
  pp.sup_bound = args.value("sup_bound", pp.sup_bound);
  pp.samples = args.value("samples", pp.samples);
  pp.tuple_budget = args.value("tuple_budget", pp.tuple_budget);
  pp.seed = seed;
  pp.conv = conv_arg(args);
  pp.check_property3 = args.value("property3", true);
  const auto reports = check_properties(sys, ens, pp);
  CheckResult r;
  r.pass = std::all_of(reports.begin(), reports.end(), [](const auto& x) { return x.pass; });
  r.report = {{"system", sys.descriptor().to_json()}, {"p", p}, {"m", m}, {"seed", seed}};
  for (const auto& x : reports) r.report["reports"].push_back(x.to_json());
  return r;
}

CheckResult check_conditions_target(const nlohmann::json& args) {
  const auto sys = system_arg(args);
  const double p = args.at("p").get<double>();
  ConditionParams cp;
  cp.alpha = args.value("alpha", cp.alpha);
  cp.seed = args.value("seed", cp.seed);
  cp.sample_x = args.value("sample_x", cp.sample_x);
  cp.conv = conv_arg(args);
  const auto trials = args.value("trials", std::size_t{1});
  const auto reports = check_conditions(sys, p, trials, cp);
  CheckResult r;
  r.pass = std::all_of(reports.begin(), reports.end(), [](const auto& x) { return x.pass; });
  r.report = {{"system", sys.descriptor().to_json()}, {"p", p}, {"trials", trials}};
  for (const auto& x : reports) r.report["reports"].push_back(x.to_json());
  return r;
}

CheckResult check_dense_model(const nlohmann::json& args) {
  const auto sys = system_arg(args);
  const double p = args.at("p").get<double>();
  const auto m = args.value("m", std::size_t{4});
  const auto seed = args.value("seed", std::uint64_t{1});
  const auto ens = sample_ensemble(sys.ground(), p, m, seed);
  FamilyParams fp;
  fp.size = args.value("family_size", std::size_t{256});
  fp.seed = derive_seed(seed, {0xFA11u});
  fp.threads = args.value("threads", 1u);
  const auto family = build_family(sys, ens, fp);
  const auto fs = ens.measures();
  WeightFunction f = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) f = f.plus(fs[i]);
  f = f.scaled(1.0 / static_cast<double>(fs.size()));
  DenseModelParams dp;
  dp.epsilon = args.value("epsilon", 0.0);
  const auto model = solve_dense_model(f, family, dp);
  const double eta = sys.k() * model.achieved_norm;
  const auto lemma = verify_counting_lemma(sys, fs, model.g, eta, conv_arg(args));
  CheckResult r;
  r.pass = lemma.pass && model.status != "iteration_limit";
  auto mj = model.to_json();
  if (!args.value("include_g", false)) mj.erase("g");
  r.report = {{"system", sys.descriptor().to_json()},
              {"p", p},
              {"m", m},
              {"seed", seed},
              {"family_size", family.size()},
              {"model", mj},
              {"counting_lemma", lemma.to_json()}};
  return r;
}

PatternHypergraph pattern_arg(const nlohmann::json& args, const char* key) {
  if (!args.contains(key)) throw std::invalid_argument(std::string("missing '") + key + "'");
  return PatternHypergraph::from_json(args.at(key));
}

CheckResult check_oracle(const nlohmann::json& args) {
  const auto name = args.value("name", std::string());
  CheckResult r;
  nlohmann::json value;
  if (name == "pattern-stats") {
    r.report = pattern_stats(pattern_arg(args, "pattern")).to_json();
    value = r.report["m_k"]["text"];
  } else if (name == "extremal") {
    const auto e = extremal_number(args.at("n").get<int>(), pattern_arg(args, "pattern"),
                                   args.value("budget", std::uint64_t{1} << 24));
    r.report = e.to_json();
    value = e.value;
  } else if (name == "supersaturation") {
    const auto c = supersaturation_count(pattern_arg(args, "host"), pattern_arg(args, "pattern"));
    r.report = c.to_json();
    value = c.labeled;
  } else if (name == "ramsey") {
    const auto mode = args.value("mode", std::string("exhaustive")) == "heuristic" ? SearchMode::heuristic
                                                                                    : SearchMode::exhaustive;
    const auto budget = args.value("budget", std::uint64_t{1} << 24);
    const auto seed = args.value("seed", std::uint64_t{1});
    const auto res = args.contains("host")
                         ? ramsey_multiplicity(pattern_arg(args, "host"), pattern_arg(args, "pattern"),
                                               args.value("r", 2), mode, budget, seed)
                         : ramsey_multiplicity(system_arg(args), args.value("r", 2), mode, budget, seed);
    r.report = res.to_json();
    value = res.unordered();
  } else if (name == "varnavides") {
    const auto res = varnavides_count(system_arg(args), args.at("rho").get<double>(),
                                      args.value("budget", std::uint64_t{1} << 24));
    r.report = res.to_json();
    value = res.count;
  } else if (name == "free-subset" || name == "colouring") {
    const auto sys = system_arg(args);
    const auto seed = args.value("seed", std::uint64_t{1});
    const auto u = sample_subset(sys.ground(), args.value("p", 1.0), seed);
    const auto budget = args.value("budget", std::uint64_t{100000});
    if (name == "free-subset") {
      const auto res = adversary_free_subset(sys, u, budget, seed);
      r.report = res.to_json();
      value = res.density;
    } else {
      const auto res = adversary_colouring(sys, u, args.value("r", 2), budget, seed);
      r.report = res.to_json();
      value = res.monochromatic;
    }
  } else if (name == "tail-bound") {
    r.report = tail_bound(args.value("kind", std::string()), args.value("params", nlohmann::json::object()));
    value = r.report["value"];
  } else {
    throw std::invalid_argument("unknown oracle '" + name + "'");
  }
  r.report["value"] = value;
  r.report["oracle"] = name;
  r.pass = !args.contains("expect") || args.at("expect") == value;
  return r;
}

}  // namespace

CheckResult run_check(const std::string& target, const nlohmann::json& args) {
  CheckResult r;
  const auto start = std::chrono::steady_clock::now();
  if (target == "system") {
    r = check_system(args);
  } else if (target == "properties") {
    r = check_properties_target(args);
  } else if (target == "conditions") {
    r = check_conditions_target(args);
  } else if (target == "dense-model") {
    r = check_dense_model(args);
  } else if (target == "oracle") {
    r = check_oracle(args);
  } else {
    throw std::invalid_argument("unknown check target '" + target + "'");
  }
  r.report["target"] = target;
  r.report["pass"] = r.pass;
  r.report["millis"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace sparselab
