#include "sparselab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace sparselab {

nlohmann::json PropertyReport::to_json() const {
  nlohmann::json j = {{"id", id},       {"params", params}, {"statistic", statistic}, {"threshold", threshold},
                      {"pass", pass},   {"witness", witness}, {"stderr", stderr_},   {"exact", exact}};
  if (!note.empty()) j["note"] = note;
  return j;
}

namespace {

// Ordered tuples of `len` distinct values from [m], lexicographic.
std::vector<std::vector<std::size_t>> distinct_tuples(std::size_t m, int len) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::vector<char> used(m, 0);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == len) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      cur.push_back(i);
      self(self);
      cur.pop_back();
      used[i] = 0;
    }
  };
  rec(rec);
  return out;
}

double excess_l1(const ConvolutionResult& r) {
  double s = 0.0;
  for (double v : r.values.values()) s += std::max(0.0, v - kCap);
  return s / static_cast<double>(r.values.size());
}

double aggregate_stderr(const ConvolutionResult& r) {
  if (r.stderrs.empty()) return 0.0;
  double s = 0.0;
  for (double e : r.stderrs) s += e * e;
  return std::sqrt(s) / static_cast<double>(r.stderrs.size());
}

std::vector<std::size_t> random_distinct(std::size_t m, int len, Rng& rng) {
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < len; ++i) {
    const auto pick = i + uniform_below(rng, m - i);
    std::swap(all[i], all[pick]);
  }
  all.resize(len);
  return all;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

GoodnessResult eta_j_good(const SequenceSystem& sys, int j, std::span<const WeightFunction> measures, double eta,
                          const ConvMode& mode) {
  GoodnessResult r;
  r.discrepancy = excess_l1(convolve(sys, j, measures, mode));
  r.good = r.discrepancy <= eta;
  return r;
}

std::vector<PropertyReport> check_properties(const SequenceSystem& sys, const RandomEnsemble& ensemble,
                                             const PropertyParams& params) {
  const int k = sys.k();
  const std::size_t m = ensemble.m();
  if (m + 1 < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("properties need m >= k-1 distinct sets; got m = " + std::to_string(m) +
                                " for k = " + std::to_string(k));
  }
  if (!(ensemble.ground == sys.ground())) throw std::invalid_argument("ensemble ground set does not match the system");
  const auto measures = ensemble.measures();
  const auto& ground = sys.ground();
  std::vector<PropertyReport> out;

  {
    PropertyReport r;
    r.id = "property0";
    r.params = {{"tolerance", params.tolerance}};
    r.threshold = params.tolerance;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dev = std::abs(expectation(measures[i]) - 1.0);
      if (i == 0 || dev > r.statistic) {
        r.statistic = dev;
        worst = i;
      }
    }
    r.pass = r.statistic <= r.threshold;
    r.witness = {{"set", worst}};
    out.push_back(r);
  }

  {
    PropertyReport r;
    r.id = "property1";
    r.threshold = params.eta;
    r.exact = params.conv.exact;
    std::vector<std::pair<int, std::vector<std::size_t>>> cases;
    const auto tuples = distinct_tuples(m, k - 1);
    for (int j = 0; j < k; ++j) {
      for (const auto& t : tuples) cases.emplace_back(j, t);
    }
    const std::size_t total = cases.size();
    if (params.tuple_budget > 0 && cases.size() > params.tuple_budget) {
      Rng rng(derive_seed(params.seed, {0x9101u}));
      std::shuffle(cases.begin(), cases.end(), rng);
      cases.resize(params.tuple_budget);
      std::sort(cases.begin(), cases.end());
      r.note = "sampled subset of (j, index tuple) pairs";
    }
    r.params = {{"eta", params.eta}, {"checked", cases.size()}, {"total", total}};
    std::vector<WeightFunction> args(k - 1);
    bool first = true;
    for (const auto& [j, t] : cases) {
      for (int q = 0; q < k - 1; ++q) args[q] = measures[t[q]];
      const auto conv = convolve(sys, j, args, params.conv);
      const double disc = excess_l1(conv);
      if (first || disc > r.statistic) {
        r.statistic = disc;
        r.stderr_ = aggregate_stderr(conv);
        r.witness = {{"position", j}, {"indices", t}};
        first = false;
      }
    }
    r.pass = r.statistic <= r.threshold;
    out.push_back(r);
  }

  {
    PropertyReport r;
    r.id = "property2";
    r.threshold = params.sup_bound;
    r.exact = params.conv.exact;
    r.params = {{"bound", params.sup_bound}};
    std::vector<WeightFunction> args(k - 1);
    bool first = true;
    for (int j = 1; j < k; ++j) {
      for (const auto& t : distinct_tuples(m, k - 1 - j)) {
        for (int q = 0; q < k - 1; ++q) {
          // argument q sits at tuple position q (< j) or q + 1 (> j)
          args[q] = q < j ? WeightFunction::constant(ground, 1.0) : measures[t[q - j]];
        }
        const auto conv = convolve(sys, j, args, params.conv);
        const double sup = conv.values.max_value();
        if (first || sup > r.statistic) {
          r.statistic = sup;
          r.stderr_ = conv.max_stderr;
          r.witness = {{"position", j}, {"indices", t}};
          first = false;
        }
      }
    }
    r.pass = r.statistic <= r.threshold;
    out.push_back(r);
  }

  if (params.check_property3) {
    PropertyReport r;
    r.id = "property3";
    r.threshold = params.lambda;
    r.params = {{"lambda", params.lambda}, {"d", params.d}, {"samples", params.samples}};
    r.note = "maximum over sampled products; a one-sided empirical check";
    WeightFunction mean = measures[0];
    for (std::size_t i = 1; i < m; ++i) mean = mean.plus(measures[i]);
    const WeightFunction h = mean.scaled(1.0 / static_cast<double>(m)).plus(WeightFunction::constant(ground, 1.0), -1.0);
    r.statistic = std::abs(expectation(h));
    r.witness = {{"sample", 0}, {"factors", nlohmann::json::array()}};
    ConvMode exact = params.conv;
    exact.exact = true;
    for (std::uint64_t s = 1; s < params.samples; ++s) {
      Rng rng(derive_seed(params.seed, {0x3333u, s}));
      const int factors = 1 + static_cast<int>(uniform_below(rng, std::max(1, params.d)));
      WeightFunction xi = WeightFunction::constant(ground, 1.0);
      nlohmann::json desc = nlohmann::json::array();
      for (int f = 0; f < factors; ++f) {
        const int j = static_cast<int>(uniform_below(rng, k));
        const auto idx = random_distinct(m, k - 1, rng);
        const bool indicator = uniform_real(rng) < 0.5;
        const double level = uniform_real(rng);
        const GMode gm = indicator ? GMode::indicator(level) : GMode::constant_value(level);
        const double keep = uniform_real(rng) < 0.5 ? 1.0 : uniform_real(rng);
        const std::uint64_t seed = rng();
        xi = xi.times(sample_anti_uniform(sys, measures, j, idx, gm, keep, seed, exact));
        desc.push_back({{"position", j}, {"indices", idx}, {"g", indicator ? "indicator" : "constant"},
                        {"g_level", level}, {"f_keep", keep}, {"seed", seed}});
      }
      const double v = std::abs(inner_product(h, xi));
      if (v > r.statistic) {
        r.statistic = v;
        r.witness = {{"sample", s}, {"factors", desc}};
      }
    }
    r.pass = r.statistic < r.threshold;
    out.push_back(r);
  }
  return out;
}

std::vector<PropertyReport> check_conditions(const SequenceSystem& sys, double p, std::size_t trials,
                                             const ConditionParams& params) {
  require(p > 0.0 && p <= 1.0, "conditions need 0 < p <= 1");
  const int k = sys.k();
  const auto& ground = sys.ground();
  PropertyReport c1, c2;
  c1.id = "condition1";
  c1.threshold = 1.5;
  c1.exact = params.conv.exact;
  c2.id = "condition2";
  std::size_t fail1 = 0, fail2 = 0;
  std::uint64_t t_min = 0;
  bool t_uniform = true;
  double ratio_max = 0.0;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto ensemble = sample_ensemble(ground, p, k, derive_seed(params.seed, {trial}));
    const auto mu = ensemble.measures();

    // Condition 1: every j and every proper subset L of the other positions.
    double trial_max = 0.0;
    nlohmann::json trial_witness;
    std::vector<WeightFunction> args(k - 1);
    const int others = k - 1;
    for (int j = 0; j < k; ++j) {
      for (std::uint32_t mask = 0; mask + 1 < (1u << others); ++mask) {
        std::vector<int> L;
        for (int q = 0; q < others; ++q) {
          const int pos = q < j ? q : q + 1;
          if (mask >> q & 1u) {
            args[q] = mu[pos];
            L.push_back(pos);
          } else {
            args[q] = WeightFunction::constant(ground, 1.0);
          }
        }
        const auto conv = convolve(sys, j, args, params.conv);
        const double sup = conv.values.max_value();
        if (sup > trial_max || trial_witness.is_null()) {
          trial_max = std::max(trial_max, sup);
          trial_witness = {{"trial", trial}, {"position", j}, {"L", L}};
        }
      }
    }
    if (trial_max > 1.5) ++fail1;
    if (trial == 0 || trial_max > c1.statistic) {
      c1.statistic = trial_max;
      c1.witness = trial_witness;
    }

    // Condition 2: W(x, y) against α p t(x) on sampled x.
    if (k >= 2) {
      bool trial_ok = true;
      for (Index x : sample_points(ground, params.sample_x, derive_seed(params.seed, {trial, 2u}))) {
        std::map<Index, std::pair<double, std::uint64_t>> by_y;
        const Pin pin{0, x};
        sys.for_each(std::span<const Pin>(&pin, 1), [&](std::span<const Index> t) {
          double prod = 1.0;
          for (int q = 1; q < k - 1; ++q) prod *= mu[q].at(t[q]);
          auto& slot = by_y[t[k - 1]];
          slot.first += prod;
          slot.second += 1;
        });
        const std::uint64_t t = by_y.size();
        if (t_min == 0) {
          t_min = t;
        } else if (t != t_min) {
          t_uniform = false;
          t_min = std::min(t_min, t);
        }
        const double bound = params.alpha * p * static_cast<double>(t);
        for (const auto& [y, acc] : by_y) {
          const double w = acc.first / static_cast<double>(acc.second);
          if (w > bound) trial_ok = false;
          if (w > c2.statistic || c2.witness.empty()) {
            c2.statistic = std::max(c2.statistic, w);
            c2.witness = {{"trial", trial}, {"x", x}, {"y", y}, {"t", t}};
          }
          ratio_max = std::max(ratio_max, w / bound);
        }
      }
      if (!trial_ok) ++fail2;
    }
  }
  const double n_trials = static_cast<double>(trials);
  c1.pass = fail1 == 0;
  c1.params = {{"p", p}, {"trials", trials}, {"failure_frequency", trials ? fail1 / n_trials : 0.0}};
  c2.threshold = params.alpha * p * static_cast<double>(t_min);
  c2.pass = fail2 == 0;
  c2.params = {{"p", p},
               {"alpha", params.alpha},
               {"t", t_min},
               {"trials", trials},
               {"failure_frequency", trials ? fail2 / n_trials : 0.0},
               {"max_ratio", ratio_max}};
  if (!t_uniform) c2.note = "t(x) is not uniform; threshold shows the smallest observed t, pass uses each t(x)";
  return {c1, c2};
}

WeightFunction sample_anti_uniform(const SequenceSystem& sys, std::span<const WeightFunction> measures, int j,
                                   std::span<const std::size_t> indices, const GMode& g_mode, double f_keep,
                                   std::uint64_t seed, const ConvMode& mode) {
  const int k = sys.k();
  const auto& ground = sys.ground();
  if (j < 0 || j >= k) throw std::out_of_range("anti-uniform position out of range");
  require(static_cast<int>(indices.size()) == k - 1, "anti-uniform function needs k-1 indices");
  for (std::size_t a = 0; a < indices.size(); ++a) {
    require(indices[a] < measures.size(), "anti-uniform index exceeds the number of measures");
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      require(indices[a] != indices[b], "anti-uniform indices must be distinct");
    }
  }
  require(f_keep >= 0.0 && f_keep <= 1.0, "f_keep must lie in [0, 1]");
  if (g_mode.kind == GMode::supplied) {
    require(static_cast<int>(g_mode.functions.size()) == j, "supplied g needs one function per position before j");
  }
  std::vector<WeightFunction> args;
  args.reserve(k - 1);
  for (int q = 0; q < k - 1; ++q) {
    const int pos = q < j ? q : q + 1;
    if (pos < j) {
      switch (g_mode.kind) {
        case GMode::constant:
          require(g_mode.value >= 0.0 && g_mode.value <= 1.0, "constant g must lie in [0, 1]");
          args.push_back(WeightFunction::constant(ground, g_mode.value));
          break;
        case GMode::random_indicator:
          args.push_back(WeightFunction::indicator(
              ground, sample_subset(ground, g_mode.value, derive_seed(seed, {1u, static_cast<std::uint64_t>(pos)}))));
          break;
        case GMode::supplied: {
          const auto& g = g_mode.functions[pos];
          require(g.min_value() >= 0.0 && g.max_value() <= 1.0, "supplied g must take values in [0, 1]");
          args.push_back(g);
          break;
        }
      }
    } else {
      const auto& mu = measures[indices[q]];
      if (f_keep >= 1.0) {
        args.push_back(mu);
      } else {
        const auto key = derive_seed(seed, {2u, static_cast<std::uint64_t>(pos)});
        std::vector<std::pair<Index, double>> kept;
        for (Index x : mu.support()) {
          if (counter_uniform(key, x) < f_keep) kept.emplace_back(x, mu.at(x));
        }
        args.push_back(WeightFunction::sparse(ground, std::move(kept)));
      }
    }
  }
  return capped_convolve(sys, j, args, mode).values;
}

// --- tail bounds -----------------------------------------------------------

double bernstein_bound(double t, double m_bound, double variance_sum) {
  require(t > 0.0, "bernstein bound requires t > 0");
  require(m_bound > 0.0, "bernstein bound requires M > 0");
  require(variance_sum >= 0.0, "bernstein bound requires a non-negative variance sum");
  return std::exp(-t * t / (2.0 * (variance_sum + m_bound * t / 3.0)));
}

double correlation_bound(double lambda, double p, double size, double c_bound) {
  require(lambda > 0.0, "correlation bound requires lambda > 0");
  require(c_bound >= lambda, "correlation bound requires C >= lambda");
  require(p > 0.0 && p <= 1.0, "correlation bound requires 0 < p <= 1");
  require(size >= 1.0, "correlation bound requires |X| >= 1");
  return std::exp(-lambda * lambda * p * size / (3.0 * c_bound * c_bound));
}

double chernoff_bound(double delta, double p, double size) {
  require(delta > 0.0, "chernoff bound requires delta > 0");
  require(p > 0.0 && p <= 1.0, "chernoff bound requires 0 < p <= 1");
  require(size >= 1.0, "chernoff bound requires |X| >= 1");
  return 2.0 * std::exp(-delta * delta * p * size / 4.0);
}

double azuma_bound(double lambda, double c, double t) {
  require(lambda > 0.0, "azuma bound requires lambda > 0");
  require(c > 0.0, "azuma bound requires c > 0");
  require(t >= 1.0, "azuma bound requires t >= 1");
  return std::exp(-lambda * lambda / (2.0 * c * c * t));
}

double capped_excess_bound(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "capped-excess bound requires 0 < alpha <= 1");
  return 7.0 * alpha * std::exp(-1.0 / (14.0 * alpha));
}

double fiber_bound(double p, int l, double fiber_size) {
  require(p > 0.0 && p <= 1.0, "fiber bound requires 0 < p <= 1");
  require(l >= 0, "fiber bound requires l >= 0");
  require(fiber_size >= 1.0, "fiber bound requires a non-empty fiber");
  return 2.0 * std::exp(-std::pow(p, l) * fiber_size / 16.0);
}

double rounding_bound(double epsilon, double size, int k) {
  require(epsilon > 0.0, "rounding bound requires epsilon > 0");
  require(size >= 1.0, "rounding bound requires |X| >= 1");
  require(k >= 1, "rounding bound requires k >= 1");
  return 2.0 * std::exp(-epsilon * epsilon * size / (8.0 * k * k));
}

nlohmann::json JrResult::to_json() const {
  return {{"value", value},
          {"min_term", min_term},
          {"argmin_edges", argmin_edges},
          {"argmin_vertices", argmin_vertices},
          {"expectation", expectation}};
}

namespace {

double falling_d(double from, int count) {
  double r = 1.0;
  for (int i = 0; i < count; ++i) r *= from - i;
  return r;
}

double factorial_d(int k) { return falling_d(k, k); }

int vertex_count(const PatternHypergraph& pattern, const std::vector<int>& edges) {
  std::vector<char> seen(pattern.vertices, 0);
  int v = 0;
  for (int e : edges) {
    for (int x : pattern.edges[e]) {
      if (!seen[x]) {
        seen[x] = 1;
        ++v;
      }
    }
  }
  return v;
}

void check_jr(const PatternHypergraph& pattern, std::int64_t n, double p, double c, int roots) {
  require(p > 0.0 && p <= 1.0, "Janson-Rucinski bound requires 0 < p <= 1");
  require(c > 0.0, "Janson-Rucinski bound requires a positive constant c");
  require(n >= pattern.vertices, "Janson-Rucinski bound requires n >= v_K");
  require(pattern.edge_count() > roots, "pattern needs an edge beyond the root(s)");
  require(pattern.edge_count() <= 24, "pattern has too many edges for the subgraph scan");
}

// Scans L = roots ∪ T over non-empty T ⊆ other edges, minimizing term(L).
template <class Term>
JrResult jr_scan(const PatternHypergraph& pattern, const std::vector<int>& roots, std::int64_t n, double c,
                 Term&& term) {
  std::vector<int> rest;
  for (int e = 0; e < pattern.edge_count(); ++e) {
    if (std::find(roots.begin(), roots.end(), e) == roots.end()) rest.push_back(e);
  }
  JrResult r;
  bool first = true;
  for (std::uint32_t mask = 1; mask < (1u << rest.size()); ++mask) {
    std::vector<int> edges = roots;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (mask >> i & 1u) edges.push_back(rest[i]);
    }
    std::sort(edges.begin(), edges.end());
    const int v = vertex_count(pattern, edges);
    const double t = std::pow(term(static_cast<int>(edges.size()), v), 1.0 / v);
    if (first || t < r.min_term) {
      r.min_term = t;
      r.argmin_edges = edges;
      r.argmin_vertices = v;
      first = false;
    }
  }
  const double log_value = std::log(2.0) + pattern.vertices * std::log(static_cast<double>(n)) - c * r.min_term;
  r.value = std::exp(log_value);
  return r;
}

}  // namespace

double jr_rooted_expectation(const PatternHypergraph& pattern, std::int64_t n, double p) {
  const int k = pattern.k;
  return std::pow(p, pattern.edge_count() - 1) * factorial_d(k) *
         falling_d(static_cast<double>(n - k), pattern.vertices - k);
}

JrResult jr_rooted_bound(const PatternHypergraph& pattern, int root, std::int64_t n, double p, double c) {
  check_jr(pattern, n, p, c, 1);
  require(root >= 0 && root < pattern.edge_count(), "root edge index out of range");
  const int k = pattern.k;
  auto term = [&](int e_l, int v_l) {
    return std::pow(p, e_l - 1) * factorial_d(k) * falling_d(static_cast<double>(n - k), v_l - k);
  };
  auto r = jr_scan(pattern, {root}, n, c, term);
  r.expectation = jr_rooted_expectation(pattern, n, p);
  return r;
}

JrResult jr_two_edge_bound(const PatternHypergraph& pattern, int e1, int e2, std::int64_t n, double p, double gamma,
                           double c) {
  check_jr(pattern, n, p, c, 2);
  require(gamma >= 2.0, "two-edge Janson-Rucinski bound requires gamma >= 2");
  require(e1 >= 0 && e1 < pattern.edge_count() && e2 >= 0 && e2 < pattern.edge_count(), "root edge index out of range");
  require(e1 != e2, "two-edge bound needs two different root edges");
  const int k = pattern.k;
  const int h = vertex_count(pattern, {e1, e2});
  const int shared = 2 * k - h;
  const double roots = factorial_d(shared) * factorial_d(k - shared) * factorial_d(k - shared);
  auto expect = [&](int e_l, int v_l) {
    return std::pow(p, e_l - 2) * roots * falling_d(static_cast<double>(n - h), v_l - h);
  };
  auto r = jr_scan(pattern, {std::min(e1, e2), std::max(e1, e2)}, n, c,
                   [&](int e_l, int v_l) { return gamma * expect(e_l, v_l); });
  r.expectation = expect(pattern.edge_count(), pattern.vertices);
  return r;
}

nlohmann::json tail_bound(const std::string& kind, const nlohmann::json& params) {
  auto num = [&](const char* key) {
    if (!params.contains(key)) throw std::invalid_argument("tail bound '" + kind + "' needs parameter '" + key + "'");
    return params.at(key).get<double>();
  };
  nlohmann::json out = {{"kind", kind}, {"params", params}};
  if (kind == "bernstein") {
    out["value"] = bernstein_bound(num("t"), num("M"), num("variance_sum"));
  } else if (kind == "correlation") {
    out["value"] = correlation_bound(num("lambda"), num("p"), num("size"), num("C"));
  } else if (kind == "chernoff") {
    out["value"] = chernoff_bound(num("delta"), num("p"), num("size"));
  } else if (kind == "azuma") {
    out["value"] = azuma_bound(num("lambda"), num("c"), num("t"));
  } else if (kind == "capped_excess") {
    out["value"] = capped_excess_bound(num("alpha"));
  } else if (kind == "fiber") {
    out["value"] = fiber_bound(num("p"), static_cast<int>(num("l")), num("fiber_size"));
  } else if (kind == "rounding") {
    out["value"] = rounding_bound(num("epsilon"), num("size"), static_cast<int>(num("k")));
  } else if (kind == "jr_rooted" || kind == "jr_two_edge") {
    if (!params.contains("pattern")) throw std::invalid_argument("tail bound '" + kind + "' needs parameter 'pattern'");
    const auto pattern = PatternHypergraph::from_json(params.at("pattern"));
    const auto n = static_cast<std::int64_t>(num("n"));
    const JrResult r = kind == "jr_rooted"
                           ? jr_rooted_bound(pattern, params.value("root", 0), n, num("p"), num("c"))
                           : jr_two_edge_bound(pattern, params.value("e1", 0), params.value("e2", 1), n, num("p"),
                                               num("gamma"), num("c"));
    out.update(r.to_json());
  } else {
    throw std::invalid_argument("unknown tail bound '" + kind + "'");
  }
  return out;
}

}  // namespace sparselab
