// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances and trial counts are fixed below.
//
//   acceptance            run everything
//   acceptance 2 5        run selected criteria

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sparselab/experiment.hpp"
#include "sparselab/oracles.hpp"
#include "sparselab/sample.hpp"
#include "sparselab/transfer.hpp"
#include "sparselab/verify.hpp"

using namespace sparselab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

constexpr std::int64_t kBig = 10007;

// 1. ap diagnostics at 101 (exhaustive) and 1009 (sampled).
Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream d;
  for (std::int64_t n : {101, 1009}) {
    const auto sys = SequenceSystem::build(SystemDescriptor::ap(n, 3));
    const bool small = n == 101;
    const auto h = verify_homogeneity(sys, small ? 1000 : 10000, 1);
    TwoDofMode tm;
    tm.exhaustive = small;
    tm.samples = 10000;
    tm.seed = 1;
    const auto two = verify_two_dof(sys, tm);
    const auto prof = pair_profile(sys, small ? 1000 : 10000, 1);
    const bool fib = std::all_of(h.fiber_sizes.begin(), h.fiber_sizes.end(),
                                 [&](std::uint64_t s) { return s == static_cast<std::uint64_t>(n - 1); });
    const bool this_ok = h.homogeneous && fib && two.two_dof && two.exhaustive == small &&
                         (small || two.probes >= 10000) && prof.uniform && prof.sigma == 1u &&
                         prof.t == static_cast<std::uint64_t>(n - 1);
    ok = ok && this_ok;
    d << "n=" << n << (this_ok ? " ok" : " BAD") << " (probes " << two.probes << ") ";
  }
  const double secs = seconds_since(start);
  d << fmt("%.2fs", secs);
  return {ok && secs < 5.0, d.str()};
}

// 2 and 3 go through the sweep runner so the numbers match `sparselab sweep`.
SweepResult big_sweep(double c, const std::string& target) {
  SweepConfig cfg;
  cfg.system = SystemDescriptor::ap(kBig, 3);
  cfg.c_grid = {c};
  cfg.trials = 100;
  cfg.seed = 2024;
  cfg.target = target;
  cfg.delta = 0.9;
  return run_sweep(cfg);
}

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = big_sweep(8.0, "count");
  int hits = 0;
  double lo = 1e9, hi = 0.0;
  for (const auto& rec : r.records) {
    const double v = rec.stats.back().value;
    hits += v >= 0.5 && v <= 2.0;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double secs = seconds_since(start);
  return {hits >= 95 && secs < 60.0,
          fmt("%d/100 in [0.5,2], range [%.3f, %.3f], %.1fs", hits, lo, hi, secs)};
}

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = big_sweep(0.1, "density");
  int hits = 0;
  double worst = 1.0;
  for (const auto& rec : r.records) {
    const double v = rec.stats.back().value;
    hits += v >= 0.9;
    worst = std::min(worst, v);
  }
  const double secs = seconds_since(start);
  return {hits >= 90 && secs < 60.0, fmt("%d/100 with density >= 0.9, min %.3f, %.1fs", hits, worst, secs)};
}

// 4. Properties 0-2 on 100 ensembles of m = 4 sets.
Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const auto sys = SequenceSystem::build(SystemDescriptor::ap(kBig, 3));
  const double p = 8.0 / std::sqrt(static_cast<double>(kBig));
  int ok0 = 0, ok1 = 0, ok2 = 0;
  double worst0 = 0.0, worst1 = 0.0, worst2 = 0.0, max_se = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto seed = derive_seed(4, {t});
    const auto ens = sample_ensemble(sys.ground(), p, 4, seed);
    PropertyParams pp;
    pp.eta = 0.1;
    pp.tolerance = 0.05;
    pp.sup_bound = 1.5;
    pp.seed = seed;
    pp.check_property3 = false;
    const auto reps = check_properties(sys, ens, pp);
    ok0 += reps[0].pass;
    ok1 += reps[1].pass;
    ok2 += reps[2].pass;
    worst0 = std::max(worst0, reps[0].statistic);
    worst1 = std::max(worst1, reps[1].statistic);
    worst2 = std::max(worst2, reps[2].statistic);
    max_se = std::max({max_se, reps[1].stderr_, reps[2].stderr_});
  }
  const double secs = seconds_since(start);
  return {ok0 >= 95 && ok1 >= 95 && ok2 >= 95,
          fmt("P0 %d/100 (max %.4f), P1 %d/100 (max %.4f), P2<=1.5 %d/100 (max %.4f), stderr %.2g, %.1fs", ok0,
              worst0, ok1, worst1, ok2, worst2, max_se, secs)};
}

// 5. Dense model and counting lemma on Z_101.
Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const nlohmann::json ap101 = SystemDescriptor::ap(101, 3).to_json();
  int hits = 0, limits = 0;
  double max_norm = 0.0, max_ratio = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto r = run_check("dense-model",
                             {{"system", ap101}, {"p", 0.3}, {"m", 4}, {"family_size", 256}, {"seed", 500 + t}});
    const auto& lemma = r.report["counting_lemma"];
    const double gap = lemma["gap"].get<double>();
    const double bound = lemma["bound"].get<double>();
    hits += r.report["counting_lemma"]["pass"].get<bool>();
    limits += r.report["model"]["status"] == "iteration_limit";
    max_norm = std::max(max_norm, r.report["model"]["achieved_norm"].get<double>());
    if (bound > 0.0) max_ratio = std::max(max_ratio, gap / bound);
  }
  const double secs = seconds_since(start);
  return {hits >= 90 && secs < 600.0, fmt("%d/100 within 4k*eta'+3se, max eta' %.4f, max gap/bound %.3f, "
                                          "%d iteration limits, %.1fs",
                                          hits, max_norm, max_ratio, limits, secs)};
}

// 6. Exact oracle values.
Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const auto k3 = PatternHypergraph::complete_graph(3);
  const auto ex = extremal_number(5, k3).value;
  const auto r6 = ramsey_multiplicity(PatternHypergraph::complete_graph(6), k3, 2, SearchMode::exhaustive);
  const auto r5 = ramsey_multiplicity(PatternHypergraph::complete_graph(5), k3, 2, SearchMode::exhaustive);
  const auto z5 = SequenceSystem::build(SystemDescriptor::ap(5, 3));
  // the largest AP-free subset has size 2: size 2 is free, size 3 is not
  const auto v2 = varnavides_count(z5, 2.0 / 5.0);
  const auto v3 = varnavides_count(z5, 3.0 / 5.0);
  const auto ss = supersaturation_count(PatternHypergraph::complete_graph(5), k3).labeled;
  const double secs = seconds_since(start);
  const bool ok = ex == 6 && r6.exact && r6.unordered() == 2 && r5.exact && r5.count == 0 && v2.count == 0 &&
                  v3.count > 0 && ss == 60 && secs < 60.0;
  return {ok, fmt("ex(5,K3)=%llu, R(K6)=%llu, R(K5)=%llu, Z5 free sizes 2:%llu 3:%llu, K3 in K5=%llu, %.2fs",
                  (unsigned long long)ex, (unsigned long long)r6.unordered(), (unsigned long long)r5.count,
                  (unsigned long long)v2.count, (unsigned long long)v3.count, (unsigned long long)ss, secs)};
}

// 7. Pattern statistics as exact rationals.
Outcome criterion7() {
  const auto k3 = pattern_stats(PatternHypergraph::complete_graph(3));
  const auto k4 = pattern_stats(PatternHypergraph::complete_graph(4));
  const auto fano = pattern_stats(PatternHypergraph::fano_plane());
  const bool ok = k3.m_k == Rational::make(2, 1) && k4.m_k == Rational::make(5, 2) &&
                  k4.critical_exponent == Rational::make(2, 5) && fano.m_k == Rational::make(3, 2) &&
                  fano.critical_exponent == Rational::make(2, 3);
  return {ok, "m(K3)=" + k3.m_k.str() + ", m(K4)=" + k4.m_k.str() + " exp " + k4.critical_exponent.str() +
                  ", m(Fano)=" + fano.m_k.str() + " exp " + fano.critical_exponent.str()};
}

// 8. Tail values, monotonicity, correlation bound against simulation.
Outcome criterion8() {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double e1 = rel(chernoff_bound(1.0, 0.5, 8.0), 2.0 * std::exp(-1.0));
  const double e2 = rel(bernstein_bound(1.0, 1.0, 1.0), std::exp(-3.0 / 8.0));
  const double e3 = rel(capped_excess_bound(1.0 / 14.0), std::exp(-1.0) / 2.0);
  const bool values = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12;

  int violations = 0;
  for (int i = 1; i < 40; ++i) {
    const double a = 0.05 * i, b = 0.05 * (i + 1);
    violations += !(chernoff_bound(b, 0.3, 500.0) <= chernoff_bound(a, 0.3, 500.0));
    violations += !(bernstein_bound(b, 1.0, 4.0) <= bernstein_bound(a, 1.0, 4.0));
    violations += !(bernstein_bound(a, 1.0, 5.0) >= bernstein_bound(a, 1.0, 4.0));
    violations += !(azuma_bound(b, 1.0, 10.0) <= azuma_bound(a, 1.0, 10.0));
    violations += !(rounding_bound(b, 1000.0, 3) <= rounding_bound(a, 1000.0, 3));
  }
  for (int i = 1; i < 19; ++i) {
    const double p = 0.05 * i, q = 0.05 * (i + 1);
    violations += !(chernoff_bound(0.5, q, 500.0) <= chernoff_bound(0.5, p, 500.0));
    violations += !(correlation_bound(0.1, q, 500.0, 1.0) <= correlation_bound(0.1, p, 500.0, 1.0));
    violations += !(fiber_bound(q, 2, 1000.0) <= fiber_bound(p, 2, 1000.0));
    violations += !(capped_excess_bound(q) >= capped_excess_bound(p));
  }
  for (double c : {1.0, 2.0, 4.0}) {
    violations += !(correlation_bound(0.1, 0.2, 1000.0, 2.0 * c) >= correlation_bound(0.1, 0.2, 1000.0, c));
  }

  // ψ ≡ 1 on Z_1000: ⟨μ − 1, ψ⟩ = |U|/(p|X|) − 1
  const auto g = GroundSet::cyclic(1000);
  const double p = 0.2, lambda = 0.1;
  const int trials = 10000;
  int exceed = 0;
  for (int t = 0; t < trials; ++t) {
    const auto u = sample_subset(g, p, derive_seed(31, {static_cast<std::uint64_t>(t)}));
    exceed += std::abs(static_cast<double>(u.size()) / (p * 1000.0) - 1.0) >= lambda;
  }
  const double empirical = static_cast<double>(exceed) / trials;
  const double bound = correlation_bound(lambda, p, 1000.0, 1.0);
  return {values && violations == 0 && empirical <= bound,
          fmt("rel errors %.1e %.1e %.1e, %d monotonicity violations, empirical %.4f <= bound %.4f", e1, e2, e3,
              violations, empirical, bound)};
}

// 9. Byte-identical CSV for 1, 2 and 4 threads, all three targets.
Outcome criterion9() {
  bool ok = true;
  std::size_t bytes = 0;
  for (const char* target : {"count", "density", "colouring"}) {
    SweepConfig cfg;
    cfg.system = SystemDescriptor::ap(1009, 3);
    cfg.c_grid = {0.5, 2.0, 8.0};
    cfg.trials = 8;
    cfg.seed = 77;
    cfg.target = target;
    std::string first;
    for (unsigned threads : {1u, 2u, 4u}) {
      cfg.threads = threads;
      std::ostringstream out;
      write_csv(out, run_sweep(cfg));
      if (threads == 1) {
        first = out.str();
        bytes += first.size();
      } else {
        ok = ok && out.str() == first;
      }
    }
    std::ostringstream again;
    cfg.threads = 1;
    write_csv(again, run_sweep(cfg));
    ok = ok && again.str() == first;
  }
  return {ok, fmt("3 targets x threads {1,2,4} + rerun, %zu CSV bytes compared", bytes)};
}

// 10. Copy counts against the copy-system functional on every graph with
// at most 7 vertices, one representative per isomorphism class.
struct GraphClasses {
  int n;
  std::vector<std::array<int, 2>> pairs;
  std::vector<std::vector<int>> perm_maps;  // edge-bit image under each vertex permutation

  explicit GraphClasses(int n_) : n(n_) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) pairs.push_back({a, b});
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    do {
      std::vector<int> map(pairs.size());
      for (std::size_t e = 0; e < pairs.size(); ++e) {
        int a = perm[pairs[e][0]], b = perm[pairs[e][1]];
        if (a > b) std::swap(a, b);
        map[e] = static_cast<int>(std::find(pairs.begin(), pairs.end(), std::array<int, 2>{a, b}) - pairs.begin());
      }
      perm_maps.push_back(std::move(map));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  std::uint32_t canonical(std::uint32_t mask) const {
    std::uint32_t best = mask;
    for (const auto& map : perm_maps) {
      std::uint32_t img = 0;
      for (std::uint32_t m = mask; m; m &= m - 1) img |= 1u << map[std::countr_zero(m)];
      best = std::min(best, img);
    }
    return best;
  }

  // Breadth-first by edge count: every class with e+1 edges is an
  // augmentation of some class with e edges.
  std::vector<std::uint32_t> all() const {
    std::vector<std::uint32_t> out{0};
    std::vector<std::uint32_t> level{0};
    while (!level.empty()) {
      std::set<std::uint32_t> next;
      for (auto g : level) {
        for (std::size_t e = 0; e < pairs.size(); ++e) {
          if (!(g >> e & 1u)) next.insert(canonical(g | 1u << e));
        }
      }
      level.assign(next.begin(), next.end());
      out.insert(out.end(), level.begin(), level.end());
    }
    return out;
  }
};

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  const std::array<std::size_t, 8> known = {1, 1, 2, 4, 11, 34, 156, 1044};
  const std::vector<std::pair<std::string, PatternHypergraph>> patterns = {
      {"K3", PatternHypergraph::complete_graph(3)},
      {"K4", PatternHypergraph::complete_graph(4)},
      {"C4", PatternHypergraph::cycle(4)}};
  std::size_t graphs = 0, comparisons = 0, mismatches = 0;
  bool classes_ok = true;
  for (int n = 1; n <= 7; ++n) {
    const auto classes = GraphClasses(n).all();
    classes_ok = classes_ok && classes.size() == known[n];
    graphs += classes.size();
    for (const auto& [name, pattern] : patterns) {
      if (n < pattern.vertices) continue;
      const auto sys = SequenceSystem::build(SystemDescriptor::copies(n, pattern));
      GraphClasses shape(n);
      for (auto mask : classes) {
        PatternHypergraph host{2, n, {}};
        std::vector<Index> ids;
        for (std::size_t e = 0; e < shape.pairs.size(); ++e) {
          if (mask >> e & 1u) {
            host.edges.push_back({shape.pairs[e][0], shape.pairs[e][1]});
            ids.push_back(sys.ground().index({shape.pairs[e][0], shape.pairs[e][1]}));
          }
        }
        std::sort(ids.begin(), ids.end());
        const auto f = WeightFunction::indicator(sys.ground(), ElementSet(sys.ground().size(), ids));
        const double renorm = count_functional(sys, f).value * static_cast<double>(sys.total_size());
        const auto direct = supersaturation_count(host, pattern).labeled;
        ++comparisons;
        mismatches += std::abs(renorm - static_cast<double>(direct)) > 1e-6;
      }
    }
  }
  return {classes_ok && mismatches == 0,
          fmt("%zu isomorphism classes (n<=7), %zu comparisons, %zu mismatches, %.1fs", graphs, comparisons,
              mismatches, seconds_since(start))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }
  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > 10) {
      std::printf("FAIL criterion %d: no such criterion\n", id);
      ++failed;
      continue;
    }
    Outcome o;
    try {
      o = criteria[id - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
