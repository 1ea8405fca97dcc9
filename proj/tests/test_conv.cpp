#include <doctest.h>

#include <random>

#include "sparselab/conv.hpp"

using namespace sparselab;

namespace {

// Independent oracle: all APs (x, x+d, ..) mod prime n with d != 0.
std::vector<std::vector<Index>> brute_aps(std::int64_t n, int k) {
  std::vector<std::vector<Index>> out;
  for (std::int64_t x = 0; x < n; ++x) {
    for (std::int64_t d = 1; d < n; ++d) {
      std::vector<Index> t;
      for (int i = 0; i < k; ++i) t.push_back(static_cast<Index>((x + i * d) % n));
      out.push_back(t);
    }
  }
  return out;
}

std::vector<double> brute_convolve(const std::vector<std::vector<Index>>& tuples, Index size, int j,
                                   const std::vector<WeightFunction>& by_position) {
  std::vector<double> sum(size, 0.0), cnt(size, 0.0);
  for (const auto& t : tuples) {
    double prod = 1.0;
    for (std::size_t q = 0; q < t.size(); ++q) {
      if (static_cast<int>(q) != j) prod *= by_position[q].at(t[q]);
    }
    sum[t[j]] += prod;
    cnt[t[j]] += 1.0;
  }
  for (Index x = 0; x < size; ++x) sum[x] = cnt[x] > 0 ? sum[x] / cnt[x] : 0.0;
  return sum;
}

WeightFunction random_nonneg(const GroundSet& g, std::mt19937_64& rng, double density, double scale, bool sparse) {
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> val(0.0, scale);
  std::vector<double> v(g.size(), 0.0);
  for (auto& x : v) {
    if (keep(rng)) x = val(rng);
  }
  auto f = WeightFunction::dense(g, std::move(v));
  return sparse ? f.to_sparse() : f;
}

std::vector<WeightFunction> skip(const std::vector<WeightFunction>& by_position, int j) {
  std::vector<WeightFunction> out;
  for (int q = 0; q < static_cast<int>(by_position.size()); ++q) {
    if (q != j) out.push_back(by_position[q]);
  }
  return out;
}

}  // namespace

TEST_CASE("convolution of constants and zeros") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(11, 4));
  const auto& g = sys.ground();
  std::vector<WeightFunction> ones(3, WeightFunction::constant(g, 1.0));
  for (int j = 0; j < 4; ++j) {
    auto r = convolve(sys, j, ones);
    REQUIRE(r.values.constant_value());
    CHECK(*r.values.constant_value() == 1.0);
  }
  std::mt19937_64 rng(3);
  std::vector<WeightFunction> mixed = {random_nonneg(g, rng, 0.5, 3.0, false), WeightFunction::constant(g, 0.0),
                                       random_nonneg(g, rng, 0.5, 3.0, true)};
  auto r = convolve(sys, 1, mixed);
  CHECK(lp_norm(r.values, Norm::linf) == 0.0);
}

TEST_CASE("convolution worked example on Z_5") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(5, 3));
  auto mu = make_measure(sys.ground(), ElementSet(5, {0, 1}), MeasureMode::characteristic);
  CHECK(mu.at(0) == 2.5);
  std::vector<WeightFunction> funcs = {mu, mu};
  auto r = convolve(sys, 0, funcs);
  CHECK(r.values.at(4) == doctest::Approx(1.5625));
  CHECK(r.values.at(0) == 0.0);
  auto c = capped_convolve(sys, 0, funcs);
  CHECK(c.values.at(4) == doctest::Approx(1.5625));
  CHECK(count_functional(sys, mu).value == 0.0);
}

TEST_CASE("exact convolution matches brute force") {
  std::mt19937_64 rng(11);
  for (int k : {3, 4}) {
    auto sys = SequenceSystem::build(SystemDescriptor::ap(11, k));
    const auto tuples = brute_aps(11, k);
    const auto& g = sys.ground();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<WeightFunction> by_position;
      for (int q = 0; q < k; ++q) {
        // mix of dense, sparse and constant arguments
        if ((trial + q) % 5 == 0) {
          by_position.push_back(WeightFunction::constant(g, 1.5));
        } else {
          by_position.push_back(random_nonneg(g, rng, 0.2 + 0.1 * q, 4.0, (trial + q) % 2 == 0));
        }
      }
      for (int j = 0; j < k; ++j) {
        auto r = convolve(sys, j, skip(by_position, j));
        auto expect = brute_convolve(tuples, g.size(), j, by_position);
        for (Index x = 0; x < g.size(); ++x) CHECK(close_rel(r.values.at(x), expect[x], 1e-12));
      }
    }
  }
}

TEST_CASE("adjointness on APs and triangle copies") {
  std::mt19937_64 rng(5);
  std::vector<SequenceSystem> systems = {SequenceSystem::build(SystemDescriptor::ap(11, 3)),
                                         SequenceSystem::build(SystemDescriptor::ap(11, 5)),
                                         SequenceSystem::build(SystemDescriptor::copies(7, PatternHypergraph::complete_graph(3)))};
  for (const auto& sys : systems) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<WeightFunction> h;
      for (int q = 0; q < sys.k(); ++q) h.push_back(random_nonneg(sys.ground(), rng, 0.7, 2.0, q % 2 == 1));
      const double common = multilinear_count(sys, h).value;
      // brute-force sum over the whole system
      double brute = 0.0;
      sys.for_each({}, [&](std::span<const Index> t) {
        double prod = 1.0;
        for (int q = 0; q < sys.k(); ++q) prod *= h[q].at(t[q]);
        brute += prod;
      });
      CHECK(close_rel(common, brute / static_cast<double>(sys.total_size()), 1e-12));
      for (int j = 0; j < sys.k(); ++j) {
        CHECK(close_rel(inner_product(h[j], convolve(sys, j, skip(h, j)).values), common, 1e-12));
      }
    }
  }
}

TEST_CASE("capping and monotonicity") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(31, 3));
  const auto& g = sys.ground();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<WeightFunction> funcs = {random_nonneg(g, rng, 0.3, 6.0, false), random_nonneg(g, rng, 0.3, 6.0, true)};
    auto full = convolve(sys, 1, funcs).values;
    auto capped = capped_convolve(sys, 1, funcs).values;
    for (Index x = 0; x < g.size(); ++x) {
      CHECK(capped.at(x) >= 0.0);
      CHECK(capped.at(x) <= std::min(full.at(x), kCap) + 1e-15);
      if (full.at(x) <= kCap) CHECK(capped.at(x) == full.at(x));
    }
    std::vector<WeightFunction> bigger = {funcs[0].plus(random_nonneg(g, rng, 0.5, 1.0, false)),
                                          funcs[1].plus(WeightFunction::constant(g, 0.25).to_dense())};
    auto more = convolve(sys, 1, bigger).values;
    for (Index x = 0; x < g.size(); ++x) CHECK(more.at(x) >= full.at(x) - 1e-12);
  }
  // saturation with sparse associated measures
  auto mu = make_measure(g, ElementSet(31, {0, 1, 2, 3, 4, 5, 6}), MeasureMode::associated, 0.05);
  std::vector<WeightFunction> funcs = {mu, mu};
  auto c = capped_convolve(sys, 0, funcs).values;
  CHECK(c.max_value() == kCap);
  std::vector<WeightFunction> negative = {mu, mu.scaled(-1.0)};
  CHECK_THROWS_AS(capped_convolve(sys, 0, negative), std::invalid_argument);
}

TEST_CASE("monte carlo convolution agrees with exact") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(101, 3));
  const auto& g = sys.ground();
  std::mt19937_64 rng(21);
  std::vector<WeightFunction> funcs = {random_nonneg(g, rng, 0.6, 2.0, false), random_nonneg(g, rng, 0.6, 2.0, false)};
  auto exact = convolve(sys, 2, funcs);
  auto mode = ConvMode::monte_carlo(4000, 77);
  auto mc = convolve(sys, 2, funcs, mode);
  mode.threads = 4;
  auto mc4 = convolve(sys, 2, funcs, mode);
  CHECK(mc.values.values() == mc4.values.values());
  CHECK_FALSE(mc.exact);
  int outside = 0;
  for (Index x = 0; x < g.size(); ++x) {
    if (std::abs(mc.values.at(x) - exact.values.at(x)) > 3.0 * mc.stderrs[x]) ++outside;
  }
  CHECK(outside <= 3);
}

TEST_CASE("count functional") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(11, 3));
  const auto& g = sys.ground();
  CHECK(count_functional(sys, WeightFunction::constant(g, 1.0)).value == 1.0);
  CHECK(count_functional(sys, WeightFunction::constant(g, 0.0)).value == 0.0);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_nonneg(g, rng, 0.5, 3.0, trial % 2 == 0);
    std::vector<WeightFunction> ff = {f, f};
    CHECK(close_rel(count_functional(sys, f).value, inner_product(f, convolve(sys, 0, ff).values), 1e-12));
  }
  auto big = SequenceSystem::build(SystemDescriptor::ap(1009, 3));
  auto f = random_nonneg(big.ground(), rng, 0.5, 2.0, false);
  auto exact = count_functional(big, f);
  auto mc = count_functional(big, f, ConvMode::monte_carlo(200000, 4));
  CHECK(std::abs(mc.value - exact.value) <= 3.0 * mc.stderr_);
  auto mc_threads = ConvMode::monte_carlo(200000, 4);
  mc_threads.threads = 3;
  CHECK(count_functional(big, f, mc_threads).value == mc.value);
  ConvMode tight;
  tight.guard = 10;
  CHECK_THROWS_AS(count_functional(big, f, tight), GuardExceeded);
}

TEST_CASE("split capped count") {
  std::mt19937_64 rng(8);
  auto sys = SequenceSystem::build(SystemDescriptor::ap(7, 3));
  const auto& g = sys.ground();
  // m = 1 with an uncapped convolution
  auto f = random_nonneg(g, rng, 1.0, 1.0, false);
  std::vector<WeightFunction> one = {f};
  CHECK(close_rel(split_capped_count(sys, one).value, count_functional(sys, f).value, 1e-12));

  // m = 2, two disjoint characteristic measures, against the explicit double sum
  auto a = make_measure(g, ElementSet(7, {0, 1, 3}), MeasureMode::characteristic);
  auto b = make_measure(g, ElementSet(7, {2, 4, 5}), MeasureMode::characteristic);
  std::vector<WeightFunction> fs = {a, b};
  const auto tuples = brute_aps(7, 3);
  double brute = 0.0;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int i2 = 0; i2 < 2; ++i2) {
      for (int i3 = 0; i3 < 2; ++i3) {
        std::vector<WeightFunction> by_position = {fs[i1], fs[i2], fs[i3]};
        auto conv = brute_convolve(tuples, 7, 0, by_position);
        double ip = 0.0;
        for (Index x = 0; x < 7; ++x) ip += fs[i1].at(x) * std::min(conv[x], 2.0);
        brute += ip / 7.0;
      }
    }
  }
  CHECK(close_rel(split_capped_count(sys, fs).value, brute / 8.0, 1e-12));

  // capping never increases the count of the mean
  auto big = SequenceSystem::build(SystemDescriptor::ap(31, 3));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<WeightFunction> parts;
    for (int i = 0; i < 3; ++i) parts.push_back(random_nonneg(big.ground(), rng, 0.2, 8.0, false));
    WeightFunction mean = parts[0].plus(parts[1]).plus(parts[2]).scaled(1.0 / 3.0);
    CHECK(split_capped_count(big, parts).value <= count_functional(big, mean).value + 1e-12);
  }
}

TEST_CASE("telescoping gap bound") {
  auto sys = SequenceSystem::build(SystemDescriptor::ap(11, 3));
  const auto& g = sys.ground();
  std::mt19937_64 rng(12);
  auto f = random_nonneg(g, rng, 0.6, 2.0, false);
  auto same = counting_gap_bound(sys, f, f);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  auto zero = counting_gap_bound(sys, f, WeightFunction::constant(g, 0.0));
  CHECK(close_rel(zero.telescoped, count_functional(sys, f).value, 1e-12));
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_nonneg(g, rng, 0.7, 2.0, trial % 2 == 0);
    auto b = random_nonneg(g, rng, 0.7, 1.0, false);
    auto r = counting_gap_bound(sys, a, b);
    CHECK(r.lhs <= r.rhs + 1e-9);
    CHECK(close_rel(r.telescoped, count_functional(sys, a).value - count_functional(sys, b).value, 1e-10));
  }
}

TEST_CASE("capping error stays within twice the measured eta") {
  // Small instance where the hypotheses are measured rather than assumed.
  auto sys = SequenceSystem::build(SystemDescriptor::ap(31, 3));
  const auto& g = sys.ground();
  const int m = 4, k = 3;
  std::mt19937_64 rng(40);
  std::vector<WeightFunction> mus, fs;
  for (int i = 0; i < m; ++i) {
    std::vector<Index> members;
    for (Index x = 0; x < g.size(); ++x) {
      if (std::bernoulli_distribution(0.6)(rng)) members.push_back(x);
    }
    mus.push_back(make_measure(g, ElementSet(g.size(), members), MeasureMode::associated, 0.6));
    fs.push_back(mus.back().times(random_nonneg(g, rng, 1.0, 1.0, false)));
  }
  double eta = 2.0 * k * k * k / m;  // the lemma's requirement on m, read as a lower bound on eta
  bool bounded = true;
  for (int i2 = 0; i2 < m; ++i2) {
    for (int i3 = 0; i3 < m; ++i3) {
      if (i2 == i3) continue;
      std::vector<WeightFunction> args = {mus[i2], mus[i3]};
      auto full = convolve(sys, 0, args).values;
      auto capped = capped_convolve(sys, 0, args).values;
      eta = std::max(eta, lp_norm(full.plus(capped, -1.0), Norm::l1));
      std::vector<WeightFunction> p2 = {WeightFunction::constant(g, 1.0), mus[i3]};
      bounded = bounded && convolve(sys, 1, p2).values.max_value() <= 2.0;
    }
  }
  REQUIRE(bounded);
  auto gfun = random_nonneg(g, rng, 1.0, 1.0, false);
  auto r = precounting_discrepancy(sys, fs, gfun);
  CHECK(r.discrepancy <= 2.0 * eta);
  // with g equal to every f_i and no capping active the correction vanishes
  auto flat = WeightFunction::constant(g, 0.5);
  std::vector<WeightFunction> equal = {flat, flat};
  auto z = precounting_discrepancy(sys, equal, flat);
  CHECK(std::abs(z.discrepancy) < 1e-12);
  CHECK(std::abs(z.correction) < 1e-12);
}

TEST_CASE("W kernel") {
  const std::int64_t n = 13;
  auto sys = SequenceSystem::build(SystemDescriptor::ap(n, 3));
  const auto& g = sys.ground();
  const double p = 0.25;
  auto mu = make_measure(g, ElementSet(n, {1, 4, 6, 7}), MeasureMode::associated, p);
  std::vector<WeightFunction> mid = {mu};
  const std::int64_t half = mod_inverse(2, n);
  for (Index x = 0; x < g.size(); ++x) {
    for (Index y = 0; y < g.size(); ++y) {
      auto w = w_kernel(sys, mid, x, y);
      if (x == y) {
        CHECK(w.empty);
        continue;
      }
      CHECK(w.size == 1);
      const Index midpoint = static_cast<Index>(mod((static_cast<std::int64_t>(x + y)) * half, n));
      CHECK(w.value == mu.at(midpoint));
      CHECK(w.value <= 1.0 / p);
    }
  }
  std::vector<WeightFunction> ones = {WeightFunction::constant(g, 1.0)};
  CHECK(w_kernel(sys, ones, 0, 5).value == 1.0);
  auto k4 = SequenceSystem::build(SystemDescriptor::ap(n, 4));
  std::vector<WeightFunction> mid2 = {mu, mu};
  for (Index y = 1; y < g.size(); ++y) CHECK(w_kernel(k4, mid2, 0, y).value <= 1.0 / (p * p));
}

TEST_CASE("restricted enumeration agrees with a full scan on composite moduli") {
  std::mt19937_64 rng(31);
  for (auto desc : {SystemDescriptor::ap(12, 4), SystemDescriptor::ap(15, 3), SystemDescriptor::ap(12, 3, true),
                    SystemDescriptor::ap_interval(20, 3), SystemDescriptor::schur(11)}) {
    auto sys = SequenceSystem::build(desc);
    const auto& g = sys.ground();
    std::vector<std::vector<Index>> tuples;
    sys.for_each({}, [&](std::span<const Index> t) { tuples.emplace_back(t.begin(), t.end()); });
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<WeightFunction> by_position;
      for (int q = 0; q < sys.k(); ++q) by_position.push_back(random_nonneg(g, rng, 0.3, 2.0, q % 2 == 0));
      for (int j = 0; j < sys.k(); ++j) {
        auto r = convolve(sys, j, skip(by_position, j));
        auto expect = brute_convolve(tuples, g.size(), j, by_position);
        for (Index x = 0; x < g.size(); ++x) CHECK(close_rel(r.values.at(x), expect[x], 1e-12));
      }
    }
  }
}
