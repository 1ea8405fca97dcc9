#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "sparselab/conv.hpp"
#include "sparselab/oracles.hpp"
#include "sparselab/sample.hpp"

using namespace sparselab;

namespace {

PatternHypergraph random_graph(int n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  PatternHypergraph g{2, n, {}};
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (keep(rng)) g.edges.push_back({a, b});
    }
  }
  return g;
}

// Triangles by brute force over vertex triples, counted as labeled copies.
std::uint64_t brute_triangles(const PatternHypergraph& g) {
  std::vector<std::vector<char>> adj(g.vertices, std::vector<char>(g.vertices, 0));
  for (const auto& e : g.edges) adj[e[0]][e[1]] = adj[e[1]][e[0]] = 1;
  std::uint64_t c = 0;
  for (int a = 0; a < g.vertices; ++a) {
    for (int b = a + 1; b < g.vertices; ++b) {
      for (int d = b + 1; d < g.vertices; ++d) c += adj[a][b] && adj[b][d] && adj[a][d];
    }
  }
  return 6 * c;
}

}  // namespace

TEST_CASE("pattern statistics") {
  auto k3 = pattern_stats(PatternHypergraph::complete_graph(3));
  CHECK(k3.m_k == Rational::make(2, 1));
  CHECK(k3.critical_exponent == Rational::make(1, 2));
  CHECK(k3.strictly_balanced);
  auto k4 = pattern_stats(PatternHypergraph::complete_graph(4));
  CHECK(k4.m_k == Rational::make(5, 2));
  CHECK(k4.critical_exponent == Rational::make(2, 5));
  CHECK(k4.strictly_balanced);
  auto fano = pattern_stats(PatternHypergraph::fano_plane());
  CHECK(fano.m_k == Rational::make(3, 2));
  CHECK(fano.critical_exponent == Rational::make(2, 3));
  CHECK(fano.vertices == 7);
  CHECK(fano.edges == 7);
  CHECK(pattern_stats(PatternHypergraph::cycle(4)).m_k == Rational::make(3, 2));
  CHECK(pattern_stats(PatternHypergraph::complete_graph(5)).m_k == Rational::make(3, 1));

  // K4 with a pendant edge: the K4 inside is denser than the whole
  auto pendant = PatternHypergraph::make(2, 5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 4}});
  auto st = pattern_stats(pendant);
  CHECK(st.m_k == Rational::make(2, 1));
  CHECK_FALSE(st.strictly_balanced);
  CHECK(st.witness_density == Rational::make(5, 2));
  CHECK(st.witness_edges == std::vector<int>{0, 1, 2, 3, 4, 5});

  CHECK_THROWS_AS(pattern_stats(PatternHypergraph::make(2, 2, {{0, 1}})), std::invalid_argument);
  CHECK(Rational::make(6, -4) == Rational::make(-3, 2));
  CHECK(Rational::make(6, 4).str() == "3/2");
}

TEST_CASE("labeled copy counts") {
  const auto k3 = PatternHypergraph::complete_graph(3);
  auto c = supersaturation_count(PatternHypergraph::complete_graph(5), k3);
  CHECK(c.labeled == 60);
  CHECK(c.automorphisms == 6);
  CHECK(c.unordered() == 10);
  CHECK(supersaturation_count(PatternHypergraph{2, 6, {}}, k3).labeled == 0);
  CHECK(supersaturation_count(PatternHypergraph::cycle(5), k3).labeled == 0);
  auto c4 = supersaturation_count(PatternHypergraph::complete_graph(4), PatternHypergraph::cycle(4));
  CHECK(c4.labeled == 24);
  CHECK(c4.automorphisms == 8);
  CHECK(supersaturation_count(PatternHypergraph::fano_plane(), PatternHypergraph::fano_plane()).labeled == 168);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    auto g = random_graph(7, 0.5, rng);
    CHECK(supersaturation_count(g, k3).labeled == brute_triangles(g));
  }
}

TEST_CASE("copy counts agree with the copy system") {
  std::mt19937_64 rng(11);
  for (const auto& pattern :
       {PatternHypergraph::complete_graph(3), PatternHypergraph::complete_graph(4), PatternHypergraph::cycle(4)}) {
    for (int n = pattern.vertices; n <= 7; ++n) {
      const auto sys = SequenceSystem::build(SystemDescriptor::copies(n, pattern));
      for (int t = 0; t < 4; ++t) {
        auto g = random_graph(n, 0.6, rng);
        std::vector<Index> ids;
        for (const auto& e : g.edges) ids.push_back(sys.ground().index({e[0], e[1]}));
        std::sort(ids.begin(), ids.end());
        const auto f = WeightFunction::indicator(sys.ground(), ElementSet(sys.ground().size(), ids));
        const double renorm = count_functional(sys, f).value * static_cast<double>(sys.total_size());
        CHECK(static_cast<std::uint64_t>(std::llround(renorm)) == supersaturation_count(g, pattern).labeled);
      }
    }
  }
}

TEST_CASE("varnavides counts") {
  const auto z5 = SequenceSystem::build(SystemDescriptor::ap(5, 3));
  CHECK(varnavides_count(z5, 1.0).count == z5.total_size());
  CHECK(varnavides_count(z5, 0.6).count > 0);
  auto two = varnavides_count(z5, 0.4);
  CHECK(two.count == 0);
  CHECK(two.witness.size() == 2);
  CHECK(varnavides_count(z5, 0.2).count == 0);

  const auto z13 = SequenceSystem::build(SystemDescriptor::ap(13, 3));
  std::vector<std::uint64_t> masks;
  z13.for_each({}, [&](std::span<const Index> t) {
    masks.push_back((1ull << t[0]) | (1ull << t[1]) | (1ull << t[2]));
  });
  std::uint64_t prev = 0;
  for (int s = 0; s <= 13; ++s) {
    // brute force over all subsets of size s
    std::uint64_t best = ~0ull;
    for (std::uint64_t b = 0; b < (1ull << 13); ++b) {
      if (std::popcount(b) != s) continue;
      std::uint64_t c = 0;
      for (auto m : masks) c += (m & b) == m;
      best = std::min(best, c);
    }
    const auto r = varnavides_count(z13, s / 13.0);
    CHECK(r.count == best);
    CHECK(r.count >= prev);
    prev = r.count;
  }
  CHECK_THROWS_AS(varnavides_count(z13, 0.5, 10), GuardExceeded);
}

TEST_CASE("ramsey multiplicity") {
  const auto k3 = PatternHypergraph::complete_graph(3);
  auto k6 = ramsey_multiplicity(PatternHypergraph::complete_graph(6), k3, 2, SearchMode::exhaustive);
  CHECK(k6.exact);
  CHECK(k6.unordered() == 2);
  CHECK(k6.count == 12);
  auto k5 = ramsey_multiplicity(PatternHypergraph::complete_graph(5), k3, 2, SearchMode::exhaustive);
  CHECK(k5.count == 0);
  auto one = ramsey_multiplicity(PatternHypergraph::complete_graph(5), k3, 1, SearchMode::exhaustive);
  CHECK(one.count == 60);

  // witness is a valid certificate and colour swaps keep the count
  const auto configs = copies_in(PatternHypergraph::complete_graph(6), k3);
  CHECK(count_monochromatic(configs, k6.colouring) == 12);
  auto swapped = k6.colouring;
  for (auto& c : swapped) c = 1 - c;
  CHECK(count_monochromatic(configs, swapped) == 12);

  // host relabeling
  std::mt19937_64 rng(4);
  for (int t = 0; t < 3; ++t) {
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto host = PatternHypergraph::complete_graph(6);
    for (auto& e : host.edges) {
      for (auto& x : e) x = perm[x];
    }
    std::shuffle(host.edges.begin(), host.edges.end(), rng);
    CHECK(ramsey_multiplicity(host, k3, 2, SearchMode::exhaustive).count == 12);
  }

  auto heur = ramsey_multiplicity(PatternHypergraph::complete_graph(6), k3, 2, SearchMode::heuristic, 20000, 3);
  CHECK_FALSE(heur.exact);
  CHECK(heur.count >= 12);
  CHECK(count_monochromatic(configs, heur.colouring) == heur.count);
  CHECK_THROWS_AS(ramsey_multiplicity(PatternHypergraph::complete_graph(8), k3, 2, SearchMode::exhaustive, 1000),
                  GuardExceeded);

  // colouring elements of a sequence system
  const auto schur = SequenceSystem::build(SystemDescriptor::schur(11));
  auto s1 = ramsey_multiplicity(schur, 1, SearchMode::exhaustive);
  CHECK(s1.count == schur.total_size());
  auto s2 = ramsey_multiplicity(schur, 2, SearchMode::exhaustive);
  auto s2h = ramsey_multiplicity(schur, 2, SearchMode::heuristic, 50000, 1);
  CHECK(s2h.count >= s2.count);
}

TEST_CASE("extremal numbers") {
  const auto k3 = PatternHypergraph::complete_graph(3);
  auto e5 = extremal_number(5, k3);
  CHECK(e5.value == 6);
  CHECK(e5.witness.size() == 6);
  CHECK(supersaturation_count(PatternHypergraph::make(2, 5, e5.witness), k3).labeled == 0);
  CHECK(extremal_number(4, k3).value == 4);
  CHECK(extremal_number(6, k3).value == 9);
  CHECK(extremal_number(7, k3).value == 12);
  CHECK(extremal_number(3, PatternHypergraph::complete_graph(4)).value == 3);
  CHECK(extremal_number(5, PatternHypergraph::cycle(4)).value == 6);
  CHECK(extremal_number(6, PatternHypergraph::complete_graph(4)).value == 12);

  // brute force ex(5, K3) over all 2^10 edge sets
  const auto host = PatternHypergraph::complete_graph(5);
  const auto configs = copies_in(host, k3);
  int best = 0;
  for (int mask = 0; mask < 1024; ++mask) {
    bool free = true;
    for (const auto& c : configs.configs) {
      bool inside = true;
      for (auto id : c) inside = inside && (mask >> id & 1);
      free = free && !inside;
    }
    if (free) best = std::max(best, std::popcount(static_cast<unsigned>(mask)));
  }
  CHECK(best == 6);
  CHECK_THROWS_AS(extremal_number(7, k3, 3), GuardExceeded);
}

TEST_CASE("adversary free subsets") {
  const auto z5 = SequenceSystem::build(SystemDescriptor::ap(5, 3));
  auto full = adversary_free_subset(z5, ElementSet::full(5));
  CHECK(full.subset.size() == 2);
  CHECK(full.density == doctest::Approx(0.4));

  const auto sys = SequenceSystem::build(SystemDescriptor::ap(1009, 3));
  ElementSet sidon(1009, {1, 2, 4, 8, 16, 32});
  CHECK(configurations_in(sys, sidon).configs.empty());
  auto id = adversary_free_subset(sys, sidon);
  CHECK(id.subset == sidon.members());
  CHECK(id.density == 1.0);

  const auto u = sample_subset(sys.ground(), 0.1, 5);
  auto r = adversary_free_subset(sys, u, 200000, 2);
  CHECK(r.configurations > 0);
  CHECK(configurations_in(sys, ElementSet(1009, r.subset)).configs.empty());
  CHECK(r.density > 0.3);
  CHECK(r.density < 1.0);
  auto again = adversary_free_subset(sys, u, 200000, 2);
  CHECK(again.subset == r.subset);
}

TEST_CASE("adversary colourings") {
  const auto sys = SequenceSystem::build(SystemDescriptor::ap(101, 3));
  ElementSet u(101, {0, 1, 2, 3, 4, 5, 6});
  auto many = adversary_colouring(sys, u, 7);
  CHECK(many.monochromatic == 0);
  const auto configs = configurations_in(sys, u);
  auto two = adversary_colouring(sys, u, 2, 10000, 3);
  CHECK(two.monochromatic == count_monochromatic(configs, two.colouring));

  auto pent = adversary_colouring(PatternHypergraph::complete_graph(5), PatternHypergraph::complete_graph(3), 2,
                                  10000, 1);
  CHECK(pent.monochromatic == 0);
}
