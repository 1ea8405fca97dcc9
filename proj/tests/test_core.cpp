#include <doctest.h>

#include <random>

#include "sparselab/core.hpp"

using namespace sparselab;

namespace {

WeightFunction random_function(const GroundSet& g, std::mt19937_64& rng, double density, bool signed_values) {
  std::uniform_real_distribution<double> val(signed_values ? -3.0 : 0.0, 3.0);
  std::bernoulli_distribution keep(density);
  std::vector<double> v(g.size(), 0.0);
  for (auto& x : v) {
    if (keep(rng)) x = val(rng);
  }
  return WeightFunction::dense(g, std::move(v));
}

}  // namespace

TEST_CASE("ground set sizes and index bijection") {
  CHECK(GroundSet::cyclic(10).size() == 10);
  CHECK(GroundSet::grid(5, 3).size() == 125);
  CHECK(GroundSet::ksubsets(7, 3).size() == 35);
  CHECK(GroundSet::punctured(7).size() == 6);

  for (const auto& g : {GroundSet::cyclic(13), GroundSet::grid(4, 3), GroundSet::ksubsets(8, 3),
                        GroundSet::ksubsets(6, 2), GroundSet::punctured(9)}) {
    for (Index i = 0; i < g.size(); ++i) {
      CHECK(g.index(g.element(i)) == i);
    }
  }
  // colex order on 2-subsets of {0..3}
  auto g = GroundSet::ksubsets(4, 2);
  CHECK(g.element(0) == Element{0, 1});
  CHECK(g.element(1) == Element{0, 2});
  CHECK(g.element(2) == Element{1, 2});
  CHECK(g.element(5) == Element{2, 3});
  CHECK_THROWS_AS(g.index({2, 1}), std::out_of_range);
  CHECK_THROWS_AS(GroundSet::cyclic(5).index({5}), std::out_of_range);
}

TEST_CASE("expectation") {
  auto g = GroundSet::cyclic(10);
  CHECK(expectation(WeightFunction::constant(g, 1.0)) == doctest::Approx(1.0));
  auto f = WeightFunction::sparse(g, {{2, 5.0}, {7, 5.0}});
  CHECK(expectation(f) == doctest::Approx(1.0));
  ElementSet u(10, {1, 4, 6});
  CHECK(expectation(make_measure(g, u, MeasureMode::characteristic)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inner product and norms") {
  auto g4 = GroundSet::cyclic(4);
  auto f = WeightFunction::dense(g4, {0, 1, 2, 3});
  auto one = WeightFunction::constant(g4, 1.0);
  CHECK(inner_product(one, one) == doctest::Approx(1.0));
  CHECK(inner_product(f, one) == doctest::Approx(1.5));
  CHECK(inner_product(f, f) == doctest::Approx(std::pow(lp_norm(f, Norm::l2), 2)));
  CHECK_THROWS_AS(inner_product(f, WeightFunction::constant(GroundSet::cyclic(5), 1.0)), std::invalid_argument);

  auto g2 = GroundSet::cyclic(2);
  auto h = WeightFunction::dense(g2, {0, 2});
  CHECK(lp_norm(h, Norm::l1) == doctest::Approx(1.0));
  CHECK(lp_norm(h, Norm::l2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(lp_norm(h, Norm::linf) == doctest::Approx(2.0));
  for (auto p : {Norm::l1, Norm::l2, Norm::linf}) {
    CHECK(lp_norm(WeightFunction::constant(GroundSet::cyclic(7), 1.0), p) == doctest::Approx(1.0));
  }
}

TEST_CASE("measures") {
  auto g = GroundSet::cyclic(4);
  ElementSet u(4, {1, 3});
  auto c = make_measure(g, u, MeasureMode::characteristic);
  CHECK(c.at(1) == 2.0);
  CHECK(c.at(3) == 2.0);
  CHECK(c.at(0) == 0.0);
  auto a = make_measure(g, u, MeasureMode::associated, 0.25);
  CHECK(a.at(1) == 4.0);
  CHECK(a.at(2) == 0.0);
  CHECK(expectation(a) == doctest::Approx(2.0 / (0.25 * 4.0)));
  CHECK_THROWS_AS(make_measure(g, ElementSet(4, {}), MeasureMode::characteristic), std::invalid_argument);
  CHECK_THROWS_AS(make_measure(g, u, MeasureMode::associated, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_measure(g, u, MeasureMode::associated, 1.5), std::invalid_argument);
}

TEST_CASE("properties on random inputs") {
  std::mt19937_64 rng(7);
  auto g = GroundSet::cyclic(97);
  std::uniform_int_distribution<int> pick(0, 96);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_function(g, rng, 0.4, true);
    auto h = random_function(g, rng, 0.6, true);
    auto one = WeightFunction::constant(g, 1.0);
    // symmetry and the constant-1 identity
    CHECK(inner_product(f, h) == doctest::Approx(inner_product(h, f)).epsilon(1e-12));
    CHECK(inner_product(f, one) == doctest::Approx(expectation(f)).epsilon(1e-12));
    // norm monotonicity
    const double n1 = lp_norm(f, Norm::l1), n2 = lp_norm(f, Norm::l2), ni = lp_norm(f, Norm::linf);
    CHECK(n1 <= n2 + 1e-12);
    CHECK(n2 <= ni + 1e-12);
    // sparse and dense storage agree
    auto fs = f.to_sparse(), hs = h.to_sparse();
    CHECK(close_rel(expectation(fs), expectation(f), 1e-12));
    CHECK(close_rel(inner_product(fs, hs), inner_product(f, h), 1e-12));
    CHECK(close_rel(inner_product(fs, h), inner_product(f, h), 1e-12));
    for (auto p : {Norm::l1, Norm::l2, Norm::linf}) CHECK(close_rel(lp_norm(fs, p), lp_norm(f, p), 1e-12));
    // characteristic measures always average to one
    std::vector<Index> members;
    for (int i = 0; i < 1 + trial % 20; ++i) members.push_back(static_cast<Index>(pick(rng)));
    ElementSet u(g.size(), members);
    CHECK(expectation(make_measure(g, u, MeasureMode::characteristic)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("weight function json round trip") {
  auto g = GroundSet::ksubsets(6, 2);
  auto f = WeightFunction::sparse(g, {{3, 1.5}, {10, -2.25}});
  auto back = WeightFunction::from_json(nlohmann::json::parse(f.to_json().dump()));
  CHECK(back.storage() == Storage::sparse);
  CHECK(back.ground() == g);
  CHECK(back.at(3) == 1.5);
  CHECK(back.at(10) == -2.25);
  auto d = WeightFunction::dense(GroundSet::grid(3, 2), std::vector<double>(9, 0.125));
  auto dback = WeightFunction::from_json(d.to_json());
  CHECK(dback.values() == d.values());
}
