#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sparselab/core.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

/// X_p: element i is kept iff counter_uniform(seed, i) < p.
ElementSet sample_subset(const GroundSet& ground, double p, std::uint64_t seed);

/// m independent copies of X_p with seeds derived from a master seed.
struct RandomEnsemble {
  GroundSet ground = GroundSet::cyclic(1);
  double p = 1.0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<ElementSet> sets;

  std::size_t m() const { return sets.size(); }
  /// Associated measure p^{-1} 1_{U_i}.
  WeightFunction measure(std::size_t i) const;
  std::vector<WeightFunction> measures() const;
  nlohmann::json to_json() const;
};

RandomEnsemble sample_ensemble(const GroundSet& ground, double p, std::size_t m, std::uint64_t master_seed);

/// Keeps each element of U independently with probability `ratio`. Draws are
/// keyed by element index, so the result does not depend on U's storage.
ElementSet subsample(const ElementSet& u, double ratio, std::uint64_t seed);

/// f_nu(x) = (p/q) f(x) on V and 0 elsewhere.
WeightFunction normalized_restriction(const WeightFunction& f, const ElementSet& v, double p, double q);

/// (f + a)(x) = f(x - a). Cyclic and grid ground sets translate in the group;
/// other kinds shift the index modulo |X|.
WeightFunction translate(const WeightFunction& f, Index offset);

/// Set serialization: one JSON header line {seed, p, size}, then one
/// element index per line.
void write_set(std::ostream& out, const ElementSet& set, std::uint64_t seed, double p);

struct SerializedSet {
  nlohmann::json header;
  ElementSet set;
};
SerializedSet read_set(std::istream& in);

}  // namespace sparselab
