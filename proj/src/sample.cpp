#include "sparselab/sample.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace sparselab {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

constexpr std::uint64_t kSubsampleSalt = 0x5b5b5b5bULL;

}  // namespace

ElementSet sample_subset(const GroundSet& ground, double p, std::uint64_t seed) {
  check_probability(p, "p");
  std::vector<Index> members;
  if (p > 0.0) {
    members.reserve(static_cast<std::size_t>(p * static_cast<double>(ground.size()) * 1.1) + 16);
    for (Index i = 0; i < ground.size(); ++i) {
      if (counter_uniform(seed, i) < p) members.push_back(i);
    }
  }
  return ElementSet(ground.size(), std::move(members));
}

WeightFunction RandomEnsemble::measure(std::size_t i) const {
  if (i >= sets.size()) throw std::out_of_range("ensemble index out of range");
  return make_measure(ground, sets[i], MeasureMode::associated, p);
}

std::vector<WeightFunction> RandomEnsemble::measures() const {
  std::vector<WeightFunction> out;
  out.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out.push_back(measure(i));
  return out;
}

nlohmann::json RandomEnsemble::to_json() const {
  std::vector<std::size_t> sizes;
  for (const auto& s : sets) sizes.push_back(s.size());
  return {{"ground", ground.to_json()}, {"p", p}, {"m", sets.size()},
          {"master_seed", master_seed}, {"seeds", seeds}, {"sizes", sizes}};
}

RandomEnsemble sample_ensemble(const GroundSet& ground, double p, std::size_t m, std::uint64_t master_seed) {
  if (m < 1) throw std::invalid_argument("ensemble needs m >= 1");
  check_probability(p, "p");
  RandomEnsemble e;
  e.ground = ground;
  e.p = p;
  e.master_seed = master_seed;
  for (std::size_t i = 0; i < m; ++i) {
    e.seeds.push_back(derive_seed(master_seed, {i}));
    e.sets.push_back(sample_subset(ground, p, e.seeds.back()));
  }
  return e;
}

ElementSet subsample(const ElementSet& u, double ratio, std::uint64_t seed) {
  check_probability(ratio, "ratio");
  const std::uint64_t key = derive_seed(seed, {kSubsampleSalt});
  std::vector<Index> kept;
  for (Index i : u.members()) {
    if (counter_uniform(key, i) < ratio) kept.push_back(i);
  }
  return ElementSet(u.universe(), std::move(kept));
}

WeightFunction normalized_restriction(const WeightFunction& f, const ElementSet& v, double p, double q) {
  if (!(q > 0.0 && p <= 1.0)) throw std::invalid_argument("normalized restriction needs 0 < q <= p <= 1");
  if (q > p) throw std::invalid_argument("normalized restriction needs q <= p");
  if (v.universe() != f.size()) throw std::invalid_argument("restriction set does not match the function domain");
  const double scale = p / q;
  std::vector<std::pair<Index, double>> entries;
  for (Index i : v.members()) {
    const double val = f.at(i);
    if (val != 0.0) entries.emplace_back(i, scale * val);
  }
  auto out = WeightFunction::sparse(f.ground(), std::move(entries));
  return f.size() <= kDenseLimit ? out.to_dense() : out;
}

WeightFunction translate(const WeightFunction& f, Index offset) {
  const auto& g = f.ground();
  const Index size = g.size();
  auto shifted = [&](Index i) -> Index {
    if (g.kind() == GroundKind::grid) {
      auto e = g.element(i);
      auto a = g.element(offset % size);
      for (std::size_t c = 0; c < e.size(); ++c) e[c] = (e[c] + a[c]) % g.n();
      return g.index(e);
    }
    return (i + offset) % size;
  };
  // value at shifted(i) is f(i), i.e. (f + a)(x) = f(x - a)
  if (f.storage() == Storage::dense) {
    std::vector<double> v(size, 0.0);
    const auto src = f.dense_values();
    for (Index i = 0; i < size; ++i) v[shifted(i)] = src[i];
    return WeightFunction::dense(g, std::move(v));
  }
  std::vector<std::pair<Index, double>> entries;
  for (const auto& [i, val] : f.sparse_entries()) entries.emplace_back(shifted(i), val);
  return WeightFunction::sparse(g, std::move(entries));
}

void write_set(std::ostream& out, const ElementSet& set, std::uint64_t seed, double p) {
  nlohmann::json header = {{"seed", seed}, {"p", p}, {"size", set.universe()}};
  out << header.dump() << '\n';
  for (Index i : set.members()) out << i << '\n';
}

SerializedSet read_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("set stream is empty");
  SerializedSet s;
  s.header = nlohmann::json::parse(line);
  const Index universe = s.header.at("size").get<Index>();
  std::vector<Index> members;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Index i = std::stoull(line);
    if (i >= universe) throw std::out_of_range("set member outside the ground set");
    members.push_back(i);
  }
  s.set = ElementSet(universe, std::move(members));
  return s;
}

}  // namespace sparselab
