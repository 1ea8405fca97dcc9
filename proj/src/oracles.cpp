#include "sparselab/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace sparselab {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

std::string Rational::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

nlohmann::json Rational::to_json() const { return {{"num", num}, {"den", den}, {"value", value()}, {"text", str()}}; }

nlohmann::json PatternStats::to_json() const {
  nlohmann::json j = {{"k", k},
                      {"vertices", vertices},
                      {"edges", edges},
                      {"m_k", m_k.to_json()},
                      {"strictly_balanced", strictly_balanced},
                      {"critical_exponent", critical_exponent.to_json()}};
  if (!strictly_balanced) j["witness"] = {{"edges", witness_edges}, {"density", witness_density.to_json()}};
  return j;
}

namespace {

int union_vertices(const PatternHypergraph& p, std::uint32_t mask) {
  std::vector<char> seen(p.vertices, 0);
  int v = 0;
  for (int e = 0; e < p.edge_count(); ++e) {
    if (!(mask >> e & 1u)) continue;
    for (int x : p.edges[e]) {
      if (!seen[x]) {
        seen[x] = 1;
        ++v;
      }
    }
  }
  return v;
}

}  // namespace

PatternStats pattern_stats(const PatternHypergraph& pattern) {
  const int k = pattern.k, v = pattern.vertices, e = pattern.edge_count();
  if (v <= k) throw std::invalid_argument("m_k is undefined when v_K <= k");
  if (e < 2) throw std::invalid_argument("m_k is zero for a single edge; the exponent is undefined");
  if (e > 24) throw std::invalid_argument("pattern has too many edges for subgraph enumeration");
  PatternStats s;
  s.k = k;
  s.vertices = v;
  s.edges = e;
  s.m_k = Rational::make(e - 1, v - k);
  s.critical_exponent = Rational::make(v - k, e - 1);
  const std::uint32_t all = e == 32 ? ~0u : (1u << e) - 1;
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    const int vl = union_vertices(pattern, mask);
    if (vl < k + 1) continue;
    const int el = std::popcount(mask);
    if (mask == all && vl == v) continue;  // K itself
    const auto d = Rational::make(el - 1, vl - k);
    if (!(d < s.m_k) && (s.strictly_balanced || s.witness_density < d)) {
      s.strictly_balanced = false;
      s.witness_density = d;
      s.witness_edges.clear();
      for (int q = 0; q < e; ++q) {
        if (mask >> q & 1u) s.witness_edges.push_back(q);
      }
    }
  }
  return s;
}

namespace {

class EdgeIndex {
 public:
  explicit EdgeIndex(const PatternHypergraph& host) : n_(host.vertices) {
    double span = 1.0;
    for (int i = 0; i < host.k; ++i) span *= static_cast<double>(n_);
    if (span > 1.8e19) throw std::invalid_argument("host too large for edge keys");
    for (std::size_t i = 0; i < host.edges.size(); ++i) {
      auto e = host.edges[i];
      std::sort(e.begin(), e.end());
      ids_.emplace(key(e), static_cast<std::uint32_t>(i));
    }
  }
  std::uint64_t key(const std::vector<int>& sorted) const {
    std::uint64_t k = 0;
    for (int x : sorted) k = k * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(x);
    return k;
  }
  // -1 when absent
  std::int64_t find(std::vector<int>& vs) const {
    std::sort(vs.begin(), vs.end());
    auto it = ids_.find(key(vs));
    return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

 private:
  int n_;
  std::unordered_map<std::uint64_t, std::uint32_t> ids_;
};

// Calls fn(edge ids in pattern edge order) for every edge-preserving injection.
template <class Fn>
void for_each_copy(const PatternHypergraph& host, const PatternHypergraph& pattern, Fn&& fn) {
  if (host.k != pattern.k) throw std::invalid_argument("host and pattern have different uniformity");
  const int v = pattern.vertices;
  if (v > host.vertices) return;
  EdgeIndex index(host);
  std::vector<std::vector<int>> by_last(v);
  for (int e = 0; e < pattern.edge_count(); ++e) {
    by_last[*std::max_element(pattern.edges[e].begin(), pattern.edges[e].end())].push_back(e);
  }
  std::vector<int> assign(v, -1);
  std::vector<char> used(host.vertices, 0);
  std::vector<std::uint32_t> ids(pattern.edge_count());
  std::vector<int> buf;
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == v) {
      fn(ids);
      return;
    }
    for (int h = 0; h < host.vertices; ++h) {
      if (used[h]) continue;
      assign[depth] = h;
      bool ok = true;
      for (int e : by_last[depth]) {
        buf.clear();
        for (int x : pattern.edges[e]) buf.push_back(assign[x]);
        const auto id = index.find(buf);
        if (id < 0) {
          ok = false;
          break;
        }
        ids[e] = static_cast<std::uint32_t>(id);
      }
      if (!ok) continue;
      used[h] = 1;
      self(self, depth + 1);
      used[h] = 0;
    }
  };
  rec(rec, 0);
}

}  // namespace

ConfigurationSet copies_in(const PatternHypergraph& host, const PatternHypergraph& pattern, std::uint64_t guard) {
  ConfigurationSet out;
  out.elements = host.edges.size();
  for_each_copy(host, pattern, [&](const std::vector<std::uint32_t>& ids) {
    if (out.configs.size() >= guard) throw GuardExceeded("too many copies to materialize");
    out.configs.push_back(ids);
  });
  return out;
}

ConfigurationSet configurations_in(const SequenceSystem& sys, const ElementSet& u, std::uint64_t guard) {
  if (u.universe() != sys.ground().size()) throw std::invalid_argument("set does not live on the system's ground");
  const auto& mem = u.members();
  ConfigurationSet out;
  out.elements = mem.size();
  if (mem.empty()) return out;
  auto local = [&](Index x) -> std::int64_t {
    auto it = std::lower_bound(mem.begin(), mem.end(), x);
    return it != mem.end() && *it == x ? it - mem.begin() : -1;
  };
  const int k = sys.k();
  std::uint64_t visited = 0;
  std::vector<std::uint32_t> cfg(k);
  auto visit = [&](std::span<const Index> t) {
    if (++visited > guard) throw GuardExceeded("configuration enumeration exceeded its guard");
    for (int q = 0; q < k; ++q) {
      const auto l = local(t[q]);
      if (l < 0) return;
      cfg[q] = static_cast<std::uint32_t>(l);
    }
    out.configs.push_back(cfg);
  };
  const double pairs = static_cast<double>(mem.size()) * static_cast<double>(mem.size());
  if (k < 2 || pairs >= static_cast<double>(sys.total_size())) {
    sys.for_each({}, visit);
  } else {
    for (Index a : mem) {
      for (Index b : mem) {
        const Pin pins[2] = {{0, a}, {1, b}};
        sys.for_each(pins, visit);
      }
    }
  }
  return out;
}

nlohmann::json VarnavidesResult::to_json() const {
  return {{"count", count}, {"witness", witness}, {"subset_size", subset_size}, {"examined", examined}};
}

VarnavidesResult varnavides_count(const SequenceSystem& sys, double rho, std::uint64_t budget) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density rho must lie in [0, 1]");
  const Index n = sys.ground().size();
  if (n > 62) throw GuardExceeded("ground set too large for exhaustive search; use adversary_free_subset");
  const auto s = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n) - 1e-9));
  VarnavidesResult r;
  r.subset_size = s;
  const auto subsets = binomial(static_cast<std::int64_t>(n), static_cast<std::int64_t>(s));
  if (subsets > budget) {
    throw GuardExceeded("varnavides search needs " + std::to_string(subsets) +
                        " subsets; raise the budget or use adversary_free_subset");
  }
  std::vector<std::uint64_t> masks;
  sys.for_each({}, [&](std::span<const Index> t) {
    std::uint64_t m = 0;
    for (Index x : t) m |= std::uint64_t{1} << x;
    masks.push_back(m);
  });
  auto count = [&](std::uint64_t b) {
    std::uint64_t c = 0;
    for (auto m : masks) c += (m & b) == m;
    return c;
  };
  std::uint64_t best_mask = 0;
  if (s == 0) {
    r.count = count(0);
    r.examined = 1;
  } else {
    std::uint64_t b = (s >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << s) - 1);
    const std::uint64_t limit = std::uint64_t{1} << n;
    bool first = true;
    while (b < limit) {
      ++r.examined;
      const auto c = count(b);
      if (first || c < r.count) {
        r.count = c;
        best_mask = b;
        first = false;
        if (c == 0) break;
      }
      // Gosper's hack: next subset of the same size
      const std::uint64_t low = b & (~b + 1);
      const std::uint64_t ripple = b + low;
      if (ripple == 0) break;
      b = (((ripple ^ b) >> 2) / low) | ripple;
    }
  }
  for (Index x = 0; x < n; ++x) {
    if (best_mask >> x & 1u) r.witness.push_back(x);
  }
  return r;
}

nlohmann::json CopyCount::to_json() const {
  return {{"labeled", labeled}, {"automorphisms", automorphisms}, {"unordered", unordered()}};
}

CopyCount supersaturation_count(const PatternHypergraph& host, const PatternHypergraph& pattern) {
  if (pattern.vertices > 10) throw std::invalid_argument("supersaturation count supports patterns with v_K <= 10");
  CopyCount c;
  for_each_copy(host, pattern, [&](const auto&) { ++c.labeled; });
  c.automorphisms = 0;
  for_each_copy(pattern, pattern, [&](const auto&) { ++c.automorphisms; });
  return c;
}

std::uint64_t count_monochromatic(const ConfigurationSet& configs, const std::vector<int>& colouring) {
  if (colouring.size() != configs.elements) throw std::invalid_argument("colouring size does not match elements");
  std::uint64_t c = 0;
  for (const auto& cfg : configs.configs) {
    bool mono = true;
    for (std::size_t i = 1; i < cfg.size() && mono; ++i) mono = colouring[cfg[i]] == colouring[cfg[0]];
    c += mono;
  }
  return c;
}

nlohmann::json ColouringResult::to_json() const {
  return {{"count", count},   {"automorphisms", automorphisms}, {"unordered", unordered()},
          {"colouring", colouring}, {"exact", exact},          {"evaluations", evaluations}};
}

namespace {

std::vector<std::vector<std::uint32_t>> incidence(const ConfigurationSet& configs) {
  std::vector<std::vector<std::uint32_t>> inc(configs.elements);
  for (std::size_t c = 0; c < configs.configs.size(); ++c) {
    auto cfg = configs.configs[c];
    std::sort(cfg.begin(), cfg.end());
    cfg.erase(std::unique(cfg.begin(), cfg.end()), cfg.end());
    for (auto x : cfg) inc[x].push_back(static_cast<std::uint32_t>(c));
  }
  return inc;
}

bool mono_with(const std::vector<std::uint32_t>& cfg, const std::vector<int>& col, std::uint32_t e, int colour) {
  for (auto x : cfg) {
    if ((x == e ? colour : col[x]) != colour) return false;
  }
  return true;
}

// Local search from `col`: move single elements to the colour that most
// reduces the monochromatic count until no move helps.
void improve_colouring(const ConfigurationSet& configs, const std::vector<std::vector<std::uint32_t>>& inc,
                       std::vector<int>& col, int r, std::uint64_t& evaluations, std::uint64_t budget) {
  bool moved = true;
  while (moved && evaluations < budget) {
    moved = false;
    for (std::size_t e = 0; e < configs.elements && evaluations < budget; ++e) {
      const int cur = col[e];
      std::int64_t cur_mono = 0;
      for (auto c : inc[e]) cur_mono += mono_with(configs.configs[c], col, static_cast<std::uint32_t>(e), cur);
      int best = cur;
      std::int64_t best_mono = cur_mono;
      for (int colour = 0; colour < r; ++colour) {
        if (colour == cur) continue;
        ++evaluations;
        std::int64_t m = 0;
        for (auto c : inc[e]) m += mono_with(configs.configs[c], col, static_cast<std::uint32_t>(e), colour);
        if (m < best_mono) {
          best_mono = m;
          best = colour;
        }
      }
      if (best != cur) {
        col[e] = best;
        moved = true;
      }
    }
  }
}

}  // namespace

ColouringResult min_monochromatic(const ConfigurationSet& configs, int r, SearchMode mode, std::uint64_t budget,
                                  std::uint64_t seed) {
  if (r < 1) throw std::invalid_argument("need at least one colour");
  const std::size_t n = configs.elements;
  ColouringResult out;
  if (mode == SearchMode::exhaustive) {
    double total = std::pow(static_cast<double>(r), static_cast<double>(n));
    if (total > static_cast<double>(budget)) {
      throw GuardExceeded("exhaustive colouring search needs " + std::to_string(total) +
                          " colourings; use heuristic mode");
    }
    out.exact = true;
    std::vector<int> col(n, 0);
    bool first = true;
    while (true) {
      ++out.evaluations;
      const auto c = count_monochromatic(configs, col);
      if (first || c < out.count) {
        out.count = c;
        out.colouring = col;
        first = false;
      }
      // next colouring in base-r order, last element fastest
      std::size_t i = n;
      while (i > 0 && col[i - 1] == r - 1) col[--i] = 0;
      if (i == 0) break;
      ++col[i - 1];
    }
    if (n == 0) out.colouring.clear();
    return out;
  }
  const auto inc = incidence(configs);
  std::uint64_t restart = 0;
  bool first = true;
  do {
    std::vector<int> col(n);
    if (restart == 0) {
      for (std::size_t e = 0; e < n; ++e) col[e] = static_cast<int>(e % static_cast<std::size_t>(r));
    } else {
      for (std::size_t e = 0; e < n; ++e) {
        col[e] = static_cast<int>(counter_uniform(derive_seed(seed, {restart}), e) * r);
      }
    }
    improve_colouring(configs, inc, col, r, out.evaluations, budget);
    const auto c = count_monochromatic(configs, col);
    if (first || c < out.count) {
      out.count = c;
      out.colouring = col;
      first = false;
    }
    ++restart;
  } while (out.count > 0 && out.evaluations < budget);
  return out;
}

ColouringResult ramsey_multiplicity(const PatternHypergraph& host, const PatternHypergraph& pattern, int r,
                                    SearchMode mode, std::uint64_t budget, std::uint64_t seed) {
  auto res = min_monochromatic(copies_in(host, pattern), r, mode, budget, seed);
  res.automorphisms = supersaturation_count(pattern, pattern).labeled;
  return res;
}

ColouringResult ramsey_multiplicity(const SequenceSystem& sys, int r, SearchMode mode, std::uint64_t budget,
                                    std::uint64_t seed) {
  return min_monochromatic(configurations_in(sys, ElementSet::full(sys.ground().size())), r, mode, budget, seed);
}

nlohmann::json ExtremalResult::to_json() const { return {{"value", value}, {"witness", witness}, {"nodes", nodes}}; }

ExtremalResult extremal_number(int n, const PatternHypergraph& pattern, std::uint64_t budget) {
  const int k = pattern.k;
  if (n < k) throw std::invalid_argument("extremal number needs n >= k");
  const auto edges_total = binomial(n, k);
  if (edges_total > 64) throw GuardExceeded("extremal search supports C(n,k) <= 64");
  // complete k-uniform host
  PatternHypergraph host{k, n, {}};
  std::vector<int> cur;
  auto gen = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      host.edges.push_back(cur);
      return;
    }
    for (int x = start; x < n; ++x) {
      cur.push_back(x);
      self(self, x + 1);
      cur.pop_back();
    }
  };
  gen(gen, 0);
  std::vector<std::uint64_t> copies;
  for_each_copy(host, pattern, [&](const std::vector<std::uint32_t>& ids) {
    std::uint64_t m = 0;
    for (auto id : ids) m |= std::uint64_t{1} << id;
    copies.push_back(m);
  });
  std::sort(copies.begin(), copies.end());
  copies.erase(std::unique(copies.begin(), copies.end()), copies.end());

  ExtremalResult out;
  // greedy initial hitting set
  std::uint64_t best = 0;
  for (auto c : copies) {
    if ((c & best) == 0) best |= c & (~c + 1);
  }
  int best_size = std::popcount(best);
  auto rec = [&](auto&& self, std::uint64_t removed, std::uint64_t kept) -> void {
    if (++out.nodes > budget) throw GuardExceeded("extremal search exceeded its node budget");
    const int size = std::popcount(removed);
    std::uint64_t branch = 0;
    int branch_free = 65;
    for (auto c : copies) {
      if (c & removed) continue;
      const int free = std::popcount(c & ~kept);
      if (free == 0) return;
      if (free < branch_free) {
        branch_free = free;
        branch = c;
      }
    }
    if (branch_free == 65) {
      if (size < best_size) {
        best_size = size;
        best = removed;
      }
      return;
    }
    // disjoint unhit copies each need their own removal
    std::uint64_t used = 0;
    int lb = 0;
    for (auto c : copies) {
      if (c & removed) continue;
      const auto f = c & ~kept;
      if (f & used) continue;
      used |= f;
      ++lb;
    }
    if (size + lb >= best_size) return;
    std::uint64_t free = branch & ~kept;
    while (free) {
      const std::uint64_t e = free & (~free + 1);
      free ^= e;
      self(self, removed | e, kept);
      kept |= e;
    }
  };
  rec(rec, 0, 0);
  out.value = edges_total - static_cast<std::uint64_t>(best_size);
  for (std::size_t i = 0; i < host.edges.size(); ++i) {
    if (!(best >> i & 1u)) out.witness.push_back(host.edges[i]);
  }
  return out;
}

nlohmann::json FreeSubsetResult::to_json() const {
  return {{"subset", subset},           {"u_size", u_size},         {"density", density},
          {"configurations", configurations}, {"evaluations", evaluations}};
}

FreeSubsetResult adversary_free_subset(const SequenceSystem& sys, const ElementSet& u, std::uint64_t budget,
                                       std::uint64_t seed) {
  const auto configs = configurations_in(sys, u);
  const auto& mem = u.members();
  const std::size_t n = mem.size();
  FreeSubsetResult out;
  out.u_size = n;
  out.configurations = configs.configs.size();
  std::vector<char> best_alive(n, 1);
  std::size_t best_size = 0;
  if (!configs.configs.empty()) {
    const auto inc = incidence(configs);
    auto uc = configs.configs;
    for (auto& cfg : uc) {
      std::sort(cfg.begin(), cfg.end());
      cfg.erase(std::unique(cfg.begin(), cfg.end()), cfg.end());
    }
    std::uint64_t restart = 0;
    do {
      std::vector<char> alive(n, 1);
      std::vector<char> dead_cfg(configs.configs.size(), 0);
      std::vector<std::int64_t> degree(n);
      for (std::size_t x = 0; x < n; ++x) degree[x] = static_cast<std::int64_t>(inc[x].size());
      // tie-break by a per-restart random priority (index order on restart 0)
      std::vector<double> prio(n);
      for (std::size_t x = 0; x < n; ++x) {
        prio[x] = restart == 0 ? static_cast<double>(x) : counter_uniform(derive_seed(seed, {restart}), x);
      }
      std::size_t remaining = configs.configs.size();
      std::vector<std::size_t> removed;
      while (remaining > 0) {
        std::size_t pick = n;
        for (std::size_t x = 0; x < n; ++x) {
          ++out.evaluations;
          if (!alive[x] || degree[x] == 0) continue;
          if (pick == n || degree[x] > degree[pick] || (degree[x] == degree[pick] && prio[x] < prio[pick])) pick = x;
        }
        alive[pick] = 0;
        removed.push_back(pick);
        for (auto c : inc[pick]) {
          if (dead_cfg[c]) continue;
          dead_cfg[c] = 1;
          --remaining;
          for (auto y : uc[c]) {
            if (y != pick) --degree[y];
          }
        }
      }
      // re-add any removed element that completes no configuration
      for (auto x : removed) {
        bool safe = true;
        for (auto c : inc[x]) {
          ++out.evaluations;
          bool full = true;
          for (auto y : uc[c]) full = full && (y == x || alive[y]);
          if (full) {
            safe = false;
            break;
          }
        }
        if (safe) alive[x] = 1;
      }
      const auto size = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
      if (restart == 0 || size > best_size) {
        best_size = size;
        best_alive = alive;
      }
      ++restart;
    } while (out.evaluations < budget);
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (best_alive[x]) out.subset.push_back(mem[x]);
  }
  out.density = n ? static_cast<double>(out.subset.size()) / static_cast<double>(n) : 1.0;
  // certify with an independent enumeration on A
  if (!configurations_in(sys, ElementSet(u.universe(), out.subset)).configs.empty()) {
    throw std::logic_error("adversary subset failed its recount");
  }
  return out;
}

nlohmann::json AdversaryColouring::to_json() const {
  return {{"colouring", colouring}, {"elements", elements}, {"monochromatic", monochromatic},
          {"evaluations", evaluations}};
}

namespace {

AdversaryColouring certify(const ConfigurationSet& configs, ColouringResult res, std::vector<Index> elements) {
  AdversaryColouring out;
  out.colouring = std::move(res.colouring);
  out.elements = std::move(elements);
  out.evaluations = res.evaluations;
  out.monochromatic = count_monochromatic(configs, out.colouring);
  if (out.monochromatic != res.count) throw std::logic_error("adversary colouring failed its recount");
  return out;
}

}  // namespace

AdversaryColouring adversary_colouring(const SequenceSystem& sys, const ElementSet& u, int r, std::uint64_t budget,
                                       std::uint64_t seed) {
  const auto configs = configurations_in(sys, u);
  return certify(configs, min_monochromatic(configs, r, SearchMode::heuristic, budget, seed), u.members());
}

AdversaryColouring adversary_colouring(const PatternHypergraph& host, const PatternHypergraph& pattern, int r,
                                       std::uint64_t budget, std::uint64_t seed) {
  const auto configs = copies_in(host, pattern);
  std::vector<Index> ids(host.edges.size());
  std::iota(ids.begin(), ids.end(), Index{0});
  return certify(configs, min_monochromatic(configs, r, SearchMode::heuristic, budget, seed), std::move(ids));
}

}  // namespace sparselab
