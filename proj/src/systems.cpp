#include "sparselab/systems.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sparselab {

// --- number theory ---------------------------------------------------------

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t falling(std::int64_t from, std::int64_t count) {
  std::uint64_t r = 1;
  for (std::int64_t i = 0; i < count; ++i) r *= static_cast<std::uint64_t>(from - i);
  return r;
}

std::uint64_t factorial(int k) { return falling(k, k); }

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // This witness set is deterministic for all n < 2^64.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::int64_t mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t mod_inverse(std::int64_t a, std::int64_t n) {
  if (n == 1) return 0;
  std::int64_t old_r = mod(a, n), r = n, old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  if (old_r != 1) throw std::invalid_argument("value is not invertible modulo n");
  return mod(old_s, n);
}

// --- patterns --------------------------------------------------------------

PatternHypergraph PatternHypergraph::make(int k, int vertices, std::vector<std::vector<int>> edges) {
  if (k < 1) throw std::invalid_argument("pattern uniformity must be >= 1");
  if (edges.empty()) throw std::invalid_argument("pattern needs at least one edge");
  if (vertices < k) throw std::invalid_argument("pattern needs at least k vertices");
  for (auto& e : edges) {
    if (static_cast<int>(e.size()) != k) throw std::invalid_argument("pattern edge does not have k vertices");
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
      throw std::invalid_argument("pattern edge has repeated vertices");
    }
    if (e.front() < 0 || e.back() >= vertices) throw std::invalid_argument("pattern edge vertex out of range");
  }
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("pattern has repeated edges");
  }
  return PatternHypergraph{k, vertices, std::move(edges)};
}

PatternHypergraph PatternHypergraph::complete_graph(int t) {
  std::vector<std::vector<int>> edges;
  for (int a = 0; a < t; ++a) {
    for (int b = a + 1; b < t; ++b) edges.push_back({a, b});
  }
  return make(2, t, std::move(edges));
}

PatternHypergraph PatternHypergraph::cycle(int length) {
  std::vector<std::vector<int>> edges;
  for (int a = 0; a < length; ++a) edges.push_back({a, (a + 1) % length});
  return make(2, length, std::move(edges));
}

PatternHypergraph PatternHypergraph::fano_plane() {
  return make(3, 7, {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}});
}

PatternHypergraph PatternHypergraph::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "fano") return fano_plane();
    if (name.size() >= 2 && (name[0] == 'K' || name[0] == 'C')) {
      const int t = std::stoi(name.substr(1));
      return name[0] == 'K' ? complete_graph(t) : cycle(t);
    }
    throw std::invalid_argument("unknown pattern name '" + name + "'");
  }
  return make(j.at("k").get<int>(), j.at("v").get<int>(),
              j.at("edges").get<std::vector<std::vector<int>>>());
}

nlohmann::json PatternHypergraph::to_json() const {
  return {{"k", k}, {"v", vertices}, {"edges", edges}};
}

// --- descriptors -----------------------------------------------------------

SystemDescriptor SystemDescriptor::ap(std::int64_t n, int length, bool allow_degenerate) {
  return {ApParams{n, length, true}, allow_degenerate, false};
}

SystemDescriptor SystemDescriptor::ap_interval(std::int64_t n, int length) {
  return {ApParams{n, length, false}, false, false};
}

SystemDescriptor SystemDescriptor::homothety(std::int64_t n, int r,
                                             std::vector<std::vector<std::int64_t>> points) {
  return {HomothetyParams{n, r, std::move(points)}, false, false};
}

SystemDescriptor SystemDescriptor::polyap(std::int64_t n, int length, int power) {
  return {PolyApParams{n, length, power}, false, false};
}

SystemDescriptor SystemDescriptor::schur(std::int64_t n, bool allow_degenerate) {
  return {SchurParams{n}, allow_degenerate, false};
}

SystemDescriptor SystemDescriptor::copies(std::int64_t n, PatternHypergraph pattern) {
  return {CopiesParams{n, std::move(pattern)}, false, false};
}

std::string SystemDescriptor::kind_name() const {
  struct V {
    std::string operator()(const ApParams& p) const { return p.wrap ? "ap" : "ap_interval"; }
    std::string operator()(const HomothetyParams&) const { return "homothety"; }
    std::string operator()(const PolyApParams&) const { return "polyap"; }
    std::string operator()(const SchurParams&) const { return "schur"; }
    std::string operator()(const CopiesParams&) const { return "copies"; }
  };
  return std::visit(V{}, params);
}

nlohmann::json SystemDescriptor::to_json() const {
  nlohmann::json j;
  if (const auto* ap = std::get_if<ApParams>(&params)) {
    j = {{"kind", "ap"}, {"n", ap->n}, {"k", ap->length}, {"wrap", ap->wrap}};
  } else if (const auto* h = std::get_if<HomothetyParams>(&params)) {
    j = {{"kind", "homothety"}, {"n", h->n}, {"r", h->r}, {"points", h->points}};
  } else if (const auto* pa = std::get_if<PolyApParams>(&params)) {
    j = {{"kind", "polyap"}, {"n", pa->n}, {"k", pa->length}, {"r", pa->power}};
  } else if (const auto* s = std::get_if<SchurParams>(&params)) {
    j = {{"kind", "schur"}, {"n", s->n}};
  } else if (const auto* c = std::get_if<CopiesParams>(&params)) {
    j = {{"kind", "copies"}, {"n", c->n}, {"pattern", c->pattern.to_json()}};
  }
  j["allow_degenerate"] = allow_degenerate;
  j["require_prime"] = require_prime;
  return j;
}

SystemDescriptor SystemDescriptor::from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  SystemDescriptor d;
  const auto n = j.at("n").get<std::int64_t>();
  if (kind == "ap" || kind == "ap_interval") {
    d.params = ApParams{n, j.value("k", 3), kind == "ap" && j.value("wrap", true)};
  } else if (kind == "homothety") {
    d.params = HomothetyParams{n, j.at("r").get<int>(),
                               j.at("points").get<std::vector<std::vector<std::int64_t>>>()};
  } else if (kind == "polyap") {
    d.params = PolyApParams{n, j.value("k", 3), j.value("r", 2)};
  } else if (kind == "schur") {
    d.params = SchurParams{n};
  } else if (kind == "copies") {
    d.params = CopiesParams{n, PatternHypergraph::from_json(j.at("pattern"))};
  } else {
    throw std::invalid_argument("unknown system kind '" + kind + "'");
  }
  d.allow_degenerate = j.value("allow_degenerate", false);
  d.require_prime = j.value("require_prime", false);
  return d;
}

// --- construction ----------------------------------------------------------

SequenceSystem SequenceSystem::build(const SystemDescriptor& descriptor) {
  SequenceSystem sys;
  sys.descriptor_ = descriptor;
  const bool degenerate = descriptor.allow_degenerate;
  auto check_prime = [&](std::int64_t n) {
    if (descriptor.require_prime && !is_prime(static_cast<std::uint64_t>(n))) {
      throw std::invalid_argument("n = " + std::to_string(n) + " is not prime but primality was required");
    }
  };

  if (const auto* ap = std::get_if<ApParams>(&descriptor.params)) {
    if (ap->length < 2) throw std::invalid_argument("progression length must be >= 2");
    if (ap->n < 2) throw std::invalid_argument("progression ground set needs n >= 2");
    check_prime(ap->n);
    sys.ground_ = GroundSet::cyclic(ap->n);
    sys.k_ = ap->length;
    const std::int64_t n = ap->n;
    if (ap->wrap) {
      sys.diff_allowed_.assign(n, 0);
      for (std::int64_t d = 0; d < n; ++d) {
        bool ok = true;
        if (!degenerate) {
          for (int i = 1; i < ap->length && ok; ++i) ok = mod(i * d, n) != 0;
        }
        if (ok) {
          sys.diffs_.push_back(d);
          sys.diff_allowed_[d] = 1;
        }
      }
      sys.offset_gcd_.assign(ap->length, 1);
      sys.offset_inverse_.assign(ap->length, 0);
      for (int delta = 1; delta < ap->length; ++delta) {
        const std::int64_t g = gcd64(delta, n);
        sys.offset_gcd_[delta] = g;
        sys.offset_inverse_[delta] = mod_inverse(delta / g, n / g);
      }
      sys.uniform_fiber_ = sys.diffs_.size();
      sys.total_size_ = static_cast<std::uint64_t>(n) * sys.diffs_.size();
    } else {
      const std::int64_t dmax = (n - 1) / (ap->length - 1);
      for (std::int64_t d = -dmax; d <= dmax; ++d) {
        if (d != 0 || degenerate) sys.diffs_.push_back(d);
      }
      std::uint64_t total = 0;
      for (auto d : sys.diffs_) {
        const std::int64_t span = std::abs(d) * (ap->length - 1);
        total += static_cast<std::uint64_t>(n - span);
      }
      sys.total_size_ = total;
    }
  } else if (const auto* h = std::get_if<HomothetyParams>(&descriptor.params)) {
    if (h->points.size() < 2) throw std::invalid_argument("homothety needs at least two points");
    for (const auto& p : h->points) {
      if (static_cast<int>(p.size()) != h->r) throw std::invalid_argument("homothety point has wrong dimension");
    }
    check_prime(h->n);
    sys.ground_ = GroundSet::grid(h->n, h->r);
    sys.k_ = static_cast<int>(h->points.size());
    const std::int64_t n = h->n;
    sys.diff_allowed_.assign(n, 0);
    for (std::int64_t d = 0; d < n; ++d) {
      bool ok = true;
      if (!degenerate) {
        for (std::size_t a = 0; a < h->points.size() && ok; ++a) {
          for (std::size_t b = a + 1; b < h->points.size() && ok; ++b) {
            bool same = true;
            for (int c = 0; c < h->r; ++c) {
              if (mod(d * (h->points[a][c] - h->points[b][c]), n) != 0) same = false;
            }
            ok = !same;
          }
        }
      }
      if (ok) {
        sys.diffs_.push_back(d);
        sys.diff_allowed_[d] = 1;
      }
    }
    sys.uniform_fiber_ = sys.diffs_.size();
    sys.total_size_ = sys.ground_.size() * sys.diffs_.size();
  } else if (const auto* pa = std::get_if<PolyApParams>(&descriptor.params)) {
    if (pa->length < 2 || pa->power < 1 || pa->n < 2) throw std::invalid_argument("invalid polynomial progression parameters");
    check_prime(pa->n);
    sys.ground_ = GroundSet::cyclic(pa->n);
    sys.k_ = pa->length;
    if (degenerate) {
      sys.diffs_.push_back(0);
      sys.steps_.push_back(0);
    }
    for (std::int64_t d = 1;; ++d) {
      // largest d with k d^r <= n
      long double pw = 1;
      for (int i = 0; i < pa->power; ++i) pw *= d;
      if (pa->length * pw > static_cast<long double>(pa->n)) break;
      std::int64_t step = 1;
      for (int i = 0; i < pa->power; ++i) step = mod(step * d, pa->n);
      sys.diffs_.push_back(d);
      sys.steps_.push_back(step);
    }
    if (sys.diffs_.empty()) throw std::invalid_argument("polynomial progression has no admissible d");
    sys.uniform_fiber_ = sys.diffs_.size();
    sys.total_size_ = static_cast<std::uint64_t>(pa->n) * sys.diffs_.size();
  } else if (const auto* s = std::get_if<SchurParams>(&descriptor.params)) {
    if (s->n < 4) throw std::invalid_argument("schur system needs n >= 4");
    check_prime(s->n);
    sys.ground_ = GroundSet::punctured(s->n);
    sys.k_ = 3;
    std::uint64_t total = 0;
    for (std::int64_t x = 1; x < s->n; ++x) {
      // y ranges over Z_n minus {0, -x} and, when non-degenerate, minus {x}
      std::uint64_t excluded = 2;
      if (!degenerate && mod(2 * x, s->n) != 0) excluded = 3;
      total += static_cast<std::uint64_t>(s->n) - excluded;
    }
    sys.total_size_ = total;
  } else if (const auto* c = std::get_if<CopiesParams>(&descriptor.params)) {
    const auto& pat = c->pattern;
    if (pat.vertices > c->n) {
      throw std::invalid_argument("pattern has more vertices than the host (v_K > n)");
    }
    check_prime(c->n);
    sys.ground_ = GroundSet::ksubsets(c->n, pat.k);
    sys.k_ = pat.edge_count();
    sys.pattern_edges_ = pat.edges;
    sys.pattern_vertices_ = pat.vertices;
    sys.uniform_fiber_ = factorial(pat.k) * falling(c->n - pat.k, pat.vertices - pat.k);
    sys.total_size_ = falling(c->n, pat.vertices);
  }
  return sys;
}

std::uint64_t SequenceSystem::fiber_size(int j, Index x) const {
  if (j < 0 || j >= k_) throw std::out_of_range("fiber position out of range");
  if (uniform_fiber_) return *uniform_fiber_;
  const Pin pin{j, x};
  return count(std::span<const Pin>(&pin, 1));
}

std::optional<double> SequenceSystem::fiber_exponent() const {
  if (std::holds_alternative<ApParams>(descriptor_.params)) return 1.0;
  if (const auto* h = std::get_if<HomothetyParams>(&descriptor_.params)) return 1.0 / h->r;
  if (const auto* pa = std::get_if<PolyApParams>(&descriptor_.params)) return 1.0 / pa->power;
  if (std::holds_alternative<SchurParams>(descriptor_.params)) return 1.0;
  return std::nullopt;
}

double SequenceSystem::critical_exponent() const {
  if (const auto* c = std::get_if<CopiesParams>(&descriptor_.params)) {
    const auto& pat = c->pattern;
    if (pat.edge_count() < 2 || pat.vertices <= pat.k) {
      throw std::invalid_argument("critical exponent undefined for this pattern");
    }
    return static_cast<double>(pat.vertices - pat.k) / (pat.edge_count() - 1);
  }
  return *fiber_exponent() / (k_ - 1);
}

std::uint64_t SequenceSystem::count(std::span<const Pin> pins) const {
  std::uint64_t c = 0;
  for_each(pins, [&](std::span<const Index>) { ++c; });
  return c;
}

void SequenceSystem::for_each(std::span<const Pin> pins, const Visitor& visit) const {
  if (pins.size() > 2) throw std::invalid_argument("at most two pins are supported");
  for (const auto& p : pins) {
    if (p.position < 0 || p.position >= k_) throw std::out_of_range("pin position out of range");
    if (p.element >= ground_.size()) throw std::out_of_range("pin element out of range");
  }
  if (pins.size() == 2 && pins[0].position == pins[1].position) {
    if (pins[0].element != pins[1].element) return;
    pins = pins.first(1);
  }
  if (const auto* ap = std::get_if<ApParams>(&descriptor_.params)) {
    ap->wrap ? visit_ap(pins, visit) : visit_interval(pins, visit);
  } else if (std::holds_alternative<HomothetyParams>(descriptor_.params)) {
    visit_homothety(pins, visit);
  } else if (std::holds_alternative<PolyApParams>(descriptor_.params)) {
    visit_polyap(pins, visit);
  } else if (std::holds_alternative<SchurParams>(descriptor_.params)) {
    visit_schur(pins, visit);
  } else {
    visit_copies(pins, visit);
  }
}

void SequenceSystem::visit_ap(std::span<const Pin> pins, const Visitor& visit) const {
  const std::int64_t n = ground_.n();
  std::vector<Index> t(k_);
  auto emit = [&](std::int64_t x, std::int64_t d) {
    std::int64_t v = x;
    for (int i = 0; i < k_; ++i) {
      t[i] = static_cast<Index>(v);
      v += d;
      if (v >= n) v -= n;
    }
    visit(t);
  };
  if (pins.empty()) {
    for (std::int64_t x = 0; x < n; ++x) {
      for (auto d : diffs_) emit(x, d);
    }
  } else if (pins.size() == 1) {
    const auto a = static_cast<std::int64_t>(pins[0].element);
    for (auto d : diffs_) emit(mod(a - pins[0].position * d, n), d);
  } else {
    Pin p = pins[0], q = pins[1];
    if (p.position > q.position) std::swap(p, q);
    const int delta = q.position - p.position;
    const std::int64_t target = mod(static_cast<std::int64_t>(q.element) - static_cast<std::int64_t>(p.element), n);
    const std::int64_t g = offset_gcd_[delta];
    if (target % g != 0) return;
    const std::int64_t m = n / g;
    const std::int64_t d0 = static_cast<std::int64_t>(mulmod(static_cast<std::uint64_t>(target / g),
                                                             static_cast<std::uint64_t>(offset_inverse_[delta]),
                                                             static_cast<std::uint64_t>(m)));
    for (std::int64_t s = 0; s < g; ++s) {
      const std::int64_t d = d0 + s * m;
      if (!diff_allowed_[d]) continue;
      emit(mod(static_cast<std::int64_t>(p.element) - p.position * d, n), d);
    }
  }
}

void SequenceSystem::visit_interval(std::span<const Pin> pins, const Visitor& visit) const {
  const std::int64_t n = ground_.n();
  std::vector<Index> t(k_);
  auto try_emit = [&](std::int64_t x, std::int64_t d) {
    const std::int64_t last = x + (k_ - 1) * d;
    if (x < 0 || x >= n || last < 0 || last >= n) return;
    for (int i = 0; i < k_; ++i) t[i] = static_cast<Index>(x + i * d);
    visit(t);
  };
  if (pins.empty()) {
    for (std::int64_t x = 0; x < n; ++x) {
      for (auto d : diffs_) try_emit(x, d);
    }
  } else if (pins.size() == 1) {
    const auto a = static_cast<std::int64_t>(pins[0].element);
    for (auto d : diffs_) try_emit(a - pins[0].position * d, d);
  } else {
    Pin p = pins[0], q = pins[1];
    if (p.position > q.position) std::swap(p, q);
    const std::int64_t delta = q.position - p.position;
    const std::int64_t diff = static_cast<std::int64_t>(q.element) - static_cast<std::int64_t>(p.element);
    if (diff % delta != 0) return;
    const std::int64_t d = diff / delta;
    if (!std::binary_search(diffs_.begin(), diffs_.end(), d)) return;
    try_emit(static_cast<std::int64_t>(p.element) - p.position * d, d);
  }
}

void SequenceSystem::visit_homothety(std::span<const Pin> pins, const Visitor& visit) const {
  const auto& h = std::get<HomothetyParams>(descriptor_.params);
  const std::int64_t n = h.n;
  const int r = h.r;
  std::vector<Index> t(k_);
  std::vector<std::int64_t> base(r);
  auto coords = [&](Index idx, std::vector<std::int64_t>& out) {
    for (int c = r - 1; c >= 0; --c) {
      out[c] = static_cast<std::int64_t>(idx % static_cast<Index>(n));
      idx /= static_cast<Index>(n);
    }
  };
  auto emit = [&](const std::vector<std::int64_t>& x, std::int64_t d) {
    for (int i = 0; i < k_; ++i) {
      Index idx = 0;
      for (int c = 0; c < r; ++c) {
        idx = idx * static_cast<Index>(n) + static_cast<Index>(mod(x[c] + d * h.points[i][c], n));
      }
      t[i] = idx;
    }
    visit(t);
  };
  if (pins.empty()) {
    for (Index xi = 0; xi < ground_.size(); ++xi) {
      coords(xi, base);
      for (auto d : diffs_) emit(base, d);
    }
    return;
  }
  std::vector<std::int64_t> a(r), x(r);
  coords(pins[0].element, a);
  const int j = pins[0].position;
  std::vector<std::int64_t> b;
  if (pins.size() == 2) {
    b.resize(r);
    coords(pins[1].element, b);
  }
  for (auto d : diffs_) {
    for (int c = 0; c < r; ++c) x[c] = mod(a[c] - d * h.points[j][c], n);
    if (pins.size() == 2) {
      const int jj = pins[1].position;
      bool ok = true;
      for (int c = 0; c < r && ok; ++c) ok = mod(x[c] + d * h.points[jj][c], n) == b[c];
      if (!ok) continue;
    }
    emit(x, d);
  }
}

void SequenceSystem::visit_polyap(std::span<const Pin> pins, const Visitor& visit) const {
  const std::int64_t n = ground_.n();
  std::vector<Index> t(k_);
  auto emit = [&](std::int64_t x, std::int64_t step) {
    std::int64_t v = x;
    for (int i = 0; i < k_; ++i) {
      t[i] = static_cast<Index>(v);
      v = mod(v + step, n);
    }
    visit(t);
  };
  if (pins.empty()) {
    for (std::int64_t x = 0; x < n; ++x) {
      for (auto s : steps_) emit(x, s);
    }
    return;
  }
  const auto a = static_cast<std::int64_t>(pins[0].element);
  const int j = pins[0].position;
  for (auto s : steps_) {
    const std::int64_t x = mod(a - j * s, n);
    if (pins.size() == 2) {
      const int jj = pins[1].position;
      if (mod(x + jj * s, n) != static_cast<std::int64_t>(pins[1].element)) continue;
    }
    emit(x, s);
  }
}

void SequenceSystem::visit_schur(std::span<const Pin> pins, const Visitor& visit) const {
  const std::int64_t n = ground_.n();
  const bool degenerate = descriptor_.allow_degenerate;
  std::vector<Index> t(3);
  // elements are 1..n-1, index = element - 1
  auto try_emit = [&](std::int64_t x, std::int64_t y) {
    if (x <= 0 || x >= n || y <= 0 || y >= n) return;
    const std::int64_t z = mod(x + y, n);
    if (z == 0) return;
    if (!degenerate && x == y) return;
    t[0] = static_cast<Index>(x - 1);
    t[1] = static_cast<Index>(y - 1);
    t[2] = static_cast<Index>(z - 1);
    visit(t);
  };
  auto value = [](const Pin& p) { return static_cast<std::int64_t>(p.element) + 1; };
  if (pins.empty()) {
    for (std::int64_t x = 1; x < n; ++x) {
      for (std::int64_t y = 1; y < n; ++y) try_emit(x, y);
    }
  } else if (pins.size() == 1) {
    const std::int64_t a = value(pins[0]);
    for (std::int64_t u = 1; u < n; ++u) {
      switch (pins[0].position) {
        case 0: try_emit(a, u); break;
        case 1: try_emit(u, a); break;
        default: try_emit(u, mod(a - u, n)); break;
      }
    }
  } else {
    std::int64_t vals[3] = {-1, -1, -1};
    for (const auto& p : pins) vals[p.position] = value(p);
    if (vals[0] < 0) vals[0] = mod(vals[2] - vals[1], n);
    if (vals[1] < 0) vals[1] = mod(vals[2] - vals[0], n);
    if (vals[2] >= 0 && mod(vals[0] + vals[1], n) != vals[2]) return;
    try_emit(vals[0], vals[1]);
  }
}

void SequenceSystem::visit_copies(std::span<const Pin> pins, const Visitor& visit) const {
  const std::int64_t n = ground_.n();
  const int kk = ground_.arity();
  const int v = pattern_vertices_;
  // candidate host vertices per pattern vertex; empty vector = unrestricted
  std::vector<std::vector<std::int64_t>> allowed(v);
  std::vector<std::uint8_t> restricted(v, 0);
  for (const auto& p : pins) {
    const Element target = ground_.element(p.element);
    for (int u : pattern_edges_[p.position]) {
      if (!restricted[u]) {
        allowed[u] = target;
        restricted[u] = 1;
      } else {
        std::vector<std::int64_t> both;
        std::set_intersection(allowed[u].begin(), allowed[u].end(), target.begin(), target.end(),
                              std::back_inserter(both));
        allowed[u] = std::move(both);
      }
      if (allowed[u].empty()) return;
    }
  }
  std::vector<int> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::stable_partition(order.begin(), order.end(), [&](int u) { return restricted[u] != 0; });

  std::vector<std::int64_t> phi(v, -1);
  std::vector<std::uint8_t> used(n, 0);
  std::vector<Index> t(k_);
  std::vector<std::int64_t> verts(kk);

  std::function<void(int)> rec = [&](int depth) {
    if (depth == v) {
      for (int i = 0; i < k_; ++i) {
        for (int c = 0; c < kk; ++c) verts[c] = phi[pattern_edges_[i][c]];
        std::sort(verts.begin(), verts.end());
        Index idx = 0;
        for (int c = 0; c < kk; ++c) idx += binomial(verts[c], c + 1);
        t[i] = idx;
      }
      visit(t);
      return;
    }
    const int u = order[depth];
    auto place = [&](std::int64_t h) {
      if (used[h]) return;
      used[h] = 1;
      phi[u] = h;
      rec(depth + 1);
      used[h] = 0;
    };
    if (restricted[u]) {
      for (auto h : allowed[u]) place(h);
    } else {
      for (std::int64_t h = 0; h < n; ++h) place(h);
    }
  };
  rec(0);
}

// --- sampling --------------------------------------------------------------

void SequenceSystem::sample_fiber_by_enumeration(int j, Index x, Rng& rng, std::vector<Index>& out) const {
  std::vector<std::vector<Index>> all;
  const Pin pin{j, x};
  for_each(std::span<const Pin>(&pin, 1), [&](std::span<const Index> s) { all.emplace_back(s.begin(), s.end()); });
  if (all.empty()) throw std::invalid_argument("cannot sample from an empty fiber");
  out = all[uniform_below(rng, all.size())];
}

void SequenceSystem::sample_fiber(int j, Index x, Rng& rng, std::vector<Index>& out) const {
  if (j < 0 || j >= k_) throw std::out_of_range("fiber position out of range");
  out.resize(k_);
  if (const auto* ap = std::get_if<ApParams>(&descriptor_.params)) {
    if (!ap->wrap) return sample_fiber_by_enumeration(j, x, rng, out);
    const std::int64_t n = ground_.n();
    const std::int64_t d = diffs_[uniform_below(rng, diffs_.size())];
    std::int64_t v = mod(static_cast<std::int64_t>(x) - j * d, n);
    for (int i = 0; i < k_; ++i) {
      out[i] = static_cast<Index>(v);
      v = mod(v + d, n);
    }
    return;
  }
  if (std::holds_alternative<PolyApParams>(descriptor_.params)) {
    const std::int64_t n = ground_.n();
    const std::int64_t s = steps_[uniform_below(rng, steps_.size())];
    std::int64_t v = mod(static_cast<std::int64_t>(x) - j * s, n);
    for (int i = 0; i < k_; ++i) {
      out[i] = static_cast<Index>(v);
      v = mod(v + s, n);
    }
    return;
  }
  if (std::holds_alternative<SchurParams>(descriptor_.params)) {
    const std::int64_t n = ground_.n();
    const std::int64_t a = static_cast<std::int64_t>(x) + 1;
    const bool degenerate = descriptor_.allow_degenerate;
    for (int attempt = 0; attempt < 1'000'000; ++attempt) {
      const std::int64_t u = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(n - 1)));
      std::int64_t xx, yy;
      if (j == 0) {
        xx = a, yy = u;
      } else if (j == 1) {
        xx = u, yy = a;
      } else {
        xx = u, yy = mod(a - u, n);
      }
      const std::int64_t z = mod(xx + yy, n);
      if (yy == 0 || z == 0 || (!degenerate && xx == yy)) continue;
      out = {static_cast<Index>(xx - 1), static_cast<Index>(yy - 1), static_cast<Index>(z - 1)};
      return;
    }
    throw std::invalid_argument("cannot sample from an empty fiber");
  }
  if (std::holds_alternative<CopiesParams>(descriptor_.params)) {
    const std::int64_t n = ground_.n();
    const int kk = ground_.arity();
    Element target = ground_.element(x);
    std::shuffle(target.begin(), target.end(), rng);
    std::vector<std::int64_t> phi(pattern_vertices_, -1);
    std::vector<std::uint8_t> used(n, 0);
    for (int c = 0; c < kk; ++c) {
      phi[pattern_edges_[j][c]] = target[c];
      used[target[c]] = 1;
    }
    for (int u = 0; u < pattern_vertices_; ++u) {
      if (phi[u] >= 0) continue;
      std::int64_t h;
      do {
        h = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
      } while (used[h]);
      used[h] = 1;
      phi[u] = h;
    }
    std::vector<std::int64_t> verts(kk);
    for (int i = 0; i < k_; ++i) {
      for (int c = 0; c < kk; ++c) verts[c] = phi[pattern_edges_[i][c]];
      std::sort(verts.begin(), verts.end());
      Index idx = 0;
      for (int c = 0; c < kk; ++c) idx += binomial(verts[c], c + 1);
      out[i] = idx;
    }
    return;
  }
  // homothety
  const auto& h = std::get<HomothetyParams>(descriptor_.params);
  const std::int64_t d = diffs_[uniform_below(rng, diffs_.size())];
  Element a = ground_.element(x);
  for (int c = 0; c < h.r; ++c) a[c] = mod(a[c] - d * h.points[j][c], h.n);
  for (int i = 0; i < k_; ++i) {
    Element e(h.r);
    for (int c = 0; c < h.r; ++c) e[c] = mod(a[c] + d * h.points[i][c], h.n);
    out[i] = ground_.index(e);
  }
}

void SequenceSystem::sample_tuple(Rng& rng, std::vector<Index>& out) const {
  out.resize(k_);
  if (const auto* ap = std::get_if<ApParams>(&descriptor_.params); ap && !ap->wrap) {
    const std::int64_t n = ground_.n();
    for (;;) {
      const auto x = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
      const std::int64_t d = diffs_[uniform_below(rng, diffs_.size())];
      const std::int64_t last = x + (k_ - 1) * d;
      if (last < 0 || last >= n) continue;
      for (int i = 0; i < k_; ++i) out[i] = static_cast<Index>(x + i * d);
      return;
    }
  }
  if (std::holds_alternative<SchurParams>(descriptor_.params)) {
    const std::int64_t n = ground_.n();
    for (;;) {
      const auto x = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(n - 1)));
      const auto y = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(n - 1)));
      const std::int64_t z = mod(x + y, n);
      if (z == 0 || (!descriptor_.allow_degenerate && x == y)) continue;
      out = {static_cast<Index>(x - 1), static_cast<Index>(y - 1), static_cast<Index>(z - 1)};
      return;
    }
  }
  // homogeneous kinds: a uniform x followed by a uniform member of S_1(x)
  sample_fiber(0, static_cast<Index>(uniform_below(rng, ground_.size())), rng, out);
}

// --- diagnostics -----------------------------------------------------------

std::vector<Index> sample_points(const GroundSet& ground, std::size_t count, std::uint64_t seed) {
  std::vector<Index> pts;
  if (ground.size() <= count) {
    pts.resize(ground.size());
    std::iota(pts.begin(), pts.end(), Index{0});
    return pts;
  }
  Rng rng(seed);
  std::set<Index> chosen{0, ground.size() - 1};
  while (chosen.size() < count) chosen.insert(static_cast<Index>(uniform_below(rng, ground.size())));
  return {chosen.begin(), chosen.end()};
}

HomogeneityReport verify_homogeneity(const SequenceSystem& sys, std::size_t sample_x, std::uint64_t seed) {
  HomogeneityReport rep;
  const auto pts = sample_points(sys.ground(), std::max<std::size_t>(sample_x, 2), seed);
  rep.exhaustive = pts.size() == sys.ground().size();
  rep.points_checked = pts.size();
  rep.fiber_sizes.assign(sys.k(), 0);
  for (int j = 0; j < sys.k(); ++j) {
    std::optional<std::uint64_t> first;
    for (auto x : pts) {
      const Pin pin{j, x};
      const auto c = sys.count(std::span<const Pin>(&pin, 1));
      if (!first) {
        first = c;
        rep.fiber_sizes[j] = c;
      } else if (c != *first) {
        rep.homogeneous = false;
        rep.witness = HomogeneityReport::Witness{j, pts.front(), x, *first, c};
        return rep;
      }
    }
  }
  for (int j = 1; j < sys.k(); ++j) {
    // |S_j(x)|·|X| = |S| for every j forces equal sizes across positions
    if (rep.fiber_sizes[j] != rep.fiber_sizes[0]) {
      rep.homogeneous = false;
      rep.witness = HomogeneityReport::Witness{j, pts.front(), pts.front(), rep.fiber_sizes[0], rep.fiber_sizes[j]};
      return rep;
    }
  }
  return rep;
}

nlohmann::json HomogeneityReport::to_json() const {
  nlohmann::json j = {{"homogeneous", homogeneous},
                      {"exhaustive", exhaustive},
                      {"points_checked", points_checked},
                      {"fiber_sizes", fiber_sizes}};
  if (witness) {
    j["witness"] = {{"j", witness->j + 1},
                    {"x", witness->x},
                    {"x_other", witness->x_other},
                    {"size_x", witness->size_x},
                    {"size_other", witness->size_other}};
  }
  return j;
}

TwoDofReport verify_two_dof(const SequenceSystem& sys, const TwoDofMode& mode) {
  TwoDofReport rep;
  const int k = sys.k();
  auto probe = [&](std::span<const Index> s) {
    if (rep.witness) return;
    for (int i = 0; i < k && !rep.witness; ++i) {
      for (int j = i + 1; j < k && !rep.witness; ++j) {
        ++rep.probes;
        const Pin pins[2] = {{i, s[i]}, {j, s[j]}};
        sys.for_each(pins, [&](std::span<const Index> t) {
          if (rep.witness) return;
          if (!std::equal(s.begin(), s.end(), t.begin(), t.end())) {
            rep.witness = TwoDofReport::Witness{{s.begin(), s.end()}, {t.begin(), t.end()}, i, j};
          }
        });
      }
    }
  };
  if (mode.exhaustive) {
    const std::uint64_t pairs = static_cast<std::uint64_t>(k) * (k - 1) / 2;
    if (sys.total_size() > mode.guard / std::max<std::uint64_t>(pairs, 1)) {
      throw GuardExceeded("exhaustive two-degrees-of-freedom check exceeds the guard; use sampled mode");
    }
    rep.exhaustive = true;
    sys.for_each({}, probe);
  } else {
    Rng rng(mode.seed);
    std::vector<Index> s;
    for (std::uint64_t it = 0; it < mode.samples && !rep.witness; ++it) {
      sys.sample_tuple(rng, s);
      const int i = static_cast<int>(uniform_below(rng, k));
      int j = static_cast<int>(uniform_below(rng, k - 1));
      if (j >= i) ++j;
      ++rep.probes;
      const Pin pins[2] = {{i, s[i]}, {j, s[j]}};
      sys.for_each(pins, [&](std::span<const Index> t) {
        if (rep.witness) return;
        if (!std::equal(s.begin(), s.end(), t.begin(), t.end())) {
          rep.witness = TwoDofReport::Witness{s, {t.begin(), t.end()}, std::min(i, j), std::max(i, j)};
        }
      });
    }
  }
  rep.two_dof = !rep.witness.has_value();
  return rep;
}

nlohmann::json TwoDofReport::to_json() const {
  nlohmann::json j = {{"two_dof", two_dof}, {"exhaustive", exhaustive}, {"probes", probes}};
  if (witness) {
    j["witness"] = {{"s", witness->s}, {"t", witness->t}, {"i", witness->i + 1}, {"j", witness->j + 1}};
  }
  return j;
}

PairProfile pair_profile(const SequenceSystem& sys, std::size_t sample, std::uint64_t seed) {
  PairProfile prof;
  const auto pts = sample_points(sys.ground(), std::max<std::size_t>(sample, 1), seed);
  prof.points_checked = pts.size();
  std::set<std::uint64_t> sigmas, ts;
  std::map<Index, std::uint64_t> hits;
  const int last = sys.k() - 1;
  for (auto x : pts) {
    hits.clear();
    const Pin pin{0, x};
    sys.for_each(std::span<const Pin>(&pin, 1), [&](std::span<const Index> s) { ++hits[s[last]]; });
    for (const auto& [y, c] : hits) sigmas.insert(c);
    ts.insert(hits.size());
  }
  prof.sigma_values.assign(sigmas.begin(), sigmas.end());
  prof.t_values.assign(ts.begin(), ts.end());
  if (sigmas.size() == 1) prof.sigma = *sigmas.begin();
  if (ts.size() == 1) prof.t = *ts.begin();
  prof.uniform = sigmas.size() <= 1 && ts.size() <= 1;
  return prof;
}

nlohmann::json PairProfile::to_json() const {
  nlohmann::json j = {{"uniform", uniform},
                      {"sigma_values", sigma_values},
                      {"t_values", t_values},
                      {"points_checked", points_checked}};
  j["sigma"] = sigma ? nlohmann::json(*sigma) : nlohmann::json(nullptr);
  j["t"] = t ? nlohmann::json(*t) : nlohmann::json(nullptr);
  return j;
}

void enumerate_fiber(const SequenceSystem& sys, int j, Index x, const FiberMode& mode,
                     const SequenceSystem::Visitor& visit) {
  if (j < 0 || j >= sys.k()) throw std::out_of_range("fiber position out of range");
  if (x >= sys.ground().size()) throw std::out_of_range("fiber element out of range");
  if (mode.exact) {
    if (sys.fiber_size(j, x) > mode.guard) {
      throw GuardExceeded("fiber S_" + std::to_string(j + 1) + "(x) exceeds the enumeration guard; use sampled mode");
    }
    const Pin pin{j, x};
    sys.for_each(std::span<const Pin>(&pin, 1), visit);
    return;
  }
  Rng rng(derive_seed(mode.seed, {static_cast<std::uint64_t>(j), x}));
  std::vector<Index> s;
  for (std::uint64_t i = 0; i < mode.samples; ++i) {
    sys.sample_fiber(j, x, rng, s);
    visit(s);
  }
}

}  // namespace sparselab
