#include "sparselab/core.hpp"

#include <numeric>
#include <sstream>

namespace sparselab {

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

GroundSet GroundSet::cyclic(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("cyclic ground set needs n >= 1");
  return GroundSet(GroundKind::cyclic, n, 1, static_cast<Index>(n));
}

GroundSet GroundSet::punctured(std::int64_t n) {
  if (n < 2) throw std::invalid_argument("punctured ground set needs n >= 2");
  return GroundSet(GroundKind::punctured, n, 1, static_cast<Index>(n - 1));
}

GroundSet GroundSet::grid(std::int64_t n, int r) {
  if (n < 1 || r < 1) throw std::invalid_argument("grid ground set needs n, r >= 1");
  double approx = std::pow(static_cast<double>(n), r);
  if (approx > 1e15) throw std::invalid_argument("grid ground set too large");
  Index size = 1;
  for (int i = 0; i < r; ++i) size *= static_cast<Index>(n);
  return GroundSet(GroundKind::grid, n, r, size);
}

GroundSet GroundSet::ksubsets(std::int64_t n, int k) {
  if (k < 1 || n < k) throw std::invalid_argument("ksubsets ground set needs 1 <= k <= n");
  return GroundSet(GroundKind::ksubsets, n, k, static_cast<Index>(binomial(n, k)));
}

Index GroundSet::index(const Element& e) const {
  auto bad = [&] { return std::out_of_range("element not in " + describe()); };
  switch (kind_) {
    case GroundKind::cyclic: {
      if (e.size() != 1 || e[0] < 0 || e[0] >= n_) throw bad();
      return static_cast<Index>(e[0]);
    }
    case GroundKind::punctured: {
      if (e.size() != 1 || e[0] < 1 || e[0] >= n_) throw bad();
      return static_cast<Index>(e[0] - 1);
    }
    case GroundKind::grid: {
      if (e.size() != static_cast<std::size_t>(arity_)) throw bad();
      Index idx = 0;
      for (auto c : e) {
        if (c < 0 || c >= n_) throw bad();
        idx = idx * static_cast<Index>(n_) + static_cast<Index>(c);
      }
      return idx;
    }
    case GroundKind::ksubsets: {
      if (e.size() != static_cast<std::size_t>(arity_)) throw bad();
      Index idx = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] < 0 || e[i] >= n_ || (i > 0 && e[i] <= e[i - 1])) throw bad();
        idx += binomial(e[i], static_cast<std::int64_t>(i) + 1);
      }
      return idx;
    }
  }
  throw bad();
}

Element GroundSet::element(Index i) const {
  if (i >= size_) throw std::out_of_range("index out of range for " + describe());
  switch (kind_) {
    case GroundKind::cyclic:
      return {static_cast<std::int64_t>(i)};
    case GroundKind::punctured:
      return {static_cast<std::int64_t>(i) + 1};
    case GroundKind::grid: {
      Element e(arity_);
      for (int c = arity_ - 1; c >= 0; --c) {
        e[c] = static_cast<std::int64_t>(i % static_cast<Index>(n_));
        i /= static_cast<Index>(n_);
      }
      return e;
    }
    case GroundKind::ksubsets: {
      Element e(arity_);
      std::int64_t v = n_ - 1;
      for (int pos = arity_; pos >= 1; --pos) {
        while (binomial(v, pos) > i) --v;
        e[pos - 1] = v;
        i -= binomial(v, pos);
        --v;
      }
      return e;
    }
  }
  return {};
}

nlohmann::json GroundSet::to_json() const {
  switch (kind_) {
    case GroundKind::cyclic:
      return {{"kind", "cyclic"}, {"n", n_}};
    case GroundKind::punctured:
      return {{"kind", "punctured"}, {"n", n_}};
    case GroundKind::grid:
      return {{"kind", "grid"}, {"n", n_}, {"r", arity_}};
    case GroundKind::ksubsets:
      return {{"kind", "ksubsets"}, {"n", n_}, {"k", arity_}};
  }
  return {};
}

GroundSet GroundSet::from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto n = j.at("n").get<std::int64_t>();
  if (kind == "cyclic") return cyclic(n);
  if (kind == "punctured") return punctured(n);
  if (kind == "grid") return grid(n, j.at("r").get<int>());
  if (kind == "ksubsets") return ksubsets(n, j.at("k").get<int>());
  throw std::invalid_argument("unknown ground set kind '" + kind + "'");
}

std::string GroundSet::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case GroundKind::cyclic: os << "Z_" << n_; break;
    case GroundKind::punctured: os << "Z_" << n_ << "\\{0}"; break;
    case GroundKind::grid: os << "Z_" << n_ << "^" << arity_; break;
    case GroundKind::ksubsets: os << "K_" << n_ << "^(" << arity_ << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

ElementSet::ElementSet(Index universe, std::vector<Index> members)
    : universe_(universe), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= universe_) {
    throw std::out_of_range("element set member outside the universe");
  }
  if (universe_ <= (Index{1} << 27)) {
    bitmap_.assign(universe_, 0);
    for (auto m : members_) bitmap_[m] = 1;
  }
}

ElementSet ElementSet::full(Index universe) {
  std::vector<Index> all(universe);
  std::iota(all.begin(), all.end(), Index{0});
  return ElementSet(universe, std::move(all));
}

bool ElementSet::contains(Index i) const {
  if (i >= universe_) return false;
  if (!bitmap_.empty()) return bitmap_[i] != 0;
  return std::binary_search(members_.begin(), members_.end(), i);
}

// ---------------------------------------------------------------------------

WeightFunction WeightFunction::constant(const GroundSet& ground, double value) {
  if (ground.size() > kDenseLimit) {
    throw std::invalid_argument("constant function needs dense storage; ground set too large");
  }
  return dense(ground, std::vector<double>(ground.size(), value));
}

WeightFunction WeightFunction::dense(const GroundSet& ground, std::vector<double> values) {
  if (values.size() != ground.size()) {
    throw std::invalid_argument("dense values do not match the ground set size");
  }
  WeightFunction f;
  f.ground_ = ground;
  f.storage_ = Storage::dense;
  f.dense_ = std::move(values);
  return f;
}

WeightFunction WeightFunction::sparse(const GroundSet& ground,
                                      std::vector<std::pair<Index, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first >= ground.size()) {
      throw std::out_of_range("sparse entry outside the ground set");
    }
    if (i > 0 && entries[i].first == entries[i - 1].first) {
      throw std::invalid_argument("duplicate sparse entry");
    }
  }
  std::erase_if(entries, [](const auto& e) { return e.second == 0.0; });
  WeightFunction f;
  f.ground_ = ground;
  f.storage_ = Storage::sparse;
  f.sparse_ = std::move(entries);
  return f;
}

WeightFunction WeightFunction::indicator(const GroundSet& ground, const ElementSet& set) {
  if (set.universe() != ground.size()) {
    throw std::invalid_argument("element set universe does not match the ground set");
  }
  std::vector<std::pair<Index, double>> entries;
  entries.reserve(set.size());
  for (auto m : set.members()) entries.emplace_back(m, 1.0);
  auto f = sparse(ground, std::move(entries));
  return ground.size() <= kDenseLimit ? f.to_dense() : f;
}

double WeightFunction::at(Index i) const {
  if (storage_ == Storage::dense) return dense_[i];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), i,
                             [](const auto& e, Index key) { return e.first < key; });
  return (it != sparse_.end() && it->first == i) ? it->second : 0.0;
}

std::vector<Index> WeightFunction::support() const {
  std::vector<Index> out;
  if (storage_ == Storage::dense) {
    for (Index i = 0; i < dense_.size(); ++i) {
      if (dense_[i] != 0.0) out.push_back(i);
    }
  } else {
    out.reserve(sparse_.size());
    for (const auto& [i, v] : sparse_) out.push_back(i);
  }
  return out;
}

std::size_t WeightFunction::support_size() const {
  if (storage_ == Storage::sparse) return sparse_.size();
  return static_cast<std::size_t>(
      std::count_if(dense_.begin(), dense_.end(), [](double v) { return v != 0.0; }));
}

std::optional<double> WeightFunction::constant_value() const {
  if (storage_ == Storage::sparse) {
    if (sparse_.empty()) return 0.0;
    if (sparse_.size() != size()) return std::nullopt;
    const double v = sparse_.front().second;
    for (const auto& e : sparse_) {
      if (e.second != v) return std::nullopt;
    }
    return v;
  }
  if (dense_.empty()) return 0.0;
  const double v = dense_.front();
  for (double x : dense_) {
    if (x != v) return std::nullopt;
  }
  return v;
}

double WeightFunction::min_value() const {
  if (storage_ == Storage::dense) return *std::min_element(dense_.begin(), dense_.end());
  double m = sparse_.size() < size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& e : sparse_) m = std::min(m, e.second);
  return m;
}

double WeightFunction::max_value() const {
  if (storage_ == Storage::dense) return *std::max_element(dense_.begin(), dense_.end());
  double m = sparse_.size() < size() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& e : sparse_) m = std::max(m, e.second);
  return m;
}

WeightFunction WeightFunction::to_dense() const {
  if (storage_ == Storage::dense) return *this;
  if (size() > kDenseLimit) {
    throw std::invalid_argument("ground set too large for dense storage");
  }
  return dense(ground_, values());
}

WeightFunction WeightFunction::to_sparse() const {
  if (storage_ == Storage::sparse) return *this;
  std::vector<std::pair<Index, double>> entries;
  for (Index i = 0; i < dense_.size(); ++i) {
    if (dense_[i] != 0.0) entries.emplace_back(i, dense_[i]);
  }
  return sparse(ground_, std::move(entries));
}

std::vector<double> WeightFunction::values() const {
  if (storage_ == Storage::dense) return dense_;
  std::vector<double> out(size(), 0.0);
  for (const auto& [i, v] : sparse_) out[i] = v;
  return out;
}

WeightFunction WeightFunction::scaled(double factor) const {
  WeightFunction f = *this;
  for (auto& v : f.dense_) v *= factor;
  for (auto& e : f.sparse_) e.second *= factor;
  if (storage_ == Storage::sparse) std::erase_if(f.sparse_, [](const auto& e) { return e.second == 0.0; });
  return f;
}

WeightFunction WeightFunction::plus(const WeightFunction& other, double factor) const {
  if (!(ground_ == other.ground_)) throw std::invalid_argument("domain mismatch");
  if (storage_ == Storage::sparse && other.storage_ == Storage::sparse) {
    std::vector<std::pair<Index, double>> merged;
    std::size_t a = 0, b = 0;
    while (a < sparse_.size() || b < other.sparse_.size()) {
      if (b == other.sparse_.size() ||
          (a < sparse_.size() && sparse_[a].first < other.sparse_[b].first)) {
        merged.push_back(sparse_[a++]);
      } else if (a == sparse_.size() || other.sparse_[b].first < sparse_[a].first) {
        merged.emplace_back(other.sparse_[b].first, factor * other.sparse_[b].second);
        ++b;
      } else {
        merged.emplace_back(sparse_[a].first, sparse_[a].second + factor * other.sparse_[b].second);
        ++a;
        ++b;
      }
    }
    return sparse(ground_, std::move(merged));
  }
  auto v = values();
  if (other.storage_ == Storage::dense) {
    for (Index i = 0; i < v.size(); ++i) v[i] += factor * other.dense_[i];
  } else {
    for (const auto& [i, x] : other.sparse_) v[i] += factor * x;
  }
  return dense(ground_, std::move(v));
}

WeightFunction WeightFunction::times(const WeightFunction& other) const {
  if (!(ground_ == other.ground_)) throw std::invalid_argument("domain mismatch");
  if (storage_ == Storage::sparse || other.storage_ == Storage::sparse) {
    const auto& sp = storage_ == Storage::sparse ? *this : other;
    const auto& rest = storage_ == Storage::sparse ? other : *this;
    std::vector<std::pair<Index, double>> entries;
    for (const auto& [i, x] : sp.sparse_) entries.emplace_back(i, x * rest.at(i));
    return sparse(ground_, std::move(entries));
  }
  std::vector<double> v(dense_.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = dense_[i] * other.dense_[i];
  return dense(ground_, std::move(v));
}

nlohmann::json WeightFunction::to_json() const {
  nlohmann::json j;
  j["domain"] = ground_.to_json();
  if (storage_ == Storage::dense) {
    j["storage"] = "dense";
    j["entries"] = dense_;
  } else {
    j["storage"] = "sparse";
    auto arr = nlohmann::json::array();
    for (const auto& [i, v] : sparse_) arr.push_back({i, v});
    j["entries"] = std::move(arr);
  }
  return j;
}

WeightFunction WeightFunction::from_json(const nlohmann::json& j) {
  auto ground = GroundSet::from_json(j.at("domain"));
  const auto storage = j.at("storage").get<std::string>();
  if (storage == "dense") return dense(ground, j.at("entries").get<std::vector<double>>());
  if (storage == "sparse") {
    std::vector<std::pair<Index, double>> entries;
    for (const auto& e : j.at("entries")) {
      entries.emplace_back(e.at(0).get<Index>(), e.at(1).get<double>());
    }
    return sparse(ground, std::move(entries));
  }
  throw std::invalid_argument("unknown storage mode '" + storage + "'");
}

// ---------------------------------------------------------------------------

double expectation(const WeightFunction& f) {
  double s = 0.0;
  if (f.storage() == Storage::dense) {
    for (double v : f.dense_values()) s += v;
  } else {
    for (const auto& e : f.sparse_entries()) s += e.second;
  }
  return s / static_cast<double>(f.size());
}

double inner_product(const WeightFunction& f, const WeightFunction& g) {
  if (!(f.ground() == g.ground())) {
    throw std::invalid_argument("inner product of functions on different ground sets");
  }
  double s = 0.0;
  if (f.storage() == Storage::dense && g.storage() == Storage::dense) {
    auto a = f.dense_values();
    auto b = g.dense_values();
    for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  } else if (f.storage() == Storage::sparse && g.storage() == Storage::sparse) {
    auto a = f.sparse_entries();
    auto b = g.sparse_entries();
    std::size_t i = 0, k = 0;
    while (i < a.size() && k < b.size()) {
      if (a[i].first < b[k].first) {
        ++i;
      } else if (b[k].first < a[i].first) {
        ++k;
      } else {
        s += a[i++].second * b[k++].second;
      }
    }
  } else {
    const auto& sp = f.storage() == Storage::sparse ? f : g;
    const auto& dn = f.storage() == Storage::sparse ? g : f;
    auto d = dn.dense_values();
    for (const auto& [i, v] : sp.sparse_entries()) s += v * d[i];
  }
  return s / static_cast<double>(f.size());
}

double lp_norm(const WeightFunction& f, Norm p) {
  double acc = 0.0;
  auto visit = [&](double v) {
    const double a = std::abs(v);
    switch (p) {
      case Norm::l1: acc += a; break;
      case Norm::l2: acc += a * a; break;
      case Norm::linf: acc = std::max(acc, a); break;
    }
  };
  if (f.storage() == Storage::dense) {
    for (double v : f.dense_values()) visit(v);
  } else {
    for (const auto& e : f.sparse_entries()) visit(e.second);
  }
  const double n = static_cast<double>(f.size());
  switch (p) {
    case Norm::l1: return acc / n;
    case Norm::l2: return std::sqrt(acc / n);
    case Norm::linf: return acc;
  }
  return acc;
}

WeightFunction make_measure(const GroundSet& ground, const ElementSet& set,
                            MeasureMode mode, double p) {
  if (set.universe() != ground.size()) {
    throw std::invalid_argument("element set universe does not match the ground set");
  }
  double value = 0.0;
  if (mode == MeasureMode::characteristic) {
    if (set.empty()) throw std::invalid_argument("characteristic measure of an empty set");
    value = static_cast<double>(ground.size()) / static_cast<double>(set.size());
  } else {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("associated measure needs 0 < p <= 1");
    value = 1.0 / p;
  }
  std::vector<std::pair<Index, double>> entries;
  entries.reserve(set.size());
  for (auto m : set.members()) entries.emplace_back(m, value);
  auto f = WeightFunction::sparse(ground, std::move(entries));
  return ground.size() <= kDenseLimit ? f.to_dense() : f;
}

}  // namespace sparselab
