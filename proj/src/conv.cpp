#include "sparselab/conv.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sparselab/parallel.hpp"

namespace sparselab {

namespace {

// Fast pointwise access for dense or sparse storage.
struct Lookup {
  const WeightFunction* f = nullptr;
  const double* dense = nullptr;

  explicit Lookup(const WeightFunction& w) : f(&w) {
    if (w.storage() == Storage::dense) dense = w.dense_values().data();
  }
  double operator()(Index i) const { return dense ? dense[i] : f->at(i); }
};

void check_domains(const SequenceSystem& sys, std::span<const WeightFunction> funcs) {
  for (const auto& f : funcs) {
    if (!(f.ground() == sys.ground())) throw std::invalid_argument("function domain does not match the system ground set");
  }
}

// One function per tuple position; `fixed` marks the position that is not
// multiplied in (the convolution variable), or -1.
struct Product {
  std::vector<int> positions;      // non-constant positions
  std::vector<Lookup> lookups;     // aligned with positions
  std::vector<std::size_t> supports;
  double constant = 1.0;
  bool zero = false;
};

Product analyse(std::span<const WeightFunction> by_position, int skip) {
  Product p;
  for (int q = 0; q < static_cast<int>(by_position.size()); ++q) {
    if (q == skip) continue;
    const auto& f = by_position[q];
    if (auto c = f.constant_value()) {
      p.constant *= *c;
      continue;
    }
    p.positions.push_back(q);
    p.lookups.emplace_back(f);
    p.supports.push_back(f.support_size());
    if (p.supports.back() == 0) p.zero = true;
  }
  if (p.constant == 0.0) p.zero = true;
  return p;
}

double typical_fiber(const SequenceSystem& sys) {
  if (auto f = sys.uniform_fiber_size()) return static_cast<double>(*f);
  return 2.0 * static_cast<double>(sys.total_size()) / static_cast<double>(sys.ground().size());
}

enum class Plan { full, single, pair };

struct Choice {
  Plan plan = Plan::full;
  int a = -1, b = -1;  // indices into Product::positions
  double cost = 0.0;
};

// Picks the cheapest support-restricted enumeration.
Choice choose_plan(const SequenceSystem& sys, const Product& p) {
  Choice best;
  best.cost = static_cast<double>(sys.total_size());
  const double fiber = typical_fiber(sys);
  const double x = static_cast<double>(sys.ground().size());
  const double per_pair = std::max(1.0, static_cast<double>(sys.total_size()) / (x * x));
  std::vector<int> order(p.positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int l, int r) { return p.supports[l] < p.supports[r]; });
  if (!order.empty()) {
    const double c = static_cast<double>(p.supports[order[0]]) * fiber;
    if (c < best.cost) best = {Plan::single, order[0], -1, c};
  }
  if (order.size() >= 2) {
    const double c = static_cast<double>(p.supports[order[0]]) * static_cast<double>(p.supports[order[1]]) * per_pair;
    if (c < best.cost) best = {Plan::pair, order[0], order[1], c};
  }
  return best;
}

// Visits every tuple on which all non-constant factors can be non-zero
// (a superset restricted by one or two supports).
template <class Fn>
void visit_restricted(const SequenceSystem& sys, const Product& p, const Choice& choice, Fn&& visit) {
  const auto* ap = std::get_if<ApParams>(&sys.descriptor().params);
  if (ap && ap->wrap && choice.plan != Plan::full) {
    // Direct arithmetic for cyclic progressions.
    const std::int64_t n = ap->n;
    const int k = sys.k();
    const auto& diffs = sys.differences();
    std::vector<Index> t(k);
    auto emit = [&](std::int64_t x, std::int64_t d) {
      std::int64_t v = x;
      for (int i = 0; i < k; ++i) {
        t[i] = static_cast<Index>(v);
        v += d;
        if (v >= n) v -= n;
      }
      visit(std::span<const Index>(t));
    };
    if (choice.plan == Plan::single) {
      const int pos = p.positions[choice.a];
      for (Index u : p.lookups[choice.a].f->support()) {
        std::int64_t x = static_cast<std::int64_t>(u);
        for (auto d : diffs) emit(mod(x - pos * d, n), d);
      }
      return;
    }
    const int pa = p.positions[choice.a], pb = p.positions[choice.b];
    const auto sa = p.lookups[choice.a].f->support();
    const auto sb = p.lookups[choice.b].f->support();
    const std::int64_t delta = pb - pa;
    if (std::gcd(delta, n) == 1) {
      const std::int64_t inv = mod_inverse(mod(delta, n), n);
      std::vector<std::uint8_t> allowed(n, 0);
      for (auto d : diffs) allowed[d] = 1;
      for (Index u : sa) {
        for (Index v : sb) {
          const std::int64_t d = mod((static_cast<std::int64_t>(v) - static_cast<std::int64_t>(u)) % n * inv, n);
          if (!allowed[d]) continue;
          emit(mod(static_cast<std::int64_t>(u) - pa * d, n), d);
        }
      }
      return;
    }
  }
  const SequenceSystem::Visitor fn = [&](std::span<const Index> t) { visit(t); };
  if (choice.plan == Plan::full) {
    sys.for_each({}, fn);
  } else if (choice.plan == Plan::single) {
    const int pos = p.positions[choice.a];
    for (Index u : p.lookups[choice.a].f->support()) {
      const Pin pin{pos, u};
      sys.for_each(std::span<const Pin>(&pin, 1), fn);
    }
  } else {
    const int pa = p.positions[choice.a], pb = p.positions[choice.b];
    const auto sa = p.lookups[choice.a].f->support();
    const auto sb = p.lookups[choice.b].f->support();
    for (Index u : sa) {
      for (Index v : sb) {
        const Pin pins[2] = {{pa, u}, {pb, v}};
        sys.for_each(pins, fn);
      }
    }
  }
}

void check_guard(const Choice& choice, const ConvMode& mode, const char* what) {
  if (choice.cost > static_cast<double>(mode.guard)) {
    throw GuardExceeded(std::string(what) + ": exact evaluation would visit about " +
                        std::to_string(static_cast<std::uint64_t>(choice.cost)) +
                        " tuples (guard " + std::to_string(mode.guard) + "); use Monte Carlo mode");
  }
}

// Positions' functions laid out by tuple position, with a placeholder at j.
std::vector<WeightFunction> layout(const SequenceSystem& sys, int j, std::span<const WeightFunction> funcs) {
  const int k = sys.k();
  if (j < 0 || j >= k) throw std::out_of_range("convolution position out of range");
  if (static_cast<int>(funcs.size()) != k - 1) {
    throw std::invalid_argument("convolution needs k-1 functions, got " + std::to_string(funcs.size()));
  }
  check_domains(sys, funcs);
  std::vector<WeightFunction> by_position;
  by_position.reserve(k);
  for (int q = 0, src = 0; q < k; ++q) {
    if (q == j) {
      by_position.push_back(WeightFunction::constant(sys.ground(), 1.0));
    } else {
      by_position.push_back(funcs[src++]);
    }
  }
  return by_position;
}

std::vector<std::uint64_t> fiber_sizes(const SequenceSystem& sys, int j) {
  std::vector<std::uint64_t> sizes(sys.ground().size(), 0);
  sys.for_each({}, [&](std::span<const Index> t) { ++sizes[t[j]]; });
  return sizes;
}

ConvolutionResult convolve_exact(const SequenceSystem& sys, int j, const std::vector<WeightFunction>& by_position,
                                 const ConvMode& mode) {
  const auto& ground = sys.ground();
  ConvolutionResult out;
  out.exact = true;
  const Product p = analyse(by_position, j);
  const auto uniform = sys.uniform_fiber_size();
  std::vector<std::uint64_t> sizes;
  if (!uniform) {
    if (static_cast<double>(sys.total_size()) > static_cast<double>(mode.guard)) {
      throw GuardExceeded("convolution: fiber sizes need a full scan beyond the guard; use Monte Carlo mode");
    }
    sizes = fiber_sizes(sys, j);
  }
  if (p.zero) {
    out.values = WeightFunction::constant(ground, 0.0);
    return out;
  }
  if (p.positions.empty()) {
    if (uniform) {
      out.values = WeightFunction::constant(ground, *uniform > 0 ? p.constant : 0.0);
    } else {
      std::vector<double> v(ground.size());
      for (Index x = 0; x < v.size(); ++x) v[x] = sizes[x] > 0 ? p.constant : 0.0;
      out.values = WeightFunction::dense(ground, std::move(v));
    }
    return out;
  }
  const Choice choice = choose_plan(sys, p);
  check_guard(choice, mode, "convolution");

  const bool dense = ground.size() <= kDenseLimit;
  std::vector<double> acc(dense ? ground.size() : 0, 0.0);
  std::unordered_map<Index, double> sparse_acc;
  visit_restricted(sys, p, choice, [&](std::span<const Index> t) {
    double prod = p.constant;
    for (std::size_t q = 0; q < p.positions.size() && prod != 0.0; ++q) prod *= p.lookups[q](t[p.positions[q]]);
    if (prod == 0.0) return;
    if (dense) {
      acc[t[j]] += prod;
    } else {
      sparse_acc[t[j]] += prod;
    }
  });
  auto fiber = [&](Index x) -> double { return uniform ? static_cast<double>(*uniform) : static_cast<double>(sizes[x]); };
  if (dense) {
    for (Index x = 0; x < acc.size(); ++x) {
      const double f = fiber(x);
      acc[x] = f > 0 ? acc[x] / f : 0.0;
    }
    out.values = WeightFunction::dense(ground, std::move(acc));
  } else {
    std::vector<std::pair<Index, double>> entries;
    entries.reserve(sparse_acc.size());
    for (const auto& [x, v] : sparse_acc) entries.emplace_back(x, v / fiber(x));
    out.values = WeightFunction::sparse(ground, std::move(entries));
  }
  return out;
}

ConvolutionResult convolve_mc(const SequenceSystem& sys, int j, const std::vector<WeightFunction>& by_position,
                              const ConvMode& mode) {
  const auto& ground = sys.ground();
  ConvolutionResult out;
  out.exact = false;
  out.samples = mode.samples;
  const Product p = analyse(by_position, j);
  if (p.zero || p.positions.empty()) {
    // Deterministic cases need no sampling.
    ConvMode exact = mode;
    exact.exact = true;
    auto r = convolve_exact(sys, j, by_position, exact);
    r.exact = false;
    r.samples = mode.samples;
    r.stderrs.assign(ground.size(), 0.0);
    return r;
  }
  if (ground.size() > kDenseLimit) throw GuardExceeded("convolution: ground set too large for pointwise Monte Carlo");
  if (mode.samples == 0) throw std::invalid_argument("Monte Carlo mode needs at least one sample");
  std::vector<double> values(ground.size(), 0.0), errs(ground.size(), 0.0);
  parallel_for(ground.size(), mode.threads, [&](std::size_t x) {
    if (sys.fiber_size(j, x) == 0) return;
    Rng rng(derive_seed(mode.seed, {static_cast<std::uint64_t>(j), x}));
    std::vector<Index> t;
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t s = 0; s < mode.samples; ++s) {
      sys.sample_fiber(j, x, rng, t);
      double prod = p.constant;
      for (std::size_t q = 0; q < p.positions.size() && prod != 0.0; ++q) prod *= p.lookups[q](t[p.positions[q]]);
      sum += prod;
      sq += prod * prod;
    }
    const double n = static_cast<double>(mode.samples);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1)) : 0.0;
    values[x] = mean;
    errs[x] = std::sqrt(var / n);
  });
  out.max_stderr = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
  out.values = WeightFunction::dense(ground, std::move(values));
  out.stderrs = std::move(errs);
  return out;
}

double inner(const WeightFunction& a, const WeightFunction& b) { return inner_product(a, b); }

WeightFunction mean_of(std::span<const WeightFunction> fs) {
  if (fs.empty()) throw std::invalid_argument("need at least one function");
  WeightFunction acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = acc.plus(fs[i]);
  return acc.scaled(1.0 / static_cast<double>(fs.size()));
}

// Enumerates [m]^len index tuples in lexicographic order.
template <class Fn>
void for_each_index_tuple(std::size_t m, int len, Fn&& fn) {
  std::vector<std::size_t> idx(len, 0);
  for (;;) {
    fn(std::as_const(idx));
    int q = len - 1;
    while (q >= 0 && ++idx[q] == m) idx[q--] = 0;
    if (q < 0) return;
  }
}

}  // namespace

ConvolutionResult convolve(const SequenceSystem& sys, int j, std::span<const WeightFunction> funcs,
                           const ConvMode& mode) {
  const auto by_position = layout(sys, j, funcs);
  return mode.exact ? convolve_exact(sys, j, by_position, mode) : convolve_mc(sys, j, by_position, mode);
}

ConvolutionResult capped_convolve(const SequenceSystem& sys, int j, std::span<const WeightFunction> funcs,
                                  const ConvMode& mode) {
  for (const auto& f : funcs) {
    if (f.min_value() < 0.0) throw std::invalid_argument("capped convolution needs non-negative functions");
  }
  auto r = convolve(sys, j, funcs, mode);
  if (auto c = r.values.constant_value()) {
    r.values = WeightFunction::constant(sys.ground(), std::min(*c, kCap));
    return r;
  }
  if (r.values.storage() == Storage::dense) {
    auto v = r.values.values();
    for (auto& x : v) x = std::min(x, kCap);
    r.values = WeightFunction::dense(sys.ground(), std::move(v));
  } else {
    std::vector<std::pair<Index, double>> e(r.values.sparse_entries().begin(), r.values.sparse_entries().end());
    for (auto& [i, v] : e) v = std::min(v, kCap);
    r.values = WeightFunction::sparse(sys.ground(), std::move(e));
  }
  return r;
}

Estimate multilinear_count(const SequenceSystem& sys, std::span<const WeightFunction> funcs, const ConvMode& mode) {
  if (static_cast<int>(funcs.size()) != sys.k()) {
    throw std::invalid_argument("count needs k functions, got " + std::to_string(funcs.size()));
  }
  check_domains(sys, funcs);
  Estimate e;
  if (sys.total_size() == 0) return e;
  const Product p = analyse(funcs, -1);
  if (p.zero) return e;
  if (p.positions.empty()) {
    e.value = p.constant;
    return e;
  }
  if (mode.exact) {
    const Choice choice = choose_plan(sys, p);
    check_guard(choice, mode, "count");
    double sum = 0.0;
    visit_restricted(sys, p, choice, [&](std::span<const Index> t) {
      double prod = p.constant;
      for (std::size_t q = 0; q < p.positions.size() && prod != 0.0; ++q) prod *= p.lookups[q](t[p.positions[q]]);
      sum += prod;
    });
    e.value = sum / static_cast<double>(sys.total_size());
    return e;
  }
  if (mode.samples == 0) throw std::invalid_argument("Monte Carlo mode needs at least one sample");
  // Fixed-size blocks with derived seeds keep the estimate independent of threads.
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (mode.samples + kBlock - 1) / kBlock;
  std::vector<double> sums(blocks, 0.0), sqs(blocks, 0.0);
  parallel_for(blocks, mode.threads, [&](std::size_t b) {
    Rng rng(derive_seed(mode.seed, {0xC0u, b}));
    std::vector<Index> t;
    const std::uint64_t count = std::min(kBlock, mode.samples - b * kBlock);
    for (std::uint64_t s = 0; s < count; ++s) {
      sys.sample_tuple(rng, t);
      double prod = p.constant;
      for (std::size_t q = 0; q < p.positions.size() && prod != 0.0; ++q) prod *= p.lookups[q](t[p.positions[q]]);
      sums[b] += prod;
      sqs[b] += prod * prod;
    }
  }, 1);
  const double n = static_cast<double>(mode.samples);
  const double sum = std::accumulate(sums.begin(), sums.end(), 0.0);
  const double sq = std::accumulate(sqs.begin(), sqs.end(), 0.0);
  e.exact = false;
  e.samples = mode.samples;
  e.value = sum / n;
  const double var = n > 1 ? std::max(0.0, (sq - n * e.value * e.value) / (n - 1)) : 0.0;
  e.stderr_ = std::sqrt(var / n);
  return e;
}

Estimate count_functional(const SequenceSystem& sys, const WeightFunction& f, const ConvMode& mode) {
  std::vector<WeightFunction> funcs(sys.k(), f);
  return multilinear_count(sys, funcs, mode);
}

Estimate split_capped_count(const SequenceSystem& sys, std::span<const WeightFunction> fs, const ConvMode& mode) {
  if (fs.empty()) throw std::invalid_argument("split count needs m >= 1 functions");
  check_domains(sys, fs);
  for (const auto& f : fs) {
    if (f.min_value() < 0.0) throw std::invalid_argument("split count needs non-negative functions");
  }
  const int k = sys.k();
  const std::size_t m = fs.size();
  ConvMode inner_mode = mode;
  inner_mode.exact = true;
  const double tuples = std::pow(static_cast<double>(m), k - 1);
  Estimate e;
  if (mode.exact || tuples <= static_cast<double>(mode.samples)) {
    const WeightFunction fbar = mean_of(fs);
    double sum = 0.0;
    std::vector<WeightFunction> args(k - 1);
    for_each_index_tuple(m, k - 1, [&](const std::vector<std::size_t>& idx) {
      for (int q = 0; q < k - 1; ++q) args[q] = fs[idx[q]];
      sum += inner(fbar, capped_convolve(sys, 0, args, inner_mode).values);
    });
    e.value = sum / tuples;
    return e;
  }
  Rng rng(derive_seed(mode.seed, {0x5917u}));
  double sum = 0.0, sq = 0.0;
  std::vector<WeightFunction> args(k - 1);
  for (std::uint64_t s = 0; s < mode.samples; ++s) {
    const std::size_t i1 = uniform_below(rng, m);
    for (int q = 0; q < k - 1; ++q) args[q] = fs[uniform_below(rng, m)];
    const double v = inner(fs[i1], capped_convolve(sys, 0, args, inner_mode).values);
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(mode.samples);
  e.exact = false;
  e.samples = mode.samples;
  e.value = sum / n;
  const double var = n > 1 ? std::max(0.0, (sq - n * e.value * e.value) / (n - 1)) : 0.0;
  e.stderr_ = std::sqrt(var / n);
  return e;
}

GapBound counting_gap_bound(const SequenceSystem& sys, const WeightFunction& f, const WeightFunction& g,
                            const ConvMode& mode) {
  ConvMode exact = mode;
  exact.exact = true;
  const int k = sys.k();
  GapBound out;
  const double cf = count_functional(sys, f, exact).value;
  const double cg = count_functional(sys, g, exact).value;
  out.lhs = std::abs(cf - cg);
  const WeightFunction diff = f.plus(g, -1.0);
  std::vector<WeightFunction> args(k - 1);
  for (int j = 0; j < k; ++j) {
    for (int q = 0, src = 0; q < k; ++q) {
      if (q == j) continue;
      args[src++] = q < j ? g : f;
    }
    const double term = inner(diff, convolve(sys, j, args, exact).values);
    out.terms.push_back(term);
    out.telescoped += term;
    out.rhs += std::abs(term);
  }
  return out;
}

PrecountingReport precounting_discrepancy(const SequenceSystem& sys, std::span<const WeightFunction> fs,
                                          const WeightFunction& g, const ConvMode& mode) {
  ConvMode exact = mode;
  exact.exact = true;
  const int k = sys.k();
  const std::size_t m = fs.size();
  PrecountingReport r;
  r.split = split_capped_count(sys, fs, exact).value;
  r.dense = count_functional(sys, g, exact).value;
  const WeightFunction diff = mean_of(fs).plus(g, -1.0);
  std::vector<WeightFunction> args(k - 1);
  for (int j = 0; j < k; ++j) {
    const int free = k - 1 - j;
    double sum = 0.0;
    std::size_t count = 0;
    auto eval = [&](const std::vector<std::size_t>& idx) {
      for (int q = 0, src = 0; q < k; ++q) {
        if (q == j) continue;
        args[src++] = q < j ? g : fs[idx[q - j - 1]];
      }
      sum += inner(diff, capped_convolve(sys, j, args, exact).values);
      ++count;
    };
    if (free == 0) {
      eval({});
    } else {
      for_each_index_tuple(m, free, eval);
    }
    r.correction += sum / static_cast<double>(count);
  }
  r.discrepancy = std::abs(r.split - r.dense - r.correction);
  return r;
}

KernelValue w_kernel(const SequenceSystem& sys, std::span<const WeightFunction> mid_funcs, Index x, Index y) {
  const int k = sys.k();
  if (k < 2) throw std::invalid_argument("kernel needs k >= 2");
  if (static_cast<int>(mid_funcs.size()) != k - 2) {
    throw std::invalid_argument("kernel needs k-2 middle functions, got " + std::to_string(mid_funcs.size()));
  }
  check_domains(sys, mid_funcs);
  KernelValue out;
  double sum = 0.0;
  const Pin pins[2] = {{0, x}, {k - 1, y}};
  sys.for_each(pins, [&](std::span<const Index> t) {
    double prod = 1.0;
    for (int q = 1; q < k - 1; ++q) prod *= mid_funcs[q - 1].at(t[q]);
    sum += prod;
    ++out.size;
  });
  if (out.size == 0) {
    out.empty = true;
    return out;
  }
  out.value = sum / static_cast<double>(out.size);
  return out;
}

}  // namespace sparselab
