#include "sparselab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sparselab/lp.hpp"
#include "sparselab/parallel.hpp"
#include "sparselab/verify.hpp"

namespace sparselab {

nlohmann::json AntiUniformFamily::to_json() const {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : members) ms.push_back({{"kind", m.kind}, {"params", m.params}});
  return {{"size", members.size()}, {"members", ms}, {"provenance", provenance}};
}

AntiUniformFamily build_family(const SequenceSystem& sys, const RandomEnsemble& ensemble,
                               const FamilyParams& params) {
  if (params.size < 1) throw std::invalid_argument("family size must be at least 1");
  const auto& ground = sys.ground();
  const int k = sys.k();
  const std::size_t m = ensemble.m();
  if (params.size > 1 && m + 1 < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("sampling anti-uniform functions needs at least k-1 measures");
  }
  for (const auto& v : params.indicators) {
    if (v.universe() != ground.size()) throw std::invalid_argument("indicator set is not a subset of X");
  }
  AntiUniformFamily fam;
  fam.provenance = {{"size", params.size},
                    {"seed", params.seed},
                    {"ensemble_seed", ensemble.master_seed},
                    {"p", ensemble.p},
                    {"m", m},
                    {"indicators", params.indicators.size()}};
  fam.members.resize(params.size);
  fam.members[0] = {WeightFunction::constant(ground, 1.0), "constant", {}};
  const auto measures = ensemble.measures();
  ConvMode exact;
  parallel_for(params.size - 1, params.threads, [&](std::size_t i) {
    const std::size_t s = i + 1;
    Rng rng(derive_seed(params.seed, {s}));
    const int j = static_cast<int>(uniform_below(rng, k));
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    for (int q = 0; q < k - 1; ++q) std::swap(all[q], all[q + uniform_below(rng, m - q)]);
    all.resize(k - 1);
    const bool indicator = uniform_real(rng) < 0.5;
    const double level = uniform_real(rng);
    const double keep = uniform_real(rng) < 0.5 ? 1.0 : uniform_real(rng);
    const std::uint64_t seed = rng();
    const GMode gm = indicator ? GMode::indicator(level) : GMode::constant_value(level);
    fam.members[s] = {sample_anti_uniform(sys, measures, j, all, gm, keep, seed, exact),
                      "anti_uniform",
                      {{"position", j},
                       {"indices", all},
                       {"g", indicator ? "indicator" : "constant"},
                       {"g_level", level},
                       {"f_keep", keep},
                       {"seed", seed}}};
  });
  for (std::size_t v = 0; v < params.indicators.size(); ++v) {
    fam.members.push_back({WeightFunction::indicator(ground, params.indicators[v]), "indicator",
                           {{"set", v}, {"size", params.indicators[v].size()}}});
  }
  return fam;
}

double antiuniform_norm(const WeightFunction& h, const AntiUniformFamily& family) {
  if (family.members.empty()) throw std::invalid_argument("anti-uniform family is empty");
  double best = 0.0;
  for (const auto& m : family.members) best = std::max(best, std::abs(inner_product(h, m.phi)));
  return best;
}

nlohmann::json DenseModelResult::to_json() const {
  return {{"g", g.to_json()},         {"achieved_norm", achieved_norm}, {"dual_bound", dual_bound},
          {"scaling", scaling},       {"iterations", iterations},       {"status", status},
          {"argmax_member", argmax_member}};
}

nlohmann::json ColouringModelResult::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& f : gs) g.push_back(f.to_json());
  return {{"g", g},         {"achieved_norm", achieved_norm}, {"dual_bound", dual_bound},
          {"scaling", scaling}, {"iterations", iterations},   {"status", status}};
}

namespace {

constexpr std::size_t kLpCellLimit = std::size_t{1} << 26;

std::vector<std::vector<double>> dense_members(const AntiUniformFamily& family) {
  std::vector<std::vector<double>> rows;
  rows.reserve(family.members.size());
  for (const auto& m : family.members) rows.push_back(m.phi.values());
  return rows;
}

struct Coupled {
  std::vector<WeightFunction> gs;
  double dual_bound = 0.0;
  std::uint64_t pivots = 0;
  LpStatus status = LpStatus::optimal;
};

// min t s.t. |⟨c_i − g_i, φ_r⟩| <= t for all i, r; g_i >= 0 and, when
// colours > 1, Σ_i g_i <= 1 (otherwise g <= 1). Written as max u = T0 − t so
// that the origin is feasible.
Coupled solve_coupled(const std::vector<WeightFunction>& cs, const AntiUniformFamily& family,
                      std::uint64_t max_pivots) {
  const auto& ground = cs.front().ground();
  const std::size_t n = ground.size();
  const std::size_t r_count = family.members.size();
  const std::size_t colours = cs.size();
  const std::size_t vars = colours * n + 1;
  const std::size_t rows_count = 2 * colours * r_count + n + 1;
  if (vars * rows_count > kLpCellLimit) {
    throw GuardExceeded("dense-model LP too large: " + std::to_string(rows_count) + " x " + std::to_string(vars));
  }
  const auto phi = dense_members(family);
  std::vector<std::vector<double>> a_val(colours, std::vector<double>(r_count));
  double t0 = 0.0;
  for (std::size_t i = 0; i < colours; ++i) {
    for (std::size_t r = 0; r < r_count; ++r) {
      a_val[i][r] = inner_product(cs[i], family.members[r].phi);
      t0 = std::max(t0, std::abs(a_val[i][r]));
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  a.reserve(rows_count);
  b.reserve(rows_count);
  for (std::size_t i = 0; i < colours; ++i) {
    for (std::size_t r = 0; r < r_count; ++r) {
      std::vector<double> plus(vars, 0.0), minus(vars, 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        plus[i * n + x] = phi[r][x] * inv_n;
        minus[i * n + x] = -phi[r][x] * inv_n;
      }
      plus[vars - 1] = minus[vars - 1] = 1.0;
      a.push_back(std::move(plus));
      b.push_back(t0 + a_val[i][r]);
      a.push_back(std::move(minus));
      b.push_back(t0 - a_val[i][r]);
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> row(vars, 0.0);
    for (std::size_t i = 0; i < colours; ++i) row[i * n + x] = 1.0;
    a.push_back(std::move(row));
    b.push_back(1.0);
  }
  {
    std::vector<double> row(vars, 0.0);
    row[vars - 1] = 1.0;
    a.push_back(std::move(row));
    b.push_back(t0);
  }
  std::vector<double> c(vars, 0.0);
  c[vars - 1] = 1.0;
  const auto lp = solve_lp(a, b, c, max_pivots);

  Coupled out;
  out.pivots = lp.pivots;
  out.status = lp.status;
  std::vector<std::vector<double>> g(colours, std::vector<double>(n, 0.0));
  if (!lp.x.empty()) {
    for (std::size_t i = 0; i < colours; ++i) {
      for (std::size_t x = 0; x < n; ++x) g[i][x] = std::clamp(lp.x[i * n + x], 0.0, 1.0);
    }
  }
  // keep Σ g_i <= 1 after rounding noise
  if (colours > 1) {
    for (std::size_t x = 0; x < n; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < colours; ++i) s += g[i][x];
      if (s > 1.0) {
        for (std::size_t i = 0; i < colours; ++i) g[i][x] /= s;
      }
    }
  }
  for (auto& gi : g) out.gs.push_back(WeightFunction::dense(ground, std::move(gi)));

  // dual certificate: ψ_i = Σ_r w_r (±φ_r) from the row duals
  if (!lp.duals.empty()) {
    double total = 0.0;
    for (std::size_t q = 0; q < 2 * colours * r_count; ++q) total += std::max(0.0, lp.duals[q]);
    if (total > 0.0) {
      std::vector<std::vector<double>> psi(colours, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < colours; ++i) {
        for (std::size_t r = 0; r < r_count; ++r) {
          const std::size_t q = 2 * (i * r_count + r);
          const double w = (std::max(0.0, lp.duals[q + 1]) - std::max(0.0, lp.duals[q])) / total;
          if (w == 0.0) continue;
          for (std::size_t x = 0; x < n; ++x) psi[i][x] += w * phi[r][x];
        }
      }
      double lower = 0.0;
      for (std::size_t i = 0; i < colours; ++i) lower += inner_product(cs[i], WeightFunction::dense(ground, psi[i]));
      double pos = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        double best = 0.0;
        for (std::size_t i = 0; i < colours; ++i) best = std::max(best, psi[i][x]);
        pos += best;
      }
      out.dual_bound = std::max(0.0, lower - pos * inv_n);
    }
  }
  return out;
}

std::pair<double, std::size_t> discrepancy(const WeightFunction& c, const WeightFunction& g,
                                           const AntiUniformFamily& family) {
  const auto h = c.plus(g, -1.0);
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t r = 0; r < family.members.size(); ++r) {
    const double v = std::abs(inner_product(h, family.members[r].phi));
    if (v > best) {
      best = v;
      arg = r;
    }
  }
  return {best, arg};
}

std::string final_status(LpStatus s, double achieved, double dual, double tol) {
  if (s == LpStatus::iteration_limit) return "iteration_limit";
  if (s != LpStatus::optimal) return to_string(s);
  return achieved - dual <= tol ? "optimal" : "tolerance_missed";
}

}  // namespace

DenseModelResult solve_dense_model(const WeightFunction& f, const AntiUniformFamily& family,
                                   const DenseModelParams& params) {
  if (family.members.empty()) throw std::invalid_argument("anti-uniform family is empty");
  if (f.min_value() < 0.0) throw std::invalid_argument("dense model needs f >= 0");
  if (params.epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
  DenseModelResult out;
  out.scaling = 1.0 / (1.0 + params.epsilon);
  const auto c = f.scaled(out.scaling);
  if (c.max_value() <= 1.0) {
    out.g = c;
    out.status = "trivial";
  } else {
    auto sol = solve_coupled({c}, family, params.max_pivots);
    out.g = std::move(sol.gs.front());
    out.dual_bound = sol.dual_bound;
    out.iterations = sol.pivots;
    std::tie(out.achieved_norm, out.argmax_member) = discrepancy(c, out.g, family);
    out.status = final_status(sol.status, out.achieved_norm, out.dual_bound, params.tolerance);
    return out;
  }
  std::tie(out.achieved_norm, out.argmax_member) = discrepancy(c, out.g, family);
  return out;
}

ColouringModelResult solve_colouring_model(std::span<const WeightFunction> fs, const AntiUniformFamily& family,
                                           const DenseModelParams& params) {
  if (fs.empty()) throw std::invalid_argument("colouring model needs at least one function");
  if (family.members.empty()) throw std::invalid_argument("anti-uniform family is empty");
  ColouringModelResult out;
  out.scaling = 1.0 / (1.0 + params.epsilon);
  std::vector<WeightFunction> cs;
  for (const auto& f : fs) {
    if (f.min_value() < 0.0) throw std::invalid_argument("colouring model needs f_i >= 0");
    if (!(f.ground() == fs.front().ground())) throw std::invalid_argument("colouring functions on different grounds");
    cs.push_back(f.scaled(out.scaling));
  }
  auto sol = solve_coupled(cs, family, params.max_pivots);
  out.gs = std::move(sol.gs);
  out.dual_bound = sol.dual_bound;
  out.iterations = sol.pivots;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    out.achieved_norm = std::max(out.achieved_norm, discrepancy(cs[i], out.gs[i], family).first);
  }
  out.status = final_status(sol.status, out.achieved_norm, out.dual_bound, params.tolerance);
  return out;
}

// --- polynomial approximation ----------------------------------------------

double PolynomialApprox::operator()(double x) const {
  long double acc = 0.0L;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return static_cast<double>(acc);
}

nlohmann::json PolynomialApprox::to_json() const {
  return {{"degree", degree},
          {"coefficients", coefficients},
          {"chebyshev", chebyshev},
          {"grid_error", grid_error},
          {"lipschitz_slack", lipschitz_slack},
          {"certified_error", certified_error},
          {"M", m_bound}};
}

double grid_error(const PolynomialApprox& p, std::size_t points) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    worst = std::max(worst, std::abs(p(x) - std::max(x, 0.0)));
  }
  return worst;
}

namespace {

// Chebyshev interpolant of max(2y, 0) on [-1, 1] at d+1 first-kind nodes.
std::vector<double> chebyshev_interpolant(int d) {
  const int nodes = d + 1;
  std::vector<double> c(d + 1, 0.0);
  for (int q = 0; q < nodes; ++q) {
    const double theta = std::numbers::pi * (q + 0.5) / nodes;
    const double v = std::max(2.0 * std::cos(theta), 0.0);
    for (int i = 0; i <= d; ++i) c[i] += v * std::cos(i * theta);
  }
  for (int i = 0; i <= d; ++i) c[i] *= 2.0 / nodes;
  c[0] /= 2.0;
  return c;
}

// Σ c_i T_i(y) as monomials in y.
std::vector<double> to_monomial(const std::vector<double>& c) {
  const int d = static_cast<int>(c.size()) - 1;
  std::vector<double> out(d + 1, 0.0);
  std::vector<double> prev(d + 1, 0.0), cur(d + 1, 0.0);
  prev[0] = 1.0;  // T_0
  out[0] += c[0];
  if (d >= 1) {
    cur[1] = 1.0;  // T_1
    out[1] += c[1];
  }
  for (int i = 2; i <= d; ++i) {
    std::vector<double> next(d + 1, 0.0);
    for (int j = 0; j < d; ++j) next[j + 1] += 2.0 * cur[j];
    for (int j = 0; j <= d; ++j) next[j] -= prev[j];
    for (int j = 0; j <= d; ++j) out[j] += c[i] * next[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

}  // namespace

PolynomialApprox approx_positive_part(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("approximation needs 0 < epsilon < 1");
  constexpr std::size_t kGrid = 10000;
  const double h = 4.0 / static_cast<double>(kGrid - 1);
  for (int d = 2; d <= 120; d += 2) {
    PolynomialApprox p;
    p.degree = d;
    p.chebyshev = chebyshev_interpolant(d);
    const auto mono_y = to_monomial(p.chebyshev);
    p.coefficients.resize(d + 1);
    for (int j = 0; j <= d; ++j) p.coefficients[j] = mono_y[j] / std::pow(2.0, j);
    // |P'(x)| <= Σ |c_i| i² / 2 on [-2, 2]; the target is 1-Lipschitz
    double lip = 0.0;
    for (int i = 1; i <= d; ++i) lip += std::abs(p.chebyshev[i]) * i * i / 2.0;
    p.grid_error = grid_error(p, kGrid);
    p.lipschitz_slack = (lip + 1.0) * h / 2.0;
    p.certified_error = p.grid_error + p.lipschitz_slack;
    p.m_bound = 0.0;
    for (int j = 1; j <= d; ++j) p.m_bound += std::abs(p.coefficients[j]);
    if (p.certified_error <= epsilon) return p;
  }
  throw std::invalid_argument("epsilon too small for the degree cap of the positive-part approximation");
}

// --- counting lemma and rounding ---------------------------------------------

nlohmann::json CountingLemmaReport::to_json() const {
  return {{"split", split}, {"count", count},   {"gap", gap},       {"stderr", stderr_},
          {"eta", eta},     {"bound", bound},   {"pass", pass},     {"mean_f", mean_f},
          {"mean_g", mean_g}, {"mean_ok", mean_ok}};
}

CountingLemmaReport verify_counting_lemma(const SequenceSystem& sys, std::span<const WeightFunction> fs,
                                          const WeightFunction& g, double eta, const ConvMode& mode) {
  if (fs.empty()) throw std::invalid_argument("counting lemma needs at least one function");
  if (eta < 0.0) throw std::invalid_argument("eta must be non-negative");
  CountingLemmaReport r;
  const auto split = split_capped_count(sys, fs, mode);
  const auto count = count_functional(sys, g, mode);
  r.split = split.value;
  r.count = count.value;
  r.gap = std::abs(r.split - r.count);
  r.stderr_ = std::hypot(split.stderr_, count.stderr_);
  r.eta = eta;
  r.bound = 4.0 * eta;
  r.pass = r.gap <= r.bound + 3.0 * r.stderr_ + 1e-12 * std::max(1.0, r.count);
  for (const auto& f : fs) r.mean_f += expectation(f);
  r.mean_f /= static_cast<double>(fs.size());
  r.mean_g = expectation(g);
  r.mean_ok = r.mean_g >= r.mean_f - eta / sys.k() - 1e-12;
  return r;
}

WeightFunction round_to_indicator(const WeightFunction& g, std::uint64_t seed) {
  if (g.min_value() < 0.0 || g.max_value() > 1.0) throw std::invalid_argument("rounding needs 0 <= g <= 1");
  std::vector<std::pair<Index, double>> ones;
  for (Index x : g.support()) {
    if (counter_uniform(seed, x) < g.at(x)) ones.emplace_back(x, 1.0);
  }
  return WeightFunction::sparse(g.ground(), std::move(ones));
}

}  // namespace sparselab
