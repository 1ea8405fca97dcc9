#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/conv.hpp"
#include "sparselab/sample.hpp"
#include "sparselab/systems.hpp"

namespace sparselab {

struct AntiUniformMember {
  WeightFunction phi;
  /// "constant", "anti_uniform" or "indicator"
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

struct AntiUniformFamily {
  std::vector<AntiUniformMember> members;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const { return members.size(); }
  nlohmann::json to_json() const;
};

struct FamilyParams {
  std::size_t size = 64;
  std::uint64_t seed = 1;
  std::vector<ElementSet> indicators;
  unsigned threads = 1;
};

/// The constant 1, then size-1 sampled basic anti-uniform functions over
/// random positions, index tuples and g/f choices, then χ_V for each V.
AntiUniformFamily build_family(const SequenceSystem& sys, const RandomEnsemble& ensemble, const FamilyParams& params);

double antiuniform_norm(const WeightFunction& h, const AntiUniformFamily& family);

struct DenseModelParams {
  double epsilon = 0.0;
  /// Allowed gap between achieved_norm and the dual lower bound.
  double tolerance = 1e-6;
  std::uint64_t max_pivots = 200000;
};

struct DenseModelResult {
  WeightFunction g;
  double achieved_norm = 0.0;
  /// Lower bound on the optimum from the LP duals.
  double dual_bound = 0.0;
  double scaling = 1.0;
  std::uint64_t iterations = 0;
  /// "trivial", "optimal", "iteration_limit" or "tolerance_missed"
  std::string status;
  std::size_t argmax_member = 0;

  nlohmann::json to_json() const;
};

/// min over 0 <= g <= 1 of max_φ |⟨f/(1+ε) − g, φ⟩|.
DenseModelResult solve_dense_model(const WeightFunction& f, const AntiUniformFamily& family,
                                   const DenseModelParams& params = {});

struct ColouringModelResult {
  std::vector<WeightFunction> gs;
  double achieved_norm = 0.0;
  double dual_bound = 0.0;
  double scaling = 1.0;
  std::uint64_t iterations = 0;
  std::string status;

  nlohmann::json to_json() const;
};

/// Coupled solve for f_1..f_r with g_i >= 0 and g_1 + .. + g_r <= 1.
ColouringModelResult solve_colouring_model(std::span<const WeightFunction> fs, const AntiUniformFamily& family,
                                           const DenseModelParams& params = {});

struct PolynomialApprox {
  /// Monomial coefficients a_0..a_d.
  std::vector<double> coefficients;
  /// Chebyshev coefficients in the variable x/2.
  std::vector<double> chebyshev;
  int degree = 0;
  double grid_error = 0.0;
  double lipschitz_slack = 0.0;
  double certified_error = 0.0;
  /// Σ_{j>=1} |a_j|
  double m_bound = 0.0;

  double operator()(double x) const;
  nlohmann::json to_json() const;
};

/// A polynomial within ε of max(x, 0) on [−2, 2], certified on a 10^4-point
/// grid plus a derivative bound between grid points.
PolynomialApprox approx_positive_part(double epsilon);

/// Max |P(x) − max(x, 0)| over `points` equally spaced points of [−2, 2].
double grid_error(const PolynomialApprox& p, std::size_t points = 10000);

struct CountingLemmaReport {
  double split = 0.0;
  double count = 0.0;
  double gap = 0.0;
  double stderr_ = 0.0;
  double eta = 0.0;
  double bound = 0.0;
  bool pass = false;
  double mean_f = 0.0;
  double mean_g = 0.0;
  /// E g >= E f − η/k
  bool mean_ok = false;

  nlohmann::json to_json() const;
};

/// Compares split_capped_count(fs) with count_functional(g) against 4η.
CountingLemmaReport verify_counting_lemma(const SequenceSystem& sys, std::span<const WeightFunction> fs,
                                          const WeightFunction& g, double eta, const ConvMode& mode = {});

/// h(x) = 1 with probability g(x), independently per element.
WeightFunction round_to_indicator(const WeightFunction& g, std::uint64_t seed);

}  // namespace sparselab
