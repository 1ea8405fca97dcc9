#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/conv.hpp"
#include "sparselab/sample.hpp"
#include "sparselab/systems.hpp"

namespace sparselab {

struct PropertyReport {
  /// "property0".."property3", "condition1", "condition2"
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  nlohmann::json witness = nlohmann::json::object();
  /// Zero for exact evaluations.
  double stderr_ = 0.0;
  bool exact = true;
  std::string note;

  nlohmann::json to_json() const;
};

struct PropertyParams {
  double eta = 0.1;
  double lambda = 0.1;
  int d = 3;
  /// Allowed |‖μ_i‖₁ − 1| for property 0.
  double tolerance = 0.05;
  /// Property 2 bound; 2 by default, 3/2 when checking against condition 1.
  double sup_bound = 2.0;
  /// Number of sampled products ξ for property 3 (the constant 1 included).
  std::uint64_t samples = 100;
  /// Maximum (j, index tuple) pairs for property 1; 0 checks all of them.
  std::uint64_t tuple_budget = 0;
  std::uint64_t seed = 1;
  ConvMode conv;
  bool check_property3 = true;
};

/// Properties 0-3 on an ensemble of m sets. Throws when m < k - 1.
std::vector<PropertyReport> check_properties(const SequenceSystem& sys, const RandomEnsemble& ensemble,
                                             const PropertyParams& params);

struct GoodnessResult {
  bool good = false;
  double discrepancy = 0.0;
};

/// (η, j)-goodness: ‖*_j(ν) − ◦_j(ν)‖₁ ≤ η for the k-1 measures ν.
GoodnessResult eta_j_good(const SequenceSystem& sys, int j, std::span<const WeightFunction> measures, double eta,
                          const ConvMode& mode = {});

struct ConditionParams {
  double alpha = 0.1;
  std::uint64_t seed = 1;
  /// Points x sampled for condition 2 (all of X when |X| is at most this).
  std::size_t sample_x = 64;
  ConvMode conv;
};

/// Conditions 1 and 2 over `trials` fresh draws of U_1..U_k at probability p.
/// Statistics are maxima over all trials; failure frequencies are reported
/// in params.
std::vector<PropertyReport> check_conditions(const SequenceSystem& sys, double p, std::size_t trials,
                                             const ConditionParams& params);

struct GMode {
  enum Kind { random_indicator, constant, supplied } kind = constant;
  double value = 1.0;  // density or constant
  std::vector<WeightFunction> functions;  // supplied: one per position < j

  static GMode indicator(double density) { return {random_indicator, density, {}}; }
  static GMode constant_value(double c) { return {constant, c, {}}; }
};

/// ◦_j(g_{i_1}, .., g_{i_{j-1}}, f_{i_{j+1}}, .., f_{i_k}) with j 0-based and
/// `indices` naming the ensemble member used at each position != j. Each f
/// is μ_i times a random 0/1 mask keeping elements with probability f_keep.
WeightFunction sample_anti_uniform(const SequenceSystem& sys, std::span<const WeightFunction> measures, int j,
                                   std::span<const std::size_t> indices, const GMode& g_mode, double f_keep,
                                   std::uint64_t seed, const ConvMode& mode = {});

// --- tail bounds -----------------------------------------------------------

/// exp(-t² / (2(ΣV + Mt/3)))
double bernstein_bound(double t, double m_bound, double variance_sum);
/// exp(-λ² p |X| / 3C²), requires C >= λ.
double correlation_bound(double lambda, double p, double size, double c_bound);
/// 2 exp(-δ² p |X| / 4)
double chernoff_bound(double delta, double p, double size);
/// exp(-λ² / 2c²t)
double azuma_bound(double lambda, double c, double t);
/// 7α exp(-1/(14α)) for 0 < α <= 1.
double capped_excess_bound(double alpha);
/// 2 exp(-p^l |S_j(x)| / 16)
double fiber_bound(double p, int l, double fiber_size);
/// 2 exp(-ε² |X| / 8k²)
double rounding_bound(double epsilon, double size, int k);

struct JrResult {
  double value = 0.0;
  /// min over L of (E Y_L)^{1/v_L}
  double min_term = 0.0;
  /// Edge indices of the minimizing subgraph L.
  std::vector<int> argmin_edges;
  int argmin_vertices = 0;
  /// E Y_K for the full pattern.
  double expectation = 0.0;
  nlohmann::json to_json() const;
};

/// E Y_K^e = p^{e_K-1} k! (n-k)(n-k-1)..(n-v_K+1)
double jr_rooted_expectation(const PatternHypergraph& pattern, std::int64_t n, double p);

/// 2 n^{v_K} exp(-c min_L (E Y_L^e)^{1/v_L}), L ranging over subgraphs that
/// contain the root edge and at least one further edge.
JrResult jr_rooted_bound(const PatternHypergraph& pattern, int root, std::int64_t n, double p, double c);

/// 2 n^{v_K} exp(-c min_L (γ E Y_L^{e1,e2})^{1/v_L}) for γ >= 2, L ranging over
/// subgraphs containing both roots and at least one further edge.
JrResult jr_two_edge_bound(const PatternHypergraph& pattern, int e1, int e2, std::int64_t n, double p,
                           double gamma, double c);

/// Dispatch by name for the CLI: bernstein, correlation, chernoff, azuma,
/// capped_excess, fiber, rounding, jr_rooted, jr_two_edge.
nlohmann::json tail_bound(const std::string& kind, const nlohmann::json& params);

}  // namespace sparselab
