#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparselab/core.hpp"
#include "sparselab/systems.hpp"

namespace sparselab {

/// Truncation level of the capped convolution.
inline constexpr double kCap = 2.0;

struct ConvMode {
  bool exact = true;
  /// Monte Carlo draws (per point for convolutions, in total for counts).
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  /// Exact mode refuses computations that would visit more tuples than this.
  std::uint64_t guard = std::uint64_t{1} << 32;
  /// Worker threads for pointwise Monte Carlo; results do not depend on it.
  unsigned threads = 1;

  static ConvMode exact_mode() { return {}; }
  static ConvMode monte_carlo(std::uint64_t samples, std::uint64_t seed) {
    ConvMode m;
    m.exact = false;
    m.samples = samples;
    m.seed = seed;
    return m;
  }
};

struct ConvolutionResult {
  WeightFunction values;
  bool exact = true;
  std::uint64_t samples = 0;
  /// Per-point standard errors in Monte Carlo mode, empty when exact.
  std::vector<double> stderrs;
  double max_stderr = 0.0;
};

/// A scalar that may be exact or a Monte Carlo estimate.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  bool exact = true;
  std::uint64_t samples = 0;
};

/// *_j(h) with j 0-based and `funcs` the k-1 functions for positions != j,
/// in position order.
ConvolutionResult convolve(const SequenceSystem& sys, int j, std::span<const WeightFunction> funcs,
                           const ConvMode& mode = {});

/// min(*_j, 2). Inputs must be non-negative.
ConvolutionResult capped_convolve(const SequenceSystem& sys, int j, std::span<const WeightFunction> funcs,
                                  const ConvMode& mode = {});

/// E_{s in S} h_1(s_1) ... h_k(s_k) for k functions.
Estimate multilinear_count(const SequenceSystem& sys, std::span<const WeightFunction> funcs,
                           const ConvMode& mode = {});

/// E_{s in S} f(s_1) ... f(s_k).
Estimate count_functional(const SequenceSystem& sys, const WeightFunction& f, const ConvMode& mode = {});

/// E_{i_1..i_k in [m]} <f_{i_1}, o_1(f_{i_2}, ..., f_{i_k})>. Exact mode runs
/// over all m^{k-1} index tuples; Monte Carlo mode samples `samples` index
/// tuples and evaluates each inner product exactly.
Estimate split_capped_count(const SequenceSystem& sys, std::span<const WeightFunction> fs,
                            const ConvMode& mode = {});

struct GapBound {
  double lhs = 0.0;
  double rhs = 0.0;
  /// Sum of the signed terms; equals E prod f - E prod g.
  double telescoped = 0.0;
  std::vector<double> terms;
};

/// |E prod f - E prod g| against sum_j |<f - g, *_j(g,..,g,f,..,f)>|.
GapBound counting_gap_bound(const SequenceSystem& sys, const WeightFunction& f, const WeightFunction& g,
                            const ConvMode& mode = {});

struct PrecountingReport {
  double split = 0.0;
  double dense = 0.0;
  /// sum_j <f - g, E_{i_{j+1}..i_k} o_j(g,..,g,f_{i_{j+1}},..,f_{i_k})>
  double correction = 0.0;
  /// |split - dense - correction|
  double discrepancy = 0.0;
};

/// Exact evaluation of the quantities compared by the capping-error lemma,
/// with f the mean of `fs`.
PrecountingReport precounting_discrepancy(const SequenceSystem& sys, std::span<const WeightFunction> fs,
                                          const WeightFunction& g, const ConvMode& mode = {});

struct KernelValue {
  double value = 0.0;
  bool empty = false;
  std::uint64_t size = 0;
};

/// W(x, y) = E_{s in S_1(x) ∩ S_k(y)} mu_2(s_2) ... mu_{k-1}(s_{k-1}).
KernelValue w_kernel(const SequenceSystem& sys, std::span<const WeightFunction> mid_funcs, Index x, Index y);

}  // namespace sparselab
