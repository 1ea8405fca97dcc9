#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sparselab/core.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

// Number theory helpers.
bool is_prime(std::uint64_t n);
std::int64_t mod(std::int64_t a, std::int64_t n);
std::int64_t gcd64(std::int64_t a, std::int64_t b);
/// Inverse of a modulo n; throws when gcd(a, n) != 1.
std::int64_t mod_inverse(std::int64_t a, std::int64_t n);

/// A fixed labelled k-uniform pattern hypergraph on vertices 0..v-1.
struct PatternHypergraph {
  int k = 2;
  int vertices = 0;
  std::vector<std::vector<int>> edges;

  /// Validates and normalizes (sorts each edge); throws on malformed input.
  static PatternHypergraph make(int k, int vertices, std::vector<std::vector<int>> edges);
  static PatternHypergraph complete_graph(int t);
  static PatternHypergraph cycle(int length);
  static PatternHypergraph fano_plane();
  /// Accepts "K3", "K4", "C4", "fano" or {"k", "v", "edges"}.
  static PatternHypergraph from_json(const nlohmann::json& j);

  int edge_count() const { return static_cast<int>(edges.size()); }
  nlohmann::json to_json() const;
};

struct ApParams {
  std::int64_t n = 0;
  int length = 3;
  /// false: progressions inside the interval {0..n-1} without wraparound.
  bool wrap = true;
};

struct HomothetyParams {
  std::int64_t n = 0;
  int r = 2;
  std::vector<std::vector<std::int64_t>> points;
};

/// Progressions a, a + d^r, ..., a + (k-1) d^r with 1 <= d and k d^r <= n.
struct PolyApParams {
  std::int64_t n = 0;
  int length = 3;
  int power = 2;
};

/// Triples (x, y, x + y) over Z_n \ {0}.
struct SchurParams {
  std::int64_t n = 0;
};

/// Edge-labelled copies of a pattern in the complete k-uniform hypergraph.
struct CopiesParams {
  std::int64_t n = 0;
  PatternHypergraph pattern;
};

struct SystemDescriptor {
  std::variant<ApParams, HomothetyParams, PolyApParams, SchurParams, CopiesParams> params;
  bool allow_degenerate = false;
  bool require_prime = false;

  static SystemDescriptor ap(std::int64_t n, int length, bool allow_degenerate = false);
  static SystemDescriptor ap_interval(std::int64_t n, int length);
  static SystemDescriptor homothety(std::int64_t n, int r, std::vector<std::vector<std::int64_t>> points);
  static SystemDescriptor polyap(std::int64_t n, int length, int power);
  static SystemDescriptor schur(std::int64_t n, bool allow_degenerate = false);
  static SystemDescriptor copies(std::int64_t n, PatternHypergraph pattern);

  std::string kind_name() const;
  nlohmann::json to_json() const;
  static SystemDescriptor from_json(const nlohmann::json& j);
};

/// Fixes tuple position `position` (0-based) to the element with index `element`.
struct Pin {
  int position;
  Index element;
};

/// A family S of ordered k-tuples over a ground set X.
///
/// Tuples are never materialized; they are enumerated on demand with up to
/// two pinned positions, which covers full enumeration, fibers S_j(x) and
/// pair intersections S_i(x) ∩ S_j(y). Copy systems are indexed by
/// injections of the pattern, so a pattern with automorphisms that fix every
/// edge yields repeated tuples.
class SequenceSystem {
 public:
  using Visitor = std::function<void(std::span<const Index>)>;

  static SequenceSystem build(const SystemDescriptor& descriptor);

  const SystemDescriptor& descriptor() const { return descriptor_; }
  const GroundSet& ground() const { return ground_; }
  int k() const { return k_; }
  std::string kind_name() const { return descriptor_.kind_name(); }

  std::uint64_t total_size() const { return total_size_; }
  /// |S_j(x)| computed from the construction (closed form where one exists).
  std::uint64_t fiber_size(int j, Index x) const;
  /// Closed-form common fiber size for systems homogeneous by construction.
  std::optional<std::uint64_t> uniform_fiber_size() const { return uniform_fiber_; }

  /// Exponent γ with fiber size ≍ |X|^γ for two-degree-of-freedom kinds.
  std::optional<double> fiber_exponent() const;
  /// Critical exponent α_S: γ/(k-1), or 1/m_k for copy systems.
  double critical_exponent() const;

  /// Calls `visit` once for every tuple s with s[pin.position] == pin.element
  /// for all pins. At most two pins; positions must differ.
  void for_each(std::span<const Pin> pins, const Visitor& visit) const;
  std::uint64_t count(std::span<const Pin> pins) const;

  /// Uniform draw from S_j(x) written into `out` (resized to k).
  void sample_fiber(int j, Index x, Rng& rng, std::vector<Index>& out) const;
  /// Uniform draw from S.
  void sample_tuple(Rng& rng, std::vector<Index>& out) const;

  /// Admissible common differences for ap, homothety and polyap systems.
  const std::vector<std::int64_t>& differences() const { return diffs_; }

 private:
  SequenceSystem() = default;

  void visit_ap(std::span<const Pin> pins, const Visitor& visit) const;
  void visit_interval(std::span<const Pin> pins, const Visitor& visit) const;
  void visit_homothety(std::span<const Pin> pins, const Visitor& visit) const;
  void visit_polyap(std::span<const Pin> pins, const Visitor& visit) const;
  void visit_schur(std::span<const Pin> pins, const Visitor& visit) const;
  void visit_copies(std::span<const Pin> pins, const Visitor& visit) const;

  void sample_fiber_by_enumeration(int j, Index x, Rng& rng, std::vector<Index>& out) const;

  SystemDescriptor descriptor_;
  GroundSet ground_ = GroundSet::cyclic(1);
  int k_ = 0;
  std::uint64_t total_size_ = 0;
  std::optional<std::uint64_t> uniform_fiber_;

  // Allowed common differences (ap, homothety, polyap) and the per-d step.
  std::vector<std::int64_t> diffs_;
  std::vector<std::int64_t> steps_;
  std::vector<std::uint8_t> diff_allowed_;
  // For ap: gcd and inverse data for each positional offset 1..k-1.
  std::vector<std::int64_t> offset_gcd_;
  std::vector<std::int64_t> offset_inverse_;
  // Copy systems: pattern edges and a host vertex-set encoder.
  std::vector<std::vector<int>> pattern_edges_;
  int pattern_vertices_ = 0;
};

struct HomogeneityReport {
  bool homogeneous = true;
  bool exhaustive = false;
  std::size_t points_checked = 0;
  /// Measured |S_j(x)| at the first checked x, per position j (0-based).
  std::vector<std::uint64_t> fiber_sizes;
  struct Witness {
    int j;
    Index x;
    Index x_other;
    std::uint64_t size_x;
    std::uint64_t size_other;
  };
  std::optional<Witness> witness;
  nlohmann::json to_json() const;
};

/// Measures fiber sizes by enumeration; exhaustive when |X| <= sample_x.
HomogeneityReport verify_homogeneity(const SequenceSystem& sys, std::size_t sample_x,
                                     std::uint64_t seed = 1);

struct TwoDofReport {
  bool two_dof = true;
  bool exhaustive = false;
  std::uint64_t probes = 0;
  struct Witness {
    std::vector<Index> s;
    std::vector<Index> t;
    int i;
    int j;
  };
  std::optional<Witness> witness;
  nlohmann::json to_json() const;
};

struct TwoDofMode {
  bool exhaustive = true;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  std::uint64_t guard = kDefaultGuard;
};

/// Checks that any two coordinates determine the tuple. Exhaustive mode
/// probes every tuple and every position pair; sampled mode probes random
/// tuples and position pairs.
TwoDofReport verify_two_dof(const SequenceSystem& sys, const TwoDofMode& mode);

struct PairProfile {
  /// Common |S_1(x) ∩ S_k(y)| over non-empty intersections, if uniform.
  std::optional<std::uint64_t> sigma;
  /// Common number of y with a non-empty intersection, if uniform.
  std::optional<std::uint64_t> t;
  bool uniform = true;
  std::vector<std::uint64_t> sigma_values;
  std::vector<std::uint64_t> t_values;
  std::size_t points_checked = 0;
  nlohmann::json to_json() const;
};

/// Exhaustive over x when |X| <= sample, otherwise `sample` seeded x.
PairProfile pair_profile(const SequenceSystem& sys, std::size_t sample, std::uint64_t seed = 1);

struct FiberMode {
  bool exact = true;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t guard = 10'000'000;
};

/// Streams S_j(x): every tuple once in exact mode, or `samples` uniform
/// draws in sampled mode. Throws GuardExceeded in exact mode when the fiber
/// is larger than the guard.
void enumerate_fiber(const SequenceSystem& sys, int j, Index x, const FiberMode& mode,
                     const SequenceSystem::Visitor& visit);

/// Sample of distinct indices from X: all of X when |X| <= count.
std::vector<Index> sample_points(const GroundSet& ground, std::size_t count, std::uint64_t seed);

}  // namespace sparselab
