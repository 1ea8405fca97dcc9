#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/systems.hpp"

namespace sparselab {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
  /// Exact comparison by cross multiplication.
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  std::string str() const;
  nlohmann::json to_json() const;
};

struct PatternStats {
  int k = 0;
  int vertices = 0;
  int edges = 0;
  Rational m_k;
  bool strictly_balanced = true;
  /// Edge indices of a proper subgraph L with m_k(L) >= m_k(K), when not balanced.
  std::vector<int> witness_edges;
  Rational witness_density;
  Rational critical_exponent;

  nlohmann::json to_json() const;
};

/// m_k = (e_K − 1)/(v_K − k), strict balance over edge-induced subgraphs with
/// v_L >= k + 1, and the copy-system exponent 1/m_k. Throws when v_K <= k.
PatternStats pattern_stats(const PatternHypergraph& pattern);

/// Elements indexed 0..elements-1; each configuration lists its elements.
struct ConfigurationSet {
  std::size_t elements = 0;
  std::vector<std::vector<std::uint32_t>> configs;
};

/// Labeled copies of `pattern` in `host`: one configuration (host edge ids in
/// pattern edge order) per edge-preserving injection.
ConfigurationSet copies_in(const PatternHypergraph& host, const PatternHypergraph& pattern,
                           std::uint64_t guard = std::uint64_t{1} << 24);

/// Tuples of `sys` with every entry in U, as positions within U.members().
ConfigurationSet configurations_in(const SequenceSystem& sys, const ElementSet& u,
                                   std::uint64_t guard = std::uint64_t{1} << 26);

struct VarnavidesResult {
  std::uint64_t count = 0;
  std::vector<Index> witness;
  std::size_t subset_size = 0;
  std::uint64_t examined = 0;
  nlohmann::json to_json() const;
};

/// Minimum number of tuples inside B over |B| >= ⌈ρ|X|⌉, by exhaustive search
/// over subsets of size ⌈ρ|X|⌉ (the count is monotone in B).
VarnavidesResult varnavides_count(const SequenceSystem& sys, double rho,
                                  std::uint64_t budget = std::uint64_t{1} << 24);

struct CopyCount {
  std::uint64_t labeled = 0;
  std::uint64_t automorphisms = 1;
  std::uint64_t unordered() const { return labeled / automorphisms; }
  nlohmann::json to_json() const;
};

CopyCount supersaturation_count(const PatternHypergraph& host, const PatternHypergraph& pattern);

enum class SearchMode { exhaustive, heuristic };

struct ColouringResult {
  /// Monochromatic configurations (labeled copies for graph hosts).
  std::uint64_t count = 0;
  std::uint64_t automorphisms = 1;
  std::vector<int> colouring;
  bool exact = false;
  std::uint64_t evaluations = 0;
  std::uint64_t unordered() const { return count / automorphisms; }
  nlohmann::json to_json() const;
};

/// Minimum number of monochromatic configurations over r-colourings of the
/// elements. Exhaustive needs r^elements <= budget.
ColouringResult min_monochromatic(const ConfigurationSet& configs, int r, SearchMode mode,
                                  std::uint64_t budget = std::uint64_t{1} << 24, std::uint64_t seed = 1);

/// Edges of `host` coloured, copies of `pattern` counted.
ColouringResult ramsey_multiplicity(const PatternHypergraph& host, const PatternHypergraph& pattern, int r,
                                    SearchMode mode, std::uint64_t budget = std::uint64_t{1} << 24,
                                    std::uint64_t seed = 1);

/// Elements of X coloured, tuples of `sys` counted (Schur triples and the like).
ColouringResult ramsey_multiplicity(const SequenceSystem& sys, int r, SearchMode mode,
                                    std::uint64_t budget = std::uint64_t{1} << 24, std::uint64_t seed = 1);

struct ExtremalResult {
  std::uint64_t value = 0;
  /// Kept edges (vertex lists) of an extremal K-free subgraph.
  std::vector<std::vector<int>> witness;
  std::uint64_t nodes = 0;
  nlohmann::json to_json() const;
};

/// ex(n, K) inside the complete k-uniform hypergraph on n vertices, by branch
/// and bound on a minimum set of edges meeting every copy. Needs C(n,k) <= 64.
ExtremalResult extremal_number(int n, const PatternHypergraph& pattern,
                               std::uint64_t budget = std::uint64_t{1} << 24);

struct FreeSubsetResult {
  std::vector<Index> subset;
  std::size_t u_size = 0;
  double density = 1.0;
  std::uint64_t configurations = 0;
  std::uint64_t evaluations = 0;
  nlohmann::json to_json() const;
};

/// Large A ⊆ U with no tuple of `sys` inside: greedy removal of the element in
/// most remaining configurations, re-adding pass, randomized restarts. The
/// result is re-counted before return.
FreeSubsetResult adversary_free_subset(const SequenceSystem& sys, const ElementSet& u,
                                       std::uint64_t budget = 100000, std::uint64_t seed = 1);

struct AdversaryColouring {
  /// Colour of each member of U, in order.
  std::vector<int> colouring;
  std::vector<Index> elements;
  std::uint64_t monochromatic = 0;
  std::uint64_t evaluations = 0;
  nlohmann::json to_json() const;
};

AdversaryColouring adversary_colouring(const SequenceSystem& sys, const ElementSet& u, int r,
                                       std::uint64_t budget = 100000, std::uint64_t seed = 1);

/// Host edge version; elements are host edge ids.
AdversaryColouring adversary_colouring(const PatternHypergraph& host, const PatternHypergraph& pattern, int r,
                                       std::uint64_t budget = 100000, std::uint64_t seed = 1);

/// Number of configurations all of whose elements share a colour.
std::uint64_t count_monochromatic(const ConfigurationSet& configs, const std::vector<int>& colouring);

}  // namespace sparselab
