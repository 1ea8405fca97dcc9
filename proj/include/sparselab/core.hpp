#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sparselab {

using Index = std::size_t;
using Element = std::vector<std::int64_t>;

/// Raised when an exhaustive computation would exceed its iteration guard.
class GuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultGuard = std::uint64_t{1} << 24;
inline constexpr std::size_t kDenseLimit = std::size_t{1} << 24;

enum class GroundKind { cyclic, punctured, grid, ksubsets };

/// A finite indexable set X.
///
/// - cyclic(n): Z_n, element {i}.
/// - punctured(n): Z_n \ {0}, index i holds element {i + 1}.
/// - grid(n, r): Z_n^r, row-major with the first coordinate most significant.
/// - ksubsets(n, k): k-subsets of {0..n-1} in colex order, element is the
///   sorted vertex list.
class GroundSet {
 public:
  static GroundSet cyclic(std::int64_t n);
  static GroundSet punctured(std::int64_t n);
  static GroundSet grid(std::int64_t n, int r);
  static GroundSet ksubsets(std::int64_t n, int k);

  GroundKind kind() const { return kind_; }
  std::int64_t n() const { return n_; }
  /// Grid dimension r or subset size k; 1 for the cyclic kinds.
  int arity() const { return arity_; }
  Index size() const { return size_; }

  Index index(const Element& e) const;
  Element element(Index i) const;

  bool operator==(const GroundSet&) const = default;

  nlohmann::json to_json() const;
  static GroundSet from_json(const nlohmann::json& j);
  std::string describe() const;

 private:
  GroundSet(GroundKind kind, std::int64_t n, int arity, Index size)
      : kind_(kind), n_(n), arity_(arity), size_(size) {}

  GroundKind kind_;
  std::int64_t n_;
  int arity_;
  Index size_;
};

std::uint64_t binomial(std::int64_t n, std::int64_t k);

/// Sorted set of element indices with an optional membership bitmap.
class ElementSet {
 public:
  ElementSet() = default;
  ElementSet(Index universe, std::vector<Index> members);

  static ElementSet full(Index universe);

  Index universe() const { return universe_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<Index>& members() const { return members_; }
  bool contains(Index i) const;

  bool operator==(const ElementSet& o) const {
    return universe_ == o.universe_ && members_ == o.members_;
  }

 private:
  Index universe_ = 0;
  std::vector<Index> members_;
  std::vector<std::uint8_t> bitmap_;
};

enum class Storage { dense, sparse };

/// A real-valued function on a ground set, stored densely or as a sorted
/// (index, value) list with implicit zeros.
class WeightFunction {
 public:
  WeightFunction() = default;

  static WeightFunction constant(const GroundSet& ground, double value);
  static WeightFunction dense(const GroundSet& ground, std::vector<double> values);
  static WeightFunction sparse(const GroundSet& ground,
                               std::vector<std::pair<Index, double>> entries);
  static WeightFunction indicator(const GroundSet& ground, const ElementSet& set);

  const GroundSet& ground() const { return ground_; }
  Storage storage() const { return storage_; }
  Index size() const { return ground_.size(); }

  double at(Index i) const;
  double operator[](Index i) const { return at(i); }

  /// Indices with non-zero value, ascending.
  std::vector<Index> support() const;
  std::size_t support_size() const;
  /// Returns the constant value when the function is constant on X.
  std::optional<double> constant_value() const;

  double min_value() const;
  double max_value() const;

  WeightFunction to_dense() const;
  WeightFunction to_sparse() const;
  /// Dense values; materializes for sparse storage.
  std::vector<double> values() const;
  /// Direct access; valid for dense storage only.
  std::span<const double> dense_values() const { return dense_; }
  std::span<const std::pair<Index, double>> sparse_entries() const { return sparse_; }

  WeightFunction scaled(double factor) const;
  WeightFunction plus(const WeightFunction& other, double factor = 1.0) const;
  WeightFunction times(const WeightFunction& other) const;

  nlohmann::json to_json() const;
  static WeightFunction from_json(const nlohmann::json& j);

 private:
  GroundSet ground_ = GroundSet::cyclic(1);
  Storage storage_ = Storage::dense;
  std::vector<double> dense_;
  std::vector<std::pair<Index, double>> sparse_;
};

enum class Norm { l1, l2, linf };
enum class MeasureMode { characteristic, associated };

double expectation(const WeightFunction& f);
double inner_product(const WeightFunction& f, const WeightFunction& g);
double lp_norm(const WeightFunction& f, Norm p);

/// Characteristic measure |X|/|U| on U, or associated measure p^{-1} on U.
WeightFunction make_measure(const GroundSet& ground, const ElementSet& set,
                            MeasureMode mode, double p = 1.0);

/// Relative comparison used throughout the test suites.
inline bool close_rel(double a, double b, double rel = 1e-9) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace sparselab
