#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/numerics/tridiagonal.hpp"

namespace weylspec::numerics {

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Sparse symmetric operator stored from its upper triangle (row <= col).
class SparseSymOperator {
 public:
  SparseSymOperator(std::size_t dimension, std::vector<MatrixEntry> upper);

  static SparseSymOperator from_tridiagonal(const TridiagSystem& system);
  static SparseSymOperator diagonal(std::span<const double> values);

  std::size_t dimension() const { return dimension_; }
  std::size_t nonzeros() const { return values_.size(); }

  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Upper-triangle entries as supplied (duplicates summed).
  const std::vector<MatrixEntry>& upper_entries() const { return upper_; }

  /// Bound on the spectral radius (max absolute row sum).
  double gershgorin_bound() const;

 private:
  std::size_t dimension_;
  std::vector<MatrixEntry> upper_;
  // Full symmetric CSR used by apply().
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

struct EigenPair {
  double value;
  std::vector<double> vector;  ///< unit 2-norm
  double residual;             ///< ||A v - value v||
};

struct LanczosOptions {
  std::size_t basis_size = 0;   ///< 0 selects max(3 count + 20, 50), capped by the dimension
  std::size_t max_restarts = 2000;
  std::uint64_t seed = 20240611;  ///< start-vector seed (std::mt19937_64)
};

/// Raised when restarts are exhausted; carries the residuals reached.
class LanczosError : public std::runtime_error {
 public:
  LanczosError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Smallest `count` eigenpairs of a symmetric linear map of the given
/// dimension, each with ||A v - lambda v|| <= tol (v unit). Thick-restart
/// Lanczos with full (twice-iterated Gram–Schmidt) reorthogonalization.
std::vector<EigenPair> lanczos_smallest(std::size_t dimension, const LinearMap& apply, std::size_t count,
                                        double tol, const LanczosOptions& options = {});

std::vector<EigenPair> lanczos_smallest(const SparseSymOperator& op, std::size_t count, double tol,
                                        const LanczosOptions& options = {});

}  // namespace weylspec::numerics
