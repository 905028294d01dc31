#include "weylspec/numerics/lanczos.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace weylspec::numerics {

SparseSymOperator::SparseSymOperator(std::size_t dimension, std::vector<MatrixEntry> upper)
    : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("SparseSymOperator: dimension must be positive");
  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  for (const auto& e : upper) {
    if (e.row > e.col) throw std::invalid_argument("SparseSymOperator: entries must satisfy row <= col");
    if (e.col >= dimension) throw std::invalid_argument("SparseSymOperator: entry outside the matrix");
    merged[{e.row, e.col}] += e.value;
  }
  upper_.reserve(merged.size());
  std::vector<std::size_t> counts(dimension, 0);
  for (const auto& [rc, v] : merged) {
    upper_.push_back({rc.first, rc.second, v});
    ++counts[rc.first];
    if (rc.first != rc.second) ++counts[rc.second];
  }
  row_start_.assign(dimension + 1, 0);
  for (std::size_t i = 0; i < dimension; ++i) row_start_[i + 1] = row_start_[i] + counts[i];
  columns_.resize(row_start_.back());
  values_.resize(row_start_.back());
  std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (const auto& e : upper_) {
    columns_[fill[e.row]] = e.col;
    values_[fill[e.row]++] = e.value;
    if (e.row != e.col) {
      columns_[fill[e.col]] = e.row;
      values_[fill[e.col]++] = e.value;
    }
  }
}

SparseSymOperator SparseSymOperator::from_tridiagonal(const TridiagSystem& system) {
  system.validate();
  std::vector<MatrixEntry> entries;
  const std::size_t n = system.dimension();
  entries.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({i, i, system.diagonal[i]});
    if (i + 1 < n) entries.push_back({i, i + 1, system.off_diagonal[i]});
  }
  return SparseSymOperator(n, std::move(entries));
}

SparseSymOperator SparseSymOperator::diagonal(std::span<const double> values) {
  std::vector<MatrixEntry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) entries.push_back({i, i, values[i]});
  return SparseSymOperator(values.size(), std::move(entries));
}

void SparseSymOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dimension_ || y.size() != dimension_) {
    throw std::invalid_argument("SparseSymOperator::apply: vector length mismatch");
  }
  for (std::size_t i = 0; i < dimension_; ++i) {
    double acc = 0;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += values_[k] * x[columns_[k]];
    y[i] = acc;
  }
}

double SparseSymOperator::gershgorin_bound() const {
  double bound = 0;
  for (std::size_t i = 0; i < dimension_; ++i) {
    double row = 0;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) row += std::abs(values_[k]);
    bound = std::max(bound, row);
  }
  return bound;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Orthogonalizes w against basis[0..upto) twice; returns the accumulated coefficients.
std::vector<double> orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis,
                                  std::size_t upto) {
  std::vector<double> coeffs(upto, 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < upto; ++i) {
      const double c = dot(basis[i], w);
      coeffs[i] += c;
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= c * basis[i][k];
    }
  }
  return coeffs;
}

std::vector<double> random_unit(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  const double nv = norm(v);
  for (auto& x : v) x /= nv;
  return v;
}

}  // namespace

std::vector<EigenPair> lanczos_smallest(std::size_t n, const LinearMap& apply, std::size_t count, double tol,
                                        const LanczosOptions& options) {
  if (count < 1) throw std::invalid_argument("lanczos_smallest: count must be >= 1");
  if (!(tol > 0)) throw std::invalid_argument("lanczos_smallest: tol must be positive");
  if (count > n) {
    throw std::invalid_argument("lanczos_smallest: count " + std::to_string(count) + " exceeds dimension " +
                                std::to_string(n));
  }
  std::size_t m = options.basis_size > 0 ? options.basis_size : std::max<std::size_t>(3 * count + 20, 50);
  m = std::min(m, n);
  if (m <= count && m < n) m = std::min(n, count + 1);

  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n, 0.0));
  basis[0] = random_unit(n, rng);
  Eigen::MatrixXd projected = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::size_t kept = 0;
  std::vector<double> w(n);
  std::vector<double> last_residuals(count, std::numeric_limits<double>::infinity());

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    double beta = 0;
    for (std::size_t j = kept; j < m; ++j) {
      apply(basis[j], w);
      const std::vector<double> coeffs = orthogonalize(w, basis, j + 1);
      for (std::size_t i = 0; i <= j; ++i) {
        projected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coeffs[i];
        projected(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = coeffs[i];
      }
      beta = norm(w);
      const double scale = std::max(1.0, std::abs(coeffs[j]));
      if (j + 1 == n) {
        beta = 0;
        break;
      }
      if (beta <= 1e-13 * scale) {
        // Invariant subspace found: continue from a fresh orthogonal direction.
        std::vector<double> fresh = random_unit(n, rng);
        orthogonalize(fresh, basis, j + 1);
        const double nf = norm(fresh);
        for (std::size_t k = 0; k < n; ++k) basis[j + 1][k] = fresh[k] / nf;
        if (j + 1 < m) {
          projected(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = 0;
          projected(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) = 0;
        }
        beta = 0;
        continue;
      }
      for (std::size_t k = 0; k < n; ++k) basis[j + 1][k] = w[k] / beta;
      if (j + 1 < m) {
        projected(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = beta;
        projected(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) = beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
    const Eigen::VectorXd& theta = ritz.eigenvalues();
    const Eigen::MatrixXd& y = ritz.eigenvectors();
    const auto last = static_cast<Eigen::Index>(m - 1);

    bool estimated_ok = true;
    for (std::size_t i = 0; i < count; ++i) {
      if (std::abs(beta * y(last, static_cast<Eigen::Index>(i))) > 0.5 * tol) estimated_ok = false;
    }

    auto ritz_vector = [&](std::size_t i) {
      std::vector<double> x(n, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double c = y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        for (std::size_t k = 0; k < n; ++k) x[k] += c * basis[j][k];
      }
      const double nx = norm(x);
      for (auto& v : x) v /= nx;
      return x;
    };

    if (estimated_ok || beta == 0) {
      std::vector<EigenPair> pairs;
      bool all_ok = true;
      for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x = ritz_vector(i);
        apply(x, w);
        const double rayleigh = dot(x, w);
        for (std::size_t k = 0; k < n; ++k) w[k] -= rayleigh * x[k];
        const double res = norm(w);
        last_residuals[i] = res;
        if (res > tol) all_ok = false;
        pairs.push_back({rayleigh, std::move(x), res});
      }
      if (all_ok) {
        std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
        return pairs;
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        last_residuals[i] = std::abs(beta * y(last, static_cast<Eigen::Index>(i)));
      }
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    kept = std::min(m - 1, count + (m - count) / 2);
    if (kept == 0) kept = 1;
    std::vector<std::vector<double>> next(kept + 1);
    for (std::size_t i = 0; i < kept; ++i) {
      std::vector<double> x(n, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double c = y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        for (std::size_t k = 0; k < n; ++k) x[k] += c * basis[j][k];
      }
      next[i] = std::move(x);
    }
    next[kept] = basis[m];
    if (beta == 0) {
      next[kept] = random_unit(n, rng);
      for (std::size_t i = 0; i < kept; ++i) {
        const double c = dot(next[i], next[kept]);
        for (std::size_t k = 0; k < n; ++k) next[kept][k] -= c * next[i][k];
      }
      const double nk = norm(next[kept]);
      for (auto& v : next[kept]) v /= nk;
    }
    projected.setZero();
    for (std::size_t i = 0; i < kept; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      projected(ii, ii) = theta(ii);
      const double coupling = beta * y(last, ii);
      projected(static_cast<Eigen::Index>(kept), ii) = coupling;
      projected(ii, static_cast<Eigen::Index>(kept)) = coupling;
    }
    for (std::size_t i = 0; i <= kept; ++i) basis[i] = std::move(next[i]);
  }
  throw LanczosError("lanczos_smallest: no convergence within the restart limit", last_residuals);
}

std::vector<EigenPair> lanczos_smallest(const SparseSymOperator& op, std::size_t count, double tol,
                                        const LanczosOptions& options) {
  const LinearMap apply = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  return lanczos_smallest(op.dimension(), apply, count, tol, options);
}

}  // namespace weylspec::numerics
