#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/numerics/quadrature.hpp"
#include "weylspec/numerics/sampled_function.hpp"
#include "weylspec/warp/model.hpp"

namespace weylspec::weyl {

using numerics::QuadratureSpec;
using numerics::WideReal;
using warp::ManifoldModel;
using warp::WarpJet;

/// A requested lambda below the bottom (n-1)^2 c^2 / 4, or an alpha too large for lambda.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension n, a and c2 come from the model the function is built on.
struct WeylParams {
  double lambda = 0.5;
  double c = 0;      ///< limit of psi_r/psi; the spectrum bottom is (n-1)^2 c^2 / 4
  int k = 8;         ///< first node index of the support
  int m = 4;         ///< p = floor(k / m) sets the support width 4p half periods
  double alpha = 0;  ///< shift exponent, zero-curvature path only
  double gamma = 0;  ///< decay exponent of |psi_s/psi|, echoed only

  int p() const { return k / m; }
};

/// beta = sqrt(lambda - (n-1)^2 c^2 / 4).
double beta_of(double lambda, int n, double c);

/// r_k = (2k + 1) pi / (2 beta), a zero of cos(beta r).
double node_radius(int k, double beta);

struct CutoffValue {
  WideReal value;
  WideReal d1;
  WideReal d2;
};

/// C^2 cut-off: 1 on [-1/2, 1/2], 0 outside (-1, 1), and sigma(2(1 - |t|))
/// in between with sigma(x) = 6x^5 - 15x^4 + 10x^3.
CutoffValue cutoff_H(WideReal t);

enum class WeylPath { regular, zero };
const char* to_string(WeylPath p);

/// Radial factor f = F h with F = V^{-1/2} cos(beta r) and its pieces.
struct RadialPieces {
  WideReal F, F1;     ///< F and F'
  WideReal h, h1, h2; ///< cut-off h and its derivatives
  WideReal f;         ///< F h
  WideReal q;         ///< V'/V
  WideReal A;         ///< -V''/(2V) + (V'/V)^2/4 + lambda - beta^2
};

struct AngularPieces {
  WideReal g, g1, g2;
};

/// The seven addends of Delta u + lambda u at one point, in the order
/// A F g h, B F' g h, 2 F' g h', F g Delta h, (n-3) psi_s/psi^3 f g',
/// (n-2) cot(s)/psi^2 f g', f g''/psi^2.
struct PointTerms {
  WideReal u;
  std::array<WideReal, 7> terms;

  WideReal total() const;
};

extern const std::array<const char*, 7> kTermNames;

/// The test function u(r, s) = f(r) g(s), supported on
/// [r_k, r_{k+4p}] x [0, delta]. Immutable after construction.
class WeylFunction {
 public:
  const WeylParams& params() const { return params_; }
  const ManifoldModel& model() const { return model_; }
  WeylPath path() const { return path_; }
  int p() const { return params_.p(); }
  double beta() const { return beta_; }
  double delta() const { return static_cast<double>(delta_); }
  WideReal delta_wide() const { return delta_; }
  double scale() const { return scale_; }
  /// r_j for j in [k, k + 4p].
  double node(int j) const;
  double support_begin() const { return node(params_.k); }
  double support_end() const { return node(params_.k + 4 * p()); }

  /// A copy with u multiplied by factor > 0.
  WeylFunction scaled(double factor) const;
  /// A copy with scale 1.
  WeylFunction unit() const;

  /// mu(r) = e^{-(n-1) alpha r / 2}; identically 1 on the regular path.
  WideReal mu(WideReal r) const;
  /// log V(r), where V = v on the regular path and e^{-(n-1) alpha r} v_alpha on the zero path.
  WideReal log_profile(WideReal r) const;

  RadialPieces radial(WideReal r) const;
  AngularPieces angular(WideReal s) const;
  WideReal u(WideReal r, WideReal s) const;
  /// The auxiliary-model function u^alpha = mu u, built from v_alpha directly (zero path only).
  WideReal u_alpha(WideReal r, WideReal s) const;
  PointTerms terms_at(WideReal r, WideReal s) const;

 private:
  WeylFunction(WeylParams params, ManifoldModel model, WeylPath path);

  friend WeylFunction build_weyl(const WeylParams&, const ManifoldModel&);
  friend WeylFunction build_weyl_zero(const WeylParams&, const ManifoldModel&);

  WeylParams params_;
  ManifoldModel model_;
  ManifoldModel profile_model_;  ///< the model whose meridian defines v (shifted on the zero path)
  WeylPath path_;
  double beta_ = 0;
  double gap_ = 0;  ///< lambda - beta^2
  WideReal delta_ = 0;
  WideReal kappa_ = 0;  ///< (n-1) alpha
  double scale_ = 1;
  std::vector<double> nodes_;
  std::optional<numerics::SampledFunction<WideReal>> log_v_;
};

/// u = v^{-1/2} cos(beta r) h(r) g(s) on the model, with v = int_0^r psi^{n-1}(tau, 0) dtau,
/// g(s) = H(s/delta) cos(pi s/delta), delta = c2 e^{-a r_{k+4p}}.
WeylFunction build_weyl(const WeylParams& params, const ManifoldModel& model);

/// Zero-curvature construction: u_k = mu^{-1} u^alpha, where u^alpha is built on
/// the shifted warp e^{alpha r} psi with beta = sqrt(lambda) and g(s) = H(s/c2) cos(pi s/c2).
/// Requires model a = 0 and lambda > (n-1)^2 alpha^2 / 4.
WeylFunction build_weyl_zero(const WeylParams& params, const ManifoldModel& model);

struct ResidualReport {
  std::string path;
  double lambda = 0;
  double lambda_reproduced = 0;  ///< (n-1)^2 c^2 / 4 + beta^2
  double beta = 0;
  double alpha = 0;
  int k = 0;
  int p = 0;
  int m = 0;
  double delta = 0;
  double norm_u = 0;
  double norm_residual = 0;
  double ratio = 0;
  std::array<double, 7> term_norms{};  ///< named by kTermNames
};

/// L^2 norms over the support with volume psi^{n-1} sin^{n-2}(s) |S^{n-2}| dr ds
/// (|S^0| = 2 counts both signs of the angle when n = 2).
ResidualReport residual(const WeylFunction& wf, const ManifoldModel& model, const QuadratureSpec& quad = {});

/// ||u_k|| on the model and ||u^alpha|| on the shifted model, integrated separately.
struct ZeroPathNorms {
  double norm_on_model;
  double norm_on_shifted;
};
ZeroPathNorms zero_path_norms(const WeylFunction& wf, const QuadratureSpec& quad = {});

struct Lemma5Entry {
  std::string name;
  double measured;               ///< ratio to ||u||
  std::optional<double> bound;   ///< explicit constant where one is available
  std::optional<double> log10_constant;  ///< implied C for (c)-(e): ratio * delta^j * (inf psi)^2
};

struct Lemma5Report {
  int k = 0;
  double delta = 0;
  double log10_inf_psi = 0;  ///< inf of psi over the support, sampled
  std::vector<Lemma5Entry> entries;  ///< a, b, c, d, e
};

/// Ratios ||chi F g||/||u||, ||chi F' g||/||u|| (bounds sqrt2 3^{n/2} and
/// (2 lambda + 3) sqrt2 3^{n/2}) and the weighted angular ratios (c)-(e).
Lemma5Report lemma5_ratios(const WeylFunction& wf, const QuadratureSpec& quad = {}, int k_min = 8);

struct FamilyMember {
  int k;
  double r_begin;
  double r_end;
};

/// k_i = k0 + i (4 p0 + 1): consecutive closed supports are separated by pi/beta.
std::vector<FamilyMember> disjoint_family(int k0, int p0, int count, double beta);

/// True when the closed intervals [r_begin, r_end] are pairwise disjoint.
bool closed_supports_disjoint(const std::vector<FamilyMember>& family);

struct SweepOptions {
  double c = 0;
  bool zero_path = false;
  double alpha = 0;
  double epsilon = 0.05;
  int threads = 1;
};

struct SweepRow {
  double lambda;
  ResidualReport report;
};

struct LambdaSummary {
  double lambda;
  bool strictly_decreasing;
  std::optional<int> first_k_within_epsilon;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< lambda-major, then k, in input order
  std::vector<LambdaSummary> summaries;
};

/// Residual ratios over the (lambda, k) grid with fixed m. Cells run in
/// parallel; results are merged in grid order.
SweepResult residual_sweep(const ManifoldModel& model, const std::vector<double>& lambdas,
                           const std::vector<int>& ks, int m, const SweepOptions& options = {},
                           const QuadratureSpec& quad = {});

}  // namespace weylspec::weyl
