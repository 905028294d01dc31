#include "weylspec/weyl/weyl.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace weylspec::weyl {

namespace {

constexpr WideReal kPi = std::numbers::pi_v<WideReal>;
constexpr int kProfilePanels = 4096;

std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// |S^{n-2}|; for n = 2 this is the two-point sphere.
WideReal sphere_area(int n) {
  const WideReal d = static_cast<WideReal>(n - 1);
  return 2 * std::pow(kPi, d / 2) / std::tgamma(d / 2);
}

/// sigma and its first two derivatives.
void smoothstep(WideReal x, WideReal& v, WideReal& d1, WideReal& d2) {
  const WideReal x2 = x * x;
  v = x2 * x * (10 - 15 * x + 6 * x2);
  d1 = 30 * x2 * (x - 1) * (x - 1);
  d2 = 60 * x * (2 * x2 - 3 * x + 1);
}

WideReal check_finite(WideReal v, const char* what) {
  if (!std::isfinite(v)) throw std::range_error(std::string("weyl: non-finite ") + what);
  return v;
}

}  // namespace

const std::array<const char*, 7> kTermNames = {"AFgh", "BFpgh", "2Fpghp", "FgDh", "psis_fgp", "cot_fgp", "fgpp"};

const char* to_string(WeylPath p) { return p == WeylPath::regular ? "regular" : "zero"; }

WideReal PointTerms::total() const {
  WideReal s = 0;
  for (WideReal t : terms) s += t;
  return s;
}

double beta_of(double lambda, int n, double c) {
  const double bottom = (n - 1) * (n - 1) * c * c / 4;
  if (!(lambda > bottom)) {
    throw PreconditionError("lambda = " + num(lambda) + " is at or below essential-spectrum bottom " + num(bottom));
  }
  return std::sqrt(lambda - bottom);
}

double node_radius(int k, double beta) {
  if (!(beta > 0)) throw std::invalid_argument("node_radius: beta must be > 0");
  return (2.0 * k + 1) * std::numbers::pi / (2 * beta);
}

CutoffValue cutoff_H(WideReal t) {
  const WideReal a = std::abs(t);
  if (a <= 0.5L) return {1, 0, 0};
  if (a >= 1) return {0, 0, 0};
  WideReal v, d1, d2;
  smoothstep(2 * (1 - a), v, d1, d2);
  const WideReal sign = t > 0 ? 1 : -1;
  return {v, -2 * sign * d1, 4 * d2};
}

WeylFunction::WeylFunction(WeylParams params, ManifoldModel model, WeylPath path)
    : params_(params), model_(model), profile_model_(std::move(model)), path_(path) {}

double WeylFunction::node(int j) const {
  const int k = params_.k;
  if (j < k || j > k + 4 * p()) throw std::out_of_range("WeylFunction::node: index outside [k, k + 4p]");
  return nodes_[static_cast<std::size_t>(j - k)];
}

WeylFunction WeylFunction::scaled(double factor) const {
  if (!(factor > 0) || !std::isfinite(factor)) throw std::invalid_argument("WeylFunction::scaled: factor must be > 0");
  WeylFunction out = *this;
  out.scale_ *= factor;
  return out;
}

WeylFunction WeylFunction::unit() const {
  WeylFunction out = *this;
  out.scale_ = 1;
  return out;
}

WideReal WeylFunction::mu(WideReal r) const { return std::exp(-kappa_ * r / 2); }

WideReal WeylFunction::log_profile(WideReal r) const { return (*log_v_)(r)-kappa_ * r; }

RadialPieces WeylFunction::radial(WideReal r) const {
  RadialPieces out{};
  const WideReal r0 = nodes_.front();
  const WideReal r1 = nodes_.back();
  if (!(r > r0 && r < r1)) return out;
  const WideReal mid = static_cast<WideReal>(node(params_.k + 2 * p()));
  const WideReal L = r1 - r0;
  const CutoffValue H = cutoff_H(2 * (r - mid) / L);
  out.h = H.value;
  out.h1 = 2 * H.d1 / L;
  out.h2 = 4 * H.d2 / (L * L);

  const int n = model_.n;
  const WarpJet pj = profile_model_.jet(r, 0);
  const WideReal log_v = (*log_v_)(r);
  const WideReal q_profile = std::exp((n - 1) * std::log(pj.psi) - log_v);
  const WideReal v2_over_v = (n - 1) * (pj.psi_r / pj.psi) * q_profile;
  out.q = q_profile - kappa_;
  // V''/V for V = e^{-kappa r} v: v''/v - q_v^2 + q^2.
  const WideReal V2_over_V = v2_over_v - q_profile * q_profile + out.q * out.q;
  out.A = -V2_over_V / 2 + out.q * out.q / 4 + static_cast<WideReal>(gap_);

  const WideReal amp = static_cast<WideReal>(scale_) * std::exp(-(log_v - kappa_ * r) / 2);
  const WideReal b = static_cast<WideReal>(beta_);
  const WideReal c = std::cos(b * r);
  out.F = amp * c;
  out.F1 = -out.q / 2 * out.F - b * amp * std::sin(b * r);
  out.f = out.F * out.h;
  return out;
}

AngularPieces WeylFunction::angular(WideReal s) const {
  const WideReal t = s / delta_;
  if (!(t >= 0 && t < 1)) return {0, 0, 0};
  const CutoffValue H = cutoff_H(t);
  const WideReal c = std::cos(kPi * t);
  const WideReal sn = std::sin(kPi * t);
  const WideReal G = H.value * c;
  const WideReal G1 = H.d1 * c - kPi * H.value * sn;
  const WideReal G2 = H.d2 * c - 2 * kPi * H.d1 * sn - kPi * kPi * H.value * c;
  return {G, G1 / delta_, G2 / (delta_ * delta_)};
}

WideReal WeylFunction::u(WideReal r, WideReal s) const {
  const AngularPieces g = angular(s);
  if (g.g == 0) return 0;
  return radial(r).f * g.g;
}

WideReal WeylFunction::u_alpha(WideReal r, WideReal s) const {
  if (path_ != WeylPath::zero) throw std::logic_error("WeylFunction::u_alpha: only defined on the zero path");
  const WideReal r0 = nodes_.front();
  const WideReal r1 = nodes_.back();
  if (!(r > r0 && r < r1)) return 0;
  const WideReal L = r1 - r0;
  const WideReal mid = static_cast<WideReal>(node(params_.k + 2 * p()));
  const WideReal h = cutoff_H(2 * (r - mid) / L).value;
  const WideReal F = static_cast<WideReal>(scale_) * std::exp(-(*log_v_)(r) / 2) *
                     std::cos(static_cast<WideReal>(beta_) * r);
  return F * h * angular(s).g;
}

PointTerms WeylFunction::terms_at(WideReal r, WideReal s) const {
  PointTerms out{};
  const RadialPieces R = radial(r);
  const AngularPieces G = angular(s);
  out.u = R.f * G.g;
  if (R.h == 0 && R.h1 == 0 && R.h2 == 0) return out;
  if (G.g == 0 && G.g1 == 0 && G.g2 == 0) return out;
  const int n = model_.n;
  const WarpJet j = model_.jet(r, s);
  const WideReal rr = j.psi_r / j.psi;
  const WideReal B = (n - 1) * rr - R.q;
  const WideReal inv2 = 1 / (j.psi * j.psi);
  // cot(s) g'(s) -> g''(0) at the pole.
  const WideReal cot_g1 = s == 0 ? G.g2 : std::cos(s) / std::sin(s) * G.g1;
  out.terms[0] = R.A * R.F * G.g * R.h;
  out.terms[1] = B * R.F1 * G.g * R.h;
  out.terms[2] = 2 * R.F1 * G.g * R.h1;
  out.terms[3] = R.F * G.g * (R.h2 + (n - 1) * rr * R.h1);
  out.terms[4] = (n - 3) * (j.psi_s / j.psi) * inv2 * R.f * G.g1;
  out.terms[5] = (n - 2) * inv2 * R.f * cot_g1;
  out.terms[6] = inv2 * R.f * G.g2;
  return out;
}

namespace {

void fill_nodes(std::vector<double>& nodes, int k, int p, double beta) {
  nodes.clear();
  for (int j = k; j <= k + 4 * p; ++j) nodes.push_back(node_radius(j, beta));
}

void check_params(const WeylParams& params, const ManifoldModel& model) {
  model.validate();
  if (params.m < 1) throw std::invalid_argument("weyl: m must be >= 1");
  if (params.k < params.m) throw std::invalid_argument("weyl: k must be >= m so that p = floor(k/m) >= 1");
  if (!(params.lambda > 0) || !std::isfinite(params.lambda)) throw std::invalid_argument("weyl: lambda must be > 0");
}

/// log of v(r) = int_0^r psi_P^{n-1}(tau, 0) dtau, tabulated with exact log-slopes.
numerics::SampledFunction<WideReal> log_profile_table(const ManifoldModel& profile, WideReal r_lo, WideReal r_hi) {
  const int n = profile.n;
  auto integrand = [&](WideReal t) { return std::pow(profile.psi(t, 0), n - 1); };
  const QuadratureSpec tight{1e-30, 1e-14, 40};
  const auto v = numerics::cumulative_integral<WideReal>(integrand, r_lo, r_hi, kProfilePanels, tight);
  std::vector<WideReal> grid(v.grid().begin(), v.grid().end());
  std::vector<WideReal> logs, slopes;
  logs.reserve(grid.size());
  slopes.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const WideReal value = v.values()[i];
    if (!(value > 0) || !std::isfinite(value)) {
      throw std::range_error("weyl: profile integral is not finite and positive at r = " +
                             num(static_cast<double>(grid[i])));
    }
    logs.push_back(std::log(value));
    slopes.push_back(v.slopes()[i] / value);
  }
  return numerics::SampledFunction<WideReal>(std::move(grid), std::move(logs), std::move(slopes));
}

}  // namespace

WeylFunction build_weyl(const WeylParams& params, const ManifoldModel& model) {
  check_params(params, model);
  WeylFunction wf(params, model, WeylPath::regular);
  wf.beta_ = beta_of(params.lambda, model.n, params.c);
  wf.gap_ = (model.n - 1) * (model.n - 1) * params.c * params.c / 4;
  fill_nodes(wf.nodes_, params.k, params.p(), wf.beta_);
  wf.delta_ = model.s_max(static_cast<WideReal>(wf.nodes_.back()));
  if (!(wf.delta_ > 0)) {
    throw std::range_error("weyl: angular radius underflows at r = " + num(wf.nodes_.back()));
  }
  const WideReal r0 = wf.nodes_.front();
  const WideReal lo = r0 > 2 ? r0 - 1 : r0 / 2;
  wf.log_v_ = log_profile_table(model, lo, static_cast<WideReal>(wf.nodes_.back()) + 1);
  return wf;
}

WeylFunction build_weyl_zero(const WeylParams& params, const ManifoldModel& model) {
  check_params(params, model);
  if (model.neighborhood.a != 0) throw std::invalid_argument("weyl-zero: requires a cone neighborhood (a = 0)");
  if (!(params.alpha >= 0)) throw std::invalid_argument("weyl-zero: alpha must be >= 0");
  const double shift_bottom = (model.n - 1) * (model.n - 1) * params.alpha * params.alpha / 4;
  if (!(params.lambda > shift_bottom)) {
    throw PreconditionError("weyl-zero: lambda = " + num(params.lambda) + " must exceed (n-1)^2 alpha^2 / 4 = " +
                            num(shift_bottom));
  }
  WeylFunction wf(params, model, WeylPath::zero);
  wf.profile_model_ = warp::alpha_shifted(model, params.alpha);
  wf.beta_ = std::sqrt(params.lambda);
  wf.gap_ = 0;
  wf.kappa_ = static_cast<WideReal>(model.n - 1) * static_cast<WideReal>(params.alpha);
  fill_nodes(wf.nodes_, params.k, params.p(), wf.beta_);
  wf.delta_ = model.s_max(0);
  const WideReal r0 = wf.nodes_.front();
  const WideReal lo = r0 > 2 ? r0 - 1 : r0 / 2;
  wf.log_v_ = log_profile_table(wf.profile_model_, lo, static_cast<WideReal>(wf.nodes_.back()) + 1);
  return wf;
}

namespace {

/// Integrates the squares of N pointwise components over the support with the
/// volume of `volume_model`, returning the integrals (without the scale).
/// Components are evaluated on the unit-scale function; the scale enters as a
/// final factor so that the quadrature path does not depend on it.
template <std::size_t N, typename Components>
std::array<WideReal, N> support_integrals(const WeylFunction& scaled, const ManifoldModel& volume_model,
                                          const QuadratureSpec& quad, Components&& components) {
  const WeylFunction wf = scaled.unit();
  const int n = volume_model.n;
  const WideReal delta = wf.delta_wide();
  std::vector<WideReal> rpts;
  for (int j = wf.params().k; j <= wf.params().k + 4 * wf.p(); ++j) rpts.push_back(wf.node(j));
  const std::array<WideReal, 3> tpts{0, 0.5L, 1};
  const QuadratureSpec inner{quad.abs_tol, quad.rel_tol * 0.1, quad.max_depth};

  auto outer = [&](WideReal r) {
    const RadialPieces R = wf.radial(r);
    auto in = [&](WideReal t) {
      const WideReal s = delta * t;
      std::array<WideReal, N> c = components(wf, r, s, R);
      const WideReal w =
          std::pow(volume_model.psi(r, s), n - 1) * (n == 2 ? WideReal{1} : std::pow(std::sin(s) / delta, n - 2));
      for (auto& x : c) x = x * x * w;
      return c;
    };
    return numerics::integrate_n<N, WideReal>(in, std::span<const WideReal>(tpts), inner);
  };
  std::array<WideReal, N> out = numerics::integrate_n<N, WideReal>(outer, std::span<const WideReal>(rpts), quad);
  const WideReal sc = static_cast<WideReal>(scaled.scale());
  const WideReal factor = sphere_area(n) * std::pow(delta, n - 1) * sc * sc;
  for (auto& x : out) x = check_finite(x * factor, "norm integral");
  return out;
}

/// Norms of u must be representable; addends far below double range flush to 0.
double to_double_norm(WideReal squared, const char* what, bool allow_underflow = false) {
  const WideReal v = std::sqrt(squared);
  if (allow_underflow && v < std::numeric_limits<double>::min()) return 0;
  if (v != 0 && (v < std::numeric_limits<double>::min() || v > std::numeric_limits<double>::max())) {
    throw std::range_error(std::string("weyl: ") + what + " = 1e" + num(static_cast<double>(std::log10(v))) +
                           " is outside double range; rescale with WeylFunction::scaled");
  }
  return static_cast<double>(v);
}

void check_same_model(const WeylFunction& wf, const ManifoldModel& model) {
  if (model.n != wf.model().n || !(model.warp == wf.model().warp) ||
      model.neighborhood.a != wf.model().neighborhood.a || model.neighborhood.c2 != wf.model().neighborhood.c2) {
    throw std::invalid_argument("residual: model '" + model.label + "' differs from the one u was built on ('" +
                                wf.model().label + "')");
  }
}

}  // namespace

ResidualReport residual(const WeylFunction& wf, const ManifoldModel& model, const QuadratureSpec& quad) {
  check_same_model(wf, model);
  // Component 0 is u, 1 the full residual, 2..8 the seven terms.
  auto comps = [](const WeylFunction& w, WideReal r, WideReal s, const RadialPieces&) {
    const PointTerms pt = w.terms_at(r, s);
    std::array<WideReal, 9> c{};
    c[0] = pt.u;
    c[1] = pt.total();
    for (std::size_t i = 0; i < 7; ++i) c[i + 2] = pt.terms[i];
    return c;
  };
  const auto I = support_integrals<9>(wf, model, quad, comps);
  ResidualReport rep;
  rep.path = to_string(wf.path());
  rep.lambda = wf.params().lambda;
  rep.beta = wf.beta();
  rep.alpha = wf.path() == WeylPath::zero ? wf.params().alpha : 0;
  const double c = wf.path() == WeylPath::zero ? 0 : wf.params().c;
  rep.lambda_reproduced = (model.n - 1) * (model.n - 1) * c * c / 4 + wf.beta() * wf.beta();
  rep.k = wf.params().k;
  rep.p = wf.p();
  rep.m = wf.params().m;
  rep.delta = wf.delta();
  if (!(I[0] > 0)) throw std::range_error("residual: ||u|| vanished; the support carries no mass in wide precision");
  rep.norm_u = to_double_norm(I[0], "||u||");
  rep.norm_residual = to_double_norm(I[1], "||Delta u + lambda u||", true);
  rep.ratio = static_cast<double>(std::sqrt(I[1] / I[0]));
  for (std::size_t i = 0; i < 7; ++i) rep.term_norms[i] = to_double_norm(I[i + 2], kTermNames[i], true);
  return rep;
}

ZeroPathNorms zero_path_norms(const WeylFunction& wf, const QuadratureSpec& quad) {
  if (wf.path() != WeylPath::zero) throw std::invalid_argument("zero_path_norms: requires a zero-path function");
  auto on_model = [](const WeylFunction& w, WideReal, WideReal s, const RadialPieces& R) {
    return std::array<WideReal, 1>{R.f * w.angular(s).g};
  };
  auto on_shifted = [](const WeylFunction& w, WideReal r, WideReal s, const RadialPieces&) {
    return std::array<WideReal, 1>{w.u_alpha(r, s)};
  };
  const ManifoldModel shifted = warp::alpha_shifted(wf.model(), wf.params().alpha);
  const auto a = support_integrals<1>(wf, wf.model(), quad, on_model);
  const auto b = support_integrals<1>(wf, shifted, quad, on_shifted);
  return {to_double_norm(a[0], "||u||"), to_double_norm(b[0], "||u^alpha||")};
}

Lemma5Report lemma5_ratios(const WeylFunction& wf, const QuadratureSpec& quad, int k_min) {
  if (wf.params().k < k_min) {
    throw std::invalid_argument("lemma5_ratios: k = " + std::to_string(wf.params().k) + " is below the threshold " +
                                std::to_string(k_min));
  }
  const ManifoldModel& model = wf.model();
  auto comps = [&model](const WeylFunction& w, WideReal r, WideReal s, const RadialPieces& R) {
    const AngularPieces G = w.angular(s);
    const WarpJet j = model.jet(r, s);
    const WideReal inv2 = 1 / (j.psi * j.psi);
    const WideReal cot_g1 = s == 0 ? G.g2 : std::cos(s) / std::sin(s) * G.g1;
    return std::array<WideReal, 6>{R.f * G.g,
                                   R.F * G.g,
                                   R.F1 * G.g,
                                   (j.psi_s / j.psi) * inv2 * R.f * G.g1,
                                   inv2 * R.f * cot_g1,
                                   inv2 * R.f * G.g2};
  };
  const auto I = support_integrals<6>(wf, model, quad, comps);
  if (!(I[0] > 0)) throw std::range_error("lemma5_ratios: ||u|| vanished");

  // inf psi over the support, sampled.
  WideReal log_inf = std::numeric_limits<WideReal>::infinity();
  const WideReal r0 = wf.support_begin(), r1 = wf.support_end();
  for (int i = 0; i <= 64; ++i) {
    const WideReal r = r0 + (r1 - r0) * i / 64;
    for (int jj = 0; jj <= 16; ++jj) {
      const WideReal s = wf.delta_wide() * jj / 16;
      log_inf = std::min(log_inf, std::log(model.psi(r, s)));
    }
  }

  Lemma5Report rep;
  rep.k = wf.params().k;
  rep.delta = wf.delta();
  rep.log10_inf_psi = static_cast<double>(log_inf / std::log(WideReal{10}));
  const double base = std::sqrt(2.0) * std::pow(3.0, model.n / 2.0);
  const double lambda = wf.params().lambda;
  auto ratio = [&](std::size_t i) { return static_cast<double>(std::sqrt(I[i] / I[0])); };
  auto implied = [&](std::size_t i, int delta_power) -> std::optional<double> {
    if (!(I[i] > 0)) return std::nullopt;
    const WideReal l = std::log(std::sqrt(I[i] / I[0])) + delta_power * std::log(wf.delta_wide()) + 2 * log_inf;
    return static_cast<double>(l / std::log(WideReal{10}));
  };
  rep.entries.push_back({"a", ratio(1), base, std::nullopt});
  rep.entries.push_back({"b", ratio(2), (2 * lambda + 3) * base, std::nullopt});
  rep.entries.push_back({"c", ratio(3), std::nullopt, implied(3, 1)});
  rep.entries.push_back({"d", ratio(4), std::nullopt, implied(4, 2)});
  rep.entries.push_back({"e", ratio(5), std::nullopt, implied(5, 2)});
  return rep;
}

std::vector<FamilyMember> disjoint_family(int k0, int p0, int count, double beta) {
  if (k0 < 0 || p0 < 1 || count < 1) throw std::invalid_argument("disjoint_family: requires k0 >= 0, p0 >= 1, count >= 1");
  if (!(beta > 0)) throw std::invalid_argument("disjoint_family: beta must be > 0");
  std::vector<FamilyMember> out;
  for (int i = 0; i < count; ++i) {
    const int k = k0 + i * (4 * p0 + 1);
    out.push_back({k, node_radius(k, beta), node_radius(k + 4 * p0, beta)});
  }
  return out;
}

bool closed_supports_disjoint(const std::vector<FamilyMember>& family) {
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const auto& a = family[i];
      const auto& b = family[j];
      if (!(a.r_end < b.r_begin || b.r_end < a.r_begin)) return false;
    }
  }
  return true;
}

SweepResult residual_sweep(const ManifoldModel& model, const std::vector<double>& lambdas, const std::vector<int>& ks,
                           int m, const SweepOptions& options, const QuadratureSpec& quad) {
  if (lambdas.empty() || ks.empty()) return {};
  if (!(options.epsilon > 0)) throw std::invalid_argument("residual_sweep: epsilon must be > 0");
  // Preconditions are checked up front so that a bad lambda fails before any work.
  for (double lambda : lambdas) {
    if (options.zero_path) {
      const double bottom = (model.n - 1) * (model.n - 1) * options.alpha * options.alpha / 4;
      if (!(lambda > bottom)) {
        throw PreconditionError("residual_sweep: lambda = " + num(lambda) + " must exceed " + num(bottom));
      }
    } else {
      beta_of(lambda, model.n, options.c);
    }
  }
  const std::size_t cells = lambdas.size() * ks.size();
  std::vector<std::optional<ResidualReport>> reports(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      try {
        WeylParams p;
        p.lambda = lambdas[i / ks.size()];
        p.k = ks[i % ks.size()];
        p.m = m;
        p.c = options.c;
        p.alpha = options.alpha;
        const WeylFunction wf = options.zero_path ? build_weyl_zero(p, model) : build_weyl(p, model);
        reports[i] = residual(wf, model, quad);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(cells)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult out;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    LambdaSummary summary{lambdas[li], true, std::nullopt};
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const ResidualReport& rep = *reports[li * ks.size() + ki];
      if (ki > 0 && !(rep.ratio < out.rows.back().report.ratio)) summary.strictly_decreasing = false;
      if (!summary.first_k_within_epsilon && rep.ratio <= options.epsilon) summary.first_k_within_epsilon = rep.k;
      out.rows.push_back({lambdas[li], rep});
    }
    out.summaries.push_back(summary);
  }
  return out;
}

}  // namespace weylspec::weyl
