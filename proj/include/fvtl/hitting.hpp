#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvtl/chain.hpp"
#include "fvtl/mixing.hpp"
#include "fvtl/qsd.hpp"

namespace fvtl {

/// P_alpha(tau_x > t) for t = 0..t_max.
struct TailCurve {
  State target = 0;
  std::string start;
  std::vector<double> values;
  /// Natural logarithm of each value; stays finite after `values` underflows.
  std::vector<double> log_values;

  Steps t_max() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Iterates alpha Q^t, rescaling the vector when its mass drops below 1e-200
/// and keeping the scale as a logarithm.
class SurvivalSequence {
 public:
  SurvivalSequence(const SubKernel& q, std::vector<double> alpha_local);
  Steps time() const noexcept { return time_; }
  double log_mass() const;
  double mass() const;
  void step();

 private:
  const SubKernel* q_;
  std::vector<double> current_;
  std::vector<double> scratch_;
  double log_scale_ = 0.0;
  Steps time_ = 0;
};

/// Q^t 1, i.e. P_y(tau_x > t) for every y != x, in scaled form.
class StartwiseSurvival {
 public:
  explicit StartwiseSurvival(const SubKernel& q);
  Steps time() const noexcept { return time_; }
  /// P_y(tau_x > t) = exp(log_scale()) * scaled()[local(y)].
  std::span<const double> scaled() const noexcept { return current_; }
  double log_scale() const noexcept { return log_scale_; }
  void step();

 private:
  const SubKernel* q_;
  std::vector<double> current_;
  std::vector<double> scratch_;
  double log_scale_ = 0.0;
  Steps time_ = 0;
};

/// Tail of tau_x from a measure on the complement of x (indexed locally).
TailCurve survival_tail(const SubKernel& q, std::span<const double> alpha_local, Steps t_max,
                        std::string start = "custom");
/// Tail from a full-space distribution; its mass at x contributes only to t<0,
/// so values[0] = 1 - alpha(x).
TailCurve survival_tail(const SubKernel& q, const Distribution& alpha, Steps t_max,
                        std::string start = "custom");

/// E_y[tau_x] for every y (zero at x), from (I - Q) h = 1.
std::vector<double> expected_hitting_times_to(const StochasticMatrix& p, State x);

/// sum_{y != x} pi(y) E_y[tau_x] from the linear system.
double expected_hitting_linear(const StochasticMatrix& p, const Distribution& pi, State x);

/// Block length B with contraction = max_x ||P^B(x,.) - pi||_1 <= 1/2, used to
/// certify series tails: |P^t(x,x) - pi(x)| <= contraction^k for t >= kB.
struct MixingEnvelope {
  Steps block = 0;
  double contraction = 1.0;
};
/// Throws TruncationFailure if no such block exists within `cap` steps.
MixingEnvelope mixing_envelope(const StochasticMatrix& p, const Distribution& pi,
                               Steps cap = 100000);

/// Z(x,x) = sum_t (P^t(x,x) - pi(x)), stopped once the certified remainder
/// B c^k / (1 - c) after k whole blocks falls below tol.
double fundamental_diag(const StochasticMatrix& p, const Distribution& pi, State x, double tol,
                        const MixingEnvelope& envelope, Steps cap = 10000000);
double fundamental_diag(const StochasticMatrix& p, State x, double tol = 1e-13);

/// E_pi[tau_x] by Z(x,x)/pi(x) and by the linear system; throws
/// NumericalInconsistency if they differ by more than 1e-8 relative.
double expected_hitting_from_stationarity(const StochasticMatrix& p, State x);
double expected_hitting_from_stationarity(const StochasticMatrix& p, const Distribution& pi,
                                          State x, const MixingEnvelope& envelope);

/// R_T(x) = sum_{t=0}^{T} P^t(x,x).
double returns_within_T(const StochasticMatrix& p, State x, Steps T);

/// E_y[zeta_T(x)] = sum_{s=0}^{T-1} P^s(y,x).
double local_time(const StochasticMatrix& p, State y, State x, Steps T);
/// E_y[zeta_T(x)] for every y, full-space indexed.
std::vector<double> local_times_to(const StochasticMatrix& p, State x, Steps T);
/// E_y[zeta_T(z)] for every z, full-space indexed.
std::vector<double> local_times_from(const StochasticMatrix& p, State y, Steps T);

struct TailBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich of P_alpha(tau_x > t) through the Doob chain's separation from
/// the tilted start; `alpha_local` may be a sub-probability measure.
TailBounds tail_bounds(const PerronTriple& triple, const DoobChain& doob,
                       std::span<const double> alpha_local, Steps t);

struct GammaBoundsCheck {
  bool ub_ok = false;
  double lb_slack = 0.0;  // min_y (gamma(y) - [1 - eps - E_y zeta_T(x)]_+)
};

/// `local_times` holds E_y[zeta_T(x)] on the complement, indexed like gamma.
GammaBoundsCheck gamma_bounds_check(const PerronTriple& triple,
                                    std::span<const double> local_times, double epsilon = 0.01);

struct CsqstResidual {
  /// P_pi(tau_x > t) - lambda^t <pi,gamma> (1 - s~(t)) with s~ the Doob
  /// separation from the tilted pi.
  std::vector<double> residuals;
  double sep0 = 0.0;           // s~ at t = 0
  double qsd_vs_pi_sep = 0.0;  // max_y [1 - mu_star(y)/pi(y)]
};

CsqstResidual csqst_residual(const StochasticMatrix& p, State x, Steps t_max);

/// Everything shared by the per-target analyses of one chain.
struct ChainContext {
  StochasticMatrix p;
  Distribution pi;
  Steps T = 0;
  double c = 0.0;          // exponent used to pick T, 0 when T was given
  DenseMatrix power_T;     // P^T
  double D_T = 0.0;
  MixingEnvelope envelope;

  static ChainContext with_T(const StochasticMatrix& p, Steps T);
  /// Picks T with the mixing threshold n^{-c}; throws MixingTooSlow.
  static ChainContext with_c(const StochasticMatrix& p, double c, Steps cap = 100000);
};

struct FvtlOptions {
  std::optional<Steps> t_max;  // default min(ceil(10 E_pi tau_x), 1e6)
  double epsilon = 0.01;       // slack in the gamma bound checks
  double bounds_slack = 1e-9;
  PerronOptions perron;
};

struct FvtlReport {
  State x = 0;
  std::size_t n = 0;
  Steps T = 0;
  Steps t_max = 0;
  double lambda = 0.0;
  double lambda_T = 0.0;            // lambda^T
  double R_T = 0.0;
  double pi_x = 0.0;
  double expected_hitting = 0.0;    // E_pi tau_x
  double sup_ratio_dev = 0.0;       // sup_t |P_pi(tau_x > t)/lambda^t - 1|
  Steps sup_ratio_dev_at = 0;
  double lambda_approx_dev = 0.0;   // |lambda / (1 - pi(x)/R_T) - 1|
  double pi_dot_gamma = 0.0;        // limit of the ratio as t -> infinity
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double gamma_lb_slack = 0.0;      // min_y (gamma(y) - [1 - E_y zeta_T(x)]_+)
  bool gamma_ub_ok = false;         // gamma_max <= 1 + epsilon
  double gamma_lb_slack_eps = 0.0;  // with the epsilon allowance
  std::size_t bounds_violations = 0;
  double csqst_residual_sup = 0.0;
  double csqst_residual_min = 0.0;
  double sep0 = 0.0;
  double qsd_vs_pi_sep = 0.0;
  double max_start_ratio = 0.0;       // max_y P_y(tau_x > t_max) / P_pi(tau_x > t_max)
  double mixed_start_ratio_dev = 0.0; // max_y |P_{mu_T^y}(tau_x > t_max) / P_pi(...) - 1|
  double left_residual = 0.0;
  double right_residual = 0.0;

  /// True when the report carries a hard verification failure.
  bool hard_failure() const noexcept {
    return bounds_violations > 0 || csqst_residual_min < -1e-9;
  }
};

FvtlReport fvtl_report(const ChainContext& context, State x, const FvtlOptions& options = {});
FvtlReport fvtl_report(const StochasticMatrix& p, State x, Steps T,
                       std::optional<Steps> t_max = std::nullopt);

/// The full tail curve from pi for target x, up to t_max.
TailCurve stationary_tail(const StochasticMatrix& p, const Distribution& pi, State x,
                          Steps t_max);

}  // namespace fvtl
