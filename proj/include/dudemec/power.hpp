#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dudemec/mec.hpp"
#include "dudemec/topology.hpp"

namespace dudemec {

/// Open-loop fractional power control, P = min(P_max, w·PL + P0) in dB.
struct FpcParams {
  double p0_dbm = -80.0;  // target received power
  double w = 0.7;         // path-loss compensation factor
};

/// dB-domain FPC rule; path-loss includes shadowing, never fast fading.
double fpc_power_dbm(double pathloss_db, double max_power_dbm, const FpcParams& fpc);
/// Linear-domain FPC clamped to the strictly positive solver floor.
double fpc_power_w(double pathloss_db, double max_power_dbm, const FpcParams& fpc,
                   double p_floor_w);

/// FPC power for every UL-served MD toward its serving BS; unserved MDs get 0
/// (they do not transmit).
std::vector<double> fpc_powers(const Assignment& asg, const ChannelTensor& ch,
                               const std::vector<Device>& devices, const FpcParams& fpc,
                               double p_floor_scale);

struct SolverParams {
  double zeta = 0.5;          // damping shrink factor on accepted steps, in (0,1);
                              // rejected proposals grow the damping by 1/zeta^2
  double eps = 0.01;          // sufficient-decrease constant, in (0,1)
  double inner_tol = 1e-6;    // SCA objective-change tolerance
  double outer_tol = 1e-5;    // KKT residual tolerance (stop at sum of squares <= tol^2)
  int max_outer = 200;
  int max_inner = 100;
  int max_armijo = 30;
  double p_floor_scale = 1e-6;  // p_floor = P_max * scale, keeps the Q-box compact
  int max_cd_sweeps = 400;      // coordinate-descent sweeps per convex solve
  double cd_tol = 1e-13;        // relative per-coordinate movement threshold
  // Per-call trust radius of the inner solve in log2-power units: one inner
  // call keeps each P_k within [P_k0 * 2^-r, P_k0 * 2^+r] of its warm start
  // P_k0. This keeps the inner solution a continuous function of the
  // multipliers; an unrestricted exact surrogate solve can hop between
  // binary-power corners (near-muted MDs), which makes the rates jump and the
  // outer multiplier iteration cycle instead of contracting.
  double trust_delta_q = 1.0;

  void validate() const;
};

/// Immutable uplink interference system over the transmitting MDs of one
/// assignment: who interferes with whom, own gains, noise and box bounds.
/// Index i below is a compact index over served MDs; md_ids maps back.
class UplinkSystem {
 public:
  UplinkSystem(const Assignment& asg, const ChannelTensor& ch,
               const std::vector<Device>& devices, const NetworkConfig& cfg);

  int size() const { return static_cast<int>(md_ids_.size()); }
  const std::vector<int>& md_ids() const { return md_ids_; }
  double bandwidth_hz() const { return bandwidth_hz_; }
  double noise_w() const { return noise_w_; }
  double p_max_w(int i) const { return p_max_w_[i]; }
  double input_bits(int i) const { return input_bits_[i]; }

  /// Gain from MD i's transmitter to MD k's serving BS on k's subchannel; the
  /// interferer lists below carry these weights.
  const std::vector<std::pair<int, double>>& interferers(int i) const { return in_[i]; }
  const std::vector<std::pair<int, double>>& affected(int i) const { return out_[i]; }
  double own_gain(int i) const { return own_gain_[i]; }

  double sinr(int i, const std::vector<double>& p_w) const;
  double rate_bps(int i, const std::vector<double>& p_w) const;
  /// Σ_i B^I_i / R_i — the quantity the optimal power allocation minimizes.
  double sum_ul_latency_s(const std::vector<double>& p_w) const;

 private:
  std::vector<int> md_ids_;
  std::vector<double> own_gain_;
  std::vector<double> p_max_w_;
  std::vector<double> input_bits_;
  std::vector<std::vector<std::pair<int, double>>> in_;   // (j, h_j->bs(i)) hurting i
  std::vector<std::vector<std::pair<int, double>>> out_;  // (k, h_i->bs(k)) hurt by i
  double bandwidth_hz_ = 0.0;
  double noise_w_ = 0.0;
};

/// Convex surrogate objective of the power subproblem in the log-power
/// domain Q = log2(P): sum over MDs of lambda·(B^I − tau·R̄(Q)) with the
/// rate lower bound parameterized by (mu1, mu2).
double q8_objective(const UplinkSystem& sys, const std::vector<double>& lambda,
                    const std::vector<double>& tau, const std::vector<double>& mu1,
                    const std::vector<double>& mu2, const std::vector<double>& q);
std::vector<double> q8_gradient(const UplinkSystem& sys, const std::vector<double>& lambda,
                                const std::vector<double>& tau, const std::vector<double>& mu1,
                                const std::vector<double>& mu2, const std::vector<double>& q);
/// Rate lower bound R̄_i(Q) for the current (mu1, mu2); equals the true rate
/// when the bound was tightened at Q itself.
double sca_bound_rate_bps(const UplinkSystem& sys, int i, const std::vector<double>& mu1,
                          const std::vector<double>& mu2, const std::vector<double>& q);

struct InnerResult {
  std::vector<double> p_w;
  std::vector<double> mu1, mu2;        // refreshed at the returned point (tight bound)
  std::vector<double> objective_trace; // surrogate objective per iteration, nonincreasing
  int iterations = 0;
  bool converged = false;
};

/// Iterative convex approximation for the fixed-(lambda, tau) subproblem:
/// refresh (mu1, mu2) at the current SINRs, solve the convex box problem in
/// Q-domain exactly (cyclic coordinate descent with per-coordinate root
/// finding), repeat until the surrogate objective stalls. The search is
/// confined to the power box intersected with the trust band
/// [P0·2^-trust_delta_q, P0·2^+trust_delta_q] around the warm start P0.
InnerResult solve_inner_sca(const UplinkSystem& sys, const std::vector<double>& lambda,
                            const std::vector<double>& tau, const std::vector<double>& p_init,
                            const SolverParams& params);

struct OuterTraceRow {
  int outer = 0;
  int inner_iterations = 0;    // convex subproblem solves this round
  int step_exponent = 0;       // rejected proposals before acceptance (0 = first accepted)
  double residual_sq = 0.0;    // Σ(ρ² + κ²) at the new powers, pre-move multipliers
  double sum_latency_s = 0.0;  // true objective at the iterate (nonincreasing)
};

struct PowerResult {
  std::vector<double> p_ul_w;   // per MD id (full network vector; unserved = 0)
  std::vector<double> lambda;   // per system index, = 1/R at the solution
  std::vector<double> tau;      // = B^I/R at the solution
  std::vector<double> mu1, mu2; // tight at p_ul_w
  bool converged = false;
  int outer_iterations = 0;
  double residual_sq = 0.0;     // Σ(ρ² + κ²) at the returned primal-dual point
  bool armijo_warning = false;  // line search failed to find any decrease
  std::vector<OuterTraceRow> trace;
};

/// Parametric sum-of-ratios solver. Each outer round takes the exact Newton
/// step on the affine residual families (lambda = 1/R, tau = B/R at the
/// current powers, where rho and kappa have slope R), tightens the rate
/// bound there, and proposes the exact minimizer of the damped convex model
/// (surrogate + proximal term) over the trust box. Proposals that fail to
/// realize an eps fraction of the model's predicted decrease raise the
/// damping and re-solve; accepted steps lower it again, so the true sum
/// latency decreases monotonically. Stops when the mildly-damped model gap
/// certifies a KKT point within the trust region or when the powers stop
/// moving. Never throws on hard instances; check `converged`.
PowerResult solve_optimal_power(const UplinkSystem& sys, const SolverParams& params,
                                const std::vector<double>& p_init_w);

struct KktReport {
  std::vector<double> rho;           // |λ_k R_k − 1|
  std::vector<double> kappa;         // |τ_k R_k − B^I_k|
  std::vector<double> stationarity;  // projected-gradient residual per MD (numeric)
  std::vector<double> box_slack;     // min(P − p_floor, P_max − P)
  double residual_sq = 0.0;          // Σ(ρ² + κ²)
};

KktReport kkt_residuals(const UplinkSystem& sys, const std::vector<double>& p_w,
                        const std::vector<double>& lambda, const std::vector<double>& tau,
                        const SolverParams& params);

/// Serializes an outer-loop trace as CSV for convergence plots.
std::string trace_csv(const std::vector<OuterTraceRow>& trace);

}  // namespace dudemec
