#include "dudemec/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dudemec {

double fpc_power_dbm(double pathloss_db, double max_power_dbm, const FpcParams& fpc) {
  return std::min(max_power_dbm, fpc.w * pathloss_db + fpc.p0_dbm);
}

double fpc_power_w(double pathloss_db, double max_power_dbm, const FpcParams& fpc,
                   double p_floor_w) {
  return std::max(dbm_to_watt(fpc_power_dbm(pathloss_db, max_power_dbm, fpc)), p_floor_w);
}

std::vector<double> fpc_powers(const Assignment& asg, const ChannelTensor& ch,
                               const std::vector<Device>& devices, const FpcParams& fpc,
                               double p_floor_scale) {
  std::vector<double> p(devices.size(), 0.0);
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (!asg.ul_served(k)) continue;
    const double p_max = devices[k].max_tx_power_w();
    p[k] = fpc_power_w(ch.pathloss_db(k, asg.ul_bs[k], Direction::UL),
                       devices[k].max_tx_power_dbm, fpc, p_max * p_floor_scale);
  }
  return p;
}

void SolverParams::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(zeta > 0.0 && zeta < 1.0, "zeta must be in (0,1)");
  require(eps > 0.0 && eps < 1.0, "eps must be in (0,1)");
  require(inner_tol > 0.0 && outer_tol > 0.0 && cd_tol > 0.0, "tolerances must be positive");
  require(max_outer > 0 && max_inner > 0 && max_armijo > 0 && max_cd_sweeps > 0,
          "iteration caps must be positive");
  require(p_floor_scale > 0.0 && p_floor_scale < 1.0, "p_floor_scale must be in (0,1)");
  require(trust_delta_q > 0.0, "trust_delta_q must be positive");
}

UplinkSystem::UplinkSystem(const Assignment& asg, const ChannelTensor& ch,
                           const std::vector<Device>& devices, const NetworkConfig& cfg) {
  bandwidth_hz_ = cfg.subchannel_bandwidth_ul_hz();
  noise_w_ = cfg.noise_power_ul_w();
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (asg.ul_served(k)) md_ids_.push_back(k);
  }
  const int n = size();
  own_gain_.resize(n);
  p_max_w_.resize(n);
  input_bits_.resize(n);
  in_.resize(n);
  out_.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = md_ids_[i];
    own_gain_[i] = ch.gain(k, asg.ul_bs[k], asg.ul_chan[k], Direction::UL);
    p_max_w_[i] = devices[k].max_tx_power_w();
    input_bits_[i] = devices[k].task.input_bits;
  }
  for (int i = 0; i < n; ++i) {
    const int k = md_ids_[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const int l = md_ids_[j];
      if (asg.ul_chan[l] != asg.ul_chan[k]) continue;
      const double h = ch.gain(l, asg.ul_bs[k], asg.ul_chan[k], Direction::UL);
      in_[i].emplace_back(j, h);
      out_[j].emplace_back(i, h);
    }
  }
}

double UplinkSystem::sinr(int i, const std::vector<double>& p_w) const {
  double interference = 0.0;
  for (const auto& [j, h] : in_[i]) interference += p_w[j] * h;
  return p_w[i] * own_gain_[i] / (interference + noise_w_);
}

double UplinkSystem::rate_bps(int i, const std::vector<double>& p_w) const {
  return bandwidth_hz_ * std::log2(1.0 + sinr(i, p_w));
}

double UplinkSystem::sum_ul_latency_s(const std::vector<double>& p_w) const {
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) sum += input_bits_[i] / rate_bps(i, p_w);
  return sum;
}

namespace {

// Interference-plus-noise at MD i's serving BS given linear powers.
double interference_plus_noise(const UplinkSystem& sys, int i, const std::vector<double>& p_w) {
  double v = sys.noise_w();
  for (const auto& [j, h] : sys.interferers(i)) v += p_w[j] * h;
  return v;
}

std::vector<double> to_linear(const std::vector<double>& q) {
  std::vector<double> p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p[i] = std::exp2(q[i]);
  return p;
}

}  // namespace

double sca_bound_rate_bps(const UplinkSystem& sys, int i, const std::vector<double>& mu1,
                          const std::vector<double>& mu2, const std::vector<double>& q) {
  const std::vector<double> p = to_linear(q);
  const double gamma = sys.sinr(i, p);
  return sys.bandwidth_hz() * (mu1[i] * std::log2(gamma) + mu2[i]);
}

double q8_objective(const UplinkSystem& sys, const std::vector<double>& lambda,
                    const std::vector<double>& tau, const std::vector<double>& mu1,
                    const std::vector<double>& mu2, const std::vector<double>& q) {
  const std::vector<double> p = to_linear(q);
  double obj = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    const double gamma = sys.sinr(i, p);
    const double r_bar = sys.bandwidth_hz() * (mu1[i] * std::log2(gamma) + mu2[i]);
    obj += lambda[i] * (sys.input_bits(i) - tau[i] * r_bar);
  }
  return obj;
}

std::vector<double> q8_gradient(const UplinkSystem& sys, const std::vector<double>& lambda,
                                const std::vector<double>& tau, const std::vector<double>& mu1,
                                const std::vector<double>& mu2, const std::vector<double>& q) {
  (void)mu2;  // the offset term has zero gradient
  const int n = sys.size();
  const std::vector<double> p = to_linear(q);
  std::vector<double> grad(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w_i = lambda[i] * tau[i] * sys.bandwidth_hz() * mu1[i];
    grad[i] -= w_i;  // own log2(2^Q_i) term of the bound
    // raising Q_i raises log2(interference + noise) of every affected MD
    for (const auto& [k, h] : sys.affected(i)) {
      const double w_k = lambda[k] * tau[k] * sys.bandwidth_hz() * mu1[k];
      grad[i] += w_k * p[i] * h / interference_plus_noise(sys, k, p);
    }
  }
  return grad;
}

namespace {

// Exactly minimizes the (possibly proximally regularized) convex surrogate
// along coordinate i over P_i in [p_lo, p_hi] (the power box intersected
// with the call's trust region). The partial derivative w.r.t. Q_i,
//   F(Q_i) = -w_i + t * sum_k w_k h_{ik} / (u_k + h_{ik} t)
//            + 2 pw_i (Q_i - Q0_i),                        t = 2^{Q_i},
// is nondecreasing in Q_i, so the minimizer is either a box face or the
// unique root of F, found by bisection in Q.
double solve_coordinate(const UplinkSystem& sys, int i, const std::vector<double>& weights,
                        const std::vector<double>& p_w, double p_lo, double p_hi, double prox_w,
                        double q_anchor) {
  const auto& affected = sys.affected(i);
  if (affected.empty() && prox_w <= 0.0) return p_hi;

  // u_k: interference-plus-noise at k excluding MD i's contribution
  std::vector<double> u(affected.size());
  std::vector<double> h(affected.size());
  std::vector<double> w(affected.size());
  for (std::size_t a = 0; a < affected.size(); ++a) {
    const auto& [k, h_ik] = affected[a];
    u[a] = interference_plus_noise(sys, k, p_w) - p_w[i] * h_ik;
    h[a] = h_ik;
    w[a] = weights[k];
  }
  const double w_i = weights[i];
  auto deriv = [&](double q) {
    const double t = std::exp2(q);
    double v = -w_i + 2.0 * prox_w * (q - q_anchor);
    for (std::size_t a = 0; a < u.size(); ++a) v += w[a] * h[a] * t / (u[a] + h[a] * t);
    return v;
  };
  double lo = std::log2(p_lo);
  double hi = std::log2(p_hi);
  if (deriv(hi) <= 0.0) return p_hi;
  if (deriv(lo) >= 0.0) return p_lo;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) > 0.0 ? hi : lo) = mid;
  }
  return std::exp2(0.5 * (lo + hi));
}

// Solves the convex surrogate problem over the given box — plus an optional
// proximal term sum_i pw_i (Q_i - Q0_i)^2 — to optimality by cyclic exact
// coordinate descent (deterministic; smooth strictly convex objective + box
// constraints). Empty `prox_w` means no regularization.
std::vector<double> solve_q8_box(const UplinkSystem& sys, const std::vector<double>& weights,
                                 const std::vector<double>& p_init, const std::vector<double>& p_lo,
                                 const std::vector<double>& p_hi,
                                 const std::vector<double>& prox_w,
                                 const std::vector<double>& q_anchor, const SolverParams& params) {
  const int n = sys.size();
  std::vector<double> p = p_init;
  for (int i = 0; i < n; ++i) p[i] = std::clamp(p[i], p_lo[i], p_hi[i]);
  for (int sweep = 0; sweep < params.max_cd_sweeps; ++sweep) {
    double max_rel_move = 0.0;
    for (int i = 0; i < n; ++i) {
      const double pw = prox_w.empty() ? 0.0 : prox_w[i];
      const double q0 = q_anchor.empty() ? 0.0 : q_anchor[i];
      const double next = solve_coordinate(sys, i, weights, p, p_lo[i], p_hi[i], pw, q0);
      max_rel_move = std::max(max_rel_move, std::abs(next - p[i]) / std::max(p[i], p_lo[i]));
      p[i] = next;
    }
    if (max_rel_move <= params.cd_tol) break;
  }
  return p;
}

// Objective-scale weights of the convex surrogate: the coefficient of
// log2(gamma_i) in Q8.
std::vector<double> surrogate_weights(const UplinkSystem& sys, const std::vector<double>& lambda,
                                      const std::vector<double>& tau,
                                      const std::vector<double>& mu1) {
  std::vector<double> w(sys.size());
  for (int i = 0; i < sys.size(); ++i) w[i] = lambda[i] * tau[i] * sys.bandwidth_hz() * mu1[i];
  return w;
}

}  // namespace

InnerResult solve_inner_sca(const UplinkSystem& sys, const std::vector<double>& lambda,
                            const std::vector<double>& tau, const std::vector<double>& p_init,
                            const SolverParams& params) {
  const int n = sys.size();
  InnerResult res;
  res.p_w = p_init;
  // Trust box of this call: power box intersected with a 2^+-trust_delta_q
  // band around the (clamped) warm start. The warm start stays feasible, so
  // the monotone-descent and tight-bound properties are unaffected.
  std::vector<double> p_lo(n), p_hi(n);
  const double trust_span = std::exp2(params.trust_delta_q);
  for (int i = 0; i < n; ++i) {
    const double p_floor = sys.p_max_w(i) * params.p_floor_scale;
    res.p_w[i] = std::clamp(res.p_w[i], p_floor, sys.p_max_w(i));
    p_lo[i] = std::max(p_floor, res.p_w[i] / trust_span);
    p_hi[i] = std::min(sys.p_max_w(i), res.p_w[i] * trust_span);
  }
  res.mu1.assign(n, 1.0);
  res.mu2.assign(n, 0.0);

  std::vector<double> q(n);
  auto refresh_q = [&] {
    for (int i = 0; i < n; ++i) q[i] = std::log2(res.p_w[i]);
  };
  refresh_q();
  double prev_obj = q8_objective(sys, lambda, tau, res.mu1, res.mu2, q);
  res.objective_trace.push_back(prev_obj);

  for (int t = 1; t <= params.max_inner; ++t) {
    res.iterations = t;
    // Tighten the bound at the current operating point...
    for (int i = 0; i < n; ++i) {
      const double gamma = sys.sinr(i, res.p_w);
      res.mu1[i] = gamma / (gamma + 1.0);
      res.mu2[i] = std::log2(1.0 + gamma) - res.mu1[i] * std::log2(gamma);
    }
    // ...then solve the now-convex surrogate exactly over the trust box.
    res.p_w = solve_q8_box(sys, surrogate_weights(sys, lambda, tau, res.mu1), res.p_w, p_lo, p_hi,
                           {}, {}, params);
    refresh_q();
    const double obj = q8_objective(sys, lambda, tau, res.mu1, res.mu2, q);
    res.objective_trace.push_back(obj);
    const bool stalled = std::abs(obj - prev_obj) <= params.inner_tol;
    prev_obj = obj;
    if (stalled) {
      res.converged = true;
      break;
    }
  }
  // Re-tighten at the returned point so that the reported bound coefficients
  // satisfy R-bar(P*) = R(P*) exactly.
  for (int i = 0; i < n; ++i) {
    const double gamma = sys.sinr(i, res.p_w);
    res.mu1[i] = gamma / (gamma + 1.0);
    res.mu2[i] = std::log2(1.0 + gamma) - res.mu1[i] * std::log2(gamma);
  }
  return res;
}

PowerResult solve_optimal_power(const UplinkSystem& sys, const SolverParams& params,
                                const std::vector<double>& p_init_w) {
  params.validate();
  const int n = sys.size();
  PowerResult res;
  if (n == 0) {
    res.converged = true;  // nothing to allocate
    res.p_ul_w.assign(p_init_w.size(), 0.0);
    return res;
  }

  // Compact system-index powers from the full per-MD init vector.
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) {
    const int k = sys.md_ids()[i];
    const double p_floor = sys.p_max_w(i) * params.p_floor_scale;
    p[i] = std::clamp(p_init_w[k], p_floor, sys.p_max_w(i));
  }

  std::vector<double>& lambda = res.lambda;
  std::vector<double>& tau = res.tau;
  lambda.resize(n);
  tau.resize(n);
  res.mu1.resize(n);
  res.mu2.resize(n);

  std::vector<double> q(n), q_prop(n), p_lo(n), p_hi(n), weights(n), prox(n);
  double cur = sys.sum_ul_latency_s(p);
  const double tol_sq = params.outer_tol * params.outer_tol;

  // Damping weight of the proximal term, relative to the surrogate's own
  // scale. Grown when a proposal fails the sufficient-decrease test (the
  // surrogate under-curves there), shrunk after every accepted step.
  double theta = 1.0;
  constexpr double kThetaMin = 1e-6;
  constexpr double kThetaMax = 1e12;

  // Residual of Eq. 36/37 at powers pw against the current multipliers
  // (rho = lambda R - 1, kappa = tau R - B).
  auto residual_at = [&](const std::vector<double>& pw) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = sys.rate_bps(i, pw);
      const double rho = lambda[i] * r - 1.0;
      const double kappa = tau[i] * r - sys.input_bits(i);
      sum += rho * rho + kappa * kappa;
    }
    return sum;
  };

  const double trust_span = std::exp2(params.trust_delta_q);
  for (int t = 1; t <= params.max_outer; ++t) {
    res.outer_iterations = t;
    // Newton step on the affine residual families (Eq. 34/35): with R fixed
    // at the current powers, rho and kappa are affine in lambda and tau with
    // slope R, so the full step lands exactly on lambda = 1/R, tau = B/R.
    // Tighten the bound (mu per Eq. 39 equality) at the same point.
    for (int i = 0; i < n; ++i) {
      const double r = sys.rate_bps(i, p);
      lambda[i] = 1.0 / r;
      tau[i] = sys.input_bits(i) / r;
      const double gamma = sys.sinr(i, p);
      res.mu1[i] = gamma / (gamma + 1.0);
      res.mu2[i] = std::log2(1.0 + gamma) - res.mu1[i] * std::log2(gamma);
      q[i] = std::log2(p[i]);
      const double p_floor = sys.p_max_w(i) * params.p_floor_scale;
      p_lo[i] = std::max(p_floor, p[i] / trust_span);
      p_hi[i] = std::min(sys.p_max_w(i), p[i] * trust_span);
      weights[i] = lambda[i] * tau[i] * sys.bandwidth_hz() * res.mu1[i];
    }
    const double surr_cur = q8_objective(sys, lambda, tau, res.mu1, res.mu2, q);
    const double theta_in = theta;

    OuterTraceRow row;
    row.outer = t;

    // Damped proposal loop: minimize surrogate + theta-weighted proximal
    // term exactly over the trust box, accept if the true latency realizes
    // at least an eps fraction of the model's predicted decrease, otherwise
    // raise the damping and re-propose (Levenberg-Marquardt style).
    int attempts = 0;
    bool accepted = false;
    double pred0 = 0.0;
    while (attempts <= params.max_armijo) {
      for (int i = 0; i < n; ++i) prox[i] = theta * weights[i];
      const std::vector<double> p_prop = solve_q8_box(sys, weights, p, p_lo, p_hi, prox, q, params);
      double prox_term = 0.0;
      for (int i = 0; i < n; ++i) {
        q_prop[i] = std::log2(p_prop[i]);
        const double dq = q_prop[i] - q[i];
        prox_term += prox[i] * dq * dq;
      }
      // pred >= 0: the proposal minimizes the damped model, whose value at q
      // equals surr_cur. Because the bound is tight at q (equal gradients of
      // surrogate and true latency there) and the model is convex, pred ~ 0
      // at moderate damping certifies a KKT point within the trust region.
      const double pred =
          surr_cur - q8_objective(sys, lambda, tau, res.mu1, res.mu2, q_prop) - prox_term;
      if (attempts == 0) pred0 = pred;
      const double trial_lat = sys.sum_ul_latency_s(p_prop);
      ++attempts;
      if (trial_lat <= cur - params.eps * pred) {
        accepted = true;
        p = p_prop;
        cur = trial_lat;
        theta = std::max(theta * params.zeta, kThetaMin);
        break;
      }
      if (theta >= kThetaMax) break;
      theta = std::min(theta / (params.zeta * params.zeta), kThetaMax);
    }

    row.inner_iterations = attempts;
    row.step_exponent = attempts - 1;
    row.residual_sq = residual_at(p);
    row.sum_latency_s = cur;
    res.trace.push_back(row);

    if (!accepted) {
      // Even a maximally damped step yields no decrease: first-order
      // stationary to machine precision, or the model is inconsistent.
      res.converged = pred0 <= params.outer_tol * std::max(1.0, std::abs(cur));
      res.armijo_warning = !res.converged;
      break;
    }
    // Stationarity certificate: the undamped-entry model promises less than
    // outer_tol relative decrease (only trusted at mild damping), or the
    // movement residual (Eq. 36/37 at the new powers against the pre-move
    // multipliers, which vanishes exactly when the powers stop moving) is
    // below tolerance.
    if (theta_in <= 1.0 && pred0 <= params.outer_tol * std::max(1.0, std::abs(cur))) {
      res.converged = true;
      break;
    }
    if (row.residual_sq <= tol_sq) {
      res.converged = true;
      break;
    }
  }

  // Report multipliers per Eq. 34/35 and the bound tightened at the returned
  // powers (R-bar = R exactly); res.residual_sq is the Eq. 36/37 value there.
  res.residual_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = sys.rate_bps(i, p);
    lambda[i] = 1.0 / r;
    tau[i] = sys.input_bits(i) / r;
    const double gamma = sys.sinr(i, p);
    res.mu1[i] = gamma / (gamma + 1.0);
    res.mu2[i] = std::log2(1.0 + gamma) - res.mu1[i] * std::log2(gamma);
    const double rho = lambda[i] * r - 1.0;
    const double kappa = tau[i] * r - sys.input_bits(i);
    res.residual_sq += rho * rho + kappa * kappa;
  }
  res.p_ul_w.assign(p_init_w.size(), 0.0);
  for (int i = 0; i < n; ++i) res.p_ul_w[sys.md_ids()[i]] = p[i];
  return res;
}

KktReport kkt_residuals(const UplinkSystem& sys, const std::vector<double>& p_w,
                        const std::vector<double>& lambda, const std::vector<double>& tau,
                        const SolverParams& params) {
  const int n = sys.size();
  KktReport rep;
  rep.rho.resize(n);
  rep.kappa.resize(n);
  rep.stationarity.resize(n);
  rep.box_slack.resize(n);

  // Lagrangian value of the parametric problem at fixed multipliers.
  auto lagrangian = [&](const std::vector<double>& p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      v += tau[i] + lambda[i] * (sys.input_bits(i) - tau[i] * sys.rate_bps(i, p));
    }
    return v;
  };

  for (int i = 0; i < n; ++i) {
    const double r = sys.rate_bps(i, p_w);
    rep.rho[i] = std::abs(lambda[i] * r - 1.0);
    rep.kappa[i] = std::abs(tau[i] * r - sys.input_bits(i));
    rep.residual_sq += rep.rho[i] * rep.rho[i] + rep.kappa[i] * rep.kappa[i];

    const double p_floor = sys.p_max_w(i) * params.p_floor_scale;
    rep.box_slack[i] = std::min(p_w[i] - p_floor, sys.p_max_w(i) - p_w[i]);

    // Central-difference gradient of the Lagrangian w.r.t. P_i, projected on
    // the box: a bound can only be blocked in the outward direction.
    const double h = std::max(1e-8 * p_w[i], 1e-15);
    std::vector<double> plus = p_w, minus = p_w;
    plus[i] += h;
    minus[i] -= h;
    const double grad = (lagrangian(plus) - lagrangian(minus)) / (2.0 * h);
    const bool at_upper = sys.p_max_w(i) - p_w[i] <= 1e-12 * sys.p_max_w(i);
    const bool at_lower = p_w[i] - p_floor <= 1e-12 * sys.p_max_w(i);
    if (at_upper) {
      rep.stationarity[i] = std::max(0.0, grad);
    } else if (at_lower) {
      rep.stationarity[i] = std::max(0.0, -grad);
    } else {
      rep.stationarity[i] = std::abs(grad);
    }
  }
  return rep;
}

std::string trace_csv(const std::vector<OuterTraceRow>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "outer,inner_iterations,step_exponent,residual_sq,sum_latency_s\n";
  for (const auto& row : trace) {
    os << row.outer << ',' << row.inner_iterations << ',' << row.step_exponent << ','
       << row.residual_sq << ',' << row.sum_latency_s << '\n';
  }
  return os.str();
}

}  // namespace dudemec
