#pragma once

// Adapter between a benchmark system and the generic runner.

#include <optional>
#include <string>
#include <vector>

#include "gpid/gain_bounds.hpp"
#include "gpid/lyapunov.hpp"
#include "gpid/sim/monitors.hpp"
#include "gpid/sim/scenario.hpp"

namespace gpid::sim {

struct ControlSample {
  VecX u;                  ///< plant input, held for one control interval
  bool saturated = false;  ///< freezes the integrator for the interval
  VecX aux;                ///< extra trace values (motor speeds)
};

struct Invariant {
  std::string name;
  double residual;
  double tol;
};

struct MonitorConfig {
  std::optional<double> band_threshold;
  double band_from = 0.0;
  std::optional<double> velocity_limit;
  bool expect_saturation = false;
  std::optional<double> tail_fraction;
  double tail_floor = 1e-14;
  std::optional<double> lyap_residual;
  double lyap_min_fraction = 0.99;
  double lyap_rel_tol = 1e-12;
  double invariant_tol = 1e-8;
};

inline double deg(double d) { return d * kPi / 180.0; }

class Model {
 public:
  virtual ~Model() = default;

  virtual VecX initial_state() const = 0;
  virtual VecX initial_integrator() const = 0;
  virtual std::vector<Eigen::Index> rotation_blocks() const { return {}; }

  /// Controller evaluation at a control tick (nominal parameters).
  virtual ControlSample control(double t, const VecX& x, const VecX& xi) const = 0;
  /// Integrator rate with the plant state frozen at the tick.
  virtual VecX integrator_rate(double t, const VecX& x, const VecX& xi) const = 0;
  /// Plant derivative (true parameters, disturbances included).
  virtual VecX plant_rhs(double t, const VecX& x, const VecX& u) const = 0;

  virtual std::vector<std::string> columns() const = 0;
  virtual void trace_row(double t, const VecX& x, const VecX& xi, const ControlSample& c,
                         std::vector<double>& row) const = 0;

  virtual std::string error_metric_name() const = 0;
  virtual double error_metric(double t, const VecX& x) const = 0;
  /// Quantity checked by the velocity-bound monitor.
  virtual double velocity_magnitude(const VecX& /*x*/) const { return 0.0; }

  virtual void invariants(double /*t*/, const VecX& /*x*/, std::vector<Invariant>& /*out*/) const {}
  virtual std::optional<LyapunovSample> lyapunov(double /*t*/, const VecX& /*x*/, const VecX& /*xi*/) const {
    return std::nullopt;
  }
  /// Error potential over the operating region, for mu/lambda estimation.
  virtual std::optional<MorseProbe> morse_probe() const { return std::nullopt; }

  const GainSet& gains() const { return gains_; }
  const MonitorConfig& monitor_config() const { return monitors_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 protected:
  /// Reads gains; alias names map onto kc. mu/lambda/kappa may be "auto".
  void parse_gains(const Reader& g, const std::vector<std::string>& kc_names = {"kc"}) {
    gains_.kp = g.num("kp");
    gains_.kd = g.num("kd");
    gains_.kI = g.num("kI");
    for (const auto& n : kc_names) {
      if (g.has(n)) gains_.kc = g.num(n);
    }
    mu_auto_ = g.has("mu") && !g.num_or_auto("mu");
    lambda_auto_ = g.has("lambda") && !g.num_or_auto("lambda");
    kappa_auto_ = g.has("kappa") && !g.num_or_auto("kappa");
    if (auto v = g.num_or_auto("mu")) gains_.mu = *v;
    if (auto v = g.num_or_auto("lambda")) gains_.lambda = *v;
    if (auto v = g.num_or_auto("kappa")) gains_.kappa = *v;
    gains_.verified = g.flag("verified", false);
  }

  /// Resolves "auto" certificate entries and validates the gain set.
  void finalize_gains() {
    if (mu_auto_ || lambda_auto_) {
      const auto probe = morse_probe();
      if (!probe) throw ScenarioError("gains: mu/lambda 'auto' is not available for this system");
      const MuLambda ml = estimate_mu_lambda(*probe);
      if (mu_auto_) gains_.mu = ml.mu;
      if (lambda_auto_) gains_.lambda = ml.lambda;
    }
    if (kappa_auto_) {
      if (!std::isfinite(gains_.mu)) throw ScenarioError("gains: kappa 'auto' needs mu");
      gains_.kappa = 1.0 / gains_.mu;
    }
    try {
      gains_.validate();
      if (gains_.verified) {
        if (!gains_.has_certificate_data()) throw InvalidArgumentError("verified gains need kappa, mu and lambda");
        const GainVerdict v = verify_gains(gains_);
        if (!v.ok()) {
          throw InvalidArgumentError("gains marked verified fail the bounds (kI_max = " +
                                     std::to_string(v.bounds.kI_max) + ", kp_min = " +
                                     std::to_string(v.bounds.kp_min) + ")");
        }
      }
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(std::string("gains: ") + e.what());
    }
  }

  void parse_monitors(const Reader& m) {
    if (auto b = m.child_opt("error_band")) {
      monitors_.band_threshold = b->num("threshold");
      monitors_.band_from = b->num("from_s", 0.0);
    }
    if (auto v = m.child_opt("velocity_bound")) monitors_.velocity_limit = v->num("limit");
    monitors_.expect_saturation = m.flag("expect_saturation", false);
    if (auto e = m.child_opt("exponential_tail")) {
      monitors_.tail_fraction = e->num("fraction", 0.2);
      monitors_.tail_floor = e->num("floor", monitors_.tail_floor);
    }
    if (auto l = m.child_opt("lyapunov")) {
      monitors_.lyap_residual = l->num("residual_W");
      monitors_.lyap_min_fraction = l->num("min_fraction", monitors_.lyap_min_fraction);
      monitors_.lyap_rel_tol = l->num("rel_tol", monitors_.lyap_rel_tol);
    }
    monitors_.invariant_tol = m.num("invariant_tol", monitors_.invariant_tol);
  }

  void warn(std::string w) { warnings_.push_back(std::move(w)); }

  GainSet gains_;
  MonitorConfig monitors_;
  std::vector<std::string> warnings_;

 private:
  bool mu_auto_ = false, lambda_auto_ = false, kappa_auto_ = false;
};

/// Multiplicative mismatch factor for one parameter: mismatch.<key>, default def.
inline double factor(const std::optional<Reader>& mismatch, const std::string& key, double def) {
  return mismatch ? mismatch->num(key, def) : def;
}

}  // namespace gpid::sim
