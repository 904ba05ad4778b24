#pragma once

// Scenario execution: RK4 plant at h_plant, controller and integrator at
// h_control with zero-order hold, monitors at every control tick.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpid/sim/models.hpp"
#include "gpid/sim/rk4.hpp"
#include "gpid/sim/trace.hpp"

namespace gpid::sim {

struct RunOptions {
  long decimate = 1;        ///< keep every n-th plant step in the trace
  bool record_trace = true;
};

struct HardFailure {
  long row = 0;  ///< plant step index at which the run aborted
  double t = 0.0;
  std::string message;
};

struct RunResult {
  std::string scenario, system;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<MonitorResult> monitors;
  std::optional<HardFailure> failure;
  std::string error_metric_name;
  double terminal_error = std::numeric_limits<double>::quiet_NaN();
  long saturated_ticks = 0;
  long renormalizations = 0;
  GainSet gains;
  std::vector<std::string> warnings;
  VecX final_state, final_integrator;

  bool all_pass() const {
    if (failure) return false;
    for (const auto& m : monitors) {
      if (!m.pass) return false;
    }
    return true;
  }
  int exit_code() const { return all_pass() ? 0 : 3; }
};

inline RunResult run_model(const Model& model, const SimConfig& cfg, const RunOptions& opt = {}) {
  if (opt.decimate < 1) throw ScenarioError("decimate must be >= 1");
  RunResult res;
  res.gains = model.gains();
  res.error_metric_name = model.error_metric_name();
  res.columns = {"t_s"};
  for (const auto& c : model.columns()) res.columns.push_back(c);

  const MonitorConfig& mc = model.monitor_config();
  std::optional<MarginMonitor> band, vel;
  if (mc.band_threshold) band.emplace("error_band", mc.band_from);
  if (mc.velocity_limit) vel.emplace("velocity_bound");
  std::map<std::string, MarginMonitor> inv;
  std::vector<double> tick_t, tick_err, tick_W;

  VecX x = model.initial_state();
  VecX xi = model.initial_integrator();
  const auto blocks = model.rotation_blocks();
  const double hc = cfg.h_control, hp = cfg.h_plant;

  auto observe = [&](double t, const VecX& xs, const VecX& xis) {
    const double e = model.error_metric(t, xs);
    tick_t.push_back(t);
    tick_err.push_back(e);
    if (band) band->sample(t, *mc.band_threshold - e);
    if (vel) vel->sample(t, *mc.velocity_limit - model.velocity_magnitude(xs));
    std::vector<Invariant> iv;
    model.invariants(t, xs, iv);
    for (const auto& i : iv) {
      auto it = inv.try_emplace(i.name, "invariant:" + i.name).first;
      it->second.sample(t, i.tol - i.residual);
    }
    if (mc.lyap_residual) {
      const auto w = model.lyapunov(t, xs, xis);
      tick_W.push_back(w ? w->W : std::numeric_limits<double>::quiet_NaN());
    }
  };

  ControlSample c;
  long step = 0;
  double t = 0.0;
  try {
    for (long k = 0; k < cfg.control_ticks; ++k) {
      t = static_cast<double>(k) * hc;
      c = model.control(t, x, xi);
      if (!c.u.allFinite()) throw NonFiniteError("non-finite control at t = " + std::to_string(t));
      observe(t, x, xi);

      VecX xi_next = xi;
      if (c.saturated) {
        ++res.saturated_ticks;
      } else {
        const VecX xs = x;
        const double tk = t;
        xi_next = rk4_step([&](double, const VecX& z) { return model.integrator_rate(tk, xs, z); }, t, xi, hc);
      }

      for (long j = 0; j < cfg.steps_per_control; ++j, ++step) {
        const double tp = t + static_cast<double>(j) * hp;
        if (opt.record_trace && step % opt.decimate == 0) {
          std::vector<double> row{tp};
          model.trace_row(tp, x, xi, c, row);
          res.rows.push_back(std::move(row));
        }
        x = rk4_step([&](double ts, const VecX& z) { return model.plant_rhs(ts, z, c.u); }, tp, x, hp);
        res.renormalizations += renormalize(x, blocks, cfg.renorm_threshold);
      }
      xi = xi_next;
    }
    t = cfg.t_final;
    const ControlSample last = model.control(t, x, xi);
    observe(t, x, xi);
    if (opt.record_trace) {
      std::vector<double> row{t};
      model.trace_row(t, x, xi, last, row);
      res.rows.push_back(std::move(row));
    }
    res.terminal_error = model.error_metric(t, x);
  } catch (const Error& e) {
    res.failure = HardFailure{step, static_cast<double>(step) * hp, e.what()};
  }
  res.final_state = x;
  res.final_integrator = xi;

  if (res.failure) {
    MonitorResult f;
    f.name = "finite_run";
    f.pass = false;
    f.worst_margin = -1.0;
    f.t_worst = res.failure->t;
    f.detail = "aborted at plant step " + std::to_string(res.failure->row) + ": " + res.failure->message;
    res.monitors.push_back(f);
  }
  if (band) {
    band->set_detail("threshold " + format_double(*mc.band_threshold) + " on " + res.error_metric_name +
                     " from t = " + format_double(mc.band_from) + " s");
    res.monitors.push_back(band->result());
  }
  if (vel) {
    vel->set_detail("limit " + format_double(*mc.velocity_limit));
    res.monitors.push_back(vel->result());
  }
  for (auto& [name, m] : inv) res.monitors.push_back(m.result());
  if (mc.expect_saturation) {
    MonitorResult s;
    s.name = "saturation_engaged";
    s.pass = res.saturated_ticks > 0;
    s.worst_margin = static_cast<double>(res.saturated_ticks);
    s.samples = static_cast<long>(tick_t.size());
    s.detail = std::to_string(res.saturated_ticks) + " saturated control ticks (integrator frozen)";
    res.monitors.push_back(s);
  }
  if (mc.tail_fraction && !res.failure) {
    res.monitors.push_back(exponential_tail(tick_t, tick_err, *mc.tail_fraction, mc.tail_floor));
  }
  if (mc.lyap_residual) {
    const double q = res.gains.has_certificate_data() ? lyapunov_Q_min_eig(res.gains)
                                                      : std::numeric_limits<double>::quiet_NaN();
    MonitorResult l = lyapunov_monotone(tick_t, tick_W, *mc.lyap_residual, mc.lyap_min_fraction, mc.lyap_rel_tol, q);
    if (res.failure) l.pass = false;
    res.monitors.push_back(l);
  }
  return res;
}

inline RunResult run_scenario(Scenario& sc, const RunOptions& opt = {}) {
  const auto model = make_model(sc);
  RunResult r = run_model(*model, sc.sim, opt);
  r.scenario = sc.name;
  r.system = sc.system;
  r.warnings = sc.warnings;
  return r;
}

inline nlohmann::json report_json(const RunResult& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); };
  json j;
  j["scenario"] = r.scenario;
  j["system"] = r.system;
  j["pass"] = r.all_pass();
  j["exit_code"] = r.exit_code();
  j["terminal_error"] = {{"metric", r.error_metric_name}, {"value", num(r.terminal_error)}};
  j["saturated_ticks"] = r.saturated_ticks;
  j["renormalizations"] = r.renormalizations;
  j["gains"] = {{"kp", r.gains.kp},          {"kd", r.gains.kd},        {"kI", r.gains.kI},
                {"kc", r.gains.kc},          {"kappa", num(r.gains.kappa)}, {"mu", num(r.gains.mu)},
                {"lambda", num(r.gains.lambda)}, {"verified", r.gains.verified}};
  if (r.failure) {
    j["hard_failure"] = {{"row", r.failure->row}, {"t_s", r.failure->t}, {"message", r.failure->message}};
  } else {
    j["hard_failure"] = nullptr;
  }
  j["warnings"] = r.warnings;
  json ms = json::array();
  for (const auto& m : r.monitors) {
    ms.push_back({{"name", m.name},
                  {"pass", m.pass},
                  {"worst_margin", num(m.worst_margin)},
                  {"t_worst_s", m.t_worst},
                  {"samples", m.samples},
                  {"detail", m.detail}});
  }
  j["monitors"] = ms;
  return j;
}

}  // namespace gpid::sim
