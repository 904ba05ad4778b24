#pragma once

// Runtime monitors. Each monitor reduces a stream of samples to pass/fail,
// worst margin (negative means violated) and the time of the worst sample.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gpid::sim {

struct MonitorResult {
  std::string name;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double t_worst = 0.0;
  long samples = 0;
  std::string detail;
};

/// Tracks min(margin) over samples with t >= from.
class MarginMonitor {
 public:
  MarginMonitor() = default;
  MarginMonitor(std::string name, double from = -std::numeric_limits<double>::infinity())
      : from_(from) {
    r_.name = std::move(name);
  }

  void sample(double t, double margin) {
    if (t < from_ - 1e-12) return;
    ++r_.samples;
    if (r_.samples == 1 || !(margin >= r_.worst_margin)) {  // NaN counts as worst
      r_.worst_margin = margin;
      r_.t_worst = t;
    }
    if (!(margin >= 0.0)) r_.pass = false;
  }

  MonitorResult result() const {
    MonitorResult r = r_;
    if (r.samples == 0) {
      r.pass = false;
      r.detail = "no samples in the monitored window";
    }
    return r;
  }
  void set_detail(std::string d) { r_.detail = std::move(d); }

 private:
  double from_ = -std::numeric_limits<double>::infinity();
  MonitorResult r_;
};

/// Least-squares slope of log(v) against t.
inline double log_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(v[i] > 0.0)) continue;
    const double y = std::log(v[i]);
    n += 1;
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double den = n * stt - st * st;
  if (n < 3 || !(std::abs(den) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (n * sty - st * sy) / den;
}

/// Exponential tail: fit log(metric) over the final fraction of the run; pass iff the slope is negative.
inline MonitorResult exponential_tail(const std::vector<double>& t, const std::vector<double>& metric,
                                      double fraction, double floor) {
  MonitorResult r;
  r.name = "exponential_tail";
  if (t.empty()) {
    r.pass = false;
    r.detail = "no samples";
    return r;
  }
  const double t0 = t.back() - fraction * (t.back() - t.front());
  std::vector<double> tt, vv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && metric[i] > floor) {
      tt.push_back(t[i]);
      vv.push_back(metric[i]);
    }
  }
  const double s = log_slope(tt, vv);
  r.samples = static_cast<long>(tt.size());
  r.worst_margin = -s;
  r.t_worst = t0;
  r.pass = std::isfinite(s) && s < 0.0;
  r.detail = "log-slope " + std::to_string(s) + " 1/s over " + std::to_string(tt.size()) + " samples";
  return r;
}

/// W non-increasing (up to tol) at consecutive control ticks whose start value lies outside W > residual.
inline MonitorResult lyapunov_monotone(const std::vector<double>& t, const std::vector<double>& W, double residual,
                                       double min_fraction, double rel_tol, double q_min_eig) {
  MonitorResult r;
  r.name = "lyapunov_W";
  long considered = 0, ok = 0;
  double worst = std::numeric_limits<double>::infinity();
  double t_worst = 0.0;
  for (std::size_t i = 1; i < W.size(); ++i) {
    if (!(W[i - 1] > residual)) continue;
    ++considered;
    const double inc = W[i] - W[i - 1];
    const double tol = rel_tol * std::abs(W[i - 1]);
    if (inc <= tol) ++ok;
    const double m = tol - inc;
    if (m < worst) {
      worst = m;
      t_worst = t[i];
    }
  }
  const double frac = considered ? static_cast<double>(ok) / static_cast<double>(considered) : 1.0;
  r.samples = considered;
  r.worst_margin = frac - min_fraction;
  r.t_worst = t_worst;
  r.pass = frac >= min_fraction;
  r.detail = "non-increasing at " + std::to_string(ok) + "/" + std::to_string(considered) +
             " ticks outside W <= " + std::to_string(residual) + "; lambda_min(Q) = " + std::to_string(q_min_eig);
  return r;
}

}  // namespace gpid::sim
