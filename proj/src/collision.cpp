#include "vcsim/collision.hpp"

#include <cmath>

#include "vcsim/error.hpp"

namespace vcsim {

BeaconWindow::BeaconWindow(double timeout) : timeout_(timeout) {
  if (!(timeout > 0.0)) throw ConfigError("beacon window timeout must be positive");
}

void BeaconWindow::prune(double t_now) {
  std::erase_if(entries_, [&](const auto& kv) { return t_now - kv.second.t_gen > timeout_; });
}

void BeaconWindow::insert(const Beacon& b) { entries_.insert_or_assign(b.pseudonym, b); }

namespace {

void check_finite(const Beacon& b) {
  if (!finite(b.x0) || !finite(b.v) || !std::isfinite(b.t_gen)) {
    throw DomainError("beacon from '" + b.pseudonym + "' has non-finite fields");
  }
}

}  // namespace

CpaResult cpa_pair(const Beacon& a, const Beacon& b) {
  check_finite(a);
  check_finite(b);
  const Vec2 dx = a.x0 - b.x0;
  const Vec2 dv = a.v - b.v;
  const double vv = norm2(dv);
  if (vv == 0.0) return {CpaKind::parallel, 0.0, norm(dx)};
  const double t_star = -dot(dx, dv) / vv;
  if (t_star < 0.0) return {CpaKind::diverging, t_star, norm(dx)};
  // sqrt(D(t*)) taken as |dx + dv t*|: same value, without the cancellation
  // the expanded quadratic suffers near a hit.
  return {CpaKind::approaching, t_star, norm(dx + dv * t_star)};
}

void DetectorParams::validate() const {
  if (!(d_min > 0.0)) throw ConfigError("d_min must be positive");
  if (!(timeout > 0.0)) throw ConfigError("detector timeout must be positive");
  if (!(cost_base >= 0.0) || !(cost_per_neighbor >= 0.0)) throw ConfigError("costs must be non-negative");
  if (!(seconds_per_cost >= 0.0)) throw ConfigError("seconds_per_cost must be non-negative");
}

std::vector<CollisionPrediction> detect(const Beacon& current, BeaconWindow& window,
                                        const DetectorParams& params, double t_now) {
  check_finite(current);
  window.prune(t_now);
  std::vector<CollisionPrediction> found;
  for (const auto& [pseudonym, b] : window.entries()) {
    if (pseudonym == current.pseudonym) continue;
    const CpaResult r = cpa_pair(current, b);
    if (r.kind == CpaKind::diverging) continue;
    if (r.d_star <= params.d_min) found.push_back({pseudonym, r.t_star, r.d_star});
  }
  window.insert(current);
  return found;
}

double processing_cost(std::size_t window_size, const DetectorParams& params) {
  return params.cost_base + params.cost_per_neighbor * static_cast<double>(window_size);
}

Detector::Detector(DetectorParams params) : params_(params), window_(params.timeout) { params_.validate(); }

Detector::Outcome Detector::process(const Beacon& current, double t_now) {
  Outcome out;
  window_.prune(t_now);
  out.window_size = window_.size() - window_.entries().count(current.pseudonym);
  out.predictions = detect(current, window_, params_, t_now);
  out.cost = processing_cost(out.window_size, params_);
  out.service_time = out.cost * params_.seconds_per_cost;

  out.alerts = out.predictions.size();
  if (auto it = pending_alerts_.find(current.pseudonym); it != pending_alerts_.end()) {
    out.alerts += it->second;
    pending_alerts_.erase(it);
  }
  for (const auto& p : out.predictions) ++pending_alerts_[p.other];

  watched_.insert(current.pseudonym);
  ++processed_;
  total_cost_ += out.cost;
  return out;
}

}  // namespace vcsim
