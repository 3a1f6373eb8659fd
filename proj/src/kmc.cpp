#include "fa1f/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fa1f/errors.hpp"
#include "fa1f/parallel.hpp"

namespace fa1f {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace

Trajectory::Trajectory(const Volume& volume, double q, Configuration initial, Rng rng)
    : volume_(volume), q_(q), current_(std::move(initial)), rng_(std::move(rng)), empty_draw_(q) {
  if (current_.size() != volume_.size()) throw DomainError("initial configuration does not match the volume");
  const int n = volume_.size();
  empty_neighbours_.assign(static_cast<std::size_t>(n), 0);
  position_.assign(static_cast<std::size_t>(n), -1);
  for (int x = 0; x < n; ++x) {
    for (int y : volume_.neighbors(x)) empty_neighbours_[x] += current_.empty_at(y);
    if (empty_neighbours_[x] > 0) add_active(x);
  }
}

void Trajectory::add_active(int site) {
  position_[site] = static_cast<int>(active_.size());
  active_.push_back(site);
}

void Trajectory::remove_active(int site) {
  const int pos = position_[site];
  const int last = active_.back();
  active_[pos] = last;
  position_[last] = pos;
  active_.pop_back();
  position_[site] = -1;
}

void Trajectory::apply_flip(int site) {
  current_.toggle(site);
  const int delta = current_.empty_at(site) ? 1 : -1;
  for (int y : volume_.neighbors(site)) {
    const int before = empty_neighbours_[y];
    empty_neighbours_[y] = before + delta;
    if (before == 0) add_active(y);
    else if (empty_neighbours_[y] == 0) remove_active(y);
  }
}

int Trajectory::step() {
  if (active_.empty()) return -1;
  clock_ += exponential(rng_, static_cast<double>(active_.size()));
  const int site = active_[uniform_index(rng_, active_.size())];
  const bool empty = empty_draw_(rng_);
  if (empty != current_.empty_at(site)) apply_flip(site);
  ++events_;
  return site;
}

void Trajectory::advance_to(double t) {
  while (!active_.empty()) {
    const double dt = exponential(rng_, static_cast<double>(active_.size()));
    if (clock_ + dt > t) {
      clock_ = t;
      return;
    }
    clock_ += dt;
    const int site = active_[uniform_index(rng_, active_.size())];
    const bool empty = empty_draw_(rng_);
    if (empty != current_.empty_at(site)) apply_flip(site);
    ++events_;
  }
}

bool Trajectory::active_set_consistent() const {
  std::size_t count = 0;
  for (int x = 0; x < volume_.size(); ++x) {
    const bool c = constraint(volume_, current_, x);
    if (c != active(x)) return false;
    count += c;
  }
  return count == active_.size();
}

Tau0Sample simulate_tau0(const Volume& volume, double q, Rng& rng, double t_max, bool conditioned) {
  if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0,1]");
  Configuration eta = conditioned ? sample_config_conditioned(volume, q, rng) : sample_config(volume, q, rng);
  const int origin = volume.origin();
  if (eta.empty_at(origin)) return {0.0, false, false};
  Trajectory traj(volume, q, std::move(eta), Rng(rng()));
  while (true) {
    const int site = traj.step();
    if (site < 0) return {t_max, true, true};
    if (traj.clock() > t_max) return {t_max, true, false};
    if (site == origin && traj.current().empty_at(origin)) return {traj.clock(), false, false};
  }
}

Tau0Summary sample_tau0(const Volume& volume, double q, std::size_t runs, double t_max, bool conditioned,
                        const McOptions& opts) {
  Tau0Summary s;
  s.runs = runs;
  s.samples.resize(runs);
  parallel_for(runs, opts.threads, [&](std::size_t i) {
    Rng rng = make_stream(opts.seed, i);
    s.samples[i] = simulate_tau0(volume, q, rng, t_max, conditioned);
  });
  std::vector<double> times;
  for (const auto& t : s.samples) {
    if (t.frozen) ++s.frozen;
    else if (t.censored) ++s.censored;
    else times.push_back(t.time);
  }
  if (times.size() >= 2) s.mean = mean_of(times);
  else if (times.size() == 1) s.mean = {times[0], 0.0, 1};
  return s;
}

PersistenceCurve estimate_persistence(const Volume& volume, double q, std::span<const double> times,
                                      std::size_t n_traj, bool conditioned, const McOptions& opts) {
  if (times.empty()) throw DomainError("persistence grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw DomainError("persistence grid must be nonnegative and increasing");
    }
  }
  if (n_traj < 100) throw DomainError("persistence needs at least 100 trajectories");
  const double t_max = std::max(times.back(), 1e-12);
  std::vector<Tau0Sample> samples(n_traj);
  parallel_for(n_traj, opts.threads, [&](std::size_t i) {
    Rng rng = make_stream(opts.seed, i);
    samples[i] = simulate_tau0(volume, q, rng, t_max, conditioned);
  });
  PersistenceCurve c;
  c.times.assign(times.begin(), times.end());
  c.n_traj = n_traj;
  const double n = static_cast<double>(n_traj);
  for (const auto& s : samples) c.frozen += s.frozen;
  for (double t : times) {
    std::size_t alive = 0;
    for (const auto& s : samples) alive += s.censored || s.time > t;
    const double f = static_cast<double>(alive) / n;
    c.survival.push_back(f);
    c.error.push_back(std::sqrt(f * (1.0 - f) / n));
  }
  return c;
}

RateFit persistence_rate_fit(const PersistenceCurve& curve) {
  std::vector<double> t, y, w;
  const double n = static_cast<double>(curve.n_traj);
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    const double f = curve.survival[i];
    if (f > 0.01 && f < 0.9) {
      t.push_back(curve.times[i]);
      y.push_back(std::log(f));
      w.push_back(n * f / (1.0 - f));
    }
  }
  if (t.size() < 5) throw NumericalError("persistence fit needs at least five grid points with 0.01 < F < 0.9");
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) tm += w[i] * t[i], ym += w[i] * y[i];
  tm /= sw;
  ym /= sw;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += w[i] * (t[i] - tm) * (t[i] - tm);
    sty += w[i] * (t[i] - tm) * (y[i] - ym);
    syy += w[i] * (y[i] - ym) * (y[i] - ym);
  }
  RateFit fit;
  fit.points = t.size();
  const double slope = sty / stt;
  fit.rate = -slope;
  fit.intercept = ym - slope * tm;
  double rss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (fit.intercept + slope * t[i]);
    rss += w[i] * r * r;
  }
  fit.rate_err = std::sqrt(rss / (static_cast<double>(t.size()) - 2.0) / stt);
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  return fit;
}

int default_torus_side(double q, double q0, int d) { return std::max(4 * critical_length(q, q0, d), 8); }

double default_t_max(double q, int d) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  if (d == 1) return 50.0 / (q * q * q);
  if (d == 2) return 50.0 / (q * q) * std::log(1.0 / q);
  return 50.0 / (q * q);
}

}  // namespace fa1f
