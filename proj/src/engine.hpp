#ifndef HYBRIDSW_SRC_ENGINE_HPP_
#define HYBRIDSW_SRC_ENGINE_HPP_

// Shared integrator for one or several systems driven by the same Brownian
// increments and the same Poisson candidates and marks.
//
// Observer hooks (all receive the systems by const span):
//   on_step(t, h, dW, systems)       after an Euler step ends at t
//   on_candidate(t, z, systems, from) after theta has been applied at t
//   on_node(t, systems)              node at t is final (t = 0 included)
//   on_checkpoint(k, systems)        checkpoint k coincides with the node

#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/error.hpp"
#include "hybridsw/model.hpp"
#include "hybridsw/rng.hpp"
#include "hybridsw/simulate.hpp"
#include "hybridsw/threshold.hpp"

namespace hybridsw::detail {

struct EngineSystem {
  EngineSystem(const HybridModel& m, const Eigen::VectorXd& x0, int i0,
               double bound)
      : model(&m),
        x(x0),
        regime(i0),
        drift(m.dim()),
        sigma(m.dim(), m.dim()),
        rates(Eigen::MatrixXd::Zero(m.regimes(), m.regimes())),
        layout(rates, bound) {}

  const HybridModel* model;
  Eigen::VectorXd x;
  int regime;
  Eigen::VectorXd drift;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd rates;
  GammaLayout layout;
};

struct EngineConfig {
  double horizon;
  double dt;
  double bound;
  std::uint64_t seed;
  std::uint64_t stream;
  const std::vector<double>* checkpoints;
  const char* operation;
};

/// Rate bound used for the mark space. A zero bound would give an empty mark
/// space, so it is replaced by 1 (every interval is then empty). The small
/// pad absorbs rounding in rates evaluated from smooth specs.
inline double engine_bound(double raw) {
  return raw > 0.0 ? raw * (1.0 + 1e-12) : 1.0;
}

template <class Observer>
void drive(std::span<EngineSystem> systems, const EngineConfig& cfg,
           Observer& obs) {
  const HybridModel& lead = *systems.front().model;
  const int d = lead.dim();
  const int n = lead.regimes();
  const double kappa = static_cast<double>((2 * n - 1) * n) * cfg.bound;

  CounterRng brownian(cfg.seed, cfg.stream, kBrownianSubstream);
  CounterRng poisson(cfg.seed, cfg.stream, kPoissonSubstream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> gap(kappa);
  std::uniform_real_distribution<double> mark(0.0, kappa);

  const std::vector<double>& checkpoints = *cfg.checkpoints;
  const double tol = 1e-9 * cfg.dt;
  Eigen::VectorXd dW(d);
  std::vector<int> from(systems.size());

  double t = 0.0;
  std::int64_t k = 1;
  std::size_t next_cp = 0;
  double next_candidate = gap(poisson);

  obs.on_node(t, std::span<const EngineSystem>(systems));
  while (t < cfg.horizon) {
    double target = std::min(static_cast<double>(k) * cfg.dt, cfg.horizon);
    target = std::min(target, next_candidate);
    if (next_cp < checkpoints.size()) {
      target = std::min(target, checkpoints[next_cp]);
    }
    const double h = target - t;
    const double root_h = std::sqrt(h);
    for (int c = 0; c < d; ++c) dW(c) = root_h * normal(brownian);
    for (EngineSystem& s : systems) {
      drift_into(*s.model, s.x, s.regime, s.drift);
      diffusion_into(*s.model, s.x, s.regime, s.sigma);
      s.x += h * s.drift;
      s.x.noalias() += s.sigma * dW;
      if (!s.x.allFinite()) {
        throw Error(ErrorKind::NonFiniteState, "simulate", cfg.operation,
                    "state became non-finite at t=" + std::to_string(target));
      }
    }
    t = target;
    obs.on_step(t, h, dW, std::span<const EngineSystem>(systems));

    while (next_candidate <= t) {
      const double z = mark(poisson);
      for (std::size_t s = 0; s < systems.size(); ++s) {
        EngineSystem& sys = systems[s];
        evaluate_into(sys.model->switching(), sys.x, sys.rates);
        sys.layout.assign(sys.rates, cfg.bound);
        from[s] = sys.regime;
        sys.regime += theta(sys.layout, sys.regime, z);
      }
      obs.on_candidate(t, z, std::span<const EngineSystem>(systems),
                       std::span<const int>(from));
      next_candidate += gap(poisson);
    }
    while (static_cast<double>(k) * cfg.dt <= t + tol) ++k;
    obs.on_node(t, std::span<const EngineSystem>(systems));
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= t + tol) {
      obs.on_checkpoint(next_cp, std::span<const EngineSystem>(systems));
      ++next_cp;
    }
  }
}

/// Records system `index` of a drive() run into a Trajectory.
struct PathRecorder {
  PathRecorder(Trajectory& out, RecordMode mode, std::size_t index)
      : traj(out), mode(mode), index(index) {}

  void on_step(double, double, const Eigen::VectorXd& dW,
               std::span<const EngineSystem>) {
    if (mode == RecordMode::kFullPath) traj.increments.push_back(dW);
  }

  void on_candidate(double t, double z, std::span<const EngineSystem> systems,
                    std::span<const int> from) {
    ++traj.candidate_count;
    const int before = from[index];
    const int after = systems[index].regime;
    if (after != before) ++traj.switch_count;
    if (mode == RecordMode::kTerminal) return;
    traj.candidates.push_back(Candidate{t, z});
    if (after != before) {
      traj.switches.push_back(SwitchEvent{t, before, after, z});
    }
  }

  void on_node(double t, std::span<const EngineSystem> systems) {
    const EngineSystem& s = systems[index];
    traj.sup_norm = std::max(traj.sup_norm, s.x.norm());
    traj.terminal_state = s.x;
    traj.terminal_regime = s.regime;
    if (mode == RecordMode::kFullPath) {
      traj.times.push_back(t);
      traj.states.push_back(s.x);
      traj.regimes.push_back(s.regime);
    }
  }

  void on_checkpoint(std::size_t, std::span<const EngineSystem> systems) {
    traj.checkpoint_states.push_back(systems[index].x);
  }

  void reserve(const SimParams& sp) {
    if (mode != RecordMode::kFullPath) return;
    const auto nodes = static_cast<std::size_t>(std::ceil(sp.T / sp.dt)) + 1;
    traj.times.reserve(nodes);
    traj.states.reserve(nodes);
    traj.regimes.reserve(nodes);
    traj.increments.reserve(nodes);
  }

  Trajectory& traj;
  RecordMode mode;
  std::size_t index;
};

/// Runs fn(i) for i in [0, count) on up to `threads` threads. Work is handed
/// out by index, so results stored by index are scheduling-independent. The
/// exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const int workers = std::max(1, std::min(threads, count));
  const auto work = [&](int offset) {
    for (int i = offset; i < count; i += workers) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hybridsw::detail

#endif  // HYBRIDSW_SRC_ENGINE_HPP_
