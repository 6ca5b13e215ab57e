// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Hypergrid environment implementation.

#include "ftb/hypergrid.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace ftb {

namespace {

void check_coords(const HypergridEnv& env, std::span<const int> coords, const char* where) {
  if (static_cast<int>(coords.size()) != env.d()) {
    throw domain_error(std::string(where) + ": expected " + std::to_string(env.d()) +
                       " coordinates, got " + std::to_string(coords.size()));
  }
  for (int c : coords) {
    if (c < 0 || c >= env.h()) {
      throw domain_error(std::string(where) + ": coordinate " + std::to_string(c) +
                         " outside [0, " + std::to_string(env.h() - 1) + "]");
    }
  }
}

void check_enumerable(std::int64_t n, const char* where) {
  if (n > kMaxEnumerable) {
    throw domain_error(std::string(where) + ": state space size " + std::to_string(n) +
                       " exceeds the enumeration cap " + std::to_string(kMaxEnumerable));
  }
}

}  // namespace

std::vector<std::vector<std::int64_t>> states_by_coord_sum(const HypergridEnv& env) {
  check_enumerable(env.n_states(), "states_by_coord_sum");
  const std::int64_t n = env.n_states();
  std::vector<std::vector<std::int64_t>> buckets(
      static_cast<std::size_t>(env.d()) * (env.h() - 1) + 1);
  for (std::int64_t s = 0; s < n; ++s) {
    const std::vector<int> c = env.coords_of(s);
    const int sum = std::accumulate(c.begin(), c.end(), 0);
    buckets[sum].push_back(s);
  }
  return buckets;
}

HypergridEnv::HypergridEnv(int d, int h, double r0) : d_(d), h_(h), r0_(r0) {
  if (d < 1) throw domain_error("HypergridEnv: d must be >= 1");
  if (h < 2) throw domain_error("HypergridEnv: h must be >= 2");
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw domain_error("HypergridEnv: r0 must be finite and positive");
  }
  n_states_ = 1;
  for (int k = 0; k < d; ++k) {
    if (n_states_ > (std::int64_t{1} << 62) / h) {
      throw domain_error("HypergridEnv: h^d overflows the state index range");
    }
    n_states_ *= h;
  }
}

std::int64_t HypergridEnv::state_index(std::span<const int> coords) const {
  check_coords(*this, coords, "state_index");
  std::int64_t idx = 0;
  for (int k = d_ - 1; k >= 0; --k) idx = idx * h_ + coords[k];
  return idx;
}

std::vector<int> HypergridEnv::coords_of(std::int64_t index) const {
  if (index < 0 || index >= n_states_) {
    throw domain_error("coords_of: index " + std::to_string(index) + " out of range");
  }
  std::vector<int> c(d_);
  for (int k = 0; k < d_; ++k) {
    c[k] = static_cast<int>(index % h_);
    index /= h_;
  }
  return c;
}

double reward(const HypergridEnv& env, std::span<const int> coords) {
  check_coords(env, coords, "reward");
  bool in_plateau = true;
  bool in_mode = true;
  for (int k = 0; k < env.d(); ++k) {
    const double t = static_cast<double>(coords[k]) / (env.h() - 1.0);
    const double dev = std::fabs(t - 0.5);
    in_plateau = in_plateau && (dev > 0.25) && (dev <= 0.5);
    in_mode = in_mode && (dev > 0.3) && (dev < 0.4);
  }
  return env.r0() + (in_plateau ? 0.5 : 0.0) + (in_mode ? 2.0 : 0.0);
}

std::vector<int> allowed_actions(const HypergridEnv& env, const GridState& state) {
  if (state.terminal) throw domain_error("allowed_actions: state is terminal");
  check_coords(env, state.coords, "allowed_actions");
  std::vector<int> actions;
  actions.reserve(env.d() + 1);
  for (int k = 0; k < env.d(); ++k) {
    if (state.coords[k] + 1 < env.h()) actions.push_back(k);
  }
  actions.push_back(env.terminate_action());
  return actions;
}

GridState step(const HypergridEnv& env, const GridState& state, int action) {
  if (state.terminal) throw domain_error("step: state is terminal");
  check_coords(env, state.coords, "step");
  if (action < 0 || action > env.d()) {
    throw domain_error("step: action " + std::to_string(action) + " out of range");
  }
  GridState next = state;
  if (action == env.terminate_action()) {
    next.terminal = true;
    return next;
  }
  if (next.coords[action] + 1 >= env.h()) {
    throw domain_error("step: increment of coordinate " + std::to_string(action) +
                       " leaves the grid");
  }
  ++next.coords[action];
  return next;
}

std::vector<std::pair<GridState, int>> parents(const HypergridEnv& env,
                                               const GridState& state) {
  if (state.terminal) throw domain_error("parents: state is terminal");
  check_coords(env, state.coords, "parents");
  std::vector<std::pair<GridState, int>> out;
  for (int k = 0; k < env.d(); ++k) {
    if (state.coords[k] > 0) {
      GridState p = state;
      --p.coords[k];
      out.emplace_back(std::move(p), k);
    }
  }
  return out;
}

std::vector<double> exact_target_distribution(const HypergridEnv& env) {
  check_enumerable(env.n_states(), "exact_target_distribution");
  std::vector<double> p(env.n_states());
  double z = 0.0;
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    p[s] = reward(env, env.coords_of(s));
    z += p[s];
  }
  for (double& v : p) v /= z;
  return p;
}

void validate_trajectory(const HypergridEnv& env, const Trajectory& traj) {
  if (traj.states.empty() || traj.states.size() != traj.actions.size()) {
    throw domain_error("validate_trajectory: states/actions length mismatch or empty");
  }
  if (traj.states.front() != 0) {
    throw domain_error("validate_trajectory: trajectory must start at the origin");
  }
  for (std::size_t i = 0; i < traj.actions.size(); ++i) {
    const int a = traj.actions[i];
    const bool last = (i + 1 == traj.actions.size());
    if (a == env.terminate_action()) {
      if (!last) throw domain_error("validate_trajectory: terminate before the end");
      break;
    }
    if (last) throw domain_error("validate_trajectory: trajectory does not terminate");
    if (a < 0 || a >= env.d()) {
      throw domain_error("validate_trajectory: action out of range");
    }
    const std::vector<int> c = env.coords_of(traj.states[i]);
    if (c[a] + 1 >= env.h()) {
      throw domain_error("validate_trajectory: increment leaves the grid");
    }
    std::vector<int> next = c;
    ++next[a];
    if (env.state_index(next) != traj.states[i + 1]) {
      throw domain_error("validate_trajectory: transition does not match action");
    }
  }
}

std::uint64_t count_trajectories(const HypergridEnv& env) {
  check_enumerable(env.n_states(), "count_trajectories");
  // npaths(s) = number of increment paths from the origin; each contributes
  // one complete trajectory (terminate at s). Saturate above the cap so huge
  // counts cannot wrap around.
  constexpr std::uint64_t kSat = static_cast<std::uint64_t>(kMaxEnumerable) + 1;
  std::vector<std::uint64_t> npaths(env.n_states(), 0);
  npaths[0] = 1;
  std::uint64_t total = 0;
  for (const auto& bucket : states_by_coord_sum(env)) {
    for (std::int64_t s : bucket) {
      const std::vector<int> c = env.coords_of(s);
      if (s != 0) {
        std::uint64_t acc = 0;
        for (int k = 0; k < env.d(); ++k) {
          if (c[k] > 0) {
            std::vector<int> p = c;
            --p[k];
            acc = std::min(kSat, acc + npaths[env.state_index(p)]);
          }
        }
        npaths[s] = acc;
      }
      total = std::min(kSat, total + npaths[s]);
    }
  }
  if (total > static_cast<std::uint64_t>(kMaxEnumerable)) {
    throw domain_error("count_trajectories: trajectory count exceeds the enumeration cap");
  }
  return total;
}

std::vector<Trajectory> enumerate_trajectories(const HypergridEnv& env) {
  const std::uint64_t total = count_trajectories(env);
  std::vector<Trajectory> out;
  out.reserve(total);
  std::vector<std::int64_t> states{0};
  std::vector<int> actions;
  // Depth-first: terminate first, then increments in dimension order.
  const auto dfs = [&](auto&& self, std::int64_t s) -> void {
    actions.push_back(env.terminate_action());
    out.push_back(Trajectory{states, actions});
    actions.pop_back();
    const std::vector<int> c = env.coords_of(s);
    for (int k = 0; k < env.d(); ++k) {
      if (c[k] + 1 < env.h()) {
        std::vector<int> next = c;
        ++next[k];
        const std::int64_t ns = env.state_index(next);
        states.push_back(ns);
        actions.push_back(k);
        self(self, ns);
        states.pop_back();
        actions.pop_back();
      }
    }
  };
  dfs(dfs, 0);
  return out;
}

ModeRegions mode_regions(const HypergridEnv& env) {
  check_enumerable(env.n_states(), "mode_regions");
  ModeRegions out;
  out.region_of.assign(env.n_states(), -1);
  std::vector<char> is_mode(env.n_states(), 0);
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    is_mode[s] = reward(env, env.coords_of(s)) > 2.0 ? 1 : 0;
  }
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    if (!is_mode[s] || out.region_of[s] != -1) continue;
    const int id = out.n_regions++;
    std::deque<std::int64_t> frontier{s};
    out.region_of[s] = id;
    while (!frontier.empty()) {
      const std::int64_t cur = frontier.front();
      frontier.pop_front();
      const std::vector<int> c = env.coords_of(cur);
      for (int k = 0; k < env.d(); ++k) {
        for (int dir : {-1, 1}) {
          const int v = c[k] + dir;
          if (v < 0 || v >= env.h()) continue;
          std::vector<int> nb = c;
          nb[k] = v;
          const std::int64_t ns = env.state_index(nb);
          if (is_mode[ns] && out.region_of[ns] == -1) {
            out.region_of[ns] = id;
            frontier.push_back(ns);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace ftb
