// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// D-dimensional hypergrid environment: states are lattice cells of {0..H-1}^D,
// actions increment one coordinate or terminate, and the reward places plateau
// rings around the center with sharp mode bumps inside them.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ftb/error.hpp"

namespace ftb {

struct GridState {
  std::vector<int> coords;
  bool terminal = false;
};

class HypergridEnv {
 public:
  // Requires d >= 1, h >= 2, r0 > 0, and h^d representable without overflow.
  HypergridEnv(int d, int h, double r0);

  int d() const { return d_; }
  int h() const { return h_; }
  double r0() const { return r0_; }
  std::int64_t n_states() const { return n_states_; }

  // Mixed-radix packing: coordinate 0 is the least significant digit.
  std::int64_t state_index(std::span<const int> coords) const;
  std::vector<int> coords_of(std::int64_t index) const;

  // Action encoding: 0..d-1 increment that coordinate, d terminates.
  int terminate_action() const { return d_; }

 private:
  int d_;
  int h_;
  double r0_;
  std::int64_t n_states_;
};

// R(s) = r0 + 0.5 * prod_d 1[|s_d/(h-1) - 0.5| in (0.25, 0.5]]
//           + 2.0 * prod_d 1[|s_d/(h-1) - 0.5| in (0.3, 0.4)]
// with strict IEEE comparisons on the half-open/open interval bounds.
double reward(const HypergridEnv& env, std::span<const int> coords);

// Legal actions at a nonterminal state: every increment that stays on the
// grid, plus terminate (always last). Throws on terminal states.
std::vector<int> allowed_actions(const HypergridEnv& env, const GridState& state);

// Applies an action; incrementing off the grid or acting on a terminal state throws.
GridState step(const HypergridEnv& env, const GridState& state, int action);

// Lattice parents (decrement one positive coordinate) with the action that
// leads back; empty at the initial state.
std::vector<std::pair<GridState, int>> parents(const HypergridEnv& env,
                                               const GridState& state);

// Normalized reward distribution over all h^d cells, indexed by state_index.
// Throws if h^d exceeds the enumeration cap.
std::vector<double> exact_target_distribution(const HypergridEnv& env);

// A complete trajectory: states[i] is where actions[i] was taken; the final
// action is terminate, so states.back() is the terminating cell.
struct Trajectory {
  std::vector<std::int64_t> states;
  std::vector<int> actions;
};

// Throws domain_error unless the trajectory starts at the origin, follows
// legal increments, and terminates exactly once, at the end.
void validate_trajectory(const HypergridEnv& env, const Trajectory& traj);

// Number of complete trajectories; throws if it exceeds the enumeration cap.
std::uint64_t count_trajectories(const HypergridEnv& env);

// Every complete trajectory exactly once (deterministic order).
std::vector<Trajectory> enumerate_trajectories(const HypergridEnv& env);

inline constexpr std::int64_t kMaxEnumerable = 1000000;

// State indices bucketed by coordinate sum, ascending: a topological order of
// the increment DAG. Requires an enumerable state space.
std::vector<std::vector<std::int64_t>> states_by_coord_sum(const HypergridEnv& env);

struct ModeRegions {
  int n_regions = 0;
  std::vector<int> region_of;  // per state index: -1 outside modes, else region id
};

// Mode cells are those receiving the sharp bump (R > 2); regions are their
// connected components under one-step lattice adjacency.
ModeRegions mode_regions(const HypergridEnv& env);

}  // namespace ftb
