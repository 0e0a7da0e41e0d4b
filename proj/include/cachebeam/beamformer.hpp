// SPDX-License-Identifier: Apache-2.0
//
// cachebeam - cache-aided multi-antenna content delivery simulator
// Copyright (C) 2026 The cachebeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "cachebeam/cc_core.hpp"
#include "cachebeam/channel.hpp"
#include "cachebeam/cone_program.hpp"
#include "cachebeam/scheduler.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cachebeam
{

/// One joint-decoding requirement: the messages of `subset`, decoded together at a user, need
/// sum-SINR >= threshold = 2^((n/n_i) * required_rate) - 1.
struct SubsetConstraint
{
    std::vector<std::size_t> subset; // indices into SlotProblem::messages
    double required_rate = 0.0;      // sum of R^T(i) over the subset
    double threshold = 0.0;
};

struct UserTargets
{
    int user = 0;
    std::vector<std::size_t> intended;     // active messages containing the user
    std::vector<std::size_t> interference; // active messages not containing the user
    std::vector<SubsetConstraint> constraints; // all 2^c - 1 nonempty subsets of `intended`
};

/// Per-slot power minimization problem: minimize sum ||w_T||^2 subject to every user's
/// multiple-access (joint decoding) region containing the slot rates.
struct SlotProblem
{
    std::vector<UserSet> messages;
    std::vector<double> rates;
    double blocklength_fraction = 1.0;
    int num_antennas = 0;
    std::vector<Eigen::VectorXcd> channels; // h_k for every user in the cell
    std::vector<double> noise_power;
    std::vector<UserTargets> users;          // served users only (c_k(i) > 0)

    std::size_t num_constraints() const;
    double max_threshold() const;
};

/// Builds the slot problem from explicit messages/rates. Users are the indices of `channels`.
SlotProblem make_slot_problem(std::vector<UserSet> messages, std::vector<double> rates, double blocklength_fraction,
                              std::vector<Eigen::VectorXcd> channels, std::vector<double> noise_power);

SlotProblem build_slot_problem(const Slot &slot, const MessageSet &msgs, const ChannelRealization &chan,
                               const SystemConfig &cfg);

// --- convex subproblem ------------------------------------------------------------------------

/// Linearized requirement  coeffs' x + slack >= rhs + gain * level[group]  (group < 0: no level term).
struct LinearCut
{
    Eigen::VectorXd coeffs;
    double rhs = 0.0;
    double gain = 0.0;
    int group = -1;
};

/// minimize ||x||^2 + penalty * sum(slack)
/// s.t.     level[g] >= ||maps[g] x||^2        for every group g
///          each LinearCut holds, slack >= 0
struct ConvexSubproblem
{
    int dim = 0;
    std::vector<Eigen::MatrixXd> maps;
    std::vector<LinearCut> cuts;
    double penalty = 1.0;
};

struct SubproblemSolution
{
    Eigen::VectorXd x;
    Eigen::VectorXd slacks;
    Eigen::VectorXd levels;
    Eigen::VectorXd multipliers; // Lagrange multiplier of each cut
    double objective = 0.0;
    int ipm_iterations = 0;
    ConeStatus status = ConeStatus::optimal;
};

/// Solves the subproblem as a second-order cone program: each quadratic group becomes a rotated
/// cone on (level, maps[g] x), the objective an epigraph rotated cone on (tau, x).
SubproblemSolution solve_convex_subproblem(const ConvexSubproblem &sub, double tolerance = 1e-8);

// --- successive convex approximation ----------------------------------------------------------

struct ScaSettings
{
    int max_outer_iterations = 500;
    double power_rel_tolerance = 1e-5;
    double feasibility_tolerance = 1e-6;
    double initial_penalty = 1.0;
    double penalty_growth = 10.0;
    double penalty_cap = 1e6;
    double subproblem_tolerance = 1e-8;

    void validate() const;
};

enum class ScaStatus
{
    converged,
    stationary_infeasible,
    iteration_limit,
};

std::string to_string(ScaStatus status);

struct ScaIterate
{
    int iteration = 0;
    double penalty = 0.0;
    double objective = 0.0; // normalized power + penalty * slack of the convex subproblem
    double power = 0.0;     // watts
    double max_slack = 0.0;
    double min_margin = 0.0;
};

struct BeamformingSolution
{
    std::vector<Eigen::VectorXcd> beamformers; // one per active message
    double power = 0.0;                        // P_i in watts
    int iterations = 0;
    double slack_residual = 0.0;
    std::vector<double> margins;
    ScaStatus status = ScaStatus::iteration_limit;
    std::vector<ScaIterate> trace;
    /// Largest increase of the frozen-penalty objective between consecutive iterations
    /// (relative); <= 0 up to solver accuracy for a monotone run.
    double monotonicity_violation = 0.0;

    bool converged() const { return status == ScaStatus::converged; }
};

/// Matched-filter start: w_T along the sum of the users' normalized channels, scaled so the
/// first linearization is informative. A nonzero seed perturbs each direction randomly.
std::vector<Eigen::VectorXcd> initial_beamformers(const SlotProblem &prob, std::uint64_t init_seed = 0);

/// Penalized SCA (feasible point pursuit). Intended-signal quadratics are replaced by their
/// tangent lower bounds at the current iterate; interference stays exact and convex.
BeamformingSolution sca_solve(const SlotProblem &prob, const ScaSettings &settings = {}, std::uint64_t init_seed = 0,
                              const std::optional<std::vector<Eigen::VectorXcd>> &initial = std::nullopt);

struct MarginReport
{
    std::vector<double> margins; // achievable minus required rate per constraint, users x subsets order
    double min_margin = 0.0;
    std::vector<std::vector<double>> sinr; // [served user][intended message position]
};

/// Recomputes every SINR and every joint-decoding constraint in its original form.
MarginReport verify_solution(const std::vector<Eigen::VectorXcd> &beamformers, const SlotProblem &prob);

struct AveragePower
{
    double watts = 0.0;
    double dbw = 0.0;
};

/// sum_i (n_i / n) P_i
AveragePower total_average_power(const Schedule &sched, const std::vector<double> &slot_powers);

double to_dbw(double watts);

/// CSV: iteration,penalty,objective,power_w,max_slack,min_margin
void write_trace_csv(std::ostream &os, const std::vector<ScaIterate> &trace);

} // namespace cachebeam
