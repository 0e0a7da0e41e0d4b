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

#include "cachebeam/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cachebeam
{

std::size_t SlotProblem::num_constraints() const
{
    std::size_t total = 0;
    for (const auto &u : users)
        total += u.constraints.size();
    return total;
}

double SlotProblem::max_threshold() const
{
    double best = 0.0;
    for (const auto &u : users)
        for (const auto &c : u.constraints)
            best = std::max(best, c.threshold);
    return best;
}

SlotProblem make_slot_problem(std::vector<UserSet> messages, std::vector<double> rates, double blocklength_fraction,
                              std::vector<Eigen::VectorXcd> channels, std::vector<double> noise_power)
{
    if (messages.empty())
        throw std::invalid_argument("slot problem needs at least one message");
    if (rates.size() != messages.size())
        throw std::invalid_argument("slot problem: one rate per message required");
    if (!(blocklength_fraction > 0.0) || blocklength_fraction > 1.0)
        throw std::invalid_argument("slot problem: blocklength fraction must lie in (0, 1]");
    if (channels.empty() || noise_power.size() != channels.size())
        throw std::invalid_argument("slot problem: one noise power per channel vector required");
    for (double r : rates)
        if (!(r > 0.0))
            throw std::invalid_argument("slot problem: message rates must be positive");

    SlotProblem prob;
    prob.num_antennas = static_cast<int>(channels.front().size());
    for (const auto &h : channels)
        if (h.size() != prob.num_antennas)
            throw std::invalid_argument("slot problem: channel vectors differ in length");
    const int num_users = static_cast<int>(channels.size());
    for (const auto &m : messages)
        if (m.empty() || m.members().back() >= num_users)
            throw std::invalid_argument("slot problem: message " + m.label() + " targets unknown users");

    for (int k = 0; k < num_users; ++k)
    {
        UserTargets targets;
        targets.user = k;
        for (std::size_t j = 0; j < messages.size(); ++j)
            (messages[j].contains(k) ? targets.intended : targets.interference).push_back(j);
        if (targets.intended.empty())
            continue;
        if (!(noise_power[static_cast<std::size_t>(k)] > 0.0))
            throw std::invalid_argument("slot problem: noise power must be positive");
        const std::size_t c = targets.intended.size();
        if (c >= 63)
            throw std::invalid_argument("slot problem: too many intended messages for subset enumeration");
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << c); ++mask)
        {
            SubsetConstraint con;
            for (std::size_t b = 0; b < c; ++b)
                if (mask & (std::uint64_t{1} << b))
                {
                    con.subset.push_back(targets.intended[b]);
                    con.required_rate += rates[targets.intended[b]];
                }
            con.threshold = std::exp2(con.required_rate / blocklength_fraction) - 1.0;
            targets.constraints.push_back(std::move(con));
        }
        prob.users.push_back(std::move(targets));
    }
    prob.messages = std::move(messages);
    prob.rates = std::move(rates);
    prob.blocklength_fraction = blocklength_fraction;
    prob.channels = std::move(channels);
    prob.noise_power = std::move(noise_power);
    return prob;
}

SlotProblem build_slot_problem(const Slot &slot, const MessageSet &msgs, const ChannelRealization &chan,
                               const SystemConfig &cfg)
{
    if (!(slot.blocklength_fraction > 0.0))
        throw std::invalid_argument("build_slot_problem: zero blocklength fraction");
    if (chan.num_users() != msgs.num_users || static_cast<int>(cfg.noise_power.size()) != msgs.num_users)
        throw std::invalid_argument("build_slot_problem: channel, noise and message set disagree on K");
    return make_slot_problem(slot.messages, slot.rates, slot.blocklength_fraction, chan.h, cfg.noise_power);
}

// --- convex subproblem ------------------------------------------------------------------------

SubproblemSolution solve_convex_subproblem(const ConvexSubproblem &sub, double tolerance)
{
    const int n = sub.dim;
    const int m = static_cast<int>(sub.cuts.size());
    const int ng = static_cast<int>(sub.maps.size());
    const int slack0 = n;
    const int level0 = n + m;
    const int tau = n + m + ng;
    const int num_vars = tau + 1;

    for (const auto &cut : sub.cuts)
    {
        if (cut.coeffs.size() != n)
            throw std::invalid_argument("solve_convex_subproblem: cut has wrong dimension");
        if (cut.group >= ng)
            throw std::invalid_argument("solve_convex_subproblem: cut refers to unknown group");
    }
    for (const auto &map : sub.maps)
        if (map.cols() != n)
            throw std::invalid_argument("solve_convex_subproblem: group map has wrong dimension");

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> h;
    std::vector<int> soc_dims;
    std::vector<double> row_scale(static_cast<std::size_t>(m));

    int row = 0;
    for (int j = 0; j < m; ++j, ++row)
    {
        const auto &cut = sub.cuts[static_cast<std::size_t>(j)];
        const double f = 1.0 / std::max(1.0, cut.gain);
        row_scale[static_cast<std::size_t>(j)] = f;
        for (int i = 0; i < n; ++i)
            if (cut.coeffs[i] != 0.0)
                trip.emplace_back(row, i, -f * cut.coeffs[i]);
        trip.emplace_back(row, slack0 + j, -f);
        if (cut.group >= 0)
            trip.emplace_back(row, level0 + cut.group, f * cut.gain);
        h.push_back(-f * cut.rhs);
    }
    for (int j = 0; j < m; ++j, ++row)
    {
        trip.emplace_back(row, slack0 + j, -1.0);
        h.push_back(0.0);
    }
    const int num_linear = row;

    // level >= ||A x||^2  <=>  ((level + 1)/2, A x, (level - 1)/2) in Q
    for (int g = 0; g < ng; ++g)
    {
        const auto &map = sub.maps[static_cast<std::size_t>(g)];
        trip.emplace_back(row, level0 + g, -0.5);
        h.push_back(0.5);
        ++row;
        for (Eigen::Index r = 0; r < map.rows(); ++r, ++row)
        {
            for (int i = 0; i < n; ++i)
                if (map(r, i) != 0.0)
                    trip.emplace_back(row, i, -map(r, i));
            h.push_back(0.0);
        }
        trip.emplace_back(row, level0 + g, -0.5);
        h.push_back(-0.5);
        ++row;
        soc_dims.push_back(static_cast<int>(map.rows()) + 2);
    }

    // tau >= ||x||^2
    trip.emplace_back(row, tau, -0.5);
    h.push_back(0.5);
    ++row;
    for (int i = 0; i < n; ++i, ++row)
    {
        trip.emplace_back(row, i, -1.0);
        h.push_back(0.0);
    }
    trip.emplace_back(row, tau, -0.5);
    h.push_back(-0.5);
    ++row;
    soc_dims.push_back(n + 2);

    ConeProgram prog;
    prog.G.resize(row, num_vars);
    prog.G.setFromTriplets(trip.begin(), trip.end());
    prog.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    prog.c = Eigen::VectorXd::Zero(num_vars);
    prog.c.segment(slack0, m).setConstant(sub.penalty);
    prog.c[tau] = 1.0;
    prog.num_linear = num_linear;
    prog.soc_dims = std::move(soc_dims);

    ConeSolverSettings cs;
    cs.feastol = tolerance;
    cs.abstol = tolerance;
    cs.reltol = tolerance;
    const ConeSolution cone = solve_cone_program(prog, cs);

    SubproblemSolution out;
    out.x = cone.x.head(n);
    // smallest slack consistent with x; the interior-point slack variable carries O(gap) excess
    out.slacks.resize(m);
    for (int j = 0; j < m; ++j)
    {
        const auto &cut = sub.cuts[static_cast<std::size_t>(j)];
        double need = cut.rhs - cut.coeffs.dot(out.x);
        if (cut.group >= 0)
            need += cut.gain * (sub.maps[static_cast<std::size_t>(cut.group)] * out.x).squaredNorm();
        out.slacks[j] = std::max(need, 0.0);
    }
    out.levels = cone.x.segment(level0, ng);
    out.multipliers.resize(m);
    for (int j = 0; j < m; ++j)
        out.multipliers[j] = row_scale[static_cast<std::size_t>(j)] * cone.z[j];
    out.objective = out.x.squaredNorm() + sub.penalty * out.slacks.sum();
    out.ipm_iterations = cone.iterations;
    out.status = cone.status;
    return out;
}

// --- SCA --------------------------------------------------------------------------------------

void ScaSettings::validate() const
{
    if (max_outer_iterations < 1)
        throw std::invalid_argument("ScaSettings: max_outer_iterations must be >= 1");
    if (!(power_rel_tolerance > 0.0) || !(feasibility_tolerance > 0.0) || !(subproblem_tolerance > 0.0))
        throw std::invalid_argument("ScaSettings: tolerances must be positive");
    if (!(initial_penalty > 0.0) || !(penalty_growth >= 1.0) || !(penalty_cap >= initial_penalty))
        throw std::invalid_argument("ScaSettings: invalid penalty schedule");
}

std::string to_string(ScaStatus status)
{
    switch (status)
    {
    case ScaStatus::converged:
        return "converged";
    case ScaStatus::stationary_infeasible:
        return "stationary_infeasible";
    case ScaStatus::iteration_limit:
        return "iteration_limit";
    }
    return "unknown";
}

namespace
{

/// Noise-whitened, per-user unit-norm channels. Beamformers are expressed as u = rho * w with
/// rho the weakest served user's whitened channel norm, so the weakest user sees unit noise.
struct Normalization
{
    double rho = 1.0;
    std::vector<Eigen::VectorXcd> unit_channel; // indexed like SlotProblem::users
    std::vector<double> noise_ratio;            // rho^2 / ||g_k||^2 <= 1
};

Normalization normalize(const SlotProblem &prob)
{
    Normalization nz;
    std::vector<double> norms;
    for (const auto &u : prob.users)
    {
        const auto k = static_cast<std::size_t>(u.user);
        const Eigen::VectorXcd g = prob.channels[k] / std::sqrt(prob.noise_power[k]);
        const double norm = g.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw std::invalid_argument("sca: served user " + std::to_string(u.user + 1) + " has a degenerate channel");
        norms.push_back(norm);
        nz.unit_channel.push_back(g / norm);
    }
    nz.rho = norms.empty() ? 1.0 : *std::min_element(norms.begin(), norms.end());
    for (double norm : norms)
        nz.noise_ratio.push_back((nz.rho / norm) * (nz.rho / norm));
    return nz;
}

/// Real 2 x 2N map with [Re(g^H w); Im(g^H w)] = M [Re w; Im w].
Eigen::MatrixXd real_map(const Eigen::VectorXcd &g)
{
    const auto nt = g.size();
    Eigen::MatrixXd M(2, 2 * nt);
    M.block(0, 0, 1, nt) = g.real().transpose();
    M.block(0, nt, 1, nt) = g.imag().transpose();
    M.block(1, 0, 1, nt) = -g.imag().transpose();
    M.block(1, nt, 1, nt) = g.real().transpose();
    return M;
}

Eigen::VectorXd to_real(const std::vector<Eigen::VectorXcd> &w, double scale)
{
    const auto nt = w.empty() ? 0 : w.front().size();
    Eigen::VectorXd x(static_cast<Eigen::Index>(w.size()) * 2 * nt);
    for (std::size_t m = 0; m < w.size(); ++m)
    {
        const auto base = static_cast<Eigen::Index>(m) * 2 * nt;
        x.segment(base, nt) = scale * w[m].real();
        x.segment(base + nt, nt) = scale * w[m].imag();
    }
    return x;
}

std::vector<Eigen::VectorXcd> to_complex(const Eigen::VectorXd &x, std::size_t num_messages, Eigen::Index nt,
                                         double scale)
{
    std::vector<Eigen::VectorXcd> w;
    for (std::size_t m = 0; m < num_messages; ++m)
    {
        const auto base = static_cast<Eigen::Index>(m) * 2 * nt;
        Eigen::VectorXcd v(nt);
        for (Eigen::Index j = 0; j < nt; ++j)
            v[j] = std::complex<double>(x[base + j], x[base + nt + j]) * scale;
        w.push_back(std::move(v));
    }
    return w;
}

class LinearizationBuilder
{
public:
    LinearizationBuilder(const SlotProblem &prob, const Normalization &nz) : prob_(prob), nz_(nz)
    {
        nt_ = prob.num_antennas;
        dim_ = static_cast<int>(prob.messages.size()) * 2 * nt_;
        for (std::size_t u = 0; u < prob.users.size(); ++u)
        {
            maps_.push_back(real_map(nz.unit_channel[u]));
            const auto &interf = prob.users[u].interference;
            if (interf.empty())
            {
                group_.push_back(-1);
                continue;
            }
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(interf.size()), dim_);
            for (std::size_t i = 0; i < interf.size(); ++i)
                A.block(2 * static_cast<Eigen::Index>(i), block(interf[i]), 2, 2 * nt_) = maps_.back();
            group_.push_back(static_cast<int>(group_maps_.size()));
            group_maps_.push_back(std::move(A));
        }
    }

    int dim() const { return dim_; }

    ConvexSubproblem build(const Eigen::VectorXd &xbar, double penalty) const
    {
        ConvexSubproblem sub;
        sub.dim = dim_;
        sub.maps = group_maps_;
        sub.penalty = penalty;
        for (std::size_t u = 0; u < prob_.users.size(); ++u)
        {
            const auto &M = maps_[u];
            // tangent data per intended message: 2 M'M xbar_T and ||M xbar_T||^2
            std::vector<Eigen::VectorXd> grad;
            std::vector<double> value;
            for (std::size_t T : prob_.users[u].intended)
            {
                const Eigen::Vector2d y = M * xbar.segment(block(T), 2 * nt_);
                grad.push_back(2.0 * M.transpose() * y);
                value.push_back(y.squaredNorm());
            }
            const auto &intended = prob_.users[u].intended;
            for (const auto &con : prob_.users[u].constraints)
            {
                LinearCut cut;
                cut.coeffs = Eigen::VectorXd::Zero(dim_);
                cut.rhs = con.threshold * nz_.noise_ratio[u];
                for (std::size_t T : con.subset)
                {
                    const auto pos = static_cast<std::size_t>(
                        std::find(intended.begin(), intended.end(), T) - intended.begin());
                    cut.coeffs.segment(block(T), 2 * nt_) += grad[pos];
                    cut.rhs += value[pos];
                }
                cut.gain = con.threshold;
                cut.group = group_[u];
                sub.cuts.push_back(std::move(cut));
            }
        }
        return sub;
    }

private:
    Eigen::Index block(std::size_t message) const { return static_cast<Eigen::Index>(message) * 2 * nt_; }

    const SlotProblem &prob_;
    const Normalization &nz_;
    Eigen::Index nt_ = 0;
    int dim_ = 0;
    std::vector<Eigen::MatrixXd> maps_;
    std::vector<int> group_;
    std::vector<Eigen::MatrixXd> group_maps_;
};

std::vector<Eigen::VectorXcd> normalized_start(const SlotProblem &prob, const Normalization &nz,
                                               std::uint64_t init_seed)
{
    const double magnitude = std::sqrt(std::max(prob.max_threshold(), 1.0) * static_cast<double>(prob.messages.size()));
    std::vector<Eigen::VectorXcd> u;
    for (std::size_t m = 0; m < prob.messages.size(); ++m)
    {
        Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(prob.num_antennas);
        for (std::size_t k = 0; k < prob.users.size(); ++k)
            if (prob.messages[m].contains(prob.users[k].user))
                dir += nz.unit_channel[k];
        if (dir.norm() < 1e-12)
            dir = nz.unit_channel.empty() ? Eigen::VectorXcd::Unit(prob.num_antennas, 0) : nz.unit_channel.front();
        dir /= dir.norm();
        if (init_seed != 0)
        {
            RandomStream stream(init_seed, m);
            Eigen::VectorXcd noise(prob.num_antennas);
            for (Eigen::Index j = 0; j < noise.size(); ++j)
                noise[j] = stream.complex_normal();
            dir += 0.3 * noise / std::sqrt(static_cast<double>(prob.num_antennas));
            dir /= dir.norm();
        }
        u.push_back(magnitude * dir);
    }
    return u;
}

} // namespace

std::vector<Eigen::VectorXcd> initial_beamformers(const SlotProblem &prob, std::uint64_t init_seed)
{
    const Normalization nz = normalize(prob);
    auto u = normalized_start(prob, nz, init_seed);
    for (auto &v : u)
        v /= nz.rho;
    return u;
}

BeamformingSolution sca_solve(const SlotProblem &prob, const ScaSettings &settings, std::uint64_t init_seed,
                              const std::optional<std::vector<Eigen::VectorXcd>> &initial)
{
    settings.validate();
    const Normalization nz = normalize(prob);
    const LinearizationBuilder builder(prob, nz);
    const auto nt = static_cast<Eigen::Index>(prob.num_antennas);

    Eigen::VectorXd xbar;
    if (initial)
    {
        if (initial->size() != prob.messages.size())
            throw std::invalid_argument("sca_solve: one initial beamformer per message required");
        for (const auto &w : *initial)
            if (w.size() != nt)
                throw std::invalid_argument("sca_solve: initial beamformer has wrong length");
        xbar = to_real(*initial, nz.rho);
    }
    else
        xbar = to_real(normalized_start(prob, nz, init_seed), 1.0);

    BeamformingSolution sol;
    double penalty = settings.initial_penalty;
    double prev_objective = std::numeric_limits<double>::quiet_NaN();
    double prev_power = std::numeric_limits<double>::quiet_NaN();
    double prev_penalty = -1.0;
    const double inv_rho2 = 1.0 / (nz.rho * nz.rho);

    for (int iter = 1; iter <= settings.max_outer_iterations; ++iter)
    {
        const SubproblemSolution sub = solve_convex_subproblem(builder.build(xbar, penalty), settings.subproblem_tolerance);
        xbar = sub.x;

        const double max_slack = sub.slacks.size() ? sub.slacks.maxCoeff() : 0.0;
        const double power = sub.x.squaredNorm() * inv_rho2;
        sol.beamformers = to_complex(sub.x, prob.messages.size(), nt, 1.0 / nz.rho);
        const MarginReport margins = verify_solution(sol.beamformers, prob);

        sol.trace.push_back({iter, penalty, sub.objective, power, max_slack, margins.min_margin});
        sol.iterations = iter;
        sol.power = power;
        sol.slack_residual = max_slack;
        sol.margins = margins.margins;

        const bool same_penalty = penalty == prev_penalty;
        if (same_penalty)
        {
            const double increase = (sub.objective - prev_objective) / std::max(std::abs(prev_objective), 1e-300);
            sol.monotonicity_violation = std::max(sol.monotonicity_violation, increase);
        }
        const bool power_stable =
            same_penalty && std::abs(power - prev_power) <= settings.power_rel_tolerance * std::max(power, 1e-300);
        const bool objective_stable =
            same_penalty &&
            std::abs(sub.objective - prev_objective) <= settings.power_rel_tolerance * std::abs(sub.objective);

        prev_objective = sub.objective;
        prev_power = power;
        prev_penalty = penalty;

        const bool feasible = max_slack <= settings.feasibility_tolerance;
        if (feasible)
        {
            if (power_stable)
            {
                sol.status = ScaStatus::converged;
                return sol;
            }
            continue; // penalty frozen
        }
        // infeasible again after a freeze: the penalty no longer dominates the multipliers
        if (penalty < settings.penalty_cap)
            penalty = std::min(penalty * settings.penalty_growth, settings.penalty_cap);
        else if (objective_stable)
        {
            sol.status = ScaStatus::stationary_infeasible;
            return sol;
        }
    }
    sol.status = ScaStatus::iteration_limit;
    return sol;
}

MarginReport verify_solution(const std::vector<Eigen::VectorXcd> &beamformers, const SlotProblem &prob)
{
    if (beamformers.size() != prob.messages.size())
        throw std::invalid_argument("verify_solution: one beamformer per message required");
    MarginReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    for (const auto &u : prob.users)
    {
        const auto &h = prob.channels[static_cast<std::size_t>(u.user)];
        double denom = prob.noise_power[static_cast<std::size_t>(u.user)];
        for (std::size_t I : u.interference)
            denom += std::norm(h.dot(beamformers[I]));
        std::vector<double> sinr;
        for (std::size_t T : u.intended)
            sinr.push_back(std::norm(h.dot(beamformers[T])) / denom);
        for (const auto &con : u.constraints)
        {
            double sum = 0.0;
            for (std::size_t T : con.subset)
            {
                const auto pos = static_cast<std::size_t>(
                    std::find(u.intended.begin(), u.intended.end(), T) - u.intended.begin());
                sum += sinr[pos];
            }
            const double margin = prob.blocklength_fraction * std::log2(1.0 + sum) - con.required_rate;
            report.margins.push_back(margin);
            report.min_margin = std::min(report.min_margin, margin);
        }
        report.sinr.push_back(std::move(sinr));
    }
    return report;
}

double to_dbw(double watts)
{
    return 10.0 * std::log10(watts);
}

AveragePower total_average_power(const Schedule &sched, const std::vector<double> &slot_powers)
{
    if (slot_powers.size() != sched.slots.size())
        throw std::invalid_argument("total_average_power: expected " + std::to_string(sched.slots.size()) +
                                    " slot powers, got " + std::to_string(slot_powers.size()));
    AveragePower p;
    for (std::size_t i = 0; i < slot_powers.size(); ++i)
        p.watts += sched.slots[i].blocklength_fraction * slot_powers[i];
    p.dbw = to_dbw(p.watts);
    return p;
}

void write_trace_csv(std::ostream &os, const std::vector<ScaIterate> &trace)
{
    const auto old = os.precision(12);
    os << "iteration,penalty,objective,power_w,max_slack,min_margin\n";
    for (const auto &it : trace)
        os << it.iteration << ',' << it.penalty << ',' << it.objective << ',' << it.power << ',' << it.max_slack << ','
           << it.min_margin << '\n';
    os.precision(old);
}

} // namespace cachebeam
