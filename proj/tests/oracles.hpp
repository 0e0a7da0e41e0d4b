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

// Independent reference computations shared by the unit tests and the acceptance suite.
// Nothing here calls into the solver code paths it is used to check.

#include "cachebeam/beamformer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle
{

inline Eigen::VectorXcd random_channel(std::mt19937_64 &rng, int nt, double scale = 1.0)
{
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    Eigen::VectorXcd h(nt);
    for (int i = 0; i < nt; ++i)
        h[i] = scale * std::complex<double>(gauss(rng), gauss(rng));
    return h;
}

/// Closed form for one message serving one user without interference.
inline double matched_filter_power(const Eigen::VectorXcd &h, double noise, double threshold)
{
    return noise * threshold / h.squaredNorm();
}

/// Multicast of one message to several users with N_t = 2: the beamformer direction up to a
/// common phase is v = (cos a, sin a e^{i b}), and the power for direction v is
/// max_k noise_k * threshold / |h_k^H v|^2. Dense grid followed by successive zooming.
inline double multicast_grid_power(const std::vector<Eigen::VectorXcd> &h, const std::vector<double> &noise,
                                   double threshold, int grid = 240, int zoom_rounds = 8)
{
    auto power = [&](double a, double b) {
        const std::complex<double> v0(std::cos(a), 0.0);
        const std::complex<double> v1 = std::sin(a) * std::polar(1.0, b);
        double worst = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k)
        {
            const double g = std::norm(std::conj(h[k][0]) * v0 + std::conj(h[k][1]) * v1);
            worst = std::max(worst, noise[k] * threshold / std::max(g, 1e-300));
        }
        return worst;
    };

    const double pi = std::numbers::pi;
    // keep several candidates: the max of two smooth functions can have separated basins
    struct Cand
    {
        double p, a, b;
    };
    std::vector<Cand> cands;
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j < 2 * grid; ++j)
        {
            const double a = 0.5 * pi * i / grid;
            const double b = pi * j / grid;
            cands.push_back({power(a, b), a, b});
        }
    std::partial_sort(cands.begin(), cands.begin() + 8, cands.end(), [](auto &x, auto &y) { return x.p < y.p; });
    cands.resize(8);

    double best = std::numeric_limits<double>::infinity();
    for (auto c : cands)
    {
        double da = 0.5 * pi / grid, db = pi / grid;
        for (int r = 0; r < zoom_rounds; ++r)
        {
            Cand local = c;
            for (int i = -10; i <= 10; ++i)
                for (int j = -10; j <= 10; ++j)
                {
                    const double a = std::clamp(c.a + da * i / 10.0, 0.0, 0.5 * pi);
                    const double b = c.b + db * j / 10.0;
                    const double p = power(a, b);
                    if (p < local.p)
                        local = {p, a, b};
                }
            c = local;
            da /= 5.0;
            db /= 5.0;
        }
        best = std::min(best, c.p);
    }
    return best;
}

/// Residuals of the first-order conditions of the subproblem in its quadratic form
///   min ||x||^2 + lambda sum s  s.t.  a_j'x + s_j >= rhs_j + gain_j ||A_g x||^2,  s >= 0.
struct KktResidual
{
    double stationarity = 0.0;     // relative to the size of the gradient terms
    double multiplier_bounds = 0.0; // violation of 0 <= mu <= lambda
    double complementarity = 0.0;
    double primal = 0.0;
};

inline KktResidual kkt_residual(const cachebeam::ConvexSubproblem &sub, const cachebeam::SubproblemSolution &sol)
{
    KktResidual r;
    const Eigen::VectorXd &x = sol.x;
    Eigen::VectorXd grad = 2.0 * x;
    double scale = 2.0 * x.norm();
    for (std::size_t j = 0; j < sub.cuts.size(); ++j)
    {
        const auto &cut = sub.cuts[j];
        const double mu = sol.multipliers[static_cast<Eigen::Index>(j)];
        const double s = sol.slacks[static_cast<Eigen::Index>(j)];
        Eigen::VectorXd term = -mu * cut.coeffs;
        double quad = 0.0;
        if (cut.group >= 0)
        {
            const auto &A = sub.maps[static_cast<std::size_t>(cut.group)];
            term += 2.0 * mu * cut.gain * (A.transpose() * (A * x));
            quad = cut.gain * (A * x).squaredNorm();
        }
        grad += term;
        scale += term.norm();
        r.multiplier_bounds = std::max({r.multiplier_bounds, -mu, mu - sub.penalty});
        const double excess = cut.coeffs.dot(x) + s - cut.rhs - quad;
        const double mag = std::abs(cut.coeffs.dot(x)) + std::abs(cut.rhs) + quad + 1.0;
        r.primal = std::max(r.primal, -excess / mag);
        r.complementarity = std::max(r.complementarity, std::abs(mu * excess) / (mag * (1.0 + std::abs(mu))));
        r.complementarity = std::max(r.complementarity, std::abs((sub.penalty - mu) * s) / (1.0 + sub.penalty));
    }
    r.stationarity = grad.norm() / std::max(scale, 1.0);
    r.multiplier_bounds /= std::max(1.0, sub.penalty);
    return r;
}

} // namespace oracle
