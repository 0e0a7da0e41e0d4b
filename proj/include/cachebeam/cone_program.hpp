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

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <vector>

namespace cachebeam
{

/// Second-order cone program in inequality form
///
///     minimize    c' x
///     subject to  G x + s = h,   s in K,
///
/// where K is the product of a nonnegative orthant of dimension `num_linear` (the first rows of G)
/// followed by second-order cones {(u0, u1) : ||u1|| <= u0} of dimensions `soc_dims`.
struct ConeProgram
{
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double, Eigen::RowMajor> G;
    Eigen::VectorXd h;
    int num_linear = 0;
    std::vector<int> soc_dims;

    int num_variables() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(h.size()); }
    void validate() const;
};

struct ConeSolverSettings
{
    int max_iterations = 100;
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double step_fraction = 0.99;
    /// Accuracy accepted (status inaccurate) when the iteration budget runs out.
    double fallback_tol = 1e-5;
};

enum class ConeStatus
{
    optimal,
    inaccurate,
};

struct ConeSolution
{
    Eigen::VectorXd x;
    Eigen::VectorXd s;
    Eigen::VectorXd z;
    ConeStatus status = ConeStatus::optimal;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

/// Thrown when the Newton system cannot be factored or the iteration stalls far from optimality.
class NumericalError : public std::runtime_error
{
public:
    NumericalError(const std::string &what, double condition_estimate, int iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ", condition estimate " +
                             std::to_string(condition_estimate) + ")"),
          condition_estimate_(condition_estimate), iteration_(iteration)
    {
    }

    double condition_estimate() const { return condition_estimate_; }
    int iteration() const { return iteration_; }

private:
    double condition_estimate_;
    int iteration_;
};

/// Primal-dual interior-point method with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps (infeasible start). The Newton system is reduced to the
/// positive-definite n x n matrix G' W^-2 G, which is assembled from per-cone Gram matrices
/// so that each iteration costs O(n^3 + nnz-structured updates).
ConeSolution solve_cone_program(const ConeProgram &prog, const ConeSolverSettings &settings = {});

/// Largest alpha with x + alpha * dx in the cone (infinity if unbounded). x must be interior.
double max_step_to_boundary(const Eigen::VectorXd &x, const Eigen::VectorXd &dx, int num_linear,
                            const std::vector<int> &soc_dims);

} // namespace cachebeam
