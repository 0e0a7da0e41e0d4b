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

#include "cachebeam/cone_program.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cachebeam
{

void ConeProgram::validate() const
{
    const int rows = num_rows();
    if (G.rows() != rows || G.cols() != num_variables())
        throw std::invalid_argument("ConeProgram: G must be " + std::to_string(rows) + " x " +
                                    std::to_string(num_variables()));
    int total = num_linear;
    for (int d : soc_dims)
    {
        if (d < 1)
            throw std::invalid_argument("ConeProgram: second-order cone dimensions must be >= 1");
        total += d;
    }
    if (num_linear < 0 || total != rows)
        throw std::invalid_argument("ConeProgram: cone dimensions do not add up to the number of rows");
}

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ConeBlock
{
    int offset = 0;
    int dim = 0;
    std::vector<int> support;  // columns of G touched by this cone
    MatrixXd rows;             // dim x |support| dense slice of G
    MatrixXd gram;             // rows' * rows
};

struct LinearRow
{
    std::vector<int> cols;
    std::vector<double> vals;
};

/// Nesterov-Todd scaling at (s, z); all cones share the representation W = W' (symmetric).
struct Scaling
{
    VectorXd lp_w;                 // sqrt(s ./ z)
    std::vector<double> beta;
    std::vector<VectorXd> v;       // hyperbolic unit vectors, v' J v = 1
    VectorXd lambda;               // W z = W^-1 s
};

class Structure
{
public:
    explicit Structure(const ConeProgram &prog) : n_(prog.num_variables()), l_(prog.num_linear)
    {
        linear_.resize(static_cast<std::size_t>(l_));
        for (int r = 0; r < l_; ++r)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.G, r); it; ++it)
            {
                linear_[static_cast<std::size_t>(r)].cols.push_back(static_cast<int>(it.col()));
                linear_[static_cast<std::size_t>(r)].vals.push_back(it.value());
            }
        int offset = l_;
        for (int d : prog.soc_dims)
        {
            ConeBlock block;
            block.offset = offset;
            block.dim = d;
            std::vector<int> cols;
            for (int r = offset; r < offset + d; ++r)
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.G, r); it; ++it)
                    cols.push_back(static_cast<int>(it.col()));
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            block.support = cols;
            block.rows = MatrixXd::Zero(d, static_cast<Eigen::Index>(cols.size()));
            for (int r = offset; r < offset + d; ++r)
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.G, r); it; ++it)
                {
                    const auto pos = std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin();
                    block.rows(r - offset, pos) += it.value();
                }
            block.gram = block.rows.transpose() * block.rows;
            cones_.push_back(std::move(block));
            offset += d;
        }
    }

    int n() const { return n_; }
    int l() const { return l_; }
    const std::vector<ConeBlock> &cones() const { return cones_; }
    int degree() const { return l_ + static_cast<int>(cones_.size()); }

    /// H = G' W^-2 G (lower triangle). With `scaling == nullptr`, H = G' G.
    void assemble(MatrixXd &H, const Scaling *scaling) const
    {
        H.setZero(n_, n_);
        for (int r = 0; r < l_; ++r)
        {
            const auto &row = linear_[static_cast<std::size_t>(r)];
            double weight = 1.0;
            if (scaling)
            {
                const double w = scaling->lp_w[r];
                weight = 1.0 / (w * w);
            }
            for (std::size_t a = 0; a < row.cols.size(); ++a)
                for (std::size_t b = 0; b < row.cols.size(); ++b)
                    if (row.cols[a] >= row.cols[b])
                        H(row.cols[a], row.cols[b]) += weight * row.vals[a] * row.vals[b];
        }
        for (std::size_t c = 0; c < cones_.size(); ++c)
        {
            const auto &block = cones_[c];
            if (!scaling)
            {
                scatter(H, block.support, block.gram);
                continue;
            }
            const double inv_b2 = 1.0 / (scaling->beta[c] * scaling->beta[c]);
            const VectorXd &v = scaling->v[c];
            VectorXd vt = v;
            vt.tail(v.size() - 1) *= -1.0; // J v
            const VectorXd a = block.rows.transpose() * vt;
            const VectorXd b = block.rows.transpose() * v;
            const double vv = v.squaredNorm();
            MatrixXd local = block.gram;
            local.noalias() += (4.0 * vv) * a * a.transpose();
            local.noalias() -= 2.0 * (a * b.transpose() + b * a.transpose());
            local *= inv_b2;
            scatter(H, block.support, local);
        }
    }

private:
    static void scatter(MatrixXd &H, const std::vector<int> &support, const MatrixXd &local)
    {
        for (std::size_t j = 0; j < support.size(); ++j)
            for (std::size_t i = j; i < support.size(); ++i)
                H(support[i], support[j]) += local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    int n_;
    int l_;
    std::vector<LinearRow> linear_;
    std::vector<ConeBlock> cones_;
};

// --- cone algebra -----------------------------------------------------------------------------

double jnorm_sq(const Eigen::Ref<const VectorXd> &x)
{
    const double tail = x.tail(x.size() - 1).norm();
    return (x[0] - tail) * (x[0] + tail);
}

/// Most negative "eigenvalue" across cones; >= 0 iff x is in the cone.
double min_eigenvalue(const VectorXd &x, const Structure &st)
{
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < st.l(); ++i)
        lo = std::min(lo, x[i]);
    for (const auto &c : st.cones())
    {
        const auto seg = x.segment(c.offset, c.dim);
        lo = std::min(lo, seg[0] - seg.tail(c.dim - 1).norm());
    }
    return lo;
}

void add_identity(VectorXd &x, double alpha, const Structure &st)
{
    x.head(st.l()).array() += alpha;
    for (const auto &c : st.cones())
        x[c.offset] += alpha;
}

VectorXd jordan_product(const VectorXd &u, const VectorXd &w, const Structure &st)
{
    VectorXd out(u.size());
    out.head(st.l()) = u.head(st.l()).cwiseProduct(w.head(st.l()));
    for (const auto &c : st.cones())
    {
        const auto us = u.segment(c.offset, c.dim);
        const auto ws = w.segment(c.offset, c.dim);
        out[c.offset] = us.dot(ws);
        out.segment(c.offset + 1, c.dim - 1) = us[0] * ws.tail(c.dim - 1) + ws[0] * us.tail(c.dim - 1);
    }
    return out;
}

/// Solves lambda o x = r cone-wise (lambda interior).
VectorXd jordan_divide(const VectorXd &lambda, const VectorXd &r, const Structure &st)
{
    VectorXd out(r.size());
    out.head(st.l()) = r.head(st.l()).cwiseQuotient(lambda.head(st.l()));
    for (const auto &c : st.cones())
    {
        const auto lam = lambda.segment(c.offset, c.dim);
        const auto rr = r.segment(c.offset, c.dim);
        const double det = jnorm_sq(lam);
        const double x0 = (lam[0] * rr[0] - lam.tail(c.dim - 1).dot(rr.tail(c.dim - 1))) / det;
        out[c.offset] = x0;
        out.segment(c.offset + 1, c.dim - 1) = (rr.tail(c.dim - 1) - x0 * lam.tail(c.dim - 1)) / lam[0];
    }
    return out;
}

VectorXd apply_w(const Scaling &sc, const VectorXd &x, const Structure &st, bool inverse)
{
    VectorXd out(x.size());
    if (inverse)
        out.head(st.l()) = x.head(st.l()).cwiseQuotient(sc.lp_w);
    else
        out.head(st.l()) = x.head(st.l()).cwiseProduct(sc.lp_w);
    for (std::size_t k = 0; k < st.cones().size(); ++k)
    {
        const auto &c = st.cones()[k];
        const auto xs = x.segment(c.offset, c.dim);
        VectorXd v = sc.v[k];
        if (inverse)
            v.tail(c.dim - 1) *= -1.0; // W^-1 = (2 Jv (Jv)' - J) / beta
        VectorXd jx = xs;
        jx.tail(c.dim - 1) *= -1.0;
        const double factor = inverse ? 1.0 / sc.beta[k] : sc.beta[k];
        out.segment(c.offset, c.dim) = factor * (2.0 * v.dot(xs) * v - jx);
    }
    return out;
}

Scaling compute_scaling(const VectorXd &s, const VectorXd &z, const Structure &st, int iteration)
{
    Scaling sc;
    sc.lp_w = s.head(st.l()).cwiseQuotient(z.head(st.l())).cwiseSqrt();
    for (const auto &c : st.cones())
    {
        const auto ss = s.segment(c.offset, c.dim);
        const auto zz = z.segment(c.offset, c.dim);
        const double s2 = jnorm_sq(ss);
        const double z2 = jnorm_sq(zz);
        if (!(s2 > 0.0) || !(z2 > 0.0))
            throw NumericalError("iterate left the interior of a second-order cone", 0.0, iteration);
        const double sn = std::sqrt(s2);
        const double zn = std::sqrt(z2);
        const VectorXd sbar = ss / sn;
        const VectorXd zbar = zz / zn;
        const double gamma = std::sqrt(std::max((1.0 + sbar.dot(zbar)) / 2.0, 0.0));
        VectorXd wbar(c.dim);
        wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
        wbar.tail(c.dim - 1) = (sbar.tail(c.dim - 1) - zbar.tail(c.dim - 1)) / (2.0 * gamma);
        VectorXd v = wbar;
        v[0] += 1.0;
        v /= std::sqrt(2.0 * (wbar[0] + 1.0));
        sc.v.push_back(std::move(v));
        sc.beta.push_back(std::sqrt(sn / zn));
    }
    sc.lambda = apply_w(sc, z, st, false);
    return sc;
}

/// Smallest positive root of a a^2 + 2 b a + c with c > 0, or infinity.
double first_crossing(double a, double b, double c)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (std::abs(a) < 1e-300)
        return b < 0.0 ? -c / (2.0 * b) : inf;
    const double disc = b * b - a * c;
    if (disc < 0.0)
        return inf; // a > 0 here since f(0) = c > 0 and f never vanishes
    const double sq = std::sqrt(disc);
    const double q = -(b + std::copysign(sq, b));
    double best = inf;
    for (double root : {q / a, q != 0.0 ? c / q : inf})
        if (root > 0.0)
            best = std::min(best, root);
    return best;
}

class Factor
{
public:
    void compute(const MatrixXd &H, int iteration)
    {
        H_ = &H;
        const double max_diag = std::max(H.diagonal().maxCoeff(), 1.0);
        double reg = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            MatrixXd work = H;
            if (reg > 0.0)
                work.diagonal().array() += reg;
            llt_.compute(work);
            if (llt_.info() == Eigen::Success)
            {
                const VectorXd d = llt_.matrixLLT().diagonal();
                if (d.minCoeff() > 0.0)
                {
                    condition_ = (d.maxCoeff() / d.minCoeff()) * (d.maxCoeff() / d.minCoeff());
                    return;
                }
            }
            reg = reg == 0.0 ? 1e-14 * max_diag : reg * 100.0;
        }
        throw NumericalError("reduced Newton system is not positive definite", condition_, iteration);
    }

    VectorXd solve(const VectorXd &rhs) const
    {
        VectorXd x = llt_.solve(rhs);
        for (int refine = 0; refine < 2; ++refine)
        {
            const VectorXd r = rhs - H_->selfadjointView<Eigen::Lower>() * x;
            x += llt_.solve(r);
        }
        return x;
    }

    double condition() const { return condition_; }

private:
    const MatrixXd *H_ = nullptr;
    Eigen::LLT<MatrixXd, Eigen::Lower> llt_;
    double condition_ = std::numeric_limits<double>::infinity();
};

struct Direction
{
    VectorXd dx, ds, dz;
};

} // namespace

double max_step_to_boundary(const VectorXd &x, const VectorXd &dx, int num_linear, const std::vector<int> &soc_dims)
{
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < num_linear; ++i)
        if (dx[i] < 0.0)
            alpha = std::min(alpha, -x[i] / dx[i]);
    int offset = num_linear;
    for (int d : soc_dims)
    {
        const auto xs = x.segment(offset, d);
        const auto ds = dx.segment(offset, d);
        const double a = ds[0] * ds[0] - ds.tail(d - 1).squaredNorm();
        const double b = xs[0] * ds[0] - xs.tail(d - 1).dot(ds.tail(d - 1));
        const double c = jnorm_sq(xs);
        if (c <= 0.0)
            return 0.0;
        alpha = std::min(alpha, first_crossing(a, b, c));
        offset += d;
    }
    return alpha;
}

ConeSolution solve_cone_program(const ConeProgram &prog, const ConeSolverSettings &settings)
{
    prog.validate();
    const Structure st(prog);
    const int n = prog.num_variables();
    const VectorXd &c = prog.c;
    const VectorXd &h = prog.h;
    const auto &G = prog.G;

    MatrixXd H(n, n);
    Factor factor;

    // Initial point: least-squares primal, least-norm dual, both shifted into the cone.
    st.assemble(H, nullptr);
    factor.compute(H, 0);
    VectorXd x = factor.solve(G.transpose() * h);
    VectorXd s = h - G * x;
    VectorXd z = -(G * factor.solve(c));
    for (VectorXd *v : {&s, &z})
    {
        const double lo = min_eigenvalue(*v, st);
        if (lo <= 1e-8)
            add_identity(*v, 1.0 - lo, st);
    }

    const double h_scale = std::max(1.0, h.norm());
    const double c_scale = std::max(1.0, c.norm());
    const int degree = std::max(st.degree(), 1);

    ConeSolution best;
    double best_merit = std::numeric_limits<double>::infinity();

    auto record = [&](int iter, double pres, double dres, double gap, double pcost, double dcost) {
        ConeSolution sol;
        sol.x = x;
        sol.s = s;
        sol.z = z;
        sol.iterations = iter;
        sol.primal_residual = pres;
        sol.dual_residual = dres;
        sol.gap = gap;
        sol.primal_objective = pcost;
        sol.dual_objective = dcost;
        return sol;
    };

    std::string failure;
    for (int iter = 0; iter <= settings.max_iterations; ++iter)
    {
        const VectorXd rx = G.transpose() * z + c;
        const VectorXd rz = G * x + s - h;
        const double pres = rz.norm() / h_scale;
        const double dres = rx.norm() / c_scale;
        const double gap = s.dot(z);
        const double pcost = c.dot(x);
        const double dcost = -h.dot(z);
        const double relgap = gap / std::max(std::min(std::abs(pcost), std::abs(dcost)), 1e-12);

        const double merit = std::max({pres, dres, std::min(gap, relgap)});
        if (merit < best_merit)
        {
            best_merit = merit;
            best = record(iter, pres, dres, gap, pcost, dcost);
        }
        if (pres <= settings.feastol && dres <= settings.feastol &&
            (gap <= settings.abstol || relgap <= settings.reltol))
        {
            ConeSolution sol = record(iter, pres, dres, gap, pcost, dcost);
            sol.status = ConeStatus::optimal;
            return sol;
        }
        if (iter == settings.max_iterations)
            break;

        Scaling sc;
        try
        {
            sc = compute_scaling(s, z, st, iter);
            st.assemble(H, &sc);
            factor.compute(H, iter);
        }
        catch (const NumericalError &err)
        {
            // close to the boundary rounding can end the iteration; keep the best point if it is usable
            failure = err.what();
            break;
        }

        auto solve_newton = [&](const VectorXd &rc) {
            Direction d;
            const VectorXd u = jordan_divide(sc.lambda, rc, st);
            const VectorXd wu = apply_w(sc, u, st, false);
            const VectorXd t = apply_w(sc, apply_w(sc, VectorXd(wu + rz), st, true), st, true);
            d.dx = factor.solve(VectorXd(-rx - G.transpose() * t));
            d.dz = apply_w(sc, apply_w(sc, VectorXd(G * d.dx), st, true), st, true) + t;
            // W^-2 is badly scaled near the solution; refine against the dual equation G' dz = -rx itself
            for (int refine = 0; refine < 3; ++refine)
            {
                const VectorXd res = -rx - G.transpose() * d.dz;
                if (res.norm() <= 1e-14 * c_scale)
                    break;
                const VectorXd delta = factor.solve(res);
                d.dx += delta;
                d.dz += apply_w(sc, apply_w(sc, VectorXd(G * delta), st, true), st, true);
            }
            d.ds = -rz - G * d.dx;
            return d;
        };
        auto step_length = [&](const Direction &d) {
            return std::min(max_step_to_boundary(s, d.ds, st.l(), prog.soc_dims),
                            max_step_to_boundary(z, d.dz, st.l(), prog.soc_dims));
        };

        const double mu = gap / degree;
        const VectorXd lam_sq = jordan_product(sc.lambda, sc.lambda, st);

        const Direction affine = solve_newton(-lam_sq);
        const double alpha_aff = std::min(1.0, step_length(affine));
        const double sigma = std::pow(1.0 - alpha_aff, 3);

        VectorXd rc = -lam_sq - jordan_product(apply_w(sc, affine.ds, st, true), apply_w(sc, affine.dz, st, false), st);
        add_identity(rc, sigma * mu, st);
        const Direction dir = solve_newton(rc);
        const double alpha = std::min(1.0, settings.step_fraction * step_length(dir));
        if (!(alpha > 1e-12))
            break;

        x += alpha * dir.dx;
        s += alpha * dir.ds;
        z += alpha * dir.dz;
    }

    if (best_merit <= settings.fallback_tol && best.primal_residual <= settings.fallback_tol &&
        best.dual_residual <= settings.fallback_tol)
    {
        best.status = ConeStatus::inaccurate;
        return best;
    }
    throw NumericalError((failure.empty() ? std::string("interior-point iteration did not converge") : failure) +
                             " (best residual " + std::to_string(best_merit) + ")",
                         factor.condition(), best.iterations);
}

} // namespace cachebeam
