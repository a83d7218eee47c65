// Copyright 2026 The pevqe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "pevqe/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "pevqe/error.hpp"

namespace pevqe {

namespace {

struct LinePoint {
    double a = 0.0;
    double f = 0.0;
    double d = 0.0; // directional derivative
    Eigen::VectorXd g;
};

// Minimizer of the cubic through two points with slopes, kept inside the
// middle 80% of the bracket; bisection otherwise.
double interpolate(const LinePoint &lo, const LinePoint &hi) {
    const double lo_a = std::min(lo.a, hi.a);
    const double hi_a = std::max(lo.a, hi.a);
    const double margin = 0.1 * (hi_a - lo_a);
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    const double disc = d1 * d1 - lo.d * hi.d;
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
        const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
        if (std::isfinite(a) && a >= lo_a + margin && a <= hi_a - margin) {
            return a;
        }
    }
    return 0.5 * (lo.a + hi.a);
}

class LineSearch {
  public:
    LineSearch(const RetractionObjective &f, const Eigen::VectorXd &dir, double f0, double d0,
               const LbfgsOptions &opts, int &evaluations)
        : f_(f), dir_(dir), f0_(f0), d0_(d0), opts_(opts), evals_(evaluations) {}

    /// Returns true and fills out when a step satisfying at least the
    /// sufficient-decrease condition was found.
    bool run(double a_init, double a_max, LinePoint &out) {
        LinePoint prev{0.0, f0_, d0_, {}};
        double a = std::min(a_init, a_max);
        for (bool first = true;; first = false) {
            if (budget_exhausted()) {
                return fallback(out);
            }
            LinePoint cur = eval(a);
            if (!armijo(cur) || (!first && cur.f >= prev.f)) {
                return zoom(prev, cur, out);
            }
            remember(cur);
            if (std::abs(cur.d) <= -opts_.curvature * d0_) {
                out = cur;
                return true;
            }
            if (cur.d >= 0.0) {
                return zoom(cur, prev, out);
            }
            if (a >= a_max) {
                out = cur;
                return true;
            }
            prev = cur;
            a = std::min(2.0 * a, a_max);
        }
    }

  private:
    LinePoint eval(double a) {
        LinePoint p;
        p.a = a;
        p.g.resize(dir_.size());
        p.f = f_.eval(a * dir_, &p.g);
        p.d = p.g.dot(dir_);
        ++evals_;
        ++used_;
        if (!std::isfinite(p.f) || !p.g.allFinite()) {
            p.f = std::numeric_limits<double>::infinity();
            p.d = 0.0;
        }
        return p;
    }

    // Exact sufficient decrease, or its derivative form once the values are
    // within rounding of f0 and can no longer resolve the decrease.
    bool armijo(const LinePoint &p) const {
        if (p.f <= f0_ + opts_.armijo * p.a * d0_) {
            return true;
        }
        const double eps = 1e-12 * (1.0 + std::abs(f0_));
        return p.f <= f0_ + eps && p.d <= (2.0 * opts_.armijo - 1.0) * d0_;
    }
    bool budget_exhausted() const { return used_ >= opts_.max_line_search; }

    void remember(const LinePoint &p) {
        if (p.a > 0.0 && armijo(p) && (!have_best_ || p.f < best_.f)) {
            best_ = p;
            have_best_ = true;
        }
    }

    bool fallback(LinePoint &out) const {
        if (have_best_) {
            out = best_;
            return true;
        }
        return false;
    }

    bool zoom(LinePoint lo, LinePoint hi, LinePoint &out) {
        for (;;) {
            if (budget_exhausted() || std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, hi.a)) {
                return fallback(out);
            }
            LinePoint cur = eval(interpolate(lo, hi));
            if (!armijo(cur) || cur.f > lo.f) {
                hi = cur;
                continue;
            }
            remember(cur);
            if (std::abs(cur.d) <= -opts_.curvature * d0_) {
                out = cur;
                return true;
            }
            if (cur.d * (hi.a - lo.a) >= 0.0) {
                hi = lo;
            }
            lo = cur;
        }
    }

    const RetractionObjective &f_;
    const Eigen::VectorXd &dir_;
    double f0_, d0_;
    const LbfgsOptions &opts_;
    int &evals_;
    int used_ = 0;
    LinePoint best_;
    bool have_best_ = false;
};

} // namespace

LbfgsResult minimize_lbfgs(const Objective &f, const Eigen::VectorXd &x0,
                           const LbfgsOptions &opts) {
    Eigen::VectorXd x = x0;
    RetractionObjective r{
        [&](const Eigen::VectorXd &step, Eigen::VectorXd *g) { return f(x + step, g); },
        [&](const Eigen::VectorXd &step) { x += step; }};
    LbfgsResult out = minimize_lbfgs(r, x0.size(), opts);
    out.x = x;
    return out;
}

LbfgsResult minimize_lbfgs(const RetractionObjective &f, Eigen::Index n,
                           const LbfgsOptions &opts) {
    if (opts.memory < 1 || opts.max_line_search < 1 || !(opts.armijo > 0.0) ||
        !(opts.curvature > opts.armijo && opts.curvature < 1.0) || !(opts.max_step > 0.0)) {
        throw ValidationError("invalid L-BFGS options");
    }
    LbfgsResult r;
    r.x = Eigen::VectorXd::Zero(n);
    r.gradient = Eigen::VectorXd::Zero(n);
    r.value = f.eval(r.x, &r.gradient);
    r.evaluations = 1;
    if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
        throw ConvergenceError("objective is not finite at the starting point");
    }
    if (n == 0) {
        r.converged = true;
        r.message = "no parameters";
        return r;
    }
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    bool restarted = false;
    for (;;) {
        if (r.gradient.cwiseAbs().maxCoeff() <= opts.gradient_tolerance) {
            r.converged = true;
            r.message = "gradient tolerance reached";
            return r;
        }
        if (r.iterations >= opts.max_iterations) {
            r.message = "maximum iterations reached";
            return r;
        }
        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = r.gradient;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd dir = -q;
        double slope = dir.dot(r.gradient);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -r.gradient;
            slope = dir.dot(r.gradient);
        }
        const double a_max = opts.max_step / dir.cwiseAbs().maxCoeff();
        LineSearch ls(f, dir, r.value, slope, opts, r.evaluations);
        LinePoint next;
        if (!ls.run(1.0, a_max, next)) {
            if (s_hist.empty() || restarted) {
                r.message = "line search failed to decrease the objective";
                return r;
            }
            // Retry once along steepest descent with a fresh memory.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            restarted = true;
            continue;
        }
        restarted = false;
        ++r.iterations;
        const Eigen::VectorXd s = next.a * dir;
        const Eigen::VectorXd y = next.g - r.gradient;
        const double decrease = r.value - next.f;
        f.commit(s);
        r.x += s;
        r.value = next.f;
        r.gradient = next.g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        if (opts.value_tolerance > 0.0 && decrease <= opts.value_tolerance) {
            r.converged = true;
            r.message = "objective change below tolerance";
            return r;
        }
    }
}

} // namespace pevqe
