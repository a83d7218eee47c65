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
#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace pevqe {

/// Returns f(x); when grad is non-null also writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd *grad)>;

struct LbfgsOptions {
    int max_iterations = 500;
    int memory = 12;
    /// Converged when the largest gradient component is at most this.
    double gradient_tolerance = 1e-7;
    /// Also converged when an accepted step lowers f by at most this
    /// (disabled when zero).
    double value_tolerance = 0.0;
    /// Function evaluations allowed per line search.
    int max_line_search = 40;
    /// Sufficient-decrease and curvature constants of the strong Wolfe test.
    double armijo = 1e-4;
    double curvature = 0.9;
    /// Largest allowed step length (infinity norm).
    double max_step = 0.5;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

/// Limited-memory BFGS with a strong Wolfe line search (unbounded).
LbfgsResult minimize_lbfgs(const Objective &f, const Eigen::VectorXd &x0,
                           const LbfgsOptions &opts = {});

/// Objective on a manifold through a retraction. eval(step, grad) returns the
/// value at the current point moved by step and, when grad is non-null, the
/// gradient in the tangent coordinates of that moved point; the derivative of
/// eval(a d) in a must equal grad . d. commit(step) makes the moved point
/// current.
struct RetractionObjective {
    std::function<double(const Eigen::VectorXd &step, Eigen::VectorXd *grad)> eval;
    std::function<void(const Eigen::VectorXd &step)> commit;
};

/// L-BFGS in moving tangent coordinates; curvature pairs are carried over
/// between frames unchanged. result.x holds the sum of committed steps.
LbfgsResult minimize_lbfgs(const RetractionObjective &f, Eigen::Index n,
                           const LbfgsOptions &opts = {});

} // namespace pevqe
