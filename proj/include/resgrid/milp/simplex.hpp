#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "resgrid/milp/model.hpp"

namespace resgrid {

enum class LpStatus : uint8_t { Optimal, Infeasible, IterLimit, Error };

struct LpResult {
    LpStatus status = LpStatus::Error;
    double objective = 0.0;  // unscaled, includes the model's constant term
    int iterations = 0;
    std::string message;
};

/// Bounded-variable primal simplex over the linear part of a MilpModel,
/// with a dense maintained basis inverse. The solver is stateful: the basis
/// survives between solves, so re-solves after variable-bound changes
/// (branch & bound) or appended rows (cutting planes) warm start from the
/// previous basis. Rows are scaled to unit max coefficient; the objective
/// to unit max cost.
class SimplexSolver {
public:
    explicit SimplexSolver(const MilpModel& model);

    /// Pull rows appended to the model since construction (cut rows).
    /// Existing basis is kept; new slacks enter basic.
    void sync_rows();

    /// Solve with the given structural variable bounds (size = model vars).
    /// The reported objective is in minimization space: for a maximizing
    /// model it is the negated model objective.
    LpResult solve(const std::vector<double>& lb, const std::vector<double>& ub);

    /// Structural variable values of the last solve.
    const std::vector<double>& solution() const { return xs_; }

    int struct_vars() const { return n_; }
    int rows() const { return m_; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    const MilpModel* model_;
    int n_ = 0;
    int m_ = 0;
    std::vector<double> xs_;
};

}  // namespace resgrid
