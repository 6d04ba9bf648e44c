#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace quadinfer {

// Default relative pivot tolerance for rank decisions, applied as
// tol * (largest diagonal entry of X^T X).
inline constexpr double kRankTol = 1e-10;

// Response vector plus design matrix, with centering and rank-repair metadata.
// Immutable after construction; safe to share across threads.
struct Dataset {
    Eigen::VectorXd y;                // length-n response
    Eigen::MatrixXd x;                // n x p design, full column rank
    bool centered = false;            // column means of x and mean of y are 0
    std::vector<int> dropped_columns; // original column indices removed by rank repair

    int n() const { return static_cast<int>(x.rows()); }
    int p() const { return static_cast<int>(x.cols()); }
};

// Returns a copy of `raw` with y and every column of x shifted to mean zero.
// The input is untouched. Throws DimensionError if there are fewer than 2 rows.
Dataset center_dataset(const Dataset& raw);

// Removes linearly dependent columns so the result has full column rank at the
// given relative pivot tolerance. The rule is deterministic: columns are
// admitted left to right, and a column whose residual pivot falls at or below
// tol * max-diagonal is dropped (so of two duplicates the later one goes).
// Returns the repaired matrix and the dropped original column indices in
// ascending order. Throws DegenerateDesignError if nothing survives.
std::pair<Eigen::MatrixXd, std::vector<int>>
repair_rank(const Eigen::MatrixXd& x, double tol = kRankTol);

} // namespace quadinfer
