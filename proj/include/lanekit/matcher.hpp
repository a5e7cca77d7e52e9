#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace lanekit {

/// Dense nonnegative cost matrix: rows are predictions, columns ground truths.
class CostMatrix {
   public:
    CostMatrix(int rows, int cols) : rows_(rows), cols_(cols), cost_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 1 || cols < 1) throw std::invalid_argument("cost matrix must be at least 1x1");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& at(int m, int k) { return cost_[static_cast<std::size_t>(m) * cols_ + k]; }
    double at(int m, int k) const { return cost_[static_cast<std::size_t>(m) * cols_ + k]; }

   private:
    int rows_;
    int cols_;
    std::vector<double> cost_;
};

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row, |pairs| = min(rows, cols)
    double total_cost = 0.0;
};

/// Exact minimum-cost assignment of the smaller side into the larger
/// (rectangular Hungarian, O(max(M,K)^3)). Among equal-cost optima the
/// lexicographically smallest pair list is returned. Throws on non-finite
/// costs.
Assignment solve(const CostMatrix& c);

}  // namespace lanekit
