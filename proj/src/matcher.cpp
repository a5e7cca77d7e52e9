#include "lanekit/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lanekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Classic potentials form of the Hungarian algorithm for n rows <= m cols,
// O(n^2 m). Returns the optimal total; col_of_row receives the matched column
// per row; u/v receive the final potentials (1-based internally).
template <typename CostFn>
double hungarian_oriented(CostFn&& cost, int n, int m, std::vector<int>& col_of_row, std::vector<double>& u,
                          std::vector<double>& v) {
    u.assign(n + 1, 0.0);
    v.assign(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<double> minv(m + 1);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    col_of_row.assign(n, -1);
    double total = 0.0;
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            col_of_row[p[j] - 1] = j - 1;
            total += cost(p[j] - 1, j - 1);
        }
    }
    return total;
}

// Optimal assignment over the submatrix of `keep_rows` x `keep_cols`,
// matching min(|rows|, |cols|) pairs. Used by the tie-break refinement.
double subsolve(const CostMatrix& c, const std::vector<int>& keep_rows, const std::vector<int>& keep_cols,
                std::vector<std::pair<int, int>>* pairs_out) {
    if (pairs_out != nullptr) pairs_out->clear();
    int nr = static_cast<int>(keep_rows.size());
    int nc = static_cast<int>(keep_cols.size());
    if (nr == 0 || nc == 0) return 0.0;
    bool transpose = nr > nc;
    int n = transpose ? nc : nr;
    int m = transpose ? nr : nc;
    auto cost = [&](int i, int j) {
        int r = transpose ? keep_rows[j] : keep_rows[i];
        int k = transpose ? keep_cols[i] : keep_cols[j];
        return c.at(r, k);
    };
    std::vector<int> match;
    std::vector<double> u, v;
    double total = hungarian_oriented(cost, n, m, match, u, v);
    if (pairs_out != nullptr) {
        for (int i = 0; i < n; ++i) {
            int r = transpose ? keep_rows[match[i]] : keep_rows[i];
            int k = transpose ? keep_cols[i] : keep_cols[match[i]];
            pairs_out->emplace_back(r, k);
        }
    }
    return total;
}

}  // namespace

Assignment solve(const CostMatrix& c) {
    const int rows = c.rows();
    const int cols = c.cols();
    double max_abs = 0.0;
    for (int m = 0; m < rows; ++m)
        for (int k = 0; k < cols; ++k) {
            double v = c.at(m, k);
            if (!std::isfinite(v)) throw std::invalid_argument("cost matrix entries must be finite");
            max_abs = std::max(max_abs, std::fabs(v));
        }

    const bool transpose = rows > cols;
    const int n = transpose ? cols : rows;
    const int m = transpose ? rows : cols;
    auto oriented = [&](int i, int j) { return transpose ? c.at(j, i) : c.at(i, j); };

    std::vector<int> col_of_row;
    std::vector<double> u, v;
    const double best_total = hungarian_oriented(oriented, n, m, col_of_row, u, v);

    // Reduced-cost slack of an original (row, col) edge under the potentials.
    auto slack = [&](int r, int k) {
        return transpose ? c.at(r, k) - u[k + 1] - v[r + 1] : c.at(r, k) - u[r + 1] - v[k + 1];
    };
    const double tight_tol = 1e-7 * (1.0 + max_abs);

    // `current` always holds an optimal completion consistent with everything
    // committed so far; committing its own edge for a row therefore needs no
    // re-solve. Only a strictly smaller tight candidate (ties live in the
    // tight-edge graph) triggers a verification solve on the remainder, and a
    // verified candidate replaces `current` with the re-solved completion.
    std::vector<int> current(rows, -1);
    for (int i = 0; i < n; ++i) {
        int r = transpose ? col_of_row[i] : i;
        int k = transpose ? i : col_of_row[i];
        current[r] = k;
    }

    const double total_tol = 1e-9 * (1.0 + std::fabs(best_total));
    std::vector<char> col_used(cols, 0);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(n);
    double base = 0.0;
    std::vector<int> rest_rows, rest_cols;
    std::vector<std::pair<int, int>> completion;

    for (int r = 0; r < rows && static_cast<int>(pairs.size()) < n; ++r) {
        const int own = current[r];
        for (int k = 0; k < cols; ++k) {
            if (col_used[k]) continue;
            if (k == own) {
                pairs.emplace_back(r, k);
                base += c.at(r, k);
                col_used[k] = 1;
                break;
            }
            if (slack(r, k) > tight_tol) continue;
            rest_rows.clear();
            for (int rr = r + 1; rr < rows; ++rr) rest_rows.push_back(rr);
            rest_cols.clear();
            for (int kk = 0; kk < cols; ++kk)
                if (!col_used[kk] && kk != k) rest_cols.push_back(kk);
            const double total = base + c.at(r, k) + subsolve(c, rest_rows, rest_cols, &completion);
            if (std::fabs(total - best_total) <= total_tol) {
                pairs.emplace_back(r, k);
                base += c.at(r, k);
                col_used[k] = 1;
                for (int rr = r + 1; rr < rows; ++rr) current[rr] = -1;
                for (const auto& [cr, ck] : completion) current[cr] = ck;
                break;
            }
        }
        // no break for rows that stay unmatched (rows > cols case)
    }

    Assignment result;
    result.pairs = std::move(pairs);
    result.total_cost = 0.0;
    for (const auto& [r, k] : result.pairs) result.total_cost += c.at(r, k);
    return result;
}

}  // namespace lanekit
