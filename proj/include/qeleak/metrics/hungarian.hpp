#pragma once

// Maximum-weight one-to-one assignment (Kuhn-Munkres with potentials, O(n^3)).
// Rectangular inputs are padded with zero-score dummies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qeleak/core/error.hpp"

namespace qeleak::metrics {

using ScoreMatrix = std::vector<std::vector<double>>;

struct AssignmentResult {
  double total = 0.0;
  double normalized = 0.0;                      // total / number of references (columns)
  std::vector<std::pair<size_t, size_t>> pairs;  // (candidate row, reference column), sorted by row
};

inline AssignmentResult hungarian_assign(const ScoreMatrix& scores) {
  AssignmentResult out;
  const size_t rows = scores.size();
  const size_t cols = rows ? scores[0].size() : 0;
  if (rows == 0 || cols == 0) return out;
  double max_score = -std::numeric_limits<double>::infinity();
  for (const auto& row : scores) {
    if (row.size() != cols) throw UsageError("score matrix rows differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw UsageError("score matrix has a non-finite entry");
      max_score = std::max(max_score, v);
    }
  }
  max_score = std::max(max_score, 0.0);
  const size_t n = std::max(rows, cols);
  auto cost = [&](size_t i, size_t j) { return i < rows && j < cols ? max_score - scores[i][j] : max_score; };

  // 1-based potentials formulation; p[j] = row assigned to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<size_t> p(n + 1, 0), way(n + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    p[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const size_t i0 = p[j0];
      double delta = inf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
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
      const size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (size_t j = 1; j <= n; ++j) {
    const size_t i = p[j] - 1, c = j - 1;
    if (i < rows && c < cols) out.pairs.emplace_back(i, c);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (auto [i, j] : out.pairs) out.total += scores[i][j];
  out.normalized = out.total / static_cast<double>(cols);
  return out;
}

}  // namespace qeleak::metrics
