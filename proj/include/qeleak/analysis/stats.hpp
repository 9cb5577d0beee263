#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qeleak/core/error.hpp"

namespace qeleak::analysis {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  size_t n = 0;
};

// Standard error uses the n-1 sample deviation; a single value has SE 0.
inline MeanSe mean_se(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean_se of an empty sample");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
    return {values[0], 0.0, values.size()};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n), values.size()};
}

enum class PMethod { kExact, kNormal };

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of the first sample
  double p = 1.0;  // two-sided
  PMethod method = PMethod::kNormal;
};

inline const char* to_string(PMethod m) { return m == PMethod::kExact ? "exact" : "normal"; }

inline constexpr size_t kExactMaxTotal = 12;

// Midranks over the pooled sample; returns rank sum of `a` and the tie term
// sum(t^3 - t) over tie groups.
inline std::pair<double, double> rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(a.size() + b.size());
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  double r_a = 0.0, ties = 0.0;
  for (size_t i = 0; i < pooled.size();) {
    size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    for (size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) r_a += midrank;
    i = j;
  }
  return {r_a, ties};
}

// Two-sided exact p from the null distribution of U, enumerating all
// C(n1+n2, n1) placements of the first sample's ranks.
inline double exact_p(size_t n1, size_t n2, double u) {
  const size_t n = n1 + n2;
  std::vector<char> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), 1);
  std::sort(pick.begin(), pick.end());
  size_t total = 0, le = 0, ge = 0;
  const double base = static_cast<double>(n1 * (n1 + 1)) / 2.0;
  do {
    double rs = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (pick[i]) rs += static_cast<double>(i + 1);
    const double uu = rs - base;
    ++total;
    if (uu <= u) ++le;
    if (uu >= u) ++ge;
  } while (std::next_permutation(pick.begin(), pick.end()));
  const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return std::min(1.0, p);
}

// Normal approximation with tie and continuity corrections.
inline double normal_p(size_t n1, size_t n2, double u, double tie_term) {
  const double a = static_cast<double>(n1), b = static_cast<double>(n2), n = a + b;
  const double mu = a * b / 2.0;
  double var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                        bool allow_exact = true) {
  if (a.empty() || b.empty()) throw DataError("mann_whitney_u needs two nonempty samples");
  auto [r_a, ties] = rank_sum(a, b);
  MannWhitneyResult out;
  const double n1 = static_cast<double>(a.size());
  out.u = r_a - n1 * (n1 + 1.0) / 2.0;
  if (allow_exact && a.size() + b.size() <= kExactMaxTotal && ties == 0.0) {
    out.p = exact_p(a.size(), b.size(), out.u);
    out.method = PMethod::kExact;
  } else {
    out.p = normal_p(a.size(), b.size(), out.u, ties);
    out.method = PMethod::kNormal;
  }
  return out;
}

}  // namespace qeleak::analysis
