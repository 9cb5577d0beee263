#pragma once

// METEOR with exact and Porter-stem matching stages (no synonym stage).
//
// Alignment: stage 1 pairs identical tokens, stage 2 pairs remaining tokens with
// equal stems. Each stage takes the maximum number of pairs; among maximal
// alignments the one with the fewest chunks is chosen.
//
//   P = m/|cand|, R = m/|ref|, Fmean = P*R / (alpha*P + (1-alpha)*R)
//   penalty = gamma * (chunks/m)^beta, score = Fmean * (1 - penalty)

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qeleak/core/text.hpp"
#include "qeleak/lexical/porter.hpp"

namespace qeleak::metrics {

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  // Search nodes explored before settling for the best alignment found so far.
  size_t search_budget = 200000;
};

struct MeteorAlignment {
  std::vector<int> ref_of;  // per candidate token: aligned reference position or -1
  size_t matches = 0;
  size_t chunks = 0;
};

namespace detail {

class MeteorAligner {
 public:
  MeteorAligner(std::vector<std::string> cand, std::vector<std::string> ref, size_t budget)
      : cand_(std::move(cand)), ref_(std::move(ref)), budget_(budget) {
    for (const auto& t : cand_) cand_stem_.push_back(lexical::porter_stem(t));
    for (const auto& t : ref_) ref_stem_.push_back(lexical::porter_stem(t));
    std::map<std::string, int> cc, rc, cs, rs;
    for (const auto& t : cand_) ++cc[t];
    for (const auto& t : ref_) ++rc[t];
    for (const auto& [w, n] : cc) {
      if (auto it = rc.find(w); it != rc.end()) exact_quota_[w] = std::min(n, it->second);
    }
    for (size_t i = 0; i < cand_.size(); ++i) ++cs[cand_stem_[i]];
    for (size_t j = 0; j < ref_.size(); ++j) ++rs[ref_stem_[j]];
    // Tokens left after stage 1, per stem class.
    for (const auto& [w, q] : exact_quota_) {
      cs[lexical::porter_stem(w)] -= q;
      rs[lexical::porter_stem(w)] -= q;
    }
    for (const auto& [s, n] : cs) {
      if (auto it = rs.find(s); it != rs.end() && std::min(n, it->second) > 0) stem_quota_[s] = std::min(n, it->second);
    }
    for (const auto& [w, q] : exact_quota_) total_ += static_cast<size_t>(q);
    for (const auto& [s, q] : stem_quota_) total_ += static_cast<size_t>(q);
  }

  MeteorAlignment solve() {
    MeteorAlignment out;
    out.ref_of.assign(cand_.size(), -1);
    if (total_ == 0) return out;
    best_ = greedy();
    best_cont_ = continuations(best_);
    cur_.assign(cand_.size(), -1);
    used_.assign(ref_.size(), 0);
    exact_left_ = exact_quota_;
    stem_left_ = stem_quota_;
    dfs(0, 0, 0);
    out.ref_of = best_;
    out.matches = total_;
    out.chunks = total_ - static_cast<size_t>(best_cont_);
    return out;
  }

 private:
  // k-th occurrence pairs with k-th occurrence, stage by stage.
  std::vector<int> greedy() const {
    std::vector<int> ref_of(cand_.size(), -1);
    std::vector<char> used(ref_.size(), 0);
    auto left = exact_quota_;
    for (size_t i = 0; i < cand_.size(); ++i) {
      auto it = left.find(cand_[i]);
      if (it == left.end() || it->second == 0) continue;
      for (size_t j = 0; j < ref_.size(); ++j) {
        if (!used[j] && ref_[j] == cand_[i]) {
          used[j] = 1;
          ref_of[i] = static_cast<int>(j);
          --it->second;
          break;
        }
      }
    }
    auto sleft = stem_quota_;
    for (size_t i = 0; i < cand_.size(); ++i) {
      if (ref_of[i] >= 0) continue;
      auto it = sleft.find(cand_stem_[i]);
      if (it == sleft.end() || it->second == 0) continue;
      for (size_t j = 0; j < ref_.size(); ++j) {
        if (!used[j] && ref_stem_[j] == cand_stem_[i] && ref_[j] != cand_[i]) {
          used[j] = 1;
          ref_of[i] = static_cast<int>(j);
          --it->second;
          break;
        }
      }
    }
    return ref_of;
  }

  static int continuations(const std::vector<int>& ref_of) {
    int c = 0;
    for (size_t i = 1; i < ref_of.size(); ++i)
      if (ref_of[i] >= 0 && ref_of[i - 1] >= 0 && ref_of[i] == ref_of[i - 1] + 1) ++c;
    return c;
  }

  bool feasible_from(size_t i) const {
    std::map<std::string, int> need_exact = exact_left_;
    std::map<std::string, int> need_stem = stem_left_;
    std::map<std::string, int> avail_word, avail_stem;
    for (size_t t = i; t < cand_.size(); ++t) {
      ++avail_word[cand_[t]];
      ++avail_stem[cand_stem_[t]];
    }
    for (const auto& [w, q] : need_exact) {
      if (q == 0) continue;
      if (avail_word[w] < q) return false;
      need_stem[lexical::porter_stem(w)] += q;
    }
    for (const auto& [s, q] : need_stem)
      if (q > 0 && avail_stem[s] < q) return false;
    return true;
  }

  void dfs(size_t i, size_t aligned, int cont) {
    if (nodes_++ > budget_) return;
    if (cont + static_cast<int>(total_ - aligned) <= best_cont_) return;
    if (i == cand_.size()) {
      if (aligned == total_ && cont > best_cont_) {
        best_cont_ = cont;
        best_ = cur_;
      }
      return;
    }
    const int prev = i > 0 ? cur_[i - 1] : -1;
    std::vector<size_t> options;
    auto ex = exact_left_.find(cand_[i]);
    const bool exact_ok = ex != exact_left_.end() && ex->second > 0;
    auto st = stem_left_.find(cand_stem_[i]);
    const bool stem_ok = st != stem_left_.end() && st->second > 0;
    if (exact_ok || stem_ok) {
      for (size_t j = 0; j < ref_.size(); ++j) {
        if (used_[j]) continue;
        if ((exact_ok && ref_[j] == cand_[i]) || (stem_ok && ref_[j] != cand_[i] && ref_stem_[j] == cand_stem_[i]))
          options.push_back(j);
      }
      // Try the continuing position first.
      std::stable_partition(options.begin(), options.end(),
                            [&](size_t j) { return prev >= 0 && static_cast<int>(j) == prev + 1; });
    }
    for (size_t j : options) {
      const bool is_exact = ref_[j] == cand_[i];
      int& quota = is_exact ? ex->second : st->second;
      --quota;
      used_[j] = 1;
      cur_[i] = static_cast<int>(j);
      if (feasible_from(i + 1))
        dfs(i + 1, aligned + 1, cont + (prev >= 0 && static_cast<int>(j) == prev + 1 ? 1 : 0));
      cur_[i] = -1;
      used_[j] = 0;
      ++quota;
    }
    if (feasible_from(i + 1)) dfs(i + 1, aligned, cont);
  }

  std::vector<std::string> cand_, ref_, cand_stem_, ref_stem_;
  std::map<std::string, int> exact_quota_, stem_quota_, exact_left_, stem_left_;
  size_t total_ = 0;
  size_t budget_;
  size_t nodes_ = 0;
  std::vector<int> best_, cur_;
  std::vector<char> used_;
  int best_cont_ = -1;
};

}  // namespace detail

inline MeteorAlignment meteor_align(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                                    size_t budget = MeteorParams{}.search_budget) {
  return detail::MeteorAligner(cand, ref, budget).solve();
}

inline double meteor_from_tokens(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                                 const MeteorParams& p = {}) {
  if (cand.empty() || ref.empty()) return 0.0;
  auto a = meteor_align(cand, ref, p.search_budget);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double prec = m / static_cast<double>(cand.size());
  const double rec = m / static_cast<double>(ref.size());
  const double fmean = prec * rec / (p.alpha * prec + (1.0 - p.alpha) * rec);
  const double penalty = p.gamma * std::pow(static_cast<double>(a.chunks) / m, p.beta);
  return fmean * (1.0 - penalty);
}

// Tokens are lowercased alphanumeric runs.
inline double meteor(std::string_view candidate, std::string_view reference, const MeteorParams& p = {}) {
  return meteor_from_tokens(text::word_tokens(candidate), text::word_tokens(reference), p);
}

}  // namespace qeleak::metrics
