#pragma once

// Stratified report: ALL / M / not-M groups, per-repeat group means
// aggregated as mean +/- SE across repeats, Mann-Whitney U comparisons.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qeleak/analysis/stats.hpp"
#include "qeleak/core/config.hpp"
#include "qeleak/core/dataset.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/match/matcher.hpp"
#include "qeleak/metrics/classification.hpp"

namespace qeleak::analysis {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kGroupAll = "ALL";
inline constexpr const char* kGroupM = "M";
inline constexpr const char* kGroupNotM = "not_M";
inline constexpr const char* kF1 = "f1";

struct Stratification {
  std::vector<std::string> matched;
  std::vector<std::string> unmatched;
};

inline Stratification stratify(const std::vector<std::string>& claim_ids,
                               const std::vector<match::MatchRecord>& records) {
  std::map<std::string, bool> by_claim;
  for (const auto& r : records)
    if (!by_claim.emplace(r.claim_id, r.matched).second)
      throw DataError("duplicate match record for claim '" + r.claim_id + "'");
  Stratification s;
  for (const auto& id : claim_ids) {
    auto it = by_claim.find(id);
    if (it == by_claim.end()) throw DataError("no match record for claim '" + id + "'");
    (it->second ? s.matched : s.unmatched).push_back(id);
  }
  if (by_claim.size() != claim_ids.size()) {
    std::set<std::string> known(claim_ids.begin(), claim_ids.end());
    for (const auto& [id, m] : by_claim)
      if (!known.count(id)) throw DataError("match record for unknown claim '" + id + "'");
  }
  return s;
}

struct ClaimOutcome {
  std::string claim_id;
  std::optional<Label> gold;
  std::map<std::string, double> scores;  // per-claim metrics
  std::optional<Label> predicted;
};

struct RepeatOutcome {
  std::vector<ClaimOutcome> claims;
  std::vector<match::MatchRecord> matches;
};

struct ReportInput {
  std::string method;
  std::string baseline_name;
  std::string dataset;
  std::string evidence_mode;
  std::string model_id;
  int k = 5;
  SignificanceUnit unit = SignificanceUnit::kClaim;
  std::vector<std::string> metrics;  // display order; "f1" is group-level
  LabelSet labels;
  std::vector<ClaimOutcome> baseline;
  std::vector<RepeatOutcome> repeats;
  std::map<std::string, uint64_t> flags;
};

inline std::string metric_display_name(const std::string& m) {
  if (m.rfind("recall@", 0) == 0) return "Recall@" + m.substr(7);
  if (m.rfind("ndcg@", 0) == 0) return "NDCG@" + m.substr(5);
  if (m == "meteor") return "METEOR";
  if (m == "bertscore") return "BERTScore";
  if (m == kF1) return "F1";
  return m;
}

inline double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

namespace detail {

inline std::optional<double> group_metric(const std::string& metric, const std::vector<const ClaimOutcome*>& group,
                                          const LabelSet& labels) {
  if (group.empty()) return std::nullopt;
  if (metric == kF1) {
    std::vector<Label> preds, golds;
    for (const auto* c : group)
      if (c->gold && c->predicted) {
        preds.push_back(*c->predicted);
        golds.push_back(*c->gold);
      }
    if (golds.empty()) return std::nullopt;
    return metrics::macro_f1(preds, golds, labels);
  }
  double sum = 0.0;
  size_t n = 0;
  for (const auto* c : group) {
    auto it = c->scores.find(metric);
    if (it == c->scores.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline std::vector<double> claim_scores(const std::string& metric, const std::vector<const ClaimOutcome*>& group) {
  std::vector<double> out;
  for (const auto* c : group)
    if (auto it = c->scores.find(metric); it != c->scores.end()) out.push_back(it->second);
  return out;
}

inline ojson test_json(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return nullptr;
  auto r = mann_whitney_u(a, b);
  return ojson{{"u", r.u}, {"p", r.p}, {"method", to_string(r.method)}, {"n1", a.size()}, {"n2", b.size()}};
}

inline ojson summarize_tests(const ojson& tests) {
  std::optional<double> max_p, min_p;
  size_t n = 0;
  for (const auto& t : tests) {
    if (t.is_null()) continue;
    const double p = t["p"].get<double>();
    max_p = max_p ? std::max(*max_p, p) : p;
    min_p = min_p ? std::min(*min_p, p) : p;
    ++n;
  }
  ojson out = {{"tests", tests}, {"n_tests", n}};
  out["max_p"] = max_p ? ojson(*max_p) : ojson(nullptr);
  out["min_p"] = min_p ? ojson(*min_p) : ojson(nullptr);
  return out;
}

}  // namespace detail

inline ojson build_report(const ReportInput& in) {
  if (in.repeats.empty()) throw DataError("report needs at least one repeat");
  std::vector<std::string> claim_ids;
  for (const auto& c : in.baseline) claim_ids.push_back(c.claim_id);
  for (const auto& rep : in.repeats)
    if (rep.claims.size() != in.baseline.size())
      throw DataError("inconsistent claim counts across repeats");

  const std::vector<std::string> group_names = {kGroupAll, kGroupM, kGroupNotM};
  const size_t R = in.repeats.size();
  // groups[r][g] -> claims
  std::vector<std::map<std::string, std::vector<const ClaimOutcome*>>> groups(R);
  std::vector<double> matched_rate;
  for (size_t r = 0; r < R; ++r) {
    const auto& rep = in.repeats[r];
    std::map<std::string, const ClaimOutcome*> by_id;
    for (const auto& c : rep.claims) by_id[c.claim_id] = &c;
    for (const auto& id : claim_ids)
      if (!by_id.count(id)) throw DataError("repeat " + std::to_string(r) + " lacks claim '" + id + "'");
    const Stratification s = stratify(claim_ids, rep.matches);
    for (const auto& id : claim_ids) groups[r][kGroupAll].push_back(by_id[id]);
    for (const auto& id : s.matched) groups[r][kGroupM].push_back(by_id[id]);
    for (const auto& id : s.unmatched) groups[r][kGroupNotM].push_back(by_id[id]);
    matched_rate.push_back(claim_ids.empty() ? 0.0 : static_cast<double>(s.matched.size()) / claim_ids.size());
  }

  ojson report;
  report["method"] = in.method;
  report["baseline"] = in.baseline_name;
  report["dataset"] = in.dataset;
  report["evidence_mode"] = in.evidence_mode;
  report["model_id"] = in.model_id;
  report["k"] = in.k;
  report["repeats"] = R;
  report["claims"] = claim_ids.size();
  report["metrics"] = in.metrics;

  std::vector<const ClaimOutcome*> base_all;
  for (const auto& c : in.baseline) base_all.push_back(&c);
  ojson base_row = ojson::object();
  for (const auto& m : in.metrics) {
    auto v = detail::group_metric(m, base_all, in.labels);
    base_row[m] = v ? ojson(round4(*v)) : ojson(nullptr);
  }
  report["baseline_row"] = {{"group", kGroupAll}, {"n_claims", claim_ids.size()}, {"metrics", base_row}};

  // Per-repeat group means, kept for the repeat-unit tests.
  std::map<std::string, std::map<std::string, std::vector<std::optional<double>>>> per_repeat;
  ojson groups_json = ojson::object();
  for (const auto& g : group_names) {
    ojson gj;
    std::vector<size_t> counts;
    for (size_t r = 0; r < R; ++r) counts.push_back(groups[r][g].size());
    gj["claims_per_repeat"] = counts;
    ojson mj = ojson::object();
    for (const auto& m : in.metrics) {
      std::vector<double> values;
      ojson pr = ojson::array();
      for (size_t r = 0; r < R; ++r) {
        auto v = detail::group_metric(m, groups[r][g], in.labels);
        per_repeat[g][m].push_back(v);
        pr.push_back(v ? ojson(round4(*v)) : ojson(nullptr));
        if (v) values.push_back(*v);
      }
      if (values.empty()) {
        mj[m] = nullptr;
        continue;
      }
      const MeanSe s = mean_se(values);
      mj[m] = {{"mean", round4(s.mean)}, {"se", round4(s.se)}, {"n_repeats", s.n}, {"per_repeat", pr}};
    }
    gj["metrics"] = mj;
    groups_json[g] = gj;
  }
  report["groups"] = groups_json;

  const MeanSe mr = mean_se(matched_rate);
  ojson mr_pr = ojson::array();
  for (double x : matched_rate) mr_pr.push_back(round4(x));
  report["matched_rate"] = {{"mean", round4(mr.mean)}, {"se", round4(mr.se)}, {"per_repeat", mr_pr}};

  ojson sig;
  sig["test"] = "mann-whitney-u two-sided";
  sig["unit"] = in.unit == SignificanceUnit::kClaim ? "claim" : "repeat";
  ojson bve = ojson::object(), mvn = ojson::object();
  if (in.unit == SignificanceUnit::kClaim) {
    sig["note"] = "per-claim scores within each repeat; group-level F1 has no per-claim sample and is not tested";
    for (const auto& m : in.metrics) {
      if (m == kF1) continue;
      ojson t1 = ojson::array(), t2 = ojson::array();
      const auto base = detail::claim_scores(m, base_all);
      for (size_t r = 0; r < R; ++r) {
        t1.push_back(detail::test_json(detail::claim_scores(m, groups[r][kGroupAll]), base));
        t2.push_back(detail::test_json(detail::claim_scores(m, groups[r][kGroupM]),
                                       detail::claim_scores(m, groups[r][kGroupNotM])));
      }
      bve[m] = detail::summarize_tests(t1);
      mvn[m] = detail::summarize_tests(t2);
    }
  } else {
    sig["note"] = "per-repeat group means; the baseline contributes its single value";
    for (const auto& m : in.metrics) {
      auto collect = [&](const std::string& g) {
        std::vector<double> v;
        for (const auto& x : per_repeat[g][m])
          if (x) v.push_back(*x);
        return v;
      };
      std::vector<double> base;
      if (!base_row[m].is_null()) base.push_back(base_row[m].get<double>());
      bve[m] = detail::summarize_tests(ojson::array({detail::test_json(collect(kGroupAll), base)}));
      mvn[m] = detail::summarize_tests(ojson::array({detail::test_json(collect(kGroupM), collect(kGroupNotM))}));
    }
  }
  sig["expansion_vs_baseline"] = bve;
  sig["m_vs_not_m"] = mvn;
  report["significance"] = sig;

  ojson flags = ojson::object();
  for (const auto& [k, v] : in.flags) flags[k] = v;
  report["flags"] = flags;
  return report;
}

namespace detail {

inline std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x * 100.0);
  std::string s = buf;
  return s == "-0.0" ? "0.0" : s;
}

inline std::string pad(const std::string& s, size_t width) {
  // Column widths count code points so the not-M label lines up.
  size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps >= width ? s : s + std::string(width - cps, ' ');
}

inline std::string fmt_p(const ojson& p) {
  if (p.is_null()) return "n/a";
  char buf[32];
  const double v = p.get<double>();
  if (v < 0.001) std::snprintf(buf, sizeof buf, "%.2e", v);
  else std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

inline std::string dataset_display_name(const std::string& d) {
  if (d == "fever") return "FEVER";
  if (d == "scifact") return "SciFact";
  if (d == "averitec") return "AVeriTeC";
  return d;
}

inline std::string method_display_name(const std::string& m) {
  if (m == "query2doc") return "Query2doc";
  if (m == "hyde") return "HyDE";
  return m;
}

inline std::string render_report_text(const ojson& r) {
  using detail::pad;
  const auto metrics = r["metrics"].get<std::vector<std::string>>();
  constexpr size_t kMethodW = 12, kDataW = 6, kCellW = 14;
  std::ostringstream out;
  out << "Fact verification, " << dataset_display_name(r["dataset"]) << " (" << r["evidence_mode"].get<std::string>()
      << "-based evidence), k=" << r["k"].get<int>() << ", " << r["repeats"].get<size_t>() << " repeats, "
      << r["claims"].get<size_t>() << " claims, model " << r["model_id"].get<std::string>() << "\n";
  out << "Values x100; expansion rows are mean \xC2\xB1 SE over repeats.\n\n";

  std::string header = pad("Method", kMethodW) + pad("Data", kDataW) + "| ";
  for (const auto& m : metrics) header += pad(metric_display_name(m), kCellW);
  while (!header.empty() && header.back() == ' ') header.pop_back();
  const std::string rule(kMethodW + kDataW + 2 + kCellW * metrics.size(), '-');
  out << header << "\n" << rule << "\n";

  auto emit = [&](const std::string& method, const std::string& data, const std::vector<std::string>& cells) {
    std::string line = pad(method, kMethodW) + pad(data, kDataW) + "| ";
    for (const auto& c : cells) line += pad(c, kCellW);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  };

  std::vector<std::string> base_cells;
  for (const auto& m : metrics) {
    const auto& v = r["baseline_row"]["metrics"][m];
    base_cells.push_back(v.is_null() ? "-" : detail::pct(v.get<double>()));
  }
  emit(r["baseline"].get<std::string>(), "ALL", base_cells);
  out << rule << "\n";

  const std::vector<std::pair<std::string, std::string>> groups = {
      {kGroupAll, "ALL"}, {kGroupM, "M"}, {kGroupNotM, "\xC2\xACM"}};
  bool first = true;
  for (const auto& [key, label] : groups) {
    std::vector<std::string> cells;
    for (const auto& m : metrics) {
      const auto& cell = r["groups"][key]["metrics"][m];
      cells.push_back(cell.is_null() ? "-"
                                     : detail::pct(cell["mean"].get<double>()) + " \xC2\xB1 " +
                                           detail::pct(cell["se"].get<double>()));
    }
    emit(first ? method_display_name(r["method"].get<std::string>()) : "", label, cells);
    first = false;
  }
  out << rule << "\n\n";

  const auto& counts_m = r["groups"][kGroupM]["claims_per_repeat"];
  const auto& counts_n = r["groups"][kGroupNotM]["claims_per_repeat"];
  out << "Matched (M) proportion: " << detail::pct(r["matched_rate"]["mean"].get<double>()) << " \xC2\xB1 "
      << detail::pct(r["matched_rate"]["se"].get<double>()) << "\n";
  out << "Claims per repeat (M / \xC2\xACM):";
  for (size_t i = 0; i < counts_m.size(); ++i)
    out << " " << counts_m[i].get<size_t>() << "/" << counts_n[i].get<size_t>();
  out << "\n\n";

  const auto& sig = r["significance"];
  out << "Significance: Mann-Whitney U, two-sided, unit=" << sig["unit"].get<std::string>() << "\n";
  auto sig_rows = [&](const char* key, const char* title) {
    for (const auto& m : metrics) {
      if (!sig[key].contains(m)) continue;
      const auto& s = sig[key][m];
      out << "  " << pad(title, 24) << pad(metric_display_name(m), 11) << "max p = " << detail::fmt_p(s["max_p"])
          << "  (" << s["n_tests"].get<size_t>() << " tests)\n";
    }
  };
  sig_rows("expansion_vs_baseline", "expansion vs baseline");
  sig_rows("m_vs_not_m", "M vs \xC2\xACM");
  out << "\nFlags:";
  if (r["flags"].empty()) out << " none";
  for (const auto& [k, v] : r["flags"].items()) out << " " << k << "=" << v.get<uint64_t>();
  out << "\n";
  return out.str();
}

}  // namespace qeleak::analysis
