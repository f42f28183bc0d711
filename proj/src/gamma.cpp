#include "citedyn/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/kernels.hpp"
#include "citedyn/normal.hpp"

namespace citedyn {

double gamma_index(double c, double T, const HistoryParams& params) {
  if (!(c >= 1.0)) throw DomainError("gamma index needs c >= 1");
  if (!(T >= 1.0)) throw DomainError("gamma index needs T >= 1");
  return std::log(c / cumulative_split(params, T).H);
}

ScoringResult score_corpus(const CitationCorpus& corpus,
                           const std::map<Discipline, HistoryParams>& params,
                           const ScoreOptions& options) {
  if (options.fixed_T && *options.fixed_T < 1) throw DomainError("fixed T must be >= 1");

  // Per-discipline lifetime-citation caps.
  std::map<Discipline, std::int64_t> caps;
  if (options.percentile_cap < 1.0) {
    std::map<Discipline, std::vector<std::int64_t>> totals;
    for (const auto& r : corpus.records()) {
      if (r.submit_year < options.min_submit_year) continue;
      for (const auto& d : r.disciplines) {
        if (params.count(d)) totals[d].push_back(r.total_citations());
      }
    }
    for (const auto& [d, v] : totals) caps[d] = percentile_of(v, options.percentile_cap).threshold;
  }

  ScoringResult result;
  std::map<Discipline, std::vector<std::size_t>> by_discipline;
  for (const auto& r : corpus.records()) {
    if (r.submit_year < options.min_submit_year) continue;
    const int observed = corpus.retrieval_year() - r.submit_year + 1;
    for (const auto& d : r.disciplines) {
      if (!params.count(d)) continue;
      if (auto it = caps.find(d); it != caps.end() && r.total_citations() > it->second) continue;
      const int T = options.fixed_T.value_or(observed);
      if (T > observed) {
        ++result.too_young;
        continue;
      }
      const std::int64_t c = r.citations_through_age(T - 1);
      if (c < 1) {
        ++result.zero_citation;
        continue;
      }
      by_discipline[d].push_back(result.scores.size());
      result.scores.push_back({r.eprint_id, d, static_cast<double>(T), c, 0.0});
    }
  }
  for (const auto& [d, idx] : by_discipline) {
    std::vector<double> c(idx.size()), T(idx.size()), g(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      c[k] = static_cast<double>(result.scores[idx[k]].c);
      T[k] = result.scores[idx[k]].T;
    }
    kernels::gamma_batch_parallel(c, T, params.at(d), g);
    for (std::size_t k = 0; k < idx.size(); ++k) result.scores[idx[k]].gamma = g[k];
  }
  return result;
}

std::vector<GammaStarScore> gamma_star_scores(std::span<const GammaScore> scores,
                                              StarGrouping grouping) {
  if (scores.empty()) throw DataError("gamma_star_scores: no scores");
  std::map<std::pair<Discipline, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double key_T = grouping == StarGrouping::DisciplineAndAge ? scores[i].T : 0.0;
    groups[{scores[i].discipline, key_T}].push_back(i);
  }
  std::vector<GammaStarScore> out(scores.size());
  for (const auto& [key, idx] : groups) {
    std::vector<double> g(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) g[k] = scores[idx[k]].gamma;
    const std::vector<double> q = stats::mid_ranks(g);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double Q = std::clamp(q[k], kStarClampLow, kStarClampHigh);
      const GammaScore& s = scores[idx[k]];
      out[idx[k]] = {s.eprint_id, s.discipline, Q, normal_quantile(Q)};
    }
  }
  return out;
}

ReadyReckoner build_reckoner(const Discipline& discipline, const HistoryParams& params,
                             std::span<const double> c_levels, std::span<const int> ages) {
  ReadyReckoner r;
  r.discipline = discipline;
  r.c_levels.assign(c_levels.begin(), c_levels.end());
  r.ages.assign(ages.begin(), ages.end());
  for (double c : c_levels) {
    std::vector<std::optional<double>> row;
    for (int T : ages) {
      const double g = gamma_index(c, T, params);
      row.push_back(g < 0.0 ? std::nullopt : std::optional(g));
    }
    r.values.push_back(std::move(row));
  }
  return r;
}

void write_reckoner_csv(std::ostream& out, std::span<const ReadyReckoner> tables) {
  if (tables.empty()) return;
  out << "discipline,c";
  for (int T : tables.front().ages) out << ",T=" << T;
  out << '\n';
  for (const auto& t : tables) {
    if (t.ages != tables.front().ages) throw DomainError("reckoner tables disagree on ages");
    for (std::size_t i = 0; i < t.c_levels.size(); ++i) {
      out << t.discipline << ',' << csv::format_double(t.c_levels[i]);
      for (const auto& v : t.values[i]) {
        out << ',';
        if (v) out << csv::format_fixed(*v, 2);
      }
      out << '\n';
    }
  }
}

void write_scores_csv(std::ostream& out, std::span<const GammaScore> scores,
                      std::span<const GammaStarScore> stars) {
  if (!stars.empty() && stars.size() != scores.size()) {
    throw DomainError("scores and gamma* lengths differ");
  }
  out << "eprint_id,discipline,T,c,gamma,gamma_star\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const GammaScore& s = scores[i];
    out << s.eprint_id << ',' << s.discipline << ',' << csv::format_double(s.T) << ',' << s.c
        << ',' << csv::format_double(s.gamma) << ',';
    if (!stars.empty()) out << csv::format_double(stars[i].gamma_star);
    out << '\n';
  }
}

GroupComparison group_stats(
    std::span<const LabeledGroup> groups,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>& paired, bool welch) {
  if (groups.size() < 2) throw InsufficientDataError("group_stats: need >= 2 groups");
  std::vector<std::vector<double>> values;
  GroupComparison out;
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw InsufficientDataError("group_stats: group '" + g.label + "' has fewer than 2 values");
    }
    values.push_back(g.values);
    out.groups.push_back(
        {g.label, g.values.size(), stats::mean(g.values), std::sqrt(stats::variance(g.values))});
  }
  out.anova = stats::one_way_anova(values, welch);
  out.pairwise = stats::bonferroni_pairwise(values, welch);
  if (paired) {
    if (paired->first.size() != paired->second.size()) {
      throw DomainError("group_stats: paired vectors differ in length");
    }
    out.pearson_r = stats::pearson_r(paired->first, paired->second);
  }
  return out;
}

stats::DensityCurve kde_curve(std::span<const double> values, double half_width,
                              stats::Kernel kernel) {
  return stats::kde(values, half_width, kernel);
}

}  // namespace citedyn
