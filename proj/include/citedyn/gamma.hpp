#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "citedyn/corpus.hpp"
#include "citedyn/history.hpp"
#include "citedyn/stats.hpp"

namespace citedyn {

/// ln(c / H(T)). Throws DomainError for c < 1 or T < 1.
double gamma_index(double c, double T, const HistoryParams& params);

struct GammaScore {
  std::string eprint_id;
  Discipline discipline;
  double T = 1.0;
  std::int64_t c = 1;
  double gamma = 0.0;
};

struct GammaStarScore {
  std::string eprint_id;
  Discipline discipline;
  double Q = 0.5;
  double gamma_star = 0.0;
};

struct ScoreOptions {
  /// Evaluate every eprint at this T (eprints younger than T are skipped).
  /// Unset: T = retrieval_year - submit_year + 1, all observed citations.
  std::optional<int> fixed_T;
  /// Eprints above this lifetime-citation percentile of their discipline are
  /// skipped.
  double percentile_cap = 1.0;
  int min_submit_year = kFirstSubmitYear;
};

struct ScoringResult {
  std::vector<GammaScore> scores;
  /// Eligible (eprint, discipline) pairs left unscored because c = 0.
  std::int64_t zero_citation = 0;
  std::int64_t too_young = 0;
};

/// c(T) counts citations at ages 0..T-1. Disciplines without params are
/// skipped.
ScoringResult score_corpus(const CitationCorpus& corpus,
                           const std::map<Discipline, HistoryParams>& params,
                           const ScoreOptions& options = {});

enum class StarGrouping { Discipline, DisciplineAndAge };

inline constexpr double kStarClampLow = 0.001;
inline constexpr double kStarClampHigh = 0.999;

/// Output order matches input order.
std::vector<GammaStarScore> gamma_star_scores(std::span<const GammaScore> scores,
                                              StarGrouping grouping = StarGrouping::Discipline);

struct ReadyReckoner {
  Discipline discipline;
  std::vector<double> c_levels;
  std::vector<int> ages;
  /// values[i][j] for c_levels[i], ages[j]; empty when gamma < 0.
  std::vector<std::vector<std::optional<double>>> values;
};

ReadyReckoner build_reckoner(const Discipline& discipline, const HistoryParams& params,
                             std::span<const double> c_levels, std::span<const int> ages);

/// Header discipline,c,T=a,... ; cells to 2 decimals, masked cells empty.
void write_reckoner_csv(std::ostream& out, std::span<const ReadyReckoner> tables);

/// Columns eprint_id,discipline,T,c,gamma,gamma_star.
void write_scores_csv(std::ostream& out, std::span<const GammaScore> scores,
                      std::span<const GammaStarScore> stars);

struct GroupComparison {
  std::vector<stats::GroupSummary> groups;
  stats::Anova anova;
  std::vector<stats::PairwiseTest> pairwise;
  std::optional<double> pearson_r;
};

struct LabeledGroup {
  std::string label;
  std::vector<double> values;
};

/// Needs >= 2 groups of >= 2 values each.
GroupComparison group_stats(std::span<const LabeledGroup> groups,
                            const std::optional<std::pair<std::vector<double>, std::vector<double>>>&
                                paired = std::nullopt,
                            bool welch = false);

stats::DensityCurve kde_curve(std::span<const double> values, double half_width,
                              stats::Kernel kernel = stats::Kernel::Epanechnikov);

}  // namespace citedyn
