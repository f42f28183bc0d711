#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace citedyn {

using Discipline = std::string;

/// The six arXiv discipline groups used throughout the tool.
inline constexpr std::array<std::string_view, 6> kDisciplines = {
    "astro-ph", "comp-sci", "cond-mat", "hep", "math", "oth-phys"};

inline constexpr int kFirstSubmitYear = 1991;

struct EprintRecord {
  std::string eprint_id;
  std::set<Discipline> disciplines;
  int submit_year = kFirstSubmitYear;
  std::optional<int> doi_year;
  /// Citations received at age 0, 1, ... (age 0 = submission year).
  std::vector<std::int64_t> yearly_citations;

  /// Sum of yearly citations for ages 0..last_age (clipped to the record).
  std::int64_t citations_through_age(int last_age) const;
  std::int64_t total_citations() const;
  bool in_discipline(std::string_view d) const;
};

/// Immutable, validated set of records with a data horizon.
class CitationCorpus {
 public:
  /// Throws DataError if any record or corpus invariant is violated.
  CitationCorpus(std::vector<EprintRecord> records, int retrieval_year);

  const std::vector<EprintRecord>& records() const { return records_; }
  int retrieval_year() const { return retrieval_year_; }
  std::size_t size() const { return records_.size(); }
  std::int64_t total_citations() const;

 private:
  std::vector<EprintRecord> records_;
  int retrieval_year_;
};

struct PercentileSummary {
  double p = 1.0;
  std::int64_t threshold = 0;  // c_[p]
  std::int64_t n_below = 0;    // #{k : c_k <= c_[p]}
  std::int64_t population = 0;
};

struct PanelEntry {
  int age = 0;
  double mean_citations = 0.0;  // u_i
  std::int64_t n_eprints = 0;   // n_i
  std::int64_t total_citations = 0;
};

struct AgePanel {
  Discipline discipline;
  int dataset_year = 0;
  double percentile_cap = 1.0;
  std::vector<PanelEntry> entries;
  /// Ages in 0..max_age that had no eprints; omitted from `entries`.
  std::vector<int> missing_ages;
  /// Number of eprints that passed the discipline/year/cap filters.
  std::int64_t population = 0;
};

enum class CorpusFormat { LongCsv, PanelCsv };

struct LoadOptions {
  /// Data horizon; defaults to the latest calendar year present in the file.
  std::optional<int> retrieval_year;
  /// Cap recorded on panels read from panel-csv (the file does not carry it).
  double panel_cap = 1.0;
};

using LoadedData = std::variant<CitationCorpus, std::vector<AgePanel>>;

LoadedData load_corpus(const std::string& path, CorpusFormat format, const LoadOptions& opts = {});
CitationCorpus read_long_csv(std::istream& in, const LoadOptions& opts = {});
std::vector<AgePanel> read_panel_csv(std::istream& in, const LoadOptions& opts = {});

void write_long_csv(std::ostream& out, const CitationCorpus& corpus);
void write_panel_csv(std::ostream& out, std::span<const AgePanel> panels);

/// Smallest c with #{c_k <= c} >= p * N, over an arbitrary multiset of totals.
PercentileSummary percentile_of(std::span<const std::int64_t> totals, double p);

/// Percentile over lifetime citations of the discipline's eprints.
PercentileSummary percentile_summary(const CitationCorpus& corpus, std::string_view discipline,
                                     double p);

AgePanel build_age_panel(const CitationCorpus& corpus, std::string_view discipline,
                         int dataset_year, double percentile_cap, int max_age);

/// One independently capped panel per dataset year in [first_year, last_year].
std::vector<AgePanel> build_trend_subsets(const CitationCorpus& corpus,
                                          std::string_view discipline, int first_year,
                                          int last_year, double percentile_cap, int max_age);

}  // namespace citedyn
