#include "citedyn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"

namespace citedyn {
namespace {

bool known_discipline(std::string_view d) {
  return std::find(kDisciplines.begin(), kDisciplines.end(), d) != kDisciplines.end();
}

std::string row_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Number of sorted elements needed so that count / n >= p.
std::int64_t required_count(double p, std::size_t n) {
  const long double target = static_cast<long double>(p) * static_cast<long double>(n);
  const long double nearest = std::round(target);
  // p given as a decimal fraction rarely multiplies out exactly; snap values
  // within rounding noise of an integer onto it.
  if (std::abs(target - nearest) <= 1e-9L * std::max<long double>(1.0L, target)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(target));
}

}  // namespace

std::int64_t EprintRecord::citations_through_age(int last_age) const {
  if (last_age < 0) return 0;
  const auto end = std::min<std::size_t>(yearly_citations.size(),
                                         static_cast<std::size_t>(last_age) + 1);
  return std::accumulate(yearly_citations.begin(), yearly_citations.begin() + end,
                         std::int64_t{0});
}

std::int64_t EprintRecord::total_citations() const {
  return std::accumulate(yearly_citations.begin(), yearly_citations.end(), std::int64_t{0});
}

bool EprintRecord::in_discipline(std::string_view d) const {
  return disciplines.find(Discipline(d)) != disciplines.end();
}

CitationCorpus::CitationCorpus(std::vector<EprintRecord> records, int retrieval_year)
    : records_(std::move(records)), retrieval_year_(retrieval_year) {
  std::unordered_set<std::string> ids;
  for (const auto& r : records_) {
    const std::string who = "eprint '" + r.eprint_id + "': ";
    if (!ids.insert(r.eprint_id).second) throw DataError(who + "duplicate eprint_id");
    if (r.disciplines.empty()) throw DataError(who + "no discipline");
    for (const auto& d : r.disciplines) {
      if (!known_discipline(d)) throw DataError(who + "unknown discipline '" + d + "'");
    }
    if (r.submit_year < kFirstSubmitYear) throw DataError(who + "submit_year before 1991");
    if (r.submit_year > retrieval_year_) throw DataError(who + "submit_year after retrieval year");
    if (r.doi_year && *r.doi_year < r.submit_year) throw DataError(who + "doi_year < submit_year");
    if (r.yearly_citations.size() > static_cast<std::size_t>(retrieval_year_ - r.submit_year + 1)) {
      throw DataError(who + "citations recorded beyond the retrieval year");
    }
    for (auto c : r.yearly_citations) {
      if (c < 0) throw DataError(who + "negative citation count");
    }
  }
}

std::int64_t CitationCorpus::total_citations() const {
  std::int64_t s = 0;
  for (const auto& r : records_) s += r.total_citations();
  return s;
}

CitationCorpus read_long_csv(std::istream& in, const LoadOptions& opts) {
  const csv::Table t = csv::read(in);
  const std::size_t c_id = t.column("eprint_id");
  const std::size_t c_disc = t.column("discipline");
  const std::size_t c_year = t.column("submit_year");
  const std::size_t c_age = t.column("age");
  const std::size_t c_cit = t.column("citations_in_year");
  const std::optional<std::size_t> c_doi =
      t.has_column("doi_year") ? std::optional(t.column("doi_year")) : std::nullopt;

  struct Builder {
    int submit_year = 0;
    std::optional<int> doi_year;
    std::set<Discipline> disciplines;
    std::map<int, std::int64_t> by_age;
    std::size_t first_line = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Builder> builders;
  std::set<std::tuple<std::string, std::string, int>> seen;
  int max_year = kFirstSubmitYear;

  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    const std::string& id = row[c_id];
    const std::string& disc = row[c_disc];
    if (id.empty()) throw DataError(row_prefix(line) + "empty eprint_id");
    if (!known_discipline(disc)) {
      throw DataError(row_prefix(line) + "unknown discipline '" + disc + "'");
    }
    const auto year = static_cast<int>(csv::parse_int(row[c_year], line, "submit_year"));
    const auto age = static_cast<int>(csv::parse_int(row[c_age], line, "age"));
    const std::int64_t cites = csv::parse_int(row[c_cit], line, "citations_in_year");
    if (cites < 0) throw DataError(row_prefix(line) + "negative citations_in_year");
    if (age < 0) throw DataError(row_prefix(line) + "negative age");
    if (year < kFirstSubmitYear) throw DataError(row_prefix(line) + "submit_year before 1991");
    if (!seen.emplace(id, disc, age).second) {
      throw DataError(row_prefix(line) + "duplicate row for (" + id + ", " + disc + ", age " +
                      std::to_string(age) + ")");
    }
    auto [it, inserted] = builders.try_emplace(id);
    Builder& b = it->second;
    if (inserted) {
      order.push_back(id);
      b.submit_year = year;
      b.first_line = line;
    } else if (b.submit_year != year) {
      throw DataError(row_prefix(line) + "submit_year disagrees with line " +
                      std::to_string(b.first_line) + " for " + id);
    }
    if (c_doi && !row[*c_doi].empty()) {
      const auto doi = static_cast<int>(csv::parse_int(row[*c_doi], line, "doi_year"));
      if (doi < year) throw DataError(row_prefix(line) + "doi_year before submit_year");
      b.doi_year = doi;
    }
    b.disciplines.insert(disc);
    auto [age_it, fresh] = b.by_age.try_emplace(age, cites);
    if (!fresh && age_it->second != cites) {
      throw DataError(row_prefix(line) + "citations for " + id + " at age " +
                      std::to_string(age) + " differ between disciplines");
    }
    max_year = std::max(max_year, year + age);
  }

  const int retrieval = opts.retrieval_year.value_or(max_year);
  std::vector<EprintRecord> records;
  records.reserve(order.size());
  for (const auto& id : order) {
    Builder& b = builders.at(id);
    EprintRecord r;
    r.eprint_id = id;
    r.disciplines = std::move(b.disciplines);
    r.submit_year = b.submit_year;
    r.doi_year = b.doi_year;
    int expected = 0;
    for (const auto& [age, c] : b.by_age) {
      if (age != expected) {
        throw DataError("eprint '" + id + "': ages not contiguous from 0 (missing age " +
                        std::to_string(expected) + ")");
      }
      r.yearly_citations.push_back(c);
      ++expected;
    }
    records.push_back(std::move(r));
  }
  return CitationCorpus(std::move(records), retrieval);
}

std::vector<AgePanel> read_panel_csv(std::istream& in, const LoadOptions& opts) {
  const csv::Table t = csv::read(in);
  const std::size_t c_disc = t.column("discipline");
  const std::size_t c_year = t.column("dataset_year");
  const std::size_t c_age = t.column("age");
  const std::size_t c_n = t.column("n_eprints");
  const std::size_t c_tot = t.column("total_citations");

  std::vector<AgePanel> panels;
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::set<std::tuple<std::string, int, int>> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    const std::string& disc = row[c_disc];
    if (!known_discipline(disc)) {
      throw DataError(row_prefix(line) + "unknown discipline '" + disc + "'");
    }
    const auto year = static_cast<int>(csv::parse_int(row[c_year], line, "dataset_year"));
    const auto age = static_cast<int>(csv::parse_int(row[c_age], line, "age"));
    const std::int64_t n = csv::parse_int(row[c_n], line, "n_eprints");
    const std::int64_t total = csv::parse_int(row[c_tot], line, "total_citations");
    if (age < 0) throw DataError(row_prefix(line) + "negative age");
    if (n < 1) throw DataError(row_prefix(line) + "n_eprints must be >= 1");
    if (total < 0) throw DataError(row_prefix(line) + "negative total_citations");
    if (!seen.emplace(disc, year, age).second) {
      throw DataError(row_prefix(line) + "duplicate (discipline, dataset_year, age) row");
    }
    auto [it, inserted] = index.try_emplace({disc, year}, panels.size());
    if (inserted) {
      AgePanel p;
      p.discipline = disc;
      p.dataset_year = year;
      p.percentile_cap = opts.panel_cap;
      panels.push_back(std::move(p));
    }
    AgePanel& p = panels[it->second];
    p.entries.push_back({age, static_cast<double>(total) / static_cast<double>(n), n, total});
  }
  for (auto& p : panels) {
    std::sort(p.entries.begin(), p.entries.end(),
              [](const PanelEntry& a, const PanelEntry& b) { return a.age < b.age; });
    int expected = 0;
    for (const auto& e : p.entries) {
      for (; expected < e.age; ++expected) p.missing_ages.push_back(expected);
      expected = e.age + 1;
      p.population = std::max(p.population, e.n_eprints);
    }
  }
  return panels;
}

LoadedData load_corpus(const std::string& path, CorpusFormat format, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  if (format == CorpusFormat::LongCsv) return read_long_csv(in, opts);
  return read_panel_csv(in, opts);
}

void write_long_csv(std::ostream& out, const CitationCorpus& corpus) {
  out << "eprint_id,discipline,submit_year,age,citations_in_year\n";
  for (const auto& r : corpus.records()) {
    for (const auto& d : r.disciplines) {
      for (std::size_t age = 0; age < r.yearly_citations.size(); ++age) {
        out << r.eprint_id << ',' << d << ',' << r.submit_year << ',' << age << ','
            << r.yearly_citations[age] << '\n';
      }
    }
  }
}

void write_panel_csv(std::ostream& out, std::span<const AgePanel> panels) {
  out << "discipline,dataset_year,age,n_eprints,total_citations\n";
  for (const auto& p : panels) {
    for (const auto& e : p.entries) {
      out << p.discipline << ',' << p.dataset_year << ',' << e.age << ',' << e.n_eprints << ','
          << e.total_citations << '\n';
    }
  }
}

PercentileSummary percentile_of(std::span<const std::int64_t> totals, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("percentile p must lie in (0, 1]");
  if (totals.empty()) throw DataError("percentile of an empty population");
  std::vector<std::int64_t> sorted(totals.begin(), totals.end());
  std::sort(sorted.begin(), sorted.end());
  const std::int64_t need = std::max<std::int64_t>(1, required_count(p, sorted.size()));
  PercentileSummary s;
  s.p = p;
  s.population = static_cast<std::int64_t>(sorted.size());
  s.threshold = sorted[static_cast<std::size_t>(need - 1)];
  s.n_below = std::upper_bound(sorted.begin(), sorted.end(), s.threshold) - sorted.begin();
  return s;
}

PercentileSummary percentile_summary(const CitationCorpus& corpus, std::string_view discipline,
                                     double p) {
  std::vector<std::int64_t> totals;
  for (const auto& r : corpus.records()) {
    if (r.in_discipline(discipline)) totals.push_back(r.total_citations());
  }
  if (totals.empty()) {
    throw DataError("discipline '" + std::string(discipline) + "' has no eprints");
  }
  return percentile_of(totals, p);
}

AgePanel build_age_panel(const CitationCorpus& corpus, std::string_view discipline,
                         int dataset_year, double percentile_cap, int max_age) {
  if (dataset_year > corpus.retrieval_year()) {
    throw DomainError("dataset_year " + std::to_string(dataset_year) +
                      " is after the retrieval year");
  }
  if (max_age < 1) throw DomainError("max_age must be >= 1");

  std::vector<const EprintRecord*> eligible;
  std::vector<std::int64_t> totals;
  for (const auto& r : corpus.records()) {
    if (r.submit_year > dataset_year || !r.in_discipline(discipline)) continue;
    eligible.push_back(&r);
    totals.push_back(r.citations_through_age(dataset_year - r.submit_year));
  }
  if (eligible.empty()) {
    throw DataError("discipline '" + std::string(discipline) + "' has no eprints up to " +
                    std::to_string(dataset_year));
  }
  const std::int64_t cap = percentile_of(totals, percentile_cap).threshold;

  AgePanel panel;
  panel.discipline = Discipline(discipline);
  panel.dataset_year = dataset_year;
  panel.percentile_cap = percentile_cap;
  std::vector<std::int64_t> sum(static_cast<std::size_t>(max_age) + 1, 0);
  std::vector<std::int64_t> count(sum.size(), 0);
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    if (totals[k] > cap) continue;
    ++panel.population;
    const EprintRecord& r = *eligible[k];
    const int window = std::min(dataset_year - r.submit_year, max_age);
    for (int age = 0; age <= window; ++age) {
      if (static_cast<std::size_t>(age) >= r.yearly_citations.size()) break;
      sum[static_cast<std::size_t>(age)] += r.yearly_citations[static_cast<std::size_t>(age)];
      ++count[static_cast<std::size_t>(age)];
    }
  }
  for (int age = 0; age <= max_age; ++age) {
    const auto a = static_cast<std::size_t>(age);
    if (count[a] == 0) {
      panel.missing_ages.push_back(age);
      continue;
    }
    panel.entries.push_back(
        {age, static_cast<double>(sum[a]) / static_cast<double>(count[a]), count[a], sum[a]});
  }
  return panel;
}

std::vector<AgePanel> build_trend_subsets(const CitationCorpus& corpus,
                                          std::string_view discipline, int first_year,
                                          int last_year, double percentile_cap, int max_age) {
  if (first_year > last_year) throw DomainError("first_year must not exceed last_year");
  if (last_year > corpus.retrieval_year()) {
    throw DomainError("last_year is after the retrieval year");
  }
  std::vector<AgePanel> out;
  for (int y = first_year; y <= last_year; ++y) {
    out.push_back(build_age_panel(corpus, discipline, y, percentile_cap, max_age));
  }
  return out;
}

}  // namespace citedyn
