#include "citedyn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "CLI11.hpp"
#include "citedyn/corpus.hpp"
#include "citedyn/csv.hpp"
#include "citedyn/distfit.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/gamma.hpp"
#include "citedyn/history.hpp"
#include "citedyn/kernels.hpp"
#include "citedyn/plot.hpp"
#include "citedyn/serialize.hpp"
#include "citedyn/stochastic.hpp"

namespace citedyn {
namespace {

struct Globals {
  int threads = 0;
  std::string timestamp;
  std::string out;
};

// --- argument helpers ------------------------------------------------------

std::vector<int> parse_age_range(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int a = std::stoi(part.substr(0, colon));
        const int b = std::stoi(part.substr(colon + 1));
        if (a > b) throw UsageError("range '" + part + "' is decreasing");
        for (int v = a; v <= b; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse age list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty age list");
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse number list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

CorpusFormat resolve_format(const std::string& path, const std::string& format) {
  if (format == "long-csv") return CorpusFormat::LongCsv;
  if (format == "panel-csv") return CorpusFormat::PanelCsv;
  if (format != "auto") throw UsageError("unknown format '" + format + "'");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  return header.find("eprint_id") != std::string::npos ? CorpusFormat::LongCsv
                                                         : CorpusFormat::PanelCsv;
}

CitationCorpus load_long(const std::string& path, std::optional<int> retrieval_year) {
  LoadOptions opts;
  opts.retrieval_year = retrieval_year;
  return std::get<CitationCorpus>(load_corpus(path, CorpusFormat::LongCsv, opts));
}

std::vector<Discipline> disciplines_present(const CitationCorpus& corpus) {
  std::set<Discipline> seen;
  for (const auto& r : corpus.records()) seen.insert(r.disciplines.begin(), r.disciplines.end());
  return {seen.begin(), seen.end()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fill) {
  std::ostringstream s;
  fill(s);
  write_text(path, s.str());
}

struct PanelRequest {
  std::string input;
  std::string format = "auto";
  std::string discipline;
  double cap = 0.99;
  int max_age = 20;
  std::optional<int> dataset_year;
  std::optional<int> retrieval_year;
};

// Panels for one or all disciplines, trimmed to max_age.
std::vector<AgePanel> load_panels(const PanelRequest& rq, std::vector<std::string>& warnings) {
  std::vector<AgePanel> panels;
  if (resolve_format(rq.input, rq.format) == CorpusFormat::LongCsv) {
    const CitationCorpus corpus = load_long(rq.input, rq.retrieval_year);
    const int year = rq.dataset_year.value_or(corpus.retrieval_year());
    std::vector<Discipline> ds =
        rq.discipline.empty() ? disciplines_present(corpus) : std::vector<Discipline>{rq.discipline};
    for (const auto& d : ds) panels.push_back(build_age_panel(corpus, d, year, rq.cap, rq.max_age));
  } else {
    LoadOptions opts;
    opts.panel_cap = rq.cap;
    auto all = std::get<std::vector<AgePanel>>(load_corpus(rq.input, CorpusFormat::PanelCsv, opts));
    std::map<Discipline, AgePanel> chosen;
    for (auto& p : all) {
      if (!rq.discipline.empty() && p.discipline != rq.discipline) continue;
      if (rq.dataset_year && p.dataset_year != *rq.dataset_year) continue;
      auto it = chosen.find(p.discipline);
      if (it == chosen.end() || p.dataset_year > it->second.dataset_year) {
        chosen[p.discipline] = std::move(p);
      }
    }
    for (auto& [d, p] : chosen) {
      std::erase_if(p.entries, [&](const PanelEntry& e) { return e.age > rq.max_age; });
      std::erase_if(p.missing_ages, [&](int a) { return a > rq.max_age; });
      if (!p.entries.empty()) {
        for (int a = p.entries.back().age + 1; a <= rq.max_age; ++a) p.missing_ages.push_back(a);
      }
      panels.push_back(std::move(p));
    }
  }
  if (panels.empty()) throw DataError("no panel matches the requested discipline/year");
  for (const auto& p : panels) {
    for (int a : p.missing_ages) {
      warnings.push_back(p.discipline + " " + std::to_string(p.dataset_year) + ": age " +
                         std::to_string(a) + " has no eprints and was omitted");
    }
  }
  return panels;
}

HistoryParams pick_fit(const std::vector<std::pair<Discipline, HistoryParams>>& fits,
                       const std::string& discipline) {
  if (fits.empty()) throw DataError("fit file holds no fits");
  if (discipline.empty()) {
    if (fits.size() > 1) throw UsageError("fit file holds several fits; pass --discipline");
    return fits.front().second;
  }
  for (const auto& [d, p] : fits) {
    if (d == discipline) return p;
  }
  throw DataError("fit file has no fit for '" + discipline + "'");
}

// --- subcommands -------------------------------------------------------------

struct Context {
  Globals* globals = nullptr;
  std::ostream* out = nullptr;
  std::vector<std::string> warnings;
  std::vector<std::string> inputs;
  int status = kExitOk;

  void emit(std::string_view sub, Json payload) {
    const Json env =
        make_envelope(sub, std::move(payload), inputs.empty() ? "" : file_digest(inputs),
                      warnings, globals->timestamp);
    const std::string text = env.dump(2) + "\n";
    if (globals->out.empty()) {
      *out << text;
    } else {
      write_text(globals->out, text);
    }
  }
};

void add_common_out(CLI::App* sub, Globals& g) {
  sub->add_option("--out", g.out, "Result envelope path (default: stdout)");
}

void register_ingest(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("ingest", "Validate a corpus, report percentiles, build panels");
  auto rq = std::make_shared<PanelRequest>();
  auto panel_out = std::make_shared<std::string>();
  auto percentiles = std::make_shared<std::string>("0.5,0.75,0.9,0.95,0.99");
  sub->add_option("--input", rq->input, "Corpus file")->required();
  sub->add_option("--format", rq->format, "long-csv | panel-csv | auto")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "long-csv", "panel-csv"}));
  sub->add_option("--discipline", rq->discipline, "Restrict to one discipline");
  sub->add_option("--cap", rq->cap, "Percentile cap for panels")->capture_default_str();
  sub->add_option("--max-age", rq->max_age, "Largest panel age")->capture_default_str();
  sub->add_option("--dataset-year", rq->dataset_year, "Panel cut year (default: retrieval year)");
  sub->add_option("--retrieval-year", rq->retrieval_year, "Data horizon (default: latest year)");
  sub->add_option("--percentiles", *percentiles, "Comma-separated p values")
      ->capture_default_str();
  sub->add_option("--panel-out", *panel_out, "Write panels as panel-csv");
  add_common_out(sub, g);
  sub->callback([&action, rq, panel_out, percentiles] {
    action = [rq, panel_out, percentiles](Context& ctx) {
      ctx.inputs = {rq->input};
      Json payload;
      if (resolve_format(rq->input, rq->format) == CorpusFormat::LongCsv) {
        const CitationCorpus corpus = load_long(rq->input, rq->retrieval_year);
        payload["format"] = "long-csv";
        payload["records"] = corpus.size();
        payload["retrieval_year"] = corpus.retrieval_year();
        payload["total_citations"] = corpus.total_citations();
        const std::vector<double> ps = parse_number_list(*percentiles);
        Json per = Json::object();
        for (const auto& d : disciplines_present(corpus)) {
          if (!rq->discipline.empty() && d != rq->discipline) continue;
          Json arr = Json::array();
          for (double p : ps) arr.push_back(to_json(percentile_summary(corpus, d, p)));
          per[d] = {{"percentiles", arr}};
        }
        payload["disciplines"] = std::move(per);
      } else {
        payload["format"] = "panel-csv";
      }
      const auto panels = load_panels(*rq, ctx.warnings);
      Json pj = Json::array();
      for (const auto& p : panels) pj.push_back(to_json(p));
      payload["panels"] = std::move(pj);
      if (!panel_out->empty()) {
        write_file(*panel_out, [&](std::ostream& o) { write_panel_csv(o, panels); });
      }
      ctx.emit("ingest", std::move(payload));
    };
  });
}

void register_fit_dist(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand(
      "fit-dist", "Quantile-plot lognormal / power-law fits, or the volatility schedule");
  struct Opts {
    std::string input, discipline, mseries, quantile_csv;
    std::optional<int> submit_year, dataset_year, retrieval_year;
    bool include_zero = false;
    double q_min = 0.0;
    std::optional<double> theta;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--input", o->input, "long-csv corpus");
  sub->add_option("--discipline", o->discipline, "Discipline to fit");
  sub->add_option("--submit-year", o->submit_year, "Only eprints posted in this year");
  sub->add_option("--dataset-year", o->dataset_year, "Count citations up to this year");
  sub->add_option("--retrieval-year", o->retrieval_year, "Data horizon");
  sub->add_flag("--include-zero", o->include_zero,
                "Keep zero-citation eprints in the lognormal fit");
  sub->add_option("--q-min", o->q_min, "Lower quantile bound of the power-law region")
      ->capture_default_str();
  sub->add_option("--theta", o->theta, "Shift of the shifted power law");
  sub->add_option("--quantile-csv", o->quantile_csv, "Write y,phi_inv_q,minus_log1mq");
  sub->add_option("--mseries", o->mseries, "CSV with columns t,m_hat: fit the volatility schedule");
  add_common_out(sub, g);
  sub->callback([&action, o] {
    action = [o](Context& ctx) {
      if (!o->mseries.empty()) {
        ctx.inputs = {o->mseries};
        const csv::Table t = csv::read_file(o->mseries);
        const std::size_t ct = t.column("t"), cm = t.column("m_hat");
        std::vector<double> ts, ms;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          ts.push_back(csv::parse_double(t.rows[i][ct], t.line_numbers[i], "t"));
          ms.push_back(csv::parse_double(t.rows[i][cm], t.line_numbers[i], "m_hat"));
        }
        ctx.emit("fit-dist", {{"volatility", to_json(fit_volatility(ts, ms))}});
        return;
      }
      if (o->input.empty()) throw UsageError("fit-dist needs --input or --mseries");
      if (o->discipline.empty()) throw UsageError("fit-dist needs --discipline");
      ctx.inputs = {o->input};
      const CitationCorpus corpus = load_long(o->input, o->retrieval_year);
      const int year = o->dataset_year.value_or(corpus.retrieval_year());
      std::vector<std::int64_t> c;
      for (const auto& r : corpus.records()) {
        if (!r.in_discipline(o->discipline) || r.submit_year > year) continue;
        if (o->submit_year && r.submit_year != *o->submit_year) continue;
        c.push_back(r.citations_through_age(year - r.submit_year));
      }
      const QuantileSeries ln_series = make_quantile_series(c, !o->include_zero);
      const QuantileSeries pl_series = make_quantile_series(c, false);
      Json payload;
      payload["discipline"] = o->discipline;
      payload["dataset_year"] = year;
      payload["n_eprints"] = c.size();
      payload["lognormal"] = to_json(fit_lognormal_quantile(ln_series));
      payload["lognormal"]["zero_excluded"] = ln_series.zero_excluded;
      try {
        payload["power_law"] = to_json(fit_power_law_quantile(pl_series, o->q_min, o->theta));
      } catch (const DataError& e) {
        payload["power_law"] = nullptr;
        ctx.warnings.push_back(std::string("power-law fit skipped: ") + e.what());
      }
      if (!o->quantile_csv.empty()) {
        write_file(o->quantile_csv, [&](std::ostream& s) { write_quantile_csv(s, ln_series); });
      }
      ctx.emit("fit-dist", std::move(payload));
    };
  });
}

void register_fit_history(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("fit-history", "Fit the citation history curve to age panels");
  auto rq = std::make_shared<PanelRequest>();
  auto weighted = std::make_shared<bool>(false);
  auto curve_csv = std::make_shared<std::string>();
  sub->add_option("--input", rq->input, "panel-csv or long-csv")->required();
  sub->add_option("--format", rq->format, "long-csv | panel-csv | auto")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "long-csv", "panel-csv"}));
  sub->add_option("--discipline", rq->discipline, "Discipline (default: all)");
  sub->add_option("--cap", rq->cap, "Percentile cap")->capture_default_str();
  sub->add_option("--max-age", rq->max_age, "Largest age used")->capture_default_str();
  sub->add_option("--dataset-year", rq->dataset_year, "Panel cut year");
  sub->add_option("--retrieval-year", rq->retrieval_year, "Data horizon for long-csv");
  sub->add_flag("--weighted", *weighted, "Weight ages by sqrt(n_i)");
  sub->add_option("--curve-csv", *curve_csv, "Write t,u_hat,f_component,g_component");
  add_common_out(sub, g);
  sub->callback([&action, rq, weighted, curve_csv] {
    action = [rq, weighted, curve_csv](Context& ctx) {
      ctx.inputs = {rq->input};
      const auto panels = load_panels(*rq, ctx.warnings);
      FitOptions fo;
      fo.weight_by_population = *weighted;
      Json fits = Json::array();
      std::ostringstream curves;
      bool first = true;
      for (const auto& p : panels) {
        const HistoryFit fit = fit_history(p, fo);
        if (!fit.converged) {
          ctx.warnings.push_back(p.discipline + ": fit did not meet the gradient tolerance");
          ctx.status = kExitConvergence;
        }
        fits.push_back(to_json(fit));
        std::ostringstream one;
        write_curve_csv(one, fit.params, rq->max_age, 0.05);
        std::string body = one.str();
        if (panels.size() > 1) {
          // Prefix a discipline column when several curves share one file.
          std::istringstream lines(body);
          std::string line;
          std::getline(lines, line);
          if (first) curves << "discipline," << line << '\n';
          while (std::getline(lines, line)) curves << p.discipline << ',' << line << '\n';
        } else {
          curves << body;
        }
        first = false;
      }
      if (!curve_csv->empty()) write_text(*curve_csv, curves.str());
      ctx.emit("fit-history", {{"fits", std::move(fits)}});
    };
  });
}

void register_metrics(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("metrics", "Derived obsolescence metrics and cumulative split");
  auto fit_path = std::make_shared<std::string>();
  auto discipline = std::make_shared<std::string>();
  auto horizons = std::make_shared<std::string>("1:10");
  sub->add_option("--fit", *fit_path, "fit-history result or parameter JSON")->required();
  sub->add_option("--discipline", *discipline, "Only this discipline");
  sub->add_option("--T", *horizons, "Horizons for F, G, H, rho (a:b or list)")
      ->capture_default_str();
  add_common_out(sub, g);
  sub->callback([&action, fit_path, discipline, horizons] {
    action = [fit_path, discipline, horizons](Context& ctx) {
      ctx.inputs = {*fit_path};
      const Json src = read_json_file(*fit_path);
      const auto fits = fits_from_json(src);
      // Fits flagged non-converged in the source are reported but marked.
      std::map<Discipline, bool> converged;
      const Json& body = src.contains("payload") ? src.at("payload") : src;
      if (body.contains("fits")) {
        for (const auto& f : body.at("fits")) {
          converged[f.value("discipline", "")] = f.value("converged", true);
        }
      }
      const std::vector<int> Ts = parse_age_range(*horizons);
      Json out = Json::array();
      for (const auto& [d, p] : fits) {
        if (!discipline->empty() && d != *discipline) continue;
        const bool ok = converged.count(d) ? converged[d] : true;
        if (!ok) ctx.warnings.push_back(d + ": source fit did not converge");
        Json split = Json::array();
        for (int T : Ts) split.push_back(to_json(cumulative_split(p, T)));
        out.push_back({{"discipline", d},
                       {"params", to_json(p)},
                       {"converged", ok},
                       {"metrics", to_json(derive_metrics(p))},
                       {"cumulative", std::move(split)}});
      }
      if (out.empty()) throw DataError("no fit matches the requested discipline");
      ctx.emit("metrics", {{"metrics", std::move(out)}});
    };
  });
}

void register_trend(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("trend", "Year-over-year obsolescence trend from sub-datasets");
  struct Opts {
    std::string input, discipline;
    int first = 2010, last = 2019, max_age = 20;
    double cap = 0.99;
    std::optional<int> retrieval_year;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--input", o->input, "long-csv corpus")->required();
  sub->add_option("--discipline", o->discipline, "Discipline")->required();
  sub->add_option("--first", o->first, "First dataset year")->capture_default_str();
  sub->add_option("--last", o->last, "Last dataset year")->capture_default_str();
  sub->add_option("--cap", o->cap, "Percentile cap")->capture_default_str();
  sub->add_option("--max-age", o->max_age, "Largest age used")->capture_default_str();
  sub->add_option("--retrieval-year", o->retrieval_year, "Data horizon");
  add_common_out(sub, g);
  sub->callback([&action, o] {
    action = [o](Context& ctx) {
      ctx.inputs = {o->input};
      const CitationCorpus corpus = load_long(o->input, o->retrieval_year);
      const auto panels =
          build_trend_subsets(corpus, o->discipline, o->first, o->last, o->cap, o->max_age);
      const auto series = trend_metrics(panels);
      Json arr = Json::array();
      for (const auto& tp : series) {
        if (!tp.converged) {
          ctx.warnings.push_back(std::to_string(tp.dataset_year) + ": fit did not converge");
        }
        arr.push_back(to_json(tp));
      }
      ctx.emit("trend", {{"discipline", o->discipline}, {"series", std::move(arr)}});
    };
  });
}

void register_gamma(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("gamma", "Score eprints with the gamma and gamma* indices");
  struct Opts {
    std::string input, fit, scores_csv, kde_csv;
    std::optional<int> T, retrieval_year;
    double cap = 0.99, half_width = 0.2;
    int min_year = kFirstSubmitYear;
    bool by_age = false, welch = false, gaussian = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--input", o->input, "long-csv corpus")->required();
  sub->add_option("--fit", o->fit, "Fits per discipline (JSON)")->required();
  sub->add_option("--T", o->T, "Evaluate every eprint at this age (default: its own age)");
  sub->add_option("--cap", o->cap, "Skip eprints above this percentile")->capture_default_str();
  sub->add_option("--min-year", o->min_year, "Earliest submit year scored")->capture_default_str();
  sub->add_option("--retrieval-year", o->retrieval_year, "Data horizon");
  sub->add_flag("--group-by-age", o->by_age, "Rank gamma* within (discipline, T)");
  sub->add_flag("--welch", o->welch, "Welch ANOVA and unpooled pairwise tests");
  sub->add_option("--scores-csv", o->scores_csv, "Write per-eprint scores");
  sub->add_option("--kde-csv", o->kde_csv, "Write per-discipline density curves of gamma");
  sub->add_option("--half-width", o->half_width, "KDE half-width")->capture_default_str();
  sub->add_flag("--gaussian-kernel", o->gaussian, "Gaussian instead of Epanechnikov kernel");
  add_common_out(sub, g);
  sub->callback([&action, o] {
    action = [o](Context& ctx) {
      ctx.inputs = {o->input, o->fit};
      const CitationCorpus corpus = load_long(o->input, o->retrieval_year);
      std::map<Discipline, HistoryParams> params;
      for (auto& [d, p] : fits_from_json(read_json_file(o->fit))) params[d] = p;
      ScoreOptions so;
      so.fixed_T = o->T;
      so.percentile_cap = o->cap;
      so.min_submit_year = o->min_year;
      const ScoringResult res = score_corpus(corpus, params, so);
      if (res.scores.empty()) throw DataError("no eprint could be scored");
      const auto stars = gamma_star_scores(
          res.scores, o->by_age ? StarGrouping::DisciplineAndAge : StarGrouping::Discipline);

      std::map<Discipline, std::pair<std::vector<double>, std::vector<double>>> by_d;
      for (std::size_t i = 0; i < res.scores.size(); ++i) {
        by_d[res.scores[i].discipline].first.push_back(res.scores[i].gamma);
        by_d[res.scores[i].discipline].second.push_back(stars[i].gamma_star);
      }
      Json per = Json::object();
      std::vector<LabeledGroup> gamma_groups, star_groups;
      for (const auto& [d, v] : by_d) {
        Json entry;
        entry["n"] = v.first.size();
        if (v.first.size() >= 2) {
          entry["gamma"] = to_json(stats::moments(v.first));
          entry["gamma_star"] = to_json(stats::moments(v.second));
          entry["pearson_r"] = stats::pearson_r(v.first, v.second);
          gamma_groups.push_back({d, v.first});
          star_groups.push_back({d, v.second});
        }
        per[d] = std::move(entry);
      }
      Json payload;
      payload["scored"] = res.scores.size();
      payload["unscored_zero_citation"] = res.zero_citation;
      payload["unscored_too_young"] = res.too_young;
      payload["disciplines"] = std::move(per);
      if (gamma_groups.size() >= 2) {
        payload["comparison_gamma"] = to_json(group_stats(gamma_groups, std::nullopt, o->welch));
        payload["comparison_gamma_star"] =
            to_json(group_stats(star_groups, std::nullopt, o->welch));
      } else {
        ctx.warnings.push_back("fewer than two scored disciplines: no group comparison");
      }
      if (!o->scores_csv.empty()) {
        write_file(o->scores_csv,
                   [&](std::ostream& s) { write_scores_csv(s, res.scores, stars); });
      }
      if (!o->kde_csv.empty()) {
        const auto kernel = o->gaussian ? stats::Kernel::Gaussian : stats::Kernel::Epanechnikov;
        write_file(o->kde_csv, [&](std::ostream& s) {
          s << "discipline,x,density\n";
          for (const auto& grp : gamma_groups) {
            const auto curve = kde_curve(grp.values, o->half_width, kernel);
            for (std::size_t i = 0; i < curve.x.size(); ++i) {
              s << grp.label << ',' << csv::format_double(curve.x[i]) << ','
                << csv::format_double(curve.density[i]) << '\n';
            }
          }
        });
      }
      ctx.emit("gamma", std::move(payload));
    };
  });
}

void register_reckoner(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("reckoner", "Ready-reckoner table of gamma values (CSV)");
  struct Opts {
    std::string fit, discipline, citations = "5,10,50,100", ages = "2:10";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--fit", o->fit, "Fits per discipline (JSON)")->required();
  sub->add_option("--discipline", o->discipline, "Only this discipline");
  sub->add_option("--citations", o->citations, "Citation levels")->capture_default_str();
  sub->add_option("--ages", o->ages, "Ages T (a:b or list)")->capture_default_str();
  sub->add_option("--out", g.out, "CSV path (default: stdout)");
  sub->callback([&action, o] {
    action = [o](Context& ctx) {
      const auto fits = fits_from_json(read_json_file(o->fit));
      const auto c = parse_number_list(o->citations);
      const auto ages = parse_age_range(o->ages);
      std::vector<ReadyReckoner> tables;
      for (const auto& [d, p] : fits) {
        if (!o->discipline.empty() && d != o->discipline) continue;
        tables.push_back(build_reckoner(d, p, c, ages));
      }
      if (tables.empty()) throw DataError("no fit matches the requested discipline");
      std::ostringstream s;
      write_reckoner_csv(s, tables);
      if (ctx.globals->out.empty()) {
        *ctx.out << s.str();
      } else {
        write_text(ctx.globals->out, s.str());
      }
    };
  });
}

struct SimOpts {
  std::string fit, vol, discipline, scheme = "exact";
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  double dt = 0.01, horizon = 10.0;
};

void add_sim_options(CLI::App* sub, SimOpts& o) {
  sub->add_option("--fit", o.fit, "History parameters (JSON)")->required();
  sub->add_option("--vol", o.vol, "Volatility schedule {s1, s2} (JSON)")->required();
  sub->add_option("--discipline", o.discipline, "Pick one fit from a multi-fit file");
  sub->add_option("--paths", o.paths, "Number of paths")->capture_default_str();
  sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sub->add_option("--dt", o.dt, "Step size (years)")->capture_default_str();
  sub->add_option("--horizon", o.horizon, "Simulated years")->capture_default_str();
  sub->add_option("--scheme", o.scheme, "exact | euler")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "euler"}));
}

SdeConfig sde_config(const SimOpts& o) {
  SdeConfig c;
  c.dt = o.dt;
  c.horizon = o.horizon;
  c.n_paths = o.paths;
  c.seed = o.seed;
  c.scheme = o.scheme == "euler" ? kernels::Scheme::EulerMaruyama : kernels::Scheme::ExactLog;
  return c;
}

Json count_summary(const std::vector<std::int64_t>& c) {
  std::vector<double> d(c.begin(), c.end());
  const auto zeros = std::count(c.begin(), c.end(), 0);
  return {{"mean", stats::mean(d)},
          {"variance", d.size() > 1 ? stats::variance(d) : 0.0},
          {"zeros", zeros},
          {"max", *std::max_element(c.begin(), c.end())}};
}

void register_simulate(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("simulate", "Sample latent attention paths from the SDE");
  auto o = std::make_shared<SimOpts>();
  auto ensemble_csv = std::make_shared<std::string>("ensemble.csv");
  auto summary = std::make_shared<bool>(false);
  auto stride = std::make_shared<std::size_t>(1);
  add_sim_options(sub, *o);
  sub->add_option("--ensemble-csv", *ensemble_csv, "Path for the ensemble CSV")
      ->capture_default_str();
  sub->add_flag("--summary", *summary, "Write t,mean,var,q05,q50,q95 instead of every path");
  sub->add_option("--stride", *stride, "Keep every n-th grid point in the CSV")
      ->capture_default_str();
  add_common_out(sub, g);
  sub->callback([&action, o, ensemble_csv, summary, stride] {
    action = [o, ensemble_csv, summary, stride](Context& ctx) {
      ctx.inputs = {o->fit, o->vol};
      const HistoryParams p = pick_fit(fits_from_json(read_json_file(o->fit)), o->discipline);
      const VolatilityFit v = volatility_from_json(read_json_file(o->vol));
      const PathEnsemble e = simulate_ensemble(p, v, sde_config(*o));
      write_file(*ensemble_csv, [&](std::ostream& s) {
        if (*summary) {
          write_ensemble_summary_csv(s, e, *stride);
        } else {
          write_ensemble_csv(s, e, *stride);
        }
      });
      Json payload;
      payload["params"] = to_json(p);
      payload["volatility"] = to_json(v);
      payload["config"] = {{"dt", o->dt},        {"horizon", o->horizon}, {"paths", o->paths},
                           {"seed", o->seed},    {"scheme", o->scheme}};
      payload["ensemble_csv"] = *ensemble_csv;
      payload["counts_at_horizon"] = {
          {"integral_floor",
           count_summary(count_citations(e, CountingMode::IntegralFloor, o->horizon))}};
      if (std::abs(o->horizon - std::round(o->horizon)) < 1e-9) {
        payload["counts_at_horizon"]["yearly_floor_sum"] =
            count_summary(count_citations(e, CountingMode::YearlyFloorSum, o->horizon));
      }
      ctx.emit("simulate", std::move(payload));
    };
  });
}

void register_verify(CLI::App& app, Globals& g, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("verify", "Monte Carlo checks of the SDE model's properties");
  auto o = std::make_shared<SimOpts>();
  o->paths = 10000;
  auto halve = std::make_shared<bool>(false);
  auto timing = std::make_shared<bool>(false);
  add_sim_options(sub, *o);
  sub->add_flag("--check-dt-halving", *halve, "Compare c(T) statistics at dt and dt/2");
  sub->add_flag("--timing-clt", *timing, "Also run the multiplicative timing CLT demonstration");
  add_common_out(sub, g);
  sub->callback([&action, o, halve, timing] {
    action = [o, halve, timing](Context& ctx) {
      ctx.inputs = {o->fit, o->vol};
      const HistoryParams p = pick_fit(fits_from_json(read_json_file(o->fit)), o->discipline);
      const VolatilityFit v = volatility_from_json(read_json_file(o->vol));
      const PathEnsemble e = simulate_ensemble(p, v, sde_config(*o));
      const auto n = static_cast<double>(e.n_paths);
      Json checks = Json::array();
      bool all = true;
      auto record = [&](Json c) {
        all = all && c.at("pass").get<bool>();
        checks.push_back(std::move(c));
      };
      for (double t : {1.0, 5.0, 10.0, 20.0}) {
        if (t > o->horizon + 1e-9) continue;
        const auto col = e.column(e.index_of(t));
        const double m = stats::mean(col);
        const double se = std::sqrt(stats::variance(col) / n);
        const double u = eval_history(p, t);
        record({{"check", "mean_recovery"}, {"t", t}, {"mean", m}, {"u", u}, {"se", se},
                {"z", (m - u) / se}, {"pass", std::abs(m - u) <= 3.0 * se}});
        std::vector<double> lx(col.size());
        std::transform(col.begin(), col.end(), lx.begin(), [](double x) { return std::log(x); });
        const double lm = stats::mean(lx), lv = stats::variance(lx);
        const double lw = log_w(t, v);
        const double expect_m = std::log(u) - lw;
        record({{"check", "log_normality"}, {"t", t}, {"log_mean", lm},
                {"expected_log_mean", expect_m}, {"log_variance", lv},
                {"expected_log_variance", 2.0 * lw},
                {"pass", std::abs(lm - expect_m) <= 3.0 * std::sqrt(lv / n) &&
                             std::abs(lv - 2.0 * lw) <= 0.05 * 2.0 * lw}});
      }
      if (o->horizon >= 5.0 - 1e-9) {
        const auto col = e.column(e.index_of(5.0));
        const double ks = stats::ks_statistic(
            col, [&](double x) { return closed_form_cdf(x, 5.0, p, v); });
        record({{"check", "fokker_planck_ks"}, {"t", 5.0}, {"ks", ks}, {"pass", ks < 0.02}});
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return closed_form_density(x, 5.0, p, v); }, 0.0,
            std::numeric_limits<double>::infinity(), 15, 1e-12);
        record({{"check", "density_normalisation"}, {"t", 5.0}, {"integral", mass},
                {"pass", std::abs(mass - 1.0) <= 1e-6}});
      }
      const auto counts = count_citations(e, CountingMode::IntegralFloor, o->horizon);
      const LognormalFit law = fit_lognormal_quantile(make_quantile_series(counts, false));
      record({{"check", "lognormal_law"}, {"T", o->horizon}, {"b", law.b}, {"m", law.m},
              {"r2_adj", law.r2_adj}, {"pass", law.r2_adj > 0.98}});

      Json payload;
      payload["params"] = to_json(p);
      payload["volatility"] = to_json(v);
      payload["paths"] = o->paths;
      payload["seed"] = o->seed;
      payload["checks"] = std::move(checks);
      Json counting = {{"integral_floor", count_summary(counts)}};
      if (std::abs(o->horizon - std::round(o->horizon)) < 1e-9) {
        counting["yearly_floor_sum"] =
            count_summary(count_citations(e, CountingMode::YearlyFloorSum, o->horizon));
      }
      payload["counting_modes"] = std::move(counting);
      if (*halve) {
        SdeConfig half = sde_config(*o);
        half.dt = o->dt / 2.0;
        const auto fine = count_citations(simulate_ensemble(p, v, half),
                                          CountingMode::IntegralFloor, o->horizon);
        payload["dt_halving"] = {{"dt", count_summary(counts)}, {"dt_half", count_summary(fine)}};
      }
      if (*timing) {
        const TimingReport many = simulate_timing_clt({1.0, 100, 0.1, 10000, o->seed});
        const TimingReport one = simulate_timing_clt({1.0, 1, 0.1, 10000, o->seed});
        payload["timing_clt"] = {
            {"n_events_100", {{"moments", to_json(many.log_moments)},
                              {"expected_log_mean", many.expected_log_mean},
                              {"jarque_bera", many.jarque_bera.statistic},
                              {"p_value", many.jarque_bera.p_value}}},
            {"n_events_1", {{"moments", to_json(one.log_moments)},
                            {"jarque_bera", one.jarque_bera.statistic},
                            {"p_value", one.jarque_bera.p_value}}}};
      }
      payload["all_passed"] = all;
      if (!all) ctx.warnings.push_back("one or more checks failed");
      ctx.emit("verify", std::move(payload));
    };
  });
}

void register_plot(CLI::App& app, std::function<void(Context&)>& action) {
  auto* sub = app.add_subcommand("plot", "Render an SVG figure plus its data CSV");
  struct Opts {
    std::string out, fit, panel, csv, x, y, style = "line", title, discipline;
    double t_max = 20.0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--out", o->out, "SVG path")->required();
  sub->add_option("--fit", o->fit, "Draw fitted curves from this JSON");
  sub->add_option("--panel", o->panel, "Overlay panel-csv points");
  sub->add_option("--discipline", o->discipline, "Only this discipline");
  sub->add_option("--t-max", o->t_max, "Curve range")->capture_default_str();
  sub->add_option("--csv", o->csv, "Generic CSV source");
  sub->add_option("--x", o->x, "x column of --csv");
  sub->add_option("--y", o->y, "Comma-separated y columns of --csv");
  sub->add_option("--style", o->style, "line | scatter for --csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"line", "scatter"}));
  sub->add_option("--title", o->title, "Figure title");
  sub->callback([&action, o] {
    action = [o](Context& ctx) {
      std::vector<PlotSeries> series;
      PlotLabels labels{o->title, "t (years)", "u (citations / year)"};
      if (!o->panel.empty()) {
        auto panels = std::get<std::vector<AgePanel>>(load_corpus(o->panel, CorpusFormat::PanelCsv));
        for (const auto& p : panels) {
          if (!o->discipline.empty() && p.discipline != o->discipline) continue;
          PlotSeries s{p.discipline + " " + std::to_string(p.dataset_year), PlotStyle::Scatter, {},
                       {}};
          for (const auto& e : p.entries) {
            s.x.push_back(e.age);
            s.y.push_back(e.mean_citations);
          }
          series.push_back(std::move(s));
        }
      }
      if (!o->fit.empty()) {
        for (const auto& [d, p] : fits_from_json(read_json_file(o->fit))) {
          if (!o->discipline.empty() && d != o->discipline) continue;
          PlotSeries s{d.empty() ? "fit" : d + " fit", PlotStyle::Line, {}, {}};
          for (int k = 0; k <= 400; ++k) {
            const double t = o->t_max * k / 400.0;
            s.x.push_back(t);
            s.y.push_back(eval_history(p, t));
          }
          series.push_back(std::move(s));
        }
      }
      if (!o->csv.empty()) {
        if (o->x.empty() || o->y.empty()) throw UsageError("--csv needs --x and --y");
        const csv::Table t = csv::read_file(o->csv);
        const std::size_t cx = t.column(o->x);
        std::stringstream ys(o->y);
        std::string name;
        while (std::getline(ys, name, ',')) {
          const std::size_t cy = t.column(name);
          PlotSeries s{name, o->style == "scatter" ? PlotStyle::Scatter : PlotStyle::Line, {}, {}};
          for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (t.rows[i][cx].empty() || t.rows[i][cy].empty()) continue;
            s.x.push_back(csv::parse_double(t.rows[i][cx], t.line_numbers[i], o->x));
            s.y.push_back(csv::parse_double(t.rows[i][cy], t.line_numbers[i], name));
          }
          series.push_back(std::move(s));
        }
        labels.x_label = o->x;
        labels.y_label = o->y;
      }
      if (series.empty()) throw UsageError("plot needs --fit, --panel or --csv");
      const std::string data = emit_plot(series, labels, o->out);
      *ctx.out << o->out << '\n' << data << '\n';
    };
  });
}

int apply_threads(const Globals& g) {
  int n = g.threads;
  if (n == 0) {
    if (const char* env = std::getenv("CITEDYN_THREADS"); env && *env) {
      try {
        n = std::stoi(env);
      } catch (const std::logic_error&) {
        throw UsageError("CITEDYN_THREADS must be a positive integer");
      }
    }
  }
  if (n != 0) kernels::set_thread_count(n);
  return kernels::thread_count();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"citedyn: citation dynamics fitting, scoring and simulation", "citedyn"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads,
                 "OpenMP threads (default: $CITEDYN_THREADS, else all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--timestamp", g.timestamp,
                 "Fixed envelope timestamp (default: current UTC time)");
  std::function<void(Context&)> action;
  register_ingest(app, g, action);
  register_fit_dist(app, g, action);
  register_fit_history(app, g, action);
  register_metrics(app, g, action);
  register_trend(app, g, action);
  register_gamma(app, g, action);
  register_reckoner(app, g, action);
  register_simulate(app, g, action);
  register_verify(app, g, action);
  register_plot(app, action);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    apply_threads(g);
    Context ctx;
    ctx.globals = &g;
    ctx.out = &out;
    if (!action) throw UsageError("no subcommand given");
    action(ctx);
    return ctx.status;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::bad_variant_access&) {
    err << "error: input has the wrong format for this subcommand\n";
    return kExitData;
  }
}

}  // namespace citedyn
