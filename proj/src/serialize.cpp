#include "citedyn/serialize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <limits>

#include "citedyn/errors.hpp"

namespace citedyn {
namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw SchemaError(std::string("JSON: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

Json to_json(const HistoryParams& p) {
  Json j;
  j["A"] = p.A;
  j["mu"] = p.mu;
  j["sigma"] = p.sigma;
  j["B"] = p.B;
  j["lambda"] = p.lambda;
  j["lambda_capped"] = p.lambda_capped;
  return j;
}

Json to_json(const HistoryFit& f) {
  Json j;
  j["discipline"] = f.discipline;
  j["dataset_year"] = f.dataset_year;
  j["percentile_cap"] = f.percentile_cap;
  j["params"] = to_json(f.params);
  j["standard_errors"] = {{"A", finite_or_null(f.se.A)},
                          {"mu", finite_or_null(f.se.mu)},
                          {"sigma", finite_or_null(f.se.sigma)},
                          {"B", finite_or_null(f.se.B)},
                          {"lambda", finite_or_null(f.se.lambda)}};
  j["r2_adj"] = f.r2_adj;
  j["converged"] = f.converged;
  j["starts_tried"] = f.starts_tried;
  j["ages"] = f.ages;
  j["residuals"] = f.residuals;
  return j;
}

Json to_json(const DerivedMetrics& m) {
  Json j;
  j["u_peak"] = m.u_peak;
  j["t_peak"] = m.t_peak;
  j["delta1"] = m.delta1;
  j["delta2"] = m.delta2;
  j["s_rate"] = m.s_rate;
  j["r_rate"] = m.r_rate;
  j["i_rate"] = m.i_rate;
  j["lognormal"] = {{"mean", m.ln_mean},
                    {"median", m.ln_median},
                    {"mode", m.ln_mode},
                    {"variance", m.ln_variance}};
  return j;
}

Json to_json(const CumulativeSplit& s) {
  return {{"T", s.T}, {"F", s.F}, {"G", s.G}, {"H", s.H}, {"rho", s.rho}};
}

Json to_json(const TrendPoint& t) {
  Json j;
  j["dataset_year"] = t.dataset_year;
  j["converged"] = t.converged;
  j["params"] = to_json(t.params);
  j["delta1"] = t.delta1;
  j["delta2"] = t.delta2;
  j["s_rate"] = t.s_rate;
  j["r_rate"] = t.r_rate;
  j["i_rate"] = t.i_rate;
  return j;
}

Json to_json(const LognormalFit& f) {
  return {{"b", f.b},        {"m", f.m},   {"b_se", f.b_se},
          {"m_se", f.m_se},  {"r2_adj", f.r2_adj}, {"n", f.n}};
}

Json to_json(const PowerLawFit& f) {
  Json j;
  j["a"] = f.a;
  j["theta"] = f.theta ? Json(*f.theta) : Json(nullptr);
  j["q_min"] = f.q_min;
  j["slope"] = f.slope;
  j["r2_adj"] = f.r2_adj;
  j["n"] = f.n;
  return j;
}

Json to_json(const VolatilityFit& v) {
  return {{"s1", v.s1},         {"s2", v.s2},         {"s1_se", v.s1_se},
          {"s2_se", v.s2_se},   {"r2_adj", v.r2_adj}, {"n", v.n}};
}

Json to_json(const PercentileSummary& s) {
  return {{"p", s.p},
          {"threshold", s.threshold},
          {"n_below", s.n_below},
          {"population", s.population}};
}

Json to_json(const AgePanel& p) {
  Json j;
  j["discipline"] = p.discipline;
  j["dataset_year"] = p.dataset_year;
  j["percentile_cap"] = p.percentile_cap;
  j["population"] = p.population;
  j["missing_ages"] = p.missing_ages;
  Json entries = Json::array();
  for (const auto& e : p.entries) {
    entries.push_back({{"age", e.age},
                       {"u", e.mean_citations},
                       {"n", e.n_eprints},
                       {"total_citations", e.total_citations}});
  }
  j["entries"] = std::move(entries);
  return j;
}

Json to_json(const GroupComparison& g) {
  Json j;
  Json groups = Json::array();
  for (const auto& s : g.groups) {
    groups.push_back({{"label", s.label}, {"n", s.n}, {"mean", s.mean}, {"sd", s.sd}});
  }
  j["groups"] = std::move(groups);
  j["anova"] = {{"f", finite_or_null(g.anova.f)},
                {"df_between", g.anova.df_between},
                {"df_within", g.anova.df_within},
                {"p_value", g.anova.p_value ? Json(*g.anova.p_value) : Json(nullptr)}};
  Json pairs = Json::array();
  for (const auto& p : g.pairwise) {
    pairs.push_back({{"first", g.groups[p.first].label},
                     {"second", g.groups[p.second].label},
                     {"t", finite_or_null(p.t)},
                     {"df", p.df},
                     {"p_raw", p.p_raw ? Json(*p.p_raw) : Json(nullptr)},
                     {"p_bonferroni", p.p_adjusted ? Json(*p.p_adjusted) : Json(nullptr)},
                     {"degenerate", p.degenerate}});
  }
  j["pairwise"] = std::move(pairs);
  j["pearson_r"] = g.pearson_r ? Json(*g.pearson_r) : Json(nullptr);
  return j;
}

Json to_json(const stats::Moments& m) {
  return {{"n", m.n},
          {"mean", m.mean},
          {"variance", m.variance},
          {"skewness", m.skewness},
          {"excess_kurtosis", m.excess_kurtosis}};
}

HistoryParams history_params_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("JSON: parameters must be an object");
  HistoryParams p;
  p.A = number(j, "A");
  p.mu = number(j, "mu");
  p.sigma = number(j, "sigma");
  p.B = number(j, "B");
  p.lambda_capped = j.value("lambda_capped", false);
  if (p.lambda_capped && (!j.contains("lambda") || j.at("lambda").is_null())) {
    p.lambda = kLambdaBound;
  } else {
    p.lambda = number(j, "lambda");
  }
  if (!(p.A > 0.0 && p.sigma > 0.0 && p.B > 0.0 && p.lambda > 0.0)) {
    throw DataError("JSON: A, sigma, B and lambda must be positive");
  }
  return p;
}

std::vector<std::pair<Discipline, HistoryParams>> fits_from_json(const Json& j,
                                                                 const Discipline& fallback) {
  if (j.contains("payload")) return fits_from_json(j.at("payload"), fallback);
  std::vector<std::pair<Discipline, HistoryParams>> out;
  if (j.contains("fits")) {
    for (const auto& f : j.at("fits")) {
      for (auto& e : fits_from_json(f, fallback)) out.push_back(std::move(e));
    }
    return out;
  }
  if (j.contains("params")) {
    out.emplace_back(j.value("discipline", fallback), history_params_from_json(j.at("params")));
    return out;
  }
  out.emplace_back(j.value("discipline", fallback), history_params_from_json(j));
  return out;
}

VolatilityFit volatility_from_json(const Json& j) {
  if (j.contains("payload")) return volatility_from_json(j.at("payload"));
  if (j.contains("volatility")) return volatility_from_json(j.at("volatility"));
  VolatilityFit v;
  v.s1 = number(j, "s1");
  v.s2 = number(j, "s2");
  if (!(v.s1 > 0.0) || !(v.s2 >= 0.0)) throw DataError("JSON: need s1 > 0 and s2 >= 0");
  v.s1_se = j.value("s1_se", 0.0);
  v.s2_se = j.value("s2_se", 0.0);
  v.r2_adj = j.value("r2_adj", 0.0);
  v.n = j.value("n", std::size_t{0});
  return v;
}

std::string fnv1a64_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string file_digest(const std::vector<std::string>& paths) {
  std::string all;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open '" + p + "'");
    all.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    all.push_back('\0');
  }
  return fnv1a64_digest(all);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json make_envelope(std::string_view subcommand, Json payload, const std::string& input_digest,
                   const std::vector<std::string>& warnings, const std::string& timestamp) {
  Json j;
  j["schema"] = kResultSchema;
  j["tool_version"] = kToolVersion;
  j["timestamp"] = timestamp.empty() ? utc_timestamp() : timestamp;
  j["input_digest"] = input_digest;
  j["subcommand"] = subcommand;
  j["payload"] = std::move(payload);
  j["warnings"] = warnings;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace citedyn
