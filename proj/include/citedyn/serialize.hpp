#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "citedyn/corpus.hpp"
#include "citedyn/distfit.hpp"
#include "citedyn/gamma.hpp"
#include "citedyn/history.hpp"
#include "citedyn/stochastic.hpp"

namespace citedyn {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kResultSchema = "citedyn.result/1";
inline constexpr std::string_view kToolVersion = "1.0.0";

Json to_json(const HistoryParams& p);
Json to_json(const HistoryFit& f);
Json to_json(const DerivedMetrics& m);
Json to_json(const CumulativeSplit& s);
Json to_json(const TrendPoint& t);
Json to_json(const LognormalFit& f);
Json to_json(const PowerLawFit& f);
Json to_json(const VolatilityFit& v);
Json to_json(const PercentileSummary& s);
Json to_json(const AgePanel& p);
Json to_json(const GroupComparison& g);
Json to_json(const stats::Moments& m);

/// Accepts {A, mu, sigma, B, lambda, lambda_capped}; lambda may be null when
/// capped.
HistoryParams history_params_from_json(const Json& j);

/// Accepts a result envelope, a {"fits": [...]} object, a single fit object
/// with "params", or bare parameters (discipline then taken from `fallback`).
std::vector<std::pair<Discipline, HistoryParams>> fits_from_json(const Json& j,
                                                                 const Discipline& fallback = "");

/// Accepts a result envelope wrapping {"volatility": {...}} or a plain
/// {s1, s2} object.
VolatilityFit volatility_from_json(const Json& j);

/// FNV-1a 64-bit, rendered as "fnv1a64:<16 hex digits>".
std::string fnv1a64_digest(std::string_view bytes);
std::string file_digest(const std::vector<std::string>& paths);

/// Timestamp is ISO-8601 UTC; pass a fixed value to make output byte-stable.
Json make_envelope(std::string_view subcommand, Json payload, const std::string& input_digest,
                   const std::vector<std::string>& warnings, const std::string& timestamp = "");

std::string utc_timestamp();

Json read_json_file(const std::string& path);

}  // namespace citedyn
