#pragma once

#include <limits>
#include <string>
#include <vector>

#include "citedyn/history.hpp"

namespace reference {

/// One row of a published regression table: fitted coefficients on the left,
/// derived metrics on the right. Capped rows carry lambda = kLambdaBound.
struct PublishedRow {
  std::string discipline;
  double A, mu, sigma, B, lambda;
  bool capped;
  double u_peak, delta1, delta2, S, R;

  citedyn::HistoryParams params() const { return {A, mu, sigma, B, lambda, capped}; }
};

inline constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();

/// gamma at T = 2..10 for one citation level; kMasked where omitted.
struct ReckonerRow {
  std::string discipline;
  int c;
  std::vector<double> gamma;
};

/// Lognormal quantile-plot fit for 2010 astro-ph eprints.
inline constexpr double kAstroQuantileB = 1.08;
inline constexpr double kAstroQuantileM = 1.07;

struct VolatilityRow {
  std::string discipline;
  double s1, s2;
};

inline const std::vector<VolatilityRow> kVolatility = {
    {"astro-ph", 0.0281, 0.200}, {"comp-sci", 0.0842, 0.423}, {"cond-mat", 0.320, 0.432},
    {"hep", 0.191, 0.455},       {"math", 0.222, 0.371},      {"oth-phys", 0.434, 0.522},
};

inline const std::vector<PublishedRow> kTable2 = {
    {"astro-ph", 2.19, 1.61, 0.817, 0.158, 1.21, false, 0.45, 2.56, 2.43, 1.05, 0.351},
    {"comp-sci", 11.4, 1.56, 0.741, 0.379, citedyn::kLambdaBound, true, 2.08, 2.74, 2.0, 1.37, 0.182},
    {"cond-mat", 4.6, 1.83, 0.802, 0.279, 0.916, false, 0.779, 3.26, 2.95, 1.11, 0.359},
    {"hep", 3.71, 1.37, 0.725, 0.277, citedyn::kLambdaBound, true, 0.953, 2.32, 1.61, 1.45, 0.29},
    {"math", 6.25, 1.91, 0.927, 0.452, 0.439, false, 0.918, 2.85, 3.88, 0.735, 0.493},
    {"oth-phys", 5.04, 1.76, 0.805, 0.259, citedyn::kLambdaBound, true, 0.855, 3.03, 2.77, 1.1, 0.303},
};
inline const std::vector<PublishedRow> kLowerPercentile95 = {
    {"astro-ph", 1.58, 1.53, 0.801, 0.101, 1.55, false, 0.334, 2.44, 2.19, 1.11, 0.303},
    {"comp-sci", 7.13, 1.45, 0.735, 0.206, citedyn::kLambdaBound, true, 1.4, 2.48, 1.78, 1.39, 0.148},
    {"cond-mat", 2.81, 1.63, 0.757, 0.19, 1.07, false, 0.571, 2.87, 2.22, 1.29, 0.333},
    {"hep", 2.65, 1.26, 0.688, 0.174, citedyn::kLambdaBound, true, 0.726, 2.2, 1.33, 1.65, 0.24},
    {"math", 6.02, 1.95, 0.93, 0.196, 0.581, false, 0.727, 2.96, 4.06, 0.728, 0.27},
    {"oth-phys", 3.33, 1.56, 0.761, 0.163, citedyn::kLambdaBound, true, 0.651, 2.68, 2.1, 1.28, 0.25},
};
inline const std::vector<PublishedRow> kLowerPercentile90 = {
    {"astro-ph", 1.18, 1.47, 0.79, 0.0725, 1.86, false, 0.258, 2.34, 2.02, 1.15, 0.281},
    {"comp-sci", 4.95, 1.36, 0.722, 0.14, citedyn::kLambdaBound, true, 1.05, 2.31, 1.58, 1.46, 0.133},
    {"cond-mat", 1.98, 1.51, 0.735, 0.142, 1.23, false, 0.447, 2.64, 1.89, 1.4, 0.318},
    {"hep", 1.92, 1.19, 0.673, 0.124, citedyn::kLambdaBound, true, 0.556, 2.1, 1.2, 1.74, 0.223},
    {"math", 4.6, 1.83, 0.902, 0.123, 0.672, false, 0.591, 2.77, 3.48, 0.796, 0.208},
    {"oth-phys", 2.4, 1.45, 0.737, 0.12, citedyn::kLambdaBound, true, 0.52, 2.47, 1.78, 1.38, 0.231},
};
inline const std::vector<PublishedRow> kLowerPercentile75 = {
    {"astro-ph", 0.613, 1.29, 0.707, 0.0339, 0.231, false, 0.132, 2.2, 1.42, 1.54, 0.257},
    {"comp-sci", 2.1, 1.14, 0.688, 0.0636, citedyn::kLambdaBound, true, 0.557, 1.95, 1.18, 1.65, 0.114},
    {"cond-mat", 1.02, 1.34, 0.713, 0.0774, 1.95, false, 0.268, 2.3, 1.52, 1.51, 0.289},
    {"hep", 0.894, 1.06, 0.655, 0.0603, citedyn::kLambdaBound, true, 0.294, 1.88, 1.01, 1.86, 0.205},
    {"math", 2.09, 1.57, 0.865, 0.0473, 1.12, false, 0.335, 2.27, 2.52, 0.9, 0.141},
    {"oth-phys", 1.15, 1.25, 0.71, 0.0594, citedyn::kLambdaBound, true, 0.298, 2.1, 1.38, 1.53, 0.199},
};
inline const std::vector<PublishedRow> kLowerPercentile50 = {
    {"astro-ph", 0.232, 1.19, 0.694, 0.0127, 0.245, false, 0.0547, 2.04, 1.26, 1.62, 0.233},
    {"comp-sci", 0.672, 0.927, 0.658, 0.0223, citedyn::kLambdaBound, true, 0.222, 1.64, 0.888, 1.85, 0.1},
    {"cond-mat", 0.201, 1.05, 0.692, 0.0153, citedyn::kLambdaBound, true, 0.0667, 1.78, 1.09, 1.63, 0.229},
    {"hep", 0.298, 0.938, 0.657, 0.0192, citedyn::kLambdaBound, true, 0.107, 1.66, 0.895, 1.85, 0.179},
    {"math", 0.745, 1.31, 0.857, 0.0162, citedyn::kLambdaBound, true, 0.151, 1.78, 1.93, 0.923, 0.107},
    {"oth-phys", 0.225, 1.01, 0.708, 0.0109, citedyn::kLambdaBound, true, 0.0702, 1.66, 1.08, 1.54, 0.155},
};
inline const std::vector<ReckonerRow> kTable3 = {
    {"astro-ph", 5, {2.61, 1.82, 1.39, 1.12, 0.92, 0.77, 0.66, 0.56, 0.48}},
    {"astro-ph", 10, {3.31, 2.51, 2.08, 1.81, 1.61, 1.47, 1.35, 1.26, 1.17}},
    {"astro-ph", 50, {4.92, 4.12, 3.69, 3.42, 3.22, 3.08, 2.96, 2.87, 2.78}},
    {"astro-ph", 100, {5.61, 4.82, 4.39, 4.11, 3.92, 3.77, 3.65, 3.56, 3.48}},
    {"comp-sci", 5, {1.04, 0.27, kMasked, kMasked, kMasked, kMasked, kMasked, kMasked, kMasked}},
    {"comp-sci", 10, {1.73, 0.96, 0.54, 0.28, 0.10, kMasked, kMasked, kMasked, kMasked}},
    {"comp-sci", 50, {3.34, 2.57, 2.15, 1.89, 1.71, 1.58, 1.49, 1.41, 1.35}},
    {"comp-sci", 100, {4.03, 3.27, 2.85, 2.59, 2.41, 2.28, 2.18, 2.10, 2.04}},
    {"cond-mat", 5, {2.35, 1.43, 0.93, 0.61, 0.38, 0.21, 0.08, kMasked, kMasked}},
    {"cond-mat", 10, {3.04, 2.13, 1.62, 1.30, 1.08, 0.91, 0.77, 0.67, 0.57}},
    {"cond-mat", 50, {4.65, 3.74, 3.23, 2.91, 2.69, 2.52, 2.38, 2.27, 2.18}},
    {"cond-mat", 100, {5.35, 4.43, 3.93, 3.61, 3.38, 3.21, 3.08, 2.97, 2.88}},
    {"hep", 5, {1.68, 0.98, 0.61, 0.37, 0.21, 0.09, kMasked, kMasked, kMasked}},
    {"hep", 10, {2.38, 1.68, 1.30, 1.06, 0.90, 0.78, 0.68, 0.61, 0.54}},
    {"hep", 50, {3.99, 3.29, 2.91, 2.67, 2.51, 2.39, 2.29, 2.21, 2.15}},
    {"hep", 100, {4.68, 3.98, 3.60, 3.37, 3.20, 3.08, 2.99, 2.91, 2.84}},
    {"math", 5, {1.98, 1.17, 0.69, 0.37, 0.13, kMasked, kMasked, kMasked, kMasked}},
    {"math", 10, {2.67, 1.86, 1.38, 1.06, 0.83, 0.65, 0.50, 0.39, 0.29}},
    {"math", 50, {4.28, 3.47, 2.99, 2.67, 2.43, 2.26, 2.11, 1.99, 1.89}},
    {"math", 100, {4.97, 4.16, 3.68, 3.36, 3.13, 2.95, 2.81, 2.69, 2.59}},
    {"oth-phys", 5, {1.94, 1.17, 0.74, 0.45, 0.25, 0.10, kMasked, kMasked, kMasked}},
    {"oth-phys", 10, {2.63, 1.86, 1.43, 1.15, 0.94, 0.79, 0.67, 0.57, 0.49}},
    {"oth-phys", 50, {4.24, 3.47, 3.04, 2.75, 2.55, 2.40, 2.28, 2.18, 2.10}},
    {"oth-phys", 100, {4.93, 4.17, 3.73, 3.45, 3.25, 3.09, 2.97, 2.88, 2.80}},
};

inline const std::vector<std::vector<PublishedRow>> kAllParameterTables = {
    kTable2, kLowerPercentile95, kLowerPercentile90, kLowerPercentile75, kLowerPercentile50};

}  // namespace reference
