#include "citedyn/normal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "citedyn/errors.hpp"

namespace citedyn {
namespace {

constexpr std::array<double, 6> kCentralNum = {
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kCentralDen = {
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01};
constexpr std::array<double, 6> kTailNum = {
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kTailDen = {
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00};

constexpr double kLowBreak = 0.02425;

// Initial guess for q <= 0.5.
double lower_half_guess(double q) {
  if (q < kLowBreak) {
    const double s = std::sqrt(-2.0 * std::log(q));
    const double num =
        ((((kTailNum[0] * s + kTailNum[1]) * s + kTailNum[2]) * s + kTailNum[3]) * s +
         kTailNum[4]) * s + kTailNum[5];
    const double den =
        (((kTailDen[0] * s + kTailDen[1]) * s + kTailDen[2]) * s + kTailDen[3]) * s + 1.0;
    return num / den;
  }
  const double c = q - 0.5;
  const double r = c * c;
  const double num =
      (((((kCentralNum[0] * r + kCentralNum[1]) * r + kCentralNum[2]) * r + kCentralNum[3]) *
            r + kCentralNum[4]) * r + kCentralNum[5]) * c;
  const double den =
      ((((kCentralDen[0] * r + kCentralDen[1]) * r + kCentralDen[2]) * r + kCentralDen[3]) * r +
       kCentralDen[4]) * r + 1.0;
  return num / den;
}

}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("normal_quantile: q must lie in (0, 1), got " + std::to_string(q));
  }
  if (q > 0.5) return -normal_quantile(1.0 - q);  // 1 - q is exact here
  double x = lower_half_guess(q);
  x -= (normal_cdf(x) - q) / normal_pdf(x);
  return x;
}

double normal_cdf_quantile(NormalMode mode, double x_or_q) {
  return mode == NormalMode::Cdf ? normal_cdf(x_or_q) : normal_quantile(x_or_q);
}

}  // namespace citedyn
