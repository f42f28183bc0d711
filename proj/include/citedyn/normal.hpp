#pragma once

namespace citedyn {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function; relative error below 1e-12 in both
/// tails.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// Inverse of normal_cdf. Throws DomainError unless 0 < q < 1.
///
/// Rational approximation (relative error ~1e-9) polished by one Newton
/// step on the erfc-based distribution function; the upper half is
/// obtained by symmetry so the refinement always runs where Phi is
/// evaluated without cancellation.
double normal_quantile(double q);

enum class NormalMode { Cdf, Quantile };

/// Single entry point used by the CLI and the distfit module.
double normal_cdf_quantile(NormalMode mode, double x_or_q);

}  // namespace citedyn
