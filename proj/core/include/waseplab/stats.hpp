#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace waseplab {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double var = 0.0;  // unbiased sample variance
  std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& xs);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::vector<double> residuals;
};

/// OLS fit of log y against log x; every value must be positive.
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Standard error of the fitted slope propagated from independent standard
/// errors of the y values (delta method on log y).
double loglog_slope_se(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& y_se);

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS against N(mean, sd^2), with Stephens' finite-sample correction.
KsResult ks_normal(std::vector<double> xs, double mean, double sd);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace waseplab
