#include "waseplab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "waseplab/error.hpp"

namespace waseplab {

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  r.count = xs.size();
  if (xs.empty()) return r;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  r.mean = m;
  if (xs.size() < 2) return r;
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  r.var = s / static_cast<double>(xs.size() - 1);
  r.se = std::sqrt(r.var / static_cast<double>(xs.size()));
  return r;
}

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "log-log fit needs two or more matched points");
  const auto k = x.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "log-log fit needs distinct x values");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - f.intercept - f.slope * lx[i];
    f.residuals.push_back(r);
    rss += r * r;
  }
  if (k > 2) f.slope_se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return f;
}

double loglog_slope_se(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& y_se) {
  require(x.size() == y.size() && y.size() == y_se.size() && x.size() >= 2, "slope SE needs matched points");
  double mx = 0.0;
  for (double v : x) mx += std::log(v);
  mx /= static_cast<double>(x.size());
  double sxx = 0.0;
  for (double v : x) sxx += (std::log(v) - mx) * (std::log(v) - mx);
  require(sxx > 0.0, "slope SE needs distinct x values");
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (std::log(x[i]) - mx) / sxx;
    var += w * w * (y_se[i] / y[i]) * (y_se[i] / y[i]);
  }
  return std::sqrt(var);
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

KsResult ks_normal(std::vector<double> xs, double mean, double sd) {
  require(!xs.empty(), "KS test needs data");
  require(sd > 0.0, "KS reference must have positive spread");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double D = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = normal_cdf((xs[i] - mean) / sd);
    D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * D)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS test needs data");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * D)};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace waseplab
