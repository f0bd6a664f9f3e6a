#pragma once

// Independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hvacrl/knn.hpp"

namespace oracle {

/// Fanger PMV written after the ISO 7730 reference program, with its own
/// clothing-temperature iteration (x = tcl/100 in kelvin).
inline double fanger_pmv(double ta, double tr, double vel, double rh, double met, double clo) {
  const double pa = rh * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  const double icl = 0.155 * clo;
  const double m = met * 58.15;
  const double mw = m;
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(vel);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;
  const double tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);
  double xn = tcla / 100.0;
  double xf = tcla / 50.0;
  double hc = hcf;
  for (int n = 0; std::abs(xn - xf) > 1.5e-4; ++n) {
    if (n > 150) throw std::runtime_error("oracle PMV did not converge");
    xf = (xf + xn) / 2.0;
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4)) / (100.0 + p3 * hc);
  }
  const double tcl = 100.0 * xn - 273.0;
  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);
  const double hl4 = 0.0014 * m * (34.0 - ta);
  const double hl5 = 3.96 * fcl * (std::pow(xn, 4) - std::pow(tra / 100.0, 4));
  const double hl6 = fcl * hc * (tcl - ta);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (flo * f(hi) > 0) throw std::runtime_error("bisection bracket has no sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct ScanResult {
  std::vector<std::size_t> rows;
  std::vector<double> distances;
  hvacrl::FeasibleSets sets;
};

/// Sort every row by distance (stable, so ties keep dataset order) and count
/// levels among the first k.
inline ScanResult exhaustive_knn(const hvacrl::KnnDataset& data, const std::vector<double>& query,
                                 const hvacrl::KnnConfig& config) {
  const std::size_t n = data.size();
  std::vector<double> dist(n);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t q = 0; q < query.size(); ++q) {
      const double w = config.weights.empty() ? 1.0 : config.weights[q];
      const double d = data.features()[r][q] - query[q];
      acc += w * d * d;
    }
    dist[r] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  ScanResult out;
  const auto k = static_cast<std::size_t>(config.k);
  int counts[hvacrl::kZones][4] = {};
  for (std::size_t i = 0; i < k; ++i) {
    out.rows.push_back(order[i]);
    out.distances.push_back(dist[order[i]]);
    for (int j = 0; j < hvacrl::kZones; ++j) ++counts[j][data.actions()[order[i]][static_cast<std::size_t>(j)]];
  }
  for (int j = 0; j < hvacrl::kZones; ++j) {
    for (int l = 0; l < 4; ++l) {
      if (static_cast<double>(counts[j][l]) / static_cast<double>(k) >= config.tau) {
        out.sets.per_zone[static_cast<std::size_t>(j)] |= static_cast<std::uint8_t>(1U << l);
      }
    }
  }
  return out;
}

/// Product law for the joint mask, by enumerating every flat index.
inline int count_admitted(const hvacrl::FeasibleSets& sets) {
  int n = 0;
  for (int a = 0; a < hvacrl::kActionCount; ++a) {
    bool ok = true;
    int rest = a;
    for (int j = 0; j < hvacrl::kZones; ++j, rest /= 4) ok = ok && sets.contains(j, rest % 4);
    n += ok;
  }
  return n;
}

}  // namespace oracle
