// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "pf2mp/errors.hpp"
#include "pf2mp/rng.hpp"

namespace pf2mp {
namespace {

void require_query(std::span<const double> a, std::size_t dim) {
  if (a.size() != dim)
    throw DimensionError("KDE query has dimension " + std::to_string(a.size()) + ", model has " +
                         std::to_string(dim));
  for (double v : a)
    if (!std::isfinite(v)) throw NumericError("KDE query is not finite");
}

}  // namespace

KdeModel::KdeModel(std::vector<double> points, std::size_t dim, double bandwidth, KernelKind kernel)
    : points_(std::move(points)), dim_(dim), bandwidth_(bandwidth), kernel_(kernel) {
  if (dim_ == 0) throw DimensionError("KdeModel: dimension must be > 0");
  if (points_.empty() || points_.size() % dim_ != 0)
    throw DimensionError("KdeModel: need at least one whole point");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    throw NumericError("KdeModel: bandwidth must be finite and > 0");
  for (double v : points_) {
    if (!std::isfinite(v)) throw NumericError("KdeModel: non-finite point");
    if (std::abs(v) > kBoxLimit) throw DimensionError("KdeModel: point outside the normalized box");
  }
}

DensityEval KdeModel::evaluate(std::span<const double> a) const {
  require_query(a, dim_);
  const std::size_t m = size();
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);

  std::vector<double> expo(m);
  double max_e = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = points_.data() + i * dim_;
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double diff = a[k] - x[k];
      sq += diff * diff;
    }
    expo[i] = -sq * inv_two_h2;
    max_e = std::max(max_e, expo[i]);
  }
  if (!std::isfinite(max_e)) throw NumericError("KDE query too far from every point");

  DensityEval out;
  out.grad.assign(dim_, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::exp(expo[i] - max_e);
    if (w == 0.0) continue;
    sum += w;
    const double* x = points_.data() + i * dim_;
    for (std::size_t k = 0; k < dim_; ++k) out.grad[k] += w * (x[k] - a[k]);
  }
  const double scale = 1.0 / (sum * bandwidth_ * bandwidth_);
  for (double& g : out.grad) g *= scale;

  const double d = static_cast<double>(dim_);
  const double log_norm = -std::log(static_cast<double>(m)) - d * std::log(bandwidth_) -
                          0.5 * d * std::log(2.0 * std::numbers::pi);
  out.log_density = std::max(kLogFloor, max_e + std::log(sum) + log_norm);
  return out;
}

double KdeModel::log_density(std::span<const double> a) const { return evaluate(a).log_density; }

std::vector<double> KdeModel::grad_log_density(std::span<const double> a) const {
  return evaluate(a).grad;
}

double scott_bandwidth(std::span<const double> points, std::size_t dim) {
  if (dim == 0 || points.empty() || points.size() % dim != 0)
    throw DimensionError("scott_bandwidth: need at least one whole point");
  const std::size_t m = points.size() / dim;
  double sigma_sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += points[i * dim + k];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = points[i * dim + k] - mean;
      var += d * d;
    }
    var /= m > 1 ? static_cast<double>(m - 1) : 1.0;
    sigma_sum += std::sqrt(var);
  }
  const double sigma = sigma_sum / static_cast<double>(dim);
  return sigma * std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(dim) + 4.0));
}

KdeModel build_kde(std::span<const double> points, std::size_t dim, std::size_t subsample,
                   const BandwidthRule& rule, std::uint64_t seed) {
  if (dim == 0 || points.empty() || points.size() % dim != 0)
    throw DimensionError("build_kde: empty demonstration point set");
  if (subsample == 0) throw ConfigError("build_kde: subsample must be > 0");
  const std::size_t total = points.size() / dim;

  std::vector<double> chosen;
  if (total <= subsample) {
    chosen.assign(points.begin(), points.end());
  } else {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < subsample; ++i) std::swap(idx[i], idx[i + rng.below(total - i)]);
    chosen.reserve(subsample * dim);
    for (std::size_t i = 0; i < subsample; ++i)
      chosen.insert(chosen.end(), points.begin() + static_cast<std::ptrdiff_t>(idx[i] * dim),
                    points.begin() + static_cast<std::ptrdiff_t>((idx[i] + 1) * dim));
  }

  double h = rule.h;
  if (rule.kind == BandwidthRule::Kind::scott) {
    h = scott_bandwidth(chosen, dim);
    if (!(h > 0.0)) throw NumericError("build_kde: degenerate point set gives zero Scott bandwidth");
  }
  return KdeModel(std::move(chosen), dim, h);
}

}  // namespace pf2mp
