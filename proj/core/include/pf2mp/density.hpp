// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pf2mp {

enum class KernelKind : std::uint32_t { gaussian = 0 };

struct BandwidthRule {
  enum class Kind { scott, fixed };
  Kind kind = Kind::scott;
  double h = 0.0;  // used when kind == fixed

  static BandwidthRule scott() { return {Kind::scott, 0.0}; }
  static BandwidthRule fixed(double h) { return {Kind::fixed, h}; }
};

// log p(a) and its gradient from a single pass over the kernel terms.
struct DensityEval {
  double log_density = 0.0;
  std::vector<double> grad;
};

// Gaussian kernel density estimate over M points in d dimensions:
//   p(a) = 1 / (M h^d) * sum_i (2 pi)^(-d/2) exp(-|a - x_i|^2 / (2 h^2)).
// Points are expected in normalized coordinates.
class KdeModel {
 public:
  // Throws DimensionError/NumericError when points are empty, non-finite, or
  // outside the normalized box grown by 10%, or when h <= 0.
  KdeModel(std::vector<double> points, std::size_t dim, double bandwidth,
           KernelKind kernel = KernelKind::gaussian);

  std::size_t size() const { return points_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double bandwidth() const { return bandwidth_; }
  KernelKind kernel() const { return kernel_; }
  std::span<const double> points() const { return points_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }

  // Log-sum-exp evaluation floored at kLogFloor.
  double log_density(std::span<const double> a) const;

  // sum_i w_i (x_i - a) / h^2 with softmax weights over the kernel exponents.
  std::vector<double> grad_log_density(std::span<const double> a) const;

  DensityEval evaluate(std::span<const double> a) const;

  bool operator==(const KdeModel&) const = default;

  static constexpr double kLogFloor = -745.0;
  static constexpr double kBoxLimit = 1.1;

 private:
  std::vector<double> points_;
  std::size_t dim_ = 0;
  double bandwidth_ = 0.0;
  KernelKind kernel_ = KernelKind::gaussian;
};

// Scott's rule: mean per-dimension sample standard deviation times M^(-1/(d+4)).
double scott_bandwidth(std::span<const double> points, std::size_t dim);

// Uniformly subsamples `subsample` rows without replacement (all rows, in
// order, if there are not more than that) and fits a KDE.
KdeModel build_kde(std::span<const double> points, std::size_t dim, std::size_t subsample,
                   const BandwidthRule& rule, std::uint64_t seed);

}  // namespace pf2mp
