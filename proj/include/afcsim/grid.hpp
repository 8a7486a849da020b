#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "afcsim/error.hpp"

namespace afcsim {

/// Uniform binning of detuning (Hz, relative to line centre).
/// Bin i covers [nu_min + i*bin_width, nu_min + (i+1)*bin_width).
class FrequencyGrid {
 public:
  static constexpr std::size_t max_bins = 10'000'000;

  /// Empty placeholder; only assignable, not usable for simulation.
  FrequencyGrid() = default;
  FrequencyGrid(double nu_min, double nu_max, double bin_width) {
    require(std::isfinite(nu_min) && std::isfinite(nu_max) && nu_min < nu_max, ErrorCode::InvalidRange,
            "grid needs nu_min < nu_max");
    require(std::isfinite(bin_width) && bin_width > 0.0, ErrorCode::InvalidRange, "bin width must be positive");
    const double count = std::round((nu_max - nu_min) / bin_width);
    require(count <= static_cast<double>(max_bins), ErrorCode::TooManyBins,
            "grid would have " + std::to_string(count) + " bins");
    require(count >= 2.0, ErrorCode::InvalidRange, "grid needs at least two bins");
    nu_min_ = nu_min;
    bin_width_ = bin_width;
    size_ = static_cast<std::size_t>(count);
  }

  double nu_min() const noexcept { return nu_min_; }
  double nu_max() const noexcept { return nu_min_ + bin_width_ * static_cast<double>(size_); }
  double bin_width() const noexcept { return bin_width_; }
  std::size_t size() const noexcept { return size_; }
  double span() const noexcept { return nu_max() - nu_min_; }

  double center(std::size_t i) const noexcept { return nu_min_ + (static_cast<double>(i) + 0.5) * bin_width_; }

  /// Index of the bin containing nu, clamped to the grid.
  std::size_t index_of(double nu) const noexcept {
    const double x = std::floor((nu - nu_min_) / bin_width_);
    if (x <= 0.0) return 0;
    if (x >= static_cast<double>(size_ - 1)) return size_ - 1;
    return static_cast<std::size_t>(x);
  }

  bool contains(double lo, double hi) const noexcept {
    const double tol = 1e-9 * bin_width_;
    return lo >= nu_min_ - tol && hi <= nu_max() + tol;
  }

  /// Contiguous sub-grid covering [lo, hi], aligned to this grid's bins.
  FrequencyGrid subgrid(double lo, double hi) const {
    require(lo < hi, ErrorCode::InvalidRange, "empty sub-grid");
    require(contains(lo, hi), ErrorCode::SpanOutOfGrid, "requested span lies outside the grid");
    const auto first = static_cast<std::size_t>(std::floor((lo - nu_min_) / bin_width_ + 1e-9));
    auto last = static_cast<std::size_t>(std::ceil((hi - nu_min_) / bin_width_ - 1e-9));
    if (last > size_) last = size_;
    return FrequencyGrid(nu_min_ + first * bin_width_, nu_min_ + last * bin_width_, bin_width_);
  }

  /// Offset of this grid's first bin in units of `other`'s bins (integer when aligned).
  double offset_in_bins(const FrequencyGrid& other) const noexcept {
    return (nu_min_ - other.nu_min_) / other.bin_width_;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double nu_min_ = 0.0;
  double bin_width_ = 1.0;
  std::size_t size_ = 0;
};

inline FrequencyGrid make_grid(double nu_min, double nu_max, double bin_width) {
  return FrequencyGrid(nu_min, nu_max, bin_width);
}

}  // namespace afcsim
