#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "notipkit/randomization.hpp"

namespace notip {

/// Non-decreasing thresholds (t_1, ..., t_kmax) in [0, 1], compared against sorted p-values.
class ThresholdFamily {
 public:
  ThresholdFamily() = default;
  /// Throws InvalidInput if thresholds leave [0, 1] or decrease.
  explicit ThresholdFamily(std::vector<double> thresholds, std::string provenance = {});

  std::size_t size() const noexcept { return t_.size(); }
  /// 0-based: operator[](k - 1) is t_k.
  double operator[](std::size_t i) const noexcept { return t_[i]; }
  std::span<const double> values() const noexcept { return t_; }
  const std::string& provenance() const noexcept { return provenance_; }

  /// First k_max thresholds as a new family.
  ThresholdFamily truncated(std::size_t k_max) const;

  friend bool operator==(const ThresholdFamily&, const ThresholdFamily&) = default;

 private:
  std::vector<double> t_;
  std::string provenance_;
};

/// min(1, lambda * k / m); the single place the Simes threshold is evaluated, so calibration
/// and family construction round identically.
double simes_threshold(double lambda, std::size_t k, std::size_t m);

/// (min(1, lambda * k / m))_{k = 1..k_max}.
ThresholdFamily simes_family(std::size_t m, double lambda, std::size_t k_max);

/// B_train quantile curves of a training null matrix, truncated to k_max columns.
/// Curve b (1-based) holds, at rank k, the b-th smallest value of column k.
class LearnedTemplate {
 public:
  LearnedTemplate() = default;
  /// curves is row-major B_train x k_max. Validates monotonicity in k and in b.
  LearnedTemplate(std::size_t B_train, std::size_t m, std::size_t k_max, std::vector<double> curves);

  std::size_t curve_count() const noexcept { return B_; }
  std::size_t tests() const noexcept { return m_; }
  std::size_t k_max() const noexcept { return k_max_; }

  /// 1-based curve index, matching the quantile level b / B_train.
  std::span<const double> curve(std::size_t b) const noexcept {
    return {curves_.data() + (b - 1) * k_max_, k_max_};
  }
  ThresholdFamily family(std::size_t b) const;
  std::span<const double> values() const noexcept { return curves_; }

  friend bool operator==(const LearnedTemplate&, const LearnedTemplate&) = default;

 private:
  std::size_t B_ = 0;
  std::size_t m_ = 0;
  std::size_t k_max_ = 0;
  std::vector<double> curves_;
};

LearnedTemplate learn_template(const NullPValueMatrix& train_nulls, std::size_t k_max);

// Template file: magic "NOTIPTPL", u32 version, u64 B_train, u64 m, u64 k_max, then
// B_train * k_max f64 row-major; little-endian.
inline constexpr char kTemplateMagic[8] = {'N', 'O', 'T', 'I', 'P', 'T', 'P', 'L'};
inline constexpr std::uint32_t kTemplateVersion = 1;

void write_template(std::ostream& out, const LearnedTemplate& tpl);
LearnedTemplate read_template(std::istream& in);
void save_template(const std::string& path, const LearnedTemplate& tpl);
LearnedTemplate load_template(const std::string& path);

/// Long-format CSV "curve,quantile,k,threshold" for plotting. n_curves > 0 keeps that many curves at
/// evenly spaced quantile levels; 0 keeps all.
void export_template_csv(std::ostream& out, const LearnedTemplate& tpl, std::size_t n_curves = 0);

}  // namespace notip
