#pragma once

#include <span>
#include <string>
#include <vector>

namespace powerburr {

/// Positive loss amounts in currency units, in input order.
class ClaimSample {
 public:
  ClaimSample() = default;
  /// Throws EmptySample if `values` is empty and DomainError (naming the
  /// 1-based position) if any value is not finite and > 0.
  explicit ClaimSample(std::vector<double> values, std::string source = "synthetic",
                       bool deductible_subtracted = false);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::string& source() const noexcept { return source_; }
  bool deductible_subtracted() const noexcept { return deductible_subtracted_; }

  double mean() const;
  double sd() const;  // n - 1 denominator
  double max() const;

 private:
  std::vector<double> values_;
  std::string source_;
  bool deductible_subtracted_ = false;
};

}  // namespace powerburr
