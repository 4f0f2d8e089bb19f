#include "powerburr/sample.hpp"

#include <algorithm>
#include <cmath>

#include "powerburr/errors.hpp"

namespace powerburr {

ClaimSample::ClaimSample(std::vector<double> values, std::string source,
                         bool deductible_subtracted)
    : values_(std::move(values)),
      source_(std::move(source)),
      deductible_subtracted_(deductible_subtracted) {
  if (values_.empty()) throw EmptySample("claim sample is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      throw DomainError("claim " + std::to_string(i + 1) + " is not a positive finite amount");
    }
  }
}

double ClaimSample::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double ClaimSample::sd() const {
  if (values_.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double v : values_) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values_.size() - 1));
}

double ClaimSample::max() const { return *std::max_element(values_.begin(), values_.end()); }

}  // namespace powerburr
