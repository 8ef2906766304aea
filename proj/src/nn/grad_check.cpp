#include "melcond/nn/grad_check.h"

#include <algorithm>
#include <cmath>

namespace melcond::nn {

GradCheckResult gradient_check(const std::function<double()>& loss, std::span<const GradCheckSlot> slots, float h,
                               double floor, const std::function<std::uint64_t()>& kink_signature) {
  GradCheckResult result;
  std::uint64_t base = 0;
  if (kink_signature) {
    loss();
    base = kink_signature();
  }
  for (const auto& slot : slots) {
    for (std::size_t i = 0; i < slot.values.size(); ++i) {
      const float original = slot.values[i];
      slot.values[i] = original + h;
      const double up = loss();
      const bool up_kink = kink_signature && kink_signature() != base;
      slot.values[i] = original - h;
      const double down = loss();
      const bool down_kink = kink_signature && kink_signature() != base;
      slot.values[i] = original;
      if (up_kink || down_kink) {
        ++result.skipped;
        continue;
      }
      // Divide by the step actually taken after float rounding.
      const double span = static_cast<double>(original + h) - static_cast<double>(original - h);
      const double numeric = (up - down) / span;
      const double analytic = slot.analytic[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (result.checked == 1 || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_slot = slot.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace melcond::nn
