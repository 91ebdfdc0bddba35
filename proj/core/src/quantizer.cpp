#include <algorithm>
#include <cmath>
#include <limits>

#include "pidc/error.hpp"
#include "pidc/quantnet.hpp"

namespace pidc {

namespace {

double clamp_input(double x, const QuantizerConfig& q, ClampCounter* counter) {
  if (std::isnan(x)) fail(error_kind::divergence, "quantizer received NaN");
  if (x < q.sigma_min || x > q.sigma_max) {
    if (counter) ++counter->clamped;
    return x < q.sigma_min ? q.sigma_min : q.sigma_max;
  }
  return x;
}

}  // namespace

void QuantizerConfig::validate() const {
  if (!(sigma_min < sigma_max)) fail(error_kind::invalid_argument, "quantizer needs sigma_min < sigma_max");
  if (bins < 2) fail(error_kind::invalid_argument, "quantizer needs at least 2 bins");
}

int quantize_level(double x, const QuantizerConfig& q, ClampCounter* counter) {
  x = clamp_input(x, q, counter);
  // nearbyint in the default rounding mode resolves ties to even.
  const double level = std::nearbyint((x - q.sigma_min) / q.epsilon());
  return std::clamp(static_cast<int>(level), 0, q.bins - 1);
}

double level_value(int level, const QuantizerConfig& q) {
  if (level <= 0) return q.sigma_min;
  if (level >= q.bins - 1) return q.sigma_max;
  return q.sigma_min + level * q.epsilon();
}

double quantize_deterministic(double x, const QuantizerConfig& q, ClampCounter* counter) {
  return level_value(quantize_level(x, q, counter), q);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  // Rejection sampling keeps the draw unbiased and library independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % bound;
}

int quantize_stochastic_level(double x, const QuantizerConfig& q, RandomStream& rng, ClampCounter* counter) {
  x = clamp_input(x, q, counter);
  const double scaled = (x - q.sigma_min) / q.epsilon();
  const double lower = std::floor(scaled);
  const double frac = scaled - lower;
  int level = static_cast<int>(lower);
  if (rng.uniform() < frac) ++level;
  return std::clamp(level, 0, q.bins - 1);
}

double quantize_stochastic(double x, const QuantizerConfig& q, RandomStream& rng, ClampCounter* counter) {
  return level_value(quantize_stochastic_level(x, q, rng, counter), q);
}

}  // namespace pidc
