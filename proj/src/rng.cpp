#include "balmse/rng.hpp"

#include <cmath>
#include <numbers>

#include "balmse/errors.hpp"

namespace balmse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::SchemaInvalid: return "SchemaInvalid";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyCategory: return "EmptyCategory";
    case ErrorKind::ConstantNumeric: return "ConstantNumeric";
    case ErrorKind::InvalidContext: return "InvalidContext";
    case ErrorKind::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::DegenerateWidth: return "DegenerateWidth";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DegenerateCategory: return "DegenerateCategory";
    case ErrorKind::NonBinaryTarget: return "NonBinaryTarget";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::SingleClassTruth: return "SingleClassTruth";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidContext:
    case ErrorKind::FractionOutOfRange:
    case ErrorKind::AlphaOutOfRange:
    case ErrorKind::DegenerateWidth:
    case ErrorKind::DimensionError:
      return ErrorClass::Config;
    case ErrorKind::NonFinite:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Data;
  }
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t Rng::below(std::size_t n) {
  require(n > 0, ErrorKind::DimensionError, "Rng::below requires n > 0");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Largest multiple of bound representable; draws at or above it are rejected.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  require(!weights.empty(), ErrorKind::DimensionError, "categorical draw needs weights");
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cumulative += weights[k];
    if (target < cumulative) return k;
  }
  // Rounding can leave target == total; fall back to the last positive weight.
  for (std::size_t k = weights.size(); k > 0; --k) {
    if (weights[k - 1] > 0.0) return k - 1;
  }
  return weights.size() - 1;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + (stream + 1) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace balmse
