#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "staterecall/record.hpp"
#include "staterecall/seed.hpp"

namespace staterecall {

/// Non-negative fraction kept in lowest terms. Denominator 0 is never
/// produced; 0/1 stands in for undefined ratios.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational of(std::uint64_t num, std::uint64_t den);
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Decimal with `places` digits, rounded half-up with integer arithmetic.
  [[nodiscard]] std::string decimal(int places = 6) const;

  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational operator*(const Rational& a, const Rational& b);

struct BinMetrics {
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t total = 0;
  std::uint64_t parsed = 0;
  std::uint64_t correct = 0;

  /// correct / parsed, 0 when nothing parsed.
  [[nodiscard]] Rational accuracy() const;
  [[nodiscard]] Rational parsed_rate() const { return Rational::of(parsed, total); }
  [[nodiscard]] Rational parsed_weighted() const;
};

struct GridReport {
  Family family = Family::AstroRecall;
  std::vector<BinMetrics> bins;  // sorted by (m, n)

  [[nodiscard]] Rational chance_level() const;
  /// Totals over all bins, reported as one pseudo-bin with m = n = 0.
  [[nodiscard]] BinMetrics overall() const;
};

Rational chance_level(Family family);

/// accuracy * parsed / total.
Rational parsed_weighted(const Rational& accuracy, std::uint64_t parsed, std::uint64_t total);

GridReport aggregate(std::span<const RunRecord> records);

inline constexpr const char* kMetricsCsvHeader =
    "family,m,n,total,parsed,correct,accuracy,parsed_rate,parsed_weighted";

void write_metrics_csv(std::ostream& os, const GridReport& report);
void write_metrics_csv(const std::filesystem::path& path, const GridReport& report);
GridReport read_metrics_csv(const std::filesystem::path& path);

}  // namespace staterecall
