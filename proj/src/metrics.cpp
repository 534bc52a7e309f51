#include "staterecall/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "staterecall/catalog.hpp"
#include "staterecall/error.hpp"

namespace staterecall {

Rational Rational::of(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return {0, 1};
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string Rational::decimal(int places) const {
  std::uint64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const unsigned __int128 scaled = static_cast<unsigned __int128>(num) * scale;
  const auto rounded = static_cast<std::uint64_t>((scaled + den / 2) / den);
  std::string out = std::to_string(rounded / scale);
  if (places > 0) {
    std::string frac = std::to_string(rounded % scale);
    out += "." + std::string(static_cast<std::size_t>(places) - frac.size(), '0') + frac;
  }
  return out;
}

Rational operator*(const Rational& a, const Rational& b) {
  // cross-reduce first so the products stay small
  const Rational x = Rational::of(a.num, b.den);
  const Rational y = Rational::of(b.num, a.den);
  return Rational::of(x.num * y.num, x.den * y.den);
}

Rational BinMetrics::accuracy() const { return Rational::of(correct, parsed); }

Rational BinMetrics::parsed_weighted() const {
  return staterecall::parsed_weighted(accuracy(), parsed, total);
}

Rational chance_level(Family family) {
  return family == Family::AstroRecall ? Rational{1, 2} : Rational{1, 4};
}

Rational GridReport::chance_level() const { return staterecall::chance_level(family); }

BinMetrics GridReport::overall() const {
  BinMetrics all;
  for (const auto& b : bins) {
    all.total += b.total;
    all.parsed += b.parsed;
    all.correct += b.correct;
  }
  return all;
}

Rational parsed_weighted(const Rational& accuracy, std::uint64_t parsed, std::uint64_t total) {
  if (total == 0) throw Error(ErrorCode::ZeroTotal, "bin has no instances");
  if (parsed > total) throw Error(ErrorCode::InvalidArgument, "parsed exceeds total");
  return accuracy * Rational::of(parsed, total);
}

GridReport aggregate(std::span<const RunRecord> records) {
  GridReport report;
  if (!records.empty()) report.family = records.front().family;

  std::map<std::pair<std::size_t, std::size_t>, BinMetrics> bins;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (const auto& rec : records) {
    if (rec.family != report.family) {
      throw Error(ErrorCode::MixedFamilies, "records mix astro and collision instances");
    }
    if (!seen.emplace(rec.m, rec.n, rec.index).second) {
      throw Error(ErrorCode::DuplicateInstance, "(" + std::to_string(rec.m) + ", " +
                                                    std::to_string(rec.n) + ", " +
                                                    std::to_string(rec.index) + ")");
    }
    auto& bin = bins[{rec.m, rec.n}];
    bin.m = rec.m;
    bin.n = rec.n;
    ++bin.total;
    if (rec.parse.parsed()) ++bin.parsed;
    if (rec.is_correct) ++bin.correct;
  }
  for (auto& [key, bin] : bins) report.bins.push_back(bin);
  return report;
}

void write_metrics_csv(std::ostream& os, const GridReport& report) {
  os << kMetricsCsvHeader << '\n';
  for (const auto& b : report.bins) {
    os << family_token(report.family) << ',' << b.m << ',' << b.n << ',' << b.total << ','
       << b.parsed << ',' << b.correct << ',' << b.accuracy().decimal() << ','
       << b.parsed_rate().decimal() << ',' << b.parsed_weighted().decimal() << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, const GridReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_metrics_csv(out, report);
}

GridReport read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  auto rows = parse_csv(in);
  std::ostringstream header;
  if (rows.empty()) throw Error(ErrorCode::MalformedRecord, "empty metrics file");
  for (std::size_t i = 0; i < rows[0].size(); ++i) header << (i ? "," : "") << rows[0][i];
  if (header.str() != kMetricsCsvHeader) {
    throw Error(ErrorCode::MalformedRecord, "unexpected metrics header in " + path.string());
  }
  GridReport report;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 9) throw Error(ErrorCode::MalformedRecord, "metrics row width");
    const Family fam = parse_family(f[0]);
    if (r == 1) {
      report.family = fam;
    } else if (fam != report.family) {
      throw Error(ErrorCode::MixedFamilies, path.string());
    }
    try {
      BinMetrics b;
      b.m = std::stoul(f[1]);
      b.n = std::stoul(f[2]);
      b.total = std::stoull(f[3]);
      b.parsed = std::stoull(f[4]);
      b.correct = std::stoull(f[5]);
      report.bins.push_back(b);
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedRecord, "non-integer count in metrics row " + std::to_string(r + 1));
    }
  }
  return report;
}

}  // namespace staterecall
