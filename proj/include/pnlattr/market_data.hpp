#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pnlattr/date.hpp"
#include "pnlattr/error.hpp"

namespace pnlattr {

struct CurveNode {
  double tenor;      // ACT/365F year fraction
  double zero_rate;  // continuously compounded, per annum
};

/// Zero-rate term structure, linear in zero rate between nodes and flat
/// beyond both ends. Immutable once built.
class ZeroCurve {
 public:
  ZeroCurve(Date anchor, std::vector<CurveNode> nodes) : anchor_(anchor), nodes_(std::move(nodes)) {
    require(!nodes_.empty(), ErrorKind::EmptyNodes, "zero curve needs at least one node");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      require(std::isfinite(nodes_[i].tenor) && std::isfinite(nodes_[i].zero_rate),
              ErrorKind::InvalidArgument, "non-finite curve node");
      require(nodes_[i].tenor >= 0.0, ErrorKind::NonMonotoneTenors, "curve tenors must be >= 0");
      if (i > 0)
        require(nodes_[i].tenor > nodes_[i - 1].tenor, ErrorKind::NonMonotoneTenors,
                "curve tenors must be strictly increasing");
    }
  }

  Date anchor_date() const noexcept { return anchor_; }
  const std::vector<CurveNode>& nodes() const noexcept { return nodes_; }

  double zero_rate(double tenor) const {
    if (tenor <= nodes_.front().tenor) return nodes_.front().zero_rate;
    if (tenor >= nodes_.back().tenor) return nodes_.back().zero_rate;
    auto hi = std::upper_bound(nodes_.begin(), nodes_.end(), tenor,
                               [](double t, const CurveNode& n) { return t < n.tenor; });
    auto lo = hi - 1;
    double w = (tenor - lo->tenor) / (hi->tenor - lo->tenor);
    return lo->zero_rate + w * (hi->zero_rate - lo->zero_rate);
  }

  double discount_factor(double tenor) const {
    require(tenor >= 0.0, ErrorKind::NegativeTenor, "discount factor requested at negative tenor");
    if (tenor == 0.0) return 1.0;
    return std::exp(-zero_rate(tenor) * tenor);
  }

  bool is_flat() const noexcept {
    return std::all_of(nodes_.begin(), nodes_.end(),
                       [&](const CurveNode& n) { return n.zero_rate == nodes_.front().zero_rate; });
  }

  /// Same node tenors, every zero rate moved by `shift`.
  ZeroCurve shifted(double shift) const {
    auto nodes = nodes_;
    for (auto& n : nodes) n.zero_rate += shift;
    return ZeroCurve(anchor_, std::move(nodes));
  }

  friend bool operator==(const ZeroCurve& a, const ZeroCurve& b) {
    if (a.anchor_ != b.anchor_ || a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i)
      if (a.nodes_[i].tenor != b.nodes_[i].tenor || a.nodes_[i].zero_rate != b.nodes_[i].zero_rate)
        return false;
    return true;
  }

 private:
  Date anchor_;
  std::vector<CurveNode> nodes_;
};

inline ZeroCurve build_zero_curve(Date anchor, std::vector<CurveNode> nodes) {
  return ZeroCurve(anchor, std::move(nodes));
}

inline ZeroCurve flat_curve(Date anchor, double rate) { return ZeroCurve(anchor, {{1.0, rate}}); }

inline double discount_factor(const ZeroCurve& curve, double tenor) {
  return curve.discount_factor(tenor);
}

/// Non-rate pricing inputs: flat default intensity, recovery, and an
/// additive basis/liquidity spread.
struct MarketFactors {
  double hazard_rate = 0.0;
  double recovery = 0.0;
  double basis_spread = 0.0;

  void validate() const {
    require(std::isfinite(hazard_rate) && hazard_rate >= 0.0, ErrorKind::InvalidArgument,
            "hazard rate must be >= 0");
    require(std::isfinite(recovery) && recovery >= 0.0 && recovery < 1.0, ErrorKind::InvalidArgument,
            "recovery must lie in [0, 1)");
    require(std::isfinite(basis_spread), ErrorKind::InvalidArgument, "basis spread must be finite");
  }

  friend bool operator==(const MarketFactors&, const MarketFactors&) = default;
};

/// EUR price of one unit of the asset currency.
class FxQuote {
 public:
  explicit FxQuote(double rate) : rate_(rate) {
    require(std::isfinite(rate) && rate > 0.0, ErrorKind::InvalidArgument, "FX quote must be > 0");
  }
  double rate() const noexcept { return rate_; }
  friend bool operator==(const FxQuote&, const FxQuote&) = default;

 private:
  double rate_;
};

struct MarketSnapshot {
  Date as_of;
  ZeroCurve curve;
  MarketFactors factors;
  FxQuote fx;

  MarketSnapshot(Date as_of_, ZeroCurve curve_, MarketFactors factors_, FxQuote fx_)
      : as_of(as_of_), curve(std::move(curve_)), factors(factors_), fx(fx_) {
    require(curve.anchor_date() == as_of, ErrorKind::InvalidArgument,
            "snapshot curve anchor must equal its as-of date");
    factors.validate();
  }

  friend bool operator==(const MarketSnapshot&, const MarketSnapshot&) = default;
};

// ---------------------------------------------------------------------------
// CSV ingestion: date,fx,hazard,recovery,basis,curve_tenors,curve_rates

inline constexpr std::string_view kMarketCsvHeader =
    "date,fx,hazard,recovery,basis,curve_tenors,curve_rates";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads the market CSV. Rows must be in strictly increasing date order;
/// the returned list has one snapshot per row.
inline std::vector<MarketSnapshot> load_market_snapshots(std::istream& in) {
  static constexpr std::string_view columns[] = {"date",  "fx",           "hazard",     "recovery",
                                                 "basis", "curve_tenors", "curve_rates"};
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::MissingField, "market data: missing header row");
  if (detail::trim(line) != kMarketCsvHeader)
    fail(ErrorKind::ParseError, "market data: header must be '" + std::string(kMarketCsvHeader) + "'");

  std::vector<MarketSnapshot> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto where = [&](std::string_view col) {
      return "market data row " + std::to_string(row) + ", column '" + std::string(col) + "'";
    };
    auto cells = detail::split(line, ',');
    if (cells.size() < 7) fail(ErrorKind::MissingField, where(columns[cells.size()]) + ": field missing");
    if (cells.size() > 7) fail(ErrorKind::ParseError, "market data row " + std::to_string(row) + ": too many fields");
    for (std::size_t c = 0; c < 7; ++c)
      if (cells[c].empty()) fail(ErrorKind::MissingField, where(columns[c]) + ": empty field");

    Date date{};
    try {
      date = parse_date(cells[0]);
    } catch (const Error&) {
      fail(ErrorKind::ParseError, where("date") + ": invalid date '" + std::string(cells[0]) + "'");
    }
    double values[4];
    for (std::size_t c = 1; c <= 4; ++c)
      if (!detail::parse_double(cells[c], values[c - 1]))
        fail(ErrorKind::ParseError, where(columns[c]) + ": not a number '" + std::string(cells[c]) + "'");

    if (!(values[0] > 0.0))
      fail(ErrorKind::ParseError, where("fx") + ": FX quote must be > 0, got '" + std::string(cells[1]) + "'");

    auto tenors = detail::split(cells[5], ';');
    auto rates = detail::split(cells[6], ';');
    if (tenors.size() != rates.size())
      fail(ErrorKind::ParseError, where("curve_rates") + ": tenor and rate lists differ in length");
    std::vector<CurveNode> nodes(tenors.size());
    for (std::size_t i = 0; i < tenors.size(); ++i) {
      if (!detail::parse_double(tenors[i], nodes[i].tenor))
        fail(ErrorKind::ParseError, where("curve_tenors") + ": not a number '" + std::string(tenors[i]) + "'");
      if (!detail::parse_double(rates[i], nodes[i].zero_rate))
        fail(ErrorKind::ParseError, where("curve_rates") + ": not a number '" + std::string(rates[i]) + "'");
    }

    if (!out.empty()) {
      if (out.back().as_of == date)
        fail(ErrorKind::DuplicateDate, "market data row " + std::to_string(row) + ": duplicate date " + format_date(date));
      if (to_days(date) < to_days(out.back().as_of))
        fail(ErrorKind::ParseError, where("date") + ": dates must be increasing");
    }
    try {
      out.emplace_back(date, ZeroCurve(date, std::move(nodes)),
                       MarketFactors{values[1], values[2], values[3]}, FxQuote(values[0]));
    } catch (const Error& e) {
      fail(ErrorKind::ParseError, "market data row " + std::to_string(row) + ": " + e.message());
    }
  }
  return out;
}

inline void write_market_snapshots(std::ostream& os, std::span<const MarketSnapshot> snapshots) {
  os << kMarketCsvHeader << '\n';
  for (const auto& s : snapshots) {
    os << format_date(s.as_of) << ',' << detail::format_double(s.fx.rate()) << ','
       << detail::format_double(s.factors.hazard_rate) << ',' << detail::format_double(s.factors.recovery)
       << ',' << detail::format_double(s.factors.basis_spread) << ',';
    const auto& nodes = s.curve.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) os << (i ? ";" : "") << detail::format_double(nodes[i].tenor);
    os << ',';
    for (std::size_t i = 0; i < nodes.size(); ++i) os << (i ? ";" : "") << detail::format_double(nodes[i].zero_rate);
    os << '\n';
  }
}

/// Binary search by date; nullptr when absent.
inline const MarketSnapshot* find_snapshot(std::span<const MarketSnapshot> snapshots, Date date) {
  auto it = std::lower_bound(snapshots.begin(), snapshots.end(), date,
                             [](const MarketSnapshot& s, Date d) { return to_days(s.as_of) < to_days(d); });
  return it != snapshots.end() && it->as_of == date ? &*it : nullptr;
}

}  // namespace pnlattr
