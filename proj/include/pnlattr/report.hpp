#pragma once

#include <array>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pnlattr/attribution.hpp"
#include "pnlattr/error.hpp"

namespace pnlattr {

/// Figures of one position as they enter the report.
struct PositionFigures {
  std::string id;
  Bucket bucket = Bucket::Other;
  AttributionResult parts;
  double costs_eur = 0.0;
};

/// One report line in EUR; `hedged` is market + carry - costs for position
/// and bucket rows, the line amount for standalone lines.
struct ReportRow {
  std::string position;
  std::string bucket;
  double fx = 0.0;
  double rate = 0.0;
  double market = 0.0;
  double carry = 0.0;
  double costs = 0.0;
  double total = 0.0;
  double hedged = 0.0;
  bool hedged_only = false;  // standalone lines carry just the hedged amount

  ReportRow& operator+=(const ReportRow& o) {
    fx += o.fx;
    rate += o.rate;
    market += o.market;
    carry += o.carry;
    costs += o.costs;
    total += o.total;
    hedged += o.hedged;
    return *this;
  }
};

struct Callout {
  std::string position;
  double hedged = 0.0;
};

struct BucketSection {
  Bucket bucket = Bucket::Other;
  std::vector<ReportRow> rows;
  ReportRow subtotal;
  Callout top;
  Callout worst;
};

/// Fund rollup: bucket sections with subtotals, the POSITIONS line (hedged
/// PnL of the five position buckets), the standalone lines and the TOTAL.
///
/// Standalone lines are derived so that the TOTAL hedged amount equals the
/// sum of all position totals minus costs plus pass-through amounts:
///  - CASH_PARKING: total minus costs of Cash-bucket positions
///  - IR_HEDGE_COSTS: rate parts of all non-cash positions plus market,
///    carry and costs of Hedge-bucket positions
///  - FX_COSTS_DISCREPANCY: FX parts of all non-cash positions
///  - FEES, OTHER_COSTS: pass-through only
struct Report {
  std::vector<BucketSection> buckets;  // non-empty buckets, fixed bucket order
  ReportRow positions;
  std::array<ReportRow, kAllLines.size()> lines{};
  ReportRow total;
  std::optional<double> nav;

  const BucketSection* section(Bucket b) const {
    for (const auto& s : buckets)
      if (s.bucket == b) return &s;
    return nullptr;
  }
  const ReportRow& line(StandaloneLine l) const { return lines[static_cast<std::size_t>(l)]; }
};

inline ReportRow make_row(const PositionFigures& p) {
  ReportRow r;
  r.position = p.id;
  r.bucket = std::string(to_string(p.bucket));
  r.fx = p.parts.fx;
  r.rate = p.parts.rate;
  r.market = p.parts.market;
  r.carry = p.parts.carry;
  r.total = p.parts.total;
  r.costs = p.costs_eur;
  r.hedged = p.parts.market + p.parts.carry - p.costs_eur;
  return r;
}

inline Report build_report(std::span<const PositionFigures> figures, std::span<const PassThroughLine> pass_through,
                           std::optional<double> nav = std::nullopt) {
  require(!figures.empty(), ErrorKind::EmptyResults, "report needs at least one position");
  if (nav) require(std::isfinite(*nav) && *nav > 0.0, ErrorKind::InvalidArgument, "NAV must be > 0");

  Report rep;
  rep.nav = nav;
  rep.positions.position = "POSITIONS";
  rep.total.position = "TOTAL";
  for (auto l : kAllLines) {
    auto& row = rep.lines[static_cast<std::size_t>(l)];
    row.position = std::string(to_string(l));
    row.hedged_only = true;
  }
  auto line = [&](StandaloneLine l) -> double& { return rep.lines[static_cast<std::size_t>(l)].hedged; };

  for (Bucket b : kAllBuckets) {
    BucketSection sec;
    sec.bucket = b;
    sec.subtotal.position = "SUBTOTAL";
    sec.subtotal.bucket = std::string(to_string(b));
    for (const auto& f : figures) {
      if (f.bucket != b) continue;
      ReportRow row = make_row(f);
      if (sec.rows.empty() || row.hedged > sec.top.hedged) sec.top = {row.position, row.hedged};
      if (sec.rows.empty() || row.hedged < sec.worst.hedged) sec.worst = {row.position, row.hedged};
      sec.subtotal += row;
      rep.total += row;
      if (b == Bucket::Cash) {
        line(StandaloneLine::CashParking) += row.total - row.costs;
      } else {
        line(StandaloneLine::IrHedgeCosts) += row.rate;
        line(StandaloneLine::FxCostsDiscrepancy) += row.fx;
        if (b == Bucket::Hedge) line(StandaloneLine::IrHedgeCosts) += row.hedged;
      }
      sec.rows.push_back(std::move(row));
    }
    if (sec.rows.empty()) continue;
    bool position_bucket = false;
    for (Bucket pb : kPositionBuckets) position_bucket = position_bucket || pb == b;
    if (position_bucket) rep.positions += sec.subtotal;
    rep.buckets.push_back(std::move(sec));
  }
  for (const auto& p : pass_through) line(p.line) += p.amount_eur;

  rep.total.hedged = rep.positions.hedged;
  for (const auto& l : rep.lines) rep.total.hedged += l.hedged;
  return rep;
}

inline Report build_report(const PortfolioAttribution& result, std::optional<double> nav = std::nullopt) {
  std::vector<PositionFigures> figures;
  figures.reserve(result.positions.size());
  for (const auto& p : result.positions) figures.push_back({p.id, p.bucket, p.parts(), p.costs_eur()});
  return build_report(figures, result.pass_through, nav);
}

// ---------------------------------------------------------------------------
// Rounding

/// Round half to even at `decimals` decimal places.
inline double round_half_even(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const int old = std::fegetround();
  std::fesetround(FE_TONEAREST);
  double r = std::nearbyint(v * scale) / scale;
  std::fesetround(old);
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

inline constexpr int kEurDecimals = 0;
inline constexpr int kBpsDecimals = 1;

inline double to_bps(double eur, double nav) { return round_half_even(eur / nav * 10000.0, kBpsDecimals); }

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Csv, Json, Table };

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_even(v, decimals));
  return buf;
}

inline std::array<double, 7> row_values(const ReportRow& r) {
  return {r.fx, r.rate, r.market, r.carry, r.costs, r.total, r.hedged};
}

inline constexpr std::array<std::string_view, 7> kValueColumns = {"fx", "rate", "market", "carry",
                                                                  "costs", "total", "hedged"};

inline void csv_row(std::ostream& os, const ReportRow& r, const std::optional<double>& nav) {
  os << r.position << ',' << r.bucket;
  auto values = row_values(r);
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << ',';
    if (!r.hedged_only || i == 6) os << fixed(values[i], kEurDecimals);
  }
  if (nav) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      os << ',';
      if (!r.hedged_only || i == 6) os << fixed(to_bps(values[i], *nav), kBpsDecimals);
    }
  }
  os << '\n';
}

inline nlohmann::ordered_json json_row(const ReportRow& r, const std::optional<double>& nav) {
  nlohmann::ordered_json j;
  j["position"] = r.position;
  j["bucket"] = r.bucket;
  auto values = row_values(r);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!r.hedged_only || i == 6) j[std::string(kValueColumns[i]) + "_eur"] = round_half_even(values[i], kEurDecimals);
  if (nav)
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!r.hedged_only || i == 6) j[std::string(kValueColumns[i]) + "_bps"] = to_bps(values[i], *nav);
  return j;
}

}  // namespace detail

inline std::string report_csv_header(bool with_bps) {
  std::string h = "position,bucket,fx_eur,rate_eur,market_eur,carry_eur,costs_eur,total_eur,hedged_eur";
  if (with_bps) h += ",fx_bps,rate_bps,market_bps,carry_bps,costs_bps,total_bps,hedged_bps";
  return h;
}

inline std::string render_csv(const Report& rep) {
  std::ostringstream os;
  os << report_csv_header(rep.nav.has_value()) << '\n';
  for (const auto& sec : rep.buckets) {
    for (const auto& r : sec.rows) detail::csv_row(os, r, rep.nav);
    detail::csv_row(os, sec.subtotal, rep.nav);
  }
  detail::csv_row(os, rep.positions, rep.nav);
  for (const auto& l : rep.lines) detail::csv_row(os, l, rep.nav);
  detail::csv_row(os, rep.total, rep.nav);
  return os.str();
}

inline std::string render_json(const Report& rep) {
  nlohmann::ordered_json root;
  if (rep.nav) root["nav_eur"] = *rep.nav;
  root["buckets"] = nlohmann::ordered_json::array();
  for (const auto& sec : rep.buckets) {
    nlohmann::ordered_json b;
    b["bucket"] = std::string(to_string(sec.bucket));
    b["positions"] = nlohmann::ordered_json::array();
    for (const auto& r : sec.rows) b["positions"].push_back(detail::json_row(r, rep.nav));
    b["subtotal"] = detail::json_row(sec.subtotal, rep.nav);
    b["top"] = {{"position", sec.top.position}, {"hedged_eur", round_half_even(sec.top.hedged, kEurDecimals)}};
    b["worst"] = {{"position", sec.worst.position},
                  {"hedged_eur", round_half_even(sec.worst.hedged, kEurDecimals)}};
    root["buckets"].push_back(std::move(b));
  }
  root["positions"] = detail::json_row(rep.positions, rep.nav);
  root["lines"] = nlohmann::ordered_json::array();
  for (const auto& l : rep.lines) root["lines"].push_back(detail::json_row(l, rep.nav));
  root["total"] = detail::json_row(rep.total, rep.nav);
  return root.dump(2) + "\n";
}

/// Human-readable rollup: hedged PnL per bucket with top/worst positions.
/// Figures are in bps when a NAV is present, EUR otherwise.
inline std::string render_table(const Report& rep) {
  auto fig = [&](double eur) {
    return rep.nav ? detail::fixed(to_bps(eur, *rep.nav), kBpsDecimals) : detail::fixed(eur, kEurDecimals);
  };
  char buf[256];
  std::ostringstream os;
  auto line = [&](std::string_view name, const std::string& value, int indent) {
    std::snprintf(buf, sizeof buf, "%*s%-*s%16s\n", indent, "", 40 - indent, std::string(name).c_str(), value.c_str());
    os << buf;
  };
  os << (rep.nav ? "hedged PnL in bps of NAV\n" : "hedged PnL in EUR\n");
  line("POSITIONS", fig(rep.positions.hedged), 0);
  for (const auto& sec : rep.buckets) {
    bool position_bucket = false;
    for (Bucket pb : kPositionBuckets) position_bucket = position_bucket || pb == sec.bucket;
    if (!position_bucket) continue;
    line(to_string(sec.bucket), fig(sec.subtotal.hedged), 2);
    if (sec.top.position == sec.worst.position) {
      line("top=worst: " + sec.top.position, fig(sec.top.hedged), 4);
    } else {
      line("top: " + sec.top.position, fig(sec.top.hedged), 4);
      line("worst: " + sec.worst.position, fig(sec.worst.hedged), 4);
    }
  }
  for (const auto& l : rep.lines) line(l.position, fig(l.hedged), 0);
  line("TOTAL", fig(rep.total.hedged), 0);
  return os.str();
}

inline std::string render_report(const Report& rep, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(rep);
    case ReportFormat::Json: return render_json(rep);
    case ReportFormat::Table: return render_table(rep);
  }
  return render_csv(rep);
}

}  // namespace pnlattr
