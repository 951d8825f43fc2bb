#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pnlattr/attribution.hpp"
#include "pnlattr/path_oracle.hpp"
#include "pnlattr/portfolio_io.hpp"
#include "pnlattr/report.hpp"

namespace pnlattr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(output, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidArgument, "cannot write '" + output + "'");
  f << text;
}

/// Every grid date must have a snapshot; names the first missing one.
inline void check_coverage(const Portfolio& portfolio, std::span<const MarketSnapshot> snapshots, Date from, Date to) {
  for (Date d : segment_period(portfolio, from, to))
    if (!find_snapshot(snapshots, d))
      fail(ErrorKind::MissingSnapshot, "market data has no row for grid date " + format_date(d));
}

}  // namespace detail

/// Command-line driver. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Multi-currency PnL attribution into FX, rate, market and carry parts", "pnlattr"};
  app.require_subcommand(1);

  const std::map<std::string, FxMode> fx_modes{{"average", FxMode::AverageWeights},
                                               {"start-end", FxMode::StartEnd}};
  const std::map<std::string, CarryMode> carry_modes{{"corrected", CarryMode::CorrectedStart},
                                                     {"literal", CarryMode::PaperLiteral},
                                                     {"sophis", CarryMode::SophisFrozenAtT}};
  const std::map<std::string, ReportFormat> formats{
      {"csv", ReportFormat::Csv}, {"json", ReportFormat::Json}, {"table", ReportFormat::Table}};

  FxMode fx_mode = FxMode::AverageWeights;
  CarryMode carry_mode = CarryMode::CorrectedStart;
  ReportFormat format = ReportFormat::Csv;
  std::string portfolio_path, market_path, from_text, to_text, output;
  std::optional<double> nav;

  auto* attribute = app.add_subcommand("attribute", "Attribute portfolio PnL over a period");
  attribute->add_option("--portfolio", portfolio_path, "Portfolio YAML file")->required();
  attribute->add_option("--market", market_path, "Market data CSV file")->required();
  attribute->add_option("--from", from_text, "Period start (exclusive), YYYY-MM-DD")->required();
  attribute->add_option("--to", to_text, "Period end (inclusive), YYYY-MM-DD")->required();
  attribute->add_option("--format", format, "Report format")->transform(CLI::CheckedTransformer(formats));
  attribute->add_option("--fx-mode", fx_mode, "FX split")->transform(CLI::CheckedTransformer(fx_modes));
  attribute->add_option("--carry-mode", carry_mode, "Coupon treatment")
      ->transform(CLI::CheckedTransformer(carry_modes));
  attribute->add_option("--nav", nav, "Fund NAV in EUR; adds bps columns");
  attribute->add_option("--output", output, "Write the report here instead of stdout");

  std::string v_portfolio, v_market, v_from, v_to;
  auto* validate = app.add_subcommand("validate", "Ingest and check inputs only");
  validate->add_option("--portfolio", v_portfolio, "Portfolio YAML file");
  validate->add_option("--market", v_market, "Market data CSV file");
  validate->add_option("--from", v_from, "Optional period start for a coverage check");
  validate->add_option("--to", v_to, "Optional period end for a coverage check");

  std::uint64_t seed = 1;
  std::size_t seeds = 1000, steps = 252;
  double horizon = 1.0, vol_asset = 0.05, vol_fx = 0.08, drift_asset = 0.0, drift_fx = 0.0, correlation = 0.0;
  double asset0 = 100.0, fx0 = 0.9, jump_intensity = 0.0, jump_asset = 0.0, jump_fx = 0.0;
  bool summary = false;
  std::string oracle_output;
  FxMode oracle_fx_mode = FxMode::AverageWeights;
  auto* oracle = app.add_subcommand("oracle", "Coarse two-point split against fine-grid product-formula sums");
  oracle->add_option("--seed", seed, "First seed");
  oracle->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  oracle->add_option("--steps", steps, "Grid steps per path")->check(CLI::PositiveNumber);
  oracle->add_option("--horizon", horizon, "Path length in years")->check(CLI::PositiveNumber);
  oracle->add_option("--asset0", asset0, "Initial asset price");
  oracle->add_option("--fx0", fx0, "Initial FX rate (EUR per unit)");
  oracle->add_option("--drift-asset", drift_asset, "Asset drift per annum");
  oracle->add_option("--drift-fx", drift_fx, "FX drift per annum");
  oracle->add_option("--vol-asset", vol_asset, "Asset volatility");
  oracle->add_option("--vol-fx", vol_fx, "FX volatility");
  oracle->add_option("--correlation", correlation, "Correlation of asset and FX drivers");
  oracle->add_option("--jump-intensity", jump_intensity, "Common jump intensity per annum");
  oracle->add_option("--jump-asset", jump_asset, "Relative asset jump size");
  oracle->add_option("--jump-fx", jump_fx, "Relative FX jump size");
  oracle->add_option("--fx-mode", oracle_fx_mode, "Two-point FX split")->transform(CLI::CheckedTransformer(fx_modes));
  oracle->add_flag("--summary", summary, "Print per-component statistics instead of per-seed rows");
  oracle->add_option("--output", oracle_output, "Write the CSV here instead of stdout");

  std::vector<const char*> argv{"pnlattr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*attribute) {
      const Date from = parse_date(from_text), to = parse_date(to_text);
      require(to_days(from) < to_days(to), ErrorKind::EmptyPeriod, "--from must precede --to");
      const Portfolio portfolio = load_portfolio(portfolio_path);
      const auto snapshots = load_market_file(market_path);
      const auto result = attribute_portfolio(portfolio, snapshots, from, to, fx_mode, carry_mode);
      detail::emit(render_report(build_report(result, nav), format), output, out);
      return kExitOk;
    }
    if (*validate) {
      if (v_portfolio.empty() && v_market.empty()) {
        err << "error: validate needs --portfolio and/or --market\n\n" << validate->help();
        return kExitUsage;
      }
      std::optional<Portfolio> portfolio;
      std::vector<MarketSnapshot> snapshots;
      if (!v_portfolio.empty()) {
        portfolio = load_portfolio(v_portfolio);
        err << "portfolio ok: " << portfolio->positions.size() << " positions\n";
      }
      if (!v_market.empty()) {
        snapshots = load_market_file(v_market);
        err << "market data ok: " << snapshots.size() << " snapshots\n";
      }
      if (portfolio && !snapshots.empty() && !v_from.empty() && !v_to.empty()) {
        detail::check_coverage(*portfolio, snapshots, parse_date(v_from), parse_date(v_to));
        err << "coverage ok\n";
      }
      return kExitOk;
    }
    if (*oracle) {
      PathParams params;
      params.end_time = horizon;
      params.processes = {{"asset", asset0, drift_asset, vol_asset, ProcessKind::Geometric, jump_asset},
                          {"fx", fx0, drift_fx, vol_fx, ProcessKind::Geometric, jump_fx}};
      params.correlation = {{1.0, correlation}, {correlation, 1.0}};
      params.jump_intensity = jump_intensity;
      const auto study = run_discrepancy_study(params, steps, seed, seeds, oracle_fx_mode);
      std::ostringstream os;
      if (summary) {
        os << "component,count,mean_coarse,mean_fine,mean_diff,stddev_diff,stderr_diff,stderr_fine\n";
        char buf[256];
        for (const auto& s : study.stats) {
          std::snprintf(buf, sizeof buf, "%s,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", s.component.c_str(), s.count,
                        s.mean_coarse, s.mean_fine, s.mean_diff, s.stddev_diff, s.stderr_diff, s.stderr_fine);
          os << buf;
        }
      } else {
        write_discrepancy_csv(os, study.rows);
      }
      detail::emit(os.str(), oracle_output, out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace pnlattr
