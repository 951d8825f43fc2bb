#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pnlattr/date.hpp"
#include "pnlattr/error.hpp"
#include "pnlattr/market_data.hpp"
#include "pnlattr/pricers.hpp"

namespace pnlattr {

/// How the EUR PnL is split between the FX move and the local-currency move.
enum class FxMode {
  AverageWeights,  // FX move on the average asset value, asset move at the average rate
  StartEnd,        // FX move on the start value, asset move at the end rate
};

/// Treatment of coupon cash inside a subperiod chain.
enum class CarryMode {
  CorrectedStart,   // subperiods start at the ex-coupon price; additive
  PaperLiteral,     // subperiods start at the pre-coupon price A_{u-}; short by interior coupons
  SophisFrozenAtT,  // coupons converted at the period-end FX rate
};

/// EUR PnL in four parts. `residual` is total minus the sum of the parts.
struct AttributionResult {
  double fx = 0.0;
  double rate = 0.0;
  double market = 0.0;
  double carry = 0.0;
  double total = 0.0;
  double residual = 0.0;

  double parts_sum() const noexcept { return fx + rate + market + carry; }
  void reconcile() noexcept { residual = total - parts_sum(); }

  AttributionResult& operator+=(const AttributionResult& o) noexcept {
    fx += o.fx;
    rate += o.rate;
    market += o.market;
    carry += o.carry;
    total += o.total;
    residual += o.residual;
    return *this;
  }
  friend AttributionResult operator+(AttributionResult a, const AttributionResult& b) noexcept { return a += b; }
  AttributionResult scaled(double k) const noexcept {
    return {fx * k, rate * k, market * k, carry * k, total * k, residual * k};
  }
};

struct FxSplit {
  double fx_part = 0.0;
  double asset_part = 0.0;
};

inline FxSplit fx_split(double a_start, double a_end, FxQuote chi_start, FxQuote chi_end, FxMode mode) {
  const double x0 = chi_start.rate(), x1 = chi_end.rate();
  if (mode == FxMode::AverageWeights)
    return {0.5 * (a_start + a_end) * (x1 - x0), 0.5 * (x0 + x1) * (a_end - a_start)};
  return {a_start * (x1 - x0), x1 * (a_end - a_start)};
}

/// Weight converting local-currency price moves to EUR in the rate, market
/// and carry parts.
inline double asset_fx_weight(FxQuote chi_start, FxQuote chi_end, FxMode mode) {
  return mode == FxMode::AverageWeights ? 0.5 * (chi_start.rate() + chi_end.rate()) : chi_end.rate();
}

/// Prices at the start and end time of a period, each under the
/// (curve, factors) combinations the four-way split consumes.
/// Naming: <time>_<curve from>_<factors from>.
struct CrossPrices {
  double start_rs_xs = 0.0;  // A_t(r_t, x_t)
  double start_re_xs = 0.0;  // A_t(r_T, x_t)
  double start_rs_xe = 0.0;  // A_t(r_t, x_T)
  double end_re_xe = 0.0;    // A_T(r_T, x_T)
  double end_rs_xe = 0.0;    // A_T(r_t, x_T)
  double end_re_xs = 0.0;    // A_T(r_T, x_t)

  /// Shifts every start-time price, e.g. by a coupon paid at the start date.
  CrossPrices with_start_offset(double offset) const noexcept {
    CrossPrices p = *this;
    p.start_rs_xs += offset;
    p.start_re_xs += offset;
    p.start_rs_xe += offset;
    return p;
  }
};

/// Any state exposing a curve, factors and an FX quote (MarketSnapshot, or
/// scalar states in tests and studies).
template <class State>
concept AttributionState = requires(const State& s) {
  s.curve;
  s.factors;
  { s.fx } -> std::convertible_to<FxQuote>;
};

template <class Curve, class Factors>
struct BasicState {
  Curve curve;
  Factors factors;
  FxQuote fx;
};

using ScalarState = BasicState<double, double>;

template <class Time, AttributionState State, class PriceFn>
CrossPrices cross_evaluate(const PriceFn& price, const Time& t, const Time& T, const State& at_t,
                           const State& at_T) {
  auto eval = [&](const Time& s, const auto& curve, const auto& factors, const char* label) {
    double v;
    try {
      v = static_cast<double>(price(s, curve, factors));
    } catch (const std::exception& e) {
      fail(ErrorKind::PricerEvaluationFailed, std::string(label) + ": " + e.what());
    }
    require(std::isfinite(v), ErrorKind::PricerEvaluationFailed, std::string(label) + " is not finite");
    return v;
  };
  CrossPrices p;
  p.start_rs_xs = eval(t, at_t.curve, at_t.factors, "A_t(r_t, x_t)");
  p.start_re_xs = eval(t, at_T.curve, at_t.factors, "A_t(r_T, x_t)");
  p.start_rs_xe = eval(t, at_t.curve, at_T.factors, "A_t(r_t, x_T)");
  p.end_re_xe = eval(T, at_T.curve, at_T.factors, "A_T(r_T, x_T)");
  p.end_rs_xe = eval(T, at_t.curve, at_T.factors, "A_T(r_t, x_T)");
  p.end_re_xs = eval(T, at_T.curve, at_t.factors, "A_T(r_T, x_t)");
  return p;
}

/// Splits the EUR PnL A_T*chi_T - A_t*chi_t of one period into FX, rate,
/// market and carry parts. Rate and market parts average the one-factor
/// bump over both ends of the period; carry mixes the (curve, factors) pairs
/// symmetrically so that the four parts add up to the total.
inline AttributionResult split_cross_prices(const CrossPrices& p, FxQuote chi_t, FxQuote chi_T, FxMode mode) {
  const double w = asset_fx_weight(chi_t, chi_T, mode);
  AttributionResult r;
  r.fx = fx_split(p.start_rs_xs, p.end_re_xe, chi_t, chi_T, mode).fx_part;
  r.rate = w * 0.5 * ((p.end_re_xe - p.end_rs_xe) + (p.start_re_xs - p.start_rs_xs));
  r.market = w * 0.5 * ((p.end_re_xe - p.end_re_xs) + (p.start_rs_xe - p.start_rs_xs));
  r.carry = w * 0.5 * ((p.end_re_xs - p.start_rs_xe) + (p.end_rs_xe - p.start_re_xs));
  r.total = p.end_re_xe * chi_T.rate() - p.start_rs_xs * chi_t.rate();
  r.reconcile();
  return r;
}

template <class Time, AttributionState State, class PriceFn>
AttributionResult four_way_split(const PriceFn& price, const Time& t, const Time& T, const State& at_t,
                                 const State& at_T, FxMode mode) {
  require(t < T, ErrorKind::EmptyPeriod, "four-way split needs t < T");
  return split_cross_prices(cross_evaluate(price, t, T, at_t, at_T), at_t.fx, at_T.fx, mode);
}

/// Snapshot overload: prices with a DatedPricer at the snapshot dates.
template <DatedPricer P>
AttributionResult four_way_split(const P& pricer, Date t, Date T, const MarketSnapshot& snap_t,
                                 const MarketSnapshot& snap_T, FxMode mode) {
  auto price = [&](Date s, const ZeroCurve& r, const MarketFactors& x) { return pricer.price(s, r, x); };
  return four_way_split(price, t, T, snap_t, snap_T, mode);
}

// ---------------------------------------------------------------------------
// Positions and portfolios

enum class Bucket { CapitalStructure, SeniorSub, MismatchBasis, MatchedBasis, Other, Hedge, Cash };

inline constexpr std::array<Bucket, 7> kAllBuckets = {Bucket::CapitalStructure, Bucket::SeniorSub,
                                                      Bucket::MismatchBasis,    Bucket::MatchedBasis,
                                                      Bucket::Other,            Bucket::Hedge,
                                                      Bucket::Cash};

/// Buckets whose hedged PnL forms the POSITIONS line of the fund rollup.
inline constexpr std::array<Bucket, 5> kPositionBuckets = {Bucket::CapitalStructure, Bucket::SeniorSub,
                                                           Bucket::MismatchBasis, Bucket::MatchedBasis,
                                                           Bucket::Other};

constexpr std::string_view to_string(Bucket b) noexcept {
  switch (b) {
    case Bucket::CapitalStructure: return "CapitalStructure";
    case Bucket::SeniorSub: return "SeniorSub";
    case Bucket::MismatchBasis: return "MismatchBasis";
    case Bucket::MatchedBasis: return "MatchedBasis";
    case Bucket::Other: return "Other";
    case Bucket::Hedge: return "Hedge";
    case Bucket::Cash: return "Cash";
  }
  return "Other";
}

inline Bucket parse_bucket(std::string_view token) {
  for (Bucket b : kAllBuckets)
    if (to_string(b) == token) return b;
  fail(ErrorKind::UnknownBucket, "unknown bucket '" + std::string(token) + "'");
}

struct Transaction {
  Date date;
  double quantity_change = 0.0;
  double cost_eur = 0.0;
};

/// A holding in one instrument. Quantity before the first transaction is
/// `opening_quantity`; each transaction adds its quantity change.
template <DatedPricer P = Pricer>
struct BasicPosition {
  std::string id;
  Bucket bucket = Bucket::Other;
  P pricer;
  int notional_sign = +1;
  double opening_quantity = 1.0;
  std::vector<Transaction> transactions{};
  bool eur_denominated = false;  // chi == 1 at every date

  const CashflowSchedule& schedule() const { return pricer.cashflows(); }

  /// Signed quantity held just after all transactions dated on or before `d`.
  double quantity_after(Date d) const {
    double q = opening_quantity;
    for (const auto& tx : transactions)
      if (to_days(tx.date) <= to_days(d)) q += tx.quantity_change;
    return notional_sign * q;
  }

  void validate() const {
    require(notional_sign == 1 || notional_sign == -1, ErrorKind::InvalidArgument,
            "position '" + id + "': notional sign must be +1 or -1");
    auto end = pricer.maturity();
    for (const auto& tx : transactions) {
      require(std::isfinite(tx.cost_eur) && tx.cost_eur >= 0.0, ErrorKind::InvalidArgument,
              "position '" + id + "': transaction costs must be >= 0");
      require(std::isfinite(tx.quantity_change), ErrorKind::InvalidArgument,
              "position '" + id + "': non-finite quantity change");
      if (end)
        require(to_days(tx.date) <= to_days(*end), ErrorKind::InvalidArgument,
                "position '" + id + "': transaction on " + format_date(tx.date) + " after maturity");
    }
  }
};

using Position = BasicPosition<Pricer>;

/// Fund-level lines reported next to the position buckets.
enum class StandaloneLine { CashParking, Fees, IrHedgeCosts, FxCostsDiscrepancy, OtherCosts };

inline constexpr std::array<StandaloneLine, 5> kAllLines = {StandaloneLine::CashParking, StandaloneLine::Fees,
                                                            StandaloneLine::IrHedgeCosts,
                                                            StandaloneLine::FxCostsDiscrepancy,
                                                            StandaloneLine::OtherCosts};

constexpr std::string_view to_string(StandaloneLine l) noexcept {
  switch (l) {
    case StandaloneLine::CashParking: return "CASH_PARKING";
    case StandaloneLine::Fees: return "FEES";
    case StandaloneLine::IrHedgeCosts: return "IR_HEDGE_COSTS";
    case StandaloneLine::FxCostsDiscrepancy: return "FX_COSTS_DISCREPANCY";
    case StandaloneLine::OtherCosts: return "OTHER_COSTS";
  }
  return "OTHER_COSTS";
}

inline StandaloneLine parse_line(std::string_view token) {
  for (auto l : kAllLines)
    if (to_string(l) == token) return l;
  fail(ErrorKind::ParseError, "unknown standalone line '" + std::string(token) + "'");
}

/// Externally supplied EUR amount (fees, deposit charges, ...) booked on a
/// standalone line as is.
struct PassThroughLine {
  StandaloneLine line = StandaloneLine::OtherCosts;
  double amount_eur = 0.0;
};

template <DatedPricer P = Pricer>
struct BasicPortfolio {
  std::vector<BasicPosition<P>> positions;
  std::vector<PassThroughLine> pass_through;

  static constexpr std::string_view base_currency = "EUR";

  void validate() const {
    std::unordered_set<std::string> ids;
    for (const auto& p : positions) {
      require(ids.insert(p.id).second, ErrorKind::DuplicatePositionId, "duplicate position id '" + p.id + "'");
      p.validate();
    }
  }
};

using Portfolio = BasicPortfolio<Pricer>;

// ---------------------------------------------------------------------------
// Period segmentation

namespace detail {

template <DatedPricer P>
void collect_dates(const BasicPosition<P>& position, Date t, Date T, std::set<std::chrono::sys_days>& out) {
  auto inside = [&](Date d) { return to_days(d) > to_days(t) && to_days(d) <= to_days(T); };
  for (const auto& tx : position.transactions)
    if (inside(tx.date)) out.insert(to_days(tx.date));
  for (const auto& cf : position.schedule().entries())
    if (inside(cf.date)) out.insert(to_days(cf.date));
  if (auto m = position.pricer.maturity(); m && inside(*m)) out.insert(to_days(*m));
}

inline std::vector<Date> to_grid(const std::set<std::chrono::sys_days>& days) {
  std::vector<Date> grid;
  grid.reserve(days.size());
  for (auto d : days) grid.emplace_back(d);
  return grid;
}

}  // namespace detail

/// t, T, and every transaction, coupon and maturity date in (t, T] of the
/// positions in scope; sorted, without duplicates.
template <DatedPricer P>
std::vector<Date> segment_period(std::span<const BasicPosition<P>> positions, Date t, Date T) {
  require(to_days(t) < to_days(T), ErrorKind::EmptyPeriod,
          "period (" + format_date(t) + ", " + format_date(T) + "] is empty");
  std::set<std::chrono::sys_days> days{to_days(t), to_days(T)};
  for (const auto& p : positions) detail::collect_dates(p, t, T, days);
  return detail::to_grid(days);
}

template <DatedPricer P>
std::vector<Date> segment_period(const BasicPosition<P>& position, Date t, Date T) {
  return segment_period(std::span<const BasicPosition<P>>(&position, 1), t, T);
}

template <DatedPricer P>
std::vector<Date> segment_period(const BasicPortfolio<P>& portfolio, Date t, Date T) {
  return segment_period(std::span<const BasicPosition<P>>(portfolio.positions), t, T);
}

// ---------------------------------------------------------------------------
// Position attribution over a grid

struct SubperiodAttribution {
  Date from;
  Date to;
  double quantity = 0.0;
  double coupon = 0.0;  // per-instrument coupon paid at `to`
  AttributionResult result;
  double costs_eur = 0.0;  // transaction costs booked at `to`
};

struct PositionAttribution {
  std::vector<SubperiodAttribution> subperiods;
  AttributionResult aggregate;
  double costs_eur = 0.0;

  /// Market plus carry minus transaction costs: the PnL left after
  /// neutralising the rate and FX parts.
  double hedged_pnl() const noexcept { return aggregate.market + aggregate.carry - costs_eur; }
};

/// Attributes one position over the grid u_0 < ... < u_n. Each subperiod
/// (u_{i-1}, u_i] starts from the ex-coupon price (pre-coupon under
/// PaperLiteral), ends at the ex-coupon price, and credits the coupon paid at
/// u_i to carry. On a date with both a coupon and a trade the coupon goes to
/// the quantity held before the trade.
template <DatedPricer P>
PositionAttribution attribute_position(const BasicPosition<P>& position, std::span<const MarketSnapshot> snapshots,
                                       std::span<const Date> grid, FxMode fx_mode, CarryMode carry_mode) {
  require(grid.size() >= 2, ErrorKind::EmptyPeriod, "attribution grid needs at least two dates");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(to_days(grid[i - 1]) < to_days(grid[i]), ErrorKind::InvalidArgument,
            "attribution grid must be strictly increasing");

  const Date t = grid.front(), T = grid.back();
  for (const auto& cf : position.schedule().entries()) {
    if (to_days(cf.date) <= to_days(t) || to_days(cf.date) > to_days(T)) continue;
    require(std::binary_search(grid.begin(), grid.end(), cf.date,
                               [](Date a, Date b) { return to_days(a) < to_days(b); }),
            ErrorKind::ScheduleOutsideGrid, "cashflow on " + format_date(cf.date) + " is not a grid date");
  }

  auto snapshot_at = [&](Date d) -> const MarketSnapshot& {
    const MarketSnapshot* s = find_snapshot(snapshots, d);
    if (!s) fail(ErrorKind::MissingSnapshot, "no market snapshot for " + format_date(d));
    return *s;
  };
  auto fx_at = [&](const MarketSnapshot& s) { return position.eur_denominated ? FxQuote(1.0) : s.fx; };

  const FxQuote chi_T = fx_at(snapshot_at(T));
  const auto maturity = position.pricer.maturity();
  auto price = [&](Date s, const ZeroCurve& r, const MarketFactors& x) { return position.pricer.price(s, r, x); };

  PositionAttribution out;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    SubperiodAttribution sub;
    sub.from = grid[i - 1];
    sub.to = grid[i];
    for (const auto& tx : position.transactions)
      if (tx.date == sub.to) sub.costs_eur += tx.cost_eur;
    out.costs_eur += sub.costs_eur;

    const bool matured = maturity && to_days(sub.from) >= to_days(*maturity);
    sub.quantity = matured ? 0.0 : position.quantity_after(sub.from);
    if (sub.quantity == 0.0) {
      out.subperiods.push_back(sub);
      continue;
    }

    const MarketSnapshot& a = snapshot_at(sub.from);
    const MarketSnapshot& b = snapshot_at(sub.to);
    const FxQuote chi_a = fx_at(a), chi_b = fx_at(b);
    sub.coupon = position.schedule().amount_on(sub.to);
    const double start_coupon =
        carry_mode == CarryMode::PaperLiteral ? position.schedule().amount_on(sub.from) : 0.0;

    CrossPrices prices = cross_evaluate(price, sub.from, sub.to, a, b).with_start_offset(start_coupon);
    AttributionResult r = split_cross_prices(prices, chi_a, chi_b, fx_mode);

    const double coupon_fx =
        carry_mode == CarryMode::SophisFrozenAtT ? chi_T.rate() : 0.5 * (chi_a.rate() + chi_b.rate());
    r.carry += sub.coupon * coupon_fx;
    // Realized PnL is measured from the ex-coupon start price in every mode.
    r.total += start_coupon * chi_a.rate() + sub.coupon * coupon_fx;
    r.reconcile();

    sub.result = r.scaled(sub.quantity);
    out.aggregate += sub.result;
    out.subperiods.push_back(sub);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Portfolio attribution

struct PositionSummary {
  std::string id;
  Bucket bucket = Bucket::Other;
  PositionAttribution attribution;

  const AttributionResult& parts() const noexcept { return attribution.aggregate; }
  double costs_eur() const noexcept { return attribution.costs_eur; }
  double hedged_pnl() const noexcept { return attribution.hedged_pnl(); }
};

struct BucketTotal {
  AttributionResult parts;
  double costs_eur = 0.0;
  double hedged_pnl = 0.0;
  std::size_t members = 0;
};

struct PortfolioAttribution {
  std::vector<Date> grid;
  std::vector<PositionSummary> positions;  // portfolio order
  std::array<BucketTotal, kAllBuckets.size()> buckets{};
  AttributionResult fund;
  double fund_costs_eur = 0.0;
  std::vector<PassThroughLine> pass_through;

  const BucketTotal& bucket(Bucket b) const { return buckets[static_cast<std::size_t>(b)]; }
};

/// Attributes every position on the common grid of the portfolio.
/// Positions are evaluated concurrently; sums are taken in portfolio order.
template <DatedPricer P>
PortfolioAttribution attribute_portfolio(const BasicPortfolio<P>& portfolio,
                                         std::span<const MarketSnapshot> snapshots, Date t, Date T,
                                         FxMode fx_mode, CarryMode carry_mode, bool parallel = true) {
  portfolio.validate();
  PortfolioAttribution out;
  out.grid = segment_period(portfolio, t, T);
  out.pass_through = portfolio.pass_through;

  auto run = [&](const BasicPosition<P>& p) {
    try {
      return attribute_position(p, snapshots, std::span<const Date>(out.grid), fx_mode, carry_mode);
    } catch (const Error& e) {
      throw Error(e.kind(), "position '" + p.id + "': " + e.message());
    }
  };

  std::vector<PositionAttribution> results;
  results.reserve(portfolio.positions.size());
  if (parallel && portfolio.positions.size() > 1) {
    std::vector<std::future<PositionAttribution>> jobs;
    jobs.reserve(portfolio.positions.size());
    for (const auto& p : portfolio.positions) jobs.push_back(std::async(std::launch::async, run, std::cref(p)));
    for (auto& j : jobs) results.push_back(j.get());
  } else {
    for (const auto& p : portfolio.positions) results.push_back(run(p));
  }

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& p = portfolio.positions[i];
    PositionSummary s{p.id, p.bucket, std::move(results[i])};
    auto& bucket = out.buckets[static_cast<std::size_t>(p.bucket)];
    bucket.parts += s.parts();
    bucket.costs_eur += s.costs_eur();
    bucket.hedged_pnl += s.hedged_pnl();
    ++bucket.members;
    out.fund += s.parts();
    out.fund_costs_eur += s.costs_eur();
    out.positions.push_back(std::move(s));
  }
  return out;
}

}  // namespace pnlattr
