#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pnlattr/date.hpp"
#include "pnlattr/error.hpp"
#include "pnlattr/market_data.hpp"

namespace pnlattr {

struct Cashflow {
  Date date;
  double amount;
  friend bool operator==(const Cashflow&, const Cashflow&) = default;
};

/// Dated cash outflows of an instrument (coupons, dividends). Dates strictly
/// increasing, amounts non-negative.
class CashflowSchedule {
 public:
  CashflowSchedule() = default;
  explicit CashflowSchedule(std::vector<Cashflow> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      require(std::isfinite(entries_[i].amount) && entries_[i].amount >= 0.0, ErrorKind::InvalidArgument,
              "cashflow amounts must be >= 0");
      if (i > 0)
        require(to_days(entries_[i].date) > to_days(entries_[i - 1].date), ErrorKind::InvalidArgument,
                "cashflow dates must be strictly increasing");
    }
  }

  const std::vector<Cashflow>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Amount paid exactly on `date`, zero if none.
  double amount_on(Date date) const {
    for (const auto& cf : entries_)
      if (cf.date == date) return cf.amount;
    return 0.0;
  }

  CashflowSchedule scaled(double factor) const {
    auto entries = entries_;
    for (auto& cf : entries) cf.amount *= factor;
    return CashflowSchedule(std::move(entries));
  }

 private:
  std::vector<Cashflow> entries_;
};

/// Entries with from < date <= to, in schedule order.
inline std::vector<Cashflow> coupons_in(const CashflowSchedule& schedule, Date from, Date to) {
  require(to_days(from) < to_days(to), ErrorKind::EmptyInterval,
          "coupon window (" + format_date(from) + ", " + format_date(to) + "] is empty");
  std::vector<Cashflow> out;
  for (const auto& cf : schedule.entries())
    if (to_days(cf.date) > to_days(from) && to_days(cf.date) <= to_days(to)) out.push_back(cf);
  return out;
}

// ---------------------------------------------------------------------------
// Instruments

struct BondSpec {
  double notional = 1.0;
  Date issue;
  Date maturity;
  double coupon_rate = 0.0;
  int coupon_frequency = 1;
  std::string currency = "USD";

  void validate() const {
    require(notional > 0.0, ErrorKind::InvalidArgument, "bond notional must be > 0");
    require(to_days(maturity) > to_days(issue), ErrorKind::InvalidArgument, "bond maturity must follow issue");
    require(coupon_frequency == 1 || coupon_frequency == 2 || coupon_frequency == 4 || coupon_frequency == 12,
            ErrorKind::InvalidArgument, "coupon frequency must be 1, 2, 4 or 12");
    require(std::isfinite(coupon_rate) && coupon_rate >= 0.0, ErrorKind::InvalidArgument,
            "coupon rate must be >= 0");
  }
};

enum class ProtectionSide { Bought, Sold };

struct CdsSpec {
  double notional = 1.0;
  Date maturity;
  double contractual_spread = 0.0;
  ProtectionSide direction = ProtectionSide::Bought;
  std::string currency = "USD";

  void validate() const {
    require(notional > 0.0, ErrorKind::InvalidArgument, "CDS notional must be > 0");
    require(std::isfinite(contractual_spread) && contractual_spread >= 0.0, ErrorKind::InvalidArgument,
            "CDS contractual spread must be >= 0");
  }
};

struct CashSpec {
  double balance = 0.0;
  double deposit_rate = 0.0;
  Date start;
  std::string currency = "EUR";

  void validate() const {
    require(std::isfinite(balance) && std::isfinite(deposit_rate), ErrorKind::InvalidArgument,
            "cash balance and deposit rate must be finite");
  }
};

/// Coupon dates step back from maturity in whole months and stop at issue;
/// amounts are per unit notional. Redemption is not part of the schedule.
inline CashflowSchedule bond_schedule(const BondSpec& spec) {
  spec.validate();
  const int step = 12 / spec.coupon_frequency;
  const double coupon = spec.coupon_rate / spec.coupon_frequency;
  std::vector<Cashflow> reversed;
  if (coupon > 0.0) {
    for (int k = 0;; ++k) {
      Date d = add_months(spec.maturity, -step * k);
      if (to_days(d) <= to_days(spec.issue)) break;
      reversed.push_back({d, coupon});
    }
  }
  return CashflowSchedule(std::vector<Cashflow>(reversed.rbegin(), reversed.rend()));
}

/// Reduced-form dirty price of `notional` face, ex any coupon paid on or
/// before `s`. The curve is read by tenor measured from `s`, whatever its
/// anchor date, so any snapshot's curve can price at any time.
inline double price_bond(const BondSpec& spec, Date s, const ZeroCurve& r, const MarketFactors& x) {
  require(to_days(s) <= to_days(spec.maturity), ErrorKind::PastMaturity,
          "bond priced at " + format_date(s) + " after maturity " + format_date(spec.maturity));
  const auto schedule = bond_schedule(spec);
  auto discount = [&](double tau) { return r.discount_factor(tau) * std::exp(-x.basis_spread * tau); };
  auto survival = [&](double tau) { return std::exp(-x.hazard_rate * tau); };

  double value = 0.0;
  // Recovery integral by trapezoid on the grid {0, remaining payment times}.
  double prev_tau = 0.0, prev_d = 1.0, prev_s = 1.0, recovery_leg = 0.0;
  auto step_to = [&](double tau) {
    double d = discount(tau), sv = survival(tau);
    recovery_leg += 0.5 * (prev_d + d) * (prev_s - sv);
    prev_tau = tau;
    prev_d = d;
    prev_s = sv;
    return d * sv;
  };
  for (const auto& cf : schedule.entries()) {
    if (to_days(cf.date) <= to_days(s)) continue;
    value += cf.amount * step_to(year_fraction(s, cf.date));
  }
  const double tau_n = year_fraction(s, spec.maturity);
  double redemption = tau_n > prev_tau ? step_to(tau_n) : prev_d * prev_s;
  value += redemption + x.recovery * recovery_leg;
  return spec.notional * value;
}

/// Risky annuity of a continuously paid premium, int_0^tau D(u) S(u) du.
/// Closed form on flat curves, quarterly trapezoid otherwise.
inline double risky_annuity(const ZeroCurve& r, double hazard, double tau) {
  if (tau <= 0.0) return 0.0;
  if (r.is_flat()) {
    double k = r.nodes().front().zero_rate + hazard;
    if (std::abs(k * tau) < 1e-12) return tau;
    return -std::expm1(-k * tau) / k;
  }
  auto integrand = [&](double u) { return r.discount_factor(u) * std::exp(-hazard * u); };
  double sum = 0.0, prev_u = 0.0, prev_f = 1.0;
  while (prev_u < tau) {
    double u = std::min(prev_u + 0.25, tau);
    double f = integrand(u);
    sum += 0.5 * (prev_f + f) * (u - prev_u);
    prev_u = u;
    prev_f = f;
  }
  return sum;
}

/// Value to the protection buyer (sign flipped for sold protection).
/// Protection leg (1-R)*lambda*annuity, premium leg spread*annuity.
inline double price_cds(const CdsSpec& spec, Date s, const ZeroCurve& r, const MarketFactors& x) {
  require(to_days(s) <= to_days(spec.maturity), ErrorKind::PastMaturity,
          "CDS priced at " + format_date(s) + " after maturity " + format_date(spec.maturity));
  const double tau = year_fraction(s, spec.maturity);
  const double annuity = risky_annuity(r, x.hazard_rate, tau);
  const double protection = (1.0 - x.recovery) * x.hazard_rate * annuity;
  const double premium = spec.contractual_spread * annuity;
  const double buyer = spec.notional * (protection - premium);
  return spec.direction == ProtectionSide::Bought ? buyer : -buyer;
}

inline double price_cash(const CashSpec& spec, Date s, const ZeroCurve& /*r*/) {
  require(to_days(s) >= to_days(spec.start), ErrorKind::InvalidArgument,
          "cash account valued before its start date");
  return spec.balance * std::exp(spec.deposit_rate * year_fraction(spec.start, s));
}

// ---------------------------------------------------------------------------
// Pricer

/// Anything attributable: a pure price A_s(r, x), its cash outflows in the
/// same units, and an optional end of life.
template <class P>
concept DatedPricer = requires(const P& p, Date s, const ZeroCurve& r, const MarketFactors& x) {
  { p.price(s, r, x) } -> std::convertible_to<double>;
  { p.cashflows() } -> std::convertible_to<const CashflowSchedule&>;
  { p.maturity() } -> std::convertible_to<std::optional<Date>>;
};

using InstrumentSpec = std::variant<BondSpec, CdsSpec, CashSpec>;

/// Value-semantic pricer for the built-in instruments.
class Pricer {
 public:
  explicit Pricer(InstrumentSpec spec) : spec_(std::move(spec)) {
    std::visit([](const auto& s) { s.validate(); }, spec_);
    if (const auto* bond = std::get_if<BondSpec>(&spec_)) flows_ = bond_schedule(*bond).scaled(bond->notional);
  }

  double price(Date s, const ZeroCurve& r, const MarketFactors& x) const {
    return std::visit(
        [&](const auto& spec) -> double {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, BondSpec>) return price_bond(spec, s, r, x);
          else if constexpr (std::is_same_v<T, CdsSpec>) return price_cds(spec, s, r, x);
          else return price_cash(spec, s, r);
        },
        spec_);
  }

  const CashflowSchedule& cashflows() const noexcept { return flows_; }

  std::optional<Date> maturity() const {
    if (const auto* b = std::get_if<BondSpec>(&spec_)) return b->maturity;
    if (const auto* c = std::get_if<CdsSpec>(&spec_)) return c->maturity;
    return std::nullopt;
  }

  const std::string& currency() const {
    return std::visit([](const auto& s) -> const std::string& { return s.currency; }, spec_);
  }

  const InstrumentSpec& spec() const noexcept { return spec_; }

 private:
  InstrumentSpec spec_;
  CashflowSchedule flows_;
};

/// Pricer backed by an arbitrary function, for custom or synthetic instruments.
class FunctionPricer {
 public:
  using Fn = std::function<double(Date, const ZeroCurve&, const MarketFactors&)>;

  explicit FunctionPricer(Fn fn, CashflowSchedule flows = {}, std::optional<Date> maturity = std::nullopt)
      : fn_(std::move(fn)), flows_(std::move(flows)), maturity_(maturity) {}

  double price(Date s, const ZeroCurve& r, const MarketFactors& x) const { return fn_(s, r, x); }
  const CashflowSchedule& cashflows() const noexcept { return flows_; }
  std::optional<Date> maturity() const { return maturity_; }

 private:
  Fn fn_;
  CashflowSchedule flows_;
  std::optional<Date> maturity_;
};

static_assert(DatedPricer<Pricer>);
static_assert(DatedPricer<FunctionPricer>);

}  // namespace pnlattr
