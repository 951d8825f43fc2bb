#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pnlattr/attribution.hpp"
#include "pnlattr/date.hpp"
#include "pnlattr/error.hpp"
#include "pnlattr/market_data.hpp"
#include "pnlattr/pricers.hpp"

namespace pnlattr {

// Portfolio file (YAML):
//
//   positions:
//     - id: TELCO-BOND
//       bucket: MatchedBasis          # CapitalStructure|SeniorSub|MismatchBasis|MatchedBasis|Other|Hedge|Cash
//       instrument: bond              # bond|cds|cash
//       currency: USD
//       notional: 4000000
//       issue: 2020-01-15
//       maturity: 2029-01-15
//       coupon_rate: 0.04875
//       coupon_frequency: 2
//       side: long                    # long|short, default long
//       quantity: 0                   # opening quantity, default 1
//       transactions:
//         - {date: 2021-05-21, quantity: 1, cost_eur: 6268}
//   lines:                            # optional pass-through amounts
//     - {line: FEES, amount_eur: -30000}
//
// cds keys: notional, maturity, spread, protection (bought|sold), currency.
// cash keys: balance, deposit_rate, start, currency.

namespace detail {

inline std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return "portfolio";
  return "portfolio line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1);
}

inline YAML::Node required(const YAML::Node& map, const char* key) {
  YAML::Node n = map[key];
  if (!n || n.IsNull()) fail(ErrorKind::MissingField, where(map) + ": missing field '" + key + "'");
  return n;
}

template <class T>
T scalar(const YAML::Node& n, const char* key) {
  if (!n.IsScalar()) fail(ErrorKind::ParseError, where(n) + ": field '" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::ParseError, where(n) + ": field '" + key + "' has invalid value '" + n.Scalar() + "'");
  }
}

template <class T>
T get(const YAML::Node& map, const char* key) {
  return scalar<T>(required(map, key), key);
}

template <class T>
T get_or(const YAML::Node& map, const char* key, T fallback) {
  YAML::Node n = map[key];
  if (!n || n.IsNull()) return fallback;
  return scalar<T>(n, key);
}

inline Date get_date(const YAML::Node& map, const char* key) {
  YAML::Node n = required(map, key);
  auto text = scalar<std::string>(n, key);
  try {
    return parse_date(text);
  } catch (const Error&) {
    fail(ErrorKind::ParseError, where(n) + ": field '" + key + "' is not an ISO date: '" + text + "'");
  }
}

inline InstrumentSpec parse_instrument(const YAML::Node& node) {
  const auto kind = get<std::string>(node, "instrument");
  if (kind == "bond") {
    BondSpec b;
    b.notional = get<double>(node, "notional");
    b.issue = get_date(node, "issue");
    b.maturity = get_date(node, "maturity");
    b.coupon_rate = get<double>(node, "coupon_rate");
    b.coupon_frequency = get_or<int>(node, "coupon_frequency", 1);
    b.currency = get_or<std::string>(node, "currency", "USD");
    return b;
  }
  if (kind == "cds") {
    CdsSpec c;
    c.notional = get<double>(node, "notional");
    c.maturity = get_date(node, "maturity");
    c.contractual_spread = get<double>(node, "spread");
    const auto side = get_or<std::string>(node, "protection", "bought");
    if (side != "bought" && side != "sold")
      fail(ErrorKind::ParseError, where(node) + ": protection must be 'bought' or 'sold', got '" + side + "'");
    c.direction = side == "bought" ? ProtectionSide::Bought : ProtectionSide::Sold;
    c.currency = get_or<std::string>(node, "currency", "USD");
    return c;
  }
  if (kind == "cash") {
    CashSpec c;
    c.balance = get<double>(node, "balance");
    c.deposit_rate = get_or<double>(node, "deposit_rate", 0.0);
    c.start = get_date(node, "start");
    c.currency = get_or<std::string>(node, "currency", "EUR");
    return c;
  }
  fail(ErrorKind::ParseError, where(node) + ": unknown instrument '" + kind + "'");
}

inline Position parse_position(const YAML::Node& node) {
  if (!node.IsMap()) fail(ErrorKind::ParseError, where(node) + ": position must be a mapping");
  const auto id = get<std::string>(node, "id");

  YAML::Node bucket_node = required(node, "bucket");
  const auto token = scalar<std::string>(bucket_node, "bucket");
  Bucket bucket{};
  try {
    bucket = parse_bucket(token);
  } catch (const Error&) {
    fail(ErrorKind::UnknownBucket, where(bucket_node) + ": unknown bucket '" + token + "'");
  }

  auto invalid = [&](const Error& e) -> Error {
    if (e.kind() == ErrorKind::InvalidArgument)
      return Error(ErrorKind::ParseError, where(node) + ": position '" + id + "': " + e.message());
    return e;
  };

  std::optional<Pricer> pricer;
  try {
    pricer.emplace(parse_instrument(node));
  } catch (const Error& e) {
    throw invalid(e);
  }

  const auto side = get_or<std::string>(node, "side", "long");
  if (side != "long" && side != "short")
    fail(ErrorKind::ParseError, where(node) + ": side must be 'long' or 'short', got '" + side + "'");

  std::vector<Transaction> transactions;
  if (YAML::Node txs = node["transactions"]; txs && !txs.IsNull()) {
    if (!txs.IsSequence()) fail(ErrorKind::ParseError, where(txs) + ": transactions must be a list");
    for (const auto& tx : txs) {
      if (!tx.IsMap()) fail(ErrorKind::ParseError, where(tx) + ": transaction must be a mapping");
      transactions.push_back({get_date(tx, "date"), get<double>(tx, "quantity"), get_or<double>(tx, "cost_eur", 0.0)});
    }
  }

  Position p{id, bucket, std::move(*pricer), side == "long" ? 1 : -1, get_or<double>(node, "quantity", 1.0),
             std::move(transactions), false};
  p.eur_denominated = p.pricer.currency() == "EUR";
  try {
    p.validate();
  } catch (const Error& e) {
    throw invalid(e);
  }
  return p;
}

}  // namespace detail

inline Portfolio parse_portfolio(const std::string& text) {
  Portfolio portfolio;
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) fail(ErrorKind::ParseError, "portfolio: top level must be a mapping");
    YAML::Node positions = detail::required(root, "positions");
    if (!positions.IsSequence()) fail(ErrorKind::ParseError, detail::where(positions) + ": positions must be a list");
    std::vector<std::pair<std::string, std::string>> seen;  // id, location
    std::string currency;
    for (const auto& node : positions) {
      Position p = detail::parse_position(node);
      for (const auto& [id, loc] : seen)
        if (id == p.id)
          fail(ErrorKind::DuplicatePositionId,
               detail::where(node) + ": duplicate position id '" + p.id + "' (first defined at " + loc + ")");
      seen.emplace_back(p.id, detail::where(node));
      if (!p.eur_denominated) {
        if (currency.empty()) currency = p.pricer.currency();
        if (p.pricer.currency() != currency)
          fail(ErrorKind::ParseError, detail::where(node) + ": position '" + p.id + "' is in " +
                                          p.pricer.currency() + " but the market data carries one FX rate (" +
                                          currency + ")");
      }
      portfolio.positions.push_back(std::move(p));
    }
    if (YAML::Node lines = root["lines"]; lines && !lines.IsNull()) {
      if (!lines.IsSequence()) fail(ErrorKind::ParseError, detail::where(lines) + ": lines must be a list");
      for (const auto& l : lines) {
        YAML::Node name = detail::required(l, "line");
        PassThroughLine item;
        try {
          item.line = parse_line(detail::scalar<std::string>(name, "line"));
        } catch (const Error&) {
          fail(ErrorKind::ParseError, detail::where(name) + ": unknown line '" + name.Scalar() + "'");
        }
        item.amount_eur = detail::get<double>(l, "amount_eur");
        portfolio.pass_through.push_back(item);
      }
    }
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::ParseError, "portfolio line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  portfolio.validate();
  return portfolio;
}

inline Portfolio load_portfolio(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open portfolio file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_portfolio(buf.str());
}

inline std::vector<MarketSnapshot> load_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open market data file '" + path + "'");
  return load_market_snapshots(in);
}

}  // namespace pnlattr
