#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pnlattr/market_data.hpp"
#include "support/oracles.hpp"

using namespace pnlattr;

namespace {

const Date kAnchor = make_date(2022, 1, 1);

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(zero_curve, single_node_is_flat_everywhere) {
  auto curve = build_zero_curve(kAnchor, {{1.0, 0.02}});
  for (double tau : {0.0, 0.1, 1.0, 7.5, 40.0}) EXPECT_EQ(curve.zero_rate(tau), 0.02);
}

TEST(zero_curve, linear_interpolation_between_nodes) {
  auto curve = build_zero_curve(kAnchor, {{1.0, 0.01}, {3.0, 0.03}});
  EXPECT_NEAR(curve.zero_rate(2.0), 0.02, 1e-15);
  EXPECT_EQ(curve.zero_rate(0.5), 0.01);
  EXPECT_EQ(curve.zero_rate(10.0), 0.03);
}

TEST(zero_curve, rejects_bad_nodes) {
  EXPECT_EQ(kind_of([] { build_zero_curve(kAnchor, {{2.0, 0.01}, {1.0, 0.02}}); }), ErrorKind::NonMonotoneTenors);
  EXPECT_EQ(kind_of([] { build_zero_curve(kAnchor, {{1.0, 0.01}, {1.0, 0.02}}); }), ErrorKind::NonMonotoneTenors);
  EXPECT_EQ(kind_of([] { build_zero_curve(kAnchor, {{-1.0, 0.01}}); }), ErrorKind::NonMonotoneTenors);
  EXPECT_EQ(kind_of([] { build_zero_curve(kAnchor, {}); }), ErrorKind::EmptyNodes);
}

TEST(discount_factor, closed_forms) {
  auto flat = flat_curve(kAnchor, 0.02);
  EXPECT_EQ(discount_factor(flat, 0.0), 1.0);
  EXPECT_NEAR(discount_factor(flat, 5.0), 0.9048374180359595, 1e-15);
  EXPECT_EQ(kind_of([&] { discount_factor(flat, -1.0); }), ErrorKind::NegativeTenor);
}

TEST(discount_factor, reproduces_nodes_and_is_monotone_for_upward_nonnegative_curves) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    auto curve = support::random_curve(rng, kAnchor);
    for (const auto& n : curve.nodes()) {
      const double expected = std::exp(-n.zero_rate * n.tenor);
      EXPECT_LE(std::abs(curve.discount_factor(n.tenor) - expected), 1e-14 * expected);
    }
    bool upward = curve.nodes().front().zero_rate >= 0.0;
    for (std::size_t i = 1; i < curve.nodes().size(); ++i)
      upward = upward && curve.nodes()[i].zero_rate >= curve.nodes()[i - 1].zero_rate;
    if (!upward) continue;
    double prev = 1.0;
    for (double tau = 0.0; tau <= 40.0; tau += 0.05) {
      double df = curve.discount_factor(tau);
      EXPECT_GT(df, 0.0);
      EXPECT_LE(df, prev + 1e-15) << "tau " << tau;
      prev = df;
    }
  }
}

// Nonnegative zero rates alone do not make discounting monotone: a steeply
// falling curve implies negative forwards.
TEST(discount_factor, inverted_nonnegative_curve_can_rise) {
  ZeroCurve inverted(kAnchor, {{1.0, 0.05}, {2.0, 0.0}});
  EXPECT_GT(inverted.discount_factor(2.0), inverted.discount_factor(1.0));
}

TEST(market_csv, loads_well_formed_rows) {
  std::istringstream in(
      "date,fx,hazard,recovery,basis,curve_tenors,curve_rates\n"
      "2021-12-31,0.88,0.02,0.4,-0.005,1;5;10,0.001;0.012;0.015\n"
      "2022-04-01,0.90,0.025,0.4,-0.004,1;5;10,0.004;0.02;0.022\n");
  auto snaps = load_market_snapshots(in);
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_EQ(snaps[0].as_of, make_date(2021, 12, 31));
  EXPECT_EQ(snaps[1].as_of, make_date(2022, 4, 1));
  EXPECT_EQ(snaps[1].fx.rate(), 0.90);
  EXPECT_EQ(snaps[0].factors.basis_spread, -0.005);
  EXPECT_EQ(snaps[0].curve.nodes().size(), 3u);
  EXPECT_EQ(snaps[0].curve.anchor_date(), snaps[0].as_of);
}

TEST(market_csv, duplicate_date_is_named) {
  std::istringstream in(
      "date,fx,hazard,recovery,basis,curve_tenors,curve_rates\n"
      "2022-01-03,0.88,0.02,0.4,0,1,0.01\n"
      "2022-01-03,0.89,0.02,0.4,0,1,0.01\n");
  try {
    load_market_snapshots(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateDate);
    EXPECT_NE(std::string(e.what()).find("2022-01-03"), std::string::npos);
  }
}

TEST(market_csv, zero_fx_is_a_parse_error_naming_the_row) {
  std::istringstream in(
      "date,fx,hazard,recovery,basis,curve_tenors,curve_rates\n"
      "2022-01-03,0,0.02,0.4,0,1,0.01\n");
  try {
    load_market_snapshots(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(market_csv, structural_errors) {
  auto load = [](std::string text) {
    std::istringstream in(text);
    return load_market_snapshots(in);
  };
  const std::string header = "date,fx,hazard,recovery,basis,curve_tenors,curve_rates\n";
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,0.9,0.02,0.4,0,1\n"); }), ErrorKind::MissingField);
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,0.9,,0.4,0,1,0.01\n"); }), ErrorKind::MissingField);
  EXPECT_EQ(kind_of([&] { load(header + "2022-13-03,0.9,0.02,0.4,0,1,0.01\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,abc,0.02,0.4,0,1,0.01\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,0.9,0.02,1.0,0,1,0.01\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,0.9,0.02,0.4,0,1;2,0.01\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load(header + "2022-01-03,0.9,0.02,0.4,0,2;1,0.01;0.02\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load("date,fx\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { load(""); }), ErrorKind::MissingField);
}

TEST(market_csv, round_trip_is_exact) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    std::vector<MarketSnapshot> snaps;
    Date d = make_date(2020, 1, 1);
    for (int i = 0; i < 5; ++i) {
      d = add_days(d, 1 + static_cast<int>(rng() % 40));
      snaps.push_back(support::random_snapshot(rng, d));
    }
    std::stringstream buf;
    write_market_snapshots(buf, snaps);
    auto back = load_market_snapshots(buf);
    ASSERT_EQ(back.size(), snaps.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) EXPECT_TRUE(back[i] == snaps[i]);
  }
}

TEST(dates, act365_and_month_arithmetic) {
  EXPECT_EQ(year_fraction(make_date(2021, 1, 1), make_date(2022, 1, 1)), 1.0);
  EXPECT_EQ(year_fraction(make_date(2020, 1, 1), make_date(2021, 1, 1)), 366.0 / 365.0);
  EXPECT_EQ(add_months(make_date(2022, 1, 31), 1), make_date(2022, 2, 28));
  EXPECT_EQ(add_months(make_date(2022, 6, 15), -6), make_date(2021, 12, 15));
  EXPECT_EQ(format_date(parse_date("2021-05-21")), "2021-05-21");
  EXPECT_THROW(parse_date("2021-5-21"), Error);
}
