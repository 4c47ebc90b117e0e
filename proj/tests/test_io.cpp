#include <gtest/gtest.h>

#include <sstream>

#include "tou/io.hpp"

using namespace tou;

namespace {

RateParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_rate_series(in);
}

}  // namespace

TEST(ParseRateSeries, TwoRows) {
  const RateParseResult r = parse("date,value\n2000-01-03,5.27\n2000-01-04,5.29\n");
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_EQ(r.series.dates[1], "2000-01-04");
  EXPECT_DOUBLE_EQ(r.series.values[0], 5.27);
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_DOUBLE_EQ(r.series.dt_months, 0.046);
}

TEST(ParseRateSeries, MissingValueDropped) {
  const RateParseResult r = parse("date,value\r\n2000-01-03,5.27\r\n2000-01-04,null\r\n2000-01-05,5.3\r\n");
  EXPECT_EQ(r.series.size(), 2u);
  EXPECT_EQ(r.dropped, 1u);
}

TEST(ParseRateSeries, OutOfOrderDatesNameTheLine) {
  try {
    parse("date,value\n2000-01-03,5.27\n2000-01-05,5.3\n2000-01-04,5.29\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseRateSeries, MalformedRows) {
  EXPECT_THROW(parse("date,value\n2000-01-03,abc\n"), ParseError);
  EXPECT_THROW(parse("date,value\n03/01/2000,5\n"), ParseError);
  EXPECT_THROW(parse("date,value\n2000-01-03,5,6\n"), ParseError);
  EXPECT_THROW(parse("day,rate\n2000-01-03,5\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(RateSeries, TailAndTrajectory) {
  RateSeries s = parse("date,value\n2000-01-03,1\n2000-01-04,2\n2000-01-05,3\n").series;
  const RateSeries t = s.tail(2);
  EXPECT_EQ(t.values, (std::vector<double>{2, 3}));
  const Trajectory traj = t.to_trajectory();
  EXPECT_DOUBLE_EQ(traj.dt, 0.046);
  EXPECT_EQ(s.tail(10).size(), 3u);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  SimSpec spec;
  spec.params = reference_params();
  spec.horizon = 3.0;
  spec.steps = 300;
  spec.init = Deterministic{kReferenceX0};
  const auto paths = simulate_batch(spec, 3, 8, 1);
  std::stringstream buf;
  write_trajectories_csv(buf, paths);
  const auto back = read_trajectories_csv(buf);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].values, paths[i].values);
    EXPECT_NEAR(back[i].dt, paths[i].dt, 1e-15);
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(FitJson, RoundTripRescoresLoglik) {
  SimSpec spec;
  spec.params = reference_params();
  spec.horizon = 50.0;
  spec.steps = 50000;
  spec.init = Stationary{};
  RngStream g(21, 0);
  const FitResult fit = threshold_search(simulate(spec, g), ThresholdGrid{0.15, 40}, Method::MLE);
  const nlohmann::json j = nlohmann::json::parse(to_json(fit).dump());
  EXPECT_EQ(j.at("schema"), kFitSchema);
  const FitResult back = fit_from_json(j);
  const double rescored = log_likelihood(back.stats, back.estimate.params(), back.sigma_hat);
  EXPECT_NEAR(rescored, back.loglik, 1e-9 * std::max(1.0, std::abs(back.loglik)));
  EXPECT_EQ(back.threshold(), fit.threshold());
  EXPECT_EQ(back.profile.size(), fit.profile.size());
}

TEST(FitJson, MeanReversionLevelNullWhenNoReversion) {
  EXPECT_TRUE(mean_reversion_level(0.0, 1.0).is_null());
  EXPECT_DOUBLE_EQ(mean_reversion_level(0.1, 0.003).get<double>(), 0.03);
}

TEST(ParamsJson, RoundTrip) {
  const ModelParams p = reference_params();
  const ModelParams q = params_from_json(to_json(p));
  EXPECT_EQ(q.r, p.r);
  EXPECT_EQ(q.sigma_minus, p.sigma_minus);
  EXPECT_EQ(q.b_plus, p.b_plus);
}
