#include "tou/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace tou {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool is_missing(std::string_view s) {
  const std::string l = lower(s);
  return l.empty() || l == "null" || l == "na" || l == "nan" || l == ".";
}

bool is_iso_date(std::string_view s) {
  if (s.size() < 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    const bool dash = i == 4 || i == 7;
    if (dash ? s[i] != '-' : !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

json side_json(const SideSums& s) {
  return {{"q", s.q}, {"m", s.m}, {"sumsq", s.sumsq}, {"count", s.count}};
}

SideSums side_from_json(const json& j) {
  SideSums s;
  s.q = j.at("q").get<std::array<double, 3>>();
  s.m = j.at("m").get<std::array<double, 2>>();
  s.sumsq = j.at("sumsq").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

}  // namespace

RateSeries RateSeries::tail(std::size_t n) const {
  if (n >= size()) return *this;
  RateSeries out;
  out.dt_months = dt_months;
  out.dates.assign(dates.end() - static_cast<std::ptrdiff_t>(n), dates.end());
  out.values.assign(values.end() - static_cast<std::ptrdiff_t>(n), values.end());
  return out;
}

Trajectory RateSeries::to_trajectory() const {
  Trajectory t;
  t.dt = dt_months;
  t.values = values;
  t.validate();
  return t;
}

RateParseResult parse_rate_series(std::istream& in) {
  RateParseResult result;
  std::string line;
  std::size_t line_no = 0;

  // Header, skipping leading blank lines and a UTF-8 byte order mark.
  for (;;) {
    if (!next_line(in, line)) throw ParseError(line_no, "missing header `date,value`");
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  const auto header = split(line, ',');
  if (header.size() != 2 || lower(header[0]) != "date" || lower(header[1]) != "value") {
    throw ParseError(line_no, "expected header `date,value`");
  }

  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields, found " + std::to_string(fields.size()));
    if (!is_iso_date(fields[0])) throw ParseError(line_no, "malformed date `" + std::string(fields[0]) + "`");
    if (is_missing(fields[1])) {
      ++result.dropped;
      continue;
    }
    double v = 0.0;
    if (!parse_double(fields[1], v)) throw ParseError(line_no, "malformed value `" + std::string(fields[1]) + "`");
    std::string date(fields[0]);
    if (!result.series.dates.empty() && !(result.series.dates.back() < date)) {
      throw ParseError(line_no, "date " + date + " does not follow " + result.series.dates.back());
    }
    result.series.dates.push_back(std::move(date));
    result.series.values.push_back(v);
  }
  return result;
}

RateParseResult load_rate_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_rate_series(in);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> paths, std::size_t first_path_id) {
  out << "t,path_id,x\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const Trajectory& traj = paths[p];
    const std::string id = std::to_string(first_path_id + p);
    for (std::size_t k = 0; k < traj.values.size(); ++k) {
      out << format_double(traj.t0 + static_cast<double>(k) * traj.dt) << ',' << id << ','
          << format_double(traj.values[k]) << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!next_line(in, line) || lower(trim(line)) != "t,path_id,x") {
    throw ParseError(line_no, "expected header `t,path_id,x`");
  }
  std::map<long long, std::pair<std::vector<double>, std::vector<double>>> by_id;
  std::vector<long long> order;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    double t = 0.0;
    double x = 0.0;
    long long id = 0;
    if (f.size() != 3 || !parse_double(f[0], t) || !parse_double(f[2], x)) {
      throw ParseError(line_no, "malformed trajectory row");
    }
    const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), id);
    if (ec != std::errc() || ptr != f[1].data() + f[1].size()) throw ParseError(line_no, "malformed path_id");
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.first.push_back(t);
    it->second.second.push_back(x);
  }

  std::vector<Trajectory> out;
  for (long long id : order) {
    auto& [times, xs] = by_id.at(id);
    if (xs.size() < 2) throw ParseError(line_no, "path " + std::to_string(id) + " has fewer than two rows");
    Trajectory traj;
    traj.t0 = times.front();
    traj.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double step = times[k] - times[k - 1];
      if (std::abs(step - traj.dt) > 1e-6 * std::abs(traj.dt)) {
        throw ParseError(0, "path " + std::to_string(id) + " is not uniformly sampled");
      }
    }
    traj.values = std::move(xs);
    traj.validate();
    out.push_back(std::move(traj));
  }
  return out;
}

json to_json(const ModelParams& p) {
  return {{"r", p.r},           {"a_plus", p.a_plus},         {"a_minus", p.a_minus},
          {"b_plus", p.b_plus}, {"b_minus", p.b_minus},       {"sigma_plus", p.sigma_plus},
          {"sigma_minus", p.sigma_minus}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.r = j.at("r").get<double>();
  p.a_plus = j.at("a_plus").get<double>();
  p.a_minus = j.at("a_minus").get<double>();
  p.b_plus = j.at("b_plus").get<double>();
  p.b_minus = j.at("b_minus").get<double>();
  p.sigma_plus = j.at("sigma_plus").get<double>();
  p.sigma_minus = j.at("sigma_minus").get<double>();
  p.validate();
  return p;
}

json to_json(const SufficientStats& s) {
  return {{"threshold", s.threshold},   {"horizon", s.horizon},     {"steps", s.steps},
          {"local_time", s.local_time}, {"crossings", s.crossings}, {"plus", side_json(s.plus)},
          {"minus", side_json(s.minus)}};
}

SufficientStats stats_from_json(const json& j) {
  SufficientStats s;
  s.threshold = j.at("threshold").get<double>();
  s.horizon = j.at("horizon").get<double>();
  s.steps = j.at("steps").get<std::size_t>();
  s.local_time = j.at("local_time").get<double>();
  s.crossings = j.at("crossings").get<std::size_t>();
  s.plus = side_from_json(j.at("plus"));
  s.minus = side_from_json(j.at("minus"));
  return s;
}

json mean_reversion_level(double a, double b) {
  if (std::abs(a) < 1e-12) return nullptr;
  return b / a;
}

json to_json(const FitResult& fit, bool include_profile) {
  const auto& e = fit.estimate;
  json j = {{"schema", kFitSchema},
            {"method", to_string(fit.method)},
            {"threshold", e.threshold_used},
            {"threshold_estimated", fit.threshold_estimated},
            {"a_plus", e.plus.a},
            {"b_plus", e.plus.b},
            {"a_minus", e.minus.a},
            {"b_minus", e.minus.b},
            {"level_plus", mean_reversion_level(e.plus.a, e.plus.b)},
            {"level_minus", mean_reversion_level(e.minus.a, e.minus.b)},
            {"sigma_plus", fit.sigma_hat.plus},
            {"sigma_minus", fit.sigma_hat.minus},
            {"loglik", fit.loglik},
            {"quasi_lik", fit.quasi_lik},
            {"det_plus", e.plus.det},
            {"det_minus", e.minus.det},
            {"stats", to_json(fit.stats)}};
  if (include_profile && !fit.profile.empty()) {
    json profile = json::array();
    for (const auto& pt : fit.profile) {
      profile.push_back({{"r", pt.r}, {"score", pt.valid ? json(pt.score) : json(nullptr)}});
    }
    j["profile"] = std::move(profile);
  }
  return j;
}

FitResult fit_from_json(const json& j) {
  if (j.at("schema").get<std::string>() != kFitSchema) throw std::runtime_error("unsupported fit schema");
  FitResult fit;
  const std::string method = j.at("method").get<std::string>();
  if (method == "MLE") {
    fit.method = Method::MLE;
  } else if (method == "QMLE") {
    fit.method = Method::QMLE;
  } else {
    throw std::runtime_error("unknown method " + method);
  }
  fit.estimate.threshold_used = j.at("threshold").get<double>();
  fit.threshold_estimated = j.at("threshold_estimated").get<bool>();
  fit.estimate.plus = {j.at("a_plus").get<double>(), j.at("b_plus").get<double>(), j.at("det_plus").get<double>(), true};
  fit.estimate.minus = {j.at("a_minus").get<double>(), j.at("b_minus").get<double>(),
                        j.at("det_minus").get<double>(), true};
  fit.sigma_hat = {j.at("sigma_plus").get<double>(), j.at("sigma_minus").get<double>()};
  fit.loglik = j.at("loglik").get<double>();
  fit.quasi_lik = j.at("quasi_lik").get<double>();
  fit.stats = stats_from_json(j.at("stats"));
  if (j.contains("profile")) {
    for (const auto& pt : j.at("profile")) {
      ProfilePoint p;
      p.r = pt.at("r").get<double>();
      p.valid = !pt.at("score").is_null();
      if (p.valid) p.score = pt.at("score").get<double>();
      fit.profile.push_back(p);
    }
  }
  return fit;
}

json to_json(const PlaneEllipse& e) {
  return {{"center", {e.center(0), e.center(1)}},
          {"covariance", {{e.covariance(0, 0), e.covariance(0, 1)}, {e.covariance(1, 0), e.covariance(1, 1)}}},
          {"semi_major", e.semi_major},
          {"semi_minor", e.semi_minor},
          {"angle", e.angle},
          {"crosses_diagonal", e.crosses_diagonal}};
}

json to_json(const TestResult& t) {
  const auto& v = t.nearest_null_point;
  return {{"schema", kTestSchema},
          {"p", t.p},
          {"q_p", t.q_p},
          {"min_mahalanobis", t.min_mahalanobis},
          {"reject", t.reject},
          {"nearest_null_point", {v(0), v(1), v(2), v(3)}},
          {"threshold_estimated", t.threshold_estimated},
          {"a_plane", to_json(t.a_plane)},
          {"b_plane", to_json(t.b_plane)}};
}

}  // namespace tou
