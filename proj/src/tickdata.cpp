#include "mrc/tickdata.hpp"

#include "mrc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace mrc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError(line, std::string("invalid ") + what + " '" + s + "'");
  return v;
}

void append_tick(TickSeries& ts, double t, double v, std::size_t line) {
  if (!ts.times.empty()) {
    if (t == ts.times.back())
      throw ParseError(line, "duplicate timestamp for asset '" + ts.asset_id + "'");
    if (t < ts.times.back())
      throw ParseError(line, "non-monotone timestamp for asset '" + ts.asset_id + "'");
  }
  ts.times.push_back(t);
  ts.values.push_back(v);
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

void TickSeries::validate() const {
  if (times.size() != values.size())
    throw InvalidParameters("series '" + asset_id + "': times/values length mismatch");
  if (times.size() < 2)
    throw InsufficientData("series '" + asset_id + "' has fewer than 2 ticks");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw InvalidParameters("series '" + asset_id + "': times not strictly increasing");
}

std::vector<TickSeries> parse_ticks(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<TickSeries> out;
  std::map<std::string, std::size_t> slot;

  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    if (!header) {
      header = true;
      const auto cols = split_csv(line);
      if (cols.size() != 3 || cols[0] != "asset" || cols[1] != "timestamp" ||
          cols[2] != "price")
        throw ParseError(lineno, "expected header 'asset,timestamp,price'");
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() != 3) throw ParseError(lineno, "expected 3 fields");
    if (cols[0].empty()) throw ParseError(lineno, "empty asset id");
    const double t = parse_number(cols[1], lineno, "timestamp");
    const double v = parse_number(cols[2], lineno, "price");
    auto [it, fresh] = slot.try_emplace(cols[0], out.size());
    if (fresh) out.push_back(TickSeries{cols[0], {}, {}});
    append_tick(out[it->second], t, v, lineno);
  }
  if (!header) throw ParseError(lineno, "missing header");
  return out;
}

TickSeries parse_asset_ticks(std::istream& in, std::string asset_id) {
  if (asset_id.empty()) throw ParseError(0, "empty asset id");
  TickSeries ts{std::move(asset_id), {}, {}};
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto cols = split_csv(line);
    if (!header) {
      header = true;
      if (cols.size() != 2 || cols[0] != "timestamp" || cols[1] != "price")
        throw ParseError(lineno, "expected header 'timestamp,price'");
      continue;
    }
    if (cols.size() != 2) throw ParseError(lineno, "expected 2 fields");
    append_tick(ts, parse_number(cols[0], lineno, "timestamp"),
                parse_number(cols[1], lineno, "price"), lineno);
  }
  if (!header) throw ParseError(lineno, "missing header");
  return ts;
}

SyncGrid::SyncGrid(std::vector<double> refresh_times,
                   std::vector<std::vector<double>> tau,
                   std::vector<std::vector<double>> values,
                   std::vector<std::vector<std::size_t>> tick_index)
    : refresh_(std::move(refresh_times)),
      tau_(std::move(tau)),
      values_(std::move(values)),
      tick_index_(std::move(tick_index)) {
  if (refresh_.empty() || tau_.empty())
    throw InsufficientData("empty synchronized grid");
  for (std::size_t k = 0; k < tau_.size(); ++k)
    if (tau_[k].size() != refresh_.size() || values_[k].size() != refresh_.size() ||
        tick_index_[k].size() != refresh_.size())
      throw InvalidParameters("grid: per-asset sequences must match refresh times");
  check_ordering();
}

void SyncGrid::check_ordering() const {
  for (std::size_t k = 0; k < tau_.size(); ++k) {
    if (!(tau_[k][0] <= refresh_[0]))
      throw InvalidParameters("grid: tau_0 exceeds T_0");
    for (std::size_t p = 1; p < refresh_.size(); ++p)
      if (!(refresh_[p - 1] < tau_[k][p] && tau_[k][p] <= refresh_[p]))
        throw InvalidParameters("grid: ordering T_{p-1} < tau_p <= T_p violated at p=" +
                                std::to_string(p));
  }
}

std::vector<double> SyncGrid::increments(std::size_t k) const {
  const auto& v = values_.at(k);
  std::vector<double> d(v.size() - 1);
  for (std::size_t p = 1; p < v.size(); ++p) d[p - 1] = v[p] - v[p - 1];
  return d;
}

SyncGrid refresh_times(const std::vector<TickSeries>& series) {
  if (series.empty()) throw InsufficientData("no series to synchronize");
  for (const auto& s : series) s.validate();
  const std::size_t d = series.size();

  std::vector<double> T;
  std::vector<std::vector<double>> tau(d), vals(d);
  std::vector<std::vector<std::size_t>> idx(d);
  std::vector<std::size_t> next(d, 0);  // first tick index not yet used

  double t0 = series[0].times[0];
  for (const auto& s : series) t0 = std::max(t0, s.times[0]);
  T.push_back(t0);
  for (std::size_t k = 0; k < d; ++k) {
    tau[k].push_back(series[k].times[0]);
    vals[k].push_back(series[k].values[0]);
    idx[k].push_back(0);
  }

  for (;;) {
    const double prev = T.back();
    double tp = prev;
    bool exhausted = false;
    for (std::size_t k = 0; k < d; ++k) {
      const auto& ts = series[k].times;
      auto& i = next[k];
      while (i < ts.size() && ts[i] <= prev) ++i;
      if (i == ts.size()) {
        exhausted = true;
        break;
      }
      tp = std::max(tp, ts[i]);
    }
    if (exhausted) break;
    T.push_back(tp);
    for (std::size_t k = 0; k < d; ++k) {
      tau[k].push_back(series[k].times[next[k]]);
      vals[k].push_back(series[k].values[next[k]]);
      idx[k].push_back(next[k]);
    }
  }
  return SyncGrid(std::move(T), std::move(tau), std::move(vals), std::move(idx));
}

Eigen::MatrixXd overlap_stats(const SyncGrid& grid) {
  const auto d = static_cast<Eigen::Index>(grid.dim());
  const std::size_t P = grid.points();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = k + 1; l < d; ++l) {
      std::size_t hits = 0;
      for (std::size_t p = 0; p < P; ++p)
        hits += grid.overlap(p, static_cast<std::size_t>(k), static_cast<std::size_t>(l));
      m(k, l) = m(l, k) = static_cast<double>(hits) / static_cast<double>(P);
    }
  return m;
}

}  // namespace mrc
