#pragma once

// Tick ingestion and refresh-time synchronization.

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrc {

struct TickSeries {
  std::string asset_id;
  std::vector<double> times;   // strictly increasing
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws InvalidParameters unless times are strictly increasing, lengths
  /// agree and there are at least two ticks.
  void validate() const;
};

/// Long-format CSV `asset,timestamp,price` with a header row. Within an
/// asset, timestamps must be strictly increasing in file order; assets may
/// be interleaved. Series are returned in order of first appearance.
std::vector<TickSeries> parse_ticks(std::istream& in);

/// Per-asset CSV `timestamp,price` with a header row.
TickSeries parse_asset_ticks(std::istream& in, std::string asset_id);

/// Synchronized observations: refresh times T_p and, for every asset k, the
/// next-tick interpolated times tau^k_p with T_{p-1} < tau^k_p <= T_p.
class SyncGrid {
 public:
  SyncGrid(std::vector<double> refresh_times,
           std::vector<std::vector<double>> tau,
           std::vector<std::vector<double>> values,
           std::vector<std::vector<std::size_t>> tick_index);

  std::size_t dim() const noexcept { return tau_.size(); }
  /// Number of refresh intervals N (grid has N + 1 points).
  std::size_t intervals() const noexcept { return refresh_.size() - 1; }
  std::size_t points() const noexcept { return refresh_.size(); }

  const std::vector<double>& refresh_times() const noexcept { return refresh_; }
  const std::vector<double>& tau(std::size_t k) const { return tau_.at(k); }
  const std::vector<double>& values(std::size_t k) const { return values_.at(k); }
  /// Index of tau^k_p within asset k's original tick sequence.
  const std::vector<std::size_t>& tick_index(std::size_t k) const {
    return tick_index_.at(k);
  }

  /// 1{tau^k_p == tau^l_p}, exact floating-point equality.
  bool overlap(std::size_t p, std::size_t k, std::size_t l) const {
    return tau_[k][p] == tau_[l][p];
  }

  /// Y^k_{tau^k_p} - Y^k_{tau^k_{p-1}} for p = 1..N.
  std::vector<double> increments(std::size_t k) const;

  /// Throws InvalidParameters if the (H1) ordering fails anywhere.
  void check_ordering() const;

 private:
  std::vector<double> refresh_;
  std::vector<std::vector<double>> tau_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<std::size_t>> tick_index_;
};

/// T_0 = max_k t^k_0, T_p = max_k min{t^k_i > T_{p-1}}, tau^k_0 = t^k_0 and
/// tau^k_p = min{t^k_i > T_{p-1}}. Stops at the first p for which some asset
/// has no tick after T_{p-1}.
SyncGrid refresh_times(const std::vector<TickSeries>& series);

/// Fraction of grid points at which tau^k_p == tau^l_p, per asset pair.
Eigen::MatrixXd overlap_stats(const SyncGrid& grid);

}  // namespace mrc
