#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ccl/dist.hpp"
#include "ccl/rng.hpp"

namespace ccl {

class WeightSeq;
class NormSeq;
struct SeriesReport;

inline constexpr double kWilsonZ99 = 2.5758293035489004;
inline constexpr long kBatchSize = 4096;
inline constexpr long kMinReplicates = 1000;

/// Wilson score interval for hits/R.
std::pair<double, double> wilson_interval(long hits, long replicates, double z = kWilsonZ99);

struct Estimate {
  double p_hat = 0.0;
  long replicates = 0;
  long hits = 0;
  double lo = 0.0;
  double hi = 1.0;
  SeedStream stream;
};

/// P(|S_n| >= threshold) by plain Monte Carlo. Batches of kBatchSize draw
/// from stream.with_batch(b); counts merge in batch order. workers <= 0
/// leaves the OpenMP default.
Estimate estimate_tail(const Dist& d, long n, double threshold, long replicates, const SeedStream& stream,
                       int workers = 0);
/// Single-threaded reference; bit-identical to estimate_tail.
Estimate estimate_tail_serial(const Dist& d, long n, double threshold, long replicates,
                              const SeedStream& stream);

/// Exact law of S_n for lattice distributions.
class WalkOracle {
 public:
  static constexpr std::size_t kMaxSupport = 1'000'000;
  static constexpr long kMaxSteps = 4096;

  /// Throws std::invalid_argument when d has no lattice representation,
  /// n is out of range or the support would exceed kMaxSupport.
  WalkOracle(const Dist& d, long n, bool parallel = true, int workers = 0);

  long n() const { return n_; }
  double step() const { return step_; }
  /// Lattice index of table()[0].
  long offset() const { return offset_; }
  /// P(S_n = (offset + i) * step).
  const std::vector<double>& table() const { return table_; }
  double total_mass() const;

 private:
  long n_ = 0;
  double step_ = 1.0;
  long offset_ = 0;
  std::vector<double> table_;
};

/// P(|S_n| >= threshold) from the table.
double exact_tail(const WalkOracle& oracle, double threshold);
/// P(max_{k<=n} |S_k| >= threshold) by the absorbing-threshold DP; n <= 64.
double exact_max_tail(const Dist& d, long n, double threshold);

struct MedianEstimate {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long replicates = 0;
};

/// Sample median of S_n with a distribution-free 99% order-statistic
/// interval.
MedianEstimate median_of_Sn(const Dist& d, long n, long replicates, const SeedStream& stream, int workers = 0);

struct MedianRow {
  long n = 0;
  MedianEstimate median;
  double threshold = 0.0;
  /// "below", "above" or "undetermined" (interval straddles eps * a_n).
  std::string verdict;
};

struct MedianCheck {
  std::vector<MedianRow> rows;
  /// sum of tau_n over grid points classified "above".
  double exceptional_weight = 0.0;
};

/// Per-n comparison of |median(S_n)| against eps * a_n.
MedianCheck check_median_condition(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps,
                                   const std::vector<long>& grid, long replicates, const SeedStream& stream,
                                   int workers = 0);

/// {2^lo, ..., 2^hi}.
std::vector<long> dyadic_grid(int lo, int hi);

/// Terms tau_n * p_hat_n over a grid. Grid point n_j stands for the block
/// (n_{j-1}, n_j] and enters the partial sum with weight n_j - n_{j-1}.
/// Verdict is always Undetermined.
SeriesReport empirical_series(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps,
                              const std::vector<long>& grid, long replicates, const SeedStream& stream,
                              int workers = 0);

/// Exact series of tau_n * P(max_{k<=n}|S_k| >= eps a_n) over a grid of n <= 64.
SeriesReport exact_max_series(const Dist& d, const WeightSeq& w, const NormSeq& a, double eps,
                              const std::vector<long>& grid);

/// Mean of |S_n| / (n ln n)^(1/2) over independent paths, at each grid point.
std::vector<double> normalized_sum_trace(const Dist& d, const std::vector<long>& grid, long paths,
                                         const SeedStream& stream);

}  // namespace ccl
