#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "iostack/trace.hpp"

namespace iostack {

/// Maximal runs of submission-order IOs with numerically consecutive
/// LBAs, in bytes.
struct ChainStats {
  std::vector<std::uint64_t> chains;
  std::uint64_t total_bytes = 0;
  std::uint64_t nts_bytes = kDefaultNtsBytes;
  double count_ge_nts_fraction = 0.0;
  double byte_ge_nts_fraction = 0.0;
};

struct SizeCdf {
  // (size_bytes, cumulative fraction), sizes strictly increasing,
  // final fraction 1.0.
  std::vector<std::pair<std::uint64_t, double>> points;
};

struct Heatmap {
  std::uint32_t time_bins = 0;
  std::uint32_t lba_bins = 0;
  double time_bin_width_us = 0.0;
  double lba_bin_width_sectors = 0.0;
  std::vector<std::uint64_t> counts;  // row-major [time][lba]

  std::uint64_t at(std::uint32_t t, std::uint32_t l) const {
    return counts[std::size_t(t) * lba_bins + l];
  }
};

struct LayerBreakdown {
  double totals_us[4] = {0, 0, 0, 0};  // vfs, fs, block, device
  double shares[4] = {0, 0, 0, 0};

  double kernel_share() const { return shares[0] + shares[1] + shares[2]; }
};

struct CoalesceStats {
  double mean_raw_per_bio = 1.0;
  std::uint32_t max_raw_per_bio = 1;
};

struct TraceFilter {
  std::optional<IoTag> tag;
  std::optional<IoOp> op;

  bool matches(const IoEvent& e) const {
    return (!tag || e.tag == *tag) && (!op || e.op == *op);
  }
};

ChainStats detect_chains(const Trace& trace, TraceFilter filter = {});

/// Empirical CDF over event byte sizes. Throws when the filter leaves
/// no events.
SizeCdf compute_cdf(const Trace& trace, TraceFilter filter = {});

Heatmap build_heatmap(const Trace& trace, std::uint32_t time_bins,
                      std::uint32_t lba_bins);

/// Requires a replayed trace (some event must carry device latency or a
/// completion time).
LayerBreakdown layer_breakdown(const Trace& trace);

CoalesceStats coalesce_stats(std::uint64_t raw_count, const Trace& emitted);

}  // namespace iostack
