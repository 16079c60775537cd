#include "iostack/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace iostack {

ChainStats detect_chains(const Trace& trace, TraceFilter filter) {
  ChainStats stats;
  stats.nts_bytes = trace.nts_bytes();

  std::uint64_t run_bytes = 0;
  std::uint64_t prev_end = 0;
  bool in_run = false;
  auto close = [&] {
    if (in_run) stats.chains.push_back(run_bytes);
    run_bytes = 0;
    in_run = false;
  };
  for (const IoEvent& e : trace.events) {
    if (!filter.matches(e)) continue;
    if (in_run && e.lba == prev_end) {
      run_bytes += e.bytes();
    } else {
      close();
      in_run = true;
      run_bytes = e.bytes();
    }
    prev_end = e.end_lba();
    stats.total_bytes += e.bytes();
  }
  close();

  if (!stats.chains.empty()) {
    std::uint64_t ge_count = 0, ge_bytes = 0;
    for (std::uint64_t c : stats.chains) {
      if (c >= stats.nts_bytes) {
        ++ge_count;
        ge_bytes += c;
      }
    }
    stats.count_ge_nts_fraction = double(ge_count) / double(stats.chains.size());
    stats.byte_ge_nts_fraction =
        stats.total_bytes > 0 ? double(ge_bytes) / double(stats.total_bytes) : 0.0;
  }
  return stats;
}

SizeCdf compute_cdf(const Trace& trace, TraceFilter filter) {
  std::vector<std::uint64_t> sizes;
  for (const IoEvent& e : trace.events)
    if (filter.matches(e)) sizes.push_back(e.bytes());
  if (sizes.empty()) throw error("compute_cdf: no events after filtering");
  std::sort(sizes.begin(), sizes.end());

  SizeCdf cdf;
  std::size_t n = sizes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n || sizes[i + 1] != sizes[i])
      cdf.points.emplace_back(sizes[i], double(i + 1) / double(n));
  }
  return cdf;
}

Heatmap build_heatmap(const Trace& trace, std::uint32_t time_bins,
                      std::uint32_t lba_bins) {
  if (time_bins == 0 || lba_bins == 0)
    throw error("build_heatmap: bins must be >= 1");
  Heatmap hm;
  hm.time_bins = time_bins;
  hm.lba_bins = lba_bins;
  hm.counts.assign(std::size_t(time_bins) * lba_bins, 0);

  double max_ts = 0.0;
  for (const IoEvent& e : trace.events)
    max_ts = std::max(max_ts, e.submit_ts_us);
  std::uint64_t cap = trace.device_capacity_sectors;
  if (cap == 0)
    for (const IoEvent& e : trace.events) cap = std::max(cap, e.end_lba());

  hm.time_bin_width_us = max_ts > 0 ? max_ts / time_bins : 1.0;
  hm.lba_bin_width_sectors = cap > 0 ? double(cap) / lba_bins : 1.0;

  for (const IoEvent& e : trace.events) {
    auto t = std::min<std::uint32_t>(
        time_bins - 1,
        std::uint32_t(e.submit_ts_us / hm.time_bin_width_us));
    auto l = std::min<std::uint32_t>(
        lba_bins - 1, std::uint32_t(double(e.lba) / hm.lba_bin_width_sectors));
    ++hm.counts[std::size_t(t) * lba_bins + l];
  }
  return hm;
}

LayerBreakdown layer_breakdown(const Trace& trace) {
  bool replayed = false;
  LayerBreakdown bd;
  for (const IoEvent& e : trace.events) {
    bd.totals_us[0] += e.lat.vfs_us;
    bd.totals_us[1] += e.lat.fs_us;
    bd.totals_us[2] += e.lat.block_us;
    bd.totals_us[3] += e.lat.device_us;
    if (e.lat.device_us > 0 || e.complete_ts_us > 0) replayed = true;
  }
  if (!replayed)
    throw error("layer_breakdown: trace has no device latencies (not replayed)");
  double total =
      bd.totals_us[0] + bd.totals_us[1] + bd.totals_us[2] + bd.totals_us[3];
  if (total > 0)
    for (int i = 0; i < 4; ++i) bd.shares[i] = bd.totals_us[i] / total;
  return bd;
}

CoalesceStats coalesce_stats(std::uint64_t raw_count, const Trace& emitted) {
  CoalesceStats cs;
  if (emitted.events.empty()) return cs;
  if (raw_count < emitted.events.size())
    throw error("coalesce_stats: raw count below emitted event count");
  cs.mean_raw_per_bio = double(raw_count) / double(emitted.events.size());
  for (const IoEvent& e : emitted.events)
    cs.max_raw_per_bio = std::max(cs.max_raw_per_bio, e.merged_raw);
  return cs;
}

}  // namespace iostack
