#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iostack/analysis.hpp"
#include "iostack/device.hpp"
#include "iostack/objdrive.hpp"
#include "iostack/os_stack.hpp"
#include "iostack/trace.hpp"
#include "iostack/workload.hpp"

namespace iostack {

/// Raw block access: chunks map to sequential regions with no vfs/fs
/// cost, split into fixed-size submissions.
struct RawProfile {
  std::uint64_t io_bytes = 256 * 1024;
};

struct StackProfile {
  enum class Kind : std::uint8_t { raw_block, os_fs, object_drive };

  Kind kind = Kind::os_fs;
  RawProfile raw;
  FsProfile fs;
  DriveProfile drive;

  static StackProfile raw_block(RawProfile p = {});
  static StackProfile os_fs(FsProfile p);
  static StackProfile object_drive(DriveProfile p);
  std::string name() const;
};

/// Node-level simulation knobs shared by every run.
struct SimConfig {
  std::uint64_t device_capacity_sectors = 16ull * 1024 * 1024;  // 8 GiB
  CostModel costs;
  std::size_t dcache_entries = 512;
  std::size_t pcache_pages = 16384;  // 64 MiB
  double dirty_ratio_threshold = 0.5;
  bool cold_caches_after_load = true;
};

struct CacheCounters {
  std::uint64_t dcache_hits = 0, dcache_misses = 0;
  std::uint64_t pcache_hits = 0, pcache_misses = 0, pcache_evictions = 0;
};

struct RunResult {
  Trace trace;
  // Sum of per-event end-to-end latencies; the per-tag decomposition
  // below sums back to this.
  double total_time_us = 0.0;
  // Wall-clock span of the device timeline (first submit to last
  // service completion) and raw device busy time.
  double wall_time_us = 0.0;
  double device_busy_us = 0.0;
  double per_tag_latency_us[3] = {0, 0, 0};  // indexed by IoTag
  std::uint64_t per_tag_bytes[3] = {0, 0, 0};
  std::uint64_t per_tag_count[3] = {0, 0, 0};
  ChainStats chains_od;
  ChainStats chains_all;
  LayerBreakdown layers;
  CacheCounters caches;
  OsStackCounters os_counters;
  std::map<std::string, std::string> meta;

  double throughput_mbps() const {
    std::uint64_t bytes =
        per_tag_bytes[0] + per_tag_bytes[1] + per_tag_bytes[2];
    return wall_time_us > 0 ? double(bytes) / wall_time_us : 0.0;
  }
};

struct ComparisonReport {
  double os_total_us = 0.0;
  double od_total_us = 0.0;
  double savings_fraction = 0.0;
  double per_tag_delta_us[3] = {0, 0, 0};
  // Fig-6 style stacked shares: per-workload normalization (each stack
  // against its own total) and global normalization (both against the
  // OS total).
  double os_share_own[3] = {0, 0, 0}, od_share_own[3] = {0, 0, 0};
  double os_share_global[3] = {0, 0, 0}, od_share_global[3] = {0, 0, 0};
  std::map<std::string, std::string> meta;
};

/// Orders events through the device: HDD as a single FIFO server with
/// head tracking, SSD as a queue-depth-sensitive pipeline. Fills device
/// latency, adds modeled queue wait to the block layer, and stamps
/// completion times.
Trace replay(const Trace& trace, const DeviceProfile& device,
             const CostModel& costs);

RunResult run(const WorkloadSpec& workload, const ClusterSpec& cluster,
              const StackProfile& stack, const DeviceProfile& device,
              std::uint32_t osd_index, const SimConfig& cfg);

ComparisonReport compare(const RunResult& os_result,
                         const RunResult& od_result);

/// Sequential-write microbenchmark for the device-utilization study:
/// every thread streams its own region/file in request_bytes calls.
RunResult duic_run(StackProfile::Kind kind, std::uint64_t request_bytes,
                   std::uint32_t threads, std::uint64_t bytes_per_thread,
                   const DeviceProfile& device, const SimConfig& cfg);

}  // namespace iostack
