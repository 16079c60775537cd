#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "iostack/trace.hpp"

namespace iostack {

/// Erasure-coded cluster layout: D data shards, P parity shards spread
/// across D_i object-storage devices.
struct ClusterSpec {
  std::uint32_t data_shards = 12;
  std::uint32_t parity_shards = 4;
  std::uint32_t num_osds = 16;
  std::uint32_t num_nodes = 4;

  void validate() const;
};

enum class WorkloadKind : std::uint8_t { w_o, r_o, r_w, enumerate };

enum class KeyDist : std::uint8_t { uniform, zipfian };

const char* to_string(WorkloadKind k);
WorkloadKind workload_kind_from_string(const std::string& s);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::w_o;
  std::uint32_t put_pct = 95;
  std::uint32_t get_pct = 5;
  std::uint64_t object_size = 128ull * 1024 * 1024;
  std::uint64_t object_count = 1000;
  KeyDist key_distribution = KeyDist::uniform;
  double zipf_theta = 0.99;
  std::uint32_t thread_count = 1;
  std::uint64_t seed = 1;
  double think_time_us = 0.0;

  void validate() const;
  /// Applies the Table-1 PUT:GET ratio and default key distribution for
  /// the named workload kinds.
  void apply_kind_defaults();
};

enum class OpKind : std::uint8_t { put, get, list };

const char* to_string(OpKind k);

struct ObjectOp {
  double ts_us = 0.0;
  OpKind kind = OpKind::put;
  std::string key;
  std::uint64_t size = 0;  // bytes; 0 for LIST
  std::uint32_t thread_id = 0;
};

/// A per-OSD slice of an object operation after erasure-code sharding.
struct ChunkRequest {
  double ts_us = 0.0;
  OpKind kind = OpKind::put;
  std::string key;
  std::uint64_t bytes = 0;  // chunk size; 0 for LIST
  std::uint32_t thread_id = 0;
};

/// Ideal contiguous bytes per OSD for one object:
/// O * (D + P) / (D * D_i), exact rational.
double chunk_object_exact(std::uint64_t object_bytes,
                          const ClusterSpec& cluster);

/// Same, rounded up to the next 4 KiB multiple. This is the extent a
/// perfectly unfragmented filesystem would allocate per object chunk.
std::uint64_t chunk_object(std::uint64_t object_bytes,
                           const ClusterSpec& cluster);

/// Rank draw follows frequency(r) proportional to 1/r^theta via the
/// exact inverted CDF.
class ZipfianPicker {
 public:
  ZipfianPicker(std::uint64_t n, double theta);
  std::uint64_t pick(std::mt19937_64& rng) const;  // 0-based rank

 private:
  std::vector<double> cdf_;
};

std::string object_key(std::uint64_t index);

/// Deterministic for equal (spec, cluster): op kinds per ratio, keys
/// per distribution, round-robin thread interleave. In W-O streams GET
/// keys are drawn from already-written keys so replays never observe a
/// missing object.
std::vector<ObjectOp> generate_workload(const WorkloadSpec& spec,
                                        const ClusterSpec& cluster);

std::optional<ChunkRequest> shard_to_osd(const ObjectOp& op,
                                         const ClusterSpec& cluster,
                                         std::uint32_t osd_index);

std::string format_ops(const std::vector<ObjectOp>& ops);

}  // namespace iostack
