#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "iostack/os_stack.hpp"
#include "iostack/trace.hpp"
#include "iostack/workload.hpp"

namespace iostack {

/// Key-value drive parameters. Commands bypass the kernel block layer:
/// the thin host library and the in-device index are the only costs on
/// top of the media itself.
struct DriveProfile {
  std::uint64_t value_cap_bytes = 2ull * 1024 * 1024;
  std::uint32_t hash_levels = 2;
  double kv_lib_cost_us = 3.0;
  double indevice_index_cost_us = 4.0;
  std::uint32_t iterator_batch = 256;
  std::uint32_t iterator_entry_bytes = 64;
  std::uint32_t om_pair_bytes = 4096;
  std::uint32_t oid_bucket_count = 1024;
  std::uint32_t oids_per_bucket = 64;
  std::uint64_t index_region_bytes = 32ull * 1024 * 1024;
  std::uint64_t nts_bytes = kDefaultNtsBytes;

  void validate() const;
};

/// Key -> OID translation plus the in-device placement map. OIDs are
/// assigned monotonically at first PUT; the OID prefix selects an
/// allocation bucket, collisions spill into the following buckets.
class OidMap {
 public:
  OidMap(const DriveProfile& drive, std::uint64_t capacity_sectors);

  struct Object {
    std::uint64_t oid = 0;
    std::uint64_t bytes = 0;
    std::vector<Extent> runs;        // data placement, command-granular
    std::uint64_t om_lba = 0;        // index-region slot for metadata
  };

  bool contains(const std::string& key) const;
  Object& get_or_create(const std::string& key, std::uint64_t bytes);
  const Object* find(const std::string& key) const;
  std::size_t object_count() const { return objects_.size(); }
  std::uint64_t index_region_start() const { return index_start_; }
  std::uint64_t capacity_sectors() const { return capacity_; }

  /// First-fit starting at the OID's bucket origin, preferring runs at
  /// least NTS long; scans forward across neighbour buckets.
  std::vector<Extent> allocate(std::uint64_t oid, std::uint64_t bytes);

  void check_invariants() const;

 private:
  DriveProfile drive_;
  std::uint64_t capacity_ = 0;
  std::uint64_t data_start_ = 0, data_end_ = 0;
  std::uint64_t index_start_ = 0, index_cursor_ = 0;
  std::map<std::uint64_t, std::uint64_t> free_;  // lba -> len
  std::unordered_map<std::string, Object> objects_;
  std::uint64_t next_oid_ = 0;
};

struct OdCounters {
  std::uint64_t commands = 0;
  std::uint64_t iterator_commands = 0;
};

/// Translates chunk requests through the object-drive path: OID lookup,
/// value-cap splitting, in-device iterators for enumeration. Emits no
/// filesystem-metadata events, ever.
Trace translate_od(const std::vector<ChunkRequest>& requests,
                   const DriveProfile& drive, OidMap& oid,
                   OdCounters* counters_out = nullptr);

}  // namespace iostack
