#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "iostack/trace.hpp"
#include "iostack/workload.hpp"

namespace iostack {

constexpr std::uint32_t kPageBytes = 4096;
constexpr std::uint32_t kPageSectors = kPageBytes / kSectorBytes;
constexpr std::uint64_t kMaxBioBytes = 256ull * 1024;

enum class FsKind : std::uint8_t { ag_extent, simple_extent };

/// Filesystem behaviour knobs. ag-extent models a band/allocation-group
/// filesystem with 16 KiB metadata nodes; simple-extent models a single
/// region layout with 4 KiB nodes and metadata interleaved with data.
struct FsProfile {
  FsKind kind = FsKind::ag_extent;
  std::uint32_t metadata_node_bytes = 16 * 1024;
  std::uint32_t allocation_groups = 4;
  std::uint64_t delayed_alloc_window = 4ull * 1024 * 1024;
  std::uint32_t journal_write_bytes = 16 * 1024;
  std::uint64_t extent_max_bytes = 64ull * 1024 * 1024;
  std::uint32_t inode_entry_bytes = 256;
  std::uint64_t metadata_band_bytes = 16ull * 1024 * 1024;
  std::uint64_t journal_region_bytes = 32ull * 1024 * 1024;
  bool fsync_per_put = false;

  static FsProfile ag_extent();
  static FsProfile simple_extent();
  void validate() const;
  std::uint32_t node_sectors() const { return metadata_node_bytes / kSectorBytes; }
  std::uint32_t inode_entries_per_node() const {
    return metadata_node_bytes / inode_entry_bytes;
  }
  const char* name() const {
    return kind == FsKind::ag_extent ? "ag-extent" : "simple-extent";
  }
};

/// Per-layer host cost constants, microseconds. Shipped in the config
/// file so calibration stays auditable.
struct CostModel {
  double lookup_hit_us = 1.0;     // vfs, dcache hit
  double lookup_miss_us = 12.0;   // vfs, dcache miss
  double syscall_us = 4.0;        // vfs, per read/write call
  double page_copy_us = 0.35;     // vfs, per 4 KiB page moved
  double alloc_touch_us = 2.0;    // fs, per allocation/extent-map touch
  double meta_update_us = 3.0;    // fs, per metadata commit
  double bio_us = 1.0;            // block, per BIO
  double queue_wait_us = 0.05;    // block, per outstanding BIO at replay
  std::uint32_t queue_depth = 128;
};

/// Pathname lookup cache, strict LRU.
class DcacheModel {
 public:
  explicit DcacheModel(std::size_t capacity_entries)
      : capacity_(capacity_entries) {}

  bool lookup(const std::string& key);  // counts hit/miss, promotes
  void insert(const std::string& key);
  void reset();

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const { return map_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::list<std::string> lru_;  // front = most recent
  std::unordered_map<std::string, std::list<std::string>::iterator> map_;
  std::uint64_t hits_ = 0, misses_ = 0;
};

/// 4 KiB page cache, strict LRU with clean/dirty state. Owner -1 holds
/// metadata node pages; owners >= 0 are file ids.
class PageCacheModel {
 public:
  using PageId = std::pair<std::int64_t, std::uint64_t>;

  PageCacheModel(std::size_t capacity_pages, double dirty_ratio_threshold)
      : capacity_(capacity_pages), dirty_threshold_(dirty_ratio_threshold) {}

  // True on hit. On miss the page is inserted in the given state and
  // the caller is responsible for the backing IO. Eviction is strict
  // LRU; dropping a dirty page is harmless here because durability is
  // tracked per file, not per page.
  bool access(std::int64_t owner, std::uint64_t page, bool dirty);
  bool contains(std::int64_t owner, std::uint64_t page) const;
  void mark_owner_clean(std::int64_t owner);
  bool over_dirty_threshold() const;
  void reset();

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t evictions() const { return evictions_; }
  std::size_t size() const { return map_.size(); }
  std::size_t dirty_pages() const { return dirty_count_; }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Entry {
    PageId id;
    bool dirty;
  };
  struct PageHash {
    std::size_t operator()(const PageId& p) const {
      return std::hash<std::uint64_t>()(
          (std::uint64_t(p.first) << 40) ^ p.second ^
          (std::uint64_t(p.first) >> 24));
    }
  };

  std::size_t capacity_;
  double dirty_threshold_;
  std::list<Entry> lru_;  // front = most recent
  std::unordered_map<PageId, std::list<Entry>::iterator, PageHash> map_;
  std::uint64_t hits_ = 0, misses_ = 0, evictions_ = 0;
  std::size_t dirty_count_ = 0;
};

struct Extent {
  std::uint64_t lba = 0;
  std::uint64_t len = 0;  // sectors

  std::uint64_t end() const { return lba + len; }
};

struct FileRecord {
  std::int64_t id = -1;
  std::string key;
  std::uint32_t ag = 0;
  std::uint64_t size_bytes = 0;        // logical chunk size
  std::uint64_t buffered_bytes = 0;    // received from the writer so far
  std::uint64_t allocated_bytes = 0;
  std::uint64_t written_back_bytes = 0;  // already submitted to the device
  std::vector<Extent> extents;
  std::uint64_t inode_node_lba = 0;  // node holding this file's inode/OM
  bool dirty = false;
};

/// On-device layout and free-space state: a journal region at LBA 0,
/// then equal allocation groups. ag-extent reserves a metadata band at
/// each group's start; simple-extent allocates metadata from the data
/// area, interleaved with file contents.
class AllocatorState {
 public:
  AllocatorState(const FsProfile& fs, std::uint64_t capacity_sectors);

  struct Ag {
    std::uint64_t start = 0, end = 0;   // data area [start, end)
    std::map<std::uint64_t, std::uint64_t> free;  // lba -> len
    std::uint64_t reserved_sectors = 0;  // delayed allocations pending
    std::uint64_t band_start = 0, band_cursor = 0, band_end = 0;
    std::uint64_t dir_node_lba = 0;
    std::uint64_t open_inode_node = 0;  // lba of node accepting inodes
    std::uint32_t open_inode_used = 0;
  };

  std::vector<Extent> allocate(std::int64_t file_id, std::uint64_t bytes,
                               std::uint32_t ag_hint);
  void release(const Extent& e, std::uint32_t ag);

  FileRecord& create_file(const std::string& key, std::uint64_t size_bytes);
  FileRecord* find_file(const std::string& key);
  const FileRecord* find_file(const std::string& key) const;
  FileRecord& file(std::int64_t id) { return files_[std::size_t(id)]; }
  const std::vector<FileRecord>& files() const { return files_; }
  std::vector<std::int64_t> keys_in_lex_order() const;

  std::uint32_t pick_ag_round_robin();  // most free space, lowest index
  std::uint64_t next_journal_lba(std::uint32_t sectors);
  std::uint64_t free_sectors_total() const;
  std::uint64_t free_sectors(std::uint32_t ag) const;

  const Ag& ag(std::uint32_t i) const { return ags_[i]; }
  std::uint32_t ag_count() const { return std::uint32_t(ags_.size()); }
  std::uint64_t capacity_sectors() const { return capacity_; }
  const FsProfile& fs() const { return fs_; }
  std::uint64_t band_overflow_nodes() const { return band_overflow_nodes_; }

  // Verifies free runs and allocated extents are disjoint; throws on
  // violation. Test hook.
  void check_invariants() const;

 private:
  std::uint64_t alloc_inode_node(std::uint32_t ag);
  std::uint64_t assign_inode_slot(std::uint32_t ag);

  FsProfile fs_;
  std::uint64_t capacity_ = 0;
  std::uint64_t journal_start_ = 0, journal_end_ = 0, journal_cursor_ = 0;
  std::vector<Ag> ags_;
  std::vector<FileRecord> files_;
  std::unordered_map<std::string, std::int64_t> by_key_;
  std::vector<Extent> meta_nodes_;  // nodes carved out of the data area
  std::uint64_t band_overflow_nodes_ = 0;

  friend class OsStackModel;
};

std::vector<Extent> allocate_extents(AllocatorState& alloc,
                                     std::int64_t file_id,
                                     std::uint64_t bytes,
                                     std::uint32_t ag_hint,
                                     const FsProfile& fs);

/// A pre-block-layer IO as handed down by the filesystem.
struct RawIo {
  double submit_ts_us = 0.0;
  IoOp op = IoOp::write;
  std::uint64_t lba = 0;
  std::uint64_t len = 0;  // sectors
  IoTag tag = IoTag::od;
  std::uint32_t thread_id = 0;
  double vfs_us = 0.0;
  double fs_us = 0.0;
};

/// Merges adjacent-LBA same-op same-tag IOs within one staging window,
/// then splits at 256 KiB. Submission order is otherwise preserved.
std::vector<IoEvent> bio_split_merge(const std::vector<RawIo>& pending);

struct OsStackCounters {
  std::uint64_t raw_io_count = 0;
  std::uint64_t writeback_passes = 0;
  std::uint64_t forced_window_allocs = 0;
  std::uint64_t lookup_sequences = 0;
};

/// Discrete-event translation of object chunk requests into tagged
/// block IOs. Simulated workload threads are interleaved by a smallest-
/// clock scheduler; all state lives in the injected models, so a load
/// phase and a measured phase can share one filesystem image.
class OsStackModel {
 public:
  OsStackModel(const FsProfile& fs, const CostModel& costs,
               DcacheModel& dcache, PageCacheModel& pcache,
               AllocatorState& alloc);

  Trace translate(const std::vector<ChunkRequest>& requests);

  const OsStackCounters& counters() const { return counters_; }

 private:
  struct ThreadState {
    std::uint32_t thread_id = 0;
    double clock_us = 0.0;
    std::size_t next_req = 0;
    std::vector<std::size_t> reqs;  // indices into request vector
    double pending_vfs_us = 0.0;
    double pending_fs_us = 0.0;
  };

  void do_put(ThreadState& t, const ChunkRequest& req);
  void do_get(ThreadState& t, const ChunkRequest& req);
  void do_list(ThreadState& t);
  void lookup_path(ThreadState& t, const std::string& key, bool expect_file);
  bool read_node_page_cached(ThreadState& t, std::uint64_t node_lba,
                             IoTag tag);
  void buffer_slice(ThreadState& t, FileRecord& f, std::uint64_t bytes);
  void force_window_alloc(ThreadState& t, FileRecord& f);
  void writeback_pass(ThreadState& t);
  void flush_file(ThreadState& t, FileRecord& f);
  void emit_raw(ThreadState& t, IoOp op, std::uint64_t lba, std::uint64_t len,
                IoTag tag);
  void flush_stager();
  void ensure_cache_room(ThreadState& t);

  FsProfile fs_;
  CostModel costs_;
  DcacheModel& dcache_;
  PageCacheModel& pcache_;
  AllocatorState& alloc_;
  std::vector<RawIo> stager_;
  Trace out_;
  OsStackCounters counters_;
};

/// Contract entry point: translates a chunk-request stream through the
/// OS stack models and returns the tagged device trace.
Trace translate_os(const std::vector<ChunkRequest>& requests,
                   const FsProfile& fs, const CostModel& costs,
                   DcacheModel& dcache, PageCacheModel& pcache,
                   AllocatorState& alloc,
                   OsStackCounters* counters_out = nullptr);

}  // namespace iostack
