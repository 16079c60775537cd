#include "iostack/os_stack.hpp"

#include <algorithm>
#include <cassert>

namespace iostack {

FsProfile FsProfile::ag_extent() {
  FsProfile p;
  p.kind = FsKind::ag_extent;
  p.metadata_node_bytes = 16 * 1024;
  p.allocation_groups = 4;
  p.delayed_alloc_window = 4ull * 1024 * 1024;
  return p;
}

FsProfile FsProfile::simple_extent() {
  FsProfile p;
  p.kind = FsKind::simple_extent;
  p.metadata_node_bytes = 4 * 1024;
  p.allocation_groups = 1;
  p.delayed_alloc_window = 256 * 1024;
  p.extent_max_bytes = 128ull * 1024 * 1024;
  p.metadata_band_bytes = 0;
  return p;
}

void FsProfile::validate() const {
  if (metadata_node_bytes != 4 * 1024 && metadata_node_bytes != 16 * 1024)
    throw error("fs profile: metadata_node_bytes must be 4 KiB or 16 KiB");
  if (allocation_groups < 1)
    throw error("fs profile: allocation_groups must be >= 1");
  if (delayed_alloc_window == 0 || extent_max_bytes == 0 ||
      journal_write_bytes == 0)
    throw error("fs profile: window/extent/journal sizes must be > 0");
  if (inode_entry_bytes == 0 || inode_entry_bytes > metadata_node_bytes)
    throw error("fs profile: bad inode_entry_bytes");
}

// ---------------------------------------------------------------------------
// Caches

bool DcacheModel::lookup(const std::string& key) {
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++misses_;
    return false;
  }
  ++hits_;
  lru_.splice(lru_.begin(), lru_, it->second);
  return true;
}

void DcacheModel::insert(const std::string& key) {
  if (map_.count(key)) return;
  if (capacity_ == 0) return;
  if (map_.size() >= capacity_) {
    map_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(key);
  map_[key] = lru_.begin();
}

void DcacheModel::reset() {
  lru_.clear();
  map_.clear();
  hits_ = misses_ = 0;
}

bool PageCacheModel::access(std::int64_t owner, std::uint64_t page,
                            bool dirty) {
  PageId id{owner, page};
  auto it = map_.find(id);
  if (it != map_.end()) {
    ++hits_;
    if (dirty && !it->second->dirty) {
      it->second->dirty = true;
      ++dirty_count_;
    }
    lru_.splice(lru_.begin(), lru_, it->second);
    return true;
  }
  ++misses_;
  if (capacity_ == 0) return false;
  if (map_.size() >= capacity_) {
    Entry& victim = lru_.back();
    if (victim.dirty) --dirty_count_;
    map_.erase(victim.id);
    lru_.pop_back();
    ++evictions_;
  }
  lru_.push_front(Entry{id, dirty});
  if (dirty) ++dirty_count_;
  map_[id] = lru_.begin();
  return false;
}

bool PageCacheModel::contains(std::int64_t owner, std::uint64_t page) const {
  return map_.count(PageId{owner, page}) != 0;
}

void PageCacheModel::mark_owner_clean(std::int64_t owner) {
  for (auto& e : lru_) {
    if (e.id.first == owner && e.dirty) {
      e.dirty = false;
      --dirty_count_;
    }
  }
}

bool PageCacheModel::over_dirty_threshold() const {
  if (capacity_ == 0) return false;
  return double(dirty_count_) > dirty_threshold_ * double(capacity_);
}

void PageCacheModel::reset() {
  lru_.clear();
  map_.clear();
  hits_ = misses_ = evictions_ = 0;
  dirty_count_ = 0;
}

// ---------------------------------------------------------------------------
// Allocator

AllocatorState::AllocatorState(const FsProfile& fs,
                               std::uint64_t capacity_sectors)
    : fs_(fs), capacity_(capacity_sectors) {
  fs_.validate();
  std::uint64_t journal_sectors = fs_.journal_region_bytes / kSectorBytes;
  if (capacity_ <= journal_sectors + fs_.allocation_groups * 1024)
    throw error("allocator: device too small for the configured layout");
  journal_start_ = 0;
  journal_end_ = journal_sectors;
  journal_cursor_ = journal_start_;

  std::uint64_t data_start = journal_end_;
  std::uint64_t per_ag = (capacity_ - data_start) / fs_.allocation_groups;
  std::uint64_t band_sectors = fs_.metadata_band_bytes / kSectorBytes;
  ags_.resize(fs_.allocation_groups);
  for (std::uint32_t i = 0; i < fs_.allocation_groups; ++i) {
    Ag& ag = ags_[i];
    std::uint64_t ag_begin = data_start + std::uint64_t(i) * per_ag;
    std::uint64_t ag_end = ag_begin + per_ag;
    if (fs_.kind == FsKind::ag_extent) {
      if (band_sectors + fs_.node_sectors() * 4 >= per_ag)
        throw error("allocator: metadata band larger than allocation group");
      ag.band_start = ag_begin;
      ag.band_end = ag_begin + band_sectors;
      ag.dir_node_lba = ag.band_start;
      ag.band_cursor = ag.band_start + fs_.node_sectors();
      ag.start = ag.band_end;
    } else {
      ag.start = ag_begin;
    }
    ag.end = ag_end;
    ag.free[ag.start] = ag.end - ag.start;
  }
  if (fs_.kind == FsKind::simple_extent) {
    // Single directory node carved from the head of the data area.
    ags_[0].dir_node_lba = alloc_inode_node(0);
  }
}

std::uint64_t AllocatorState::free_sectors(std::uint32_t ag) const {
  std::uint64_t total = 0;
  for (const auto& [lba, len] : ags_[ag].free) total += len;
  return total;
}

std::uint64_t AllocatorState::free_sectors_total() const {
  std::uint64_t total = 0;
  for (std::uint32_t i = 0; i < ag_count(); ++i) total += free_sectors(i);
  return total;
}

std::uint32_t AllocatorState::pick_ag_round_robin() {
  std::uint32_t best = 0;
  std::int64_t best_free = -1;
  for (std::uint32_t i = 0; i < ag_count(); ++i) {
    std::int64_t avail =
        std::int64_t(free_sectors(i)) - std::int64_t(ags_[i].reserved_sectors);
    if (avail > best_free) {
      best_free = avail;
      best = i;
    }
  }
  return best;
}

std::uint64_t AllocatorState::next_journal_lba(std::uint32_t sectors) {
  if (journal_cursor_ + sectors > journal_end_) journal_cursor_ = journal_start_;
  std::uint64_t lba = journal_cursor_;
  journal_cursor_ += sectors;
  return lba;
}

std::uint64_t AllocatorState::alloc_inode_node(std::uint32_t ag_index) {
  Ag& ag = ags_[ag_index];
  std::uint32_t sectors = fs_.node_sectors();
  if (fs_.kind == FsKind::ag_extent) {
    if (ag.band_cursor + sectors <= ag.band_end) {
      std::uint64_t lba = ag.band_cursor;
      ag.band_cursor += sectors;
      return lba;
    }
    ++band_overflow_nodes_;  // band exhausted, spill into the data area
  }
  auto extents = allocate(-2, std::uint64_t(sectors) * kSectorBytes, ag_index);
  // Node allocations are a single node, always contiguous.
  assert(extents.size() == 1 && extents[0].len == sectors);
  meta_nodes_.push_back(extents[0]);
  return extents[0].lba;
}

std::uint64_t AllocatorState::assign_inode_slot(std::uint32_t ag_index) {
  Ag& ag = ags_[ag_index];
  if (ag.open_inode_node == 0 ||
      ag.open_inode_used >= fs_.inode_entries_per_node()) {
    ag.open_inode_node = alloc_inode_node(ag_index);
    ag.open_inode_used = 0;
  }
  ++ag.open_inode_used;
  return ag.open_inode_node;
}

FileRecord& AllocatorState::create_file(const std::string& key,
                                        std::uint64_t size_bytes) {
  FileRecord f;
  f.id = std::int64_t(files_.size());
  f.key = key;
  f.ag = pick_ag_round_robin();
  f.size_bytes = size_bytes;
  f.inode_node_lba = assign_inode_slot(f.ag);
  ags_[f.ag].reserved_sectors += (size_bytes + kSectorBytes - 1) / kSectorBytes;
  files_.push_back(std::move(f));
  by_key_[key] = files_.back().id;
  return files_.back();
}

FileRecord* AllocatorState::find_file(const std::string& key) {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &files_[std::size_t(it->second)];
}

const FileRecord* AllocatorState::find_file(const std::string& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &files_[std::size_t(it->second)];
}

std::vector<std::int64_t> AllocatorState::keys_in_lex_order() const {
  std::vector<std::pair<std::string, std::int64_t>> pairs;
  pairs.reserve(by_key_.size());
  for (const auto& [k, id] : by_key_) pairs.emplace_back(k, id);
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::int64_t> out;
  out.reserve(pairs.size());
  for (auto& p : pairs) out.push_back(p.second);
  return out;
}

std::vector<Extent> AllocatorState::allocate(std::int64_t file_id,
                                             std::uint64_t bytes,
                                             std::uint32_t ag_hint) {
  if (bytes == 0) throw error("allocate: byte count must be > 0");
  std::uint64_t remaining = (bytes + kSectorBytes - 1) / kSectorBytes;
  if (remaining > free_sectors_total()) {
    throw error("allocate: out of space in allocation group " +
                std::to_string(ag_hint) + " and all fallbacks (file id " +
                std::to_string(file_id) + ")");
  }
  std::uint64_t extent_max = fs_.extent_max_bytes / kSectorBytes;
  std::vector<Extent> out;
  std::uint32_t ag_index = ag_hint % ag_count();
  while (remaining > 0) {
    std::uint64_t want = std::min(remaining, extent_max);
    // First fit in the hinted group, then round-robin fallback for a
    // run that can take the whole piece.
    std::map<std::uint64_t, std::uint64_t>::iterator pick;
    std::uint32_t pick_ag = ag_count();
    for (std::uint32_t i = 0; i < ag_count() && pick_ag == ag_count(); ++i) {
      std::uint32_t a = (ag_index + i) % ag_count();
      for (auto it = ags_[a].free.begin(); it != ags_[a].free.end(); ++it) {
        if (it->second >= want) {
          pick = it;
          pick_ag = a;
          break;
        }
      }
    }
    if (pick_ag == ag_count()) {
      // No run fits: take the largest run available anywhere.
      std::uint64_t best_len = 0;
      for (std::uint32_t i = 0; i < ag_count(); ++i) {
        std::uint32_t a = (ag_index + i) % ag_count();
        for (auto it = ags_[a].free.begin(); it != ags_[a].free.end(); ++it) {
          if (it->second > best_len) {
            best_len = it->second;
            pick = it;
            pick_ag = a;
          }
        }
      }
      want = std::min(want, best_len);
    }
    Extent e{pick->first, want};
    std::uint64_t run_lba = pick->first, run_len = pick->second;
    ags_[pick_ag].free.erase(pick);
    if (run_len > want) ags_[pick_ag].free[run_lba + want] = run_len - want;
    if (file_id >= 0) {
      Ag& ag = ags_[pick_ag];
      ag.reserved_sectors -= std::min(ag.reserved_sectors, want);
    }
    // Coalesce with the previous extent when physically adjacent.
    if (!out.empty() && out.back().end() == e.lba &&
        (out.back().len + e.len) * kSectorBytes <= fs_.extent_max_bytes) {
      out.back().len += e.len;
    } else {
      out.push_back(e);
    }
    remaining -= want;
  }
  return out;
}

void AllocatorState::release(const Extent& e, std::uint32_t ag_index) {
  Ag& ag = ags_[ag_index];
  auto [it, ok] = ag.free.emplace(e.lba, e.len);
  if (!ok) throw error("release: double free");
  // Merge with neighbours.
  if (it != ag.free.begin()) {
    auto prev = std::prev(it);
    if (prev->first + prev->second == it->first) {
      prev->second += it->second;
      ag.free.erase(it);
      it = prev;
    }
  }
  auto next = std::next(it);
  if (next != ag.free.end() && it->first + it->second == next->first) {
    it->second += next->second;
    ag.free.erase(next);
  }
}

void AllocatorState::check_invariants() const {
  std::vector<Extent> all;
  for (const auto& ag : ags_) {
    for (const auto& [lba, len] : ag.free) {
      if (len == 0) throw error("invariant: zero-length free run");
      if (lba < ag.start || lba + len > ag.end)
        throw error("invariant: free run outside its allocation group");
      all.push_back({lba, len});
    }
  }
  for (const auto& f : files_)
    for (const auto& e : f.extents) all.push_back(e);
  for (const auto& e : meta_nodes_) all.push_back(e);
  std::sort(all.begin(), all.end(),
            [](const Extent& a, const Extent& b) { return a.lba < b.lba; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i - 1].end() > all[i].lba)
      throw error("invariant: overlapping extents/free runs at lba " +
                  std::to_string(all[i].lba));
  }
}

std::vector<Extent> allocate_extents(AllocatorState& alloc,
                                     std::int64_t file_id, std::uint64_t bytes,
                                     std::uint32_t ag_hint,
                                     const FsProfile& fs) {
  (void)fs;  // profile travels inside the allocator state
  return alloc.allocate(file_id, bytes, ag_hint);
}

// ---------------------------------------------------------------------------
// Block layer: merge + split

std::vector<IoEvent> bio_split_merge(const std::vector<RawIo>& pending) {
  std::vector<IoEvent> staged;
  std::vector<std::uint64_t> staged_len;  // sectors, may exceed u32 pre-split
  staged.reserve(pending.size());
  for (const RawIo& raw : pending) {
    bool merged = false;
    for (std::size_t i = 0; i < staged.size(); ++i) {
      IoEvent& e = staged[i];
      if (e.op != raw.op || e.tag != raw.tag) continue;
      if (e.lba + staged_len[i] == raw.lba) {
        staged_len[i] += raw.len;
      } else if (raw.lba + raw.len == e.lba) {
        e.lba = raw.lba;
        staged_len[i] += raw.len;
      } else {
        continue;
      }
      e.submit_ts_us = std::min(e.submit_ts_us, raw.submit_ts_us);
      e.lat.vfs_us += raw.vfs_us;
      e.lat.fs_us += raw.fs_us;
      ++e.merged_raw;
      merged = true;
      break;
    }
    if (merged) continue;
    IoEvent e;
    e.submit_ts_us = raw.submit_ts_us;
    e.op = raw.op;
    e.lba = raw.lba;
    e.tag = raw.tag;
    e.thread_id = raw.thread_id;
    e.lat.vfs_us = raw.vfs_us;
    e.lat.fs_us = raw.fs_us;
    e.merged_raw = 1;
    staged.push_back(e);
    staged_len.push_back(raw.len);
  }

  constexpr std::uint64_t kMaxBioSectors = kMaxBioBytes / kSectorBytes;
  std::vector<IoEvent> out;
  out.reserve(staged.size());
  for (std::size_t i = 0; i < staged.size(); ++i) {
    IoEvent base = staged[i];
    std::uint64_t total = staged_len[i];
    if (total <= kMaxBioSectors) {
      base.len = std::uint32_t(total);
      out.push_back(base);
      continue;
    }
    std::uint64_t pieces = (total + kMaxBioSectors - 1) / kMaxBioSectors;
    std::uint64_t offset = 0;
    std::uint32_t raw_left = base.merged_raw;
    for (std::uint64_t p = 0; p < pieces; ++p) {
      IoEvent piece = base;
      piece.lba = base.lba + offset;
      piece.len = std::uint32_t(std::min(kMaxBioSectors, total - offset));
      double frac = double(piece.len) / double(total);
      piece.lat.vfs_us = base.lat.vfs_us * frac;
      piece.lat.fs_us = base.lat.fs_us * frac;
      std::uint32_t share = std::uint32_t(
          (std::uint64_t(base.merged_raw) * piece.len + total - 1) / total);
      share = std::max<std::uint32_t>(1, std::min(share, raw_left));
      if (p + 1 == pieces) share = std::max<std::uint32_t>(1, raw_left);
      piece.merged_raw = share;
      raw_left -= std::min(raw_left, share);
      offset += piece.len;
      out.push_back(piece);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// OS stack translation

OsStackModel::OsStackModel(const FsProfile& fs, const CostModel& costs,
                           DcacheModel& dcache, PageCacheModel& pcache,
                           AllocatorState& alloc)
    : fs_(fs), costs_(costs), dcache_(dcache), pcache_(pcache), alloc_(alloc) {
  fs_.validate();
}

void OsStackModel::emit_raw(ThreadState& t, IoOp op, std::uint64_t lba,
                            std::uint64_t len, IoTag tag) {
  RawIo raw;
  raw.submit_ts_us = t.clock_us;
  raw.op = op;
  raw.lba = lba;
  raw.len = len;
  raw.tag = tag;
  raw.thread_id = t.thread_id;
  raw.vfs_us = t.pending_vfs_us;
  raw.fs_us = t.pending_fs_us;
  t.pending_vfs_us = 0.0;
  t.pending_fs_us = 0.0;
  stager_.push_back(raw);
  ++counters_.raw_io_count;
  if (stager_.size() >= 16) flush_stager();
}

void OsStackModel::flush_stager() {
  if (stager_.empty()) return;
  auto events = bio_split_merge(stager_);
  for (IoEvent& e : events) {
    e.lat.block_us += costs_.bio_us;
    out_.events.push_back(e);
  }
  stager_.clear();
}

bool OsStackModel::read_node_page_cached(ThreadState& t,
                                         std::uint64_t node_lba, IoTag tag) {
  std::uint32_t pages = std::max(1u, fs_.node_sectors() / kPageSectors);
  bool any_miss = false;
  for (std::uint32_t p = 0; p < pages; ++p) {
    if (!pcache_.access(-1, node_lba / kPageSectors + p, false))
      any_miss = true;
  }
  if (any_miss) emit_raw(t, IoOp::read, node_lba, fs_.node_sectors(), tag);
  return any_miss;
}

void OsStackModel::lookup_path(ThreadState& t, const std::string& key,
                               bool /*expect_file*/) {
  if (dcache_.lookup(key)) {
    t.clock_us += costs_.lookup_hit_us;
    t.pending_vfs_us += costs_.lookup_hit_us;
    return;
  }
  ++counters_.lookup_sequences;
  t.clock_us += costs_.lookup_miss_us;
  t.pending_vfs_us += costs_.lookup_miss_us;
  const FileRecord* f = alloc_.find_file(key);
  std::uint32_t dir_ag = f ? f->ag : alloc_.pick_ag_round_robin();
  read_node_page_cached(t, alloc_.ag(dir_ag).dir_node_lba, IoTag::fsm);
  if (f) read_node_page_cached(t, f->inode_node_lba, IoTag::fsm);
  dcache_.insert(key);
}

void OsStackModel::buffer_slice(ThreadState& t, FileRecord& f,
                                std::uint64_t bytes) {
  std::uint64_t first_page = f.buffered_bytes / kPageBytes;
  std::uint64_t last_page = (f.buffered_bytes + bytes - 1) / kPageBytes;
  for (std::uint64_t p = first_page; p <= last_page; ++p)
    pcache_.access(f.id, p, true);
  double pages = double(last_page - first_page + 1);
  double cost = costs_.syscall_us + pages * costs_.page_copy_us;
  t.clock_us += cost;
  t.pending_vfs_us += cost;
  f.buffered_bytes += bytes;
  f.dirty = true;
}

void OsStackModel::force_window_alloc(ThreadState& t, FileRecord& f) {
  if (f.buffered_bytes <= f.allocated_bytes) return;
  std::uint64_t unallocated = f.buffered_bytes - f.allocated_bytes;
  std::uint64_t grab =
      unallocated / fs_.delayed_alloc_window * fs_.delayed_alloc_window;
  if (grab == 0) return;
  auto extents = alloc_.allocate(f.id, grab, f.ag);
  t.clock_us += costs_.alloc_touch_us;
  t.pending_fs_us += costs_.alloc_touch_us;
  ++counters_.forced_window_allocs;
  for (const Extent& e : extents) {
    emit_raw(t, IoOp::write, e.lba, e.len, IoTag::od);
    if (!f.extents.empty() && f.extents.back().end() == e.lba)
      f.extents.back().len += e.len;
    else
      f.extents.push_back(e);
  }
  f.allocated_bytes += grab;
  f.written_back_bytes = f.allocated_bytes;
}

void OsStackModel::flush_file(ThreadState& t, FileRecord& f) {
  if (!f.dirty) return;
  if (f.buffered_bytes > f.allocated_bytes) {
    std::uint64_t need = f.buffered_bytes - f.allocated_bytes;
    auto extents = alloc_.allocate(f.id, need, f.ag);
    t.clock_us += costs_.alloc_touch_us;
    t.pending_fs_us += costs_.alloc_touch_us;
    for (const Extent& e : extents) {
      if (!f.extents.empty() && f.extents.back().end() == e.lba)
        f.extents.back().len += e.len;
      else
        f.extents.push_back(e);
    }
    f.allocated_bytes = f.buffered_bytes;
  }
  // Write back the dirty span that has not already gone out through a
  // forced window allocation, walking the extent list.
  std::uint64_t skip = f.written_back_bytes / kSectorBytes;
  std::uint64_t remaining =
      (f.buffered_bytes + kSectorBytes - 1) / kSectorBytes;
  remaining -= std::min(remaining, skip);
  for (const Extent& e : f.extents) {
    if (remaining == 0) break;
    if (skip >= e.len) {
      skip -= e.len;
      continue;
    }
    std::uint64_t len = std::min(e.len - skip, remaining);
    emit_raw(t, IoOp::write, e.lba + skip, len, IoTag::od);
    skip = 0;
    remaining -= len;
  }
  f.written_back_bytes = f.buffered_bytes;
  // Inode/xattr commit plus one journal record per metadata commit.
  t.clock_us += costs_.meta_update_us;
  t.pending_fs_us += costs_.meta_update_us;
  emit_raw(t, IoOp::write, f.inode_node_lba, fs_.node_sectors(), IoTag::om);
  t.pending_fs_us += costs_.meta_update_us;
  std::uint32_t journal_sectors = fs_.journal_write_bytes / kSectorBytes;
  emit_raw(t, IoOp::write, alloc_.next_journal_lba(journal_sectors),
           journal_sectors, IoTag::fsm);
  pcache_.mark_owner_clean(f.id);
  f.dirty = false;
}

void OsStackModel::writeback_pass(ThreadState& t) {
  ++counters_.writeback_passes;
  // Flusher order: by allocation group, then by creation order. This is
  // the inode-clustered writeback that keeps per-group spans sequential.
  std::vector<FileRecord*> dirty;
  for (auto& f : alloc_.files_)
    if (f.dirty) dirty.push_back(&f);
  std::stable_sort(dirty.begin(), dirty.end(),
                   [](const FileRecord* a, const FileRecord* b) {
                     if (a->ag != b->ag) return a->ag < b->ag;
                     return a->id < b->id;
                   });
  for (FileRecord* f : dirty) flush_file(t, *f);
  flush_stager();
}

void OsStackModel::do_put(ThreadState& t, const ChunkRequest& req) {
  lookup_path(t, req.key, false);
  FileRecord* f = alloc_.find_file(req.key);
  if (!f) {
    f = &alloc_.create_file(req.key, req.bytes);
    t.clock_us += costs_.meta_update_us;
    t.pending_fs_us += costs_.meta_update_us;
  } else {
    f->size_bytes = std::max(f->size_bytes, req.bytes);
    f->buffered_bytes = 0;  // whole-chunk rewrite, update in place
    f->written_back_bytes = 0;
  }
  // Object-metadata read-modify-write: validity read precedes the data.
  t.clock_us += costs_.syscall_us;
  t.pending_vfs_us += costs_.syscall_us;
  read_node_page_cached(t, f->inode_node_lba, IoTag::om);

  std::uint64_t remaining = req.bytes;
  while (remaining > 0) {
    std::uint64_t slice = std::min<std::uint64_t>(fs_.delayed_alloc_window,
                                                  remaining);
    buffer_slice(t, *f, slice);
    remaining -= slice;
    if (f->buffered_bytes > f->allocated_bytes &&
        f->buffered_bytes - f->allocated_bytes >= fs_.delayed_alloc_window)
      force_window_alloc(t, *f);
    if (pcache_.over_dirty_threshold()) writeback_pass(t);
  }
  if (fs_.fsync_per_put) {
    flush_file(t, *f);
    flush_stager();
  }
}

void OsStackModel::do_get(ThreadState& t, const ChunkRequest& req) {
  lookup_path(t, req.key, true);
  FileRecord* f = alloc_.find_file(req.key);
  if (!f) throw error("GET of unknown key '" + req.key + "'");
  t.clock_us += costs_.syscall_us;
  t.pending_vfs_us += costs_.syscall_us;
  read_node_page_cached(t, f->inode_node_lba, IoTag::om);

  std::uint64_t page_count = (f->size_bytes + kPageBytes - 1) / kPageBytes;
  std::uint64_t copied_pages = 0;
  std::uint64_t run_start = 0;
  bool in_run = false;
  auto read_run = [&](std::uint64_t begin_page, std::uint64_t end_page) {
    // Map the page run onto the extent list and emit per-extent reads.
    std::uint64_t want_lo = begin_page * kPageSectors;
    std::uint64_t want_hi = std::min(end_page * kPageSectors,
                                     (f->size_bytes + kSectorBytes - 1) /
                                         kSectorBytes);
    std::uint64_t cursor = 0;  // file offset in sectors
    for (const Extent& e : f->extents) {
      std::uint64_t e_lo = cursor, e_hi = cursor + e.len;
      std::uint64_t lo = std::max(want_lo, e_lo);
      std::uint64_t hi = std::min(want_hi, e_hi);
      if (lo < hi) {
        emit_raw(t, IoOp::read, e.lba + (lo - e_lo), hi - lo, IoTag::od);
        t.pending_fs_us += costs_.alloc_touch_us;  // extent-map touch
        t.clock_us += costs_.alloc_touch_us;
      }
      cursor = e_hi;
      if (cursor >= want_hi) break;
    }
  };
  for (std::uint64_t p = 0; p <= page_count; ++p) {
    bool missing = p < page_count && !pcache_.access(f->id, p, false);
    if (missing) {
      copied_pages += 1;
      if (!in_run) {
        run_start = p;
        in_run = true;
      }
    } else if (in_run) {
      read_run(run_start, p);
      in_run = false;
    }
  }
  double cost = costs_.syscall_us + double(page_count) * costs_.page_copy_us;
  t.clock_us += cost;
  t.pending_vfs_us += cost;
  (void)copied_pages;
}

void OsStackModel::do_list(ThreadState& t) {
  for (std::int64_t id : alloc_.keys_in_lex_order()) {
    lookup_path(t, alloc_.file(id).key, true);
  }
  flush_stager();
}

Trace OsStackModel::translate(const std::vector<ChunkRequest>& requests) {
  std::map<std::uint32_t, ThreadState> threads;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    ThreadState& st = threads[requests[i].thread_id];
    st.thread_id = requests[i].thread_id;
    st.reqs.push_back(i);
  }

  // Smallest-clock scheduler over simulated threads; one whole request
  // per turn, except that buffering inside do_put already interleaves
  // through the shared page cache and allocator.
  while (true) {
    ThreadState* next = nullptr;
    const ChunkRequest* req = nullptr;
    for (auto& [tid, st] : threads) {
      if (st.next_req >= st.reqs.size()) continue;
      const ChunkRequest& cand = requests[st.reqs[st.next_req]];
      double ready = std::max(st.clock_us, cand.ts_us);
      if (!next || ready < std::max(next->clock_us, req->ts_us)) {
        next = &st;
        req = &cand;
      }
    }
    if (!next) break;
    next->clock_us = std::max(next->clock_us, req->ts_us);
    switch (req->kind) {
      case OpKind::put: do_put(*next, *req); break;
      case OpKind::get: do_get(*next, *req); break;
      case OpKind::list: do_list(*next); break;
    }
    ++next->next_req;
  }

  // Final writeback uses the latest simulated clock.
  ThreadState* last = nullptr;
  for (auto& [tid, st] : threads)
    if (!last || st.clock_us > last->clock_us) last = &st;
  ThreadState fallback;
  writeback_pass(last ? *last : fallback);
  flush_stager();

  out_.device_capacity_sectors = alloc_.capacity_sectors();
  out_.meta["stack"] = std::string("os-fs:") + fs_.name();
  out_.meta["raw_io_count"] = std::to_string(counters_.raw_io_count);
  out_.sort_events();

  Trace result = std::move(out_);
  out_ = Trace{};
  return result;
}

Trace translate_os(const std::vector<ChunkRequest>& requests,
                   const FsProfile& fs, const CostModel& costs,
                   DcacheModel& dcache, PageCacheModel& pcache,
                   AllocatorState& alloc, OsStackCounters* counters_out) {
  OsStackModel model(fs, costs, dcache, pcache, alloc);
  Trace t = model.translate(requests);
  if (counters_out) *counters_out = model.counters();
  return t;
}

}  // namespace iostack
