#include "iostack/objdrive.hpp"

#include <algorithm>

namespace iostack {

void DriveProfile::validate() const {
  if (value_cap_bytes == 0) throw error("drive profile: value_cap must be > 0");
  if (iterator_batch == 0) throw error("drive profile: iterator_batch must be >= 1");
  if (oid_bucket_count == 0 || oids_per_bucket == 0)
    throw error("drive profile: bucket parameters must be >= 1");
  if (hash_levels == 0) throw error("drive profile: hash_levels must be >= 1");
}

OidMap::OidMap(const DriveProfile& drive, std::uint64_t capacity_sectors)
    : drive_(drive), capacity_(capacity_sectors) {
  drive_.validate();
  std::uint64_t index_sectors = drive_.index_region_bytes / kSectorBytes;
  if (capacity_ <= index_sectors + 1024)
    throw error("oid map: device too small for index region");
  data_start_ = 0;
  data_end_ = capacity_ - index_sectors;
  index_start_ = data_end_;
  index_cursor_ = index_start_;
  free_[data_start_] = data_end_ - data_start_;
}

bool OidMap::contains(const std::string& key) const {
  return objects_.count(key) != 0;
}

const OidMap::Object* OidMap::find(const std::string& key) const {
  auto it = objects_.find(key);
  return it == objects_.end() ? nullptr : &it->second;
}

OidMap::Object& OidMap::get_or_create(const std::string& key,
                                      std::uint64_t bytes) {
  auto it = objects_.find(key);
  if (it != objects_.end()) return it->second;
  Object obj;
  obj.oid = next_oid_++;
  obj.bytes = bytes;
  std::uint32_t om_sectors = drive_.om_pair_bytes / kSectorBytes;
  if (index_cursor_ + om_sectors > capacity_) index_cursor_ = index_start_;
  obj.om_lba = index_cursor_;
  index_cursor_ += om_sectors;
  return objects_.emplace(key, std::move(obj)).first->second;
}

std::vector<Extent> OidMap::allocate(std::uint64_t oid, std::uint64_t bytes) {
  std::uint64_t remaining = (bytes + kSectorBytes - 1) / kSectorBytes;
  std::uint64_t data_sectors = data_end_ - data_start_;
  std::uint64_t bucket =
      (oid / drive_.oids_per_bucket) % drive_.oid_bucket_count;
  std::uint64_t origin =
      data_start_ + bucket * (data_sectors / drive_.oid_bucket_count);
  std::uint64_t nts_sectors = drive_.nts_bytes / kSectorBytes;

  std::vector<Extent> out;
  while (remaining > 0) {
    // Prefer the first run at/after the bucket origin that both fits
    // and is NTS-class; fall back to any run that fits, then to the
    // largest.
    auto pick = free_.end();
    for (auto it = free_.lower_bound(origin); it != free_.end(); ++it) {
      if (it->second >= std::max(remaining, nts_sectors)) {
        pick = it;
        break;
      }
    }
    if (pick == free_.end()) {
      for (auto it = free_.begin(); it != free_.end(); ++it) {
        if (it->second >= remaining) {
          pick = it;
          break;
        }
      }
    }
    if (pick == free_.end()) {
      std::uint64_t best = 0;
      for (auto it = free_.begin(); it != free_.end(); ++it) {
        if (it->second > best) {
          best = it->second;
          pick = it;
        }
      }
      if (pick == free_.end())
        throw error("object drive: out of space for oid " + std::to_string(oid));
    }
    std::uint64_t take = std::min(remaining, pick->second);
    Extent e{pick->first, take};
    std::uint64_t run_lba = pick->first, run_len = pick->second;
    free_.erase(pick);
    if (run_len > take) free_[run_lba + take] = run_len - take;
    if (!out.empty() && out.back().end() == e.lba)
      out.back().len += e.len;
    else
      out.push_back(e);
    remaining -= take;
  }
  return out;
}

void OidMap::check_invariants() const {
  std::vector<Extent> all;
  for (const auto& [lba, len] : free_) all.push_back({lba, len});
  for (const auto& [key, obj] : objects_)
    for (const auto& r : obj.runs) all.push_back(r);
  std::sort(all.begin(), all.end(),
            [](const Extent& a, const Extent& b) { return a.lba < b.lba; });
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i - 1].end() > all[i].lba)
      throw error("oid map invariant: overlapping runs");
}

namespace {

struct OdThread {
  std::uint32_t thread_id = 0;
  double clock_us = 0.0;
};

}  // namespace

Trace translate_od(const std::vector<ChunkRequest>& requests,
                   const DriveProfile& drive, OidMap& oid,
                   OdCounters* counters_out) {
  drive.validate();
  Trace out;
  out.device_capacity_sectors = oid.capacity_sectors();
  OdCounters counters;

  std::map<std::uint32_t, OdThread> threads;
  double host_cost = drive.kv_lib_cost_us + drive.indevice_index_cost_us;
  std::uint32_t om_sectors = std::max(1u, drive.om_pair_bytes / kSectorBytes);

  auto emit = [&](OdThread& t, IoOp op, std::uint64_t lba, std::uint64_t len,
                  IoTag tag) {
    IoEvent e;
    e.submit_ts_us = t.clock_us;
    e.op = op;
    e.lba = lba;
    e.len = std::uint32_t(len);
    e.tag = tag;
    e.thread_id = t.thread_id;
    e.lat.vfs_us = drive.kv_lib_cost_us;       // thin host library
    e.lat.fs_us = drive.indevice_index_cost_us;  // in-device index
    out.events.push_back(e);
    t.clock_us += host_cost;
    ++counters.commands;
  };

  for (const ChunkRequest& req : requests) {
    OdThread& t = threads[req.thread_id];
    t.thread_id = req.thread_id;
    t.clock_us = std::max(t.clock_us, req.ts_us);
    switch (req.kind) {
      case OpKind::put: {
        bool existed = oid.contains(req.key);
        OidMap::Object& obj = oid.get_or_create(req.key, req.bytes);
        if (!existed) {
          std::uint64_t remaining = req.bytes;
          while (remaining > 0) {
            std::uint64_t cmd = std::min(drive.value_cap_bytes, remaining);
            auto runs = oid.allocate(obj.oid, cmd);
            for (const Extent& r : runs) {
              if (!obj.runs.empty() && obj.runs.back().end() == r.lba)
                obj.runs.back().len += r.len;
              else
                obj.runs.push_back(r);
            }
            remaining -= cmd;
          }
        }
        // Write commands mirror the stored runs in value-cap pieces.
        std::uint64_t cap_sectors = drive.value_cap_bytes / kSectorBytes;
        for (const Extent& r : obj.runs) {
          std::uint64_t off = 0;
          while (off < r.len) {
            std::uint64_t len = std::min(cap_sectors, r.len - off);
            emit(t, IoOp::write, r.lba + off, len, IoTag::od);
            off += len;
          }
        }
        emit(t, IoOp::write, obj.om_lba, om_sectors, IoTag::om);
        break;
      }
      case OpKind::get: {
        const OidMap::Object* obj = oid.find(req.key);
        if (!obj) throw error("GET of unknown key '" + req.key + "'");
        emit(t, IoOp::read, obj->om_lba, om_sectors, IoTag::om);
        std::uint64_t cap_sectors = drive.value_cap_bytes / kSectorBytes;
        for (const Extent& r : obj->runs) {
          std::uint64_t off = 0;
          while (off < r.len) {
            std::uint64_t len = std::min(cap_sectors, r.len - off);
            emit(t, IoOp::read, r.lba + off, len, IoTag::od);
            off += len;
          }
        }
        break;
      }
      case OpKind::list: {
        std::uint64_t keys = oid.object_count();
        if (keys == 0) throw error("LIST on an empty object drive");
        std::uint64_t batches =
            (keys + drive.iterator_batch - 1) / drive.iterator_batch;
        std::uint64_t batch_bytes =
            std::uint64_t(drive.iterator_batch) * drive.iterator_entry_bytes;
        std::uint64_t batch_sectors =
            std::max<std::uint64_t>(1, (batch_bytes + kSectorBytes - 1) /
                                           kSectorBytes);
        std::uint64_t lba = oid.index_region_start();
        for (std::uint64_t b = 0; b < batches; ++b) {
          emit(t, IoOp::read, lba, batch_sectors, IoTag::om);
          lba += batch_sectors;
          ++counters.iterator_commands;
        }
        break;
      }
    }
  }

  out.meta["stack"] = "object-drive";
  out.sort_events();
  if (counters_out) *counters_out = counters;
  return out;
}

}  // namespace iostack
