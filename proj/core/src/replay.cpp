#include "iostack/replay.hpp"

#include <algorithm>
#include <unordered_map>

namespace iostack {

StackProfile StackProfile::raw_block(RawProfile p) {
  StackProfile s;
  s.kind = Kind::raw_block;
  s.raw = p;
  return s;
}

StackProfile StackProfile::os_fs(FsProfile p) {
  StackProfile s;
  s.kind = Kind::os_fs;
  s.fs = p;
  return s;
}

StackProfile StackProfile::object_drive(DriveProfile p) {
  StackProfile s;
  s.kind = Kind::object_drive;
  s.drive = p;
  return s;
}

std::string StackProfile::name() const {
  switch (kind) {
    case Kind::raw_block: return "raw-block";
    case Kind::os_fs: return std::string("os-fs:") + fs.name();
    case Kind::object_drive: return "object-drive";
  }
  return "?";
}

Trace replay(const Trace& input, const DeviceProfile& device,
             const CostModel& costs) {
  Trace trace = input;
  if (!trace.is_sorted()) trace.sort_events();

  std::vector<double> ends;  // ascending service-end times
  ends.reserve(trace.events.size());
  double server_free = 0.0;
  std::uint64_t head = 0;
  double busy = 0.0;
  double first_submit = trace.events.empty() ? 0.0
                                             : trace.events.front().submit_ts_us;
  double last_end = first_submit;

  const bool is_hdd = std::holds_alternative<HddProfile>(device);
  for (IoEvent& e : trace.events) {
    double start = std::max(e.submit_ts_us, server_free);
    auto older = std::upper_bound(ends.begin(), ends.end(), e.submit_ts_us);
    std::uint32_t outstanding = std::uint32_t(ends.end() - older);
    e.lat.block_us +=
        double(std::min(outstanding, costs.queue_depth)) * costs.queue_wait_us;

    double service;
    if (is_hdd) {
      auto hs = hdd_service(std::get<HddProfile>(device), e, head,
                            trace.device_capacity_sectors);
      service = hs.service_us;
      head = hs.new_head_lba;
    } else {
      auto in_flight = std::upper_bound(ends.begin(), ends.end(), start);
      std::uint32_t depth = std::uint32_t(ends.end() - in_flight) + 1;
      service = ssd_service(std::get<SsdProfile>(device), e, depth);
    }
    double end = start + service;
    server_free = end;
    ends.push_back(end);
    busy += service;
    last_end = std::max(last_end, end);

    e.lat.device_us = service;
    e.complete_ts_us = e.submit_ts_us + e.lat.sum();
  }

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", last_end - first_submit);
  trace.meta["wall_time_us"] = buf;
  std::snprintf(buf, sizeof(buf), "%.3f", busy);
  trace.meta["device_busy_us"] = buf;
  trace.meta["replayed"] = "1";
  return trace;
}

namespace {

// Raw block device access: a bump allocator of sequential regions, one
// per key, written/read in fixed-size submissions.
class RawModel {
 public:
  RawModel(RawProfile profile, std::uint64_t capacity_sectors,
           const CostModel& costs)
      : profile_(profile), capacity_(capacity_sectors), costs_(costs) {}

  Trace translate(const std::vector<ChunkRequest>& requests) {
    Trace out;
    out.device_capacity_sectors = capacity_;
    std::map<std::uint32_t, double> clocks;
    std::uint64_t io_sectors =
        std::max<std::uint64_t>(1, std::min<std::uint64_t>(
                                       profile_.io_bytes, kMaxBioBytes) /
                                       kSectorBytes);
    for (const ChunkRequest& req : requests) {
      double& clock = clocks[req.thread_id];
      clock = std::max(clock, req.ts_us);
      if (req.kind == OpKind::list)
        throw error("raw-block stack has no namespace to enumerate");
      Extent region;
      auto it = regions_.find(req.key);
      if (it != regions_.end()) {
        region = it->second;
      } else {
        if (req.kind == OpKind::get)
          throw error("GET of unknown key '" + req.key + "'");
        std::uint64_t sectors = (req.bytes + kSectorBytes - 1) / kSectorBytes;
        if (cursor_ + sectors > capacity_)
          throw error("raw-block device out of space");
        region = Extent{cursor_, sectors};
        cursor_ += sectors;
        regions_.emplace(req.key, region);
      }
      IoOp op = req.kind == OpKind::put ? IoOp::write : IoOp::read;
      std::uint64_t off = 0;
      while (off < region.len) {
        std::uint64_t len = std::min(io_sectors, region.len - off);
        IoEvent e;
        e.submit_ts_us = clock;
        e.op = op;
        e.lba = region.lba + off;
        e.len = std::uint32_t(len);
        e.tag = IoTag::od;
        e.thread_id = req.thread_id;
        e.lat.block_us = costs_.bio_us;
        out.events.push_back(e);
        clock += costs_.bio_us;
        off += len;
      }
    }
    out.meta["stack"] = "raw-block";
    out.sort_events();
    return out;
  }

 private:
  RawProfile profile_;
  std::uint64_t capacity_;
  CostModel costs_;
  std::uint64_t cursor_ = 0;
  std::unordered_map<std::string, Extent> regions_;
};

std::vector<ChunkRequest> shard_all(const std::vector<ObjectOp>& ops,
                                    const ClusterSpec& cluster,
                                    std::uint32_t osd_index) {
  std::vector<ChunkRequest> reqs;
  reqs.reserve(ops.size());
  for (const ObjectOp& op : ops) {
    auto req = shard_to_osd(op, cluster, osd_index);
    if (req) reqs.push_back(std::move(*req));
  }
  return reqs;
}

std::vector<ChunkRequest> load_requests(const WorkloadSpec& spec,
                                        const ClusterSpec& cluster) {
  std::uint64_t chunk = chunk_object(spec.object_size, cluster);
  std::vector<ChunkRequest> reqs;
  reqs.reserve(spec.object_count);
  for (std::uint64_t i = 0; i < spec.object_count; ++i) {
    ChunkRequest r;
    r.ts_us = double(i);
    r.kind = OpKind::put;
    r.key = object_key(i);
    r.bytes = chunk;
    r.thread_id = std::uint32_t(i % spec.thread_count);
    reqs.push_back(std::move(r));
  }
  return reqs;
}

const char* device_name(const DeviceProfile& dev) {
  return std::holds_alternative<HddProfile>(dev) ? "hdd" : "ssd";
}

void finish_result(RunResult& result, const Trace& replayed,
                   const std::string& workload_name, std::uint64_t seed,
                   const std::string& stack_name,
                   const DeviceProfile& device) {
  result.trace = replayed;
  result.trace.meta["nts_bytes"] = std::to_string(device_nts_bytes(device));
  for (const IoEvent& e : result.trace.events) {
    auto tag = std::size_t(e.tag);
    result.per_tag_latency_us[tag] += e.complete_ts_us - e.submit_ts_us;
    result.per_tag_bytes[tag] += e.bytes();
    result.per_tag_count[tag] += 1;
  }
  result.total_time_us = result.per_tag_latency_us[0] +
                         result.per_tag_latency_us[1] +
                         result.per_tag_latency_us[2];
  auto grab = [&](const char* key) {
    auto it = result.trace.meta.find(key);
    return it == result.trace.meta.end() ? 0.0 : std::stod(it->second);
  };
  result.wall_time_us = grab("wall_time_us");
  result.device_busy_us = grab("device_busy_us");
  result.chains_od = detect_chains(result.trace, {IoTag::od, {}});
  result.chains_all = detect_chains(result.trace);
  if (!result.trace.events.empty())
    result.layers = layer_breakdown(result.trace);
  result.meta["workload"] = workload_name;
  result.meta["seed"] = std::to_string(seed);
  result.meta["stack"] = stack_name;
  result.meta["device"] = device_name(device);
  result.trace.meta["workload"] = workload_name;
  result.trace.meta["seed"] = std::to_string(seed);
}

}  // namespace

RunResult run(const WorkloadSpec& workload, const ClusterSpec& cluster,
              const StackProfile& stack, const DeviceProfile& device,
              std::uint32_t osd_index, const SimConfig& cfg) {
  workload.validate();
  cluster.validate();
  std::visit([](const auto& d) { d.validate(); }, device);

  auto ops = generate_workload(workload, cluster);
  auto requests = shard_all(ops, cluster, osd_index);
  bool needs_load = workload.kind != WorkloadKind::w_o;

  RunResult result;
  Trace translated;

  switch (stack.kind) {
    case StackProfile::Kind::raw_block: {
      RawModel raw(stack.raw, cfg.device_capacity_sectors, cfg.costs);
      if (needs_load) (void)raw.translate(load_requests(workload, cluster));
      translated = raw.translate(requests);
      break;
    }
    case StackProfile::Kind::os_fs: {
      DcacheModel dcache(cfg.dcache_entries);
      PageCacheModel pcache(cfg.pcache_pages, cfg.dirty_ratio_threshold);
      AllocatorState alloc(stack.fs, cfg.device_capacity_sectors);
      if (needs_load) {
        translate_os(load_requests(workload, cluster), stack.fs, cfg.costs,
                     dcache, pcache, alloc);
        if (cfg.cold_caches_after_load) {
          dcache.reset();
          pcache.reset();
        }
      }
      OsStackCounters counters;
      translated = translate_os(requests, stack.fs, cfg.costs, dcache, pcache,
                                alloc, &counters);
      result.os_counters = counters;
      result.caches.dcache_hits = dcache.hits();
      result.caches.dcache_misses = dcache.misses();
      result.caches.pcache_hits = pcache.hits();
      result.caches.pcache_misses = pcache.misses();
      result.caches.pcache_evictions = pcache.evictions();
      break;
    }
    case StackProfile::Kind::object_drive: {
      OidMap oid(stack.drive, cfg.device_capacity_sectors);
      if (needs_load)
        (void)translate_od(load_requests(workload, cluster), stack.drive, oid);
      translated = translate_od(requests, stack.drive, oid);
      break;
    }
  }

  Trace replayed = replay(translated, device, cfg.costs);
  finish_result(result, replayed, to_string(workload.kind), workload.seed,
                stack.name(), device);
  result.meta["objects"] = std::to_string(workload.object_count);
  result.meta["object_size"] = std::to_string(workload.object_size);
  result.meta["threads"] = std::to_string(workload.thread_count);
  if (workload.key_distribution == KeyDist::zipfian) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", workload.zipf_theta);
    result.meta["zipf_theta"] = buf;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", workload.think_time_us);
  result.meta["think_time_us"] = buf;
  if (stack.kind == StackProfile::Kind::object_drive)
    result.meta["od_txn_latency"] = "not-modeled";
  return result;
}

ComparisonReport compare(const RunResult& os_result,
                         const RunResult& od_result) {
  for (const char* key : {"workload", "seed", "device", "objects"}) {
    auto a = os_result.meta.find(key), b = od_result.meta.find(key);
    std::string av = a == os_result.meta.end() ? "" : a->second;
    std::string bv = b == od_result.meta.end() ? "" : b->second;
    if (av != bv)
      throw error(std::string("compare: mismatched ") + key + " ('" + av +
                  "' vs '" + bv + "')");
  }
  ComparisonReport rep;
  rep.os_total_us = os_result.total_time_us;
  rep.od_total_us = od_result.total_time_us;
  rep.savings_fraction =
      rep.os_total_us > 0 ? 1.0 - rep.od_total_us / rep.os_total_us : 0.0;
  for (int t = 0; t < 3; ++t) {
    rep.per_tag_delta_us[t] =
        os_result.per_tag_latency_us[t] - od_result.per_tag_latency_us[t];
    if (rep.os_total_us > 0) {
      rep.os_share_own[t] = os_result.per_tag_latency_us[t] / rep.os_total_us;
      rep.os_share_global[t] = rep.os_share_own[t];
      rep.od_share_global[t] =
          od_result.per_tag_latency_us[t] / rep.os_total_us;
    }
    if (rep.od_total_us > 0)
      rep.od_share_own[t] = od_result.per_tag_latency_us[t] / rep.od_total_us;
  }
  rep.meta = os_result.meta;
  rep.meta["os_stack"] = os_result.meta.count("stack")
                             ? os_result.meta.at("stack")
                             : "";
  rep.meta["od_stack"] = od_result.meta.count("stack")
                             ? od_result.meta.at("stack")
                             : "";
  rep.meta.erase("stack");
  return rep;
}

RunResult duic_run(StackProfile::Kind kind, std::uint64_t request_bytes,
                   std::uint32_t threads, std::uint64_t bytes_per_thread,
                   const DeviceProfile& device, const SimConfig& cfg) {
  if (request_bytes == 0 || threads == 0 || bytes_per_thread == 0)
    throw error("duic_run: sizes and thread count must be > 0");
  std::vector<ChunkRequest> requests;
  requests.reserve(threads);
  for (std::uint32_t i = 0; i < threads; ++i) {
    ChunkRequest r;
    r.ts_us = 0.0;
    r.kind = OpKind::put;
    r.key = "bench" + std::to_string(i);
    r.bytes = bytes_per_thread;
    r.thread_id = i;
    requests.push_back(std::move(r));
  }

  RunResult result;
  Trace translated;
  std::string stack_name;
  if (kind == StackProfile::Kind::raw_block) {
    RawModel raw(RawProfile{request_bytes}, cfg.device_capacity_sectors,
                 cfg.costs);
    translated = raw.translate(requests);
    stack_name = "raw-block";
  } else if (kind == StackProfile::Kind::os_fs) {
    FsProfile fs = FsProfile::ag_extent();
    fs.delayed_alloc_window = request_bytes;  // write-call granularity
    DcacheModel dcache(cfg.dcache_entries);
    PageCacheModel pcache(cfg.pcache_pages, cfg.dirty_ratio_threshold);
    AllocatorState alloc(fs, cfg.device_capacity_sectors);
    OsStackCounters counters;
    translated = translate_os(requests, fs, cfg.costs, dcache, pcache, alloc,
                              &counters);
    result.os_counters = counters;
    stack_name = "os-fs:ag-extent";
  } else {
    throw error("duic_run: only raw-block and os-fs are meaningful here");
  }

  Trace replayed = replay(translated, device, cfg.costs);
  finish_result(result, replayed, "duic-seq-write", 0, stack_name, device);
  result.meta["request_bytes"] = std::to_string(request_bytes);
  result.meta["threads"] = std::to_string(threads);
  return result;
}

}  // namespace iostack
