#include "iostack/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace iostack {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

IniFile IniFile::parse_text(const std::string& text,
                            const std::string& origin) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw error(origin + ":" + std::to_string(lineno) +
                    ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      ini.sections_[section];
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw error(origin + ":" + std::to_string(lineno) +
                  ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw error(origin + ":" + std::to_string(lineno) + ": empty key");
    ini.sections_[section][key] = value;
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) != 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

namespace {

class Binder {
 public:
  explicit Binder(const IniFile& ini) : ini_(ini) {}

  void u64(const std::string& sec, const std::string& key, std::uint64_t& v) {
    bind(sec, key, [&v](const std::string& s) {
      v = std::strtoull(s.c_str(), nullptr, 10);
    });
  }
  void u32(const std::string& sec, const std::string& key, std::uint32_t& v) {
    bind(sec, key, [&v](const std::string& s) {
      v = std::uint32_t(std::strtoul(s.c_str(), nullptr, 10));
    });
  }
  void sz(const std::string& sec, const std::string& key, std::size_t& v) {
    bind(sec, key, [&v](const std::string& s) {
      v = std::size_t(std::strtoull(s.c_str(), nullptr, 10));
    });
  }
  void f64(const std::string& sec, const std::string& key, double& v) {
    bind(sec, key, [&v](const std::string& s) { v = std::strtod(s.c_str(), nullptr); });
  }
  void flag(const std::string& sec, const std::string& key, bool& v) {
    bind(sec, key, [&v](const std::string& s) { v = s == "1" || s == "true"; });
  }

  // Every key consumed by a bind call is recorded; anything left over
  // in the file is a config error.
  void check_exhausted() const {
    for (const auto& [sec, kv] : ini_.sections()) {
      for (const auto& [key, value] : kv) {
        if (!seen_.count(sec + "\n" + key))
          throw error("config: unknown key '" + key + "' in section [" + sec +
                      "]");
      }
    }
  }

 private:
  void bind(const std::string& sec, const std::string& key,
            const std::function<void(const std::string&)>& apply) {
    seen_.insert(sec + "\n" + key);
    if (ini_.has(sec, key)) apply(ini_.get(sec, key, ""));
  }

  const IniFile& ini_;
  std::set<std::string> seen_;
};

void bind_fs(Binder& b, const std::string& sec, FsProfile& fs) {
  b.u32(sec, "metadata_node_bytes", fs.metadata_node_bytes);
  b.u32(sec, "allocation_groups", fs.allocation_groups);
  b.u64(sec, "delayed_alloc_window", fs.delayed_alloc_window);
  b.u32(sec, "journal_write_bytes", fs.journal_write_bytes);
  b.u64(sec, "extent_max_bytes", fs.extent_max_bytes);
  b.u32(sec, "inode_entry_bytes", fs.inode_entry_bytes);
  b.u64(sec, "metadata_band_bytes", fs.metadata_band_bytes);
  b.u64(sec, "journal_region_bytes", fs.journal_region_bytes);
  b.flag(sec, "fsync_per_put", fs.fsync_per_put);
}

}  // namespace

void Config::apply(const IniFile& ini) {
  Binder b(ini);
  b.u32("cluster", "data_shards", cluster.data_shards);
  b.u32("cluster", "parity_shards", cluster.parity_shards);
  b.u32("cluster", "num_osds", cluster.num_osds);
  b.u32("cluster", "num_nodes", cluster.num_nodes);

  b.u64("workload", "object_size", workload.object_size);
  b.u64("workload", "objects", workload.object_count);
  b.u32("workload", "threads", workload.thread_count);
  b.u64("workload", "seed", workload.seed);
  b.f64("workload", "zipf_theta", workload.zipf_theta);
  b.f64("workload", "think_time_us", workload.think_time_us);

  b.u64("sim", "capacity_sectors", sim.device_capacity_sectors);
  b.sz("sim", "dcache_entries", sim.dcache_entries);
  b.sz("sim", "pcache_pages", sim.pcache_pages);
  b.f64("sim", "dirty_ratio_threshold", sim.dirty_ratio_threshold);
  b.flag("sim", "cold_caches_after_load", sim.cold_caches_after_load);

  b.f64("costs", "lookup_hit_us", sim.costs.lookup_hit_us);
  b.f64("costs", "lookup_miss_us", sim.costs.lookup_miss_us);
  b.f64("costs", "syscall_us", sim.costs.syscall_us);
  b.f64("costs", "page_copy_us", sim.costs.page_copy_us);
  b.f64("costs", "alloc_touch_us", sim.costs.alloc_touch_us);
  b.f64("costs", "meta_update_us", sim.costs.meta_update_us);
  b.f64("costs", "bio_us", sim.costs.bio_us);
  b.f64("costs", "queue_wait_us", sim.costs.queue_wait_us);
  b.u32("costs", "queue_depth", sim.costs.queue_depth);

  bind_fs(b, "fs.ag-extent", fs_ag);
  bind_fs(b, "fs.simple-extent", fs_simple);

  b.u64("drive", "value_cap_bytes", drive.value_cap_bytes);
  b.u32("drive", "hash_levels", drive.hash_levels);
  b.f64("drive", "kv_lib_cost_us", drive.kv_lib_cost_us);
  b.f64("drive", "indevice_index_cost_us", drive.indevice_index_cost_us);
  b.u32("drive", "iterator_batch", drive.iterator_batch);
  b.u32("drive", "iterator_entry_bytes", drive.iterator_entry_bytes);
  b.u32("drive", "om_pair_bytes", drive.om_pair_bytes);
  b.u32("drive", "oid_bucket_count", drive.oid_bucket_count);
  b.u32("drive", "oids_per_bucket", drive.oids_per_bucket);
  b.u64("drive", "index_region_bytes", drive.index_region_bytes);
  b.u64("drive", "nts_bytes", drive.nts_bytes);

  b.f64("device.hdd", "avg_seek_us", hdd.avg_seek_us);
  b.f64("device.hdd", "rpm", hdd.rpm);
  b.f64("device.hdd", "transfer_mbps", hdd.transfer_mbps);
  b.f64("device.hdd", "per_cmd_us", hdd.per_cmd_us);
  b.u64("device.hdd", "nts_bytes", hdd.nts_bytes);

  b.f64("device.ssd", "per_cmd_us", ssd.per_cmd_us);
  b.f64("device.ssd", "transfer_mbps", ssd.transfer_mbps);
  b.u32("device.ssd", "channel_parallelism", ssd.channel_parallelism);
  b.u64("device.ssd", "nts_bytes", ssd.nts_bytes);

  b.u64("raw", "io_bytes", raw.io_bytes);
  b.u64("duic", "bytes_per_thread", duic_bytes_per_thread);

  b.check_exhausted();
}

std::string Config::dump() const {
  std::ostringstream o;
  o << "[cluster]\n"
    << "data_shards = " << cluster.data_shards << "\n"
    << "parity_shards = " << cluster.parity_shards << "\n"
    << "num_osds = " << cluster.num_osds << "\n"
    << "num_nodes = " << cluster.num_nodes << "\n\n";
  o << "[workload]\n"
    << "object_size = " << workload.object_size << "\n"
    << "objects = " << workload.object_count << "\n"
    << "threads = " << workload.thread_count << "\n"
    << "seed = " << workload.seed << "\n"
    << "zipf_theta = " << workload.zipf_theta << "\n"
    << "think_time_us = " << workload.think_time_us << "\n\n";
  o << "[sim]\n"
    << "capacity_sectors = " << sim.device_capacity_sectors << "\n"
    << "dcache_entries = " << sim.dcache_entries << "\n"
    << "pcache_pages = " << sim.pcache_pages << "\n"
    << "dirty_ratio_threshold = " << sim.dirty_ratio_threshold << "\n"
    << "cold_caches_after_load = " << (sim.cold_caches_after_load ? 1 : 0)
    << "\n\n";
  o << "[costs]\n"
    << "lookup_hit_us = " << sim.costs.lookup_hit_us << "\n"
    << "lookup_miss_us = " << sim.costs.lookup_miss_us << "\n"
    << "syscall_us = " << sim.costs.syscall_us << "\n"
    << "page_copy_us = " << sim.costs.page_copy_us << "\n"
    << "alloc_touch_us = " << sim.costs.alloc_touch_us << "\n"
    << "meta_update_us = " << sim.costs.meta_update_us << "\n"
    << "bio_us = " << sim.costs.bio_us << "\n"
    << "queue_wait_us = " << sim.costs.queue_wait_us << "\n"
    << "queue_depth = " << sim.costs.queue_depth << "\n\n";
  auto dump_fs = [&o](const char* name, const FsProfile& fs) {
    o << "[" << name << "]\n"
      << "metadata_node_bytes = " << fs.metadata_node_bytes << "\n"
      << "allocation_groups = " << fs.allocation_groups << "\n"
      << "delayed_alloc_window = " << fs.delayed_alloc_window << "\n"
      << "journal_write_bytes = " << fs.journal_write_bytes << "\n"
      << "extent_max_bytes = " << fs.extent_max_bytes << "\n"
      << "inode_entry_bytes = " << fs.inode_entry_bytes << "\n"
      << "metadata_band_bytes = " << fs.metadata_band_bytes << "\n"
      << "journal_region_bytes = " << fs.journal_region_bytes << "\n"
      << "fsync_per_put = " << (fs.fsync_per_put ? 1 : 0) << "\n\n";
  };
  dump_fs("fs.ag-extent", fs_ag);
  dump_fs("fs.simple-extent", fs_simple);
  o << "[drive]\n"
    << "value_cap_bytes = " << drive.value_cap_bytes << "\n"
    << "hash_levels = " << drive.hash_levels << "\n"
    << "kv_lib_cost_us = " << drive.kv_lib_cost_us << "\n"
    << "indevice_index_cost_us = " << drive.indevice_index_cost_us << "\n"
    << "iterator_batch = " << drive.iterator_batch << "\n"
    << "iterator_entry_bytes = " << drive.iterator_entry_bytes << "\n"
    << "om_pair_bytes = " << drive.om_pair_bytes << "\n"
    << "oid_bucket_count = " << drive.oid_bucket_count << "\n"
    << "oids_per_bucket = " << drive.oids_per_bucket << "\n"
    << "index_region_bytes = " << drive.index_region_bytes << "\n"
    << "nts_bytes = " << drive.nts_bytes << "\n\n";
  o << "[device.hdd]\n"
    << "avg_seek_us = " << hdd.avg_seek_us << "\n"
    << "rpm = " << hdd.rpm << "\n"
    << "transfer_mbps = " << hdd.transfer_mbps << "\n"
    << "per_cmd_us = " << hdd.per_cmd_us << "\n"
    << "nts_bytes = " << hdd.nts_bytes << "\n\n";
  o << "[device.ssd]\n"
    << "per_cmd_us = " << ssd.per_cmd_us << "\n"
    << "transfer_mbps = " << ssd.transfer_mbps << "\n"
    << "channel_parallelism = " << ssd.channel_parallelism << "\n"
    << "nts_bytes = " << ssd.nts_bytes << "\n\n";
  o << "[raw]\n"
    << "io_bytes = " << raw.io_bytes << "\n\n";
  o << "[duic]\n"
    << "bytes_per_thread = " << duic_bytes_per_thread << "\n";
  return o.str();
}

FsProfile Config::fs_profile(const std::string& name) const {
  if (name == "ag-extent") return fs_ag;
  if (name == "simple-extent") return fs_simple;
  throw error("unknown fs profile '" + name + "' (want ag-extent|simple-extent)");
}

DeviceProfile Config::device_profile(const std::string& name) const {
  if (name == "hdd") return hdd;
  if (name == "ssd") return ssd;
  throw error("unknown device '" + name + "' (want hdd|ssd)");
}

Config load_config(const std::string& path) {
  Config cfg;
  const char* env = std::getenv("IOSTACK_SIM_CONFIG");
  if (env && *env) cfg.apply(IniFile::parse_file(env));
  if (!path.empty()) cfg.apply(IniFile::parse_file(path));
  return cfg;
}

}  // namespace iostack
