#include "iostack/report.hpp"

#include <fstream>

#include <json.hpp>

namespace iostack {

namespace {

using nlohmann::ordered_json;

ordered_json chains_json(const ChainStats& c) {
  ordered_json j;
  j["chain_count"] = c.chains.size();
  j["total_bytes"] = c.total_bytes;
  j["nts_bytes"] = c.nts_bytes;
  j["count_ge_nts_fraction"] = c.count_ge_nts_fraction;
  j["byte_ge_nts_fraction"] = c.byte_ge_nts_fraction;
  std::uint64_t max_chain = 0;
  for (auto b : c.chains) max_chain = std::max(max_chain, b);
  j["max_chain_bytes"] = max_chain;
  return j;
}

ordered_json tag_triple(const double v[3]) {
  return ordered_json{{"od", v[0]}, {"om", v[1]}, {"fsm", v[2]}};
}

}  // namespace

std::string run_result_json(const RunResult& r) {
  ordered_json j;
  j["meta"] = r.meta;
  j["total_time_us"] = r.total_time_us;
  j["wall_time_us"] = r.wall_time_us;
  j["device_busy_us"] = r.device_busy_us;
  j["throughput_mbps"] = r.throughput_mbps();
  for (int t = 0; t < 3; ++t) {
    const char* name = t == 0 ? "od" : t == 1 ? "om" : "fsm";
    j["tags"][name]["latency_us"] = r.per_tag_latency_us[t];
    j["tags"][name]["bytes"] = r.per_tag_bytes[t];
    j["tags"][name]["events"] = r.per_tag_count[t];
  }
  j["fsm_bytes"] = r.per_tag_bytes[std::size_t(IoTag::fsm)];
  j["chains"]["od"] = chains_json(r.chains_od);
  j["chains"]["all"] = chains_json(r.chains_all);
  j["layers"]["vfs_us"] = r.layers.totals_us[0];
  j["layers"]["fs_us"] = r.layers.totals_us[1];
  j["layers"]["block_us"] = r.layers.totals_us[2];
  j["layers"]["device_us"] = r.layers.totals_us[3];
  j["layers"]["kernel_share"] = r.layers.kernel_share();
  j["caches"]["dcache_hits"] = r.caches.dcache_hits;
  j["caches"]["dcache_misses"] = r.caches.dcache_misses;
  j["caches"]["pcache_hits"] = r.caches.pcache_hits;
  j["caches"]["pcache_misses"] = r.caches.pcache_misses;
  j["caches"]["pcache_evictions"] = r.caches.pcache_evictions;
  j["events"] = r.trace.events.size();
  return j.dump(2) + "\n";
}

std::string comparison_json(const ComparisonReport& rep) {
  ordered_json j;
  j["meta"] = rep.meta;
  j["os_total_us"] = rep.os_total_us;
  j["od_total_us"] = rep.od_total_us;
  j["savings_fraction"] = rep.savings_fraction;
  j["per_tag_delta_us"] = tag_triple(rep.per_tag_delta_us);
  j["normalized"]["per_workload"]["os"] = tag_triple(rep.os_share_own);
  j["normalized"]["per_workload"]["od"] = tag_triple(rep.od_share_own);
  j["normalized"]["global"]["os"] = tag_triple(rep.os_share_global);
  j["normalized"]["global"]["od"] = tag_triple(rep.od_share_global);
  return j.dump(2) + "\n";
}

std::string cdf_csv(const SizeCdf& cdf) {
  std::string out = "size_bytes,cumulative_fraction\n";
  char buf[64];
  for (const auto& [size, frac] : cdf.points) {
    std::snprintf(buf, sizeof(buf), "%llu,%.6f\n",
                  static_cast<unsigned long long>(size), frac);
    out += buf;
  }
  return out;
}

std::string heatmap_csv(const Heatmap& hm) {
  std::string out = "time_bin,lba_bin,count\n";
  char buf[64];
  for (std::uint32_t t = 0; t < hm.time_bins; ++t) {
    for (std::uint32_t l = 0; l < hm.lba_bins; ++l) {
      std::snprintf(buf, sizeof(buf), "%u,%u,%llu\n", t, l,
                    static_cast<unsigned long long>(hm.at(t, l)));
      out += buf;
    }
  }
  return out;
}

std::string chains_csv(const ChainStats& chains) {
  std::string out = "chain_index,bytes\n";
  char buf[64];
  for (std::size_t i = 0; i < chains.chains.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%llu\n", i,
                  static_cast<unsigned long long>(chains.chains[i]));
    out += buf;
  }
  return out;
}

std::string breakdown_csv(const ComparisonReport& rep) {
  std::string out = "stack,normalization,od,om,fsm\n";
  char buf[128];
  auto row = [&](const char* stack, const char* norm, const double v[3]) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f\n", stack, norm,
                  v[0], v[1], v[2]);
    out += buf;
  };
  row("os", "per_workload", rep.os_share_own);
  row("od", "per_workload", rep.od_share_own);
  row("os", "global", rep.os_share_global);
  row("od", "global", rep.od_share_global);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw error("write failure on '" + path + "'");
}

}  // namespace iostack
