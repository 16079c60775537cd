#include "iostack/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace iostack {

void ClusterSpec::validate() const {
  if (data_shards < 1) throw error("cluster: data_shards must be >= 1");
  if (num_osds < data_shards + parity_shards)
    throw error("cluster: num_osds must cover data + parity shards");
  if (num_nodes < 1) throw error("cluster: num_nodes must be >= 1");
  if (num_osds % num_nodes != 0)
    throw error("cluster: num_osds must be divisible by num_nodes");
}

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::w_o: return "w-o";
    case WorkloadKind::r_o: return "r-o";
    case WorkloadKind::r_w: return "r-w";
    case WorkloadKind::enumerate: return "enum";
  }
  return "?";
}

WorkloadKind workload_kind_from_string(const std::string& s) {
  if (s == "w-o") return WorkloadKind::w_o;
  if (s == "r-o") return WorkloadKind::r_o;
  if (s == "r-w") return WorkloadKind::r_w;
  if (s == "enum") return WorkloadKind::enumerate;
  throw error("unknown workload kind '" + s + "' (want w-o|r-o|r-w|enum)");
}

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::put: return "PUT";
    case OpKind::get: return "GET";
    case OpKind::list: return "LIST";
  }
  return "?";
}

void WorkloadSpec::apply_kind_defaults() {
  switch (kind) {
    case WorkloadKind::w_o:
      put_pct = 95;
      get_pct = 5;
      key_distribution = KeyDist::uniform;
      break;
    case WorkloadKind::r_o:
      put_pct = 5;
      get_pct = 95;
      key_distribution = KeyDist::zipfian;
      break;
    case WorkloadKind::r_w:
      put_pct = 50;
      get_pct = 50;
      key_distribution = KeyDist::zipfian;
      break;
    case WorkloadKind::enumerate:
      put_pct = 0;
      get_pct = 0;
      break;
  }
}

void WorkloadSpec::validate() const {
  if (object_size == 0) throw error("workload: object_size must be > 0");
  if (object_count == 0) throw error("workload: object_count must be > 0");
  if (thread_count == 0) throw error("workload: thread_count must be > 0");
  if (key_distribution == KeyDist::zipfian &&
      (zipf_theta <= 0.0 || zipf_theta >= 1.0))
    throw error("workload: zipfian theta must lie in (0,1)");
  if (kind != WorkloadKind::enumerate && put_pct + get_pct != 100)
    throw error("workload: put/get percentages must sum to 100");
}

double chunk_object_exact(std::uint64_t object_bytes,
                          const ClusterSpec& cluster) {
  cluster.validate();
  if (object_bytes == 0) throw error("chunk_object: object size must be > 0");
  long double num = static_cast<long double>(object_bytes) *
                    (cluster.data_shards + cluster.parity_shards);
  long double den = static_cast<long double>(cluster.data_shards) *
                    cluster.num_osds;
  return static_cast<double>(num / den);
}

std::uint64_t chunk_object(std::uint64_t object_bytes,
                           const ClusterSpec& cluster) {
  cluster.validate();
  if (object_bytes == 0) throw error("chunk_object: object size must be > 0");
  // Exact integer ceiling of O*(D+P)/(D*D_i), then round up to 4 KiB.
  unsigned __int128 num = static_cast<unsigned __int128>(object_bytes) *
                          (cluster.data_shards + cluster.parity_shards);
  std::uint64_t den =
      std::uint64_t(cluster.data_shards) * cluster.num_osds;
  std::uint64_t exact_ceil =
      static_cast<std::uint64_t>((num + den - 1) / den);
  return (exact_ceil + 4095) / 4096 * 4096;
}

ZipfianPicker::ZipfianPicker(std::uint64_t n, double theta) {
  if (n == 0) throw error("zipfian: empty key universe");
  cdf_.resize(n);
  double acc = 0.0;
  for (std::uint64_t r = 1; r <= n; ++r) {
    acc += 1.0 / std::pow(double(r), theta);
    cdf_[r - 1] = acc;
  }
  for (auto& v : cdf_) v /= acc;
}

std::uint64_t ZipfianPicker::pick(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), x);
  if (it == cdf_.end()) return cdf_.size() - 1;
  return static_cast<std::uint64_t>(it - cdf_.begin());
}

std::string object_key(std::uint64_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "obj%010llu",
                static_cast<unsigned long long>(index));
  return buf;
}

std::vector<ObjectOp> generate_workload(const WorkloadSpec& spec,
                                        const ClusterSpec& cluster) {
  spec.validate();
  cluster.validate();

  std::vector<ObjectOp> ops;
  if (spec.kind == WorkloadKind::enumerate) {
    ObjectOp op;
    op.ts_us = 0.0;
    op.kind = OpKind::list;
    op.key = "*";
    op.size = 0;
    op.thread_id = 0;
    ops.push_back(op);
    return ops;
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::uint32_t> pct(0, 99);
  std::uniform_int_distribution<std::uint64_t> uni(0, spec.object_count - 1);
  std::optional<ZipfianPicker> zipf;
  if (spec.key_distribution == KeyDist::zipfian)
    zipf.emplace(spec.object_count, spec.zipf_theta);

  // W-O starts from an empty namespace, so GET keys are confined to
  // keys already written in this stream.
  bool prepopulated = spec.kind != WorkloadKind::w_o;
  std::vector<std::uint64_t> written;
  std::vector<bool> written_set(prepopulated ? 0 : spec.object_count, false);

  std::vector<double> thread_clock(spec.thread_count, 0.0);
  ops.reserve(spec.object_count);
  for (std::uint64_t i = 0; i < spec.object_count; ++i) {
    std::uint32_t thread = static_cast<std::uint32_t>(i % spec.thread_count);
    ObjectOp op;
    op.thread_id = thread;
    bool is_put = pct(rng) < spec.put_pct;
    if (!prepopulated && !is_put && written.empty()) is_put = true;
    std::uint64_t key_index;
    if (is_put) {
      op.kind = OpKind::put;
      key_index = zipf ? zipf->pick(rng) : uni(rng);
      if (!prepopulated && !written_set[key_index]) {
        written_set[key_index] = true;
        written.push_back(key_index);
      }
    } else {
      op.kind = OpKind::get;
      if (prepopulated) {
        key_index = zipf ? zipf->pick(rng) : uni(rng);
      } else {
        std::uniform_int_distribution<std::size_t> pickw(0, written.size() - 1);
        key_index = written[pickw(rng)];
      }
    }
    op.key = object_key(key_index);
    op.size = spec.object_size;
    op.ts_us = thread_clock[thread] + double(i);
    thread_clock[thread] += spec.think_time_us;
    ops.push_back(std::move(op));
  }
  return ops;
}

std::optional<ChunkRequest> shard_to_osd(const ObjectOp& op,
                                         const ClusterSpec& cluster,
                                         std::uint32_t osd_index) {
  cluster.validate();
  if (osd_index >= cluster.num_osds)
    throw error("shard_to_osd: osd_index out of range");
  ChunkRequest req;
  req.ts_us = op.ts_us;
  req.kind = op.kind;
  req.key = op.key;
  req.thread_id = op.thread_id;
  req.bytes = op.kind == OpKind::list ? 0 : chunk_object(op.size, cluster);
  return req;
}

std::string format_ops(const std::vector<ObjectOp>& ops) {
  std::string out = "# iostack-ops v1\n";
  char buf[64];
  for (const auto& op : ops) {
    std::snprintf(buf, sizeof(buf), "%.3f,", op.ts_us);
    out += buf;
    out += to_string(op.kind);
    out += ',';
    out += op.key;
    out += ',';
    out += std::to_string(op.size);
    out += ',';
    out += std::to_string(op.thread_id);
    out += '\n';
  }
  return out;
}

}  // namespace iostack
