#pragma once

#include <random>

#include "iostack/trace.hpp"

namespace iostack::testutil {

/// Random but ordered trace for round-trip and oracle tests.
inline Trace make_random_trace(std::mt19937_64& rng, std::size_t n,
                               std::uint64_t capacity_sectors,
                               bool with_latency = false) {
  Trace t;
  t.device_capacity_sectors = capacity_sectors;
  std::uniform_int_distribution<std::uint64_t> lba(0, capacity_sectors - 64);
  std::uniform_int_distribution<std::uint32_t> len(1, 64);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> tag(0, 2);
  std::uniform_int_distribution<std::uint32_t> thread(0, 7);
  std::uniform_real_distribution<double> us(0.0, 50.0);
  double ts = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    IoEvent e;
    ts += us(rng) / 8.0;
    e.submit_ts_us = double(std::int64_t(ts * 1000)) / 1000.0;
    e.op = coin(rng) ? IoOp::write : IoOp::read;
    e.lba = lba(rng);
    e.len = len(rng);
    e.tag = IoTag(tag(rng));
    e.thread_id = thread(rng);
    if (with_latency) {
      e.lat.vfs_us = double(std::int64_t(us(rng) * 1000)) / 1000.0;
      e.lat.fs_us = double(std::int64_t(us(rng) * 1000)) / 1000.0;
      e.lat.block_us = double(std::int64_t(us(rng) * 1000)) / 1000.0;
      e.lat.device_us = double(std::int64_t(us(rng) * 1000)) / 1000.0;
      e.complete_ts_us = e.submit_ts_us + e.lat.sum();
    }
    t.events.push_back(e);
  }
  t.sort_events();
  return t;
}

inline bool events_equal(const IoEvent& a, const IoEvent& b) {
  return a.submit_ts_us == b.submit_ts_us && a.op == b.op && a.lba == b.lba &&
         a.len == b.len && a.tag == b.tag && a.thread_id == b.thread_id &&
         a.lat.vfs_us == b.lat.vfs_us && a.lat.fs_us == b.lat.fs_us &&
         a.lat.block_us == b.lat.block_us &&
         a.lat.device_us == b.lat.device_us &&
         a.complete_ts_us == b.complete_ts_us;
}

inline bool traces_equal(const Trace& a, const Trace& b) {
  if (a.device_capacity_sectors != b.device_capacity_sectors) return false;
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    if (!events_equal(a.events[i], b.events[i])) return false;
  return true;
}

}  // namespace iostack::testutil
