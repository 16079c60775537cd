#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace iostack {

constexpr std::uint32_t kSectorBytes = 512;
constexpr std::uint64_t kDefaultNtsBytes = 4ull * 1024 * 1024;

class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Source of a device-level IO: object data, object metadata, or
/// filesystem metadata.
enum class IoTag : std::uint8_t { od, om, fsm };

enum class IoOp : std::uint8_t { read, write };

const char* to_string(IoTag tag);
const char* to_string(IoOp op);
IoTag tag_from_string(const std::string& s);

/// Per-event latency split across the four modeled layers, microseconds.
struct LayerLat {
  double vfs_us = 0.0;
  double fs_us = 0.0;
  double block_us = 0.0;
  double device_us = 0.0;

  double sum() const { return vfs_us + fs_us + block_us + device_us; }
};

/// One device-level IO. LBAs and lengths are in 512-byte sectors,
/// timestamps in microseconds since trace start.
struct IoEvent {
  double submit_ts_us = 0.0;
  IoOp op = IoOp::write;
  std::uint64_t lba = 0;
  std::uint32_t len = 0;  // sectors, > 0
  IoTag tag = IoTag::od;
  std::uint32_t thread_id = 0;
  LayerLat lat;
  double complete_ts_us = 0.0;  // 0 until replayed

  // How many raw IOs were coalesced into this event. In-memory only,
  // not part of the serialized format.
  std::uint32_t merged_raw = 1;

  std::uint64_t bytes() const { return std::uint64_t(len) * kSectorBytes; }
  std::uint64_t end_lba() const { return lba + len; }
};

struct Trace {
  std::vector<IoEvent> events;
  std::uint64_t device_capacity_sectors = 0;
  std::map<std::string, std::string> meta;

  // Sorts by (submit_ts, thread_id, lba); returns true when the order
  // actually changed.
  bool sort_events();
  bool is_sorted() const;

  std::uint64_t nts_bytes() const;
  void bump_counter(const std::string& key, std::uint64_t delta = 1);
};

/// Reads the native line-oriented CSV format. Rows out of order are
/// re-sorted and counted in meta["resort_warnings"].
Trace parse_trace(const std::string& path);

/// Writes header plus one row per event. Byte-deterministic for equal
/// inputs.
void emit_trace(const Trace& trace, const std::string& path);

std::string format_trace(const Trace& trace);
Trace parse_trace_text(const std::string& text, const std::string& origin);

/// Imports blkparse default-format text. Q lines become submissions,
/// C lines complete them by (lba, len, op) in FIFO order; everything
/// else is skipped. `tag_file` optionally carries one OD|OM|FSM token
/// per Q line; absent or short files leave the OD default in place.
Trace parse_blkparse_text(const std::string& path,
                          std::uint64_t capacity_sectors,
                          const std::string& tag_file = "");

}  // namespace iostack
