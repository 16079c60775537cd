#include "iostack/trace.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <fstream>
#include <sstream>

namespace iostack {

namespace {

constexpr const char* kHeaderMagic = "# iostack-trace v1 capacity_sectors=";

std::string fmt_us(double us) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", us);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line,
                             std::size_t column, const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ":" << column << ": " << what;
  throw error(os.str());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double parse_double(const std::string& origin, std::size_t line,
                    std::size_t col, const std::string& field) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    parse_fail(origin, line, col, "expected number, got '" + field + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& origin, std::size_t line,
                        std::size_t col, const std::string& field) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size())
    parse_fail(origin, line, col, "expected integer, got '" + field + "'");
  return v;
}

}  // namespace

const char* to_string(IoTag tag) {
  switch (tag) {
    case IoTag::od: return "OD";
    case IoTag::om: return "OM";
    case IoTag::fsm: return "FSM";
  }
  return "?";
}

const char* to_string(IoOp op) { return op == IoOp::read ? "R" : "W"; }

IoTag tag_from_string(const std::string& s) {
  if (s == "OD") return IoTag::od;
  if (s == "OM") return IoTag::om;
  if (s == "FSM") return IoTag::fsm;
  throw error("unknown IO tag '" + s + "'");
}

bool Trace::is_sorted() const {
  return std::is_sorted(events.begin(), events.end(),
                        [](const IoEvent& a, const IoEvent& b) {
                          if (a.submit_ts_us != b.submit_ts_us)
                            return a.submit_ts_us < b.submit_ts_us;
                          if (a.thread_id != b.thread_id)
                            return a.thread_id < b.thread_id;
                          return a.lba < b.lba;
                        });
}

bool Trace::sort_events() {
  if (is_sorted()) return false;
  std::stable_sort(events.begin(), events.end(),
                   [](const IoEvent& a, const IoEvent& b) {
                     if (a.submit_ts_us != b.submit_ts_us)
                       return a.submit_ts_us < b.submit_ts_us;
                     if (a.thread_id != b.thread_id)
                       return a.thread_id < b.thread_id;
                     return a.lba < b.lba;
                   });
  return true;
}

std::uint64_t Trace::nts_bytes() const {
  auto it = meta.find("nts_bytes");
  if (it == meta.end()) return kDefaultNtsBytes;
  return std::strtoull(it->second.c_str(), nullptr, 10);
}

void Trace::bump_counter(const std::string& key, std::uint64_t delta) {
  auto it = meta.find(key);
  std::uint64_t cur = 0;
  if (it != meta.end()) cur = std::strtoull(it->second.c_str(), nullptr, 10);
  meta[key] = std::to_string(cur + delta);
}

std::string format_trace(const Trace& trace) {
  std::string out;
  out.reserve(64 + trace.events.size() * 72);
  out += kHeaderMagic;
  out += std::to_string(trace.device_capacity_sectors);
  for (const auto& [k, v] : trace.meta) {
    out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  out += '\n';
  for (const IoEvent& e : trace.events) {
    out += fmt_us(e.submit_ts_us);
    out += ',';
    out += to_string(e.op);
    out += ',';
    out += std::to_string(e.lba);
    out += ',';
    out += std::to_string(e.len);
    out += ',';
    out += to_string(e.tag);
    out += ',';
    out += std::to_string(e.thread_id);
    out += ',';
    out += fmt_us(e.lat.vfs_us);
    out += ',';
    out += fmt_us(e.lat.fs_us);
    out += ',';
    out += fmt_us(e.lat.block_us);
    out += ',';
    out += fmt_us(e.lat.device_us);
    out += ',';
    out += fmt_us(e.complete_ts_us);
    out += '\n';
  }
  return out;
}

void emit_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open '" + path + "' for writing");
  out << format_trace(trace);
  if (!out) throw error("write failure on '" + path + "'");
}

Trace parse_trace_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw error(origin + ": empty file, missing header");
  if (line.rfind("# iostack-trace ", 0) != 0)
    parse_fail(origin, 1, 1, "missing '# iostack-trace' header");
  if (line.rfind(kHeaderMagic, 0) != 0)
    parse_fail(origin, 1, 1, "unsupported trace format version");

  Trace trace;
  {
    std::string rest = line.substr(std::strlen(kHeaderMagic));
    auto fields = split(rest, ' ');
    trace.device_capacity_sectors = parse_u64(origin, 1, 1, fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) continue;
      auto eq = fields[i].find('=');
      if (eq == std::string::npos)
        parse_fail(origin, 1, 1, "malformed header key=value '" + fields[i] + "'");
      trace.meta[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 11)
      parse_fail(origin, lineno, 1,
                 "expected 11 columns, got " + std::to_string(f.size()));
    IoEvent e;
    e.submit_ts_us = parse_double(origin, lineno, 1, f[0]);
    if (f[1] == "R")
      e.op = IoOp::read;
    else if (f[1] == "W")
      e.op = IoOp::write;
    else
      parse_fail(origin, lineno, 2, "op must be R or W, got '" + f[1] + "'");
    e.lba = parse_u64(origin, lineno, 3, f[2]);
    e.len = static_cast<std::uint32_t>(parse_u64(origin, lineno, 4, f[3]));
    if (e.len == 0) parse_fail(origin, lineno, 4, "len must be > 0");
    try {
      e.tag = tag_from_string(f[4]);
    } catch (const error&) {
      parse_fail(origin, lineno, 5, "unknown tag '" + f[4] + "'");
    }
    e.thread_id = static_cast<std::uint32_t>(parse_u64(origin, lineno, 6, f[5]));
    e.lat.vfs_us = parse_double(origin, lineno, 7, f[6]);
    e.lat.fs_us = parse_double(origin, lineno, 8, f[7]);
    e.lat.block_us = parse_double(origin, lineno, 9, f[8]);
    e.lat.device_us = parse_double(origin, lineno, 10, f[9]);
    e.complete_ts_us = parse_double(origin, lineno, 11, f[10]);
    if (trace.device_capacity_sectors > 0 &&
        e.lba + e.len > trace.device_capacity_sectors)
      parse_fail(origin, lineno, 3, "event exceeds device capacity");
    trace.events.push_back(e);
  }
  if (trace.sort_events()) trace.bump_counter("resort_warnings");
  return trace;
}

Trace parse_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_text(ss.str(), path);
}

Trace parse_blkparse_text(const std::string& path,
                          std::uint64_t capacity_sectors,
                          const std::string& tag_file) {
  if (capacity_sectors == 0)
    throw error("blkparse import: capacity must be > 0");
  std::ifstream in(path);
  if (!in) throw error("cannot open '" + path + "'");

  std::vector<IoTag> tags;
  if (!tag_file.empty()) {
    std::ifstream tf(tag_file);
    if (!tf) throw error("cannot open tag file '" + tag_file + "'");
    std::string t;
    while (tf >> t) tags.push_back(tag_from_string(t));
  }

  Trace trace;
  trace.device_capacity_sectors = capacity_sectors;
  // Outstanding Q events pending completion, FIFO per (lba, len, op).
  struct Key {
    std::uint64_t lba;
    std::uint32_t len;
    IoOp op;
    bool operator<(const Key& o) const {
      if (lba != o.lba) return lba < o.lba;
      if (len != o.len) return len < o.len;
      return op < o.op;
    }
  };
  std::map<Key, std::deque<std::size_t>> open;

  std::string line;
  std::size_t lineno = 0, q_seen = 0, unmatched_c = 0, skipped = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string dev, action, rwbs, plus;
    unsigned cpu = 0;
    std::uint64_t seq = 0, pid = 0, lba = 0, len = 0;
    double ts_sec = 0.0;
    if (!(ls >> dev >> cpu >> seq >> ts_sec >> pid >> action >> rwbs)) {
      ++skipped;
      continue;
    }
    if (action != "Q" && action != "C") {
      ++skipped;
      continue;
    }
    bool is_write = rwbs.find('W') != std::string::npos;
    bool is_read = rwbs.find('R') != std::string::npos;
    if (is_write == is_read) {  // flush/barrier/discard lines
      ++skipped;
      continue;
    }
    if (!(ls >> lba >> plus >> len) || plus != "+" || len == 0) {
      ++skipped;
      continue;
    }
    IoOp op = is_write ? IoOp::write : IoOp::read;
    Key key{lba, static_cast<std::uint32_t>(len), op};
    if (action == "Q") {
      IoEvent e;
      e.submit_ts_us = ts_sec * 1e6;
      e.op = op;
      e.lba = lba;
      e.len = static_cast<std::uint32_t>(len);
      e.thread_id = static_cast<std::uint32_t>(pid);
      e.tag = q_seen < tags.size() ? tags[q_seen] : IoTag::od;
      ++q_seen;
      open[key].push_back(trace.events.size());
      trace.events.push_back(e);
    } else {
      auto it = open.find(key);
      if (it == open.end() || it->second.empty()) {
        ++unmatched_c;
        continue;
      }
      std::size_t idx = it->second.front();
      it->second.pop_front();
      trace.events[idx].complete_ts_us = ts_sec * 1e6;
      trace.events[idx].lat.device_us =
          trace.events[idx].complete_ts_us - trace.events[idx].submit_ts_us;
    }
  }
  if (trace.events.empty())
    throw error("blkparse import: no parseable Q lines in '" + path + "'");
  trace.meta["source"] = "blkparse";
  if (unmatched_c > 0) trace.meta["unmatched_completions"] = std::to_string(unmatched_c);
  if (skipped > 0) trace.meta["skipped_lines"] = std::to_string(skipped);
  if (trace.sort_events()) trace.bump_counter("resort_warnings");
  return trace;
}

}  // namespace iostack
