#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "iostack/device.hpp"
#include "iostack/objdrive.hpp"
#include "iostack/os_stack.hpp"
#include "iostack/replay.hpp"
#include "iostack/workload.hpp"

namespace iostack {

/// INI-style sections of key=value pairs. Unknown keys are rejected at
/// binding time so calibration constants cannot silently rot.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Every tunable of the simulator, pre-loaded with the shipped
/// calibration defaults (the desk-scale setup).
struct Config {
  ClusterSpec cluster;
  WorkloadSpec workload;  // kind/ratio applied later by the caller
  SimConfig sim;
  FsProfile fs_ag = FsProfile::ag_extent();
  FsProfile fs_simple = FsProfile::simple_extent();
  DriveProfile drive;
  HddProfile hdd;
  SsdProfile ssd;
  RawProfile raw;
  std::uint64_t duic_bytes_per_thread = 16ull * 1024 * 1024;

  /// Overlays values from an INI file onto the defaults. Throws on
  /// unknown sections or keys.
  void apply(const IniFile& ini);

  /// Renders the effective configuration in INI form (config --dump).
  std::string dump() const;

  FsProfile fs_profile(const std::string& name) const;
  DeviceProfile device_profile(const std::string& name) const;
};

/// Defaults, then IOSTACK_SIM_CONFIG (if set), then `path` (if non-empty).
Config load_config(const std::string& path);

}  // namespace iostack
