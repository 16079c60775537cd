#pragma once

#include <cstdint>
#include <variant>

#include "iostack/trace.hpp"

namespace iostack {

/// Mechanical drive service parameters. Defaults approximate a 15K SAS
/// drive; real deployments override them from the config file.
struct HddProfile {
  double avg_seek_us = 4000.0;
  double rpm = 15000.0;
  double transfer_mbps = 200.0;  // MB/s, 1 MB = 1e6 bytes
  double per_cmd_us = 30.0;
  std::uint64_t nts_bytes = kDefaultNtsBytes;

  void validate() const;
};

/// Flash drive service parameters, datacenter NVMe class. The transfer
/// term shrinks with queue depth up to channel_parallelism, which is
/// what rewards deep queues and large IOs.
struct SsdProfile {
  double per_cmd_us = 50.0;
  double transfer_mbps = 3000.0;
  std::uint32_t channel_parallelism = 8;
  std::uint64_t nts_bytes = kDefaultNtsBytes;

  void validate() const;
};

using DeviceProfile = std::variant<HddProfile, SsdProfile>;

std::uint64_t device_nts_bytes(const DeviceProfile& dev);

struct HddService {
  double service_us;
  std::uint64_t new_head_lba;
};

/// Seek scales linearly with normalized LBA distance (full sweep costs
/// twice the average, floor at a tenth); a contiguous follow-on skips
/// both seek and rotation.
HddService hdd_service(const HddProfile& hdd, const IoEvent& io,
                       std::uint64_t head_lba,
                       std::uint64_t capacity_sectors);

double ssd_service(const SsdProfile& ssd, const IoEvent& io,
                   std::uint32_t outstanding);

}  // namespace iostack
