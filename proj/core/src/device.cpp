#include "iostack/device.hpp"

#include <algorithm>
#include <cmath>

namespace iostack {

void HddProfile::validate() const {
  if (avg_seek_us <= 0 || rpm <= 0 || transfer_mbps <= 0 || per_cmd_us <= 0)
    throw error("hdd profile: all parameters must be positive");
  if (nts_bytes < 4096 || (nts_bytes & (nts_bytes - 1)) != 0)
    throw error("hdd profile: nts_bytes must be a power-of-two multiple of 4 KiB");
}

void SsdProfile::validate() const {
  if (per_cmd_us <= 0 || transfer_mbps <= 0 || channel_parallelism == 0)
    throw error("ssd profile: all parameters must be positive");
}

std::uint64_t device_nts_bytes(const DeviceProfile& dev) {
  return std::visit([](const auto& d) { return d.nts_bytes; }, dev);
}

HddService hdd_service(const HddProfile& hdd, const IoEvent& io,
                       std::uint64_t head_lba,
                       std::uint64_t capacity_sectors) {
  double seek_us = 0.0;
  double rot_us = 0.0;
  if (io.lba != head_lba) {
    double dist = io.lba > head_lba ? double(io.lba - head_lba)
                                    : double(head_lba - io.lba);
    double norm = capacity_sectors > 0 ? dist / double(capacity_sectors) : 1.0;
    seek_us = std::clamp(2.0 * hdd.avg_seek_us * norm, 0.1 * hdd.avg_seek_us,
                         2.0 * hdd.avg_seek_us);
    rot_us = 30.0e6 / hdd.rpm;  // half rotation
  }
  double transfer_us = double(io.bytes()) / hdd.transfer_mbps;
  return {hdd.per_cmd_us + seek_us + rot_us + transfer_us, io.end_lba()};
}

double ssd_service(const SsdProfile& ssd, const IoEvent& io,
                   std::uint32_t outstanding) {
  std::uint32_t factor =
      std::clamp<std::uint32_t>(outstanding, 1, ssd.channel_parallelism);
  double transfer_us = double(io.bytes()) / ssd.transfer_mbps;
  return ssd.per_cmd_us + transfer_us / double(factor);
}

}  // namespace iostack
