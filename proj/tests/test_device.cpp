#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "iostack/device.hpp"

using namespace iostack;

namespace {

IoEvent make_io(std::uint64_t lba, std::uint64_t bytes) {
  IoEvent e;
  e.lba = lba;
  e.len = std::uint32_t(bytes / kSectorBytes);
  e.op = IoOp::write;
  return e;
}

}  // namespace

TEST_CASE("hdd contiguous follow-on: per_cmd + transfer only") {
  HddProfile hdd;
  hdd.per_cmd_us = 100.0;
  hdd.transfer_mbps = 200.0;
  hdd.avg_seek_us = 4000.0;
  hdd.rpm = 15000.0;
  IoEvent io = make_io(4096, 128 * 1024);
  auto s = hdd_service(hdd, io, /*head=*/4096, 1 << 24);
  // 131072 bytes / 200 MB/s = 655.36 us.
  CHECK(s.service_us == doctest::Approx(100.0 + 655.36).epsilon(1e-6));
  CHECK(s.new_head_lba == 4096 + 256);

  // Identical LBA repeat keeps the zero seek term.
  auto again = hdd_service(hdd, io, 4096, 1 << 24);
  CHECK(again.service_us == s.service_us);
}

TEST_CASE("hdd non-contiguous adds seek and half rotation") {
  HddProfile hdd;
  hdd.per_cmd_us = 100.0;
  hdd.transfer_mbps = 200.0;
  hdd.avg_seek_us = 4000.0;
  hdd.rpm = 15000.0;
  std::uint64_t cap = 1 << 24;
  IoEvent io = make_io(cap / 2, 4096);
  auto s = hdd_service(hdd, io, 0, cap);
  double half_rot = 30.0e6 / 15000.0;
  CHECK(half_rot == doctest::Approx(2000.0));
  double seek = 2.0 * 4000.0 * 0.5;  // linear in normalized distance
  double transfer = 4096.0 / 200.0;
  CHECK(s.service_us == doctest::Approx(100.0 + seek + half_rot + transfer));

  // Tiny distance hits the floor of a tenth of the average seek.
  IoEvent near = make_io(8, 4096);
  auto sn = hdd_service(hdd, near, 0, cap);
  CHECK(sn.service_us ==
        doctest::Approx(100.0 + 0.1 * 4000.0 + half_rot + transfer));
}

TEST_CASE("ssd service: queue depth engages channel parallelism") {
  SsdProfile ssd;
  ssd.per_cmd_us = 80.0;
  ssd.transfer_mbps = 3000.0;
  ssd.channel_parallelism = 8;
  IoEvent io = make_io(0, 128 * 1024);
  CHECK(ssd_service(ssd, io, 1) ==
        doctest::Approx(80.0 + 131072.0 / 3000.0).epsilon(1e-6));
  // outstanding >= parallelism halves the transfer term vs parallelism/2
  double at8 = ssd_service(ssd, io, 8) - 80.0;
  double at4 = ssd_service(ssd, io, 4) - 80.0;
  CHECK(at8 == doctest::Approx(at4 / 2.0));
  CHECK(ssd_service(ssd, io, 64) == ssd_service(ssd, io, 8));
}

TEST_CASE("per-byte time is strictly higher for 4K than 128K") {
  SsdProfile ssd;
  IoEvent small = make_io(0, 4096);
  IoEvent large = make_io(0, 128 * 1024);
  for (std::uint32_t outstanding : {1u, 4u, 8u, 64u}) {
    double per_byte_small = ssd_service(ssd, small, outstanding) / 4096.0;
    double per_byte_large =
        ssd_service(ssd, large, outstanding) / (128.0 * 1024.0);
    CHECK(per_byte_small > per_byte_large);
  }
  HddProfile hdd;
  double hs = hdd_service(hdd, small, 0, 1 << 24).service_us / 4096.0;
  double hl = hdd_service(hdd, large, 0, 1 << 24).service_us / (128.0 * 1024.0);
  CHECK(hs > hl);
}

TEST_CASE("service time strictly increases with bytes") {
  SsdProfile ssd;
  HddProfile hdd;
  double prev_s = 0, prev_h = 0;
  for (std::uint64_t kb = 4; kb <= 1024; kb *= 2) {
    IoEvent io = make_io(1000, kb * 1024);
    double s = ssd_service(ssd, io, 4);
    double h = hdd_service(hdd, io, 1000, 1 << 24).service_us;
    CHECK(s > prev_s);
    CHECK(h > prev_h);
    prev_s = s;
    prev_h = h;
  }
}

TEST_CASE("hdd contiguity bonus: adjacency beats every broken order") {
  HddProfile hdd;
  std::uint64_t cap = 1 << 24;
  std::vector<IoEvent> ios;
  for (int i = 0; i < 5; ++i) ios.push_back(make_io(1000 + i * 256, 128 * 1024));

  auto total = [&](const std::vector<int>& order) {
    double sum = 0;
    std::uint64_t head = 1000;
    for (int idx : order) {
      auto s = hdd_service(hdd, ios[std::size_t(idx)], head, cap);
      sum += s.service_us;
      head = s.new_head_lba;
    }
    return sum;
  };

  std::vector<int> order{0, 1, 2, 3, 4};
  double best = total(order);
  while (std::next_permutation(order.begin(), order.end())) {
    CHECK(total(order) > best);  // every non-sequential order pays seeks
  }
}

TEST_CASE("profile validation") {
  HddProfile hdd;
  hdd.nts_bytes = 3 * 1024 * 1024;  // not a power of two
  CHECK_THROWS_AS(hdd.validate(), error);
  hdd.nts_bytes = kDefaultNtsBytes;
  hdd.rpm = 0;
  CHECK_THROWS_AS(hdd.validate(), error);
  SsdProfile ssd;
  ssd.channel_parallelism = 0;
  CHECK_THROWS_AS(ssd.validate(), error);
}
