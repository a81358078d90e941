#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "voxdet/errors.hpp"
#include "voxdet/geometry.hpp"
#include "voxdet/io.hpp"
#include "voxdet/parallel.hpp"
#include "voxdet/points.hpp"
#include "voxdet/rng.hpp"
#include "voxdet/volume.hpp"

using namespace voxdet;
using voxdet::testing::TempDir;

namespace {

Volume3 random_volume(Dims3 dims, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  Volume3 v(dims);
  Rng rng(seed);
  for (std::int64_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

}  // namespace

TEST_CASE("euclidean_distance handles the pinned cases") {
  CHECK(euclidean_distance({0, 0, 0}, {0, 0, 0}) == 0.0);
  CHECK(euclidean_distance({0, 0, 0}, {3, 4, 0}) == 5.0);
  CHECK(euclidean_distance({1, 2, 3}, {4, 6, 3}) == 5.0);
}

TEST_CASE("euclidean_distance is a metric on random triples") {
  Rng rng(11);
  const auto random_coord = [&] {
    return Coordinate{static_cast<int>(rng.uniform_int(41)) - 20,
                      static_cast<int>(rng.uniform_int(41)) - 20,
                      static_cast<int>(rng.uniform_int(41)) - 20};
  };
  for (int trial = 0; trial < 500; ++trial) {
    const Coordinate a = random_coord();
    const Coordinate b = random_coord();
    const Coordinate c = random_coord();
    CHECK(euclidean_distance(a, b) == euclidean_distance(b, a));
    CHECK((euclidean_distance(a, b) == 0.0) == (a == b));
    CHECK(euclidean_distance(a, c) <=
          euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12);
  }
}

TEST_CASE("within_radius agrees with the sqrt formulation") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const Coordinate a{static_cast<int>(rng.uniform_int(15)),
                       static_cast<int>(rng.uniform_int(15)),
                       static_cast<int>(rng.uniform_int(15))};
    const Coordinate b{static_cast<int>(rng.uniform_int(15)),
                       static_cast<int>(rng.uniform_int(15)),
                       static_cast<int>(rng.uniform_int(15))};
    const double r = rng.uniform(0.0, 12.0);
    CHECK(within_radius(a, b, r) == (euclidean_distance(a, b) <= r));
  }
}

TEST_CASE("ball_offsets matches the lattice count and stays sorted by z,y,x") {
  for (const double r : {0.0, 1.0, 2.0, 3.5, 7.0}) {
    const std::vector<Offset3> offsets = ball_offsets(r);
    CHECK(static_cast<std::int64_t>(offsets.size()) == oracle::ball_lattice_count(r));
    for (std::size_t i = 1; i < offsets.size(); ++i) {
      const auto key = [](const Offset3& o) {
        return std::array<int, 3>{o.dz, o.dy, o.dx};
      };
      CHECK(key(offsets[i - 1]) < key(offsets[i]));
    }
  }
  CHECK(ball_offsets(2.0).size() == 33);  // 1 + 6 + 12 + 8 + 6
}

TEST_CASE("Volume3 indexing is x-fastest and round-trips coordinates") {
  const Volume3 v(Dims3{3, 4, 5});
  CHECK(v.index(0, 0, 0) == 0);
  CHECK(v.index(1, 0, 0) == 1);
  CHECK(v.index(0, 1, 0) == 3);
  CHECK(v.index(0, 0, 1) == 12);
  for (std::int64_t i = 0; i < v.size(); ++i)
    CHECK(v.index(v.coordinate_of(i)) == i);
}

TEST_CASE("Volume3 rejects bad construction") {
  CHECK_THROWS_AS(Volume3(Dims3{0, 4, 4}), ValidationError);
  CHECK_THROWS_AS(Volume3(Dims3{4, 4, 4}, std::vector<float>(3)), ValidationError);
  CHECK_THROWS_AS(Volume3(Dims3{2, 2, 2}, 0.0f, -1.0), ValidationError);
}

TEST_CASE("require_finite names the offending voxel") {
  Volume3 v(Dims3{4, 4, 4});
  v.at(2, 1, 3) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH_AS(v.require_finite("ctx"),
                       doctest::Contains("(2,1,3)"), ValidationError);
}

TEST_CASE("downsample_avg: pinned examples") {
  SUBCASE("factor 1 is identity") {
    const Volume3 v = random_volume({4, 4, 4}, 21);
    CHECK(downsample_avg(v, 1) == v);
  }
  SUBCASE("constant volume stays constant") {
    Volume3 v(Dims3{6, 6, 6}, 0.75f);
    const Volume3 d = downsample_avg(v, 2);
    CHECK(d.dims() == Dims3{3, 3, 3});
    for (std::int64_t i = 0; i < d.size(); ++i) CHECK(d[i] == 0.75f);
  }
  SUBCASE("2x2x2 ramp collapses to its mean") {
    std::vector<float> data(8);
    for (int i = 0; i < 8; ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(i);
    const Volume3 d = downsample_avg(Volume3(Dims3{2, 2, 2}, std::move(data)), 2);
    CHECK(d.dims() == Dims3{1, 1, 1});
    CHECK(d[0] == 3.5f);
  }
  SUBCASE("invalid factor") {
    CHECK_THROWS_AS(downsample_avg(Volume3(Dims3{2, 2, 2}), 0), ValidationError);
  }
}

TEST_CASE("downsample_avg matches the brute-force oracle incl. clipped borders") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Dims3 dims{2 + static_cast<int>(rng.uniform_int(9)),
                     2 + static_cast<int>(rng.uniform_int(9)),
                     2 + static_cast<int>(rng.uniform_int(9))};
    const int factor = 2 + static_cast<int>(rng.uniform_int(3));
    const Volume3 v = random_volume(dims, 1000 + static_cast<std::uint64_t>(trial));
    const Volume3 got = downsample_avg(v, factor);
    const Volume3 want = oracle::brute_downsample(v, factor);
    REQUIRE(got.dims() == want.dims());
    for (std::int64_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-6));
  }
}

TEST_CASE("downsample_avg preserves the global mean when factor divides dims") {
  const Volume3 v = random_volume({12, 8, 4}, 77);
  const Volume3 d = downsample_avg(v, 4);
  const auto mean = [](const Volume3& vol) {
    double sum = 0.0;
    for (const float x : vol.values()) sum += x;
    return sum / static_cast<double>(vol.size());
  };
  // Block means are stored as float, so agreement is float-precision.
  CHECK(mean(d) == doctest::Approx(mean(v)).epsilon(1e-6));
}

TEST_CASE("volume save/load round-trips bitwise") {
  TempDir dir;
  SUBCASE("all zeros") {
    const Volume3 v(Dims3{4, 4, 4});
    save_volume(v, dir.file("zeros"));
    CHECK(load_volume(dir.file("zeros")) == v);
  }
  SUBCASE("1000 pseudorandom values") {
    const Volume3 v = random_volume({10, 10, 10}, 42, -5.0f, 5.0f);
    save_volume(v, dir.file("rand"));
    const Volume3 back = load_volume(dir.file("rand"));
    REQUIRE(back.dims() == v.dims());
    CHECK(back == v);  // operator== compares the float payload exactly
  }
  SUBCASE("voxel size survives") {
    Volume3 v(Dims3{2, 2, 2}, 0.0f, 8.5);
    save_volume(v, dir.file("vox"));
    CHECK(load_volume(dir.file("vox")).voxel_size_nm() == 8.5);
  }
}

TEST_CASE("volume load failure modes") {
  TempDir dir;
  SUBCASE("missing file is an I/O error naming the path") {
    CHECK_THROWS_WITH_AS(load_volume(dir.file("absent")),
                         doctest::Contains("absent"), IoError);
  }
  SUBCASE("truncated raw payload is a size-mismatch validation error") {
    const Volume3 v = random_volume({4, 4, 4}, 5);
    save_volume(v, dir.file("trunc"));
    const auto raw = dir.file("trunc.raw");
    std::filesystem::resize_file(raw, std::filesystem::file_size(raw) - 1);
    CHECK_THROWS_AS(load_volume(dir.file("trunc")), ValidationError);
  }
  SUBCASE("malformed header JSON") {
    std::ofstream(dir.file("bad.json")) << "{not json";
    CHECK_THROWS_AS(load_volume(dir.file("bad.json")), ValidationError);
  }
  SUBCASE("non-finite payload is rejected") {
    const Volume3 v = random_volume({2, 2, 2}, 6);
    save_volume(v, dir.file("nan"));
    std::ofstream raw(dir.file("nan.raw"), std::ios::binary);
    const float bad = std::numeric_limits<float>::infinity();
    for (int i = 0; i < 8; ++i)
      raw.write(reinterpret_cast<const char*>(&bad), sizeof bad);
    raw.close();
    CHECK_THROWS_AS(load_volume(dir.file("nan")), ValidationError);
  }
}

TEST_CASE("point set save/load round-trips") {
  TempDir dir;
  SUBCASE("empty set") {
    save_points(PointSet{}, dir.file("empty.json"));
    CHECK(load_points(dir.file("empty.json")).empty());
  }
  SUBCASE("scored and unscored points") {
    PointSet set;
    set.points.push_back(Point{{10, 20, 30}, 0.5});
    save_points(set, dir.file("one.json"));
    CHECK(load_points(dir.file("one.json")) == set);

    PointSet gt;
    gt.points.push_back(Point{{1, 2, 3}, std::nullopt});
    gt.points.push_back(Point{{4, 5, 6}, std::nullopt});
    save_points(gt, dir.file("gt.json"));
    CHECK(load_points(dir.file("gt.json")) == gt);
  }
  SUBCASE("out-of-range confidence is rejected") {
    std::ofstream(dir.file("bad.json"))
        << R"({"format":"vpts","version":1,"points":[{"x":1,"y":1,"z":1,"confidence":1.5}]})";
    CHECK_THROWS_AS(load_points(dir.file("bad.json")), ValidationError);
  }
  SUBCASE("confidence survives exactly") {
    PointSet set;
    set.points.push_back(Point{{0, 0, 0}, 0.12345678901234567});
    save_points(set, dir.file("exact.json"));
    CHECK(*load_points(dir.file("exact.json")).points[0].confidence ==
          0.12345678901234567);
  }
}

TEST_CASE("PointSet predicates") {
  PointSet dets;
  dets.points.push_back(Point{{0, 0, 0}, 0.9});
  dets.points.push_back(Point{{1, 0, 0}, 0.5});
  CHECK(dets.all_have_confidence());
  CHECK(dets.sorted_by_confidence());
  CHECK_NOTHROW(dets.require_detections("dets"));

  dets.points.push_back(Point{{2, 0, 0}, 0.7});
  CHECK_FALSE(dets.sorted_by_confidence());
  CHECK_THROWS_AS(dets.require_detections("dets"), ValidationError);

  PointSet gt;
  gt.points.push_back(Point{{3, 3, 3}, std::nullopt});
  CHECK(gt.none_have_confidence());
  CHECK_THROWS_AS(gt.require_detections("gt"), ValidationError);
}

TEST_CASE("Rng streams are deterministic and well-ranged") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));

  for (int i = 0; i < 2000; ++i) CHECK(rng.uniform_int(7) < 7);

  double nsum = 0.0;
  double nsq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double n = rng.normal();
    nsum += n;
    nsq += n * n;
  }
  CHECK(nsum / 20000.0 == doctest::Approx(0.0).epsilon(0.05));
  CHECK(nsq / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("Rng shuffle is a permutation and seed-stable") {
  std::vector<int> items(50);
  std::iota(items.begin(), items.end(), 0);
  std::vector<int> copy = items;
  Rng(99).shuffle(copy);
  CHECK(copy != items);  // astronomically unlikely to be identity
  std::vector<int> again = items;
  Rng(99).shuffle(again);
  CHECK(again == copy);
  std::sort(copy.begin(), copy.end());
  CHECK(copy == items);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (std::uint64_t stream = 0; stream < 50; ++stream)
      seen.insert(derive_seed(seed, stream));
  CHECK(seen.size() == 20 * 50);
}

TEST_CASE("parallel_for_chunks covers every index exactly once") {
  for (const int threads : {1, 2, 3, 8}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_for_chunks(101, threads, [&](std::int64_t begin, std::int64_t end) {
      CHECK(begin <= end);
      for (std::int64_t i = begin; i < end; ++i)
        hits[static_cast<std::size_t>(i)].fetch_add(1);
    });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for_chunks(0, 4, [&](std::int64_t, std::int64_t) { CHECK(false); });
}

TEST_CASE("parallel_for_chunks propagates worker exceptions") {
  CHECK_THROWS_AS(
      parallel_for_chunks(64, 4,
                          [&](std::int64_t begin, std::int64_t) {
                            if (begin > 0) throw ValidationError("worker failed");
                          }),
      ValidationError);
}
