#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cubist/errors.hpp"
#include "cubist/io.hpp"
#include "cubist/synth.hpp"
#include "oracles.hpp"

using namespace cubist;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cubist_test_" + name);
}

DepthMap random_depth(int w, int h, std::uint64_t seed) {
  DepthMap d = DepthMap::invalid_filled(w, h);
  Rng rng(seed);
  for (float& z : d.values)
    if (rng.uniform() > 0.2)
      z = static_cast<float>(rng.uniform(0.2, 9.0));
  return d;
}

}  // namespace

TEST_CASE("backprojection hand cases") {
  const Intrinsics K = default_intrinsics(65, 49, 100.0);  // cx = 32, cy = 24
  DepthMap depth = DepthMap::invalid_filled(65, 49);
  depth.at(32, 24) = 2.0f;

  const PointCloud cloud = backproject(depth, K);
  REQUIRE(cloud.points.size() == 1);
  CHECK((cloud.points[0] - Vec3(0, 0, 2)).norm() < 1e-12);
  CHECK(cloud.pixel_index[0] == 24 * 65 + 32);

  DepthMap depth2 = DepthMap::invalid_filled(200, 49);
  Intrinsics K2 = default_intrinsics(200, 49, 50.0);  // cx = 99.5
  depth2.at(149, 24) = 3.0f;                          // u - cx = 49.5
  const PointCloud c2 = backproject(depth2, K2);
  REQUIRE(c2.points.size() == 1);
  CHECK(c2.points[0].x() == doctest::Approx(49.5 * 3.0 / 50.0));
  CHECK(c2.points[0].z() == doctest::Approx(3.0));
}

TEST_CASE("render then backproject lands on the cuboid surfaces") {
  const Intrinsics K = default_intrinsics(128, 96);
  const SynthScene scene = make_scene(2, SynthRanges{}, K, 128, 96, 121);
  const PointCloud cloud = backproject(scene.depth, K);
  for (const Vec3& p : cloud.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cuboid& h : scene.cuboids)
      best = std::min(best, point_distance(h, p));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("pfm round trip is bit exact") {
  const DepthMap depth = random_depth(37, 23, 122);
  std::stringstream buffer;
  save_pfm(depth, buffer);
  const DepthMap loaded = load_pfm(buffer);
  CHECK(loaded.width == depth.width);
  CHECK(loaded.height == depth.height);
  REQUIRE(loaded.values.size() == depth.values.size());
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const bool nan_match = std::isnan(depth.values[i]) &&
                           std::isnan(loaded.values[i]);
    CHECK((nan_match || depth.values[i] == loaded.values[i]));
  }
}

TEST_CASE("truncated pfm reports the byte offset") {
  const DepthMap depth = random_depth(16, 16, 123);
  std::stringstream buffer;
  save_pfm(depth, buffer);
  const std::string whole = buffer.str();
  std::stringstream cut(whole.substr(0, whole.size() / 2));
  try {
    load_pfm(cut);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("csv depth handles nan tokens and round trips") {
  std::stringstream buffer;
  buffer << "3,2\n0.5,nan,1.25\n2.5,0.75,nan\n";
  const DepthMap depth = load_depth_csv(buffer);
  CHECK(depth.width == 3);
  CHECK(depth.height == 2);
  CHECK(depth.at(0, 0) == 0.5f);
  CHECK(std::isnan(depth.at(1, 0)));
  CHECK(std::isnan(depth.at(2, 1)));

  std::stringstream out;
  save_depth_csv(depth, out);
  const DepthMap again = load_depth_csv(out);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const bool nan_match =
        std::isnan(depth.values[i]) && std::isnan(again.values[i]);
    CHECK((nan_match || depth.values[i] == again.values[i]));
  }
}

TEST_CASE("intrinsics json round trip and validation") {
  const Intrinsics K = default_intrinsics(640, 480, 525.0);
  const auto path = temp_file("intrinsics.json");
  save_intrinsics(K, path.string());
  const Intrinsics loaded = load_intrinsics(path.string());
  CHECK(loaded.fx == K.fx);
  CHECK(loaded.cx == K.cx);
  CHECK(loaded.width == K.width);

  write_file(path.string(), "{\"fx\":-1}");
  CHECK_THROWS_AS(load_intrinsics(path.string()), io_error);
  std::filesystem::remove(path);
}

TEST_CASE("weight maps: full resolution, 1/8 replication, normalization") {
  const int w = 16, h = 16;
  // Pixel index map covering all pixels.
  std::vector<std::int64_t> pixels(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    pixels[i] = static_cast<std::int64_t>(i);

  const auto path = temp_file("weights.bin");

  SUBCASE("full resolution with unnormalized selection") {
    std::vector<std::vector<float>> maps = {
        std::vector<float>(w * h, 1.0f), std::vector<float>(w * h, 2.0f)};
    save_weight_maps(maps, std::vector<double>{2.0, 2.0}, w, h, path.string());
    const WeightMaps loaded =
        load_weight_maps(path.string(), w, h, pixels);
    CHECK(loaded.selection == std::vector<double>{0.5, 0.5});
    CHECK(loaded.maps[1][5] == 2.0);
  }

  SUBCASE("eighth resolution replicates each coarse cell") {
    const int cw = (w + 7) / 8, ch = (h + 7) / 8;  // 2 x 2
    std::vector<float> coarse = {1.0f, 2.0f, 3.0f, 4.0f};
    save_weight_maps(std::vector<std::vector<float>>{coarse},
                     std::vector<double>{1.0}, cw, ch, path.string());
    // Trick: the file declares coarse dims; the loader matches them against
    // ceil(w/8) x ceil(h/8).
    const WeightMaps loaded = load_weight_maps(path.string(), w, h, pixels);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        const double expect = coarse[(v / 8) * cw + (u / 8)];
        CHECK(loaded.maps[0][v * w + u] == expect);
      }
  }

  SUBCASE("negative weights are rejected") {
    std::vector<float> bad(w * h, 1.0f);
    bad[3] = -0.5f;
    save_weight_maps(std::vector<std::vector<float>>{bad},
                     std::vector<double>{1.0}, w, h, path.string());
    CHECK_THROWS_AS(load_weight_maps(path.string(), w, h, pixels), io_error);
  }

  SUBCASE("dimension mismatch is rejected") {
    std::vector<float> wrong(10 * 10, 1.0f);
    save_weight_maps(std::vector<std::vector<float>>{wrong},
                     std::vector<double>{1.0}, 10, 10, path.string());
    CHECK_THROWS_AS(load_weight_maps(path.string(), w, h, pixels), io_error);
  }

  std::filesystem::remove(path);
}

TEST_CASE("cuboid json canonical round trip") {
  Rng rng(124);
  std::vector<Cuboid> set;
  for (int i = 0; i < 4; ++i)
    set.push_back(oracle::random_cuboid_near_camera(rng));

  const std::string text = cuboids_to_json(set);
  const auto parsed = cuboids_from_json(text);
  REQUIRE(parsed.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK((parsed[i].half_extents - set[i].half_extents).cwiseAbs().maxCoeff() <
          1e-7);
    CHECK((parsed[i].rotation - set[i].rotation).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((parsed[i].translation - set[i].translation).cwiseAbs().maxCoeff() <
          1e-7);
  }
  // Canonical: serialize(parse(text)) reproduces the bytes.
  CHECK(cuboids_to_json(parsed) == text);
}

TEST_CASE("superquadric json parsing") {
  const std::string text =
      "{\"family\":\"superquadric\",\"primitives\":[{\"eps\":[1.0,0.5],"
      "\"rotation_axis_angle\":[0,0,0],\"size\":[1,2,3],"
      "\"translation\":[0,0,4]}]}";
  const auto sqs = superquadrics_from_json(text);
  REQUIRE(sqs.size() == 1);
  CHECK(sqs[0].eps1 == 1.0);
  CHECK(sqs[0].eps2 == 0.5);
  CHECK(sqs[0].half_extents == Vec3(1, 2, 3));

  CHECK_THROWS_AS(
      superquadrics_from_json(
          "{\"family\":\"superquadric\",\"primitives\":[{\"eps\":[3.0,0.5],"
          "\"rotation_axis_angle\":[0,0,0],\"size\":[1,1,1],"
          "\"translation\":[0,0,4]}]}"),
      io_error);
}

TEST_CASE("obj export writes 8 vertices and 12 outward triangles per cuboid") {
  Rng rng(125);
  const std::vector<Cuboid> set = {oracle::random_cuboid_near_camera(rng)};
  const auto path = temp_file("mesh.obj");
  export_obj(set, path.string());

  std::ifstream in(path.string());
  std::string line;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  while (std::getline(in, line)) {
    double x, y, z;
    int a, b, c;
    if (std::sscanf(line.c_str(), "v %lf %lf %lf", &x, &y, &z) == 3)
      vertices.emplace_back(x, y, z);
    else if (std::sscanf(line.c_str(), "f %d %d %d", &a, &b, &c) == 3)
      faces.push_back({a - 1, b - 1, c - 1});
  }
  CHECK(vertices.size() == 8);
  CHECK(faces.size() == 12);

  // Every vertex is a transformed signed-corner; every triangle normal
  // points away from the center.
  const Cuboid& h = set[0];
  for (const Vec3& v : vertices)
    CHECK(point_distance(h, v) < 1e-6);
  for (const auto& f : faces) {
    const Vec3 ab = vertices[f[1]] - vertices[f[0]];
    const Vec3 ac = vertices[f[2]] - vertices[f[0]];
    const Vec3 normal = ab.cross(ac);
    const Vec3 centroid =
        (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
    CHECK(normal.dot(centroid - h.translation) > 0.0);
  }
  std::filesystem::remove(path);

  const auto empty_path = temp_file("empty.obj");
  export_obj({}, empty_path.string());
  CHECK(std::filesystem::file_size(empty_path) > 0);
  std::filesystem::remove(empty_path);
}

TEST_CASE("diagnostics serialize one canonical line per round") {
  std::vector<RoundDiagnostics> rounds(2);
  rounds[0] = {0, 150.25, 87.0, true, Cuboid{}};
  rounds[1] = {1, 12.5, 87.0, false, Cuboid{}};
  const std::string text = diagnostics_to_jsonl(rounds);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("\"accepted\":true") != std::string::npos);
  CHECK(text.find("\"round\":1") != std::string::npos);
  CHECK(text.find("\"theta\":87") != std::string::npos);
}
