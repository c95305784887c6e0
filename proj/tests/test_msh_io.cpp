#include <doctest.h>

#include <filesystem>

#include "thermocal/errors.hpp"
#include "thermocal/geometry.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/msh_io.hpp"

using namespace thermocal;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path d = fs::temp_directory_path() / "thermocal_msh_test";
  fs::create_directories(d);
  return d;
}

std::string write_tmp(const std::string& name, const std::string& content) {
  std::string p = (tmp_dir() / name).string();
  write_file_atomic(p, content);
  return p;
}

const char* kTinyMsh =
    "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
    "$Nodes\n4\n"
    "1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n"
    "$EndNodes\n"
    "$Elements\n6\n"
    "1 1 2 3 3 1 2\n"
    "2 1 2 2 2 2 3\n"
    "3 1 2 4 4 3 4\n"
    "4 1 2 1 1 4 1\n"
    "5 2 2 1 1 1 2 3\n"
    "6 2 2 1 1 1 3 4\n"
    "$EndElements\n";

}  // namespace

TEST_CASE("import reads the ascii subset and normalizes orientation") {
  std::string p = write_tmp("tiny.msh", kTinyMsh);
  Mesh m = import_msh(p);
  CHECK(m.node_count() == 4);
  CHECK(m.triangle_count() == 2);
  CHECK(m.boundary_edges.size() == 4);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-15));
  for (int t = 0; t < m.triangle_count(); ++t) CHECK(m.triangle_area(t) > 0.0);

  // Clockwise input triangles come back counter-clockwise.
  std::string flipped = kTinyMsh;
  auto pos = flipped.find("5 2 2 1 1 1 2 3");
  flipped.replace(pos, 15, "5 2 2 1 1 1 3 2");
  Mesh mf = import_msh(write_tmp("tiny_cw.msh", flipped));
  for (int t = 0; t < mf.triangle_count(); ++t) CHECK(mf.triangle_area(t) > 0.0);
}

TEST_CASE("export then import round-trips structure and hash") {
  Mesh m = build_example2(1.0, 1.0, {0.5, 0.5}, 0.2, 0.3, 24);
  fs::path p = tmp_dir() / "round.msh";
  export_msh(m, p.string());
  Mesh back = import_msh(p.string());
  // %.17g coordinates round-trip exactly, so the content hash matches too.
  CHECK(back.content_hash() == m.content_hash());
  CHECK(back.node_count() == m.node_count());
  CHECK(back.triangle_count() == m.triangle_count());
  CHECK(back.boundary_edges.size() == m.boundary_edges.size());
}

TEST_CASE("export is byte-deterministic") {
  Mesh m = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 16);
  fs::path a = tmp_dir() / "det_a.msh", b = tmp_dir() / "det_b.msh";
  export_msh(m, a.string());
  export_msh(m, b.string());
  CHECK(read_file(a.string()) == read_file(b.string()));
}

TEST_CASE("import errors carry line numbers") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(import_msh((tmp_dir() / "nope.msh").string()), IoError);
  }
  SUBCASE("wrong header") {
    std::string p = write_tmp("bad_header.msh", "$Nodes\n0\n$EndNodes\n");
    CHECK_THROWS_WITH_AS(import_msh(p), doctest::Contains("line 1"), IoError);
  }
  SUBCASE("binary format flag rejected") {
    std::string body = kTinyMsh;
    body.replace(body.find("2.2 0 8"), 7, "2.2 1 8");
    CHECK_THROWS_WITH_AS(import_msh(write_tmp("bad_fmt.msh", body)),
                         doctest::Contains("ASCII 2.2"), IoError);
  }
  SUBCASE("unsupported element type") {
    std::string body = kTinyMsh;
    body.replace(body.find("5 2 2 1 1 1 2 3"), 15, "5 3 2 1 1 1 2 3");
    CHECK_THROWS_WITH_AS(import_msh(write_tmp("bad_type.msh", body)),
                         doctest::Contains("unsupported element type 3"), IoError);
  }
  SUBCASE("dangling node reference") {
    std::string body = kTinyMsh;
    body.replace(body.find("6 2 2 1 1 1 3 4"), 15, "6 2 2 1 1 1 3 9");
    CHECK_THROWS_WITH_AS(import_msh(write_tmp("dangling.msh", body)),
                         doctest::Contains("unknown node 9"), IoError);
  }
  SUBCASE("duplicate node id") {
    std::string body = kTinyMsh;
    body.replace(body.find("2 1 0 0"), 7, "1 1 0 0");
    CHECK_THROWS_WITH_AS(import_msh(write_tmp("dup_node.msh", body)),
                         doctest::Contains("duplicate node id 1"), IoError);
  }
  SUBCASE("truncated file") {
    std::string body(kTinyMsh);
    body = body.substr(0, body.find("$EndElements"));
    CHECK_THROWS_WITH_AS(import_msh(write_tmp("trunc.msh", body)),
                         doctest::Contains("unexpected end of file"), IoError);
  }
}
