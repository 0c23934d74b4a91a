#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "geosep/io.hpp"

using namespace geosep;
namespace fs = std::filesystem;

namespace {

const OutputMeta kMeta{"0123456789abcdef", "9.9.9"};

}  // namespace

TEST_CASE("meta line and stamp") {
  CHECK(meta_comment(kMeta) == "# config_hash=0123456789abcdef,version=9.9.9");
  nlohmann::json j;
  stamp(j, kMeta);
  CHECK(j["config_hash"] == "0123456789abcdef");
  CHECK(j["version"] == "9.9.9");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(csv_field("abc") == "abc");
  CHECK(csv_field("Y1,0") == "\"Y1,0\"");
  CHECK(csv_field("a\"b") == "\"a\"\"b\"");
}

TEST_CASE("cloud CSV round trip is bit exact") {
  for (const auto& m : {Manifold::circle(), Manifold::flat_torus(3), Manifold::sphere2()}) {
    auto c = sample_cloud(m, 50, 77);
    std::stringstream s;
    write_cloud_csv(s, c, kMeta);
    auto back = read_cloud_csv(s);
    CHECK(back.manifold == m);
    CHECK(back.seed == 77);
    CHECK(back.provenance == CloudProvenance::File);
    REQUIRE(back.points.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) CHECK(back.points[i].x == c.points[i].x);
  }
}

TEST_CASE("cloud CSV errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_cloud_csv(empty), IoError);
  std::istringstream bad_header("# manifold=klein,n=2,seed=1\n0.1,0.2\n");
  CHECK_THROWS_AS(read_cloud_csv(bad_header), IoError);
  std::istringstream off("# manifold=sphere2,n=2,seed=1\n1,1,1\n");
  CHECK_THROWS_AS(read_cloud_csv(off), IoError);
  std::istringstream junk("# manifold=circle,n=1,seed=1\nabc\n");
  CHECK_THROWS_AS(read_cloud_csv(junk), IoError);
}

TEST_CASE("edges CSV and sidecar rebuild the grid") {
  auto cloud = sample_cloud(Manifold::circle(), 200, 5);
  auto g = normalize(build_weights(cloud, 0.3, default_kernel()));
  std::stringstream es, cs;
  write_edges_csv(es, g, kMeta);
  write_cloud_csv(cs, cloud, kMeta);
  auto edges = read_edges_csv(es);
  REQUIRE(edges.size() == g.edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    CHECK(edges[k].i == g.edges[k].i);
    CHECK(edges[k].j == g.edges[k].j);
    CHECK(edges[k].w == g.edges[k].w);
  }
  auto side = grid_sidecar(g, kMeta);
  for (const char* key : {"N", "epsilon", "a", "C", "normalized", "kernel_id", "metric_scale", "config_hash"})
    CHECK(side.contains(key));
  auto rebuilt = grid_from_parts(read_cloud_csv(cs), edges, side);
  CHECK(rebuilt.a_scaling == g.a_scaling);
  CHECK(rebuilt.limiting_constant == g.limiting_constant);
  CHECK(rebuilt.normalized);
  CHECK(rebuilt.epsilon == g.epsilon);
  CHECK(rebuilt.edges.size() == g.edges.size());

  nlohmann::json wrong = side;
  wrong["N"] = 199;
  CHECK_THROWS_AS(grid_from_parts(cloud, edges, wrong), IoError);
  nlohmann::json missing = side;
  missing.erase("C");
  CHECK_THROWS_AS(grid_from_parts(cloud, edges, missing), IoError);

  std::istringstream header_only("i,j,w\n");
  CHECK(read_edges_csv(header_only).empty());
  std::istringstream bad_order("i,j,w\n3,1,0.5\n");
  CHECK_THROWS_AS(read_edges_csv(bad_order), IoError);
  std::istringstream bad_header("a,b,c\n");
  CHECK_THROWS_AS(read_edges_csv(bad_header), IoError);
}

TEST_CASE("trace CSV and martingale JSON") {
  std::ostringstream os;
  write_trace_csv(os, {{0.5, "Y1,0", 0.25, 3}}, kMeta);
  CHECK(os.str() == "# config_hash=0123456789abcdef,version=9.9.9\nt,phi_id,value,replica\n0.5,\"Y1,0\",0.25,3\n");
  MartingaleReport r{"cos1", 256, 1.0, 0.01, 0.02, -0.001, 0.003};
  auto j = to_json(r);
  CHECK(j["phi_id"] == "cos1");
  CHECK(j["N"] == 256);
  CHECK(j["var_MT"] == 0.01);
  CHECK(j["qv_bound"] == 0.02);
  CHECK(j["stderr"] == 0.003);
}

TEST_CASE("text files") {
  const fs::path dir = fs::temp_directory_path() / "geosep_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "a.txt", "hello\n");
  CHECK(read_text(dir / "a.txt") == "hello\n");
  write_text(dir / "a.txt", "again\n");
  CHECK(read_text(dir / "a.txt") == "again\n");
  CHECK_THROWS_AS(read_text(dir / "missing.txt"), IoError);
  write_text(dir / "sub" / "b.txt", "x");
  CHECK(read_text(dir / "sub" / "b.txt") == "x");
  CHECK_THROWS_AS(write_text(dir / "a.txt" / "c.txt", "x"), IoError);
  fs::remove_all(dir);
}
