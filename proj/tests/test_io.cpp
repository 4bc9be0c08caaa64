#include "helpers.hpp"

#include "chita/io.hpp"

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

using namespace chita;
using namespace chita::io;
using namespace testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("chita_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename F>
std::uint64_t format_offset(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("no FormatError");
  return 0;
}

template <typename F>
std::string config_message(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("no ConfigError");
  return {};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("matrix files") {
  TempDir dir;
  const fs::path f = dir / "a.mtx";

  SUBCASE("header layout for 5×8 float64") {
    const Eigen::MatrixXd A = oracles::gaussian_matrix(5, 8, 1);
    write_matrix(f, A);
    const std::string bytes = slurp(f);
    REQUIRE(bytes.size() == 32 + 5 * 8 * 8);
    CHECK(bytes.substr(0, 8) == "CHITAMTX");
    std::uint32_t version;
    std::uint64_t n, p;
    std::memcpy(&version, bytes.data() + 8, 4);
    std::memcpy(&n, bytes.data() + 16, 8);
    std::memcpy(&p, bytes.data() + 24, 8);
    CHECK(version == 1);
    CHECK(bytes[12] == 2);
    CHECK(bytes[13] == 0);
    CHECK(bytes[14] == 0);
    CHECK(bytes[15] == 0);
    CHECK(n == 5);
    CHECK(p == 8);
    // Row-major payload: second value is A(0, 1).
    double second;
    std::memcpy(&second, bytes.data() + 40, 8);
    CHECK(same_bits(second, A(0, 1)));
  }

  SUBCASE("round trip is bitwise") {
    Eigen::MatrixXd A = oracles::gaussian_matrix(7, 3, 2);
    A(0, 0) = -0.0;
    A(1, 2) = std::numeric_limits<double>::denorm_min();
    A(2, 1) = 1e308;
    write_matrix(f, A);
    const MatrixFile back = read_matrix(f);
    CHECK(back.dtype == DType::float64);
    REQUIRE(back.data.rows() == 7);
    REQUIRE(back.data.cols() == 3);
    for (Index r = 0; r < 7; ++r) {
      for (Index c = 0; c < 3; ++c) CHECK(same_bits(back.data(r, c), A(r, c)));
    }
  }

  SUBCASE("float32 is widened") {
    const Eigen::MatrixXd A = oracles::gaussian_matrix(3, 4, 3);
    write_matrix(f, A, DType::float32);
    CHECK(slurp(f).size() == 32 + 3 * 4 * 4);
    const MatrixFile back = read_matrix(f);
    CHECK(back.dtype == DType::float32);
    for (Index r = 0; r < 3; ++r) {
      for (Index c = 0; c < 4; ++c) {
        CHECK(back.data(r, c) == static_cast<double>(static_cast<float>(A(r, c))));
      }
    }
    write_matrix(dir / "b.mtx", back.data, DType::float32);
    CHECK(slurp(dir / "b.mtx") == slurp(f));
  }

  SUBCASE("malformed files report the byte offset") {
    write_matrix(f, oracles::gaussian_matrix(2, 3, 4));
    const std::string good = slurp(f);
    const fs::path bad = dir / "bad.mtx";

    std::string b = good;
    b[5] = 'X';
    spit(bad, b);
    CHECK(format_offset([&] { read_matrix(bad); }) == 5);

    b = good;
    b[8] = 2;
    spit(bad, b);
    CHECK(format_offset([&] { read_matrix(bad); }) == 8);

    b = good;
    b[12] = 3;
    spit(bad, b);
    CHECK(format_offset([&] { read_matrix(bad); }) == 12);

    b = good;
    b[14] = 1;
    spit(bad, b);
    CHECK(format_offset([&] { read_matrix(bad); }) == 14);

    spit(bad, good.substr(0, 20));
    CHECK(format_offset([&] { read_matrix(bad); }) == 20);

    spit(bad, good.substr(0, good.size() - 3));
    CHECK(format_offset([&] { read_matrix(bad); }) == good.size() - 3);

    spit(bad, good + "x");
    CHECK(format_offset([&] { read_matrix(bad); }) == good.size());

    b = good;
    std::memset(b.data() + 16, 0, 8);
    spit(bad, b);
    CHECK_THROWS_AS(read_matrix(bad), FormatError);

    spit(bad, "CHITAVEC");
    CHECK(format_offset([&] { read_matrix(bad); }) == 5);
  }
}

TEST_CASE("vector files") {
  TempDir dir;
  const fs::path f = dir / "w.vec";
  const Vector v = oracles::gaussian_vector(11, 5);

  SUBCASE("layout and round trip") {
    write_vector(f, v);
    const std::string bytes = slurp(f);
    CHECK(bytes.size() == 24 + 11 * 8);
    CHECK(bytes.substr(0, 8) == "CHITAVEC");
    const VectorFile back = read_vector(f);
    REQUIRE(back.data.size() == 11);
    for (Index i = 0; i < 11; ++i) CHECK(same_bits(back.data[i], v[i]));
  }
  SUBCASE("empty vector is allowed") {
    write_vector(f, Vector());
    CHECK(read_vector(f).data.size() == 0);
  }
  SUBCASE("wrong container") {
    write_matrix(f, oracles::gaussian_matrix(1, 2, 6));
    CHECK_THROWS_AS(read_vector(f), FormatError);
  }
  SUBCASE("truncated payload") {
    write_vector(f, v);
    spit(f, slurp(f).substr(0, 24 + 5));
    CHECK(format_offset([&] { read_vector(f); }) == 24 + 5);
  }
}

TEST_CASE("layer maps") {
  TempDir dir;
  const fs::path f = dir / "layers.json";
  const std::vector<LayerSpec> layers = {{"fc1.weight", 2560}, {"fc1.bias", 80}, {"ünïcode", 3}};
  write_layer_map(f, layers);
  const auto back = read_layer_map(f);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].name == layers[i].name);
    CHECK(back[i].length == layers[i].length);
  }
  spit(f, R"([{"name": "x"}])");
  CHECK_THROWS_AS(read_layer_map(f), FormatError);
  spit(f, R"([{"name": "x", "length": 0}])");
  CHECK_THROWS_AS(read_layer_map(f), FormatError);
  spit(f, R"({"name": "x", "length": 3})");
  CHECK_THROWS_AS(read_layer_map(f), FormatError);
  spit(f, R"([{"name": "x", "length": 3},)");
  CHECK_THROWS_AS(read_layer_map(f), FormatError);
}

TEST_CASE("solution files") {
  TempDir dir;
  const fs::path f = dir / "sol.json";
  auto pr = random_pair(4, 12, 0.1, 3, 7);
  Vector w = Vector::Zero(12);
  w[2] = 0.1;
  w[5] = -1.0 / 3.0;
  w[11] = 1e-300;
  const SparseSolution s = SparseSolution::from_weights(pr.inst, w);
  const SolutionFile sf = SolutionFile::from_solution(s, 3, "00ff00ff00ff00ff");
  write_solution(f, sf);
  const SolutionFile back = read_solution(f);
  CHECK(back.p == 12);
  CHECK(back.k == 3);
  CHECK(back.indices == std::vector<std::uint64_t>{2, 5, 11});
  REQUIRE(back.values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same_bits(back.values[i], sf.values[i]));
  CHECK(same_bits(back.objective, s.objective));
  CHECK(back.config_digest == "00ff00ff00ff00ff");
  CHECK(back.dense() == w);

  const auto j = nlohmann::json::parse(slurp(f));
  for (const char* key : {"p", "k", "indices", "values", "objective", "config_digest"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.size() == 6);

  spit(f, R"({"p": 4, "k": 2, "indices": [2, 1], "values": [1, 2], "objective": 0, "config_digest": ""})");
  CHECK_THROWS_AS(read_solution(f), FormatError);
  spit(f, R"({"p": 4, "k": 2, "indices": [1, 4], "values": [1, 2], "objective": 0, "config_digest": ""})");
  CHECK_THROWS_AS(read_solution(f), FormatError);
  spit(f, R"({"p": 4, "k": 2, "indices": [1], "values": [1, 2], "objective": 0, "config_digest": ""})");
  CHECK_THROWS_AS(read_solution(f), FormatError);
  spit(f, R"({"p": 4, "k": 2, "indices": [1], "values": [1], "objective": 0})");
  CHECK_THROWS_AS(read_solution(f), FormatError);
}

TEST_CASE("run configuration") {
  using nlohmann::json;
  SUBCASE("defaults plus a budget") {
    const RunConfig c = RunConfig::from_json(json{{"sparsity", 0.9}});
    CHECK(c.lambda == 1e-3);
    CHECK(c.block_size == 10000);
    CHECK(c.active_mult == 2.0);
    CHECK(c.solver == "chita-cd");
    CHECK(c.budget(1000) == 100);
    CHECK(RunConfig::from_json(json{{"k", 7}}).budget(1000) == 7);
  }
  SUBCASE("unknown keys name the key") {
    const std::string msg = config_message([] { RunConfig::from_json(json{{"k", 3}, {"lamda", 0.1}}); });
    CHECK(msg.find("lamda") != std::string::npos);
  }
  SUBCASE("type and range errors name the key") {
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"t_ht", "five"}}); }).find("t_ht") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"t_ht", 2.5}}); }).find("t_ht") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"gamma", 1.0}}); }).find("gamma") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"seed", -1}}); }).find("seed") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"solver", "sgd"}}); }).find("solver") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"schedule", "cosine"}}); }).find("schedule") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"sparsity", 1.0}}); }).find("sparsity") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 0}}); }).find("'k'") != std::string::npos);
    CHECK(config_message([] { RunConfig::from_json(json{{"k", 3}, {"lambda", -1}}); }).find("lambda") != std::string::npos);
  }
  SUBCASE("exactly one budget") {
    CHECK_THROWS_AS(RunConfig::from_json(json::object()), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"k", 3}, {"sparsity", 0.5}}), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json::array()), ConfigError);
  }
  SUBCASE("file round trip and digest") {
    TempDir dir;
    RunConfig c;
    c.k = 42;
    c.lambda = 0.1 + 0.2;
    c.solver = "blockwise";
    c.seed = 18446744073709551615ULL;
    write_config(dir / "c.json", c);
    const RunConfig back = read_config(dir / "c.json");
    CHECK(back.to_json() == c.to_json());
    CHECK(same_bits(back.lambda, c.lambda));
    CHECK(back.seed == c.seed);
    CHECK(back.digest() == c.digest());
    CHECK(c.digest().size() == 16);
    RunConfig other = c;
    other.seed = 1;
    CHECK(other.digest() != c.digest());

    spit(dir / "c.json", "{\"k\": 3,");
    CHECK_THROWS_AS(read_config(dir / "c.json"), ConfigError);
  }
}

TEST_CASE("csv rows") {
  SUBCASE("quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  }
  SUBCASE("header once, then rows") {
    TempDir dir;
    const fs::path f = dir / "runs.csv";
    CsvRow row;
    row.solver = "chita-cd";
    row.p = 10;
    row.n = 4;
    row.k = 3;
    row.lambda = 0.1;
    row.seed = 9;
    row.objective_initial = 2.0;
    row.objective_final = 1.5;
    row.nnz = 3;
    row.wall_ms = 0.25;
    row.iterations = 6;
    append_csv(f, row);
    append_csv(f, row);
    const std::string text = slurp(f);
    const std::string line = format_csv_row(row);
    CHECK(line == "chita-cd,10,4,3,0.10000000000000001,9,2,1.5,3,0.25,6");
    CHECK(text == csv_header() + "\r\n" + line + "\r\n" + line + "\r\n");
  }
}
