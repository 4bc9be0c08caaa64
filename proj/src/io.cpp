#include "chita/io.hpp"

#include "chita/multistage.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace chita::io {

static_assert(std::endian::native == std::endian::little,
              "binary containers are read and written in host byte order");

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kMatrixHeader = 32;
constexpr std::size_t kVectorHeader = 24;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(const char* bytes) {
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::size_t dtype_width(DType d) { return d == DType::float32 ? 4 : 8; }

void write_prefix(std::ostream& out, const char (&magic)[9], DType dtype) {
  out.write(magic, 8);
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  const char reserved[3] = {0, 0, 0};
  out.write(reserved, 3);
}

void write_value(std::ostream& out, double v, DType dtype) {
  if (dtype == DType::float32) {
    put<float>(out, static_cast<float>(v));
  } else {
    put<double>(out, v);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

// Reads and checks the shared 16-byte prefix plus `dims` u64 dimensions.
struct Prefix {
  DType dtype;
  std::array<std::uint64_t, 2> dims{};
  std::uint64_t file_size = 0;
};

Prefix read_prefix(std::ifstream& in, const std::filesystem::path& path,
                   const char* magic, int dims) {
  Prefix pre{};
  std::error_code ec;
  pre.file_size = std::filesystem::file_size(path, ec);
  if (ec) throw std::runtime_error("cannot stat " + path.string());
  const std::size_t header = 16 + 8 * static_cast<std::size_t>(dims);
  char buf[32] = {};
  in.read(buf, static_cast<std::streamsize>(header));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got < 8 || std::memcmp(buf, magic, 8) != 0) {
    std::uint64_t at = 0;
    while (at < std::min<std::uint64_t>(got, 8) && buf[at] == magic[at]) ++at;
    throw FormatError(std::string("bad magic, expected ") + magic, at);
  }
  if (got < 12) throw FormatError("truncated header (version)", got);
  const auto version = take<std::uint32_t>(buf + 8);
  if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version), 8);
  if (got < 13) throw FormatError("truncated header (dtype)", got);
  const auto dtype = static_cast<std::uint8_t>(buf[12]);
  if (dtype != 1 && dtype != 2) throw FormatError("unknown dtype " + std::to_string(dtype), 12);
  pre.dtype = static_cast<DType>(dtype);
  for (int r = 13; r < 16; ++r) {
    if (static_cast<std::uint64_t>(r) >= got) throw FormatError("truncated header (reserved)", got);
    if (buf[r] != 0) throw FormatError("reserved byte is not zero", static_cast<std::uint64_t>(r));
  }
  if (got < header) throw FormatError("truncated header (dimensions)", got);
  for (int d = 0; d < dims; ++d) {
    pre.dims[static_cast<std::size_t>(d)] = take<std::uint64_t>(buf + 16 + 8 * d);
  }
  return pre;
}

void check_payload(const Prefix& pre, std::size_t header, std::uint64_t count) {
  const std::uint64_t width = dtype_width(pre.dtype);
  if (count != 0 && width > (UINT64_MAX - header) / count) {
    throw FormatError("dimensions overflow", 16);
  }
  const std::uint64_t expected = header + width * count;
  if (pre.file_size < expected) {
    throw FormatError("payload truncated: expected " + std::to_string(expected) +
                          " bytes, file has " + std::to_string(pre.file_size),
                      pre.file_size);
  }
  if (pre.file_size > expected) throw FormatError("trailing bytes after payload", expected);
}

void read_values(std::ifstream& in, DType dtype, double* out, std::size_t count,
                 std::uint64_t offset) {
  const std::size_t width = dtype_width(dtype);
  std::vector<char> buf(count * width);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw FormatError("payload truncated", offset + static_cast<std::uint64_t>(in.gcount()));
  }
  for (std::size_t t = 0; t < count; ++t) {
    out[t] = dtype == DType::float32 ? static_cast<double>(take<float>(buf.data() + 4 * t))
                                     : take<double>(buf.data() + 8 * t);
  }
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

template <typename T>
T json_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type", 0);
  }
}

}  // namespace

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  DType dtype) {
  auto out = open_out(path);
  write_prefix(out, "CHITAMTX", dtype);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) write_value(out, m(r, c), dtype);
  }
  finish(out, path);
}

MatrixFile read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const Prefix pre = read_prefix(in, path, "CHITAMTX", 2);
  const std::uint64_t n = pre.dims[0], p = pre.dims[1];
  if (n == 0 || p == 0) throw FormatError("matrix dimensions must be positive", n == 0 ? 16 : 24);
  if (n > UINT64_MAX / p) throw FormatError("dimensions overflow", 16);
  check_payload(pre, kMatrixHeader, n * p);

  MatrixFile mf;
  mf.dtype = pre.dtype;
  mf.data.resize(static_cast<Index>(n), static_cast<Index>(p));
  std::vector<double> row(static_cast<std::size_t>(p));
  std::uint64_t offset = kMatrixHeader;
  for (std::uint64_t r = 0; r < n; ++r) {
    read_values(in, pre.dtype, row.data(), row.size(), offset);
    offset += p * dtype_width(pre.dtype);
    for (std::uint64_t c = 0; c < p; ++c) {
      mf.data(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
    }
  }
  return mf;
}

void write_vector(const std::filesystem::path& path, const Vector& v, DType dtype) {
  auto out = open_out(path);
  write_prefix(out, "CHITAVEC", dtype);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) write_value(out, v[i], dtype);
  finish(out, path);
}

VectorFile read_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const Prefix pre = read_prefix(in, path, "CHITAVEC", 1);
  const std::uint64_t len = pre.dims[0];
  check_payload(pre, kVectorHeader, len);
  VectorFile vf;
  vf.dtype = pre.dtype;
  vf.data.resize(static_cast<Index>(len));
  read_values(in, pre.dtype, vf.data.data(), static_cast<std::size_t>(len), kVectorHeader);
  return vf;
}

void write_layer_map(const std::filesystem::path& path,
                     const std::vector<LayerSpec>& layers) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& l : layers) j.push_back({{"name", l.name}, {"length", l.length}});
  write_json_file(path, j);
}

std::vector<LayerSpec> read_layer_map(const std::filesystem::path& path) {
  const nlohmann::json j = parse_json_file(path);
  if (!j.is_array()) throw FormatError("layer map must be a JSON array", 0);
  std::vector<LayerSpec> layers;
  for (const auto& e : j) {
    if (!e.is_object()) throw FormatError("layer map entries must be objects", 0);
    LayerSpec l;
    l.name = json_field<std::string>(e, "name");
    const auto len = json_field<std::int64_t>(e, "length");
    if (len < 1) throw FormatError("layer length must be positive", 0);
    l.length = static_cast<Index>(len);
    layers.push_back(std::move(l));
  }
  return layers;
}

SolutionFile SolutionFile::from_solution(const SparseSolution& s, Index k,
                                         std::string digest) {
  SolutionFile f;
  f.p = static_cast<std::uint64_t>(s.weights.size());
  f.k = static_cast<std::uint64_t>(k);
  for (Index i : s.support) {
    f.indices.push_back(static_cast<std::uint64_t>(i));
    f.values.push_back(s.weights[i]);
  }
  f.objective = s.objective;
  f.config_digest = std::move(digest);
  return f;
}

Vector SolutionFile::dense() const {
  Vector w = Vector::Zero(static_cast<Index>(p));
  for (std::size_t t = 0; t < indices.size(); ++t) w[static_cast<Index>(indices[t])] = values[t];
  return w;
}

void write_solution(const std::filesystem::path& path, const SolutionFile& s) {
  nlohmann::json j;
  j["p"] = s.p;
  j["k"] = s.k;
  j["indices"] = s.indices;
  j["values"] = s.values;
  j["objective"] = s.objective;
  j["config_digest"] = s.config_digest;
  write_json_file(path, j);
}

SolutionFile read_solution(const std::filesystem::path& path) {
  const nlohmann::json j = parse_json_file(path);
  if (!j.is_object()) throw FormatError("solution must be a JSON object", 0);
  SolutionFile s;
  s.p = json_field<std::uint64_t>(j, "p");
  s.k = json_field<std::uint64_t>(j, "k");
  s.indices = json_field<std::vector<std::uint64_t>>(j, "indices");
  s.values = json_field<std::vector<double>>(j, "values");
  s.objective = json_field<double>(j, "objective");
  s.config_digest = json_field<std::string>(j, "config_digest");
  if (s.indices.size() != s.values.size()) throw FormatError("indices and values differ in length", 0);
  for (std::size_t t = 0; t < s.indices.size(); ++t) {
    if (s.indices[t] >= s.p || (t > 0 && s.indices[t] <= s.indices[t - 1])) {
      throw FormatError("indices must be ascending and below p", 0);
    }
  }
  return s;
}

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names = {
      "iht-cd", "chita-cd", "chita-bso", "blockwise", "multistage",
      "magnitude", "obd", "iht-constant"};
  return names;
}

namespace {

template <typename T>
T config_value(const nlohmann::json& v, const std::string& key) {
  using nlohmann::json;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return v.get<T>();
  } else {
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
      throw ConfigError("config key '" + key + "' is out of range");
    }
    return static_cast<T>(x);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "lambda") c.lambda = config_value<double>(v, key);
    else if (key == "sparsity") c.sparsity = config_value<double>(v, key);
    else if (key == "k") c.k = config_value<std::int64_t>(v, key);
    else if (key == "t_ht") c.t_ht = config_value<int>(v, key);
    else if (key == "t_cd") c.t_cd = config_value<int>(v, key);
    else if (key == "gamma") c.gamma = config_value<double>(v, key);
    else if (key == "active_mult") c.active_mult = config_value<double>(v, key);
    else if (key == "block_size") c.block_size = config_value<std::int64_t>(v, key);
    else if (key == "stages") c.stages = config_value<int>(v, key);
    else if (key == "schedule") c.schedule = config_value<std::string>(v, key);
    else if (key == "tau_first") c.tau_first = config_value<double>(v, key);
    else if (key == "n") c.n = config_value<std::int64_t>(v, key);
    else if (key == "m") c.m = config_value<std::int64_t>(v, key);
    else if (key == "seed") c.seed = config_value<std::uint64_t>(v, key);
    else if (key == "solver") c.solver = config_value<std::string>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  if (sparsity) j["sparsity"] = *sparsity;
  if (k) j["k"] = *k;
  j["t_ht"] = t_ht;
  j["t_cd"] = t_cd;
  j["gamma"] = gamma;
  j["active_mult"] = active_mult;
  j["block_size"] = block_size;
  j["stages"] = stages;
  j["schedule"] = schedule;
  j["tau_first"] = tau_first;
  j["n"] = n;
  j["m"] = m;
  j["seed"] = seed;
  j["solver"] = solver;
  return j;
}

void RunConfig::validate() const {
  if (sparsity.has_value() == k.has_value()) {
    throw ConfigError("exactly one of 'sparsity' and 'k' must be given");
  }
  if (sparsity && !(*sparsity > 0.0 && *sparsity < 1.0)) {
    throw ConfigError("config key 'sparsity' must lie in (0, 1)");
  }
  if (k && *k < 1) throw ConfigError("config key 'k' must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("config key 'lambda' must be >= 0");
  if (t_ht < 1) throw ConfigError("config key 't_ht' must be >= 1");
  if (t_cd < 0) throw ConfigError("config key 't_cd' must be >= 0");
  if (!(gamma > 1.0)) throw ConfigError("config key 'gamma' must be > 1");
  if (!(active_mult >= 1.0)) throw ConfigError("config key 'active_mult' must be >= 1");
  if (block_size < 1) throw ConfigError("config key 'block_size' must be >= 1");
  if (stages < 1) throw ConfigError("config key 'stages' must be >= 1");
  if (!parse_schedule_kind(schedule)) throw ConfigError("config key 'schedule' has unknown kind '" + schedule + "'");
  if (!(tau_first > 0.0 && tau_first < 1.0)) throw ConfigError("config key 'tau_first' must lie in (0, 1)");
  if (n < 1) throw ConfigError("config key 'n' must be >= 1");
  if (m < 1) throw ConfigError("config key 'm' must be >= 1");
  const auto& names = known_solvers();
  if (std::find(names.begin(), names.end(), solver) == names.end()) {
    throw ConfigError("config key 'solver' has unknown value '" + solver + "'");
  }
}

Index RunConfig::budget(Index p) const {
  const Index kk = k ? static_cast<Index>(*k) : budget_for_sparsity(*sparsity, p);
  return kk;
}

std::string RunConfig::digest() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig read_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = parse_json_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return RunConfig::from_json(j);
}

void write_config(const std::filesystem::path& path, const RunConfig& cfg) {
  write_json_file(path, cfg.to_json());
}

const std::string& csv_header() {
  static const std::string header =
      "solver,p,n,k,lambda,seed,objective_initial,objective_final,nnz,wall_ms,iterations";
  return header;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_csv_row(const CsvRow& r) {
  std::ostringstream ss;
  ss << csv_field(r.solver) << ',' << r.p << ',' << r.n << ',' << r.k << ','
     << number(r.lambda) << ',' << r.seed << ',' << number(r.objective_initial) << ','
     << number(r.objective_final) << ',' << r.nnz << ',' << number(r.wall_ms) << ','
     << r.iterations;
  return ss.str();
}

void append_csv(const std::filesystem::path& path, const CsvRow& row) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) ||
                     std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  if (fresh) out << csv_header() << "\r\n";
  out << format_csv_row(row) << "\r\n";
  if (!out) throw std::runtime_error("append to " + path.string() + " failed");
}

}  // namespace chita::io
