#pragma once

#include "chita/core.hpp"
#include "chita/fisher.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace chita::io {

/// Malformed or truncated file. offset() is the byte position of the fault.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Invalid run configuration (unknown key, bad range, wrong type).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType : std::uint8_t { float32 = 1, float64 = 2 };

// Binary containers, little-endian:
//   "CHITAMTX" u32 version=1, u8 dtype, 3 zero bytes, u64 n, u64 p,
//              n·p values row-major
//   "CHITAVEC" u32 version=1, u8 dtype, 3 zero bytes, u64 length, values
// float32 payloads are widened to double on read.

struct MatrixFile {
  Eigen::MatrixXd data;
  DType dtype = DType::float64;
};

struct VectorFile {
  Vector data;
  DType dtype = DType::float64;
};

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  DType dtype = DType::float64);
MatrixFile read_matrix(const std::filesystem::path& path);

void write_vector(const std::filesystem::path& path, const Vector& v,
                  DType dtype = DType::float64);
VectorFile read_vector(const std::filesystem::path& path);

/// UTF-8 JSON array of {"name", "length"}.
void write_layer_map(const std::filesystem::path& path,
                     const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> read_layer_map(const std::filesystem::path& path);

/// UTF-8 JSON {p, k, indices (ascending), values, objective, config_digest}.
struct SolutionFile {
  std::uint64_t p = 0;
  std::uint64_t k = 0;
  std::vector<std::uint64_t> indices;
  std::vector<double> values;
  double objective = 0.0;
  std::string config_digest;

  static SolutionFile from_solution(const SparseSolution& s, Index k,
                                    std::string digest);
  Vector dense() const;
};

void write_solution(const std::filesystem::path& path, const SolutionFile& s);
SolutionFile read_solution(const std::filesystem::path& path);

/// Run configuration. Exactly one of sparsity or k is set.
struct RunConfig {
  double lambda = 1e-3;
  std::optional<double> sparsity;
  std::optional<std::int64_t> k;
  int t_ht = 5;
  int t_cd = 5;
  double gamma = 2.0;
  double active_mult = 2.0;
  std::int64_t block_size = 10000;
  int stages = 1;
  std::string schedule = "exponential";
  double tau_first = 0.5;
  std::int64_t n = 128;
  std::int64_t m = 1;
  std::uint64_t seed = 0;
  std::string solver = "chita-cd";

  /// Strict parse: unknown keys and type or range violations throw
  /// ConfigError naming the key.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  /// Nonzero budget for a problem with p parameters.
  Index budget(Index p) const;
  /// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string digest() const;
};

RunConfig read_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const RunConfig& cfg);

/// Solvers accepted in RunConfig::solver.
const std::vector<std::string>& known_solvers();

/// Result row appended by the prune command.
struct CsvRow {
  std::string solver;
  Index p = 0;
  Index n = 0;
  Index k = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  Index nnz = 0;
  double wall_ms = 0.0;
  int iterations = 0;
};

const std::string& csv_header();
/// RFC-4180 field quoting.
std::string csv_field(const std::string& value);
std::string format_csv_row(const CsvRow& row);
/// Appends the row, writing the header first if the file is new or empty.
void append_csv(const std::filesystem::path& path, const CsvRow& row);

}  // namespace chita::io
