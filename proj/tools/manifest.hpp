#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bergman/exact.hpp"
#include "bergman/geometry.hpp"
#include "bergman/morse.hpp"

namespace bergman::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Validation failure with a 1-based source position (0 when unknown).
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& what, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

enum class Command { describe, coeffs, exact, compare, heat, morse };
enum class Format { json, csv };

const char* to_string(Command c) noexcept;
const char* to_string(Format f) noexcept;

struct Tolerances {
  double quadrature = 1e-12;  // radial moments
  double dense = 1e-11;       // dense Gram refinement
  double stratum = 1e-6;      // stratum integrals
  double derivative = 1e-6;   // agreement required between coefficient methods
  double degeneracy = kDefaultDegeneracyTol;
};

struct OutputSpec {
  Format format = Format::json;
  std::string path;  // empty writes to stdout
  bool plot_data = false;
};

struct HeatSpec {
  std::vector<double> eigenvalues;
  std::vector<double> t;
  int q = 0;
  int k = 1;
  int random_draws = 0;  // extra bound checks on seeded random spectra
};

struct RunManifest {
  // Geometry is built during validation so construction errors surface as
  // manifest errors.
  std::optional<ModelGeometry> geometry;
  Command command = Command::describe;
  std::vector<Point> points;
  std::vector<std::pair<Point, Point>> pairs;
  std::vector<int> k_list;
  int q = 0;
  Tolerances tolerances;
  OutputSpec output;
  HeatSpec heat;
  int nuisance_terms = 0;
  std::optional<std::vector<std::vector<long>>> dims;  // morse: per k, dim H^0 .. dim H^n
  std::uint64_t hash = 0;                                 // FNV-1a of the manifest bytes
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_string(std::uint64_t h);

RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::string& path);

QuadSpec quad_spec(const RunManifest& m, int threads);
MorseQuad morse_quad(const RunManifest& m, int threads);

}  // namespace bergman::cli
