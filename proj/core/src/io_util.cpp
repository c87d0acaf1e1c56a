#include "cvas/io_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "cvas/error.hpp"
#include "cvas/random.hpp"

namespace cvas {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kNoOppositeClassPrototypes: return "NoOppositeClassPrototypes";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kZeroSlope: return "ZeroSlope";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNegativeRadius: return "NegativeRadius";
    case ErrorCode::kRadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::kIdenticalMeans: return "IdenticalMeans";
    case ErrorCode::kSolverDidNotConverge: return "SolverDidNotConverge";
    case ErrorCode::kNoActionableRecourse: return "NoActionableRecourse";
    case ErrorCode::kNoValidRecourse: return "NoValidRecourse";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kBadLabelValue: return "BadLabelValue";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(
      n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ stream) ^ index);
}

Matrix sample_uniform_ball(const Vector& center, double radius, std::size_t n,
                           Rng& rng) {
  const auto d = center.size();
  Matrix out(static_cast<Eigen::Index>(n), d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vector dir(d);
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < d; ++j) dir(j) = normal(rng);
      norm = dir.norm();
    } while (norm == 0.0);
    const double r =
        radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
    out.row(static_cast<Eigen::Index>(i)) = center + (r / norm) * dir;
  }
  return out;
}

}  // namespace cvas
