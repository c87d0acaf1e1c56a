#include <bit>
#include <cstring>

#include "cvas/blackbox.hpp"
#include "cvas/error.hpp"
#include "cvas/io_util.hpp"

namespace cvas {
namespace {

constexpr char kMagic[8] = {'C', 'V', 'A', 'S', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw Error(ErrorCode::kFormatError, "model file truncated");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i]))
              << (8 * i);
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kFormatError, "model file truncated");
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const MlpModel& model) {
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kVersion);
  const auto& dims = model.layer_dims();
  put_le(out, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) put_le(out, static_cast<std::uint64_t>(d));
  put_le(out, model.threshold());
  for (std::size_t l = 0; l < model.weights().size(); ++l) {
    const Matrix& w = model.weights()[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_le(out, w(r, c));
    const Vector& b = model.biases()[l];
    for (Eigen::Index i = 0; i < b.size(); ++i) put_le(out, b(i));
  }
  return out;
}

MlpModel deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (std::memcmp(in.take(sizeof(kMagic)).data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kFormatError, "not a cvas model file");
  }
  if (in.get<std::uint32_t>() != kVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported model file version");
  }
  const auto n_dims = in.get<std::uint32_t>();
  if (n_dims != kHiddenWidths.size() + 2) {
    throw Error(ErrorCode::kFormatError, "unexpected layer count");
  }
  std::vector<Eigen::Index> dims(n_dims);
  for (auto& d : dims) {
    const auto v = in.get<std::uint64_t>();
    if (v == 0 || v > (1u << 20)) throw Error(ErrorCode::kFormatError, "bad layer width");
    d = static_cast<Eigen::Index>(v);
  }
  const double threshold = in.get<double>();
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in.get<double>();
    Vector b(dims[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = in.get<double>();
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  if (!in.done()) throw Error(ErrorCode::kFormatError, "trailing bytes in model file");
  return MlpModel(std::move(weights), std::move(biases), threshold);
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

MlpModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace cvas
