#include "gridloc/neuro/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace gridloc::neuro {
namespace {

template <typename T>
void put(std::vector<char>& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void read(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw CheckpointError(CheckpointError::Code::Truncated,
                            fmt::format("checkpoint: truncated at byte {} (need {} more)", pos_, n));
  }
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<char> encode_checkpoint(const NetParams<float>& params) {
  std::vector<char> out(kCheckpointMagic, kCheckpointMagic + 4);
  put<std::uint8_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const auto& info = params.spec.tensors()[i];
    const auto& t = params.tensors[i];
    put<std::uint16_t>(out, static_cast<std::uint16_t>(info.name.size()));
    out.insert(out.end(), info.name.begin(), info.name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(info.dims.size()));
    for (auto d : info.dims) put<std::uint32_t>(out, d);
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) put<float>(out, t(r, c));
  }
  return out;
}

std::vector<CheckpointTensor> decode_checkpoint(const std::vector<char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw CheckpointError(CheckpointError::Code::BadMagic, "checkpoint: bad magic (expected GLQN)");
  Reader in(bytes);
  in.get<std::uint32_t>();
  const auto version = in.get<std::uint8_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Code::BadVersion, fmt::format("checkpoint: unsupported version {}", version));
  const auto count = in.get<std::uint32_t>();
  std::vector<CheckpointTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    t.name.resize(in.get<std::uint16_t>());
    in.read(t.name.data(), t.name.size());
    const auto rank = in.get<std::uint8_t>();
    std::size_t n = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      t.dims.push_back(in.get<std::uint32_t>());
      n *= t.dims.back();
    }
    if (n > bytes.size())
      throw CheckpointError(CheckpointError::Code::Truncated, fmt::format("checkpoint: tensor {} larger than file", t.name));
    t.values.resize(n);
    in.read(t.values.data(), n * sizeof(float));
    tensors.push_back(std::move(t));
  }
  if (!in.done()) throw CheckpointError(CheckpointError::Code::Truncated, "checkpoint: trailing bytes after last tensor");
  return tensors;
}

void save_checkpoint(const NetParams<float>& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Code::Io, fmt::format("checkpoint: cannot write {}", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Code::Io, fmt::format("checkpoint: write failed for {}", path.string()));
}

NetParams<float> load_checkpoint(const std::filesystem::path& path, const NetSpec& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Code::Io, fmt::format("checkpoint: cannot read {}", path.string()));
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto tensors = decode_checkpoint(bytes);

  NetParams<float> p = zero_params<float>(expected);
  const auto& infos = expected.tensors();
  if (tensors.size() != infos.size())
    throw CheckpointError(CheckpointError::Code::ShapeMismatch,
                          fmt::format("checkpoint: {} tensors, network expects {}", tensors.size(), infos.size()));
  for (std::size_t i = 0; i < infos.size(); ++i) {
    if (tensors[i].name != infos[i].name || tensors[i].dims != infos[i].dims)
      throw CheckpointError(CheckpointError::Code::ShapeMismatch,
                            fmt::format("checkpoint: tensor {} ('{}') does not match expected '{}'", i, tensors[i].name,
                                        infos[i].name));
    auto& t = p.tensors[i];
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = tensors[i].values[k++];
  }
  return p;
}

}  // namespace gridloc::neuro
