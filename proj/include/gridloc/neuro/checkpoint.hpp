#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridloc/error.hpp"
#include "gridloc/neuro/net.hpp"

namespace gridloc::neuro {

/// Binary layout, all integers little-endian:
///   "GLQN" | u8 version (1) | u32 tensor count |
///   per tensor: u16 name length, UTF-8 name, u8 rank, u32 dims[rank],
///               f32 values in row-major order.
inline constexpr char kCheckpointMagic[4] = {'G', 'L', 'Q', 'N'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public DataError {
 public:
  enum class Code { Io, BadMagic, BadVersion, Truncated, ShapeMismatch };
  CheckpointError(Code code, const std::string& what) : DataError(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct CheckpointTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;  // row-major
};

std::vector<char> encode_checkpoint(const NetParams<float>& params);
std::vector<CheckpointTensor> decode_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const NetParams<float>& params, const std::filesystem::path& path);
/// Reads a checkpoint and checks every tensor name and shape against `expected`.
NetParams<float> load_checkpoint(const std::filesystem::path& path, const NetSpec& expected);

}  // namespace gridloc::neuro
