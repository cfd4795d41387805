#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridloc::neuro {

enum class LayerKind { Conv, Dense, Elu, Flatten };

/// Height/width/channels of an activation. Dense activations use h = w = 1.
struct Shape3 {
  int h = 1;
  int w = 1;
  int c = 1;

  int size() const { return h * w * c; }
  bool operator==(const Shape3&) const = default;
};

/// Spatial size after a 3x3 stride-2 convolution with one pixel of leading pad
/// (and one trailing pad on odd inputs).
constexpr int conv_out_size(int in) { return (in + 1) / 2; }

inline constexpr int kKernel = 3;
inline constexpr int kStride = 2;

struct LayerSpec {
  LayerKind kind = LayerKind::Flatten;
  Shape3 in;
  Shape3 out;
  int tensor_index = -1;  // weight tensor for Conv/Dense; bias follows at +1

  bool has_params() const { return kind == LayerKind::Conv || kind == LayerKind::Dense; }
  bool operator==(const LayerSpec&) const = default;
};

/// Name, checkpoint dims and in-memory matrix shape for one parameter tensor.
/// Conv weights are (out_channels x 9*in_channels) with column (ky*3+kx)*in_c + ci,
/// i.e. row-major [out, 3, 3, in]. Dense weights are (out x in). Biases are (n x 1).
struct TensorInfo {
  std::string name;
  std::vector<std::uint32_t> dims;
  int rows = 0;
  int cols = 0;
  int fan_in = 0;
  bool is_bias = false;

  bool operator==(const TensorInfo&) const = default;
};

/// Ordered layer stack. Activations are HWC-interleaved columns, one per sample.
class NetSpec {
 public:
  NetSpec() = default;
  explicit NetSpec(Shape3 input) : input_(input) {}

  NetSpec& conv(int out_channels);
  NetSpec& dense(int out_features);
  NetSpec& elu();
  NetSpec& flatten();

  /// conv_layers x [conv + elu] -> flatten -> hidden dense + elu -> linear head.
  static NetSpec backbone(Shape3 input, int conv_layers, int conv_channels, const std::vector<int>& hidden, int outputs);
  /// Q network: 2-channel h x w state, 4 x conv(32), dense 512-128-64, 3 outputs.
  static NetSpec dqn(int height, int width);
  /// Keypoint regressor: the DQN backbone with a 2-wide head.
  static NetSpec keypoint(int height, int width);
  static NetSpec mlp(int inputs, const std::vector<int>& hidden, int outputs);

  const Shape3& input() const { return input_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  int input_size() const { return input_.size(); }
  int output_size() const { return layers_.empty() ? input_.size() : layers_.back().out.size(); }
  std::int64_t parameter_count() const;
  /// Parameters of every layer except the final dense head.
  std::int64_t backbone_parameter_count() const;
  std::string describe() const;

  bool operator==(const NetSpec&) const = default;

 private:
  Shape3 current() const { return layers_.empty() ? input_ : layers_.back().out; }
  void add_params(const std::string& prefix, int rows, int cols, std::vector<std::uint32_t> wdims, int fan_in);

  Shape3 input_;
  std::vector<LayerSpec> layers_;
  std::vector<TensorInfo> tensors_;
  int conv_count_ = 0;
  int dense_count_ = 0;
};

}  // namespace gridloc::neuro
