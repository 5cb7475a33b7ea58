#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace eppo::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { kRelu };

// Feedforward layout: input -> [linear -> (layer norm) -> relu] x hidden -> linear.
// An empty hidden list gives a single affine map.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims = {64, 64};
  int output_dim = 1;
  bool use_layer_norm = true;
  Activation activation = Activation::kRelu;

  // Throws ShapeError if any dimension is < 1.
  void validate() const;
  std::size_t num_layers() const { return hidden_dims.size() + 1; }
  int layer_input_dim(std::size_t layer) const;
  int layer_output_dim(std::size_t layer) const;
  bool layer_has_norm(std::size_t layer) const {
    return use_layer_norm && layer + 1 < num_layers();
  }
  std::size_t parameter_count() const;

  bool operator==(const MlpSpec&) const = default;
};

// All trainable values of one network in a single flat buffer. Weights are stored
// column-major (out x in); each normalized hidden layer also owns a gain and a shift.
// The same type holds gradients.
class ParamSet {
 public:
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  ParamSet() = default;
  // Zero-filled storage laid out for `spec`.
  explicit ParamSet(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  MatrixMap weight(std::size_t layer);
  ConstMatrixMap weight(std::size_t layer) const;
  VectorMap bias(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;
  VectorMap gain(std::size_t layer);
  ConstVectorMap gain(std::size_t layer) const;
  VectorMap shift(std::size_t layer);
  ConstVectorMap shift(std::size_t layer) const;

  void set_zero();
  bool all_finite() const;

  bool operator==(const ParamSet& other) const {
    return spec_ == other.spec_ && data_ == other.data_;
  }

 private:
  struct Offsets {
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::size_t gain = 0;
    std::size_t shift = 0;
  };

  MlpSpec spec_;
  std::vector<double> data_;
  std::vector<Offsets> offsets_;
};

// Intermediate values recorded by a batched forward pass, consumed by backward.
struct ForwardCache {
  std::vector<Matrix> inputs;      // input of each linear layer (in x B)
  std::vector<Matrix> normalized;  // layer-norm x-hat per hidden layer
  std::vector<RowVector> inv_std;  // per-column 1/sqrt(var + eps)
  std::vector<Matrix> activations_in;  // value fed into relu per hidden layer
};

inline constexpr double kLayerNormEpsilon = 1e-5;

// Uniform fan-in initialization; gains 1, shifts 0. The last layer is multiplied by
// `output_scale`.
ParamSet init_params(const MlpSpec& spec, std::mt19937_64& rng, double output_scale = 1.0);

// Batched forward over the columns of `input` (input_dim x B).
Matrix forward_batch(const ParamSet& params, const Matrix& input, ForwardCache* cache = nullptr);

// Reverse pass for a cached forward. Gradients are summed over the batch and added into
// `grads`; returns the gradient with respect to the input batch.
Matrix backward_batch(const ParamSet& params, const ForwardCache& cache, const Matrix& output_grad,
                      ParamSet& grads);

std::vector<double> forward(const MlpSpec& spec, const ParamSet& params,
                            std::span<const double> input);

struct Gradients {
  ParamSet params;
  std::vector<double> input;
};

Gradients backward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input,
                   std::span<const double> output_grad);

}  // namespace eppo::nn
