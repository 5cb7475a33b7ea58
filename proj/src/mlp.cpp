#include "eppo/mlp.hpp"

#include <cmath>
#include <string>

#include "eppo/errors.hpp"

namespace eppo::nn {

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) {
    throw ShapeError("mlp: input and output dims must be >= 1");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw ShapeError("mlp: hidden dims must be >= 1");
  }
}

int MlpSpec::layer_input_dim(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_dims[layer - 1];
}

int MlpSpec::layer_output_dim(std::size_t layer) const {
  return layer + 1 == num_layers() ? output_dim : hidden_dims[layer];
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const auto in = static_cast<std::size_t>(layer_input_dim(l));
    const auto out = static_cast<std::size_t>(layer_output_dim(l));
    n += out * in + out;
    if (layer_has_norm(l)) n += 2 * out;
  }
  return n;
}

ParamSet::ParamSet(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t cursor = 0;
  offsets_.resize(spec_.num_layers());
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const auto in = static_cast<std::size_t>(spec_.layer_input_dim(l));
    const auto out = static_cast<std::size_t>(spec_.layer_output_dim(l));
    offsets_[l].weight = cursor;
    cursor += out * in;
    offsets_[l].bias = cursor;
    cursor += out;
    if (spec_.layer_has_norm(l)) {
      offsets_[l].gain = cursor;
      cursor += out;
      offsets_[l].shift = cursor;
      cursor += out;
    }
  }
  data_.assign(cursor, 0.0);
}

ParamSet::MatrixMap ParamSet::weight(std::size_t l) {
  return {data_.data() + offsets_[l].weight, spec_.layer_output_dim(l), spec_.layer_input_dim(l)};
}
ParamSet::ConstMatrixMap ParamSet::weight(std::size_t l) const {
  return {data_.data() + offsets_[l].weight, spec_.layer_output_dim(l), spec_.layer_input_dim(l)};
}
ParamSet::VectorMap ParamSet::bias(std::size_t l) {
  return {data_.data() + offsets_[l].bias, spec_.layer_output_dim(l)};
}
ParamSet::ConstVectorMap ParamSet::bias(std::size_t l) const {
  return {data_.data() + offsets_[l].bias, spec_.layer_output_dim(l)};
}
ParamSet::VectorMap ParamSet::gain(std::size_t l) {
  return {data_.data() + offsets_[l].gain, spec_.layer_output_dim(l)};
}
ParamSet::ConstVectorMap ParamSet::gain(std::size_t l) const {
  return {data_.data() + offsets_[l].gain, spec_.layer_output_dim(l)};
}
ParamSet::VectorMap ParamSet::shift(std::size_t l) {
  return {data_.data() + offsets_[l].shift, spec_.layer_output_dim(l)};
}
ParamSet::ConstVectorMap ParamSet::shift(std::size_t l) const {
  return {data_.data() + offsets_[l].shift, spec_.layer_output_dim(l)};
}

void ParamSet::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool ParamSet::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamSet init_params(const MlpSpec& spec, std::mt19937_64& rng, double output_scale) {
  ParamSet params(spec);
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_input_dim(l)));
    const double scale = (l + 1 == spec.num_layers()) ? output_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = params.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * dist(rng);
    }
    auto b = params.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = scale * dist(rng);
    if (spec.layer_has_norm(l)) {
      params.gain(l).setOnes();
      params.shift(l).setZero();
    }
  }
  return params;
}

Matrix forward_batch(const ParamSet& params, const Matrix& input, ForwardCache* cache) {
  const MlpSpec& spec = params.spec();
  if (input.rows() != spec.input_dim) {
    throw ShapeError("mlp forward: expected input dim " + std::to_string(spec.input_dim) +
                     ", got " + std::to_string(input.rows()));
  }
  const std::size_t n_layers = spec.num_layers();
  if (cache != nullptr) {
    cache->inputs.assign(n_layers, Matrix());
    cache->normalized.assign(n_layers, Matrix());
    cache->inv_std.assign(n_layers, RowVector());
    cache->activations_in.assign(n_layers, Matrix());
  }

  Matrix x = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix z = params.weight(l) * x;
    z.colwise() += params.bias(l);
    if (cache != nullptr) cache->inputs[l] = std::move(x);
    if (l + 1 == n_layers) return z;

    if (spec.layer_has_norm(l)) {
      const double width = static_cast<double>(z.rows());
      RowVector mean = z.colwise().sum() / width;
      z.rowwise() -= mean;
      RowVector inv_std =
          ((z.array().square().colwise().sum() / width) + kLayerNormEpsilon).rsqrt().matrix();
      Matrix xhat = z * inv_std.asDiagonal();
      z = (xhat.array().colwise() * params.gain(l).array()).matrix();
      z.colwise() += params.shift(l);
      if (cache != nullptr) {
        cache->normalized[l] = std::move(xhat);
        cache->inv_std[l] = std::move(inv_std);
      }
    }
    if (cache != nullptr) cache->activations_in[l] = z;
    x = z.cwiseMax(0.0);
  }
  return x;  // unreachable: the loop returns from the output layer
}

Matrix backward_batch(const ParamSet& params, const ForwardCache& cache, const Matrix& output_grad,
                      ParamSet& grads) {
  const MlpSpec& spec = params.spec();
  if (output_grad.rows() != spec.output_dim) {
    throw ShapeError("mlp backward: expected output grad dim " + std::to_string(spec.output_dim) +
                     ", got " + std::to_string(output_grad.rows()));
  }
  if (!(grads.spec() == spec)) throw ShapeError("mlp backward: gradient layout mismatch");
  if (cache.inputs.size() != spec.num_layers()) {
    throw ShapeError("mlp backward: cache does not belong to this network");
  }

  Matrix dz = output_grad;
  for (std::size_t l = spec.num_layers(); l-- > 0;) {
    grads.weight(l).noalias() += dz * cache.inputs[l].transpose();
    grads.bias(l) += dz.rowwise().sum();
    Matrix dx = params.weight(l).transpose() * dz;
    if (l == 0) return dx;

    // Back through relu and (optionally) layer norm of hidden layer l-1.
    const std::size_t h = l - 1;
    Matrix dy = (cache.activations_in[h].array() > 0.0).select(dx, 0.0);
    if (spec.layer_has_norm(h)) {
      const Matrix& xhat = cache.normalized[h];
      grads.gain(h) += (dy.array() * xhat.array()).rowwise().sum().matrix();
      grads.shift(h) += dy.rowwise().sum();
      Matrix dxhat = (dy.array().colwise() * params.gain(h).array()).matrix();
      const double width = static_cast<double>(dxhat.rows());
      RowVector sum_dxhat = dxhat.colwise().sum();
      RowVector sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum().matrix();
      Matrix centered = dxhat * width;
      centered.rowwise() -= sum_dxhat;
      centered -= xhat * sum_dxhat_xhat.asDiagonal();
      dz = centered * (cache.inv_std[h] / width).asDiagonal();
    } else {
      dz = std::move(dy);
    }
  }
  return {};
}

std::vector<double> forward(const MlpSpec& spec, const ParamSet& params,
                            std::span<const double> input) {
  if (!(params.spec() == spec)) throw ShapeError("mlp forward: parameters do not match spec");
  if (input.size() != static_cast<std::size_t>(spec.input_dim)) {
    throw ShapeError("mlp forward: expected input dim " + std::to_string(spec.input_dim) +
                     ", got " + std::to_string(input.size()));
  }
  Matrix x = Eigen::Map<const Matrix>(input.data(), spec.input_dim, 1);
  Matrix y = forward_batch(params, x);
  return {y.data(), y.data() + y.size()};
}

Gradients backward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input,
                   std::span<const double> output_grad) {
  if (!(params.spec() == spec)) throw ShapeError("mlp backward: parameters do not match spec");
  if (input.size() != static_cast<std::size_t>(spec.input_dim) ||
      output_grad.size() != static_cast<std::size_t>(spec.output_dim)) {
    throw ShapeError("mlp backward: input or output gradient has the wrong length");
  }
  ForwardCache cache;
  Matrix x = Eigen::Map<const Matrix>(input.data(), spec.input_dim, 1);
  forward_batch(params, x, &cache);
  Gradients out{ParamSet(spec), {}};
  Matrix g = Eigen::Map<const Matrix>(output_grad.data(), spec.output_dim, 1);
  Matrix dx = backward_batch(params, cache, g, out.params);
  out.input.assign(dx.data(), dx.data() + dx.size());
  return out;
}

}  // namespace eppo::nn
