#include "xgem/nn/vae.hpp"

#include <cmath>

#include "xgem/error.hpp"

namespace xgem::nn {

std::string to_string(DecoderOutput o) { return o == DecoderOutput::sigmoid ? "sigmoid" : "linear"; }

DecoderOutput decoder_output_from_string(const std::string& name) {
  if (name == "sigmoid") return DecoderOutput::sigmoid;
  if (name == "linear") return DecoderOutput::linear;
  throw ConfigError("unknown decoder output '" + name + "'");
}

void VaeSpec::validate() const {
  if (data_dim == 0) throw ConfigError("VaeSpec.data_dim must be positive");
  if (latent_dim == 0) throw ConfigError("VaeSpec.latent_dim must be at least 1");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("VaeSpec hidden widths must be positive");
  }
  if (activation == Activation::sigmoid) {
    throw ConfigError("VaeSpec activation is relu, tanh or identity");
  }
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) throw ConfigError("VaeSpec.kl_weight must be >= 0");
}

namespace {

std::vector<std::size_t> encoder_widths(const VaeSpec& s) {
  std::vector<std::size_t> w{s.data_dim};
  w.insert(w.end(), s.hidden.begin(), s.hidden.end());
  return w;
}

std::vector<std::size_t> decoder_widths(const VaeSpec& s) {
  std::vector<std::size_t> w{s.latent_dim};
  w.insert(w.end(), s.hidden.rbegin(), s.hidden.rend());
  w.push_back(s.data_dim);
  return w;
}

void append_shapes(std::vector<nd::Shape>& out, const std::vector<std::size_t>& widths) {
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    out.push_back({widths[l], widths[l + 1]});
    out.push_back({1, widths[l + 1]});
  }
}

nd::Tensor as_batch(const nd::Tensor& t, std::size_t width, const char* what) {
  if (t.rank() == 1 && t.size() == width) return t.reshaped({1, width});
  if (t.rank() == 2 && t.cols() == width) return t;
  throw ShapeError(std::string(what) + " expects width " + std::to_string(width) + ", got " + nd::to_string(t.shape()));
}

}  // namespace

std::vector<nd::Shape> vae_parameter_shapes(const VaeSpec& spec) {
  std::vector<nd::Shape> shapes;
  const auto enc = encoder_widths(spec);
  append_shapes(shapes, enc);
  const std::size_t top = enc.back();
  for (int head = 0; head < 2; ++head) {
    shapes.push_back({top, spec.latent_dim});
    shapes.push_back({1, spec.latent_dim});
  }
  append_shapes(shapes, decoder_widths(spec));
  return shapes;
}

Vae::Vae(VaeSpec spec, std::vector<nd::Tensor> parameters) : spec_(std::move(spec)), params_(std::move(parameters)) {
  spec_.validate();
  const auto shapes = vae_parameter_shapes(spec_);
  if (shapes.size() != params_.size()) {
    throw ShapeError("Vae expects " + std::to_string(shapes.size()) + " parameter tensors, got " +
                     std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params_[i].shape() != shapes[i]) {
      throw ShapeError("Vae parameter " + std::to_string(i) + " has shape " + nd::to_string(params_[i].shape()) +
                       ", expected " + nd::to_string(shapes[i]));
    }
  }
}

Vae Vae::initialize(VaeSpec spec, Rng& rng) {
  spec.validate();
  const auto enc = encoder_widths(spec);
  auto params = glorot_layers(enc, rng);
  const std::size_t top = enc.back();
  for (int head = 0; head < 2; ++head) {
    const std::size_t w[] = {top, spec.latent_dim};
    auto p = glorot_layers(w, rng);
    params.insert(params.end(), p.begin(), p.end());
  }
  auto dec = glorot_layers(decoder_widths(spec), rng);
  params.insert(params.end(), dec.begin(), dec.end());
  return Vae(std::move(spec), std::move(params));
}

std::vector<nd::Var> Vae::bind(nd::Graph& graph, bool trainable) const {
  std::vector<nd::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(trainable ? graph.parameter(p) : graph.constant(p));
  return vars;
}

Posterior Vae::encode(nd::Var x, std::span<const nd::Var> params) const {
  const std::size_t n = spec_.hidden.size();
  nd::Var h = x;
  for (std::size_t l = 0; l < n; ++l) h = activate(dense(h, params[2 * l], params[2 * l + 1]), spec_.activation);
  const std::size_t m = 2 * n;
  return {dense(h, params[m], params[m + 1]), dense(h, params[m + 2], params[m + 3])};
}

nd::Var Vae::decode(nd::Var z, std::span<const nd::Var> params) const {
  const std::size_t n = spec_.hidden.size();
  const std::size_t base = 2 * n + 4;
  nd::Var h = z;
  for (std::size_t l = 0; l < n; ++l) {
    h = activate(dense(h, params[base + 2 * l], params[base + 2 * l + 1]), spec_.activation);
  }
  h = dense(h, params[base + 2 * n], params[base + 2 * n + 1]);
  return spec_.output == DecoderOutput::sigmoid ? nd::sigmoid(h) : h;
}

nd::Tensor Vae::encode(const nd::Tensor& x) const {
  nd::Graph g;
  const auto params = bind(g, false);
  const Posterior post = encode(g.constant(as_batch(x, spec_.data_dim, "encode")), params);
  const nd::Tensor& mu = g.value(post.mu);
  return x.rank() == 1 ? mu.reshaped({spec_.latent_dim}) : mu;
}

nd::Tensor Vae::decode(const nd::Tensor& z) const {
  nd::Graph g;
  const nd::Var out = decode(g.constant(as_batch(z, spec_.latent_dim, "decode")));
  const nd::Tensor& x = g.value(out);
  return z.rank() == 1 ? x.reshaped({spec_.data_dim}) : x;
}

nd::Var Vae::decode(nd::Var z) const {
  const auto params = bind(*z.graph, false);
  return decode(z, params);
}

// ---------------------------------------------------------------------------

double reconstruction_error(const Generator& gen, const nd::Tensor& data) {
  if (data.rank() != 2 || data.rows() == 0) throw ShapeError("reconstruction_error expects a non-empty [n x d] batch");
  const nd::Tensor recon = gen.decode(gen.encode(data));
  const std::size_t n = data.rows(), d = data.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double se = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double e = data[i * d + j] - recon[i * d + j];
      se += e * e;
    }
    total += std::sqrt(se / static_cast<double>(d));
  }
  return total / static_cast<double>(n);
}

CertifiedGenerator CertifiedGenerator::certify(std::shared_ptr<const Generator> gen, const nd::Tensor& data,
                                               double threshold) {
  if (!gen) throw ConfigError("certify: null generator");
  const double err = reconstruction_error(*gen, data);
  if (!(err < threshold)) {
    throw GateError("generator quality gate failed: reconstruction error " + std::to_string(err) +
                        " is not below " + std::to_string(threshold),
                    err, threshold);
  }
  return CertifiedGenerator(std::move(gen), err, threshold);
}

}  // namespace xgem::nn
