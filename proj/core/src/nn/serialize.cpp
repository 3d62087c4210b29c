#include "xgem/nn/serialize.hpp"

#include <string_view>

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"

namespace xgem::nn {

using nlohmann::json;

void to_json(json& j, const MlpSpec& s) {
  std::vector<std::string> acts;
  for (auto a : s.activations) acts.push_back(to_string(a));
  j = json{{"widths", s.widths}, {"activations", acts}, {"head", to_string(s.head)}};
}

void from_json(const json& j, MlpSpec& s) {
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  s.activations.clear();
  if (j.contains("activations")) {
    for (const auto& a : j.at("activations")) s.activations.push_back(activation_from_string(a.get<std::string>()));
  } else if (s.widths.size() > 2) {
    s.activations.assign(s.widths.size() - 2, Activation::relu);
  }
  s.head = head_from_string(j.value("head", std::string("softmax")));
}

void to_json(json& j, const VaeSpec& s) {
  j = json{{"data_dim", s.data_dim},
           {"latent_dim", s.latent_dim},
           {"hidden", s.hidden},
           {"activation", to_string(s.activation)},
           {"output", to_string(s.output)},
           {"kl_weight", s.kl_weight}};
}

void from_json(const json& j, VaeSpec& s) {
  VaeSpec d;
  s.data_dim = j.value("data_dim", d.data_dim);
  s.latent_dim = j.value("latent_dim", d.latent_dim);
  s.hidden = j.value("hidden", d.hidden);
  s.activation = activation_from_string(j.value("activation", to_string(d.activation)));
  s.output = decoder_output_from_string(j.value("output", to_string(d.output)));
  s.kl_weight = j.value("kl_weight", d.kl_weight);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},       {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
           {"optimizer", to_string(c.optimizer)}, {"beta1", c.beta1}, {"beta2", c.beta2},
           {"epsilon", c.epsilon},     {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.optimizer = optimizer_from_string(j.value("optimizer", to_string(d.optimizer)));
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.seed = j.value("seed", d.seed);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "XGEMCKPT";

void write_checkpoint(const std::filesystem::path& path, ModelKind kind, const json& spec,
                      const std::vector<nd::Tensor>& params) {
  io::ByteWriter w;
  w.text(kMagic);
  w.u32_le(kCheckpointVersion);
  w.u32_le(static_cast<std::uint32_t>(kind));
  const std::string text = spec.dump();
  w.u64_le(text.size());
  w.text(text);
  w.u32_le(static_cast<std::uint32_t>(params.size()));
  for (const auto& t : params) {
    w.u32_le(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.u64_le(e);
    for (double v : t.values()) w.f64_le(v);
  }
  io::write_file(path, w.buffer());
}

struct RawCheckpoint {
  ModelKind kind;
  json spec;
  std::vector<nd::Tensor> params;
};

RawCheckpoint read_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  if (bytes.size() < kMagic.size() + 4) {
    throw FormatError(FormatError::Kind::version_mismatch, path.string() + ": checkpoint header is missing");
  }
  if (r.text(kMagic.size()) != kMagic) {
    throw FormatError(FormatError::Kind::version_mismatch, path.string() + ": not an xgem checkpoint (bad header)");
  }
  const auto version = r.u32_le();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::version_mismatch,
                      path.string() + ": checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  const auto kind = r.u32_le();
  if (kind != static_cast<std::uint32_t>(ModelKind::classifier) && kind != static_cast<std::uint32_t>(ModelKind::vae)) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": unknown model kind " + std::to_string(kind));
  }
  const auto spec_len = r.u64_le();
  if (spec_len > r.remaining()) throw FormatError(FormatError::Kind::truncated, path.string() + ": truncated spec");
  json spec;
  try {
    spec = json::parse(r.text(spec_len));
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": malformed spec: " + e.what());
  }
  const auto count = r.u32_le();
  std::vector<nd::Tensor> params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = r.u32_le();
    if (rank > 8) throw FormatError(FormatError::Kind::inconsistent, path.string() + ": implausible tensor rank");
    nd::Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.u64_le());
    const auto n = nd::element_count(shape);
    if (n > r.remaining() / 8) throw FormatError(FormatError::Kind::truncated, path.string() + ": truncated tensor data");
    std::vector<double> data(n);
    for (auto& v : data) v = r.f64_le();
    try {
      params.emplace_back(std::move(shape), std::move(data));
    } catch (const NumericError& e) {
      throw FormatError(FormatError::Kind::inconsistent, path.string() + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": trailing bytes after last tensor");
  }
  return {static_cast<ModelKind>(kind), std::move(spec), std::move(params)};
}

template <typename Model>
Model build(const std::filesystem::path& path, RawCheckpoint raw) {
  try {
    if constexpr (std::is_same_v<Model, Classifier>) {
      return Classifier(Mlp(raw.spec.get<MlpSpec>(), std::move(raw.params)));
    } else {
      return Vae(raw.spec.get<VaeSpec>(), std::move(raw.params));
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": spec and tensors disagree: " + e.what());
  }
}

}  // namespace

void save_model(const std::filesystem::path& path, const Classifier& model) {
  write_checkpoint(path, ModelKind::classifier, json(model.network().spec()), model.network().parameters());
}

void save_model(const std::filesystem::path& path, const Vae& model) {
  write_checkpoint(path, ModelKind::vae, json(model.spec()), model.parameters());
}

AnyModel load_model(const std::filesystem::path& path) {
  RawCheckpoint raw = read_checkpoint(path);
  if (raw.kind == ModelKind::classifier) return build<Classifier>(path, std::move(raw));
  return build<Vae>(path, std::move(raw));
}

Classifier load_classifier(const std::filesystem::path& path) {
  RawCheckpoint raw = read_checkpoint(path);
  if (raw.kind != ModelKind::classifier) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": checkpoint holds a VAE, not a classifier");
  }
  return build<Classifier>(path, std::move(raw));
}

Vae load_vae(const std::filesystem::path& path) {
  RawCheckpoint raw = read_checkpoint(path);
  if (raw.kind != ModelKind::vae) {
    throw FormatError(FormatError::Kind::inconsistent, path.string() + ": checkpoint holds a classifier, not a VAE");
  }
  return build<Vae>(path, std::move(raw));
}

}  // namespace xgem::nn
