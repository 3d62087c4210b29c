#include "models.hpp"

#include <memory>
#include <numeric>

#include "xgem/data/attributed.hpp"
#include "xgem/data/idx.hpp"
#include "xgem/data/parabola.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/nn/generator.hpp"
#include "xgem/nn/serialize.hpp"

namespace xgem::tools {

using nlohmann::json;
using experiments::derive_seed;

namespace {

data::Dataset load_data(const json& spec, std::uint64_t seed) {
  const std::string kind = spec.value("kind", "parabola");
  json fields = spec;
  fields.erase("kind");
  if (kind == "parabola") {
    auto c = fields.get<data::ParabolaConfig>();
    c.seed = seed;
    c.validate();
    return data::gen_parabola(c);
  }
  if (kind == "attributed") {
    auto c = fields.get<data::AttributedConfig>();
    c.seed = seed;
    c.validate();
    return data::gen_attributed(c);
  }
  if (kind == "idx") {
    auto ds = data::load_idx(fields.at("images").get<std::string>(), fields.at("labels").get<std::string>());
    const std::size_t limit = fields.value("limit", std::size_t{0});
    if (limit && limit < ds.size()) {
      std::vector<std::size_t> rows(limit);
      std::iota(rows.begin(), rows.end(), 0);
      ds = ds.subset(rows);
    }
    return ds;
  }
  throw ConfigError("train: unknown data.kind '" + kind + "' (parabola, attributed, idx)");
}

struct Models {
  data::Dataset data;
  nn::CertifiedGenerator gen;
  nn::Classifier clf;
};

Models load_models(const std::filesystem::path& dir) {
  const json meta = json::parse(io::read_text(dir / "models.json"));
  auto ds = data::import_dataset(dir / "data").data;
  auto vae = std::make_shared<const nn::Vae>(nn::load_vae(dir / "vae.ckpt"));
  auto gen = nn::CertifiedGenerator::certify(vae, ds.features, meta.at("gate_threshold").get<double>());
  return {std::move(ds), std::move(gen), nn::load_classifier(dir / "classifier.ckpt")};
}

void check_rows(std::size_t rows, const data::Dataset& ds) {
  if (rows == 0 || rows > ds.size()) {
    throw ConfigError("rows must lie in [1, " + std::to_string(ds.size()) + "]");
  }
}

}  // namespace

TrainJob parse_train_job(const json& j, const std::optional<std::uint64_t>& seed) {
  const TrainJob d;
  TrainJob t;
  try {
    t.seed = j.value("seed", d.seed);
    t.data = j.value("data", d.data);
    t.vae = j.contains("vae") ? j.at("vae").get<nn::VaeSpec>() : d.vae;
    t.vae_train = j.contains("vae_train") ? j.at("vae_train").get<nn::TrainConfig>() : d.vae_train;
    t.classifier = j.contains("classifier") ? j.at("classifier").get<nn::MlpSpec>() : d.classifier;
    t.classifier_train =
        j.contains("classifier_train") ? j.at("classifier_train").get<nn::TrainConfig>() : d.classifier_train;
    t.gate_threshold = j.value("gate_threshold", d.gate_threshold);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (seed) t.seed = *seed;
  t.vae_train.seed = derive_seed(t.seed, "vae");
  t.classifier_train.seed = derive_seed(t.seed, "classifier");
  t.vae.validate();
  t.vae_train.validate();
  t.classifier.validate();
  t.classifier_train.validate();
  if (!(t.gate_threshold > 0.0)) throw ConfigError("train: gate_threshold must be positive");
  return t;
}

json run_train(const TrainJob& job, const std::filesystem::path& out) {
  const data::Dataset ds = load_data(job.data, derive_seed(job.seed, "data"));
  if (ds.dim() != job.vae.data_dim || ds.dim() != job.classifier.input_dim()) {
    throw ConfigError("train: data has " + std::to_string(ds.dim()) + " columns, models expect " +
                      std::to_string(job.vae.data_dim) + " and " + std::to_string(job.classifier.input_dim()));
  }
  auto trained_vae = nn::train_vae(ds.features, job.vae, job.vae_train);
  auto vae = std::make_shared<const nn::Vae>(trained_vae.model);
  const auto gen = nn::CertifiedGenerator::certify(vae, ds.features, job.gate_threshold);
  const auto clf = nn::train_classifier(ds.features, ds.labels, job.classifier, job.classifier_train);

  std::filesystem::create_directories(out);
  nn::save_model(out / "vae.ckpt", *vae);
  nn::save_model(out / "classifier.ckpt", clf.model);
  data::export_dataset(out / "data", ds, job.data);
  const json summary = {{"seed", job.seed},
                        {"records", ds.size()},
                        {"gate_threshold", job.gate_threshold},
                        {"reconstruction_error", gen.measured_error()},
                        {"classifier_accuracy", clf.history.back().accuracy},
                        {"vae_loss", trained_vae.history.back().loss}};
  io::write_text(out / "models.json", summary.dump(2) + "\n");
  return summary;
}

json run_model_xgem(const std::filesystem::path& models, const exemplar::XGemConfig& cfg, std::size_t rows,
                    const std::filesystem::path& out) {
  cfg.validate();
  const Models m = load_models(models);
  check_rows(rows, m.data);
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), 0);
  const auto subset = m.data.subset(idx);
  const auto pred = m.clf.predict(subset.features);
  const auto items = exemplar::batch_xgems(subset.features, pred, {}, m.gen, m.clf, cfg);

  std::filesystem::create_directories(out);
  std::string table = "row,source_label,target_label,status,switch_index,steps\n";
  std::size_t switched = 0;
  for (const auto& it : items) {
    table += std::to_string(it.index) + ',';
    if (!it.result) {
      table += std::to_string(pred[it.index]) + ",,failed,,0\n";
      continue;
    }
    const auto& t = it.result->trajectory;
    if (exemplar::switched(t.status)) ++switched;
    table += std::to_string(t.source_label) + ',' + std::to_string(t.target_label) + ',' + exemplar::to_string(t.status) +
             ',' + (t.switch_index ? std::to_string(*t.switch_index) : std::string()) + ',' +
             std::to_string(t.steps.size()) + '\n';
    io::write_text(out / ("trajectory_" + std::to_string(it.index) + ".csv"), exemplar::trajectory_csv(t.steps));
  }
  io::write_text(out / "xgems.csv", table);
  return {{"rows", rows}, {"switched", switched}, {"reconstruction_error", m.gen.measured_error()}};
}

json run_model_attack(const std::filesystem::path& models, const adversarial::AttackConfig& cfg, std::size_t rows,
                      const std::filesystem::path& out) {
  cfg.validate();
  const Models m = load_models(models);
  check_rows(rows, m.data);
  std::filesystem::create_directories(out);
  std::string table = "row,label,adversarial_label\n";
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = adversarial::pgd_attack(m.data.sample(i), m.data.labels[i], m.clf, cfg);
    const int after = m.clf.predict(r.adversarial).front();
    if (after != m.data.labels[i]) ++flipped;
    table += std::to_string(i) + ',' + std::to_string(m.data.labels[i]) + ',' + std::to_string(after) + '\n';
    io::write_text(out / ("attack_" + std::to_string(i) + ".csv"), exemplar::trajectory_csv(r.trajectory));
  }
  io::write_text(out / "attacks.csv", table);
  return {{"rows", rows}, {"flipped", flipped}};
}

}  // namespace xgem::tools
