#include "xgem/experiments/bias_audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/io/svg.hpp"
#include "xgem/nn/serialize.hpp"

namespace xgem::experiments {

using nlohmann::json;

void BiasAuditConfig::resolve() {
  data.seed = derive_seed(seed, "data");
  vae_train.seed = derive_seed(seed, "vae");
  classifier_train.seed = derive_seed(seed, "classifier");
  oracle_train.seed = derive_seed(seed, "oracle");
  recalibration.seed = derive_seed(seed, "recalibration");
  data.validate();
  vae.validate();
  vae_train.validate();
  classifier.validate();
  classifier_train.validate();
  oracle.validate();
  oracle_train.validate();
  recalibration.validate();
  xgem.validate();
  const std::size_t d = data.side * data.side;
  if (vae.data_dim != d || classifier.input_dim() != d || oracle.input_dim() != d) {
    throw ConfigError("bias_audit: model input widths must equal side * side = " + std::to_string(d));
  }
  if (classifier.output_dim() != 2 || oracle.output_dim() != 2) {
    throw ConfigError("bias_audit: classifier and oracle must have 2 classes");
  }
  if (validation_size < 4) throw ConfigError("bias_audit: validation_size must be at least 4");
  if (audit_samples == 0 || audit_samples > validation_size) {
    throw ConfigError("bias_audit: audit_samples must lie in [1, validation_size]");
  }
  if (oracle_train_size > data.n) throw ConfigError("bias_audit: oracle_train_size exceeds the training split");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("bias_audit: delta must lie in [0, 1]");
  if (!(gate_threshold > 0.0)) throw ConfigError("bias_audit: gate_threshold must be positive");
}

void to_json(json& j, const BiasAuditConfig& c) {
  j = {{"experiment", to_string(ExperimentKind::bias_audit)},
       {"seed", c.seed},
       {"data", c.data},
       {"validation_size", c.validation_size},
       {"vae", c.vae},
       {"vae_train", c.vae_train},
       {"gate_threshold", c.gate_threshold},
       {"classifier", c.classifier},
       {"classifier_train", c.classifier_train},
       {"oracle", c.oracle},
       {"oracle_train", c.oracle_train},
       {"oracle_train_size", c.oracle_train_size},
       {"recalibration", c.recalibration},
       {"xgem", c.xgem},
       {"audit_samples", c.audit_samples},
       {"delta", c.delta},
       {"threads", c.threads}};
}

void from_json(const json& j, BiasAuditConfig& c) {
  const BiasAuditConfig d;
  auto sub = [&](const char* key, auto fallback) {
    return j.contains(key) ? j.at(key).get<decltype(fallback)>() : fallback;
  };
  c.seed = j.value("seed", d.seed);
  c.data = sub("data", d.data);
  c.validation_size = j.value("validation_size", d.validation_size);
  c.vae = sub("vae", d.vae);
  c.vae_train = sub("vae_train", d.vae_train);
  c.gate_threshold = j.value("gate_threshold", d.gate_threshold);
  c.classifier = sub("classifier", d.classifier);
  c.classifier_train = sub("classifier_train", d.classifier_train);
  c.oracle = sub("oracle", d.oracle);
  c.oracle_train = sub("oracle_train", d.oracle_train);
  c.oracle_train_size = j.value("oracle_train_size", d.oracle_train_size);
  c.recalibration = sub("recalibration", d.recalibration);
  c.xgem = sub("xgem", d.xgem);
  c.audit_samples = j.value("audit_samples", d.audit_samples);
  c.delta = j.value("delta", d.delta);
  c.threads = j.value("threads", d.threads);
}

namespace {

std::optional<double> ratio(const audit::Cell& biased, const audit::Cell& unbiased) {
  const auto b = biased.fraction(), u = unbiased.fraction();
  if (!b || !u || *u == 0.0) return std::nullopt;
  return *b / *u;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> pixels(const nd::Tensor& t) { return {t.values().begin(), t.values().end()}; }

void write_artifacts(ArtifactSink& sink, const BiasAuditReport& r, const data::Dataset& audited,
                     const nn::Generator& gen, const std::vector<int>& pred1, const std::vector<int>& pred2) {
  using io::format_double;
  sink.write("oracle_rates.csv", audit::rates_csv(r.recalibration));
  sink.write("oracle.json", audit::to_json(r.recalibration).dump(2) + "\n");
  sink.write("confounding.csv", audit::confounding_csv({{"f1_unbiased", r.unbiased}, {"f2_biased", r.biased}}));
  sink.write("confounding.json",
             json{{"f1_unbiased", audit::to_json(r.unbiased)}, {"f2_biased", audit::to_json(r.biased)}}.dump(2) +
                 "\n");

  auto status = [](const exemplar::BatchItem& it) {
    return it.result ? exemplar::to_string(it.result->trajectory.status) : std::string("failed");
  };
  auto oracle_says = [&](const exemplar::BatchItem& it) {
    if (!it.result) return std::string();
    return std::to_string(r.recalibration.oracle.predict(it.result->exemplar, it.result->trajectory.target_label));
  };
  std::string items = "index,y,a,f1_source,f1_status,f1_exemplar_attribute,f2_source,f2_status,f2_exemplar_attribute\n";
  for (std::size_t i = 0; i < audited.size(); ++i) {
    items += std::to_string(i) + ',' + std::to_string(audited.labels[i]) + ',' + std::to_string(audited.attributes[i]) +
             ',' + std::to_string(pred1[i]) + ',' + status(r.unbiased_items[i]) + ',' + oracle_says(r.unbiased_items[i]) +
             ',' + std::to_string(pred2[i]) + ',' + status(r.biased_items[i]) + ',' + oracle_says(r.biased_items[i]) +
             '\n';
  }
  sink.write("items.csv", items);

  // A few records side by side: source, reconstruction, f1 exemplar, f2 exemplar.
  std::vector<std::vector<std::vector<double>>> strips;
  std::vector<std::vector<std::string>> captions;
  const std::size_t shown = std::min<std::size_t>(8, audited.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const nd::Tensor x = audited.sample(i);
    const nd::Tensor recon = gen.decode(gen.encode(x));
    std::vector<std::vector<double>> row{pixels(x), pixels(recon)};
    std::vector<std::string> cap{"y=" + std::to_string(audited.labels[i]) + " a=" + std::to_string(audited.attributes[i]),
                                 "recon"};
    for (const auto* item : {&r.unbiased_items[i], &r.biased_items[i]}) {
      row.push_back(item->result ? pixels(item->result->exemplar) : std::vector<double>(x.size(), 0.0));
      cap.push_back((item == &r.unbiased_items[i] ? "f1 " : "f2 ") + oracle_says(*item));
    }
    strips.push_back(std::move(row));
    captions.push_back(std::move(cap));
  }
  const std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(audited.dim()))));
  sink.write("exemplars.svg", io::svg_image_strips(strips, side, captions, {},
                                                   "source | reconstruction | f1 exemplar | f2 exemplar"));
}

}  // namespace

json BiasAuditReport::summary() const {
  // Stratum the biased classifier moves most.
  int by = 0, ba = 0;
  double worst = -1.0;
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) {
      const auto f = biased.by_label_attribute[y][a].fraction();
      if (f && *f > worst) {
        worst = *f;
        by = y;
        ba = a;
      }
    }
  }
  const auto& bc = biased.by_label_attribute[by][ba];
  const auto& uc = unbiased.by_label_attribute[by][ba];
  return {{"reconstruction_error", reconstruction_error},
          {"unbiased_accuracy", unbiased_accuracy},
          {"biased_accuracy", biased_accuracy},
          {"oracle_base_accuracy", oracle_base_accuracy},
          {"oracle_identity", recalibration.identity},
          {"oracle_accuracy", recalibration.after.accuracy},
          {"oracle_fpr_gap", recalibration.after.fpr_gap()},
          {"oracle_fnr_gap", recalibration.after.fnr_gap()},
          {"metric_unbiased", opt_json(unbiased.overall.fraction())},
          {"metric_biased", opt_json(biased.overall.fraction())},
          {"metric_ratio", opt_json(ratio(biased.overall, unbiased.overall))},
          {"flagged_unbiased", unbiased.flagged},
          {"flagged_biased", biased.flagged},
          {"most_affected_stratum",
           {{"y", by},
            {"a", ba},
            {"biased", opt_json(bc.fraction())},
            {"unbiased", opt_json(uc.fraction())},
            {"ratio", opt_json(ratio(bc, uc))}}},
          {"excluded_unbiased", unbiased.excluded()},
          {"excluded_biased", biased.excluded()}};
}

BiasAuditReport run_bias_audit(BiasAuditConfig cfg, const std::optional<std::filesystem::path>& out) {
  cfg.resolve();
  std::optional<ArtifactSink> sink;
  if (out) sink.emplace(*out, ExperimentKind::bias_audit);

  data::AttributedConfig dc = cfg.data;
  dc.rho = 0.0;
  dc.seed = derive_seed(cfg.data.seed, "unbiased");
  const data::Dataset train0 = data::gen_attributed(dc);
  dc.rho = 1.0;
  dc.seed = derive_seed(cfg.data.seed, "biased");
  const data::Dataset train1 = data::gen_attributed(dc);
  dc.rho = 0.0;
  dc.n = cfg.validation_size;
  dc.seed = derive_seed(cfg.data.seed, "validation");
  const data::Dataset val = data::gen_attributed(dc);

  auto vae = std::make_shared<const nn::Vae>(nn::train_vae(train0.features, cfg.vae, cfg.vae_train).model);
  const auto gen = nn::CertifiedGenerator::certify(vae, val.features, cfg.gate_threshold);

  const nn::Classifier f1 = nn::train_classifier(train0.features, train0.labels, cfg.classifier, cfg.classifier_train).model;
  nn::TrainConfig t2 = cfg.classifier_train;
  t2.seed = derive_seed(cfg.classifier_train.seed, "biased");
  const nn::Classifier f2 = nn::train_classifier(train1.features, train1.labels, cfg.classifier, t2).model;

  data::Dataset oracle_set = train0;
  if (cfg.oracle_train_size > 0) {
    std::vector<std::size_t> rows(cfg.oracle_train_size);
    std::iota(rows.begin(), rows.end(), 0);
    oracle_set = train0.subset(rows);
  }
  const nn::Classifier g =
      nn::train_classifier(oracle_set.features, oracle_set.attributes, cfg.oracle, cfg.oracle_train).model;

  BiasAuditReport report{audit::recalibrate_equalized_odds(g, val, cfg.recalibration), {}, {}, {}, {}, 0, 0, 0, 0};
  report.reconstruction_error = gen.measured_error();
  report.unbiased_accuracy = nn::evaluate_classifier(f1, val.features, val.labels).accuracy;
  report.biased_accuracy = nn::evaluate_classifier(f2, val.features, val.labels).accuracy;
  report.oracle_base_accuracy = nn::evaluate_classifier(g, val.features, val.attributes).accuracy;

  std::vector<std::size_t> rows(cfg.audit_samples);
  std::iota(rows.begin(), rows.end(), 0);
  const data::Dataset audited = val.subset(rows);
  const auto pred1 = f1.predict(audited.features);
  const auto pred2 = f2.predict(audited.features);
  report.unbiased_items = exemplar::batch_xgems(audited.features, pred1, {}, gen, f1, cfg.xgem, cfg.threads);
  report.biased_items = exemplar::batch_xgems(audited.features, pred2, {}, gen, f2, cfg.xgem, cfg.threads);
  report.unbiased = audit::confounding_metric(report.unbiased_items, report.recalibration.oracle, audited, cfg.delta);
  report.biased = audit::confounding_metric(report.biased_items, report.recalibration.oracle, audited, cfg.delta);

  if (sink) {
    write_artifacts(*sink, report, audited, gen.generator(), pred1, pred2);
    sink->finish(cfg.seed, json(cfg), report.summary());
  }
  return report;
}

}  // namespace xgem::experiments
