#include "xgem/experiments/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "xgem/analytics/plots.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/nn/serialize.hpp"

namespace xgem::experiments {

using nlohmann::json;

void to_json(json& j, const Architecture& a) { j = {{"name", a.name}, {"spec", a.spec}}; }

void from_json(const json& j, Architecture& a) {
  a.name = j.at("name").get<std::string>();
  a.spec = j.at("spec").get<nn::MlpSpec>();
}

void ConfidenceManifoldsConfig::resolve() {
  data.seed = derive_seed(seed, "data");
  vae_train.seed = derive_seed(seed, "vae");
  classifier_train.seed = derive_seed(seed, "classifier");
  data.validate();
  vae.validate();
  vae_train.validate();
  classifier_train.validate();
  xgem.validate();
  const std::size_t d = data.side * data.side;
  if (vae.data_dim != d) throw ConfigError("confidence_manifolds: vae.data_dim must equal side * side");
  if (architectures.empty()) throw ConfigError("confidence_manifolds: no architectures");
  std::set<std::string> names;
  for (const auto& a : architectures) {
    a.spec.validate();
    if (a.spec.input_dim() != d || a.spec.output_dim() != 2) {
      throw ConfigError("confidence_manifolds: architecture '" + a.name + "' must map side * side inputs to 2 classes");
    }
    if (a.name.empty() || !names.insert(a.name).second) {
      throw ConfigError("confidence_manifolds: architecture names must be unique and non-empty");
    }
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.empty()) throw ConfigError("confidence_manifolds: no checkpoints");
  if (checkpoints.front() == 0 || checkpoints.back() > classifier_train.epochs) {
    throw ConfigError("confidence_manifolds: checkpoints must lie in [1, classifier_train.epochs]");
  }
  if (samples == 0 || samples > validation_size) {
    throw ConfigError("confidence_manifolds: samples must lie in [1, validation_size]");
  }
  if (reliability_bins < 2) throw ConfigError("confidence_manifolds: reliability_bins must be at least 2");
  if (histogram.k_bins == 0 || histogram.x0_bins == 0) throw ConfigError("confidence_manifolds: empty histogram");
  if (!(gate_threshold > 0.0)) throw ConfigError("confidence_manifolds: gate_threshold must be positive");
}

void to_json(json& j, const ConfidenceManifoldsConfig& c) {
  j = {{"experiment", to_string(ExperimentKind::confidence_manifolds)},
       {"seed", c.seed},
       {"data", c.data},
       {"validation_size", c.validation_size},
       {"vae", c.vae},
       {"vae_train", c.vae_train},
       {"gate_threshold", c.gate_threshold},
       {"architectures", c.architectures},
       {"classifier_train", c.classifier_train},
       {"checkpoints", c.checkpoints},
       {"xgem", c.xgem},
       {"samples", c.samples},
       {"histogram", {{"k_bins", c.histogram.k_bins}, {"x0_bins", c.histogram.x0_bins}}},
       {"reliability_bins", c.reliability_bins},
       {"threads", c.threads}};
}

void from_json(const json& j, ConfidenceManifoldsConfig& c) {
  const ConfidenceManifoldsConfig d;
  auto sub = [&](const char* key, auto fallback) {
    return j.contains(key) ? j.at(key).get<decltype(fallback)>() : fallback;
  };
  c.seed = j.value("seed", d.seed);
  c.data = sub("data", d.data);
  c.validation_size = j.value("validation_size", d.validation_size);
  c.vae = sub("vae", d.vae);
  c.vae_train = sub("vae_train", d.vae_train);
  c.gate_threshold = j.value("gate_threshold", d.gate_threshold);
  c.architectures = sub("architectures", d.architectures);
  c.classifier_train = sub("classifier_train", d.classifier_train);
  c.checkpoints = sub("checkpoints", d.checkpoints);
  c.xgem = sub("xgem", d.xgem);
  c.samples = j.value("samples", d.samples);
  if (j.contains("histogram")) {
    c.histogram.k_bins = j.at("histogram").value("k_bins", d.histogram.k_bins);
    c.histogram.x0_bins = j.at("histogram").value("x0_bins", d.histogram.x0_bins);
  }
  c.reliability_bins = j.value("reliability_bins", d.reliability_bins);
  c.threads = j.value("threads", d.threads);
}

double monotone_fraction(const std::vector<analytics::ConfidenceManifold>& ms, std::size_t window, double slack) {
  if (ms.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& m : ms) {
    const auto c = m.confidences();
    const std::size_t n = c.size(), h = window / 2;
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= h ? i - h : 0, hi = std::min(n - 1, i + h);
      double s = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) s += c[k];
      smooth[i] = s / static_cast<double>(hi - lo + 1);
    }
    bool mono = true;
    for (std::size_t i = 1; i < n && mono; ++i) mono = smooth[i] <= smooth[i - 1] + slack;
    if (mono) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(ms.size());
}

json ManifoldsReport::summary() const {
  json models_json = json::array();
  for (const auto& m : models) {
    models_json.push_back({{"id", m.id()},
                           {"architecture", m.architecture},
                           {"epoch", m.epoch},
                           {"accuracy", m.accuracy},
                           {"manifolds", m.manifolds.size()},
                           {"degenerate", m.degenerate},
                           {"failed", m.failed},
                           {"mean_k", m.mean_k},
                           {"monotone_fraction", m.monotone_fraction}});
  }
  return {{"reconstruction_error", reconstruction_error}, {"max_aligned_x0", max_aligned_x0}, {"models", models_json}};
}

namespace {

ModelManifolds analyse(const ConfidenceManifoldsConfig& cfg, const std::string& arch, std::size_t epoch,
                       const nn::Classifier& clf, const nn::CertifiedGenerator& gen, const data::Dataset& val,
                       const data::Dataset& probe) {
  ModelManifolds mm;
  mm.architecture = arch;
  mm.epoch = epoch;
  mm.accuracy = nn::evaluate_classifier(clf, val.features, val.labels).accuracy;
  const auto pred = clf.predict(probe.features);
  const auto items = exemplar::batch_xgems(probe.features, pred, {}, gen, clf, cfg.xgem, cfg.threads);

  std::vector<analytics::StratifiedFit> strat;
  double ksum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].result) {
      ++mm.failed;
      continue;
    }
    auto m = analytics::confidence_manifold(items[i].result->trajectory, clf);
    m.sample_id = i;
    m.attribute = probe.attributes[i];
    m.checkpoint = mm.id();
    const auto fit = analytics::fit_logistic(m);
    strat.push_back({fit, probe.labels[i], probe.attributes[i]});
    if (fit.degenerate) {
      ++mm.degenerate;
    } else {
      ksum += fit.k;
      auto aligned = analytics::shift_align(std::span(&m, 1), std::span(&fit, 1));
      mm.aligned_refits.push_back(analytics::fit_logistic(aligned.front()));
      mm.aligned.push_back(std::move(aligned.front()));
    }
    mm.manifolds.push_back(std::move(m));
    mm.fits.push_back(fit);
  }
  const std::size_t live = mm.fits.size() - mm.degenerate;
  mm.mean_k = live ? ksum / static_cast<double>(live) : 0.0;
  mm.monotone_fraction = monotone_fraction(mm.manifolds);

  // Histograms cover the strata that have at least one usable fit.
  std::map<analytics::Stratum, bool> usable;
  for (const auto& s : strat) usable[{s.label, s.attribute}] |= !s.fit.degenerate;
  std::vector<analytics::StratifiedFit> kept;
  for (const auto& s : strat) {
    if (usable[{s.label, s.attribute}]) kept.push_back(s);
  }
  mm.histograms = analytics::param_histogram2d(kept, cfg.histogram);
  mm.reliability = analytics::reliability_diagram(clf, val, cfg.reliability_bins, true);
  return mm;
}

void write_model(ArtifactSink& sink, const ModelManifolds& m) {
  const std::string id = m.id();
  sink.write("manifolds/" + id + ".csv", analytics::manifolds_csv(m.manifolds));
  sink.write("manifolds/" + id + ".svg", analytics::manifolds_svg(m.manifolds, m.fits, "confidence manifolds " + id));
  sink.write("manifolds/" + id + "_aligned.csv", analytics::manifolds_csv(m.aligned));
  std::vector<analytics::LogisticFit> shown;
  for (const auto& f : m.fits) {
    if (!f.degenerate) shown.push_back(f);
  }
  sink.write("manifolds/" + id + "_aligned.svg",
             analytics::manifolds_svg(m.aligned, shown, "shift-aligned confidence manifolds " + id));
  sink.write("fits/" + id + ".csv", analytics::fits_csv(m.manifolds, m.fits));
  sink.write("histograms/" + id + ".csv", analytics::histogram_csv(m.histograms));
  sink.write("histograms/" + id + ".svg", analytics::histogram_svg(m.histograms, "logistic fit parameters " + id));
  sink.write("reliability/" + id + ".csv", analytics::reliability_csv(m.reliability));
  sink.write("reliability/" + id + ".svg", analytics::reliability_svg(m.reliability, "reliability " + id));
}

}  // namespace

ManifoldsReport run_confidence_manifolds(ConfidenceManifoldsConfig cfg, const std::optional<std::filesystem::path>& out) {
  cfg.resolve();
  std::optional<ArtifactSink> sink;
  if (out) sink.emplace(*out, ExperimentKind::confidence_manifolds);

  data::AttributedConfig dc = cfg.data;
  dc.seed = derive_seed(cfg.data.seed, "train");
  const data::Dataset train = data::gen_attributed(dc);
  dc.n = cfg.validation_size;
  dc.seed = derive_seed(cfg.data.seed, "validation");
  const data::Dataset val = data::gen_attributed(dc);
  std::vector<std::size_t> rows(cfg.samples);
  std::iota(rows.begin(), rows.end(), 0);
  const data::Dataset probe = val.subset(rows);

  auto vae = std::make_shared<const nn::Vae>(nn::train_vae(train.features, cfg.vae, cfg.vae_train).model);
  const auto gen = nn::CertifiedGenerator::certify(vae, val.features, cfg.gate_threshold);

  ManifoldsReport report;
  report.reconstruction_error = gen.measured_error();
  for (const auto& arch : cfg.architectures) {
    nn::TrainConfig tc = cfg.classifier_train;
    tc.seed = derive_seed(cfg.classifier_train.seed, arch.name);
    tc.epochs = cfg.checkpoints.back();
    std::vector<std::pair<std::size_t, nn::Classifier>> snaps;
    nn::train_classifier(train.features, train.labels, arch.spec, tc,
                         [&](const nn::ClassifierEpoch& e, const nn::Classifier& c) {
                           if (std::binary_search(cfg.checkpoints.begin(), cfg.checkpoints.end(), e.epoch)) {
                             snaps.emplace_back(e.epoch, c);
                           }
                         });
    for (const auto& [epoch, clf] : snaps) {
      report.models.push_back(analyse(cfg, arch.name, epoch, clf, gen, val, probe));
      for (const auto& f : report.models.back().aligned_refits) {
        report.max_aligned_x0 = std::max(report.max_aligned_x0, std::abs(f.x0));
      }
    }
  }

  if (sink) {
    for (const auto& m : report.models) write_model(*sink, m);
    sink->finish(cfg.seed, json(cfg), report.summary());
  }
  return report;
}

}  // namespace xgem::experiments
