#include "xgem/experiments/mnist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "xgem/data/idx.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/io/svg.hpp"
#include "xgem/nn/serialize.hpp"

namespace xgem::experiments {

using nlohmann::json;

namespace {

constexpr int kDigits = 10;

nn::MlpSpec classifier_spec(const MnistXgemConfig& c, std::size_t d) {
  std::vector<std::size_t> dims{d};
  dims.insert(dims.end(), c.classifier_hidden.begin(), c.classifier_hidden.end());
  dims.push_back(kDigits);
  return {dims, std::vector<nn::Activation>(c.classifier_hidden.size(), nn::Activation::relu), nn::OutputHead::softmax};
}

nn::VaeSpec vae_spec(const MnistXgemConfig& c, std::size_t d) {
  return {d, c.latent_dim, c.vae_hidden, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0};
}

std::vector<double> pixels(const nd::Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

void to_json(json& j, const DigitPair& p) { j = {{"source", p.source}, {"target", p.target}}; }

void from_json(const json& j, DigitPair& p) {
  p.source = j.at("source").get<int>();
  p.target = j.at("target").get<int>();
}

void MnistXgemConfig::resolve() {
  vae_train.seed = derive_seed(seed, "vae");
  classifier_train.seed = derive_seed(seed, "classifier");
  vae_train.validate();
  classifier_train.validate();
  xgem.validate();
  if (train_size == 0 || holdout_size == 0) throw ConfigError("mnist_xgem: train_size and holdout_size must be positive");
  if (latent_dim == 0) throw ConfigError("mnist_xgem: latent_dim must be positive");
  if (!(gate_threshold > 0.0)) throw ConfigError("mnist_xgem: gate_threshold must be positive");
  if (frames < 2) throw ConfigError("mnist_xgem: frames must be at least 2");
  if (pairs.empty()) throw ConfigError("mnist_xgem: no digit pairs");
  for (const auto& p : pairs) {
    if (p.source < 0 || p.source >= kDigits || p.target < 0 || p.target >= kDigits) {
      throw ConfigError("mnist_xgem: digits must lie in [0, 9]");
    }
    if (p.source == p.target) {
      throw ConfigError("mnist_xgem: target equals source for digit " + std::to_string(p.source));
    }
  }
}

void to_json(json& j, const MnistXgemConfig& c) {
  j = {{"experiment", to_string(ExperimentKind::mnist_xgem)},
       {"seed", c.seed},
       {"images", c.images.string()},
       {"labels", c.labels.string()},
       {"train_size", c.train_size},
       {"holdout_size", c.holdout_size},
       {"latent_dim", c.latent_dim},
       {"vae_hidden", c.vae_hidden},
       {"vae_train", c.vae_train},
       {"gate_threshold", c.gate_threshold},
       {"classifier_hidden", c.classifier_hidden},
       {"classifier_train", c.classifier_train},
       {"xgem", c.xgem},
       {"pairs", c.pairs},
       {"frames", c.frames},
       {"threads", c.threads}};
}

void from_json(const json& j, MnistXgemConfig& c) {
  const MnistXgemConfig d;
  auto sub = [&](const char* key, auto fallback) {
    return j.contains(key) ? j.at(key).get<decltype(fallback)>() : fallback;
  };
  c.seed = j.value("seed", d.seed);
  c.images = j.value("images", d.images.string());
  c.labels = j.value("labels", d.labels.string());
  c.train_size = j.value("train_size", d.train_size);
  c.holdout_size = j.value("holdout_size", d.holdout_size);
  c.latent_dim = j.value("latent_dim", d.latent_dim);
  c.vae_hidden = sub("vae_hidden", d.vae_hidden);
  c.vae_train = sub("vae_train", d.vae_train);
  c.gate_threshold = j.value("gate_threshold", d.gate_threshold);
  c.classifier_hidden = sub("classifier_hidden", d.classifier_hidden);
  c.classifier_train = sub("classifier_train", d.classifier_train);
  c.xgem = sub("xgem", d.xgem);
  c.pairs = sub("pairs", d.pairs);
  c.frames = j.value("frames", d.frames);
  c.threads = j.value("threads", d.threads);
}

bool mnist_available(const MnistXgemConfig& cfg) {
  std::error_code ec;
  return std::filesystem::is_regular_file(cfg.images, ec) && std::filesystem::is_regular_file(cfg.labels, ec);
}

json MnistReport::summary() const {
  json rows = json::array();
  for (const auto& p : pairs) {
    rows.push_back({{"source", p.pair.source},
                    {"target", p.pair.target},
                    {"row", p.row},
                    {"status", p.result ? exemplar::to_string(p.result->trajectory.status) : "failed"},
                    {"exemplar_label", p.exemplar_label},
                    {"exemplar_confidence", p.exemplar_confidence},
                    {"success", p.success}});
  }
  return {{"reconstruction_error", reconstruction_error},
          {"classifier_accuracy", classifier_accuracy},
          {"successes", successes},
          {"attempted", pairs.size()},
          {"pairs", rows}};
}

namespace {

void write_artifacts(ArtifactSink& sink, const MnistReport& r, const data::Dataset& holdout, std::size_t frames) {
  using io::format_double;
  std::string table = "source,target,row,status,switch_index,steps,exemplar_label,exemplar_confidence,success\n";
  std::vector<std::vector<std::vector<double>>> strips;
  std::vector<std::vector<std::string>> captions;
  std::vector<std::vector<bool>> marks;
  for (const auto& p : r.pairs) {
    const auto* traj = p.result ? &p.result->trajectory : nullptr;
    table += std::to_string(p.pair.source) + ',' + std::to_string(p.pair.target) + ',' + std::to_string(p.row) + ',' +
             (traj ? exemplar::to_string(traj->status) : std::string("failed")) + ',' +
             (traj && traj->switch_index ? std::to_string(*traj->switch_index) : std::string()) + ',' +
             (traj ? std::to_string(traj->steps.size()) : std::string("0")) + ',' + std::to_string(p.exemplar_label) +
             ',' + format_double(p.exemplar_confidence) + ',' + (p.success ? "1" : "0") + '\n';
    if (!traj) continue;
    sink.write("trajectories/" + std::to_string(p.pair.source) + "_to_" + std::to_string(p.pair.target) + ".csv",
               exemplar::trajectory_csv(traj->steps));

    // Source, then evenly spaced steps up to the end of the run; the switch
    // step is always shown and framed.
    const std::size_t last = traj->steps.size() - 1;
    std::vector<std::size_t> picks;
    for (std::size_t f = 0; f < frames; ++f) picks.push_back(last * f / (frames - 1));
    if (traj->switch_index) picks.push_back(*traj->switch_index);
    std::sort(picks.begin(), picks.end());
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

    std::vector<std::vector<double>> row{pixels(holdout.sample(p.row))};
    std::vector<std::string> cap{"x* " + std::to_string(p.pair.source) + "->" + std::to_string(p.pair.target)};
    std::vector<bool> mark{false};
    for (const std::size_t s : picks) {
      const auto& step = traj->steps[s];
      const auto proba = step.proba.values();
      const auto top = static_cast<int>(std::max_element(proba.begin(), proba.end()) - proba.begin());
      char buf[32];
      std::snprintf(buf, sizeof buf, "%d %.2f", top, proba[static_cast<std::size_t>(top)]);
      row.push_back(pixels(step.x));
      cap.emplace_back(buf);
      mark.push_back(traj->switch_index && s == *traj->switch_index);
    }
    strips.push_back(std::move(row));
    captions.push_back(std::move(cap));
    marks.push_back(std::move(mark));
  }
  sink.write("pairs.csv", table);
  if (!strips.empty()) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(holdout.dim()))));
    sink.write("strips.svg", io::svg_image_strips(strips, side, captions, marks,
                                                  "xGEM transitions (predicted class, confidence; framed = switch)"));
  }
}

}  // namespace

MnistReport run_mnist_xgem(MnistXgemConfig cfg, const std::optional<std::filesystem::path>& out) {
  cfg.resolve();
  const data::Dataset all = data::load_idx(cfg.images, cfg.labels);
  if (all.size() <= cfg.train_size) {
    throw ConfigError("mnist_xgem: " + std::to_string(all.size()) + " records leave no holdout after train_size " +
                      std::to_string(cfg.train_size));
  }
  for (const int y : all.labels) {
    if (y < 0 || y >= kDigits) throw ConfigError("mnist_xgem: label outside [0, 9]");
  }
  std::vector<std::size_t> rows(cfg.train_size);
  std::iota(rows.begin(), rows.end(), 0);
  const data::Dataset train = all.subset(rows);
  rows.resize(std::min(cfg.holdout_size, all.size() - cfg.train_size));
  std::iota(rows.begin(), rows.end(), cfg.train_size);
  const data::Dataset holdout = all.subset(rows);

  std::optional<ArtifactSink> sink;
  if (out) sink.emplace(*out, ExperimentKind::mnist_xgem);

  const std::size_t d = all.dim();
  auto vae = std::make_shared<const nn::Vae>(nn::train_vae(train.features, vae_spec(cfg, d), cfg.vae_train).model);
  const auto gen = nn::CertifiedGenerator::certify(vae, holdout.features, cfg.gate_threshold);
  const nn::Classifier clf =
      nn::train_classifier(train.features, train.labels, classifier_spec(cfg, d), cfg.classifier_train).model;

  MnistReport report;
  report.reconstruction_error = gen.measured_error();
  report.classifier_accuracy = nn::evaluate_classifier(clf, holdout.features, holdout.labels).accuracy;
  const auto pred = clf.predict(holdout.features);

  for (const auto& pair : cfg.pairs) {
    MnistPairResult pr;
    pr.pair = pair;
    std::size_t i = 0;
    while (i < holdout.size() && !(holdout.labels[i] == pair.source && pred[i] == pair.source)) ++i;
    if (i == holdout.size()) {
      throw ConfigError("mnist_xgem: no correctly classified holdout record of digit " + std::to_string(pair.source));
    }
    pr.row = i;
    try {
      pr.result = exemplar::find_xgem(holdout.sample(i), pair.source, pair.target, gen, clf, cfg.xgem);
      const nd::Tensor p = clf.predict_proba(pr.result->exemplar);
      const auto v = p.values();
      pr.exemplar_label = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
      pr.exemplar_confidence = v[static_cast<std::size_t>(pair.target)];
      pr.success = pr.exemplar_label == pair.target && pr.exemplar_confidence >= 0.5;
    } catch (const NumericError& e) {
      pr.error = e.what();
    }
    if (pr.success) ++report.successes;
    report.pairs.push_back(std::move(pr));
  }

  if (sink) {
    write_artifacts(*sink, report, holdout, cfg.frames);
    sink->finish(cfg.seed, json(cfg), report.summary());
  }
  return report;
}

}  // namespace xgem::experiments
