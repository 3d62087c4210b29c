#include "xgem/experiments/parabola.hpp"

#include <algorithm>

#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/io/svg.hpp"
#include "xgem/nn/serialize.hpp"

namespace xgem::experiments {

void ParabolaFig1Config::resolve() {
  data.seed = derive_seed(seed, "data");
  vae_train.seed = derive_seed(seed, "vae");
  classifier_train.seed = derive_seed(seed, "classifier");
  data.validate();
  vae.validate();
  vae_train.validate();
  classifier.validate();
  classifier_train.validate();
  xgem.validate();
  attack.validate();
  if (vae.data_dim != 2 || classifier.input_dim() != 2 || classifier.output_dim() != 2) {
    throw ConfigError("parabola_fig1: models must map 2-d points and the classifier must have 2 classes");
  }
  if (classifier.hidden_layers() < 1) throw ConfigError("parabola_fig1: the classifier needs a hidden layer");
  if (!(gate_threshold > 0.0)) throw ConfigError("parabola_fig1: gate_threshold must be positive");
}

void to_json(nlohmann::json& j, const ParabolaFig1Config& c) {
  j = {{"experiment", to_string(ExperimentKind::parabola_fig1)},
       {"seed", c.seed},
       {"data", c.data},
       {"vae", c.vae},
       {"vae_train", c.vae_train},
       {"classifier", c.classifier},
       {"classifier_train", c.classifier_train},
       {"gate_threshold", c.gate_threshold},
       {"xgem", c.xgem},
       {"attack", c.attack},
       {"pairs", c.pairs}};
}

void from_json(const nlohmann::json& j, ParabolaFig1Config& c) {
  const ParabolaFig1Config d;
  c.seed = j.value("seed", d.seed);
  c.data = j.contains("data") ? j.at("data").get<data::ParabolaConfig>() : d.data;
  c.vae = j.contains("vae") ? j.at("vae").get<nn::VaeSpec>() : d.vae;
  c.vae_train = j.contains("vae_train") ? j.at("vae_train").get<nn::TrainConfig>() : d.vae_train;
  c.classifier = j.contains("classifier") ? j.at("classifier").get<nn::MlpSpec>() : d.classifier;
  c.classifier_train =
      j.contains("classifier_train") ? j.at("classifier_train").get<nn::TrainConfig>() : d.classifier_train;
  c.gate_threshold = j.value("gate_threshold", d.gate_threshold);
  c.xgem = j.contains("xgem") ? j.at("xgem").get<exemplar::XGemConfig>() : d.xgem;
  c.attack = j.contains("attack") ? j.at("attack").get<adversarial::AttackConfig>() : d.attack;
  c.pairs = j.value("pairs", d.pairs);
}

ParabolaWorld build_parabola_world(const ParabolaFig1Config& cfg) {
  data::Dataset ds = data::gen_parabola(cfg.data);
  auto vae = std::make_shared<const nn::Vae>(nn::train_vae(ds.features, cfg.vae, cfg.vae_train).model);
  auto gen = nn::CertifiedGenerator::certify(vae, ds.features, cfg.gate_threshold);
  auto clf = nn::train_classifier(ds.features, ds.labels, cfg.classifier, cfg.classifier_train);
  const nd::Tensor z = vae->encode(ds.features);
  const auto [lo, hi] = std::minmax_element(z.values().begin(), z.values().end());
  const double acc = nn::evaluate_classifier(clf.model, ds.features, ds.labels).accuracy;
  return {std::move(ds), vae, std::move(gen), std::move(clf.model), *lo, *hi, acc};
}

nlohmann::json Fig1Report::summary() const {
  return {{"pairs", pairs.size()},
          {"reconstruction_error", reconstruction_error},
          {"classifier_accuracy", classifier_accuracy},
          {"decode_grid_max_distance", decode_grid_max_distance},
          {"max_xgem_distance", max_xgem_distance},
          {"fraction_adversarial_farther", fraction_adversarial_farther}};
}

namespace {

void write_artifacts(ArtifactSink& sink, const ParabolaWorld& world, const Fig1Report& report,
                     const ParabolaFig1Config& cfg, const std::vector<std::pair<double, nd::Tensor>>& curve) {
  using io::format_double;
  std::string table =
      "pair,index,x_0,x_1,status,switch_index,xgem_max_manifold_distance,adversarial_manifold_distance,"
      "adversarial_farther\n";
  std::string fig_csv = "series,pair,iter,x_0,x_1\n";
  io::SvgPlot plot("xGEM (black) vs PGD (magenta) trajectories", "x_0", "x_1");

  std::vector<double> cx, cy;
  for (int i = -160; i <= 160; ++i) {
    const double t = i / 80.0;
    cx.push_back(t);
    cy.push_back(t * t);
  }
  plot.line(cx, cy, "#4a7bd1", 3.0);
  for (const auto& [cls, color] : {std::pair{1, "#2e9e48"}, std::pair{0, "#d13b3b"}}) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < world.data.size(); ++i) {
      if (world.data.labels[i] != cls) continue;
      xs.push_back(world.data.features.at(i, 0));
      ys.push_back(world.data.features.at(i, 1));
    }
    plot.dots(xs, ys, color, 1.2);
  }

  for (std::size_t p = 0; p < report.pairs.size(); ++p) {
    const auto& pr = report.pairs[p];
    const auto& traj = pr.xgem.trajectory;
    table += std::to_string(p) + ',' + std::to_string(pr.index) + ',' + format_double(traj.source[0]) + ',' +
             format_double(traj.source[1]) + ',' + exemplar::to_string(traj.status) + ',' +
             (traj.switch_index ? std::to_string(*traj.switch_index) : std::string()) + ',' +
             format_double(pr.xgem_max_distance) + ',' + format_double(pr.adversarial_distance) + ',' +
             (pr.adversarial_distance > pr.xgem_max_distance ? "1" : "0") + '\n';
    const std::string tag = std::to_string(p);
    sink.write("trajectories/xgem_" + tag + ".csv", exemplar::trajectory_csv(traj.steps));
    sink.write("trajectories/xgem_" + tag + ".json", exemplar::trajectory_summary(traj, cfg.xgem).dump(2) + "\n");
    sink.write("trajectories/pgd_" + tag + ".csv", exemplar::trajectory_csv(pr.attack.trajectory));

    std::vector<double> xs, ys, ax, ay;
    for (const auto& s : traj.steps) {
      xs.push_back(s.x[0]);
      ys.push_back(s.x[1]);
      fig_csv += "xgem," + tag + ',' + std::to_string(s.iter) + ',' + format_double(s.x[0]) + ',' +
                 format_double(s.x[1]) + '\n';
    }
    for (const auto& s : pr.attack.trajectory) {
      ax.push_back(s.x[0]);
      ay.push_back(s.x[1]);
      fig_csv += "pgd," + tag + ',' + std::to_string(s.iter) + ',' + format_double(s.x[0]) + ',' +
                 format_double(s.x[1]) + '\n';
    }
    plot.line(xs, ys, "black", 1.5);
    plot.line(ax, ay, "#d12fd1", 1.5);
  }
  plot.legend("data manifold", "#4a7bd1");
  plot.legend("xGEM", "black");
  plot.legend("PGD", "#d12fd1");

  std::string curve_csv = "z,x_0,x_1,manifold_distance\n";
  for (const auto& [z, x] : curve) {
    curve_csv += format_double(z) + ',' + format_double(x[0]) + ',' + format_double(x[1]) + ',' +
                 format_double(data::parabola_distance(x)) + '\n';
  }

  sink.write("pairs.csv", table);
  sink.write("decoded_curve.csv", curve_csv);
  sink.write("fig1.csv", fig_csv);
  sink.write("fig1.svg", plot.render());
}

}  // namespace

Fig1Report run_parabola_fig1(ParabolaFig1Config cfg, const std::optional<std::filesystem::path>& out) {
  cfg.resolve();
  std::optional<ArtifactSink> sink;
  if (out) sink.emplace(*out, ExperimentKind::parabola_fig1);

  const ParabolaWorld world = build_parabola_world(cfg);
  Fig1Report report;
  report.reconstruction_error = world.generator.measured_error();
  report.classifier_accuracy = world.classifier_accuracy;

  std::vector<std::pair<double, nd::Tensor>> curve;
  for (int i = 0; i <= 2000; ++i) {
    const double z = world.latent_min + (world.latent_max - world.latent_min) * i / 2000.0;
    nd::Tensor x = world.vae->decode(nd::Tensor::vector({z}));
    report.decode_grid_max_distance = std::max(report.decode_grid_max_distance, data::parabola_distance(x));
    curve.emplace_back(z, std::move(x));
  }

  std::size_t farther = 0;
  for (std::size_t i = 0; i < world.data.size() && report.pairs.size() < cfg.pairs; ++i) {
    if (world.data.labels[i] != 1) continue;
    Fig1Pair pr;
    pr.index = i;
    pr.xgem = exemplar::find_xgem(world.data.sample(i), 1, 0, world.generator, world.classifier, cfg.xgem);
    pr.attack = adversarial::pgd_attack(world.data.sample(i), 1, world.classifier, cfg.attack);
    for (const auto& s : pr.xgem.trajectory.steps) {
      pr.xgem_max_distance = std::max(pr.xgem_max_distance, data::parabola_distance(s.x));
    }
    pr.adversarial_distance = data::parabola_distance(pr.attack.adversarial);
    report.max_xgem_distance = std::max(report.max_xgem_distance, pr.xgem_max_distance);
    if (pr.adversarial_distance > pr.xgem_max_distance) ++farther;
    report.pairs.push_back(std::move(pr));
  }
  if (!report.pairs.empty()) {
    report.fraction_adversarial_farther = static_cast<double>(farther) / static_cast<double>(report.pairs.size());
  }

  if (sink) {
    write_artifacts(*sink, world, report, cfg, curve);
    sink->finish(cfg.seed, nlohmann::json(cfg), report.summary());
  }
  return report;
}

}  // namespace xgem::experiments
