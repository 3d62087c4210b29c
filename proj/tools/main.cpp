// xgem command line driver.
//
// Exit codes: 0 success, 1 config error, 2 runtime or numeric error,
// 3 quality gate (generator gate, infeasible oracle recalibration).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "models.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/artifacts.hpp"
#include "xgem/experiments/mnist.hpp"
#include "xgem/experiments/runner.hpp"
#include "xgem/io/binary.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
namespace ex = xgem::experiments;

enum Exit : int { ok = 0, config = 1, runtime = 2, gate = 3 };

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(xgem::io::read_text(path));
  } catch (const json::exception& e) {
    throw xgem::ConfigError(path + ": " + e.what());
  } catch (const xgem::FormatError& e) {
    throw xgem::ConfigError(e.what());
  }
}

/// Fills in `experiment` when the config omits it; refuses a different one.
json experiment_config(const std::string& path, const char* kind) {
  json c = read_config(path);
  if (!c.is_object()) throw xgem::ConfigError("config must be a JSON object");
  if (!c.contains("experiment")) c["experiment"] = kind;
  if (c.at("experiment") != kind) {
    throw xgem::ConfigError("config is for '" + c.at("experiment").get<std::string>() + "', this verb runs '" + kind +
                            "'");
  }
  return c;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool out_required) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--seed", c.seed, "global seed (overrides the config)");
  auto* o = app->add_option("--out", c.out, "output directory");
  if (out_required) o->required();
}

std::optional<fs::path> out_dir(const Common& c) {
  if (c.out.empty()) return std::nullopt;
  return fs::path(c.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xgem: manifold-guided exemplars, adversarial baselines and bias audits"};
  app.require_subcommand(1);

  Common train_opts, xgem_opts, attack_opts, audit_opts, manifolds_opts, mnist_opts;
  std::string models;
  std::size_t rows = 10;

  auto* train = app.add_subcommand("train", "train and certify a VAE and a classifier, write checkpoints");
  add_common(train, train_opts, true);

  auto* xgem = app.add_subcommand("xgem", "run the parabola comparison, or traverse records of a trained model set");
  add_common(xgem, xgem_opts, false);
  xgem->add_option("--models", models, "directory written by `train`");
  xgem->add_option("--rows", rows, "leading records to traverse with --models");

  auto* attack = app.add_subcommand("attack", "PGD adversarial criticisms on records of a trained model set");
  add_common(attack, attack_opts, true);
  attack->add_option("--models", models, "directory written by `train`")->required();
  attack->add_option("--rows", rows, "leading records to attack");

  auto* audit = app.add_subcommand("audit", "bias audit: recalibrated oracle and confounding metrics");
  add_common(audit, audit_opts, false);

  auto* manifolds = app.add_subcommand("manifolds", "confidence manifolds, logistic fits and reliability");
  add_common(manifolds, manifolds_opts, false);

  auto* mnist = app.add_subcommand("mnist", "digit transitions on IDX files (skipped when absent)");
  add_common(mnist, mnist_opts, false);

  std::string manifest;
  bool replay = false, resolve_only = false;
  std::string replay_out;
  auto* report = app.add_subcommand("report", "print a run manifest, or replay it and compare CSV artifacts");
  report->add_option("manifest", manifest, "manifest.json or its directory")->required();
  report->add_flag("--replay", replay, "re-run the manifest's config and compare every CSV hash");
  report->add_option("--out", replay_out, "replay output directory (default: <run>/replay)");

  for (auto* sub : {audit, manifolds, mnist}) {
    sub->add_flag("--print-config", resolve_only, "print the resolved config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::config;
  }

  try {
    if (*train) {
      const json c = read_config(train_opts.config);
      print(xgem::tools::run_train(xgem::tools::parse_train_job(c, train_opts.seed), train_opts.out));
    } else if (*xgem) {
      if (models.empty()) {
        const json c = experiment_config(xgem_opts.config, "parabola_fig1");
        print(ex::run_experiment(c, xgem_opts.seed, out_dir(xgem_opts)));
      } else {
        if (xgem_opts.out.empty()) throw xgem::ConfigError("xgem --models needs --out");
        const json c = read_config(xgem_opts.config);
        xgem::exemplar::XGemConfig cfg;
        if (c.contains("xgem")) cfg = c.at("xgem").get<xgem::exemplar::XGemConfig>();
        print(xgem::tools::run_model_xgem(models, cfg, rows, xgem_opts.out));
      }
    } else if (*attack) {
      const json c = read_config(attack_opts.config);
      xgem::adversarial::AttackConfig cfg;
      if (c.contains("attack")) cfg = c.at("attack").get<xgem::adversarial::AttackConfig>();
      print(xgem::tools::run_model_attack(models, cfg, rows, attack_opts.out));
    } else if (*audit || *manifolds || *mnist) {
      const auto& opts = *audit ? audit_opts : *manifolds ? manifolds_opts : mnist_opts;
      const char* kind = *audit ? "bias_audit" : *manifolds ? "confidence_manifolds" : "mnist_xgem";
      const json c = experiment_config(opts.config, kind);
      if (resolve_only) {
        print(ex::resolved_config(c, opts.seed));
        return Exit::ok;
      }
      if (*mnist) {
        auto m = c.get<ex::MnistXgemConfig>();
        if (!ex::mnist_available(m)) {
          std::cout << "mnist: skipped, IDX files not found (" << m.images.string() << ", " << m.labels.string()
                    << ")\n";
          return Exit::ok;
        }
      }
      print(ex::run_experiment(c, opts.seed, out_dir(opts)));
    } else if (*report) {
      if (!replay) {
        const auto m = ex::read_manifest(manifest);
        print({{"experiment", ex::to_string(m.kind)},
               {"seed", m.seed},
               {"artifacts", m.artifacts.size()},
               {"summary", m.summary}});
      } else {
        const fs::path run = fs::is_directory(manifest) ? fs::path(manifest) : fs::path(manifest).parent_path();
        const fs::path dest = replay_out.empty() ? run / "replay" : fs::path(replay_out);
        const auto check = ex::replay_manifest(manifest, dest);
        print({{"matched", check.matched}, {"mismatched", check.mismatched}, {"missing", check.missing}});
        if (!check.ok()) {
          std::cerr << "report: replay differs from the recorded artifacts\n";
          return Exit::runtime;
        }
      }
    }
  } catch (const xgem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return Exit::config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return Exit::config;
  } catch (const xgem::GateError& e) {
    std::cerr << "quality gate: " << e.what() << '\n';
    return Exit::gate;
  } catch (const xgem::InfeasibleError& e) {
    std::cerr << "quality gate: " << e.what() << '\n';
    return Exit::gate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::runtime;
  }
  return Exit::ok;
}
