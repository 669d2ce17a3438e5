#include "cffn/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "cffn/checkpoint.hpp"
#include "cffn/errors.hpp"
#include "cffn/explain.hpp"
#include "cffn/grad_check.hpp"
#include "cffn/sweep.hpp"
#include "cffn/trainer.hpp"

namespace cffn::cli {
namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) raise(ErrorKind::kIo, "cannot open " + path + " for writing");
  file << text;
  if (!file) raise(ErrorKind::kIo, "failed writing " + path);
}

const std::vector<std::string>& split_part(const DatasetSplit& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  return split.test;
}

struct GenSynthArgs {
  std::string config;
  std::string out;
};

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string history;
  std::optional<int> epochs;
  std::optional<std::string> variant;
};

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::string split = "test";
  std::string out;
};

struct GradCheckArgs {
  std::string data;
  std::string ckpt;
  std::string id;
  std::string out;
  double tol = 1e-4;
  int samples = 100;
};

struct SweepArgs {
  std::string data;
  std::string config;
  std::string beta = "0.8";
  std::string lambda = "0.1";
  std::string out;
  std::optional<int> epochs;
};

struct ExplainArgs {
  std::string data;
  std::string ckpt;
  std::string id;
  std::string out;
  std::optional<double> lambda;
  std::size_t top_k = 5;
};

int gen_synth(const GenSynthArgs& a, std::optional<std::uint64_t> seed, std::ostream& out) {
  SyntheticConfig config = synthetic_config_from_json(read_json_file(a.config));
  if (seed) config.seed = *seed;
  const auto records = generate_synthetic(config);
  write_archive(records, a.out);
  out << "wrote " << records.size() << " records to " << a.out << '\n';
  return kExitOk;
}

int train_command(const TrainArgs& a, std::optional<std::uint64_t> seed, std::ostream& out) {
  const EmbeddingArchive archive = read_archive(a.data);
  Json j = read_json_file(a.config);
  if (a.epochs) j["epochs"] = *a.epochs;
  if (a.variant) j["variant"] = *a.variant;
  TrainConfig config = train_config_from_json(j);
  if (seed) config.seed = *seed;
  config = bind_to_archive(config, archive);
  validate(config);

  std::ofstream history;
  if (!a.history.empty()) {
    history.open(a.history, std::ios::trunc);
    if (!history) raise(ErrorKind::kIo, "cannot open " + a.history + " for writing");
  }
  const DatasetSplit split = split_dataset(archive, config.split, config.seed);
  TrainResult result = train(archive, split, config, [&](const EpochRecord& r) {
    const std::string line = to_json(r).dump();
    out << line << '\n';
    if (history) history << line << '\n';
  });
  save_checkpoint({config, std::move(result.params)}, a.out);
  return kExitOk;
}

int eval_command(const EvalArgs& a, std::ostream& out) {
  const EmbeddingArchive archive = read_archive(a.data);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  std::vector<std::string> ids;
  if (a.split == "all") {
    ids = archive.ids();
  } else {
    ids = split_part(split_dataset(archive, ckpt.config.split, ckpt.config.seed), a.split);
  }
  const Metrics m = evaluate(ckpt.params, archive, ids, ckpt.config.forward_options());
  const Json report{{"split", a.split}, {"n", ids.size()}, {"metrics", to_json(m)}};
  out << "accuracy " << std::setprecision(6) << m.accuracy << '\n';
  if (!a.out.empty()) write_text(a.out, report.dump(2) + "\n");
  return kExitOk;
}

int gradcheck_command(const GradCheckArgs& a, std::optional<std::uint64_t> seed, std::ostream& out,
                      std::ostream& err) {
  const EmbeddingArchive archive = read_archive(a.data);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  if (archive.size() == 0) raise(ErrorKind::kValidation, "archive has no records");
  const PostRecord& post = a.id.empty() ? archive.records().front() : archive.at(a.id);

  GradCheckOptions options;
  options.tolerance = a.tol;
  options.samples_per_group = a.samples;
  options.seed = seed.value_or(ckpt.config.seed);
  options.forward = ckpt.config.forward_options();
  options.partition_weight = partition_weight(ckpt.config.variant, ckpt.config.beta);
  const GradCheckReport report = grad_check(ckpt.params.cast<double>(), post, options);

  for (const auto& g : report.groups) {
    out << std::left << std::setw(48) << g.name << ' ' << std::setw(12) << to_string(g.status)
        << " max_rel " << std::scientific << std::setprecision(3) << g.max_relative_error << std::defaultfloat
        << " checked " << g.checked << '\n';
  }
  out << "overall " << to_string(report.status) << " max_rel " << std::scientific << report.max_relative_error
      << std::defaultfloat << '\n';
  if (!a.out.empty()) write_text(a.out, to_json(report).dump(2) + "\n");
  if (report.status == GradCheckStatus::kFail) {
    err << "gradient check failed: max relative error " << report.max_relative_error << " > " << a.tol << '\n';
    return kExitFailure;
  }
  if (report.status == GradCheckStatus::kInconclusive) {
    err << "gradient check inconclusive: every draw in some group straddled a kink\n";
    return kExitFailure;
  }
  return kExitOk;
}

int sweep_command(const SweepArgs& a, std::optional<std::uint64_t> seed, std::ostream& out) {
  const EmbeddingArchive archive = read_archive(a.data);
  Json j = a.config.empty() ? Json::object() : read_json_file(a.config);
  if (a.epochs) j["epochs"] = *a.epochs;
  TrainConfig base = train_config_from_json(j);
  if (seed) base.seed = *seed;
  base = bind_to_archive(base, archive);
  validate(base);

  const auto betas = parse_grid(a.beta);
  const auto lambdas = parse_grid(a.lambda);
  const DatasetSplit split = split_dataset(archive, base.split, base.seed);
  const auto cells = sweep(archive, split, base, betas, lambdas, [&](const SweepCell& c) {
    out << "beta " << c.beta << " lambda " << c.lambda;
    if (c.metrics) {
      out << " accuracy " << c.metrics->accuracy << " fake_rate " << c.fake_prediction_rate;
      if (c.degenerate) out << " degenerate";
    } else {
      out << " error " << c.error;
    }
    out << '\n';
  });
  write_text(a.out, sweep_to_json(cells).dump(2) + "\n");
  return kExitOk;
}

int explain_command(const ExplainArgs& a, std::ostream& out) {
  const EmbeddingArchive archive = read_archive(a.data);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  ForwardOptions options = ckpt.config.forward_options();
  if (a.lambda) options.lambda = *a.lambda;
  const ExplainReport report = explain(ckpt.params, archive.at(a.id), options, a.top_k);
  write_text(a.out, to_json(report).dump(2) + "\n");
  out << report.post_id << ' ' << to_string(report.prediction) << " prob_fake " << report.prob_fake << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal fake-news detector: training, evaluation and diagnostics", "cffn"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Seed overriding the one in the config or checkpoint");

  GenSynthArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synth", "Generate a synthetic CFE1 archive");
  gen_cmd->add_option("--config", gen.config, "Synthetic generator config (JSON)")->required();
  gen_cmd->add_option("--out", gen.out, "Output archive")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--data", tr.data, "Input archive")->required();
  train_cmd->add_option("--config", tr.config, "Training config (JSON)")->required();
  train_cmd->add_option("--out", tr.out, "Output checkpoint")->required();
  train_cmd->add_option("--history", tr.history, "Also write per-epoch JSON lines here");
  train_cmd->add_option("--epochs", tr.epochs, "Override the epoch count");
  train_cmd->add_option("--variant", tr.variant, "Override the ablation variant");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  eval_cmd->add_option("--data", ev.data, "Input archive")->required();
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--split", ev.split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  eval_cmd->add_option("--out", ev.out, "Write metrics JSON here");

  GradCheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check at a checkpoint");
  gc_cmd->add_option("--data", gc.data, "Input archive")->required();
  gc_cmd->add_option("--ckpt", gc.ckpt, "Checkpoint")->required();
  gc_cmd->add_option("--tol", gc.tol, "Maximum relative error");
  gc_cmd->add_option("--id", gc.id, "Record to probe (default: first)");
  gc_cmd->add_option("--samples", gc.samples, "Sampled scalars per parameter tensor")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--out", gc.out, "Write the JSON report here");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over the partition-loss weight and threshold");
  sweep_cmd->add_option("--data", sw.data, "Input archive")->required();
  sweep_cmd->add_option("--config", sw.config, "Base training config (JSON)");
  sweep_cmd->add_option("--beta", sw.beta, "Grid start:stop:step");
  sweep_cmd->add_option("--lambda", sw.lambda, "Grid start:stop:step");
  sweep_cmd->add_option("--epochs", sw.epochs, "Override the epoch count");
  sweep_cmd->add_option("--out", sw.out, "Output JSON table")->required();

  ExplainArgs ex;
  auto* explain_cmd = app.add_subcommand("explain", "Per-pair relevance and selection report for one post");
  explain_cmd->add_option("--data", ex.data, "Input archive")->required();
  explain_cmd->add_option("--ckpt", ex.ckpt, "Checkpoint")->required();
  explain_cmd->add_option("--id", ex.id, "Post id")->required();
  explain_cmd->add_option("--out", ex.out, "Output JSON report")->required();
  explain_cmd->add_option("--lambda", ex.lambda, "Override the relevance threshold");
  explain_cmd->add_option("--top-k", ex.top_k, "Entries in the top-k lists");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return gen_synth(gen, seed, out);
    if (train_cmd->parsed()) return train_command(tr, seed, out);
    if (eval_cmd->parsed()) return eval_command(ev, out);
    if (gc_cmd->parsed()) return gradcheck_command(gc, seed, out, err);
    if (sweep_cmd->parsed()) return sweep_command(sw, seed, out);
    if (explain_cmd->parsed()) return explain_command(ex, out);
  } catch (const Error& e) {
    err << "cffn: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "cffn: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace cffn::cli
