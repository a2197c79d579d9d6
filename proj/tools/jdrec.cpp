// jdrec command-line driver: data generation, training, simulation and
// format conversion. All randomness derives from --seed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jdrec/core/error.hpp"
#include "jdrec/data/jdrec_format.hpp"
#include "jdrec/data/sample_io.hpp"
#include "jdrec/evaluator/evaluator.hpp"
#include "jdrec/evaluator/pointwise.hpp"
#include "jdrec/nn/checkpoint.hpp"
#include "jdrec/sim/bootstrap.hpp"
#include "jdrec/sim/world.hpp"
#include "jdrec/training/generator_training.hpp"

namespace fs = std::filesystem;
using namespace jdrec;

namespace {

enum ExitCode : int {
  kOk = 0,
  kWarning = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kIo = 5,
  kExhausted = 6,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::usage: return kConfig;
    case ErrorKind::data: return kData;
    case ErrorKind::numeric: return kNumeric;
    case ErrorKind::io: return kIo;
    case ErrorKind::generation_exhausted: return kExhausted;
  }
  return kConfig;
}

struct Options {
  std::uint64_t seed = 0;
  std::string schema;
  std::string data;
  std::string out = ".";
  std::string world;
  std::string evaluator;
  std::string input;
  std::size_t epochs = 10;
  double lr = 0.01;
  double lambda = 1.0;
  double temperature = 5.0;
  std::size_t k = 32;
  std::size_t list_len = 4;
  std::size_t days = 10;
  std::size_t step1_days = 10;
  int step = 1;
  std::string mode = "naive";
  std::size_t ramp_day = 20;
  std::size_t users = 2000;
  std::size_t batch = 32;
  double holdout = 0.2;
  bool baseline = false;
  std::size_t samples = 10000;
  std::size_t candidates = 40;
};

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " file '" + path + "' not found");
}

sim::WorldConfig world_config(const Options& o) {
  sim::WorldConfig wc;
  if (!o.world.empty()) {
    require_file(o.world, "world");
    std::ifstream in(o.world);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("world config: " + std::string(e.what()));
    }
    wc = sim::WorldConfig::from_json(j.contains("config") ? j["config"] : j);
  }
  if (o.list_len != wc.list_len) {
    wc.list_len = o.list_len;
    wc.position_bias.resize(o.list_len);
    for (std::size_t i = 0; i < o.list_len; ++i) wc.position_bias[i] = 1.0 / (1.0 + 0.25 * i);
  }
  wc.validate();
  return wc;
}

sim::BootstrapConfig bootstrap_config(const Options& o) {
  sim::BootstrapConfig bc;
  bc.requests_per_day = o.users;
  bc.batch_size = o.batch;
  bc.optimizer.learning_rate = o.lr;
  bc.evaluator.list_len = o.list_len;
  bc.generator.list_len = o.list_len;
  bc.generator_training.temperature = o.temperature;
  bc.generator_training.rounds = o.k;
  bc.generator_training.lambda = o.lambda;
  bc.ramp_day = o.ramp_day;
  return bc;
}

int print_warnings(const sim::SyntheticWorld& world) {
  for (const auto& w : world.warnings()) std::cerr << "warning: " << w << '\n';
  return world.warnings().empty() ? kOk : kWarning;
}

int cmd_gen_data(const Options& o) {
  const fs::path dir = prepare_out_dir(o.out);
  const auto world = sim::gen_world(o.seed, world_config(o));
  int status = print_warnings(world);
  world.schema().save(dir / "schema.json");
  {
    auto out = open_out(dir / "world.json");
    out << nlohmann::json{{"seed", o.seed}, {"config", world.config().to_json()}}.dump(2) << '\n';
  }
  std::vector<data::LoggedSample> logs;
  if (o.users == 0 || o.days == 0) {
    std::cerr << "warning: no requests requested; writing an empty dataset\n";
    status = kWarning;
  } else {
    auto step1 = sim::run_step1(world, o.days, bootstrap_config(o), o.seed);
    logs = std::move(step1.logs);
  }
  data::write_samples(dir / "samples.jsonl", logs);
  std::cout << "wrote " << logs.size() << " samples to " << (dir / "samples.jsonl").string() << '\n';
  return status;
}

struct Dataset {
  data::FeatureSchema schema;
  std::vector<data::LoggedSample> samples;
  std::size_t split = 0;  // samples[0, split) train, rest holdout
};

Dataset load_dataset(const Options& o) {
  require_file(o.schema, "schema");
  require_file(o.data, "data");
  if (!(o.holdout >= 0.0 && o.holdout < 1.0)) throw ConfigError("--holdout must be in [0, 1)");
  Dataset d;
  d.schema = data::FeatureSchema::load(o.schema);
  data::LoadOptions lo;
  lo.list_len = o.list_len;
  auto loaded = data::load_samples(o.data, d.schema, lo);
  d.samples = std::move(loaded.samples);
  if (d.samples.empty()) throw DataError("dataset '" + o.data + "' holds no samples");
  d.split = d.samples.size() -
            static_cast<std::size_t>(std::floor(o.holdout * static_cast<double>(d.samples.size())));
  return d;
}

void write_evaluator_csv(const fs::path& path, const std::vector<evaluator::EvaluatorEpoch>& epochs) {
  auto out = open_out(path);
  out << "epoch,loss,auc\n" << std::fixed << std::setprecision(6);
  for (const auto& e : epochs) out << e.epoch << ',' << e.loss << ',' << e.auc << '\n';
}

int cmd_train_evaluator(const Options& o) {
  const fs::path dir = prepare_out_dir(o.out);
  const Dataset d = load_dataset(o);
  const std::span<const data::LoggedSample> all(d.samples);

  evaluator::EvaluatorConfig mc;
  mc.list_len = o.list_len;
  evaluator::EvaluatorTrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.optimizer.learning_rate = o.lr;
  tc.seed = o.seed;
  auto result = evaluator::train_evaluator(all.first(d.split), all.subspan(d.split), d.schema, mc, tc);
  nn::save_checkpoint(dir / "evaluator.ckpt", result.model.to_checkpoint(&result.optimizer));
  write_evaluator_csv(dir / "evaluator_metrics.csv", result.epochs);
  if (o.baseline) {
    auto pw = evaluator::train_pointwise(all.first(d.split), all.subspan(d.split), d.schema,
                                         mc.point_hidden, tc);
    write_evaluator_csv(dir / "pointwise_metrics.csv", pw.epochs);
  }
  if (!result.epochs.empty()) {
    std::cout << "final holdout auc " << result.epochs.back().auc << '\n';
  }
  return kOk;
}

int cmd_train_generator(const Options& o) {
  const fs::path dir = prepare_out_dir(o.out);
  require_file(o.evaluator, "evaluator");
  const Dataset d = load_dataset(o);
  const std::span<const data::LoggedSample> all(d.samples);
  const auto evaluator = evaluator::EvaluatorModel::from_checkpoint(nn::load_checkpoint(o.evaluator));
  if (!(evaluator.schema() == d.schema)) throw ConfigError("evaluator was trained on a different schema");

  generator::GeneratorConfig mc;
  mc.list_len = o.list_len;
  training::GeneratorTrainConfig tc;
  tc.mode = training::parse_train_mode(o.mode);
  tc.epochs = o.epochs;
  tc.optimizer.learning_rate = o.lr;
  tc.lambda = o.lambda;
  tc.temperature = o.temperature;
  tc.rounds = o.k;
  tc.seed = o.seed;
  auto result = training::train_generator(all.first(d.split), all.subspan(d.split), evaluator, mc, tc);
  nn::save_checkpoint(dir / "generator.ckpt", result.model.to_checkpoint(&result.optimizer));
  auto out = open_out(dir / "generator_metrics.csv");
  out << "epoch,mean_reward,average_ctr,selection_accuracy,rank_accuracy,softmax2d_loss\n"
      << std::fixed << std::setprecision(6);
  for (const auto& e : result.epochs) {
    out << e.epoch << ',' << e.mean_reward << ',' << e.average_ctr << ',' << e.selection_accuracy
        << ',' << e.rank_accuracy << ',' << e.softmax2d_loss << '\n';
  }
  if (!result.epochs.empty()) {
    std::cout << training::to_string(tc.mode) << " average ctr " << result.epochs.back().average_ctr
              << '\n';
  }
  return kOk;
}

int cmd_simulate(const Options& o) {
  if (o.step != 1 && o.step != 2) throw UsageError("--step must be 1 or 2");
  const fs::path dir = prepare_out_dir(o.out);
  const auto world = sim::gen_world(o.seed, world_config(o));
  const int status = print_warnings(world);
  const auto bc = bootstrap_config(o);
  std::vector<sim::DayMetrics> days;
  if (o.days > 0) {
    if (o.step == 1) {
      days = sim::run_step1(world, o.days, bc, o.seed).days;
    } else {
      const auto step1 = sim::run_step1(world, o.step1_days, bc, o.seed);
      days = sim::run_step2(world, o.days, bc, step1, o.seed).days;
    }
  }
  const fs::path path = dir / ("day_metrics_step" + std::to_string(o.step) + ".csv");
  auto out = open_out(path);
  sim::write_day_metrics_csv(out, days);
  std::cout << "wrote " << days.size() << " days to " << path.string() << '\n';
  return status;
}

int cmd_convert(const Options& o) {
  const fs::path dir = prepare_out_dir(o.out);
  data::FeatureSchema schema = data::jdrec_schema();
  if (!o.schema.empty()) {
    require_file(o.schema, "schema");
    schema = data::FeatureSchema::load(o.schema);
  }
  schema.save(dir / "schema.json");
  std::ifstream in;
  if (!o.input.empty()) {
    require_file(o.input, "input");
    in.open(o.input, std::ios::binary);
  }
  auto out = open_out(dir / "samples.jsonl");
  data::ConvertOptions co;
  co.list_len = o.list_len;
  co.pctr_feature = "pctr";
  std::ostringstream synthetic;
  std::istringstream synthetic_in;
  std::istream* src = &in;
  if (o.input.empty()) {
    // No input: convert a synthetic export of the requested size.
    data::write_synthetic_jdrec_flat(synthetic, schema, o.samples, o.candidates, o.list_len, o.seed);
    synthetic_in.str(synthetic.str());
    src = &synthetic_in;
  }
  const auto stats = data::convert_jdrec_flat(*src, out, schema, co);
  std::cout << "converted " << stats.samples << " samples (" << stats.rows << " rows, "
            << stats.rejected << " rejected)\n";
  return stats.rejected == 0 ? kOk : kWarning;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial slate recommendation: evaluator, generator and simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Root random seed")->required()->envname("JDREC_SEED");
  };
  auto add_common = [&](CLI::App* c) {
    add_seed(c);
    c->add_option("--out", o.out, "Output directory")->envname("JDREC_OUT");
    c->add_option("--list-len", o.list_len, "Slate length L")->envname("JDREC_LIST_LEN");
  };
  auto add_model = [&](CLI::App* c) {
    c->add_option("--epochs", o.epochs, "Training epochs")->envname("JDREC_EPOCHS");
    c->add_option("--lr", o.lr, "AdaGrad learning rate")->envname("JDREC_LR");
    c->add_option("--batch", o.batch, "Mini-batch size")->envname("JDREC_BATCH");
  };
  auto add_generation = [&](CLI::App* c) {
    c->add_option("--lambda", o.lambda, "Rank-loss weight")->envname("JDREC_LAMBDA");
    c->add_option("--temperature", o.temperature, "Sampling temperature t")
        ->envname("JDREC_TEMPERATURE");
    c->add_option("--k", o.k, "Sampling rounds per request")->envname("JDREC_K");
  };

  auto* gen = app.add_subcommand("gen-data", "Simulate a step-one log of a synthetic world");
  add_common(gen);
  add_model(gen);
  gen->add_option("--world", o.world, "World config JSON")->envname("JDREC_WORLD");
  gen->add_option("--days", o.days, "Simulated days")->envname("JDREC_DAYS");
  gen->add_option("--users", o.users, "Requests per day")->envname("JDREC_USERS");

  auto* train = app.add_subcommand("train", "Train a model on a sample file");
  train->require_subcommand(1);
  auto* train_eval = train->add_subcommand("evaluator", "Train the list evaluator");
  auto* train_gen = train->add_subcommand("generator", "Train the list generator");
  for (auto* c : {train_eval, train_gen}) {
    add_common(c);
    add_model(c);
    c->add_option("--schema", o.schema, "Feature schema JSON")->envname("JDREC_SCHEMA");
    c->add_option("--data", o.data, "Samples (JSON lines)")->envname("JDREC_DATA");
    c->add_option("--holdout", o.holdout, "Trailing fraction held out")->envname("JDREC_HOLDOUT");
  }
  train_eval->add_flag("--baseline", o.baseline, "Also train the point-wise baseline");
  add_generation(train_gen);
  train_gen->add_option("--mode", o.mode, "naive or ctr")->envname("JDREC_MODE");
  train_gen->add_option("--evaluator", o.evaluator, "Frozen evaluator checkpoint")
      ->envname("JDREC_EVALUATOR");

  auto* simulate = app.add_subcommand("simulate", "Run the two-step bootstrap simulation");
  add_common(simulate);
  add_generation(simulate);
  simulate->add_option("--lr", o.lr, "AdaGrad learning rate")->envname("JDREC_LR");
  simulate->add_option("--world", o.world, "World config JSON")->envname("JDREC_WORLD");
  simulate->add_option("--days", o.days, "Simulated days")->envname("JDREC_DAYS");
  simulate->add_option("--step", o.step, "Bootstrap step (1 or 2)")->envname("JDREC_STEP");
  simulate->add_option("--step1-days", o.step1_days, "Step-one days preceding step two")
      ->envname("JDREC_STEP1_DAYS");
  simulate->add_option("--ramp-day", o.ramp_day, "First day of full gray release")
      ->envname("JDREC_RAMP_DAY");
  simulate->add_option("--users", o.users, "Requests per day")->envname("JDREC_USERS");

  auto* convert = app.add_subcommand("convert", "Convert a flat JDRec export to JSON lines");
  add_common(convert);
  convert->add_option("--input", o.input, "Flat TSV export; omitted: synthetic export")
      ->envname("JDREC_INPUT");
  convert->add_option("--schema", o.schema, "Feature schema JSON (default: 51 features)")
      ->envname("JDREC_SCHEMA");
  convert->add_option("--samples", o.samples, "Synthetic requests when no input is given");
  convert->add_option("--candidates", o.candidates, "Synthetic candidates per request");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen_data(o);
    if (*train_eval) return cmd_train_evaluator(o);
    if (*train_gen) return cmd_train_generator(o);
    if (*simulate) return cmd_simulate(o);
    if (*convert) return cmd_convert(o);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kConfig;
}
