#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>

#include "cvas/blackbox.hpp"
#include "cvas/config.hpp"
#include "cvas/dataset.hpp"
#include "cvas/error.hpp"
#include "cvas/evalharness.hpp"
#include "cvas/io_util.hpp"
#include "cvas/random.hpp"
#include "cvas/recourse.hpp"

namespace cvas::cli {
namespace {

// Usage problems detected after parsing (bad values, missing inputs).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// String-valued options whose presence is tracked, so values can be layered
// over a config file and built-in defaults.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {
    add("config", "flat key = value file supplying defaults for any option");
    add("seed", "master seed (default 0)");
  }

  Flags& add(const std::string& name, const std::string& help) {
    options_[name] = app_->add_option("--" + name, values_[name], help);
    return *this;
  }

  std::optional<std::string> raw(const std::string& name) const {
    const auto it = options_.find(name);
    if (it == options_.end() || it->second->count() == 0) return std::nullopt;
    return values_.at(name);
  }

  void load_config() {
    if (auto path = raw("config")) config_ = ConfigFile::load(*path);
  }

  std::string str(const std::string& name, std::string_view fallback) const {
    return resolve_string(raw(name), config_, name, fallback);
  }
  std::optional<std::string> opt(const std::string& name) const {
    if (auto v = raw(name)) return v;
    return config_.get(name);
  }
  std::string required(const std::string& name) const {
    auto v = opt(name);
    if (!v || v->empty()) throw UsageError("--" + name + " is required");
    return *v;
  }
  // A malformed option value is a usage problem, wherever it came from.
  double num(const std::string& name, double fallback) const {
    return as_usage([&] { return resolve_double(raw(name), config_, name, fallback); });
  }
  std::int64_t integer(const std::string& name, std::int64_t fallback) const {
    return as_usage([&] { return resolve_int(raw(name), config_, name, fallback); });
  }
  std::size_t count(const std::string& name, std::size_t fallback) const {
    const auto v = integer(name, static_cast<std::int64_t>(fallback));
    if (v < 0) throw UsageError("--" + name + " must be >= 0");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed", 0)); }

 private:
  template <typename Fn>
  static std::invoke_result_t<Fn> as_usage(Fn fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kFormatError) throw;
      throw UsageError(e.what());
    }
  }

  CLI::App* app_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
  ConfigFile config_;
};

void add_data_flags(Flags& f) {
  f.add("data", "present-data CSV")
      .add("spec", "feature spec file")
      .add("split", "training fraction (default 0.8)");
}

void add_model_flags(Flags& f) {
  f.add("model", "trained model file; trained on the fly when absent")
      .add("epochs", "training epochs (default 1000)")
      .add("lr", "Adam learning rate (default 1e-3)");
}

void add_pipeline_flags(Flags& f) {
  f.add("divergence", "nominal | quadratic | bures | fisher-rao | logdet")
      .add("rho-pos", "radius for the favorable class (default 0)")
      .add("mode", "projection | actionable (default projection)")
      .add("k", "prototype count (default 10)")
      .add("n-p", "synthetic samples per instance (default 1000)")
      .add("r-p", "sampling radius (default 5% of the max pairwise distance)")
      .add("max-instances", "cap on recourse queries (default: all)");
}

void add_eval_flags(Flags& f) {
  f.add("shifted", "shifted-data CSV used to train the future models")
      .add("n-future", "future models (default 100)")
      .add("future-fraction", "subsample fraction per future model (default 0.8)")
      .add("fidelity-samples", "ball samples for local fidelity (default 1000)")
      .add("sensitivity-neighbors", "neighbors per instance, 0 disables (default 10)")
      .add("out", "report CSV")
      .add("json-out", "report JSON (default: the CSV path with .json)");
}

EncodedDataset load_present(const Flags& f) {
  return load_dataset(f.required("data"), f.required("spec"), f.num("split", 0.8), f.seed());
}

TrainConfig train_config(const Flags& f, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = static_cast<int>(f.integer("epochs", 1000));
  tc.learning_rate = f.num("lr", 1e-3);
  tc.seed = seed;
  return tc;
}

MlpModel obtain_model(const Flags& f, const EncodedDataset& data, std::ostream& out) {
  if (auto path = f.opt("model")) {
    MlpModel m = load_model(*path);
    if (m.input_dim() != data.features.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "model input dimension does not match the data");
    }
    return m;
  }
  const Matrix x = data.rows(data.train);
  const auto y = data.row_labels(data.train);
  MlpModel m = train_mlp(x, y, train_config(f, f.seed()));
  out << "trained model: train accuracy " << accuracy(m, x, y) << "\n";
  return m;
}

SamplerConfig sampler_config(const Flags& f) {
  SamplerConfig sc;
  sc.k = f.count("k", sc.k);
  sc.n_p = f.count("n-p", sc.n_p);
  if (f.opt("r-p")) sc.r_p = f.num("r-p", 0.0);
  sc.validate();
  return sc;
}

// Test rows the model labels unfavorable, in row order.
std::vector<std::size_t> default_instances(const Flags& f, const EncodedDataset& data,
                                           const MlpModel& model) {
  const std::size_t cap = f.count("max-instances", 0);
  std::vector<std::size_t> out;
  for (std::size_t i : data.test) {
    if (cap && out.size() >= cap) break;
    if (model.label(data.features.row(static_cast<Eigen::Index>(i)).transpose()) == -1) {
      out.push_back(i);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyInput, "no test instance is labeled unfavorable");
  return out;
}

std::string json_path(const Flags& f, const std::string& csv) {
  if (auto p = f.opt("json-out")) return *p;
  std::filesystem::path p(csv);
  p.replace_extension(".json");
  return p.string();
}

std::string synthetic_csv(const LabeledData& d) {
  std::string s = "x1,x2,label\n";
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    s += fmt(d.features(i, 0)) + "," + fmt(d.features(i, 1)) + "," +
         (d.labels[static_cast<std::size_t>(i)] == 1 ? "1" : "-1") + "\n";
  }
  return s;
}

int cmd_gen_synthetic(const Flags& f, std::ostream& out) {
  const auto n = f.count("n", 1000);
  if (n == 0) throw UsageError("--n must be >= 1");
  const double noise = f.num("noise", 0.0);
  const auto seed = f.seed();
  const std::string path = f.required("out");
  write_file_atomic(path, synthetic_csv(generate_synthetic(n, noise, seed)));
  out << "wrote " << n << " rows to " << path << "\n";
  if (auto shifted = f.opt("shifted-out")) {
    const double shifted_noise = f.num("shifted-noise", 1.0);
    write_file_atomic(*shifted, synthetic_csv(generate_synthetic(n, shifted_noise, seed + 1)));
    out << "wrote " << n << " rows to " << *shifted << "\n";
  }
  if (auto spec = f.opt("spec-out")) {
    write_file_atomic(*spec,
                      "# name,kind,actionability\nx1,continuous,free\n"
                      "x2,continuous,free\nlabel,label\n");
    out << "wrote feature spec to " << *spec << "\n";
  }
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out) {
  const EncodedDataset data = load_present(f);
  const std::string path = f.required("out");
  const Matrix x = data.rows(data.train);
  const auto y = data.row_labels(data.train);
  const MlpModel m = train_mlp(x, y, train_config(f, f.seed()));
  save_model(m, path);
  out << "train accuracy " << accuracy(m, x, y);
  if (!data.test.empty()) {
    out << ", test accuracy " << accuracy(m, data.rows(data.test), data.row_labels(data.test));
  }
  out << "\nwrote model to " << path << "\n";
  return kExitOk;
}

std::vector<std::size_t> parse_ids(const std::string& text, std::size_t n_rows) {
  std::vector<std::size_t> ids;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw UsageError("--instances: '" + tok + "' is not a row index");
    }
    if (v >= n_rows) throw UsageError("--instances: row " + tok + " is out of range");
    ids.push_back(v);
  }
  if (ids.empty()) throw UsageError("--instances is empty");
  return ids;
}

int cmd_recourse(const Flags& f, std::ostream& out, std::ostream& err) {
  const EncodedDataset data = load_present(f);
  const MlpModel model = obtain_model(f, data, out);
  const std::string mode_name = f.str("mode", "projection");
  const bool wachter = mode_name == "wachter";
  const RecourseMode mode = wachter ? RecourseMode::kProjection : parse_recourse_mode(mode_name);
  const Divergence div{parse_divergence(f.str("divergence", "nominal")), f.num("rho-pos", 0.0),
                       f.num("rho-neg", 0.0)};
  div.validate();
  const std::string path = f.required("out");
  const auto ids = f.opt("instances")
                       ? parse_ids(*f.opt("instances"), static_cast<std::size_t>(data.features.rows()))
                       : default_instances(f, data, model);

  const Matrix train = data.rows(data.train);
  SamplerConfig sc = sampler_config(f);
  if (!sc.r_p && !wachter) sc.r_p = resolve_radius(sc, train);
  const auto kinds = data.encoding.actionability();

  std::string csv = "instance_id,mode,divergence,rho_neg,cost,surrogate_valid,blackbox_valid\n";
  std::size_t ok = 0;
  for (std::size_t id : ids) {
    const Vector x0 = data.features.row(static_cast<Eigen::Index>(id)).transpose();
    try {
      RecourseResult r;
      if (wachter) {
        try {
          r = wachter_recourse(model, x0);
        } catch (const NoValidRecourseError& e) {
          r = e.result();
        }
      } else {
        sc.seed = derive_seed(f.seed(), seed_stream::kSampler, id);
        const ActionSpec spec = default_action_grids(x0, train, kinds);
        r = generate_recourse(model, x0, train, sc, div, mode,
                              mode == RecourseMode::kActionable ? &spec : nullptr);
      }
      csv += std::to_string(id) + "," + (wachter ? "wachter" : std::string(recourse_mode_name(mode))) +
             "," + (wachter ? "none" : std::string(divergence_name(div.kind))) + "," +
             fmt(div.rho_neg) + "," + fmt(r.cost) + "," + (r.surrogate_valid ? "1" : "0") + "," +
             (r.blackbox_valid ? "1" : "0") + "\n";
      ++ok;
    } catch (const Error& e) {
      err << "instance " << id << " skipped: " << e.what() << "\n";
    }
  }
  write_file_atomic(path, csv);
  out << "wrote " << ok << " of " << ids.size() << " recourses to " << path << "\n";
  return ok > 0 ? kExitOk : kExitData;
}

int run_report(const Flags& f, std::vector<double> grid, std::ostream& out) {
  const EncodedDataset data = load_present(f);
  const EncodedDataset shifted =
      apply_encoding(parse_csv(read_file(f.required("shifted"))), data.encoding);
  const MlpModel model = obtain_model(f, data, out);

  FutureModelConfig fc;
  fc.n_models = f.count("n-future", 100);
  fc.fraction = f.num("future-fraction", 0.8);
  fc.train = train_config(f, derive_seed(f.seed(), seed_stream::kFutureModels));
  const auto future = simulate_future_models(shifted.features, shifted.labels, fc);
  out << "trained " << future.size() << " future models\n";

  SweepConfig sc;
  sc.divergence = parse_divergence(f.str("divergence", "nominal"));
  sc.rho_pos = f.num("rho-pos", 0.0);
  sc.rho_neg_grid = std::move(grid);
  sc.mode = parse_recourse_mode(f.str("mode", "projection"));
  sc.actionability = data.encoding.actionability();
  sc.sampler = sampler_config(f);
  sc.fidelity_samples = f.count("fidelity-samples", 1000);
  sc.sensitivity_neighbors = f.count("sensitivity-neighbors", 10);
  sc.seed = f.seed();

  const Matrix train = data.rows(data.train);
  const auto ids = default_instances(f, data, model);
  const Matrix instances = data.rows(ids);
  const EvalReport report = sweep({train, model, future, instances}, sc);

  const std::string path = f.required("out");
  write_file_atomic(path, report.to_csv());
  const std::string jpath = json_path(f, path);
  write_file_atomic(jpath, report.to_json());
  out << "wrote " << report.rows.size() << " rows over " << ids.size() << " instances to "
      << path << " and " << jpath << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariance-robust linear surrogates and recourse", "cvas"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-synthetic", "write the 2-d synthetic datasets");
  Flags gen_f(gen);
  gen_f.add("n", "rows (default 1000)")
      .add("noise", "label noise std (default 0)")
      .add("out", "output CSV")
      .add("shifted-out", "also write a shifted copy (seed + 1)")
      .add("shifted-noise", "label noise std of the shifted copy (default 1)")
      .add("spec-out", "also write the matching feature spec");

  auto* train = app.add_subcommand("train", "train the black-box MLP");
  Flags train_f(train);
  add_data_flags(train_f);
  train_f.add("epochs", "training epochs (default 1000)")
      .add("lr", "Adam learning rate (default 1e-3)")
      .add("out", "output model file");

  auto* rec = app.add_subcommand("recourse", "generate recourses for chosen rows");
  Flags rec_f(rec);
  add_data_flags(rec_f);
  add_model_flags(rec_f);
  add_pipeline_flags(rec_f);
  rec_f.add("rho-neg", "radius for the unfavorable class (default 0)")
      .add("instances", "comma-separated CSV row indices (default: unfavorable test rows)")
      .add("out", "recourse CSV");

  auto* eval = app.add_subcommand("evaluate", "evaluate one configuration");
  Flags eval_f(eval);
  add_data_flags(eval_f);
  add_model_flags(eval_f);
  add_pipeline_flags(eval_f);
  add_eval_flags(eval_f);
  eval_f.add("rho-neg", "radius for the unfavorable class (default 0)");

  auto* sw = app.add_subcommand("sweep", "sweep the unfavorable-class radius");
  Flags sweep_f(sw);
  add_data_flags(sweep_f);
  add_model_flags(sweep_f);
  add_pipeline_flags(sweep_f);
  add_eval_flags(sweep_f);
  sweep_f.add("rho-neg", "radius grid start:stop:step (default 0:10:1)");

  std::vector<std::string> argv_store = {"cvas"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (msg.empty()) msg = "invalid command line";
    err << "error: " << msg.substr(0, msg.find('\n')) << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      gen_f.load_config();
      return cmd_gen_synthetic(gen_f, out);
    }
    if (train->parsed()) {
      train_f.load_config();
      return cmd_train(train_f, out);
    }
    if (rec->parsed()) {
      rec_f.load_config();
      return cmd_recourse(rec_f, out, err);
    }
    if (eval->parsed()) {
      eval_f.load_config();
      return run_report(eval_f, {eval_f.num("rho-neg", 0.0)}, out);
    }
    sweep_f.load_config();
    return run_report(sweep_f, parse_range(sweep_f.str("rho-neg", "0:10:1")), out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace cvas::cli
