// cpdbench: generate synthetic tachograms, run detectors, tune, sweep and
// classify. Talks to the library only through the C API.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpdbench/cpdbench.h"
#include "cpdbench/parallel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kSchemaVersion = 1;

const char* const kAlgos[] = {"rmdm", "binseg", "pelt1", "pelt2", "bblocks", "bcp", "bocd", "mbocd"};

// A failed library call, carrying its status.
struct ApiError : std::runtime_error {
  cpd_status status;
  ApiError(cpd_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cpd_status status, const std::string& context = {}) {
  if (status == CPD_OK) return;
  std::string msg = cpd_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw ApiError(status, msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Series = std::unique_ptr<cpd_series, Deleter<cpd_series, cpd_series_free>>;
using Corpus = std::unique_ptr<cpd_corpus, Deleter<cpd_corpus, cpd_corpus_free>>;
using Detector = std::unique_ptr<cpd_detector, Deleter<cpd_detector, cpd_detector_free>>;
using Result = std::unique_ptr<cpd_result, Deleter<cpd_result, cpd_result_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  cpd_string_free(s);
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error(path.string() + ": rename failed: " + ec.message());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

json file_entry(const fs::path& path) {
  return {{"path", path.string()}, {"sha256", sha256_hex(read_text(path))}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error(dir.string() + ": cannot create directory");
  }
}

// Sorted RR CSVs of a directory; labels.csv and manifests are skipped.
std::vector<fs::path> list_series(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    if (e.path().filename() == "labels.csv") continue;
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw std::runtime_error(dir.string() + ": no series CSV files");
  return out;
}

std::map<std::string, std::string> read_labels(const fs::path& dir) {
  std::map<std::string, std::string> labels;
  const fs::path path = dir / "labels.csv";
  if (!fs::exists(path)) return labels;
  std::istringstream in(read_text(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != "subject_id,label") throw std::runtime_error(path.string() + ": expected header 'subject_id,label'");
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path.string() + ": malformed line '" + line + "'");
    labels[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return labels;
}

struct LoadedCorpus {
  Corpus corpus;
  json inputs = json::array();
};

LoadedCorpus load_corpus(const fs::path& dir, bool with_labels) {
  LoadedCorpus out;
  cpd_corpus* c = nullptr;
  check(cpd_corpus_create(&c));
  out.corpus.reset(c);
  const auto labels = with_labels ? read_labels(dir) : std::map<std::string, std::string>{};
  for (const auto& path : list_series(dir)) {
    out.inputs.push_back(file_entry(path));
    cpd_series* s = nullptr;
    check(cpd_series_read_csv(path.string().c_str(), &s));
    Series series(s);
    if (with_labels) {
      const auto it = labels.find(path.stem().string());
      if (it != labels.end()) {
        check(cpd_series_set_meta(series.get(), path.stem().string().c_str(), it->second.c_str()));
      }
    }
    check(cpd_corpus_add(out.corpus.get(), series.get()), path.string());
  }
  return out;
}

std::size_t resolve_jobs(std::size_t flag) {
  if (const char* env = std::getenv("CPD_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("CPD_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max<std::size_t>(1, flag);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Detector make_detector(const std::string& algo, const std::optional<std::string>& params) {
  cpd_detector* d = nullptr;
  const cpd_status st = cpd_detector_create(algo.c_str(), params ? params->c_str() : nullptr, &d);
  if (st != CPD_OK) throw UsageError(cpd_last_error());
  return Detector(d);
}

std::string detector_json(const cpd_detector* d) {
  char* s = nullptr;
  check(cpd_detector_to_json(d, &s));
  return take_string(s);
}

class Manifest {
public:
  Manifest(std::string command, int argc, char** argv)
      : start_(std::chrono::steady_clock::now()) {
    j_["schema_version"] = kSchemaVersion;
    j_["library_version"] = cpd_version();
    j_["command"] = std::move(command);
    j_["argv"] = std::vector<std::string>(argv, argv + argc);
    j_["inputs"] = json::array();
    j_["outputs"] = json::array();
  }

  json& operator[](const char* key) { return j_[key]; }
  void input(const fs::path& p) { j_["inputs"].push_back(file_entry(p)); }
  void inputs(const json& entries) {
    for (const auto& e : entries) j_["inputs"].push_back(e);
  }
  void output(const fs::path& p) { j_["outputs"].push_back(file_entry(p)); }

  void write(const fs::path& path) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    j_["wall_clock_seconds"] = std::chrono::duration<double>(elapsed).count();
    write_atomic(path, j_.dump(2) + '\n');
  }

private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

// --- generate --------------------------------------------------------------------

struct GenerateOpts {
  std::string config;
  std::size_t n = 400;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

int cmd_generate(const GenerateOpts& o, int argc, char** argv) {
  if (o.n == 0) throw UsageError("count must be positive");
  Manifest manifest("generate", argc, argv);
  std::string config_text = "{}";
  if (!o.config.empty()) {
    config_text = read_text(o.config);
    manifest.input(o.config);
  }
  char* full = nullptr;
  if (cpd_synth_config_json(config_text.c_str(), &full) != CPD_OK) {
    throw UsageError(std::string("--config: ") + cpd_last_error());
  }
  const json config = json::parse(take_string(full));
  const std::string config_dump = config.dump();
  const fs::path dir(o.out);
  ensure_dir(dir);

  const int width = static_cast<int>(std::to_string(o.n - 1).size());
  std::vector<fs::path> paths(o.n);
  std::vector<std::string> labels(o.n);
  cpd::parallel_for(o.n, resolve_jobs(o.jobs), [&](std::size_t i) {
    char name[64];
    std::snprintf(name, sizeof name, "series_%0*zu.csv", std::max(width, 4), i);
    paths[i] = dir / name;
    cpd_series* s = nullptr;
    check(cpd_generate(config_dump.c_str(), o.seed + i, &s), paths[i].string());
    Series series(s);
    if (const char* label = cpd_series_label(series.get())) labels[i] = label;
    check(cpd_series_write_csv(series.get(), paths[i].string().c_str()), paths[i].string());
  });

  for (const auto& p : paths) manifest.output(p);
  if (config.contains("label") && !config["label"].is_null()) {
    std::string text = "subject_id,label\n";
    for (std::size_t i = 0; i < o.n; ++i) text += paths[i].stem().string() + ',' + labels[i] + '\n';
    write_atomic(dir / "labels.csv", text);
    manifest.output(dir / "labels.csv");
  }
  manifest["config"] = config;
  manifest["seeds"] = {{"first", o.seed}, {"last", o.seed + o.n - 1}};
  manifest.write(dir / "manifest.json");
  return kExitOk;
}

// --- detect ----------------------------------------------------------------------

struct DetectOpts {
  std::string algo;
  std::optional<std::string> params;
  std::vector<std::string> inputs;
  std::string out;
  std::size_t jobs = 1;
};

int cmd_detect(const DetectOpts& o, int argc, char** argv) {
  const Detector detector = make_detector(o.algo, o.params);
  if (!o.params) std::cerr << "detect: no --params given, using defaults " << detector_json(detector.get()) << '\n';
  const fs::path dir(o.out);
  ensure_dir(dir);
  Manifest manifest("detect", argc, argv);
  manifest["detector"] = json::parse(detector_json(detector.get()));

  const std::size_t n = o.inputs.size();
  std::vector<std::string> errors(n);
  std::vector<fs::path> outputs(n);
  std::vector<json> inputs(n);
  cpd::parallel_for(n, resolve_jobs(o.jobs), [&](std::size_t i) {
    const fs::path in(o.inputs[i]);
    try {
      inputs[i] = file_entry(in);
      cpd_series* s = nullptr;
      check(cpd_series_read_csv(in.string().c_str(), &s));
      Series series(s);
      cpd_result* r = nullptr;
      check(cpd_detect(series.get(), detector.get(), &r), in.string());
      Result result(r);
      char* text = nullptr;
      check(cpd_result_to_json(result.get(), &text));
      outputs[i] = dir / (in.stem().string() + ".json");
      write_atomic(outputs[i], take_string(text) + '\n');
    } catch (const std::exception& e) {
      errors[i] = e.what();
      outputs[i].clear();
    }
  });

  std::string log;
  for (std::size_t i = 0; i < n; ++i) {
    if (!inputs[i].is_null()) manifest.inputs(json::array({inputs[i]}));
    if (!outputs[i].empty()) manifest.output(outputs[i]);
    if (!errors[i].empty()) {
      std::cerr << "detect: " << errors[i] << '\n';
      log += o.inputs[i] + ": " + errors[i] + '\n';
    }
  }
  if (!log.empty()) write_atomic(dir / "errors.log", log);
  manifest.write(dir / "manifest.json");
  return log.empty() ? kExitOk : kExitPartial;
}

// --- tune ------------------------------------------------------------------------

struct TuneOpts {
  std::string algo;
  std::string corpus;
  std::size_t tolerance = 3;
  std::string out;
  std::size_t jobs = 1;
};

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p.replace_extension();
  p += suffix;
  return p;
}

int cmd_tune(const TuneOpts& o, int argc, char** argv) {
  Manifest manifest("tune", argc, argv);
  auto loaded = load_corpus(o.corpus, false);
  manifest.inputs(loaded.inputs);
  char* best = nullptr;
  char* table = nullptr;
  const cpd_status st = cpd_tune(o.algo.c_str(), loaded.corpus.get(), o.tolerance,
                                 resolve_jobs(o.jobs), &best, &table);
  if (st == CPD_ERR_INVALID_ARGUMENT) throw UsageError(cpd_last_error());
  check(st, "tune");
  json best_json = json::parse(take_string(best));
  best_json["schema_version"] = kSchemaVersion;
  best_json["tolerance"] = o.tolerance;
  const fs::path out(o.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_atomic(out, best_json.dump(2) + '\n');
  const fs::path table_path = sibling(out, ".table.csv");
  write_atomic(table_path, take_string(table));
  manifest.output(out);
  manifest.output(table_path);
  manifest["tolerance"] = o.tolerance;
  manifest.write(sibling(out, ".manifest.json"));
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------------

struct SweepOpts {
  std::string axis;
  std::string values;
  std::string algos = "all";
  std::vector<std::string> configs;
  std::string corpus;
  std::string synth_config;
  std::size_t n = 400;
  std::uint64_t corpus_seed = 0;
  std::size_t tolerance = 3;
  std::string out;
  std::size_t jobs = 1;
};

int cmd_sweep(const SweepOpts& o, int argc, char** argv) {
  Manifest manifest("sweep", argc, argv);
  std::vector<double> values;
  for (const auto& v : split_list(o.values)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw UsageError("--values: '" + v + "' is not a number");
    }
  }
  if (values.empty()) throw UsageError("--values must list at least one value");

  std::vector<Detector> detectors;
  for (const auto& path : o.configs) {
    cpd_detector* d = nullptr;
    if (cpd_detector_create_json(read_text(path).c_str(), &d) != CPD_OK) {
      throw UsageError(path + ": " + cpd_last_error());
    }
    detectors.emplace_back(d);
    manifest.input(path);
  }
  if (o.configs.empty()) {
    std::vector<std::string> algos = o.algos == "all" ? std::vector<std::string>(std::begin(kAlgos), std::end(kAlgos))
                                                      : split_list(o.algos);
    for (const auto& a : algos) detectors.push_back(make_detector(a, std::nullopt));
  }
  if (detectors.empty()) throw UsageError("no detectors selected");

  Corpus corpus;
  if (!o.corpus.empty()) {
    auto loaded = load_corpus(o.corpus, false);
    manifest.inputs(loaded.inputs);
    corpus = std::move(loaded.corpus);
  } else {
    std::string config_text = "{}";
    if (!o.synth_config.empty()) {
      config_text = read_text(o.synth_config);
      manifest.input(o.synth_config);
    }
    cpd_corpus* c = nullptr;
    check(cpd_corpus_create(&c));
    corpus.reset(c);
    std::vector<Series> generated(o.n);
    cpd::parallel_for(o.n, resolve_jobs(o.jobs), [&](std::size_t i) {
      cpd_series* s = nullptr;
      check(cpd_generate(config_text.c_str(), o.corpus_seed + i, &s), "generate");
      generated[i].reset(s);
    });
    for (const auto& s : generated) check(cpd_corpus_add(corpus.get(), s.get()));
    manifest["generated_corpus"] = {{"n", o.n}, {"first_seed", o.corpus_seed}};
  }

  std::vector<const cpd_detector*> raw;
  json detector_list = json::array();
  for (const auto& d : detectors) {
    raw.push_back(d.get());
    detector_list.push_back(json::parse(detector_json(d.get())));
  }
  char* csv = nullptr;
  const cpd_status st = cpd_sweep(raw.data(), raw.size(), corpus.get(), o.axis.c_str(), values.data(),
                                  values.size(), o.tolerance, o.corpus_seed, resolve_jobs(o.jobs), &csv);
  if (st == CPD_ERR_INVALID_ARGUMENT) throw UsageError(cpd_last_error());
  check(st, "sweep");

  const fs::path dir(o.out);
  ensure_dir(dir);
  const fs::path path = dir / ("sweep_" + o.axis + ".csv");
  write_atomic(path, take_string(csv));
  manifest.output(path);
  manifest["detectors"] = detector_list;
  manifest["axis"] = o.axis;
  manifest["values"] = values;
  manifest["perturb_seed"] = o.corpus_seed;
  manifest["tolerance"] = o.tolerance;
  manifest.write(dir / ("sweep_" + o.axis + ".manifest.json"));
  return kExitOk;
}

// --- classify --------------------------------------------------------------------

struct ClassifyOpts {
  std::string features;
  std::string subjects;
  std::string algo = "rmdm";
  std::optional<std::string> params;
  std::optional<std::string> knn;
  std::string cv = "loo";
  std::uint64_t fold_seed = 0;
  std::string out;
  std::size_t jobs = 1;
};

int cmd_classify(const ClassifyOpts& o, int argc, char** argv) {
  if (o.features.empty() == o.subjects.empty()) {
    throw UsageError("give exactly one of --features or --subjects");
  }
  Manifest manifest("classify", argc, argv);
  const fs::path out(o.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  const char* knn = o.knn ? o.knn->c_str() : nullptr;

  auto run = [&](auto&& call) {
    char* report = nullptr;
    const cpd_status st = call(&report);
    if (st == CPD_ERR_INVALID_ARGUMENT) throw UsageError(cpd_last_error());
    check(st, "classify");
    return json::parse(take_string(report));
  };

  json result;
  if (!o.features.empty()) {
    manifest.input(o.features);
    const std::string text = read_text(o.features);
    result = run([&](char** r) {
      return cpd_classify_features(text.c_str(), knn, o.cv.c_str(), o.fold_seed, r);
    });
  } else {
    auto loaded = load_corpus(o.subjects, true);
    manifest.inputs(loaded.inputs);
    std::vector<std::string> algos{o.algo};
    if (o.algo == "all") {
      if (o.params) throw UsageError("--params cannot be combined with --algo all");
      algos.assign(std::begin(kAlgos), std::end(kAlgos));
    }
    json reports = json::object();
    std::string table = "algo,acc,auroc,aucpr,tpr,ppv,f1,subjects,excluded\n";
    for (const auto& a : algos) {
      const Detector detector = make_detector(a, o.params);
      json r = run([&](char** rep) {
        return cpd_classify_subjects(loaded.corpus.get(), detector.get(), knn, o.cv.c_str(),
                                     o.fold_seed, resolve_jobs(o.jobs), rep);
      });
      for (const auto& w : r["warnings"]) std::cerr << "classify[" << a << "]: " << w.get<std::string>() << '\n';
      std::ostringstream row;
      row.precision(17);
      row << a << ',' << r["acc"].get<double>() << ',' << r["auroc"].get<double>() << ','
          << r["aucpr"].get<double>() << ',' << r["tpr"].get<double>() << ',' << r["ppv"].get<double>()
          << ',' << r["f1"].get<double>() << ',' << r["subjects"].size() << ','
          << r["excluded"].get<std::size_t>() << '\n';
      table += row.str();
      reports[a] = std::move(r);
    }
    if (o.algo == "all") {
      result = {{"schema_version", kSchemaVersion}, {"reports", reports}};
      const fs::path table_path = sibling(out, ".table.csv");
      write_atomic(table_path, table);
      manifest.output(table_path);
    } else {
      result = reports[o.algo];
    }
  }
  write_atomic(out, result.dump(2) + '\n');
  manifest.output(out);
  manifest["cv"] = o.cv;
  manifest["fold_seed"] = o.fold_seed;
  manifest.write(sibling(out, ".manifest.json"));
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Changepoint detection benchmark for RR-interval series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cpd_version()));

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Write synthetic tachograms with known changepoints");
  g->add_option("--config", gen.config, "Synthetic config JSON file")->check(CLI::ExistingFile);
  g->add_option("--n", gen.n, "Number of series")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "First seed; series i uses seed + i")->capture_default_str();
  g->add_option("--jobs", gen.jobs, "Worker threads (CPD_JOBS overrides)")->capture_default_str();

  DetectOpts det;
  auto* d = app.add_subcommand("detect", "Run one detector over RR CSV files");
  d->add_option("--algo", det.algo, "rmdm|binseg|pelt1|pelt2|bblocks|bcp|bocd|mbocd")->required();
  d->add_option("--params", det.params, "Detector parameters as a JSON object");
  d->add_option("--in", det.inputs, "Input RR CSV files")->required();
  d->add_option("--out", det.out, "Output directory")->required();
  d->add_option("--jobs", det.jobs, "Worker threads (CPD_JOBS overrides)")->capture_default_str();

  TuneOpts tune;
  auto* t = app.add_subcommand("tune", "Grid-search detector parameters for mean F1");
  t->add_option("--algo", tune.algo, "Detector id")->required();
  t->add_option("--corpus", tune.corpus, "Directory of annotated RR CSV files")->required();
  t->add_option("--tolerance", tune.tolerance, "Match tolerance in beats")->capture_default_str();
  t->add_option("--out", tune.out, "Best-config JSON path; the table goes next to it")->required();
  t->add_option("--jobs", tune.jobs, "Worker threads (CPD_JOBS overrides)")->capture_default_str();

  SweepOpts sw;
  auto* s = app.add_subcommand("sweep", "Perturbation and tolerance sweeps");
  s->add_option("--axis", sw.axis, "noise|ectopy|tolerance")->required();
  s->add_option("--values", sw.values, "Comma-separated axis values")->required();
  s->add_option("--algos", sw.algos, "Comma-separated detector ids or 'all'")->capture_default_str();
  s->add_option("--configs", sw.configs, "Detector config JSON files (override --algos)");
  s->add_option("--corpus", sw.corpus, "Directory of annotated RR CSV files");
  s->add_option("--synth-config", sw.synth_config, "Synthetic config used when --corpus is absent");
  s->add_option("--n", sw.n, "Generated corpus size when --corpus is absent")->capture_default_str();
  s->add_option("--corpus-seed", sw.corpus_seed, "Seed for corpus generation and perturbation")->capture_default_str();
  s->add_option("--tolerance", sw.tolerance, "Match tolerance for noise/ectopy axes")->capture_default_str();
  s->add_option("--out", sw.out, "Output directory")->required();
  s->add_option("--jobs", sw.jobs, "Worker threads (CPD_JOBS overrides)")->capture_default_str();

  ClassifyOpts cl;
  auto* c = app.add_subcommand("classify", "Pareto features and cross-validated KNN");
  c->add_option("--features", cl.features, "Features CSV (subject_id,label,scale,shape)");
  c->add_option("--subjects", cl.subjects, "Directory of RR CSV files with labels.csv");
  c->add_option("--algo", cl.algo, "Detector id or 'all'")->capture_default_str();
  c->add_option("--params", cl.params, "Detector parameters as a JSON object");
  c->add_option("--knn", cl.knn, "KNN config JSON; tuned by AUCPR when absent");
  c->add_option("--cv", cl.cv, "loo or kfold:<k>")->capture_default_str();
  c->add_option("--fold-seed", cl.fold_seed, "Seed for k-fold assignment")->capture_default_str();
  c->add_option("--out", cl.out, "Report JSON path")->required();
  c->add_option("--jobs", cl.jobs, "Worker threads (CPD_JOBS overrides)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen, argc, argv);
    if (*d) return cmd_detect(det, argc, argv);
    if (*t) return cmd_tune(tune, argc, argv);
    if (*s) return cmd_sweep(sw, argc, argv);
    if (*c) return cmd_classify(cl, argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
