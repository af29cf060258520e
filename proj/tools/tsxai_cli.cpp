// Command-line front end.  Every subcommand writes its artifacts into --out
// together with a manifest.json echoing the fully resolved configuration and
// a timing.csv with wall-clock stage times.  Everything except timing.csv is
// byte-identical across re-runs with the same flags, for any --jobs value.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsxai/tsxai.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code(tsx_status st) {
  switch (st) {
    case TSX_OK:
      return 0;
    case TSX_ERR_ARGUMENT:
      return 2;
    case TSX_ERR_DATA:
    case TSX_ERR_IO:
      return 3;
    case TSX_ERR_NUMERIC:
    case TSX_ERR_INTERNAL:
      return 4;
  }
  return 4;
}

const char* status_word(tsx_status st) {
  switch (st) {
    case TSX_OK:
      return "ok";
    case TSX_ERR_ARGUMENT:
      return "usage";
    case TSX_ERR_DATA:
      return "data";
    case TSX_ERR_IO:
      return "io";
    case TSX_ERR_NUMERIC:
      return "numeric";
    case TSX_ERR_INTERNAL:
      return "internal";
  }
  return "internal";
}

[[noreturn]] void die(tsx_status st) {
  std::fprintf(stderr, "error: %s: %s\n", status_word(st), tsx_last_error());
  std::exit(exit_code(st));
}

[[noreturn]] void die_usage(const std::string& msg) {
  std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
  std::exit(2);
}

[[noreturn]] void die_data(const std::string& msg) {
  std::fprintf(stderr, "error: data: %s\n", msg.c_str());
  std::exit(3);
}

void check(tsx_status st) {
  if (st != TSX_OK) die(st);
}

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct Timing {
  std::vector<std::pair<std::string, double>> stages;

  template <class F>
  void run(const std::string& name, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    body();
    stages.emplace_back(
        name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "timing.csv", std::ios::binary);
    if (!out) die_data("cannot write " + (dir / "timing.csv").string());
    out << "stage,seconds\n";
    char buf[64];
    for (const auto& [name, s] : stages) {
      std::snprintf(buf, sizeof buf, "%.3f", s);
      out << name << ',' << buf << "\n";
    }
  }
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die_data("cannot create " + dir + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die_data("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const json& man) {
  write_text(dir / "manifest.json", man.dump(2) + "\n");
}

// map_*.csv files under dir, lexicographically sorted (writers zero-pad).
std::vector<std::string> list_maps(const std::string& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  fs::directory_iterator it(dir, ec), end;
  if (ec) die_data("cannot list " + dir + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) die_data("cannot list " + dir + ": " + ec.message());
    if (!it->is_regular_file()) continue;
    std::string name = it->path().filename().string();
    if (name.starts_with("map_") && name.ends_with(".csv")) out.push_back(it->path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) die_data("no map_*.csv files in " + dir);
  return out;
}

struct SaliencyHandle {
  tsx_saliency* s = nullptr;
  ~SaliencyHandle() { tsx_saliency_free(s); }
};

tsx_saliency* read_maps(const std::vector<std::string>& paths) {
  std::vector<const char*> cpaths;
  cpaths.reserve(paths.size());
  for (const auto& p : paths) cpaths.push_back(p.c_str());
  tsx_saliency* s = nullptr;
  check(tsx_saliency_read(cpaths.data(), static_cast<int>(cpaths.size()), &s));
  return s;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_data("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t end = line.find(',', pos);
    if (end == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
}

/* --- gen -------------------------------------------------------------- */

struct GenOpts {
  std::string kind = "pp";
  int n_train = 100, n_test = 100, d = 20, L = 100;
  int box_ch_lo = 0, box_ch_hi = 10, box_t_lo = 10, box_t_hi = 20;
  double offset = 1.0, ar_phi = 0.9;
  uint64_t seed = 0;
  int segments = 10;
  std::string out;
};

void run_gen(const GenOpts& o) {
  std::string params =
      "kind=" + o.kind + ",n_train=" + std::to_string(o.n_train) +
      ",n_test=" + std::to_string(o.n_test) + ",d=" + std::to_string(o.d) +
      ",L=" + std::to_string(o.L) + ",box_ch_lo=" + std::to_string(o.box_ch_lo) +
      ",box_ch_hi=" + std::to_string(o.box_ch_hi) + ",box_t_lo=" + std::to_string(o.box_t_lo) +
      ",box_t_hi=" + std::to_string(o.box_t_hi) + ",offset=" + fmt_double(o.offset) +
      ",ar_phi=" + fmt_double(o.ar_phi) + ",seed=" + std::to_string(o.seed);

  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  tsx_dataset* train = nullptr;
  tsx_dataset* test = nullptr;
  tsx_mask* mask = nullptr;
  timing.run("generate", [&] {
    check(tsx_generate(params.c_str(), &train, &test));
    check(tsx_generate_mask(params.c_str(), o.segments, &mask));
  });
  timing.run("write", [&] {
    check(tsx_dataset_write(train, (dir / "train.csv").string().c_str()));
    check(tsx_dataset_write(test, (dir / "test.csv").string().c_str()));
    check(tsx_mask_write(mask, (dir / "mask.csv").string().c_str()));
  });
  tsx_dataset_free(train);
  tsx_dataset_free(test);
  tsx_mask_free(mask);

  json man;
  man["command"] = "gen";
  man["config"] = {{"kind", o.kind},          {"n_train", o.n_train},
                   {"n_test", o.n_test},      {"d", o.d},
                   {"L", o.L},                {"box_ch_lo", o.box_ch_lo},
                   {"box_ch_hi", o.box_ch_hi},{"box_t_lo", o.box_t_lo},
                   {"box_t_hi", o.box_t_hi},  {"offset", o.offset},
                   {"ar_phi", o.ar_phi},      {"seed", o.seed},
                   {"mask_segments", o.segments}};
  man["outputs"] = {"train.csv", "test.csv", "mask.csv"};
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);
  std::printf("gen: wrote train.csv test.csv mask.csv in %s\n", o.out.c_str());
}

/* --- train ------------------------------------------------------------- */

struct TrainOpts {
  std::string model, data, out, eval;
  bool concat = false;
  int kernels = 2000, max_iter = 1000, epochs = 200, patience = 20, batch = 10;
  int filters1 = 16, filters2 = 32;
  double l2 = 1e-4, lr = -1.0;  // negative: the kind's own default
  uint64_t seed = 0;
};

void run_train(const TrainOpts& o, const CLI::App* cmd) {
  // Flags that only some kinds accept; anything set outside its kind is a typo.
  const std::map<std::string, std::vector<std::string>> only = {
      {"--kernels", {"rocket-logistic", "rocket-ridge", "channel-ensemble"}},
      {"--max-iter", {"rocket-logistic", "channel-ensemble"}},
      {"--l2", {"rocket-logistic", "channel-ensemble"}},
      {"--lr", {"rocket-logistic", "channel-ensemble", "gapcnn"}},
      {"--epochs", {"gapcnn"}},
      {"--patience", {"gapcnn"}},
      {"--batch", {"gapcnn"}},
      {"--filters1", {"gapcnn"}},
      {"--filters2", {"gapcnn"}},
      {"--seed", {"rocket-logistic", "rocket-ridge", "channel-ensemble", "gapcnn"}},
  };
  for (const auto& [flag, kinds] : only) {
    if (cmd->count(flag) == 0) continue;
    if (std::find(kinds.begin(), kinds.end(), o.model) == kinds.end())
      die_usage(flag + " does not apply to model kind " + o.model);
  }

  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  std::string params;
  json cfg;
  cfg["model"] = o.model;
  cfg["concat"] = o.concat;
  if (o.model == "ridge") {
    params = "";
  } else if (o.model == "rocket-logistic" || o.model == "channel-ensemble") {
    double lr = o.lr < 0 ? 0.0 : o.lr;
    params = "kernels=" + std::to_string(o.kernels) + ",seed=" + std::to_string(o.seed) +
             ",max_iter=" + std::to_string(o.max_iter) + ",l2=" + fmt_double(o.l2) +
             ",lr=" + fmt_double(lr);
    cfg["kernels"] = o.kernels;
    cfg["seed"] = o.seed;
    cfg["max_iter"] = o.max_iter;
    cfg["l2"] = o.l2;
    cfg["lr"] = lr;
  } else if (o.model == "rocket-ridge") {
    params = "kernels=" + std::to_string(o.kernels) + ",seed=" + std::to_string(o.seed);
    cfg["kernels"] = o.kernels;
    cfg["seed"] = o.seed;
  } else if (o.model == "gapcnn") {
    double lr = o.lr < 0 ? 1e-4 : o.lr;
    std::string log_path = (dir / "train_log.csv").string();
    params = "epochs=" + std::to_string(o.epochs) + ",patience=" + std::to_string(o.patience) +
             ",batch=" + std::to_string(o.batch) + ",lr=" + fmt_double(lr) +
             ",seed=" + std::to_string(o.seed) + ",filters1=" + std::to_string(o.filters1) +
             ",filters2=" + std::to_string(o.filters2) + ",log=" + log_path;
    cfg["epochs"] = o.epochs;
    cfg["patience"] = o.patience;
    cfg["batch"] = o.batch;
    cfg["lr"] = lr;
    cfg["seed"] = o.seed;
    cfg["filters1"] = o.filters1;
    cfg["filters2"] = o.filters2;
  } else {
    die_usage("unknown model kind " + o.model +
              " (want ridge, rocket-logistic, rocket-ridge, channel-ensemble or gapcnn)");
  }

  tsx_dataset* train = nullptr;
  timing.run("load", [&] {
    check(tsx_dataset_read(o.data.c_str(), &train));
    if (o.concat) {
      tsx_dataset* flat = nullptr;
      check(tsx_dataset_concat(train, &flat));
      tsx_dataset_free(train);
      train = flat;
    }
  });

  tsx_model* model = nullptr;
  timing.run("train", [&] { check(tsx_train(o.model.c_str(), train, params.c_str(), &model)); });
  timing.run("save", [&] { check(tsx_model_save(model, (dir / "model.tsx").string().c_str())); });

  json man;
  man["command"] = "train";
  man["config"] = cfg;
  man["inputs"] = {{"data", o.data}};
  man["outputs"] = {"model.tsx"};
  man["version"] = tsx_version();

  if (!o.eval.empty()) {
    tsx_dataset* ev = nullptr;
    double acc = 0.0;
    timing.run("eval", [&] {
      check(tsx_dataset_read(o.eval.c_str(), &ev));
      if (o.concat) {
        tsx_dataset* flat = nullptr;
        check(tsx_dataset_concat(ev, &flat));
        tsx_dataset_free(ev);
        ev = flat;
      }
      check(tsx_model_accuracy(model, ev, &acc));
    });
    tsx_dataset_free(ev);
    man["inputs"]["eval"] = o.eval;
    man["accuracy"] = acc;
    std::printf("train: %s accuracy %s\n", o.model.c_str(), fmt_double(acc).c_str());
  } else {
    std::printf("train: %s saved\n", o.model.c_str());
  }

  tsx_model_free(model);
  tsx_dataset_free(train);
  write_manifest(dir, man);
  timing.write(dir);
}

/* --- explain ------------------------------------------------------------ */

struct ExplainOpts {
  std::string method, model, data, train, out;
  int segments = 10, n_samples = 0, k = 200;
  uint64_t seed = 0;
};

void run_explain(const ExplainOpts& o) {
  if (o.method == "random") {
    if (!o.model.empty()) die_usage("--model does not apply to method random");
  } else if (o.model.empty()) {
    die_usage("method " + o.method + " needs --model");
  }

  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  tsx_dataset* test = nullptr;
  tsx_dataset* train = nullptr;
  tsx_model* model = nullptr;
  timing.run("load", [&] {
    check(tsx_dataset_read(o.data.c_str(), &test));
    if (!o.train.empty()) check(tsx_dataset_read(o.train.c_str(), &train));
    if (!o.model.empty()) check(tsx_model_load(o.model.c_str(), &model));
  });

  std::string params = "segments=" + std::to_string(o.segments) +
                       ",n_samples=" + std::to_string(o.n_samples) +
                       ",k=" + std::to_string(o.k) + ",seed=" + std::to_string(o.seed);

  tsx_saliency* maps = nullptr;
  timing.run("explain",
             [&] { check(tsx_explain(o.method.c_str(), model, train, test, params.c_str(), &maps)); });

  int n = tsx_saliency_count(maps);
  timing.run("write", [&] {
    char name[32];
    for (int i = 0; i < n; ++i) {
      std::snprintf(name, sizeof name, "map_%05d.csv", i);
      check(tsx_saliency_write(maps, i, (dir / name).string().c_str()));
    }
  });

  json man;
  man["command"] = "explain";
  man["config"] = {{"method", o.method}, {"segments", o.segments},
                   {"n_samples", o.n_samples}, {"k", o.k}, {"seed", o.seed}};
  man["inputs"] = {{"data", o.data}};
  if (!o.model.empty()) man["inputs"]["model"] = o.model;
  if (!o.train.empty()) man["inputs"]["train"] = o.train;
  man["outputs"] = {{"maps", n}, {"pattern", "map_%05d.csv"}};
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);

  tsx_saliency_free(maps);
  tsx_model_free(model);
  tsx_dataset_free(train);
  tsx_dataset_free(test);
  std::printf("explain: %s wrote %d maps in %s\n", o.method.c_str(), n, o.out.c_str());
}

/* --- eval-gt ------------------------------------------------------------- */

struct EvalGtOpts {
  std::string maps, mask, out;
};

void run_eval_gt(const EvalGtOpts& o) {
  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  tsx_mask* mask = nullptr;
  SaliencyHandle maps;
  std::vector<std::string> files;
  timing.run("load", [&] {
    check(tsx_mask_read(o.mask.c_str(), &mask));
    files = list_maps(o.maps);
    maps.s = read_maps(files);
  });

  int mc = tsx_mask_channels(mask), ms = tsx_mask_segments(mask);
  for (int i = 0; i < tsx_saliency_count(maps.s); ++i) {
    int c = tsx_saliency_channels(maps.s, i), s = tsx_saliency_segments(maps.s, i);
    if (c != mc || s % ms != 0)
      die_data("map " + files[static_cast<size_t>(i)] + " is " + std::to_string(c) + "x" +
               std::to_string(s) + " but the mask is " + std::to_string(mc) + "x" +
               std::to_string(ms));
  }

  double metrics[5] = {0, 0, 0, 0, 0};
  timing.run("score", [&] {
    SaliencyHandle aligned;
    check(tsx_saliency_align(maps.s, ms, &aligned.s));
    check(tsx_eval_gt(aligned.s, mask, metrics));
  });
  tsx_mask_free(mask);

  std::string csv = "precision,recall,f1,pr_auc,roc_auc\n";
  for (int i = 0; i < 5; ++i) csv += (i ? "," : "") + fmt_double(metrics[i]);
  csv += "\n";
  write_text(dir / "metrics.csv", csv);

  json man;
  man["command"] = "eval-gt";
  man["inputs"] = {{"maps", o.maps}, {"mask", o.mask}};
  man["config"] = {{"threshold", 50.0}, {"segments", ms}};
  man["outputs"] = {"metrics.csv"};
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);
  std::printf("eval-gt: P %s R %s F1 %s PR-AUC %s ROC-AUC %s\n", fmt_double(metrics[0]).c_str(),
              fmt_double(metrics[1]).c_str(), fmt_double(metrics[2]).c_str(),
              fmt_double(metrics[3]).c_str(), fmt_double(metrics[4]).c_str());
}

/* --- rank-channels -------------------------------------------------------- */

struct RankOpts {
  std::string maps, out;
};

void run_rank(const RankOpts& o) {
  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  SaliencyHandle maps;
  timing.run("load", [&] { maps.s = read_maps(list_maps(o.maps)); });

  int d = tsx_saliency_channels(maps.s, 0);
  std::vector<int> channels(static_cast<size_t>(d));
  std::vector<double> importance(static_cast<size_t>(d));
  int n = 0;
  timing.run("rank", [&] {
    check(tsx_rank_channels(maps.s, channels.data(), importance.data(), d, &n));
  });

  std::string csv = "channel,importance\n";
  for (int i = 0; i < n; ++i)
    csv += std::to_string(channels[static_cast<size_t>(i)]) + "," +
           fmt_double(importance[static_cast<size_t>(i)]) + "\n";
  write_text(dir / "ranking.csv", csv);

  json man;
  man["command"] = "rank-channels";
  man["inputs"] = {{"maps", o.maps}};
  man["outputs"] = {"ranking.csv"};
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);
  std::printf("rank-channels: wrote ranking.csv in %s\n", o.out.c_str());
}

/* --- eval-amee ------------------------------------------------------------- */

struct AmeeOpts {
  std::string train, test, out;
  std::vector<std::string> explainers;  // name=mapdir
  int referee_kernels = 500;
  uint64_t seed = 0;
  std::string strategies, fractions;  // semicolon lists, empty for defaults
};

void run_amee(const AmeeOpts& o) {
  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  tsx_dataset* train = nullptr;
  tsx_dataset* test = nullptr;
  timing.run("load", [&] {
    check(tsx_dataset_read(o.train.c_str(), &train));
    check(tsx_dataset_read(o.test.c_str(), &test));
  });
  int n = tsx_dataset_size(test);

  std::vector<std::string> names;
  std::vector<SaliencyHandle> handles(o.explainers.size());
  json cfg_explainers;
  timing.run("load-maps", [&] {
    for (size_t e = 0; e < o.explainers.size(); ++e) {
      const std::string& spec = o.explainers[e];
      size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        die_usage("--explainer wants name=mapdir, got '" + spec + "'");
      std::string name = spec.substr(0, eq), mapdir = spec.substr(eq + 1);
      std::vector<std::string> files = list_maps(mapdir);
      // a single map stands for "the same explanation for every instance"
      if (static_cast<int>(files.size()) == 1 && n > 1)
        files.assign(static_cast<size_t>(n), files[0]);
      handles[e].s = read_maps(files);
      names.push_back(name);
      cfg_explainers[name] = mapdir;
    }
  });

  std::string params = "referee_kernels=" + std::to_string(o.referee_kernels) +
                       ",seed=" + std::to_string(o.seed);
  if (!o.strategies.empty()) params += ",strategies=" + o.strategies;
  if (!o.fractions.empty()) params += ",fractions=" + o.fractions;

  std::vector<const char*> cnames;
  std::vector<const tsx_saliency*> cmaps;
  for (size_t e = 0; e < names.size(); ++e) {
    cnames.push_back(names[e].c_str());
    cmaps.push_back(handles[e].s);
  }

  char* report = nullptr;
  char* curves = nullptr;
  timing.run("amee", [&] {
    check(tsx_eval_amee(train, test, cnames.data(), cmaps.data(),
                        static_cast<int>(cnames.size()), params.c_str(), &report, &curves));
  });
  tsx_dataset_free(train);
  tsx_dataset_free(test);

  write_text(dir / "report.csv", report);
  write_text(dir / "curves.csv", curves);

  // surface the report's own exclusion note on stderr too
  std::istringstream rep(report);
  std::string line;
  while (std::getline(rep, line))
    if (line.starts_with("# excluded_referees,") && line != "# excluded_referees,none")
      std::fprintf(stderr, "warning: %s\n", line.substr(2).c_str());

  tsx_string_free(report);
  tsx_string_free(curves);

  json man;
  man["command"] = "eval-amee";
  man["config"] = {{"referee_kernels", o.referee_kernels},
                   {"seed", o.seed},
                   {"strategies", o.strategies.empty() ? "all" : o.strategies},
                   {"fractions", o.fractions.empty() ? "0;0.1;...;1" : o.fractions}};
  man["config"]["explainers"] = cfg_explainers;
  man["inputs"] = {{"train", o.train}, {"test", o.test}};
  man["outputs"] = {"report.csv", "curves.csv"};
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);
  std::printf("eval-amee: wrote report.csv curves.csv in %s\n", o.out.c_str());
}

/* --- report ---------------------------------------------------------------- */

struct ReportOpts {
  std::string runs, out;
};

void run_report(const ReportOpts& o) {
  ensure_dir(o.out);
  fs::path dir(o.out);
  Timing timing;

  std::vector<fs::path> run_dirs;
  timing.run("scan", [&] {
    std::error_code ec;
    fs::recursive_directory_iterator it(o.runs, ec), end;
    if (ec) die_data("cannot walk " + o.runs + ": " + ec.message());
    for (; it != end; it.increment(ec)) {
      if (ec) die_data("cannot walk " + o.runs + ": " + ec.message());
      if (it->is_regular_file() && it->path().filename() == "manifest.json")
        run_dirs.push_back(it->path().parent_path());
    }
    std::sort(run_dirs.begin(), run_dirs.end());
  });
  if (run_dirs.empty()) die_data("no run manifests under " + o.runs);

  json runs_json;
  std::string gt_csv = "run,precision,recall,f1,pr_auc,roc_auc\n";
  bool any_gt = false;
  std::string amee_csv = "run,explainer,average_auc,scaled_auc,explanation_power,rank\n";
  bool any_amee = false;

  timing.run("collect", [&] {
    for (const fs::path& rd : run_dirs) {
      std::string rel = fs::relative(rd, o.runs).string();
      std::ifstream in(rd / "manifest.json", std::ios::binary);
      json man = json::parse(in, nullptr, false);
      if (man.is_discarded()) die_data("manifest in " + rd.string() + " is not valid JSON");
      runs_json[rel] = man;

      if (fs::exists(rd / "metrics.csv")) {
        auto lines = read_lines(rd / "metrics.csv");
        if (lines.size() < 2 || split_commas(lines[1]).size() != 5)
          die_data("metrics.csv in " + rd.string() + " is malformed");
        gt_csv += rel + "," + lines[1] + "\n";
        any_gt = true;
      }
      if (fs::exists(rd / "report.csv")) {
        auto lines = read_lines(rd / "report.csv");
        bool seen_header = false;
        for (const auto& line : lines) {
          if (line.empty() || line[0] == '#') continue;
          if (!seen_header) {  // column header row
            seen_header = true;
            continue;
          }
          if (split_commas(line).size() != 5)
            die_data("report.csv in " + rd.string() + " is malformed");
          amee_csv += rel + "," + line + "\n";
          any_amee = true;
        }
      }
    }
  });

  write_text(dir / "runs.json", runs_json.dump(2) + "\n");
  if (any_gt) write_text(dir / "gt_metrics.csv", gt_csv);
  if (any_amee) write_text(dir / "amee_power.csv", amee_csv);

  json man;
  man["command"] = "report";
  man["inputs"] = {{"runs", o.runs}};
  json outs = json::array({"runs.json"});
  if (any_gt) outs.push_back("gt_metrics.csv");
  if (any_amee) outs.push_back("amee_power.csv");
  man["outputs"] = outs;
  man["version"] = tsx_version();
  write_manifest(dir, man);
  timing.write(dir);
  std::printf("report: consolidated %zu runs in %s\n", run_dirs.size(), o.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic time-series saliency benchmarks: generate, train, explain, evaluate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags win over file entries");
  app.set_version_flag("--version", tsx_version());

  int jobs = 0;
  app.add_option("--jobs", jobs, "worker threads (0 = auto); outputs do not depend on it")
      ->capture_default_str();

  GenOpts g;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic two-class benchmark");
  gen->fallthrough();
  gen->add_option("--kind", g.kind, "base signal: pp | gaussian | ar")->capture_default_str();
  gen->add_option("--n-train", g.n_train, "train instances")->capture_default_str();
  gen->add_option("--n-test", g.n_test, "test instances")->capture_default_str();
  gen->add_option("--d", g.d, "channels")->capture_default_str();
  gen->add_option("--L", g.L, "time steps")->capture_default_str();
  gen->add_option("--box-ch-lo", g.box_ch_lo, "box channel range start")->capture_default_str();
  gen->add_option("--box-ch-hi", g.box_ch_hi, "box channel range end (exclusive)")
      ->capture_default_str();
  gen->add_option("--box-t-lo", g.box_t_lo, "box time range start")->capture_default_str();
  gen->add_option("--box-t-hi", g.box_t_hi, "box time range end (exclusive)")
      ->capture_default_str();
  gen->add_option("--offset", g.offset, "class offset added inside the box")
      ->capture_default_str();
  gen->add_option("--ar-phi", g.ar_phi, "AR(1) coefficient (kind ar)")->capture_default_str();
  gen->add_option("--seed", g.seed, "generator seed")->capture_default_str();
  gen->add_option("--segments", g.segments, "mask resolution (columns per channel)")
      ->capture_default_str();
  gen->add_option("--out", g.out, "output directory")->required();

  TrainOpts t;
  CLI::App* train = app.add_subcommand("train", "train a classifier");
  train->fallthrough();
  train->add_option("--model", t.model,
                    "ridge | rocket-logistic | rocket-ridge | channel-ensemble | gapcnn")
      ->required();
  train->add_option("--data", t.data, "training dataset (mtscsv)")->required();
  train->add_flag("--concat", t.concat, "concatenate channels before training");
  train->add_option("--eval", t.eval, "dataset to report accuracy on");
  train->add_option("--kernels", t.kernels, "rocket kernel count")->capture_default_str();
  train->add_option("--max-iter", t.max_iter, "logistic iteration cap")->capture_default_str();
  train->add_option("--l2", t.l2, "logistic l2 strength")->capture_default_str();
  train->add_option("--lr", t.lr, "learning rate (default: kind-specific)");
  train->add_option("--epochs", t.epochs, "gapcnn epochs")->capture_default_str();
  train->add_option("--patience", t.patience, "gapcnn early-stop patience")
      ->capture_default_str();
  train->add_option("--batch", t.batch, "gapcnn minibatch size")->capture_default_str();
  train->add_option("--filters1", t.filters1, "gapcnn first conv filters")->capture_default_str();
  train->add_option("--filters2", t.filters2, "gapcnn second conv filters")
      ->capture_default_str();
  train->add_option("--seed", t.seed, "training seed")->capture_default_str();
  train->add_option("--out", t.out, "output directory")->required();

  ExplainOpts e;
  CLI::App* explain = app.add_subcommand("explain", "produce one saliency map per test instance");
  explain->fallthrough();
  explain->add_option("--method", e.method, "ridge | shap | shap-chbych | dcam | random")
      ->required();
  explain->add_option("--model", e.model, "trained model file (not for random)");
  explain->add_option("--data", e.data, "dataset to explain (mtscsv)")->required();
  explain->add_option("--train", e.train, "train split (background for the SHAP methods)");
  explain->add_option("--segments", e.segments, "segments per channel")->capture_default_str();
  explain->add_option("--n-samples", e.n_samples, "SHAP budget (0 = min(2^M, 2048))")
      ->capture_default_str();
  explain->add_option("--k", e.k, "dCAM permutation count")->capture_default_str();
  explain->add_option("--seed", e.seed, "explanation seed")->capture_default_str();
  explain->add_option("--out", e.out, "output directory")->required();

  EvalGtOpts eg;
  CLI::App* evalgt = app.add_subcommand("eval-gt", "score maps against the ground-truth mask");
  evalgt->fallthrough();
  evalgt->add_option("--maps", eg.maps, "directory of map_*.csv")->required();
  evalgt->add_option("--mask", eg.mask, "ground-truth mask file")->required();
  evalgt->add_option("--out", eg.out, "output directory")->required();

  RankOpts r;
  CLI::App* rank = app.add_subcommand("rank-channels", "order channels by mean saliency");
  rank->fallthrough();
  rank->add_option("--maps", r.maps, "directory of map_*.csv")->required();
  rank->add_option("--out", r.out, "output directory")->required();

  AmeeOpts a;
  CLI::App* amee = app.add_subcommand("eval-amee", "perturbation-based faithfulness ranking");
  amee->fallthrough();
  amee->add_option("--train", a.train, "train split (referee training)")->required();
  amee->add_option("--test", a.test, "test split")->required();
  amee->add_option("--explainer", a.explainers,
                   "name=mapdir (repeatable; a single map is reused for every instance)")
      ->required();
  amee->add_option("--referee-kernels", a.referee_kernels, "kernels per rocket referee")
      ->capture_default_str();
  amee->add_option("--seed", a.seed, "protocol seed")->capture_default_str();
  amee->add_option("--strategies", a.strategies,
                   "semicolon list of mean-local|mean-global|gaussian-local|gaussian-global");
  amee->add_option("--fractions", a.fractions, "semicolon list of perturbed fractions");
  amee->add_option("--out", a.out, "output directory")->required();

  ReportOpts rp;
  CLI::App* report = app.add_subcommand("report", "consolidate run outputs into tables");
  report->fallthrough();
  report->add_option("--runs", rp.runs, "directory tree of run outputs")->required();
  report->add_option("--out", rp.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::fprintf(stderr, "error: usage: %s\n", err.what());
    return 2;
  }

  tsx_set_jobs(jobs);
  if (gen->parsed()) run_gen(g);
  if (train->parsed()) run_train(t, train);
  if (explain->parsed()) run_explain(e);
  if (evalgt->parsed()) run_eval_gt(eg);
  if (rank->parsed()) run_rank(r);
  if (amee->parsed()) run_amee(a);
  if (report->parsed()) run_report(rp);
  return 0;
}
