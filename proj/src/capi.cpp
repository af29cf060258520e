#include "tsxai/tsxai.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amee.hpp"
#include "error.hpp"
#include "evalgt.hpp"
#include "explain.hpp"
#include "gapcnn.hpp"
#include "io.hpp"
#include "modelio.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "synthgen.hpp"
#include "tsdata.hpp"

using namespace tsxai;

struct tsx_dataset {
  LabeledDataset ds;
};
struct tsx_mask {
  GroundTruthMask mask;
};
struct tsx_saliency {
  std::vector<SaliencyMap> maps;
};
struct tsx_model {
  std::string kind;
  std::unique_ptr<RidgeConcatModel> ridge;
  std::unique_ptr<RocketLogisticModel> rocket_logistic;
  std::unique_ptr<RocketRidgeModel> rocket_ridge;
  std::unique_ptr<ChannelEnsemble> ensemble;
  std::unique_ptr<GapCnnModel> gapcnn;

  const ProbClassifier& classifier() const {
    if (ridge) return *ridge;
    if (rocket_logistic) return *rocket_logistic;
    if (rocket_ridge) return *rocket_ridge;
    if (ensemble) return *ensemble;
    if (gapcnn) return *gapcnn;
    throw DomainError("model handle holds nothing");
  }
};

namespace {

thread_local std::string g_error;

tsx_status status_for(ErrCat cat) {
  switch (cat) {
    case ErrCat::Argument:
      return TSX_ERR_ARGUMENT;
    case ErrCat::Data:
      return TSX_ERR_DATA;
    case ErrCat::Numeric:
      return TSX_ERR_NUMERIC;
    case ErrCat::Io:
      return TSX_ERR_IO;
  }
  return TSX_ERR_INTERNAL;
}

template <typename F>
tsx_status guarded(F&& body) {
  try {
    body();
    return TSX_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return status_for(e.category());
  } catch (const std::exception& e) {
    g_error = e.what();
    return TSX_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown failure";
    return TSX_ERR_INTERNAL;
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

using ParamMap = std::map<std::string, std::string>;

// "key=value,key=value"; keys outside `allowed` are rejected so typos fail
// loudly instead of silently keeping a default.
ParamMap parse_params(const char* params, const std::vector<std::string>& allowed) {
  ParamMap out;
  if (params == nullptr) return out;
  std::string s(params);
  size_t pos = 0;
  while (pos < s.size()) {
    size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    std::string pair = s.substr(pos, end - pos);
    pos = end + 1;
    if (pair.empty()) continue;
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
      throw DomainError("malformed parameter '" + pair + "' (want key=value)");
    std::string key = pair.substr(0, eq), value = pair.substr(eq + 1);
    bool known = false;
    for (const auto& a : allowed) known = known || a == key;
    if (!known) throw DomainError("unknown parameter '" + key + "'");
    if (out.count(key)) throw DomainError("duplicate parameter '" + key + "'");
    out[key] = value;
  }
  return out;
}

long long param_int(const ParamMap& p, const std::string& key, long long dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size())
    throw DomainError("parameter " + key + ": '" + it->second + "' is not an integer");
  return v;
}

uint64_t param_u64(const ParamMap& p, const std::string& key, uint64_t dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size())
    throw DomainError("parameter " + key + ": '" + it->second + "' is not a non-negative integer");
  return v;
}

double param_double(const ParamMap& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size())
    throw DomainError("parameter " + key + ": '" + it->second + "' is not a number");
  return v;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= v.size()) {
    size_t end = v.find(';', pos);
    if (end == std::string::npos) end = v.size();
    if (end > pos) out.push_back(v.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

SynthSpec spec_from_params(const char* params) {
  ParamMap p = parse_params(
      params, {"kind", "n_train", "n_test", "d", "L", "box_ch_lo", "box_ch_hi", "box_t_lo",
               "box_t_hi", "offset", "ar_phi", "seed"});
  SynthSpec spec;
  if (p.count("kind")) spec.kind = parse_kind(p.at("kind"));
  spec.n_train = static_cast<int>(param_int(p, "n_train", spec.n_train));
  spec.n_test = static_cast<int>(param_int(p, "n_test", spec.n_test));
  spec.d = static_cast<int>(param_int(p, "d", spec.d));
  spec.L = static_cast<int>(param_int(p, "L", spec.L));
  spec.box_ch_lo = static_cast<int>(param_int(p, "box_ch_lo", spec.box_ch_lo));
  spec.box_ch_hi = static_cast<int>(param_int(p, "box_ch_hi", spec.box_ch_hi));
  spec.box_t_lo = static_cast<int>(param_int(p, "box_t_lo", spec.box_t_lo));
  spec.box_t_hi = static_cast<int>(param_int(p, "box_t_hi", spec.box_t_hi));
  spec.offset = param_double(p, "offset", spec.offset);
  spec.ar_phi = param_double(p, "ar_phi", spec.ar_phi);
  spec.seed = param_u64(p, "seed", spec.seed);
  spec.validate();
  return spec;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* tsx_last_error(void) { return g_error.c_str(); }

void tsx_set_jobs(int n) { set_jobs(n); }

const char* tsx_version(void) { return "1.0.0"; }

void tsx_dataset_free(tsx_dataset* ds) { delete ds; }
void tsx_mask_free(tsx_mask* m) { delete m; }
void tsx_model_free(tsx_model* m) { delete m; }
void tsx_saliency_free(tsx_saliency* s) { delete s; }
void tsx_string_free(char* s) { std::free(s); }

/* --- datasets ------------------------------------------------------------ */

tsx_status tsx_generate(const char* params, tsx_dataset** train, tsx_dataset** test) {
  if (train) *train = nullptr;
  if (test) *test = nullptr;
  return guarded([&] {
    require(train != nullptr && test != nullptr, "tsx_generate: output pointers are NULL");
    SynthSpec spec = spec_from_params(params);
    auto [tr, te] = generate_dataset(spec);
    *train = new tsx_dataset{std::move(tr)};
    *test = new tsx_dataset{std::move(te)};
  });
}

tsx_status tsx_generate_mask(const char* params, int segments_per_channel, tsx_mask** mask) {
  if (mask) *mask = nullptr;
  return guarded([&] {
    require(mask != nullptr, "tsx_generate_mask: output pointer is NULL");
    SynthSpec spec = spec_from_params(params);
    *mask = new tsx_mask{ground_truth_mask(spec, segments_per_channel)};
  });
}

tsx_status tsx_dataset_read(const char* path, tsx_dataset** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(out != nullptr && path != nullptr, "tsx_dataset_read: NULL argument");
    *out = new tsx_dataset{read_dataset(path)};
  });
}

tsx_status tsx_dataset_write(const tsx_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "tsx_dataset_write: NULL argument");
    write_dataset(ds->ds, path);
  });
}

tsx_status tsx_dataset_concat(const tsx_dataset* ds, tsx_dataset** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "tsx_dataset_concat: NULL argument");
    *out = new tsx_dataset{concat_channels(ds->ds)};
  });
}

int tsx_dataset_size(const tsx_dataset* ds) { return ds ? ds->ds.size() : -1; }
int tsx_dataset_channels(const tsx_dataset* ds) { return ds ? ds->ds.channels() : -1; }
int tsx_dataset_length(const tsx_dataset* ds) { return ds ? ds->ds.length() : -1; }
int tsx_dataset_classes(const tsx_dataset* ds) { return ds ? ds->ds.n_classes() : -1; }

tsx_status tsx_mask_read(const char* path, tsx_mask** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(out != nullptr && path != nullptr, "tsx_mask_read: NULL argument");
    *out = new tsx_mask{GroundTruthMask(read_saliency(path).weights())};
  });
}

tsx_status tsx_mask_write(const tsx_mask* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "tsx_mask_write: NULL argument");
    write_saliency(SaliencyMap(m->mask.values(), Scale::Raw), path);
  });
}

int tsx_mask_channels(const tsx_mask* m) { return m ? m->mask.channels() : -1; }
int tsx_mask_segments(const tsx_mask* m) { return m ? m->mask.segments() : -1; }

/* --- models --------------------------------------------------------------- */

tsx_status tsx_train(const char* kind, const tsx_dataset* train, const char* params,
                     tsx_model** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(kind != nullptr && train != nullptr && out != nullptr, "tsx_train: NULL argument");
    std::string k(kind);
    auto m = std::make_unique<tsx_model>();
    m->kind = k;
    if (k == "ridge") {
      parse_params(params, {});
      m->ridge = std::make_unique<RidgeConcatModel>(RidgeConcatModel::train(train->ds));
    } else if (k == "rocket-logistic" || k == "channel-ensemble") {
      ParamMap p = parse_params(params, {"kernels", "seed", "max_iter", "l2", "lr"});
      RocketLogisticModel::Config cfg;
      cfg.n_kernels = static_cast<int>(param_int(p, "kernels", cfg.n_kernels));
      cfg.seed = param_u64(p, "seed", cfg.seed);
      cfg.max_iter = static_cast<int>(param_int(p, "max_iter", cfg.max_iter));
      cfg.l2 = param_double(p, "l2", cfg.l2);
      cfg.lr = param_double(p, "lr", cfg.lr);
      if (k == "rocket-logistic")
        m->rocket_logistic =
            std::make_unique<RocketLogisticModel>(RocketLogisticModel::train(train->ds, cfg));
      else
        m->ensemble = std::make_unique<ChannelEnsemble>(ChannelEnsemble::train(train->ds, cfg));
    } else if (k == "rocket-ridge") {
      ParamMap p = parse_params(params, {"kernels", "seed"});
      m->rocket_ridge = std::make_unique<RocketRidgeModel>(RocketRidgeModel::train(
          train->ds, static_cast<int>(param_int(p, "kernels", 2000)), param_u64(p, "seed", 0)));
    } else if (k == "gapcnn") {
      ParamMap p = parse_params(
          params, {"epochs", "patience", "batch", "lr", "seed", "filters1", "filters2", "log"});
      GapCnnConfig cfg;
      cfg.epochs = static_cast<int>(param_int(p, "epochs", cfg.epochs));
      cfg.patience = static_cast<int>(param_int(p, "patience", cfg.patience));
      cfg.batch = static_cast<int>(param_int(p, "batch", cfg.batch));
      cfg.lr = param_double(p, "lr", cfg.lr);
      cfg.seed = param_u64(p, "seed", cfg.seed);
      cfg.filters1 = static_cast<int>(param_int(p, "filters1", cfg.filters1));
      cfg.filters2 = static_cast<int>(param_int(p, "filters2", cfg.filters2));
      if (p.count("log")) cfg.log_path = p.at("log");
      m->gapcnn = std::make_unique<GapCnnModel>(GapCnnModel::train(train->ds, cfg));
    } else {
      throw DomainError("unknown model kind '" + k +
                        "' (want ridge, rocket-logistic, rocket-ridge, channel-ensemble or "
                        "gapcnn)");
    }
    *out = m.release();
  });
}

tsx_status tsx_model_save(const tsx_model* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "tsx_model_save: NULL argument");
    if (m->ridge)
      m->ridge->save(path);
    else if (m->rocket_logistic)
      m->rocket_logistic->save(path);
    else if (m->rocket_ridge)
      m->rocket_ridge->save(path);
    else if (m->ensemble)
      m->ensemble->save(path);
    else if (m->gapcnn)
      m->gapcnn->save(path);
    else
      throw DomainError("model handle holds nothing");
  });
}

tsx_status tsx_model_load(const char* path, tsx_model** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(path != nullptr && out != nullptr, "tsx_model_load: NULL argument");
    std::string type = ModelFile::load(path).type();
    auto m = std::make_unique<tsx_model>();
    if (type == "ridge_concat") {
      m->kind = "ridge";
      m->ridge = std::make_unique<RidgeConcatModel>(RidgeConcatModel::load(path));
    } else if (type == "rocket_logistic") {
      m->kind = "rocket-logistic";
      m->rocket_logistic = std::make_unique<RocketLogisticModel>(RocketLogisticModel::load(path));
    } else if (type == "rocket_ridge") {
      m->kind = "rocket-ridge";
      m->rocket_ridge = std::make_unique<RocketRidgeModel>(RocketRidgeModel::load(path));
    } else if (type == "channel_ensemble") {
      m->kind = "channel-ensemble";
      m->ensemble = std::make_unique<ChannelEnsemble>(ChannelEnsemble::load(path));
    } else if (type == "gapcnn") {
      m->kind = "gapcnn";
      m->gapcnn = std::make_unique<GapCnnModel>(GapCnnModel::load(path));
    } else {
      throw DimensionMismatch("model file holds unknown type '" + type + "'");
    }
    *out = m.release();
  });
}

const char* tsx_model_kind(const tsx_model* m) { return m ? m->kind.c_str() : nullptr; }

tsx_status tsx_model_accuracy(const tsx_model* m, const tsx_dataset* ds, double* out) {
  if (out) *out = 0.0;
  return guarded([&] {
    require(m != nullptr && ds != nullptr && out != nullptr, "tsx_model_accuracy: NULL argument");
    *out = m->classifier().accuracy(ds->ds);
  });
}

/* --- explanations ---------------------------------------------------------- */

tsx_status tsx_explain(const char* method, const tsx_model* model, const tsx_dataset* train,
                       const tsx_dataset* test, const char* params, tsx_saliency** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(method != nullptr && test != nullptr && out != nullptr, "tsx_explain: NULL argument");
    ExplainMethod em = parse_method(method);
    ParamMap p = parse_params(params, {"segments", "n_samples", "k", "seed"});
    ExplainParams ep;
    ep.segments = static_cast<int>(param_int(p, "segments", ep.segments));
    ep.n_samples = static_cast<int>(param_int(p, "n_samples", ep.n_samples));
    ep.k_perms = static_cast<int>(param_int(p, "k", ep.k_perms));
    ep.seed = param_u64(p, "seed", ep.seed);

    auto need_kind = [&](const char* kind, bool ok) {
      require(model != nullptr && ok, std::string("method ") + method + " needs a " + kind +
                                          " model, got " +
                                          (model ? "'" + model->kind + "'" : "none"));
    };

    auto s = std::make_unique<tsx_saliency>();
    switch (em) {
      case ExplainMethod::Ridge:
        need_kind("ridge", model != nullptr && model->ridge != nullptr);
        s->maps = explain_ridge(*model->ridge, test->ds);
        break;
      case ExplainMethod::ShapConcat:
        need_kind("rocket-logistic", model != nullptr && model->rocket_logistic != nullptr);
        require(train != nullptr, "method shap needs the train split for the masking background");
        s->maps = explain_shap_concat(*model->rocket_logistic, train->ds, test->ds, ep);
        break;
      case ExplainMethod::ShapChannel:
        need_kind("channel-ensemble", model != nullptr && model->ensemble != nullptr);
        require(train != nullptr,
                "method shap-chbych needs the train split for the masking background");
        s->maps = explain_shap_channels(*model->ensemble, train->ds, test->ds, ep);
        break;
      case ExplainMethod::Dcam:
        need_kind("gapcnn", model != nullptr && model->gapcnn != nullptr);
        s->maps = explain_dcam(*model->gapcnn, test->ds, ep);
        break;
      case ExplainMethod::Random:
        require(model == nullptr, "method random takes no model");
        s->maps = random_maps(test->ds.size(), test->ds.channels(), ep.segments, ep.seed);
        break;
    }
    *out = s.release();
  });
}

int tsx_saliency_count(const tsx_saliency* s) { return s ? static_cast<int>(s->maps.size()) : -1; }

int tsx_saliency_channels(const tsx_saliency* s, int index) {
  if (s == nullptr || index < 0 || index >= static_cast<int>(s->maps.size())) return -1;
  return s->maps[static_cast<size_t>(index)].channels();
}

int tsx_saliency_segments(const tsx_saliency* s, int index) {
  if (s == nullptr || index < 0 || index >= static_cast<int>(s->maps.size())) return -1;
  return s->maps[static_cast<size_t>(index)].segments();
}

tsx_status tsx_saliency_write(const tsx_saliency* s, int index, const char* path) {
  return guarded([&] {
    require(s != nullptr && path != nullptr, "tsx_saliency_write: NULL argument");
    require(index >= 0 && index < static_cast<int>(s->maps.size()),
            "map index " + std::to_string(index) + " out of range");
    write_saliency(s->maps[static_cast<size_t>(index)], path);
  });
}

tsx_status tsx_saliency_read(const char* const* paths, int count, tsx_saliency** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(paths != nullptr && out != nullptr, "tsx_saliency_read: NULL argument");
    require(count > 0, "tsx_saliency_read: need at least one path");
    auto s = std::make_unique<tsx_saliency>();
    s->maps.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      require(paths[i] != nullptr, "tsx_saliency_read: NULL path");
      s->maps.push_back(read_saliency(paths[i]));
    }
    *out = s.release();
  });
}

tsx_status tsx_saliency_align(const tsx_saliency* s, int segments, tsx_saliency** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(s != nullptr && out != nullptr, "tsx_saliency_align: NULL argument");
    *out = new tsx_saliency{align_to_segments(s->maps, segments)};
  });
}

tsx_status tsx_mask_as_saliency(const tsx_mask* m, int count, tsx_saliency** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(m != nullptr && out != nullptr, "tsx_mask_as_saliency: NULL argument");
    require(count > 0, "tsx_mask_as_saliency: need a positive count");
    auto s = std::make_unique<tsx_saliency>();
    s->maps.assign(static_cast<size_t>(count), SaliencyMap(m->mask.values(), Scale::Raw));
    *out = s.release();
  });
}

tsx_status tsx_random_maps(int count, int channels, int segments, uint64_t seed,
                           tsx_saliency** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(out != nullptr, "tsx_random_maps: NULL output pointer");
    *out = new tsx_saliency{random_maps(count, channels, segments, seed)};
  });
}

/* --- evaluation ------------------------------------------------------------ */

tsx_status tsx_eval_gt(const tsx_saliency* maps, const tsx_mask* mask, double out_metrics[5]) {
  if (out_metrics)
    for (int i = 0; i < 5; ++i) out_metrics[i] = 0.0;
  return guarded([&] {
    require(maps != nullptr && mask != nullptr && out_metrics != nullptr,
            "tsx_eval_gt: NULL argument");
    GtMetrics mean = evaluate_explainer(maps->maps, mask->mask).first;
    out_metrics[0] = mean.precision;
    out_metrics[1] = mean.recall;
    out_metrics[2] = mean.f1;
    out_metrics[3] = mean.pr_auc;
    out_metrics[4] = mean.roc_auc;
  });
}

tsx_status tsx_rank_channels(const tsx_saliency* maps, int* channel_out, double* importance_out,
                             int cap, int* n_out) {
  if (n_out) *n_out = 0;
  return guarded([&] {
    require(maps != nullptr && channel_out != nullptr && importance_out != nullptr &&
                n_out != nullptr,
            "tsx_rank_channels: NULL argument");
    auto ranked = rank_channels(maps->maps);
    require(cap >= static_cast<int>(ranked.size()),
            "buffer holds " + std::to_string(cap) + " entries but there are " +
                std::to_string(ranked.size()) + " channels");
    for (size_t i = 0; i < ranked.size(); ++i) {
      channel_out[i] = ranked[i].first;
      importance_out[i] = ranked[i].second;
    }
    *n_out = static_cast<int>(ranked.size());
  });
}

tsx_status tsx_eval_amee(const tsx_dataset* train, const tsx_dataset* test,
                         const char* const* names, const tsx_saliency* const* maps,
                         int n_explainers, const char* params, char** report_csv,
                         char** curves_csv) {
  if (report_csv) *report_csv = nullptr;
  if (curves_csv) *curves_csv = nullptr;
  return guarded([&] {
    require(train != nullptr && test != nullptr && names != nullptr && maps != nullptr &&
                report_csv != nullptr,
            "tsx_eval_amee: NULL argument");
    require(n_explainers >= 2, "tsx_eval_amee: need at least two explainers");

    ParamMap p = parse_params(params, {"referee_kernels", "seed", "strategies", "fractions"});
    AmeeConfig cfg;
    cfg.referee_kernels = static_cast<int>(param_int(p, "referee_kernels", cfg.referee_kernels));
    cfg.seed = param_u64(p, "seed", cfg.seed);
    if (p.count("strategies"))
      for (const auto& name : split_list(p.at("strategies")))
        cfg.strategies.push_back(parse_strategy(name));
    if (p.count("fractions"))
      for (const auto& tok : split_list(p.at("fractions"))) {
        double f = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), f);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
          throw DomainError("parameter fractions: '" + tok + "' is not a number");
        cfg.fractions.push_back(f);
      }

    std::vector<NamedExplanations> explainers;
    for (int i = 0; i < n_explainers; ++i) {
      require(names[i] != nullptr && maps[i] != nullptr, "tsx_eval_amee: NULL explainer entry");
      explainers.push_back({names[i], maps[i]->maps});
    }

    AmeeResult res = run_amee(train->ds, test->ds, explainers, cfg);
    *report_csv = dup_string(format_amee_report(res));
    if (curves_csv) *curves_csv = dup_string(format_amee_curves(res.curves));
  });
}

} /* extern "C" */
