#include "dmac/report.hpp"

#include <stdexcept>

namespace dmac {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config field '" + key + "' has the wrong type");
  }
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null())
    return std::nullopt;
  return j.get<double>();
}

json loss_to_json(const LossRecord& r) {
  return {{"L", r.total},
          {"L_AL", r.anchor_learning},
          {"L_CM", r.consistency},
          {"L_SP", r.structure},
          {"L_AL_views", r.anchor_learning_views}};
}

LossRecord loss_from_json(const json& j) {
  LossRecord r;
  r.total = j.at("L").get<double>();
  r.anchor_learning = j.at("L_AL").get<double>();
  r.consistency = j.at("L_CM").get<double>();
  r.structure = j.at("L_SP").get<double>();
  r.anchor_learning_views = j.at("L_AL_views").get<std::vector<double>>();
  return r;
}

bool same_losses(const std::vector<LossRecord>& a, const std::vector<LossRecord>& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].total != b[i].total || a[i].anchor_learning != b[i].anchor_learning ||
        a[i].consistency != b[i].consistency || a[i].structure != b[i].structure ||
        a[i].anchor_learning_views != b[i].anchor_learning_views)
      return false;
  return true;
}

} // namespace

json config_to_json(const TrainConfig& cfg) {
  json j;
  j["alpha"] = cfg.weights.alpha;
  j["beta"] = cfg.weights.beta;
  j["alpha_grid"] = cfg.alpha_grid;
  j["beta_grid"] = cfg.beta_grid;
  j["anchors"] = cfg.anchors ? json(*cfg.anchors) : json(nullptr);
  j["knn"] = cfg.k_neighbors;
  j["encoder_hidden"] = cfg.encoder.hidden;
  j["embed_dim"] = cfg.encoder.embed_dim;
  j["encoder_activation"] = to_string(cfg.encoder.activation);
  j["agcn_hidden"] = cfg.agcn.hidden;
  j["agcn_activation"] = to_string(cfg.agcn.activation);
  j["lr"] = cfg.optimizer.learning_rate;
  j["rho"] = cfg.optimizer.decay;
  j["eps"] = cfg.optimizer.epsilon;
  j["epochs"] = cfg.epochs;
  j["anchor_refresh"] = cfg.anchor_refresh;
  j["seed"] = cfg.seed;
  j["wo_pd"] = cfg.disable_perturbation;
  j["wo_cm"] = cfg.disable_consistency;
  j["final_restarts"] = cfg.final_restarts;
  return j;
}

void apply_config_json(TrainConfig& cfg, const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "alpha")
      cfg.weights.alpha = field<double>(v, key);
    else if (key == "beta")
      cfg.weights.beta = field<double>(v, key);
    else if (key == "alpha_grid")
      cfg.alpha_grid = field<std::vector<double>>(v, key);
    else if (key == "beta_grid")
      cfg.beta_grid = field<std::vector<double>>(v, key);
    else if (key == "anchors")
      cfg.anchors = v.is_null() ? std::nullopt : std::optional(field<std::size_t>(v, key));
    else if (key == "knn")
      cfg.k_neighbors = field<std::size_t>(v, key);
    else if (key == "encoder_hidden")
      cfg.encoder.hidden = field<std::vector<std::size_t>>(v, key);
    else if (key == "embed_dim")
      cfg.encoder.embed_dim = field<std::size_t>(v, key);
    else if (key == "encoder_activation")
      cfg.encoder.activation = parse_activation(field<std::string>(v, key));
    else if (key == "agcn_hidden")
      cfg.agcn.hidden = field<std::vector<std::size_t>>(v, key);
    else if (key == "agcn_activation")
      cfg.agcn.activation = parse_activation(field<std::string>(v, key));
    else if (key == "lr")
      cfg.optimizer.learning_rate = field<double>(v, key);
    else if (key == "rho")
      cfg.optimizer.decay = field<double>(v, key);
    else if (key == "eps")
      cfg.optimizer.epsilon = field<double>(v, key);
    else if (key == "epochs")
      cfg.epochs = field<std::size_t>(v, key);
    else if (key == "anchor_refresh")
      cfg.anchor_refresh = field<std::size_t>(v, key);
    else if (key == "seed")
      cfg.seed = field<std::uint64_t>(v, key);
    else if (key == "wo_pd")
      cfg.disable_perturbation = field<bool>(v, key);
    else if (key == "wo_cm")
      cfg.disable_consistency = field<bool>(v, key);
    else if (key == "final_restarts")
      cfg.final_restarts = field<std::size_t>(v, key);
    else
      throw std::invalid_argument("unknown config field '" + key + "'");
  }
}

bool RunSummary::operator==(const RunSummary& o) const {
  return seed == o.seed && acc == o.acc && nmi == o.nmi && final_loss == o.final_loss &&
         anchors == o.anchors && anchor_shift == o.anchor_shift &&
         same_losses(history, o.history) && epoch_seconds == o.epoch_seconds;
}

bool RunReport::operator==(const RunReport& o) const {
  return config == o.config && nmi_normalization == o.nmi_normalization && runs == o.runs &&
         mean_acc == o.mean_acc && mean_nmi == o.mean_nmi && outputs == o.outputs;
}

RunSummary summarize(const TrainResult& result, std::uint64_t seed) {
  RunSummary s;
  s.seed = seed;
  s.acc = result.acc;
  s.nmi = result.nmi;
  s.final_loss = result.final_loss();
  s.anchors = result.anchor_count;
  s.anchor_shift = max_abs_diff(result.final_anchors, result.initial_anchors);
  s.history = result.history;
  s.epoch_seconds = result.epoch_seconds;
  return s;
}

json report_to_json(const RunReport& r) {
  json runs = json::array();
  for (const auto& s : r.runs) {
    json losses = json::array();
    for (const auto& l : s.history)
      losses.push_back(loss_to_json(l));
    runs.push_back({{"seed", s.seed},
                    {"ACC", optional_to_json(s.acc)},
                    {"NMI", optional_to_json(s.nmi)},
                    {"final_loss", s.final_loss},
                    {"anchors", s.anchors},
                    {"anchor_shift", s.anchor_shift},
                    {"loss_history", losses},
                    {"epoch_seconds", s.epoch_seconds}});
  }
  return {{"config", r.config},
          {"nmi_normalization", r.nmi_normalization},
          {"runs", runs},
          {"mean_ACC", optional_to_json(r.mean_acc)},
          {"mean_NMI", optional_to_json(r.mean_nmi)},
          {"outputs", r.outputs}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.config = j.at("config");
  r.nmi_normalization = j.at("nmi_normalization").get<std::string>();
  for (const auto& s : j.at("runs")) {
    RunSummary run;
    run.seed = s.at("seed").get<std::uint64_t>();
    run.acc = optional_from_json(s.at("ACC"));
    run.nmi = optional_from_json(s.at("NMI"));
    run.final_loss = s.at("final_loss").get<double>();
    run.anchors = s.at("anchors").get<std::size_t>();
    run.anchor_shift = s.at("anchor_shift").get<double>();
    for (const auto& l : s.at("loss_history"))
      run.history.push_back(loss_from_json(l));
    run.epoch_seconds = s.at("epoch_seconds").get<std::vector<double>>();
    r.runs.push_back(std::move(run));
  }
  r.mean_acc = optional_from_json(j.at("mean_ACC"));
  r.mean_nmi = optional_from_json(j.at("mean_NMI"));
  r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return r;
}

} // namespace dmac
