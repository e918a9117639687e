#include "obj2text/json_io.hpp"

#include "obj2text/errors.hpp"

namespace obj2text {

using nlohmann::json;

void to_json(json& j, const AblationFlags& flags) {
  j = json{{"no_locations", flags.no_locations}, {"no_counts", flags.no_counts}};
}

void from_json(const json& j, AblationFlags& flags) {
  if (!j.is_object()) throw ConfigError("ablation: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_boolean()) throw ConfigError("ablation." + key + ": expected a boolean");
    if (key == "no_locations") {
      flags.no_locations = value.get<bool>();
    } else if (key == "no_counts") {
      flags.no_counts = value.get<bool>();
    } else {
      throw ConfigError("ablation: unknown key '" + key + "'");
    }
  }
}

void to_json(json& j, const MetricReport& report) {
  j = json{{"bleu_1", report.bleu[0]}, {"bleu_2", report.bleu[1]}, {"bleu_3", report.bleu[2]},
           {"bleu_4", report.bleu[3]}, {"cider", report.cider},    {"rouge_l", report.rouge_l}};
}

void to_json(json& j, const HistoryEntry& entry) {
  j = json{{"iteration", entry.iteration},
           {"train_loss", entry.train_loss},
           {"val_loss", entry.val_loss},
           {"val_per_token", entry.val_per_token},
           {"val_metrics", entry.val_metrics}};
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"epsilon", c.epsilon},
           {"batch_size", c.batch_size},
           {"max_iterations", c.max_iterations},
           {"grad_clip", c.grad_clip},
           {"seed", c.seed},
           {"ablation", c.ablation},
           {"hidden", c.hidden},
           {"eval_every", c.eval_every},
           {"aux_dim", c.aux_dim},
           {"min_count", c.min_count},
           {"max_caption_len", c.max_caption_len},
           {"object_order", to_string(c.object_order)},
           {"order_seed", c.order_seed},
           {"split", {c.split.train, c.split.val, c.split.test}},
           {"split_seed", c.split_seed},
           {"eval_beam_size", c.eval_beam_size},
           {"eval_max_len", c.eval_max_len},
           {"eval_limit", c.eval_limit},
           {"dropout", c.dropout},
           {"init_scale", c.init_scale},
           {"forget_bias", c.forget_bias}};
}

namespace {

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

TrainConfig parse_train_config(const json& j) {
  if (!j.is_object()) throw ConfigError("train config: expected a JSON object");
  TrainConfig c;
  if (auto it = j.find("preset"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("preset: expected a string");
    c = TrainConfig::preset(it->get<std::string>());
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "learning_rate") c.learning_rate = as_real(v, key);
    else if (key == "beta1") c.beta1 = as_real(v, key);
    else if (key == "beta2") c.beta2 = as_real(v, key);
    else if (key == "epsilon") c.epsilon = as_real(v, key);
    else if (key == "batch_size") c.batch_size = as_count(v, key);
    else if (key == "max_iterations") c.max_iterations = as_count(v, key);
    else if (key == "grad_clip") c.grad_clip = as_real(v, key);
    else if (key == "seed") c.seed = as_count(v, key);
    else if (key == "ablation") c.ablation = v.get<AblationFlags>();
    else if (key == "hidden") c.hidden = as_count(v, key);
    else if (key == "eval_every") c.eval_every = as_count(v, key);
    else if (key == "aux_dim") c.aux_dim = as_count(v, key);
    else if (key == "min_count") c.min_count = as_count(v, key);
    else if (key == "max_caption_len") c.max_caption_len = as_count(v, key);
    else if (key == "object_order") {
      if (!v.is_string()) throw ConfigError(key + ": expected a string");
      try {
        c.object_order = parse_object_order(v.get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "order_seed") c.order_seed = as_count(v, key);
    else if (key == "split") {
      if (!v.is_array() || v.size() != 3) throw ConfigError("split: expected [train, val, test]");
      c.split = {as_real(v[0], key), as_real(v[1], key), as_real(v[2], key)};
    } else if (key == "split_seed") c.split_seed = as_count(v, key);
    else if (key == "eval_beam_size") c.eval_beam_size = as_count(v, key);
    else if (key == "eval_max_len") c.eval_max_len = as_count(v, key);
    else if (key == "eval_limit") c.eval_limit = as_count(v, key);
    else if (key == "dropout") c.dropout = as_real(v, key);
    else if (key == "init_scale") c.init_scale = as_real(v, key);
    else if (key == "forget_bias") c.forget_bias = as_real(v, key);
    else throw ConfigError("train config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace obj2text
